//! Evaluation protocol: scenario fixtures, Monte Carlo robustness, template
//! stability, alpha sweeps, ablation, pilot replication and CSV export of the
//! data behind the figures.
//!
//! Every stochastic run `k` draws from a ChaCha stream keyed by `(seed, k)`,
//! so reports are a pure function of their inputs and seed.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::attribute::{
    clamp_unit, Attribute, CategoricalAnchors, CombineMode, Level, MatchState, ParamSet,
    PartialAttributeVector, ScoreState,
};
use crate::context_tree::{AttributeSource, ChildRef, ContextTree, LeafInputs, Node};
use crate::error::{Error, Result};
use crate::library::{StrategyLibrary, StrategyTemplate};
use crate::recommender::{
    rank_strategies, score_templates, RankedEntry, RecommendInputs, Recommendation,
};

pub const DEFAULT_SEED: u64 = 41;

/// Alpha grid of the sensitivity analysis.
pub const DEFAULT_ALPHA_GRID: [f64; 6] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];

/// Projected second-half drop in residual energy used by the pilot.
pub const PILOT_FATIGUE_DISCOUNT: f64 = -0.15;

pub const DEFAULT_SCENARIOS_JSON: &str = include_str!("../data/scenarios.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub team: PartialAttributeVector,
    #[serde(default, alias = "opp", skip_serializing_if = "Option::is_none")]
    pub opponent: Option<PartialAttributeVector>,
    #[serde(default)]
    pub state: MatchState,
    pub expected_top: Vec<String>,
    #[serde(default)]
    pub provenance: String,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.expected_top.is_empty() {
            return Err(Error::field(
                format!("{}.expected_top", self.name),
                "must name at least one strategy",
            ));
        }
        if let Some(opp) = &self.opponent {
            if opp.active() != self.team.active() {
                return Err(Error::ShapeMismatch);
            }
        }
        self.state.validate()
    }

    /// The scenario as a ranking request with default parameters.
    pub fn inputs(&self) -> RecommendInputs {
        RecommendInputs {
            team: self.team,
            opponent: self.opponent,
            state: self.state,
            params: ParamSet::default(),
        }
    }

    fn rank(&self, library: &StrategyLibrary) -> Result<Recommendation> {
        self.inputs().rank(library)
    }
}

/// Parses and validates a fixtures file (a JSON array of scenarios).
pub fn load_scenarios(text: &str) -> Result<Vec<ScenarioSpec>> {
    let specs: Vec<ScenarioSpec> = serde_json::from_str(text)?;
    for spec in &specs {
        spec.validate()?;
    }
    Ok(specs)
}

/// The four shipped scenario fixtures.
pub fn default_scenarios() -> Vec<ScenarioSpec> {
    load_scenarios(DEFAULT_SCENARIOS_JSON).expect("shipped scenarios are valid")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub scenario: String,
    pub chosen: String,
    pub expected_top: Vec<String>,
    pub passed: bool,
    pub recommendation: Recommendation,
}

pub fn run_scenarios(
    specs: &[ScenarioSpec],
    library: &StrategyLibrary,
) -> Result<Vec<ScenarioOutcome>> {
    specs
        .iter()
        .map(|spec| {
            spec.validate()?;
            let recommendation = spec.rank(library)?;
            Ok(ScenarioOutcome {
                scenario: spec.name.clone(),
                chosen: recommendation.chosen.clone(),
                expected_top: spec.expected_top.clone(),
                passed: spec.expected_top.contains(&recommendation.chosen),
                recommendation,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseMode {
    /// `x * (1 + eps)`.
    #[default]
    Multiplicative,
    /// `x + eps`.
    Additive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub runs: usize,
    pub seed: u64,
    #[serde(default)]
    pub mode: NoiseMode,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec {
            sigma: 0.05,
            runs: 100,
            seed: DEFAULT_SEED,
            mode: NoiseMode::Multiplicative,
        }
    }
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if !self.sigma.is_finite() || self.sigma < 0.0 {
            return Err(Error::NegativeSigma(self.sigma));
        }
        if self.runs == 0 {
            return Err(Error::field("runs", "must be at least 1"));
        }
        Ok(())
    }
}

/// Generator for run `k` under `seed`.
pub fn run_rng(seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k as u64);
    rng
}

/// Perturbs every active component and clamps into `[0, 1]`.
pub fn perturb_vector<R: rand::Rng + ?Sized>(
    v: &PartialAttributeVector,
    sigma: f64,
    mode: NoiseMode,
    rng: &mut R,
) -> Result<PartialAttributeVector> {
    if sigma.is_nan() || sigma < 0.0 {
        return Err(Error::NegativeSigma(sigma));
    }
    if sigma == 0.0 {
        return Ok(*v);
    }
    let normal = Normal::new(0.0, sigma).map_err(|_| Error::NegativeSigma(sigma))?;
    let mut out = *v;
    for (a, x) in v.iter() {
        let eps = normal.sample(rng);
        let noisy = match mode {
            NoiseMode::Multiplicative => x * (1.0 + eps),
            NoiseMode::Additive => x + eps,
        };
        out = out.with(a, clamp_unit(noisy))?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PerturbationTarget {
    Team,
    Templates,
}

/// Share of perturbed runs whose top strategy matches the unperturbed one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub scenario: String,
    pub target: PerturbationTarget,
    pub baseline: String,
    /// Top strategy of each run, in run order.
    pub chosen: Vec<String>,
    pub matches: usize,
    pub runs: usize,
    pub r: f64,
    pub sigma: f64,
    pub seed: u64,
    pub mode: NoiseMode,
}

impl RobustnessReport {
    fn new(
        scenario: &ScenarioSpec,
        target: PerturbationTarget,
        baseline: String,
        chosen: Vec<String>,
        noise: &NoiseSpec,
    ) -> Self {
        let matches = chosen.iter().filter(|c| **c == baseline).count();
        let runs = chosen.len();
        RobustnessReport {
            scenario: scenario.name.clone(),
            target,
            baseline,
            chosen,
            matches,
            runs,
            r: matches as f64 / runs as f64,
            sigma: noise.sigma,
            seed: noise.seed,
            mode: noise.mode,
        }
    }

    /// How often each strategy came out on top, by name.
    pub fn histogram(&self) -> BTreeMap<&str, usize> {
        let mut counts = BTreeMap::new();
        for c in &self.chosen {
            *counts.entry(c.as_str()).or_insert(0) += 1;
        }
        counts
    }
}

/// Input-noise robustness: the team vector is perturbed each run.
pub fn robustness(
    spec: &ScenarioSpec,
    noise: &NoiseSpec,
    library: &StrategyLibrary,
) -> Result<RobustnessReport> {
    noise.validate()?;
    let base = spec.rank(library)?;
    let mut inputs = spec.inputs();
    let mut chosen = Vec::with_capacity(noise.runs);
    for k in 0..noise.runs {
        let mut rng = run_rng(noise.seed, k);
        inputs.team = perturb_vector(&spec.team, noise.sigma, noise.mode, &mut rng)?;
        chosen.push(inputs.rank(library)?.chosen);
    }
    Ok(RobustnessReport::new(
        spec,
        PerturbationTarget::Team,
        base.chosen,
        chosen,
        noise,
    ))
}

/// Template stability: every library profile gets additive noise each run.
pub fn template_stability(
    spec: &ScenarioSpec,
    sigma: f64,
    runs: usize,
    seed: u64,
    library: &StrategyLibrary,
) -> Result<RobustnessReport> {
    let noise = NoiseSpec {
        sigma,
        runs,
        seed,
        mode: NoiseMode::Additive,
    };
    noise.validate()?;
    let base = spec.rank(library)?;
    let mut chosen = Vec::with_capacity(runs);
    for k in 0..runs {
        let mut rng = run_rng(seed, k);
        let perturbed = library.perturbed(sigma, &mut rng)?;
        chosen.push(spec.rank(&perturbed)?.chosen);
    }
    Ok(RobustnessReport::new(
        spec,
        PerturbationTarget::Templates,
        base.chosen,
        chosen,
        &noise,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyScore {
    pub name: String,
    pub d_comb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPoint {
    pub alpha: f64,
    pub chosen: String,
    /// Combined score per strategy, in library order.
    pub scores: Vec<StrategyScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub scenario: String,
    pub points: Vec<SensitivityPoint>,
    /// Same top strategy at every alpha.
    pub stable: bool,
}

/// Subtractive scores across an alpha grid.
pub fn sensitivity_sweep(
    spec: &ScenarioSpec,
    alphas: &[f64],
    library: &StrategyLibrary,
) -> Result<SensitivityReport> {
    let opponent = spec
        .opponent
        .as_ref()
        .ok_or_else(|| Error::MissingOpponent(spec.name.clone()))?;
    if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::field("alpha", format!("{a} is outside [0, 1]")));
    }
    let mut points = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let params = ParamSet {
            alpha,
            combine_mode: CombineMode::Subtractive,
            ..ParamSet::default()
        };
        let rec = rank_strategies(&spec.team, Some(opponent), library, &spec.state, &params)?;
        let scores = library
            .iter()
            .map(|t| StrategyScore {
                name: t.name.clone(),
                d_comb: rec.entry(&t.name).expect("every template is ranked").d_comb,
            })
            .collect();
        points.push(SensitivityPoint {
            alpha,
            chosen: rec.chosen,
            scores,
        });
    }
    let stable = points.windows(2).all(|w| w[0].chosen == w[1].chosen);
    Ok(SensitivityReport {
        scenario: spec.name.clone(),
        points,
        stable,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationEntry {
    pub attribute: Attribute,
    pub chosen: String,
    /// Combined score of the baseline top strategy after suppression.
    pub top_score: f64,
    /// `top_score` minus the baseline top score.
    pub distance_shift: f64,
    /// Strategies whose rank differs from the baseline ranking.
    pub rank_changes: usize,
    /// Full ranking with the attribute suppressed.
    pub ranking: Vec<RankedEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub scenario: String,
    pub baseline: String,
    pub baseline_score: f64,
    /// One entry per active attribute, in attribute order.
    pub entries: Vec<AblationEntry>,
}

impl AblationReport {
    pub fn entry(&self, attribute: Attribute) -> Option<&AblationEntry> {
        self.entries.iter().find(|e| e.attribute == attribute)
    }
}

/// Sets each active team attribute to 0 in turn and re-scores under the
/// baseline weights, so only that attribute's term moves.
pub fn ablation(spec: &ScenarioSpec, library: &StrategyLibrary) -> Result<AblationReport> {
    spec.validate()?;
    let params = ParamSet::default();
    let base = spec.rank(library)?;
    let baseline_score = base.entries[0].d_comb;
    let base_ranks: BTreeMap<usize, usize> = base.entries.iter().map(|e| (e.id, e.rank)).collect();

    let mut entries = Vec::new();
    for attribute in spec.team.active().iter() {
        let team = spec.team.with(attribute, 0.0)?;
        let ranked = score_templates(
            &team,
            spec.opponent.as_ref(),
            library,
            &base.weights,
            base.energy,
            base.alpha,
            &params,
        )?;
        let top_score = ranked
            .iter()
            .find(|e| e.id == base.chosen_id)
            .expect("baseline top is ranked")
            .d_comb;
        let rank_changes = ranked
            .iter()
            .filter(|e| base_ranks[&e.id] != e.rank)
            .count();
        entries.push(AblationEntry {
            attribute,
            chosen: ranked[0].name.clone(),
            top_score,
            distance_shift: top_score - baseline_score,
            rank_changes,
            ranking: ranked,
        });
    }
    Ok(AblationReport {
        scenario: spec.name.clone(),
        baseline: base.chosen,
        baseline_score,
        entries,
    })
}

/// Attributes ordered by mean absolute distance shift across reports,
/// largest first; ties by attribute order.
pub fn attribute_importance(reports: &[AblationReport]) -> Vec<(Attribute, f64)> {
    let mut totals: BTreeMap<Attribute, (f64, usize)> = BTreeMap::new();
    for report in reports {
        for e in &report.entries {
            let t = totals.entry(e.attribute).or_insert((0.0, 0));
            t.0 += e.distance_shift.abs();
            t.1 += 1;
        }
    }
    let mut out: Vec<(Attribute, f64)> = totals
        .into_iter()
        .map(|(a, (sum, n))| (a, sum / n as f64))
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1));
    out
}

/// One categorical observation from the pilot match sheet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotObservation {
    pub leaf: String,
    pub attribute: Attribute,
    pub first_half: Level,
    pub second_half: Level,
}

fn pilot_observations() -> Vec<PilotObservation> {
    use Attribute::*;
    use Level::*;
    [
        ("offensive_power", OffensiveStrength, High, High),
        ("direct_vertical_attacks", TransitionSpeed, High, Medium),
        ("counterattacks", TransitionSpeed, High, High),
        ("compact_defense", DefensiveStrength, Medium, Low),
        ("residual_energy", ResidualEnergy, Medium, Low),
        ("gegenpressing", HighPressCapability, Medium, Medium),
    ]
    .into_iter()
    .map(
        |(leaf, attribute, first_half, second_half)| PilotObservation {
            leaf: leaf.to_string(),
            attribute,
            first_half,
            second_half,
        },
    )
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotRow {
    pub name: String,
    pub d_eucl: f64,
    pub d_adapt: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PilotReport {
    pub observations: Vec<PilotObservation>,
    /// Projected second-half team vector over the observed attributes.
    pub team: PartialAttributeVector,
    pub chosen: String,
    /// Rows in ranking order.
    pub rows: Vec<PilotRow>,
    pub recommendation: Recommendation,
}

impl PilotReport {
    pub fn row(&self, name: &str) -> Option<&PilotRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

/// Halftime team vector built from the first-half observations: categorical
/// levels mapped through `anchors`, both transition observables combined by
/// maximum into A4, then the fatigue discount on A8.
pub fn pilot_team(anchors: &CategoricalAnchors) -> Result<PartialAttributeVector> {
    let observations = pilot_observations();
    let mut by_attribute: BTreeMap<Attribute, Vec<&PilotObservation>> = BTreeMap::new();
    for o in &observations {
        by_attribute.entry(o.attribute).or_default().push(o);
    }
    let mut tree = ContextTree::all_direct();
    let mut leaves = LeafInputs::new();
    for (attribute, group) in by_attribute {
        let refs = group
            .iter()
            .map(|o| ChildRef::Leaf(o.leaf.clone()))
            .collect();
        tree = tree.with_source(
            attribute,
            AttributeSource::Tree(Node::max(attribute.code(), refs)),
        )?;
        for o in group {
            leaves.insert(o.leaf.clone(), anchors.value(o.first_half));
        }
    }
    tree.evaluate_available(&leaves, &BTreeMap::new())?
        .apply_fatigue_discount(Attribute::ResidualEnergy, PILOT_FATIGUE_DISCOUNT)
}

/// Reproduces the halftime ranking of the pilot match.
pub fn pilot_replication() -> Result<PilotReport> {
    pilot_replication_with(
        &CategoricalAnchors::default(),
        &StrategyLibrary::builtin_canonical(),
    )
}

pub fn pilot_replication_with(
    anchors: &CategoricalAnchors,
    library: &StrategyLibrary,
) -> Result<PilotReport> {
    let team = pilot_team(anchors)?;
    let state = MatchState::new(0.5, ScoreState::Drawing)?;
    let recommendation = rank_strategies(&team, None, library, &state, &ParamSet::default())?;
    let rows = recommendation
        .entries
        .iter()
        .map(|e| PilotRow {
            name: e.name.clone(),
            d_eucl: e.d_eucl,
            d_adapt: e.d_adapt,
            rank: e.rank,
        })
        .collect();
    Ok(PilotReport {
        observations: pilot_observations(),
        team,
        chosen: recommendation.chosen.clone(),
        rows,
        recommendation,
    })
}

/// Team and strategy values over the team's active attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarSeries {
    pub strategy: String,
    pub points: Vec<(Attribute, f64, f64)>,
}

pub fn radar_series(team: &PartialAttributeVector, template: &StrategyTemplate) -> RadarSeries {
    RadarSeries {
        strategy: template.name.clone(),
        points: team
            .iter()
            .map(|(a, x)| (a, x, template.profile.value(a)))
            .collect(),
    }
}

/// Inputs for the CSV export; empty families are skipped.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FigureData {
    pub radar: Option<RadarSeries>,
    pub sensitivity: Vec<SensitivityReport>,
    pub robustness: Vec<RobustnessReport>,
    pub ablation: Vec<AblationReport>,
}

fn num(x: f64) -> String {
    format!("{x:.6}")
}

fn to_csv(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn radar_csv(series: &RadarSeries) -> Result<String> {
    let rows = series
        .points
        .iter()
        .map(|(a, team, strategy)| vec![a.code().to_string(), num(*team), num(*strategy)])
        .collect();
    to_csv(&["attribute", "team", "strategy"], rows)
}

pub fn sensitivity_csv(reports: &[SensitivityReport]) -> Result<String> {
    let mut rows = Vec::new();
    for r in reports {
        for p in &r.points {
            for s in &p.scores {
                rows.push(vec![
                    r.scenario.clone(),
                    num(p.alpha),
                    s.name.clone(),
                    num(s.d_comb),
                ]);
            }
        }
    }
    to_csv(&["scenario", "alpha", "strategy", "d_comb"], rows)
}

pub fn robustness_csv(reports: &[RobustnessReport]) -> Result<String> {
    let mut rows = Vec::new();
    for r in reports {
        for (name, count) in r.histogram() {
            rows.push(vec![
                r.scenario.clone(),
                format!("{:?}", r.target).to_lowercase(),
                name.to_string(),
                count.to_string(),
                (name == r.baseline).to_string(),
            ]);
        }
    }
    to_csv(
        &["scenario", "target", "strategy", "count", "baseline"],
        rows,
    )
}

pub fn ablation_csv(reports: &[AblationReport]) -> Result<String> {
    let mut rows = Vec::new();
    for r in reports {
        for e in &r.entries {
            rows.push(vec![
                r.scenario.clone(),
                e.attribute.code().to_string(),
                e.chosen.clone(),
                num(e.distance_shift),
                e.rank_changes.to_string(),
            ]);
        }
    }
    to_csv(
        &[
            "scenario",
            "attribute",
            "chosen",
            "distance_shift",
            "rank_changes",
        ],
        rows,
    )
}

/// Writes one CSV per non-empty figure family into `dir` and returns the
/// paths written.
pub fn export_figure_data(data: &FigureData, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    if let Some(series) = &data.radar {
        files.push(("radar.csv", radar_csv(series)?));
    }
    if !data.sensitivity.is_empty() {
        files.push(("sensitivity.csv", sensitivity_csv(&data.sensitivity)?));
    }
    if !data.robustness.is_empty() {
        files.push(("robustness.csv", robustness_csv(&data.robustness)?));
    }
    if !data.ablation.is_empty() {
        files.push(("ablation.csv", ablation_csv(&data.ablation)?));
    }
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}

/// Plain-text table of the pilot distances.
pub fn format_pilot_table(report: &PilotReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<20} {:>8} {:>8} {:>5}",
        "strategy", "d_eucl", "d_adapt", "rank"
    );
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{:<20} {:>8.4} {:>8.4} {:>5}",
            r.name, r.d_eucl, r.d_adapt, r.rank
        );
    }
    let _ = writeln!(out, "recommended: {}", report.chosen);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attribute::Profile;

    fn canonical() -> StrategyLibrary {
        StrategyLibrary::builtin_canonical()
    }

    #[test]
    fn shipped_fixtures_pass() {
        let outcomes = run_scenarios(&default_scenarios(), &canonical()).unwrap();
        assert_eq!(outcomes.len(), 4);
        for o in &outcomes {
            assert!(o.passed, "{} chose {}", o.scenario, o.chosen);
        }
    }

    #[test]
    fn zero_noise_is_perfectly_robust() {
        let spec = &default_scenarios()[0];
        let noise = NoiseSpec {
            sigma: 0.0,
            runs: 10,
            ..NoiseSpec::default()
        };
        let r = robustness(spec, &noise, &canonical()).unwrap();
        assert_eq!(r.r, 1.0);
        assert_eq!(r.matches, 10);
        let t = template_stability(spec, 0.0, 10, DEFAULT_SEED, &canonical()).unwrap();
        assert_eq!(t.r, 1.0);
    }

    #[test]
    fn single_run_is_an_indicator() {
        let spec = &default_scenarios()[1];
        let noise = NoiseSpec {
            sigma: 0.3,
            runs: 1,
            ..NoiseSpec::default()
        };
        let r = robustness(spec, &noise, &canonical()).unwrap();
        assert!(r.r == 0.0 || r.r == 1.0);
    }

    #[test]
    fn robustness_counts_are_exact() {
        let spec = &default_scenarios()[0];
        let noise = NoiseSpec {
            sigma: 0.2,
            runs: 37,
            ..NoiseSpec::default()
        };
        let r = robustness(spec, &noise, &canonical()).unwrap();
        assert_eq!(r.chosen.len(), 37);
        assert_eq!(r.r * 37.0, r.matches as f64);
        assert_eq!(r.histogram().values().sum::<usize>(), 37);
    }

    #[test]
    fn runs_are_seeded() {
        let spec = &default_scenarios()[2];
        let noise = NoiseSpec {
            sigma: 0.2,
            runs: 20,
            ..NoiseSpec::default()
        };
        let a = robustness(spec, &noise, &canonical()).unwrap();
        let b = robustness(spec, &noise, &canonical()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noise_stays_in_unit_interval() {
        let v = default_scenarios()[0].team;
        for mode in [NoiseMode::Multiplicative, NoiseMode::Additive] {
            for k in 0..50 {
                let p = perturb_vector(&v, 0.5, mode, &mut run_rng(7, k)).unwrap();
                assert!(p.iter().all(|(_, x)| (0.0..=1.0).contains(&x)));
                assert_eq!(p.active(), v.active());
            }
        }
    }

    #[test]
    fn rejects_bad_noise() {
        let spec = &default_scenarios()[0];
        let noise = NoiseSpec {
            sigma: -0.1,
            ..NoiseSpec::default()
        };
        assert!(matches!(
            robustness(spec, &noise, &canonical()),
            Err(Error::NegativeSigma(_))
        ));
        let noise = NoiseSpec {
            runs: 0,
            ..NoiseSpec::default()
        };
        assert!(robustness(spec, &noise, &canonical()).is_err());
    }

    #[test]
    fn alpha_zero_matches_plain_ranking() {
        let spec = &default_scenarios()[3];
        let sweep = sensitivity_sweep(spec, &[0.0], &canonical()).unwrap();
        let plain = rank_strategies(
            &spec.team,
            None,
            &canonical(),
            &spec.state,
            &ParamSet::default(),
        )
        .unwrap();
        let point = &sweep.points[0];
        assert_eq!(point.chosen, plain.chosen);
        for s in &point.scores {
            let e = plain.entry(&s.name).unwrap();
            assert_eq!(s.d_comb, e.d_adapt);
        }
    }

    #[test]
    fn sweep_needs_an_opponent() {
        let mut spec = default_scenarios()[0].clone();
        spec.opponent = None;
        assert!(matches!(
            sensitivity_sweep(&spec, &DEFAULT_ALPHA_GRID, &canonical()),
            Err(Error::MissingOpponent(_))
        ));
        let spec = &default_scenarios()[0];
        assert!(sensitivity_sweep(spec, &[1.5], &canonical()).is_err());
    }

    #[test]
    fn ablation_covers_active_attributes() {
        let spec = &default_scenarios()[0];
        let report = ablation(spec, &canonical()).unwrap();
        assert_eq!(report.entries.len(), 14);
        for (e, a) in report.entries.iter().zip(Attribute::ALL) {
            assert_eq!(e.attribute, a);
        }
    }

    #[test]
    fn suppressing_a_zero_attribute_changes_nothing() {
        let mut spec = default_scenarios()[1].clone();
        spec.team = spec.team.with(Attribute::WidthUtilization, 0.0).unwrap();
        let report = ablation(&spec, &canonical()).unwrap();
        let e = report.entry(Attribute::WidthUtilization).unwrap();
        assert_eq!(e.distance_shift, 0.0);
        assert_eq!(e.rank_changes, 0);
        assert_eq!(e.chosen, report.baseline);
    }

    #[test]
    fn pilot_vector() {
        let team = pilot_team(&CategoricalAnchors::default()).unwrap();
        let want = [
            (Attribute::OffensiveStrength, 0.85),
            (Attribute::DefensiveStrength, 0.50),
            (Attribute::TransitionSpeed, 0.85),
            (Attribute::HighPressCapability, 0.50),
            (Attribute::ResidualEnergy, 0.35),
        ];
        assert_eq!(team.active().len(), 5);
        for (a, v) in want {
            assert!((team.get(a).unwrap() - v).abs() < 1e-12, "{a}");
        }
    }

    #[test]
    fn radar_shape() {
        let report = pilot_replication().unwrap();
        let lib = canonical();
        let series = radar_series(&report.team, lib.by_name("Build-up Play").unwrap());
        let csv = radar_csv(&series).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "attribute,team,strategy");
        assert_eq!(lines.len(), 6);
        assert!(lines[1..].iter().all(|l| l.split(',').count() == 3));
    }

    #[test]
    fn sensitivity_csv_shape() {
        let lib = canonical();
        let reports: Vec<_> = default_scenarios()
            .iter()
            .map(|s| sensitivity_sweep(s, &DEFAULT_ALPHA_GRID, &lib).unwrap())
            .collect();
        let csv = sensitivity_csv(&reports).unwrap();
        assert_eq!(csv.lines().count(), 1 + 4 * 6 * 5);
    }
}
