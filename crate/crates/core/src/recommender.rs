//! Strategy selection: weights from match context, per-strategy scoring,
//! deterministic ranking and per-attribute diagnostics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::attribute::{
    Attribute, CombineMode, MatchState, ParamSet, PartialAttributeVector, Profile, ScoreState,
};
use crate::distance::{
    adapted_distance, combine, compute_multipliers, euclidean, normalize_weights,
    prototype_multiplier, ContextMultipliers, GapEstimate, WeightVector,
};
use crate::error::{Error, Result};
use crate::library::{StrategyLibrary, StrategyTemplate};

/// Deltas beyond this magnitude are labeled deficit or surplus.
pub const DIAGNOSTIC_THRESHOLD: f64 = 0.10;

/// Scores equal after rounding to this many units per 1.0 are ties.
const TIE_RESOLUTION: f64 = 1e12;

/// Ordering key for a score; equal keys fall back to library order.
pub fn rank_key(score: f64) -> i64 {
    (score * TIE_RESOLUTION).round() as i64
}

/// Team minus opponent on A12 and A13. A gap is zero when either side lacks
/// the attribute.
pub fn estimate_gaps(team: &impl Profile, opp: &impl Profile) -> GapEstimate {
    let gap = |a: Attribute| match (team.get(a), opp.get(a)) {
        (Some(t), Some(o)) => t - o,
        _ => 0.0,
    };
    GapEstimate {
        delta_tech: gap(Attribute::TechnicalBase),
        delta_phys: gap(Attribute::PhysicalBase),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeltaClass {
    /// Strategy demands more than the team has.
    Deficit,
    Aligned,
    /// Team exceeds the strategy's demand.
    Surplus,
}

impl DeltaClass {
    pub fn of(delta: f64) -> Self {
        if delta > DIAGNOSTIC_THRESHOLD {
            DeltaClass::Deficit
        } else if delta < -DIAGNOSTIC_THRESHOLD {
            DeltaClass::Surplus
        } else {
            DeltaClass::Aligned
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeDelta {
    pub attribute: Attribute,
    pub team: f64,
    pub strategy: f64,
    /// `strategy - team`
    pub delta: f64,
    pub class: DeltaClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub strategy: String,
    pub deltas: Vec<AttributeDelta>,
}

impl Diagnostics {
    pub fn delta(&self, attribute: Attribute) -> Option<&AttributeDelta> {
        self.deltas.iter().find(|d| d.attribute == attribute)
    }
}

/// Per-attribute `strategy - team` over the team's active attributes.
pub fn diagnostics(
    team: &PartialAttributeVector,
    chosen: &StrategyTemplate,
) -> Result<Diagnostics> {
    let projected = chosen.profile.project(team.active())?;
    let deltas = team
        .iter()
        .map(|(attribute, t)| {
            let s = projected.get(attribute).ok_or(Error::ShapeMismatch)?;
            let delta = s - t;
            Ok(AttributeDelta {
                attribute,
                team: t,
                strategy: s,
                delta,
                class: DeltaClass::of(delta),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Diagnostics {
        strategy: chosen.name.clone(),
        deltas,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry {
    pub id: usize,
    pub name: String,
    pub d_eucl: f64,
    pub d_adapt: f64,
    /// Adapted distance from the opponent, when one was given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_opp: Option<f64>,
    pub d_comb: f64,
    pub rank: usize,
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub chosen: String,
    pub chosen_id: usize,
    pub entries: Vec<RankedEntry>,
    pub weights: WeightVector,
    pub gaps: GapEstimate,
    pub state: MatchState,
    /// Energy level the weights were computed from.
    pub energy: f64,
    pub alpha: f64,
    pub combine_mode: CombineMode,
    pub diagnostics: Diagnostics,
}

impl Recommendation {
    pub fn entry(&self, name: &str) -> Option<&RankedEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn rank_of(&self, name: &str) -> Option<usize> {
        self.entry(name).map(|e| e.rank)
    }
}

/// Everything a ranking request needs besides the library.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecommendInputs {
    pub team: PartialAttributeVector,
    #[serde(default, alias = "opp", skip_serializing_if = "Option::is_none")]
    pub opponent: Option<PartialAttributeVector>,
    #[serde(default)]
    pub state: MatchState,
    #[serde(default)]
    pub params: ParamSet,
}

impl RecommendInputs {
    pub fn new(team: impl Into<PartialAttributeVector>) -> Self {
        RecommendInputs {
            team: team.into(),
            opponent: None,
            state: MatchState::default(),
            params: ParamSet::default(),
        }
    }

    pub fn with_opponent(mut self, opponent: impl Into<PartialAttributeVector>) -> Self {
        self.opponent = Some(opponent.into());
        self
    }

    pub fn with_state(mut self, state: MatchState) -> Self {
        self.state = state;
        self
    }

    pub fn with_params(mut self, params: ParamSet) -> Self {
        self.params = params;
        self
    }

    pub fn rank(&self, library: &StrategyLibrary) -> Result<Recommendation> {
        rank_strategies(
            &self.team,
            self.opponent.as_ref(),
            library,
            &self.state,
            &self.params,
        )
    }
}

/// Energy used for weighting: explicit override, else the team's A8, else
/// the threshold itself (no deficit).
pub fn resolve_energy(team: &impl Profile, state: &MatchState, params: &ParamSet) -> f64 {
    state
        .energy
        .or_else(|| team.get(Attribute::ResidualEnergy))
        .unwrap_or(params.tau_e)
}

/// Weights for a request, over the team's active attributes.
pub fn context_weights(
    team: &PartialAttributeVector,
    gaps: GapEstimate,
    state: &MatchState,
    params: &ParamSet,
) -> Result<(ContextMultipliers, WeightVector)> {
    let energy = resolve_energy(team, state, params);
    let m = compute_multipliers(energy, gaps, state, params);
    let w = normalize_weights(&m, team.active())?;
    Ok((m, w))
}

/// Scores every template against the team and ranks them ascending by
/// combined score, breaking ties by library order.
///
/// Profiles are projected onto the team's active attributes. Without an
/// opponent the opponent term and the gaps are zero.
pub fn rank_strategies(
    team: &PartialAttributeVector,
    opponent: Option<&PartialAttributeVector>,
    library: &StrategyLibrary,
    state: &MatchState,
    params: &ParamSet,
) -> Result<Recommendation> {
    if library.is_empty() {
        return Err(Error::EmptyLibrary);
    }
    state.validate()?;
    params.validate()?;
    if let Some(opp) = opponent {
        if opp.active() != team.active() {
            return Err(Error::ShapeMismatch);
        }
    }

    let gaps = opponent.map_or(GapEstimate::ZERO, |opp| estimate_gaps(team, opp));
    let alpha = if opponent.is_some() {
        params.alpha
    } else {
        0.0
    };
    let energy = resolve_energy(team, state, params);
    let (_, weights) = context_weights(team, gaps, state, params)?;

    let entries = score_templates(team, opponent, library, &weights, energy, alpha, params)?;

    let chosen_id = entries[0].id;
    let chosen = library
        .iter()
        .find(|t| t.id == chosen_id)
        .expect("chosen id comes from the library");
    let diagnostics = diagnostics(team, chosen)?;

    Ok(Recommendation {
        chosen: chosen.name.clone(),
        chosen_id,
        entries,
        weights,
        gaps,
        state: *state,
        energy,
        alpha,
        combine_mode: params.combine_mode,
        diagnostics,
    })
}

/// Scores and ranks every template under fixed weights. `rank_strategies`
/// derives the weights from the context; the harness reuses them to isolate
/// single-attribute edits.
pub fn score_templates(
    team: &PartialAttributeVector,
    opponent: Option<&PartialAttributeVector>,
    library: &StrategyLibrary,
    weights: &WeightVector,
    energy: f64,
    alpha: f64,
    params: &ParamSet,
) -> Result<Vec<RankedEntry>> {
    let mask = team.active();
    let mut entries = Vec::with_capacity(library.len());
    for template in library {
        let profile = template.profile.project(mask)?;
        let d_eucl = euclidean(team, &profile)?;
        let d_adapt = adapted_distance(team, &profile, weights)?;
        let d_opp = opponent
            .map(|opp| adapted_distance(opp, &profile, weights))
            .transpose()?;
        let mu = if params.combine_mode == CombineMode::Exponential && params.prototype_multiplier {
            prototype_multiplier(energy, template, params)
        } else {
            1.0
        };
        let d_comb = mu * combine(d_adapt, d_opp.unwrap_or(0.0), alpha, params.combine_mode);
        entries.push(RankedEntry {
            id: template.id,
            name: template.name.clone(),
            d_eucl,
            d_adapt,
            d_opp,
            d_comb,
            rank: 0,
            mu,
        });
    }

    // stable sort keeps library order among equal keys
    entries.sort_by_key(|e| rank_key(e.d_comb));
    for (i, e) in entries.iter_mut().enumerate() {
        e.rank = i + 1;
    }
    Ok(entries)
}

/// Edits applied on top of a base request.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WhatIfOverrides {
    pub time_remaining: Option<f64>,
    pub score_state: Option<ScoreState>,
    pub energy: Option<f64>,
    pub alpha: Option<f64>,
    pub combine_mode: Option<CombineMode>,
    /// Replacement values for active team attributes.
    pub team: BTreeMap<Attribute, f64>,
    /// Replacement values for active opponent attributes.
    pub opponent: BTreeMap<Attribute, f64>,
}

impl WhatIfOverrides {
    pub fn is_empty(&self) -> bool {
        *self == WhatIfOverrides::default()
    }

    pub fn apply(&self, base: &RecommendInputs) -> Result<RecommendInputs> {
        let mut out = base.clone();
        if let Some(t) = self.time_remaining {
            out.state.time_remaining = t;
        }
        if let Some(s) = self.score_state {
            out.state.score_state = s;
        }
        if let Some(e) = self.energy {
            out.state.energy = Some(e);
        }
        if let Some(a) = self.alpha {
            out.params.alpha = a;
        }
        if let Some(m) = self.combine_mode {
            out.params.combine_mode = m;
        }
        out.team = edit(&out.team, &self.team)?;
        if !self.opponent.is_empty() {
            let opp = out
                .opponent
                .as_ref()
                .ok_or_else(|| Error::field("opponent", "no opponent in the base request"))?;
            out.opponent = Some(edit(opp, &self.opponent)?);
        }
        out.state.validate()?;
        out.params.validate()?;
        Ok(out)
    }
}

fn edit(
    v: &PartialAttributeVector,
    edits: &BTreeMap<Attribute, f64>,
) -> Result<PartialAttributeVector> {
    let mut out = *v;
    for (&attribute, &value) in edits {
        if !v.active().contains(attribute) {
            return Err(Error::InactiveAttribute { attribute });
        }
        out = out.with(attribute, value)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankDelta {
    pub id: usize,
    pub name: String,
    pub base_rank: usize,
    pub rank: usize,
    /// Positive when the strategy moved up.
    pub delta: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfOutcome {
    pub base: Recommendation,
    pub recommendation: Recommendation,
    pub rank_deltas: Vec<RankDelta>,
}

/// Re-ranks with the overrides applied and reports rank movement per
/// strategy, in library order.
pub fn whatif(
    base: &RecommendInputs,
    overrides: &WhatIfOverrides,
    library: &StrategyLibrary,
) -> Result<WhatIfOutcome> {
    let base_rec = base.rank(library)?;
    let variant = overrides.apply(base)?;
    let recommendation = variant.rank(library)?;
    let mut rank_deltas: Vec<RankDelta> = recommendation
        .entries
        .iter()
        .map(|e| {
            let base_rank = base_rec
                .entries
                .iter()
                .find(|b| b.id == e.id)
                .map_or(e.rank, |b| b.rank);
            RankDelta {
                id: e.id,
                name: e.name.clone(),
                base_rank,
                rank: e.rank,
                delta: base_rank as i64 - e.rank as i64,
            }
        })
        .collect();
    rank_deltas.sort_by_key(|d| d.id);
    Ok(WhatIfOutcome {
        base: base_rec,
        recommendation,
        rank_deltas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attribute::AttributeVector;
    use Attribute::*;

    fn pilot_team() -> PartialAttributeVector {
        PartialAttributeVector::from_pairs([
            (OffensiveStrength, 0.85),
            (DefensiveStrength, 0.50),
            (TransitionSpeed, 0.85),
            (HighPressCapability, 0.50),
            (ResidualEnergy, 0.35),
        ])
        .unwrap()
    }

    fn pilot_inputs() -> RecommendInputs {
        RecommendInputs::new(pilot_team())
            .with_state(MatchState::new(0.5, ScoreState::Drawing).unwrap())
    }

    #[test]
    fn gaps() {
        let mut team = AttributeVector::uniform(0.5).unwrap();
        let mut opp = team;
        assert_eq!(estimate_gaps(&team, &opp), GapEstimate::ZERO);
        team = team
            .with(TechnicalBase, 0.6)
            .unwrap()
            .with(PhysicalBase, 0.9)
            .unwrap();
        opp = opp
            .with(TechnicalBase, 0.8)
            .unwrap()
            .with(PhysicalBase, 0.4)
            .unwrap();
        let g = estimate_gaps(&team, &opp);
        assert!((g.delta_tech + 0.2).abs() < 1e-12);
        assert!((g.delta_phys - 0.5).abs() < 1e-12);
        assert_eq!(
            estimate_gaps(&pilot_team(), &pilot_team()),
            GapEstimate::ZERO
        );
    }

    #[test]
    fn pilot_ranking() {
        let rec = pilot_inputs()
            .rank(&StrategyLibrary::builtin_canonical())
            .unwrap();
        assert_eq!(rec.chosen, "Build-up Play");
        let order: Vec<&str> = rec.entries.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(
            order,
            [
                "Build-up Play",
                "Fast Counterattack",
                "High Pressing",
                "Gegenpressing",
                "Positional Defense"
            ]
        );
        assert_eq!(rec.rank_of("High Pressing"), Some(3));
        assert_eq!(rec.rank_of("Gegenpressing"), Some(4));
        let hp = rec.entry("High Pressing").unwrap();
        let gp = rec.entry("Gegenpressing").unwrap();
        assert!((hp.d_eucl - 0.6305).abs() < 1e-4);
        assert!((hp.d_eucl - gp.d_eucl).abs() < 1e-12);
        assert_eq!(rec.alpha, 0.0);
        assert_eq!(rec.gaps, GapEstimate::ZERO);
        assert!((rec.weights.sum() - 5.0).abs() < 1e-9);
        for e in &rec.entries {
            assert_eq!(e.d_comb, e.d_adapt);
        }
    }

    #[test]
    fn singleton_library() {
        let pd = StrategyLibrary::builtin_canonical().templates()[2].clone();
        let lib = StrategyLibrary::new(vec![pd]).unwrap();
        let rec = pilot_inputs().rank(&lib).unwrap();
        assert_eq!(rec.chosen, "Positional Defense");
        assert_eq!(rec.entries.len(), 1);
    }

    #[test]
    fn shape_errors() {
        let lib = StrategyLibrary::builtin_canonical();
        let opp = AttributeVector::uniform(0.5).unwrap();
        let err = pilot_inputs().with_opponent(opp).rank(&lib).unwrap_err();
        assert_eq!(err, Error::ShapeMismatch);
    }

    #[test]
    fn diagnostics_cases() {
        let lib = StrategyLibrary::builtin_canonical();
        let d = diagnostics(&pilot_team(), lib.by_name("Build-up Play").unwrap()).unwrap();
        let a8 = d.delta(ResidualEnergy).unwrap();
        assert!((a8.delta - 0.25).abs() < 1e-12);
        assert_eq!(a8.class, DeltaClass::Deficit);
        let a4 = d.delta(TransitionSpeed).unwrap();
        assert!((a4.delta + 0.35).abs() < 1e-12);
        assert_eq!(a4.class, DeltaClass::Surplus);
        assert_eq!(d.delta(TeamMorale), None);
        for x in &d.deltas {
            assert_eq!(x.delta, x.strategy - x.team);
        }

        let hp = lib.by_name("High Pressing").unwrap();
        let d = diagnostics(&hp.profile.to_partial(), hp).unwrap();
        assert!(d
            .deltas
            .iter()
            .all(|x| x.delta == 0.0 && x.class == DeltaClass::Aligned));
    }

    #[test]
    fn whatif_cases() {
        let lib = StrategyLibrary::builtin_canonical();
        let base = pilot_inputs();
        let same = whatif(&base, &WhatIfOverrides::default(), &lib).unwrap();
        assert_eq!(same.base, same.recommendation);
        assert!(same.rank_deltas.iter().all(|d| d.delta == 0));

        let mut o = WhatIfOverrides::default();
        o.team.insert(ResidualEnergy, 0.80);
        let out = whatif(&base, &o, &lib).unwrap();
        let fc = out.recommendation.entry("Fast Counterattack").unwrap();
        assert!((fc.d_eucl - 0.015f64.sqrt()).abs() < 1e-12);
        assert!((out.base.entry("Fast Counterattack").unwrap().d_eucl - 0.4664).abs() < 1e-4);
        assert_eq!(out.recommendation.chosen, "Fast Counterattack");
        let delta = out
            .rank_deltas
            .iter()
            .find(|d| d.name == "Fast Counterattack")
            .unwrap();
        assert_eq!((delta.base_rank, delta.rank, delta.delta), (2, 1, 1));

        let mut bad = WhatIfOverrides::default();
        bad.team.insert(TeamMorale, 0.5);
        assert!(matches!(
            whatif(&base, &bad, &lib),
            Err(Error::InactiveAttribute { .. })
        ));
    }

    #[test]
    fn winning_override_drops_urgency() {
        let lib = StrategyLibrary::builtin_canonical();
        let team = AttributeVector::uniform(0.7).unwrap();
        let base = RecommendInputs::new(team)
            .with_state(MatchState::new(0.1, ScoreState::Drawing).unwrap());
        let rec = base.rank(&lib).unwrap();
        assert!(rec.weights.get(TransitionSpeed).unwrap() > 1.0);

        let o = WhatIfOverrides {
            score_state: Some(ScoreState::Winning),
            ..Default::default()
        };
        let out = whatif(&base, &o, &lib).unwrap();
        for (_, w) in out.recommendation.weights.iter() {
            assert!((w - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn inputs_json() {
        let json = r#"{
            "team": {"A1":0.85,"A2":0.5,"A4":0.85,"A5":0.5,"A8":0.35},
            "state": {"time_remaining": 0.5, "score_state": 0}
        }"#;
        let inputs: RecommendInputs = serde_json::from_str(json).unwrap();
        assert_eq!(inputs.team, pilot_team());
        assert_eq!(inputs.params, ParamSet::default());
        let rec = inputs.rank(&StrategyLibrary::builtin_canonical()).unwrap();
        let text = serde_json::to_string(&rec).unwrap();
        let back: Recommendation = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rec);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["chosen", "entries", "weights", "gaps", "diagnostics"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
