use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use pitchfit_core::harness::{
    self, FigureData, NoiseMode, NoiseSpec, ScenarioSpec, DEFAULT_ALPHA_GRID, DEFAULT_SEED,
};
use pitchfit_core::StrategyLibrary;

use crate::error::ServiceError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvaluateKind {
    Scenarios,
    Robustness,
    Sensitivity,
    Ablation,
    Pilot,
}

impl FromStr for EvaluateKind {
    type Err = ServiceError;

    fn from_str(s: &str) -> Result<Self, ServiceError> {
        match s {
            "scenarios" => Ok(EvaluateKind::Scenarios),
            "robustness" => Ok(EvaluateKind::Robustness),
            "sensitivity" => Ok(EvaluateKind::Sensitivity),
            "ablation" => Ok(EvaluateKind::Ablation),
            "pilot" => Ok(EvaluateKind::Pilot),
            other => Err(ServiceError::not_found(format!(
                "unknown evaluation `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateOptions {
    pub seed: u64,
    pub sigma: f64,
    pub k: usize,
    pub mode: NoiseMode,
    pub alphas: Vec<f64>,
}

impl Default for EvaluateOptions {
    fn default() -> Self {
        EvaluateOptions {
            seed: DEFAULT_SEED,
            sigma: 0.05,
            k: 100,
            mode: NoiseMode::Multiplicative,
            alphas: DEFAULT_ALPHA_GRID.to_vec(),
        }
    }
}

/// Report, figure data and a printable summary of one evaluation.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: Value,
    pub figures: FigureData,
    pub summary: String,
    /// False when a scenario missed its expected top strategy.
    pub passed: bool,
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, ServiceError> {
    serde_json::to_value(v).map_err(|e| ServiceError::io(e.to_string()))
}

pub fn evaluate(
    kind: EvaluateKind,
    options: &EvaluateOptions,
    fixtures: &[ScenarioSpec],
    library: &StrategyLibrary,
) -> Result<Evaluation, ServiceError> {
    let mut figures = FigureData::default();
    let mut summary = String::new();
    let mut passed = true;
    let report = match kind {
        EvaluateKind::Scenarios => {
            let outcomes = harness::run_scenarios(fixtures, library)?;
            for o in &outcomes {
                let mark = if o.passed { "PASS" } else { "FAIL" };
                let _ = writeln!(
                    summary,
                    "{mark} {} -> {} (expected {})",
                    o.scenario,
                    o.chosen,
                    o.expected_top.join(" | ")
                );
            }
            let ok = outcomes.iter().filter(|o| o.passed).count();
            let _ = writeln!(summary, "{ok}/{} scenarios passed", outcomes.len());
            passed = ok == outcomes.len();
            if let (Some(spec), Some(first)) = (fixtures.first(), outcomes.first()) {
                if let Some(t) = library.by_name(&first.chosen) {
                    figures.radar = Some(harness::radar_series(&spec.team, t));
                }
            }
            to_value(&outcomes)?
        }
        EvaluateKind::Robustness => {
            let noise = NoiseSpec {
                sigma: options.sigma,
                runs: options.k,
                seed: options.seed,
                mode: options.mode,
            };
            let mut input = Vec::with_capacity(fixtures.len());
            let mut templates = Vec::with_capacity(fixtures.len());
            for spec in fixtures {
                input.push(harness::robustness(spec, &noise, library)?);
                templates.push(harness::template_stability(
                    spec,
                    options.sigma,
                    options.k,
                    options.seed,
                    library,
                )?);
            }
            let mean_r = input.iter().map(|r| r.r).sum::<f64>() / input.len().max(1) as f64;
            for (i, t) in input.iter().zip(&templates) {
                let _ = writeln!(
                    summary,
                    "{}: baseline {}, R = {:.2}, template stability = {:.2}",
                    i.scenario, i.baseline, i.r, t.r
                );
            }
            let _ = writeln!(
                summary,
                "mean R = {mean_r:.4} (sigma {}, K {}, seed {})",
                options.sigma, options.k, options.seed
            );
            let report = json!({
                "input_noise": to_value(&input)?,
                "template_stability": to_value(&templates)?,
                "mean_r": mean_r,
            });
            figures.robustness = input.into_iter().chain(templates).collect();
            report
        }
        EvaluateKind::Sensitivity => {
            let mut reports = Vec::new();
            for spec in fixtures.iter().filter(|s| s.opponent.is_some()) {
                let r = harness::sensitivity_sweep(spec, &options.alphas, library)?;
                let chosen: Vec<&str> = r.points.iter().map(|p| p.chosen.as_str()).collect();
                let _ = writeln!(
                    summary,
                    "{}: {} [{}]",
                    r.scenario,
                    if r.stable { "stable" } else { "unstable" },
                    chosen.join(", ")
                );
                reports.push(r);
            }
            let report = to_value(&reports)?;
            figures.sensitivity = reports;
            report
        }
        EvaluateKind::Ablation => {
            let reports = fixtures
                .iter()
                .map(|s| harness::ablation(s, library))
                .collect::<pitchfit_core::Result<Vec<_>>>()?;
            let importance: Vec<Value> = harness::attribute_importance(&reports)
                .into_iter()
                .map(|(a, shift)| json!({ "attribute": a, "mean_abs_shift": shift }))
                .collect();
            let _ = writeln!(
                summary,
                "attribute importance (mean |shift| of the top score):"
            );
            for item in importance.iter().take(5) {
                let _ = writeln!(
                    summary,
                    "  {} {:.4}",
                    item["attribute"].as_str().unwrap_or_default(),
                    item["mean_abs_shift"].as_f64().unwrap_or_default()
                );
            }
            let report = json!({ "reports": to_value(&reports)?, "importance": importance });
            figures.ablation = reports;
            report
        }
        EvaluateKind::Pilot => {
            let pilot = harness::pilot_replication()?;
            summary.push_str(&harness::format_pilot_table(&pilot));
            let canonical = StrategyLibrary::builtin_canonical();
            if let Some(t) = canonical.by_name(&pilot.chosen) {
                figures.radar = Some(harness::radar_series(&pilot.team, t));
            }
            to_value(&pilot)?
        }
    };
    Ok(Evaluation {
        report,
        figures,
        summary,
        passed,
    })
}
