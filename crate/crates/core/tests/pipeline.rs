use std::collections::BTreeMap;

use pitchfit_core::context_tree::{default_benchmarks, default_tree, LeafInputs};
use pitchfit_core::{
    whatif, Attribute, MatchState, ParamSet, PartialAttributeVector, Profile, RecommendInputs,
    Recommendation, ScoreState, StrategyLibrary, WhatIfOverrides,
};

fn pilot_team() -> PartialAttributeVector {
    PartialAttributeVector::from_pairs([
        (Attribute::OffensiveStrength, 0.85),
        (Attribute::DefensiveStrength, 0.50),
        (Attribute::TransitionSpeed, 0.85),
        (Attribute::HighPressCapability, 0.50),
        (Attribute::ResidualEnergy, 0.35),
    ])
    .unwrap()
}

fn pilot_inputs() -> RecommendInputs {
    RecommendInputs::new(pilot_team())
        .with_state(MatchState::new(0.5, ScoreState::Drawing).unwrap())
}

fn leaf_ids(tree_json: &str) -> Vec<String> {
    let value: serde_json::Value = serde_json::from_str(tree_json).unwrap();
    let mut out = Vec::new();
    fn walk(v: &serde_json::Value, out: &mut Vec<String>) {
        match v {
            serde_json::Value::Object(map) => {
                if let Some(serde_json::Value::String(id)) = map.get("ref") {
                    out.push(id.clone());
                }
                for child in map.values() {
                    walk(child, out);
                }
            }
            serde_json::Value::Array(items) => items.iter().for_each(|i| walk(i, out)),
            _ => {}
        }
    }
    walk(&value, &mut out);
    out
}

#[test]
fn shipped_tree_aggregates_midpoints_to_midpoints() {
    let benchmarks = default_benchmarks();
    let mut leaves = LeafInputs::new().with_benchmarks(benchmarks.clone());
    for id in leaf_ids(pitchfit_core::context_tree::DEFAULT_TREE_JSON) {
        let b = benchmarks[&id];
        leaves.insert(id, (b.min + b.max) / 2.0);
    }
    let direct: BTreeMap<Attribute, f64> = [
        (Attribute::PsychologicalResilience, 0.7),
        (Attribute::TeamMorale, 0.6),
        (Attribute::RelationalCohesion, 0.8),
    ]
    .into_iter()
    .collect();
    let v = default_tree().evaluate(&leaves, &direct).unwrap();
    for a in Attribute::ALL {
        let want = direct.get(&a).copied().unwrap_or(0.5);
        assert!((v.value(a) - want).abs() < 1e-12, "{a}: {}", v.value(a));
    }
}

#[test]
fn partial_leaf_coverage_yields_a_partial_vector() {
    let mut leaves = LeafInputs::new().with_benchmarks(default_benchmarks());
    let csv = "id,value\nxg_striker,0.9\nshot_accuracy_striker,0.4\nxg_wings,0.3\n\
               xa_cam,0.3\nkey_passes_cm,2.0\ncrosses,15\ndribbles,10\ntackles_won,3\n";
    for (id, value) in LeafInputs::values_from_csv(csv.as_bytes()).unwrap() {
        leaves.insert(id, value);
    }
    let v = default_tree()
        .evaluate_available(&leaves, &BTreeMap::new())
        .unwrap_or_else(|e| panic!("{e}"));
    // only A1 has every leaf; forward .57, midfield .46, wide .5
    assert_eq!(
        v.active().iter().collect::<Vec<_>>(),
        [Attribute::OffensiveStrength]
    );
    let want = 0.5 * 0.57 + 0.3 * 0.46 + 0.2 * 0.5;
    assert!((v.get(Attribute::OffensiveStrength).unwrap() - want).abs() < 1e-12);
    let rec = RecommendInputs::new(v)
        .rank(&StrategyLibrary::builtin_default())
        .unwrap();
    assert_eq!(rec.weights.mask(), v.active());
}

#[test]
fn pilot_whatif_promotes_fast_counterattack() {
    let library = StrategyLibrary::builtin_canonical();
    let overrides = WhatIfOverrides {
        team: [(Attribute::ResidualEnergy, 0.80)].into_iter().collect(),
        ..WhatIfOverrides::default()
    };
    let outcome = whatif(&pilot_inputs(), &overrides, &library).unwrap();
    assert_eq!(outcome.base.chosen, "Build-up Play");
    let fc = outcome.recommendation.entry("Fast Counterattack").unwrap();
    assert!((fc.d_eucl - 0.015f64.sqrt()).abs() < 1e-12);
    assert_eq!(fc.rank, 1);
    assert_eq!(outcome.recommendation.chosen, "Fast Counterattack");
    let delta = outcome
        .rank_deltas
        .iter()
        .find(|d| d.name == "Fast Counterattack")
        .unwrap();
    assert_eq!((delta.base_rank, delta.rank, delta.delta), (2, 1, 1));
}

#[test]
fn pilot_diagnostics() {
    let rec = pilot_inputs()
        .rank(&StrategyLibrary::builtin_canonical())
        .unwrap();
    let energy = rec.diagnostics.delta(Attribute::ResidualEnergy).unwrap();
    assert!((energy.delta - 0.25).abs() < 1e-12);
    let transition = rec.diagnostics.delta(Attribute::TransitionSpeed).unwrap();
    assert!((transition.delta + 0.35).abs() < 1e-12);
}

#[test]
fn recommendation_json_round_trips() {
    let rec = pilot_inputs()
        .rank(&StrategyLibrary::builtin_default())
        .unwrap();
    let text = serde_json::to_string(&rec).unwrap();
    let back: Recommendation = serde_json::from_str(&text).unwrap();
    assert_eq!(rec, back);
}

#[test]
fn library_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("library.json");
    let library = StrategyLibrary::builtin_default();
    std::fs::write(&path, library.to_json().unwrap()).unwrap();
    let loaded = StrategyLibrary::load(&path).unwrap();
    assert_eq!(loaded, library);
    assert_eq!(loaded.len(), 20);
    assert_eq!(loaded.iter().filter(|t| t.canonical).count(), 5);
}

#[test]
fn opponent_term_prefers_strategies_far_from_the_opponent() {
    let library = StrategyLibrary::builtin_canonical();
    let team = pilot_team();
    let opp = library
        .by_name("Build-up Play")
        .unwrap()
        .profile
        .project(team.active())
        .unwrap();
    let without = RecommendInputs::new(team).rank(&library).unwrap();
    let with = RecommendInputs::new(team)
        .with_opponent(opp)
        .with_params(ParamSet {
            alpha: 0.5,
            ..ParamSet::default()
        })
        .rank(&library)
        .unwrap();
    let bu = |r: &Recommendation| r.entry("Build-up Play").unwrap().d_comb;
    assert_eq!(with.entry("Build-up Play").unwrap().d_opp, Some(0.0));
    assert!(bu(&with) >= bu(&without) - 1e-12);
    assert!(with.entries.iter().all(|e| e.d_opp.is_some()));
    assert_eq!(with.weights.mask(), team.active());
    assert!(team.get(Attribute::TechnicalBase).is_none());
}
