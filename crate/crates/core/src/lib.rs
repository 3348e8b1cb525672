//! Tactical strategy recommendation in a shared 14-attribute space.
//!
//! Team state and strategy templates are points in `[0, 1]^14`. Strategies are
//! ranked by a distance whose per-attribute weights follow the match context
//! (energy, technical/physical gaps, time pressure), optionally offset by how
//! well each strategy suits the opponent.

pub mod attribute;
pub mod context_tree;
pub mod distance;
pub mod error;
pub mod harness;
pub mod library;
pub mod recommender;

pub use attribute::{
    from_categorical, Attribute, AttributeCategory, AttributeMask, AttributeVector,
    CategoricalAnchors, CombineMode, Level, MatchState, ParamSet, PartialAttributeVector, Profile,
    ScoreState,
};
pub use distance::{
    adapted_distance, combine, compute_multipliers, euclidean, normalize_weights,
    prototype_multiplier, ContextMultipliers, GapEstimate, WeightVector,
};
pub use error::{Error, Result};
pub use library::{perturb_template, Category, StrategyLibrary, StrategyTemplate};
pub use recommender::{
    diagnostics, estimate_gaps, rank_strategies, score_templates, whatif, DeltaClass, Diagnostics,
    RankedEntry, RecommendInputs, Recommendation, WhatIfOutcome, WhatIfOverrides,
};
