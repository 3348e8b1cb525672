//! Distances, context multipliers and the opponent-aware score.

use serde::{Deserialize, Serialize};

use crate::attribute::{
    Attribute, AttributeMask, CombineMode, MatchState, ParamSet, Profile, DIMENSIONS,
};
use crate::error::{Error, Result};
use crate::library::StrategyTemplate;

/// Smallest multiplier allowed, so weights stay positive under any override.
pub const MULTIPLIER_FLOOR: f64 = 0.05;
pub const PROTOTYPE_MULTIPLIER_RANGE: (f64, f64) = (0.4, 2.0);

fn same_shape(x: &impl Profile, y: &impl Profile) -> Result<AttributeMask> {
    let mask = x.mask();
    if mask != y.mask() {
        return Err(Error::ShapeMismatch);
    }
    Ok(mask)
}

/// Plain Euclidean distance over the shared active attributes.
pub fn euclidean(x: &impl Profile, y: &impl Profile) -> Result<f64> {
    let mask = same_shape(x, y)?;
    let sum: f64 = mask
        .iter()
        .map(|a| {
            let d = x.get(a).unwrap_or(0.0) - y.get(a).unwrap_or(0.0);
            d * d
        })
        .sum();
    Ok(sum.sqrt())
}

/// `sqrt(sum_j w_j (x_j - y_j)^2)` over the active attributes.
pub fn adapted_distance(x: &impl Profile, y: &impl Profile, w: &WeightVector) -> Result<f64> {
    let mask = same_shape(x, y)?;
    if mask.iter().any(|a| !w.mask.contains(a)) {
        return Err(Error::ShapeMismatch);
    }
    let sum: f64 = mask
        .iter()
        .map(|a| {
            let d = x.get(a).unwrap_or(0.0) - y.get(a).unwrap_or(0.0);
            w.values[a.index()] * d * d
        })
        .sum();
    Ok(sum.sqrt())
}

/// Technical and physical gaps, team minus opponent on A12 and A13.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GapEstimate {
    pub delta_tech: f64,
    pub delta_phys: f64,
}

impl GapEstimate {
    pub const ZERO: GapEstimate = GapEstimate {
        delta_tech: 0.0,
        delta_phys: 0.0,
    };
}

mod attr_map {
    use std::collections::BTreeMap;

    use serde::de::{self, Deserializer};
    use serde::ser::{SerializeMap, Serializer};
    use serde::Deserialize;

    use crate::attribute::{Attribute, AttributeMask, DIMENSIONS};

    pub fn serialize<S: Serializer>(
        mask: AttributeMask,
        values: &[f64; DIMENSIONS],
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(mask.len()))?;
        for a in mask.iter() {
            map.serialize_entry(a.code(), &values[a.index()])?;
        }
        map.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<(AttributeMask, [f64; DIMENSIONS]), D::Error> {
        let raw = BTreeMap::<String, f64>::deserialize(deserializer)?;
        let mut mask = AttributeMask::EMPTY;
        let mut values = [0.0; DIMENSIONS];
        for (code, v) in raw {
            let a = Attribute::from_code(&code)
                .ok_or_else(|| de::Error::custom(format!("unknown attribute `{code}`")))?;
            if !(v >= 0.0 && v.is_finite()) {
                return Err(de::Error::custom(format!(
                    "{code} must be a nonnegative real"
                )));
            }
            mask = mask.with(a);
            values[a.index()] = v;
        }
        Ok((mask, values))
    }
}

/// Per-attribute context multipliers, all 1 in a neutral context.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContextMultipliers([f64; DIMENSIONS]);

impl Default for ContextMultipliers {
    fn default() -> Self {
        ContextMultipliers([1.0; DIMENSIONS])
    }
}

impl ContextMultipliers {
    pub fn get(&self, attribute: Attribute) -> f64 {
        self.0[attribute.index()]
    }

    pub fn values(&self) -> &[f64; DIMENSIONS] {
        &self.0
    }

    /// Builds multipliers from raw values, applying the floor.
    pub fn from_values(values: [f64; DIMENSIONS]) -> Self {
        ContextMultipliers(values.map(|m| m.max(MULTIPLIER_FLOOR)))
    }
}

impl Serialize for ContextMultipliers {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        attr_map::serialize(AttributeMask::FULL, &self.0, serializer)
    }
}

/// Multipliers for energy deficit, technical/physical inferiority and late
/// time pressure when not winning.
pub fn compute_multipliers(
    energy: f64,
    gaps: GapEstimate,
    state: &MatchState,
    params: &ParamSet,
) -> ContextMultipliers {
    use Attribute::*;

    let mut m = [1.0; DIMENSIONS];
    let set = |m: &mut [f64; DIMENSIONS], a: Attribute, v: f64| m[a.index()] = v;

    let energy_deficit = (params.tau_e - energy).max(0.0);
    let ge = params.gamma_e * energy_deficit;
    set(&mut m, HighPressCapability, 1.0 - ge);
    set(&mut m, TimeManagement, 1.0 + ge);
    set(&mut m, PhysicalBase, 1.0 - 0.5 * ge);

    let tech_shortfall = (-gaps.delta_tech).max(0.0);
    let phys_shortfall = (-gaps.delta_phys).max(0.0);
    set(
        &mut m,
        DefensiveStrength,
        1.0 + params.gamma_g * tech_shortfall,
    );
    set(
        &mut m,
        TacticalCohesion,
        1.0 + params.gamma_g * phys_shortfall,
    );
    set(
        &mut m,
        OffensiveStrength,
        1.0 - 0.5 * params.gamma_g * tech_shortfall,
    );
    set(
        &mut m,
        WidthUtilization,
        1.0 - 0.5 * params.gamma_g * phys_shortfall,
    );

    let urgency = if state.score_state.is_winning() {
        0.0
    } else {
        (params.tau_t - state.time_remaining).max(0.0)
    };
    let gt = params.gamma_t * urgency;
    set(&mut m, TransitionSpeed, 1.0 + gt);
    m[OffensiveStrength.index()] += gt;

    ContextMultipliers::from_values(m)
}

/// Nonnegative attribute weights summing to the number of active attributes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightVector {
    mask: AttributeMask,
    values: [f64; DIMENSIONS],
}

impl WeightVector {
    pub fn uniform(mask: AttributeMask) -> Result<Self> {
        normalize_weights(&ContextMultipliers::default(), mask)
    }

    pub fn mask(&self) -> AttributeMask {
        self.mask
    }

    pub fn get(&self, attribute: Attribute) -> Option<f64> {
        self.mask
            .contains(attribute)
            .then(|| self.values[attribute.index()])
    }

    pub fn sum(&self) -> f64 {
        self.mask.iter().map(|a| self.values[a.index()]).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Attribute, f64)> + '_ {
        self.mask.iter().map(|a| (a, self.values[a.index()]))
    }
}

impl Serialize for WeightVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        attr_map::serialize(self.mask, &self.values, serializer)
    }
}

impl<'de> Deserialize<'de> for WeightVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let (mask, values) = attr_map::deserialize(deserializer)?;
        Ok(WeightVector { mask, values })
    }
}

/// `w_j = |mask| * m_j / sum_{k in mask} m_k` for active `j`.
pub fn normalize_weights(m: &ContextMultipliers, mask: AttributeMask) -> Result<WeightVector> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let total: f64 = mask.iter().map(|a| m.get(a)).sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::DegenerateMultipliers);
    }
    let scale = mask.len() as f64 / total;
    let mut values = [0.0; DIMENSIONS];
    for a in mask.iter() {
        values[a.index()] = m.get(a) * scale;
    }
    Ok(WeightVector { mask, values })
}

/// Opponent-aware score. Lower is better.
pub fn combine(d_team: f64, d_opp: f64, alpha: f64, mode: CombineMode) -> f64 {
    match mode {
        CombineMode::Subtractive => d_team - alpha * d_opp,
        CombineMode::Exponential => d_team + alpha * (-d_opp).exp(),
    }
}

/// Per-template factor for exponential mode: penalizes high-intensity
/// templates when energy is below threshold and mildly favors low-intensity
/// ones. Always within [`PROTOTYPE_MULTIPLIER_RANGE`].
pub fn prototype_multiplier(energy: f64, template: &StrategyTemplate, params: &ParamSet) -> f64 {
    let deficit = (params.tau_e - energy).max(0.0);
    let (lo, hi) = PROTOTYPE_MULTIPLIER_RANGE;
    (1.0 + 2.0 * params.gamma_e * deficit * (template.intensity() - 0.5)).clamp(lo, hi)
}
