//! The shared 14-attribute space.
//!
//! Team states, opponent states and strategy templates all live in the same
//! `[0, 1]^14` space. A [`PartialAttributeVector`] covers a non-empty subset of
//! the attributes, for settings where only some of them are observable.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DIMENSIONS: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeCategory {
    Technical,
    Physical,
    Psychological,
}

/// One of the 14 macro-attributes, ordered A1 < A2 < ... < A14.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Attribute {
    OffensiveStrength,
    DefensiveStrength,
    MidfieldControl,
    TransitionSpeed,
    HighPressCapability,
    WidthUtilization,
    PsychologicalResilience,
    ResidualEnergy,
    TeamMorale,
    TimeManagement,
    TacticalCohesion,
    TechnicalBase,
    PhysicalBase,
    RelationalCohesion,
}

const CODES: [&str; DIMENSIONS] = [
    "A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10", "A11", "A12", "A13", "A14",
];

impl Attribute {
    pub const ALL: [Attribute; DIMENSIONS] = [
        Attribute::OffensiveStrength,
        Attribute::DefensiveStrength,
        Attribute::MidfieldControl,
        Attribute::TransitionSpeed,
        Attribute::HighPressCapability,
        Attribute::WidthUtilization,
        Attribute::PsychologicalResilience,
        Attribute::ResidualEnergy,
        Attribute::TeamMorale,
        Attribute::TimeManagement,
        Attribute::TacticalCohesion,
        Attribute::TechnicalBase,
        Attribute::PhysicalBase,
        Attribute::RelationalCohesion,
    ];

    /// Zero-based position in the vector.
    pub fn index(self) -> usize {
        self as usize
    }

    /// One-based ordinal, matching the `A1`..`A14` codes.
    pub fn ordinal(self) -> usize {
        self.index() + 1
    }

    pub fn from_index(index: usize) -> Option<Attribute> {
        Self::ALL.get(index).copied()
    }

    pub fn code(self) -> &'static str {
        CODES[self.index()]
    }

    pub fn from_code(code: &str) -> Option<Attribute> {
        CODES.iter().position(|c| *c == code).map(|i| Self::ALL[i])
    }

    pub fn name(self) -> &'static str {
        match self {
            Attribute::OffensiveStrength => "Offensive Strength",
            Attribute::DefensiveStrength => "Defensive Strength",
            Attribute::MidfieldControl => "Midfield Control",
            Attribute::TransitionSpeed => "Transition Speed",
            Attribute::HighPressCapability => "High Press Capability",
            Attribute::WidthUtilization => "Width Utilization",
            Attribute::PsychologicalResilience => "Psychological Resilience",
            Attribute::ResidualEnergy => "Residual Energy",
            Attribute::TeamMorale => "Team Morale",
            Attribute::TimeManagement => "Time Management",
            Attribute::TacticalCohesion => "Tactical Cohesion",
            Attribute::TechnicalBase => "Technical Base",
            Attribute::PhysicalBase => "Physical Base",
            Attribute::RelationalCohesion => "Relational Cohesion",
        }
    }

    pub fn category(self) -> AttributeCategory {
        use Attribute::*;
        match self {
            OffensiveStrength | DefensiveStrength | MidfieldControl | TransitionSpeed
            | HighPressCapability | WidthUtilization => AttributeCategory::Technical,
            ResidualEnergy | TechnicalBase | PhysicalBase => AttributeCategory::Physical,
            PsychologicalResilience
            | TeamMorale
            | TimeManagement
            | TacticalCohesion
            | RelationalCohesion => AttributeCategory::Psychological,
        }
    }
}

impl fmt::Display for Attribute {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Attribute {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Attribute::from_code(s.trim())
            .ok_or_else(|| Error::field(s, "not an attribute code A1..A14"))
    }
}

impl Serialize for Attribute {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.code())
    }
}

impl<'de> Deserialize<'de> for Attribute {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let code = String::deserialize(deserializer)?;
        Attribute::from_code(&code)
            .ok_or_else(|| de::Error::custom(format!("unknown attribute `{code}`")))
    }
}

fn check_unit(attribute: Attribute, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfRange { attribute, value })
    }
}

/// A set of attributes, stored as a 14-bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct AttributeMask(u16);

impl AttributeMask {
    pub const FULL: AttributeMask = AttributeMask((1 << DIMENSIONS) - 1);
    pub const EMPTY: AttributeMask = AttributeMask(0);

    pub fn from_attributes<I: IntoIterator<Item = Attribute>>(attributes: I) -> Self {
        attributes
            .into_iter()
            .fold(Self::EMPTY, |mask, a| mask.with(a))
    }

    pub fn with(self, attribute: Attribute) -> Self {
        AttributeMask(self.0 | (1 << attribute.index()))
    }

    pub fn contains(self, attribute: Attribute) -> bool {
        self.0 & (1 << attribute.index()) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_full(self) -> bool {
        self == Self::FULL
    }

    /// Active attributes in ordinal order.
    pub fn iter(self) -> impl Iterator<Item = Attribute> {
        Attribute::ALL
            .into_iter()
            .filter(move |a| self.contains(*a))
    }
}

impl FromIterator<Attribute> for AttributeMask {
    fn from_iter<I: IntoIterator<Item = Attribute>>(iter: I) -> Self {
        Self::from_attributes(iter)
    }
}

impl Serialize for AttributeMask {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for AttributeMask {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(Vec::<Attribute>::deserialize(deserializer)?
            .into_iter()
            .collect())
    }
}

/// Read access shared by full and partial vectors.
pub trait Profile {
    fn mask(&self) -> AttributeMask;

    /// Value of an active attribute, `None` when inactive.
    fn get(&self, attribute: Attribute) -> Option<f64>;
}

/// A point in the full 14-dimensional unit cube.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttributeVector([f64; DIMENSIONS]);

impl AttributeVector {
    pub const ZERO: AttributeVector = AttributeVector([0.0; DIMENSIONS]);

    /// Builds a vector from 14 values in ordinal order, rejecting anything
    /// outside `[0, 1]`.
    pub fn new(values: &[f64]) -> Result<Self> {
        if values.len() != DIMENSIONS {
            return Err(Error::WrongArity(values.len()));
        }
        let mut out = [0.0; DIMENSIONS];
        for (attribute, (slot, &value)) in Attribute::ALL.iter().zip(out.iter_mut().zip(values)) {
            *slot = check_unit(*attribute, value)?;
        }
        Ok(AttributeVector(out))
    }

    /// Builds a vector clamping each component into `[0, 1]`. NaN maps to 0.
    pub fn new_clamped(values: &[f64]) -> Result<Self> {
        if values.len() != DIMENSIONS {
            return Err(Error::WrongArity(values.len()));
        }
        let mut out = [0.0; DIMENSIONS];
        for (slot, &value) in out.iter_mut().zip(values) {
            *slot = clamp_unit(value);
        }
        Ok(AttributeVector(out))
    }

    pub fn uniform(value: f64) -> Result<Self> {
        Self::new(&[value; DIMENSIONS])
    }

    pub fn value(&self, attribute: Attribute) -> f64 {
        self.0[attribute.index()]
    }

    pub fn values(&self) -> &[f64; DIMENSIONS] {
        &self.0
    }

    /// Returns a copy with one component replaced.
    pub fn with(&self, attribute: Attribute, value: f64) -> Result<Self> {
        let mut out = *self;
        out.0[attribute.index()] = check_unit(attribute, value)?;
        Ok(out)
    }

    pub fn project(&self, mask: AttributeMask) -> Result<PartialAttributeVector> {
        PartialAttributeVector::from_parts(mask, self.0)
    }

    pub fn to_partial(&self) -> PartialAttributeVector {
        PartialAttributeVector {
            mask: AttributeMask::FULL,
            values: self.0,
        }
    }

    /// Adds `delta` to one attribute, clamping the result into `[0, 1]`.
    pub fn apply_fatigue_discount(&self, attribute: Attribute, delta: f64) -> Self {
        let mut out = *self;
        out.0[attribute.index()] = clamp_unit(self.0[attribute.index()] + delta);
        out
    }
}

impl Profile for AttributeVector {
    fn mask(&self) -> AttributeMask {
        AttributeMask::FULL
    }

    fn get(&self, attribute: Attribute) -> Option<f64> {
        Some(self.value(attribute))
    }
}

impl From<AttributeVector> for PartialAttributeVector {
    fn from(v: AttributeVector) -> Self {
        v.to_partial()
    }
}

pub(crate) fn clamp_unit(value: f64) -> f64 {
    if value.is_nan() {
        0.0
    } else {
        value.clamp(0.0, 1.0)
    }
}

/// Values for a non-empty subset of the attributes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialAttributeVector {
    mask: AttributeMask,
    // inactive slots hold 0.0
    values: [f64; DIMENSIONS],
}

impl PartialAttributeVector {
    pub fn from_pairs<I: IntoIterator<Item = (Attribute, f64)>>(pairs: I) -> Result<Self> {
        let mut mask = AttributeMask::EMPTY;
        let mut values = [0.0; DIMENSIONS];
        for (attribute, value) in pairs {
            values[attribute.index()] = check_unit(attribute, value)?;
            mask = mask.with(attribute);
        }
        if mask.is_empty() {
            return Err(Error::EmptyMask);
        }
        Ok(PartialAttributeVector { mask, values })
    }

    fn from_parts(mask: AttributeMask, source: [f64; DIMENSIONS]) -> Result<Self> {
        if mask.is_empty() {
            return Err(Error::EmptyMask);
        }
        let mut values = [0.0; DIMENSIONS];
        for a in mask.iter() {
            values[a.index()] = source[a.index()];
        }
        Ok(PartialAttributeVector { mask, values })
    }

    pub fn active(&self) -> AttributeMask {
        self.mask
    }

    /// Restricts to `mask`, which must be a non-empty subset of the active set.
    pub fn project(&self, mask: AttributeMask) -> Result<Self> {
        if mask.is_empty() {
            return Err(Error::EmptyMask);
        }
        if let Some(attribute) = mask.iter().find(|a| !self.mask.contains(*a)) {
            return Err(Error::InactiveAttribute { attribute });
        }
        Self::from_parts(mask, self.values)
    }

    /// Converts back to a full vector when every attribute is active.
    pub fn to_full(&self) -> Option<AttributeVector> {
        self.mask.is_full().then_some(AttributeVector(self.values))
    }

    pub fn iter(&self) -> impl Iterator<Item = (Attribute, f64)> + '_ {
        self.mask.iter().map(|a| (a, self.values[a.index()]))
    }

    pub fn with(&self, attribute: Attribute, value: f64) -> Result<Self> {
        let mut out = *self;
        out.values[attribute.index()] = check_unit(attribute, value)?;
        out.mask = out.mask.with(attribute);
        Ok(out)
    }

    pub fn apply_fatigue_discount(&self, attribute: Attribute, delta: f64) -> Result<Self> {
        if !self.mask.contains(attribute) {
            return Err(Error::InactiveAttribute { attribute });
        }
        let mut out = *self;
        out.values[attribute.index()] = clamp_unit(self.values[attribute.index()] + delta);
        Ok(out)
    }
}

impl Profile for PartialAttributeVector {
    fn mask(&self) -> AttributeMask {
        self.mask
    }

    fn get(&self, attribute: Attribute) -> Option<f64> {
        self.mask
            .contains(attribute)
            .then(|| self.values[attribute.index()])
    }
}

impl Serialize for AttributeVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(DIMENSIONS))?;
        for a in Attribute::ALL {
            map.serialize_entry(a.code(), &self.value(a))?;
        }
        map.end()
    }
}

impl Serialize for PartialAttributeVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.mask.len() + 1))?;
        for (a, v) in self.iter() {
            map.serialize_entry(a.code(), &v)?;
        }
        map.serialize_entry("active", &self.mask)?;
        map.end()
    }
}

#[derive(Deserialize)]
struct RawVector {
    #[serde(default)]
    active: Option<Vec<String>>,
    #[serde(flatten)]
    values: BTreeMap<String, f64>,
}

impl RawVector {
    fn into_partial(self) -> Result<PartialAttributeVector> {
        let mut pairs = Vec::with_capacity(self.values.len());
        for (code, value) in self.values {
            let attribute = Attribute::from_code(&code)
                .ok_or_else(|| Error::field(code.clone(), "unknown attribute key"))?;
            pairs.push((attribute, value));
        }
        let v = PartialAttributeVector::from_pairs(pairs)?;
        if let Some(active) = self.active {
            let mut mask = AttributeMask::EMPTY;
            for code in active {
                let attribute = Attribute::from_code(&code)
                    .ok_or_else(|| Error::field("active", format!("unknown attribute `{code}`")))?;
                mask = mask.with(attribute);
            }
            if mask != v.mask {
                return Err(Error::field("active", "does not match the keys present"));
            }
        }
        Ok(v)
    }
}

impl<'de> Deserialize<'de> for PartialAttributeVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        RawVector::deserialize(deserializer)?
            .into_partial()
            .map_err(de::Error::custom)
    }
}

impl<'de> Deserialize<'de> for AttributeVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let partial = PartialAttributeVector::deserialize(deserializer)?;
        match partial.to_full() {
            Some(v) => Ok(v),
            None => {
                let missing = Attribute::ALL
                    .iter()
                    .find(|a| !partial.mask.contains(**a))
                    .expect("partial vector is not full");
                Err(de::Error::custom(format!("missing attribute `{missing}`")))
            }
        }
    }
}

/// Three-level categorical observation scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Level {
    High,
    Medium,
    Low,
}

impl FromStr for Level {
    type Err = Error;

    /// Accepts the English labels and the German observation-sheet labels.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "high" | "hoch" => Ok(Level::High),
            "medium" | "mittel" => Ok(Level::Medium),
            "low" | "niedrig" => Ok(Level::Low),
            _ => Err(Error::UnknownLevel(s.to_string())),
        }
    }
}

/// Anchor values used to map categorical observations onto `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CategoricalAnchors {
    pub high: f64,
    pub medium: f64,
    pub low: f64,
}

impl Default for CategoricalAnchors {
    fn default() -> Self {
        CategoricalAnchors {
            high: 0.85,
            medium: 0.50,
            low: 0.20,
        }
    }
}

impl CategoricalAnchors {
    /// Custom anchors, each within 0.10 of its default.
    pub fn shifted(high: f64, medium: f64, low: f64) -> Result<Self> {
        let base = Self::default();
        for (field, value, anchor) in [
            ("high", high, base.high),
            ("medium", medium, base.medium),
            ("low", low, base.low),
        ] {
            if (value - anchor).abs() > 0.10 + 1e-12 {
                return Err(Error::field(field, "anchor shift exceeds 0.10"));
            }
        }
        Ok(CategoricalAnchors { high, medium, low })
    }

    pub fn value(&self, level: Level) -> f64 {
        match level {
            Level::High => self.high,
            Level::Medium => self.medium,
            Level::Low => self.low,
        }
    }
}

pub fn from_categorical(level: Level) -> f64 {
    CategoricalAnchors::default().value(level)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScoreState {
    Losing,
    Drawing,
    Winning,
}

impl ScoreState {
    pub fn as_i8(self) -> i8 {
        match self {
            ScoreState::Losing => -1,
            ScoreState::Drawing => 0,
            ScoreState::Winning => 1,
        }
    }

    pub fn from_i8(s: i8) -> Option<Self> {
        match s {
            -1 => Some(ScoreState::Losing),
            0 => Some(ScoreState::Drawing),
            1 => Some(ScoreState::Winning),
            _ => None,
        }
    }

    pub fn is_winning(self) -> bool {
        self == ScoreState::Winning
    }
}

impl Serialize for ScoreState {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_i8(self.as_i8())
    }
}

impl<'de> Deserialize<'de> for ScoreState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = i8::deserialize(deserializer)?;
        ScoreState::from_i8(s).ok_or_else(|| de::Error::custom("score_state must be -1, 0 or 1"))
    }
}

/// Match context driving the dynamic weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchState {
    /// Fraction of match time remaining, 1 at kickoff.
    pub time_remaining: f64,
    pub score_state: ScoreState,
    /// Overrides the team's residual energy (A8) when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
}

impl Default for MatchState {
    fn default() -> Self {
        MatchState {
            time_remaining: 1.0,
            score_state: ScoreState::Drawing,
            energy: None,
        }
    }
}

impl MatchState {
    pub fn new(time_remaining: f64, score_state: ScoreState) -> Result<Self> {
        let state = MatchState {
            time_remaining,
            score_state,
            energy: None,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn with_energy(mut self, energy: f64) -> Result<Self> {
        self.energy = Some(energy);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.time_remaining) {
            return Err(Error::field("time_remaining", "must lie in [0, 1]"));
        }
        if let Some(e) = self.energy {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::field("energy", "must lie in [0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CombineMode {
    /// `d_team - alpha * d_opp`
    #[default]
    Subtractive,
    /// `mu * (d_team + alpha * exp(-d_opp))`
    Exponential,
}

impl FromStr for CombineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "subtractive" => Ok(CombineMode::Subtractive),
            "exponential" => Ok(CombineMode::Exponential),
            _ => Err(Error::field(
                "combine_mode",
                format!("`{s}` is not one of subtractive, exponential"),
            )),
        }
    }
}

/// Parameters of the dynamic weighting and opponent combination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamSet {
    pub tau_e: f64,
    pub gamma_e: f64,
    pub gamma_g: f64,
    pub tau_t: f64,
    pub gamma_t: f64,
    pub alpha: f64,
    pub combine_mode: CombineMode,
    /// Scale exponential-mode scores by the per-template intensity factor.
    pub prototype_multiplier: bool,
}

impl Default for ParamSet {
    fn default() -> Self {
        ParamSet {
            tau_e: 0.50,
            gamma_e: 1.50,
            gamma_g: 1.00,
            tau_t: 0.25,
            gamma_t: 2.00,
            alpha: 0.20,
            combine_mode: CombineMode::Subtractive,
            prototype_multiplier: false,
        }
    }
}

impl ParamSet {
    pub fn validate(&self) -> Result<()> {
        for (field, value) in [
            ("tau_e", self.tau_e),
            ("tau_t", self.tau_t),
            ("alpha", self.alpha),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::field(field, "must lie in [0, 1]"));
            }
        }
        for (field, value) in [
            ("gamma_e", self.gamma_e),
            ("gamma_g", self.gamma_g),
            ("gamma_t", self.gamma_t),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::field(field, "must be a nonnegative real"));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let params: ParamSet = serde_json::from_str(text)?;
        params.validate()?;
        Ok(params)
    }
}
