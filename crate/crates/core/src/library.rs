//! Tactical strategy templates.

use std::collections::HashSet;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::attribute::{clamp_unit, Attribute, AttributeVector, DIMENSIONS};
use crate::error::{Error, Result};

/// Lowest value a hand-encoded requirement is expected to take.
pub const REQUIREMENT_FLOOR: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Offensive,
    Pressing,
    Defensive,
    Transition,
    Possession,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyTemplate {
    /// Position in the owning library.
    pub id: usize,
    pub name: String,
    pub category: Category,
    pub profile: AttributeVector,
    pub canonical: bool,
}

impl StrategyTemplate {
    /// Mean of the transition-speed and pressing requirements.
    pub fn intensity(&self) -> f64 {
        (self.profile.value(Attribute::TransitionSpeed)
            + self.profile.value(Attribute::HighPressCapability))
            / 2.0
    }
}

/// Adds independent `N(0, sigma^2)` noise to every profile component and
/// clamps back into `[0, 1]`. The result is no longer canonical.
pub fn perturb_template<R: Rng + ?Sized>(
    template: &StrategyTemplate,
    sigma: f64,
    rng: &mut R,
) -> Result<StrategyTemplate> {
    if sigma.is_nan() || sigma < 0.0 {
        return Err(Error::NegativeSigma(sigma));
    }
    let mut values = *template.profile.values();
    if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).map_err(|_| Error::NegativeSigma(sigma))?;
        for v in values.iter_mut() {
            *v = clamp_unit(*v + normal.sample(rng));
        }
    }
    Ok(StrategyTemplate {
        profile: AttributeVector::new(&values)?,
        canonical: false,
        ..template.clone()
    })
}

/// Non-fatal findings from loading a library file.
#[derive(Debug, Clone, PartialEq)]
pub struct LibraryWarning {
    pub strategy: String,
    pub attribute: Attribute,
    pub value: f64,
}

/// Ordered strategy templates. Order is load order and doubles as the
/// tie-break order when ranking.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct StrategyLibrary {
    templates: Vec<StrategyTemplate>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct LibraryEntry {
    name: String,
    category: Category,
    #[serde(default)]
    canonical: bool,
    profile: AttributeVector,
}

const CANONICAL: [(&str, Category, [f64; DIMENSIONS]); 5] = [
    (
        "High Pressing",
        Category::Pressing,
        [
            0.70, 0.80, 0.60, 0.90, 0.90, 0.50, 0.80, 0.70, 0.80, 0.60, 0.90, 0.70, 0.80, 0.80,
        ],
    ),
    (
        "Fast Counterattack",
        Category::Transition,
        [
            0.90, 0.60, 0.50, 0.90, 0.50, 0.60, 0.70, 0.80, 0.70, 0.80, 0.60, 0.70, 0.80, 0.60,
        ],
    ),
    (
        "Positional Defense",
        Category::Defensive,
        [
            0.40, 0.90, 0.80, 0.30, 0.20, 0.30, 0.70, 0.60, 0.60, 0.90, 0.80, 0.60, 0.50, 0.70,
        ],
    ),
    (
        "Build-up Play",
        Category::Offensive,
        [
            0.80, 0.50, 0.70, 0.50, 0.40, 0.60, 0.70, 0.60, 0.80, 0.70, 0.80, 0.80, 0.60, 0.80,
        ],
    ),
    (
        "Gegenpressing",
        Category::Pressing,
        [
            0.70, 0.80, 0.60, 0.80, 0.90, 0.50, 0.80, 0.70, 0.80, 0.60, 0.90, 0.70, 0.80, 0.80,
        ],
    ),
];

/// The shipped 20-template library file.
pub const DEFAULT_LIBRARY_JSON: &str = include_str!("../data/strategies.json");

impl StrategyLibrary {
    /// The five reference templates.
    pub fn builtin_canonical() -> Self {
        let templates = CANONICAL
            .iter()
            .enumerate()
            .map(|(id, (name, category, values))| StrategyTemplate {
                id,
                name: (*name).to_string(),
                category: *category,
                profile: AttributeVector::new(values).expect("canonical profiles are in range"),
                canonical: true,
            })
            .collect();
        StrategyLibrary { templates }
    }

    /// The shipped library: the canonical five followed by fifteen more.
    pub fn builtin_default() -> Self {
        Self::from_json(DEFAULT_LIBRARY_JSON).expect("shipped library is valid")
    }

    /// Builds a library, reassigning ids to positions.
    pub fn new(templates: Vec<StrategyTemplate>) -> Result<Self> {
        if templates.is_empty() {
            return Err(Error::EmptyLibrary);
        }
        let mut names = HashSet::new();
        for t in &templates {
            if !names.insert(t.name.as_str()) {
                return Err(Error::DuplicateName(t.name.clone()));
            }
        }
        let templates = templates
            .into_iter()
            .enumerate()
            .map(|(id, t)| StrategyTemplate { id, ..t })
            .collect();
        Ok(StrategyLibrary { templates })
    }

    /// Parses a library file and reports sub-floor values as warnings.
    pub fn from_json_with_warnings(text: &str) -> Result<(Self, Vec<LibraryWarning>)> {
        let entries: Vec<LibraryEntry> = serde_json::from_str(text)?;
        let mut warnings = Vec::new();
        let mut templates = Vec::with_capacity(entries.len());
        for entry in entries {
            for a in Attribute::ALL {
                let value = entry.profile.value(a);
                if value < REQUIREMENT_FLOOR {
                    warnings.push(LibraryWarning {
                        strategy: entry.name.clone(),
                        attribute: a,
                        value,
                    });
                }
            }
            templates.push(StrategyTemplate {
                id: templates.len(),
                name: entry.name,
                category: entry.category,
                profile: entry.profile,
                canonical: entry.canonical,
            });
        }
        Ok((Self::new(templates)?, warnings))
    }

    /// Parses a library file, logging any sub-floor values.
    pub fn from_json(text: &str) -> Result<Self> {
        let (library, warnings) = Self::from_json_with_warnings(text)?;
        for w in warnings {
            log::warn!(
                "strategy `{}` sets {} = {} below the {} floor",
                w.strategy,
                w.attribute,
                w.value,
                REQUIREMENT_FLOOR
            );
        }
        Ok(library)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        let entries: Vec<LibraryEntry> = self
            .templates
            .iter()
            .map(|t| LibraryEntry {
                name: t.name.clone(),
                category: t.category,
                canonical: t.canonical,
                profile: t.profile,
            })
            .collect();
        Ok(serde_json::to_string_pretty(&entries)?)
    }

    pub fn templates(&self) -> &[StrategyTemplate] {
        &self.templates
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn get(&self, id: usize) -> Option<&StrategyTemplate> {
        self.templates.get(id)
    }

    pub fn by_name(&self, name: &str) -> Option<&StrategyTemplate> {
        self.templates.iter().find(|t| t.name == name)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, StrategyTemplate> {
        self.templates.iter()
    }

    /// Every template perturbed with the same noise scale.
    pub fn perturbed<R: Rng + ?Sized>(&self, sigma: f64, rng: &mut R) -> Result<Self> {
        let templates = self
            .templates
            .iter()
            .map(|t| perturb_template(t, sigma, rng))
            .collect::<Result<Vec<_>>>()?;
        Ok(StrategyLibrary { templates })
    }
}

impl<'a> IntoIterator for &'a StrategyLibrary {
    type Item = &'a StrategyTemplate;
    type IntoIter = std::slice::Iter<'a, StrategyTemplate>;

    fn into_iter(self) -> Self::IntoIter {
        self.templates.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn canonical_values() {
        let lib = StrategyLibrary::builtin_canonical();
        assert_eq!(lib.len(), 5);
        let build_up = lib.by_name("Build-up Play").unwrap();
        assert_eq!(build_up.profile.value(Attribute::PhysicalBase), 0.60);
        assert_eq!(build_up.profile.value(Attribute::TechnicalBase), 0.80);
        let pd = lib.by_name("Positional Defense").unwrap();
        assert_eq!(pd.profile.value(Attribute::HighPressCapability), 0.20);
        for t in &lib {
            assert!(t.canonical);
            assert!(t.profile.values().iter().all(|v| (0.2..=0.9).contains(v)));
        }
        assert_eq!(lib, StrategyLibrary::builtin_canonical());
        let gp = lib.by_name("Gegenpressing").unwrap();
        assert!((gp.intensity() - 0.85).abs() < 1e-12);
    }

    #[test]
    fn shipped_library() {
        let lib = StrategyLibrary::builtin_default();
        assert_eq!(lib.len(), 20);
        assert_eq!(lib.iter().filter(|t| t.canonical).count(), 5);
        let canonical = StrategyLibrary::builtin_canonical();
        for (a, b) in lib.iter().zip(canonical.iter()) {
            assert_eq!(a, b);
        }
        let (_, warnings) = StrategyLibrary::from_json_with_warnings(DEFAULT_LIBRARY_JSON).unwrap();
        assert!(warnings.is_empty());
    }

    #[test]
    fn load_round_trip_and_errors() {
        let canonical = StrategyLibrary::builtin_canonical();
        let text = canonical.to_json().unwrap();
        assert_eq!(StrategyLibrary::from_json(&text).unwrap(), canonical);

        let mut dup = canonical.templates().to_vec();
        dup.push(dup[0].clone());
        let text = StrategyLibrary { templates: dup }.to_json().unwrap();
        assert_eq!(
            StrategyLibrary::from_json(&text),
            Err(Error::DuplicateName("High Pressing".into()))
        );

        let out_of_range = text.replacen("0.7", "1.7", 1);
        assert!(StrategyLibrary::from_json(&out_of_range).is_err());
        assert!(matches!(
            StrategyLibrary::from_json("[{"),
            Err(Error::Parse(_))
        ));
        assert_eq!(StrategyLibrary::from_json("[]"), Err(Error::EmptyLibrary));
    }

    #[test]
    fn sub_floor_values_warn() {
        let text = StrategyLibrary::builtin_canonical()
            .to_json()
            .unwrap()
            .replacen("0.7", "0.1", 1);
        let (lib, warnings) = StrategyLibrary::from_json_with_warnings(&text).unwrap();
        assert_eq!(lib.len(), 5);
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].attribute, Attribute::OffensiveStrength);
    }

    #[test]
    fn perturbation() {
        let lib = StrategyLibrary::builtin_canonical();
        let t = &lib.templates()[0];
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let same = perturb_template(t, 0.0, &mut rng).unwrap();
        assert_eq!(same.profile, t.profile);
        assert!(!same.canonical);
        assert_eq!(same.name, t.name);

        let a = perturb_template(t, 0.05, &mut ChaCha8Rng::seed_from_u64(41)).unwrap();
        let b = perturb_template(t, 0.05, &mut ChaCha8Rng::seed_from_u64(41)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.profile, t.profile);
        assert_eq!(a.id, t.id);

        assert_eq!(
            perturb_template(t, -0.1, &mut rng),
            Err(Error::NegativeSigma(-0.1))
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn perturbed_profiles_stay_in_range(sigma in 0.0f64..2.0, seed in any::<u64>()) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for t in &StrategyLibrary::builtin_canonical() {
                    let p = perturb_template(t, sigma, &mut rng).unwrap();
                    prop_assert!(p.profile.values().iter().all(|v| (0.0..=1.0).contains(v)));
                }
            }
        }
    }
}
