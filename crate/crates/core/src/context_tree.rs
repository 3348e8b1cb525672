//! Bottom-up aggregation of raw observables into the 14 macro-attributes.
//!
//! Every attribute is either computed from a tree of [`Node`]s whose leaves are
//! named observables, or supplied directly as an already-normalized score.

use std::collections::{BTreeMap, HashSet};
use std::io::Read;

use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::attribute::{Attribute, AttributeVector, PartialAttributeVector, DIMENSIONS};
use crate::error::{Error, Result};

const WEIGHT_TOLERANCE: f64 = 1e-9;

/// Min-max range used to normalize a raw observable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Benchmark {
    pub min: f64,
    pub max: f64,
}

/// A raw observable with its benchmark.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafMetric {
    pub id: String,
    pub raw: f64,
    pub benchmark: Benchmark,
}

impl LeafMetric {
    pub fn normalized(&self) -> Result<f64> {
        normalize_leaf(self.raw, self.benchmark).map_err(|err| match err {
            Error::DegenerateBenchmark { min, max, .. } => Error::DegenerateBenchmark {
                leaf: self.id.clone(),
                min,
                max,
            },
            other => other,
        })
    }
}

/// `clamp((raw - min) / (max - min), 0, 1)`.
pub fn normalize_leaf(raw: f64, benchmark: Benchmark) -> Result<f64> {
    let Benchmark { min, max } = benchmark;
    if max.is_nan() || min.is_nan() || max <= min {
        return Err(Error::DegenerateBenchmark {
            leaf: String::new(),
            min,
            max,
        });
    }
    Ok(((raw - min) / (max - min)).clamp(0.0, 1.0))
}

/// Convex combination of child values. Weights must sum to 1.
pub fn aggregate_node(values: &[f64], weights: &[f64]) -> Result<f64> {
    if values.len() != weights.len() {
        return Err(Error::WeightArity {
            len: values.len(),
            weights: weights.len(),
        });
    }
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > WEIGHT_TOLERANCE || weights.iter().any(|w| *w < 0.0) {
        return Err(Error::WeightSumViolation {
            node: String::new(),
            sum,
        });
    }
    let value: f64 = values.iter().zip(weights).map(|(v, w)| v * w).sum();
    // rounding can push a convex combination a hair past its extremes
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(value.clamp(lo, hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Combiner {
    #[default]
    Weighted,
    /// Maximum over children; weights are ignored.
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    #[serde(default)]
    pub combiner: Combiner,
    pub children: Vec<Child>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Child {
    #[serde(rename = "ref")]
    pub reference: ChildRef,
    #[serde(default = "unit_weight")]
    pub weight: f64,
}

fn unit_weight() -> f64 {
    1.0
}

/// A child is either a leaf id or a nested node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChildRef {
    Leaf(String),
    Node(Box<Node>),
}

impl Node {
    pub fn weighted(id: impl Into<String>, children: Vec<(ChildRef, f64)>) -> Self {
        Node {
            id: id.into(),
            combiner: Combiner::Weighted,
            children: children
                .into_iter()
                .map(|(reference, weight)| Child { reference, weight })
                .collect(),
        }
    }

    pub fn max(id: impl Into<String>, children: Vec<ChildRef>) -> Self {
        Node {
            id: id.into(),
            combiner: Combiner::Max,
            children: children
                .into_iter()
                .map(|reference| Child {
                    reference,
                    weight: 1.0,
                })
                .collect(),
        }
    }

    fn validate(&self, seen: &mut HashSet<String>) -> Result<()> {
        if self.children.is_empty() {
            return Err(Error::InvalidTree(format!(
                "node `{}` has no children",
                self.id
            )));
        }
        if !seen.insert(format!("node:{}", self.id)) {
            return Err(Error::InvalidTree(format!(
                "node `{}` appears twice",
                self.id
            )));
        }
        if self.combiner == Combiner::Weighted {
            let sum: f64 = self.children.iter().map(|c| c.weight).sum();
            if (sum - 1.0).abs() > WEIGHT_TOLERANCE || self.children.iter().any(|c| c.weight < 0.0)
            {
                return Err(Error::WeightSumViolation {
                    node: self.id.clone(),
                    sum,
                });
            }
        }
        for child in &self.children {
            match &child.reference {
                ChildRef::Leaf(id) => {
                    if !seen.insert(format!("leaf:{id}")) {
                        return Err(Error::InvalidTree(format!(
                            "leaf `{id}` is shared within one subtree"
                        )));
                    }
                }
                ChildRef::Node(node) => node.validate(seen)?,
            }
        }
        Ok(())
    }

    /// Evaluates the subtree; `Ok(None)` when a leaf is missing and `strict`
    /// is off.
    fn evaluate(&self, leaves: &LeafInputs, strict: bool) -> Result<Option<f64>> {
        let mut values = Vec::with_capacity(self.children.len());
        for child in &self.children {
            let value = match &child.reference {
                ChildRef::Leaf(id) => match leaves.normalized(id) {
                    Ok(v) => v,
                    Err(Error::MissingLeaf(_)) if !strict => return Ok(None),
                    Err(e) => return Err(e),
                },
                ChildRef::Node(node) => match node.evaluate(leaves, strict)? {
                    Some(v) => v,
                    None => return Ok(None),
                },
            };
            values.push(value);
        }
        let value = match self.combiner {
            Combiner::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Combiner::Weighted => {
                let weights: Vec<f64> = self.children.iter().map(|c| c.weight).collect();
                aggregate_node(&values, &weights).map_err(|err| match err {
                    Error::WeightSumViolation { sum, .. } => Error::WeightSumViolation {
                        node: self.id.clone(),
                        sum,
                    },
                    other => other,
                })?
            }
        };
        Ok(Some(value))
    }
}

/// How one macro-attribute is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum AttributeSource {
    /// Supplied as a normalized score at evaluation time.
    Direct,
    Tree(Node),
}

impl Serialize for AttributeSource {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            AttributeSource::Direct => {
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry("direct", &true)?;
                map.end()
            }
            AttributeSource::Tree(node) => node.serialize(serializer),
        }
    }
}

impl<'de> Deserialize<'de> for AttributeSource {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let value = Value::deserialize(deserializer)?;
        match value.get("direct") {
            Some(Value::Bool(true)) => Ok(AttributeSource::Direct),
            Some(_) => Err(de::Error::custom("`direct` must be true when present")),
            None => serde_json::from_value(value)
                .map(AttributeSource::Tree)
                .map_err(de::Error::custom),
        }
    }
}

/// One source per macro-attribute.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextTree {
    sources: Vec<AttributeSource>,
}

impl ContextTree {
    /// Every attribute supplied directly.
    pub fn all_direct() -> Self {
        ContextTree {
            sources: vec![AttributeSource::Direct; DIMENSIONS],
        }
    }

    pub fn new(sources: BTreeMap<Attribute, AttributeSource>) -> Result<Self> {
        let mut ordered = Vec::with_capacity(DIMENSIONS);
        for a in Attribute::ALL {
            let source = sources
                .get(&a)
                .cloned()
                .ok_or_else(|| Error::InvalidTree(format!("{a} has no source")))?;
            if let AttributeSource::Tree(node) = &source {
                node.validate(&mut HashSet::new())?;
            }
            ordered.push(source);
        }
        Ok(ContextTree { sources: ordered })
    }

    pub fn with_source(mut self, attribute: Attribute, source: AttributeSource) -> Result<Self> {
        if let AttributeSource::Tree(node) = &source {
            node.validate(&mut HashSet::new())?;
        }
        self.sources[attribute.index()] = source;
        Ok(self)
    }

    pub fn source(&self, attribute: Attribute) -> &AttributeSource {
        &self.sources[attribute.index()]
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: BTreeMap<String, AttributeSource> = serde_json::from_str(text)?;
        let mut sources = BTreeMap::new();
        for (code, source) in raw {
            let attribute = Attribute::from_code(&code)
                .ok_or_else(|| Error::field(code.clone(), "unknown attribute key"))?;
            sources.insert(attribute, source);
        }
        Self::new(sources)
    }

    pub fn to_json(&self) -> Result<String> {
        let map: BTreeMap<usize, (&str, &AttributeSource)> = Attribute::ALL
            .iter()
            .map(|a| (a.index(), (a.code(), &self.sources[a.index()])))
            .collect();
        let mut out = serde_json::Map::new();
        for (_, (code, source)) in map {
            out.insert(code.to_string(), serde_json::to_value(source)?);
        }
        Ok(serde_json::to_string_pretty(&Value::Object(out))?)
    }

    /// Evaluates every attribute. Fails on any missing leaf or direct score.
    pub fn evaluate(
        &self,
        leaves: &LeafInputs,
        direct: &BTreeMap<Attribute, f64>,
    ) -> Result<AttributeVector> {
        let mut values = [0.0; DIMENSIONS];
        for a in Attribute::ALL {
            values[a.index()] = match &self.sources[a.index()] {
                AttributeSource::Direct => *direct.get(&a).ok_or(Error::MissingDirect(a))?,
                AttributeSource::Tree(node) => node
                    .evaluate(leaves, true)?
                    .expect("strict evaluation yields a value"),
            };
        }
        AttributeVector::new(&values)
    }

    /// Evaluates the attributes whose inputs are all present and returns them
    /// as a partial vector. Fails only when nothing can be computed.
    pub fn evaluate_available(
        &self,
        leaves: &LeafInputs,
        direct: &BTreeMap<Attribute, f64>,
    ) -> Result<PartialAttributeVector> {
        let mut pairs = Vec::new();
        for a in Attribute::ALL {
            let value = match &self.sources[a.index()] {
                AttributeSource::Direct => direct.get(&a).copied(),
                AttributeSource::Tree(node) => node.evaluate(leaves, false)?,
            };
            if let Some(v) = value {
                pairs.push((a, v));
            }
        }
        PartialAttributeVector::from_pairs(pairs)
    }
}

/// Raw leaf values plus optional benchmarks keyed by leaf id.
///
/// A leaf without a benchmark must already be normalized to `[0, 1]`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LeafInputs {
    pub values: BTreeMap<String, f64>,
    #[serde(default)]
    pub benchmarks: BTreeMap<String, Benchmark>,
}

impl LeafInputs {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, raw: f64) -> &mut Self {
        self.values.insert(id.into(), raw);
        self
    }

    pub fn insert_metric(&mut self, metric: LeafMetric) -> &mut Self {
        self.benchmarks.insert(metric.id.clone(), metric.benchmark);
        self.values.insert(metric.id, metric.raw);
        self
    }

    pub fn with_benchmarks(mut self, benchmarks: BTreeMap<String, Benchmark>) -> Self {
        self.benchmarks.extend(benchmarks);
        self
    }

    fn normalized(&self, id: &str) -> Result<f64> {
        let raw = *self
            .values
            .get(id)
            .ok_or_else(|| Error::MissingLeaf(id.to_string()))?;
        match self.benchmarks.get(id) {
            Some(b) => LeafMetric {
                id: id.to_string(),
                raw,
                benchmark: *b,
            }
            .normalized(),
            None if (0.0..=1.0).contains(&raw) => Ok(raw),
            None => Err(Error::field(id, "no benchmark and value is outside [0, 1]")),
        }
    }

    /// Reads `id,value` rows (with a header) into leaf values.
    pub fn values_from_csv<R: Read>(reader: R) -> Result<BTreeMap<String, f64>> {
        #[derive(Deserialize)]
        struct Row {
            id: String,
            value: f64,
        }
        let mut rdr = csv::Reader::from_reader(reader);
        let mut out = BTreeMap::new();
        for row in rdr.deserialize::<Row>() {
            let row = row?;
            out.insert(row.id, row.value);
        }
        Ok(out)
    }

    /// Reads a JSON object mapping leaf id to benchmark.
    pub fn benchmarks_from_json(text: &str) -> Result<BTreeMap<String, Benchmark>> {
        let benchmarks: BTreeMap<String, Benchmark> = serde_json::from_str(text)?;
        for (id, b) in &benchmarks {
            if b.max.is_nan() || b.min.is_nan() || b.max <= b.min {
                return Err(Error::DegenerateBenchmark {
                    leaf: id.clone(),
                    min: b.min,
                    max: b.max,
                });
            }
        }
        Ok(benchmarks)
    }
}

/// The shipped default tree definition.
pub const DEFAULT_TREE_JSON: &str = include_str!("../data/context_tree.json");
/// Benchmarks for the leaves of the shipped default tree.
pub const DEFAULT_BENCHMARKS_JSON: &str = include_str!("../data/benchmarks.json");

pub fn default_tree() -> ContextTree {
    ContextTree::from_json(DEFAULT_TREE_JSON).expect("shipped context tree is valid")
}

pub fn default_benchmarks() -> BTreeMap<String, Benchmark> {
    LeafInputs::benchmarks_from_json(DEFAULT_BENCHMARKS_JSON).expect("shipped benchmarks are valid")
}
