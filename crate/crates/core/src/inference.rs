//! Exact posterior over threat categories and substances.
//!
//! Evidence variables are boolean and conditionally independent given the
//! category, so the posterior depends only on how many times each variable
//! was observed true and false. [`BeliefState`] keeps those counts, which
//! makes incremental updates identical to batch recomputation and the result
//! independent of evidence order.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{self, ConfigError};
use crate::Real;

/// Sum tolerance for priors and per-category substance priors, widened to a
/// few ulps for scalars coarser than `f64`.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Category {
    Chemical,
    Biological,
    Radiological,
    None,
}

impl Category {
    /// Also the tie-break order.
    pub const ALL: [Category; 4] = [Category::Chemical, Category::Biological, Category::Radiological, Category::None];

    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Chemical => "chemical",
            Category::Biological => "biological",
            Category::Radiological => "radiological",
            Category::None => "none",
        }
    }

    pub fn index(&self) -> usize {
        *self as usize
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = InferenceError;

    fn from_str(s: &str) -> Result<Self, InferenceError> {
        Self::ALL.into_iter().find(|c| c.as_str() == s).ok_or_else(|| InferenceError::UnknownCategory(s.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("{what} sums to {sum}, not 1")]
    NotNormalized { what: String, sum: f64 },
    #[error("{what} = {value} is not a probability")]
    NotAProbability { what: String, value: f64 },
    #[error("{what} is missing an entry for category `{category}`")]
    MissingCategory { what: String, category: Category },
    #[error("unknown category `{0}`")]
    UnknownCategory(String),
    #[error("duplicate substance id `{0}`")]
    DuplicateSubstance(String),
    #[error("unknown evidence variable `{0}`")]
    UnknownVariable(String),
    #[error("evidence has zero probability under every category")]
    ImpossibleEvidence,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubstanceConfig<T> {
    pub id: String,
    pub category: Category,
    /// Probability of this substance given its category.
    pub prior: T,
}

/// On-disk model description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig<T> {
    pub categories: BTreeMap<Category, T>,
    pub substances: Vec<SubstanceConfig<T>>,
    /// Variable name → P(observed true | category).
    pub evidence: BTreeMap<String, BTreeMap<Category, T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Substance<T> {
    pub id: String,
    pub category: Category,
    pub prior: T,
}

/// Validated, immutable model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThreatModel<T> {
    priors: [T; 4],
    substances: Vec<Substance<T>>,
    likelihoods: BTreeMap<String, [T; 4]>,
}

fn probability<T: Real>(what: impl Fn() -> String, p: T) -> Result<T, InferenceError> {
    if p >= T::zero() && p <= T::one() {
        Ok(p)
    } else {
        Err(InferenceError::NotAProbability { what: what(), value: p.as_f64() })
    }
}

fn per_category<T: Real>(what: &str, table: &BTreeMap<Category, T>) -> Result<[T; 4], InferenceError> {
    let mut out = [T::zero(); 4];
    for c in Category::ALL {
        let p = *table
            .get(&c)
            .ok_or_else(|| InferenceError::MissingCategory { what: what.to_string(), category: c })?;
        out[c.index()] = probability(|| format!("{what}.{c}"), p)?;
    }
    Ok(out)
}

fn check_sum<T: Real>(what: impl Into<String>, values: impl Iterator<Item = T>) -> Result<(), InferenceError> {
    let sum = values.fold(T::zero(), |a, b| a + b).as_f64();
    let tolerance = NORMALIZATION_TOLERANCE.max(8.0 * T::epsilon().as_f64());
    if (sum - 1.0).abs() > tolerance {
        return Err(InferenceError::NotNormalized { what: what.into(), sum });
    }
    Ok(())
}

/// Validates a model description.
///
/// A category without listed substances gets one implicit substance named
/// after the category, so the substance posterior always covers every
/// category.
pub fn build_model<T: Real>(config: &ModelConfig<T>) -> Result<ThreatModel<T>, InferenceError> {
    let priors = per_category("categories", &config.categories)?;
    check_sum("category prior", priors.iter().copied())?;

    let mut substances: Vec<Substance<T>> = Vec::new();
    for (i, s) in config.substances.iter().enumerate() {
        if substances.iter().any(|t| t.id == s.id) {
            return Err(InferenceError::DuplicateSubstance(s.id.clone()));
        }
        let prior = probability(|| format!("substances[{i}].prior"), s.prior)?;
        substances.push(Substance { id: s.id.clone(), category: s.category, prior });
    }
    for c in Category::ALL {
        let members: Vec<T> = substances.iter().filter(|s| s.category == c).map(|s| s.prior).collect();
        if members.is_empty() {
            if substances.iter().any(|s| s.id == c.as_str()) {
                return Err(InferenceError::DuplicateSubstance(c.as_str().to_string()));
            }
            substances.push(Substance { id: c.as_str().to_string(), category: c, prior: T::one() });
        } else {
            check_sum(format!("substance prior for {c}"), members.into_iter())?;
        }
    }
    substances.sort_by(|a, b| a.category.cmp(&b.category).then_with(|| a.id.cmp(&b.id)));

    let mut likelihoods = BTreeMap::new();
    for (name, table) in &config.evidence {
        likelihoods.insert(name.clone(), per_category(&format!("evidence.{name}"), table)?);
    }
    Ok(ThreatModel { priors, substances, likelihoods })
}

/// Reads and validates a model file.
pub fn load_model<T: Real>(path: &Path) -> Result<ThreatModel<T>, InferenceError> {
    let config: ModelConfig<T> = scenario::load_strict(path)?;
    build_model(&config)
}

impl<T: Real> ThreatModel<T> {
    pub fn prior(&self, category: Category) -> T {
        self.priors[category.index()]
    }

    pub fn substances(&self) -> &[Substance<T>] {
        &self.substances
    }

    pub fn has_variable(&self, name: &str) -> bool {
        self.likelihoods.contains_key(name)
    }

    pub fn variables(&self) -> impl Iterator<Item = &str> {
        self.likelihoods.keys().map(String::as_str)
    }

    /// P(`name` observed true | category).
    pub fn likelihood(&self, name: &str, category: Category) -> Option<T> {
        self.likelihoods.get(name).map(|row| row[category.index()])
    }

    /// Log of the unnormalised posterior weight of each category given
    /// observation counts, for arbitrary positive prior weights.
    pub fn log_weights(&self, prior_weights: &[T; 4], counts: &EvidenceCounts) -> Result<[T; 4], InferenceError> {
        let mut out = [T::zero(); 4];
        for c in Category::ALL {
            let mut lw = prior_weights[c.index()].ln();
            for (name, n) in &counts.0 {
                let p = self.likelihood(name, c).ok_or_else(|| InferenceError::UnknownVariable(name.clone()))?;
                lw = lw + count_log(n.observed_true, p) + count_log(n.observed_false, T::one() - p);
            }
            out[c.index()] = lw;
        }
        Ok(out)
    }

    /// Category posterior from arbitrary positive prior weights; scaling all
    /// weights by a constant does not change the result.
    pub fn category_posterior(
        &self,
        prior_weights: &[T; 4],
        counts: &EvidenceCounts,
    ) -> Result<([T; 4], T), InferenceError> {
        let lw = self.log_weights(prior_weights, counts)?;
        let max = lw.iter().copied().fold(T::neg_infinity(), T::max);
        if max == T::neg_infinity() {
            return Err(InferenceError::ImpossibleEvidence);
        }
        let mut probs = lw.map(|l| (l - max).exp());
        let total = probs.iter().copied().fold(T::zero(), |a, b| a + b);
        for p in &mut probs {
            *p = *p / total;
        }
        Ok((probs, max + total.ln()))
    }

    fn belief(&self, counts: &EvidenceCounts) -> Result<Belief<T>, InferenceError> {
        let (cats, log_likelihood) = self.category_posterior(&self.priors, counts)?;
        let categories = Category::ALL.into_iter().map(|c| (c, cats[c.index()])).collect();
        let substances = self
            .substances
            .iter()
            .map(|s| (s.id.clone(), (s.category, cats[s.category.index()] * s.prior)))
            .collect();
        Ok(Belief { categories, substances, evidence_count: counts.total(), log_likelihood })
    }

    /// Exact posterior over categories and substances.
    pub fn posterior(&self, evidence: &[Evidence]) -> Result<Belief<T>, InferenceError> {
        let mut counts = EvidenceCounts::default();
        for e in evidence {
            self.check(e)?;
            counts.add(e);
        }
        self.belief(&counts)
    }

    fn check(&self, e: &Evidence) -> Result<(), InferenceError> {
        if self.has_variable(&e.variable) {
            Ok(())
        } else {
            Err(InferenceError::UnknownVariable(e.variable.clone()))
        }
    }
}

/// `n · ln p` with `0 · ln 0 = 0`.
fn count_log<T: Real>(n: u64, p: T) -> T {
    if n == 0 {
        T::zero()
    } else {
        T::lit(n as f64) * p.ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub variable: String,
    pub value: bool,
    pub region_id: String,
    pub timestamp: f64,
}

impl Evidence {
    pub fn new(variable: impl Into<String>, value: bool, region_id: impl Into<String>, timestamp: f64) -> Self {
        Self { variable: variable.into(), value, region_id: region_id.into(), timestamp }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Observations {
    pub observed_true: u64,
    pub observed_false: u64,
}

/// Sufficient statistic of an evidence list.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct EvidenceCounts(pub BTreeMap<String, Observations>);

impl EvidenceCounts {
    pub fn add(&mut self, e: &Evidence) {
        let n = self.0.entry(e.variable.clone()).or_default();
        if e.value {
            n.observed_true += 1;
        } else {
            n.observed_false += 1;
        }
    }

    pub fn total(&self) -> u64 {
        self.0.values().map(|n| n.observed_true + n.observed_false).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Belief<T> {
    pub categories: BTreeMap<Category, T>,
    /// Substance id → (category, posterior).
    pub substances: BTreeMap<String, (Category, T)>,
    pub evidence_count: u64,
    /// ln P(evidence).
    pub log_likelihood: T,
}

impl<T: Real> Belief<T> {
    pub fn category(&self, c: Category) -> T {
        self.categories.get(&c).copied().unwrap_or_else(T::zero)
    }

    pub fn substance(&self, id: &str) -> Option<T> {
        self.substances.get(id).map(|(_, p)| *p)
    }
}

/// Argmax category and argmax substance, ties broken by category order and
/// substance id respectively.
pub fn most_probable<T: Real>(belief: &Belief<T>) -> (Category, String) {
    let mut best = Category::Chemical;
    for c in Category::ALL {
        if belief.category(c) > belief.category(best) {
            best = c;
        }
    }
    let mut substance: Option<(&String, T)> = None;
    for (id, (_, p)) in &belief.substances {
        if substance.is_none_or(|(_, q)| *p > q) {
            substance = Some((id, *p));
        }
    }
    (best, substance.map(|(id, _)| id.clone()).unwrap_or_default())
}

/// Accumulated evidence and the belief it implies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeliefState<T> {
    counts: EvidenceCounts,
    belief: Belief<T>,
}

impl<T: Real> BeliefState<T> {
    /// State with no evidence; its belief is the prior.
    pub fn new(model: &ThreatModel<T>) -> Self {
        let counts = EvidenceCounts::default();
        let belief = model.belief(&counts).expect("priors sum to 1");
        Self { counts, belief }
    }

    pub fn belief(&self) -> &Belief<T> {
        &self.belief
    }

    pub fn counts(&self) -> &EvidenceCounts {
        &self.counts
    }

    /// New state including `evidence`; `self` is left untouched on error.
    pub fn update(&self, model: &ThreatModel<T>, evidence: &Evidence) -> Result<Self, InferenceError> {
        model.check(evidence)?;
        let mut counts = self.counts.clone();
        counts.add(evidence);
        let belief = model.belief(&counts)?;
        Ok(Self { counts, belief })
    }
}
