//! TF-IDF ranking of response documents against a growing keyword stream.
//!
//! Scores use `idf(t) = ln((1 + N) / (1 + df(t))) + 1` and
//! `score(d) = Σ_t w(t) · tf(t, d) · idf(t)² / ‖d‖`, where `‖d‖` is the L2
//! norm of the document's tf-idf vector. Sums run in term order so results
//! are bit-for-bit reproducible.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Real;

pub const DEFAULT_SYNONYM_WEIGHT: f64 = 0.5;

#[derive(Debug, Error)]
pub enum RetrievalError {
    #[error("duplicate document id `{0}`")]
    DuplicateId(String),
    #[error("document `{0}` has an empty body")]
    EmptyBody(String),
    #[error("invalid synonym entry for `{term}`: {reason}")]
    InvalidSynonym { term: String, reason: String },
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed synonyms file: {0}")]
    Json(#[from] serde_json::Error),
}

/// Lowercases and splits on anything that is not alphanumeric.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: String,
    pub title: String,
    pub body: String,
}

impl Document {
    pub fn new(doc_id: impl Into<String>, title: impl Into<String>, body: impl Into<String>) -> Self {
        Self { doc_id: doc_id.into(), title: title.into(), body: body.into() }
    }

    /// Title is the first non-blank line of `text`; the body is all of it.
    pub fn from_text(doc_id: impl Into<String>, text: &str) -> Self {
        let title = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or_default();
        Self::new(doc_id, title, text)
    }
}

/// Reads every non-hidden file in `dir`, using the file name as the id.
pub fn load_corpus(dir: &Path) -> Result<Vec<Document>, RetrievalError> {
    let io = |source| RetrievalError::Io { path: dir.display().to_string(), source };
    let mut docs = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let entry = entry.map_err(io)?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.starts_with('.') || !entry.file_type().map_err(io)?.is_file() {
            continue;
        }
        let path = entry.path();
        let text = std::fs::read_to_string(&path)
            .map_err(|source| RetrievalError::Io { path: path.display().to_string(), source })?;
        docs.push(Document::from_text(name, &text));
    }
    docs.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    Ok(docs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct IndexedDoc<T> {
    title: String,
    counts: BTreeMap<String, u32>,
    norm: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Index<T> {
    doc_count: usize,
    df: BTreeMap<String, usize>,
    docs: BTreeMap<String, IndexedDoc<T>>,
}

/// Builds the index; bodies are tokenized with [`tokenize`].
pub fn index_corpus<T: Real>(docs: &[Document]) -> Result<Index<T>, RetrievalError> {
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    let mut counted: BTreeMap<String, (String, BTreeMap<String, u32>)> = BTreeMap::new();
    for doc in docs {
        if counted.contains_key(&doc.doc_id) {
            return Err(RetrievalError::DuplicateId(doc.doc_id.clone()));
        }
        if doc.body.trim().is_empty() {
            return Err(RetrievalError::EmptyBody(doc.doc_id.clone()));
        }
        let mut counts: BTreeMap<String, u32> = BTreeMap::new();
        for term in tokenize(&doc.body) {
            *counts.entry(term).or_default() += 1;
        }
        for term in counts.keys() {
            *df.entry(term.clone()).or_default() += 1;
        }
        counted.insert(doc.doc_id.clone(), (doc.title.clone(), counts));
    }

    let mut index = Index { doc_count: counted.len(), df, docs: BTreeMap::new() };
    for (id, (title, counts)) in counted {
        let norm = counts
            .iter()
            .map(|(term, tf)| {
                let x = T::lit(*tf as f64) * index.idf(term);
                x * x
            })
            .fold(T::zero(), |a, b| a + b)
            .sqrt();
        index.docs.insert(id, IndexedDoc { title, counts, norm });
    }
    Ok(index)
}

impl<T: Real> Index<T> {
    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn df(&self, term: &str) -> usize {
        self.df.get(term).copied().unwrap_or(0)
    }

    pub fn tf(&self, term: &str, doc_id: &str) -> u32 {
        self.docs.get(doc_id).and_then(|d| d.counts.get(term)).copied().unwrap_or(0)
    }

    pub fn idf(&self, term: &str) -> T {
        let n = T::lit(self.doc_count as f64);
        let df = T::lit(self.df(term) as f64);
        ((T::one() + n) / (T::one() + df)).ln() + T::one()
    }

    /// L2 norm of the document's tf-idf vector.
    pub fn norm(&self, doc_id: &str) -> Option<T> {
        self.docs.get(doc_id).map(|d| d.norm)
    }

    pub fn title(&self, doc_id: &str) -> Option<&str> {
        self.docs.get(doc_id).map(|d| d.title.as_str())
    }

    pub fn doc_ids(&self) -> impl Iterator<Item = &str> {
        self.docs.keys().map(String::as_str)
    }

    /// Score of one document; zero when it shares no term with the query.
    pub fn score(&self, query: &WeightedQuery<T>, doc_id: &str) -> T {
        let Some(doc) = self.docs.get(doc_id) else { return T::zero() };
        if doc.norm <= T::zero() {
            return T::zero();
        }
        let mut raw = T::zero();
        for (term, w) in &query.0 {
            if let Some(tf) = doc.counts.get(term) {
                let idf = self.idf(term);
                raw = raw + *w * T::lit(*tf as f64) * idf * idf;
            }
        }
        raw / doc.norm
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynonymEntry<T> {
    pub term: String,
    #[serde(default)]
    pub weight: Option<T>,
}

/// Canonical term → synonyms with expansion weights in (0, 1].
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SynonymSet<T>(BTreeMap<String, Vec<(String, T)>>);

impl<T: Real> SynonymSet<T> {
    pub fn new(entries: BTreeMap<String, Vec<SynonymEntry<T>>>) -> Result<Self, RetrievalError> {
        let mut out = BTreeMap::new();
        for (canonical, list) in entries {
            let bad = |reason: &str| RetrievalError::InvalidSynonym { term: canonical.clone(), reason: reason.into() };
            let key = match tokenize(&canonical).as_slice() {
                [one] => one.clone(),
                _ => return Err(bad("canonical term must be a single token")),
            };
            let mut expanded = Vec::with_capacity(list.len());
            for entry in list {
                let weight = entry.weight.unwrap_or_else(|| T::lit(DEFAULT_SYNONYM_WEIGHT));
                if !(weight > T::zero() && weight <= T::one()) {
                    return Err(bad(&format!("weight {weight} for `{}` is outside (0, 1]", entry.term)));
                }
                let tokens = tokenize(&entry.term);
                if tokens.is_empty() {
                    return Err(bad("empty synonym"));
                }
                if tokens.iter().any(|t| *t == key) && weight != T::one() {
                    return Err(bad("maps to itself with weight other than 1"));
                }
                expanded.push((entry.term, weight));
            }
            out.insert(key, expanded);
        }
        Ok(Self(out))
    }

    /// Parses `{"term": [{"term": "...", "weight": 0.5}, ...], ...}`.
    pub fn from_json(text: &str) -> Result<Self, RetrievalError> {
        Self::new(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, RetrievalError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| RetrievalError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text)
    }

    pub fn synonyms(&self, term: &str) -> &[(String, T)] {
        self.0.get(term).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Term → total weight.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct WeightedQuery<T>(pub BTreeMap<String, T>);

impl<T: Real> WeightedQuery<T> {
    pub fn add(&mut self, term: &str, weight: T) {
        let w = self.0.entry(term.to_string()).or_insert_with(T::zero);
        *w = *w + weight;
    }

    pub fn weight(&self, term: &str) -> T {
        self.0.get(term).copied().unwrap_or_else(T::zero)
    }
}

/// Each keyword token weighs 1; each synonym token of a keyword token adds
/// that synonym's weight.
pub fn expand_query<T: Real, S: AsRef<str>>(keywords: &[S], synonyms: &SynonymSet<T>) -> WeightedQuery<T> {
    let mut q = WeightedQuery::default();
    for keyword in keywords {
        for token in tokenize(keyword.as_ref()) {
            q.add(&token, T::one());
            for (syn, w) in synonyms.synonyms(&token) {
                for t in tokenize(syn) {
                    q.add(&t, *w);
                }
            }
        }
    }
    q
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedDoc<T> {
    pub doc_id: String,
    pub title: String,
    pub score: T,
    pub rank: usize,
}

/// Top `k` documents with positive score, ties by doc id ascending.
pub fn rank<T: Real>(index: &Index<T>, query: &WeightedQuery<T>, k: usize) -> Vec<RankedDoc<T>> {
    let mut scored: Vec<(&str, T)> = index
        .doc_ids()
        .map(|id| (id, index.score(query, id)))
        .filter(|(_, s)| *s > T::zero())
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(std::cmp::Ordering::Equal).then_with(|| a.0.cmp(b.0)));
    scored
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (id, score))| RankedDoc {
            doc_id: id.to_string(),
            title: index.title(id).unwrap_or_default().to_string(),
            score,
            rank: i + 1,
        })
        .collect()
}

/// Cumulative keyword stream owned by whoever drives re-ranking.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeywordStream(pub Vec<String>);

/// Appends `new_keywords` to `stream` and ranks against the whole stream.
pub fn rerank_on_event<T: Real, S: AsRef<str>>(
    index: &Index<T>,
    synonyms: &SynonymSet<T>,
    stream: &mut KeywordStream,
    new_keywords: &[S],
    k: usize,
) -> Vec<RankedDoc<T>> {
    stream.0.extend(new_keywords.iter().map(|s| s.as_ref().to_string()));
    rank(index, &expand_query(&stream.0, synonyms), k)
}
