//! Support-graph model: vertices for qterms, tuples, tuple fields and answer
//! choices, alignment edges between them, and the 0-1 program whose optimum
//! is the best-supported graph.

mod model;
mod question;
mod support;

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kb::{jaccard, FieldRole, Tuple};
use crate::text::{self, QTerm};

pub use model::{build_model, Edge, SupportModel, Vertex, VertexKind};
pub use question::{Choice, Question};
pub use support::{extract_support_graph, SupportEdge, SupportGraph};

/// How `n_x` is counted for a multi-word qterm.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QTermIdf {
    /// Tuples containing any stem of the chunk.
    #[default]
    ChunkUnion,
    /// Smallest per-stem tuple count.
    StemMin,
}

/// Objective and constraint parameters of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphWeights {
    /// Limits: field degree, choice degree, qterm degree, tuple budget
    /// (all strict), and minimum active fields per tuple.
    pub w: [u32; 5],
    pub qterm_base: f64,
    pub edge_threshold_qf: f64,
    pub edge_threshold_fc: f64,
    /// Multiplies edge weights; thresholds are compared against scaled weights.
    pub edge_scale: f64,
    pub science_boost: f64,
    /// Stemmed lexicon entries, each joined by spaces.
    pub science_terms: BTreeSet<String>,
    pub qterm_idf: QTermIdf,
}

impl Default for GraphWeights {
    fn default() -> Self {
        GraphWeights {
            w: [2, 4, 4, 4, 2],
            qterm_base: 0.8,
            edge_threshold_qf: 0.1,
            edge_threshold_fc: 0.2,
            edge_scale: 1.0,
            science_boost: 1.0,
            science_terms: BTreeSet::new(),
            qterm_idf: QTermIdf::ChunkUnion,
        }
    }
}

/// Boost applied to science qterms once a lexicon is loaded.
pub const DEFAULT_SCIENCE_BOOST: f64 = 1.5;

impl GraphWeights {
    pub fn validate(&self) -> Result<()> {
        if self.w.contains(&0) {
            return Err(Error::Config(format!(
                "w must be positive, got {:?}",
                self.w
            )));
        }
        if !(self.edge_scale.is_finite() && self.edge_scale > 0.0) {
            return Err(Error::Config("edge_scale must be positive".into()));
        }
        for (name, t) in [
            ("edge_threshold_qf", self.edge_threshold_qf),
            ("edge_threshold_fc", self.edge_threshold_fc),
        ] {
            if !(0.0..=self.edge_scale).contains(&t) {
                return Err(Error::Config(format!(
                    "{name} must lie in [0, {}], got {t}",
                    self.edge_scale
                )));
            }
        }
        if !(self.qterm_base.is_finite() && self.science_boost.is_finite()) {
            return Err(Error::Config("non-finite boost".into()));
        }
        Ok(())
    }

    /// Scales edge weights and both thresholds by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        GraphWeights {
            edge_scale: self.edge_scale * factor,
            edge_threshold_qf: self.edge_threshold_qf * factor,
            edge_threshold_fc: self.edge_threshold_fc * factor,
            ..self.clone()
        }
    }

    /// Replaces the lexicon with one term per line of `path` (`#` comments
    /// allowed) and sets the default science boost.
    pub fn load_science_lexicon(&mut self, path: &Path) -> Result<()> {
        let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        self.set_science_terms(
            contents
                .lines()
                .filter(|l| !l.trim_start().starts_with('#')),
        );
        self.science_boost = DEFAULT_SCIENCE_BOOST;
        Ok(())
    }

    pub fn set_science_terms<'a>(&mut self, terms: impl IntoIterator<Item = &'a str>) {
        self.science_terms = terms
            .into_iter()
            .map(|t| text::tokenize(t).joined())
            .filter(|t| !t.is_empty())
            .collect();
    }

    /// A qterm is science if the whole chunk or any single stem is in the lexicon.
    pub fn is_science(&self, qterm: &QTerm) -> bool {
        self.science_terms.contains(&qterm.stems.joined())
            || qterm
                .stems
                .stems
                .iter()
                .any(|s| self.science_terms.contains(s))
    }
}

/// `|tok(t) ∩ tok(h)| / |tok(h)|`: how much of the head `h` the text covers.
pub fn edge_weight(text_tokens: &BTreeSet<String>, head_tokens: &BTreeSet<String>) -> Result<f64> {
    if head_tokens.is_empty() {
        return Err(Error::EmptyHead);
    }
    let shared = text_tokens.intersection(head_tokens).count();
    Ok(shared as f64 / head_tokens.len() as f64)
}

/// `qterm_base · idfB · scienceB · locB` against the selected tuples.
pub fn qterm_coefficient(qterm: &QTerm, selected: &[Tuple], weights: &GraphWeights) -> f64 {
    let stems = qterm.stem_set();
    let n_x = match weights.qterm_idf {
        QTermIdf::ChunkUnion => selected
            .iter()
            .filter(|t| !t.all_tokens().is_disjoint(&stems))
            .count(),
        QTermIdf::StemMin => stems
            .iter()
            .map(|s| {
                selected
                    .iter()
                    .filter(|t| t.all_tokens().contains(s))
                    .count()
            })
            .min()
            .unwrap_or(0),
    };
    let idf = (1.0 + selected.len() as f64 / n_x.max(1) as f64).ln();
    let science = if weights.is_science(qterm) {
        weights.science_boost
    } else {
        1.0
    };
    weights.qterm_base * idf * science * qterm.location_boost()
}

/// `-1 + jaccard(tok(t), tok(qa))`.
pub fn tuple_coefficient(tuple: &Tuple, question: &Question) -> f64 {
    -1.0 + jaccard(tuple.all_tokens(), &question.qa_tokens())
}

/// Short variable-name tag for a field role.
fn role_tag(role: FieldRole) -> String {
    match role {
        FieldRole::Subject => "s".into(),
        FieldRole::Predicate => "p".into(),
        FieldRole::Object(i) => format!("o{i}"),
    }
}
