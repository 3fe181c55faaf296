//! Per-question tuple selection: TF-IDF ranking against the KB and Jaccard
//! rescoring of tuples extracted on the fly from retrieved sentences.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{DocFreq, ScoredTuple, Tuple, TupleKB};
use crate::graph::Question;
use crate::text;

/// How the TF-IDF sum is normalized by the tuple and query sizes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TfIdfNormalization {
    /// Divide by `|tok(t)| + |tok(q)|`.
    #[default]
    Sum,
    /// Divide by `|tok(t)| * |tok(q)|`.
    Product,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionParams {
    /// Candidate pool size by raw stem overlap.
    pub pool: usize,
    /// Tuples kept from the KB (`T_qa`).
    pub kb_top_k: usize,
    /// Tuples kept from sentences (`T'_qa`) and from tables.
    pub extra_top_k: usize,
    pub max_sentence_chars: usize,
    pub max_tables: usize,
    pub max_rows: usize,
    pub normalization: TfIdfNormalization,
}

impl Default for SelectionParams {
    fn default() -> Self {
        SelectionParams {
            pool: 1000,
            kb_top_k: 50,
            extra_top_k: 50,
            max_sentence_chars: 300,
            max_tables: 7,
            max_rows: 20,
            normalization: TfIdfNormalization::Sum,
        }
    }
}

/// Normalized TF-IDF of a document against a query, both as stem sets:
/// `sum_{x in doc & query} ln(1 + N/n_x)` over the normalizer.
pub fn tfidf(
    doc: &BTreeSet<String>,
    query: &BTreeSet<String>,
    df: &DocFreq,
    norm: TfIdfNormalization,
) -> f64 {
    let denom = match norm {
        TfIdfNormalization::Sum => (doc.len() + query.len()) as f64,
        TfIdfNormalization::Product => (doc.len() * query.len()) as f64,
    };
    if denom == 0.0 {
        return 0.0;
    }
    let sum: f64 = doc.intersection(query).map(|x| df.idf(x)).sum();
    sum / denom
}

/// `tfidf_score(t, q)` with the KB's document frequencies.
pub fn tfidf_score(
    tuple: &Tuple,
    query: &BTreeSet<String>,
    kb: &TupleKB,
    norm: TfIdfNormalization,
) -> f64 {
    tfidf(tuple.all_tokens(), query, kb.doc_freq(), norm)
}

/// `|a & b| / |a | b|`, 0 when both are empty.
pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

fn by_score_desc(a: &ScoredTuple, b: &ScoredTuple) -> Ordering {
    b.score.partial_cmp(&a.score).unwrap_or(Ordering::Equal)
}

/// Selects `T_qa` from the KB.
///
/// Candidates are the `pool` tuples sharing the most distinct stems with
/// `tok(qa)` (ties by id). Tuples that share nothing with any answer choice
/// are dropped, the rest are scored against the question text and the top
/// `kb_top_k` are returned in descending score order.
pub fn select_from_kb(
    question: &Question,
    kb: &TupleKB,
    params: &SelectionParams,
) -> Vec<ScoredTuple> {
    let qa = question.qa_tokens();
    let mut overlap: BTreeMap<usize, usize> = BTreeMap::new();
    for x in &qa {
        for &pos in kb.postings(x) {
            *overlap.entry(pos).or_default() += 1;
        }
    }
    let tuples = kb.tuples();
    let mut pool: Vec<(usize, usize)> = overlap.into_iter().collect();
    pool.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then_with(|| tuples[a.0].id.cmp(&tuples[b.0].id))
    });
    pool.truncate(params.pool);

    let choices = question.choice_tokens();
    let mut scored: Vec<ScoredTuple> = pool
        .into_iter()
        .map(|(pos, _)| &tuples[pos])
        .filter(|t| !t.all_tokens().is_disjoint(&choices))
        .map(|t| ScoredTuple {
            score: tfidf_score(t, question.question_tokens(), kb, params.normalization),
            tuple: t.clone(),
        })
        .collect();
    scored.sort_by(|a, b| by_score_desc(a, b).then_with(|| a.tuple.id.cmp(&b.tuple.id)));
    scored.truncate(params.kb_top_k);
    scored
}

/// A retrieved sentence and the tuples an external extractor produced for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceTuples {
    #[serde(default)]
    pub id: Option<String>,
    pub sentence: String,
    #[serde(default)]
    pub tuples: Vec<Vec<String>>,
}

/// Why a sentence is not used for on-the-fly tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SentenceFilter {
    TooLong,
    Negation,
    CoversNoChoice,
    CoversAllChoices,
}

/// Returns the first filter the sentence trips, if any.
pub fn sentence_filter(
    sentence: &str,
    question: &Question,
    max_chars: usize,
) -> Option<SentenceFilter> {
    if sentence.chars().count() > max_chars {
        return Some(SentenceFilter::TooLong);
    }
    if text::words(sentence)
        .iter()
        .any(|w| text::is_negation(&w.lower))
    {
        return Some(SentenceFilter::Negation);
    }
    let tokens = text::token_set(sentence);
    let covered = question
        .choices
        .iter()
        .filter(|c| !c.tokens.is_disjoint(&tokens))
        .count();
    if covered == 0 {
        Some(SentenceFilter::CoversNoChoice)
    } else if covered == question.choices.len() {
        Some(SentenceFilter::CoversAllChoices)
    } else {
        None
    }
}

/// Selects `T'_qa`: tuples from sentences that pass the length, negation and
/// choice-coverage filters, ranked by Jaccard overlap with `tok(qa)`.
pub fn select_on_the_fly(
    sentences: &[SentenceTuples],
    question: &Question,
    params: &SelectionParams,
) -> Vec<ScoredTuple> {
    let qa = question.qa_tokens();
    let mut scored = Vec::new();
    for (i, s) in sentences.iter().enumerate() {
        if sentence_filter(&s.sentence, question, params.max_sentence_chars).is_some() {
            continue;
        }
        let sid = s.id.clone().unwrap_or_else(|| format!("s{i}"));
        for (j, fields) in s.tuples.iter().enumerate() {
            let [subject, predicate, objects @ ..] = fields.as_slice() else {
                log::debug!("sentence {sid}: tuple {j} has fewer than two fields");
                continue;
            };
            match Tuple::new(
                format!("{sid}#{j}"),
                subject,
                predicate,
                objects.to_vec(),
                s.sentence.clone(),
            ) {
                Ok(t) => scored.push(ScoredTuple {
                    score: jaccard(t.all_tokens(), &qa),
                    tuple: t,
                }),
                Err(e) => log::debug!("sentence {sid}: {e}"),
            }
        }
    }
    // Stable sort keeps sentence order among equal scores.
    scored.sort_by(by_score_desc);
    scored.truncate(params.extra_top_k);
    scored
}
