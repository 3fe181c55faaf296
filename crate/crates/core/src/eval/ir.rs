//! Sentence-retrieval baseline: a choice scores as well as the best
//! corpus sentence matching the question plus that choice.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::Question;
use crate::kb::{tfidf, DocFreq, TfIdfNormalization};
use crate::text;

/// Sentences considered per query, by raw overlap, before scoring.
pub const IR_HITS: usize = 200;

/// Tokenized sentences with an inverted index.
#[derive(Debug, Clone, Default)]
pub struct SentenceIndex {
    sentences: Vec<String>,
    tokens: Vec<BTreeSet<String>>,
    index: BTreeMap<String, Vec<usize>>,
    doc_freq: DocFreq,
}

impl SentenceIndex {
    pub fn new<S: Into<String>>(sentences: impl IntoIterator<Item = S>) -> Self {
        let sentences: Vec<String> = sentences.into_iter().map(Into::into).collect();
        let tokens: Vec<BTreeSet<String>> = sentences.iter().map(|s| text::token_set(s)).collect();
        let mut index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (i, toks) in tokens.iter().enumerate() {
            for t in toks {
                index.entry(t.clone()).or_default().push(i);
            }
        }
        let doc_freq = DocFreq::from_docs(tokens.iter());
        SentenceIndex {
            sentences,
            tokens,
            index,
            doc_freq,
        }
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn sentence(&self, i: usize) -> &str {
        &self.sentences[i]
    }

    pub fn tokens(&self, i: usize) -> &BTreeSet<String> {
        &self.tokens[i]
    }

    pub fn doc_freq(&self) -> &DocFreq {
        &self.doc_freq
    }

    pub fn postings(&self, stem: &str) -> &[usize] {
        self.index.get(stem).map_or(&[], Vec::as_slice)
    }
}

/// Best normalized TF-IDF between `tok(q) | tok(a)` and any of the top
/// [`IR_HITS`] sentences sharing a stem with the choice; 0 without one.
pub fn ir_score(question: &Question, choice_index: usize, index: &SentenceIndex) -> f64 {
    let choice = &question.choices[choice_index].tokens;
    let mut query = question.question_tokens().clone();
    query.extend(choice.iter().cloned());

    let candidates: BTreeSet<usize> = choice
        .iter()
        .flat_map(|s| index.postings(s).iter().copied())
        .collect();
    let mut hits: Vec<(usize, usize)> = candidates
        .into_iter()
        .map(|i| (i, index.tokens(i).intersection(&query).count()))
        .collect();
    hits.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    hits.truncate(IR_HITS);
    hits.iter()
        .map(|&(i, _)| {
            tfidf(
                index.tokens(i),
                &query,
                index.doc_freq(),
                TfIdfNormalization::Sum,
            )
        })
        .fold(0.0, f64::max)
}

/// IR scores for every choice.
pub fn ir_scores(question: &Question, index: &SentenceIndex) -> Vec<f64> {
    (0..question.choices.len())
        .map(|i| ir_score(question, i, index))
        .collect()
}
