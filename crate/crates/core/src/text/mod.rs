//! Text normalization: tokenization, stemming, stopword filtering and
//! question chunking.
//!
//! Everything here is a pure function of the bundled stopword and stem
//! exception lists, so token sets computed at index time and at query time
//! always agree.

mod stemmer;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;
use std::sync::LazyLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use stemmer::{stem, stem_fixpoint};

const STOPWORDS: &str = include_str!("../../data/stopwords.txt");
const STEM_EXCEPTIONS: &str = include_str!("../../data/stem_exceptions.txt");

static DEFAULT: LazyLock<Normalizer> =
    LazyLock::new(|| Normalizer::from_lists(STOPWORDS, STEM_EXCEPTIONS));

/// Characters that end a qterm chunk when they sit between two words.
const CHUNK_BREAKS: &[char] = &[',', ';', ':', '.', '?', '!', '(', ')', '[', ']', '"'];

/// Stemmed, stopword-filtered tokens with their 1-based word positions in the
/// source text.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenList {
    pub stems: Vec<String>,
    pub positions: Vec<usize>,
}

impl TokenList {
    pub fn len(&self) -> usize {
        self.stems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stems.is_empty()
    }

    pub fn to_set(&self) -> BTreeSet<String> {
        self.stems.iter().cloned().collect()
    }

    /// Stems joined with single spaces.
    pub fn joined(&self) -> String {
        self.stems.join(" ")
    }
}

/// A chunked question term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTerm {
    /// Surface text of the chunk, words joined by single spaces.
    pub text: String,
    pub stems: TokenList,
    /// 1-based chunk index in reading order.
    pub position: usize,
    /// Number of qterms in the question; the denominator of the location boost.
    pub qterm_count: usize,
}

impl QTerm {
    pub fn stem_set(&self) -> BTreeSet<String> {
        self.stems.to_set()
    }

    /// `position / qterm_count`, in (0, 1].
    pub fn location_boost(&self) -> f64 {
        self.position as f64 / self.qterm_count as f64
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChunkMode {
    /// Maximal runs of content words, split at stopwords and clause punctuation.
    #[default]
    Span,
    /// Every content word is its own qterm.
    Unigram,
}

/// A raw word as it appears in the text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word<'a> {
    pub surface: &'a str,
    /// Lowercased, with typographic apostrophes folded to `'`.
    pub lower: String,
    /// Whether clause punctuation separates this word from the previous one.
    pub break_before: bool,
}

/// Splits text into words: maximal runs of alphanumerics and inner apostrophes.
pub fn words(text: &str) -> Vec<Word<'_>> {
    let is_word_char = |c: char| c.is_alphanumeric() || c == '\'' || c == '\u{2019}';
    let mut out = Vec::new();
    let mut gap_break = false;
    let mut start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if is_word_char(c) {
            start.get_or_insert(i);
            continue;
        }
        if let Some(s) = start.take() {
            push_word(&text[s..i], &mut gap_break, &mut out);
        }
        if CHUNK_BREAKS.contains(&c) {
            gap_break = true;
        }
    }
    if let Some(s) = start {
        push_word(&text[s..], &mut gap_break, &mut out);
    }
    out
}

fn push_word<'a>(raw: &'a str, gap_break: &mut bool, out: &mut Vec<Word<'a>>) {
    let surface = raw.trim_matches(|c| c == '\'' || c == '\u{2019}');
    if surface.is_empty() {
        return;
    }
    out.push(Word {
        surface,
        lower: surface.to_lowercase().replace('\u{2019}', "'"),
        break_before: !out.is_empty() && *gap_break,
    });
    *gap_break = false;
}

/// True when the word is a negation marker: `not`, `except`, or a `n't` /
/// `'nt` contraction.
pub fn is_negation(word: &str) -> bool {
    let w = word.to_lowercase().replace('\u{2019}', "'");
    w == "not" || w == "except" || w.ends_with("n't") || w.ends_with("'nt")
}

/// Stopword list plus stem exception table.
#[derive(Debug, Clone)]
pub struct Normalizer {
    stopwords: HashSet<String>,
    exceptions: HashMap<String, String>,
}

impl Default for Normalizer {
    fn default() -> Self {
        DEFAULT.clone()
    }
}

impl Normalizer {
    /// Builds a normalizer from the contents of a stopword file (one word per
    /// line) and a stem exception file (`word stem` per line). `#` starts a
    /// comment line in both.
    pub fn from_lists(stopwords: &str, exceptions: &str) -> Self {
        let stopwords = data_lines(stopwords).map(str::to_lowercase).collect();
        let mut table = HashMap::new();
        for line in data_lines(exceptions) {
            let mut parts = line.split_whitespace();
            if let (Some(word), Some(stem)) = (parts.next(), parts.next()) {
                table.insert(word.to_lowercase(), stem.to_lowercase());
            }
        }
        // Exception targets are stems themselves, so re-tokenizing is stable.
        let targets: Vec<String> = table.values().cloned().collect();
        for t in targets {
            table.insert(t.clone(), t);
        }
        Normalizer {
            stopwords,
            exceptions: table,
        }
    }

    pub fn from_files(stopwords: &Path, exceptions: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(stopwords).map_err(|e| Error::io(stopwords, e))?;
        let x = std::fs::read_to_string(exceptions).map_err(|e| Error::io(exceptions, e))?;
        Ok(Self::from_lists(&s, &x))
    }

    pub fn is_stopword(&self, word: &str) -> bool {
        self.stopwords.contains(word)
    }

    /// Normalizes one lowercase word; `None` for stopwords and punctuation.
    pub fn normalize_word(&self, lower: &str) -> Option<String> {
        let word = lower.strip_suffix("'s").unwrap_or(lower);
        if self.stopwords.contains(word) {
            return None;
        }
        let cleaned: String = word.chars().filter(|&c| c != '\'').collect();
        if cleaned.is_empty() || self.stopwords.contains(&cleaned) {
            return None;
        }
        if let Some(stem) = self.exceptions.get(&cleaned) {
            return Some(stem.clone());
        }
        let stem = stem_fixpoint(&cleaned);
        if self.stopwords.contains(&stem) {
            return None;
        }
        Some(stem)
    }

    pub fn tokenize(&self, text: &str) -> TokenList {
        let mut list = TokenList::default();
        for (i, w) in words(text).iter().enumerate() {
            if let Some(stem) = self.normalize_word(&w.lower) {
                list.stems.push(stem);
                list.positions.push(i + 1);
            }
        }
        list
    }

    pub fn token_set(&self, text: &str) -> BTreeSet<String> {
        self.tokenize(text).stems.into_iter().collect()
    }

    pub fn chunk_qterms(&self, question: &str, mode: ChunkMode) -> Result<Vec<QTerm>> {
        let mut chunks: Vec<(Vec<&str>, TokenList)> = Vec::new();
        let mut open = false;
        for (i, w) in words(question).iter().enumerate() {
            let stem = self.normalize_word(&w.lower);
            if w.break_before || stem.is_none() || mode == ChunkMode::Unigram {
                open = false;
            }
            let Some(stem) = stem else { continue };
            if !open {
                chunks.push((Vec::new(), TokenList::default()));
                open = true;
            }
            let (surface, tokens) = chunks.last_mut().expect("chunk opened above");
            surface.push(w.surface);
            tokens.stems.push(stem);
            tokens.positions.push(i + 1);
        }
        if chunks.is_empty() {
            return Err(Error::EmptyQuestion);
        }
        let count = chunks.len();
        Ok(chunks
            .into_iter()
            .enumerate()
            .map(|(i, (surface, stems))| QTerm {
                text: surface.join(" "),
                stems,
                position: i + 1,
                qterm_count: count,
            })
            .collect())
    }
}

fn data_lines(contents: &str) -> impl Iterator<Item = &str> {
    contents
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

/// Lowercase stems of `text` with stopwords removed, using the bundled lists.
pub fn tokenize(text: &str) -> TokenList {
    DEFAULT.tokenize(text)
}

/// Distinct stems of `text`: `tok(text)`.
pub fn token_set(text: &str) -> BTreeSet<String> {
    DEFAULT.token_set(text)
}

/// Splits a question into qterms using the bundled lists.
pub fn chunk_qterms(question: &str, mode: ChunkMode) -> Result<Vec<QTerm>> {
    DEFAULT.chunk_qterms(question, mode)
}

/// Normalizes a single word with the bundled lists.
pub fn normalize_word(word: &str) -> Option<String> {
    DEFAULT.normalize_word(&word.to_lowercase())
}
