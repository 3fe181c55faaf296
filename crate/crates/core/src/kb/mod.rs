//! Tuple knowledge base: ingestion, the inverted index, and tuple selection.

mod select;
mod tables;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{self, TokenList};

pub use select::{
    jaccard, select_from_kb, select_on_the_fly, sentence_filter, tfidf, tfidf_score,
    SelectionParams, SentenceFilter, SentenceTuples, TfIdfNormalization,
};
pub use tables::{load_tables, tables_to_tuples, CuratedTable, RelationPair};

const KB_FILE: &str = "kb.json";
const KB_FORMAT_VERSION: u32 = 1;

/// Role of a tuple field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "role", content = "index")]
pub enum FieldRole {
    Subject,
    Predicate,
    /// Zero-based object index.
    Object(usize),
}

impl std::fmt::Display for FieldRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FieldRole::Subject => f.write_str("subject"),
            FieldRole::Predicate => f.write_str("predicate"),
            FieldRole::Object(i) => write!(f, "object{i}"),
        }
    }
}

/// One `(subject; predicate; objects*)` fact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tuple {
    pub id: String,
    pub subject: String,
    pub predicate: String,
    pub objects: Vec<String>,
    /// Provenance: sentence text, table id, or file name.
    pub source: String,
    /// Built from a curated table row; the primary object must then be active
    /// alongside the subject.
    #[serde(default)]
    pub from_table: bool,
    /// Tokens per field: subject, predicate, then each object.
    field_tokens: Vec<TokenList>,
    /// `tok(t)`: union of the field token sets.
    all_tokens: BTreeSet<String>,
}

impl Tuple {
    pub fn new(
        id: impl Into<String>,
        subject: &str,
        predicate: &str,
        objects: Vec<String>,
        source: impl Into<String>,
    ) -> Result<Self> {
        let id = id.into();
        let subject = subject.trim();
        let predicate = predicate.trim();
        if subject.is_empty() || predicate.is_empty() {
            return Err(Error::Data(format!(
                "tuple {id}: subject and predicate must be nonempty"
            )));
        }
        let objects: Vec<String> = objects
            .into_iter()
            .map(|o| o.trim().to_string())
            .filter(|o| !o.is_empty())
            .collect();
        let mut field_tokens = vec![text::tokenize(subject), text::tokenize(predicate)];
        field_tokens.extend(objects.iter().map(|o| text::tokenize(o)));
        let all_tokens = field_tokens
            .iter()
            .flat_map(|t| t.stems.iter().cloned())
            .collect();
        Ok(Tuple {
            id,
            subject: subject.to_string(),
            predicate: predicate.to_string(),
            objects,
            source: source.into(),
            from_table: false,
            field_tokens,
            all_tokens,
        })
    }

    pub fn with_table_origin(mut self) -> Self {
        self.from_table = true;
        self
    }

    pub fn all_tokens(&self) -> &BTreeSet<String> {
        &self.all_tokens
    }

    pub fn field_tokens(&self) -> &[TokenList] {
        &self.field_tokens
    }

    /// Fields in vertex order: subject, predicate, objects.
    pub fn fields(&self) -> impl Iterator<Item = (FieldRole, &str, &TokenList)> {
        let roles = [FieldRole::Subject, FieldRole::Predicate]
            .into_iter()
            .chain((0..self.objects.len()).map(FieldRole::Object));
        let texts = [self.subject.as_str(), self.predicate.as_str()]
            .into_iter()
            .chain(self.objects.iter().map(String::as_str));
        roles
            .zip(texts)
            .zip(self.field_tokens.iter())
            .map(|((r, t), k)| (r, t, k))
    }

    /// Identity used for deduplication: the field strings.
    pub fn field_key(&self) -> (&str, &str, &[String]) {
        (&self.subject, &self.predicate, &self.objects)
    }

    /// `(subject; predicate; obj1; obj2)`
    pub fn display(&self) -> String {
        let mut parts = vec![self.subject.as_str(), self.predicate.as_str()];
        parts.extend(self.objects.iter().map(String::as_str));
        format!("({})", parts.join("; "))
    }
}

/// Document frequencies over a collection: `N` and `n_x`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DocFreq {
    pub n_docs: usize,
    pub counts: BTreeMap<String, usize>,
}

impl DocFreq {
    pub fn from_docs<'a>(docs: impl IntoIterator<Item = &'a BTreeSet<String>>) -> Self {
        let mut df = DocFreq::default();
        for doc in docs {
            df.n_docs += 1;
            for x in doc {
                *df.counts.entry(x.clone()).or_default() += 1;
            }
        }
        df
    }

    pub fn get(&self, stem: &str) -> usize {
        self.counts.get(stem).copied().unwrap_or(0)
    }

    /// `ln(1 + N / n_x)`. A stem absent from the collection counts as `n_x = 1`.
    pub fn idf(&self, stem: &str) -> f64 {
        let n_x = self.get(stem).max(1);
        (1.0 + self.n_docs as f64 / n_x as f64).ln()
    }
}

/// Immutable tuple store with an inverted index from stem to tuple positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TupleKB {
    tuples: Vec<Tuple>,
    /// stem -> ascending positions in `tuples`.
    index: BTreeMap<String, Vec<usize>>,
    doc_freq: DocFreq,
}

/// Outcome of reading a tuple file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub loaded: usize,
    pub skipped: usize,
    pub warnings: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct KbFile {
    version: u32,
    kb: TupleKB,
}

impl TupleKB {
    /// Builds the index. Tuple ids must be unique.
    pub fn from_tuples(tuples: Vec<Tuple>) -> Result<Self> {
        let mut seen = HashSet::new();
        for t in &tuples {
            if !seen.insert(t.id.as_str()) {
                return Err(Error::Data(format!("duplicate tuple id {}", t.id)));
            }
        }
        let mut index: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for (pos, t) in tuples.iter().enumerate() {
            for x in &t.all_tokens {
                index.entry(x.clone()).or_default().push(pos);
            }
        }
        let doc_freq = DocFreq::from_docs(tuples.iter().map(|t| &t.all_tokens));
        Ok(TupleKB {
            tuples,
            index,
            doc_freq,
        })
    }

    pub fn empty() -> Self {
        TupleKB {
            tuples: Vec::new(),
            index: BTreeMap::new(),
            doc_freq: DocFreq::default(),
        }
    }

    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// `N`.
    pub fn size(&self) -> usize {
        self.doc_freq.n_docs
    }

    pub fn doc_freq(&self) -> &DocFreq {
        &self.doc_freq
    }

    pub fn postings(&self, stem: &str) -> &[usize] {
        self.index.get(stem).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Checks the index and document frequencies against the tuples.
    pub fn validate(&self) -> Result<()> {
        let rebuilt = TupleKB::from_tuples(self.tuples.clone())?;
        if rebuilt.index != self.index || rebuilt.doc_freq != self.doc_freq {
            return Err(Error::Data("index does not match stored tuples".into()));
        }
        for t in &self.tuples {
            let fresh = Tuple::new(
                t.id.clone(),
                &t.subject,
                &t.predicate,
                t.objects.clone(),
                t.source.clone(),
            )?;
            if fresh.all_tokens != t.all_tokens || fresh.field_tokens != t.field_tokens {
                return Err(Error::Data(format!("stale token sets for tuple {}", t.id)));
            }
        }
        Ok(())
    }

    /// Reads a tuple TSV file: `id<TAB>subject<TAB>predicate<TAB>object...`.
    /// Malformed lines are skipped and reported.
    pub fn load_tsv(path: &Path) -> Result<(Self, LoadReport)> {
        let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let source = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let mut report = LoadReport::default();
        let mut tuples = Vec::new();
        let mut ids = HashSet::new();
        for (lineno, line) in contents.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            let parsed = if cols.len() < 3 {
                Err(format!("expected at least 3 columns, found {}", cols.len()))
            } else if cols[0].trim().is_empty() {
                Err("empty id".to_string())
            } else if !ids.insert(cols[0].trim().to_string()) {
                Err(format!("duplicate id {}", cols[0].trim()))
            } else {
                Tuple::new(
                    cols[0].trim(),
                    cols[1],
                    cols[2],
                    cols[3..].iter().map(|s| s.to_string()).collect(),
                    source.clone(),
                )
                .map_err(|e| e.to_string())
            };
            match parsed {
                Ok(t) => tuples.push(t),
                Err(msg) => {
                    let w = format!("{}:{}: {msg}", path.display(), lineno + 1);
                    log::warn!("skipping tuple line: {w}");
                    report.warnings.push(w);
                    report.skipped += 1;
                }
            }
        }
        if tuples.is_empty() {
            return Err(Error::EmptyKb);
        }
        report.loaded = tuples.len();
        Ok((TupleKB::from_tuples(tuples)?, report))
    }

    /// Persists the KB, index included, as `DIR/kb.json`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(KB_FILE);
        let file = KbFile {
            version: KB_FORMAT_VERSION,
            kb: self.clone(),
        };
        let json = serde_json::to_string(&file).map_err(|e| Error::Data(e.to_string()))?;
        fs::write(&path, json).map_err(|e| Error::io(&path, e))
    }

    /// Opens a KB saved by [`TupleKB::save`], or reads a TSV file directly.
    pub fn open(path: &Path) -> Result<Self> {
        if path.is_file() {
            return Ok(Self::load_tsv(path)?.0);
        }
        let file = path.join(KB_FILE);
        let contents = fs::read_to_string(&file).map_err(|e| Error::io(&file, e))?;
        let parsed: KbFile = serde_json::from_str(&contents).map_err(|e| Error::Parse {
            path: file.clone(),
            line: e.line(),
            message: e.to_string(),
        })?;
        if parsed.version != KB_FORMAT_VERSION {
            return Err(Error::Data(format!(
                "unsupported KB format version {}",
                parsed.version
            )));
        }
        parsed.kb.validate()?;
        Ok(parsed.kb)
    }
}

/// `load_tuple_kb`: the TSV reader.
pub fn load_tuple_kb(path: &Path) -> Result<(TupleKB, LoadReport)> {
    TupleKB::load_tsv(path)
}

/// A tuple with its selection score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredTuple {
    pub tuple: Tuple,
    pub score: f64,
}
