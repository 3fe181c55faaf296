//! Curated table rows converted into tuples.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::select::{jaccard, tfidf, SelectionParams};
use super::{DocFreq, ScoredTuple, Tuple};
use crate::error::{Error, Result};
use crate::graph::Question;
use crate::text;

/// Columns `subject` and `object` are linked by `predicate`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationPair {
    pub subject: usize,
    pub object: usize,
    pub predicate: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CuratedTable {
    pub id: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    #[serde(default)]
    pub relation_pairs: Vec<RelationPair>,
}

impl CuratedTable {
    pub fn validate(&self) -> Result<()> {
        let width = self.header.len();
        if let Some(i) = self.rows.iter().position(|r| r.len() != width) {
            return Err(Error::Data(format!(
                "table {}: row {i} has {} cells, header has {width}",
                self.id,
                self.rows[i].len()
            )));
        }
        for p in &self.relation_pairs {
            if p.subject >= width || p.object >= width || p.subject == p.object {
                return Err(Error::Data(format!(
                    "table {}: invalid relation pair ({}, {})",
                    self.id, p.subject, p.object
                )));
            }
        }
        Ok(())
    }

    /// Header and cell stems.
    fn token_bag(&self) -> BTreeSet<String> {
        self.header
            .iter()
            .chain(self.rows.iter().flatten())
            .flat_map(|c| text::token_set(c))
            .collect()
    }
}

/// Reads a JSON array of tables.
pub fn load_tables(path: &Path) -> Result<Vec<CuratedTable>> {
    let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let tables: Vec<CuratedTable> = serde_json::from_str(&contents).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })?;
    for t in &tables {
        t.validate()?;
    }
    Ok(tables)
}

/// Converts the best matching table rows into tuples.
///
/// Tables are ranked by TF-IDF of their token bag against `tok(qa)` and the
/// best `max_tables` kept; within each, the `max_rows` rows with the highest
/// Jaccard overlap with `tok(qa)`. Every relation pair of a kept row yields
/// `(subject cell; predicate; object cell; other cells...)`. The result is
/// the top `extra_top_k` tuples by Jaccard score.
pub fn tables_to_tuples(
    tables: &[CuratedTable],
    question: &Question,
    params: &SelectionParams,
) -> Vec<ScoredTuple> {
    let qa = question.qa_tokens();
    let usable: Vec<&CuratedTable> = tables
        .iter()
        .filter(|t| !t.relation_pairs.is_empty())
        .collect();
    let bags: Vec<BTreeSet<String>> = usable.iter().map(|t| t.token_bag()).collect();
    let df = DocFreq::from_docs(bags.iter());
    let mut ranked: Vec<(usize, f64)> = bags
        .iter()
        .enumerate()
        .map(|(i, bag)| (i, tfidf(bag, &qa, &df, params.normalization)))
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    ranked.truncate(params.max_tables);

    let mut scored = Vec::new();
    for (ti, _) in ranked {
        let table = usable[ti];
        let mut rows: Vec<(usize, f64)> = table
            .rows
            .iter()
            .enumerate()
            .map(|(ri, row)| {
                let tokens = row.iter().flat_map(|c| text::token_set(c)).collect();
                (ri, jaccard(&tokens, &qa))
            })
            .collect();
        rows.sort_by(|a, b| b.1.total_cmp(&a.1));
        rows.truncate(params.max_rows);
        for (ri, _) in rows {
            let row = &table.rows[ri];
            for (pi, pair) in table.relation_pairs.iter().enumerate() {
                let mut objects = vec![row[pair.object].clone()];
                objects.extend(
                    row.iter()
                        .enumerate()
                        .filter(|(c, _)| *c != pair.subject && *c != pair.object)
                        .map(|(_, cell)| cell.clone()),
                );
                let id = format!("{}:r{ri}:p{pi}", table.id);
                match Tuple::new(id, &row[pair.subject], &pair.predicate, objects, &table.id) {
                    // The primary object must survive empty-cell filtering.
                    Ok(t) if !row[pair.object].trim().is_empty() => {
                        let t = t.with_table_origin();
                        scored.push(ScoredTuple {
                            score: jaccard(t.all_tokens(), &qa),
                            tuple: t,
                        });
                    }
                    Ok(_) => {}
                    Err(e) => log::debug!("{e}"),
                }
            }
        }
    }
    scored.sort_by(|a, b| b.score.total_cmp(&a.score));
    scored.truncate(params.extra_top_k);
    scored
}
