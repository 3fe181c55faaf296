//! Accuracy evaluation, the IR baseline and paired significance testing.

mod ir;
mod stats;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Question;
use crate::qa::SCORE_TIE_TOL;

pub use ir::{ir_score, ir_scores, SentenceIndex, IR_HITS};
pub use stats::binomial_exact_test;

/// Significance level used by [`compare`].
pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// Credit for a question whose top score is shared by several choices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieCredit {
    /// `1/k` when the key is among `k` tied choices.
    #[default]
    Fractional,
    /// Full credit only for a unique correct top choice.
    Strict,
}

/// Choices sharing the top score; every choice when none has a score.
pub fn top_choices(scores: &[Option<f64>]) -> Vec<usize> {
    let best = scores
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if best == f64::NEG_INFINITY {
        return (0..scores.len()).collect();
    }
    scores
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_some_and(|s| best - s <= SCORE_TIE_TOL))
        .map(|(i, _)| i)
        .collect()
}

pub fn credit(chosen: &[usize], key: usize, mode: TieCredit) -> f64 {
    if !chosen.contains(&key) {
        return 0.0;
    }
    match mode {
        TieCredit::Fractional => 1.0 / chosen.len() as f64,
        TieCredit::Strict if chosen.len() == 1 => 1.0,
        TieCredit::Strict => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionCredit {
    pub id: String,
    pub chosen: Vec<usize>,
    pub answer_key: usize,
    pub credit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub solver: String,
    pub tie_credit: TieCredit,
    pub n: usize,
    pub accuracy: f64,
    pub per_question: Vec<QuestionCredit>,
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })
    }
}

/// Runs `solver` on every question in parallel and aggregates credit in
/// question order. `solver` returns one score per choice, `None` for a
/// choice without support.
pub fn evaluate<F>(
    name: &str,
    questions: &[Question],
    solver: F,
    mode: TieCredit,
) -> Result<EvaluationReport>
where
    F: Fn(&Question) -> Result<Vec<Option<f64>>> + Sync,
{
    let missing: Vec<String> = questions
        .iter()
        .filter(|q| q.answer_key.is_none())
        .map(|q| q.id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingAnswerKey(missing));
    }
    let per_question: Vec<QuestionCredit> = questions
        .par_iter()
        .map(|q| {
            let scores = solver(q)?;
            if scores.len() != q.choices.len() {
                return Err(Error::Data(format!(
                    "question {}: solver returned {} scores for {} choices",
                    q.id,
                    scores.len(),
                    q.choices.len()
                )));
            }
            let chosen = top_choices(&scores);
            let key = q.answer_key.expect("checked above");
            Ok(QuestionCredit {
                id: q.id.clone(),
                credit: credit(&chosen, key, mode),
                chosen,
                answer_key: key,
            })
        })
        .collect::<Result<_>>()?;
    let n = per_question.len();
    let total: f64 = per_question.iter().map(|c| c.credit).sum();
    Ok(EvaluationReport {
        solver: name.to_string(),
        tie_credit: mode,
        n,
        accuracy: if n == 0 { 0.0 } else { total / n as f64 },
        per_question,
    })
}

/// Paired comparison of two reports over their shared questions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub solver_a: String,
    pub solver_b: String,
    pub accuracy_a: f64,
    pub accuracy_b: f64,
    /// Questions present in both reports.
    pub n: usize,
    pub disagreements: usize,
    pub wins_a: usize,
    pub wins_b: usize,
    /// `None` when the reports never disagree.
    pub p_value: Option<f64>,
    pub significant: bool,
}

/// A question counts as a win for the report with strictly more credit.
pub fn compare(a: &EvaluationReport, b: &EvaluationReport) -> Result<Comparison> {
    let b_credit: BTreeMap<&str, f64> = b
        .per_question
        .iter()
        .map(|c| (c.id.as_str(), c.credit))
        .collect();
    let (mut n, mut wins_a, mut wins_b) = (0, 0, 0);
    for c in &a.per_question {
        let Some(&other) = b_credit.get(c.id.as_str()) else {
            continue;
        };
        n += 1;
        if c.credit > other {
            wins_a += 1;
        } else if other > c.credit {
            wins_b += 1;
        }
    }
    if n == 0 {
        return Err(Error::Data("reports share no questions".into()));
    }
    if n != a.n || n != b.n {
        log::warn!("comparing on {n} shared questions ({} vs {})", a.n, b.n);
    }
    let p_value = match binomial_exact_test(wins_a as u64, wins_b as u64) {
        Ok(p) => Some(p),
        Err(Error::NoDisagreements) => None,
        Err(e) => return Err(e),
    };
    Ok(Comparison {
        solver_a: a.solver.clone(),
        solver_b: b.solver.clone(),
        accuracy_a: a.accuracy,
        accuracy_b: b.accuracy,
        n,
        disagreements: wins_a + wins_b,
        wins_a,
        wins_b,
        significant: p_value.is_some_and(|p| p < SIGNIFICANCE_LEVEL),
        p_value,
    })
}
