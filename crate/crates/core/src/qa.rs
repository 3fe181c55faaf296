//! Per-question pipeline: select tuples, build the model once, score every
//! choice by forcing it active, rank.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::Settings;
use crate::error::{Error, Result};
use crate::graph::{build_model, extract_support_graph, Question, SupportGraph, SupportModel};
use crate::ilp::{solve_with, SolverOptions};
use crate::kb::{
    select_from_kb, select_on_the_fly, tables_to_tuples, CuratedTable, SentenceTuples, Tuple,
    TupleKB,
};
use crate::text::ChunkMode;

/// Tolerance under which two choice scores count as tied.
pub const SCORE_TIE_TOL: f64 = 1e-9;

/// One line of a question file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub id: String,
    pub question: String,
    pub choices: Vec<String>,
    #[serde(rename = "answerKey", default, skip_serializing_if = "Option::is_none")]
    pub answer_key: Option<String>,
}

impl QuestionRecord {
    /// Resolves the answer key, given as a letter (`A`), a 1-based number
    /// (`1`) or the choice text itself.
    pub fn key_index(&self) -> Result<Option<usize>> {
        let Some(key) = self.answer_key.as_deref().map(str::trim) else {
            return Ok(None);
        };
        let n = self.choices.len();
        let mut chars = key.chars();
        let index = match (chars.next(), chars.next()) {
            (Some(c), None) if c.is_ascii_uppercase() => Some((c as u8 - b'A') as usize),
            _ => None,
        }
        .filter(|&i| i < n)
        .or_else(|| {
            key.parse::<usize>()
                .ok()
                .filter(|&k| (1..=n).contains(&k))
                .map(|k| k - 1)
        })
        .or_else(|| self.choices.iter().position(|c| c.trim() == key));
        match index {
            Some(i) => Ok(Some(i)),
            None => Err(Error::Data(format!(
                "question {}: answer key {key:?} matches no choice",
                self.id
            ))),
        }
    }

    pub fn to_question(&self, mode: ChunkMode) -> Result<Question> {
        Question::new(
            &self.id,
            &self.question,
            &self.choices,
            self.key_index()?,
            mode,
        )
    }
}

/// Parses a JSON-lines file, one value per nonblank line.
pub(crate) fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in contents.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Reads questions from JSON lines. Ids must be unique.
pub fn load_questions(path: &Path, mode: ChunkMode) -> Result<Vec<Question>> {
    let records: Vec<QuestionRecord> = read_jsonl(path)?;
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(records.len());
    for r in &records {
        if !seen.insert(r.id.as_str()) {
            return Err(Error::Data(format!("duplicate question id {}", r.id)));
        }
        let q = r.to_question(mode).map_err(|e| match e {
            Error::EmptyQuestion => Error::Data(format!("question {}: empty question", r.id)),
            other => other,
        })?;
        out.push(q);
    }
    Ok(out)
}

/// Sentence file for on-the-fly tuples.
pub fn load_sentences(path: &Path) -> Result<Vec<SentenceTuples>> {
    read_jsonl(path)
}

/// A choice's optimal objective, or no feasible support graph.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChoiceScore {
    Score(f64),
    NoSupport,
}

impl ChoiceScore {
    pub fn value(self) -> Option<f64> {
        match self {
            ChoiceScore::Score(s) => Some(s),
            ChoiceScore::NoSupport => None,
        }
    }

    /// Descending order with no-support last.
    pub fn cmp_desc(self, other: Self) -> std::cmp::Ordering {
        match (self, other) {
            (ChoiceScore::Score(a), ChoiceScore::Score(b)) => b.total_cmp(&a),
            (ChoiceScore::Score(_), ChoiceScore::NoSupport) => std::cmp::Ordering::Less,
            (ChoiceScore::NoSupport, ChoiceScore::Score(_)) => std::cmp::Ordering::Greater,
            (ChoiceScore::NoSupport, ChoiceScore::NoSupport) => std::cmp::Ordering::Equal,
        }
    }
}

impl Serialize for ChoiceScore {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ChoiceScore::Score(v) => s.serialize_f64(*v),
            ChoiceScore::NoSupport => s.serialize_str("no-support"),
        }
    }
}

impl<'de> Deserialize<'de> for ChoiceScore {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(ChoiceScore::Score(v)),
            Raw::Tag(t) if t == "no-support" => Ok(ChoiceScore::NoSupport),
            Raw::Tag(t) => Err(serde::de::Error::custom(format!("unknown score {t:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedAnswer {
    pub choice_index: usize,
    pub choice: String,
    pub score: ChoiceScore,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<SupportGraph>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnswerOutcome {
    pub question_id: String,
    /// Best first; ties by lowest choice index.
    pub ranking: Vec<RankedAnswer>,
    /// Every choice lacks support.
    pub abstain: bool,
    /// Tuples the model was built from after deduplication.
    pub tuples_used: usize,
}

impl AnswerOutcome {
    /// Top-ranked choice, unless abstaining.
    pub fn best(&self) -> Option<usize> {
        if self.abstain {
            None
        } else {
            self.ranking.first().map(|r| r.choice_index)
        }
    }

    /// Per-choice scores in choice order.
    pub fn scores(&self) -> Vec<ChoiceScore> {
        let mut out = vec![ChoiceScore::NoSupport; self.ranking.len()];
        for r in &self.ranking {
            out[r.choice_index] = r.score;
        }
        out
    }
}

/// Ranks choices by score, no-support last, ties by index.
pub fn rank(scores: &[ChoiceScore]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].cmp_desc(scores[b]).then(a.cmp(&b)));
    order
}

/// Extra evidence beyond the KB.
#[derive(Debug, Clone, Copy, Default)]
pub struct Evidence<'a> {
    pub sentences: &'a [SentenceTuples],
    pub tables: &'a [CuratedTable],
}

/// `T_qa`, then `T'_qa`, then table tuples, keeping the first of any tuples
/// with identical field strings.
pub fn select_tuples(
    question: &Question,
    kb: &TupleKB,
    evidence: Evidence<'_>,
    settings: &Settings,
) -> Vec<Tuple> {
    let params = &settings.selection;
    let mut selected = select_from_kb(question, kb, params);
    if !evidence.sentences.is_empty() {
        selected.extend(select_on_the_fly(evidence.sentences, question, params));
    }
    if !evidence.tables.is_empty() {
        selected.extend(tables_to_tuples(evidence.tables, question, params));
    }
    let mut seen = HashSet::new();
    selected
        .into_iter()
        .filter(|s| {
            let (subj, pred, objs) = s.tuple.field_key();
            seen.insert((subj.to_string(), pred.to_string(), objs.to_vec()))
        })
        .map(|s| s.tuple)
        .collect()
}

/// Forces choice `choice_index` active in a built model and solves.
pub fn score_model_choice(
    model: &SupportModel,
    choice_index: usize,
    options: &SolverOptions,
) -> Result<(ChoiceScore, Option<SupportGraph>)> {
    let var = model
        .choice_var(choice_index)
        .ok_or(Error::ChoiceOutOfRange {
            index: choice_index,
            len: model.choice_vars.len(),
        })?;
    if model.is_degenerate() {
        return Ok((ChoiceScore::NoSupport, None));
    }
    let mut program = model.program.clone();
    program.force(var, true);
    let solution = solve_with(&program, options)?;
    match solution.objective {
        Some(objective) => {
            let graph = extract_support_graph(model, &solution.assignment)?;
            Ok((ChoiceScore::Score(objective), Some(graph)))
        }
        None => Ok((ChoiceScore::NoSupport, None)),
    }
}

/// Builds the model for `tuples` and scores one choice.
pub fn score_choice(
    question: &Question,
    choice_index: usize,
    tuples: &[Tuple],
    settings: &Settings,
) -> Result<(ChoiceScore, Option<SupportGraph>)> {
    if choice_index >= question.choices.len() {
        return Err(Error::ChoiceOutOfRange {
            index: choice_index,
            len: question.choices.len(),
        });
    }
    let model = build_model(question, tuples, &settings.weights)?;
    score_model_choice(&model, choice_index, &settings.solver)
}

/// Scores every choice against one model built from `tuples`.
pub fn answer_with_tuples(
    question: &Question,
    tuples: &[Tuple],
    settings: &Settings,
) -> Result<AnswerOutcome> {
    let model = build_model(question, tuples, &settings.weights)?;
    let mut scored = Vec::with_capacity(question.choices.len());
    for i in 0..question.choices.len() {
        scored.push(score_model_choice(&model, i, &settings.solver)?);
    }
    let scores: Vec<ChoiceScore> = scored.iter().map(|s| s.0).collect();
    let abstain = scores.iter().all(|s| *s == ChoiceScore::NoSupport);
    let mut graphs: Vec<Option<SupportGraph>> = scored.into_iter().map(|s| s.1).collect();
    let ranking = rank(&scores)
        .into_iter()
        .map(|i| RankedAnswer {
            choice_index: i,
            choice: question.choices[i].text.clone(),
            score: scores[i],
            support: graphs[i].take(),
        })
        .collect();
    Ok(AnswerOutcome {
        question_id: question.id.clone(),
        ranking,
        abstain,
        tuples_used: tuples.len(),
    })
}

/// Full pipeline for one question.
pub fn answer_question(
    question: &Question,
    kb: &TupleKB,
    evidence: Evidence<'_>,
    settings: &Settings,
) -> Result<AnswerOutcome> {
    let tuples = select_tuples(question, kb, evidence, settings);
    log::debug!("question {}: {} tuples selected", question.id, tuples.len());
    answer_with_tuples(question, &tuples, settings)
}
