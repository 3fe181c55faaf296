use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{self, ChunkMode, QTerm};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Choice {
    pub text: String,
    pub tokens: BTreeSet<String>,
}

/// A multiple-choice question: text, chunked qterms and answer choices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub text: String,
    pub qterms: Vec<QTerm>,
    pub choices: Vec<Choice>,
    pub answer_key: Option<usize>,
    question_tokens: BTreeSet<String>,
}

impl Question {
    pub fn new(
        id: impl Into<String>,
        text: &str,
        choices: &[impl AsRef<str>],
        answer_key: Option<usize>,
        mode: ChunkMode,
    ) -> Result<Self> {
        let id = id.into();
        if choices.len() < 2 {
            return Err(Error::TooFewChoices(id));
        }
        if let Some(k) = answer_key {
            if k >= choices.len() {
                return Err(Error::ChoiceOutOfRange {
                    index: k,
                    len: choices.len(),
                });
            }
        }
        let qterms = text::chunk_qterms(text, mode)?;
        let choices = choices
            .iter()
            .map(|c| Choice {
                text: c.as_ref().trim().to_string(),
                tokens: text::token_set(c.as_ref()),
            })
            .collect();
        Ok(Question {
            id,
            text: text.to_string(),
            qterms,
            choices,
            answer_key,
            question_tokens: text::token_set(text),
        })
    }

    /// `tok(q)`: stems of the question text alone.
    pub fn question_tokens(&self) -> &BTreeSet<String> {
        &self.question_tokens
    }

    /// Union of all choice token sets.
    pub fn choice_tokens(&self) -> BTreeSet<String> {
        self.choices
            .iter()
            .flat_map(|c| c.tokens.iter().cloned())
            .collect()
    }

    /// `tok(qa)`: question stems plus every choice's stems.
    pub fn qa_tokens(&self) -> BTreeSet<String> {
        let mut all = self.question_tokens.clone();
        all.extend(self.choice_tokens());
        all
    }
}
