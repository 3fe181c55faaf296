//! Question answering over open-vocabulary `(subject; predicate; objects)`
//! tuples: per-question tuple selection, a support-graph 0-1 program scored
//! per answer choice, and an exact branch-and-bound solver.

pub mod config;
pub mod error;
pub mod eval;
pub mod graph;
pub mod ilp;
pub mod kb;
pub mod qa;
pub mod text;

pub use config::{Config, Settings};
pub use error::{Error, Result};
pub use eval::{
    binomial_exact_test, compare, evaluate, ir_score, Comparison, EvaluationReport, SentenceIndex,
    TieCredit,
};
pub use graph::{
    build_model, extract_support_graph, GraphWeights, Question, SupportGraph, SupportModel,
};
pub use ilp::{brute_force, solve, solve_with, BinaryProgram, BoundMode, Solution, SolverOptions};
pub use kb::{FieldRole, ScoredTuple, Tuple, TupleKB};
pub use qa::{answer_question, AnswerOutcome, ChoiceScore, Evidence, RankedAnswer};
