//! `tupleqa`: build tuple KBs, answer multiple-choice questions, evaluate
//! solvers and compare their reports.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use tupleqa_core::kb::{load_tables, CuratedTable, SentenceTuples};
use tupleqa_core::qa::{answer_with_tuples, load_questions, load_sentences, select_tuples};
use tupleqa_core::{
    build_model, compare, evaluate, ir_score, AnswerOutcome, ChoiceScore, EvaluationReport,
    Evidence, Question, SentenceIndex, Settings, TupleKB,
};

#[derive(Parser)]
#[command(
    name = "tupleqa",
    version,
    about = "Multiple-choice QA over a tuple knowledge base"
)]
struct Cli {
    /// Log level filter, e.g. `info` or `debug`. Overrides RUST_LOG.
    #[arg(long, global = true)]
    log: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Index a tuple TSV file into DIR/kb.json.
    BuildKb {
        #[arg(long)]
        tuples: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Answer questions; one JSON line per question on stdout.
    Answer {
        #[command(flatten)]
        inputs: Inputs,
        /// Write each question's outcome with support graphs as JSONL.
        #[arg(long)]
        graphs: Option<PathBuf>,
        /// Write each question's program in LP format to DIR/<id>.lp.
        #[arg(long)]
        dump_lp: Option<PathBuf>,
    },
    /// Score a solver against the answer keys.
    Evaluate {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_enum, default_value_t = SolverKind::Tupleinf)]
        solver: SolverKind,
        /// Report path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Paired significance test between two evaluation reports.
    Compare {
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        reports: Vec<PathBuf>,
    },
}

#[derive(clap::Args)]
struct Inputs {
    /// KB directory from `build-kb`, or a tuple TSV file.
    #[arg(long)]
    kb: PathBuf,
    #[arg(long)]
    questions: PathBuf,
    /// Retrieved sentences with extracted tuples (JSONL).
    #[arg(long)]
    sentences: Option<PathBuf>,
    /// Curated tables (JSON).
    #[arg(long)]
    tables: Option<PathBuf>,
    /// TOML configuration.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverKind {
    Tupleinf,
    Ir,
}

struct Loaded {
    settings: Settings,
    kb: TupleKB,
    questions: Vec<Question>,
    sentences: Vec<SentenceTuples>,
    tables: Vec<CuratedTable>,
}

impl Loaded {
    fn from(inputs: &Inputs) -> Result<Self> {
        let settings = Settings::from_file(inputs.config.as_deref())
            .with_context(|| "loading configuration")?;
        let kb = TupleKB::open(&inputs.kb)
            .with_context(|| format!("opening KB {}", inputs.kb.display()))?;
        let questions = load_questions(&inputs.questions, settings.chunking)?;
        let sentences = match &inputs.sentences {
            Some(p) => load_sentences(p)?,
            None => Vec::new(),
        };
        let tables = match &inputs.tables {
            Some(p) => load_tables(p)?,
            None => Vec::new(),
        };
        log::info!(
            "{} tuples, {} questions, {} sentences, {} tables",
            kb.len(),
            questions.len(),
            sentences.len(),
            tables.len()
        );
        Ok(Loaded {
            settings,
            kb,
            questions,
            sentences,
            tables,
        })
    }

    fn evidence(&self) -> Evidence<'_> {
        Evidence {
            sentences: &self.sentences,
            tables: &self.tables,
        }
    }

    fn answer(&self, q: &Question, dump_lp: Option<&Path>) -> Result<AnswerOutcome> {
        let tuples = select_tuples(q, &self.kb, self.evidence(), &self.settings);
        if let Some(dir) = dump_lp {
            let model = build_model(q, &tuples, &self.settings.weights)?;
            let path = dir.join(format!("{}.lp", file_safe(&q.id)));
            fs::write(&path, model.program.to_lp_format())
                .with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(answer_with_tuples(q, &tuples, &self.settings)?)
    }
}

fn file_safe(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

#[derive(Serialize)]
struct AnswerLine<'a> {
    id: &'a str,
    answer: Option<&'a str>,
    answer_index: Option<usize>,
    scores: Vec<ChoiceScore>,
    abstain: bool,
    tuples: usize,
}

fn run_answer(inputs: &Inputs, graphs: Option<&Path>, dump_lp: Option<&Path>) -> Result<()> {
    let loaded = Loaded::from(inputs)?;
    if let Some(dir) = dump_lp {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let mut graph_out = match graphs {
        Some(p) => Some(BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => None,
    };
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    for q in &loaded.questions {
        let outcome = loaded
            .answer(q, dump_lp)
            .with_context(|| format!("question {}", q.id))?;
        let best = outcome.best();
        let line = AnswerLine {
            id: &q.id,
            answer: best.map(|i| q.choices[i].text.as_str()),
            answer_index: best,
            scores: outcome.scores(),
            abstain: outcome.abstain,
            tuples: outcome.tuples_used,
        };
        writeln!(out, "{}", serde_json::to_string(&line)?)?;
        if let Some(g) = graph_out.as_mut() {
            writeln!(g, "{}", serde_json::to_string(&outcome)?)?;
        }
    }
    if let Some(mut g) = graph_out {
        g.flush()?;
    }
    out.flush()?;
    Ok(())
}

fn run_evaluate(inputs: &Inputs, solver: SolverKind, out: Option<&Path>) -> Result<()> {
    let loaded = Loaded::from(inputs)?;
    let mode = loaded.settings.tie_credit;
    let report = match solver {
        SolverKind::Tupleinf => evaluate(
            "tupleinf",
            &loaded.questions,
            |q| {
                let outcome = loaded
                    .answer(q, None)
                    .map_err(|e| tupleqa_core::Error::Data(format!("question {}: {e:#}", q.id)))?;
                Ok(outcome
                    .scores()
                    .into_iter()
                    .map(ChoiceScore::value)
                    .collect())
            },
            mode,
        )?,
        SolverKind::Ir => {
            if loaded.sentences.is_empty() {
                bail!("the ir solver needs --sentences");
            }
            let index = SentenceIndex::new(loaded.sentences.iter().map(|s| s.sentence.clone()));
            evaluate(
                "ir",
                &loaded.questions,
                |q| {
                    Ok((0..q.choices.len())
                        .map(|i| Some(ir_score(q, i, &index)))
                        .collect())
                },
                mode,
            )?
        }
    };
    eprintln!(
        "{}: accuracy {:.4} on {} questions",
        report.solver, report.accuracy, report.n
    );
    match out {
        Some(p) => report.save(p)?,
        None => io::stdout().write_all(report.to_json().as_bytes())?,
    }
    Ok(())
}

fn run_compare(reports: &[PathBuf]) -> Result<()> {
    let a = EvaluationReport::load(&reports[0])?;
    let b = EvaluationReport::load(&reports[1])?;
    let c = compare(&a, &b)?;
    println!("{}", serde_json::to_string_pretty(&c)?);
    Ok(())
}

/// Joins the error chain, skipping causes already quoted by their parent.
fn error_chain(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !out.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::BuildKb { tuples, out } => {
            let (kb, report) = TupleKB::load_tsv(&tuples)
                .with_context(|| format!("reading {}", tuples.display()))?;
            kb.save(&out)?;
            eprintln!(
                "{} tuples indexed, {} lines skipped, written to {}",
                report.loaded,
                report.skipped,
                out.join("kb.json").display()
            );
            Ok(())
        }
        Command::Answer {
            inputs,
            graphs,
            dump_lp,
        } => run_answer(&inputs, graphs.as_deref(), dump_lp.as_deref()),
        Command::Evaluate {
            inputs,
            solver,
            out,
        } => run_evaluate(&inputs, solver, out.as_deref()),
        Command::Compare { reports } => run_compare(&reports),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let mut logger =
        env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"));
    if let Some(level) = &cli.log {
        logger.parse_filters(level);
    }
    logger.init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", error_chain(&e));
            ExitCode::FAILURE
        }
    }
}
