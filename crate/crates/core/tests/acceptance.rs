//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tupleqa_core::eval::{binomial_exact_test, evaluate, EvaluationReport};
use tupleqa_core::graph::{build_model, VertexKind};
use tupleqa_core::ilp::{brute_force, solve, solve_with, BoundMode, SolveStatus, SolverOptions};
use tupleqa_core::kb::{
    load_tables, select_from_kb, select_on_the_fly, sentence_filter, SelectionParams,
    SentenceFilter, TupleKB,
};
use tupleqa_core::qa::{answer_question, load_questions, load_sentences, select_tuples, Evidence};
use tupleqa_core::text::ChunkMode;
use tupleqa_core::{Question, Settings};

use common::{check_support_rules, fixture, random_program};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Solver agrees with exhaustive enumeration on random programs.
fn solver_matches_enumeration() -> Check {
    const PROGRAMS: usize = 200;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut infeasible = 0;
    for i in 0..PROGRAMS {
        let p = random_program(&mut rng, 18, 30);
        let oracle = brute_force(&p).map_err(|e| e.to_string())?;
        for bound in [BoundMode::Lp, BoundMode::PositiveSum] {
            let s = solve_with(&p, &SolverOptions { bound }).map_err(|e| e.to_string())?;
            ensure(s.status == oracle.status, || {
                format!(
                    "program {i} ({bound:?}): status {:?} vs {:?}",
                    s.status, oracle.status
                )
            })?;
            if let (Some(a), Some(b)) = (s.objective, oracle.objective) {
                ensure((a - b).abs() <= 1e-9, || {
                    format!("program {i} ({bound:?}): objective {a} vs {b}")
                })?;
                ensure(p.is_feasible(&s.assignment), || {
                    format!("program {i} ({bound:?}): infeasible assignment")
                })?;
            }
        }
        if oracle.status == SolveStatus::Infeasible {
            infeasible += 1;
        }
    }
    let elapsed = started.elapsed();
    ensure(elapsed < Duration::from_secs(30), || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{PROGRAMS} programs ({infeasible} infeasible), both bounds, {elapsed:.2?}"
    ))
}

/// Every optimal support graph obeys the graph rules, checked on the graph
/// structure rather than through the program's own constraints.
fn optimal_graphs_obey_rules() -> Check {
    let settings = Settings::default();
    let sentences =
        load_sentences(&fixture("science/sentences.jsonl")).map_err(|e| e.to_string())?;
    let tables = load_tables(&fixture("science/tables.json")).map_err(|e| e.to_string())?;
    let mut cases: Vec<(Question, TupleKB, Evidence<'_>)> = Vec::new();
    for (dir, evidence) in [
        ("nitrogen", Evidence::default()),
        (
            "science",
            Evidence {
                sentences: &sentences,
                tables: &tables,
            },
        ),
    ] {
        let (kb, _) =
            TupleKB::load_tsv(&fixture(&format!("{dir}/kb.tsv"))).map_err(|e| e.to_string())?;
        let qs = load_questions(&fixture(&format!("{dir}/questions.jsonl")), ChunkMode::Span)
            .map_err(|e| e.to_string())?;
        for q in qs {
            cases.push((q, kb.clone(), evidence));
        }
    }
    let mut solved = 0;
    for (q, kb, evidence) in &cases {
        let tuples = select_tuples(q, kb, *evidence, &settings);
        let model = build_model(q, &tuples, &settings.weights).map_err(|e| e.to_string())?;
        if model.is_degenerate() {
            continue;
        }
        // The unforced optimum plus the optimum with each choice forced.
        let mut programs = vec![model.program.clone()];
        for &v in &model.choice_vars {
            let mut p = model.program.clone();
            p.force(v, true);
            programs.push(p);
        }
        for p in programs {
            let s = solve(&p).map_err(|e| e.to_string())?;
            if !s.is_optimal() {
                continue;
            }
            solved += 1;
            let violations = check_support_rules(&model, q, &settings.weights, &s.assignment);
            ensure(violations.is_empty(), || {
                format!("question {}: {}", q.id, violations.join("; "))
            })?;
        }
    }
    ensure(cases.len() >= 21, || {
        format!("only {} questions", cases.len())
    })?;
    Ok(format!(
        "{} questions, {solved} optimal graphs checked",
        cases.len()
    ))
}

/// The Moon question is answered correctly, and a tuple cannot align its
/// subject after its predicate.
fn moon_question() -> Check {
    let settings = Settings::default();
    let (kb, _) = TupleKB::load_tsv(&fixture("moon/kb.tsv")).map_err(|e| e.to_string())?;
    let q = load_questions(&fixture("moon/questions.jsonl"), ChunkMode::Span)
        .map_err(|e| e.to_string())?
        .remove(0);
    let out =
        answer_question(&q, &kb, Evidence::default(), &settings).map_err(|e| e.to_string())?;
    let top = &out.ranking[0];
    ensure(top.choice == "the Moon" && !out.abstain, || {
        format!("ranked {:?} first", top.choice)
    })?;

    let tuples = select_tuples(&q, &kb, Evidence::default(), &settings);
    let model = build_model(&q, &tuples, &settings.weights).map_err(|e| e.to_string())?;
    let t = model
        .tuples
        .iter()
        .position(|t| t.display() == "(Planet; orbit; Sun)")
        .ok_or("tuple (Planet; orbit; Sun) not selected")?;
    let qterm = |text: &str| {
        model
            .vertices
            .iter()
            .position(|v| matches!(v.kind, VertexKind::Qterm { .. }) && v.label == text)
            .ok_or(format!("no qterm {text}"))
    };
    let field = |role| {
        model
            .vertices
            .iter()
            .position(|v| v.kind == VertexKind::Field { tuple: t, role })
            .unwrap()
    };
    let edge = |source: usize, target: usize| {
        model
            .edges
            .iter()
            .find(|e| e.source == source && e.target == target)
            .map(|e| e.var)
            .ok_or(format!("no edge {source}->{target}"))
    };
    use tupleqa_core::kb::FieldRole;
    let pred_edge = edge(qterm("orbits")?, field(FieldRole::Predicate))?;
    let subj_edge = edge(qterm("planet")?, field(FieldRole::Subject))?;
    let mut both = model.program.clone();
    both.force(pred_edge, true);
    both.force(subj_edge, true);
    let s = solve(&both).map_err(|e| e.to_string())?;
    ensure(s.status == SolveStatus::Infeasible, || {
        "predicate->orbits with subject->planet is feasible".into()
    })?;
    let mut unordered = both.clone();
    unordered
        .constraints
        .retain(|c| !c.label.starts_with("order_"));
    ensure(
        solve(&unordered).map_err(|e| e.to_string())?.is_optimal(),
        || "pair stays infeasible without the ordering rows".into(),
    )?;
    let score = |i: usize| format!("{}={:?}", out.ranking[i].choice, out.ranking[i].score);
    Ok(format!(
        "ranking {} > {}; forced pair infeasible only through ordering",
        score(0),
        score(1)
    ))
}

/// Selection order equals a direct re-implementation of the scoring
/// formulas; sentence filters exclude exactly the labelled sentences.
fn selection_oracle() -> Check {
    let (kb, _) = TupleKB::load_tsv(&fixture("selection/kb.tsv")).map_err(|e| e.to_string())?;
    ensure(kb.len() == 50, || format!("KB has {} tuples", kb.len()))?;
    let questions = load_questions(&fixture("selection/questions.jsonl"), ChunkMode::Span)
        .map_err(|e| e.to_string())?;
    let small = SelectionParams {
        pool: 12,
        kb_top_k: 6,
        ..Default::default()
    };
    let mut compared = 0;
    for q in &questions {
        for params in [SelectionParams::default(), small.clone()] {
            let got: Vec<(String, f64)> = select_from_kb(q, &kb, &params)
                .into_iter()
                .map(|s| (s.tuple.id, s.score))
                .collect();
            let want = oracle_select(q, &kb, params.pool, params.kb_top_k);
            ensure(got.len() == want.len(), || {
                format!("{}: {} selected, oracle {}", q.id, got.len(), want.len())
            })?;
            for (g, w) in got.iter().zip(&want) {
                ensure(g.0 == w.0 && (g.1 - w.1).abs() < 1e-12, || {
                    format!("{}: got {g:?}, oracle {w:?}", q.id)
                })?;
            }
            compared += got.len();
        }
    }

    let q = &questions[0];
    let lines =
        std::fs::read_to_string(fixture("selection/sentences.jsonl")).map_err(|e| e.to_string())?;
    let labels: BTreeMap<String, String> = lines
        .lines()
        .map(|l| {
            let v: serde_json::Value = serde_json::from_str(l).unwrap();
            (
                v["id"].as_str().unwrap().to_string(),
                v["expect"].as_str().unwrap().to_string(),
            )
        })
        .collect();
    let sentences =
        load_sentences(&fixture("selection/sentences.jsonl")).map_err(|e| e.to_string())?;
    let kept: std::collections::BTreeSet<String> =
        select_on_the_fly(&sentences, q, &Default::default())
            .into_iter()
            .map(|s| s.tuple.id.split('#').next().unwrap().to_string())
            .collect();
    for s in &sentences {
        let id = s.id.clone().unwrap();
        let label = labels[&id].as_str();
        let reason = sentence_filter(&s.sentence, q, 300);
        let expected = match label {
            "keep" => None,
            "too-long" => Some(SentenceFilter::TooLong),
            "negation" => Some(SentenceFilter::Negation),
            "covers-none" => Some(SentenceFilter::CoversNoChoice),
            "covers-all" => Some(SentenceFilter::CoversAllChoices),
            other => return Err(format!("unknown label {other}")),
        };
        ensure(reason == expected, || {
            format!("sentence {id}: {reason:?}, expected {label}")
        })?;
        ensure(kept.contains(&id) == (label == "keep"), || {
            format!(
                "sentence {id}: kept={} but labelled {label}",
                kept.contains(&id)
            )
        })?;
    }
    let excluded = sentences.len() - kept.len();
    Ok(format!(
        "{compared} ranked tuples match; {excluded} of {} sentences excluded as labelled",
        sentences.len()
    ))
}

/// Pool by distinct shared stems with question+choices, keep tuples sharing
/// a stem with some choice, score `sum ln(1+N/n_x) / (|t|+|q|)` against the
/// question, sort by score then id.
fn oracle_select(q: &Question, kb: &TupleKB, pool: usize, k: usize) -> Vec<(String, f64)> {
    let tuples = kb.tuples();
    let n = tuples.len() as f64;
    let qa = q.qa_tokens();
    let mut candidates: Vec<(usize, usize)> = tuples
        .iter()
        .enumerate()
        .map(|(i, t)| (i, t.all_tokens().iter().filter(|x| qa.contains(*x)).count()))
        .filter(|c| c.1 > 0)
        .collect();
    candidates.sort_by(|a, b| b.1.cmp(&a.1).then(tuples[a.0].id.cmp(&tuples[b.0].id)));
    candidates.truncate(pool);
    let choice_stems = q.choice_tokens();
    let qtok = q.question_tokens();
    let mut scored: Vec<(String, f64)> = candidates
        .iter()
        .map(|&(i, _)| &tuples[i])
        .filter(|t| t.all_tokens().iter().any(|x| choice_stems.contains(x)))
        .map(|t| {
            let mut sum = 0.0;
            for x in t.all_tokens() {
                if qtok.contains(x) {
                    let n_x = tuples.iter().filter(|u| u.all_tokens().contains(x)).count();
                    sum += (1.0 + n / n_x as f64).ln();
                }
            }
            (
                t.id.clone(),
                sum / (t.all_tokens().len() + qtok.len()) as f64,
            )
        })
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

/// Two-sided binomial p-values against exact rational tail sums.
fn binomial_oracle() -> Check {
    let binom = |n: u64, k: u64| -> u64 { (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1)) };
    let mut checked = 0;
    for n in 1..=12u64 {
        for a in 0..=n {
            let observed = binom(n, a);
            let mass: u64 = (0..=n)
                .map(|i| binom(n, i))
                .filter(|&c| c <= observed)
                .sum();
            let exact = Ratio::new(mass, 1u64 << n).min(Ratio::from_integer(1));
            let exact = *exact.numer() as f64 / *exact.denom() as f64;
            let p = binomial_exact_test(a, n - a).map_err(|e| e.to_string())?;
            ensure((p - exact).abs() <= 1e-12, || {
                format!("p({a},{}) = {p}, exact {exact}", n - a)
            })?;
            checked += 1;
        }
    }
    let p82 = binomial_exact_test(8, 2).map_err(|e| e.to_string())?;
    let p100 = binomial_exact_test(10, 0).map_err(|e| e.to_string())?;
    ensure((p82 - 0.109375).abs() <= 1e-12, || {
        format!("p(8,2) = {p82}")
    })?;
    ensure((p100 - 2.0 / 1024.0).abs() <= 1e-12, || {
        format!("p(10,0) = {p100}")
    })?;
    Ok(format!("{checked} pairs; p(8,2)={p82}, p(10,0)={p100}"))
}

fn science_report() -> Result<EvaluationReport, String> {
    let dir = fixture("science");
    let settings =
        Settings::from_file(Some(&dir.join("config.toml"))).map_err(|e| e.to_string())?;
    let kb = TupleKB::open(&dir.join("kb.tsv")).map_err(|e| e.to_string())?;
    let sentences = load_sentences(&dir.join("sentences.jsonl")).map_err(|e| e.to_string())?;
    let tables = load_tables(&dir.join("tables.json")).map_err(|e| e.to_string())?;
    let questions = load_questions(&dir.join("questions.jsonl"), settings.chunking)
        .map_err(|e| e.to_string())?;
    let evidence = Evidence {
        sentences: &sentences,
        tables: &tables,
    };
    evaluate(
        "tupleinf",
        &questions,
        |q| {
            let out = answer_question(q, &kb, evidence, &settings)?;
            Ok(out.scores().into_iter().map(|s| s.value()).collect())
        },
        settings.tie_credit,
    )
    .map_err(|e| e.to_string())
}

/// End-to-end smoke run on the bundled science questions.
fn smoke_run() -> Check {
    let started = Instant::now();
    let report = science_report()?;
    let elapsed = started.elapsed();
    ensure(report.n >= 20, || format!("only {} questions", report.n))?;
    ensure(elapsed < Duration::from_secs(60), || {
        format!("took {elapsed:?}")
    })?;
    ensure(report.accuracy > 0.25, || {
        format!("accuracy {}", report.accuracy)
    })?;
    Ok(format!(
        "{} questions, accuracy {:.3} (random 0.25), {elapsed:.2?}",
        report.n, report.accuracy
    ))
}

/// Two evaluation runs serialize to identical bytes.
fn deterministic_reports() -> Check {
    let a = science_report()?.to_json();
    let b = science_report()?.to_json();
    ensure(a == b, || "reports differ".into())?;
    Ok(format!("{} identical bytes", a.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        (
            "1 solver matches brute-force enumeration",
            solver_matches_enumeration,
        ),
        (
            "2 optimal support graphs satisfy every graph rule",
            optimal_graphs_obey_rules,
        ),
        (
            "3 Moon question ranked correctly; ordering pair infeasible",
            moon_question,
        ),
        (
            "4 selection order and sentence filters match oracles",
            selection_oracle,
        ),
        (
            "5 binomial exact test matches rational tail sums",
            binomial_oracle,
        ),
        ("6 smoke run beats the random baseline", smoke_run),
        (
            "7 evaluation reports are byte-identical across runs",
            deterministic_reports,
        ),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("PASS criterion {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL criterion {name}: panicked");
            }
        }
    }
    println!(
        "NOTE criterion 6 covers corpus-scale accuracy only through the bundled smoke run; \
         the large-corpus figures need data that is not distributed"
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
