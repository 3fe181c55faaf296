//! Workload generators shared by the benches.

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tupleqa_core::ilp::{BinaryProgram, Relation, VarId};
use tupleqa_core::kb::Tuple;
use tupleqa_core::text::ChunkMode;
use tupleqa_core::Question;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
}

/// Feasible random 0-1 program with `n` variables: every row holds at a
/// hidden assignment.
pub fn random_program(seed: u64, n: usize, m: usize) -> BinaryProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let mut p = BinaryProgram::new();
    for i in 0..n {
        p.add_variable(format!("x{i}"), rng.gen_range(-2.0..2.0));
    }
    for ci in 0..m {
        let k = rng.gen_range(2..=n.min(6));
        let vars: Vec<usize> = (0..n)
            .collect::<Vec<_>>()
            .choose_multiple(&mut rng, k)
            .copied()
            .collect();
        let terms: Vec<(VarId, f64)> = vars
            .iter()
            .map(|&v| {
                (
                    VarId(v),
                    f64::from(*[-3, -2, -1, 1, 2, 3].choose(&mut rng).unwrap()),
                )
            })
            .collect();
        let at: f64 = terms
            .iter()
            .filter(|t| hidden[t.0.index()])
            .map(|t| t.1)
            .sum();
        let hi: f64 = terms.iter().map(|t| t.1.max(0.0)).sum();
        let bound = rng.gen_range(at as i32..=hi as i32) as f64;
        p.add_constraint(format!("c{ci}"), terms, Relation::Le, bound);
    }
    p
}

const WORDS: &[&str] = &[
    "plant", "root", "water", "soil", "leaf", "sun", "light", "energy", "heat", "rock", "moon",
    "orbit", "gas", "air", "mineral", "cloud", "rain", "seed",
];

fn phrase(rng: &mut impl Rng, max: usize) -> String {
    let n = rng.gen_range(1..=max);
    (0..n)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

/// A 4-choice question and `n_tuples` tuples over a shared vocabulary.
pub fn synthetic_instance(seed: u64, n_tuples: usize) -> (Question, Vec<Tuple>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let text = format!(
        "Which {} of the {} is {} in the {}?",
        phrase(&mut rng, 2),
        phrase(&mut rng, 2),
        phrase(&mut rng, 1),
        phrase(&mut rng, 2)
    );
    let choices: Vec<String> = (0..4).map(|_| phrase(&mut rng, 2)).collect();
    let q = Question::new("synthetic", &text, &choices, Some(0), ChunkMode::Span)
        .expect("generated question is well formed");
    let tuples = (0..n_tuples)
        .map(|i| {
            let objects = vec![phrase(&mut rng, 2)];
            Tuple::new(
                format!("t{i}"),
                &phrase(&mut rng, 2),
                &phrase(&mut rng, 1),
                objects,
                "gen",
            )
            .expect("generated tuple is well formed")
        })
        .collect();
    (q, tuples)
}
