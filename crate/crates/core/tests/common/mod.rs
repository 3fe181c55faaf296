#![allow(dead_code)]

use std::path::PathBuf;

use rand::Rng;
use tupleqa_core::graph::{Edge, SupportModel, VertexKind};
use tupleqa_core::ilp::{BinaryProgram, Relation, VarId};
use tupleqa_core::kb::FieldRole;
use tupleqa_core::{GraphWeights, Question};

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
}

/// Random 0-1 program: small integer constraint coefficients and real
/// objective coefficients. Most rows are drawn to hold at a hidden
/// assignment so that a good share of programs stay feasible.
pub fn random_program(
    rng: &mut impl Rng,
    max_vars: usize,
    max_constraints: usize,
) -> BinaryProgram {
    let n = rng.gen_range(1..=max_vars);
    let m = rng.gen_range(0..=max_constraints);
    let hidden: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    let mut p = BinaryProgram::new();
    for i in 0..n {
        let c: f64 = rng.gen_range(-2.0..2.0);
        p.add_variable(format!("x{i}"), (c * 100.0).round() / 100.0);
    }
    for ci in 0..m {
        let k = rng.gen_range(1..=n.min(5));
        let mut vars: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = rng.gen_range(i..n);
            vars.swap(i, j);
        }
        let terms: Vec<(VarId, f64)> = vars[..k]
            .iter()
            .map(|&v| {
                let mut a = 0;
                while a == 0 {
                    a = rng.gen_range(-3i32..=3);
                }
                (VarId(v), f64::from(a))
            })
            .collect();
        let lo: f64 = terms.iter().map(|t| t.1.min(0.0)).sum();
        let hi: f64 = terms.iter().map(|t| t.1.max(0.0)).sum();
        let at_hidden: f64 = terms
            .iter()
            .filter(|t| hidden[t.0.index()])
            .map(|t| t.1)
            .sum();
        let planted = rng.gen_bool(0.9);
        let (relation, bound) = match rng.gen_range(0..5) {
            0 | 1 if planted => (
                Relation::Le,
                rng.gen_range(at_hidden as i32..=hi as i32) as f64,
            ),
            2 | 3 if planted => (
                Relation::Ge,
                rng.gen_range(lo as i32..=at_hidden as i32) as f64,
            ),
            4 if planted => (Relation::Eq, at_hidden),
            0 | 1 => (Relation::Le, rng.gen_range(lo as i32..=hi as i32) as f64),
            2 | 3 => (Relation::Ge, rng.gen_range(lo as i32..=hi as i32) as f64),
            _ => {
                let act: f64 = terms
                    .iter()
                    .filter(|_| rng.gen_bool(0.5))
                    .map(|t| t.1)
                    .sum();
                (Relation::Eq, act)
            }
        };
        p.add_constraint(format!("c{ci}"), terms, relation, bound);
    }
    for i in 0..n {
        if rng.gen_bool(0.08) {
            p.force(VarId(i), rng.gen_bool(0.5));
        }
    }
    p
}

/// Checks a model assignment against the support-graph rules directly on
/// the graph structure, without looking at the program's constraints.
/// Returns every violated rule.
pub fn check_support_rules(
    model: &SupportModel,
    question: &Question,
    weights: &GraphWeights,
    x: &[bool],
) -> Vec<String> {
    let mut bad = Vec::new();
    let [w1, w2, w3, w4, w5] = weights.w.map(|w| w as usize);
    let on_vertex = |i: usize| x[model.vertices[i].var.index()];
    let active_edges: Vec<_> = model.edges.iter().filter(|e| x[e.var.index()]).collect();
    let degree = |v: usize| {
        active_edges
            .iter()
            .filter(|e| e.source == v || e.target == v)
            .count()
    };

    let choices = model
        .vertices
        .iter()
        .enumerate()
        .filter(|(i, v)| matches!(v.kind, VertexKind::Choice { .. }) && on_vertex(*i))
        .count();
    if choices != 1 {
        bad.push(format!("{choices} active choices"));
    }
    for e in &model.edges {
        let threshold = match model.vertices[e.target].kind {
            VertexKind::Choice { .. } => weights.edge_threshold_fc,
            _ => weights.edge_threshold_qf,
        };
        if e.weight <= threshold {
            bad.push(format!("edge weight {} at or below {threshold}", e.weight));
        }
    }
    for e in &active_edges {
        if !on_vertex(e.source) || !on_vertex(e.target) {
            bad.push(format!(
                "edge {}->{} has an inactive endpoint",
                e.source, e.target
            ));
        }
    }

    let tuple_vertex = |t: usize| {
        model
            .vertices
            .iter()
            .position(|v| v.kind == VertexKind::Tuple { index: t })
            .unwrap()
    };
    let mut active_tuples = 0;
    for (i, v) in model.vertices.iter().enumerate() {
        if !on_vertex(i) {
            continue;
        }
        let d = degree(i);
        match &v.kind {
            VertexKind::Qterm { .. } | VertexKind::Choice { .. } | VertexKind::Field { .. }
                if d == 0 =>
            {
                bad.push(format!("active vertex {} has no active edge", v.label));
            }
            _ => {}
        }
        match &v.kind {
            VertexKind::Field { tuple, .. } => {
                if d > w1 - 1 {
                    bad.push(format!("field {} degree {d}", v.label));
                }
                if !on_vertex(tuple_vertex(*tuple)) {
                    bad.push(format!("field {} active without its tuple", v.label));
                }
            }
            VertexKind::Choice { .. } if d > w2 - 1 => {
                bad.push(format!("choice {} degree {d}", v.label));
            }
            VertexKind::Qterm { .. } if d > w3 - 1 => {
                bad.push(format!("qterm {} degree {d}", v.label));
            }
            VertexKind::Tuple { index } => {
                active_tuples += 1;
                let fields: Vec<(usize, FieldRole)> = model
                    .vertices
                    .iter()
                    .enumerate()
                    .filter_map(|(fi, f)| match f.kind {
                        VertexKind::Field { tuple, role } if tuple == *index => Some((fi, role)),
                        _ => None,
                    })
                    .collect();
                let active_fields = fields.iter().filter(|f| on_vertex(f.0)).count();
                if active_fields < w5 {
                    bad.push(format!(
                        "tuple {} has {active_fields} active fields",
                        v.label
                    ));
                }
                let is_field = |vi: usize| fields.iter().any(|f| f.0 == vi);
                if !active_edges.iter().any(|e| is_field(e.target)) {
                    bad.push(format!("tuple {} has no qterm edge", v.label));
                }
                if !active_edges.iter().any(|e| is_field(e.source)) {
                    bad.push(format!("tuple {} has no choice edge", v.label));
                }
                let role_vertex = |r: FieldRole| fields.iter().find(|f| f.1 == r).map(|f| f.0);
                if !on_vertex(role_vertex(FieldRole::Subject).unwrap()) {
                    bad.push(format!("tuple {} active without subject", v.label));
                }
                if model.tuples[*index].from_table
                    && !role_vertex(FieldRole::Object(0)).is_some_and(on_vertex)
                {
                    bad.push(format!("table tuple {} without its object", v.label));
                }
                // Alignment order against qterm positions.
                let position = |e: &Edge| match model.vertices[e.source].kind {
                    VertexKind::Qterm { index } => question.qterms[index].position,
                    _ => unreachable!(),
                };
                let edges_into = |fv: usize| active_edges.iter().filter(move |e| e.target == fv);
                let pred = role_vertex(FieldRole::Predicate).unwrap();
                let subj = role_vertex(FieldRole::Subject).unwrap();
                for pe in edges_into(pred) {
                    let p = position(pe);
                    if edges_into(subj).any(|se| position(se) >= p) {
                        bad.push(format!(
                            "tuple {}: subject aligned at or after predicate",
                            v.label
                        ));
                    }
                    for (fv, role) in &fields {
                        if matches!(role, FieldRole::Object(_))
                            && edges_into(*fv).any(|oe| position(oe) <= p)
                        {
                            bad.push(format!(
                                "tuple {}: object aligned at or before predicate",
                                v.label
                            ));
                        }
                    }
                }
            }
            _ => {}
        }
    }
    if active_tuples > w4 - 1 {
        bad.push(format!("{active_tuples} active tuples"));
    }
    bad
}
