use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{edge_weight, qterm_coefficient, role_tag, tuple_coefficient, GraphWeights, Question};
use crate::error::Result;
use crate::ilp::{BinaryProgram, Relation, VarId};
use crate::kb::{FieldRole, Tuple};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum VertexKind {
    Qterm {
        index: usize,
    },
    Choice {
        index: usize,
    },
    Tuple {
        index: usize,
    },
    /// Field of tuple `tuple` (index into the model's tuples).
    Field {
        tuple: usize,
        role: FieldRole,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    #[serde(flatten)]
    pub kind: VertexKind,
    pub label: String,
    pub var: VarId,
}

/// Alignment edge, qterm to field or field to choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    /// Vertex indices.
    pub source: usize,
    pub target: usize,
    pub weight: f64,
    pub var: VarId,
}

/// A built model: the program plus the graph its variables stand for.
///
/// Variables are numbered qterms, choices, tuples, fields, then edges, so
/// vertex `i` owns variable `i` and edge `j` owns `vertices.len() + j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportModel {
    pub question_id: String,
    pub program: BinaryProgram,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
    pub tuples: Vec<Tuple>,
    /// `choice_vars[i]` is the variable of choice `i`.
    pub choice_vars: Vec<VarId>,
}

impl SupportModel {
    /// No tuples were given: only choice variables and the exactly-one constraint.
    pub fn is_degenerate(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn choice_var(&self, index: usize) -> Option<VarId> {
        self.choice_vars.get(index).copied()
    }

    pub fn edge_of(&self, var: VarId) -> Option<&Edge> {
        var.0
            .checked_sub(self.vertices.len())
            .and_then(|j| self.edges.get(j))
    }
}

struct TupleVertices {
    tuple: usize,
    /// (role, vertex index, field token set)
    fields: Vec<(FieldRole, usize, BTreeSet<String>)>,
}

/// Builds the 0-1 program for `question` over `tuples`.
pub fn build_model(
    question: &Question,
    tuples: &[Tuple],
    weights: &GraphWeights,
) -> Result<SupportModel> {
    weights.validate()?;
    let mut program = BinaryProgram::new();
    let mut vertices = Vec::new();
    let push_vertex = |program: &mut BinaryProgram,
                       vertices: &mut Vec<Vertex>,
                       kind: VertexKind,
                       name: String,
                       label: String,
                       objective: f64| {
        let var = program.add_variable(name, objective);
        debug_assert_eq!(var.0, vertices.len());
        vertices.push(Vertex { kind, label, var });
        vertices.len() - 1
    };

    if tuples.is_empty() {
        let mut choice_vars = Vec::new();
        for (i, c) in question.choices.iter().enumerate() {
            let v = push_vertex(
                &mut program,
                &mut vertices,
                VertexKind::Choice { index: i },
                format!("a{i}"),
                c.text.clone(),
                0.0,
            );
            choice_vars.push(VarId(v));
        }
        program.add_constraint(
            "one_choice",
            choice_vars.iter().map(|&v| (v, 1.0)).collect(),
            Relation::Eq,
            1.0,
        );
        return Ok(SupportModel {
            question_id: question.id.clone(),
            program,
            vertices,
            edges: Vec::new(),
            tuples: Vec::new(),
            choice_vars,
        });
    }

    let qterm_vertices: Vec<usize> = question
        .qterms
        .iter()
        .enumerate()
        .map(|(i, q)| {
            push_vertex(
                &mut program,
                &mut vertices,
                VertexKind::Qterm { index: i },
                format!("q{i}"),
                q.text.clone(),
                qterm_coefficient(q, tuples, weights),
            )
        })
        .collect();
    let choice_vertices: Vec<usize> = question
        .choices
        .iter()
        .enumerate()
        .map(|(i, c)| {
            push_vertex(
                &mut program,
                &mut vertices,
                VertexKind::Choice { index: i },
                format!("a{i}"),
                c.text.clone(),
                0.0,
            )
        })
        .collect();
    let tuple_vertices: Vec<usize> = tuples
        .iter()
        .enumerate()
        .map(|(i, t)| {
            push_vertex(
                &mut program,
                &mut vertices,
                VertexKind::Tuple { index: i },
                format!("t{i}"),
                t.display(),
                tuple_coefficient(t, question),
            )
        })
        .collect();
    let mut per_tuple = Vec::with_capacity(tuples.len());
    for (ti, t) in tuples.iter().enumerate() {
        let mut fields = Vec::new();
        for (role, text, tokens) in t.fields() {
            let v = push_vertex(
                &mut program,
                &mut vertices,
                VertexKind::Field { tuple: ti, role },
                format!("f{ti}.{}", role_tag(role)),
                text.to_string(),
                0.0,
            );
            fields.push((role, v, tokens.to_set()));
        }
        per_tuple.push(TupleVertices { tuple: ti, fields });
    }

    // Edges: qterm -> field, then field -> choice, tuple by tuple.
    let mut edges: Vec<Edge> = Vec::new();
    let n_vertices = vertices.len();
    let add_edge = |edges: &mut Vec<Edge>, program: &mut BinaryProgram, source, target, weight| {
        let var = program.add_variable(format!("e{source}_{target}"), weight);
        debug_assert_eq!(var.0, n_vertices + edges.len());
        edges.push(Edge {
            source,
            target,
            weight,
            var,
        });
    };
    for tv in &per_tuple {
        for (_, fv, field_tokens) in &tv.fields {
            for (qi, q) in question.qterms.iter().enumerate() {
                let w = weights.edge_scale * edge_weight(field_tokens, &q.stem_set())?;
                if w > weights.edge_threshold_qf {
                    add_edge(&mut edges, &mut program, qterm_vertices[qi], *fv, w);
                }
            }
        }
        for (_, fv, field_tokens) in &tv.fields {
            for (ci, c) in question.choices.iter().enumerate() {
                if c.tokens.is_empty() {
                    continue;
                }
                let w = weights.edge_scale * edge_weight(field_tokens, &c.tokens)?;
                if w > weights.edge_threshold_fc {
                    add_edge(&mut edges, &mut program, *fv, choice_vertices[ci], w);
                }
            }
        }
    }

    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n_vertices];
    for (j, e) in edges.iter().enumerate() {
        incident[e.source].push(j);
        incident[e.target].push(j);
    }
    let edges = edges;
    let edge_list = edges.as_slice();
    let x = |v: usize| VarId(v);
    let edge_terms = |list: &[usize], coef: f64| -> Vec<(VarId, f64)> {
        list.iter().map(|&j| (edges[j].var, coef)).collect()
    };
    let [w1, w2, w3, w4, w5] = weights.w.map(f64::from);

    // Active vertex needs an active edge; degree limits.
    let degree_limited = qterm_vertices
        .iter()
        .map(|&v| (v, w3, "qterm"))
        .chain(choice_vertices.iter().map(|&v| (v, w2, "choice")))
        .chain(
            per_tuple
                .iter()
                .flat_map(|tv| tv.fields.iter().map(|f| (f.1, w1, "field"))),
        );
    for (v, limit, kind) in degree_limited {
        let mut terms = edge_terms(&incident[v], 1.0);
        terms.push((x(v), -1.0));
        program.add_constraint(format!("has_edge_{kind}_{v}"), terms, Relation::Ge, 0.0);
        if !incident[v].is_empty() {
            let mut terms = edge_terms(&incident[v], 1.0);
            terms.push((x(v), -(limit - 1.0)));
            program.add_constraint(format!("degree_{kind}_{v}"), terms, Relation::Le, 0.0);
        }
    }
    for e in &edges {
        program.add_constraint(
            format!("edge_source_{}", e.var.0),
            vec![(e.var, 1.0), (x(e.source), -1.0)],
            Relation::Le,
            0.0,
        );
        program.add_constraint(
            format!("edge_target_{}", e.var.0),
            vec![(e.var, 1.0), (x(e.target), -1.0)],
            Relation::Le,
            0.0,
        );
    }
    program.add_constraint(
        "one_choice",
        choice_vertices.iter().map(|&v| (x(v), 1.0)).collect(),
        Relation::Eq,
        1.0,
    );
    program.add_constraint(
        "tuple_budget",
        tuple_vertices.iter().map(|&v| (x(v), 1.0)).collect(),
        Relation::Le,
        w4 - 1.0,
    );

    for tv in &per_tuple {
        let xt = x(tuple_vertices[tv.tuple]);
        let ti = tv.tuple;
        for (_, fv, _) in &tv.fields {
            program.add_constraint(
                format!("field_tuple_{fv}"),
                vec![(x(*fv), 1.0), (xt, -1.0)],
                Relation::Le,
                0.0,
            );
        }
        let mut terms: Vec<_> = tv.fields.iter().map(|f| (x(f.1), 1.0)).collect();
        terms.push((xt, -w5));
        program.add_constraint(format!("min_fields_{ti}"), terms, Relation::Ge, 0.0);

        let side = |to_choice: bool| -> Vec<usize> {
            tv.fields
                .iter()
                .flat_map(|f| {
                    incident[f.1].iter().copied().filter(move |&j| {
                        let e = &edge_list[j];
                        let field_end = if to_choice { e.source } else { e.target };
                        field_end == f.1
                    })
                })
                .collect()
        };
        for (to_choice, name) in [(false, "qterm"), (true, "choice")] {
            let mut terms = edge_terms(&side(to_choice), 1.0);
            terms.push((xt, -1.0));
            program.add_constraint(format!("tuple_{name}_edge_{ti}"), terms, Relation::Ge, 0.0);
        }

        let subject = tv.fields[0].1;
        program.add_constraint(
            format!("subject_{ti}"),
            vec![(x(subject), 1.0), (xt, -1.0)],
            Relation::Ge,
            0.0,
        );
        if tuples[ti].from_table {
            if let Some(obj) = tv.fields.iter().find(|f| f.0 == FieldRole::Object(0)) {
                program.add_constraint(
                    format!("table_object_{ti}"),
                    vec![(x(obj.1), 1.0), (xt, -1.0)],
                    Relation::Ge,
                    0.0,
                );
            }
        }

        // Ordering between predicate, subject and object alignments.
        let qterm_edges = |field: usize| -> Vec<(usize, &Edge)> {
            incident[field]
                .iter()
                .map(|&j| &edges[j])
                .filter(|e| e.target == field)
                .map(|e| (qterm_position(&vertices[e.source].kind, question), e))
                .collect()
        };
        let pred = tv.fields[1].1;
        for (p, pe) in qterm_edges(pred) {
            for (j, se) in qterm_edges(subject) {
                if j >= p {
                    program.add_constraint(
                        format!("order_subject_{}_{}", pe.var.0, se.var.0),
                        vec![(pe.var, 1.0), (se.var, 1.0)],
                        Relation::Le,
                        1.0,
                    );
                }
            }
            for (_, ov, _) in tv
                .fields
                .iter()
                .filter(|f| matches!(f.0, FieldRole::Object(_)))
            {
                for (j, oe) in qterm_edges(*ov) {
                    if j <= p {
                        program.add_constraint(
                            format!("order_object_{}_{}", pe.var.0, oe.var.0),
                            vec![(pe.var, 1.0), (oe.var, 1.0)],
                            Relation::Le,
                            1.0,
                        );
                    }
                }
            }
        }
    }

    Ok(SupportModel {
        question_id: question.id.clone(),
        program,
        vertices,
        edges,
        tuples: tuples.to_vec(),
        choice_vars: choice_vertices.into_iter().map(VarId).collect(),
    })
}

fn qterm_position(kind: &VertexKind, question: &Question) -> usize {
    match kind {
        VertexKind::Qterm { index } => question.qterms[*index].position,
        _ => unreachable!("qterm-side edge starts at a qterm"),
    }
}
