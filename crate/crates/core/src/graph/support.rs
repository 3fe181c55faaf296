use serde::{Deserialize, Serialize};

use super::model::{SupportModel, Vertex, VertexKind};
use crate::error::{Error, Result};
use crate::kb::Tuple;

/// Edge between two vertices of a [`SupportGraph`], by position in its
/// vertex list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportEdge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// The active part of a solved model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportGraph {
    pub question_id: String,
    pub objective: f64,
    pub vertices: Vec<Vertex>,
    pub edges: Vec<SupportEdge>,
    /// Active tuples with their provenance.
    pub tuples: Vec<Tuple>,
}

impl SupportGraph {
    /// Choice indices among the active vertices.
    pub fn active_choices(&self) -> Vec<usize> {
        self.vertices
            .iter()
            .filter_map(|v| match v.kind {
                VertexKind::Choice { index } => Some(index),
                _ => None,
            })
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// Collects the vertices and edges set to 1 by `assignment`.
pub fn extract_support_graph(model: &SupportModel, assignment: &[bool]) -> Result<SupportGraph> {
    let expected = model.program.num_variables();
    if assignment.len() != expected {
        return Err(Error::PartialAssignment {
            got: assignment.len(),
            expected,
        });
    }
    if let Some((v, _)) = model
        .program
        .forced
        .iter()
        .find(|(v, &x)| assignment[v.0] != x)
    {
        return Err(Error::InfeasibleAssignment(format!(
            "forced value of {}",
            model.program.variables[v.0].name
        )));
    }
    if let Some(ci) = model.program.first_violation(assignment) {
        return Err(Error::InfeasibleAssignment(
            model.program.constraints[ci].label.clone(),
        ));
    }

    let mut position = vec![None; model.vertices.len()];
    let mut vertices = Vec::new();
    let mut tuples = Vec::new();
    for (i, v) in model.vertices.iter().enumerate() {
        if assignment[v.var.0] {
            position[i] = Some(vertices.len());
            vertices.push(v.clone());
            if let VertexKind::Tuple { index } = v.kind {
                tuples.push(model.tuples[index].clone());
            }
        }
    }
    let mut edges = Vec::new();
    for e in model.edges.iter().filter(|e| assignment[e.var.0]) {
        match (position[e.source], position[e.target]) {
            (Some(source), Some(target)) => edges.push(SupportEdge {
                source,
                target,
                weight: e.weight,
            }),
            _ => {
                return Err(Error::InfeasibleAssignment(format!(
                    "edge {} has an inactive endpoint",
                    model.program.variables[e.var.0].name
                )))
            }
        }
    }
    Ok(SupportGraph {
        question_id: model.question_id.clone(),
        objective: model.program.objective_value(assignment),
        vertices,
        edges,
        tuples,
    })
}
