//! Exhaustive enumeration over the free variables.

use std::time::Instant;

use super::{BinaryProgram, Solution, SolveStats, SolveStatus, FEASIBILITY_TOL};
use crate::error::{Error, Result};

/// Largest number of free (unforced) variables [`brute_force`] accepts.
pub const ORACLE_LIMIT: usize = 25;

/// Maximizes `program` by trying every assignment of its free variables.
///
/// Assignments are visited in Gray-code order so each step flips one
/// variable and updates constraint activities incrementally. Among equal
/// objective values the first one found is kept.
pub fn brute_force(program: &BinaryProgram) -> Result<Solution> {
    program.validate()?;
    let started = Instant::now();
    let n = program.num_variables();
    let free: Vec<usize> = (0..n)
        .filter(|i| !program.forced.contains_key(&super::VarId(*i)))
        .collect();
    if free.len() > ORACLE_LIMIT {
        return Err(Error::OracleLimit {
            free: free.len(),
            limit: ORACLE_LIMIT,
        });
    }

    let mut assignment = vec![false; n];
    for (v, &x) in &program.forced {
        assignment[v.0] = x;
    }
    // columns[i]: (constraint index, coefficient) pairs for variable i
    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (ci, c) in program.constraints.iter().enumerate() {
        for &(v, a) in &c.terms {
            columns[v.0].push((ci, a));
        }
    }
    let mut activity: Vec<f64> = program
        .constraints
        .iter()
        .map(|c| c.activity(&assignment))
        .collect();
    let satisfied = |ci: usize, act: f64| {
        let c = &program.constraints[ci];
        c.relation.holds(act, c.bound, FEASIBILITY_TOL)
    };
    let mut violations = (0..activity.len())
        .filter(|&ci| !satisfied(ci, activity[ci]))
        .count();
    let mut objective = program.objective_value(&assignment);

    let mut best: Option<(f64, Vec<bool>)> = None;
    let mut visited = 0u64;
    let total: u64 = 1 << free.len();
    for step in 0..total {
        if step > 0 {
            let flip = free[step.trailing_zeros() as usize];
            let on = !assignment[flip];
            assignment[flip] = on;
            let sign = if on { 1.0 } else { -1.0 };
            objective += sign * program.variables[flip].objective;
            for &(ci, a) in &columns[flip] {
                let before = satisfied(ci, activity[ci]);
                activity[ci] += sign * a;
                let after = satisfied(ci, activity[ci]);
                match (before, after) {
                    (true, false) => violations += 1,
                    (false, true) => violations -= 1,
                    _ => {}
                }
            }
        }
        visited += 1;
        if violations > 0 {
            continue;
        }
        if best.as_ref().is_some_and(|(b, _)| objective <= *b + 1e-9) {
            continue;
        }
        // Incremental sums drift; confirm against a fresh evaluation.
        if !program.is_feasible(&assignment) {
            continue;
        }
        let exact = program.objective_value(&assignment);
        if best.as_ref().is_none_or(|(b, _)| exact > *b) {
            best = Some((exact, assignment.clone()));
        }
    }

    let stats = SolveStats {
        nodes: visited,
        lp_solves: 0,
        elapsed: started.elapsed(),
    };
    Ok(match best {
        Some((objective, assignment)) => Solution {
            status: SolveStatus::Optimal,
            objective: Some(objective),
            assignment,
            stats,
        },
        None => Solution::infeasible(stats),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ilp::{Relation, VarId};

    #[test]
    fn exactly_one() {
        let mut p = BinaryProgram::new();
        let a = p.add_variable("a", 2.0);
        let b = p.add_variable("b", 3.0);
        p.add_constraint("ge", vec![(a, 1.0), (b, 1.0)], Relation::Ge, 1.0);
        p.add_constraint("le", vec![(a, 1.0), (b, 1.0)], Relation::Le, 1.0);
        let s = brute_force(&p).unwrap();
        assert_eq!(s.objective, Some(3.0));
        assert_eq!(s.assignment, vec![false, true]);
        assert_eq!(s.stats.nodes, 4);
    }

    #[test]
    fn forced_variables_are_not_enumerated() {
        let mut p = BinaryProgram::new();
        for i in 0..30 {
            p.add_variable(format!("x{i}"), 1.0);
        }
        assert!(matches!(
            brute_force(&p),
            Err(Error::OracleLimit {
                free: 30,
                limit: 25
            })
        ));
        for i in 0..10 {
            p.force(VarId(i), false);
        }
        let s = brute_force(&p).unwrap();
        assert_eq!(s.objective, Some(20.0));
        assert!(!s.assignment[0]);
    }

    #[test]
    fn infeasible() {
        let mut p = BinaryProgram::new();
        let a = p.add_variable("a", 1.0);
        p.add_constraint("c", vec![(a, 1.0)], Relation::Ge, 2.0);
        assert_eq!(brute_force(&p).unwrap().status, SolveStatus::Infeasible);
    }
}
