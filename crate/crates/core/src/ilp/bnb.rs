//! Depth-first branch-and-bound.
//!
//! Branching picks the most fractional free variable of the node's LP
//! solution (lowest index on ties) and explores the 1-branch before the
//! 0-branch. Child relaxations are re-optimized from the parent basis.

use std::rc::Rc;
use std::time::Instant;

use microlp::{ComparisonOp, OptimizationDirection, Problem, SolveOutcome};

use super::{
    BinaryProgram, BoundMode, Relation, Solution, SolveStats, SolveStatus, SolverOptions,
    FEASIBILITY_TOL, INTEGRALITY_TOL,
};
use crate::error::Result;

/// A node is pruned when its bound does not beat the incumbent by more than this.
const PRUNE_TOL: f64 = 1e-9;

/// Solves with the LP-relaxation bound.
pub fn solve(program: &BinaryProgram) -> Result<Solution> {
    solve_with(program, &SolverOptions::default())
}

pub fn solve_with(program: &BinaryProgram, options: &SolverOptions) -> Result<Solution> {
    program.validate()?;
    let started = Instant::now();
    let mut search = Search::new(program);
    match options.bound {
        BoundMode::Lp => search.run_lp(),
        BoundMode::PositiveSum => {
            let fixed = search.root_fixing();
            search.run_enumerative(vec![fixed]);
        }
    }
    search.stats.elapsed = started.elapsed();
    Ok(search.finish())
}

/// Upper bound on the optimum of `program` (forced values included) as
/// computed at the root node, or `None` when the bound proves infeasibility.
pub fn relaxation_bound(program: &BinaryProgram, mode: BoundMode) -> Result<Option<f64>> {
    program.validate()?;
    let search = Search::new(program);
    let fixed = search.root_fixing();
    Ok(match mode {
        BoundMode::Lp => match search.rows.lp_problem(&fixed) {
            Some((problem, _)) => match problem.solve() {
                Ok(SolveOutcome::Solution(s)) => Some(s.objective()),
                Err(microlp::Error::Infeasible) => None,
                _ => search.positive_sum_bound(&fixed),
            },
            None => None,
        },
        BoundMode::PositiveSum => search.positive_sum_bound(&fixed),
    })
}

/// A merged constraint: `(terms, relation, bound)`.
type Row = (Vec<(usize, f64)>, Relation, f64);

/// Constraints with merged terms.
struct Rows {
    objective: Vec<f64>,
    rows: Vec<Row>,
    /// Some row with no terms left is violated by its constant side.
    trivially_infeasible: bool,
}

impl Rows {
    fn new(program: &BinaryProgram) -> Self {
        let mut rows = Vec::new();
        let mut trivially_infeasible = false;
        for c in &program.constraints {
            let terms = c.merged_terms();
            if terms.is_empty() {
                if !c.relation.holds(0.0, c.bound, FEASIBILITY_TOL) {
                    trivially_infeasible = true;
                }
                continue;
            }
            rows.push((terms, c.relation, c.bound));
        }
        Rows {
            objective: program.variables.iter().map(|v| v.objective).collect(),
            rows,
            trivially_infeasible,
        }
    }

    /// LP relaxation with fixed variables pinned by their bounds. `None` when
    /// the rows are trivially infeasible.
    fn lp_problem(&self, fixed: &[Option<bool>]) -> Option<(Problem, Vec<microlp::Variable>)> {
        if self.trivially_infeasible {
            return None;
        }
        let mut problem = Problem::new(OptimizationDirection::Maximize);
        let vars: Vec<_> = self
            .objective
            .iter()
            .zip(fixed)
            .map(|(&c, f)| {
                let range = match f {
                    Some(true) => (1.0, 1.0),
                    Some(false) => (0.0, 0.0),
                    None => (0.0, 1.0),
                };
                problem.add_var(c, range)
            })
            .collect();
        for (terms, rel, bound) in &self.rows {
            let op = match rel {
                Relation::Le => ComparisonOp::Le,
                Relation::Eq => ComparisonOp::Eq,
                Relation::Ge => ComparisonOp::Ge,
            };
            let expr: Vec<_> = terms.iter().map(|&(v, a)| (vars[v], a)).collect();
            problem.add_constraint(expr.as_slice(), op, *bound);
        }
        Some((problem, vars))
    }

    /// Activity range check: false when some row cannot be satisfied by any
    /// completion of `fixed`.
    fn can_satisfy(&self, fixed: &[Option<bool>]) -> bool {
        if self.trivially_infeasible {
            return false;
        }
        self.rows.iter().all(|(terms, rel, bound)| {
            let (mut lo, mut hi) = (0.0, 0.0);
            for &(v, a) in terms {
                match fixed[v] {
                    Some(true) => {
                        lo += a;
                        hi += a;
                    }
                    Some(false) => {}
                    None if a > 0.0 => hi += a,
                    None => lo += a,
                }
            }
            match rel {
                Relation::Le => lo <= bound + FEASIBILITY_TOL,
                Relation::Ge => hi >= bound - FEASIBILITY_TOL,
                Relation::Eq => lo <= bound + FEASIBILITY_TOL && hi >= bound - FEASIBILITY_TOL,
            }
        })
    }
}

struct Search<'a> {
    program: &'a BinaryProgram,
    rows: Rows,
    incumbent: Option<(f64, Vec<bool>)>,
    stats: SolveStats,
    /// LP column handles; every rebuilt relaxation creates them in the same order.
    lp_vars: Vec<microlp::Variable>,
}

enum NodeLp {
    Root,
    Child(Rc<microlp::Solution>, usize, bool),
}

struct LpNode {
    lp: NodeLp,
    fixed: Vec<Option<bool>>,
}

impl<'a> Search<'a> {
    fn new(program: &'a BinaryProgram) -> Self {
        Search {
            program,
            rows: Rows::new(program),
            incumbent: None,
            stats: SolveStats::default(),
            lp_vars: Vec::new(),
        }
    }

    fn root_fixing(&self) -> Vec<Option<bool>> {
        let mut fixed = vec![None; self.program.num_variables()];
        for (v, &x) in &self.program.forced {
            fixed[v.0] = Some(x);
        }
        fixed
    }

    fn finish(self) -> Solution {
        match self.incumbent {
            Some((objective, assignment)) => Solution {
                status: SolveStatus::Optimal,
                objective: Some(objective),
                assignment,
                stats: self.stats,
            },
            None => Solution::infeasible(self.stats),
        }
    }

    fn prunable(&self, bound: f64) -> bool {
        matches!(&self.incumbent, Some((best, _)) if bound <= best + PRUNE_TOL)
    }

    /// Records a complete assignment if it is feasible and improves.
    fn offer(&mut self, assignment: Vec<bool>) -> bool {
        if !self.program.is_feasible(&assignment) {
            return false;
        }
        let value = self.program.objective_value(&assignment);
        if self
            .incumbent
            .as_ref()
            .is_none_or(|(best, _)| value > *best)
        {
            self.incumbent = Some((value, assignment));
        }
        true
    }

    fn positive_sum_bound(&self, fixed: &[Option<bool>]) -> Option<f64> {
        if !self.rows.can_satisfy(fixed) {
            return None;
        }
        Some(
            self.rows
                .objective
                .iter()
                .zip(fixed)
                .map(|(&c, f)| match f {
                    Some(true) => c,
                    Some(false) => 0.0,
                    None => c.max(0.0),
                })
                .sum(),
        )
    }

    fn solve_lp_from_scratch(
        &mut self,
        fixed: &[Option<bool>],
    ) -> Option<Result<microlp::Solution, ()>> {
        self.stats.lp_solves += 1;
        let (problem, vars) = self.rows.lp_problem(fixed)?;
        self.lp_vars = vars;
        match problem.solve() {
            Ok(SolveOutcome::Solution(s)) => Some(Ok(s)),
            Err(microlp::Error::Infeasible) => None,
            other => {
                log::warn!(
                    "LP relaxation failed ({:?}); falling back to enumeration",
                    other.err()
                );
                Some(Err(()))
            }
        }
    }

    fn run_lp(&mut self) {
        let mut stack = vec![LpNode {
            lp: NodeLp::Root,
            fixed: self.root_fixing(),
        }];
        while let Some(node) = stack.pop() {
            let LpNode { lp, fixed } = node;
            self.stats.nodes += 1;
            let solved = match lp {
                NodeLp::Root => self.solve_lp_from_scratch(&fixed),
                NodeLp::Child(parent, var, value) => {
                    self.stats.lp_solves += 1;
                    let val = if value { 1.0 } else { 0.0 };
                    match (*parent).clone().fix_var(self.lp_vars[var], val) {
                        Ok(SolveOutcome::Solution(s)) => Some(Ok(s)),
                        Err(microlp::Error::Infeasible) => None,
                        _ => self.solve_lp_from_scratch(&fixed),
                    }
                }
            };
            let sol = match solved {
                None => continue,
                Some(Ok(s)) => s,
                Some(Err(())) => {
                    self.run_enumerative(vec![fixed]);
                    continue;
                }
            };
            let bound = sol.objective();
            if self.prunable(bound) {
                continue;
            }
            let values: Vec<f64> = self.lp_vars.iter().map(|&v| sol.var_value_raw(v)).collect();

            let mut branch: Option<(usize, f64)> = None;
            for (i, &x) in values.iter().enumerate() {
                if fixed[i].is_some() {
                    continue;
                }
                let frac = x.min(1.0 - x);
                if frac > INTEGRALITY_TOL && branch.is_none_or(|(_, best)| frac > best) {
                    branch = Some((i, frac));
                }
            }
            let var = match branch {
                Some((i, _)) => i,
                None => {
                    let rounded: Vec<bool> = values.iter().map(|&x| x > 0.5).collect();
                    if self.offer(rounded) {
                        continue;
                    }
                    // Rounding broke feasibility; branch on any free variable.
                    match fixed.iter().position(Option::is_none) {
                        Some(i) => i,
                        None => continue,
                    }
                }
            };
            let parent = Rc::new(sol);
            let mut zero = fixed.clone();
            zero[var] = Some(false);
            let mut one = fixed;
            one[var] = Some(true);
            stack.push(LpNode {
                lp: NodeLp::Child(parent.clone(), var, false),
                fixed: zero,
            });
            stack.push(LpNode {
                lp: NodeLp::Child(parent, var, true),
                fixed: one,
            });
        }
    }

    /// Branch-and-bound with the positive-coefficient bound and activity
    /// propagation, branching on the lowest free variable.
    fn run_enumerative(&mut self, mut stack: Vec<Vec<Option<bool>>>) {
        while let Some(fixed) = stack.pop() {
            self.stats.nodes += 1;
            let Some(bound) = self.positive_sum_bound(&fixed) else {
                continue;
            };
            if self.prunable(bound) {
                continue;
            }
            match fixed.iter().position(Option::is_none) {
                None => {
                    let assignment = fixed.iter().map(|x| x.unwrap_or(false)).collect();
                    self.offer(assignment);
                }
                Some(var) => {
                    let mut zero = fixed.clone();
                    zero[var] = Some(false);
                    let mut one = fixed;
                    one[var] = Some(true);
                    stack.push(zero);
                    stack.push(one);
                }
            }
        }
    }
}
