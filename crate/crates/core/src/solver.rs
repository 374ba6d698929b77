//! Exact search over Hamiltonian tours rooted at node 0.
//!
//! Every static formulation reduces to the same combinatorial core: pick a
//! tour minimizing a sum of arc costs, subject to a handful of "sum of arc
//! weights along the tour <= bound" side constraints. [`solve_exact`] does
//! this with depth-first branch and bound; [`brute_force_oracle`] enumerates
//! every tour and exists to cross-check it.
//!
//! Both walk tours in lexicographic order of the visit sequence and only
//! replace the incumbent on a strict improvement (beyond [`TIE_TOLERANCE`]),
//! so ties resolve to the lexicographically smallest order in both.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Route, SquareMatrix};

/// Relative margin an objective must beat the incumbent by to replace it.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Absolute slack allowed on side-constraint bounds.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

/// Largest dimension the enumeration oracle accepts.
pub const BRUTE_FORCE_MAX_DIM: usize = 11;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("problem needs at least 2 nodes, got {0}")]
    TooSmall(usize),
    #[error("brute force refuses {0} nodes (limit {BRUTE_FORCE_MAX_DIM})")]
    TooLarge(usize),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value in {0}")]
    NonFinite(String),
}

/// `sum over tour arcs of weights[i][j] <= bound`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SideConstraint {
    pub label: String,
    pub weights: SquareMatrix,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteAdditiveProblem {
    pub arc_cost: SquareMatrix,
    pub side_constraints: Vec<SideConstraint>,
}

impl RouteAdditiveProblem {
    pub fn unconstrained(arc_cost: SquareMatrix) -> Self {
        Self {
            arc_cost,
            side_constraints: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.arc_cost.dim()
    }

    fn check(&self) -> Result<usize, SolverError> {
        let n = self.dim();
        if n < 2 {
            return Err(SolverError::TooSmall(n));
        }
        if self.arc_cost.iter().any(|(_, _, v)| !v.is_finite()) {
            return Err(SolverError::NonFinite("arc_cost".into()));
        }
        for c in &self.side_constraints {
            if c.weights.dim() != n {
                return Err(SolverError::Dimension(format!(
                    "constraint '{}' is {}x{}, problem is {n}x{n}",
                    c.label,
                    c.weights.dim(),
                    c.weights.dim()
                )));
            }
            if !c.bound.is_finite() || c.weights.iter().any(|(_, _, v)| !v.is_finite()) {
                return Err(SolverError::NonFinite(format!("constraint '{}'", c.label)));
            }
        }
        Ok(n)
    }

    /// Objective of a closed visit order, summed left to right.
    pub fn tour_cost(&self, order: &[usize]) -> f64 {
        order
            .windows(2)
            .fold(0.0, |acc, w| acc + self.arc_cost[(w[0], w[1])])
    }

    /// Left-hand side of each side constraint on a closed visit order.
    pub fn constraint_loads(&self, order: &[usize]) -> Vec<f64> {
        self.side_constraints
            .iter()
            .map(|c| {
                order
                    .windows(2)
                    .fold(0.0, |acc, w| acc + c.weights[(w[0], w[1])])
            })
            .collect()
    }

    pub fn is_feasible(&self, order: &[usize]) -> bool {
        self.constraint_loads(order)
            .iter()
            .zip(&self.side_constraints)
            .all(|(load, c)| *load <= c.bound + FEASIBILITY_TOLERANCE)
    }

    fn route_for(&self, order: Vec<usize>) -> Route {
        Route::from_order(order, |i, j| self.arc_cost[(i, j)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub route: Option<Route>,
    pub objective: Option<f64>,
    pub nodes_explored: u64,
}

impl SolveResult {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }
}

fn improves(candidate: f64, incumbent: Option<f64>) -> bool {
    match incumbent {
        None => true,
        Some(best) => candidate < best - TIE_TOLERANCE * best.abs().max(1.0),
    }
}

/// Exhaustive enumeration of all `(n-1)!` tours.
pub fn brute_force_oracle(problem: &RouteAdditiveProblem) -> Result<SolveResult, SolverError> {
    let n = problem.check()?;
    if n > BRUTE_FORCE_MAX_DIM {
        return Err(SolverError::TooLarge(n));
    }
    let mut perm: Vec<usize> = (1..n).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut explored = 0u64;
    let mut order = Vec::with_capacity(n + 1);
    loop {
        explored += 1;
        order.clear();
        order.push(0);
        order.extend_from_slice(&perm);
        order.push(0);
        if problem.is_feasible(&order) {
            let cost = problem.tour_cost(&order);
            if improves(cost, best.as_ref().map(|b| b.0)) {
                best = Some((cost, order.clone()));
            }
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    Ok(finish(problem, best, explored))
}

/// Advances to the next permutation in lexicographic order. Returns `false`
/// after the last one.
fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn finish(
    problem: &RouteAdditiveProblem,
    best: Option<(f64, Vec<usize>)>,
    explored: u64,
) -> SolveResult {
    match best {
        Some((objective, order)) => SolveResult {
            status: SolveStatus::Optimal,
            route: Some(problem.route_for(order)),
            objective: Some(objective),
            nodes_explored: explored,
        },
        None => SolveResult {
            status: SolveStatus::Infeasible,
            route: None,
            objective: None,
            nodes_explored: explored,
        },
    }
}

struct Search<'a> {
    problem: &'a RouteAdditiveProblem,
    n: usize,
    path: Vec<usize>,
    visited: Vec<bool>,
    loads: Vec<f64>,
    best: Option<(f64, Vec<usize>)>,
    explored: u64,
}

impl Search<'_> {
    /// Cheapest way each still-open node (the current one plus every
    /// unvisited one) can leave, given where it may still go.
    fn completion_bound(&self, current: usize, m: &SquareMatrix) -> f64 {
        let remaining: Vec<usize> = (1..self.n).filter(|&v| !self.visited[v]).collect();
        if remaining.is_empty() {
            return m[(current, 0)];
        }
        let mut bound = remaining
            .iter()
            .map(|&j| m[(current, j)])
            .fold(f64::INFINITY, f64::min);
        for &u in &remaining {
            let out = remaining
                .iter()
                .filter(|&&v| v != u)
                .map(|&v| m[(u, v)])
                .fold(m[(u, 0)], f64::min);
            bound += out;
        }
        bound
    }

    fn pruned_by_constraints(&self, current: usize) -> bool {
        self.problem
            .side_constraints
            .iter()
            .zip(&self.loads)
            .any(|(c, &load)| {
                let lb = load + self.completion_bound(current, &c.weights);
                lb > c.bound + FEASIBILITY_TOLERANCE + 1e-12 * c.bound.abs().max(1.0)
            })
    }

    fn pruned_by_cost(&self, current: usize, cost: f64) -> bool {
        match &self.best {
            None => false,
            Some((best, _)) => {
                let lb = cost + self.completion_bound(current, &self.problem.arc_cost);
                // A tour can only replace the incumbent if it beats it by the
                // tie margin; the extra 1e-12 absorbs rounding in the bound.
                lb >= best - TIE_TOLERANCE * best.abs().max(1.0) + 1e-12 * best.abs().max(1.0)
            }
        }
    }

    fn dfs(&mut self, cost: f64) {
        self.explored += 1;
        let current = *self.path.last().expect("path starts at the warehouse");
        if self.path.len() == self.n {
            // Accumulated left to right, so bit-identical to `tour_cost`.
            let total = cost + self.problem.arc_cost[(current, 0)];
            self.path.push(0);
            if self.problem.is_feasible(&self.path)
                && improves(total, self.best.as_ref().map(|b| b.0))
            {
                self.best = Some((total, self.path.clone()));
            }
            self.path.pop();
            return;
        }
        if self.pruned_by_cost(current, cost) || self.pruned_by_constraints(current) {
            return;
        }
        for next in 1..self.n {
            if self.visited[next] {
                continue;
            }
            self.visited[next] = true;
            self.path.push(next);
            for (load, c) in self.loads.iter_mut().zip(&self.problem.side_constraints) {
                *load += c.weights[(current, next)];
            }
            self.dfs(cost + self.problem.arc_cost[(current, next)]);
            for (load, c) in self.loads.iter_mut().zip(&self.problem.side_constraints) {
                *load -= c.weights[(current, next)];
            }
            self.path.pop();
            self.visited[next] = false;
        }
    }
}

/// Global optimum over all tours rooted at node 0, or `Infeasible` if no
/// tour meets every side constraint.
pub fn solve_exact(problem: &RouteAdditiveProblem) -> Result<SolveResult, SolverError> {
    let n = problem.check()?;
    let mut visited = vec![false; n];
    visited[0] = true;
    let mut search = Search {
        problem,
        n,
        path: vec![0],
        visited,
        loads: vec![0.0; problem.side_constraints.len()],
        best: None,
        explored: 0,
    };
    search.dfs(0.0);
    Ok(finish(problem, search.best, search.explored))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: &[&[f64]]) -> SquareMatrix {
        SquareMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn two_node_tour() {
        let p = RouteAdditiveProblem::unconstrained(matrix(&[&[0.0, 3.0], &[4.0, 0.0]]));
        for r in [solve_exact(&p).unwrap(), brute_force_oracle(&p).unwrap()] {
            assert_eq!(r.status, SolveStatus::Optimal);
            assert_eq!(r.route.unwrap().order, vec![0, 1, 0]);
            assert_eq!(r.objective, Some(7.0));
        }
    }

    #[test]
    fn four_node_asymmetric_matches_enumeration() {
        let m = matrix(&[
            &[0.0, 2.0, 9.0, 10.0],
            &[1.0, 0.0, 6.0, 4.0],
            &[15.0, 7.0, 0.0, 8.0],
            &[6.0, 3.0, 12.0, 0.0],
        ]);
        // Hand enumeration of the 3! tours:
        // 0123: 2+6+8+6=22  0132: 2+4+12+15=33  0213: 9+7+4+6=26
        // 0231: 9+8+3+1=21  0312: 10+3+6+15=34  0321: 10+12+7+1=30
        let p = RouteAdditiveProblem::unconstrained(m.clone());
        let r = solve_exact(&p).unwrap();
        assert_eq!(r.objective, Some(21.0));
        assert_eq!(r.route.unwrap().order, vec![0, 2, 3, 1, 0]);

        // Forbid arc (2,3) through a side constraint: 0231 and 0123 drop out,
        // leaving 0213 at 26.
        let mut w = SquareMatrix::filled(4, 0.0);
        w[(2, 3)] = 1.0;
        let p = RouteAdditiveProblem {
            arc_cost: m,
            side_constraints: vec![SideConstraint {
                label: "no 2->3".into(),
                weights: w,
                bound: 0.5,
            }],
        };
        let exact = solve_exact(&p).unwrap();
        assert_eq!(exact.objective, Some(26.0));
        assert_eq!(exact.route.as_ref().unwrap().order, vec![0, 2, 1, 3, 0]);
        assert_eq!(
            exact,
            SolveResult {
                nodes_explored: exact.nodes_explored,
                ..brute_force_oracle(&p).unwrap()
            }
        );
    }

    #[test]
    fn all_equal_costs_pick_lexicographic_first() {
        let p = RouteAdditiveProblem::unconstrained(SquareMatrix::from_fn(5, |i, j| {
            if i == j {
                0.0
            } else {
                1.0
            }
        }));
        for r in [solve_exact(&p).unwrap(), brute_force_oracle(&p).unwrap()] {
            assert_eq!(r.route.unwrap().order, vec![0, 1, 2, 3, 4, 0]);
        }
    }

    #[test]
    fn infeasible_is_a_status() {
        let m = SquareMatrix::from_fn(3, |i, j| if i == j { 0.0 } else { 1.0 });
        let p = RouteAdditiveProblem {
            arc_cost: m.clone(),
            side_constraints: vec![SideConstraint {
                label: "shelf".into(),
                weights: m,
                bound: 2.5,
            }],
        };
        assert_eq!(solve_exact(&p).unwrap().status, SolveStatus::Infeasible);
        assert_eq!(
            brute_force_oracle(&p).unwrap().status,
            SolveStatus::Infeasible
        );
    }

    #[test]
    fn dimension_guards() {
        let one = RouteAdditiveProblem::unconstrained(SquareMatrix::filled(1, 0.0));
        assert_eq!(solve_exact(&one), Err(SolverError::TooSmall(1)));
        let big = RouteAdditiveProblem::unconstrained(SquareMatrix::filled(12, 1.0));
        assert_eq!(brute_force_oracle(&big), Err(SolverError::TooLarge(12)));
        let mismatch = RouteAdditiveProblem {
            arc_cost: SquareMatrix::filled(3, 1.0),
            side_constraints: vec![SideConstraint {
                label: "x".into(),
                weights: SquareMatrix::filled(2, 1.0),
                bound: 1.0,
            }],
        };
        assert!(matches!(
            solve_exact(&mismatch),
            Err(SolverError::Dimension(_))
        ));
    }

    #[test]
    fn negative_weights_are_handled() {
        let cost = matrix(&[&[0.0, 1.0, 5.0], &[5.0, 0.0, 1.0], &[1.0, 5.0, 0.0]]);
        let w = matrix(&[&[0.0, -2.0, 1.0], &[1.0, 0.0, -2.0], &[-2.0, 1.0, 0.0]]);
        // 0120 load -6 (cost 3), 0210 load 3 (cost 15).
        let p = RouteAdditiveProblem {
            arc_cost: cost,
            side_constraints: vec![SideConstraint {
                label: "w".into(),
                weights: w,
                bound: -5.0,
            }],
        };
        let r = solve_exact(&p).unwrap();
        assert_eq!(r.route.unwrap().order, vec![0, 1, 2, 0]);
        assert_eq!(r.objective, Some(3.0));
    }

    #[test]
    fn permutation_enumeration_is_complete() {
        let mut v = vec![1, 2, 3, 4];
        let mut count = 1;
        while next_permutation(&mut v) {
            count += 1;
        }
        assert_eq!(count, 24);
        assert_eq!(v, vec![4, 3, 2, 1]);
    }
}
