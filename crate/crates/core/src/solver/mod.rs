//! Solver interface and the bundled LP/MILP engine.
//!
//! [`BundledSolver`] keeps its state for the life of a model: the last MILP
//! incumbent seeds the next search when it is still feasible after the
//! model's parameters moved.

mod bnb;
mod lu;
pub mod simplex;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::opt::{LinearConstraint, OptContainer, Sense, VarKey, VarKind};
use simplex::{LpProblem, LpStatus, Simplex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    NodeLimit,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveStats {
    pub iterations: usize,
    pub nodes: usize,
    /// Filled by callers that own a clock; zero otherwise.
    pub wall_time_s: f64,
    pub warm_started: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    pub objective: f64,
    /// Indexed like the container's variables; empty unless optimal.
    pub primal: Vec<f64>,
    /// Row duals, LP solves only.
    pub duals: Option<Vec<f64>>,
    pub stats: SolveStats,
    /// Total penalty slack used by [`Solver::relax_and_solve`].
    pub slack_usage: f64,
    pub diagnostic: Option<String>,
}

impl SolveResult {
    fn failed(status: SolveStatus, stats: SolveStats, diagnostic: Option<String>) -> Self {
        SolveResult {
            status,
            objective: f64::NAN,
            primal: Vec::new(),
            duals: None,
            stats,
            slack_usage: 0.0,
            diagnostic,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Primal values keyed by variable.
    pub fn by_key(&self, c: &OptContainer) -> BTreeMap<VarKey, f64> {
        c.variables()
            .iter()
            .zip(&self.primal)
            .map(|(v, x)| (v.key.clone(), *x))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub mip_gap: f64,
    pub node_limit: usize,
    pub integrality_tol: f64,
    /// Penalty per unit of row slack in relaxed solves, relative to the largest cost.
    pub relax_penalty: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: 50_000,
            mip_gap: 1e-6,
            node_limit: 100_000,
            integrality_tol: 1e-6,
            relax_penalty: 1e4,
        }
    }
}

/// Contract every LP/MILP engine implements.
pub trait Solver {
    fn solve_lp(&mut self, c: &OptContainer) -> SolveResult;
    fn solve_milp(&mut self, c: &OptContainer) -> SolveResult;
    fn relax_and_solve(&mut self, c: &OptContainer) -> SolveResult;

    /// MILP when the container has integer columns, LP otherwise.
    fn solve(&mut self, c: &OptContainer) -> SolveResult {
        if c.has_integers() {
            self.solve_milp(c)
        } else {
            self.solve_lp(c)
        }
    }
}

/// Dense simplex plus best-first branch and bound.
#[derive(Clone, Debug, Default)]
pub struct BundledSolver {
    pub options: SolverOptions,
    incumbent: Option<Vec<f64>>,
}

impl BundledSolver {
    pub fn new(options: SolverOptions) -> Self {
        BundledSolver { options, incumbent: None }
    }

    pub fn incumbent(&self) -> Option<&[f64]> {
        self.incumbent.as_deref()
    }

    pub fn clear_incumbent(&mut self) {
        self.incumbent = None;
    }
}

pub(crate) fn lp_status(s: LpStatus) -> SolveStatus {
    match s {
        LpStatus::Optimal => SolveStatus::Optimal,
        LpStatus::Infeasible => SolveStatus::Infeasible,
        LpStatus::Unbounded => SolveStatus::Unbounded,
        LpStatus::IterationLimit => SolveStatus::IterationLimit,
    }
}

/// Solves the LP relaxation of `c` (integrality ignored).
pub fn solve_relaxation(c: &OptContainer, max_iterations: usize) -> SolveResult {
    let p = LpProblem::from_container(c);
    let mut t = Simplex::new(&p);
    let st = t.solve(max_iterations);
    let stats = SolveStats { iterations: t.iterations, ..Default::default() };
    if st != LpStatus::Optimal {
        let diag = (st == LpStatus::IterationLimit)
            .then(|| format!("iteration limit {max_iterations} reached"));
        return SolveResult::failed(lp_status(st), stats, diag);
    }
    let primal = t.primal();
    SolveResult {
        status: SolveStatus::Optimal,
        objective: c.objective_value(&primal),
        primal,
        duals: Some(t.duals()),
        stats,
        slack_usage: 0.0,
        diagnostic: None,
    }
}

impl Solver for BundledSolver {
    fn solve_lp(&mut self, c: &OptContainer) -> SolveResult {
        solve_relaxation(c, self.options.max_iterations)
    }

    fn solve_milp(&mut self, c: &OptContainer) -> SolveResult {
        if !c.has_integers() {
            return self.solve_lp(c);
        }
        let seed = self.incumbent.take().filter(|x| {
            x.len() == c.n_vars()
                && c.max_violation(x) <= 1e-7
                && c
                    .variables()
                    .iter()
                    .zip(x)
                    .all(|(v, val)| !v.integral || crate::math::fractionality(*val) <= self.options.integrality_tol)
        });
        let res = bnb::branch_and_bound(c, &self.options, seed);
        if res.is_optimal() {
            self.incumbent = Some(res.primal.clone());
        }
        res
    }

    fn relax_and_solve(&mut self, c: &OptContainer) -> SolveResult {
        let (aug, n_orig) = slacked_relaxation(c, self.options.relax_penalty);
        let mut r = solve_relaxation(&aug, self.options.max_iterations);
        if r.is_optimal() {
            r.slack_usage = r.primal[n_orig..].iter().sum();
            r.primal.truncate(n_orig);
            r.duals = None;
            r.objective = c.objective_value(&r.primal);
        }
        r
    }
}

/// Copy of `c` with integrality dropped and a penalized slack on every row.
pub fn slacked_relaxation(c: &OptContainer, penalty: f64) -> (OptContainer, usize) {
    let mut aug = c.clone();
    let n_orig = c.n_vars();
    let cmax = c.objective().iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let pen = penalty * cmax;
    let mut slack_rows = Vec::new();
    for (i, row) in c.rows().iter().enumerate() {
        let add = |aug: &mut OptContainer, sign: f64, tag: &str| {
            let key = VarKey::new(VarKind::Slack, format!("{}#{}", row.name, tag), i + 1);
            let v = aug.add_variable(key, 0.0, f64::INFINITY, false).expect("fresh slack key");
            aug.add_objective_coef(v, pen).expect("finite penalty");
            (v, sign)
        };
        match row.sense {
            Sense::Le => slack_rows.push((i, alloc::vec![add(&mut aug, -1.0, "le")])),
            Sense::Ge => slack_rows.push((i, alloc::vec![add(&mut aug, 1.0, "ge")])),
            Sense::Eq => {
                let a = add(&mut aug, 1.0, "up");
                let b = add(&mut aug, -1.0, "dn");
                slack_rows.push((i, alloc::vec![a, b]));
            }
        }
    }
    // rebuild rows with the slack terms; parameters already folded into rhs
    let mut out = OptContainer::new(aug.name.clone());
    for v in aug.variables() {
        out.add_variable(v.key.clone(), v.lb, v.ub, false).expect("copied variable");
    }
    for (j, coef) in aug.objective().iter().enumerate() {
        out.add_objective_coef(crate::opt::VarRef(j), *coef).expect("finite objective");
    }
    out.add_objective_constant(aug.objective_offset());
    for (i, row) in c.rows().iter().enumerate() {
        let mut lc = LinearConstraint::new(row.name.clone(), row.sense, row.rhs);
        for (j, a) in &row.terms {
            lc = lc.term(crate::opt::VarRef(*j), *a);
        }
        for (v, s) in &slack_rows[i].1 {
            lc = lc.term(*v, *s);
        }
        out.add_constraint(lc).expect("copied row");
    }
    (out, n_orig)
}
