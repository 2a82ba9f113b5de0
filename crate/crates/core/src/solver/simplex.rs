//! Bounded-variable revised simplex.
//!
//! Every row `a·x (<=|=|>=) b` gets a logical column `s` with `a·x + s = b`
//! and bounds encoding the sense, so the starting basis is the identity.
//! Phase 1 minimizes the sum of basic bound violations (a composite
//! objective recomputed every iteration), phase 2 the real cost. Pricing is
//! Dantzig with a Harris two-pass ratio test; a run of degenerate pivots
//! switches to lowest-index choices until progress resumes. The basis is
//! held as a sparse LU with product-form updates. A dual simplex re-solves
//! after bound changes (branch and bound).

use alloc::vec;
use alloc::vec::Vec;

use super::lu::Factor;
use crate::opt::{OptContainer, Sense};

pub const PRIMAL_TOL: f64 = 1e-9;
pub const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 64;
const REFACTOR_ETAS: usize = 96;

/// A linear program in row form.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub cost: Vec<f64>,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    pub rows: Vec<(Vec<(usize, f64)>, Sense, f64)>,
}

impl LpProblem {
    pub fn from_container(c: &OptContainer) -> Self {
        LpProblem {
            cost: c.objective().to_vec(),
            lb: c.variables().iter().map(|v| v.lb).collect(),
            ub: c.variables().iter().map(|v| v.ub).collect(),
            rows: c.rows().iter().map(|r| (r.terms.clone(), r.sense, r.rhs)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.cost.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum NonBasic {
    Lower,
    Upper,
    /// Free column resting at zero.
    Zero,
}

const NOT_BASIC: usize = usize::MAX;

/// Working state of the simplex method.
#[derive(Clone, Debug)]
pub struct Simplex {
    m: usize,
    n: usize,
    a_start: Vec<usize>,
    a_row: Vec<usize>,
    a_val: Vec<f64>,
    b: Vec<f64>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    cost: Vec<f64>,
    head: Vec<usize>,
    /// Basis position of each column, `NOT_BASIC` otherwise.
    pos: Vec<usize>,
    state: Vec<NonBasic>,
    x: Vec<f64>,
    /// Reduced costs from the last pricing pass.
    d: Vec<f64>,
    factor: Factor,
    /// Nonbasic values changed since `x_B` was last computed.
    dirty: bool,
    dual_tol: f64,
    pub iterations: usize,
}

enum Ratio {
    Flip,
    Pivot { r: usize, step: f64, to_upper: bool },
    Unbounded,
}

fn resting_point(lb: f64, ub: f64) -> (f64, NonBasic) {
    if lb.is_finite() {
        (lb, NonBasic::Lower)
    } else if ub.is_finite() {
        (ub, NonBasic::Upper)
    } else {
        (0.0, NonBasic::Zero)
    }
}

#[inline]
fn feas_tol(bound: f64) -> f64 {
    PRIMAL_TOL * (1.0 + bound.abs().min(1e6))
}

impl Simplex {
    /// Builds the starting state with an all-logical basis.
    pub fn new(p: &LpProblem) -> Self {
        let n = p.n();
        let m = p.rows.len();
        let mut counts = vec![0usize; n + 1];
        for (terms, _, _) in &p.rows {
            for (j, _) in terms {
                counts[*j + 1] += 1;
            }
        }
        for j in 0..n {
            counts[j + 1] += counts[j];
        }
        let a_start = counts.clone();
        let mut fill = counts;
        let nnz = a_start[n];
        let mut a_row = vec![0; nnz];
        let mut a_val = vec![0.0; nnz];
        for (i, (terms, _, _)) in p.rows.iter().enumerate() {
            for &(j, a) in terms {
                a_row[fill[j]] = i;
                a_val[fill[j]] = a;
                fill[j] += 1;
            }
        }
        let mut lb = p.lb.clone();
        let mut ub = p.ub.clone();
        for (_, sense, _) in &p.rows {
            let (l, u) = match sense {
                Sense::Le => (0.0, f64::INFINITY),
                Sense::Ge => (f64::NEG_INFINITY, 0.0),
                Sense::Eq => (0.0, 0.0),
            };
            lb.push(l);
            ub.push(u);
        }
        let mut x = Vec::with_capacity(n + m);
        let mut state = Vec::with_capacity(n + m);
        for j in 0..n {
            let (v, s) = resting_point(lb[j], ub[j]);
            x.push(v);
            state.push(s);
        }
        x.resize(n + m, 0.0);
        state.resize(n + m, NonBasic::Lower);
        let mut cost = p.cost.clone();
        cost.resize(n + m, 0.0);
        let cmax = p.cost.iter().fold(1.0f64, |a, c| a.max(c.abs()));
        let head: Vec<usize> = (n..n + m).collect();
        let mut pos = vec![NOT_BASIC; n + m];
        for (i, &h) in head.iter().enumerate() {
            pos[h] = i;
        }
        let unit: Vec<Vec<(usize, f64)>> = (0..m).map(|i| vec![(i, 1.0)]).collect();
        let factor = Factor::new(m, &unit).expect("identity basis");
        let mut s = Simplex {
            m,
            n,
            a_start,
            a_row,
            a_val,
            b: p.rows.iter().map(|r| r.2).collect(),
            lb,
            ub,
            cost,
            head,
            pos,
            state,
            x,
            d: vec![0.0; n + m],
            factor,
            dirty: true,
            dual_tol: 1e-9 * cmax,
            iterations: 0,
        };
        s.recompute_basic();
        s
    }

    fn column(&self, j: usize) -> Vec<(usize, f64)> {
        if j < self.n {
            (self.a_start[j]..self.a_start[j + 1]).map(|t| (self.a_row[t], self.a_val[t])).collect()
        } else {
            vec![(j - self.n, 1.0)]
        }
    }

    #[inline]
    fn dot_column(&self, j: usize, y: &[f64]) -> f64 {
        if j < self.n {
            (self.a_start[j]..self.a_start[j + 1]).map(|t| self.a_val[t] * y[self.a_row[t]]).sum()
        } else {
            y[j - self.n]
        }
    }

    fn ftran_column(&self, j: usize) -> Vec<f64> {
        let mut r = vec![0.0; self.m];
        for (i, a) in self.column(j) {
            r[i] += a;
        }
        self.factor.ftran(&r)
    }

    /// `x_B = B⁻¹ (b − N x_N)`.
    fn recompute_basic(&mut self) {
        let mut r = self.b.clone();
        for j in 0..self.n + self.m {
            if self.pos[j] == NOT_BASIC && self.x[j] != 0.0 {
                let v = self.x[j];
                if j < self.n {
                    for t in self.a_start[j]..self.a_start[j + 1] {
                        r[self.a_row[t]] -= self.a_val[t] * v;
                    }
                } else {
                    r[j - self.n] -= v;
                }
            }
        }
        let xb = self.factor.ftran(&r);
        for (p, v) in xb.into_iter().enumerate() {
            self.x[self.head[p]] = v;
        }
        self.dirty = false;
    }

    fn make_nonbasic_at_bound(&mut self, j: usize) {
        let (l, u, v) = (self.lb[j], self.ub[j], self.x[j]);
        let (val, s) = if l.is_finite() && (!u.is_finite() || (v - l).abs() <= (u - v).abs()) {
            (l, NonBasic::Lower)
        } else if u.is_finite() {
            (u, NonBasic::Upper)
        } else {
            (0.0, NonBasic::Zero)
        };
        self.x[j] = val;
        self.state[j] = s;
        self.pos[j] = NOT_BASIC;
    }

    /// Fresh factorization; dependent columns are swapped for logicals.
    fn refactor(&mut self) {
        for _ in 0..=self.m {
            let cols: Vec<Vec<(usize, f64)>> = self.head.iter().map(|&j| self.column(j)).collect();
            match Factor::new(self.m, &cols) {
                Ok(f) => {
                    self.factor = f;
                    self.recompute_basic();
                    return;
                }
                Err(sing) => {
                    for (&p, &row) in sing.positions.iter().zip(&sing.rows) {
                        let old = self.head[p];
                        self.make_nonbasic_at_bound(old);
                        let new = self.n + row;
                        if self.pos[new] != NOT_BASIC {
                            continue;
                        }
                        self.head[p] = new;
                        self.pos[new] = p;
                    }
                }
            }
        }
        panic!("basis repair did not converge");
    }

    fn basis_change(&mut self, r: usize, q: usize, alpha: &[f64]) {
        let leaving = self.head[r];
        self.pos[leaving] = NOT_BASIC;
        self.head[r] = q;
        self.pos[q] = r;
        self.iterations += 1;
        if self.factor.eta_count() >= REFACTOR_ETAS || self.factor.eta_nnz() > 4 * self.factor.factor_nnz() + 16 * self.m {
            self.refactor();
        } else {
            self.factor.update(r, alpha);
        }
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let v = self.x[j];
        if v < self.lb[j] - feas_tol(self.lb[j]) {
            v - self.lb[j]
        } else if v > self.ub[j] + feas_tol(self.ub[j]) {
            v - self.ub[j]
        } else {
            0.0
        }
    }

    /// Reduced costs for `c_B` (basic costs by position) and nonbasic costs `cost_n`.
    fn price(&mut self, c_b: &[f64], phase1: bool) {
        let y = self.factor.btran(c_b);
        for j in 0..self.n + self.m {
            self.d[j] = if self.pos[j] != NOT_BASIC {
                0.0
            } else {
                let c = if phase1 { 0.0 } else { self.cost[j] };
                c - self.dot_column(j, &y)
            };
        }
    }

    fn eligible(&self, j: usize, tol: f64) -> Option<f64> {
        if self.pos[j] != NOT_BASIC || self.lb[j] == self.ub[j] {
            return None;
        }
        let dj = self.d[j];
        match self.state[j] {
            NonBasic::Lower if dj < -tol => Some(1.0),
            NonBasic::Upper if dj > tol => Some(-1.0),
            NonBasic::Zero if dj.abs() > tol => Some(if dj < 0.0 { 1.0 } else { -1.0 }),
            _ => None,
        }
    }

    fn primal_ratio(&self, q: usize, dir: f64, alpha: &[f64], bland: bool) -> Ratio {
        let flip = self.ub[q] - self.lb[q];
        // pass 1: largest step with bounds relaxed by the tolerance
        let mut theta = flip;
        for (p, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let b = self.head[p];
            let rate = -dir * a;
            let v = self.x[b];
            let (l, u) = (self.lb[b], self.ub[b]);
            let lim = if v < l - feas_tol(l) {
                if rate > 0.0 { (l - v) / rate } else { continue }
            } else if v > u + feas_tol(u) {
                if rate < 0.0 { (v - u) / -rate } else { continue }
            } else if rate < 0.0 {
                (v - (l - feas_tol(l))) / -rate
            } else {
                ((u + feas_tol(u)) - v) / rate
            };
            if lim < theta {
                theta = lim;
            }
        }
        if theta == f64::INFINITY {
            return Ratio::Unbounded;
        }
        if theta >= flip {
            return Ratio::Flip;
        }
        // pass 2: among steps within theta, the largest pivot
        let mut best: Option<(usize, f64, bool, f64)> = None;
        for (p, &a) in alpha.iter().enumerate() {
            if a.abs() <= PIVOT_TOL {
                continue;
            }
            let b = self.head[p];
            let rate = -dir * a;
            let v = self.x[b];
            let (l, u) = (self.lb[b], self.ub[b]);
            let (lim, to_upper) = if v < l - feas_tol(l) {
                if rate > 0.0 { ((l - v) / rate, false) } else { continue }
            } else if v > u + feas_tol(u) {
                if rate < 0.0 { ((v - u) / -rate, true) } else { continue }
            } else if rate < 0.0 {
                ((v - l) / -rate, false)
            } else {
                ((u - v) / rate, true)
            };
            if lim > theta {
                continue;
            }
            let better = match best {
                None => true,
                Some((bp, _, _, ba)) => {
                    if bland {
                        b < self.head[bp]
                    } else {
                        a.abs() > ba
                    }
                }
            };
            if better {
                best = Some((p, lim.max(0.0), to_upper, a.abs()));
            }
        }
        match best {
            Some((r, step, to_upper, _)) => Ratio::Pivot { r, step, to_upper },
            None => Ratio::Flip,
        }
    }

    fn run_primal(&mut self, max_iter: usize) -> LpStatus {
        if self.dirty {
            self.recompute_basic();
        }
        let mut bland = false;
        let mut run = 0usize;
        loop {
            if self.iterations >= max_iter {
                return LpStatus::IterationLimit;
            }
            let mut phase1 = false;
            let c_b: Vec<f64> = self
                .head
                .iter()
                .map(|&j| {
                    let inf = self.infeasibility(j);
                    if inf != 0.0 {
                        phase1 = true;
                    }
                    inf.signum() * (inf != 0.0) as u8 as f64
                })
                .collect();
            let c_b = if phase1 { c_b } else { self.head.iter().map(|&j| self.cost[j]).collect() };
            self.price(&c_b, phase1);
            let tol = if phase1 { 1e-9 } else { self.dual_tol };
            let mut q = NOT_BASIC;
            let mut dir = 0.0;
            let mut best = 0.0;
            for j in 0..self.n + self.m {
                if let Some(s) = self.eligible(j, tol) {
                    if bland {
                        q = j;
                        dir = s;
                        break;
                    }
                    if self.d[j].abs() > best {
                        best = self.d[j].abs();
                        q = j;
                        dir = s;
                    }
                }
            }
            if q == NOT_BASIC {
                if phase1 {
                    return LpStatus::Infeasible;
                }
                return LpStatus::Optimal;
            }
            let alpha = self.ftran_column(q);
            let step = match self.primal_ratio(q, dir, &alpha, bland) {
                Ratio::Unbounded => {
                    if phase1 {
                        // cannot happen with exact arithmetic; recover through a fresh factorization
                        self.refactor();
                        continue;
                    }
                    return LpStatus::Unbounded;
                }
                Ratio::Flip => {
                    let step = self.ub[q] - self.lb[q];
                    for (p, &a) in alpha.iter().enumerate() {
                        if a != 0.0 {
                            self.x[self.head[p]] -= dir * step * a;
                        }
                    }
                    self.state[q] = if dir > 0.0 { NonBasic::Upper } else { NonBasic::Lower };
                    self.x[q] = if dir > 0.0 { self.ub[q] } else { self.lb[q] };
                    self.iterations += 1;
                    step
                }
                Ratio::Pivot { r, step, to_upper } => {
                    for (p, &a) in alpha.iter().enumerate() {
                        if a != 0.0 {
                            self.x[self.head[p]] -= dir * step * a;
                        }
                    }
                    self.x[q] += dir * step;
                    let b = self.head[r];
                    self.x[b] = if to_upper { self.ub[b] } else { self.lb[b] };
                    self.state[b] = if to_upper { NonBasic::Upper } else { NonBasic::Lower };
                    self.basis_change(r, q, &alpha);
                    step
                }
            };
            if step <= 1e-12 {
                run += 1;
                if run > DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                run = 0;
                bland = false;
            }
        }
    }

    /// Two-phase primal simplex from the current basis.
    pub fn solve(&mut self, max_iter: usize) -> LpStatus {
        self.run_primal(max_iter)
    }

    /// Changes bounds of structural columns, keeping the basis.
    ///
    /// The basis stays dual feasible for boxed columns; follow with
    /// [`Simplex::dual_solve`].
    pub fn set_bounds(&mut self, j: usize, lb: f64, ub: f64) {
        self.lb[j] = lb;
        self.ub[j] = ub;
        if self.pos[j] != NOT_BASIC {
            return;
        }
        let (v, s) = if lb == ub {
            (lb, NonBasic::Lower)
        } else if self.d[j] >= 0.0 && lb.is_finite() {
            (lb, NonBasic::Lower)
        } else if ub.is_finite() {
            (ub, NonBasic::Upper)
        } else if lb.is_finite() {
            (lb, NonBasic::Lower)
        } else {
            (0.0, NonBasic::Zero)
        };
        if v != self.x[j] {
            self.dirty = true;
        }
        self.state[j] = s;
        self.x[j] = v;
    }

    /// Dual simplex from a dual feasible basis, finished by primal clean-up.
    pub fn dual_solve(&mut self, max_iter: usize) -> LpStatus {
        if self.dirty {
            self.recompute_basic();
        }
        let mut e = vec![0.0; self.m];
        let mut row = vec![0.0; self.n + self.m];
        let mut priced = false;
        loop {
            if self.iterations >= max_iter {
                return LpStatus::IterationLimit;
            }
            let mut r = NOT_BASIC;
            let mut worst = 0.0;
            for p in 0..self.m {
                let v = self.infeasibility(self.head[p]).abs();
                if v > worst {
                    worst = v;
                    r = p;
                }
            }
            if r == NOT_BASIC {
                return self.run_primal(max_iter);
            }
            let b = self.head[r];
            let below = self.x[b] < self.lb[b];
            let target = if below { self.lb[b] } else { self.ub[b] };
            // reduced costs are carried across pivots and refreshed on refactor
            if !priced || self.factor.eta_count() == 0 {
                let c_b: Vec<f64> = self.head.iter().map(|&j| self.cost[j]).collect();
                self.price(&c_b, false);
                priced = true;
            }
            e[r] = 1.0;
            let rho = self.factor.btran(&e);
            e[r] = 0.0;
            // pass 1: Harris bound on the dual step
            let mut cand: Vec<(usize, f64, f64)> = Vec::new();
            let mut theta = f64::INFINITY;
            for j in 0..self.n + self.m {
                if self.pos[j] != NOT_BASIC {
                    continue;
                }
                let a = self.dot_column(j, &rho);
                row[j] = a;
                if self.lb[j] == self.ub[j] || a.abs() <= PIVOT_TOL {
                    continue;
                }
                let ok = match (self.state[j], below) {
                    (NonBasic::Lower, true) => a < 0.0,
                    (NonBasic::Upper, true) => a > 0.0,
                    (NonBasic::Lower, false) => a > 0.0,
                    (NonBasic::Upper, false) => a < 0.0,
                    (NonBasic::Zero, _) => true,
                };
                if !ok {
                    continue;
                }
                let dj = self.d[j].abs();
                theta = theta.min((dj + self.dual_tol) / a.abs());
                cand.push((j, a, dj / a.abs()));
            }
            if cand.is_empty() {
                return LpStatus::Infeasible;
            }
            let mut q = NOT_BASIC;
            let mut best = 0.0;
            for &(j, a, ratio) in &cand {
                if ratio <= theta && a.abs() > best {
                    best = a.abs();
                    q = j;
                }
            }
            let alpha = self.ftran_column(q);
            let a_rq = alpha[r];
            if a_rq.abs() <= PIVOT_TOL {
                self.refactor();
                continue;
            }
            let delta = (self.x[b] - target) / a_rq;
            for (p, &a) in alpha.iter().enumerate() {
                if a != 0.0 {
                    self.x[self.head[p]] -= a * delta;
                }
            }
            self.x[q] += delta;
            self.x[b] = target;
            self.state[b] = if below { NonBasic::Lower } else { NonBasic::Upper };
            let step = self.d[q] / row[q];
            for j in 0..self.n + self.m {
                if self.pos[j] == NOT_BASIC {
                    self.d[j] -= step * row[j];
                }
                row[j] = 0.0;
            }
            self.d[q] = 0.0;
            self.d[b] = -step;
            self.basis_change(r, q, &alpha);
        }
    }

    /// Values of the structural columns.
    pub fn primal(&self) -> Vec<f64> {
        self.x[..self.n].to_vec()
    }

    /// Row duals `y = c_B·B⁻¹`.
    pub fn duals(&self) -> Vec<f64> {
        let c_b: Vec<f64> = self.head.iter().map(|&j| self.cost[j]).collect();
        self.factor.btran(&c_b)
    }

    pub fn objective(&self) -> f64 {
        self.cost[..self.n].iter().zip(&self.x[..self.n]).map(|(c, x)| c * x).sum()
    }
}
