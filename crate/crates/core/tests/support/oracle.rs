//! Independent brute-force oracles for small LP/MILP instances.
#![allow(dead_code)]

use opsim_core::opt::{LinearConstraint, OptContainer, Sense, VarKey, VarKind, VarRef};
use rand::Rng;

/// Bounded LP in plain arrays: min c·x, rows (coefs, sense, rhs), lb <= x <= ub (all finite).
#[derive(Clone, Debug)]
pub struct SmallLp {
    pub c: Vec<f64>,
    pub lb: Vec<f64>,
    pub ub: Vec<f64>,
    pub rows: Vec<(Vec<f64>, Sense, f64)>,
    pub integral: Vec<bool>,
}

impl SmallLp {
    pub fn n(&self) -> usize {
        self.c.len()
    }

    pub fn to_container(&self) -> OptContainer {
        let mut k = OptContainer::new("oracle");
        let vars: Vec<VarRef> = (0..self.n())
            .map(|j| {
                let kind = if self.integral[j] { VarKind::OnStatus } else { VarKind::ActivePower };
                k.add_variable(VarKey::new(kind, format!("x{j}"), 1), self.lb[j], self.ub[j], self.integral[j])
                    .unwrap()
            })
            .collect();
        for (j, cj) in self.c.iter().enumerate() {
            k.add_objective_coef(vars[j], *cj).unwrap();
        }
        for (i, (a, s, b)) in self.rows.iter().enumerate() {
            let mut lc = LinearConstraint::new(format!("r{i}"), *s, *b);
            for (j, aj) in a.iter().enumerate() {
                if *aj != 0.0 {
                    lc = lc.term(vars[j], *aj);
                }
            }
            k.add_constraint(lc).unwrap();
        }
        k
    }

    fn feasible(&self, x: &[f64], tol: f64) -> bool {
        for j in 0..self.n() {
            if x[j] < self.lb[j] - tol || x[j] > self.ub[j] + tol {
                return false;
            }
        }
        self.rows.iter().all(|(a, s, b)| {
            let v: f64 = a.iter().zip(x).map(|(p, q)| p * q).sum();
            match s {
                Sense::Le => v <= b + tol,
                Sense::Ge => v >= b - tol,
                Sense::Eq => (v - b).abs() <= tol,
            }
        })
    }
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for i in 0..n {
            if i != col {
                let f = a[i][col] / a[col][col];
                if f != 0.0 {
                    for k in col..n {
                        a[i][k] -= f * a[col][k];
                    }
                    b[i] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return;
    }
    loop {
        f(&idx);
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 && idx[0] == n - k {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Minimum over all basic feasible solutions; `None` when infeasible.
pub fn vertex_enumeration(lp: &SmallLp) -> Option<f64> {
    let n = lp.n();
    if n == 0 {
        return if lp.feasible(&[], 1e-9) { Some(0.0) } else { None };
    }
    // candidate hyperplanes: rows, lower bounds, upper bounds
    let mut planes: Vec<(Vec<f64>, f64)> = lp.rows.iter().map(|(a, _, b)| (a.clone(), *b)).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lp.lb[j]));
        planes.push((e, lp.ub[j]));
    }
    let mut best: Option<f64> = None;
    combinations(planes.len(), n, &mut |sel| {
        let a: Vec<Vec<f64>> = sel.iter().map(|&i| planes[i].0.clone()).collect();
        let b: Vec<f64> = sel.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_square(a, b) {
            if lp.feasible(&x, 1e-9) {
                let obj: f64 = lp.c.iter().zip(&x).map(|(c, v)| c * v).sum();
                if best.map_or(true, |o| obj < o) {
                    best = Some(obj);
                }
            }
        }
    });
    best
}

/// Fixes every integral column in all combinations and solves the rest by vertex enumeration.
pub fn exhaustive_fixing(lp: &SmallLp) -> Option<f64> {
    let ints: Vec<usize> = (0..lp.n()).filter(|&j| lp.integral[j]).collect();
    let conts: Vec<usize> = (0..lp.n()).filter(|&j| !lp.integral[j]).collect();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1u32 << ints.len()) {
        let z: Vec<f64> = (0..ints.len()).map(|k| ((mask >> k) & 1) as f64).collect();
        if ints.iter().zip(&z).any(|(&j, v)| *v < lp.lb[j] || *v > lp.ub[j]) {
            continue;
        }
        let fixed: f64 = ints.iter().zip(&z).map(|(&j, v)| lp.c[j] * v).sum();
        let sub = SmallLp {
            c: conts.iter().map(|&j| lp.c[j]).collect(),
            lb: conts.iter().map(|&j| lp.lb[j]).collect(),
            ub: conts.iter().map(|&j| lp.ub[j]).collect(),
            rows: lp
                .rows
                .iter()
                .map(|(a, s, b)| {
                    let shift: f64 = ints.iter().zip(&z).map(|(&j, v)| a[j] * v).sum();
                    (conts.iter().map(|&j| a[j]).collect(), *s, b - shift)
                })
                .collect(),
            integral: vec![false; conts.len()],
        };
        if let Some(v) = vertex_enumeration(&sub) {
            let total = v + fixed;
            if best.map_or(true, |o| total < o) {
                best = Some(total);
            }
        }
    }
    best
}

fn coef(rng: &mut impl Rng) -> f64 {
    // quarter steps keep the instances well conditioned
    if rng.gen_bool(0.25) {
        0.0
    } else {
        (rng.gen_range(-20i32..=20) as f64) / 4.0
    }
}

/// Random bounded LP with up to `max_n` columns and `max_m` rows.
pub fn random_lp(rng: &mut impl Rng, max_n: usize, max_m: usize) -> SmallLp {
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(1..=max_m);
    let lb: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.7) { 0.0 } else { -(rng.gen_range(1..=5) as f64) }).collect();
    let ub: Vec<f64> = lb.iter().map(|l| l + rng.gen_range(1..=10) as f64).collect();
    let x0: Vec<f64> = (0..n).map(|j| rng.gen_range(lb[j]..=ub[j])).collect();
    let rows = (0..m)
        .map(|_| {
            let a: Vec<f64> = (0..n).map(|_| coef(rng)).collect();
            let act: f64 = a.iter().zip(&x0).map(|(p, q)| p * q).sum();
            // mostly feasible around x0, sometimes infeasible equalities
            let roll = rng.gen_range(0..10);
            if roll < 5 {
                (a, Sense::Le, (act + rng.gen_range(0.0..3.0) * 4.0).round() / 4.0)
            } else if roll < 9 {
                (a, Sense::Ge, (act - rng.gen_range(0.0..3.0) * 4.0).round() / 4.0)
            } else {
                (a, Sense::Eq, (rng.gen_range(-10i32..=10) as f64) / 2.0)
            }
        })
        .collect();
    SmallLp {
        c: (0..n).map(|_| coef(rng)).collect(),
        lb,
        ub,
        rows,
        integral: vec![false; n],
    }
}

/// Random MILP with `n_bin` binaries and up to 3 bounded continuous columns.
pub fn random_milp(rng: &mut impl Rng, n_bin: usize, max_m: usize) -> SmallLp {
    let n_cont = rng.gen_range(0..=3);
    let n = n_bin + n_cont;
    let m = rng.gen_range(1..=max_m);
    let mut lb = vec![0.0; n];
    let mut ub = vec![1.0; n];
    for j in n_bin..n {
        lb[j] = 0.0;
        ub[j] = rng.gen_range(1..=8) as f64;
    }
    let x0: Vec<f64> = (0..n)
        .map(|j| if j < n_bin { rng.gen_range(0..=1) as f64 } else { rng.gen_range(0.0..=ub[j]) })
        .collect();
    let rows = (0..m)
        .map(|_| {
            let a: Vec<f64> = (0..n).map(|_| coef(rng)).collect();
            let act: f64 = a.iter().zip(&x0).map(|(p, q)| p * q).sum();
            if rng.gen_bool(0.5) {
                (a, Sense::Le, (act + rng.gen_range(0.0..2.0)).floor())
            } else {
                (a, Sense::Ge, (act - rng.gen_range(0.0..2.0)).ceil())
            }
        })
        .collect();
    let mut integral = vec![false; n];
    for v in integral.iter_mut().take(n_bin) {
        *v = true;
    }
    SmallLp { c: (0..n).map(|_| coef(rng)).collect(), lb, ub, rows, integral }
}
