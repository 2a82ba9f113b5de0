//! Basis factorization for the revised simplex.
//!
//! Column and row singletons are peeled off first, which leaves the permuted
//! basis block upper triangular around a small "nucleus". The nucleus gets a
//! dense LU with partial pivoting. Basis changes append product-form etas
//! until the next refactorization.

use alloc::vec;
use alloc::vec::Vec;

/// Smallest magnitude accepted as a pivot.
const PIVOT_ABS: f64 = 1e-10;
/// Row-singleton pivots must be at least this fraction of their column's largest entry.
const ROW_SINGLETON_REL: f64 = 0.01;

/// Basis columns that could not be pivoted, with the rows left uncovered.
#[derive(Clone, Debug, PartialEq)]
pub struct Singular {
    pub positions: Vec<usize>,
    pub rows: Vec<usize>,
}

#[derive(Clone, Debug)]
struct Eta {
    pos: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

#[derive(Clone, Debug)]
pub struct Factor {
    m: usize,
    /// Constraint row and basis position of each pivot.
    prow: Vec<usize>,
    ppos: Vec<usize>,
    diag: Vec<f64>,
    /// Off-diagonal entries of each pivot column, keyed by the row's pivot index.
    col_start: Vec<usize>,
    col_idx: Vec<usize>,
    col_val: Vec<f64>,
    n0: usize,
    n1: usize,
    /// Dense LU of the nucleus, row-major, with its row permutation.
    lu: Vec<f64>,
    perm: Vec<usize>,
    etas: Vec<Eta>,
    eta_nnz: usize,
}

impl Factor {
    /// Factors the basis whose column at position `p` is `cols[p]` (sparse, by row).
    pub fn new(m: usize, cols: &[Vec<(usize, f64)>]) -> Result<Self, Singular> {
        debug_assert_eq!(cols.len(), m);
        let mut rows_adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        for (p, c) in cols.iter().enumerate() {
            for &(i, v) in c {
                if v != 0.0 {
                    rows_adj[i].push((p, v));
                }
            }
        }
        let mut row_active = vec![true; m];
        let mut col_active = vec![true; m];
        let mut col_count: Vec<usize> = cols.iter().map(|c| c.iter().filter(|e| e.1 != 0.0).count()).collect();
        let mut row_count: Vec<usize> = rows_adj.iter().map(Vec::len).collect();

        let mut s1: Vec<(usize, usize, f64)> = Vec::new();
        let mut queue: Vec<usize> = (0..m).filter(|&p| col_count[p] == 1).collect();
        while let Some(p) = queue.pop() {
            if !col_active[p] || col_count[p] != 1 {
                continue;
            }
            let Some(&(i, v)) = cols[p].iter().find(|(i, v)| *v != 0.0 && row_active[*i]) else { continue };
            if v.abs() < PIVOT_ABS {
                continue;
            }
            col_active[p] = false;
            row_active[i] = false;
            s1.push((i, p, v));
            for &(q, _) in &rows_adj[i] {
                if col_active[q] {
                    col_count[q] -= 1;
                    if col_count[q] == 1 {
                        queue.push(q);
                    }
                }
            }
        }

        let mut s3: Vec<(usize, usize, f64)> = Vec::new();
        for i in 0..m {
            row_count[i] = if row_active[i] { row_count_active(&rows_adj[i], &col_active) } else { 0 };
        }
        let mut queue: Vec<usize> = (0..m).filter(|&i| row_active[i] && row_count[i] == 1).collect();
        while let Some(i) = queue.pop() {
            if !row_active[i] || row_count[i] != 1 {
                continue;
            }
            let Some(&(p, v)) = rows_adj[i].iter().find(|(p, _)| col_active[*p]) else { continue };
            let cmax = cols[p]
                .iter()
                .filter(|(r, _)| row_active[*r])
                .fold(0.0f64, |a, (_, x)| a.max(x.abs()));
            if v.abs() < PIVOT_ABS || v.abs() < ROW_SINGLETON_REL * cmax {
                continue;
            }
            row_active[i] = false;
            col_active[p] = false;
            s3.push((i, p, v));
            for &(r, x) in &cols[p] {
                if x != 0.0 && row_active[r] {
                    row_count[r] -= 1;
                    if row_count[r] == 1 {
                        queue.push(r);
                    }
                }
            }
        }

        let nrows: Vec<usize> = (0..m).filter(|&i| row_active[i]).collect();
        let ncols: Vec<usize> = (0..m).filter(|&p| col_active[p]).collect();
        debug_assert_eq!(nrows.len(), ncols.len());
        let k = ncols.len();
        let n0 = s1.len();
        let n1 = n0 + k;

        let mut rowk = vec![usize::MAX; m];
        let mut prow = Vec::with_capacity(m);
        let mut ppos = Vec::with_capacity(m);
        let mut diag = Vec::with_capacity(m);
        for &(i, p, v) in &s1 {
            rowk[i] = prow.len();
            prow.push(i);
            ppos.push(p);
            diag.push(v);
        }
        for (l, &i) in nrows.iter().enumerate() {
            rowk[i] = n0 + l;
            prow.push(i);
            ppos.push(ncols[l]);
            diag.push(0.0);
        }
        for &(i, p, v) in s3.iter().rev() {
            rowk[i] = prow.len();
            prow.push(i);
            ppos.push(p);
            diag.push(v);
        }

        // nucleus
        let mut dense = vec![0.0; k * k];
        for (l, &p) in ncols.iter().enumerate() {
            for &(i, v) in &cols[p] {
                let r = rowk[i];
                if r >= n0 && r < n1 {
                    dense[(r - n0) * k + l] += v;
                }
            }
        }
        let perm = match dense_lu(&mut dense, k) {
            Ok(perm) => perm,
            Err((bad_cols, bad_rows)) => {
                return Err(Singular {
                    positions: bad_cols.iter().map(|&l| ncols[l]).collect(),
                    rows: bad_rows.iter().map(|&l| nrows[l]).collect(),
                });
            }
        };

        let mut col_start = Vec::with_capacity(m + 1);
        let mut col_idx = Vec::new();
        let mut col_val = Vec::new();
        for kk in 0..m {
            col_start.push(col_idx.len());
            let p = ppos[kk];
            for &(i, v) in &cols[p] {
                let r = rowk[i];
                let keep = if kk < n0 || kk >= n1 { r < kk } else { r < n0 };
                if v != 0.0 && keep {
                    col_idx.push(r);
                    col_val.push(v);
                }
            }
        }
        col_start.push(col_idx.len());

        Ok(Factor {
            m,
            prow,
            ppos,
            diag,
            col_start,
            col_idx,
            col_val,
            n0,
            n1,
            lu: dense,
            perm,
            etas: Vec::new(),
            eta_nnz: 0,
        })
    }

    pub fn eta_count(&self) -> usize {
        self.etas.len()
    }

    pub fn eta_nnz(&self) -> usize {
        self.eta_nnz
    }

    pub fn factor_nnz(&self) -> usize {
        self.col_idx.len() + self.lu.len()
    }

    /// Solves `B z = r`; `r` is indexed by row, the result by basis position.
    pub fn ftran(&self, r: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut w: Vec<f64> = (0..m).map(|k| r[self.prow[k]]).collect();
        let mut z = vec![0.0; m];
        for kk in (self.n1..m).rev() {
            let v = w[kk] / self.diag[kk];
            z[kk] = v;
            if v != 0.0 {
                self.scatter(kk, v, &mut w);
            }
        }
        let k = self.n1 - self.n0;
        if k > 0 {
            let zn = dense_solve(&self.lu, &self.perm, k, &w[self.n0..self.n1]);
            for (l, v) in zn.into_iter().enumerate() {
                let kk = self.n0 + l;
                z[kk] = v;
                if v != 0.0 {
                    self.scatter(kk, v, &mut w);
                }
            }
        }
        for kk in (0..self.n0).rev() {
            let v = w[kk] / self.diag[kk];
            z[kk] = v;
            if v != 0.0 {
                self.scatter(kk, v, &mut w);
            }
        }
        let mut out = vec![0.0; m];
        for kk in 0..m {
            out[self.ppos[kk]] = z[kk];
        }
        for e in &self.etas {
            let zr = out[e.pos] / e.pivot;
            out[e.pos] = zr;
            if zr != 0.0 {
                for &(i, a) in &e.entries {
                    out[i] -= a * zr;
                }
            }
        }
        out
    }

    /// Solves `Bᵀ y = c`; `c` is indexed by basis position, the result by row.
    pub fn btran(&self, c: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut c = c.to_vec();
        for e in self.etas.iter().rev() {
            let s: f64 = e.entries.iter().map(|&(i, a)| a * c[i]).sum();
            c[e.pos] = (c[e.pos] - s) / e.pivot;
        }
        let mut u = vec![0.0; m];
        for kk in 0..self.n0 {
            u[kk] = (c[self.ppos[kk]] - self.gather(kk, &u)) / self.diag[kk];
        }
        let k = self.n1 - self.n0;
        if k > 0 {
            let rhs: Vec<f64> = (self.n0..self.n1).map(|kk| c[self.ppos[kk]] - self.gather(kk, &u)).collect();
            let un = dense_solve_t(&self.lu, &self.perm, k, &rhs);
            u[self.n0..self.n1].copy_from_slice(&un);
        }
        for kk in self.n1..m {
            u[kk] = (c[self.ppos[kk]] - self.gather(kk, &u)) / self.diag[kk];
        }
        let mut y = vec![0.0; m];
        for kk in 0..m {
            y[self.prow[kk]] = u[kk];
        }
        y
    }

    /// Records that position `pos` now holds the column whose FTRAN is `alpha`.
    pub fn update(&mut self, pos: usize, alpha: &[f64]) {
        let entries: Vec<(usize, f64)> =
            alpha.iter().enumerate().filter(|&(i, a)| i != pos && *a != 0.0).map(|(i, a)| (i, *a)).collect();
        self.eta_nnz += entries.len() + 1;
        self.etas.push(Eta { pos, pivot: alpha[pos], entries });
    }

    #[inline]
    fn scatter(&self, kk: usize, v: f64, w: &mut [f64]) {
        for t in self.col_start[kk]..self.col_start[kk + 1] {
            w[self.col_idx[t]] -= self.col_val[t] * v;
        }
    }

    #[inline]
    fn gather(&self, kk: usize, u: &[f64]) -> f64 {
        (self.col_start[kk]..self.col_start[kk + 1]).map(|t| self.col_val[t] * u[self.col_idx[t]]).sum()
    }
}

fn row_count_active(adj: &[(usize, f64)], col_active: &[bool]) -> usize {
    adj.iter().filter(|(p, _)| col_active[*p]).count()
}

/// In-place `P A = L U`; returns `perm` with row `i` of `LU` being row `perm[i]` of `A`.
fn dense_lu(a: &mut [f64], k: usize) -> Result<Vec<usize>, (Vec<usize>, Vec<usize>)> {
    let mut perm: Vec<usize> = (0..k).collect();
    let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
    let tol = PIVOT_ABS * scale;
    let mut bad = Vec::new();
    // next pivot slot; lags `j` once a column turns out dependent
    let mut s = 0;
    for j in 0..k {
        let (mut best, mut r) = (0.0, s);
        for i in s..k {
            let v = a[i * k + j].abs();
            if v > best {
                best = v;
                r = i;
            }
        }
        if best <= tol {
            bad.push(j);
            continue;
        }
        if r != s {
            for c in 0..k {
                a.swap(s * k + c, r * k + c);
            }
            perm.swap(s, r);
        }
        let piv = a[s * k + j];
        for i in s + 1..k {
            let f = a[i * k + j] / piv;
            a[i * k + j] = f;
            if f != 0.0 {
                for c in j + 1..k {
                    a[i * k + c] -= f * a[s * k + c];
                }
            }
        }
        s += 1;
    }
    if bad.is_empty() {
        Ok(perm)
    } else {
        Err((bad, perm[s..].to_vec()))
    }
}

fn dense_solve(lu: &[f64], perm: &[usize], k: usize, b: &[f64]) -> Vec<f64> {
    let mut x: Vec<f64> = perm.iter().map(|&p| b[p]).collect();
    for i in 0..k {
        let s: f64 = (0..i).map(|c| lu[i * k + c] * x[c]).sum();
        x[i] -= s;
    }
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|c| lu[i * k + c] * x[c]).sum();
        x[i] = (x[i] - s) / lu[i * k + i];
    }
    x
}

fn dense_solve_t(lu: &[f64], perm: &[usize], k: usize, c: &[f64]) -> Vec<f64> {
    // Aᵀ u = c with P A = L U: Uᵀ s = c, Lᵀ t = s, u = Pᵀ t
    let mut s = c.to_vec();
    for i in 0..k {
        let acc: f64 = (0..i).map(|r| lu[r * k + i] * s[r]).sum();
        s[i] = (s[i] - acc) / lu[i * k + i];
    }
    for i in (0..k).rev() {
        let acc: f64 = (i + 1..k).map(|r| lu[r * k + i] * s[r]).sum();
        s[i] -= acc;
    }
    let mut u = vec![0.0; k];
    for (i, &p) in perm.iter().enumerate() {
        u[p] = s[i];
    }
    u
}
