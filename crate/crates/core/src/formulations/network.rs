use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{balance_row, Ctx};
use crate::error::{Error, Result};
use crate::opt::{LinearConstraint, Sense, VarKey, VarKind};
use crate::system::SystemModel;

pub(super) fn add_copperplate(ctx: &mut Ctx<'_>) -> Result<()> {
    let slack = ctx.template.balance_slack_penalty.is_some();
    for t in 1..=ctx.horizon {
        if ctx.injections[t - 1].is_empty() && ctx.withdrawals[t - 1].is_empty() {
            return Err(Error::EmptyBalance);
        }
        let mut row = LinearConstraint::new(balance_row(t), Sense::Eq, 0.0);
        for inj in &ctx.injections[t - 1] {
            row = row.term(inj.var, inj.coef);
        }
        for w in &ctx.withdrawals[t - 1] {
            row = row.param(w.param.clone(), w.coef);
        }
        if slack {
            let up = ctx.c.add_variable(VarKey::new(VarKind::BalanceSlackUp, "system", t), 0.0, f64::INFINITY, false)?;
            let dn =
                ctx.c.add_variable(VarKey::new(VarKind::BalanceSlackDown, "system", t), 0.0, f64::INFINITY, false)?;
            row = row.term(up, 1.0).term(dn, -1.0);
        }
        ctx.c.add_constraint(row)?;
    }
    Ok(())
}

pub(super) fn add_slack_objective(ctx: &mut Ctx<'_>) -> Result<()> {
    let Some(pen) = ctx.template.balance_slack_penalty else {
        return Ok(());
    };
    let w = pen * ctx.sys.base_power * ctx.dt;
    for t in 1..=ctx.horizon {
        for kind in [VarKind::BalanceSlackUp, VarKind::BalanceSlackDown] {
            let v = ctx.c.var_ref(kind, "system", t)?;
            ctx.c.add_objective_coef(v, w)?;
        }
    }
    Ok(())
}

// PTDF entries below this are structural zeros.
const PTDF_ZERO: f64 = 1e-10;

/// Two rows per line and step: `±Σ_b PTDF_{l,b}·(inj_b − load_b) <= rating_l`.
pub(super) fn add_ptdf_limits(ctx: &mut Ctx<'_>, ptdf: &[Vec<f64>]) -> Result<()> {
    let sys = ctx.sys;
    for (l, line) in sys.lines.iter().enumerate() {
        if !line.rating.is_finite() {
            continue;
        }
        for t in 1..=ctx.horizon {
            for (sign, tag) in [(1.0, "flow_ub"), (-1.0, "flow_lb")] {
                let mut row = LinearConstraint::new(format!("{tag}_{}_{t}", line.name), Sense::Le, line.rating);
                for inj in &ctx.injections[t - 1] {
                    let f = ptdf[l][inj.bus];
                    if f.abs() > PTDF_ZERO {
                        row = row.term(inj.var, sign * f * inj.coef);
                    }
                }
                for w in &ctx.withdrawals[t - 1] {
                    let f = ptdf[l][w.bus];
                    if f.abs() > PTDF_ZERO {
                        row = row.param(w.param.clone(), sign * f * w.coef);
                    }
                }
                if row.terms.is_empty() {
                    // the line carries no flow from any device at this step
                    break;
                }
                ctx.c.add_constraint(row)?;
            }
        }
    }
    Ok(())
}

/// `B_branch · A`: row `l` holds `b_l` at the from-bus and `−b_l` at the to-bus.
pub fn branch_bus_matrix(sys: &SystemModel) -> Result<Vec<Vec<f64>>> {
    let n = sys.buses.len();
    sys.lines
        .iter()
        .map(|line| {
            let f = sys.bus_index(&line.from_bus).ok_or_else(|| Error::DanglingReference(line.from_bus.clone()))?;
            let t = sys.bus_index(&line.to_bus).ok_or_else(|| Error::DanglingReference(line.to_bus.clone()))?;
            let mut row = vec![0.0; n];
            let b = 1.0 / line.reactance;
            row[f] += b;
            row[t] -= b;
            Ok(row)
        })
        .collect()
}

fn check_connected(sys: &SystemModel) -> Result<()> {
    let n = sys.buses.len();
    if n == 0 {
        return Err(Error::DisconnectedNetwork("no buses".into()));
    }
    let mut adj = vec![Vec::new(); n];
    for line in &sys.lines {
        if let (Some(f), Some(t)) = (sys.bus_index(&line.from_bus), sys.bus_index(&line.to_bus)) {
            adj[f].push(t);
            adj[t].push(f);
        }
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(b) = stack.pop() {
        for &o in &adj[b] {
            if !seen[o] {
                seen[o] = true;
                stack.push(o);
            }
        }
    }
    match seen.iter().position(|s| !s) {
        Some(i) => Err(Error::DisconnectedNetwork(format!("bus `{}` is unreachable", sys.buses[i].name))),
        None => Ok(()),
    }
}

/// Inverse of a dense square matrix by Gauss-Jordan with partial pivoting.
fn invert(mut a: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, p);
        inv.swap(col, p);
        let d = a[col][col];
        for k in 0..n {
            a[col][k] /= d;
            inv[col][k] /= d;
        }
        for i in 0..n {
            if i != col && a[i][col] != 0.0 {
                let f = a[i][col];
                for k in 0..n {
                    a[i][k] -= f * a[col][k];
                    inv[i][k] -= f * inv[col][k];
                }
            }
        }
    }
    Some(inv)
}

/// Lines × buses sensitivities of flows to injections withdrawn at `slack`.
///
/// The slack column is identically zero.
pub fn compute_ptdf(sys: &SystemModel, slack: usize) -> Result<Vec<Vec<f64>>> {
    let n = sys.buses.len();
    if slack >= n {
        return Err(Error::DanglingReference(format!("slack bus index {slack}")));
    }
    if let Some(l) = sys.lines.iter().find(|l| !(l.reactance > 0.0)) {
        return Err(Error::Invariant(format!("line `{}` has non-positive reactance", l.name)));
    }
    check_connected(sys)?;
    let bf = branch_bus_matrix(sys)?;
    // B_bus = Aᵀ·B_branch·A
    let mut bbus = vec![vec![0.0; n]; n];
    for line in &sys.lines {
        let f = sys.bus_index(&line.from_bus).expect("checked");
        let t = sys.bus_index(&line.to_bus).expect("checked");
        let b = 1.0 / line.reactance;
        bbus[f][f] += b;
        bbus[t][t] += b;
        bbus[f][t] -= b;
        bbus[t][f] -= b;
    }
    let keep: Vec<usize> = (0..n).filter(|&i| i != slack).collect();
    let reduced: Vec<Vec<f64>> = keep.iter().map(|&i| keep.iter().map(|&j| bbus[i][j]).collect()).collect();
    let x = invert(reduced).ok_or_else(|| Error::DisconnectedNetwork("singular reduced susceptance matrix".into()))?;
    let mut out = vec![vec![0.0; n]; sys.lines.len()];
    for (l, row) in bf.iter().enumerate() {
        for (cj, &j) in keep.iter().enumerate() {
            out[l][j] = keep.iter().enumerate().map(|(ci, &i)| row[i] * x[ci][cj]).sum();
        }
    }
    Ok(out)
}

/// Line flows `PTDF · injections`.
pub fn ptdf_flows(ptdf: &[Vec<f64>], injections: &[f64]) -> Vec<f64> {
    ptdf.iter().map(|r| r.iter().zip(injections).map(|(a, b)| a * b).sum()).collect()
}
