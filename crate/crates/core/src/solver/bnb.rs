//! Best-first branch and bound over the revised simplex.
//!
//! After each branching the child on the rounding side is solved at once,
//! warm from its parent's basis (a plunge); its sibling is queued. Queued
//! nodes re-solve from the root optimal basis with their accumulated bound
//! changes. Both use the dual simplex. Branching picks the most fractional
//! integer column, lowest index on ties.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::simplex::{LpProblem, LpStatus, Simplex};
use super::{lp_status, SolveResult, SolveStats, SolveStatus, SolverOptions};
use crate::math::{ceil, floor, fractionality, round};
use crate::opt::OptContainer;

struct Node {
    bound: f64,
    id: usize,
    changes: Vec<(usize, f64, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap is a max-heap: smallest bound first, then oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

fn most_fractional(x: &[f64], ints: &[usize], tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &j in ints {
        let f = fractionality(x[j]);
        if f > tol && best.map_or(true, |(_, bf)| f > bf + 1e-12) {
            best = Some((j, f));
        }
    }
    best.map(|(j, _)| j)
}

pub(crate) fn branch_and_bound(
    c: &OptContainer,
    opts: &SolverOptions,
    seed: Option<Vec<f64>>,
) -> SolveResult {
    let mut p = LpProblem::from_container(c);
    let ints: Vec<usize> = (0..p.n()).filter(|&j| c.variables()[j].integral).collect();
    for &j in &ints {
        p.lb[j] = ceil(p.lb[j] - opts.integrality_tol);
        p.ub[j] = floor(p.ub[j] + opts.integrality_tol);
    }
    let offset = c.objective_offset();
    let mut stats = SolveStats::default();
    let mut root = Simplex::new(&p);
    let st = root.solve(opts.max_iterations);
    stats.iterations = root.iterations;
    if st != LpStatus::Optimal {
        return SolveResult::failed(lp_status(st), stats, None);
    }

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    if let Some(x) = seed {
        stats.warm_started = true;
        incumbent = Some((c.objective_value(&x), x));
    }
    let gap_tol = |inc: f64| (opts.mip_gap * inc.abs()).max(1e-9 * inc.abs().max(1.0));

    let root_x = root.primal();
    let root_obj = root.objective() + offset;
    stats.nodes = 1;
    let Some(_) = most_fractional(&root_x, &ints, opts.integrality_tol) else {
        return finish(c, &ints, root_x, stats);
    };

    // rounding dive for an early incumbent
    if incumbent.is_none() {
        let mut t = root.clone();
        t.iterations = 0;
        let mut lb = p.lb.clone();
        let mut ub = p.ub.clone();
        let mut ok = true;
        for _ in 0..=ints.len() {
            let x = t.primal();
            let Some(j) = most_fractional(&x, &ints, opts.integrality_tol) else { break };
            let first = round(x[j]);
            let mut fixed = false;
            for v in [first, if first > x[j] { first - 1.0 } else { first + 1.0 }] {
                if v < lb[j] || v > ub[j] {
                    continue;
                }
                let mut trial = t.clone();
                trial.set_bounds(j, v, v);
                if trial.dual_solve(opts.max_iterations) == LpStatus::Optimal {
                    t = trial;
                    lb[j] = v;
                    ub[j] = v;
                    fixed = true;
                    break;
                }
            }
            if !fixed {
                ok = false;
                break;
            }
        }
        stats.iterations += t.iterations;
        if ok {
            let x = t.primal();
            if most_fractional(&x, &ints, opts.integrality_tol).is_none() {
                incumbent = Some((t.objective() + offset, x));
            }
        }
    }

    let mut heap = BinaryHeap::new();
    let mut next_id = 1usize;
    // Children of a solved node: the one on the rounding side is returned for
    // an immediate plunge (warm from the parent), the other goes on the heap.
    let branch = |heap: &mut BinaryHeap<Node>, changes: &[(usize, f64, f64)], x: &[f64], bound: f64, next_id: &mut usize| {
        let j = most_fractional(x, &ints, opts.integrality_tol).expect("fractional column");
        let (mut lo, mut hi) = (p.lb[j], p.ub[j]);
        for &(k, l, u) in changes {
            if k == j {
                lo = l;
                hi = u;
            }
        }
        let f = floor(x[j]);
        let down = (j, lo, f);
        let up = (j, f + 1.0, hi);
        let (first, second) = if x[j] - f >= 0.5 { (up, down) } else { (down, up) };
        let mut plunge = None;
        for (k, (j, l, u)) in [first, second].into_iter().enumerate() {
            if l > u {
                continue;
            }
            let mut ch = changes.to_vec();
            ch.push((j, l, u));
            let node = Node { bound, id: *next_id, changes: ch };
            *next_id += 1;
            if k == 0 {
                plunge = Some(node);
            } else {
                heap.push(node);
            }
        }
        plunge
    };
    let mut plunge: Option<(Node, Simplex)> = branch(&mut heap, &[], &root_x, root_obj, &mut next_id).map(|n| {
        let (j, l, u) = *n.changes.last().unwrap();
        let mut t = root.clone();
        t.set_bounds(j, l, u);
        (n, t)
    });

    loop {
        let (node, mut t) = match plunge.take() {
            Some(pt) => pt,
            None => {
                let Some(node) = heap.pop() else { break };
                if let Some((inc, _)) = &incumbent {
                    if node.bound >= inc - gap_tol(*inc) {
                        break;
                    }
                }
                let mut t = root.clone();
                for &(j, l, u) in &node.changes {
                    t.set_bounds(j, l, u);
                }
                (node, t)
            }
        };
        if let Some((inc, _)) = &incumbent {
            if node.bound >= inc - gap_tol(*inc) {
                continue;
            }
        }
        if stats.nodes >= opts.node_limit {
            return SolveResult::failed(
                SolveStatus::NodeLimit,
                stats,
                Some(format!("node limit {} reached", opts.node_limit)),
            );
        }
        stats.nodes += 1;
        t.iterations = 0;
        let st = t.dual_solve(opts.max_iterations);
        stats.iterations += t.iterations;
        match st {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => continue,
            other => return SolveResult::failed(lp_status(other), stats, None),
        }
        let obj = t.objective() + offset;
        if let Some((inc, _)) = &incumbent {
            if obj >= inc - gap_tol(*inc) {
                continue;
            }
        }
        let x = t.primal();
        if most_fractional(&x, &ints, opts.integrality_tol).is_none() {
            incumbent = Some((obj, x));
        } else if let Some(child) = branch(&mut heap, &node.changes, &x, obj, &mut next_id) {
            let (j, l, u) = *child.changes.last().unwrap();
            t.set_bounds(j, l, u);
            plunge = Some((child, t));
        }
    }

    match incumbent {
        Some((_, x)) => finish(c, &ints, x, stats),
        None => SolveResult::failed(SolveStatus::Infeasible, stats, None),
    }
}

fn finish(c: &OptContainer, ints: &[usize], mut x: Vec<f64>, stats: SolveStats) -> SolveResult {
    for &j in ints {
        x[j] = round(x[j]);
    }
    SolveResult {
        status: SolveStatus::Optimal,
        objective: c.objective_value(&x),
        primal: x,
        duals: None,
        stats,
        slack_usage: 0.0,
        diagnostic: None,
    }
}
