//! Random connected DC networks and an angle-formulation flow oracle.
#![allow(dead_code)]

use opsim_core::opt::{LinearConstraint, OptContainer, Sense, VarKey, VarKind};
use opsim_core::solver::{BundledSolver, Solver};
use opsim_core::system::{Bus, BusType, Line, SystemData, SystemModel};
use rand::Rng;

/// Random spanning tree plus a few chords; bus 0..n, slack chosen at random.
pub fn random_network(rng: &mut impl Rng, n: usize) -> (SystemModel, usize) {
    let slack = rng.gen_range(0..n);
    let buses = (0..n)
        .map(|i| Bus {
            name: format!("n{i}"),
            base_voltage: 230.0,
            bus_type: if i == slack { BusType::Slack } else { BusType::Pq },
        })
        .collect();
    let mut lines = Vec::new();
    let add = |lines: &mut Vec<Line>, a: usize, b: usize, x: f64| {
        let name = format!("l{}", lines.len());
        lines.push(Line { name, from_bus: format!("n{a}"), to_bus: format!("n{b}"), reactance: x, rating: 1.0 });
    };
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let x = rng.gen_range(0.02..0.5);
        if rng.gen_bool(0.5) {
            add(&mut lines, i, j, x);
        } else {
            add(&mut lines, j, i, x);
        }
    }
    for _ in 0..rng.gen_range(0..=n) {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            let x = rng.gen_range(0.02..0.5);
            add(&mut lines, a, b, x);
        }
    }
    let data = SystemData { base_power: 100.0, buses, lines, ..Default::default() };
    (SystemModel::new(data, vec![], vec![]).expect("valid network"), slack)
}

/// Net injections at every non-slack bus; the slack balances them.
pub fn balanced_injections(rng: &mut impl Rng, n: usize, slack: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    p[slack] = 0.0;
    p[slack] = -p.iter().sum::<f64>();
    p
}

/// Solves `f = b·(θ_from − θ_to)`, nodal balance, `θ_slack = 0` as an LP.
pub fn angle_flows(sys: &SystemModel, slack: usize, injections: &[f64]) -> Vec<f64> {
    let mut c = OptContainer::new("angles");
    let theta: Vec<_> = sys
        .buses
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let (lo, hi) = if i == slack { (0.0, 0.0) } else { (f64::NEG_INFINITY, f64::INFINITY) };
            c.add_variable(VarKey::new(VarKind::Slack, b.name.as_str(), 1), lo, hi, false).unwrap()
        })
        .collect();
    let mut incident = vec![Vec::new(); sys.buses.len()];
    for line in &sys.lines {
        let f = c.add_variable(VarKey::new(VarKind::Flow, line.name.as_str(), 1), f64::NEG_INFINITY, f64::INFINITY, false).unwrap();
        let a = sys.bus_index(&line.from_bus).unwrap();
        let b = sys.bus_index(&line.to_bus).unwrap();
        let susceptance = 1.0 / line.reactance;
        c.add_constraint(
            LinearConstraint::new(format!("ohm_{}", line.name), Sense::Eq, 0.0)
                .term(f, 1.0)
                .term(theta[a], -susceptance)
                .term(theta[b], susceptance),
        )
        .unwrap();
        incident[a].push((f, 1.0));
        incident[b].push((f, -1.0));
    }
    for (i, terms) in incident.into_iter().enumerate() {
        // the slack row is implied by the others
        if i == slack {
            continue;
        }
        let mut row = LinearConstraint::new(format!("bal_{i}"), Sense::Eq, injections[i]);
        for (f, a) in terms {
            row = row.term(f, a);
        }
        c.add_constraint(row).unwrap();
    }
    let r = BundledSolver::default().solve_lp(&c);
    assert!(r.is_optimal(), "angle LP: {:?}", r.status);
    sys.lines.iter().map(|l| c.value_of(&r.primal, VarKind::Flow, &l.name, 1).unwrap()).collect()
}

/// Bus susceptance matrix `Aᵀ·B·A` built directly from the line list.
pub fn bus_susceptance(sys: &SystemModel) -> Vec<Vec<f64>> {
    let n = sys.buses.len();
    let mut m = vec![vec![0.0; n]; n];
    for line in &sys.lines {
        let a = sys.bus_index(&line.from_bus).unwrap();
        let b = sys.bus_index(&line.to_bus).unwrap();
        let s = 1.0 / line.reactance;
        m[a][a] += s;
        m[b][b] += s;
        m[a][b] -= s;
        m[b][a] -= s;
    }
    m
}

/// Largest deviation between `PTDF·B_bus` and the branch-incidence matrix,
/// and the largest absolute row sum of `PTDF·B_bus` (slack column included).
pub fn sensitivity_identity(sys: &SystemModel, ptdf: &[Vec<f64>]) -> (f64, f64) {
    let bbus = bus_susceptance(sys);
    let n = sys.buses.len();
    let (mut dev, mut row_sum) = (0.0f64, 0.0f64);
    for (l, line) in sys.lines.iter().enumerate() {
        let a = sys.bus_index(&line.from_bus).unwrap();
        let b = sys.bus_index(&line.to_bus).unwrap();
        let mut sum = 0.0;
        for k in 0..n {
            let v: f64 = (0..n).map(|j| ptdf[l][j] * bbus[j][k]).sum();
            let expect = if k == a {
                1.0 / line.reactance
            } else if k == b {
                -1.0 / line.reactance
            } else {
                0.0
            };
            dev = dev.max((v - expect).abs());
            sum += v;
        }
        row_sum = row_sum.max(sum.abs());
    }
    (dev, row_sum)
}
