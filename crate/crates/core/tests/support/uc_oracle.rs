//! Brute-force unit commitment: every on/off pattern, one dispatch LP each.
#![allow(dead_code)]

use opsim_core::opt::{LinearConstraint, OptContainer, Sense, VarKey, VarKind};
use opsim_core::solver::{BundledSolver, Solver};
use opsim_core::system::{Bus, BusType, CostCurve, Load, SystemData, ThermalGen, ThermalInitial};

fn unit(name: &str, lim: (f64, f64), ramp: f64, up_dn: (u32, u32), costs: (f64, f64, f64), init: (bool, f64, f64)) -> ThermalGen {
    ThermalGen {
        name: name.into(),
        bus: "b".into(),
        p_min: lim.0,
        p_max: lim.1,
        ramp_up: ramp,
        ramp_dn: ramp,
        min_up: up_dn.0,
        min_dn: up_dn.1,
        variable_cost: CostCurve::Linear(costs.0),
        no_load_cost: costs.1,
        startup_cost: costs.2,
        initial: Some(ThermalInitial { on: init.0, power: init.1, duration: init.2 }),
    }
}

/// Three units, four hourly periods; loads in MW.
pub fn instance() -> (SystemData, Vec<f64>) {
    let data = SystemData {
        base_power: 100.0,
        buses: vec![Bus { name: "b".into(), base_voltage: 0.0, bus_type: BusType::Slack }],
        thermal_gens: vec![
            unit("g1", (50.0, 200.0), 80.0, (3, 2), (15.0, 100.0, 500.0), (true, 120.0, 5.0)),
            unit("g2", (20.0, 100.0), 60.0, (2, 2), (25.0, 50.0, 200.0), (false, 0.0, 1.0)),
            unit("g3", (10.0, 60.0), 60.0, (1, 1), (40.0, 20.0, 50.0), (false, 0.0, 3.0)),
        ],
        loads: vec![Load { name: "L".into(), bus: "b".into(), peak: 300.0 }],
        ..Default::default()
    };
    (data, vec![150.0, 230.0, 300.0, 180.0])
}

fn respects_min_times(on: &[bool], g: &ThermalGen) -> bool {
    let init = g.initial.unwrap();
    let h = on.len();
    let (up, dn) = (g.min_up as usize, g.min_dn as usize);
    // carry-over from the initial status
    let carried = init.duration as usize;
    if init.on && carried < up && on.iter().take(up - carried).any(|o| !o) {
        return false;
    }
    if !init.on && carried < dn && on.iter().take(dn - carried).any(|o| *o) {
        return false;
    }
    let mut prev = init.on;
    for t in 0..h {
        if on[t] && !prev && on[t..(t + up).min(h)].iter().any(|o| !o) {
            return false;
        }
        if !on[t] && prev && on[t..(t + dn).min(h)].iter().any(|o| *o) {
            return false;
        }
        prev = on[t];
    }
    true
}

/// Cheapest schedule over all 2^(units·periods) commitment patterns, in $.
pub fn enumerate(data: &SystemData, loads: &[f64]) -> Option<f64> {
    let gens = &data.thermal_gens;
    let h = loads.len();
    let bits = gens.len() * h;
    let mut best: Option<f64> = None;
    let mut solver = BundledSolver::default();
    for mask in 0u64..(1u64 << bits) {
        let on: Vec<Vec<bool>> =
            (0..gens.len()).map(|g| (0..h).map(|t| (mask >> (g * h + t)) & 1 == 1).collect()).collect();
        if gens.iter().zip(&on).any(|(g, o)| !respects_min_times(o, g)) {
            continue;
        }
        let mut fixed = 0.0;
        let mut lp = OptContainer::new("pattern");
        let mut p = vec![vec![]; gens.len()];
        for (gi, g) in gens.iter().enumerate() {
            let init = g.initial.unwrap();
            let mut prev_on = init.on;
            for t in 0..h {
                let (lb, ub) = if on[gi][t] { (g.p_min, g.p_max) } else { (0.0, 0.0) };
                let v = lp.add_variable(VarKey::new(VarKind::ActivePower, &g.name, t + 1), lb, ub, false).unwrap();
                if let CostCurve::Linear(c) = g.variable_cost {
                    lp.add_objective_coef(v, c).unwrap();
                }
                p[gi].push(v);
                if on[gi][t] {
                    fixed += g.no_load_cost;
                    if !prev_on {
                        fixed += g.startup_cost;
                    }
                }
                prev_on = on[gi][t];
            }
        }
        for t in 0..h {
            let mut row = LinearConstraint::new(format!("bal{t}"), Sense::Eq, loads[t]);
            for pg in &p {
                row = row.term(pg[t], 1.0);
            }
            lp.add_constraint(row).unwrap();
        }
        for (gi, g) in gens.iter().enumerate() {
            let init = g.initial.unwrap();
            for t in 0..h {
                let was_on = if t == 0 { init.on } else { on[gi][t - 1] };
                let start = if on[gi][t] && !was_on { g.p_min } else { 0.0 };
                let stop = if !on[gi][t] && was_on { g.p_min } else { 0.0 };
                let mut up = LinearConstraint::new(format!("ru{gi}_{t}"), Sense::Le, g.ramp_up + start).term(p[gi][t], 1.0);
                let mut dn = LinearConstraint::new(format!("rd{gi}_{t}"), Sense::Le, g.ramp_dn + stop).term(p[gi][t], -1.0);
                if t == 0 {
                    up.rhs += init.power;
                    dn.rhs -= init.power;
                } else {
                    up = up.term(p[gi][t - 1], -1.0);
                    dn = dn.term(p[gi][t - 1], 1.0);
                }
                lp.add_constraint(up).unwrap();
                lp.add_constraint(dn).unwrap();
            }
        }
        let r = solver.solve_lp(&lp);
        if r.is_optimal() {
            let total = r.objective + fixed;
            if best.map_or(true, |b| total < b) {
                best = Some(total);
            }
        }
    }
    best
}
