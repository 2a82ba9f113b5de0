use super::*;
use crate::opt::{Sense, SlotTarget, VarKind};
use crate::solver::{BundledSolver, SolveStatus, Solver, SolverOptions};
use crate::system::*;
use crate::time::{Duration, Timestamp};
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

fn bus(name: &str, slack: bool) -> Bus {
    Bus { name: name.into(), base_voltage: 230.0, bus_type: if slack { BusType::Slack } else { BusType::Pq } }
}

fn gen(name: &str, bus: &str, p_min: f64, p_max: f64, cost: f64) -> ThermalGen {
    ThermalGen {
        name: name.into(),
        bus: bus.into(),
        p_min,
        p_max,
        ramp_up: 10.0 * p_max,
        ramp_dn: 10.0 * p_max,
        min_up: 0,
        min_dn: 0,
        variable_cost: CostCurve::Linear(cost),
        no_load_cost: 0.0,
        startup_cost: 0.0,
        initial: Some(ThermalInitial { on: true, power: p_min.max(1.0).min(p_max), duration: 10.0 }),
    }
}

fn load(name: &str, bus: &str, peak: f64) -> Load {
    Load { name: name.into(), bus: bus.into(), peak }
}

fn one_bus(gens: Vec<ThermalGen>, peak: f64) -> SystemData {
    SystemData {
        base_power: 100.0,
        buses: vec![bus("b1", true)],
        thermal_gens: gens,
        loads: vec![load("L", "b1", peak)],
        ..Default::default()
    }
}

fn model(data: SystemData) -> SystemModel {
    SystemModel::new(data, vec![], vec![]).unwrap()
}

fn dispatch_template() -> ProblemTemplate {
    ProblemTemplate::economic_dispatch()
}

fn set(c: &mut OptContainer, kind: ParamKind, comp: &str, values: &[f64]) {
    for (i, v) in values.iter().enumerate() {
        c.update_parameter(&ParamKey::new(kind, comp, i + 1), *v).unwrap();
    }
}

fn build(t: &ProblemTemplate, sys: &SystemModel, h: usize, dt: f64) -> OptContainer {
    let ic = InitialConditions::from_system(sys).unwrap();
    build_problem("test", t, sys, h, dt, Some(&ic)).unwrap().container
}

fn exact() -> BundledSolver {
    BundledSolver::new(SolverOptions { mip_gap: 0.0, ..Default::default() })
}

fn val(c: &OptContainer, x: &[f64], kind: VarKind, comp: &str, t: usize) -> f64 {
    c.value_of(x, kind, comp, t).unwrap()
}

#[test]
fn semicontinuous_limits_present() {
    let sys = model(one_bus(vec![gen("g", "b1", 30.0, 100.0, 10.0)], 50.0));
    let c = build(&ProblemTemplate::unit_commitment(), &sys, 2, 1.0);
    let on = c.var_ref(VarKind::OnStatus, "g", 1).unwrap().0;
    let p = c.var_ref(VarKind::ActivePower, "g", 1).unwrap().0;
    let ub = c.row(c.constraint("ub_g_1").unwrap());
    assert_eq!(ub.sense, Sense::Le);
    assert!(ub.terms.contains(&(p, 1.0)) && ub.terms.contains(&(on, -1.0)));
    let lb = c.row(c.constraint("lb_g_1").unwrap());
    assert_eq!(lb.sense, Sense::Ge);
    assert!(lb.terms.contains(&(on, -0.3)));
    assert!(c.variables()[on].integral);
}

#[test]
fn min_down_blocks_early_start() {
    let mut g = gen("g", "b1", 0.0, 100.0, 10.0);
    g.min_dn = 2;
    g.initial = Some(ThermalInitial { on: false, power: 0.0, duration: 1.0 });
    // an expensive second unit keeps the problem feasible while g is locked off
    let mut backup = gen("h", "b1", 0.0, 100.0, 50.0);
    backup.initial = Some(ThermalInitial { on: true, power: 50.0, duration: 5.0 });
    let sys = model(one_bus(vec![g, backup], 50.0));
    let mut c = build(&ProblemTemplate::unit_commitment(), &sys, 3, 1.0);
    assert_eq!(c.param_value(&ParamKey::new(ParamKind::InitialMustStayOff, "g", 1)), Some(1.0));
    set(&mut c, ParamKind::ForecastBound, "L", &[1.0, 1.0, 1.0]);
    let r = exact().solve(&c);
    assert!(r.is_optimal());
    assert_eq!(val(&c, &r.primal, VarKind::Start, "g", 1), 0.0);
    assert_eq!(val(&c, &r.primal, VarKind::OnStatus, "g", 1), 0.0);
    // cheap unit starts as soon as allowed
    assert_eq!(val(&c, &r.primal, VarKind::OnStatus, "g", 2), 1.0);
}

#[test]
fn min_up_keeps_unit_on() {
    let mut g = gen("g", "b1", 20.0, 100.0, 90.0);
    g.min_up = 3;
    g.initial = Some(ThermalInitial { on: true, power: 20.0, duration: 1.0 });
    let sys = model(one_bus(vec![g, gen("h", "b1", 0.0, 100.0, 5.0)], 50.0));
    let mut c = build(&ProblemTemplate::unit_commitment(), &sys, 4, 1.0);
    set(&mut c, ParamKind::ForecastBound, "L", &[1.0; 4]);
    let r = exact().solve(&c);
    assert!(r.is_optimal());
    let on: Vec<f64> = (1..=4).map(|t| val(&c, &r.primal, VarKind::OnStatus, "g", t)).collect();
    assert_eq!(on, vec![1.0, 1.0, 0.0, 0.0]);
}

#[test]
fn min_up_longer_than_horizon_warns() {
    let mut g = gen("g", "b1", 0.0, 100.0, 10.0);
    g.min_up = 10;
    let sys = model(one_bus(vec![g], 50.0));
    let ic = InitialConditions::from_system(&sys).unwrap();
    let b = build_problem("t", &ProblemTemplate::unit_commitment(), &sys, 4, 1.0, Some(&ic)).unwrap();
    assert!(b.warnings.iter().any(|w| w.contains("minimum up")));
}

#[test]
fn single_gen_dispatch() {
    let sys = model(one_bus(vec![gen("g", "b1", 0.0, 100.0, 10.0)], 100.0));
    for dt in [1.0, 0.25] {
        let mut c = build(&dispatch_template(), &sys, 1, dt);
        set(&mut c, ParamKind::ForecastBound, "L", &[0.5]);
        let r = BundledSolver::default().solve(&c);
        assert!(r.is_optimal());
        assert!((val(&c, &r.primal, VarKind::ActivePower, "g", 1) - 0.5).abs() < 1e-12);
        assert!((r.objective - 500.0 * dt).abs() < 1e-9);
    }
}

#[test]
fn load_below_minimum_is_infeasible() {
    let sys = model(one_bus(vec![gen("g", "b1", 30.0, 100.0, 10.0)], 100.0));
    let mut c = build(&dispatch_template(), &sys, 1, 1.0);
    set(&mut c, ParamKind::ForecastBound, "L", &[0.2]);
    assert_eq!(BundledSolver::default().solve(&c).status, SolveStatus::Infeasible);
}

#[test]
fn ramp_limit_infeasible() {
    let mut g = gen("g", "b1", 0.0, 100.0, 10.0);
    g.ramp_up = 10.0;
    g.initial = Some(ThermalInitial { on: true, power: 40.0, duration: 5.0 });
    let sys = model(one_bus(vec![g], 100.0));
    let mut c = build(&dispatch_template(), &sys, 1, 1.0);
    set(&mut c, ParamKind::ForecastBound, "L", &[0.6]);
    assert_eq!(BundledSolver::default().solve(&c).status, SolveStatus::Infeasible);
    set(&mut c, ParamKind::ForecastBound, "L", &[0.5]);
    assert!(BundledSolver::default().solve(&c).is_optimal());
}

fn with_renewable(mut d: SystemData, rating: f64, curtail: f64) -> SystemData {
    d.renewable_gens.push(RenewableGen { name: "w".into(), bus: "b1".into(), rating, curtailment_cost: curtail });
    d
}

#[test]
fn renewable_cap_follows_forecast() {
    let sys = model(with_renewable(one_bus(vec![gen("g", "b1", 0.0, 200.0, 10.0)], 100.0), 100.0, 0.0));
    let mut c = build(&dispatch_template(), &sys, 1, 1.0);
    set(&mut c, ParamKind::ForecastBound, "w", &[0.5]);
    let row = c.row(c.constraint("re_cap_w_1").unwrap());
    assert!((row.rhs - 0.5).abs() < 1e-15);
    set(&mut c, ParamKind::ForecastBound, "L", &[0.8]);
    let r = BundledSolver::default().solve(&c);
    // free renewable energy is used to its cap
    assert!((val(&c, &r.primal, VarKind::ActivePower, "w", 1) - 0.5).abs() < 1e-12);
    set(&mut c, ParamKind::ForecastBound, "w", &[0.0]);
    let r = BundledSolver::default().solve(&c);
    assert_eq!(val(&c, &r.primal, VarKind::ActivePower, "w", 1), 0.0);
}

#[test]
fn curtailment_is_penalized() {
    let sys = model(with_renewable(one_bus(vec![gen("g", "b1", 0.0, 200.0, 10.0)], 100.0), 100.0, 5.0));
    let mut c = build(&dispatch_template(), &sys, 1, 1.0);
    set(&mut c, ParamKind::ForecastBound, "w", &[0.9]);
    set(&mut c, ParamKind::ForecastBound, "L", &[0.6]);
    let r = BundledSolver::default().solve(&c);
    // 30 MW curtailed at 5 $/MWh
    assert!((r.objective - 150.0).abs() < 1e-9, "{}", r.objective);
}

fn with_storage(mut d: SystemData, cap: f64, p: f64, eta: f64, soc0: f64) -> SystemData {
    d.storage.push(Storage {
        name: "s".into(),
        bus: "b1".into(),
        energy_cap: cap,
        p_charge_max: p,
        p_discharge_max: p,
        eff_charge: eta,
        eff_discharge: eta,
        initial_soc: Some(soc0),
    });
    d
}

#[test]
fn storage_dynamics_arithmetic() {
    let sys = model(with_storage(one_bus(vec![gen("g", "b1", 0.0, 200.0, 10.0)], 100.0), 30.0, 20.0, 1.0, 0.0));
    let c = build(&dispatch_template(), &sys, 2, 1.0);
    let mut x = vec![0.0; c.n_vars()];
    let mut put = |k: VarKind, t: usize, v: f64| x[c.var_ref(k, "s", t).unwrap().0] = v;
    put(VarKind::Charge, 1, 0.1);
    put(VarKind::Charge, 2, 0.1);
    put(VarKind::SoC, 1, 0.1);
    put(VarKind::SoC, 2, 0.2);
    let soc_rows = |x: &[f64]| {
        (1..=2).map(|t| {
            let r = c.row(c.constraint(&alloc::format!("soc_s_{t}")).unwrap());
            (c.row_activity(r, x) - r.rhs).abs()
        })
        .fold(0.0f64, f64::max)
    };
    assert!(soc_rows(&x) < 1e-15);
    x[c.var_ref(VarKind::SoC, "s", 2).unwrap().0] = 0.25;
    assert!(soc_rows(&x) > 1e-3);
}

#[test]
fn storage_capacity_limits_charging() {
    // cheap energy now, expensive later; cap 15 MWh binds
    let mut d = one_bus(vec![gen("g", "b1", 0.0, 200.0, 10.0), gen("h", "b1", 0.0, 200.0, 50.0)], 100.0);
    d.thermal_gens[0].p_max = 50.0;
    let sys = model(with_storage(d, 15.0, 10.0, 1.0, 0.0));
    let mut c = build(&dispatch_template(), &sys, 2, 1.0);
    set(&mut c, ParamKind::ForecastBound, "L", &[0.1, 0.6]);
    let r = BundledSolver::default().solve(&c);
    assert!(r.is_optimal());
    assert!(val(&c, &r.primal, VarKind::SoC, "s", 1) <= 0.15 + 1e-12);
    assert!((val(&c, &r.primal, VarKind::Charge, "s", 1) - 0.1).abs() < 1e-12);
}

#[test]
fn storage_arbitrage_hand_solution() {
    let mut d = one_bus(vec![gen("g", "b1", 0.0, 100.0, 10.0), gen("h", "b1", 0.0, 200.0, 50.0)], 100.0);
    d.loads[0].peak = 150.0;
    let sys = model(with_storage(d, 100.0, 50.0, 0.9, 0.0));
    let mut c = build(&dispatch_template(), &sys, 2, 1.0);
    set(&mut c, ParamKind::ForecastBound, "L", &[50.0 / 150.0, 1.0]);
    let r = BundledSolver::default().solve(&c);
    // charge 50 at 10 $/MWh, deliver 40.5 at t2, 9.5 MWh from the 50 $/MWh unit
    assert!((r.objective - 2475.0).abs() < 1e-8, "{}", r.objective);
}

#[test]
fn copperplate_balance_row() {
    let sys = model(one_bus(vec![gen("g1", "b1", 0.0, 100.0, 10.0), gen("g2", "b1", 0.0, 100.0, 20.0)], 70.0));
    let mut c = build(&dispatch_template(), &sys, 1, 1.0);
    set(&mut c, ParamKind::ForecastBound, "L", &[1.0]);
    let row = c.row(c.constraint("balance_1").unwrap());
    assert_eq!(row.terms.len(), 2);
    assert_eq!(row.sense, Sense::Eq);
    assert!((row.rhs - 0.7).abs() < 1e-15);
}

#[test]
fn empty_balance_rejected() {
    let d = SystemData { base_power: 100.0, buses: vec![bus("b1", true)], ..Default::default() };
    let err = build_problem("t", &dispatch_template(), &model(d), 1, 1.0, Some(&InitialConditions::default()))
        .unwrap_err();
    assert_eq!(err.to_string(), "empty balance");
}

#[test]
fn balance_dual_is_marginal_cost() {
    let sys = model(one_bus(vec![gen("g1", "b1", 0.0, 50.0, 10.0), gen("g2", "b1", 0.0, 100.0, 30.0)], 70.0));
    let mut c = build(&dispatch_template(), &sys, 1, 1.0);
    set(&mut c, ParamKind::ForecastBound, "L", &[1.0]);
    let r = BundledSolver::default().solve_lp(&c);
    let i = c.constraint("balance_1").unwrap().0;
    let y = r.duals.unwrap()[i];
    assert!((y / sys.base_power - 30.0).abs() < 1e-9, "dual {y}");
}

fn two_bus(rating: f64) -> SystemData {
    SystemData {
        base_power: 100.0,
        buses: vec![bus("b1", false), bus("b2", true)],
        lines: vec![Line { name: "l".into(), from_bus: "b1".into(), to_bus: "b2".into(), reactance: 0.1, rating }],
        thermal_gens: vec![gen("cheap", "b1", 0.0, 200.0, 10.0), gen("dear", "b2", 0.0, 200.0, 40.0)],
        loads: vec![load("L", "b2", 100.0)],
        ..Default::default()
    }
}

#[test]
fn two_bus_ptdf() {
    let sys = model(two_bus(100.0));
    let p = compute_ptdf(&sys, 1).unwrap();
    assert_eq!(p, vec![vec![1.0, 0.0]]);
}

#[test]
fn triangle_ptdf_split() {
    let d = SystemData {
        base_power: 100.0,
        buses: vec![bus("b1", false), bus("b2", false), bus("b3", true)],
        lines: vec![
            Line { name: "l13".into(), from_bus: "b1".into(), to_bus: "b3".into(), reactance: 0.1, rating: 1.0 },
            Line { name: "l12".into(), from_bus: "b1".into(), to_bus: "b2".into(), reactance: 0.1, rating: 1.0 },
            Line { name: "l23".into(), from_bus: "b2".into(), to_bus: "b3".into(), reactance: 0.1, rating: 1.0 },
        ],
        ..Default::default()
    };
    let p = compute_ptdf(&model(d), 2).unwrap();
    assert!((p[0][0] - 2.0 / 3.0).abs() < 1e-12);
    assert!((p[1][0] - 1.0 / 3.0).abs() < 1e-12);
    assert!((p[2][0] - 1.0 / 3.0).abs() < 1e-12);
    assert!(p.iter().all(|r| r[2] == 0.0));
}

#[test]
fn disconnected_network_rejected() {
    let mut d = two_bus(100.0);
    d.buses.push(bus("island", false));
    let err = compute_ptdf(&model(d), 1).unwrap_err();
    assert!(matches!(err, Error::DisconnectedNetwork(_)));
}

fn ptdf_template() -> ProblemTemplate {
    let mut t = dispatch_template();
    t.network = NetworkFormulation::PTDFDCPower;
    t
}

fn solve_two_bus(rating: f64, t: &ProblemTemplate) -> (OptContainer, crate::solver::SolveResult) {
    let sys = model(two_bus(rating));
    let mut c = build(t, &sys, 1, 1.0);
    set(&mut c, ParamKind::ForecastBound, "L", &[1.0]);
    let r = BundledSolver::default().solve(&c);
    (c, r)
}

#[test]
fn unconstrained_ptdf_matches_copperplate() {
    let (_, a) = solve_two_bus(1e4, &ptdf_template());
    let (_, b) = solve_two_bus(1e4, &dispatch_template());
    assert!((a.objective - b.objective).abs() < 1e-8);
}

#[test]
fn binding_line_changes_dispatch() {
    let (c, r) = solve_two_bus(60.0, &ptdf_template());
    assert!(r.is_optimal());
    assert!((val(&c, &r.primal, VarKind::ActivePower, "cheap", 1) - 0.6).abs() < 1e-12);
    assert!((r.objective - (600.0 + 40.0 * 40.0)).abs() < 1e-8);
}

#[test]
fn zero_rating_with_remote_load_infeasible() {
    let mut d = two_bus(0.0);
    d.thermal_gens.truncate(1);
    let sys = model(d);
    let mut c = build(&ptdf_template(), &sys, 1, 1.0);
    set(&mut c, ParamKind::ForecastBound, "L", &[1.0]);
    assert_eq!(BundledSolver::default().solve(&c).status, SolveStatus::Infeasible);
}

fn reserve_system(requirement_mw: f64, gens: Vec<ThermalGen>, peak: f64) -> SystemModel {
    let mut d = one_bus(gens, peak);
    d.reserves.push(ReserveProduct {
        name: "spin".into(),
        direction: ReserveDirection::Up,
        contributing_devices: d.thermal_gens.iter().map(|g| g.name.clone()).collect(),
        requirement_series_name: "requirement".into(),
    });
    let req = RealizationSeries {
        component: "spin".into(),
        label: "requirement".into(),
        resolution: Duration::hours(1),
        start: Timestamp(0),
        values: vec![requirement_mw],
    };
    SystemModel::new(d, vec![], vec![req]).unwrap()
}

fn reserve_run(sys: &SystemModel, t: ProblemTemplate, req_pu: f64) -> (OptContainer, crate::solver::SolveResult) {
    let t = t.service("spin", ServiceFormulation::RangeReserve);
    let mut c = build(&t, sys, 1, 1.0);
    set(&mut c, ParamKind::ForecastBound, "L", &[1.0]);
    set(&mut c, ParamKind::RequirementRhs, "spin", &[req_pu]);
    let r = exact().solve(&c);
    (c, r)
}

#[test]
fn reserve_headroom_infeasible() {
    let sys = reserve_system(10.0, vec![gen("g", "b1", 0.0, 100.0, 10.0)], 95.0);
    let (_, r) = reserve_run(&sys, ProblemTemplate::unit_commitment(), 0.1);
    assert_eq!(r.status, SolveStatus::Infeasible);
}

#[test]
fn zero_requirement_allows_zero_reserve() {
    let sys = reserve_system(0.0, vec![gen("g", "b1", 0.0, 100.0, 10.0)], 50.0);
    let (c, r) = reserve_run(&sys, ProblemTemplate::unit_commitment(), 0.0);
    assert!(r.is_optimal());
    let mut x = r.primal.clone();
    x[c.var_ref(VarKind::Reserve, "spin/g", 1).unwrap().0] = 0.0;
    assert!(c.max_violation(&x) < 1e-12);
    assert!((c.objective_value(&x) - r.objective).abs() < 1e-12);
}

#[test]
fn reserve_on_idle_unit() {
    let sys = reserve_system(
        20.0,
        vec![gen("cheap", "b1", 0.0, 100.0, 10.0), gen("dear", "b1", 0.0, 100.0, 50.0)],
        100.0,
    );
    let (c, r) = reserve_run(&sys, dispatch_template(), 0.2);
    assert!(r.is_optimal());
    assert!((val(&c, &r.primal, VarKind::ActivePower, "cheap", 1) - 1.0).abs() < 1e-12);
    assert!((val(&c, &r.primal, VarKind::Reserve, "spin/dear", 1) - 0.2).abs() < 1e-12);
}

#[test]
fn uncovered_type_named() {
    let mut t = dispatch_template();
    t.devices.remove(&ComponentType::PowerLoad);
    let sys = model(one_bus(vec![gen("g", "b1", 0.0, 100.0, 10.0)], 50.0));
    let err = build_problem("t", &t, &sys, 1, 1.0, None).unwrap_err();
    assert!(err.to_string().contains("PowerLoad"), "{err}");
}

#[test]
fn missing_initial_condition() {
    let mut d = one_bus(vec![gen("g", "b1", 0.0, 100.0, 10.0)], 50.0);
    d.thermal_gens[0].initial = None;
    let sys = model(d);
    let err = build_problem("t", &dispatch_template(), &sys, 1, 1.0, Some(&InitialConditions::default()));
    assert!(matches!(err, Err(Error::MissingInitialCondition(_))));
    // the initialization variant needs none
    assert!(build_problem("t", &dispatch_template(), &sys, 1, 1.0, None).is_ok());
}

/// Rows of `c` whose names carry `prefix`, rendered by variable and parameter keys.
fn rendered_rows(c: &OptContainer, prefixes: &[&str]) -> Vec<alloc::string::String> {
    c.rows()
        .iter()
        .enumerate()
        .filter(|(_, r)| prefixes.iter().any(|p| r.name.starts_with(p)))
        .map(|(i, r)| {
            let mut s = alloc::format!("{} {:?} {}", r.name, r.sense, r.rhs_const);
            for (j, a) in &r.terms {
                s += &alloc::format!(" {a}*{}", c.variables()[*j].key);
            }
            for p in c.params() {
                for slot in &p.slots {
                    if slot.target == SlotTarget::Rhs(i) {
                        s += &alloc::format!(" +{}*{}", slot.coef, p.key);
                    }
                }
            }
            s
        })
        .collect()
}

#[test]
fn formulation_choice_is_modular() {
    let d = with_storage(with_renewable(one_bus(vec![gen("g", "b1", 10.0, 100.0, 10.0)], 50.0), 40.0, 1.0), 30.0, 10.0, 0.9, 5.0);
    let sys = model(d);
    let uc = build(&ProblemTemplate::unit_commitment(), &sys, 3, 1.0);
    let ed = build(&dispatch_template(), &sys, 3, 1.0);
    let others = ["re_cap_", "soc_"];
    assert!(!rendered_rows(&uc, &others).is_empty());
    assert_eq!(rendered_rows(&uc, &others), rendered_rows(&ed, &others));
}

#[test]
fn commitment_never_worse_than_all_on() {
    let mut gens = vec![gen("a", "b1", 40.0, 100.0, 10.0), gen("b", "b1", 30.0, 80.0, 25.0)];
    gens[1].no_load_cost = 300.0;
    let sys = model(one_bus(gens, 100.0));
    let mut uc = build(&ProblemTemplate::unit_commitment(), &sys, 3, 1.0);
    let mut ed = build(&dispatch_template(), &sys, 3, 1.0);
    for c in [&mut uc, &mut ed] {
        set(c, ParamKind::ForecastBound, "L", &[0.9, 1.2, 0.8]);
    }
    let a = exact().solve(&uc);
    let b = exact().solve(&ed);
    assert!(a.is_optimal() && b.is_optimal());
    // dispatch carries no no-load cost; add it for the all-on schedule
    let all_on = b.objective + 300.0 * 3.0;
    assert!(a.objective <= all_on + 1e-9);
}

#[test]
fn initialization_variant_omits_initial_rows() {
    let mut g = gen("g", "b1", 10.0, 100.0, 10.0);
    g.min_up = 3;
    g.ramp_up = 20.0;
    let sys = model(one_bus(vec![g], 50.0));
    let b = build_problem("t", &ProblemTemplate::unit_commitment(), &sys, 4, 1.0, None).unwrap();
    assert!(b.container.constraint("trans_g_1").is_none());
    assert!(b.container.constraint("must_run_g_1").is_none());
    assert!(b.container.params().iter().all(|p| !p.key.kind.is_initial_condition()));
}

#[test]
fn pwl_cost_epigraph() {
    let mut g = gen("g", "b1", 0.0, 100.0, 0.0);
    g.variable_cost = CostCurve::Pwl(vec![(0.0, 0.0), (50.0, 500.0), (100.0, 1500.0)]);
    let sys = model(one_bus(vec![g], 100.0));
    let mut c = build(&dispatch_template(), &sys, 1, 1.0);
    set(&mut c, ParamKind::ForecastBound, "L", &[0.8]);
    let r = BundledSolver::default().solve(&c);
    // 500 + 30 MW at 20 $/MWh
    assert!((r.objective - 1100.0).abs() < 1e-8, "{}", r.objective);
}
