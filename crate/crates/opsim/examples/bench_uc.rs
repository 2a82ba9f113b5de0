//! Times the first UC solve of a configuration.
use std::path::Path;
use std::time::Instant;

use opsim::SimulationConfig;
use opsim_core::formulations::{InitialConditions, ThermalIc};
use opsim_core::problems::DecisionModel;
use opsim_core::solver::{solve_relaxation, BundledSolver, Solver};

fn main() {
    let path = std::env::args().nth(1).unwrap_or_else(|| "data/5bus/config.json".into());
    let cfg = SimulationConfig::load(Path::new(&path)).unwrap();
    let sys = opsim::load_system(&cfg.system).unwrap();
    let seq = cfg.sequence().unwrap();
    let span = cfg.span().unwrap();
    let mut ic = InitialConditions::default();
    for g in &sys.thermal_gens {
        let on = g.p_min >= 1.0;
        ic.thermal.insert(g.name.clone(), ThermalIc { on: on as u8 as f64, power: if on { g.p_min } else { 0.0 }, duration: 10.0 });
    }
    for s in &sys.storage {
        ic.storage.insert(s.name.clone(), s.energy_cap / 2.0);
    }
    let mut m = DecisionModel::build(&seq.models[0], &sys, &ic, &seq.feedforwards).unwrap();
    m.update_forecasts(&sys, span.start).unwrap();
    let c = m.container().clone();
    println!("{} vars {} rows", c.n_vars(), c.rows().len());
    let t = Instant::now();
    let r = solve_relaxation(&c, 1_000_000);
    println!("LP {:?} obj {} iters {} in {:.2}s", r.status, r.objective, r.stats.iterations, t.elapsed().as_secs_f64());
    let t = Instant::now();
    let mut opts = seq.models[0].solver.clone();
    if let Some(g) = std::env::args().nth(2) {
        opts.mip_gap = g.parse().unwrap();
    }
    let mut s = BundledSolver::new(opts);
    let r = s.solve_milp(&c);
    println!("MILP {:?} obj {} iters {} nodes {} in {:.2}s", r.status, r.objective, r.stats.iterations, r.stats.nodes, t.elapsed().as_secs_f64());
}
