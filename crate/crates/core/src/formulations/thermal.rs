use alloc::format;

use super::{steps_for, Ctx, DeviceFormulation};
use crate::error::Result;
use crate::opt::{LinearConstraint, ParamKey, ParamKind, Sense, VarKey, VarKind, VarRef};
use crate::system::{CostCurve, ThermalGen};

fn is_uc(f: DeviceFormulation) -> bool {
    f == DeviceFormulation::ThermalStandardUnitCommitment
}

pub(super) fn add_variables(ctx: &mut Ctx<'_>, f: DeviceFormulation) -> Result<()> {
    let sys = ctx.sys;
    for g in &sys.thermal_gens {
        let bus = ctx.bus(&g.bus)?;
        for t in 1..=ctx.horizon {
            let p = ctx.c.add_variable(VarKey::new(VarKind::ActivePower, &g.name, t), 0.0, g.p_max, false)?;
            ctx.inject(t, bus, p, 1.0);
            if is_uc(f) {
                ctx.c.add_variable(VarKey::new(VarKind::OnStatus, &g.name, t), 0.0, 1.0, true)?;
                ctx.c.add_variable(VarKey::new(VarKind::Start, &g.name, t), 0.0, 1.0, true)?;
                ctx.c.add_variable(VarKey::new(VarKind::Stop, &g.name, t), 0.0, 1.0, true)?;
            }
            if matches!(g.variable_cost, CostCurve::Pwl(_)) {
                ctx.c.add_variable(VarKey::new(VarKind::ProductionCost, &g.name, t), 0.0, f64::INFINITY, false)?;
            }
        }
    }
    Ok(())
}

fn v(ctx: &Ctx<'_>, kind: VarKind, g: &ThermalGen, t: usize) -> Result<VarRef> {
    ctx.c.var_ref(kind, &g.name, t)
}

pub(super) fn add_constraints(ctx: &mut Ctx<'_>, f: DeviceFormulation) -> Result<()> {
    let sys = ctx.sys;
    for g in &sys.thermal_gens {
        if is_uc(f) {
            commitment_rows(ctx, g)?;
        } else {
            dispatch_rows(ctx, g)?;
        }
        ramp_rows(ctx, g, is_uc(f))?;
        if is_uc(f) {
            min_up_down_rows(ctx, g)?;
        }
        if let CostCurve::Pwl(_) = &g.variable_cost {
            pwl_rows(ctx, g, is_uc(f))?;
        }
    }
    Ok(())
}

fn commitment_rows(ctx: &mut Ctx<'_>, g: &ThermalGen) -> Result<()> {
    let n = &g.name;
    for t in 1..=ctx.horizon {
        let p = v(ctx, VarKind::ActivePower, g, t)?;
        let on = v(ctx, VarKind::OnStatus, g, t)?;
        let start = v(ctx, VarKind::Start, g, t)?;
        let stop = v(ctx, VarKind::Stop, g, t)?;
        // on·P^lb <= p <= on·P^ub
        ctx.c.add_constraint(LinearConstraint::new(format!("ub_{n}_{t}"), Sense::Le, 0.0).term(p, 1.0).term(on, -g.p_max))?;
        if g.p_min > 0.0 {
            ctx.c.add_constraint(
                LinearConstraint::new(format!("lb_{n}_{t}"), Sense::Ge, 0.0).term(p, 1.0).term(on, -g.p_min),
            )?;
        }
        let trans = LinearConstraint::new(format!("trans_{n}_{t}"), Sense::Eq, 0.0)
            .term(start, 1.0)
            .term(stop, -1.0)
            .term(on, -1.0);
        if t > 1 {
            let prev = v(ctx, VarKind::OnStatus, g, t - 1)?;
            ctx.c.add_constraint(trans.term(prev, 1.0))?;
        } else if !ctx.is_init() {
            ctx.c.add_constraint(trans.param(ParamKey::new(ParamKind::InitialOnStatus, n, 0), -1.0))?;
        }
        ctx.c.add_constraint(
            LinearConstraint::new(format!("startstop_{n}_{t}"), Sense::Le, 1.0).term(start, 1.0).term(stop, 1.0),
        )?;
    }
    Ok(())
}

fn dispatch_rows(ctx: &mut Ctx<'_>, g: &ThermalGen) -> Result<()> {
    if g.p_min <= 0.0 {
        return Ok(());
    }
    for t in 1..=ctx.horizon {
        let p = v(ctx, VarKind::ActivePower, g, t)?;
        ctx.c.add_constraint(LinearConstraint::new(format!("lb_{}_{t}", g.name), Sense::Ge, g.p_min).term(p, 1.0))?;
    }
    Ok(())
}

fn ramp_rows(ctx: &mut Ctx<'_>, g: &ThermalGen, uc: bool) -> Result<()> {
    let n = &g.name;
    let (ru, rd) = (g.ramp_up * ctx.dt, g.ramp_dn * ctx.dt);
    let p0 = ParamKey::new(ParamKind::InitialPower, n, 0);
    for t in 1..=ctx.horizon {
        if t == 1 && ctx.is_init() {
            continue;
        }
        let p = v(ctx, VarKind::ActivePower, g, t)?;
        let prev = if t > 1 { Some(v(ctx, VarKind::ActivePower, g, t - 1)?) } else { None };
        // a ramp limit covering the full range can never bind
        if ru < g.p_max {
            let mut row = LinearConstraint::new(format!("ramp_up_{n}_{t}"), Sense::Le, ru).term(p, 1.0);
            row = match prev {
                Some(q) => row.term(q, -1.0),
                None => row.param(p0.clone(), 1.0),
            };
            if uc && g.p_min > 0.0 {
                row = row.term(v(ctx, VarKind::Start, g, t)?, -g.p_min);
            }
            ctx.c.add_constraint(row)?;
        }
        if rd < g.p_max {
            let mut row = LinearConstraint::new(format!("ramp_dn_{n}_{t}"), Sense::Le, rd).term(p, -1.0);
            row = match prev {
                Some(q) => row.term(q, 1.0),
                None => row.param(p0.clone(), -1.0),
            };
            if uc && g.p_min > 0.0 {
                row = row.term(v(ctx, VarKind::Stop, g, t)?, -g.p_min);
            }
            ctx.c.add_constraint(row)?;
        }
    }
    Ok(())
}

fn min_up_down_rows(ctx: &mut Ctx<'_>, g: &ThermalGen) -> Result<()> {
    let n = &g.name;
    let h = ctx.horizon;
    let window = |limit: u32, what: &str, ctx: &mut Ctx<'_>| -> usize {
        let steps = steps_for(limit as f64, ctx.dt);
        if steps > h {
            ctx.warnings.push(format!("{what} time of {n} exceeds the horizon; window truncated to {h} steps"));
            h
        } else {
            steps
        }
    };
    let up = window(g.min_up, "minimum up", ctx);
    let dn = window(g.min_dn, "minimum down", ctx);
    if up > 1 {
        for t in 1..=h {
            let on = v(ctx, VarKind::OnStatus, g, t)?;
            let mut row = LinearConstraint::new(format!("min_up_{n}_{t}"), Sense::Le, 0.0).term(on, -1.0);
            for s in t.saturating_sub(up - 1).max(1)..=t {
                row = row.term(v(ctx, VarKind::Start, g, s)?, 1.0);
            }
            ctx.c.add_constraint(row)?;
        }
        if !ctx.is_init() {
            for t in 1..up {
                let on = v(ctx, VarKind::OnStatus, g, t)?;
                ctx.c.add_constraint(
                    LinearConstraint::new(format!("must_run_{n}_{t}"), Sense::Ge, 0.0)
                        .term(on, 1.0)
                        .param(ParamKey::new(ParamKind::InitialMustRun, n, t), 1.0),
                )?;
            }
        }
    }
    if dn > 1 {
        for t in 1..=h {
            let on = v(ctx, VarKind::OnStatus, g, t)?;
            let mut row = LinearConstraint::new(format!("min_dn_{n}_{t}"), Sense::Le, 1.0).term(on, 1.0);
            for s in t.saturating_sub(dn - 1).max(1)..=t {
                row = row.term(v(ctx, VarKind::Stop, g, s)?, 1.0);
            }
            ctx.c.add_constraint(row)?;
        }
        if !ctx.is_init() {
            for t in 1..dn {
                let on = v(ctx, VarKind::OnStatus, g, t)?;
                ctx.c.add_constraint(
                    LinearConstraint::new(format!("must_off_{n}_{t}"), Sense::Le, 1.0)
                        .term(on, 1.0)
                        .param(ParamKey::new(ParamKind::InitialMustStayOff, n, t), -1.0),
                )?;
            }
        }
    }
    Ok(())
}

fn pwl_rows(ctx: &mut Ctx<'_>, g: &ThermalGen, uc: bool) -> Result<()> {
    let segs = g.variable_cost.segments();
    for t in 1..=ctx.horizon {
        let p = v(ctx, VarKind::ActivePower, g, t)?;
        let cost = v(ctx, VarKind::ProductionCost, g, t)?;
        for (k, (slope, icpt)) in segs.iter().enumerate() {
            // cost >= slope·p + intercept (intercept scaled by on in commitment models)
            let mut row = LinearConstraint::new(format!("pwl_{}_{k}_{t}", g.name), Sense::Le, 0.0)
                .term(p, *slope)
                .term(cost, -1.0);
            if uc {
                if *icpt != 0.0 {
                    row = row.term(v(ctx, VarKind::OnStatus, g, t)?, *icpt);
                }
            } else {
                row.rhs = -icpt;
            }
            ctx.c.add_constraint(row)?;
        }
    }
    Ok(())
}

pub(super) fn add_objective(ctx: &mut Ctx<'_>, f: DeviceFormulation) -> Result<()> {
    let sys = ctx.sys;
    let dt = ctx.dt;
    for g in &sys.thermal_gens {
        for t in 1..=ctx.horizon {
            match &g.variable_cost {
                CostCurve::Linear(c) => {
                    let p = v(ctx, VarKind::ActivePower, g, t)?;
                    ctx.c.add_objective_coef(p, c * dt)?;
                }
                CostCurve::Pwl(_) => {
                    let cost = v(ctx, VarKind::ProductionCost, g, t)?;
                    ctx.c.add_objective_coef(cost, dt)?;
                }
            }
            if is_uc(f) {
                if g.no_load_cost != 0.0 {
                    let on = v(ctx, VarKind::OnStatus, g, t)?;
                    ctx.c.add_objective_coef(on, g.no_load_cost * dt)?;
                }
                if g.startup_cost != 0.0 {
                    let s = v(ctx, VarKind::Start, g, t)?;
                    ctx.c.add_objective_coef(s, g.startup_cost)?;
                }
            }
        }
    }
    Ok(())
}
