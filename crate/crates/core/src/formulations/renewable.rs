use alloc::format;

use super::Ctx;
use crate::error::Result;
use crate::opt::{LinearConstraint, ParamKey, ParamKind, Sense, SlotTarget, VarKey, VarKind};

pub(super) fn add_renewable_variables(ctx: &mut Ctx<'_>) -> Result<()> {
    let sys = ctx.sys;
    for r in &sys.renewable_gens {
        let bus = ctx.bus(&r.bus)?;
        for t in 1..=ctx.horizon {
            let p = ctx.c.add_variable(VarKey::new(VarKind::ActivePower, &r.name, t), 0.0, r.rating, false)?;
            ctx.inject(t, bus, p, 1.0);
        }
    }
    Ok(())
}

pub(super) fn add_load_withdrawals(ctx: &mut Ctx<'_>) -> Result<()> {
    let sys = ctx.sys;
    for l in &sys.loads {
        let bus = ctx.bus(&l.bus)?;
        for t in 1..=ctx.horizon {
            ctx.withdraw(t, bus, ParamKey::new(ParamKind::ForecastBound, &l.name, t), l.peak);
        }
    }
    Ok(())
}

pub(super) fn add_renewable_constraints(ctx: &mut Ctx<'_>) -> Result<()> {
    let sys = ctx.sys;
    for r in &sys.renewable_gens {
        for t in 1..=ctx.horizon {
            let p = ctx.c.var_ref(VarKind::ActivePower, &r.name, t)?;
            // p <= availability · rating, availability updated per execution
            ctx.c.add_constraint(
                LinearConstraint::new(format!("re_cap_{}_{t}", r.name), Sense::Le, 0.0)
                    .term(p, 1.0)
                    .param(ParamKey::new(ParamKind::ForecastBound, &r.name, t), r.rating),
            )?;
        }
    }
    Ok(())
}

/// Curtailment penalty `cost · (availability·rating − p)`.
pub(super) fn add_renewable_objective(ctx: &mut Ctx<'_>) -> Result<()> {
    let sys = ctx.sys;
    for r in &sys.renewable_gens {
        if r.curtailment_cost == 0.0 {
            continue;
        }
        let w = r.curtailment_cost * sys.base_power * ctx.dt;
        for t in 1..=ctx.horizon {
            let p = ctx.c.var_ref(VarKind::ActivePower, &r.name, t)?;
            ctx.c.add_objective_coef(p, -w)?;
            ctx.c.bind_param(
                ParamKey::new(ParamKind::ForecastBound, &r.name, t),
                SlotTarget::ObjectiveConstant,
                w * r.rating,
            )?;
        }
    }
    Ok(())
}
