use alloc::format;

use super::Ctx;
use crate::error::Result;
use crate::opt::{LinearConstraint, ParamKey, ParamKind, Sense, VarKey, VarKind};

pub(super) fn add_variables(ctx: &mut Ctx<'_>) -> Result<()> {
    let sys = ctx.sys;
    for s in &sys.storage {
        let bus = ctx.bus(&s.bus)?;
        for t in 1..=ctx.horizon {
            ctx.c.add_variable(VarKey::new(VarKind::SoC, &s.name, t), 0.0, s.energy_cap, false)?;
            let ch = ctx.c.add_variable(VarKey::new(VarKind::Charge, &s.name, t), 0.0, s.p_charge_max, false)?;
            let dis =
                ctx.c.add_variable(VarKey::new(VarKind::Discharge, &s.name, t), 0.0, s.p_discharge_max, false)?;
            ctx.inject(t, bus, dis, 1.0);
            ctx.inject(t, bus, ch, -1.0);
        }
    }
    Ok(())
}

/// `SoC_t = SoC_{t-1} + (η_c·ch − dis/η_d)·Δt`.
pub(super) fn add_constraints(ctx: &mut Ctx<'_>) -> Result<()> {
    let sys = ctx.sys;
    for s in &sys.storage {
        for t in 1..=ctx.horizon {
            if t == 1 && ctx.is_init() {
                continue;
            }
            let soc = ctx.c.var_ref(VarKind::SoC, &s.name, t)?;
            let ch = ctx.c.var_ref(VarKind::Charge, &s.name, t)?;
            let dis = ctx.c.var_ref(VarKind::Discharge, &s.name, t)?;
            let mut row = LinearConstraint::new(format!("soc_{}_{t}", s.name), Sense::Eq, 0.0)
                .term(soc, 1.0)
                .term(ch, -s.eff_charge * ctx.dt)
                .term(dis, ctx.dt / s.eff_discharge);
            row = if t > 1 {
                row.term(ctx.c.var_ref(VarKind::SoC, &s.name, t - 1)?, -1.0)
            } else {
                row.param(ParamKey::new(ParamKind::InitialSoC, &s.name, 0), 1.0)
            };
            ctx.c.add_constraint(row)?;
        }
    }
    Ok(())
}
