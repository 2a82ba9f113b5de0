use alloc::format;

use super::{Ctx, DeviceFormulation};
use crate::error::{Error, Result};
use crate::opt::{LinearConstraint, ParamKey, ParamKind, Sense, VarKey, VarKind};
use crate::system::{ComponentType, ReserveProduct};

// Reserve variables are keyed `product/device` so products do not collide.
pub(crate) fn reserve_component(product: &str, device: &str) -> alloc::string::String {
    format!("{product}/{device}")
}

pub(super) fn add_variables(ctx: &mut Ctx<'_>, r: &ReserveProduct) -> Result<()> {
    let sys = ctx.sys;
    for d in &r.contributing_devices {
        let g = sys
            .thermal(d)
            .ok_or_else(|| Error::Build(format!("reserve {} contributor `{d}` is not a thermal unit", r.name)))?;
        for t in 1..=ctx.horizon {
            ctx.c.add_variable(VarKey::new(VarKind::Reserve, reserve_component(&r.name, d), t), 0.0, g.p_max, false)?;
        }
    }
    Ok(())
}

pub(super) fn add_constraints(ctx: &mut Ctx<'_>, r: &ReserveProduct) -> Result<()> {
    let sys = ctx.sys;
    let uc = ctx.has(ComponentType::ThermalStandard) == Some(DeviceFormulation::ThermalStandardUnitCommitment);
    for t in 1..=ctx.horizon {
        let mut req = LinearConstraint::new(format!("res_req_{}_{t}", r.name), Sense::Ge, 0.0)
            .param(ParamKey::new(ParamKind::RequirementRhs, &r.name, t), 1.0);
        for d in &r.contributing_devices {
            let g = sys.thermal(d).expect("checked in add_variables");
            let rv = ctx.c.var_ref(VarKind::Reserve, &reserve_component(&r.name, d), t)?;
            req = req.term(rv, 1.0);
            let p = ctx.c.var_ref(VarKind::ActivePower, d, t)?;
            // p + r <= on·P^ub, or P^ub without commitment variables
            let mut head = LinearConstraint::new(format!("headroom_{}_{d}_{t}", r.name), Sense::Le, 0.0)
                .term(p, 1.0)
                .term(rv, 1.0);
            if uc {
                head = head.term(ctx.c.var_ref(VarKind::OnStatus, d, t)?, -g.p_max);
            } else {
                head.rhs = g.p_max;
            }
            ctx.c.add_constraint(head)?;
        }
        ctx.c.add_constraint(req)?;
    }
    Ok(())
}
