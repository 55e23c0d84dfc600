//! Kronecker–Weyl minimality decisions on exact frequency shadows.

use super::handle::SystemHandle;
use super::torus::ExactShadow;
use crate::algebra::{rationally_independent_in, Independence, SymbolicReal};
use crate::error::{invalid, Error, Result};

fn shadow_of(sys: &SystemHandle) -> Result<&ExactShadow> {
    match sys {
        SystemHandle::TorusFlow(f) => f.shadow(),
        SystemHandle::TorusMap(m) => m.shadow(),
        SystemHandle::HeisenbergFlow(f) | SystemHandle::HeisenbergMap(f) => f.shadow(),
        SystemHandle::Suspension(_) => return Err(Error::UnsupportedSystem("suspension")),
    }
    .ok_or(Error::MissingShadow)
}

/// Linear flow with frequencies `x` is minimal iff the `x_i` are independent.
/// A nilflow is minimal iff its `T²` rotation factor is.
pub fn flow_decision(sys: &SystemHandle) -> Result<Independence> {
    match sys {
        SystemHandle::TorusFlow(_) | SystemHandle::HeisenbergFlow(_) => {
            let sh = shadow_of(sys)?;
            rationally_independent_in(&sh.basis, &sh.freqs)
        }
        _ => Err(Error::UnsupportedSystem("flow minimality of a discrete system")),
    }
}

pub fn flow_minimal(sys: &SystemHandle) -> Result<bool> {
    Ok(flow_decision(sys)?.is_independent())
}

/// Rotation by `x` (or the nilsystem over it) is minimal iff `1, x_1, …` are independent.
pub fn map_decision(sys: &SystemHandle) -> Result<Independence> {
    match sys {
        SystemHandle::TorusMap(_) | SystemHandle::HeisenbergMap(_) => {
            let sh = shadow_of(sys)?;
            let mut vals = vec![SymbolicReal::one()];
            vals.extend(sh.freqs.iter().cloned());
            rationally_independent_in(&sh.basis, &vals)
        }
        _ => Err(Error::UnsupportedSystem("map minimality of a flow")),
    }
}

pub fn map_minimal(sys: &SystemHandle) -> Result<bool> {
    Ok(map_decision(sys)?.is_independent())
}

/// Decides minimality of the time-`t` map from `(1, x_1 t, …, x_n t)`.
///
/// Every product `x_i · t` must be expressible in the declared basis.
pub fn time_t_decision(sys: &SystemHandle, t: &SymbolicReal) -> Result<Independence> {
    if t.is_zero() {
        return Err(invalid("t", "time must be nonzero"));
    }
    let sh = match sys {
        SystemHandle::TorusFlow(_) | SystemHandle::HeisenbergFlow(_) => shadow_of(sys)?,
        _ => return Err(Error::UnsupportedSystem("time-t maps of a discrete system")),
    };
    sh.basis.check_members(std::slice::from_ref(t))?;
    let mut vals = vec![SymbolicReal::one()];
    for x in &sh.freqs {
        vals.push(x.mul(t, &sh.basis)?);
    }
    rationally_independent_in(&sh.basis, &vals)
}

pub fn time_t_minimal(sys: &SystemHandle, t: &SymbolicReal) -> Result<bool> {
    Ok(time_t_decision(sys, t)?.is_independent())
}
