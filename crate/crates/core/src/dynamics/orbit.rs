//! Iterates of the Poincaré map.

use serde::Serialize;

use super::invariant::InvariantSetParams;
use super::poincare::poincare_map;
use super::{Direction, IntegratorSettings};
use crate::error::{Error, Result};
use crate::resonance::SystemConfig;
use crate::special::PolarState;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitTrace {
    pub direction: Direction,
    /// Initial state followed by one entry per iterate.
    pub states: Vec<PolarState>,
    /// Membership in `E` per state (all false without a set).
    pub in_set: Vec<bool>,
    /// `x_i² + ẋ_i²` at the section times.
    pub energies: Vec<[f64; 2]>,
}

impl OrbitTrace {
    pub fn min_radii(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.min_radius()).collect()
    }

    /// True when both radii increase strictly from each iterate to the next.
    pub fn strictly_growing(&self) -> bool {
        self.states.windows(2).all(|w| w[1].r1 > w[0].r1 && w[1].r2 > w[0].r2)
    }
}

pub fn iterate_orbit(
    cfg: &SystemConfig,
    s0: PolarState,
    iterates: usize,
    direction: Direction,
    st: &IntegratorSettings,
    set: Option<&InvariantSetParams>,
) -> Result<OrbitTrace> {
    if iterates == 0 {
        return Err(Error::InvalidArgument("orbit needs at least one iterate".into()));
    }
    let energy = |s: &PolarState| -> Result<[f64; 2]> {
        let c = s.to_cartesian(&cfg.pair1, &cfg.pair2)?;
        Ok([c.x1 * c.x1 + c.y1 * c.y1, c.x2 * c.x2 + c.y2 * c.y2])
    };
    let member = |s: &PolarState| set.is_some_and(|p| p.contains(s));
    let mut trace = OrbitTrace {
        direction,
        states: vec![s0],
        in_set: vec![member(&s0)],
        energies: vec![energy(&s0)?],
    };
    let mut s = s0;
    for _ in 0..iterates {
        s = poincare_map(cfg, s, direction, st)?;
        trace.in_set.push(member(&s));
        trace.energies.push(energy(&s)?);
        trace.states.push(s);
    }
    Ok(trace)
}
