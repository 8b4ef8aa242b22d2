//! Time integration, the Poincaré map in action-angle coordinates, invariant
//! sets around zeros of `L` and orbit iteration.

mod integrator;
mod invariant;
mod orbit;
mod poincare;

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

pub use integrator::{dopri5, IntegratorSettings, Method, StepStats};
pub use invariant::{
    choose_invariant_set, choose_invariant_set_with, verify_invariance, verify_invariance_with, InvariantSetParams,
    InvarianceReport, RemainderBounds, SearchOptions,
};
pub use orbit::{iterate_orbit, OrbitTrace};
pub use poincare::{asymptotic_residual, flow_polar, poincare_map, poincare_map_traced, AsymptoticResidual, RADIUS_FLOOR};

use crate::error::Result;
use crate::resonance::SystemConfig;
use crate::special::CartesianState;

/// Time direction of the Poincaré map. `Backward` is the inverse map, used
/// around zeros whose Jacobian is a D- matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Forward,
    Backward,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Forward => 1.0,
            Direction::Backward => -1.0,
        }
    }

    /// End time of one period starting at 0.
    pub fn period_end(self) -> f64 {
        self.sign() * TAU
    }
}

impl std::str::FromStr for Direction {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "forward" => Ok(Direction::Forward),
            "backward" => Ok(Direction::Backward),
            other => Err(format!("unknown direction {other:?} (expected forward or backward)")),
        }
    }
}

impl std::fmt::Display for Direction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        })
    }
}

fn field(cfg: &SystemConfig, t: f64, s: &[f64; 4]) -> [f64; 4] {
    let [x1, x2, y1, y2] = *s;
    let restoring = |a: f64, b: f64, x: f64| if x >= 0.0 { a * x } else { b * x };
    [
        y1,
        y2,
        cfg.p1.eval(t) - restoring(cfg.pair1.a(), cfg.pair1.b(), x1) - cfg.phi1.eval(x2),
        cfg.p2.eval(t) - restoring(cfg.pair2.a(), cfg.pair2.b(), x2) - cfg.phi2.eval(x1),
    ]
}

/// `(ẋ₁, ẋ₂, ẏ₁, ẏ₂)` of the coupled system.
pub fn vector_field(cfg: &SystemConfig, t: f64, s: CartesianState) -> CartesianState {
    CartesianState::from_array(field(cfg, t, &s.to_array()))
}

/// Cartesian state at `t1` from `s0` at `t0`.
pub fn integrate(cfg: &SystemConfig, s0: CartesianState, t0: f64, t1: f64, st: &IntegratorSettings) -> Result<CartesianState> {
    let (y, _) = dopri5(|t, y| field(cfg, t, y), t0, s0.to_array(), t1, st, |_, _| Ok(()))?;
    Ok(CartesianState::from_array(y))
}
