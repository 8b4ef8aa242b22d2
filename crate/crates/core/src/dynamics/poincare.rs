//! Poincaré map of the 2π-periodic system, conjugated to action-angle
//! coordinates, and the measured remainders of its large-radius expansion
//!
//! ```text
//! u = θ + 2πn + (L(θ) + G(θ, r)) / r,    ρ = r - diag ∂L(θ) + F(θ, r).
//! ```

use serde::Serialize;

use super::integrator::{dopri5, IntegratorSettings};
use super::{field, Direction};
use crate::error::{Error, Result};
use crate::resonance::{ResonanceEval, SystemConfig};
use crate::special::{angle_diff, to_action_angle, PolarState, TorusPoint};

/// Radii below this abort the flow: the angle is meaningless near the origin.
pub const RADIUS_FLOOR: f64 = 1e-6;

/// Flows a polar state from time 0 to `t_end`, tracking the lifted angles
/// continuously along the trajectory.
pub fn flow_polar(cfg: &SystemConfig, s: PolarState, t_end: f64, st: &IntegratorSettings) -> Result<PolarState> {
    let (p1, p2) = (&cfg.pair1, &cfg.pair2);
    if s.min_radius() < RADIUS_FLOOR {
        return Err(Error::RadiusCollapse { t: 0.0, radius: s.min_radius() });
    }
    let start = s.to_cartesian(p1, p2)?;
    let mut lifted = [s.theta1, s.theta2];
    let mut last = [s.theta1, s.theta2];
    let mut radii = [s.r1, s.r2];
    let polar = |t: f64, y: &[f64; 4]| -> Result<[(f64, f64); 2]> {
        let mut out = [(0.0, 0.0); 2];
        for (i, p) in [p1, p2].into_iter().enumerate() {
            let (th, r) = to_action_angle(p, y[i], y[i + 2]).map_err(|_| Error::RadiusCollapse { t, radius: 0.0 })?;
            if r < RADIUS_FLOOR {
                return Err(Error::RadiusCollapse { t, radius: r });
            }
            out[i] = (th, r);
        }
        Ok(out)
    };
    dopri5(|t, y| field(cfg, t, y), 0.0, start.to_array(), t_end, st, |t, y| {
        for (i, (th, r)) in polar(t, y)?.into_iter().enumerate() {
            lifted[i] += angle_diff(th, last[i]);
            last[i] = th;
            radii[i] = r;
        }
        Ok(())
    })?;
    PolarState::new(lifted[0], lifted[1], radii[0], radii[1])
}

/// One period of the flow (or of its inverse for [`Direction::Backward`]).
pub fn poincare_map(cfg: &SystemConfig, s: PolarState, direction: Direction, st: &IntegratorSettings) -> Result<PolarState> {
    flow_polar(cfg, s, direction.period_end(), st)
}

/// Same as [`poincare_map`] over `periods` consecutive periods in one integration.
pub fn poincare_map_traced(
    cfg: &SystemConfig,
    s: PolarState,
    periods: u32,
    direction: Direction,
    st: &IntegratorSettings,
) -> Result<PolarState> {
    flow_polar(cfg, s, periods as f64 * direction.period_end(), st)
}

/// Measured remainders of the expansion at one initial point.
///
/// For the backward map the expansion holds with `L` replaced by `-L`, so
/// the residuals are taken against `s L` with `s = ±1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticResidual {
    pub theta0: TorusPoint,
    pub r0: [f64; 2],
    pub direction: Direction,
    /// `r_i (u_i - θ_i - 2πns) - s L_i(θ)`, i.e. `G_i`.
    pub angle_residuals: [f64; 2],
    /// `(ρ_i - r_i) + s ∂_iL_i(θ)`, i.e. `F_i`.
    pub radial_residuals: [f64; 2],
}

impl AsymptoticResidual {
    pub fn max_abs(&self) -> f64 {
        self.angle_residuals
            .iter()
            .chain(&self.radial_residuals)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

pub fn asymptotic_residual(
    ev: &ResonanceEval,
    theta0: TorusPoint,
    r0: [f64; 2],
    direction: Direction,
    st: &IntegratorSettings,
) -> Result<AsymptoticResidual> {
    let s = direction.sign();
    let start = PolarState::new(theta0.t1, theta0.t2, r0[0], r0[1])?;
    let image = poincare_map(ev.config(), start, direction, st)?;
    let theta = theta0.as_array();
    let l = ev.l(theta);
    let jl = ev.jl(theta);
    let turn = s * std::f64::consts::TAU * ev.config().n() as f64;
    let u = [image.theta1, image.theta2];
    let rho = [image.r1, image.r2];
    let diag = [jl.a11, jl.a22];
    let mut angle = [0.0; 2];
    let mut radial = [0.0; 2];
    for i in 0..2 {
        angle[i] = r0[i] * (u[i] - theta[i] - turn) - s * l[i];
        radial[i] = (rho[i] - r0[i]) + s * diag[i];
    }
    Ok(AsymptoticResidual {
        theta0,
        r0,
        direction,
        angle_residuals: angle,
        radial_residuals: radial,
    })
}
