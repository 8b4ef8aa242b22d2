//! Dormand–Prince 5(4) with adaptive step size.
//!
//! The error estimate uses the max norm of `err_i / (atol + rtol max(|y_i|, |ŷ_i|))`.
//! An observer sees every accepted step and may abort the integration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    DormandPrince54,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub method: Method,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: std::f64::consts::TAU / 200.0,
            method: Method::DormandPrince54,
        }
    }
}

impl IntegratorSettings {
    pub const MIN_TOL: f64 = 1e-14;
    pub const MAX_TOL: f64 = 1e-3;

    pub fn with_tolerances(rel_tol: f64, abs_tol: f64) -> Result<Self> {
        let s = Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("rel_tol", self.rel_tol), ("abs_tol", self.abs_tol)] {
            if !(Self::MIN_TOL..=Self::MAX_TOL).contains(&v) {
                return Err(Error::InvalidArgument(format!(
                    "{name} = {v:e} outside [{:e}, {:e}]",
                    Self::MIN_TOL,
                    Self::MAX_TOL
                )));
            }
        }
        if !(self.max_step > 0.0 && self.max_step.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "max_step must be positive, got {}",
                self.max_step
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// difference between the 5th and embedded 4th order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn axpy<const D: usize>(y: &[f64; D], h: f64, coef: &[f64], k: &[[f64; D]]) -> [f64; D] {
    let mut out = *y;
    for (c, kj) in coef.iter().zip(k) {
        if *c != 0.0 {
            for i in 0..D {
                out[i] += h * c * kj[i];
            }
        }
    }
    out
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction).
///
/// `observe(t, y)` is called after every accepted step, including the last.
pub fn dopri5<const D: usize, F, O>(
    f: F,
    t0: f64,
    y0: [f64; D],
    t1: f64,
    st: &IntegratorSettings,
    mut observe: O,
) -> Result<([f64; D], StepStats)>
where
    F: Fn(f64, &[f64; D]) -> [f64; D],
    O: FnMut(f64, &[f64; D]) -> Result<()>,
{
    st.validate()?;
    let mut stats = StepStats::default();
    if t1 == t0 {
        return Ok((y0, stats));
    }
    let dir = (t1 - t0).signum();
    let mut t = t0;
    let mut y = y0;
    let mut h = st.max_step.min((t1 - t0).abs());
    let mut k = [[0.0; D]; 7];
    k[0] = f(t, &y);
    let mut last_rejected = false;

    while (t1 - t) * dir > 0.0 {
        let remaining = (t1 - t).abs();
        if h >= remaining {
            h = remaining;
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow { t });
        }
        let hs = dir * h;
        for s in 1..7 {
            let ys = axpy(&y, hs, &A[s][..s], &k[..s]);
            k[s] = f(t + C[s] * hs, &ys);
        }
        let y_new = axpy(&y, hs, &A[6][..6], &k[..6]);
        let mut err = 0.0f64;
        for i in 0..D {
            let e: f64 = E.iter().zip(&k).map(|(c, kj)| c * kj[i]).sum::<f64>() * hs;
            let sc = st.abs_tol + st.rel_tol * y[i].abs().max(y_new[i].abs());
            err = err.max(e.abs() / sc);
        }
        if !err.is_finite() {
            stats.rejected += 1;
            h *= 0.2;
            last_rejected = true;
            continue;
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        if err <= 1.0 {
            t = if h == remaining { t1 } else { t + hs };
            y = y_new;
            // FSAL: the last stage is f at the new point
            k[0] = k[6];
            stats.accepted += 1;
            observe(t, &y)?;
            let factor = if last_rejected { factor.min(1.0) } else { factor };
            h = (h * factor).min(st.max_step);
            last_rejected = false;
        } else {
            stats.rejected += 1;
            h *= factor;
            last_rejected = true;
        }
    }
    Ok((y, stats))
}
