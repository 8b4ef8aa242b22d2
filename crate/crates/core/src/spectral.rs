//! 2×2 matrices, the D± classes and the contraction estimate for the
//! perturbed identity `B_ε = I + diag(ε) A`.
//!
//! For a D+ matrix `A` there are constants `a0`, `eps0`, `eta` such that
//! `‖B_ε‖₂ ≤ 1 - a0 ‖ε‖ / 2` for every `ε` in the cone
//! `{ε > 0 : |ε₂/ε₁ - a11/a22| ≤ eta, ‖ε‖ ≤ eps0}`. [`find_cone_params`]
//! searches for such constants and [`verify_contraction`] re-checks them on
//! fresh random samples.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Matrix2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Matrix2 {
    pub const IDENTITY: Matrix2 = Matrix2::new(1.0, 0.0, 0.0, 1.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub const fn diag(d1: f64, d2: f64) -> Self {
        Self::new(d1, 0.0, 0.0, d2)
    }

    pub fn from_rows(rows: [[f64; 2]; 2]) -> Self {
        Self::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn rows(&self) -> [[f64; 2]; 2] {
        [[self.a11, self.a12], [self.a21, self.a22]]
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> f64 {
        self.a11 + self.a22
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(s * self.a11, s * self.a12, s * self.a21, s * self.a22)
    }

    /// `self + s·o`.
    pub fn add_scaled(&self, o: &Matrix2, s: f64) -> Self {
        Self::new(self.a11 + s * o.a11, self.a12 + s * o.a12, self.a21 + s * o.a21, self.a22 + s * o.a22)
    }

    pub fn mul(&self, o: &Matrix2) -> Self {
        Self::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }

    pub fn mul_vec(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.a11 * v[0] + self.a12 * v[1],
            self.a21 * v[0] + self.a22 * v[1],
        ]
    }

    /// Solves `self · x = rhs`; `None` when the matrix is numerically singular.
    pub fn solve(&self, rhs: [f64; 2]) -> Option<[f64; 2]> {
        let det = self.det();
        let scale = self.max_abs().powi(2);
        if !det.is_finite() || det.abs() <= 1e-14 * scale || scale == 0.0 {
            return None;
        }
        Some([
            (self.a22 * rhs[0] - self.a12 * rhs[1]) / det,
            (self.a11 * rhs[1] - self.a21 * rhs[0]) / det,
        ])
    }

    pub fn max_abs(&self) -> f64 {
        self.a11
            .abs()
            .max(self.a12.abs())
            .max(self.a21.abs())
            .max(self.a22.abs())
    }

    pub fn is_finite(&self) -> bool {
        [self.a11, self.a12, self.a21, self.a22]
            .iter()
            .all(|v| v.is_finite())
    }
}

impl std::ops::Neg for Matrix2 {
    type Output = Matrix2;
    fn neg(self) -> Matrix2 {
        self.scale(-1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DpmClass {
    DPlus,
    DMinus,
    Neither,
}

impl fmt::Display for DpmClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DpmClass::DPlus => "D+",
            DpmClass::DMinus => "D-",
            DpmClass::Neither => "neither",
        })
    }
}

/// Strict D+/D- test: equal-sign diagonal and
/// `|a12 a22 + a11 a21| < 2 a11 a22`.
pub fn classify_dpm(a: &Matrix2) -> DpmClass {
    let coupling = (a.a12 * a.a22 + a.a11 * a.a21).abs();
    let bound = 2.0 * a.a11 * a.a22;
    if !(coupling < bound) {
        return DpmClass::Neither;
    }
    if a.a11 < 0.0 && a.a22 < 0.0 {
        DpmClass::DPlus
    } else if a.a11 > 0.0 && a.a22 > 0.0 {
        DpmClass::DMinus
    } else {
        DpmClass::Neither
    }
}

/// `B_ε = [[1 + ε₁a11, ε₁a12], [ε₂a21, 1 + ε₂a22]]`.
pub fn b_epsilon(a: &Matrix2, eps: [f64; 2]) -> Result<Matrix2> {
    if !(eps[0] > 0.0 && eps[1] > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "perturbation sizes must be positive, got {eps:?}"
        )));
    }
    Ok(b_epsilon_unchecked(a, eps))
}

fn b_epsilon_unchecked(a: &Matrix2, eps: [f64; 2]) -> Matrix2 {
    Matrix2::new(
        1.0 + eps[0] * a.a11,
        eps[0] * a.a12,
        eps[1] * a.a21,
        1.0 + eps[1] * a.a22,
    )
}

/// Largest singular value via the largest eigenvalue of `BᵀB`.
pub fn spectral_norm(b: &Matrix2) -> f64 {
    let c = b.transpose().mul(b);
    let tr = c.trace();
    let det = c.det();
    let disc = (tr * tr - 4.0 * det).max(0.0);
    (0.5 * (tr + disc.sqrt())).max(0.0).sqrt()
}

/// Contraction rate `a0 = (2 a11 a22 - |a12 a22 + a11 a21|) / (4 (a11² + a22²))`.
pub fn a0_of(a: &Matrix2) -> Result<f64> {
    if classify_dpm(a) != DpmClass::DPlus {
        return Err(Error::NotDPlus);
    }
    let coupling = (a.a12 * a.a22 + a.a11 * a.a21).abs();
    Ok((2.0 * a.a11 * a.a22 - coupling) / (4.0 * (a.a11 * a.a11 + a.a22 * a.a22)))
}

/// First-order growth `g(ε) = a11ε₁ + a22ε₂ + sqrt(d₂(ε))` of the top
/// eigenvalue of `B_εᵀB_ε`.
pub fn first_order_growth(a: &Matrix2, eps: [f64; 2]) -> f64 {
    let d2 = (a.a11 * eps[0] - a.a22 * eps[1]).powi(2) + (a.a12 * eps[0] + a.a21 * eps[1]).powi(2);
    a.a11 * eps[0] + a.a22 * eps[1] + d2.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConeParams {
    pub a0: f64,
    pub eps0: f64,
    pub eta: f64,
}

impl ConeParams {
    /// Slope `a11/a22` the cone is centred on.
    pub fn center_slope(a: &Matrix2) -> f64 {
        a.a11 / a.a22
    }
}

/// Bound slack `1 - a0‖ε‖/2 - ‖B_ε‖`; nonnegative means the estimate holds at `ε`.
pub fn contraction_margin(a: &Matrix2, a0: f64, eps: [f64; 2]) -> f64 {
    let norm = eps[0].hypot(eps[1]);
    1.0 - 0.5 * a0 * norm - spectral_norm(&b_epsilon_unchecked(a, eps))
}

fn cone_point(slope: f64, radius: f64) -> [f64; 2] {
    let len = 1f64.hypot(slope);
    [radius / len, radius * slope / len]
}

const MAX_HALVINGS: usize = 60;

/// Searches cone constants for a D+ matrix.
///
/// `eta` starts at half the centre slope and is halved until `g < -2 a0` on a
/// sampled unit arc (re-checked on a 4× denser arc). `eps0` starts at `1/a0`
/// and is halved until every point of a 128×128 slope/radius grid satisfies
/// the norm bound with relative slack at least `safety`.
pub fn find_cone_params(a: &Matrix2, safety: f64) -> Result<ConeParams> {
    if !(safety > 0.0 && safety < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "safety must lie in (0, 1), got {safety}"
        )));
    }
    let a0 = a0_of(a)?;
    let center = ConeParams::center_slope(a);

    let arc_ok = |eta: f64, samples: usize| {
        (0..=samples).all(|k| {
            let slope = center - eta + 2.0 * eta * k as f64 / samples as f64;
            first_order_growth(a, cone_point(slope, 1.0)) < -2.0 * a0
        })
    };
    let mut eta = 0.5 * center;
    let mut found = false;
    for _ in 0..MAX_HALVINGS {
        if arc_ok(eta, 1000) && arc_ok(eta, 4000) {
            found = true;
            break;
        }
        eta *= 0.5;
    }
    if !found {
        return Err(Error::SearchFailed(
            "no cone half-width keeps the first-order growth below -2 a0".into(),
        ));
    }

    const GRID: usize = 128;
    let grid_ok = |eps0: f64| {
        (0..GRID).all(|i| {
            let slope = center - eta + 2.0 * eta * i as f64 / (GRID - 1) as f64;
            (1..=GRID).all(|k| {
                let radius = eps0 * k as f64 / GRID as f64;
                let margin = contraction_margin(a, a0, cone_point(slope, radius));
                margin >= safety * 0.5 * a0 * radius
            })
        })
    };
    let mut eps0 = 1.0 / a0;
    for _ in 0..MAX_HALVINGS {
        if grid_ok(eps0) {
            return Ok(ConeParams { a0, eps0, eta });
        }
        eps0 *= 0.5;
    }
    Err(Error::SearchFailed(
        "no cone radius satisfies the norm bound with the requested slack".into(),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub samples: usize,
    pub violations: usize,
    /// Smallest observed `1 - a0‖ε‖/2 - ‖B_ε‖`.
    pub worst_margin: f64,
    pub worst_eps: [f64; 2],
}

impl ContractionReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Samples `ε` uniformly (by area) in the cone and counts violations of the
/// norm bound.
pub fn verify_contraction(a: &Matrix2, cp: &ConeParams, samples: usize, seed: u64) -> Result<ContractionReport> {
    verify_contraction_with(a, cp, samples, seed, Execution::default())
}

pub fn verify_contraction_with(
    a: &Matrix2,
    cp: &ConeParams,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<ContractionReport> {
    if classify_dpm(a) != DpmClass::DPlus {
        return Err(Error::NotDPlus);
    }
    let center = ConeParams::center_slope(a);
    let lo = (center - cp.eta).atan();
    let hi = (center + cp.eta).atan();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<[f64; 2]> = (0..samples)
        .map(|_| {
            let angle = rng.gen_range(lo..=hi);
            let radius = cp.eps0 * rng.gen::<f64>().sqrt();
            // the cone excludes ε = 0
            let radius = radius.max(f64::MIN_POSITIVE);
            [radius * angle.cos(), radius * angle.sin()]
        })
        .collect();
    let margins = exec.map_slice(&points, |eps| contraction_margin(a, cp.a0, *eps));
    let mut report = ContractionReport {
        samples,
        violations: 0,
        worst_margin: f64::INFINITY,
        worst_eps: [0.0, 0.0],
    };
    for (eps, m) in points.iter().zip(margins) {
        if m < 0.0 {
            report.violations += 1;
        }
        if m < report.worst_margin {
            report.worst_margin = m;
            report.worst_eps = *eps;
        }
    }
    Ok(report)
}
