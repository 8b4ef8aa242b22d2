//! Asymmetric cosine and sine, their primitive, Fourier coefficients and the
//! action-angle coordinates built on them.
//!
//! For a pair `(a, b)` on the `n`-th Fučík curve, `C` solves
//! `x'' + a x⁺ - b x⁻ = 0`, `x(0) = 1`, `x'(0) = 0`. It is even and
//! `tau = 2π/n`-periodic. On `[-tau/2, tau/2]` it is a cosine hump of
//! half-width `π/(2√a)` followed by a scaled sine arch. `S` is its derivative
//! and `K` its primitive with `K(0) = 0`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance on `1/√a + 1/√b - 2/n` accepted by [`FucikPair::new`].
pub const RESONANCE_TOL: f64 = 1e-12;

/// One oscillator `x'' + a x⁺ - b x⁻` sitting on the `n`-th Fučík curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FucikPair {
    a: f64,
    b: f64,
    n: u32,
    #[serde(skip)]
    sqrt_a: f64,
    #[serde(skip)]
    sqrt_b: f64,
}

impl FucikPair {
    /// Validates the resonance identity `1/√a + 1/√b = 2/n`.
    pub fn new(a: f64, b: f64, n: u32) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "stiffnesses must be positive and finite, got a = {a}, b = {b}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("resonance order n must be >= 1".into()));
        }
        let defect = 1.0 / a.sqrt() + 1.0 / b.sqrt() - 2.0 / n as f64;
        if defect.abs() > RESONANCE_TOL {
            return Err(Error::NotResonant { a, b, n, defect });
        }
        Ok(Self {
            a,
            b,
            n,
            sqrt_a: a.sqrt(),
            sqrt_b: b.sqrt(),
        })
    }

    /// Completes `a` to a resonant pair by solving for `b`.
    pub fn from_a(a: f64, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("resonance order n must be >= 1".into()));
        }
        let nf = n as f64;
        if !(a.is_finite() && a > nf * nf / 4.0) {
            return Err(Error::InvalidArgument(format!(
                "a = {a} must exceed n²/4 = {}",
                nf * nf / 4.0
            )));
        }
        let inv_sqrt_b = 2.0 / nf - 1.0 / a.sqrt();
        Self::new(a, 1.0 / (inv_sqrt_b * inv_sqrt_b), n)
    }

    /// The linear oscillator `a = b = n²`.
    pub fn linear(n: u32) -> Result<Self> {
        let nf = n as f64;
        Self::new(nf * nf, nf * nf, n)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn sqrt_a(&self) -> f64 {
        self.sqrt_a
    }

    pub fn sqrt_b(&self) -> f64 {
        self.sqrt_b
    }

    pub fn is_symmetric(&self) -> bool {
        self.a == self.b
    }

    /// Period of `C`.
    pub fn tau(&self) -> f64 {
        TAU / self.n as f64
    }

    /// Scaling `sqrt(2n/a)` between action radius and position amplitude.
    pub fn gamma(&self) -> f64 {
        (2.0 * self.n as f64 / self.a).sqrt()
    }

    /// Half-width `π/(2√a)` of the positive hump of `C`.
    pub fn half_width(&self) -> f64 {
        FRAC_PI_2 / self.sqrt_a
    }

    /// Reduces `t` into `[-tau/2, tau/2]`, returning the shift count too.
    fn reduce(&self, t: f64) -> (f64, f64) {
        let tau = self.tau();
        let m = (t / tau).round();
        (t - m * tau, m)
    }

    /// Kink locations of `C` (where the two branches meet) inside `[lo, hi]`,
    /// sorted ascending.
    pub fn kinks_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let tau = self.tau();
        let h = self.half_width();
        let mut out = Vec::new();
        let first = ((lo - h) / tau).floor() as i64 - 1;
        let last = ((hi + h) / tau).ceil() as i64 + 1;
        for k in first..=last {
            let centre = k as f64 * tau;
            for p in [centre - h, centre + h] {
                if p > lo && p < hi {
                    out.push(p);
                }
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }
}

/// Position-velocity state of the two oscillators.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CartesianState {
    pub x1: f64,
    pub x2: f64,
    pub y1: f64,
    pub y2: f64,
}

impl CartesianState {
    pub fn to_array(self) -> [f64; 4] {
        [self.x1, self.x2, self.y1, self.y2]
    }

    pub fn from_array(v: [f64; 4]) -> Self {
        Self {
            x1: v[0],
            x2: v[1],
            y1: v[2],
            y2: v[3],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Action-angle state with lifted (not reduced) angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolarState {
    pub theta1: f64,
    pub theta2: f64,
    pub r1: f64,
    pub r2: f64,
}

impl PolarState {
    pub fn new(theta1: f64, theta2: f64, r1: f64, r2: f64) -> Result<Self> {
        for r in [r1, r2] {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::NonPositiveRadius(r));
            }
        }
        Ok(Self {
            theta1,
            theta2,
            r1,
            r2,
        })
    }

    pub fn angles(&self) -> TorusPoint {
        TorusPoint::new(self.theta1, self.theta2)
    }

    pub fn min_radius(&self) -> f64 {
        self.r1.min(self.r2)
    }

    pub fn to_cartesian(&self, p1: &FucikPair, p2: &FucikPair) -> Result<CartesianState> {
        let (x1, y1) = from_action_angle(p1, self.theta1, self.r1)?;
        let (x2, y2) = from_action_angle(p2, self.theta2, self.r2)?;
        Ok(CartesianState { x1, x2, y1, y2 })
    }
}

/// Reduces an angle into `[0, 2π)`.
pub fn wrap_angle(t: f64) -> f64 {
    let w = t.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Signed angular difference `u - v` reduced into `(-π, π]`.
pub fn angle_diff(u: f64, v: f64) -> f64 {
    let d = (u - v).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// A point of the torus `R²/(2πZ)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorusPoint {
    pub t1: f64,
    pub t2: f64,
}

impl TorusPoint {
    pub fn new(t1: f64, t2: f64) -> Self {
        Self {
            t1: wrap_angle(t1),
            t2: wrap_angle(t2),
        }
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.t1, self.t2]
    }
}

/// Euclidean combination of the per-coordinate group distances.
pub fn torus_distance(u: TorusPoint, v: TorusPoint) -> f64 {
    // built from |x - y| so that swapping the arguments is exact
    let circle = |x: f64, y: f64| {
        let d = (x - y).abs() % TAU;
        d.min(TAU - d)
    };
    circle(u.t1, v.t1).hypot(circle(u.t2, v.t2))
}

/// Asymmetric cosine `C(t)`.
pub fn asym_cosine(p: &FucikPair, t: f64) -> f64 {
    let (s, _) = p.reduce(t);
    let s = s.abs();
    let h = p.half_width();
    if s <= h {
        (p.sqrt_a * s).cos()
    } else {
        -(p.sqrt_a / p.sqrt_b) * (p.sqrt_b * (s - h)).sin()
    }
}

/// Asymmetric sine `S(t) = C'(t)`.
pub fn asym_sine(p: &FucikPair, t: f64) -> f64 {
    let (s, _) = p.reduce(t);
    let h = p.half_width();
    let abs = s.abs();
    if abs <= h {
        -p.sqrt_a * (p.sqrt_a * s).sin()
    } else {
        -p.sqrt_a * (p.sqrt_b * (abs - h)).cos() * s.signum()
    }
}

/// Primitive `K` of `C` with `K(0) = 0`.
pub fn primitive_k(p: &FucikPair, t: f64) -> f64 {
    let (s, m) = p.reduce(t);
    let h = p.half_width();
    let abs = s.abs();
    let half = if abs <= h {
        (p.sqrt_a * abs).sin() / p.sqrt_a
    } else {
        1.0 / p.sqrt_a + (p.sqrt_a / p.b) * ((p.sqrt_b * (abs - h)).cos() - 1.0)
    };
    // one full period integrates to 2 * alpha
    let per_period = 2.0 * (1.0 / p.sqrt_a - p.sqrt_a / p.b);
    m * per_period + s.signum() * half
}

/// Coefficient `c_h` of the cosine series `C(t) = Σ c_h cos(h n t)`.
pub fn fourier_coeff(p: &FucikPair, h: u32) -> Result<f64> {
    if p.is_symmetric() {
        return Err(Error::SymmetricPair(p.a));
    }
    let (a, b) = (p.a, p.b);
    let tau = p.tau();
    if h == 0 {
        return Ok((2.0 / tau) * (b - a) / (b * p.sqrt_a));
    }
    let hn = h as f64 * p.n as f64;
    let hn2 = hn * hn;
    if a != hn2 && b != hn2 {
        Ok((4.0 / tau) * (b - a) / (b - hn2) * p.sqrt_a / (a - hn2)
            * (hn * PI / (2.0 * p.sqrt_a)).cos())
    } else if a == hn2 {
        Ok(1.0 / (2.0 * h as f64))
    } else {
        // b = h²n²: the 0/0 limit of the generic formula along the curve
        let sign = if h % 2 == 0 { 1.0 } else { -1.0 };
        Ok(-sign * p.sqrt_a / (2.0 * hn * h as f64))
    }
}

/// True when `a` or `b` sits within `1e-9` of `h²n²` without hitting it,
/// where the closed form for `c_h` loses accuracy.
pub fn fourier_near_degenerate(p: &FucikPair, h: u32) -> bool {
    let hn = h as f64 * p.n as f64;
    let hn2 = hn * hn;
    [p.a, p.b]
        .iter()
        .any(|&v| v != hn2 && (v - hn2).abs() < 1e-9)
}

/// First integral `s² + a (c⁺)² + b (c⁻)²`.
pub fn energy_invariant(p: &FucikPair, c: f64, s: f64) -> f64 {
    let pos = c.max(0.0);
    let neg = (-c).max(0.0);
    s * s + p.a * pos * pos + p.b * neg * neg
}

/// Inverse of [`from_action_angle`]: returns `(theta, r)` with `theta` in `[0, 2π)`.
pub fn to_action_angle(p: &FucikPair, x: f64, y: f64) -> Result<(f64, f64)> {
    if x == 0.0 && y == 0.0 {
        return Err(Error::Origin);
    }
    let nf = p.n as f64;
    let r = (energy_invariant(p, x, y) / (2.0 * nf)).sqrt();
    let scale = p.gamma() * r;
    let (c, s) = (x / scale, y / scale);
    let t = if c >= 0.0 {
        (-s / p.sqrt_a).atan2(c) / p.sqrt_a
    } else {
        let u = (-c * p.sqrt_b / p.sqrt_a).atan2(s.abs() / p.sqrt_a);
        let abs = p.half_width() + u / p.sqrt_b;
        if s > 0.0 {
            -abs
        } else {
            abs
        }
    };
    Ok((wrap_angle(nf * t), r))
}

/// `x = γ r C(θ/n)`, `y = γ r S(θ/n)`.
pub fn from_action_angle(p: &FucikPair, theta: f64, r: f64) -> Result<(f64, f64)> {
    if !(r > 0.0) {
        return Err(Error::NonPositiveRadius(r));
    }
    let t = theta / p.n as f64;
    let scale = p.gamma() * r;
    Ok((scale * asym_cosine(p, t), scale * asym_sine(p, t)))
}
