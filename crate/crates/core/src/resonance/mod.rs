//! The resonance function `L` of the coupled system and its ingredients.
//!
//! For oscillator `i` coupled to oscillator `j`:
//!
//! * `α_i = 1/√a_i - √a_i/b_i`, the mean of `C_i` scaled so that `∫₀^{2π} C_i = 2nα_i`;
//! * `Λ_i(t) = K_i(t/n + π/(2√a_j)) - K_i(t/n - π/(2√a_j))`;
//! * `Σ_i = n Λ_i'`;
//! * `Φ_i(θ) = -(γ_i/2) ∫₀^{2π} C_i(θ/n + t) p_i(t) dt`;
//! * `L_i(θ) = Φ_i(θ_i) + γ_i n φ_i(+∞) (Λ_i(θ_i - θ_j) - α_i)`.

mod signals;
mod zeros;

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use serde::Serialize;

pub use signals::{CouplingFunction, ForcingSignal, Harmonic};
pub use zeros::{find_zeros, find_zeros_report, newton_zero, SeedOutcome, TorusZero, ZeroSearchReport};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::quadrature::GaussLegendre;
use crate::special::{asym_cosine, asym_sine, primitive_k, FucikPair, TorusPoint};
use crate::spectral::Matrix2;

/// Two oscillators on the same Fučík curve with their forcings and couplings.
///
/// `phi1` couples `x2` into the first equation and `phi2` couples `x1` into
/// the second.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemConfig {
    pub pair1: FucikPair,
    pub pair2: FucikPair,
    pub p1: ForcingSignal,
    pub p2: ForcingSignal,
    pub phi1: CouplingFunction,
    pub phi2: CouplingFunction,
}

impl SystemConfig {
    pub fn new(
        pair1: FucikPair,
        pair2: FucikPair,
        p1: ForcingSignal,
        p2: ForcingSignal,
        phi1: CouplingFunction,
        phi2: CouplingFunction,
    ) -> Result<Self> {
        if pair1.n() != pair2.n() {
            return Err(Error::MismatchedOrder(pair1.n(), pair2.n()));
        }
        p1.validate()?;
        p2.validate()?;
        phi1.validate()?;
        phi2.validate()?;
        Ok(Self {
            pair1,
            pair2,
            p1,
            p2,
            phi1,
            phi2,
        })
    }

    pub fn n(&self) -> u32 {
        self.pair1.n()
    }

    pub fn pair(&self, i: usize) -> &FucikPair {
        match i {
            0 => &self.pair1,
            1 => &self.pair2,
            _ => panic!("oscillator index {i} out of range"),
        }
    }

    pub fn forcing(&self, i: usize) -> &ForcingSignal {
        match i {
            0 => &self.p1,
            1 => &self.p2,
            _ => panic!("oscillator index {i} out of range"),
        }
    }

    pub fn coupling(&self, i: usize) -> &CouplingFunction {
        match i {
            0 => &self.phi1,
            1 => &self.phi2,
            _ => panic!("oscillator index {i} out of range"),
        }
    }

    /// Copy with coupling limits replaced (shapes kept).
    pub fn with_coupling_limits(&self, l1: f64, l2: f64) -> Self {
        Self {
            phi1: self.phi1.with_limit(l1),
            phi2: self.phi2.with_limit(l2),
            ..self.clone()
        }
    }
}

fn check_order(p: &FucikPair, q: &FucikPair) -> Result<()> {
    if p.n() == q.n() {
        Ok(())
    } else {
        Err(Error::MismatchedOrder(p.n(), q.n()))
    }
}

/// `α = 1/√a - √a/b`.
pub fn alpha(p: &FucikPair) -> f64 {
    1.0 / p.sqrt_a() - p.sqrt_a() / p.b()
}

fn lambda_unchecked(p: &FucikPair, other: &FucikPair, t: f64) -> f64 {
    let n = p.n() as f64;
    let h = other.half_width();
    primitive_k(p, t / n + h) - primitive_k(p, t / n - h)
}

fn sigma_unchecked(p: &FucikPair, other: &FucikPair, t: f64) -> f64 {
    let n = p.n() as f64;
    let h = other.half_width();
    asym_cosine(p, t / n + h) - asym_cosine(p, t / n - h)
}

/// `Λ_i(t)`: integral of `C_i(θ_i/n + ·)` over the set where the other
/// oscillator's `C` is positive, divided by `n`, as a function of `θ_i - θ_j`.
pub fn lambda_fn(p: &FucikPair, other: &FucikPair, t: f64) -> Result<f64> {
    check_order(p, other)?;
    Ok(lambda_unchecked(p, other, t))
}

/// `Σ_i(t) = n Λ_i'(t)`.
pub fn sigma_fn(p: &FucikPair, other: &FucikPair, t: f64) -> Result<f64> {
    check_order(p, other)?;
    Ok(sigma_unchecked(p, other, t))
}

/// Margins of the resolubility test `Λ₁(π) < α₁ < Λ₁(0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resolubility {
    pub member: bool,
    pub lambda_pi: f64,
    pub alpha: f64,
    pub lambda_zero: f64,
}

impl Resolubility {
    /// `min(α - Λ(π), Λ(0) - α)`; positive iff the pair is a member.
    pub fn margin(&self) -> f64 {
        (self.alpha - self.lambda_pi).min(self.lambda_zero - self.alpha)
    }
}

/// Membership of `(a_1, a_2)` in the resolubility set, oriented on `Λ` of
/// the first argument. Swap the arguments for the other orientation.
pub fn resolubility_check(p1: &FucikPair, p2: &FucikPair) -> Result<Resolubility> {
    check_order(p1, p2)?;
    let lambda_pi = lambda_unchecked(p1, p2, PI);
    let lambda_zero = lambda_unchecked(p1, p2, 0.0);
    let alpha = alpha(p1);
    Ok(Resolubility {
        member: lambda_pi < alpha && alpha < lambda_zero,
        lambda_pi,
        alpha,
        lambda_zero,
    })
}

/// The unique `t ∈ (0, π)` with `Λ₁(t) = α₁`, by bisection.
pub fn lambda_star(p1: &FucikPair, p2: &FucikPair) -> Result<f64> {
    let res = resolubility_check(p1, p2)?;
    if !res.member {
        return Err(Error::OutsideResolubility {
            lambda_pi: res.lambda_pi,
            alpha: res.alpha,
            lambda_zero: res.lambda_zero,
        });
    }
    // Λ₁ decreases on (0, π)
    let (mut lo, mut hi) = (0.0, PI);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if lambda_unchecked(p1, p2, mid) > res.alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn default_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(GaussLegendre::default)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Kernel {
    Cosine,
    Sine,
}

/// `∫₀^{2π} K(θ/n + t) p(t) dt` with `K ∈ {C, S}`, split at the kinks of `C`.
fn kernel_integral(
    rule: &GaussLegendre,
    p: &FucikPair,
    forcing: &ForcingSignal,
    theta: f64,
    pieces: usize,
    kernel: Kernel,
) -> f64 {
    if forcing.is_zero() {
        return 0.0;
    }
    let shift = theta / p.n() as f64;
    let breaks: Vec<f64> = p
        .kinks_in(shift, shift + TAU)
        .into_iter()
        .map(|k| k - shift)
        .collect();
    rule.integrate_split(0.0, TAU, &breaks, pieces, |t| {
        let k = match kernel {
            Kernel::Cosine => asym_cosine(p, shift + t),
            Kernel::Sine => asym_sine(p, shift + t),
        };
        k * forcing.eval(t)
    })
}

const MAX_PIECES: usize = 256;
const PROBE_ANGLES: [f64; 5] = [0.3, 1.7, 2.9, 4.4, 5.8];

/// Smallest piece count whose result agrees with the doubled count to `tol`
/// (relative to the integrand scale) at the probe angles.
fn choose_pieces(rule: &GaussLegendre, p: &FucikPair, forcing: &ForcingSignal, tol: f64, probes: &[f64]) -> Result<usize> {
    if forcing.is_zero() {
        return Ok(1);
    }
    let scale = 1.0 + TAU * forcing.sup_bound() * p.sqrt_a().max(1.0) * (p.a() / p.b()).sqrt().max(1.0);
    let mut pieces = 1;
    let mut worst = f64::INFINITY;
    while pieces <= MAX_PIECES {
        worst = 0.0f64;
        for &theta in probes {
            for kernel in [Kernel::Cosine, Kernel::Sine] {
                let coarse = kernel_integral(rule, p, forcing, theta, pieces, kernel);
                let fine = kernel_integral(rule, p, forcing, theta, 2 * pieces, kernel);
                worst = worst.max((coarse - fine).abs());
            }
        }
        if worst <= tol * scale {
            return Ok(pieces);
        }
        pieces *= 2;
    }
    Err(Error::Quadrature { tol, estimate: worst / scale })
}

fn phi_with(rule: &GaussLegendre, p: &FucikPair, forcing: &ForcingSignal, theta: f64, pieces: usize) -> f64 {
    -0.5 * p.gamma() * kernel_integral(rule, p, forcing, theta, pieces, Kernel::Cosine)
}

fn phi_derivative_with(rule: &GaussLegendre, p: &FucikPair, forcing: &ForcingSignal, theta: f64, pieces: usize) -> f64 {
    -0.5 * p.gamma() / p.n() as f64 * kernel_integral(rule, p, forcing, theta, pieces, Kernel::Sine)
}

/// Default relative quadrature tolerance.
pub const DEFAULT_QUAD_TOL: f64 = 1e-12;

/// `Φ(θ) = -(γ/2) ∫₀^{2π} C(θ/n + t) p(t) dt`.
pub fn phi_fn(p: &FucikPair, forcing: &ForcingSignal, theta: f64) -> Result<f64> {
    let rule = default_rule();
    let pieces = choose_pieces(rule, p, forcing, DEFAULT_QUAD_TOL, &[theta])?;
    Ok(phi_with(rule, p, forcing, theta, pieces))
}

/// `Φ'(θ) = -(γ/(2n)) ∫₀^{2π} S(θ/n + t) p(t) dt`.
pub fn phi_derivative(p: &FucikPair, forcing: &ForcingSignal, theta: f64) -> Result<f64> {
    let rule = default_rule();
    let pieces = choose_pieces(rule, p, forcing, DEFAULT_QUAD_TOL, &[theta])?;
    Ok(phi_derivative_with(rule, p, forcing, theta, pieces))
}

/// Evaluator for `Φ_i`, `L` and `JL` of one system.
///
/// The quadrature resolution is fixed (and checked against `tol`) at
/// construction, so evaluations afterwards are infallible and deterministic.
#[derive(Debug, Clone)]
pub struct ResonanceEval {
    cfg: SystemConfig,
    rule: GaussLegendre,
    pieces: [usize; 2],
    tol: f64,
    exec: Execution,
}

impl ResonanceEval {
    pub fn new(cfg: SystemConfig) -> Result<Self> {
        Self::with_tolerance(cfg, DEFAULT_QUAD_TOL)
    }

    pub fn with_tolerance(cfg: SystemConfig, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("quadrature tolerance must be positive, got {tol}")));
        }
        let rule = GaussLegendre::default();
        let pieces = [
            choose_pieces(&rule, &cfg.pair1, &cfg.p1, tol, &PROBE_ANGLES)?,
            choose_pieces(&rule, &cfg.pair2, &cfg.p2, tol, &PROBE_ANGLES)?,
        ];
        Ok(Self {
            cfg,
            rule,
            pieces,
            tol,
            exec: Execution::default(),
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// `Φ_i(θ)` for oscillator `i ∈ {0, 1}`.
    pub fn phi(&self, i: usize, theta: f64) -> f64 {
        phi_with(&self.rule, self.cfg.pair(i), self.cfg.forcing(i), theta, self.pieces[i])
    }

    pub fn phi_derivative(&self, i: usize, theta: f64) -> f64 {
        phi_derivative_with(&self.rule, self.cfg.pair(i), self.cfg.forcing(i), theta, self.pieces[i])
    }

    /// `Λ_i(t)` with the partner oscillator of `i`.
    pub fn lambda(&self, i: usize, t: f64) -> f64 {
        lambda_unchecked(self.cfg.pair(i), self.cfg.pair(1 - i), t)
    }

    pub fn sigma(&self, i: usize, t: f64) -> f64 {
        sigma_unchecked(self.cfg.pair(i), self.cfg.pair(1 - i), t)
    }

    pub fn alpha(&self, i: usize) -> f64 {
        alpha(self.cfg.pair(i))
    }

    /// `(L₁, L₂)` at lifted angles.
    pub fn l(&self, theta: [f64; 2]) -> [f64; 2] {
        let n = self.cfg.n() as f64;
        let mut out = [0.0; 2];
        for (i, slot) in out.iter_mut().enumerate() {
            let j = 1 - i;
            let p = self.cfg.pair(i);
            let limit = self.cfg.coupling(i).limit_plus();
            let coupling = if limit == 0.0 {
                0.0
            } else {
                p.gamma() * n * limit * (self.lambda(i, theta[i] - theta[j]) - self.alpha(i))
            };
            *slot = self.phi(i, theta[i]) + coupling;
        }
        out
    }

    pub fn l_map(&self, theta: TorusPoint) -> [f64; 2] {
        self.l(theta.as_array())
    }

    /// Analytic Jacobian of `L`.
    pub fn jl(&self, theta: [f64; 2]) -> Matrix2 {
        let g1 = self.cfg.pair1.gamma() * self.cfg.phi1.limit_plus();
        let g2 = self.cfg.pair2.gamma() * self.cfg.phi2.limit_plus();
        let s1 = if g1 == 0.0 { 0.0 } else { g1 * self.sigma(0, theta[0] - theta[1]) };
        let s2 = if g2 == 0.0 { 0.0 } else { g2 * self.sigma(1, theta[1] - theta[0]) };
        Matrix2::new(
            self.phi_derivative(0, theta[0]) + s1,
            -s1,
            -s2,
            self.phi_derivative(1, theta[1]) + s2,
        )
    }

    pub fn jl_map(&self, theta: TorusPoint) -> Matrix2 {
        self.jl(theta.as_array())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    fn lin(n: u32) -> FucikPair {
        FucikPair::linear(n).unwrap()
    }

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha(&lin(2)), 0.0);
        let p = FucikPair::new(4.0, 4.0 / 9.0, 1).unwrap();
        assert_abs_diff_eq!(alpha(&p), -4.0, epsilon = 1e-14);
    }

    #[test]
    fn lambda_closed_forms() {
        let n = 2;
        let p2 = FucikPair::from_a(7.3, n).unwrap();
        let nf = n as f64;
        for t in [-2.0, 0.0, 0.4, 1.9, 3.1] {
            let want = 2.0 / nf * (PI * nf / (2.0 * p2.sqrt_a())).sin() * f64::cos(t);
            assert_abs_diff_eq!(lambda_fn(&lin(n), &p2, t).unwrap(), want, epsilon = 1e-13);
            assert_abs_diff_eq!(
                lambda_fn(&lin(n), &lin(n), t).unwrap(),
                2.0 / nf * f64::cos(t),
                epsilon = 1e-13
            );
        }
        assert!(matches!(
            lambda_fn(&lin(1), &lin(2), 0.0),
            Err(Error::MismatchedOrder(1, 2))
        ));
    }

    #[test]
    fn sigma_sign_structure() {
        let p1 = FucikPair::from_a(4.0, 1).unwrap();
        let p2 = FucikPair::from_a(2.5, 1).unwrap();
        for k in -3..=3 {
            assert!(sigma_fn(&p1, &p2, k as f64 * PI).unwrap().abs() < 1e-14);
        }
        let t = PI - PI / (2.0 * p2.sqrt_a());
        assert!(sigma_fn(&p1, &p2, t).unwrap() < 0.0);
    }

    #[test]
    fn resolubility_half_lines() {
        let r = resolubility_check(&lin(1), &lin(1)).unwrap();
        assert!(r.member);
        assert_abs_diff_eq!(r.lambda_pi, -2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(r.alpha, 0.0);
        assert_abs_diff_eq!(r.lambda_zero, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn lambda_star_linear_cases() {
        assert_abs_diff_eq!(lambda_star(&lin(1), &lin(1)).unwrap(), FRAC_PI_2, epsilon = 1e-12);
        let p2 = FucikPair::from_a(3.0, 1).unwrap();
        let s = lambda_star(&lin(1), &p2).unwrap();
        assert_abs_diff_eq!(s, FRAC_PI_2, epsilon = 1e-12);
        assert!(lambda_fn(&lin(1), &p2, s).unwrap().abs() < 1e-12);
    }

    #[test]
    fn phi_linear_cosine_forcing() {
        for n in [1u32, 2, 3] {
            let p = lin(n);
            let g = p.gamma();
            let f = ForcingSignal::cosine(n, 1.0);
            for theta in [0.0, 0.7, 2.5, -4.0] {
                assert_abs_diff_eq!(
                    phi_fn(&p, &f, theta).unwrap(),
                    -0.5 * g * PI * f64::cos(theta),
                    epsilon = 1e-12
                );
                assert_abs_diff_eq!(
                    phi_derivative(&p, &f, theta).unwrap(),
                    0.5 * g * PI * f64::sin(theta),
                    epsilon = 1e-12
                );
            }
            assert_eq!(phi_fn(&p, &ForcingSignal::zero(), 1.0).unwrap(), 0.0);
            assert_eq!(phi_derivative(&p, &ForcingSignal::zero(), 1.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn uncoupled_l_is_phi() {
        let cfg = SystemConfig::new(
            FucikPair::from_a(4.0, 1).unwrap(),
            lin(1),
            ForcingSignal::cosine(1, 1.0),
            ForcingSignal::cosine(1, 0.5).with_harmonic(3, 0.2, 0.1),
            CouplingFunction::none(),
            CouplingFunction::none(),
        )
        .unwrap();
        let ev = ResonanceEval::new(cfg).unwrap();
        let th = [0.8, 4.1];
        let l = ev.l(th);
        assert_eq!(l, [ev.phi(0, th[0]), ev.phi(1, th[1])]);
        let j = ev.jl(th);
        assert_eq!(j.a12, 0.0);
        assert_eq!(j.a21, 0.0);
        assert_eq!(j.a11, ev.phi_derivative(0, th[0]));
    }

    #[test]
    fn linear_symmetric_l() {
        let n = 2;
        let cfg = SystemConfig::new(
            lin(n),
            lin(n),
            ForcingSignal::cosine(1, 0.7),
            ForcingSignal::cosine(n, 1.0),
            CouplingFunction::step(0.4),
            CouplingFunction::step(0.1),
        )
        .unwrap();
        let ev = ResonanceEval::new(cfg).unwrap();
        let k = 2.0 * (2.0 / n as f64).sqrt();
        for th in [[0.1, 0.2], [3.0, -1.0], [5.5, 2.2]] {
            let l = ev.l(th);
            assert_abs_diff_eq!(l[0], k * 0.4 * (th[0] - th[1]).cos(), epsilon = 1e-12);
        }
    }

    #[test]
    fn quadrature_failure_is_reported() {
        let cfg = SystemConfig::new(
            lin(1),
            lin(1),
            ForcingSignal::cosine(100_000, 1.0),
            ForcingSignal::zero(),
            CouplingFunction::none(),
            CouplingFunction::none(),
        )
        .unwrap();
        assert!(matches!(
            ResonanceEval::with_tolerance(cfg, 1e-14),
            Err(Error::Quadrature { .. })
        ));
    }
}
