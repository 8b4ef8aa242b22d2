//! Construction and sampling verification of the invariant sets
//!
//! ```text
//! E = { (θ, r) : r_i ≥ R, λ - η ≤ r₁/r₂ ≤ λ + η, ‖θ - ω‖ ≤ Θ }
//! ```
//!
//! around a zero `ω` of `L`. The constants follow the constructive proof:
//! `λ` from the diagonal of `JL(ω)`, `η` and `ε₀` from the cone lemma, `Θ`
//! from sign, slope and linearisation conditions on the `Θ`-ball, and `R`
//! from remainder bounds measured on actual Poincaré images.
//!
//! The backward case is the forward construction for the inverse map, whose
//! expansion carries `-L` in place of `L`.

use std::f64::consts::{PI, SQRT_2, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::poincare::{asymptotic_residual, poincare_map};
use super::{Direction, IntegratorSettings};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::resonance::{ResonanceEval, TorusZero};
use crate::special::{torus_distance, PolarState, TorusPoint};
use crate::spectral::{classify_dpm, find_cone_params, ConeParams, DpmClass, Matrix2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RemainderBounds {
    /// Radius at which the bounds were measured (and above, up to 10×).
    pub radius: f64,
    pub g_max: f64,
    pub f_min: [f64; 2],
    /// `max |F₂ - F₁/(λ+η)|`.
    pub f_upper_slope: f64,
    /// `max |F₁/(λ-η) - F₂|`.
    pub f_lower_slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvariantSetParams {
    pub omega: TorusPoint,
    /// `R`.
    pub r_min: f64,
    /// `Θ`.
    pub theta_radius: f64,
    pub lambda: f64,
    pub eta: f64,
    /// Guaranteed per-iterate radial growth, half of `certified_margins`.
    pub growth_margins: [f64; 2],
    pub direction: Direction,
    /// Lower bounds of `-s ∂_iL_i` on the `Θ`-ball.
    pub certified_margins: [f64; 2],
    pub cone: ConeParams,
    /// `max ‖L‖` on the `Θ/2`-ball.
    pub l_star: f64,
    pub remainders: RemainderBounds,
}

impl InvariantSetParams {
    pub fn contains(&self, s: &PolarState) -> bool {
        let ratio = s.r1 / s.r2;
        s.r1 >= self.r_min
            && s.r2 >= self.r_min
            && ratio >= self.lambda - self.eta
            && ratio <= self.lambda + self.eta
            && torus_distance(s.angles(), self.omega) <= self.theta_radius
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchOptions {
    /// Factor applied to measured remainders before comparing with the bounds.
    pub safety_factor: f64,
    /// Relative slack demanded by the cone search.
    pub cone_safety: f64,
    /// Rings × spokes used to sample the `Θ`-ball.
    pub ball_rings: usize,
    pub ball_spokes: usize,
    /// Angular samples used when measuring remainders.
    pub remainder_spokes: usize,
    /// Largest `R` tried before giving up.
    pub radius_budget: f64,
    pub execution: Execution,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            safety_factor: 2.0,
            cone_safety: 0.5,
            ball_rings: 8,
            ball_spokes: 32,
            remainder_spokes: 8,
            radius_budget: 1e7,
            execution: Execution::default(),
        }
    }
}

fn ball_points(center: [f64; 2], radius: f64, rings: usize, spokes: usize) -> Vec<[f64; 2]> {
    let mut pts = Vec::with_capacity(rings * spokes);
    for k in 1..=rings {
        let rho = radius * k as f64 / rings as f64;
        for j in 0..spokes {
            let phi = TAU * j as f64 / spokes as f64;
            pts.push([center[0] + rho * phi.cos(), center[1] + rho * phi.sin()]);
        }
    }
    pts
}

struct Effective<'a> {
    ev: &'a ResonanceEval,
    s: f64,
}

impl Effective<'_> {
    fn l(&self, th: [f64; 2]) -> [f64; 2] {
        let l = self.ev.l(th);
        [self.s * l[0], self.s * l[1]]
    }

    fn jl(&self, th: [f64; 2]) -> Matrix2 {
        self.ev.jl(th).scale(self.s)
    }
}

struct BallCheck {
    margins: [f64; 2],
}

/// Sign (margins), slope and linearisation conditions on the `Θ`-ball.
fn check_ball(eff: &Effective, omega: [f64; 2], a: &Matrix2, lambda: f64, eta: f64, a0: f64, theta: f64, opts: &SearchOptions) -> Option<BallCheck> {
    let pts = ball_points(omega, theta, opts.ball_rings, opts.ball_spokes);
    let d22 = -a.a22;
    let upper = d22 * eta / (2.0 * (lambda + eta));
    let lower = d22 * eta / (2.0 * (lambda - eta));
    let vals = opts.execution.map_slice(&pts, |th| (eff.l(*th), eff.jl(*th)));
    let mut margins = [f64::INFINITY; 2];
    for (th, (l, j)) in pts.iter().zip(vals) {
        margins[0] = margins[0].min(-j.a11);
        margins[1] = margins[1].min(-j.a22);
        if j.a11 / (lambda + eta) - j.a22 < upper || j.a22 - j.a11 / (lambda - eta) < lower {
            return None;
        }
        let d = [th[0] - omega[0], th[1] - omega[1]];
        let dist = d[0].hypot(d[1]);
        let lin = a.mul_vec(d);
        let alpha = ((l[0] - lin[0]) / dist).hypot((l[1] - lin[1]) / dist);
        if alpha > a0 / 4.0 {
            return None;
        }
    }
    (margins[0] > 0.0 && margins[1] > 0.0).then_some(BallCheck { margins })
}

/// Radius pairs with `min r = base` and the given ratio `r₁/r₂`.
fn radii(base: f64, ratio: f64) -> [f64; 2] {
    if ratio >= 1.0 {
        [base * ratio, base]
    } else {
        [base, base / ratio]
    }
}

#[allow(clippy::too_many_arguments)]
fn measure_remainders(
    ev: &ResonanceEval,
    omega: [f64; 2],
    theta: f64,
    lambda: f64,
    eta: f64,
    radius: f64,
    direction: Direction,
    st: &IntegratorSettings,
    opts: &SearchOptions,
) -> Result<RemainderBounds> {
    let mut angles = vec![omega];
    angles.extend(ball_points(omega, theta, 2, opts.remainder_spokes));
    let mut jobs = Vec::new();
    for th in &angles {
        for base in [radius, 3.0 * radius, 10.0 * radius] {
            for q in [lambda - eta, lambda, lambda + eta] {
                jobs.push((*th, radii(base, q)));
            }
        }
    }
    let res = opts.execution.map_slice(&jobs, |(th, r)| {
        asymptotic_residual(ev, TorusPoint::new(th[0], th[1]), *r, direction, st)
    });
    let mut b = RemainderBounds {
        radius,
        g_max: 0.0,
        f_min: [f64::INFINITY; 2],
        f_upper_slope: 0.0,
        f_lower_slope: 0.0,
    };
    for r in res {
        let r = r?;
        let [g1, g2] = r.angle_residuals;
        let [f1, f2] = r.radial_residuals;
        b.g_max = b.g_max.max(g1.hypot(g2));
        b.f_min = [b.f_min[0].min(f1), b.f_min[1].min(f2)];
        b.f_upper_slope = b.f_upper_slope.max((f2 - f1 / (lambda + eta)).abs());
        b.f_lower_slope = b.f_lower_slope.max((f1 / (lambda - eta) - f2).abs());
    }
    Ok(b)
}

pub fn choose_invariant_set(
    ev: &ResonanceEval,
    zero: &TorusZero,
    direction: Direction,
    st: &IntegratorSettings,
) -> Result<InvariantSetParams> {
    choose_invariant_set_with(ev, zero, direction, st, &SearchOptions::default())
}

pub fn choose_invariant_set_with(
    ev: &ResonanceEval,
    zero: &TorusZero,
    direction: Direction,
    st: &IntegratorSettings,
    opts: &SearchOptions,
) -> Result<InvariantSetParams> {
    let expected = match direction {
        Direction::Forward => DpmClass::DPlus,
        Direction::Backward => DpmClass::DMinus,
    };
    if zero.classification != expected {
        return Err(Error::Precondition(format!(
            "{direction} invariant sets need a {expected} zero, got {}",
            zero.classification
        )));
    }
    let eff = Effective { ev, s: direction.sign() };
    let omega = zero.omega.as_array();
    let a = eff.jl(omega);
    if classify_dpm(&a) != DpmClass::DPlus {
        return Err(Error::NotDPlus);
    }
    let lambda = a.a11 / a.a22;
    let cone = find_cone_params(&a, opts.cone_safety)?;
    let eta = cone.eta;
    let d22 = -a.a22;

    // largest Θ on a geometric ladder below π satisfying the ball conditions
    let mut theta = 0.9 * PI;
    let mut ball = None;
    for _ in 0..100 {
        if let Some(b) = check_ball(&eff, omega, &a, lambda, eta, cone.a0, theta, opts) {
            ball = Some(b);
            break;
        }
        theta *= 0.8;
    }
    let Some(ball) = ball else {
        return Err(Error::SearchFailed("no angular radius satisfies the ball conditions".into()));
    };
    let margins = ball.margins;

    let half = ball_points(omega, 0.5 * theta, opts.ball_rings, opts.ball_spokes);
    let l_star = opts
        .execution
        .map_slice(&half, |th| {
            let l = eff.l(*th);
            l[0].hypot(l[1])
        })
        .into_iter()
        .fold(0.0, f64::max);

    let k = opts.safety_factor;
    let g_bound = l_star.min(cone.a0 * theta / 8.0);
    let upper = d22 * eta / (2.0 * (lambda + eta));
    let lower = d22 * eta / (2.0 * (lambda - eta));
    let mut radius = (SQRT_2 / cone.eps0).max(4.0 * l_star / theta).max(1.0);
    while radius <= opts.radius_budget {
        let rb = measure_remainders(ev, omega, theta, lambda, eta, radius, direction, st, opts)?;
        let ok = k * (-rb.f_min[0]).max(0.0) <= margins[0] / 2.0
            && k * (-rb.f_min[1]).max(0.0) <= margins[1] / 2.0
            && k * rb.f_upper_slope < upper
            && k * rb.f_lower_slope < lower
            && k * rb.g_max < g_bound;
        log::debug!(
            "R = {radius:.3e}: |G| = {:.3e} (bound {g_bound:.3e}), F_min = {:?}, slopes = ({:.3e}, {:.3e}) -> {ok}",
            rb.g_max,
            rb.f_min,
            rb.f_upper_slope,
            rb.f_lower_slope
        );
        if ok {
            return Ok(InvariantSetParams {
                omega: zero.omega,
                r_min: radius,
                theta_radius: theta,
                lambda,
                eta,
                growth_margins: [margins[0] / 2.0, margins[1] / 2.0],
                direction,
                certified_margins: margins,
                cone,
                l_star,
                remainders: rb,
            });
        }
        radius *= 2.0;
    }
    Err(Error::SearchFailed(format!(
        "remainders did not fall below the required bounds for R up to {:e}",
        opts.radius_budget
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    pub samples: usize,
    pub boundary_samples: usize,
    pub violations: usize,
    pub growth_violations: usize,
    pub ratio_violations: usize,
    pub angle_violations: usize,
    pub map_failures: usize,
    /// Smallest `ρ_i - r_i - margin_i`.
    pub worst_growth_slack: [f64; 2],
    /// Smallest distance of `ρ₁/ρ₂` to the ends of `[λ-η, λ+η]`.
    pub worst_ratio_slack: f64,
    /// Smallest `Θ - ‖u - ω‖`.
    pub worst_angle_slack: f64,
}

impl InvarianceReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Draws `n_samples` points of `E` and checks that their images stay in `E`
/// with the promised radial growth. The first fifth of the budget sits on
/// the boundary (`r = R`, ratio `λ ± η`, `‖θ - ω‖ = Θ`).
pub fn verify_invariance(
    ev: &ResonanceEval,
    params: &InvariantSetParams,
    n_samples: usize,
    seed: u64,
    st: &IntegratorSettings,
) -> InvarianceReport {
    verify_invariance_with(ev, params, n_samples, seed, st, ev.execution())
}

pub fn verify_invariance_with(
    ev: &ResonanceEval,
    params: &InvariantSetParams,
    n_samples: usize,
    seed: u64,
    st: &IntegratorSettings,
    exec: Execution,
) -> InvarianceReport {
    let p = params;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let boundary = n_samples / 5;
    let omega = p.omega.as_array();
    let starts: Vec<PolarState> = (0..n_samples)
        .map(|k| {
            let phi = rng.gen_range(0.0..TAU);
            let (rho, base, ratio) = if k < boundary {
                let ratio = if k % 2 == 0 { p.lambda - p.eta } else { p.lambda + p.eta };
                (p.theta_radius, p.r_min, ratio)
            } else {
                let rho = p.theta_radius * rng.gen::<f64>().sqrt();
                let base = p.r_min * 10f64.powf(rng.gen::<f64>());
                let ratio = rng.gen_range(p.lambda - p.eta..=p.lambda + p.eta);
                (rho, base, ratio)
            };
            let r = radii(base, ratio);
            PolarState {
                theta1: omega[0] + rho * phi.cos(),
                theta2: omega[1] + rho * phi.sin(),
                r1: r[0],
                r2: r[1],
            }
        })
        .collect();
    let images = exec.map_slice(&starts, |s| poincare_map(ev.config(), *s, p.direction, st));

    let mut rep = InvarianceReport {
        samples: n_samples,
        boundary_samples: boundary,
        violations: 0,
        growth_violations: 0,
        ratio_violations: 0,
        angle_violations: 0,
        map_failures: 0,
        worst_growth_slack: [f64::INFINITY; 2],
        worst_ratio_slack: f64::INFINITY,
        worst_angle_slack: f64::INFINITY,
    };
    for (s, img) in starts.iter().zip(images) {
        let Ok(img) = img else {
            rep.map_failures += 1;
            rep.violations += 1;
            continue;
        };
        let g = [img.r1 - s.r1 - p.growth_margins[0], img.r2 - s.r2 - p.growth_margins[1]];
        let q = img.r1 / img.r2;
        let ratio_slack = (q - (p.lambda - p.eta)).min(p.lambda + p.eta - q);
        let angle_slack = p.theta_radius - torus_distance(img.angles(), p.omega);
        rep.worst_growth_slack = [rep.worst_growth_slack[0].min(g[0]), rep.worst_growth_slack[1].min(g[1])];
        rep.worst_ratio_slack = rep.worst_ratio_slack.min(ratio_slack);
        rep.worst_angle_slack = rep.worst_angle_slack.min(angle_slack);
        let bad_growth = g[0] < 0.0 || g[1] < 0.0;
        let bad_ratio = ratio_slack < 0.0;
        let bad_angle = angle_slack < 0.0;
        rep.growth_violations += bad_growth as usize;
        rep.ratio_violations += bad_ratio as usize;
        rep.angle_violations += bad_angle as usize;
        rep.violations += (bad_growth || bad_ratio || bad_angle) as usize;
    }
    rep
}
