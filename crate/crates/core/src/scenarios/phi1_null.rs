//! First oscillator with identically vanishing `Φ₁`.
//!
//! With `√a₁/n = 2k/(1+2k)` and `p₁ = cos(2knt)` the coefficient `c_{2k}` of
//! `C₁` vanishes, so `Φ₁ ≡ 0` and `L₁` is pure coupling. Its zeros lie on
//! `θ₁ - θ₂ = ±Λ₁*`, and `L₂ = 0` then fixes `θ₂` through
//! `cos(rθ₂) = q`, which has solutions only when `μ` exceeds `μ̂`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{named, run_pipeline, Check, ClosedFormZero, ScenarioOptions, ScenarioReport};
use crate::dynamics::Direction;
use crate::error::{Error, Result};
use crate::resonance::{
    alpha, find_zeros, lambda_fn, lambda_star, resolubility_check, CouplingFunction, ForcingSignal, ResonanceEval,
    SystemConfig,
};
use crate::special::{fourier_coeff, FucikPair};
use crate::spectral::{classify_dpm, DpmClass, Matrix2};

/// `max |Φ₁|` accepted as "identically zero".
pub const PHI1_NULL_TOL: f64 = 1e-9;
const PHI1_PROBES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Phi1NullParams {
    pub n: u32,
    pub k: u32,
    pub a2: f64,
    pub r: u32,
    /// Forcing amplitude; `None` picks `2μ̂ + 1`.
    pub mu: Option<f64>,
    pub limit1: f64,
    pub limit2: f64,
    /// `μ*` is searched on `mu_steps` geometrically spaced values from
    /// `1.01 μ̂` to `2μ`.
    pub mu_steps: usize,
}

impl Default for Phi1NullParams {
    fn default() -> Self {
        Self {
            n: 1,
            k: 2,
            a2: 1.2,
            r: 1,
            mu: None,
            limit1: 0.5,
            limit2: 0.3,
            mu_steps: 64,
        }
    }
}

impl Phi1NullParams {
    pub fn pair1(&self) -> Result<FucikPair> {
        let s = 2.0 * self.k as f64;
        let root = s / (1.0 + s) * self.n as f64;
        FucikPair::from_a(root * root, self.n)
    }

    pub fn pair2(&self) -> Result<FucikPair> {
        FucikPair::from_a(self.a2, self.n)
    }

    pub fn config(&self, mu: f64) -> Result<SystemConfig> {
        SystemConfig::new(
            self.pair1()?,
            self.pair2()?,
            ForcingSignal::cosine(2 * self.k * self.n, 1.0),
            ForcingSignal::cosine(self.r * self.n, mu),
            CouplingFunction::step(self.limit1),
            CouplingFunction::step(self.limit2),
        )
    }
}

/// `c_r` of the second oscillator's cosine series.
fn coefficient(p: &FucikPair, r: u32) -> Result<f64> {
    if p.is_symmetric() {
        Ok(if r == 1 { 1.0 } else { 0.0 })
    } else {
        fourier_coeff(p, r)
    }
}

/// Quantities fixed by the pairs and couplings, independent of `μ`.
#[derive(Debug, Clone, Copy)]
struct Shape {
    n: f64,
    r: f64,
    gamma: [f64; 2],
    limits: [f64; 2],
    c: f64,
    lambda_star: f64,
    /// `Σ₁(Λ₁*)` and `Σ₂(Λ₁*)`.
    sigma: [f64; 2],
    /// `Λ₂(Λ₁*) - α₂`.
    offset: f64,
}

impl Shape {
    fn mu_hat(&self) -> f64 {
        (2.0 * self.n * self.limits[1] * self.offset / (PI * self.c)).abs()
    }

    fn q(&self, mu: f64) -> f64 {
        2.0 * self.n * self.limits[1] * self.offset / (PI * mu * self.c)
    }

    /// `(label, ω, JL(ω), stated reference JL(ω))` for `ω^{±,i}`.
    fn closed_forms(&self, mu: f64) -> Vec<(String, [f64; 2], Matrix2, Matrix2)> {
        let q = self.q(mu);
        if !(q.abs() <= 1.0) {
            return Vec::new();
        }
        let t = q.acos() / self.r;
        let g1 = self.gamma[0] * self.limits[0];
        let g2 = self.gamma[1] * self.limits[1];
        let amp = 0.5 * self.gamma[1] * PI * mu * self.c * self.r;
        let mut out = Vec::new();
        for i in [1, 2] {
            let branch = if i == 1 { 1.0 } else { -1.0 };
            for (sym, pm) in [("+", 1.0), ("-", -1.0)] {
                let omega = [branch * self.lambda_star + pm * t, pm * t];
                let dphi2 = amp * pm * (1.0 - q * q).sqrt();
                let a11 = branch * g1 * self.sigma[0];
                let a21 = branch * g2 * self.sigma[1];
                let jl = Matrix2::new(a11, -a11, a21, dphi2 - a21);
                // the stated reference entries flip the sign of the Σ₂ terms
                let stated = Matrix2::new(a11, -a11, -a21, dphi2 + a21);
                out.push((format!("{sym},{i}"), omega, jl, stated));
            }
        }
        out
    }
}

fn classes(forms: &[(String, [f64; 2], Matrix2, Matrix2)]) -> Vec<DpmClass> {
    forms.iter().map(|f| classify_dpm(&f.2)).collect()
}

pub fn scenario_phi1_null(params: &Phi1NullParams, opts: &ScenarioOptions) -> Result<ScenarioReport> {
    if params.k == 0 || params.r == 0 {
        return Err(Error::InvalidArgument("k and r must be positive".into()));
    }
    let p1 = params.pair1()?;
    let p2 = params.pair2()?;
    if params.limit1 == 0.0 {
        return Err(Error::Precondition("φ₁(+∞) must be non-zero".into()));
    }

    // Φ₁ must vanish identically; it does not for k = 1, where b₁ = (2n)²
    let probe = ResonanceEval::new(params.config(1.0)?)?.with_execution(opts.execution());
    let phi1_max = (0..PHI1_PROBES)
        .map(|j| probe.phi(0, 2.0 * PI * j as f64 / PHI1_PROBES as f64).abs())
        .fold(0.0, f64::max);
    if phi1_max > PHI1_NULL_TOL {
        return Err(Error::Precondition(format!(
            "max |Φ₁| = {phi1_max:.3e} exceeds {PHI1_NULL_TOL:e} for k = {}",
            params.k
        )));
    }
    let res = resolubility_check(&p1, &p2)?;
    let lambda_star = lambda_star(&p1, &p2)?;
    let c = coefficient(&p2, params.r)?;
    if c == 0.0 {
        return Err(Error::Precondition(format!("c_{{{},2}} vanishes", params.r)));
    }
    let shape = Shape {
        n: params.n as f64,
        r: params.r as f64,
        gamma: [p1.gamma(), p2.gamma()],
        limits: [params.limit1, params.limit2],
        c,
        lambda_star,
        sigma: [probe.sigma(0, lambda_star), probe.sigma(1, lambda_star)],
        offset: lambda_fn(&p2, &p1, lambda_star)? - alpha(&p2),
    };
    let mu_hat = shape.mu_hat();
    let mu = params.mu.unwrap_or(2.0 * mu_hat + 1.0);
    if !(mu > 0.0) {
        return Err(Error::InvalidArgument(format!("μ must be positive, got {mu}")));
    }

    // μ*: smallest grid value from which on both a D+ and a D- zero exist
    let (lo, hi) = (1.01 * mu_hat, 2.0 * mu);
    let steps = params.mu_steps.max(2);
    let grid: Vec<f64> = (0..steps)
        .map(|j| lo * (hi / lo).powf(j as f64 / (steps - 1) as f64))
        .collect();
    let good = |m: f64| {
        let cl = classes(&shape.closed_forms(m));
        cl.contains(&DpmClass::DPlus) && cl.contains(&DpmClass::DMinus)
    };
    let flags: Vec<bool> = opts.execution().map_slice(&grid, |m| good(*m));
    let mu_star = (0..grid.len())
        .rev()
        .take_while(|&j| flags[j])
        .last()
        .map(|j| grid[j]);

    let cfg = params.config(mu)?;
    let ev = ResonanceEval::new(cfg.clone())?.with_execution(opts.execution());
    let zeros = find_zeros(&ev, opts.grid, opts.newton_tol)?;
    let forms = shape.closed_forms(mu);
    let closed_form: Vec<ClosedFormZero> = forms
        .iter()
        .map(|(label, w, jl, _)| ClosedFormZero::new(label, *w, *jl, &zeros))
        .collect();

    // below the threshold the line θ₁ - θ₂ = ±Λ₁* carries no zero of L₂
    let below = mu_hat / 2.0;
    let zeros_below = if mu_hat > 0.0 {
        let ev_low = ResonanceEval::new(params.config(below)?)?.with_execution(opts.execution());
        Some(find_zeros(&ev_low, opts.grid, opts.newton_tol)?.len())
    } else {
        None
    };

    let mut report = ScenarioReport {
        name: "phi1-null".into(),
        parameters: named(&[
            ("n", shape.n),
            ("k", params.k as f64),
            ("a2", params.a2),
            ("r", shape.r),
            ("mu", mu),
            ("limit1", params.limit1),
            ("limit2", params.limit2),
        ]),
        config: cfg,
        derived: named(&[
            ("a1", p1.a()),
            ("b1", p1.b()),
            ("b2", p2.b()),
            ("max_abs_phi1", phi1_max),
            ("resolubility_margin", res.margin()),
            ("c_r2", c),
            ("lambda_star", lambda_star),
            ("mu_hat", mu_hat),
            ("q", shape.q(mu)),
            ("mu_star", mu_star.unwrap_or(f64::NAN)),
        ]),
        zeros,
        closed_form,
        sweep: Vec::new(),
        pipelines: Vec::new(),
        checks: Vec::new(),
        claims: Vec::new(),
    };

    report.checks.push(Check::new(
        "mu_above_threshold",
        mu > mu_hat,
        format!("μ = {mu:.6}, μ̂ = {mu_hat:.6}"),
    ));
    if let Some(count) = zeros_below {
        report.checks.push(Check::new(
            "no_zeros_below_threshold",
            count == 0,
            format!("{count} zeros at μ = μ̂/2 = {below:.6}"),
        ));
    }
    if params.r == 1 {
        let count = report.zeros.len();
        report.checks.push(Check::new(
            "four_zeros",
            count == 4,
            format!("{count} zeros found on a {0}×{0} grid", opts.grid),
        ));
    }
    report.push_closed_form_checks();
    let worst_jl = report
        .closed_form
        .iter()
        .filter_map(|z| {
            let num = report.zeros[z.matched?].jacobian;
            Some(num.add_scaled(&z.jacobian, -1.0).max_abs() / num.max_abs().max(1.0))
        })
        .fold(0.0, f64::max);
    report.checks.push(Check::new(
        "closed_form_jacobian",
        worst_jl <= 1e-6,
        format!("largest relative deviation from the numerical JL: {worst_jl:.3e}"),
    ));
    report.checks.push(Check::new(
        "mu_star_found",
        mu_star.is_some_and(|m| m <= mu),
        format!("μ* = {mu_star:?} on {} values in [{lo:.4e}, {hi:.4e}]", grid.len()),
    ));

    let stated_dev = forms
        .iter()
        .zip(&report.closed_form)
        .filter_map(|((_, _, _, stated), z)| {
            let num = report.zeros[z.matched?].jacobian;
            Some(num.add_scaled(stated, -1.0).max_abs() / num.max_abs().max(1.0))
        })
        .fold(0.0, f64::max);
    report.claims.push(Check::new(
        "stated_jacobian_entries",
        stated_dev <= 1e-6,
        format!("largest relative deviation of the stated entries from the numerical JL: {stated_dev:.3e}"),
    ));
    if params.limit1 > 0.0 && c * mu > 0.0 {
        let class_of = |l: &str| report.closed(l).map(|z| z.classification);
        let (plus, minus) = (class_of("-,1"), class_of("+,2"));
        report.claims.push(Check::new(
            "omega_minus_1_dplus_and_omega_plus_2_dminus",
            plus == Some(DpmClass::DPlus) && minus == Some(DpmClass::DMinus),
            format!("ω^(-,1): {plus:?}, ω^(+,2): {minus:?}"),
        ));
    }
    if let Some(count) = zeros_below {
        report.claims.push(Check::new(
            "no_zeros_for_small_mu",
            count == 0,
            format!("{count} zeros at μ = μ̂/2"),
        ));
    }

    if !opts.zeros_only {
        for (direction, class) in [(Direction::Forward, DpmClass::DPlus), (Direction::Backward, DpmClass::DMinus)] {
            let target = report
                .closed_form
                .iter()
                .find(|z| z.classification == class && z.matched.is_some())
                .map(|z| (z.label.clone(), report.zeros[z.matched.unwrap()]));
            if let Some((label, zero)) = target {
                if zero.classification == class {
                    let p = run_pipeline(&ev, &format!("omega({label})"), &zero, direction, opts)?;
                    report.pipelines.push(p);
                }
            }
        }
        report.checks.push(Check::new(
            "both_directions_run",
            report.pipelines.len() == 2,
            format!("{} pipeline(s) ran", report.pipelines.len()),
        ));
    }
    report.push_pipeline_checks();
    Ok(report)
}
