//! Two linear oscillators (`a = b = n²`) with `p̂₁,ₙ = 0`.
//!
//! Here `Λ_i(t) = (2/n) cos t`, `α_i = 0` and `Φ₂(u) = -|p̂₂,ₙ| cos(u + ψ₂)/√(2n)`,
//! so all four zeros and their Jacobians are explicit.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use super::{named, run_pipeline, Check, ClosedFormZero, ScenarioOptions, ScenarioReport};
use crate::dynamics::Direction;
use crate::error::{Error, Result};
use crate::resonance::{find_zeros, CouplingFunction, ForcingSignal, ResonanceEval, SystemConfig};
use crate::special::{wrap_angle, FucikPair};
use crate::spectral::{DpmClass, Matrix2};

/// `|p̂₁,ₙ|` at or below this counts as zero.
pub const HAT_ZERO_TOL: f64 = 1e-12;
const PROJECTION_NODES: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearSymmetricParams {
    pub n: u32,
    pub limit1: f64,
    pub limit2: f64,
    /// Defaults to `cos(2nt)`.
    pub p1: Option<ForcingSignal>,
    /// Defaults to `cos(nt)`.
    pub p2: Option<ForcingSignal>,
}

impl Default for LinearSymmetricParams {
    fn default() -> Self {
        Self {
            n: 1,
            limit1: 0.5,
            limit2: 0.1,
            p1: None,
            p2: None,
        }
    }
}

impl LinearSymmetricParams {
    pub fn config(&self) -> Result<SystemConfig> {
        let pair = FucikPair::linear(self.n)?;
        SystemConfig::new(
            pair,
            pair,
            self.p1.clone().unwrap_or_else(|| ForcingSignal::cosine(2 * self.n, 1.0)),
            self.p2.clone().unwrap_or_else(|| ForcingSignal::cosine(self.n, 1.0)),
            CouplingFunction::step(self.limit1),
            CouplingFunction::step(self.limit2),
        )
    }
}

/// `∫₀^{2π} p(t) e^{int} dt` by the trapezoidal rule, exact for the
/// trigonometric polynomials used here.
fn hat(p: &ForcingSignal, n: u32) -> (f64, f64) {
    let m = 4 * (p.max_harmonic() as usize + n as usize) + 8;
    let h = TAU / m as f64;
    (0..m).fold((0.0, 0.0), |(re, im), j| {
        let t = j as f64 * h;
        let v = p.eval(t) * h;
        let nt = n as f64 * t;
        (re + v * nt.cos(), im + v * nt.sin())
    })
}

/// Amplitude and phase of `Φ₂ = -A cos(u + ψ)` from its first Fourier mode.
fn project_phi2(ev: &ResonanceEval) -> (f64, f64) {
    let h = TAU / PROJECTION_NODES as f64;
    let (mut ac, mut as_) = (0.0, 0.0);
    for j in 0..PROJECTION_NODES {
        let u = j as f64 * h;
        let v = ev.phi(1, u);
        ac += v * u.cos() * h / PI;
        as_ += v * u.sin() * h / PI;
    }
    // -A cos(u + ψ) = -A cos ψ cos u + A sin ψ sin u
    (ac.hypot(as_), wrap_angle(as_.atan2(-ac)))
}

pub fn scenario_linear_symmetric(params: &LinearSymmetricParams, opts: &ScenarioOptions) -> Result<ScenarioReport> {
    let cfg = params.config()?;
    let n = params.n as f64;
    let (phi1, phi2) = (params.limit1, params.limit2);
    if phi1 == 0.0 {
        return Err(Error::Precondition("φ₁(+∞) must be non-zero".into()));
    }
    let (r1, i1) = hat(&cfg.p1, params.n);
    let hat1 = r1.hypot(i1);
    if hat1 > HAT_ZERO_TOL {
        return Err(Error::Precondition(format!("|p̂₁,ₙ| = {hat1:.3e} does not vanish")));
    }
    let (r2, i2) = hat(&cfg.p2, params.n);
    let hat2 = r2.hypot(i2);
    if !(phi2.abs() < 3.0 / 16.0 * hat2) {
        return Err(Error::Precondition(format!(
            "|φ₂(+∞)| = {} must be below 3|p̂₂,ₙ|/16 = {}",
            phi2.abs(),
            3.0 / 16.0 * hat2
        )));
    }

    let ev = ResonanceEval::new(cfg.clone())?.with_execution(opts.execution());
    let (amp, psi) = project_phi2(&ev);
    let hat2_projected = amp * (2.0 * n).sqrt();
    let psi_exact = wrap_angle(i2.atan2(r2));
    let zeros = find_zeros(&ev, opts.grid, opts.newton_tol)?;

    let k = 2.0 * (2.0 / n).sqrt();
    let d = hat2 / (2.0 * n).sqrt();
    let mut closed_form = Vec::new();
    for i in [1, 2] {
        let si = if i == 1 { -1.0 } else { 1.0 }; // (-1)^i
        for (sym, pm) in [("+", 1.0), ("-", -1.0)] {
            let omega = [-psi - si * FRAC_PI_2 + pm * FRAC_PI_2, -psi + pm * FRAC_PI_2];
            let jl = Matrix2::new(si * k * phi1, -si * k * phi1, si * k * phi2, pm * d - si * k * phi2);
            closed_form.push(ClosedFormZero::new(&format!("{sym},{i}"), omega, jl, &zeros));
        }
    }
    let mixed = (16.0 * phi1 * phi2 - 2.0 * hat2 * phi1) / n;
    let diag = (4.0 * hat2 * phi1 - 16.0 * phi1 * phi2) / n;

    let mut report = ScenarioReport {
        name: "linear-symmetric".into(),
        parameters: named(&[("n", n), ("limit1", phi1), ("limit2", phi2)]),
        config: cfg,
        derived: named(&[
            ("abs_hat_p1n", hat1),
            ("abs_hat_p2n", hat2),
            ("abs_hat_p2n_projected", hat2_projected),
            ("psi2", psi),
            ("psi2_exact", psi_exact),
            ("mixed_product", mixed),
            ("diagonal_product", diag),
        ]),
        zeros,
        closed_form,
        sweep: Vec::new(),
        pipelines: Vec::new(),
        checks: Vec::new(),
        claims: Vec::new(),
    };

    let psi_err = crate::special::angle_diff(psi, psi_exact).abs();
    report.checks.push(Check::new(
        "phi2_projection",
        psi_err <= 1e-9 && (hat2_projected - hat2).abs() <= 1e-9 * hat2.max(1.0),
        format!("ψ₂ = {psi:.12} (exact {psi_exact:.12}), |p̂₂,ₙ| = {hat2_projected:.12} (exact {hat2:.12})"),
    ));
    let count = report.zeros.len();
    report.checks.push(Check::new(
        "four_zeros",
        count == 4,
        format!("{count} zeros found on a {0}×{0} grid", opts.grid),
    ));
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
        worst_jl <= 1e-8,
        format!("largest relative deviation from the numerical JL: {worst_jl:.3e}"),
    ));
    let classes: Vec<DpmClass> = report.closed_form.iter().map(|z| z.classification).collect();
    report.checks.push(Check::new(
        "dplus_and_dminus_present",
        classes.contains(&DpmClass::DPlus) && classes.contains(&DpmClass::DMinus),
        format!(
            "{}",
            report
                .closed_form
                .iter()
                .map(|z| format!("ω^({}) {}", z.label, z.classification))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    ));

    report.claims.push(Check::new(
        "product_inequality",
        mixed.abs() < diag,
        format!("|{mixed:.6}| < {diag:.6}"),
    ));
    let class_of = |l: &str| report.closed(l).map(|z| z.classification);
    let (p2, m1) = (class_of("+,2"), class_of("-,1"));
    let want = if phi1 > 0.0 {
        (DpmClass::DPlus, DpmClass::DMinus)
    } else {
        (DpmClass::DMinus, DpmClass::DPlus)
    };
    report.claims.push(Check::new(
        "omega_plus_2_dplus_and_omega_minus_1_dminus",
        p2 == Some(want.0) && m1 == Some(want.1),
        format!("ω^(+,2): {p2:?}, ω^(-,1): {m1:?}"),
    ));

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
