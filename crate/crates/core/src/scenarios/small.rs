//! Continuation of a simple uncoupled zero in the coupling strength.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{named, run_pipeline, Check, ScenarioOptions, ScenarioReport};
use crate::dynamics::Direction;
use crate::error::{Error, Result};
use crate::resonance::{find_zeros, newton_zero, CouplingFunction, ForcingSignal, ResonanceEval, SystemConfig};
use crate::special::{FucikPair, TorusPoint};
use crate::spectral::DpmClass;

const ROOT_SCAN: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmallCouplingParams {
    pub n: u32,
    pub a1: f64,
    pub a2: f64,
    pub p1: ForcingSignal,
    pub p2: ForcingSignal,
    /// Coupling limits at scale 1.
    pub limit1: f64,
    pub limit2: f64,
    pub scale_max: f64,
    pub scale_steps: usize,
}

impl Default for SmallCouplingParams {
    fn default() -> Self {
        Self {
            n: 1,
            a1: 4.0,
            a2: 2.25,
            p1: ForcingSignal::cosine(1, 1.0),
            p2: ForcingSignal::cosine(1, 1.0),
            limit1: 1.0,
            limit2: 1.0,
            scale_max: 1.0,
            scale_steps: 40,
        }
    }
}

impl SmallCouplingParams {
    pub fn scales(&self) -> Vec<f64> {
        (0..=self.scale_steps)
            .map(|k| self.scale_max * k as f64 / self.scale_steps as f64)
            .collect()
    }

    pub fn config(&self, scale: f64) -> Result<SystemConfig> {
        SystemConfig::new(
            FucikPair::from_a(self.a1, self.n)?,
            FucikPair::from_a(self.a2, self.n)?,
            self.p1.clone(),
            self.p2.clone(),
            CouplingFunction::step(scale * self.limit1),
            CouplingFunction::step(scale * self.limit2),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub scale: f64,
    pub omega: Option<TorusPoint>,
    pub classification: Option<DpmClass>,
    pub residual: f64,
}

/// The descending zero of `Φ_i`: `Φ_i(θ) = 0` with `Φ_i'(θ) < 0`.
fn descending_zero(ev: &ResonanceEval, i: usize) -> Option<f64> {
    let h = TAU / ROOT_SCAN as f64;
    let mut best: Option<(f64, f64)> = None;
    for k in 0..ROOT_SCAN {
        let (lo, hi) = (k as f64 * h, (k + 1) as f64 * h);
        let (flo, fhi) = (ev.phi(i, lo), ev.phi(i, hi));
        if !(flo > 0.0 && fhi <= 0.0) {
            continue;
        }
        let (mut lo, mut hi) = (lo, hi);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if ev.phi(i, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        let slope = ev.phi_derivative(i, root);
        // the steepest descending zero is the most robust one to continue
        if best.is_none_or(|(_, s)| slope < s) {
            best = Some((root, slope));
        }
    }
    best.map(|(r, _)| r)
}

/// Continues the zero `ω*` of the uncoupled resonance function over a grid of
/// coupling scales and reports the largest scale `φ*` up to which it stays
/// `D+`. The forward pipeline runs at the largest grid scale `≤ φ*/2`.
pub fn scenario_small_coupling(params: &SmallCouplingParams, opts: &ScenarioOptions) -> Result<ScenarioReport> {
    if params.scale_steps == 0 || !(params.scale_max > 0.0) {
        return Err(Error::InvalidArgument("scale grid needs scale_max > 0 and at least one step".into()));
    }
    let uncoupled = params.config(0.0)?;
    let ev0 = ResonanceEval::new(uncoupled.clone())?.with_execution(opts.execution());
    let roots = [descending_zero(&ev0, 0), descending_zero(&ev0, 1)];
    let [Some(w1), Some(w2)] = roots else {
        return Err(Error::Precondition(
            "an uncoupled resonance function has no descending zero".into(),
        ));
    };
    let slopes = [ev0.phi_derivative(0, w1), ev0.phi_derivative(1, w2)];
    let values = [ev0.phi(0, w1), ev0.phi(1, w2)];
    if slopes.iter().any(|s| !(*s < 0.0)) {
        return Err(Error::Precondition(format!("Φ' at ω* is {slopes:?}; the zero is not simple")));
    }

    let mut sweep = Vec::new();
    let mut seed = [w1, w2];
    let mut lost = false;
    for s in params.scales() {
        let point = if lost {
            None
        } else {
            let ev = ResonanceEval::new(params.config(s)?)?.with_execution(opts.execution());
            match newton_zero(&ev, seed, opts.newton_tol) {
                Ok(z) => {
                    seed = [
                        seed[0] + crate::special::angle_diff(z.omega.t1, seed[0]),
                        seed[1] + crate::special::angle_diff(z.omega.t2, seed[1]),
                    ];
                    Some(z)
                }
                Err(e) if e.is_numerical() => {
                    log::warn!("continuation lost at scale {s}: {e}");
                    None
                }
                Err(e) => return Err(e),
            }
        };
        lost |= point.is_none();
        sweep.push(SweepPoint {
            scale: s,
            omega: point.map(|z| z.omega),
            classification: point.map(|z| z.classification),
            residual: point.map_or(f64::NAN, |z| z.residual_norm),
        });
    }
    let phi_star = sweep
        .iter()
        .take_while(|p| p.classification == Some(DpmClass::DPlus))
        .last()
        .map(|p| p.scale);
    let flips = sweep
        .windows(2)
        .filter(|w| w[0].classification.is_some() && w[1].classification.is_some())
        .filter(|w| w[0].classification != w[1].classification)
        .count();

    let mut report = ScenarioReport {
        name: "small-coupling".into(),
        parameters: named(&[
            ("n", params.n as f64),
            ("a1", params.a1),
            ("a2", params.a2),
            ("limit1", params.limit1),
            ("limit2", params.limit2),
            ("scale_max", params.scale_max),
            ("scale_steps", params.scale_steps as f64),
        ]),
        config: uncoupled,
        derived: named(&[
            ("omega_star_1", w1),
            ("omega_star_2", w2),
            ("phi_1_at_omega_star", values[0]),
            ("phi_2_at_omega_star", values[1]),
            ("phi_1_slope", slopes[0]),
            ("phi_2_slope", slopes[1]),
            ("phi_star", phi_star.unwrap_or(f64::NAN)),
            ("classification_flips", flips as f64),
        ]),
        zeros: find_zeros(&ev0, opts.grid, opts.newton_tol)?,
        closed_form: Vec::new(),
        sweep,
        pipelines: Vec::new(),
        checks: Vec::new(),
        claims: Vec::new(),
    };

    report.checks.push(Check::new(
        "uncoupled_simple_zero",
        values.iter().all(|v| v.abs() <= 1e-10) && slopes.iter().all(|s| *s < 0.0),
        format!(
            "Φ(ω*) = ({:.3e}, {:.3e}), Φ'(ω*) = ({:.6}, {:.6})",
            values[0], values[1], slopes[0], slopes[1]
        ),
    ));
    let at_zero = report.sweep[0].classification;
    report.checks.push(Check::new(
        "dplus_without_coupling",
        at_zero == Some(DpmClass::DPlus),
        format!("class at scale 0: {at_zero:?}"),
    ));
    let positive = phi_star.is_some_and(|p| p > 0.0);
    report.checks.push(Check::new(
        "phi_star_positive",
        positive,
        format!("φ* = {phi_star:?}, {flips} classification change(s) along the branch"),
    ));
    report.claims.push(Check::new(
        "dplus_persists_for_small_coupling",
        positive,
        "the continued zero stays D+ for all grid scales in [0, φ*]",
    ));

    if let (Some(ps), false) = (phi_star, opts.zeros_only) {
        let admissible = report
            .sweep
            .iter()
            .filter(|p| p.scale > 0.0 && p.scale <= 0.5 * ps)
            .last()
            .or_else(|| report.sweep.iter().find(|p| p.scale > 0.0 && p.scale <= ps))
            .copied();
        if let Some(pt) = admissible {
            let cfg = params.config(pt.scale)?;
            report.config = cfg.clone();
            report.derived.extend(named(&[("pipeline_scale", pt.scale)]));
            let ev = ResonanceEval::new(cfg)?.with_execution(opts.execution());
            let omega = pt.omega.expect("admissible scales carry a zero").as_array();
            let zero = newton_zero(&ev, omega, opts.newton_tol)?;
            report.pipelines.push(run_pipeline(&ev, "omega_star", &zero, Direction::Forward, opts)?);
        }
    }
    report.push_pipeline_checks();
    Ok(report)
}
