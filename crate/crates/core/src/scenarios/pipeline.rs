//! Zero → invariant set → sampled verification → orbit.

use serde::Serialize;

use super::ScenarioOptions;
use crate::dynamics::{
    choose_invariant_set_with, iterate_orbit, verify_invariance_with, Direction, InvarianceReport,
    InvariantSetParams, OrbitTrace,
};
use crate::error::Result;
use crate::resonance::{ResonanceEval, TorusZero};
use crate::special::PolarState;

/// Number of iterates averaged at each end of an orbit to judge divergence.
const ENERGY_WINDOW: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitSummary {
    pub iterates: usize,
    pub initial: PolarState,
    pub last: PolarState,
    pub initial_min_radius: f64,
    pub final_min_radius: f64,
    /// `initial + iterates · min(growth margin)`.
    pub guaranteed_min_radius: f64,
    pub strictly_growing: bool,
    pub all_in_set: bool,
    /// Largest section energy over the first iterates, per oscillator.
    pub early_energy_max: [f64; 2],
    /// Smallest section energy over the last iterates, per oscillator.
    pub late_energy_min: [f64; 2],
    pub energy_diverging: bool,
}

impl OrbitSummary {
    pub fn from_trace(trace: &OrbitTrace, margins: [f64; 2]) -> Self {
        let iterates = trace.states.len() - 1;
        let radii = trace.min_radii();
        let w = ENERGY_WINDOW.min(trace.energies.len() / 2).max(1);
        let fold = |es: &[[f64; 2]], init: f64, f: fn(f64, f64) -> f64| {
            es.iter().fold([init; 2], |acc, e| [f(acc[0], e[0]), f(acc[1], e[1])])
        };
        let early = fold(&trace.energies[..w], f64::NEG_INFINITY, f64::max);
        let late = fold(&trace.energies[trace.energies.len() - w..], f64::INFINITY, f64::min);
        Self {
            iterates,
            initial: trace.states[0],
            last: *trace.states.last().expect("trace holds the initial state"),
            initial_min_radius: radii[0],
            final_min_radius: radii[iterates],
            guaranteed_min_radius: radii[0] + iterates as f64 * margins[0].min(margins[1]),
            strictly_growing: trace.strictly_growing(),
            all_in_set: trace.in_set.iter().all(|b| *b),
            early_energy_max: early,
            late_energy_min: late,
            energy_diverging: late[0] > early[0] && late[1] > early[1],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Pipeline {
    pub label: String,
    pub direction: Direction,
    pub zero: TorusZero,
    pub params: InvariantSetParams,
    pub invariance: InvarianceReport,
    pub orbit: OrbitSummary,
    #[serde(skip)]
    pub trace: OrbitTrace,
}

/// Builds `E` around `zero`, verifies it by sampling and iterates one orbit
/// started at `θ = ω`, `r = (λR, R)` (or `(R, R/λ)` when `λ < 1`).
pub fn run_pipeline(
    ev: &ResonanceEval,
    label: &str,
    zero: &TorusZero,
    direction: Direction,
    opts: &ScenarioOptions,
) -> Result<Pipeline> {
    let st = &opts.integrator;
    let params = choose_invariant_set_with(ev, zero, direction, st, &opts.search)?;
    let invariance = verify_invariance_with(ev, &params, opts.invariance_samples, opts.seed, st, opts.execution());
    let r = params.r_min;
    let (r1, r2) = if params.lambda >= 1.0 {
        (params.lambda * r, r)
    } else {
        (r, r / params.lambda)
    };
    let s0 = PolarState::new(params.omega.t1, params.omega.t2, r1, r2)?;
    let trace = iterate_orbit(ev.config(), s0, opts.orbit_iterates, direction, st, Some(&params))?;
    let orbit = OrbitSummary::from_trace(&trace, params.growth_margins);
    log::info!(
        "{label} {direction}: R = {r:.4e}, {} / {} violations, min radius {:.4e} -> {:.4e}",
        invariance.violations,
        invariance.samples,
        orbit.initial_min_radius,
        orbit.final_min_radius
    );
    Ok(Pipeline {
        label: label.to_string(),
        direction,
        zero: *zero,
        params,
        invariance,
        orbit,
        trace,
    })
}
