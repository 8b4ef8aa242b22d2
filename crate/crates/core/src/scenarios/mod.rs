//! End-to-end runs of three coupling regimes.
//!
//! * [`scenario_small_coupling`]: asymmetric oscillators whose uncoupled
//!   resonance functions have simple zeros; the zero is continued in the
//!   coupling strength.
//! * [`scenario_phi1_null`]: the first oscillator's `Φ₁` vanishes
//!   identically, and the second is forced by `μ cos(rnt)`.
//! * [`scenario_linear_symmetric`]: `a = b = n²` for both oscillators with
//!   `p̂₁,ₙ = 0`.
//!
//! Each returns a [`ScenarioReport`] with the zeros found, their closed forms
//! where known, the invariant-set certificates and orbit statistics. Claims
//! quoted from the literature are reported separately from the checks this
//! crate guarantees, so a contradicted claim does not mask a working
//! pipeline.

mod linear;
mod phi1_null;
mod pipeline;
mod small;

use serde::Serialize;

pub use linear::{scenario_linear_symmetric, LinearSymmetricParams};
pub use phi1_null::{scenario_phi1_null, Phi1NullParams};
pub use pipeline::{run_pipeline, OrbitSummary, Pipeline};
pub use small::{scenario_small_coupling, SmallCouplingParams, SweepPoint};

use crate::dynamics::{IntegratorSettings, SearchOptions};
use crate::exec::Execution;
use crate::resonance::{SystemConfig, TorusZero};
use crate::special::{torus_distance, TorusPoint};
use crate::spectral::{DpmClass, Matrix2};

/// Closed-form zeros must be matched by a numerical zero within this distance.
pub const MATCH_TOL: f64 = 1e-8;

/// Settings shared by all scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScenarioOptions {
    pub grid: usize,
    pub newton_tol: f64,
    pub invariance_samples: usize,
    pub orbit_iterates: usize,
    pub seed: u64,
    pub integrator: IntegratorSettings,
    pub search: SearchOptions,
    /// Skip invariant sets and orbits (zeros and classification only).
    pub zeros_only: bool,
}

impl Default for ScenarioOptions {
    fn default() -> Self {
        Self {
            grid: 32,
            newton_tol: 1e-10,
            invariance_samples: 500,
            orbit_iterates: 200,
            seed: 0,
            integrator: IntegratorSettings::default(),
            search: SearchOptions::default(),
            zeros_only: false,
        }
    }
}

impl ScenarioOptions {
    pub fn execution(&self) -> Execution {
        self.search.execution
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosedFormZero {
    pub label: String,
    pub omega: TorusPoint,
    pub jacobian: Matrix2,
    pub classification: DpmClass,
    /// Index into the report's numerical zeros, if one lies within [`MATCH_TOL`].
    pub matched: Option<usize>,
    pub distance: f64,
}

impl ClosedFormZero {
    fn new(label: &str, omega: [f64; 2], jacobian: Matrix2, found: &[TorusZero]) -> Self {
        let omega = TorusPoint::new(omega[0], omega[1]);
        let (matched, distance) = nearest(omega, found);
        Self {
            label: label.to_string(),
            omega,
            jacobian,
            classification: crate::spectral::classify_dpm(&jacobian),
            matched: (distance <= MATCH_TOL).then_some(matched).flatten(),
            distance,
        }
    }
}

fn nearest(p: TorusPoint, found: &[TorusZero]) -> (Option<usize>, f64) {
    found
        .iter()
        .enumerate()
        .map(|(i, z)| (Some(i), torus_distance(p, z.omega)))
        .fold((None, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

pub(crate) fn named(pairs: &[(&str, f64)]) -> Vec<NamedValue> {
    pairs
        .iter()
        .map(|(n, v)| NamedValue {
            name: n.to_string(),
            value: *v,
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub name: String,
    pub parameters: Vec<NamedValue>,
    pub config: SystemConfig,
    /// Derived quantities (margins, thresholds, phases).
    pub derived: Vec<NamedValue>,
    pub zeros: Vec<TorusZero>,
    pub closed_form: Vec<ClosedFormZero>,
    pub sweep: Vec<SweepPoint>,
    pub pipelines: Vec<Pipeline>,
    pub checks: Vec<Check>,
    /// Statements taken from the literature, each confirmed or contradicted.
    pub claims: Vec<Check>,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn claim(&self, name: &str) -> Option<&Check> {
        self.claims.iter().find(|c| c.name == name)
    }

    pub fn derived(&self, name: &str) -> Option<f64> {
        self.derived.iter().find(|v| v.name == name).map(|v| v.value)
    }

    pub fn closed(&self, label: &str) -> Option<&ClosedFormZero> {
        self.closed_form.iter().find(|z| z.label == label)
    }

    fn push_closed_form_checks(&mut self) {
        if self.closed_form.is_empty() {
            return;
        }
        let unmatched: Vec<String> = self
            .closed_form
            .iter()
            .filter(|z| z.matched.is_none())
            .map(|z| format!("{} (nearest {:.2e})", z.label, z.distance))
            .collect();
        self.checks.push(Check::new(
            "closed_form_zeros_matched",
            unmatched.is_empty(),
            if unmatched.is_empty() {
                format!("all {} closed-form zeros found within {MATCH_TOL:e}", self.closed_form.len())
            } else {
                format!("unmatched: {}", unmatched.join(", "))
            },
        ));
        let disagree: Vec<String> = self
            .closed_form
            .iter()
            .filter_map(|z| {
                let num = self.zeros[z.matched?].classification;
                (num != z.classification).then(|| format!("{}: closed form {} vs numeric {num}", z.label, z.classification))
            })
            .collect();
        self.checks.push(Check::new(
            "closed_form_classification_agrees",
            disagree.is_empty(),
            if disagree.is_empty() {
                "closed-form and numerical Jacobians give the same classes".to_string()
            } else {
                disagree.join("; ")
            },
        ));
    }

    fn push_pipeline_checks(&mut self) {
        for p in &self.pipelines {
            let tag = format!("{}_{}", p.label, p.direction);
            self.checks.push(Check::new(
                &format!("invariance_{tag}"),
                p.invariance.passed(),
                format!(
                    "{} violations in {} samples (R = {:.4e}, Θ = {:.4e})",
                    p.invariance.violations, p.invariance.samples, p.params.r_min, p.params.theta_radius
                ),
            ));
            let o = &p.orbit;
            self.checks.push(Check::new(
                &format!("orbit_growth_{tag}"),
                o.strictly_growing && o.final_min_radius >= o.guaranteed_min_radius,
                format!(
                    "min radius {:.6e} -> {:.6e} (guaranteed {:.6e}) over {} iterates",
                    o.initial_min_radius, o.final_min_radius, o.guaranteed_min_radius, o.iterates
                ),
            ));
            self.checks.push(Check::new(
                &format!("orbit_energy_diverges_{tag}"),
                o.energy_diverging,
                format!(
                    "section energies: early max {:?}, late min {:?}",
                    o.early_energy_max, o.late_energy_min
                ),
            ));
        }
    }
}
