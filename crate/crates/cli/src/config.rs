//! The TOML run configuration.
//!
//! Every section is optional; the defaults describe the linear symmetric
//! system (`a = b = 1`, `p₁ = cos 2t`, `p₂ = cos t`, coupling limits 0.5 and 0.1).

use std::path::Path;

use fucik_core::dynamics::{Direction, IntegratorSettings};
use fucik_core::resonance::{CouplingFunction, ForcingSignal, SystemConfig};
use fucik_core::special::FucikPair;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub a: f64,
    /// Derived from the resonance identity when omitted; checked against it otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
}

impl PairSpec {
    fn build(&self, n: u32) -> fucik_core::Result<FucikPair> {
        match self.b {
            Some(b) => FucikPair::new(self.a, b, n),
            None => FucikPair::from_a(self.a, n),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemSpec {
    pub n: u32,
    pub pair1: PairSpec,
    pub pair2: PairSpec,
    pub p1: ForcingSignal,
    pub p2: ForcingSignal,
    pub phi1: CouplingFunction,
    pub phi2: CouplingFunction,
}

impl Default for SystemSpec {
    fn default() -> Self {
        Self {
            n: 1,
            pair1: PairSpec { a: 1.0, b: None },
            pair2: PairSpec { a: 1.0, b: None },
            p1: ForcingSignal::cosine(2, 1.0),
            p2: ForcingSignal::cosine(1, 1.0),
            phi1: CouplingFunction::step(0.5),
            phi2: CouplingFunction::step(0.1),
        }
    }
}

impl SystemSpec {
    pub fn build(&self) -> fucik_core::Result<SystemConfig> {
        SystemConfig::new(
            self.pair1.build(self.n)?,
            self.pair2.build(self.n)?,
            self.p1.clone(),
            self.p2.clone(),
            self.phi1,
            self.phi2,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResonanceSection {
    /// Samples of `Λ, Σ, Φ` over one period.
    pub grid: usize,
    /// Side of the torus grid for `L`.
    pub torus_grid: usize,
}

impl Default for ResonanceSection {
    fn default() -> Self {
        Self {
            grid: 256,
            torus_grid: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZerosSection {
    pub grid: usize,
    pub tol: f64,
}

impl Default for ZerosSection {
    fn default() -> Self {
        Self { grid: 32, tol: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ContractionSection {
    /// Rows of the matrix.
    pub matrix: [[f64; 2]; 2],
    pub samples: usize,
    pub safety: f64,
}

impl Default for ContractionSection {
    fn default() -> Self {
        Self {
            matrix: [[-1.0, 0.0], [0.0, -1.0]],
            samples: 10_000,
            safety: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InvarianceSection {
    /// Index into the sorted zero list; the first `D+` (else `D-`) zero when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_index: Option<usize>,
    pub samples: usize,
    pub safety_factor: f64,
    pub radius_budget: f64,
}

impl Default for InvarianceSection {
    fn default() -> Self {
        Self {
            zero_index: None,
            samples: 500,
            safety_factor: 2.0,
            radius_budget: 1e7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrbitSection {
    /// `[θ₁, θ₂, r₁, r₂]`; when omitted the orbit starts inside the
    /// certified set around the zero selected as for `invariance`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<[f64; 4]>,
    pub iterates: usize,
    pub direction: Direction,
}

impl Default for OrbitSection {
    fn default() -> Self {
        Self {
            start: None,
            iterates: 200,
            direction: Direction::Forward,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Overrides of the scenario's parameters.
    pub params: toml::Table,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub system: SystemSpec,
    pub integrator: IntegratorSettings,
    pub resonance: ResonanceSection,
    pub zeros: ZerosSection,
    pub contraction: ContractionSection,
    pub invariance: InvarianceSection,
    pub orbit: OrbitSection,
    pub scenario: ScenarioSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that can be checked before running: the resonance
    /// identity, signal and coupling shapes, integrator tolerances.
    pub fn validate(&self) -> Result<(), CliError> {
        self.system.build()?;
        self.integrator.validate()?;
        Ok(())
    }
}

/// Parses `value` as a TOML value, falling back to a bare string.
pub fn parse_override(value: &str) -> toml::Value {
    format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()))
}
