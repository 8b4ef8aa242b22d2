//! Periodic forcings and bounded coupling functions.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic {
    pub k: u32,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// `p(t) = constant + Σ (cos_k cos(kt) + sin_k sin(kt))`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingSignal {
    #[serde(default)]
    pub constant: f64,
    #[serde(default)]
    pub harmonics: Vec<Harmonic>,
}

impl ForcingSignal {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `amplitude · cos(k t)`.
    pub fn cosine(k: u32, amplitude: f64) -> Self {
        Self {
            constant: 0.0,
            harmonics: vec![Harmonic {
                k,
                cos: amplitude,
                sin: 0.0,
            }],
        }
    }

    pub fn with_harmonic(mut self, k: u32, cos: f64, sin: f64) -> Self {
        self.harmonics.push(Harmonic { k, cos, sin });
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.constant.is_finite()
            && self
                .harmonics
                .iter()
                .all(|h| h.cos.is_finite() && h.sin.is_finite());
        if !finite {
            return Err(Error::InvalidArgument("forcing coefficients must be finite".into()));
        }
        if self.harmonics.iter().any(|h| h.k == 0) {
            return Err(Error::InvalidArgument(
                "harmonic index must be >= 1; use the constant term instead".into(),
            ));
        }
        Ok(())
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.harmonics.iter().fold(self.constant, |acc, h| {
            let (s, c) = (h.k as f64 * t).sin_cos();
            acc + h.cos * c + h.sin * s
        })
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.harmonics.iter().all(|h| h.cos == 0.0 && h.sin == 0.0)
    }

    pub fn sup_bound(&self) -> f64 {
        self.harmonics
            .iter()
            .fold(self.constant.abs(), |acc, h| acc + h.cos.abs() + h.sin.abs())
    }

    pub fn max_harmonic(&self) -> u32 {
        self.harmonics.iter().map(|h| h.k).max().unwrap_or(0)
    }

    /// Exact `∫₀^{2π} p(t) e^{ikt} dt` as `(re, im)`.
    pub fn fourier_hat(&self, k: u32) -> (f64, f64) {
        if k == 0 {
            return (2.0 * PI * self.constant, 0.0);
        }
        self.harmonics
            .iter()
            .filter(|h| h.k == k)
            .fold((0.0, 0.0), |(re, im), h| (re + PI * h.cos, im + PI * h.sin))
    }
}

/// Bounded, locally Lipschitz coupling with recorded limits `φ(±∞) = ±limit`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CouplingFunction {
    /// `limit · tanh(x / width)`.
    Step { limit: f64, width: f64 },
    /// The step plus a compactly supported bump
    /// `height · (1 - ((x - center)/radius)²)²` on `|x - center| < radius`.
    StepBump {
        limit: f64,
        width: f64,
        height: f64,
        center: f64,
        radius: f64,
    },
}

impl CouplingFunction {
    pub fn step(limit: f64) -> Self {
        CouplingFunction::Step { limit, width: 1.0 }
    }

    pub fn none() -> Self {
        Self::step(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            CouplingFunction::Step { limit, width } => limit.is_finite() && width > 0.0,
            CouplingFunction::StepBump {
                limit,
                width,
                height,
                center,
                radius,
            } => {
                limit.is_finite()
                    && width > 0.0
                    && height.is_finite()
                    && center.is_finite()
                    && radius > 0.0
                    && radius.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid coupling parameters: {self:?}")))
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            CouplingFunction::Step { limit, width } => limit * (x / width).tanh(),
            CouplingFunction::StepBump {
                limit,
                width,
                height,
                center,
                radius,
            } => {
                let u = (x - center) / radius;
                let bump = if u.abs() < 1.0 {
                    let v = 1.0 - u * u;
                    height * v * v
                } else {
                    0.0
                };
                limit * (x / width).tanh() + bump
            }
        }
    }

    /// `φ(+∞)`.
    pub fn limit_plus(&self) -> f64 {
        match *self {
            CouplingFunction::Step { limit, .. } | CouplingFunction::StepBump { limit, .. } => limit,
        }
    }

    pub fn sup_bound(&self) -> f64 {
        match *self {
            CouplingFunction::Step { limit, .. } => limit.abs(),
            CouplingFunction::StepBump { limit, height, .. } => limit.abs() + height.abs(),
        }
    }

    /// Same shape with the limit multiplied by `s` (bump unchanged).
    pub fn with_limit(&self, limit: f64) -> Self {
        match *self {
            CouplingFunction::Step { width, .. } => CouplingFunction::Step { limit, width },
            CouplingFunction::StepBump {
                width,
                height,
                center,
                radius,
                ..
            } => CouplingFunction::StepBump {
                limit,
                width,
                height,
                center,
                radius,
            },
        }
    }
}
