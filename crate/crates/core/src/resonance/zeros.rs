//! Zeros of `L` on the torus: grid seeding plus damped Newton.

use std::f64::consts::TAU;

use serde::Serialize;

use super::ResonanceEval;
use crate::error::{Error, Result};
use crate::special::{torus_distance, wrap_angle, TorusPoint};
use crate::spectral::{classify_dpm, DpmClass, Matrix2};

const MAX_ITER: usize = 50;
const STEP_TOL: f64 = 1e-12;
const DEDUP_DIST: f64 = 1e-6;
/// Fraction of the largest grid value of `|L|` below which a cell corner
/// counts as "small" and seeds Newton even without a sign change.
const SMALL_CORNER: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorusZero {
    pub omega: TorusPoint,
    pub jacobian: Matrix2,
    pub classification: DpmClass,
    pub residual_norm: f64,
}

/// What became of one Newton seed.
#[derive(Debug, Clone, PartialEq)]
pub enum SeedOutcome {
    Converged(TorusZero),
    Singular { seed: [f64; 2] },
    NoConvergence { seed: [f64; 2], residual: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroSearchReport {
    pub grid: usize,
    pub tol: f64,
    pub seeds: usize,
    pub converged: usize,
    pub singular: usize,
    pub not_converged: usize,
    pub zeros: Vec<TorusZero>,
}

fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

/// Wraps into `[0, 2π)`, snapping values a hair below `2π` to `0`.
fn canonical(t: f64) -> f64 {
    let w = wrap_angle(t);
    if TAU - w < 1e-13 {
        0.0
    } else {
        w
    }
}

fn make_zero(ev: &ResonanceEval, x: [f64; 2], residual: f64) -> TorusZero {
    let jacobian = ev.jl(x);
    TorusZero {
        omega: TorusPoint {
            t1: canonical(x[0]),
            t2: canonical(x[1]),
        },
        jacobian,
        classification: classify_dpm(&jacobian),
        residual_norm: residual,
    }
}

fn newton(ev: &ResonanceEval, seed: [f64; 2], tol: f64) -> SeedOutcome {
    let mut x = seed;
    let mut f = ev.l(x);
    let mut fn_ = norm(f);
    for _ in 0..MAX_ITER {
        let Some(d) = ev.jl(x).solve([-f[0], -f[1]]) else {
            return SeedOutcome::Singular { seed };
        };
        if fn_ <= tol && norm(d) < STEP_TOL {
            return SeedOutcome::Converged(make_zero(ev, x, fn_));
        }
        let mut lam = 1.0;
        let mut accepted = None;
        while lam >= 1.0 / 1024.0 {
            let xn = [x[0] + lam * d[0], x[1] + lam * d[1]];
            let fnew = ev.l(xn);
            if norm(fnew) < fn_ {
                accepted = Some((xn, fnew, lam));
                break;
            }
            lam *= 0.5;
        }
        match accepted {
            Some((xn, fnew, lam)) => {
                x = xn;
                f = fnew;
                fn_ = norm(f);
                if fn_ <= tol && lam * norm(d) < STEP_TOL {
                    return SeedOutcome::Converged(make_zero(ev, x, fn_));
                }
            }
            // no decrease possible: either at the roundoff floor or stuck
            None if fn_ <= tol => return SeedOutcome::Converged(make_zero(ev, x, fn_)),
            None => break,
        }
    }
    if fn_ <= tol {
        SeedOutcome::Converged(make_zero(ev, x, fn_))
    } else {
        SeedOutcome::NoConvergence { seed, residual: fn_ }
    }
}

/// Damped Newton from a single seed.
pub fn newton_zero(ev: &ResonanceEval, seed: [f64; 2], tol: f64) -> Result<TorusZero> {
    match newton(ev, seed, tol) {
        SeedOutcome::Converged(z) => Ok(z),
        SeedOutcome::Singular { seed } => Err(Error::SearchFailed(format!(
            "singular Jacobian starting from ({}, {})",
            seed[0], seed[1]
        ))),
        SeedOutcome::NoConvergence { seed, residual } => Err(Error::SearchFailed(format!(
            "Newton from ({}, {}) stalled at |L| = {residual:e}",
            seed[0], seed[1]
        ))),
    }
}

fn seeds(ev: &ResonanceEval, grid: usize) -> Vec<[f64; 2]> {
    let h = TAU / grid as f64;
    let values = ev.execution().map(grid * grid, |k| {
        let (i, j) = (k / grid, k % grid);
        ev.l([i as f64 * h, j as f64 * h])
    });
    let at = |i: usize, j: usize| values[(i % grid) * grid + (j % grid)];
    let scale = values.iter().map(|v| norm(*v)).fold(0.0, f64::max);
    let small = SMALL_CORNER * scale;

    let mut out = Vec::new();
    for i in 0..grid {
        for j in 0..grid {
            let corners = [at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1)];
            let changes = |c: usize| {
                let lo = corners.iter().map(|v| v[c]).fold(f64::INFINITY, f64::min);
                let hi = corners.iter().map(|v| v[c]).fold(f64::NEG_INFINITY, f64::max);
                lo <= 0.0 && hi >= 0.0
            };
            let near = corners.iter().any(|v| norm(*v) <= small);
            if (changes(0) && changes(1)) || near {
                out.push([(i as f64 + 0.5) * h, (j as f64 + 0.5) * h]);
            }
        }
    }
    out
}

fn dedup(mut found: Vec<TorusZero>) -> Vec<TorusZero> {
    found.sort_by(|a, b| {
        a.residual_norm
            .total_cmp(&b.residual_norm)
            .then(a.omega.t1.total_cmp(&b.omega.t1))
            .then(a.omega.t2.total_cmp(&b.omega.t2))
    });
    let mut kept: Vec<TorusZero> = Vec::new();
    for z in found {
        if kept.iter().all(|k| torus_distance(k.omega, z.omega) >= DEDUP_DIST) {
            kept.push(z);
        }
    }
    kept.sort_by(|a, b| a.omega.t1.total_cmp(&b.omega.t1).then(a.omega.t2.total_cmp(&b.omega.t2)));
    kept
}

/// All distinct zeros of `L` reachable from a `grid × grid` seeding, with
/// per-seed statistics.
pub fn find_zeros_report(ev: &ResonanceEval, grid: usize, tol: f64) -> Result<ZeroSearchReport> {
    if grid < 8 {
        return Err(Error::InvalidArgument(format!("grid must be at least 8, got {grid}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("Newton tolerance must be positive, got {tol}")));
    }
    let seeds = seeds(ev, grid);
    let outcomes = ev.execution().map_slice(&seeds, |s| newton(ev, *s, tol));
    let (mut singular, mut not_converged) = (0, 0);
    let mut found = Vec::new();
    for o in outcomes {
        match o {
            SeedOutcome::Converged(z) => found.push(z),
            SeedOutcome::Singular { seed } => {
                singular += 1;
                log::debug!("skipping seed ({:.6}, {:.6}): singular Jacobian", seed[0], seed[1]);
            }
            SeedOutcome::NoConvergence { seed, residual } => {
                not_converged += 1;
                log::debug!("seed ({:.6}, {:.6}) did not converge (|L| = {residual:e})", seed[0], seed[1]);
            }
        }
    }
    let converged = found.len();
    Ok(ZeroSearchReport {
        grid,
        tol,
        seeds: seeds.len(),
        converged,
        singular,
        not_converged,
        zeros: dedup(found),
    })
}

pub fn find_zeros(ev: &ResonanceEval, grid: usize, tol: f64) -> Result<Vec<TorusZero>> {
    find_zeros_report(ev, grid, tol).map(|r| r.zeros)
}
