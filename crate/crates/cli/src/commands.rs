//! One function per subcommand. Each resolves its inputs from the
//! [`RunConfig`], runs the analysis and writes CSV tables plus `report.json`.

use std::f64::consts::TAU;
use std::path::Path;

use fucik_core::dynamics::{
    choose_invariant_set_with, iterate_orbit, verify_invariance_with, Direction, OrbitTrace, SearchOptions,
};
use fucik_core::resonance::{find_zeros_report, resolubility_check, Resolubility};
use fucik_core::scenarios::{
    scenario_linear_symmetric, scenario_phi1_null, scenario_small_coupling, LinearSymmetricParams, Phi1NullParams,
    ScenarioOptions, ScenarioReport, SmallCouplingParams,
};
use fucik_core::spectral::{classify_dpm, find_cone_params, verify_contraction_with};
use fucik_core::{DpmClass, Execution, Matrix2, PolarState, ResonanceEval, TorusZero};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{num, Output};
use crate::CliError;

pub const SCENARIOS: [&str; 3] = ["small-coupling", "phi1-null", "linear-symmetric"];

pub struct Context<'a> {
    pub cfg: &'a RunConfig,
    pub out: &'a Path,
    pub exec: Execution,
}

impl Context<'_> {
    fn eval(&self) -> Result<ResonanceEval, CliError> {
        Ok(ResonanceEval::new(self.cfg.system.build()?)?.with_execution(self.exec))
    }

    fn search(&self) -> SearchOptions {
        SearchOptions {
            safety_factor: self.cfg.invariance.safety_factor,
            radius_budget: self.cfg.invariance.radius_budget,
            execution: self.exec,
            ..SearchOptions::default()
        }
    }

    fn output<C: Serialize>(&self, command: &str, config: &C) -> Result<Output, CliError> {
        Output::new(self.out, command, config)
    }
}

fn class_label(c: DpmClass) -> String {
    c.to_string()
}

pub fn resonance(ctx: &Context) -> Result<Output, CliError> {
    let ev = ctx.eval()?;
    let sec = &ctx.cfg.resonance;
    if sec.grid < 2 || sec.torus_grid < 2 {
        return Err(CliError::Config("resonance grids need at least 2 points".into()));
    }
    let mut out = ctx.output("resonance", ctx.cfg)?;

    let rows = ctx.exec.map(sec.grid, |k| {
        let t = TAU * k as f64 / sec.grid as f64;
        let mut row = vec![num(t)];
        for i in 0..2 {
            row.extend([ev.lambda(i, t), ev.sigma(i, t), ev.phi(i, t), ev.phi_derivative(i, t)].map(num));
        }
        row
    });
    out.csv(
        "functions.csv",
        &["t", "lambda1", "sigma1", "phi1", "dphi1", "lambda2", "sigma2", "phi2", "dphi2"],
        &rows,
    )?;

    let m = sec.torus_grid;
    let rows = ctx.exec.map(m * m, |k| {
        let th = [TAU * (k / m) as f64 / m as f64, TAU * (k % m) as f64 / m as f64];
        let l = ev.l(th);
        vec![num(th[0]), num(th[1]), num(l[0]), num(l[1])]
    });
    out.csv("l_torus.csv", &["theta1", "theta2", "l1", "l2"], &rows)?;

    #[derive(Serialize)]
    struct Header {
        alpha: [f64; 2],
        /// Oriented on Λ₁ and on Λ₂ respectively.
        resolubility: [Resolubility; 2],
        resolubility_margins: [f64; 2],
    }
    let sys = ev.config();
    let res = [
        resolubility_check(&sys.pair1, &sys.pair2)?,
        resolubility_check(&sys.pair2, &sys.pair1)?,
    ];
    out.report(&Header {
        alpha: [ev.alpha(0), ev.alpha(1)],
        resolubility_margins: [res[0].margin(), res[1].margin()],
        resolubility: res,
    })?;
    Ok(out)
}

fn zero_rows(zeros: &[TorusZero]) -> Vec<Vec<String>> {
    zeros
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let j = z.jacobian;
            let mut row = vec![i.to_string(), num(z.omega.t1), num(z.omega.t2)];
            row.extend([j.a11, j.a12, j.a21, j.a22, z.residual_norm].map(num));
            row.push(class_label(z.classification));
            row
        })
        .collect()
}

const ZERO_COLUMNS: [&str; 9] = ["index", "theta1", "theta2", "a11", "a12", "a21", "a22", "residual", "class"];

pub fn zeros(ctx: &Context) -> Result<Output, CliError> {
    let ev = ctx.eval()?;
    let report = find_zeros_report(&ev, ctx.cfg.zeros.grid, ctx.cfg.zeros.tol)?;
    let mut out = ctx.output("zeros", ctx.cfg)?;
    out.csv("zeros.csv", &ZERO_COLUMNS, &zero_rows(&report.zeros))?;
    out.report(&report)?;
    println!("{} zero(s)", report.zeros.len());
    for (i, z) in report.zeros.iter().enumerate() {
        println!("  [{i}] ({:.12}, {:.12}) {}", z.omega.t1, z.omega.t2, z.classification);
    }
    Ok(out)
}

pub fn contraction(ctx: &Context) -> Result<Output, CliError> {
    let sec = &ctx.cfg.contraction;
    let a = Matrix2::from_rows(sec.matrix);
    let class = classify_dpm(&a);
    if class != DpmClass::DPlus {
        return Err(CliError::Precondition(format!("matrix {:?} is {class}, not D+", sec.matrix)));
    }
    let cone = find_cone_params(&a, sec.safety)?;
    let report = verify_contraction_with(&a, &cone, sec.samples, ctx.cfg.seed, ctx.exec)?;
    let mut out = ctx.output("contraction", ctx.cfg)?;
    out.csv(
        "contraction.csv",
        &["a0", "eps0", "eta", "samples", "violations", "worst_margin"],
        &[vec![
            num(cone.a0),
            num(cone.eps0),
            num(cone.eta),
            report.samples.to_string(),
            report.violations.to_string(),
            num(report.worst_margin),
        ]],
    )?;
    #[derive(Serialize)]
    struct R<'a> {
        matrix: Matrix2,
        classification: DpmClass,
        cone: fucik_core::spectral::ConeParams,
        report: &'a fucik_core::spectral::ContractionReport,
    }
    out.report(&R {
        matrix: a,
        classification: class,
        cone,
        report: &report,
    })?;
    println!(
        "a0 = {:.6}, eps0 = {:.6}, eta = {:.6}: {} violation(s) in {} samples",
        cone.a0, cone.eps0, cone.eta, report.violations, report.samples
    );
    if !report.passed() {
        return Err(CliError::Numerical(format!("{} contraction violations", report.violations)));
    }
    Ok(out)
}

/// The zero to build a set around, and the direction its class dictates.
struct Selected {
    index: usize,
    zero: TorusZero,
    direction: Direction,
    note: Option<String>,
}

fn select_zero(ctx: &Context, ev: &ResonanceEval, requested: Option<Direction>) -> Result<Selected, CliError> {
    let report = find_zeros_report(ev, ctx.cfg.zeros.grid, ctx.cfg.zeros.tol)?;
    let zeros = report.zeros;
    let index = match ctx.cfg.invariance.zero_index {
        Some(i) if i < zeros.len() => i,
        Some(i) => {
            return Err(CliError::Precondition(format!("zero index {i} out of range ({} zeros)", zeros.len())));
        }
        None => {
            let want = match requested {
                Some(Direction::Backward) => vec![DpmClass::DMinus],
                Some(Direction::Forward) => vec![DpmClass::DPlus],
                None => vec![DpmClass::DPlus, DpmClass::DMinus],
            };
            want.iter()
                .find_map(|c| zeros.iter().position(|z| z.classification == *c))
                .ok_or_else(|| CliError::Precondition(format!("no zero of class {want:?} among {} zeros", zeros.len())))?
        }
    };
    let zero = zeros[index];
    let direction = match zero.classification {
        DpmClass::DPlus => Direction::Forward,
        DpmClass::DMinus => Direction::Backward,
        DpmClass::Neither => {
            return Err(CliError::Precondition(format!("zero {index} is neither D+ nor D-")));
        }
    };
    let note = match (zero.classification, requested) {
        (DpmClass::DMinus, r) if r != Some(Direction::Backward) => {
            Some(format!("zero {index} is D-: routed to the backward map"))
        }
        (DpmClass::DPlus, Some(Direction::Backward)) => {
            Some(format!("zero {index} is D+: routed to the forward map"))
        }
        _ => None,
    };
    if let Some(n) = &note {
        eprintln!("note: {n}");
    }
    Ok(Selected {
        index,
        zero,
        direction,
        note,
    })
}

pub fn invariance(ctx: &Context, requested: Option<Direction>) -> Result<Output, CliError> {
    let ev = ctx.eval()?;
    let sel = select_zero(ctx, &ev, requested)?;
    let st = &ctx.cfg.integrator;
    let params = choose_invariant_set_with(&ev, &sel.zero, sel.direction, st, &ctx.search())?;
    let report = verify_invariance_with(&ev, &params, ctx.cfg.invariance.samples, ctx.cfg.seed, st, ctx.exec);
    let mut out = ctx.output("invariance", ctx.cfg)?;
    out.csv(
        "invariant_set.csv",
        &["zero_index", "direction", "R", "Theta", "lambda", "eta", "margin1", "margin2", "samples", "violations"],
        &[vec![
            sel.index.to_string(),
            sel.direction.to_string(),
            num(params.r_min),
            num(params.theta_radius),
            num(params.lambda),
            num(params.eta),
            num(params.growth_margins[0]),
            num(params.growth_margins[1]),
            report.samples.to_string(),
            report.violations.to_string(),
        ]],
    )?;
    #[derive(Serialize)]
    struct R<'a> {
        zero_index: usize,
        zero: TorusZero,
        direction: Direction,
        note: Option<String>,
        params: &'a fucik_core::dynamics::InvariantSetParams,
        report: &'a fucik_core::dynamics::InvarianceReport,
    }
    out.report(&R {
        zero_index: sel.index,
        zero: sel.zero,
        direction: sel.direction,
        note: sel.note,
        params: &params,
        report: &report,
    })?;
    println!(
        "{} set around zero {}: R = {:.6e}, Θ = {:.6e}, λ = {:.6}, η = {:.6}; {} violation(s) in {} samples",
        sel.direction,
        sel.index,
        params.r_min,
        params.theta_radius,
        params.lambda,
        params.eta,
        report.violations,
        report.samples
    );
    if !report.passed() {
        return Err(CliError::Numerical(format!("{} invariance violations", report.violations)));
    }
    Ok(out)
}

fn trace_rows(trace: &OrbitTrace) -> Vec<Vec<String>> {
    trace
        .states
        .iter()
        .zip(&trace.in_set)
        .zip(&trace.energies)
        .enumerate()
        .map(|(k, ((s, inside), e))| {
            vec![
                k.to_string(),
                num(s.theta1),
                num(s.theta2),
                num(s.r1),
                num(s.r2),
                u8::from(*inside).to_string(),
                num(e[0]),
                num(e[1]),
            ]
        })
        .collect()
}

const TRACE_COLUMNS: [&str; 8] = ["k", "theta1", "theta2", "r1", "r2", "in_E", "energy1", "energy2"];

pub fn orbit(ctx: &Context, requested: Option<Direction>) -> Result<Output, CliError> {
    let sec = &ctx.cfg.orbit;
    if sec.iterates == 0 {
        return Err(CliError::Precondition("orbit needs at least one iterate".into()));
    }
    let ev = ctx.eval()?;
    let st = &ctx.cfg.integrator;
    let (s0, direction, params) = match sec.start {
        Some([t1, t2, r1, r2]) => (PolarState::new(t1, t2, r1, r2)?, requested.unwrap_or(sec.direction), None),
        None => {
            let sel = select_zero(ctx, &ev, requested.or(Some(sec.direction)))?;
            let p = choose_invariant_set_with(&ev, &sel.zero, sel.direction, st, &ctx.search())?;
            let r = p.r_min;
            let (r1, r2) = if p.lambda >= 1.0 { (p.lambda * r, r) } else { (r, r / p.lambda) };
            (PolarState::new(p.omega.t1, p.omega.t2, r1, r2)?, sel.direction, Some(p))
        }
    };
    let trace = iterate_orbit(ev.config(), s0, sec.iterates, direction, st, params.as_ref())?;
    let mut out = ctx.output("orbit", ctx.cfg)?;
    out.csv("orbit.csv", &TRACE_COLUMNS, &trace_rows(&trace))?;
    #[derive(Serialize)]
    struct R<'a> {
        direction: Direction,
        start: PolarState,
        last: PolarState,
        strictly_growing: bool,
        all_in_set: bool,
        set: Option<&'a fucik_core::dynamics::InvariantSetParams>,
    }
    let last = *trace.states.last().expect("non-empty trace");
    out.report(&R {
        direction,
        start: s0,
        last,
        strictly_growing: trace.strictly_growing(),
        all_in_set: trace.in_set.iter().all(|b| *b),
        set: params.as_ref(),
    })?;
    println!(
        "{direction} orbit, {} iterates: min radius {:.6e} -> {:.6e}",
        sec.iterates,
        s0.min_radius(),
        last.min_radius()
    );
    Ok(out)
}

/// Resolved scenario parameters, echoed into the report header.
#[derive(Serialize)]
#[serde(untagged)]
enum ScenarioParams {
    Small(SmallCouplingParams),
    Null(Phi1NullParams),
    Linear(LinearSymmetricParams),
}

pub fn scenario(ctx: &Context, name: &str) -> Result<Output, CliError> {
    let table = toml::Value::Table(ctx.cfg.scenario.params.clone());
    let bad = |e: toml::de::Error| CliError::Config(format!("scenario parameters: {e}"));
    let params = match name {
        "small-coupling" => ScenarioParams::Small(table.try_into().map_err(bad)?),
        "phi1-null" => ScenarioParams::Null(table.try_into().map_err(bad)?),
        "linear-symmetric" => ScenarioParams::Linear(table.try_into().map_err(bad)?),
        other => {
            return Err(CliError::Config(format!(
                "unknown scenario {other:?} (expected one of {})",
                SCENARIOS.join(", ")
            )));
        }
    };
    let opts = ScenarioOptions {
        grid: ctx.cfg.zeros.grid,
        newton_tol: ctx.cfg.zeros.tol,
        invariance_samples: ctx.cfg.invariance.samples,
        orbit_iterates: ctx.cfg.orbit.iterates,
        seed: ctx.cfg.seed,
        integrator: ctx.cfg.integrator,
        search: ctx.search(),
        zeros_only: false,
    };
    let report: ScenarioReport = match &params {
        ScenarioParams::Small(p) => scenario_small_coupling(p, &opts)?,
        ScenarioParams::Null(p) => scenario_phi1_null(p, &opts)?,
        ScenarioParams::Linear(p) => scenario_linear_symmetric(p, &opts)?,
    };

    #[derive(Serialize)]
    struct Header<'a> {
        run: &'a RunConfig,
        scenario: &'a str,
        parameters: &'a ScenarioParams,
        options: &'a ScenarioOptions,
    }
    let mut out = ctx.output(
        "scenario",
        &Header {
            run: ctx.cfg,
            scenario: name,
            parameters: &params,
            options: &opts,
        },
    )?;
    out.csv("zeros.csv", &ZERO_COLUMNS, &zero_rows(&report.zeros))?;
    if !report.sweep.is_empty() {
        let rows: Vec<Vec<String>> = report
            .sweep
            .iter()
            .map(|p| {
                vec![
                    num(p.scale),
                    p.omega.map_or("nan".into(), |w| num(w.t1)),
                    p.omega.map_or("nan".into(), |w| num(w.t2)),
                    p.classification.map_or("lost".into(), class_label),
                    num(p.residual),
                ]
            })
            .collect();
        out.csv("sweep.csv", &["scale", "theta1", "theta2", "class", "residual"], &rows)?;
    }
    for p in &report.pipelines {
        let name = format!("orbit_{}_{}.csv", sanitize(&p.label), p.direction);
        out.csv(&name, &TRACE_COLUMNS, &trace_rows(&p.trace))?;
    }
    out.report(&report)?;

    println!("scenario {name}");
    for c in &report.checks {
        println!("  [{}] {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
    }
    for c in &report.claims {
        let verdict = if c.passed { "confirmed" } else { "CONTRADICTED" };
        println!("  claim [{verdict}] {}: {}", c.name, c.detail);
    }
    if !report.passed() {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        return Err(CliError::Numerical(format!("failed checks: {}", failed.join(", "))));
    }
    Ok(out)
}

fn sanitize(label: &str) -> String {
    label
        .chars()
        .map(|c| match c {
            '+' => 'p',
            '-' => 'm',
            c if c.is_ascii_alphanumeric() => c,
            _ => '_',
        })
        .collect::<String>()
        .trim_matches('_')
        .to_string()
}
