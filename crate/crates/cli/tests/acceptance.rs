//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Criterion 6 is reported as 6a (zero locations) and 6b (the stated
//! labelling of the D+ and D- zeros), since the two halves disagree.

use std::f64::consts::{PI, TAU};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use fucik_core::dynamics::{
    asymptotic_residual, choose_invariant_set, verify_invariance, Direction, IntegratorSettings,
};
use fucik_core::quadrature::GaussLegendre;
use fucik_core::resonance::{lambda_fn, resolubility_check, sigma_fn};
use fucik_core::scenarios::{
    scenario_linear_symmetric, scenario_phi1_null, scenario_small_coupling, LinearSymmetricParams, Phi1NullParams,
    ScenarioOptions, ScenarioReport, SmallCouplingParams,
};
use fucik_core::special::{asym_cosine, fourier_coeff, FucikPair};
use fucik_core::spectral::{classify_dpm, find_cone_params, spectral_norm, verify_contraction};
use fucik_core::{DpmClass, Matrix2, ResonanceEval, TorusPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn pairs() -> Vec<FucikPair> {
    vec![
        FucikPair::new(4.0, 4.0 / 9.0, 1).unwrap(),
        FucikPair::from_a(2.25, 1).unwrap(),
        FucikPair::from_a(2.0, 1).unwrap(),
        FucikPair::from_a(0.5, 1).unwrap(),
        FucikPair::from_a(5.0, 2).unwrap(),
    ]
}

/// Fixed-step RK4 for `x'' + a x⁺ - b x⁻ = 0`, `x(0) = 1`, `x'(0) = 0`,
/// sampled every `every` steps.
fn rk4_cosine(p: &FucikPair, steps: usize, every: usize) -> Vec<(f64, f64)> {
    let h = p.tau() / steps as f64;
    let f = |x: f64, y: f64| (y, if x >= 0.0 { -p.a() * x } else { -p.b() * x });
    let (mut x, mut y) = (1.0, 0.0);
    let mut out = vec![(0.0, 1.0)];
    for k in 1..=steps {
        let (k1x, k1y) = f(x, y);
        let (k2x, k2y) = f(x + 0.5 * h * k1x, y + 0.5 * h * k1y);
        let (k3x, k3y) = f(x + 0.5 * h * k2x, y + 0.5 * h * k2y);
        let (k4x, k4y) = f(x + h * k3x, y + h * k3y);
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        if k % every == 0 {
            out.push((k as f64 * h, x));
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let mut worst_ode = 0.0f64;
    for p in pairs() {
        for (t, x) in rk4_cosine(&p, 200_000, 100) {
            worst_ode = worst_ode.max((asym_cosine(&p, t) - x).abs());
        }
    }
    let p = FucikPair::new(4.0, 4.0 / 9.0, 1).unwrap();
    let coeffs: Vec<f64> = (0..=200).map(|h| fourier_coeff(&p, h).unwrap()).collect();
    let mut worst_series = 0.0f64;
    for j in 0..2000 {
        let t = p.tau() * j as f64 / 2000.0;
        let sum: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(h, c)| c * (h as f64 * p.n() as f64 * t).cos())
            .sum();
        worst_series = worst_series.max((sum - asym_cosine(&p, t)).abs());
    }
    outcome(
        worst_ode <= 1e-7 && worst_series <= 1e-3,
        format!("max |C - ODE| = {worst_ode:.2e} (≤ 1e-7), Fourier H=200 sup error = {worst_series:.2e} (≤ 1e-3)"),
    )
}

/// `∫ C₁(θ₁/n + t) dt` over `J⁺ = {t ∈ [0, 2π] : C₂(θ₂/n + t) > 0}`.
fn sign_set_integral(p1: &FucikPair, p2: &FucikPair, th1: f64, th2: f64, gl: &GaussLegendre) -> f64 {
    let n = p1.n() as f64;
    let (tau, h2) = (p2.tau(), p2.half_width());
    let shift = th2 / n;
    let first = ((shift - h2) / tau).floor() as i64 - 1;
    let last = ((TAU + shift + h2) / tau).ceil() as i64 + 1;
    let mut total = 0.0;
    for k in first..=last {
        let centre = k as f64 * tau - shift;
        let (lo, hi) = ((centre - h2).max(0.0), (centre + h2).min(TAU));
        if lo >= hi {
            continue;
        }
        let kinks: Vec<f64> = p1
            .kinks_in(th1 / n + lo, th1 / n + hi)
            .iter()
            .map(|k| k - th1 / n)
            .collect();
        total += gl.integrate_split(lo, hi, &kinks, 4, |t| asym_cosine(p1, th1 / n + t));
    }
    total
}

fn criterion_2() -> Outcome {
    let gl = GaussLegendre::default();
    let mut worst_mean = 0.0f64;
    for p in pairs() {
        let integral = gl.integrate_split(0.0, TAU, &p.kinks_in(0.0, TAU), 4, |t| asym_cosine(&p, t));
        let alpha = 1.0 / p.sqrt_a() - p.sqrt_a() / p.b();
        worst_mean = worst_mean.max((integral - 2.0 * p.n() as f64 * alpha).abs());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let combos = [
        (FucikPair::from_a(4.0, 1).unwrap(), FucikPair::from_a(2.25, 1).unwrap()),
        (FucikPair::from_a(2.25, 1).unwrap(), FucikPair::from_a(0.5, 1).unwrap()),
        (FucikPair::from_a(5.0, 2).unwrap(), FucikPair::from_a(3.0, 2).unwrap()),
    ];
    let mut worst_set = 0.0f64;
    let mut worst_fd = 0.0f64;
    let mut monotone_violations = 0;
    for (p1, p2) in &combos {
        let n = p1.n() as f64;
        for _ in 0..100 {
            let (a, b) = (rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU));
            let lhs = sign_set_integral(p1, p2, a, b, &gl);
            let rhs = n * lambda_fn(p1, p2, a - b).unwrap();
            worst_set = worst_set.max((lhs - rhs).abs());
        }
        let d = 1e-5;
        for j in 0..200 {
            let t = TAU * j as f64 / 200.0 + 0.0123;
            let fd = (lambda_fn(p1, p2, t + d).unwrap() - lambda_fn(p1, p2, t - d).unwrap()) / (2.0 * d);
            worst_fd = worst_fd.max((sigma_fn(p1, p2, t).unwrap() - n * fd).abs());
        }
        for (p, q) in [(p1, p2), (p2, p1)] {
            let grid: Vec<f64> = (1..1000).map(|j| lambda_fn(p, q, PI * j as f64 / 1000.0).unwrap()).collect();
            monotone_violations += grid.windows(2).filter(|w| !(w[1] < w[0])).count();
        }
    }
    outcome(
        worst_mean <= 1e-10 && worst_set <= 1e-7 && worst_fd <= 1e-6 && monotone_violations == 0,
        format!(
            "∫C - 2nα = {worst_mean:.1e} (≤ 1e-10), sign-set identity {worst_set:.1e} (≤ 1e-7), \
             Σ vs nΛ' {worst_fd:.1e} (≤ 1e-6), monotonicity violations {monotone_violations}"
        ),
    )
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    for n in [1u32, 2] {
        let lin = FucikPair::linear(n).unwrap();
        let n2 = (n * n) as f64;
        for _ in 0..20 {
            // log-uniform over (n²/4, 25 n²), the resonance curve's range of a
            let a = n2 / 4.0 * 100f64.powf(rng.gen_range(0.001..1.0));
            if (a - n2).abs() < 1e-9 {
                continue;
            }
            let other = FucikPair::from_a(a, n).unwrap();
            for (label, p, q) in [("(n², a)", &lin, &other), ("(a, n²)", &other, &lin)] {
                let r = resolubility_check(p, q).unwrap();
                worst = worst.min(r.margin());
                if !(r.member && r.margin() > 0.0) {
                    failures.push(format!("{label} n={n} a={a:.4}"));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("80 checks, smallest margin {worst:.3e}; failures: {failures:?}"),
    )
}

fn power_norm(b: &Matrix2) -> f64 {
    let c = b.transpose().mul(b);
    let mut v = [1.0, 0.37];
    let mut est = 0.0;
    for _ in 0..10_000 {
        let w = c.mul_vec(v);
        let nw = w[0].hypot(w[1]);
        if nw == 0.0 {
            return 0.0;
        }
        let next = nw / v[0].hypot(v[1]);
        v = [w[0] / nw, w[1] / nw];
        if (next - est).abs() <= 1e-16 * next {
            est = next;
            break;
        }
        est = next;
    }
    est.sqrt()
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let minus_id = Matrix2::diag(-1.0, -1.0);
    let cp = find_cone_params(&minus_id, 0.5).unwrap();
    let mut detail = vec![format!("a0(-I) = {}", cp.a0)];
    let mut ok = cp.a0 == 0.25;
    let mut mats = vec![minus_id];
    while mats.len() < 11 {
        let m = Matrix2::new(
            rng.gen_range(-3.0..0.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-3.0..0.0),
        );
        if classify_dpm(&m) == DpmClass::DPlus {
            mats.push(m);
        }
    }
    let mut violations = 0;
    for (i, m) in mats.iter().enumerate() {
        match find_cone_params(m, 0.5).and_then(|c| verify_contraction(m, &c, 10_000, 40 + i as u64)) {
            Ok(r) => violations += r.violations,
            Err(e) => {
                ok = false;
                detail.push(format!("matrix {i}: {e}"));
            }
        }
    }
    let mut worst_norm = 0.0f64;
    for _ in 0..100 {
        let b = Matrix2::new(
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
        );
        worst_norm = worst_norm.max((spectral_norm(&b) - power_norm(&b)).abs());
    }
    ok &= violations == 0 && worst_norm <= 1e-10;
    detail.push(format!("{violations} violations over 11 × 10⁴ samples"));
    detail.push(format!("spectral norm vs power method {worst_norm:.1e} (≤ 1e-10)"));
    outcome(ok, detail.join("; "))
}

fn criterion_5() -> Outcome {
    let st = IntegratorSettings::default();
    let configs = [
        ("linear-symmetric", LinearSymmetricParams::default().config().unwrap()),
        ("asymmetric", SmallCouplingParams::default().config(0.3).unwrap()),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (name, cfg) in configs {
        let ev = ResonanceEval::new(cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let thetas: Vec<TorusPoint> = (0..20)
            .map(|_| TorusPoint::new(rng.gen_range(0.0..TAU), rng.gen_range(0.0..TAU)))
            .collect();
        let worst = |r: f64| {
            thetas.iter().fold([0.0f64; 2], |acc, th| {
                let res = asymptotic_residual(&ev, *th, [r, r], Direction::Forward, &st).unwrap();
                let g = res.angle_residuals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let f = res.radial_residuals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                [acc[0].max(g), acc[1].max(f)]
            })
        };
        let (small, large) = (worst(1e2), worst(1e3));
        let pass = large[0] <= 0.5 * small[0] && large[1] <= 0.5 * small[1];
        ok &= pass;
        detail.push(format!(
            "{name}: G {:.2e} -> {:.2e}, F {:.2e} -> {:.2e}",
            small[0], large[0], small[1], large[1]
        ));
    }
    outcome(ok, detail.join("; "))
}

fn opts() -> ScenarioOptions {
    ScenarioOptions::default()
}

fn criterion_6a(lin: &ScenarioReport, null: &ScenarioReport) -> Outcome {
    let mut ok = lin.zeros.len() == 4 && lin.closed_form.len() == 4 && null.closed_form.len() == 4;
    let psi = lin.derived("psi2").unwrap();
    ok &= psi.abs() < 1e-9;
    let want = [
        ("+,1", [PI, PI / 2.0]),
        ("-,1", [0.0, 1.5 * PI]),
        ("+,2", [0.0, PI / 2.0]),
        ("-,2", [PI, 1.5 * PI]),
    ];
    let mut worst = 0.0f64;
    for (label, w) in want {
        let z = lin.closed(label).unwrap();
        worst = worst.max(fucik_core::special::torus_distance(z.omega, TorusPoint::new(w[0], w[1])));
        ok &= z.matched.is_some();
    }
    ok &= worst <= 1e-8;
    let null_worst = null.closed_form.iter().map(|z| z.distance).fold(0.0f64, f64::max);
    ok &= null.closed_form.iter().all(|z| z.matched.is_some()) && null_worst <= 1e-8;
    let mu = null.parameters.iter().find(|v| v.name == "mu").unwrap().value;
    let mu_hat = null.derived("mu_hat").unwrap();
    ok &= (mu - (2.0 * mu_hat + 1.0)).abs() < 1e-15;
    outcome(
        ok,
        format!(
            "linear-symmetric: {} zeros, ψ₂ = {psi:.1e}, formula vs expected {worst:.1e}, max Newton distance {:.1e}; \
             φ₁-null at μ = 2μ̂+1 = {mu:.6}: max distance {null_worst:.1e} (≤ 1e-8)",
            lin.zeros.len(),
            lin.closed_form.iter().map(|z| z.distance).fold(0.0f64, f64::max)
        ),
    )
}

fn criterion_6b(lin: &ScenarioReport) -> Outcome {
    let p2 = lin.closed("+,2").map(|z| z.classification);
    let m1 = lin.closed("-,1").map(|z| z.classification);
    outcome(
        p2 == Some(DpmClass::DPlus) && m1 == Some(DpmClass::DMinus),
        format!("expected ω^(+,2) D+ and ω^(-,1) D-; got ω^(+,2) {p2:?}, ω^(-,1) {m1:?}"),
    )
}

fn criterion_7() -> Outcome {
    let ev = ResonanceEval::new(LinearSymmetricParams::default().config().unwrap()).unwrap();
    let st = IntegratorSettings::default();
    let zeros = fucik_core::resonance::find_zeros(&ev, 32, 1e-10).unwrap();
    let Some(zero) = zeros.iter().find(|z| z.classification == DpmClass::DPlus) else {
        return outcome(false, "no D+ zero found");
    };
    let params = match choose_invariant_set(&ev, zero, Direction::Forward, &st) {
        Ok(p) => p,
        Err(e) => return outcome(false, format!("choose_invariant_set failed: {e}")),
    };
    let r = verify_invariance(&ev, &params, 500, 7, &st);
    outcome(
        r.samples == 500 && r.violations == 0 && r.growth_violations == 0 && r.ratio_violations == 0,
        format!(
            "R = {:.4e}, Θ = {:.4e}, λ = {:.4}, η = {:.4}: {} violations in {} samples \
             (growth {}, ratio {}, angle {}), worst growth slack {:.3e}",
            params.r_min,
            params.theta_radius,
            params.lambda,
            params.eta,
            r.violations,
            r.samples,
            r.growth_violations,
            r.ratio_violations,
            r.angle_violations,
            r.worst_growth_slack[0].min(r.worst_growth_slack[1])
        ),
    )
}

fn pipelines_grow(report: &ScenarioReport, need: &[Direction]) -> (bool, String) {
    let mut ok = true;
    let mut detail = Vec::new();
    for d in need {
        let Some(p) = report.pipelines.iter().find(|p| p.direction == *d) else {
            ok = false;
            detail.push(format!("{d}: missing"));
            continue;
        };
        let o = &p.orbit;
        let pass = p.invariance.passed()
            && o.iterates == 200
            && o.strictly_growing
            && o.final_min_radius >= o.guaranteed_min_radius
            && o.energy_diverging;
        ok &= pass;
        detail.push(format!(
            "{d}: min r {:.4e} -> {:.4e} (≥ {:.4e}), strictly growing {}, energy {:.3e} -> {:.3e}",
            o.initial_min_radius,
            o.final_min_radius,
            o.guaranteed_min_radius,
            o.strictly_growing,
            o.early_energy_max[0].min(o.early_energy_max[1]),
            o.late_energy_min[0].min(o.late_energy_min[1])
        ));
    }
    (ok, detail.join("; "))
}

fn criterion_8(lin: &ScenarioReport) -> Outcome {
    let (ok, detail) = pipelines_grow(lin, &[Direction::Forward, Direction::Backward]);
    outcome(ok, detail)
}

fn criterion_9() -> Outcome {
    let report = scenario_small_coupling(&SmallCouplingParams::default(), &opts()).unwrap();
    let phi_star = report.derived("phi_star").unwrap_or(f64::NAN);
    let mut ok = report.sweep[0].classification == Some(DpmClass::DPlus) && phi_star > 0.0;
    ok &= report
        .sweep
        .iter()
        .filter(|p| p.scale <= phi_star)
        .all(|p| p.classification == Some(DpmClass::DPlus));
    let (grow, detail) = pipelines_grow(&report, &[Direction::Forward]);
    ok &= grow;
    outcome(
        ok,
        format!(
            "φ* = {phi_star}, pipeline at scale {}: {detail}",
            report.derived("pipeline_scale").unwrap_or(f64::NAN)
        ),
    )
}

fn run_cli(args: &[&str], out: &Path) -> bool {
    Command::new(env!("CARGO_BIN_EXE_fucik"))
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--seed")
        .arg("11")
        .output()
        .is_ok_and(|o| o.status.success())
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn criterion_10() -> Outcome {
    let commands: [&[&str]; 6] = [
        &["resonance", "--grid", "16"],
        &["zeros"],
        &["contraction", "--samples", "2000"],
        &["invariance", "--samples", "100"],
        &["orbit", "--iterates", "20"],
        &["scenario", "linear-symmetric", "--samples", "100"],
    ];
    let tmp = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    for (i, args) in commands.iter().enumerate() {
        let a = tmp.path().join(format!("{i}a"));
        let b = tmp.path().join(format!("{i}b"));
        if !(run_cli(args, &a) && run_cli(args, &b)) {
            differing.push(format!("{} (failed)", args[0]));
            continue;
        }
        if read_dir_sorted(&a) != read_dir_sorted(&b) {
            differing.push(args[0].to_string());
        }
    }
    outcome(
        differing.is_empty(),
        format!("{} commands rerun; differing: {differing:?}", commands.len()),
    )
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        outcome(false, format!("panicked: {msg}"))
    })
}

fn main() {
    let mut results: Vec<(&str, &str, Duration, Outcome)> = Vec::new();
    let mut run = |id: &'static str, title: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = guarded(f);
        let line = format!(
            "criterion {id:<3} {} {title} [{:.1}s]: {}",
            if o.passed { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64(),
            o.detail
        );
        println!("{line}");
        results.push((id, title, t.elapsed(), o));
    };

    run("1", "special-function fidelity", &mut criterion_1);
    run("2", "resonance identities", &mut criterion_2);
    run("3", "resolubility half-lines", &mut criterion_3);
    run("4", "cone contraction", &mut criterion_4);
    run("5", "asymptotic expansion decay", &mut criterion_5);

    let lin = scenario_linear_symmetric(&LinearSymmetricParams::default(), &opts());
    let null = scenario_phi1_null(&Phi1NullParams::default(), &opts());
    match (&lin, &null) {
        (Ok(lin), Ok(null)) => {
            run("6a", "closed-form zero reproduction", &mut || criterion_6a(lin, null));
            run("6b", "stated D+/D- labelling of the linear zeros", &mut || criterion_6b(lin));
        }
        _ => run("6", "closed-form zero reproduction", &mut || {
            outcome(false, format!("scenario failed: {:?} / {:?}", lin.as_ref().err(), null.as_ref().err()))
        }),
    }
    run("7", "invariance certificate", &mut criterion_7);
    match &lin {
        Ok(lin) => run("8", "unbounded forward and backward orbits", &mut || criterion_8(lin)),
        Err(e) => run("8", "unbounded forward and backward orbits", &mut || outcome(false, e.to_string())),
    }
    run("9", "small-coupling continuation", &mut criterion_9);
    run("10", "determinism", &mut criterion_10);

    let failed: Vec<&str> = results.iter().filter(|r| !r.3.passed).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} passed{}",
        results.len() - failed.len(),
        results.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failed: {}", failed.join(", "))
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
