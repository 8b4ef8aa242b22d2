use fucik_core::dynamics::Direction;
use fucik_core::scenarios::{
    scenario_linear_symmetric, scenario_phi1_null, scenario_small_coupling, LinearSymmetricParams, Phi1NullParams,
    ScenarioOptions, SmallCouplingParams,
};
use fucik_core::{DpmClass, Error, ForcingSignal};

fn quick() -> ScenarioOptions {
    ScenarioOptions {
        zeros_only: true,
        ..Default::default()
    }
}

#[test]
fn linear_symmetric_full_run() {
    let r = scenario_linear_symmetric(&LinearSymmetricParams::default(), &ScenarioOptions::default()).unwrap();
    assert!(r.passed(), "{:#?}", r.checks);
    assert_eq!(r.pipelines.len(), 2);
    for p in &r.pipelines {
        // strictly increasing min radius after the first step
        let radii = p.trace.min_radii();
        assert!(radii.windows(2).all(|w| w[1] > w[0]));
        assert!(p.orbit.all_in_set);
    }
    assert_eq!(r.pipelines[0].direction, Direction::Forward);
    assert_eq!(r.pipelines[1].direction, Direction::Backward);
}

#[test]
fn decoupled_second_equation_still_strict() {
    let p = LinearSymmetricParams {
        limit2: 0.0,
        ..Default::default()
    };
    let r = scenario_linear_symmetric(&p, &quick()).unwrap();
    assert!(r.passed(), "{:#?}", r.checks);
    let (mixed, diag) = (r.derived("mixed_product").unwrap(), r.derived("diagonal_product").unwrap());
    assert!(mixed.abs() < diag);
    assert!(r.claim("product_inequality").unwrap().passed);
}

#[test]
fn linear_symmetric_phase_shift_and_negative_limit() {
    // p₂ = cos(t + 0.4) has arg p̂₂ = -0.4, reported in [0, 2π)
    let p = LinearSymmetricParams {
        limit1: -0.5,
        p2: Some(ForcingSignal::zero().with_harmonic(1, 0.4f64.cos(), -0.4f64.sin())),
        ..Default::default()
    };
    let r = scenario_linear_symmetric(&p, &quick()).unwrap();
    let psi = r.derived("psi2").unwrap();
    assert!((psi - (std::f64::consts::TAU - 0.4)).abs() < 1e-9, "{psi}");
    assert!((psi - r.derived("psi2_exact").unwrap()).abs() < 1e-9);
    assert!(r.passed(), "{:#?}", r.checks);
    let classes: Vec<_> = r.closed_form.iter().map(|z| z.classification).collect();
    assert!(classes.contains(&DpmClass::DPlus) && classes.contains(&DpmClass::DMinus));
}

#[test]
fn phi1_null_closed_forms_and_threshold() {
    let r = scenario_phi1_null(&Phi1NullParams::default(), &quick()).unwrap();
    assert!(r.passed(), "{:#?}", r.checks);
    assert!(r.derived("max_abs_phi1").unwrap() <= 1e-9);
    assert!(r.derived("resolubility_margin").unwrap() > 0.0);
    assert_eq!(r.zeros.len(), 4);
    assert!(r.closed_form.iter().all(|z| z.distance <= 1e-8));
    assert!(r.claim("no_zeros_for_small_mu").unwrap().passed);
    // the stated sign labels of the final assignment hold; the intermediate entries do not
    assert!(r.claim("omega_minus_1_dplus_and_omega_plus_2_dminus").unwrap().passed);
    assert!(!r.claim("stated_jacobian_entries").unwrap().passed);
}

#[test]
fn phi1_null_constructed_a1_is_admissible() {
    for k in 1..=6 {
        let p = Phi1NullParams {
            k,
            ..Default::default()
        };
        let p1 = p.pair1().unwrap();
        assert!(p1.a() > 0.25, "k = {k}");
    }
}

#[test]
fn phi1_null_higher_frequency_has_more_zeros() {
    let p = Phi1NullParams {
        r: 2,
        ..Default::default()
    };
    let r = scenario_phi1_null(&p, &quick()).unwrap();
    assert!(r.zeros.len() > 4);
    assert!(r.closed_form.iter().all(|z| z.matched.is_some()));
}

#[test]
fn phi1_null_below_threshold_reports_no_closed_forms() {
    let base = scenario_phi1_null(&Phi1NullParams::default(), &quick()).unwrap();
    let mu_hat = base.derived("mu_hat").unwrap();
    let p = Phi1NullParams {
        mu: Some(0.5 * mu_hat),
        ..Default::default()
    };
    let r = scenario_phi1_null(&p, &quick()).unwrap();
    assert!(r.closed_form.is_empty());
    assert!(r.zeros.is_empty());
    assert!(!r.check("mu_above_threshold").unwrap().passed);
}

#[test]
fn phi1_null_requires_coupling() {
    let p = Phi1NullParams {
        limit1: 0.0,
        ..Default::default()
    };
    assert!(matches!(scenario_phi1_null(&p, &quick()), Err(Error::Precondition(_))));
}

#[test]
fn small_coupling_sweep() {
    let r = scenario_small_coupling(&SmallCouplingParams::default(), &ScenarioOptions::default()).unwrap();
    assert!(r.passed(), "{:#?}", r.checks);
    assert_eq!(r.sweep[0].classification, Some(DpmClass::DPlus));
    assert!(r.derived("classification_flips").unwrap() <= 1.0);
    let scale = r.derived("pipeline_scale").unwrap();
    assert!(scale > 0.0 && scale <= 0.5 * r.derived("phi_star").unwrap());
    assert_eq!(r.pipelines.len(), 1);
}

#[test]
fn small_coupling_rejects_forcing_without_descending_zero() {
    let p = SmallCouplingParams {
        p1: ForcingSignal::zero(),
        ..Default::default()
    };
    assert!(matches!(scenario_small_coupling(&p, &quick()), Err(Error::Precondition(_))));
}
