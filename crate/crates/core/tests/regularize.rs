mod common;

use common::*;
use proptest::prelude::*;
use pwhs_core::regularize::{
    holomorphy_defect, reg_field, sigma_gap, slow_fast, transition_map_experiment,
    RegularizedSystem, SampleBox, TransitionCase, TransitionExperiment, TransitionFunction,
};
use pwhs_core::switching::sliding_speed;
use pwhs_core::{FieldSpec, IntegratorOptions, PWSystem, SwitchingLine};

const ALL_PHI: [TransitionFunction; 4] = [
    TransitionFunction::PolyST,
    TransitionFunction::QuinticST,
    TransitionFunction::Tanh,
    TransitionFunction::ArctanScaled,
];

#[test]
fn transition_functions() {
    for phi in ALL_PHI {
        assert_eq!(phi.value(0.0), 0.0);
        let mut prev = -1.0;
        for k in 0..=400 {
            let t = -4.0 + 0.02 * k as f64;
            let v = phi.value(t);
            assert!((-1.0..=1.0).contains(&v) && v >= prev, "{phi:?} at {t}");
            prev = v;
        }
    }
    for (phi, n) in [(TransitionFunction::PolyST, 1), (TransitionFunction::QuinticST, 2)] {
        assert_eq!(phi.smoothness(), Some(n));
        assert_eq!(phi.value(1.0), 1.0);
        assert_eq!(phi.value(-3.0), -1.0);
        assert_eq!(phi.derivative(1.0), 0.0);
        let nf = n as f64;
        assert!((phi.lambda_star().unwrap() - nf / (2.0 * nf - 1.0)).abs() < 1e-15);
    }
    assert_eq!(TransitionFunction::Tanh.lambda_star(), None);
}

fn sample_system() -> impl Strategy<Value = (PWSystem, f64)> {
    (0..case_rows().len(), 0.01..0.5f64).prop_map(|(i, eps)| (case_rows().swap_remove(i).sys, eps))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn blend_is_exact_outside_the_strip((sys, eps) in sample_system(), d in 1.0..3.0f64, s in -2.0..2.0f64, right in prop::bool::ANY) {
        let r = RegularizedSystem::new(sys.clone(), TransitionFunction::PolyST, eps).unwrap();
        let x = if right { d * eps } else { -d * eps };
        let z = c(x, s);
        let direct = if right { sys.plus.eval(z) } else { sys.minus.eval(z) };
        if let Ok(w) = direct {
            prop_assert_eq!(reg_field(&r, z).unwrap(), w);
        }
    }

    #[test]
    fn blend_weight_is_monotone((sys, eps) in sample_system(), s in -2.0..2.0f64, phi_i in 0..4usize) {
        let r = RegularizedSystem::new(sys, ALL_PHI[phi_i], eps).unwrap();
        let mut prev = 0.0;
        for k in 0..=60 {
            let x = eps * (-3.0 + 0.1 * k as f64);
            let w = r.weight(c(x, s));
            prop_assert!((0.0..=1.0).contains(&w) && w >= prev);
            prev = w;
        }
    }
}

#[test]
fn defect_separates_distinct_fields() {
    let eps = 0.05;
    for row in case_rows() {
        let gap = sigma_gap(&row.sys, -3.0, 3.0, 41);
        if gap <= 0.1 {
            continue;
        }
        for phi in [TransitionFunction::PolyST, TransitionFunction::QuinticST] {
            let r = RegularizedSystem::new(row.sys.clone(), phi, eps).unwrap();
            let defect = holomorphy_defect(&r, &SampleBox::strip(&row.sys.line, eps, -3.0, 3.0, 41));
            assert!(defect > 0.05 * gap, "{} {phi:?}: {defect} vs gap {gap}", row.name);
        }
    }
    let f = FieldSpec::power(2, c(1.0, 0.5), 0);
    let sys = PWSystem::new(f.clone(), f, SwitchingLine::vertical(0.0)).unwrap();
    let r = RegularizedSystem::new(sys.clone(), TransitionFunction::Tanh, eps).unwrap();
    assert!(holomorphy_defect(&r, &SampleBox::strip(&sys.line, eps, -3.0, 3.0, 41)) <= 1e-6);
}

#[test]
fn reduced_flow_matches_sliding_speed() {
    let sys = case3(1.0, -2.0, 1.0, 0.2);
    let r = RegularizedSystem::new(sys.clone(), TransitionFunction::QuinticST, 0.01).unwrap();
    let sf = slow_fast(&r);
    // repelling sliding on (y0 - x0, y0 - a x0/b), attracting above y0 + x0
    for s in [-0.5, -0.1, 1.5, 2.5] {
        let reduced = sf.reduced_field(s).unwrap();
        let filippov = sliding_speed(&sys, s).unwrap();
        assert!((reduced - filippov).abs() <= 1e-8, "s={s}: {reduced} vs {filippov}");
        let x = sf.critical_point(s).unwrap();
        assert!(x.abs() < 1.0);
    }
    assert!(sf.critical_point(1.0).is_err());
}

#[test]
fn power_case_fit() {
    let theta: Vec<f64> = (0..9).map(|k| 0.02 + 0.01 * k as f64).collect();
    let exp = TransitionExperiment::new(TransitionCase::Power { x0: 1.0, y0: 0.0 }, vec![1e-3, 1e-4], theta);
    let rep = transition_map_experiment(&exp, &IntegratorOptions::default()).unwrap();
    let fit = rep.fit_for(1e-4).unwrap();
    assert_eq!(fit.predicted_alpha, 1.0);
    assert!(fit.rel_error < 0.1, "alpha {}", fit.fitted_alpha);
    let mut buf = Vec::new();
    rep.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.lines().next().unwrap().starts_with("eps,theta,"));
    assert_eq!(text.lines().count(), 1 + 2 * 9);
}

#[test]
fn linear_case_alpha() {
    let case = TransitionCase::Linear { a: 1.0, b: -1.0, x0: 1.0, y0: 0.0 };
    assert!((case.alpha() - 0.5).abs() < 1e-15);
    assert!(TransitionCase::Linear { a: 1.0, b: 1.0, x0: 1.0, y0: 0.0 }.validate().is_err());
}

#[test]
fn experiment_validation() {
    let case = TransitionCase::Power { x0: 1.0, y0: 0.0 };
    let mut exp = TransitionExperiment::new(case, vec![1e-3], vec![0.05]);
    assert!(exp.validate().is_ok());
    exp.lambda = 0.9;
    assert!(exp.validate().is_err());
    exp.lambda = 0.5;
    exp.phi = TransitionFunction::Tanh;
    assert!(exp.validate().is_err());
    exp.phi = TransitionFunction::QuinticST;
    exp.theta = vec![];
    assert!(exp.validate().is_err());
}
