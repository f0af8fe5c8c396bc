use std::ffi::CStr;
use std::ptr;

use pwhs_ffi::*;

fn c(re: f64, im: f64) -> PwhsComplex {
    PwhsComplex { re, im }
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(pwhs_last_error()) }.to_string_lossy().into_owned()
}

unsafe fn linear(a: f64, b: f64, center: PwhsComplex) -> *mut PwhsField {
    let mut f = ptr::null_mut();
    assert_eq!(pwhs_field_linear(a, b, center, &mut f), PwhsStatus::Ok);
    f
}

#[test]
fn field_eval_and_errors() {
    unsafe {
        let mut f = ptr::null_mut();
        assert_eq!(pwhs_field_power(3, c(0.0, 0.0), 1, &mut f), PwhsStatus::Ok);
        let mut w = c(0.0, 0.0);
        assert_eq!(pwhs_field_eval(f, c(1.0, 1.0), &mut w), PwhsStatus::Ok);
        // i (1+i)^3 = i (-2 + 2i)
        assert!((w.re + 2.0).abs() < 1e-14 && (w.im + 2.0).abs() < 1e-14);
        assert_eq!(pwhs_field_derivative(f, c(2.0, 0.0), &mut w), PwhsStatus::Ok);
        assert!(w.re.abs() < 1e-14 && (w.im - 12.0).abs() < 1e-12);
        pwhs_field_free(f);

        let mut p = ptr::null_mut();
        assert_eq!(pwhs_field_pole(2, c(1.0, 0.0), 0, &mut p), PwhsStatus::Ok);
        assert_eq!(pwhs_field_eval(p, c(1.0, 0.0), &mut w), PwhsStatus::NumericalFailure);
        assert!(last_error().starts_with("EvaluationAtSingularity"), "{}", last_error());
        pwhs_field_free(p);

        let mut bad = ptr::null_mut();
        assert_eq!(pwhs_field_power(2, c(0.0, 0.0), 3, &mut bad), PwhsStatus::InvalidArgument);
        assert!(bad.is_null());
        assert!(last_error().starts_with("InvalidSpec"));

        assert_eq!(pwhs_field_eval(ptr::null(), c(0.0, 0.0), &mut w), PwhsStatus::NullPointer);
        assert_eq!(pwhs_field_constant(c(1.0, 0.0), ptr::null_mut()), PwhsStatus::NullPointer);

        let principal = [c(1.0, 0.0)];
        let mut l = ptr::null_mut();
        assert_eq!(
            pwhs_field_laurent(c(0.0, 0.0), principal.as_ptr(), 1, ptr::null(), 0, &mut l),
            PwhsStatus::Ok
        );
        assert_eq!(pwhs_field_eval(l, c(2.0, 0.0), &mut w), PwhsStatus::Ok);
        assert_eq!(w, c(0.5, 0.0));
        pwhs_field_free(l);
        assert_eq!(
            pwhs_field_laurent(c(0.0, 0.0), ptr::null(), 2, ptr::null(), 0, &mut l),
            PwhsStatus::NullPointer
        );
        pwhs_field_free(ptr::null_mut());
    }
}

#[test]
fn regions_of_a_sliding_system() {
    unsafe {
        // plus side z - 1, minus side the constant 1
        let plus = linear(1.0, 0.0, c(1.0, 0.0));
        let mut minus = ptr::null_mut();
        assert_eq!(pwhs_field_constant(c(1.0, 0.0), &mut minus), PwhsStatus::Ok);
        let mut sys = ptr::null_mut();
        assert_eq!(
            pwhs_system_new(plus, minus, PwhsOrientation::Vertical, 0.0, &mut sys),
            PwhsStatus::Ok
        );
        // the system owns copies
        pwhs_field_free(plus);
        pwhs_field_free(minus);

        // on Re z = 0 the plus field is -1 + iy: pointing left, minus field points right
        let mut class = PwhsRegionClass::Sewing;
        assert_eq!(pwhs_classify_point(sys, 0.3, &mut class), PwhsStatus::Ok);
        assert_eq!(class, PwhsRegionClass::SlidingAttract);

        let mut regions = ptr::null_mut();
        assert_eq!(pwhs_classify_regions(sys, -1.0, 1.0, 64, &mut regions), PwhsStatus::Ok);
        assert_eq!(pwhs_regions_len(regions), 1);
        let (mut lo, mut hi) = (0.0, 0.0);
        assert_eq!(pwhs_regions_segment(regions, 0, &mut lo, &mut hi, &mut class), PwhsStatus::Ok);
        assert_eq!((lo, hi, class), (-1.0, 1.0, PwhsRegionClass::SlidingAttract));
        assert_eq!(
            pwhs_regions_segment(regions, 1, &mut lo, &mut hi, &mut class),
            PwhsStatus::IndexOutOfRange
        );
        pwhs_regions_free(regions);

        assert_eq!(pwhs_classify_regions(sys, 1.0, -1.0, 64, &mut regions), PwhsStatus::InvalidArgument);
        pwhs_system_free(sys);
    }
}

#[test]
fn orbit_and_half_return() {
    unsafe {
        // rotation about the origin on both sides of Im z = 0
        let f = linear(0.0, 1.0, c(0.0, 0.0));
        let mut sys = ptr::null_mut();
        assert_eq!(pwhs_system_new(f, f, PwhsOrientation::Horizontal, 0.0, &mut sys), PwhsStatus::Ok);
        pwhs_field_free(f);

        let mut opts = pwhs_options_default();
        opts.t_max = 2.0 * std::f64::consts::PI;
        let mut tr = ptr::null_mut();
        assert_eq!(pwhs_integrate(sys, c(1.0, 0.0), &opts, &mut tr), PwhsStatus::Ok);
        let n = pwhs_trajectory_len(tr);
        assert!(n > 10);
        let (mut t, mut z, mut mode) = (0.0, c(0.0, 0.0), PwhsMode::Sliding);
        for i in 0..n {
            assert_eq!(pwhs_trajectory_sample(tr, i, &mut t, &mut z, &mut mode), PwhsStatus::Ok);
            assert!(((z.re * z.re + z.im * z.im).sqrt() - 1.0).abs() < 1e-8);
            assert_ne!(mode, PwhsMode::Sliding);
        }
        assert!((t - opts.t_max).abs() < 1e-9);
        let mut term = PwhsTermination::Escape;
        assert_eq!(pwhs_trajectory_termination(tr, &mut term), PwhsStatus::Ok);
        assert_eq!(term, PwhsTermination::TimeLimit);
        assert_eq!(
            pwhs_trajectory_sample(tr, n, &mut t, &mut z, &mut mode),
            PwhsStatus::IndexOutOfRange
        );
        pwhs_trajectory_free(tr);

        let (mut land, mut time) = (0.0, 0.0);
        // i z at s = -0.5 points down, into the minus side
        assert_eq!(
            pwhs_half_return(sys, PwhsSide::Minus, -0.5, ptr::null(), &mut land, &mut time),
            PwhsStatus::Ok
        );
        assert!((land - 0.5).abs() < 1e-8 && (time - std::f64::consts::PI).abs() < 1e-8);
        assert_eq!(
            pwhs_half_return(sys, PwhsSide::Plus, -0.5, ptr::null(), &mut land, &mut time),
            PwhsStatus::NumericalFailure
        );
        assert!(last_error().starts_with("PreconditionViolated"));

        opts.t_max = -1.0;
        assert_eq!(pwhs_integrate(sys, c(1.0, 0.0), &opts, &mut tr), PwhsStatus::InvalidArgument);
        pwhs_system_free(sys);
    }
}

#[test]
fn linear_return_map() {
    unsafe {
        let mut p = PwhsPoincare {
            has_fixed_point: false,
            fixed_point: 0.0,
            derivative: 0.0,
            stability: PwhsStability::None,
        };
        assert_eq!(pwhs_linear_poincare(-1.0, 1.0, 0.5, 1.0, -1.0, &mut p), PwhsStatus::Ok);
        assert!(p.has_fixed_point);
        let (eb, ed) = ((-std::f64::consts::PI).exp(), (0.5 * std::f64::consts::PI).exp());
        assert!((p.derivative - eb * ed).abs() < 1e-12);
        // fixed point of s -> E_d ((s - x0) E_b - x0)
        let x0 = -1.0;
        let w = -ed * x0 * (1.0 + eb) / (1.0 - eb * ed);
        assert!((p.fixed_point - w).abs() < 1e-12);
        assert_eq!(p.stability, PwhsStability::Stable);

        assert_eq!(pwhs_linear_poincare(1.0, 2.0, -1.0, 2.0, 0.5, &mut p), PwhsStatus::Ok);
        assert!(!p.has_fixed_point && p.fixed_point.is_nan());
        assert_eq!(pwhs_linear_poincare(1.0, 1.0, 1.0, -1.0, 1.0, &mut p), PwhsStatus::InvalidArgument);
        assert!(last_error().starts_with("MixedRotation"));
        assert_eq!(pwhs_linear_poincare(1.0, 1.0, 1.0, 1.0, 1.0, ptr::null_mut()), PwhsStatus::NullPointer);
    }
}

#[test]
fn errors_are_per_thread() {
    unsafe {
        let mut w = c(0.0, 0.0);
        assert_eq!(pwhs_field_eval(ptr::null(), c(0.0, 0.0), &mut w), PwhsStatus::NullPointer);
        let other = std::thread::spawn(last_error).join().unwrap();
        assert_eq!(other, "");
        assert_eq!(last_error(), "null handle");
    }
}
