use bouquet::tractmodel::trace::{
    alpha_sequence, expansion_check, orbit_escape, preimage_constant, preimage_proximity, trace_hair, trace_point,
    OrbitStop,
};
use bouquet::tractmodel::{build_model, ExternalAddress, LogModel, ModelSpec, TractRef};
use bouquet::{Complex64, Error};
use std::sync::OnceLock;

fn exp() -> &'static LogModel {
    static M: OnceLock<LogModel> = OnceLock::new();
    M.get_or_init(|| build_model(&ModelSpec::exp_default()).unwrap())
}

fn hook() -> &'static LogModel {
    static M: OnceLock<LogModel> = OnceLock::new();
    M.get_or_init(|| build_model(&ModelSpec::hook_default()).unwrap())
}

fn fixed_point() -> f64 {
    let mut w: f64 = 1.0;
    for _ in 0..500 {
        w = (w + 4f64.ln()).ln();
    }
    w
}

#[test]
fn exp_endpoint_is_the_fixed_point() {
    let s = exp().parse_address("0 | 0").unwrap();
    let p = trace_point(exp(), &s, 60).unwrap();
    assert!((p.z.re - fixed_point()).abs() < 1e-12);
    assert_eq!(p.z.im, 0.0);
    assert!(p.error_bound < 1e-12);
}

#[test]
fn exp_invariant_hair_is_real_and_increasing() {
    let s = ExternalAddress::constant(TractRef::new(0, 0));
    let ts: Vec<f64> = (0..30).map(|k| 1.0 + k as f64).collect();
    let h = trace_hair(exp(), &s, &ts, 3).unwrap();
    assert!(h.monotone);
    for w in h.samples.windows(2) {
        assert!(w[1].z.re > w[0].z.re);
        assert!(w[0].z.im.abs() < 1e-14);
    }
}

#[test]
fn error_bounds_halve_per_level() {
    let s = exp().parse_address("0+1 0-2 | 0+1").unwrap();
    let e: Vec<f64> = (10..16).map(|d| trace_point(exp(), &s, d).unwrap().error_bound).collect();
    for w in e.windows(2) {
        assert!(w[1] <= 0.5 * w[0] * 1.01 || w[1] < 1e-14, "{e:?}");
    }
    // and the traced points converge
    let a = trace_point(exp(), &s, 30).unwrap();
    let b = trace_point(exp(), &s, 40).unwrap();
    assert!((a.z - b.z).norm() <= a.error_bound + b.error_bound + 1e-14);
}

#[test]
fn orbit_escape_examples() {
    let fp = Complex64::new(fixed_point(), 0.0);
    let r = orbit_escape(exp(), fp, 0.0, 20);
    assert_eq!(r.stop, OrbitStop::Completed);
    // repelling with multiplier e^w ≈ 2.15, so rounding grows geometrically
    for (k, x) in r.real_parts.iter().enumerate() {
        assert!((x - fp.re).abs() <= 1e-15 * 2.2f64.powi(k as i32), "step {k}: {x}");
    }

    let r = orbit_escape(exp(), Complex64::new(3.0, 0.0), 0.0, 20);
    assert_eq!(r.stop, OrbitStop::Overflow);
    assert!(r.monotone && r.in_j_q);
    // e^3 − ln 4 by hand
    assert!((r.real_parts[1] - (3f64.exp() - 4f64.ln())).abs() < 1e-12);

    let r = orbit_escape(exp(), Complex64::new(-5.0, 0.0), 0.0, 20);
    assert!(matches!(r.stop, OrbitStop::LeftDomain(_)));
    assert_eq!(r.real_parts.len(), 1);
    assert!(!r.in_j_q);
}

#[test]
fn preimage_proximity_examples() {
    let z = Complex64::new(2.0, 0.3);
    let fz = exp().forward(z).unwrap().0;
    let (m, d) = preimage_proximity(exp(), TractRef::new(0, 0), z, fz - 1.0).unwrap();
    assert_eq!(m, 0);
    assert!(d < 0.5 && d <= preimage_constant());
    assert!(matches!(
        preimage_proximity(exp(), TractRef::new(0, 0), z, fz + 1.0),
        Err(Error::Precondition(_))
    ));
    assert!((preimage_constant() - (2.0 * std::f64::consts::PI.powi(2) + std::f64::consts::PI)).abs() < 1e-12);
}

#[test]
fn alpha_sequence_grows() {
    let a: Vec<f64> = (0..6).map(|n| alpha_sequence(exp(), n).unwrap().alpha).collect();
    assert!(a.windows(2).all(|w| w[1] > w[0]), "{a:?}");
    assert!(a[0] > 2.0 * std::f64::consts::PI + 3.0);
}

#[test]
fn exp_is_expanding_on_traced_points() {
    let s = exp().parse_address("0 0+1 | 0").unwrap();
    let ts: Vec<f64> = (0..20).map(|k| 1.0 + 0.5 * k as f64).collect();
    let pts: Vec<Complex64> = trace_hair(exp(), &s, &ts, 10).unwrap().samples.iter().map(|p| p.z).collect();
    let r = expansion_check(exp(), &pts).unwrap();
    assert!(r.min_derivative > 1.0);
}

#[test]
fn parse_errors_carry_positions() {
    match exp().parse_address("0 0+x | 0") {
        Err(e) => assert!(e.to_string().contains("byte"), "{e}"),
        Ok(_) => panic!("accepted"),
    }
    assert!(exp().parse_address("0 |").is_err());
    assert!(hook().parse_address("T0 T9 | T0").is_err());
}

#[test]
fn hook_model_builds_and_validates() {
    let m = hook();
    assert!(m.report.passed(), "{:?}", m.report);
    assert_eq!(m.tract_count(), 4);
    assert!(m.vmap().is_some());
    for n in 1..=3 {
        assert!(m.hooked(n).unwrap().report.hausdorff <= 1e-3);
    }
}

#[test]
fn hook_hair_through_first_hook() {
    let m = hook();
    let s = m.parse_address("T0 T1 | T0").unwrap();
    let ts = [5.0, 7.5, 10.0, 15.0];
    let h = trace_hair(m, &s, &ts, 30).unwrap();
    for p in &h.samples {
        assert!(p.z.re.is_finite() && p.z.im.is_finite() && p.error_bound < 1e-6);
    }
    // F maps the hair of s onto the hair of σs
    let z = trace_point(m, &s, 30).unwrap();
    let w = trace_point(m, &s.shift(), 29).unwrap();
    let (fz, t) = m.forward(z.z).unwrap();
    assert_eq!(t, TractRef::new(0, 0));
    assert!((fz - w.z).norm() < 1e-6);
}

#[test]
fn hook_base_tract_is_the_sinh_half_strip() {
    let m = hook();
    let z = Complex64::new(6.5, 0.4);
    let (fz, t) = m.forward(z).unwrap();
    assert_eq!(t, TractRef::new(0, 0));
    let oracle = 5.0 * (z - 4.0).sinh() / 1f64.sinh();
    assert!((fz - oracle).norm() < 1e-12 * oracle.norm());
    // base point is fixed
    assert!((m.forward(Complex64::new(5.0, 0.0)).unwrap().0 - 5.0).norm() < 1e-12);
}
