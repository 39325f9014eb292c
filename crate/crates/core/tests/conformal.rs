use bouquet::conformal::halfstrip::{f0_map, hook_sequences};
use bouquet::conformal::hooked::{HookLocal, StripPoint};
use bouquet::conformal::vdomain::{hook_normalized_intervals, map_v_to_halfplane, v_profile};
use bouquet::conformal::{check_map, NumericMap};
use bouquet::scaled::LogReal;
use bouquet::tractmodel::{build_model, LogModel, ModelSpec};
use bouquet::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

fn hook() -> &'static LogModel {
    static M: OnceLock<LogModel> = OnceLock::new();
    M.get_or_init(|| build_model(&ModelSpec::hook_default()).unwrap())
}

#[test]
fn single_channel_v_is_a_sinh() {
    // one interval: V is a straight channel of half-width ρ and ψ a normalized sinh
    let iv = [(LogReal::one(), LogReal::from_f64(2.0))];
    let p = v_profile(1.0, &iv).unwrap();
    let m = map_v_to_halfplane(&p, 1e-6).unwrap();
    assert!(m.boundary_accuracy() <= 1e-6);
    let k = PI / (2.0 * p.rho[0]);
    for z in [Complex64::new(0.5, 0.1), Complex64::new(3.0, -0.2), Complex64::new(1.0, 0.0)] {
        let exact = (k * z).sinh() / k.sinh();
        let got = m.forward(z).unwrap();
        assert!((got - exact).norm() <= 1e-6 * exact.norm().max(1.0), "{z}: {got} vs {exact}");
    }
}

#[test]
fn f0_map_is_the_closed_form() {
    let m = f0_map();
    let samples: Vec<Complex64> = (0..40).map(|k| Complex64::new(4.1 + 0.3 * k as f64, -1.4 + 0.07 * k as f64)).collect();
    let c = check_map(&m, &samples, 1e-10).unwrap();
    assert!(c.passed, "{c:?}");
    for z in &samples {
        let exact = 5.0 * (z - 4.0).sinh() / 1f64.sinh();
        assert!((m.forward(*z).unwrap() - exact).norm() <= 1e-10 * exact.norm());
    }
}

#[test]
fn hook_v_map_distance_chain() {
    let v = hook().vmap().unwrap();
    assert!(v.boundary_accuracy() <= 1e-3);
    let chain = v.distance_chain().unwrap();
    assert!(!chain.is_empty());
    for c in &chain {
        assert!(c.lower <= c.dist_direct && c.dist_direct <= c.upper, "{c:?}");
        assert!((c.dist_direct - c.dist_quadrature).abs() <= 1e-6_f64.max(10.0 * c.quadrature_error), "{c:?}");
    }
}

#[test]
fn hook_v_profile_widths() {
    let seq = hook_sequences(6.0, 8).unwrap();
    let iv = hook_normalized_intervals(&seq);
    let p = v_profile(1.0 / 23.0, &iv).unwrap();
    assert!(p.breakpoints.windows(2).all(|w| w[1] > w[0]));
    assert!((p.delta_hat - 1.0 / 69.0).abs() < 1e-15);
    for (r, l) in p.rho.iter().zip(&p.lengths) {
        let expected = if l.is_finite() { p.delta_hat / (2.0 * l) } else { 0.0 };
        assert!((r - expected).abs() <= 1e-15, "{r} vs {expected}");
    }
    assert!(p.rho.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(p.pinches(), !p.lengths.last().unwrap().is_finite());
}

#[test]
fn first_hook_round_trip() {
    let m = hook().hooked(1).unwrap();
    let tau = m.tau_uturn().unwrap();
    for s in [
        Complex64::new(1.0, 0.3),
        Complex64::new(40.0, -2.0),
        Complex64::new(tau, -1.5),
        Complex64::new(tau + 300.0, 0.5),
    ] {
        let z = m.forward(s).unwrap();
        let back = m.inverse(z).unwrap();
        assert!((back - s).norm() <= 1e-8 * s.norm().max(1.0), "{s} -> {z} -> {back}");
    }
}

#[test]
fn hook_charts_agree_in_the_channel() {
    let m = hook().hooked(1).unwrap();
    let t = m.tau_uturn().unwrap();
    for y in [-1.0, 0.0, 0.7] {
        let s = Complex64::new(t / 2.0, y);
        let w = (s - t + Complex64::new(0.0, PI)) / 2.0;
        let a = m.to_absolute(m.eval(StripPoint::Global(s))).unwrap();
        let b = m.to_absolute(HookLocal::UTurn(m.uturn_map().eval(w))).unwrap();
        assert!((a - b).norm() < 1e-8, "{a} vs {b}");
    }
}

#[test]
fn hooked_maps_respect_the_derivative_bound() {
    let bound = 1.05 / (2.0 * 2f64.sqrt());
    for n in 1..=3 {
        let m = hook().hooked(n).unwrap();
        assert!(m.report.derivative_max <= bound);
        assert!(m.report.uturn_residual < 1e-10, "{:?}", m.report);
        // the connector crossing sits in the connector
        let c = m.connector_crossing().unwrap();
        let [_, y1, y2, _] = m.geometry.levels;
        match m.eval(c) {
            HookLocal::UTurn(u) => assert!(u.re > 0.0 && u.re < 1.0 && u.im > y2 && u.im < y1, "{u}"),
            HookLocal::Tip(v) => panic!("crossing in tip chart: {v}"),
        }
    }
}

#[test]
fn far_hooks_are_not_representable() {
    let m = hook().hooked(3).unwrap();
    assert!(m.tau_uturn().is_none());
    assert!(m.forward(Complex64::new(1.0, 0.0)).is_err());
}
