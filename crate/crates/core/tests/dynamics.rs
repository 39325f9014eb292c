use bouquet::bouquet::{
    anguine_slice_diameter, brush_convergence_probe, detect_bad_pair, exp_probes, fast_escape_point, hook_probes,
    neighbor_at, Window,
};
use bouquet::contraction::M_sum;
use bouquet::headstart::{
    check_forward_condition, claim1_check, hook_phi, separation_time, verify_uniform_sampled, AddressSampler, Ahead,
    ForwardVerdict, PhiStep, PhiVariant,
};
use bouquet::tractmodel::trace::{alpha_sequence, trace_hair};
use bouquet::tractmodel::{build_model, ExternalAddress, LogModel, ModelSpec, TractRef};
use bouquet::Complex64;
use std::sync::OnceLock;

fn exp() -> &'static LogModel {
    static M: OnceLock<LogModel> = OnceLock::new();
    M.get_or_init(|| build_model(&ModelSpec::exp_default()).unwrap())
}

fn hook() -> &'static LogModel {
    static M: OnceLock<LogModel> = OnceLock::new();
    M.get_or_init(|| build_model(&ModelSpec::hook_default()).unwrap())
}

#[test]
fn exp_head_start_sampled() {
    let phi = PhiStep::linear(2.0, 0.0).unwrap();
    let r = verify_uniform_sampled(exp(), &phi, &AddressSampler::exp_default(), 200, 50, 11).unwrap();
    assert!(r.violations.is_empty(), "{:?}", r.violations);
    assert_eq!(r.inconclusive, 0);
    assert_eq!(r.both_directions, 0);
    assert!(r.max_separation <= 50);
}

#[test]
fn exp_real_pair_separates_higher_potential_ahead() {
    let phi = PhiStep::linear(2.0, 0.0).unwrap();
    let (z, w) = (Complex64::new(1.0, 0.0), Complex64::new(1.2, 0.0));
    let (n, who) = separation_time(exp(), z, w, &phi, 50).unwrap();
    assert_eq!(who, Ahead::W);
    // by hand: iterate x ↦ e^x − ln 4 until one is twice the other
    let (mut a, mut b, mut k) = (1.0f64, 1.2f64, 0);
    while b <= 2.0 * a {
        a = a.exp() - 4f64.ln();
        b = b.exp() - 4f64.ln();
        k += 1;
    }
    assert_eq!(n, k);
    assert!(matches!(check_forward_condition(exp(), z, w, &phi, 50), ForwardVerdict::Pass { .. } | ForwardVerdict::Stopped { .. }));
}

#[test]
fn hook_phi_variants() {
    let phi = hook_phi(PhiVariant::Hook, 3).unwrap();
    assert!(phi.eval(2.0).is_err());
    assert!(phi.eval(6.5).unwrap() > 1000.0);
    let strips = hook_phi(PhiVariant::Strips, 3).unwrap();
    assert!(strips.eval(20.0).unwrap() > 20.0);
    // equality at x = 5, up to rounding
    assert!(claim1_check(&[5.0, 6.0, 10.0, 50.0, 300.0]).unwrap() <= 1.0 + 1e-12);
}

#[test]
fn brush_converges_geometrically() {
    let s = ExternalAddress::constant(TractRef::new(0, 0));
    let window = Window { t_min: 1.0, t_max: 20.0, samples: 60, depth: 20 };
    let r = brush_convergence_probe(exp(), &s, &neighbor_at, 5..=15, window).unwrap();
    assert!(r.max_ratio <= 0.75, "{r:?}");
    let h: Vec<f64> = r.entries.iter().map(|e| e.hausdorff).collect();
    assert!(h.windows(2).all(|w| w[1] < w[0]));
    // neighbor at 3 differs only in entry 3
    let nb = neighbor_at(&s, 3);
    assert_eq!(nb.get(3), TractRef::new(0, 1));
    assert!((0..10).filter(|&k| k != 3).all(|k| nb.get(k) == TractRef::new(0, 0)));
}

#[test]
fn brush_rejects_shallow_windows() {
    let s = ExternalAddress::constant(TractRef::new(0, 0));
    let window = Window { t_min: 1.0, t_max: 2.0, samples: 10, depth: 8 };
    assert!(brush_convergence_probe(exp(), &s, &neighbor_at, 5..=10, window).is_err());
}

#[test]
fn anguine_slices_shrink() {
    let d1 = anguine_slice_diameter(exp(), 1.0, 256).unwrap();
    let d2 = anguine_slice_diameter(exp(), 50.0, 256).unwrap();
    assert!(d1.is_finite() && d2 < d1);
    assert!(anguine_slice_diameter(exp(), -1.0, 16).is_err());
}

#[test]
fn exp_has_no_bad_pair() {
    let s = ExternalAddress::constant(TractRef::new(0, 0));
    let r = detect_bad_pair(exp(), &s, Complex64::new(1.0, 0.0), Complex64::new(1.5, 0.0), &exp_probes(5)).unwrap();
    assert!(r.witness.is_none());
    assert!(r.entries.iter().all(|e| !e.reversed));
}

#[test]
fn hook_bad_pair_witness() {
    let m = hook();
    let s = ExternalAddress::constant(TractRef::new(0, 0));
    let r = detect_bad_pair(m, &s, Complex64::new(6.0, 0.0), Complex64::new(8.0, 0.0), &hook_probes(m)).unwrap();
    let w = r.witness.expect("witness");
    assert!(w.consecutive >= 3 && w.decreasing);
    for e in &w.entries {
        assert!(e.reversed && e.unambiguous);
        assert!(e.margin.ln() >= 2f64.ln() + e.ln_position_error);
    }
}

fn real_arc(start: f64, length: f64) -> Vec<Complex64> {
    (0..2000).map(|i| Complex64::new(start + length * i as f64 / 1999.0, 0.0)).collect()
}

#[test]
fn fast_escape_on_a_long_arc() {
    let m0 = M_sum(0).value;
    // start right of the repelling fixed point, where real orbits escape
    let arc = real_arc(0.81, 2.0 * m0);
    let fe = fast_escape_point(exp(), &arc, 0, 6).unwrap().expect("a fast-escaping point");
    for (d, b) in fe.exclusion_diameters.iter().zip(&fe.exclusion_bounds) {
        assert!(d <= b);
    }
    assert!(fe.orbit.iter().skip(1).zip(&fe.alphas[1..]).all(|(x, a)| x > a));
    // too short an arc violates the hypothesis
    assert!(fast_escape_point(exp(), &real_arc(0.81, 1.0), 0, 6).is_err());
}

#[test]
fn fast_escape_excludes_orbits_that_leave() {
    // real orbits starting left of the fixed point fall out of the tract
    let a0 = alpha_sequence(exp(), 0).unwrap().raw;
    let arc = real_arc(a0 + 0.01, 2.0 * M_sum(0).value);
    let fe = fast_escape_point(exp(), &arc, 0, 6).unwrap().expect("survivor right of the fixed point");
    assert!(fe.point.re > 0.766);
}

#[test]
fn hook_hairs_fold_back() {
    // the hair of T0 T1 T0^∞ starts near the base point and is traced at every sample
    let m = hook();
    let s = m.parse_address("T1 | T0").unwrap();
    let h = trace_hair(m, &s, &[5.0, 6.0, 7.0, 8.0], 20).unwrap();
    assert_eq!(h.samples.len(), 4);
}
