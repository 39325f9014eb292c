use bouquet::bouquet::hair_order;
use bouquet::conformal::halfstrip::{f0, f0_inverse, hook_sequences};
use bouquet::contraction::{E_eval, L_eval};
use bouquet::headstart::PhiStep;
use bouquet::hyperbolic::{hyp_dist_halfplane, strip_density};
use bouquet::scaled::{LogReal, ScaledComplex};
use bouquet::tractmodel::anchored::{Anchor, HookPoint};
use bouquet::tractmodel::trace::{trace_hair, trace_point};
use bouquet::tractmodel::{build_model, ExternalAddress, LogModel, ModelSpec, TractRef};
use bouquet::Complex64;
use proptest::prelude::*;
use std::cmp::Ordering;
use std::sync::OnceLock;

fn exp_model() -> &'static LogModel {
    static M: OnceLock<LogModel> = OnceLock::new();
    M.get_or_init(|| build_model(&ModelSpec::exp_default()).unwrap())
}

fn letter(bases: usize) -> impl Strategy<Value = TractRef> {
    (0..bases, -5i64..=5).prop_map(|(b, o)| TractRef::new(b, o))
}

fn address(bases: usize) -> impl Strategy<Value = ExternalAddress> {
    (prop::collection::vec(letter(bases), 0..6), prop::collection::vec(letter(bases), 1..4))
        .prop_map(|(prefix, cycle)| ExternalAddress { prefix, cycle })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn address_display_parse_round_trip(s in address(3)) {
        let names: Vec<String> = ["T0", "T1", "T2"].iter().map(|s| s.to_string()).collect();
        let text = s.display(&names);
        let back = ExternalAddress::parse(&text, &names).unwrap();
        // equal as sequences
        for k in 0..20 {
            prop_assert_eq!(back.get(k), s.get(k));
        }
    }

    #[test]
    fn shift_drops_first_entry(s in address(2)) {
        let t = s.shift();
        for k in 0..15 {
            prop_assert_eq!(t.get(k), s.get(k + 1));
        }
    }

    #[test]
    fn e_inverts_l(ln_t in (1e-3f64).ln()..(1e9f64).ln()) {
        let t = ln_t.exp();
        prop_assert!((E_eval(L_eval(t)) - t).abs() <= 1e-9 * t.max(1.0));
    }

    #[test]
    fn l_is_increasing_and_contracting(a in 1e-3f64..1e9, f in 1.0001f64..10.0) {
        let b = a * f;
        prop_assert!(L_eval(b) > L_eval(a));
        prop_assert!(L_eval(a) <= a / 2.0 + 1e-15);
    }

    #[test]
    fn halfplane_distance_closed_form(
        x1 in 0.01f64..50.0, y1 in -50.0f64..50.0, x2 in 0.01f64..50.0, y2 in -50.0f64..50.0,
        k in 0.1f64..10.0, b in -10.0f64..10.0,
    ) {
        let (z, w) = (Complex64::new(x1, y1), Complex64::new(x2, y2));
        let d = hyp_dist_halfplane(z, w).unwrap();
        let oracle = (1.0 + (z - w).norm_sqr() / (2.0 * x1 * x2)).acosh();
        prop_assert!((d - oracle).abs() <= 1e-7 * oracle.max(1.0));
        prop_assert!((d - hyp_dist_halfplane(w, z).unwrap()).abs() <= 1e-12 * d.max(1.0));
        // z ↦ kz + ib is an isometry
        let m = |p: Complex64| k * p + Complex64::new(0.0, b);
        prop_assert!((hyp_dist_halfplane(m(z), m(w)).unwrap() - d).abs() <= 1e-9 * d.max(1.0));
    }

    #[test]
    fn halfplane_triangle_inequality(
        p in prop::array::uniform3((0.05f64..20.0, -20.0f64..20.0)),
    ) {
        let [a, b, c] = p.map(|(x, y)| Complex64::new(x, y));
        let d = |u, v| hyp_dist_halfplane(u, v).unwrap();
        prop_assert!(d(a, c) <= d(a, b) + d(b, c) + 1e-9);
    }

    #[test]
    fn strip_density_is_pulled_back_halfplane_density(x in -20.0f64..20.0, y in -3.1f64..3.1) {
        // z ↦ e^{z/2} maps the strip onto {Re > 0}
        let z = Complex64::new(x, y);
        let u = (z / 2.0).exp();
        let oracle = u.norm() / 2.0 / u.re;
        prop_assert!((strip_density(z).unwrap() - oracle).abs() <= 1e-9 * oracle);
    }

    #[test]
    fn logreal_arithmetic_matches_doubles(a in 1e-200f64..1e200, b in 1e-200f64..1e200) {
        let (la, lb) = (LogReal::from_f64(a), LogReal::from_f64(b));
        let rel = |x: f64, y: f64| ((x - y) / y).abs();
        prop_assert!(rel(la.mul(lb).value(), a * b) < 1e-12 || !(a * b).is_normal());
        prop_assert!(rel(la.div(lb).value(), a / b) < 1e-12 || !(a / b).is_normal());
        prop_assert!(rel(la.add(lb).value(), a + b) < 1e-12);
        if a > b * (1.0 + 1e-6) {
            prop_assert!(rel(la.sub(lb).unwrap().value(), a - b) < 1e-9);
        } else if a < b {
            prop_assert!(la.sub(lb).is_none());
        }
    }

    #[test]
    fn linear_phi_is_monotone_and_ahead(a in 1.0f64..5.0, b in 0.01f64..10.0, xs in prop::collection::vec(1e-3f64..1e6, 2..40)) {
        let phi = PhiStep::linear(a, b).unwrap();
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        let vals: Vec<f64> = xs.iter().map(|&x| phi.eval(x).unwrap()).collect();
        for (x, v) in xs.iter().zip(&vals) {
            prop_assert!(v > x);
        }
        prop_assert!(vals.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn step_phi_is_monotone_and_ahead(gaps in prop::collection::vec(0.5f64..20.0, 1..6), x in 0.0f64..1.0) {
        let mut alphas = vec![1.0];
        for g in &gaps {
            alphas.push(alphas.last().unwrap() + g);
        }
        // y_k at least the next threshold, last jump to infinity
        let mut ys: Vec<f64> = alphas.windows(2).map(|w| 1.5 * w[1]).collect();
        ys.push(f64::INFINITY);
        let phi = PhiStep::step(alphas.clone(), ys).unwrap();
        let last = *alphas.last().unwrap();
        let probe = alphas[0] + x * (last - alphas[0]);
        let v = phi.eval(probe).unwrap();
        prop_assert!(v > probe);
        prop_assert!(phi.eval(probe + 0.25).unwrap() >= v);
        prop_assert!(phi.eval(0.5).is_err());
    }

    #[test]
    fn f0_inverse_round_trip(x in 4.2f64..30.0, y in -1.5f64..1.5) {
        let z = Complex64::new(x, y);
        let w = f0(z);
        prop_assert!(w.re > 0.0);
        prop_assert!((f0_inverse(w) - z).norm() <= 1e-10 * z.norm());
    }

    #[test]
    fn anchored_pullback_matches_inverse(re in -0.4f64..0.4, im in -0.4f64..0.4, anchor_b in any::<bool>()) {
        let seq = hook_sequences(6.0, 3).unwrap();
        let off = Complex64::new(re, im);
        prop_assume!(off.norm() > 1e-6);
        let anchor = if anchor_b { Anchor::B } else { Anchor::A };
        let p = HookPoint { level: 1, anchor, offset: ScaledComplex::from_complex(off), rel_error: 0.0 };
        let q = p.pullback(&seq).unwrap();
        prop_assert_eq!(q.level, 0);
        let abs = p.to_complex(&seq).unwrap();
        let oracle = f0_inverse(abs);
        let got = q.to_complex(&seq).unwrap();
        prop_assert!((got - oracle).norm() <= 1e-12 * oracle.norm());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exp_trace_commutes_with_shift(s in address(1)) {
        let m = exp_model();
        let z = trace_point(m, &s, 30).unwrap().z;
        let w = trace_point(m, &s.shift(), 29).unwrap().z;
        let fz = z.exp() - 4f64.ln();
        prop_assert!((fz - w).norm() <= 1e-8 * w.norm().max(1.0));
    }

    #[test]
    fn hair_order_is_a_total_order(s in address(1), ts in prop::collection::vec(1.0f64..10.0, 2..8)) {
        let m = exp_model();
        let mut ts = ts;
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let h = trace_hair(m, &s, &ts, 20).unwrap();
        let n = ts.len();
        for i in 0..n {
            prop_assert_eq!(hair_order(&h, i, i).unwrap(), Ordering::Equal);
            for j in 0..n {
                let a = hair_order(&h, i, j).unwrap();
                prop_assert_eq!(a, hair_order(&h, j, i).unwrap().reverse());
                prop_assert_eq!(a, ts[i].total_cmp(&ts[j]));
                for k in 0..n {
                    if a != Ordering::Greater && hair_order(&h, j, k).unwrap() != Ordering::Greater {
                        prop_assert_ne!(hair_order(&h, i, k).unwrap(), Ordering::Greater);
                    }
                }
            }
        }
        prop_assert!(hair_order(&h, 0, n).is_err());
    }
}
