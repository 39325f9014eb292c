//! The contraction calculus: L and its inverse E, the sequence ℓ_n = (3/2)^n,
//! the series M_n = Σ_k L^k(ℓ_{n+k}) and the hook-model constants (C2, C3).

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const EIGHT_PI: f64 = 8.0 * PI;

/// Truncation target for M_n.
pub const SERIES_TOL: f64 = 1e-9;

/// The canonical hook constants.
pub const C2: f64 = 1350.0;
pub const C3: f64 = 450.0;

/// c = 8π ln(3/2).
pub fn small_c() -> f64 {
    EIGHT_PI * 1.5f64.ln()
}

/// L(t) = min(t/2, max(2, 8π ln t)), with L(t) = t/2 for t ≤ 1.
#[allow(non_snake_case)]
pub fn L_eval(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let log_branch = if t <= 1.0 { 2.0 } else { (EIGHT_PI * t.ln()).max(2.0) };
    (t / 2.0).min(log_branch)
}

/// L evaluated from ln t, for arguments beyond the double range.
#[allow(non_snake_case)]
pub fn L_from_ln(ln_t: f64) -> f64 {
    if ln_t < 700.0 {
        L_eval(ln_t.exp())
    } else {
        EIGHT_PI * ln_t
    }
}

/// Inverse of L.
#[allow(non_snake_case)]
pub fn E_eval(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let lin = 2.0 * s;
    if (L_eval(lin) - s).abs() <= 1e-12 * s.max(1.0) {
        return lin;
    }
    (s / EIGHT_PI).exp()
}

/// ℓ_n = (3/2)^n.
pub fn ell(n: u32) -> f64 {
    1.5f64.powi(n as i32)
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: u32,
}

/// Tail bound for Σ_{k>K} L^k(ℓ_{n+k}), using L(t) ≤ max(2, c·ln-part) once
/// and L(t) ≤ t/2 for the remaining k−1 applications.
fn series_tail(n: u32, k: u32) -> f64 {
    let c = small_c();
    let h = 2f64.powi(1 - k as i32);
    (2.0 + c * n as f64) * h + c * h * (k as f64 + 2.0)
}

/// M_n truncated so that the remaining tail is at most 1e-9.
#[allow(non_snake_case)]
pub fn M_sum(n: u32) -> SeriesValue {
    let mut k_max = 1;
    while series_tail(n, k_max) > SERIES_TOL {
        k_max += 1;
    }
    let mut value = 0.0;
    for k in 1..=k_max {
        let mut t = ell(n + k);
        for _ in 0..k {
            t = L_eval(t);
        }
        value += t;
    }
    SeriesValue { value, tail_bound: series_tail(n, k_max), terms: k_max }
}

/// C = max(M_0 + tail, M_1 + tail, 8c) + 1.
pub fn sum_constant_c() -> f64 {
    let m0 = M_sum(0);
    let m1 = M_sum(1);
    (m0.value + m0.tail_bound).max(m1.value + m1.tail_bound).max(8.0 * small_c()) + 1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HookFamily {
    /// C2 > 1 and C3 > 3C.
    Scalar,
    /// L(C2·ℓ_{n+1}) < C3·(n+1)
    ImageBound,
    /// (C2−1)·ℓ_n > 2·C3·(n+1)
    Spacing,
    /// 8π ln(3/2·C2) < C3 < 3^n (C2−1) / (2^{n+1} (n+1))
    Sandwich,
}

impl HookFamily {
    pub fn describe(self) -> &'static str {
        match self {
            HookFamily::Scalar => "C2 > 1 and C3 > 3C",
            HookFamily::ImageBound => "L(C2 l_{n+1}) < C3 (n+1)",
            HookFamily::Spacing => "(C2-1) l_n > 2 C3 (n+1)",
            HookFamily::Sandwich => "8pi ln(1.5 C2) < C3 < 3^n (C2-1)/(2^{n+1}(n+1))",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HookConstantsVerdict {
    pub c2: f64,
    pub c3: f64,
    pub n_max: u32,
    pub passed: bool,
    pub failure: Option<(HookFamily, u32)>,
    /// Set when the checks at n_max imply every n > n_max.
    pub eventual_certificate: bool,
    pub certificate_detail: String,
}

fn image_bound_margin(c2: f64, c3: f64, n: u32) -> f64 {
    let ln_arg = c2.ln() + (n + 1) as f64 * 1.5f64.ln();
    c3 * (n + 1) as f64 - L_from_ln(ln_arg)
}

fn spacing_margin_ln(c2: f64, c3: f64, n: u32) -> f64 {
    // ln((C2−1) ℓ_n) − ln(2 C3 (n+1))
    (c2 - 1.0).ln() + n as f64 * 1.5f64.ln() - (2.0 * c3 * (n + 1) as f64).ln()
}

fn sandwich_upper_ln(c2: f64, n: u32) -> f64 {
    n as f64 * 3f64.ln() + (c2 - 1.0).ln() - (n + 1) as f64 * 2f64.ln() - ((n + 1) as f64).ln()
}

/// Check the three inequality families for 0 ≤ n ≤ n_max and certify the
/// range n > n_max by monotonicity of each margin.
pub fn hook_constants_check(c2: f64, c3: f64, n_max: u32) -> HookConstantsVerdict {
    let mut v = HookConstantsVerdict {
        c2,
        c3,
        n_max,
        passed: false,
        failure: None,
        eventual_certificate: false,
        certificate_detail: String::new(),
    };
    let big_c = sum_constant_c();
    if !(c2 > 1.0 && c3 > 3.0 * big_c) {
        v.failure = Some((HookFamily::Scalar, 0));
        return v;
    }
    let lower = EIGHT_PI * (1.5 * c2).ln();
    for n in 0..=n_max {
        if !(image_bound_margin(c2, c3, n) > 0.0) {
            v.failure = Some((HookFamily::ImageBound, n));
            return v;
        }
        if !(spacing_margin_ln(c2, c3, n) > 0.0) {
            v.failure = Some((HookFamily::Spacing, n));
            return v;
        }
        if !(lower < c3 && c3.ln() < sandwich_upper_ln(c2, n)) {
            v.failure = Some((HookFamily::Sandwich, n));
            return v;
        }
    }
    // Beyond n_max: on the log branch the image-bound margin grows by
    // C3 − c per step; the spacing and sandwich ratios grow by the factor
    // 3(n+1)/(2(n+2)), which is ≥ 1 for n ≥ 1.
    let c = small_c();
    let n = n_max.max(1);
    let on_log_branch = c2.ln() + (n + 1) as f64 * 1.5f64.ln() > 283.0f64.ln() + 0.01;
    let ratio = 3.0 * (n + 1) as f64 / (2.0 * (n + 2) as f64);
    let held_at_n = image_bound_margin(c2, c3, n) > 0.0
        && spacing_margin_ln(c2, c3, n) > 0.0
        && c3.ln() < sandwich_upper_ln(c2, n);
    let cert = on_log_branch && c3 > c && ratio >= 1.0 && held_at_n;
    v.eventual_certificate = cert;
    v.certificate_detail = format!(
        "log branch from n={n}: {on_log_branch}; C3 - c = {:.3}; growth ratio at n={n}: {ratio:.4}",
        c3 - c
    );
    v.passed = cert;
    v
}

/// Diameter bounds for a connected set B of diameter d under one pullback
/// and one forward image.
pub fn diam_bounds(diam_b: f64) -> (f64, f64) {
    ((diam_b / 2.0).min(L_eval(diam_b)), (2.0 * diam_b).max(E_eval(diam_b)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l_examples() {
        assert_eq!(L_eval(1.0), 0.5);
        assert_eq!(L_eval(4.0), 2.0);
        assert!((L_eval(1000.0) - 173.610_826).abs() < 1e-5);
        assert_eq!(L_eval(0.0), 0.0);
    }

    #[test]
    fn e_examples() {
        assert_eq!(E_eval(0.5), 1.0);
        assert_eq!(E_eval(2.0), 4.0);
        assert!((E_eval(200.0) - 2857.628).abs() < 1e-3);
        assert!((L_eval(E_eval(200.0)) - 200.0).abs() < 1e-9);
    }

    #[test]
    fn ell_examples() {
        assert_eq!(ell(0), 1.0);
        assert_eq!(ell(1), 1.5);
        assert!((ell(10) - 57.665).abs() < 1e-3);
    }

    #[test]
    fn series_examples() {
        let m0 = M_sum(0);
        assert!((m0.value - 2.99).abs() < 0.05, "{}", m0.value);
        assert!((M_sum(1).value - 4.5).abs() < 0.1);
        assert!(m0.tail_bound <= SERIES_TOL);
    }

    #[test]
    fn constant_c() {
        assert!((small_c() - 10.191).abs() < 1e-3);
        assert!((8.0 * small_c() - 81.52).abs() < 1e-2);
        assert!((sum_constant_c() - 82.5).abs() < 0.05);
    }

    #[test]
    fn hook_constant_examples() {
        let v = hook_constants_check(450.0, 450.0, 10);
        assert!(!v.passed);
        assert_eq!(v.failure, Some((HookFamily::Spacing, 0)));
        let v = hook_constants_check(C2, C3, 1000);
        assert!(v.passed, "{v:?}");
        let v = hook_constants_check(2.0, 1.0, 0);
        assert_eq!(v.failure, Some((HookFamily::Scalar, 0)));
    }

    #[test]
    fn diam_examples() {
        assert_eq!(diam_bounds(2.0), (1.0, 4.0));
        assert_eq!(diam_bounds(4.0), (2.0, 8.0));
        let (p, i) = diam_bounds(1000.0);
        assert!((p - 173.6).abs() < 0.1);
        assert!((i / (1000.0 / EIGHT_PI).exp() - 1.0).abs() < 1e-12);
    }
}
