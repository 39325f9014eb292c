//! Quadrature: adaptive Simpson for real integrands and Gauss–Jacobi rules
//! for the endpoint-singular integrals of the Schwarz–Christoffel engine.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

/// Result of an adaptive integration.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Quadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

const MAX_DEPTH: u32 = 48;

/// Adaptive Simpson with absolute tolerance `tol`.
///
/// The integrand may signal an invalid sample by returning NaN; this is
/// propagated into `value` so callers can reject the result.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> Quadrature {
    let fa = f(a);
    let fm = f(0.5 * (a + b));
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut evals = 3;
    let mut err = 0.0;
    let value = simpson_step(&mut f, a, b, fa, fm, fb, whole, tol, MAX_DEPTH, &mut evals, &mut err);
    Quadrature { value, error_estimate: err, evaluations: evals }
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    evals: &mut usize,
    err: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    *evals += 2;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return f64::NAN;
    }
    if depth == 0 || delta.abs() <= 15.0 * tol {
        *err += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, evals, err)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, evals, err)
}

/// Gauss rule on [−1, 1] for the weight (1−x)^a (1+x)^b.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub a: f64,
    pub b: f64,
}

impl GaussRule {
    /// Golub–Welsch construction. Requires a, b > −1.
    pub fn jacobi(n: usize, a: f64, b: f64) -> GaussRule {
        assert!(a > -1.0 && b > -1.0 && n > 0);
        let mut j = DMatrix::<f64>::zeros(n, n);
        let ab = a + b;
        for k in 0..n {
            let kf = k as f64;
            let s = 2.0 * kf + ab;
            let diag = if k == 0 {
                (b - a) / (ab + 2.0)
            } else {
                (b * b - a * a) / (s * (s + 2.0))
            };
            j[(k, k)] = diag;
            if k + 1 < n {
                let k1 = kf + 1.0;
                let s1 = 2.0 * k1 + ab;
                let num = 4.0 * k1 * (k1 + a) * (k1 + b) * (k1 + ab);
                let den = s1 * s1 * (s1 + 1.0) * (s1 - 1.0);
                let off = (num / den).sqrt();
                j[(k, k + 1)] = off;
                j[(k + 1, k)] = off;
            }
        }
        let mu0 = ((ab + 1.0) * 2f64.ln() + ln_gamma(a + 1.0) + ln_gamma(b + 1.0) - ln_gamma(ab + 2.0)).exp();
        let eig = SymmetricEigen::new(j);
        let mut pairs: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let v0 = eig.eigenvectors[(0, i)];
                (eig.eigenvalues[i], mu0 * v0 * v0)
            })
            .collect();
        pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        GaussRule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
            a,
            b,
        }
    }

    pub fn legendre(n: usize) -> GaussRule {
        GaussRule::jacobi(n, 0.0, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_and_log() {
        let q = adaptive_simpson(|x| x * x, 0.0, 3.0, 1e-12);
        assert!((q.value - 9.0).abs() < 1e-12);
        let q = adaptive_simpson(|x| 1.0 / (1.0 + x), 0.0, 1.0, 1e-10);
        assert!((q.value - 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let g = GaussRule::legendre(8);
        let s: f64 = g.nodes.iter().zip(&g.weights).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn jacobi_moments() {
        // ∫_{-1}^{1} (1+x)^{-1/2} dx = 2√2 and ∫ x (1+x)^{-1/2} dx = −2√2/3
        let g = GaussRule::jacobi(10, 0.0, -0.5);
        let m0: f64 = g.weights.iter().sum();
        let m1: f64 = g.nodes.iter().zip(&g.weights).map(|(x, w)| w * x).sum();
        assert!((m0 - 2.0 * 2f64.sqrt()).abs() < 1e-13);
        assert!((m1 + 2.0 * 2f64.sqrt() / 3.0).abs() < 1e-13);
    }
}
