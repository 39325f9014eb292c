//! Hyperbolic densities and distances on the right half-plane and the strip
//! Σ = {|Im z| < π}.
//!
//! The half-plane density is 1/Re z (curvature −1). With that normalization
//! the two-sided estimate in terms of the distance d to the boundary reads
//! 1/(2d) ≤ ρ ≤ 2/d.

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Absolute quadrature tolerance used for Ahlfors integrals.
pub const AHLFORS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityBounds {
    pub lower: f64,
    pub upper: f64,
}

fn check_finite(z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("non-finite point {z}")))
    }
}

/// Hyperbolic distance in {Re z > 0}.
pub fn hyp_dist_halfplane(z: Complex64, w: Complex64) -> Result<f64> {
    check_finite(z)?;
    check_finite(w)?;
    if z.re <= 0.0 || w.re <= 0.0 {
        return Err(Error::Domain(format!("points must have positive real part: {z}, {w}")));
    }
    // cosh d = 1 + 2 sinh²(d/2), written this way to keep nearby points accurate
    let s = (z - w).norm() / (2.0 * (z.re * w.re).sqrt());
    Ok(2.0 * s.asinh())
}

/// Two-sided density estimate for a simply connected domain in terms of the
/// Euclidean distance to its boundary.
pub fn density_bounds(dist_to_boundary: f64) -> Result<DensityBounds> {
    if !(dist_to_boundary > 0.0) || !dist_to_boundary.is_finite() {
        return Err(Error::Domain(format!("distance to boundary must be positive, got {dist_to_boundary}")));
    }
    let upper = 2.0 / dist_to_boundary;
    Ok(DensityBounds { lower: upper / 4.0, upper })
}

/// Density of Σ = {|Im z| < π}.
pub fn strip_density(z: Complex64) -> Result<f64> {
    check_finite(z)?;
    if z.im.abs() >= std::f64::consts::PI {
        return Err(Error::Domain(format!("point {z} outside the strip |Im| < π")));
    }
    Ok(1.0 / (2.0 * (z.im / 2.0).cos()))
}

/// Hyperbolic distance in Σ between two points on the real axis.
pub fn strip_dist_real(x: f64, y: f64) -> f64 {
    (x - y).abs() / 2.0
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct AhlforsBound {
    pub integral: f64,
    pub quadrature_error: f64,
    pub bound: f64,
}

/// ∫ₜ^{t'} ds/θ(s) − 2 ln 32, where θ(s) is the width of a vertical cross
/// section of a strip-like domain.
pub fn ahlfors_lower_bound<F: Fn(f64) -> f64>(theta: F, t: f64, t1: f64) -> Result<AhlforsBound> {
    if !(t < t1) {
        return Err(Error::Precondition(format!("need t < t', got [{t}, {t1}]")));
    }
    let q = adaptive_simpson(
        |s| {
            let th = theta(s);
            if th > 0.0 && th.is_finite() {
                1.0 / th
            } else {
                f64::NAN
            }
        },
        t,
        t1,
        AHLFORS_TOL,
    );
    if q.value.is_nan() {
        return Err(Error::Precondition("θ must be positive and finite on [t, t']".into()));
    }
    if q.value < 0.5 {
        return Err(Error::Precondition(format!("∫ ds/θ = {} is below 1/2", q.value)));
    }
    Ok(AhlforsBound {
        integral: q.value,
        quadrature_error: q.error_estimate,
        bound: q.value - 2.0 * 32f64.ln(),
    })
}
