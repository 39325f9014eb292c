//! Conformal maps used to build tract models.

pub mod halfstrip;
pub mod hooked;
pub mod sc;
pub mod vdomain;

use crate::error::Result;
use num_complex::Complex64;
use serde::Serialize;

/// A conformal map with forward, inverse and derivative evaluators.
pub trait NumericMap: Send + Sync {
    fn forward(&self, z: Complex64) -> Result<Complex64>;
    fn inverse(&self, w: Complex64) -> Result<Complex64>;
    fn derivative(&self, z: Complex64) -> Result<Complex64>;
    /// Sup distance of mapped boundary samples from the target boundary.
    fn boundary_accuracy(&self) -> f64;
}

/// Round-trip and orientation statistics of a map on interior samples.
#[derive(Clone, Debug, Serialize)]
pub struct MapCheck {
    pub samples: usize,
    pub max_round_trip: f64,
    pub min_jacobian: f64,
    pub passed: bool,
}

/// Check |inverse(forward(z)) − z| ≤ 10·max(ε, tol) and a positive
/// finite-difference Jacobian at each sample.
pub fn check_map(map: &dyn NumericMap, samples: &[Complex64], tol: f64) -> Result<MapCheck> {
    let eps = map.boundary_accuracy().max(tol);
    let mut max_rt: f64 = 0.0;
    let mut min_jac = f64::INFINITY;
    for &z in samples {
        let w = map.forward(z)?;
        let back = map.inverse(w)?;
        max_rt = max_rt.max((back - z).norm());
        let h = 1e-6 * z.norm().max(1e-3);
        let fx = (map.forward(z + h)? - map.forward(z - h)?) / (2.0 * h);
        // Jacobian of a holomorphic map is |f'|², its sign the orientation
        let fy = (map.forward(z + Complex64::new(0.0, h))? - map.forward(z - Complex64::new(0.0, h))?) / (2.0 * h);
        let jac = fx.re * fy.im - fx.im * fy.re;
        min_jac = min_jac.min(jac);
    }
    Ok(MapCheck {
        samples: samples.len(),
        max_round_trip: max_rt,
        min_jacobian: min_jac,
        passed: max_rt <= 10.0 * eps && min_jac > 0.0,
    })
}
