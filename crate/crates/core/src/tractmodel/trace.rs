//! Pullback tracing of points and hairs, forward orbits, and the
//! model-derived sequences used by the escape estimates.

use super::{ExternalAddress, LogModel, TractRef, TWO_PI};
use crate::contraction::ell;
use crate::error::{Error, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use std::f64::consts::PI;

/// A traced point with its enclosure radius.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct TracedPoint {
    pub z: Complex64,
    pub error_bound: f64,
    pub depth: usize,
}

/// One hair sample: target real part t at the trace depth.
#[derive(Clone, Copy, Debug)]
pub struct HairSample {
    pub t: f64,
    pub z: Complex64,
    pub error_bound: f64,
}

impl Serialize for HairSample {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.t, self.z.re, self.z.im, self.error_bound].serialize(s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Hair {
    pub address: String,
    pub depth: usize,
    pub samples: Vec<HairSample>,
    /// Re of the intermediate pullbacks is nondecreasing in t at every level.
    pub monotone: bool,
}

/// The imaginary center of a tract translate, used as the pullback target.
fn target_center(t: TractRef) -> f64 {
    TWO_PI * t.offset as f64
}

/// Pull `zeta` back along the first `depth` entries of the address,
/// returning the intermediate points from level `depth` down to level 0.
fn pullback_chain(model: &LogModel, address: &ExternalAddress, depth: usize, zeta: Complex64) -> Result<Vec<Complex64>> {
    let mut chain = Vec::with_capacity(depth + 1);
    let mut z = zeta;
    chain.push(z);
    for k in (0..depth).rev() {
        z = model.inverse_branch(address.get(k), z).map_err(|e| Error::AddressInadmissible {
            depth: k,
            reason: e.to_string(),
        })?;
        chain.push(z);
    }
    Ok(chain)
}

/// D₀ = 2·max over the address letters T of |F_T⁻¹(b) − b|, b the base point.
///
/// Inverse branches contract by 2 on the half-plane containing b, so the
/// depth-d pullbacks form a Cauchy sequence whose tail after d is at most
/// D₀·2^{−d}.
pub fn enclosure_constant(model: &LogModel, address: &ExternalAddress) -> Result<f64> {
    let b = Complex64::new(model.base_point, 0.0);
    let mut d: f64 = 0.0;
    for (k, t) in address.letters().into_iter().enumerate() {
        let z = model
            .inverse_branch(t, b)
            .map_err(|e| Error::AddressInadmissible { depth: k, reason: e.to_string() })?;
        d = d.max((z - b).norm());
    }
    Ok(2.0 * d)
}

/// F_{s₀}⁻¹ ∘ … ∘ F_{s_{d−1}}⁻¹ (Q + 1) with its enclosure radius.
pub fn trace_point(model: &LogModel, address: &ExternalAddress, depth: usize) -> Result<TracedPoint> {
    if depth == 0 {
        return Err(Error::Precondition("depth must be at least 1".into()));
    }
    let b = Complex64::new(model.base_point, 0.0);
    let chain = pullback_chain(model, address, depth, b)?;
    let d0 = enclosure_constant(model, address)?;
    Ok(TracedPoint { z: *chain.last().unwrap(), error_bound: d0 * 0.5f64.powi(depth as i32), depth })
}

/// Trace the hair of `address`: for each potential t the point whose depth-d
/// image is t (shifted to the center of the depth-d tract translate).
pub fn trace_hair(model: &LogModel, address: &ExternalAddress, potentials: &[f64], depth: usize) -> Result<Hair> {
    if depth == 0 {
        return Err(Error::Precondition("depth must be at least 1".into()));
    }
    if potentials.is_empty() || potentials.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Precondition("potentials must be strictly ascending".into()));
    }
    if !(potentials[0] > model.q) {
        return Err(Error::Precondition(format!("potentials must exceed Q = {}", model.q)));
    }
    let d0 = enclosure_constant(model, address)?;
    let height = PI;
    let center = target_center(address.get(depth));
    let chains: Vec<Vec<Complex64>> = potentials
        .par_iter()
        .map(|&t| pullback_chain(model, address, depth, Complex64::new(t, center)))
        .collect::<Result<_>>()?;
    let scale = 0.5f64.powi(depth as i32);
    let samples = potentials
        .iter()
        .zip(&chains)
        .map(|(&t, c)| HairSample {
            t,
            z: *c.last().unwrap(),
            error_bound: (d0 + (t - model.base_point).abs() + height) * scale,
        })
        .collect();
    let monotone = (0..=depth).all(|level| chains.windows(2).all(|w| w[1][level].re >= w[0][level].re));
    let names = model.names();
    Ok(Hair { address: address.display(names), depth, samples, monotone })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum OrbitStop {
    Completed,
    LeftDomain(String),
    /// The next iterate exceeds the double range: escaping.
    Overflow,
}

#[derive(Clone, Debug, Serialize)]
pub struct EscapeReport {
    pub real_parts: Vec<f64>,
    pub tracts: Vec<TractRef>,
    pub stop: OrbitStop,
    /// Re Fᵏ(z) > Q_test for every computed k and the orbit never left the
    /// tracts early.
    pub in_j_q: bool,
    /// The computed real parts are nondecreasing.
    pub monotone: bool,
}

/// Iterate F up to n times or until the orbit leaves the tracts.
pub fn orbit_escape(model: &LogModel, z: Complex64, q_test: f64, n: usize) -> EscapeReport {
    let mut real_parts = vec![z.re];
    let mut tracts = Vec::new();
    let mut stop = OrbitStop::Completed;
    let mut w = z;
    for _ in 0..n {
        match model.forward(w) {
            Ok((next, t)) if next.re.is_finite() && next.im.is_finite() => {
                tracts.push(t);
                real_parts.push(next.re);
                w = next;
            }
            Ok(_) | Err(Error::NotRepresentable(_)) => {
                stop = OrbitStop::Overflow;
                break;
            }
            Err(e) => {
                stop = OrbitStop::LeftDomain(e.to_string());
                break;
            }
        }
    }
    let in_j_q = !matches!(stop, OrbitStop::LeftDomain(_)) && real_parts.iter().all(|&x| x > q_test);
    let monotone = real_parts.windows(2).all(|p| p[1] >= p[0]);
    EscapeReport { real_parts, tracts, stop, in_j_q, monotone }
}

/// D = 2π² + π.
pub fn preimage_constant() -> f64 {
    2.0 * PI * PI + PI
}

/// An offset m with dist(F_T⁻¹(w + 2πim), z) small, with that distance: the
/// best of the seven offsets nearest to lining w up with F(z) vertically.
pub fn preimage_proximity(model: &LogModel, tract: TractRef, z: Complex64, w: Complex64) -> Result<(i64, f64)> {
    let fz = model.forward_in(tract, z)?;
    if !(w.re >= 1.0 && w.re < fz.re) {
        return Err(Error::Precondition(format!("need 1 ≤ Re w < Re F(z) = {}, got Re w = {}", fz.re, w.re)));
    }
    let m0 = ((fz.im - w.im) / TWO_PI).round() as i64;
    let mut best = (m0, f64::INFINITY);
    for m in m0 - 3..=m0 + 3 {
        let p = model.inverse_branch(tract, w + Complex64::new(0.0, TWO_PI * m as f64))?;
        let d = (p - z).norm();
        if d < best.1 {
            best = (m, d);
        }
    }
    Ok(best)
}

/// αₙ in coordinates shifted so that every tract lies right of 2π + 3.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AlphaValue {
    pub n: u32,
    pub alpha: f64,
    /// The same threshold in model coordinates.
    pub raw: f64,
    pub shift: f64,
}

/// The largest α (bisection) with diam{z ∈ T̄ : Re z ≤ α} ≤ ℓₙ for every
/// base tract; translates have the same slices.
pub fn alpha_sequence(model: &LogModel, n: u32) -> Result<AlphaValue> {
    let k = model.tract_count();
    let left = (0..k).map(|i| model.tract_left_edge(i)).fold(f64::INFINITY, f64::min);
    let target = ell(n);
    let ok = |a: f64| (0..k).all(|i| model.slice_diameter(i, a) <= target);
    let mut lo = left - 1.0;
    let mut hi = left + 1.0;
    while ok(hi) {
        lo = hi;
        hi = left + 2.0 * (hi - left);
        if hi > 1e300 {
            return Err(Error::Domain("slice diameters stay bounded".into()));
        }
    }
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if ok(m) {
            lo = m;
        } else {
            hi = m;
        }
        if hi - lo <= 1e-12 * hi.abs().max(1.0) {
            break;
        }
    }
    let shift = 2.0 * PI + 3.0 - left;
    Ok(AlphaValue { n, alpha: lo + shift, raw: lo, shift })
}

/// Sampled expansion on traced points.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExpansionReport {
    pub samples: usize,
    pub min_derivative: f64,
    /// min |F'(z)| / (Re F(z)/2).
    pub min_ratio: f64,
}

pub fn expansion_check(model: &LogModel, points: &[Complex64]) -> Result<ExpansionReport> {
    let mut min_d = f64::INFINITY;
    let mut min_r = f64::INFINITY;
    for &z in points {
        let d = model.derivative(z)?.norm();
        let (fz, _) = model.forward(z)?;
        min_d = min_d.min(d);
        min_r = min_r.min(d / (fz.re / 2.0));
    }
    Ok(ExpansionReport { samples: points.len(), min_derivative: min_d, min_ratio: min_r })
}

/// The orbit of the hair point with potential t: the pullback chain from
/// the first periodic level L = |prefix| (target t on the center line of the
/// level-L tract), followed by forward iterates of the target, up to
/// `len` points in total. Iterates beyond the double range are +∞.
pub fn hair_orbit(model: &LogModel, address: &ExternalAddress, t: f64, len: usize) -> Result<Vec<Complex64>> {
    let level = address.prefix.len();
    let target = Complex64::new(t, target_center(address.get(level)));
    let mut orbit = pullback_chain(model, address, level, target)?;
    orbit.reverse();
    let mut w = target;
    let inf = Complex64::new(f64::INFINITY, 0.0);
    while orbit.len() < len {
        w = if w.re.is_infinite() {
            inf
        } else {
            match model.forward(w) {
                Ok((next, _)) if next.re.is_finite() => next,
                Ok(_) | Err(Error::NotRepresentable(_)) => inf,
                Err(e) => return Err(e),
            }
        };
        orbit.push(w);
    }
    orbit.truncate(len);
    Ok(orbit)
}
