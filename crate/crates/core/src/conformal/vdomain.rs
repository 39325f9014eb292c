//! The spike domain V = {x > 0, |y| < ρ(x)} and its conformal map ψ onto
//! the right half-plane with ψ(1) = 1, ψ(∞) = ∞.
//!
//! ρ is built from a normalized interval list: breakpoints x_j = 1 + δ̂·j
//! with ρ(x_j) = δ̂/(2ℓ_j), linear in between, constant on [0, 1] and after
//! the last breakpoint. The upper half V⁺ is a polygon mapped from the strip
//! {0 < Im W < π} by a Schwarz–Christoffel map with all prevertices on the
//! top line; then ψ = exp((W − W₁)/2), extended to V by reflection.

use super::halfstrip::HookSequences;
use super::sc::{End, ScMap, ScProblem, Side, SolveOptions, VertexSpec, END_MARGIN};
use super::NumericMap;
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use crate::scaled::LogReal;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, LN_2, PI};

/// Default for the universal constant C in δ̃ = δ/(2C + 3).
pub const DEFAULT_HARMONIC_CONSTANT: f64 = 10.0;

/// ψ is only resolved up to ln ψ ≈ LAMBDA_MAX; beyond that ψ overflows a
/// double anyway, so V is truncated there.
pub const LAMBDA_MAX: f64 = 760.0;

const MAX_TERMS: usize = 64;

/// Normalize a list of intervals [α_j, β_j] ⊂ [1, ∞):
/// α̃₀ = 1, β̃₀ = 2 and β̃_{n} = max(β̃_{n−1}¹⁰, max{β_j : α_j < β̃_{n−1}}),
/// until every β_j is covered.
pub fn normalize_intervals(intervals: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    for &(a, b) in intervals {
        if !(a >= 1.0) || !(b >= a) || !b.is_finite() {
            return Err(Error::Domain(format!("interval [{a}, {b}] must satisfy 1 ≤ α ≤ β < ∞")));
        }
    }
    let sup = intervals.iter().map(|p| p.1).fold(0.0, f64::max);
    let below = |bound: LogReal| {
        intervals
            .iter()
            .filter(|p| p.0.ln() < bound.ln)
            .map(|p| p.1)
            .fold(None, |acc: Option<f64>, b| Some(acc.map_or(b, |a| a.max(b))))
            .map(LogReal::from_f64)
    };
    let out = normalize_with(below, |bound| sup.ln() <= bound.ln);
    out.into_iter()
        .map(|(a, b)| match (a.to_f64(), b.to_f64()) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(Error::NotRepresentable(format!("normalized endpoint e^{}", b.ln))),
        })
        .collect()
}

/// The normalization rule for an implicitly given (possibly infinite)
/// family. `max_beta_below(B)` is the largest β among intervals with α < B;
/// `covered(B)` reports that no interval extends past B. Stops after an
/// infinite endpoint.
pub fn normalize_with<F, G>(max_beta_below: F, covered: G) -> Vec<(LogReal, LogReal)>
where
    F: Fn(LogReal) -> Option<LogReal>,
    G: Fn(LogReal) -> bool,
{
    let mut out = vec![(LogReal::one(), LogReal::from_f64(2.0))];
    while out.len() < MAX_TERMS {
        let prev = out.last().unwrap().1;
        if !prev.ln.is_finite() || covered(prev) {
            break;
        }
        let mut next = prev.powf(10.0);
        if let Some(b) = max_beta_below(prev) {
            if b > next || b.ln.is_nan() {
                next = b;
            }
        }
        out.push((prev, next));
    }
    out
}

/// Normalized interval list for the hook construction: the moduli of
/// J_{k,m} = ([max(5, a_k/10), 100·a_{k+1}] + 2πim)/5 over k ≥ 0, m ∈ Z.
pub fn hook_normalized_intervals(seq: &HookSequences) -> Vec<(LogReal, LogReal)> {
    let a = &seq.a;
    let left = |k: usize| {
        // max(5, a_k/10)/5 = max(1, a_k/50)
        let v = a[k].div(LogReal::from_f64(50.0));
        if v.ln > 0.0 {
            v
        } else {
            LogReal::one()
        }
    };
    let below = |bound: LogReal| {
        let mut best: Option<LogReal> = None;
        for k in 0..a.len().saturating_sub(1) {
            let x = left(k);
            if !(x < bound) {
                continue;
            }
            // largest |m| with |x + 2πim/5| < bound
            let y = bound.powf(2.0).sub(x.powf(2.0)).map(|d| d.powf(0.5));
            let ym = match y {
                Some(y) => match y.to_f64() {
                    Some(v) if v < 1e15 => {
                        let m = (5.0 * v / (2.0 * PI)).floor();
                        (m > 0.0).then(|| LogReal::from_f64(2.0 * PI * m / 5.0))
                    }
                    _ => Some(y),
                },
                None => None,
            };
            let top = a[k + 1].scale(20.0);
            let beta = match ym {
                Some(ym) => top.powf(2.0).add(ym.powf(2.0)).powf(0.5),
                None => top,
            };
            best = Some(match best {
                Some(b) if b > beta => b,
                _ => beta,
            });
        }
        best
    };
    normalize_with(below, |_| false)
}

/// ρ-profile of V.
#[derive(Clone, Debug, Serialize)]
pub struct VProfile {
    pub delta: f64,
    pub delta_hat: f64,
    pub breakpoints: Vec<f64>,
    pub rho: Vec<f64>,
    pub intervals: Vec<(LogReal, LogReal)>,
    /// ℓ_j = ln β̃_j − ln α̃_j (+∞ when β̃_j is out of range).
    pub lengths: Vec<f64>,
}

/// Build the profile for target diameter `delta` from normalized intervals.
pub fn v_profile(delta: f64, intervals: &[(LogReal, LogReal)]) -> Result<VProfile> {
    if !(delta > 0.0 && delta < PI) {
        return Err(Error::Domain(format!("δ = {delta} must lie in (0, π)")));
    }
    if intervals.is_empty() {
        return Err(Error::Domain("empty interval list".into()));
    }
    let (a0, b0) = intervals[0];
    if a0.ln.abs() > 1e-12 || b0.ln < LN_2 - 1e-12 {
        return Err(Error::Domain("first interval must be [1, β̃₀] with β̃₀ ≥ 2".into()));
    }
    for w in intervals.windows(2) {
        let (_, b) = w[0];
        let (a, b2) = w[1];
        if (a.ln - b.ln).abs() > 1e-9 * b.ln.abs().max(1.0) || b2.ln < 10.0 * b.ln * (1.0 - 1e-12) {
            return Err(Error::Domain("interval list is not normalized".into()));
        }
    }
    let delta_hat = delta / 3.0;
    let lengths: Vec<f64> = intervals.iter().map(|(a, b)| b.ln - a.ln).collect();
    let rho = lengths.iter().map(|l| if l.is_finite() { delta_hat / (2.0 * l) } else { 0.0 }).collect();
    let breakpoints = (0..intervals.len()).map(|j| 1.0 + delta_hat * j as f64).collect();
    Ok(VProfile { delta, delta_hat, breakpoints, rho, intervals: intervals.to_vec(), lengths })
}

impl VProfile {
    pub fn rho_at(&self, x: f64) -> f64 {
        let xs = &self.breakpoints;
        if x <= xs[0] {
            return self.rho[0];
        }
        for j in 1..xs.len() {
            if x <= xs[j] {
                let t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
                return self.rho[j - 1] + t * (self.rho[j] - self.rho[j - 1]);
            }
        }
        *self.rho.last().unwrap()
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re > 0.0 && z.im.abs() < self.rho_at(z.re)
    }

    /// True when ρ reaches 0 at the last breakpoint.
    pub fn pinches(&self) -> bool {
        *self.rho.last().unwrap() == 0.0
    }

    /// A priori ln ψ(x) ≈ (π/2)∫₁^x dt/ρ(t).
    pub fn apriori_lambda(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        let mut a = 1.0f64;
        let xs = &self.breakpoints;
        if x <= 1.0 {
            return -FRAC_PI_2 * (1.0 - x) / self.rho[0];
        }
        for j in 1..=xs.len() {
            let b = if j < xs.len() { xs[j].min(x) } else { x };
            if b > a {
                let ra = self.rho_at(a);
                let rb = self.rho_at(b);
                acc += if rb <= 0.0 {
                    f64::INFINITY
                } else if (ra - rb).abs() <= 1e-14 * ra {
                    (b - a) / ra
                } else {
                    (b - a) * (ra / rb).ln() / (ra - rb)
                };
                a = b;
            }
            if a >= x {
                break;
            }
        }
        FRAC_PI_2 * acc
    }

    /// Smallest x with apriori_lambda(x) ≥ LAMBDA_MAX, when ρ pinches.
    pub fn truncation(&self) -> Option<f64> {
        if !self.pinches() {
            return None;
        }
        let target = LAMBDA_MAX / FRAC_PI_2;
        let xs = &self.breakpoints;
        let mut acc = 0.0;
        for j in 1..xs.len() {
            let (xa, xb) = (xs[j - 1], xs[j]);
            let (ra, rb) = (self.rho[j - 1], self.rho[j]);
            let piece = if rb <= 0.0 {
                f64::INFINITY
            } else if (ra - rb).abs() <= 1e-14 * ra {
                (xb - xa) / ra
            } else {
                (xb - xa) * (ra / rb).ln() / (ra - rb)
            };
            if acc + piece >= target {
                let need = target - acc;
                if (ra - rb).abs() <= 1e-14 * ra {
                    return Some(xa + need * ra);
                }
                let s = (rb - ra) / (xb - xa);
                let r = ra * (s * need).exp();
                return Some(xa + (r - ra) / s);
            }
            acc += piece;
        }
        None
    }

    /// Upper boundary polygon of V⁺ (after truncation) from (0, ρ₀) rightwards.
    fn top_polygon(&self) -> Vec<Complex64> {
        let x_max = self.truncation();
        let mut pts = vec![Complex64::new(0.0, self.rho[0])];
        for (x, r) in self.breakpoints.iter().zip(&self.rho) {
            if x_max.is_some_and(|m| *x >= m) || *r <= 0.0 {
                break;
            }
            pts.push(Complex64::new(*x, *r));
        }
        if let Some(m) = x_max {
            pts.push(Complex64::new(m, self.rho_at(m)));
        }
        pts
    }
}

/// A two-sided check of ln β̃_j ≤ dist_V(1, x_{j+1}) ≤ 8 ln β̃_{j+1}.
#[derive(Clone, Debug, Serialize)]
pub struct ChainCheck {
    pub j: usize,
    pub lower: f64,
    pub upper: f64,
    /// ln ψ(x_{j+1}).
    pub dist_direct: f64,
    /// ∫₁^{x_{j+1}} Λ'(t) dt by adaptive quadrature.
    pub dist_quadrature: f64,
    pub quadrature_error: f64,
    pub passed: bool,
}

/// Euclidean diameter of ψ⁻¹ of a normalized interval.
#[derive(Clone, Debug, Serialize)]
pub struct PreimageDiameter {
    pub j: usize,
    pub diameter: f64,
    /// The interval reaches past the truncation; its right end was clipped.
    pub clipped: bool,
}

/// ψ: V → H, stored through Λ = ln ψ.
#[derive(Clone, Debug)]
pub struct VMap {
    pub profile: VProfile,
    pub x_max: Option<f64>,
    map: ScMap,
    w1: f64,
    axis: Vec<(f64, f64)>,
    accuracy: f64,
}

/// Numerically map V onto H; fails when the boundary accuracy exceeds `eps`.
pub fn map_v_to_halfplane(profile: &VProfile, eps: f64) -> Result<VMap> {
    let top = profile.top_polygon();
    let x_max = profile.truncation();
    // interior angles from the slope changes
    let mut vertices = vec![VertexSpec { pos: top[0], alpha: 0.5, side: Side::Top }];
    let slope = |a: Complex64, b: Complex64| ((b.im - a.im) / (b.re - a.re)).atan();
    for i in 1..top.len() {
        let s_in = slope(top[i - 1], top[i]);
        let s_out = if i + 1 < top.len() { slope(top[i], top[i + 1]) } else { 0.0 };
        let alpha = 1.0 + (s_out - s_in) / PI;
        if (alpha - 1.0).abs() >= 1e-12 {
            vertices.push(VertexSpec { pos: top[i], alpha, side: Side::Top });
        }
    }
    // channel estimate W(x) ≈ π∫₀^x dt/ρ for the prevertex guess
    let guess: Vec<f64> = vertices
        .iter()
        .map(|v| {
            let x = v.pos.re;
            if x <= 1.0 {
                PI * x / profile.rho[0]
            } else {
                PI / profile.rho[0] + 2.0 * profile.apriori_lambda(x)
            }
        })
        .collect();
    let rho_end = top.last().unwrap().im;
    let problem = ScProblem {
        vertices,
        left: End::Vertex { pos: Complex64::new(0.0, 0.0), alpha: 0.5 },
        right: End::Channel { width: Complex64::new(0.0, rho_end) },
    };
    let map = ScMap::solve(&problem, 0.25, &guess, SolveOptions::default())?;
    let (lo, hi) = map.x_range();
    let mut axis = Vec::new();
    let mut w = lo - END_MARGIN;
    while w <= hi + END_MARGIN {
        axis.push((map.eval(Complex64::new(w, 0.0)).re, w));
        w += 1.0;
    }
    let mut vm = VMap { profile: profile.clone(), x_max, map, w1: 0.0, axis, accuracy: 0.0 };
    let w1 = vm.invert_upper(Complex64::new(1.0, 0.0))?;
    vm.w1 = w1.re;
    vm.accuracy = vm.measure_boundary(&top);
    if vm.accuracy > eps {
        return Err(Error::AccuracyNotReached { achieved: vm.accuracy, requested: eps });
    }
    Ok(vm)
}

fn dist_to_segment(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let t = (((z - a) * ab.conj()).re / ab.norm_sqr()).clamp(0.0, 1.0);
    (a + ab * t - z).norm()
}

impl VMap {
    pub fn scmap(&self) -> &ScMap {
        &self.map
    }

    /// W₁ = f⁻¹(1) on the bottom line.
    pub fn w1(&self) -> f64 {
        self.w1
    }

    fn guess(&self, z: Complex64) -> Complex64 {
        let first = self.axis[0];
        let last = *self.axis.last().unwrap();
        if z.re >= last.0 {
            let (_, slope) = self.map.channel_slopes();
            return (z - self.map.right_constant()) / slope;
        }
        if z.re <= first.0 {
            let (mu, k) = self.map.integrand.left_asymptote();
            let w = (z * mu / (self.map.c * k)).ln() / mu;
            return Complex64::new(w.re, w.im.clamp(1e-3, PI - 1e-3));
        }
        let i = self.axis.partition_point(|p| p.0 < z.re).clamp(1, self.axis.len() - 1);
        let (xa, wa) = self.axis[i - 1];
        let (xb, wb) = self.axis[i];
        let wr = if xb > xa { wa + (wb - wa) * (z.re - xa) / (xb - xa) } else { wa };
        let rho = self.profile.rho_at(z.re).max(1e-300);
        Complex64::new(wr, (PI * z.im / rho).clamp(1e-9, PI - 1e-6))
    }

    /// f⁻¹(z) for z in the closure of V⁺.
    fn invert_upper(&self, z: Complex64) -> Result<Complex64> {
        let tol = 1e-15 * z.norm().max(1e-3);
        self.map.invert_from(z, self.guess(z), tol)
    }

    /// Λ(z) = ln ψ(z).
    pub fn lambda(&self, z: Complex64) -> Result<Complex64> {
        if !self.profile.contains(z) {
            return Err(Error::NotInDomain(format!("{z} is not in V")));
        }
        let lower = z.im < 0.0;
        let zu = if lower { z.conj() } else { z };
        let w = self.invert_upper(zu)?;
        let l = (w - self.w1) / 2.0;
        Ok(if lower { l.conj() } else if z.im == 0.0 { Complex64::new(l.re, 0.0) } else { l })
    }

    /// ψ⁻¹(e^Λ) for |Im Λ| ≤ π/2.
    pub fn inverse_lambda(&self, l: Complex64) -> Result<Complex64> {
        if !(l.im.abs() <= FRAC_PI_2) || !l.re.is_finite() {
            return Err(Error::Domain(format!("Λ = {l} is outside |Im Λ| ≤ π/2")));
        }
        let lower = l.im < 0.0;
        let lu = if lower { l.conj() } else { l };
        let z = self.map.eval(Complex64::new(self.w1, 0.0) + 2.0 * lu);
        Ok(if lower {
            z.conj()
        } else if l.im == 0.0 {
            Complex64::new(z.re, 0.0)
        } else {
            z
        })
    }

    /// Λ'(z) = 1/(2 f'(W)).
    pub fn lambda_derivative(&self, z: Complex64) -> Result<Complex64> {
        let lower = z.im < 0.0;
        let zu = if lower { z.conj() } else { z };
        if !self.profile.contains(z) {
            return Err(Error::NotInDomain(format!("{z} is not in V")));
        }
        let w = self.invert_upper(zu)?;
        let d = 1.0 / (2.0 * self.map.derivative(w));
        Ok(if lower { d.conj() } else { d })
    }

    /// Real x with ψ(x) = e^t.
    pub fn real_preimage(&self, t: f64) -> Result<f64> {
        Ok(self.inverse_lambda(Complex64::new(t, 0.0))?.re)
    }

    fn measure_boundary(&self, top: &[Complex64]) -> f64 {
        let (lo, hi) = self.map.x_range();
        let mut worst: f64 = 0.0;
        let mut xs: Vec<f64> = Vec::new();
        let mut w = lo - END_MARGIN - 10.0;
        while w <= hi + END_MARGIN + 10.0 {
            xs.push(w);
            w += 0.5;
        }
        for p in &self.map.integrand.prevertices {
            for d in [1e-6, 1e-3, 0.05] {
                xs.push(p.x - d);
                xs.push(p.x + d);
            }
        }
        let corner = Complex64::new(0.0, 0.0);
        let rho_end = top.last().unwrap().im;
        for &x in &xs {
            let b = self.map.eval(Complex64::new(x, 0.0));
            worst = worst.max(if b.re >= 0.0 { b.im.abs() } else { b.norm() });
            let t = self.map.eval(Complex64::new(x, PI));
            let mut d = dist_to_segment(t, corner, top[0]);
            for s in top.windows(2) {
                d = d.min(dist_to_segment(t, s[0], s[1]));
            }
            let last = *top.last().unwrap();
            if t.re >= last.re {
                d = d.min((t.im - rho_end).abs());
            }
            worst = worst.max(d);
        }
        worst
    }

    /// Check ln β̃_j ≤ dist_V(1, x_{j+1}) ≤ 8 ln β̃_{j+1} for every
    /// breakpoint inside the resolved part of V.
    pub fn distance_chain(&self) -> Result<Vec<ChainCheck>> {
        let p = &self.profile;
        let mut out = Vec::new();
        for j in 0..p.breakpoints.len().saturating_sub(1) {
            let x = p.breakpoints[j + 1];
            if p.rho[j + 1] <= 0.0 || self.x_max.is_some_and(|m| x >= m) {
                break;
            }
            let direct = self.lambda(Complex64::new(x, 0.0))?.re;
            let mut quad = 0.0;
            let mut qerr = 0.0;
            let mut a = 1.0;
            for k in 1..=j + 1 {
                let b = p.breakpoints[k];
                let (ra, rb) = (p.rho_at(a), p.rho_at(b));
                let s = (rb - ra) / (b - a);
                let dens = |t: f64| match self.lambda_derivative(Complex64::new(t, 0.0)) {
                    Ok(d) => d.re,
                    Err(_) => f64::NAN,
                };
                let q = if (ra - rb).abs() <= 1e-12 * ra {
                    adaptive_simpson(dens, a, b, 1e-9 * (b - a) / ra)
                } else {
                    // r = ln ρ straightens the 1/ρ growth of the density
                    let t_of = |r: f64| (a + (r.exp() - ra) / s).clamp(a, b);
                    let f = |r: f64| dens(t_of(r)) * r.exp() / s;
                    adaptive_simpson(f, ra.ln(), rb.ln(), 1e-9 * ((ra / rb).ln().abs() / s.abs()).max(1.0))
                };
                quad += q.value;
                qerr += q.error_estimate;
                a = b;
            }
            let lower = p.intervals[j].1.ln;
            let upper = 8.0 * p.intervals[j + 1].1.ln;
            let agree = (direct - quad).abs() <= 1e-6 * direct.abs().max(1.0) + qerr;
            let passed = agree && lower <= direct && direct <= upper && lower <= quad && quad <= upper;
            out.push(ChainCheck {
                j,
                lower,
                upper,
                dist_direct: direct,
                dist_quadrature: quad,
                quadrature_error: qerr,
                passed,
            });
        }
        Ok(out)
    }

    /// Euclidean diameters of ψ⁻¹([α̃_j, β̃_j]).
    pub fn preimage_diameters(&self) -> Result<Vec<PreimageDiameter>> {
        let cap = match self.x_max {
            Some(m) => self.lambda(Complex64::new(m * (1.0 - 1e-15), 0.0))?.re,
            None => f64::INFINITY,
        };
        let mut out = Vec::new();
        for (j, (a, b)) in self.profile.intervals.iter().enumerate() {
            if a.ln >= cap {
                break;
            }
            let clipped = b.ln > cap;
            let xa = self.real_preimage(a.ln)?;
            let xb = if clipped { self.x_max.unwrap() } else { self.real_preimage(b.ln)? };
            out.push(PreimageDiameter { j, diameter: xb - xa, clipped });
        }
        Ok(out)
    }

    /// Diameter of ψ⁻¹ of the segment from ζ₀ to ζ₁ in H, sampled.
    pub fn segment_preimage_diameter(&self, z0: Complex64, z1: Complex64, samples: usize) -> Result<f64> {
        let mut pts = Vec::with_capacity(samples + 1);
        for i in 0..=samples {
            let z = z0 + (z1 - z0) * (i as f64 / samples as f64);
            pts.push(self.inverse_lambda(z.ln())?);
        }
        let mut d: f64 = 0.0;
        for i in 0..pts.len() {
            for k in i + 1..pts.len() {
                d = d.max((pts[i] - pts[k]).norm());
            }
        }
        Ok(d)
    }
}

impl NumericMap for VMap {
    fn forward(&self, z: Complex64) -> Result<Complex64> {
        let l = self.lambda(z)?;
        if l.re > crate::scaled::LN_MAX {
            return Err(Error::NotRepresentable(format!("ψ({z}) = e^{}", l.re)));
        }
        Ok(l.exp())
    }
    fn inverse(&self, w: Complex64) -> Result<Complex64> {
        if !(w.re > 0.0) {
            return Err(Error::Domain(format!("{w} is not in the right half-plane")));
        }
        self.inverse_lambda(w.ln())
    }
    fn derivative(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.forward(z)? * self.lambda_derivative(z)?)
    }
    fn boundary_accuracy(&self) -> f64 {
        self.accuracy
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_examples() {
        assert_eq!(normalize_intervals(&[(1.0, 2.0)]).unwrap(), vec![(1.0, 2.0)]);
        assert_eq!(normalize_intervals(&[(1.0, 2.0), (3.0, 5.0)]).unwrap(), vec![(1.0, 2.0), (2.0, 1024.0)]);
        assert!(normalize_intervals(&[(0.5, 2.0)]).is_err());
    }

    #[test]
    fn single_interval_profile() {
        let iv = [(LogReal::one(), LogReal::from_f64(2.0))];
        let p = v_profile(1.0, &iv).unwrap();
        assert!((p.rho_at(0.3) - (1.0 / 3.0) / (2.0 * LN_2)).abs() < 1e-12);
        assert!((p.rho_at(0.3) - 0.2404).abs() < 1e-4);
        assert_eq!(p.rho_at(50.0), p.rho_at(0.0));
        assert!(p.truncation().is_none());
    }

    #[test]
    fn hook_intervals_grow() {
        let seq = super::super::halfstrip::hook_sequences(6.0, 8).unwrap();
        let iv = hook_normalized_intervals(&seq);
        assert_eq!(iv.len(), 4);
        // β̃₁ = 20·a₂
        assert!((iv[1].1.ln - (20.0 * seq.a[2].value()).ln()).abs() < 1e-9);
        assert!((iv[2].1.ln - (seq.a[3].ln + 20f64.ln())).abs() < 1e-6);
        assert!(iv[3].1.ln.is_infinite());
    }
}
