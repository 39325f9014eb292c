//! Closed-form maps: half-strips onto the right half-plane, half-plane
//! automorphisms, and the hook map F₀ with its orbit sequences.

use super::NumericMap;
use crate::error::{Error, Result};
use crate::scaled::LogReal;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, PI};

/// The automorphism z ↦ k·z + i·t of the right half-plane (k > 0).
///
/// Among automorphisms sending p to q, this is the one whose derivative at p
/// is a positive real.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Affine {
    pub k: f64,
    pub t: f64,
}

impl Affine {
    pub fn apply(&self, z: Complex64) -> Complex64 {
        Complex64::new(self.k * z.re, self.k * z.im + self.t)
    }

    pub fn unapply(&self, w: Complex64) -> Complex64 {
        Complex64::new(w.re / self.k, (w.im - self.t) / self.k)
    }
}

/// Automorphism of the right half-plane with p ↦ q and positive derivative at p.
pub fn halfplane_automorphism(p: Complex64, q: Complex64) -> Result<Affine> {
    if !(p.re > 0.0) || !(q.re > 0.0) || !p.im.is_finite() || !q.im.is_finite() {
        return Err(Error::Domain(format!("points must lie in the right half-plane: p={p}, q={q}")));
    }
    let k = q.re / p.re;
    Ok(Affine { k, t: q.im - k * p.im })
}

impl NumericMap for Affine {
    fn forward(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.apply(z))
    }
    fn inverse(&self, w: Complex64) -> Result<Complex64> {
        Ok(self.unapply(w))
    }
    fn derivative(&self, _z: Complex64) -> Result<Complex64> {
        Ok(Complex64::new(self.k, 0.0))
    }
    fn boundary_accuracy(&self) -> f64 {
        0.0
    }
}

/// The half-strip {Re z > x0, |Im z − center| < half_width}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfStrip {
    pub x0: f64,
    pub center: f64,
    pub half_width: f64,
}

impl HalfStrip {
    pub fn contains(&self, z: Complex64) -> bool {
        z.re > self.x0 && (z.im - self.center).abs() < self.half_width
    }

    /// Affine change to the standard half-strip {Re > 0, |Im| < π/2}.
    fn standard(&self, z: Complex64) -> Complex64 {
        (z - Complex64::new(self.x0, self.center)) * (FRAC_PI_2 / self.half_width)
    }

    fn unstandard(&self, w: Complex64) -> Complex64 {
        w * (self.half_width / FRAC_PI_2) + Complex64::new(self.x0, self.center)
    }
}

/// Conformal isomorphism of a half-strip onto the right half-plane:
/// affine normalization, then sinh, then a half-plane automorphism.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfStripMap {
    pub strip: HalfStrip,
    pub normalizer: Affine,
}

/// The map of `strip` onto H sending `anchor` to `anchor_image`.
///
/// The derivative at the anchor is a positive real when the anchor lies on
/// the symmetry axis of the strip.
pub fn halfstrip_map(strip: HalfStrip, anchor: Complex64, anchor_image: Complex64) -> Result<HalfStripMap> {
    if !(strip.half_width > 0.0) {
        return Err(Error::Domain("half-width must be positive".into()));
    }
    if !strip.contains(anchor) {
        return Err(Error::Domain(format!("anchor {anchor} is not inside the half-strip")));
    }
    if !(anchor_image.re > 0.0) {
        return Err(Error::NormalizationInfeasible(format!("{anchor_image} is not in the right half-plane")));
    }
    let p = strip.standard(anchor).sinh();
    let normalizer = halfplane_automorphism(p, anchor_image)?;
    Ok(HalfStripMap { strip, normalizer })
}

impl HalfStripMap {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.normalizer.apply(self.strip.standard(z).sinh())
    }

    pub fn eval_inverse(&self, w: Complex64) -> Complex64 {
        self.strip.unstandard(self.normalizer.unapply(w).asinh())
    }

    pub fn eval_derivative(&self, z: Complex64) -> Complex64 {
        self.strip.standard(z).cosh() * (self.normalizer.k * FRAC_PI_2 / self.strip.half_width)
    }
}

impl NumericMap for HalfStripMap {
    fn forward(&self, z: Complex64) -> Result<Complex64> {
        if !self.strip.contains(z) {
            return Err(Error::NotInDomain(format!("{z} is outside the half-strip")));
        }
        Ok(self.eval(z))
    }
    fn inverse(&self, w: Complex64) -> Result<Complex64> {
        if !(w.re > 0.0) {
            return Err(Error::Domain(format!("{w} is not in the right half-plane")));
        }
        Ok(self.eval_inverse(w))
    }
    fn derivative(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.eval_derivative(z))
    }
    fn boundary_accuracy(&self) -> f64 {
        0.0
    }
}

/// T₀ = {Re z > 4, |Im z| < π/2}.
pub const T0: HalfStrip = HalfStrip { x0: 4.0, center: 0.0, half_width: FRAC_PI_2 };

/// F₀(ζ) = 5·sinh(ζ − 4)/sinh(1): the map of T₀ onto H with F₀(5) = 5, F₀'(5) > 0.
pub fn f0_map() -> HalfStripMap {
    halfstrip_map(T0, Complex64::new(5.0, 0.0), Complex64::new(5.0, 0.0)).expect("T0 normalization")
}

pub fn f0(z: Complex64) -> Complex64 {
    5.0 * (z - 4.0).sinh() / 1f64.sinh()
}

/// F₀⁻¹(w) = 4 + asinh(w·sinh(1)/5).
pub fn f0_inverse(w: Complex64) -> Complex64 {
    4.0 + (w * (1f64.sinh() / 5.0)).asinh()
}

/// F₀ on reals ≥ 4 in log form, valid for arguments far beyond f64 range.
pub fn f0_log(x: LogReal) -> LogReal {
    let c = (5.0 / 1f64.sinh()).ln();
    match x.to_f64() {
        Some(v) if v - 4.0 < 20.0 => LogReal::from_f64(5.0 * (v - 4.0).sinh() / 1f64.sinh()),
        Some(v) => {
            let u = v - 4.0;
            // sinh u = e^u (1 − e^{−2u}) / 2
            LogReal::from_ln(c + u + (-(-2.0 * u).exp()).ln_1p() - std::f64::consts::LN_2)
        }
        None if x.ln > 0.0 => LogReal::from_ln(f64::INFINITY),
        None => LogReal::from_f64(5.0 * (-4.0f64).sinh().abs() / 1f64.sinh()),
    }
}

/// The orbits a_{n+1} = F₀(a_n), b_{n+1} = F₀(b_n) from a₀ = a, b₀ = a + 2.
#[derive(Clone, Debug, PartialEq)]
pub struct HookSequences {
    pub a: Vec<LogReal>,
    pub b: Vec<LogReal>,
}

/// The hook orbits up to index `n_max`. Entries past the range of LogReal
/// are +∞ (ln = +∞).
pub fn hook_sequences(a0: f64, n_max: usize) -> Result<HookSequences> {
    if !(a0 >= 6.0) {
        return Err(Error::InvalidSpec(format!("a = {a0} must satisfy a ≥ 6")));
    }
    let b0 = a0 + 2.0;
    if !(b0 < f0(Complex64::new(a0, 0.0)).re) {
        return Err(Error::InvalidSpec("b = a + 2 must lie below F₀(a)".into()));
    }
    let mut a = vec![LogReal::from_f64(a0)];
    let mut b = vec![LogReal::from_f64(b0)];
    for n in 0..n_max {
        a.push(f0_log(a[n]));
        b.push(f0_log(b[n]));
    }
    Ok(HookSequences { a, b })
}

/// Heights π(1 + 1/(3n + j)), j = 0..3, of the horizontal lines of the
/// hooked region T̂ₙ, from the top down.
pub fn hook_levels(n: usize) -> [f64; 4] {
    let f = |j: usize| PI * (1.0 + 1.0 / (3 * n + j) as f64);
    [f(0), f(1), f(2), f(3)]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f0_normalization() {
        let m = f0_map();
        let five = Complex64::new(5.0, 0.0);
        assert!((m.eval(five) - five).norm() < 1e-14);
        let d = m.eval_derivative(five);
        assert!(d.re > 0.0 && d.im.abs() < 1e-15);
        assert!((m.eval(Complex64::new(6.0, 0.0)).re - 15.430).abs() < 1e-3);
        for z in [Complex64::new(4.5, 1.2), Complex64::new(9.0, -0.3)] {
            assert!((m.eval(z) - f0(z)).norm() < 1e-12 * f0(z).norm());
            assert!((m.eval_inverse(m.eval(z)) - z).norm() < 1e-12);
        }
    }

    #[test]
    fn automorphism_examples() {
        let id = halfplane_automorphism(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(id, Affine { k: 1.0, t: 0.0 });
        let m = halfplane_automorphism(Complex64::new(1.0, 1.0), Complex64::new(3.0, 0.0)).unwrap();
        assert!((m.apply(Complex64::new(1.0, 1.0)) - Complex64::new(3.0, 0.0)).norm() < 1e-12);
        assert!(halfplane_automorphism(Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn sequences() {
        let s = hook_sequences(6.0, 4).unwrap();
        assert!((s.a[1].value() - 15.430).abs() < 1e-3);
        assert!((s.b[1].value() - 5.0 * 4f64.sinh() / 1f64.sinh()).abs() < 1e-9);
        assert!(s.a[3].ln > 1e5 && s.a[3].ln.is_finite());
        assert!(s.a[4].ln.is_infinite());
        assert!(hook_sequences(5.0, 2).is_err());
    }
}
