//! Points near the hook orbits aₖ, bₖ carried as anchor + offset, and their
//! pullbacks under F_{T₀}⁻¹ for levels far outside the double range.
//!
//! F_{T₀}⁻¹(w) = 4 + asinh(c·w) with c = sinh(1)/5 maps aₖ to aₖ₋₁, so a
//! point aₖ + δ pulls back to aₖ₋₁ + [asinh(X + Y) − asinh(X)] with X = c·aₖ,
//! Y = c·δ. The difference is evaluated without cancellation.

use crate::conformal::halfstrip::HookSequences;
use crate::conformal::hooked::{HookLocal, HookedMap};
use crate::error::{Error, Result};
use crate::scaled::{LogReal, ScaledComplex};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Anchor {
    A,
    B,
}

/// anchor_level + offset, with a bound on the position error relative to
/// |offset| (kept relative: at level 0 both can be e^{−10⁴⁹}).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct HookPoint {
    pub level: usize,
    pub anchor: Anchor,
    pub offset: ScaledComplex,
    pub rel_error: f64,
}

fn c0() -> f64 {
    1f64.sinh() / 5.0
}

/// √(1 + u²) on Re u > 0 without overflow.
fn sq1(u: Complex64) -> Complex64 {
    if u.norm() > 1e100 {
        u * (1.0 + 1.0 / (u * u)).sqrt()
    } else {
        (1.0 + u * u).sqrt()
    }
}

/// asinh(x + y) − asinh(x) for real x > 0.
fn asinh_diff(x: f64, y: Complex64) -> Complex64 {
    let u = Complex64::new(x, 0.0) + y;
    let v = Complex64::new(x, 0.0);
    let (su, sv) = (sq1(u), sq1(v));
    let num = y * (1.0 + (u + v) / (su + sv));
    (num / (v + sv)).ln_1p_complex()
}

trait Ln1p {
    fn ln_1p_complex(self) -> Complex64;
}

impl Ln1p for Complex64 {
    fn ln_1p_complex(self) -> Complex64 {
        if self.norm() < 1e-4 {
            // log(1+z) = z − z²/2 + z³/3 − …
            let mut term = self;
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 1..12 {
                acc += term / k as f64 * if k % 2 == 1 { 1.0 } else { -1.0 };
                term *= self;
            }
            acc
        } else {
            (1.0 + self).ln()
        }
    }
}

impl HookPoint {
    /// A point of T̂ₖ given by φₖ in local coordinates, with position error `err`.
    pub fn from_local(map: &HookedMap, z: HookLocal, err: f64) -> Self {
        let (anchor, off) = match z {
            HookLocal::UTurn(u) => (Anchor::A, u),
            HookLocal::Tip(v) => (Anchor::B, v),
        };
        HookPoint { level: map.n(), anchor, offset: ScaledComplex::from_complex(off), rel_error: err / off.norm() }
    }

    /// Absolute position error.
    pub fn error(&self) -> LogReal {
        self.offset.abs().scale(self.rel_error)
    }

    pub fn anchor_value(&self, seq: &HookSequences) -> LogReal {
        match self.anchor {
            Anchor::A => seq.a[self.level],
            Anchor::B => seq.b[self.level],
        }
    }

    /// The absolute position, when it is a double.
    pub fn to_complex(&self, seq: &HookSequences) -> Option<Complex64> {
        let a = self.anchor_value(seq).to_f64()?;
        Some(Complex64::new(a, 0.0) + self.offset.to_complex())
    }

    /// |self − (anchor at the same level)|.
    pub fn distance_to_anchor(&self) -> LogReal {
        self.offset.abs()
    }

    /// F_{T₀}⁻¹ of the point.
    pub fn pullback(&self, seq: &HookSequences) -> Result<HookPoint> {
        if self.level == 0 {
            return Err(Error::Domain("level-0 points have no anchored pullback".into()));
        }
        let c = c0();
        let xa = self.anchor_value(seq).scale(c);
        let y = self.offset.mul_complex(Complex64::new(c, 0.0));
        // stretch = |offset'| / (|dΔ/dδ|·|offset|), 1 in the first-order branches
        let (offset, stretch) = match (xa.to_f64().filter(|x| *x < 1e300), y.is_representable() && !y.is_zero()) {
            (Some(x), true) => {
                let yc = y.to_complex();
                let u = Complex64::new(x, 0.0) + yc;
                let d = asinh_diff(x, yc);
                let gain = c / sq1(u).norm();
                (ScaledComplex::from_complex(d), d.norm() / (gain * self.offset.to_complex().norm()))
            }
            (Some(x), false) => (self.offset.mul_real(LogReal::from_f64(c / (1.0 + x * x).sqrt())), 1.0),
            // X beyond doubles: asinh(X + Y) − asinh(X) = Y/X (1 + O(Y/X))
            (None, _) => (self.offset.mul_real(LogReal::from_f64(c).div(xa)), 1.0),
        };
        let rel_error = self.rel_error / stretch + 4.0 * f64::EPSILON;
        Ok(HookPoint { level: self.level - 1, anchor: self.anchor, offset, rel_error })
    }

    /// Pull back to level 0.
    pub fn pullback_all(&self, seq: &HookSequences) -> Result<HookPoint> {
        let mut p = *self;
        while p.level > 0 {
            p = p.pullback(seq)?;
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::halfstrip::{f0_inverse, hook_sequences};

    #[test]
    fn pullback_matches_direct_inverse() {
        let seq = hook_sequences(6.0, 4).unwrap();
        let off = Complex64::new(0.7, 3.6);
        let p = HookPoint { level: 1, anchor: Anchor::A, offset: ScaledComplex::from_complex(off), rel_error: 1e-10 };
        let q = p.pullback(&seq).unwrap();
        let direct = f0_inverse(Complex64::new(seq.a[1].value(), 0.0) + off);
        assert!((q.to_complex(&seq).unwrap() - direct).norm() < 1e-13);
        assert_eq!(q.level, 0);
        // level 2: difference to the double computation is below its rounding
        let p2 = HookPoint { level: 2, ..p };
        let q2 = p2.pullback_all(&seq).unwrap();
        let d2 = f0_inverse(f0_inverse(Complex64::new(seq.a[2].value(), 0.0) + off));
        assert!((q2.to_complex(&seq).unwrap() - d2).norm() < 1e-12);
        assert!(q2.error().value() < 1e-10);
    }

    #[test]
    fn huge_levels_stay_finite() {
        let seq = hook_sequences(6.0, 4).unwrap();
        let p = HookPoint {
            level: 3,
            anchor: Anchor::B,
            offset: ScaledComplex::from_complex(Complex64::new(-1.0, 3.7)),
            rel_error: 1e-4,
        };
        let q = p.pullback_all(&seq).unwrap();
        assert_eq!(q.level, 0);
        assert!(q.distance_to_anchor().ln < -1e5);
        assert!(q.rel_error < 2e-4);
    }
}
