//! Extended-range numbers for quantities far outside the f64 exponent range.
//!
//! The hook model produces sequences like a_3 ~ e^196000 and offsets like
//! e^-196000; both are tracked by their natural logarithm.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

/// Largest natural log whose exponential is still a normal finite double.
pub const LN_MAX: f64 = 709.0;
/// Smallest natural log whose exponential is still a normal double.
pub const LN_MIN: f64 = -708.0;

/// A positive real number stored as its natural logarithm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogReal {
    pub ln: f64,
}

impl LogReal {
    pub fn from_f64(x: f64) -> Self {
        debug_assert!(x > 0.0);
        LogReal { ln: x.ln() }
    }

    pub fn from_ln(ln: f64) -> Self {
        LogReal { ln }
    }

    pub fn one() -> Self {
        LogReal { ln: 0.0 }
    }

    /// The value as a double; overflows to infinity or underflows to zero.
    pub fn value(self) -> f64 {
        self.ln.exp()
    }

    pub fn is_representable(self) -> bool {
        self.ln.is_finite() && self.ln < LN_MAX && self.ln > LN_MIN
    }

    pub fn to_f64(self) -> Option<f64> {
        self.is_representable().then(|| self.value())
    }

    pub fn mul(self, o: LogReal) -> LogReal {
        LogReal { ln: self.ln + o.ln }
    }

    pub fn div(self, o: LogReal) -> LogReal {
        LogReal { ln: self.ln - o.ln }
    }

    pub fn powf(self, p: f64) -> LogReal {
        LogReal { ln: self.ln * p }
    }

    pub fn scale(self, c: f64) -> LogReal {
        debug_assert!(c > 0.0);
        LogReal { ln: self.ln + c.ln() }
    }

    pub fn add(self, o: LogReal) -> LogReal {
        let (hi, lo) = if self.ln >= o.ln { (self.ln, o.ln) } else { (o.ln, self.ln) };
        if lo == f64::NEG_INFINITY {
            return LogReal { ln: hi };
        }
        LogReal { ln: hi + (lo - hi).exp().ln_1p() }
    }

    /// self − o, or None when the difference is not positive.
    pub fn sub(self, o: LogReal) -> Option<LogReal> {
        if self.ln <= o.ln {
            return None;
        }
        let r = o.ln - self.ln;
        Some(LogReal { ln: self.ln + (-(r.exp())).ln_1p() })
    }
}

impl PartialOrd for LogReal {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        self.ln.partial_cmp(&o.ln)
    }
}

/// A complex number m·e^e with an unbounded real exponent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaledComplex {
    pub mantissa: Complex64,
    pub exponent: f64,
}

impl ScaledComplex {
    pub fn zero() -> Self {
        ScaledComplex { mantissa: Complex64::new(0.0, 0.0), exponent: 0.0 }
    }

    pub fn from_complex(z: Complex64) -> Self {
        ScaledComplex { mantissa: z, exponent: 0.0 }.normalized()
    }

    fn normalized(self) -> Self {
        let a = self.mantissa.norm();
        if a == 0.0 || !a.is_finite() {
            return self;
        }
        let s = a.ln();
        ScaledComplex { mantissa: self.mantissa / a, exponent: self.exponent + s }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.norm() == 0.0
    }

    /// Natural log of the modulus.
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.norm().ln() + self.exponent
    }

    pub fn abs(&self) -> LogReal {
        LogReal::from_ln(self.ln_abs())
    }

    /// Value as a complex double; tiny values flush to zero.
    pub fn to_complex(&self) -> Complex64 {
        self.mantissa * self.exponent.exp()
    }

    /// True when the value round-trips through a double without flushing.
    pub fn is_representable(&self) -> bool {
        self.is_zero() || (self.ln_abs() > LN_MIN && self.ln_abs() < LN_MAX)
    }

    pub fn mul_real(self, r: LogReal) -> Self {
        ScaledComplex { mantissa: self.mantissa, exponent: self.exponent + r.ln }.normalized()
    }

    pub fn div_real(self, r: LogReal) -> Self {
        ScaledComplex { mantissa: self.mantissa, exponent: self.exponent - r.ln }.normalized()
    }

    pub fn mul_complex(self, c: Complex64) -> Self {
        ScaledComplex { mantissa: self.mantissa * c, exponent: self.exponent }.normalized()
    }

    pub fn scale(self, c: f64) -> Self {
        self.mul_complex(Complex64::new(c, 0.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logreal_arithmetic() {
        let a = LogReal::from_f64(3.0);
        let b = LogReal::from_f64(5.0);
        assert!((a.add(b).value() - 8.0).abs() < 1e-13);
        assert!((b.sub(a).unwrap().value() - 2.0).abs() < 1e-13);
        assert!(a.sub(b).is_none());
        assert!((a.mul(b).value() - 15.0).abs() < 1e-12);
        let huge = LogReal::from_ln(1e5);
        assert!(!huge.is_representable());
        assert!((huge.add(a).ln - 1e5).abs() < 1e-12);
    }

    #[test]
    fn scaled_complex_keeps_tiny_values() {
        let z = ScaledComplex::from_complex(Complex64::new(0.0, 2.0));
        let t = z.div_real(LogReal::from_ln(5000.0));
        assert_eq!(t.to_complex(), Complex64::new(0.0, 0.0));
        assert!((t.ln_abs() - (2f64.ln() - 5000.0)).abs() < 1e-9);
        assert!((t.mantissa - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(!t.is_representable());
    }
}
