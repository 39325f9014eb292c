//! Models in logarithmic coordinates: tracts, the conformal maps of each tract
//! onto a half-plane, their inverse branches, and 2πi-periodic translates.

pub mod address;
pub mod anchored;
pub mod config;
pub mod trace;

pub use address::{ExternalAddress, TractRef};
pub use config::ModelSpec;

use crate::conformal::halfstrip::{f0, f0_inverse, halfstrip_map, hook_levels, hook_sequences, HalfStrip, HalfStripMap, HookSequences, T0};
use crate::conformal::hooked::{hooked_tract_map, HookedMap, StripPoint};
use crate::conformal::vdomain::{hook_normalized_intervals, map_v_to_halfplane, v_profile, VMap, DEFAULT_HARMONIC_CONSTANT};
use crate::conformal::NumericMap;
use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

pub const TWO_PI: f64 = 2.0 * PI;

/// One base tract and its map onto the target half-plane.
#[derive(Clone, Debug)]
pub enum BaseTract {
    /// {Re e^w > threshold, |Im w| < π/2}, F = e^w + ln a.
    Exp { ln_a: f64, threshold: f64 },
    /// T₀ with F₀ = 5 sinh(z − 4)/sinh 1.
    Sinh,
    /// Tₙ = φₙ(V), Fₙ = 5ψ∘φₙ⁻¹.
    Hooked(Box<HookedMap>),
    /// Sₙ with the half-strip map Gₙ.
    Strip { n: usize, map: HalfStripMap },
}

/// One sampled invariant check made while building a model.
#[derive(Clone, Debug, Serialize)]
pub struct BuildCheck {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct BuildReport {
    pub model: String,
    pub tracts: Vec<String>,
    pub checks: Vec<BuildCheck>,
}

impl BuildReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// A disjoint-type model F on the 2πi-periodic union of tract translates.
#[derive(Clone, Debug)]
pub struct LogModel {
    pub spec: ModelSpec,
    /// Target half-plane H_Q = {Re > Q}.
    pub q: f64,
    /// Inverse branches contract by at least 2 on H_c and map it into itself.
    pub contraction_abscissa: f64,
    /// Real base point of all pullbacks.
    pub base_point: f64,
    names: Vec<String>,
    tracts: Vec<BaseTract>,
    v: Option<VMap>,
    seq: Option<HookSequences>,
    pub report: BuildReport,
}

fn check(name: &str, value: f64, tolerance: f64, passed: bool, note: impl Into<String>) -> BuildCheck {
    BuildCheck { name: name.into(), value, tolerance, passed, note: note.into() }
}

/// Build and validate a model.
pub fn build_model(spec: &ModelSpec) -> Result<LogModel> {
    let mut model = match *spec {
        ModelSpec::Exp { a, l } => build_exp(a, l)?,
        ModelSpec::Hook { n_max, eps, a } => build_hook(spec, n_max, eps, a, false)?,
        ModelSpec::HookStrips { n_max, eps } => build_hook(spec, n_max, eps, 6.0, true)?,
    };
    model.validate()?;
    Ok(model)
}

fn build_exp(a: f64, l: f64) -> Result<LogModel> {
    if !(a > 0.0 && l > 0.0 && a.is_finite() && l.is_finite()) {
        return Err(Error::InvalidSpec(format!("a = {a}, L = {l} must be positive")));
    }
    if !(l / a > 1.0) {
        return Err(Error::InvalidSpec(format!("L/a = {} must exceed 1", l / a)));
    }
    let threshold = (l / a).ln();
    let q = l.ln();
    // the tract's leftmost point is ln(threshold)
    if !(threshold.ln() > q) {
        return Err(Error::DisjointTypeViolation(format!(
            "tract closure reaches Re = {} ≤ Q = {q}",
            threshold.ln()
        )));
    }
    Ok(LogModel {
        spec: ModelSpec::Exp { a, l },
        q,
        contraction_abscissa: 2.0 + a.ln(),
        base_point: q + 1.0,
        names: vec!["0".into()],
        tracts: vec![BaseTract::Exp { ln_a: a.ln(), threshold }],
        v: None,
        seq: None,
        report: BuildReport { model: "exp".into(), tracts: vec!["0".into()], checks: vec![] },
    })
}

fn build_hook(spec: &ModelSpec, n_max: usize, eps: f64, a: f64, strips: bool) -> Result<LogModel> {
    if n_max == 0 || n_max > 3 {
        return Err(Error::InvalidSpec(format!("n_max = {n_max} must lie in 1..=3")));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidSpec("eps must be positive".into()));
    }
    let seq = hook_sequences(a, n_max + 8)?;
    let delta = 1.0 / (2.0 * DEFAULT_HARMONIC_CONSTANT + 3.0);
    let profile = v_profile(delta, &hook_normalized_intervals(&seq))?;
    let v = map_v_to_halfplane(&profile, eps)?;
    let mut names = vec!["T0".to_string()];
    let mut tracts = vec![BaseTract::Sinh];
    for n in 1..=n_max {
        tracts.push(BaseTract::Hooked(Box::new(hooked_tract_map(n, &seq, eps)?)));
        names.push(format!("T{n}"));
    }
    let mut notes = Vec::new();
    if strips {
        for n in 1..=n_max {
            match strip_map(n, &seq) {
                Ok(map) => {
                    tracts.push(BaseTract::Strip { n, map });
                    names.push(format!("S{n}"));
                }
                Err(e) => notes.push(format!("S{n} omitted: {e}")),
            }
        }
    }
    let mut report = BuildReport { model: spec.name().into(), tracts: names.clone(), checks: vec![] };
    for n in notes {
        report.checks.push(check("strip_representable", 0.0, 0.0, true, n));
    }
    Ok(LogModel {
        spec: spec.clone(),
        q: 0.0,
        contraction_abscissa: 4.0,
        base_point: 5.0,
        names,
        tracts,
        v: Some(v),
        seq: Some(seq),
        report,
    })
}

/// Sₙ = {x > aₙ + 1, Y₂ < y < Y₁} and Gₙ with Gₙ(pₙ) = pₙ₊₁, where pₙ sits
/// on the axis of Sₙ one unit right of its end.
fn strip_map(n: usize, seq: &HookSequences) -> Result<HalfStripMap> {
    let p = |k: usize| -> Result<Complex64> {
        let a = seq.a[k].to_f64().ok_or_else(|| Error::NotRepresentable(format!("a_{k}")))?;
        let [_, y1, y2, _] = hook_levels(k);
        Ok(Complex64::new(a + 2.0, 0.5 * (y1 + y2)))
    };
    let a = seq.a[n].to_f64().ok_or_else(|| Error::NotRepresentable(format!("a_{n}")))?;
    let [_, y1, y2, _] = hook_levels(n);
    let strip = HalfStrip { x0: a + 1.0, center: 0.5 * (y1 + y2), half_width: 0.5 * (y1 - y2) };
    halfstrip_map(strip, p(n)?, p(n + 1)?)
}

impl LogModel {
    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn tract_count(&self) -> usize {
        self.tracts.len()
    }

    pub fn tract(&self, i: usize) -> Option<&BaseTract> {
        self.tracts.get(i)
    }

    pub fn vmap(&self) -> Option<&VMap> {
        self.v.as_ref()
    }

    pub fn sequences(&self) -> Option<&HookSequences> {
        self.seq.as_ref()
    }

    /// φₙ of the hooked tract Tₙ.
    pub fn hooked(&self, n: usize) -> Option<&HookedMap> {
        self.tracts.iter().find_map(|t| match t {
            BaseTract::Hooked(m) if m.n() == n => Some(m.as_ref()),
            _ => None,
        })
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn parse_address(&self, text: &str) -> Result<ExternalAddress> {
        ExternalAddress::parse(text, &self.names)
    }

    /// Boundary accuracy of the maps behind base tract i.
    pub fn accuracy(&self, i: usize) -> f64 {
        match &self.tracts[i] {
            BaseTract::Hooked(m) => m.report.hausdorff.max(self.v.as_ref().map_or(0.0, |v| v.boundary_accuracy())),
            _ => 0.0,
        }
    }

    fn base_tract(&self, t: TractRef) -> Result<&BaseTract> {
        self.tracts
            .get(t.base)
            .ok_or_else(|| Error::Domain(format!("base tract {} does not exist", t.base)))
    }

    /// The tract translate containing z.
    pub fn locate(&self, z: Complex64) -> Result<TractRef> {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NotInDomain(format!("{z} is not finite")));
        }
        // translate to the fundamental band −π/2 ≤ Im < 3π/2
        let m = ((z.im + FRAC_PI_2) / TWO_PI).floor() as i64;
        let z0 = z - Complex64::new(0.0, TWO_PI * m as f64);
        for (i, t) in self.tracts.iter().enumerate() {
            let hit = match t {
                BaseTract::Exp { threshold, .. } => {
                    let m = (z.im / TWO_PI).round() as i64;
                    let y = z.im - TWO_PI * m as f64;
                    if y.abs() < FRAC_PI_2 && z.re.exp() * y.cos() > *threshold {
                        return Ok(TractRef::new(i, m));
                    }
                    false
                }
                BaseTract::Sinh => T0.contains(z0),
                BaseTract::Hooked(map) => {
                    let [_, _, y2, y3] = map.geometry.levels;
                    z0.im > y3 && z0.im < y2 && self.hooked_strip_point(map, z0).is_ok()
                }
                BaseTract::Strip { map, .. } => map.strip.contains(z0),
            };
            if hit {
                return Ok(TractRef::new(i, m));
            }
        }
        Err(Error::NotInDomain(format!("{z} lies in no tract")))
    }

    /// φₙ⁻¹(z) for z in Tₙ (fundamental translate).
    fn hooked_strip_point(&self, map: &HookedMap, z: Complex64) -> Result<Complex64> {
        let v = self.v.as_ref().expect("hook model has V");
        let local = map
            .from_absolute(z)
            .ok_or_else(|| Error::NotRepresentable(format!("frame of T{} is beyond double range", map.n())))?;
        let s = match map.invert(local)? {
            StripPoint::Global(s) => s,
            StripPoint::UTurn(_) => return Err(Error::NotInDomain(format!("{z} is outside T{}", map.n()))),
        };
        if let Some(xm) = v.x_max {
            if s.re >= xm {
                return Err(Error::NotInDomain(format!("{z} lies beyond the resolved part of T{}", map.n())));
            }
        }
        if !v.profile.contains(s) {
            return Err(Error::NotInDomain(format!("{z} is outside T{}", map.n())));
        }
        Ok(s)
    }

    /// F on the given tract translate.
    pub fn forward_in(&self, t: TractRef, z: Complex64) -> Result<Complex64> {
        let shift = Complex64::new(0.0, TWO_PI * t.offset as f64);
        let z0 = z - shift;
        match self.base_tract(t)? {
            BaseTract::Exp { ln_a, threshold } => {
                if !(z0.im.abs() < FRAC_PI_2 && z0.re.exp() * z0.im.cos() > *threshold) {
                    return Err(Error::NotInDomain(format!("{z} is outside the tract")));
                }
                Ok(z0.exp() + ln_a)
            }
            BaseTract::Sinh => {
                if !T0.contains(z0) {
                    return Err(Error::NotInDomain(format!("{z} is outside T0")));
                }
                Ok(f0(z0))
            }
            BaseTract::Hooked(map) => {
                let s = self.hooked_strip_point(map, z0)?;
                let l = self.v.as_ref().unwrap().lambda(s)?;
                if l.re > crate::scaled::LN_MAX {
                    return Err(Error::NotRepresentable(format!("F({z}) = 5e^{}", l.re)));
                }
                Ok(5.0 * l.exp())
            }
            BaseTract::Strip { map, .. } => map.forward(z0),
        }
    }

    /// (F(z), tract containing z).
    pub fn forward(&self, z: Complex64) -> Result<(Complex64, TractRef)> {
        let t = self.locate(z)?;
        Ok((self.forward_in(t, z)?, t))
    }

    /// F'(z).
    pub fn derivative(&self, z: Complex64) -> Result<Complex64> {
        let t = self.locate(z)?;
        let z0 = z - Complex64::new(0.0, TWO_PI * t.offset as f64);
        match self.base_tract(t)? {
            BaseTract::Exp { .. } => Ok(z0.exp()),
            BaseTract::Sinh => Ok(5.0 * (z0 - 4.0).cosh() / 1f64.sinh()),
            BaseTract::Hooked(map) => {
                let v = self.v.as_ref().unwrap();
                let s = self.hooked_strip_point(map, z0)?;
                let l = v.lambda(s)?;
                Ok(5.0 * l.exp() * v.lambda_derivative(s)? / map.derivative(StripPoint::Global(s)))
            }
            BaseTract::Strip { map, .. } => Ok(map.eval_derivative(z0)),
        }
    }

    /// F_T⁻¹(ζ) for ζ ∈ H_Q.
    pub fn inverse_branch(&self, t: TractRef, zeta: Complex64) -> Result<Complex64> {
        if !(zeta.re > self.q) || !zeta.im.is_finite() {
            return Err(Error::Domain(format!("{zeta} is not in H_{}", self.q)));
        }
        let shift = Complex64::new(0.0, TWO_PI * t.offset as f64);
        let z = match self.base_tract(t)? {
            BaseTract::Exp { ln_a, .. } => (zeta - ln_a).ln(),
            BaseTract::Sinh => f0_inverse(zeta),
            BaseTract::Hooked(map) => {
                let s = self.v.as_ref().unwrap().inverse(zeta / 5.0)?;
                map.to_absolute(map.eval(StripPoint::Global(s)))
                    .ok_or_else(|| Error::NotRepresentable(format!("T{} lies beyond double range", map.n())))?
            }
            BaseTract::Strip { map, .. } => map.eval_inverse(zeta),
        };
        Ok(z + shift)
    }

    /// Leftmost real part of the closure of base tract i.
    pub fn tract_left_edge(&self, i: usize) -> f64 {
        match &self.tracts[i] {
            BaseTract::Exp { threshold, .. } => threshold.ln(),
            BaseTract::Sinh => 4.0,
            BaseTract::Hooked(map) => map.geometry.a.to_f64().unwrap_or(f64::INFINITY),
            BaseTract::Strip { map, .. } => map.strip.x0,
        }
    }

    /// Diameter of {z ∈ T̄ : Re z ≤ α} for base tract i. Hooked tracts are
    /// measured through their hooked regions T̂ₙ ⊃ Tₙ, so the value is an
    /// upper bound there.
    pub fn slice_diameter(&self, i: usize, alpha: f64) -> f64 {
        let x0 = self.tract_left_edge(i);
        if alpha < x0 {
            return 0.0;
        }
        match &self.tracts[i] {
            BaseTract::Exp { threshold, .. } => {
                // boundary x = ln(threshold / cos y); the slice is convex
                let ymax = if alpha.exp() > *threshold { (threshold / alpha.exp()).acos() } else { 0.0 };
                let n = 400;
                let pts: Vec<Complex64> = (0..=n)
                    .map(|k| {
                        let y = -ymax + 2.0 * ymax * k as f64 / n as f64;
                        Complex64::new((threshold / y.cos()).ln(), y)
                    })
                    .collect();
                let mut d: f64 = 0.0;
                for p in &pts {
                    for q in &pts {
                        d = d.max((p - q).norm());
                    }
                }
                d
            }
            BaseTract::Sinh => (alpha - 4.0).hypot(PI),
            BaseTract::Hooked(map) => {
                let [y0, _, _, y3] = map.geometry.levels;
                (alpha - x0).hypot(y0 - y3)
            }
            BaseTract::Strip { map, .. } => (alpha - x0).hypot(2.0 * map.strip.half_width),
        }
    }

    /// Sampled model invariants, recorded in the build report.
    fn validate(&mut self) -> Result<()> {
        let mut checks = Vec::new();
        // disjoint type: every closure in H_Q
        let min_left = (0..self.tracts.len()).map(|i| self.tract_left_edge(i)).fold(f64::INFINITY, f64::min);
        if !(min_left > self.q) {
            return Err(Error::DisjointTypeViolation(format!("a tract closure reaches Re = {min_left} ≤ Q = {}", self.q)));
        }
        checks.push(check("disjoint_type", min_left, self.q, true, "min Re over tract closures exceeds Q"));
        checks.push(check(
            "base_point_contracting",
            self.base_point,
            self.contraction_abscissa,
            self.base_point >= self.contraction_abscissa,
            "base point lies in the half-plane where inverse branches contract by 2",
        ));

        // forward ∘ inverse = id and translates land where expected
        let samples: Vec<Complex64> = [0.5, 1.0, 3.0, 10.0, 100.0]
            .iter()
            .flat_map(|&x| [-30.0, -2.0, 0.0, 1.5, 25.0].map(|y| Complex64::new(self.q + x, y)))
            .collect();
        let mut worst: f64 = 0.0;
        let mut tol: f64 = 0.0;
        let mut misplaced = 0;
        let mut skipped = Vec::new();
        for i in 0..self.tracts.len() {
            let eps = self.accuracy(i).max(1e-12);
            if let BaseTract::Hooked(map) = &self.tracts[i] {
                // absolute doubles cannot resolve the tip of Tₙ once bₙ ≳ 10¹²
                if map.geometry.b.to_f64().is_none_or(|b| b > 1e12) {
                    skipped.push(self.names[i].clone());
                    continue;
                }
            }
            for off in [0i64, 3] {
                let t = TractRef::new(i, off);
                for &zeta in &samples {
                    let z = self.inverse_branch(t, zeta)?;
                    match self.forward(z) {
                        Ok((back, found)) => {
                            if found != t {
                                misplaced += 1;
                            }
                            let scale = zeta.norm().max(1.0);
                            worst = worst.max((back - zeta).norm() / scale);
                            tol = tol.max(10.0 * eps);
                        }
                        Err(_) => misplaced += 1,
                    }
                }
            }
        }
        if tol == 0.0 {
            tol = 1e-11;
        }
        let note = if skipped.is_empty() { String::new() } else { format!("skipped {}", skipped.join(", ")) };
        checks.push(check("round_trip", worst, tol, worst <= tol, note));
        checks.push(check(
            "tracts_disjoint",
            misplaced as f64,
            0.0,
            misplaced == 0,
            "inverse images are located in their own translate only",
        ));
        self.report.checks.extend(checks);
        if let Some(c) = self.report.checks.iter().find(|c| !c.passed) {
            return Err(Error::AccuracyInsufficient(format!("{}: {:e} > {:e}", c.name, c.value, c.tolerance)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_examples() {
        let m = build_model(&ModelSpec::exp_default()).unwrap();
        let (z, t) = m.forward(Complex64::new(2f64.ln(), 0.0)).unwrap();
        assert!((z.re - (2.0 - 4f64.ln())).abs() < 1e-14);
        assert_eq!(t, TractRef::new(0, 0));
        let w = m.inverse_branch(TractRef::new(0, 0), Complex64::new(10.0, 0.0)).unwrap();
        assert!((w.re - 11.386294361119891f64.ln()).abs() < 1e-14);
        assert!(m.forward(Complex64::new(0.2, 0.0)).is_err());
        assert!(m.locate(Complex64::new(0.76761, 0.0)).is_ok());
        let w1 = m.inverse_branch(TractRef::new(0, 2), Complex64::new(3.0, 1.0)).unwrap();
        let w0 = m.inverse_branch(TractRef::new(0, 0), Complex64::new(3.0, 1.0)).unwrap();
        assert!((w1 - w0 - Complex64::new(0.0, 4.0 * PI)).norm() < 1e-14);
        assert!(m.report.passed());
    }

    #[test]
    fn exp_spec_errors() {
        assert!(matches!(build_model(&ModelSpec::Exp { a: 0.5, l: 1.0 }), Err(Error::DisjointTypeViolation(_))));
        assert!(matches!(build_model(&ModelSpec::Exp { a: -1.0, l: 1.0 }), Err(Error::InvalidSpec(_))));
    }
}
