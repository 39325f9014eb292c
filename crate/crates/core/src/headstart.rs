//! Head-start comparison functions φ and their verification along forward
//! orbits, with ρ = Re.

use crate::conformal::halfstrip::{hook_sequences, HookSequences};
use crate::error::{Error, Result};
use crate::tractmodel::trace::hair_orbit;
use crate::tractmodel::{ExternalAddress, LogModel};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// φ(x) = y_{n_x} with n_x = max{n : x ≥ αₙ}; past the last α the optional
/// linear part a·x + b takes over when it is larger.
#[derive(Clone, Debug, Serialize)]
pub struct PhiStep {
    pub alphas: Vec<f64>,
    /// May hold +∞ for values beyond the double range.
    pub ys: Vec<f64>,
    pub linear: Option<(f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PhiVariant {
    /// αₙ = aₙ/2, yₙ = 100aₙ₊₁.
    Hook,
    /// αₙ = aₙ/n³ (n ≥ 1), α₀ = a₀/2, yₙ = 100aₙ₊₁.
    Strips,
}

/// log-spaced probe points on [lo, hi].
fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..n).map(|k| (l0 + (l1 - l0) * k as f64 / (n - 1) as f64).exp()).collect()
}

impl PhiStep {
    /// φ(x) = a·x + b.
    pub fn linear(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![], vec![], Some((a, b)))
    }

    pub fn step(alphas: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        Self::new(alphas, ys, None)
    }

    /// Validates monotonicity and φ(x) > x on the probe grid.
    pub fn new(alphas: Vec<f64>, ys: Vec<f64>, linear: Option<(f64, f64)>) -> Result<Self> {
        if alphas.len() != ys.len() {
            return Err(Error::InvalidSpec(format!("{} thresholds but {} values", alphas.len(), ys.len())));
        }
        if alphas.is_empty() && linear.is_none() {
            return Err(Error::InvalidSpec("φ needs steps or a linear part".into()));
        }
        if alphas.iter().any(|a| !(a.is_finite() && *a > 0.0)) || alphas.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSpec("thresholds αₙ must be positive, finite and increasing".into()));
        }
        if ys.iter().any(|y| !(*y > 0.0)) || ys.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::InvalidSpec("values yₙ must be positive and nondecreasing".into()));
        }
        if let Some((a, b)) = linear {
            if !(a.is_finite() && b.is_finite() && a >= 1.0) {
                return Err(Error::InvalidSpec(format!("linear part {a}·x + {b} must have slope ≥ 1")));
            }
        }
        let phi = PhiStep { alphas, ys, linear };
        let grid = phi.probe_grid();
        let mut prev = f64::NEG_INFINITY;
        for &x in &grid {
            let y = phi.eval(x)?;
            if !(y > x) {
                return Err(Error::InvalidSpec(format!("φ({x}) = {y} does not exceed {x}")));
            }
            if y < prev {
                return Err(Error::InvalidSpec(format!("φ decreases at {x}")));
            }
            prev = y;
        }
        Ok(phi)
    }

    /// Thresholds, the points just below them, and a log grid beyond.
    pub fn probe_grid(&self) -> Vec<f64> {
        let mut g = Vec::new();
        let (lo, hi) = match (self.alphas.first(), self.alphas.last()) {
            (Some(&a), Some(&b)) => (a, b * 1e3),
            _ => (1e-3, 1e9),
        };
        for &a in &self.alphas {
            g.push(a);
            let below = a * (1.0 - 1e-12);
            if below >= lo {
                g.push(below);
            }
        }
        g.extend(log_grid(lo, hi, 2000));
        g.sort_by(f64::total_cmp);
        g.dedup();
        g
    }

    /// φ(x). Step functions are undefined below α₀.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::Domain("φ(NaN)".into()));
        }
        let lin = self.linear.map(|(a, b)| a * x + b);
        if self.alphas.is_empty() {
            return Ok(lin.unwrap());
        }
        if x < self.alphas[0] {
            return Err(Error::Domain(format!("x = {x} lies below α₀ = {}", self.alphas[0])));
        }
        let n = self.alphas.partition_point(|&a| a <= x) - 1;
        let y = self.ys[n];
        Ok(match lin {
            Some(l) if n + 1 == self.alphas.len() => y.max(l),
            _ => y,
        })
    }

    /// x lies within relative distance `tol` of a jump.
    pub fn near_jump(&self, x: f64, tol: f64) -> bool {
        self.alphas.iter().any(|a| (x - a).abs() <= tol * a)
    }
}

pub fn phi_eval(phi: &PhiStep, x: f64) -> Result<f64> {
    phi.eval(x)
}

/// φ from the hook orbit aₙ (a₀ = 6) for n ≤ n_max. Values beyond the
/// double range are +∞, and the steps stop at the first such threshold.
pub fn hook_phi(variant: PhiVariant, n_max: usize) -> Result<PhiStep> {
    hook_phi_from(variant, &hook_sequences(6.0, n_max + 1)?, n_max)
}

pub fn hook_phi_from(variant: PhiVariant, seq: &HookSequences, n_max: usize) -> Result<PhiStep> {
    if seq.a.len() < n_max + 2 {
        return Err(Error::Precondition(format!("need a₀ … a_{}", n_max + 1)));
    }
    let val = |n: usize| seq.a[n].to_f64().unwrap_or(f64::INFINITY);
    let mut alphas = Vec::new();
    let mut ys = Vec::new();
    for n in 0..=n_max {
        let alpha = match (variant, n) {
            (PhiVariant::Strips, n) if n >= 1 => val(n) / (n as f64).powi(3),
            _ => val(n) / 2.0,
        };
        if !alpha.is_finite() {
            break;
        }
        alphas.push(alpha);
        ys.push(100.0 * val(n + 1));
    }
    PhiStep::step(alphas, ys)
}

/// Outcome of checking "ρ(w) > φ(ρ(z)) ⇒ ρ(F(w)) > φ(ρ(F(z)))" along an orbit pair.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ForwardVerdict {
    Pass { steps: usize },
    Violation { step: usize, rho_z: f64, rho_w: f64, phi_z: f64 },
    /// ρ(z) sits on a jump of φ within rounding: the implication is not decided.
    Ambiguous { step: usize, rho_z: f64 },
    /// The orbits left the common tracts or overflowed before `depth`.
    Stopped { step: usize, reason: String },
}

/// Orbit pairs as sequences of real parts: condition (i) in one ordering,
/// starting the check at index 0. +∞ stands for overflowed iterates.
fn condition_i(rz: &[f64], rw: &[f64], phi: &PhiStep) -> ForwardVerdict {
    let n = rz.len().min(rw.len());
    for k in 0..n.saturating_sub(1) {
        let (z0, w0, z1, w1) = (rz[k], rw[k], rz[k + 1], rw[k + 1]);
        if z0.is_infinite() {
            return ForwardVerdict::Stopped { step: k, reason: "orbit of z overflowed".into() };
        }
        if phi.near_jump(z0, 1e-12) {
            return ForwardVerdict::Ambiguous { step: k, rho_z: z0 };
        }
        let Ok(pz0) = phi.eval(z0) else { continue };
        if !(w0 > pz0) {
            continue;
        }
        if z1.is_infinite() {
            return ForwardVerdict::Stopped { step: k + 1, reason: "orbit of z overflowed".into() };
        }
        if phi.near_jump(z1, 1e-12) {
            return ForwardVerdict::Ambiguous { step: k + 1, rho_z: z1 };
        }
        let pz1 = match phi.eval(z1) {
            Ok(v) => v,
            Err(_) => continue,
        };
        if w1.is_infinite() && pz1.is_infinite() {
            return ForwardVerdict::Stopped { step: k + 1, reason: "both sides beyond the double range".into() };
        }
        if !(w1 > pz1) {
            return ForwardVerdict::Violation { step: k + 1, rho_z: z1, rho_w: w1, phi_z: pz1 };
        }
    }
    ForwardVerdict::Pass { steps: n.saturating_sub(1) }
}

fn forward_orbit(model: &LogModel, z: Complex64, depth: usize) -> (Vec<Complex64>, Vec<crate::tractmodel::TractRef>, Option<String>) {
    let mut orbit = vec![z];
    let mut tracts = Vec::new();
    let mut w = z;
    for _ in 0..depth {
        match model.forward(w) {
            Ok((next, t)) if next.re.is_finite() => {
                tracts.push(t);
                orbit.push(next);
                w = next;
            }
            Ok((_, t)) => {
                tracts.push(t);
                orbit.push(Complex64::new(f64::INFINITY, 0.0));
                return (orbit, tracts, None);
            }
            Err(Error::NotRepresentable(_)) => {
                orbit.push(Complex64::new(f64::INFINITY, 0.0));
                return (orbit, tracts, None);
            }
            Err(e) => return (orbit, tracts, Some(e.to_string())),
        }
    }
    (orbit, tracts, None)
}

/// Check condition (i) for z, w along `depth` forward steps.
pub fn check_forward_condition(model: &LogModel, z: Complex64, w: Complex64, phi: &PhiStep, depth: usize) -> ForwardVerdict {
    let (oz, tz, ez) = forward_orbit(model, z, depth);
    let (ow, tw, ew) = forward_orbit(model, w, depth);
    let common = tz.iter().zip(&tw).take_while(|(a, b)| a == b).count();
    let mut len = oz.len().min(ow.len()).min(common + 1);
    let mut stop = None;
    if common < tz.len().min(tw.len()) {
        stop = Some((common, "z and w lie in different tracts".to_string()));
    } else if let Some(e) = ez.or(ew) {
        stop = Some((len - 1, e));
    }
    if len > depth + 1 {
        len = depth + 1;
    }
    let rz: Vec<f64> = oz[..len].iter().map(|p| p.re).collect();
    let rw: Vec<f64> = ow[..len].iter().map(|p| p.re).collect();
    match condition_i(&rz, &rw, phi) {
        ForwardVerdict::Pass { steps } => match stop {
            Some((step, reason)) if steps < depth => ForwardVerdict::Stopped { step, reason },
            _ => ForwardVerdict::Pass { steps },
        },
        v => v,
    }
}

/// Which orbit is ahead first, from real parts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ahead {
    Z,
    W,
}

fn ahead_at(z: f64, w: f64, phi: &PhiStep) -> Option<Ahead> {
    let beats = |x: f64, y: f64| -> bool {
        if x.is_infinite() {
            return y.is_finite();
        }
        phi.eval(y).map(|p| x > p).unwrap_or(false)
    };
    if beats(w, z) {
        Some(Ahead::W)
    } else if beats(z, w) {
        Some(Ahead::Z)
    } else {
        None
    }
}

fn separation_in(rz: &[f64], rw: &[f64], phi: &PhiStep) -> Option<(usize, Ahead)> {
    rz.iter()
        .zip(rw)
        .take_while(|(a, b)| !(a.is_infinite() && b.is_infinite()))
        .enumerate()
        .find_map(|(n, (&a, &b))| ahead_at(a, b, phi).map(|h| (n, h)))
}

/// Least n ≤ max_n with Re Fⁿ(w) > φ(Re Fⁿ(z)) or the symmetric relation.
/// None means not found within max_n: inconclusive, not a refutation.
pub fn separation_time(model: &LogModel, z: Complex64, w: Complex64, phi: &PhiStep, max_n: usize) -> Option<(usize, Ahead)> {
    if z == w {
        return None;
    }
    let (oz, _, _) = forward_orbit(model, z, max_n);
    let (ow, _, _) = forward_orbit(model, w, max_n);
    let rz: Vec<f64> = oz.iter().map(|p| p.re).collect();
    let rw: Vec<f64> = ow.iter().map(|p| p.re).collect();
    separation_in(&rz, &rw, phi)
}

/// Draws addresses for the sampled verification.
#[derive(Clone, Debug)]
pub struct AddressSampler {
    /// Base tracts allowed in the random prefix.
    pub letters: Vec<usize>,
    pub max_prefix: usize,
    pub max_offset: i64,
    /// The periodic tail; a constant real tail keeps the hair tail on ℝ.
    pub cycle: Vec<crate::tractmodel::TractRef>,
    /// Potentials at the first periodic level are drawn from this range.
    pub potentials: (f64, f64),
    /// Smallest gap between the two potentials of a pair.
    pub min_gap: f64,
}

impl AddressSampler {
    pub fn exp_default() -> Self {
        AddressSampler {
            letters: vec![0],
            max_prefix: 6,
            max_offset: 3,
            cycle: vec![crate::tractmodel::TractRef::new(0, 0)],
            potentials: (1.0, 4.0),
            min_gap: 0.1,
        }
    }

    pub fn hook_default() -> Self {
        AddressSampler {
            letters: vec![0, 1],
            max_prefix: 4,
            max_offset: 1,
            cycle: vec![crate::tractmodel::TractRef::new(0, 0)],
            potentials: (5.5, 9.0),
            min_gap: 0.1,
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> (ExternalAddress, f64, f64) {
        let len = rng.random_range(0..=self.max_prefix);
        let prefix = (0..len)
            .map(|_| {
                let b = self.letters[rng.random_range(0..self.letters.len())];
                crate::tractmodel::TractRef::new(b, rng.random_range(-self.max_offset..=self.max_offset))
            })
            .collect();
        let (lo, hi) = self.potentials;
        let t1 = rng.random_range(lo..hi - self.min_gap);
        let t2 = rng.random_range(t1 + self.min_gap..hi);
        (ExternalAddress { prefix, cycle: self.cycle.clone() }, t1, t2)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PairViolation {
    pub address: String,
    pub potentials: (f64, f64),
    pub verdict: ForwardVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct HeadStartReport {
    pub pairs: usize,
    pub depth: usize,
    pub violations: Vec<PairViolation>,
    /// Pairs with no separation within `depth`.
    pub inconclusive: usize,
    /// Pairs where both orderings were witnessed.
    pub both_directions: usize,
    /// Pairs where the larger potential came out ahead.
    pub ordered_by_potential: usize,
    /// Pairs skipped because a pullback failed.
    pub skipped: usize,
    pub max_separation: usize,
}

/// Same-address pairs (potentials t₁ < t₂ on one hair), both orderings of
/// condition (i) and the separation time, over `pairs` samples.
pub fn verify_uniform_sampled(
    model: &LogModel,
    phi: &PhiStep,
    sampler: &AddressSampler,
    pairs: usize,
    depth: usize,
    seed: u64,
) -> Result<HeadStartReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<_> = (0..pairs).map(|_| sampler.draw(&mut rng)).collect();
    let names = model.names();
    let results: Vec<Option<(Vec<PairViolation>, Option<(usize, Ahead)>, bool)>> = draws
        .par_iter()
        .map(|(addr, t1, t2)| {
            let len = depth + 1;
            let (Ok(oz), Ok(ow)) = (hair_orbit(model, addr, *t1, len), hair_orbit(model, addr, *t2, len)) else {
                return None;
            };
            let rz: Vec<f64> = oz.iter().map(|p| p.re).collect();
            let rw: Vec<f64> = ow.iter().map(|p| p.re).collect();
            let mut v = Vec::new();
            for verdict in [condition_i(&rz, &rw, phi), condition_i(&rw, &rz, phi)] {
                if matches!(verdict, ForwardVerdict::Violation { .. }) {
                    v.push(PairViolation { address: addr.display(names), potentials: (*t1, *t2), verdict });
                }
            }
            let sep = separation_in(&rz, &rw, phi);
            let both = sep.is_some()
                && rz.iter().zip(&rw).any(|(&a, &b)| ahead_at(a, b, phi) == Some(Ahead::Z))
                && rz.iter().zip(&rw).any(|(&a, &b)| ahead_at(a, b, phi) == Some(Ahead::W));
            Some((v, sep, both))
        })
        .collect();
    let mut report = HeadStartReport {
        pairs,
        depth,
        violations: vec![],
        inconclusive: 0,
        both_directions: 0,
        ordered_by_potential: 0,
        skipped: 0,
        max_separation: 0,
    };
    for r in results {
        let Some((v, sep, both)) = r else {
            report.skipped += 1;
            continue;
        };
        report.violations.extend(v);
        match sep {
            None => report.inconclusive += 1,
            Some((n, h)) => {
                report.max_separation = report.max_separation.max(n);
                if h == Ahead::W {
                    report.ordered_by_potential += 1;
                }
            }
        }
        if both {
            report.both_directions += 1;
        }
    }
    Ok(report)
}

/// Sampled F₀(x) ≤ 5·exp(2(x − 5)) for x ≥ 5; returns the worst ratio
/// F₀(x) / bound (≤ 1 when the inequality holds), computed in logs.
pub fn claim1_check(xs: &[f64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &x in xs {
        if !(x >= 5.0) {
            return Err(Error::Precondition(format!("x = {x} is below 5")));
        }
        let u = x - 4.0;
        // ln sinh u = u + ln(1 − e^{−2u}) − ln 2
        let ln_f0 = 5f64.ln() + u + (-(-2.0 * u).exp()).ln_1p() - std::f64::consts::LN_2 - 1f64.sinh().ln();
        let ln_bound = 5f64.ln() + 2.0 * (x - 5.0);
        worst = worst.max((ln_f0 - ln_bound).exp());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tractmodel::{build_model, ModelSpec};

    #[test]
    fn step_boundaries() {
        let phi = PhiStep::step(vec![1.0, 3.0], vec![4.0, 10.0]).unwrap_err();
        assert!(matches!(phi, Error::InvalidSpec(_)), "constant tail must be rejected");
        let phi = PhiStep::step(vec![1.0, 3.0], vec![4.0, f64::INFINITY]).unwrap();
        assert_eq!(phi.eval(1.0).unwrap(), 4.0);
        assert_eq!(phi.eval(2.999).unwrap(), 4.0);
        assert_eq!(phi.eval(3.0).unwrap(), f64::INFINITY);
        assert!(phi.eval(0.5).is_err());
        assert_eq!(PhiStep::linear(2.0, 0.0).unwrap().eval(10.0).unwrap(), 20.0);
        assert!(PhiStep::linear(1.0, 0.0).is_err());
    }

    #[test]
    fn hook_variants() {
        let h = hook_phi(PhiVariant::Hook, 3).unwrap();
        assert_eq!(h.alphas[0], 3.0);
        assert!((h.eval(6.5).unwrap() - 1543.09).abs() < 0.1);
        let s = hook_phi(PhiVariant::Strips, 3).unwrap();
        let seq = hook_sequences(6.0, 2).unwrap();
        assert_eq!(s.alphas[1], seq.a[1].value());
    }

    #[test]
    fn exp_pair_separates_at_one() {
        let m = build_model(&ModelSpec::exp_default()).unwrap();
        let phi = PhiStep::linear(2.0, 0.0).unwrap();
        let (z, w) = (Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0));
        assert_eq!(separation_time(&m, z, w, &phi, 10), Some((1, Ahead::W)));
        assert!(matches!(check_forward_condition(&m, z, w, &phi, 1), ForwardVerdict::Pass { .. }));
        assert_eq!(separation_time(&m, z, z, &phi, 10), None);
    }

    #[test]
    fn claim1_holds_on_grid() {
        let xs: Vec<f64> = (0..1000).map(|k| 5.0 + k as f64 * 0.37).collect();
        assert!(claim1_check(&xs).unwrap() <= 1.0 + 1e-12);
    }
}
