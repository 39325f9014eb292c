//! Order along hairs, bad-pair detection, brush-convergence diagnostics and
//! the fast-escape point of a long arc.

use crate::contraction::{ell, L_eval, M_sum};
use crate::error::{Error, Result};
use crate::hyperbolic::hyp_dist_halfplane;
use crate::tractmodel::anchored::{Anchor, HookPoint};
use crate::tractmodel::trace::{alpha_sequence, trace_hair, Hair};
use crate::tractmodel::{BaseTract, ExternalAddress, LogModel, TractRef};
use crate::conformal::hooked::StripPoint;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;
use std::f64::consts::PI;

/// Arc order of two samples of one traced hair: by potential.
pub fn hair_order(hair: &Hair, i: usize, j: usize) -> Result<Ordering> {
    let n = hair.samples.len();
    if i >= n || j >= n {
        return Err(Error::Precondition(format!("sample index out of range ({i}, {j}) for {n} samples")));
    }
    Ok(hair.samples[i].t.total_cmp(&hair.samples[j].t))
}

/// One probe hair J_{s_k} of the bad-pair search.
#[derive(Clone, Debug, Serialize)]
pub struct BadPairEntry {
    pub k: usize,
    pub address: String,
    /// The point near a (ζ_k) and near b (ω_k), rounded to doubles.
    pub zeta: Complex64,
    pub omega: Complex64,
    /// ln|ζ_k − a|, ln|ω_k − b| (these leave the double range quickly).
    pub ln_dist_zeta: f64,
    pub ln_dist_omega: f64,
    /// Order parameters along J_{s_k}.
    pub param_zeta: f64,
    pub param_omega: f64,
    /// ln of the certified position error (max over ζ_k, ω_k).
    pub ln_position_error: f64,
    /// min(|ζ_k − b| − |ζ_k − a|, |ω_k − a| − |ω_k − b|): how clearly ζ_k
    /// belongs to a and ω_k to b.
    pub margin: f64,
    /// ω_k ≺ ζ_k while a ≺ b.
    pub reversed: bool,
    /// margin ≥ 2 × position error.
    pub unambiguous: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct BadPairWitness {
    pub target: String,
    pub z: Complex64,
    pub w: Complex64,
    pub method: String,
    pub entries: Vec<BadPairEntry>,
    /// Longest run of consecutive k with an unambiguous reversal.
    pub consecutive: usize,
    /// |ζ_k − a| and |ω_k − b| strictly decrease in k.
    pub decreasing: bool,
}

/// Outcome of a bad-pair search.
#[derive(Clone, Debug, Serialize)]
pub struct BadPairSearch {
    pub entries: Vec<BadPairEntry>,
    pub witness: Option<BadPairWitness>,
}

/// The probe addresses T₀…T₀ Tₖ T₀^∞ (k copies of T₀) of the hook model.
pub fn hook_probes(model: &LogModel) -> Vec<ExternalAddress> {
    let t0 = TractRef::new(0, 0);
    (1..model.tract_count())
        .filter_map(|i| match model.tract(i) {
            Some(BaseTract::Hooked(m)) => Some((m.n(), i)),
            _ => None,
        })
        .map(|(k, i)| {
            let mut prefix = vec![t0; k];
            prefix.push(TractRef::new(i, 0));
            ExternalAddress { prefix, cycle: vec![t0] }
        })
        .collect()
}

/// 0^k (0+1) 0^∞ for k = 1..=n.
pub fn exp_probes(n: usize) -> Vec<ExternalAddress> {
    let t0 = TractRef::new(0, 0);
    (1..=n)
        .map(|k| {
            let mut prefix = vec![t0; k];
            prefix.push(t0.shifted(1));
            ExternalAddress { prefix, cycle: vec![t0] }
        })
        .collect()
}

fn longest_run(entries: &[BadPairEntry]) -> usize {
    let mut best = 0;
    let mut run = 0;
    let mut prev_k = None;
    for e in entries {
        if e.reversed && e.unambiguous {
            run = if prev_k.map_or(false, |p| p + 1 == e.k) && run > 0 { run + 1 } else { 1 };
        } else {
            run = 0;
        }
        prev_k = Some(e.k);
        best = best.max(run);
    }
    best
}

/// The hook recipe: s_k = T₀^k Tₖ T₀^∞ with a = a₀, b = b₀ on T₀^∞.
fn hook_recipe_level(model: &LogModel, probe: &ExternalAddress) -> Option<usize> {
    let seq = model.sequences()?;
    let k = probe.prefix.len().checked_sub(1)?;
    let t0 = TractRef::new(0, 0);
    let last = probe.prefix[k];
    let hooked = match model.tract(last.base)? {
        BaseTract::Hooked(m) => m.n(),
        _ => return None,
    };
    let ok = hooked == k
        && k >= 1
        && last.offset == 0
        && probe.prefix[..k].iter().all(|t| *t == t0)
        && probe.cycle == [t0]
        && seq.a.len() > k;
    ok.then_some(k)
}

fn hook_entry(model: &LogModel, probe: &ExternalAddress, k: usize, a: Complex64, b: Complex64) -> Result<BadPairEntry> {
    let seq = model.sequences().unwrap();
    let map = model.hooked(k).unwrap();
    let base = probe.prefix[k].base;
    let err = model.accuracy(base);
    // ζ_k: where J_{Tₖ T₀^∞} crosses the connector near aₖ; ω_k: its start
    // φₖ(1) at the tip near bₖ
    let zeta_s = map.connector_crossing()?;
    let omega_s = StripPoint::Global(Complex64::new(1.0, 0.0));
    let zp = HookPoint::from_local(map, map.eval(zeta_s), err);
    let wp = HookPoint::from_local(map, map.eval(omega_s), err);
    if zp.anchor != Anchor::A || wp.anchor != Anchor::B {
        return Err(Error::Solver(format!("probe points of T{k} are not in the expected frames")));
    }
    let z0 = zp.pullback_all(seq)?;
    let w0 = wp.pullback_all(seq)?;
    let zeta = z0.to_complex(seq).ok_or_else(|| Error::NotRepresentable("ζ_k".into()))?;
    let omega = w0.to_complex(seq).ok_or_else(|| Error::NotRepresentable("ω_k".into()))?;
    // level-0 anchors are a₀, b₀ = a, b exactly, so the offsets are ζ_k − a, ω_k − b
    let dz = z0.distance_to_anchor();
    let dw = w0.distance_to_anchor();
    let err_ln = z0.error().ln.max(w0.error().ln);
    let ab = (b - a).norm();
    // |ζ − b| − |ζ − a| ≥ |a − b| − 2|ζ − a|
    let margin = ab - 2.0 * dz.value().max(dw.value());
    let param_zeta = map.ln_re_s(zeta_s)?;
    let param_omega = map.ln_re_s(omega_s)?;
    Ok(BadPairEntry {
        k,
        address: probe.display(model.names()),
        zeta,
        omega,
        ln_dist_zeta: dz.ln,
        ln_dist_omega: dw.ln,
        param_zeta,
        param_omega,
        ln_position_error: err_ln,
        margin,
        reversed: param_omega < param_zeta,
        unambiguous: margin.ln() >= 2f64.ln() + err_ln,
    })
}

/// Generic path: trace the probe hair with potentials at its first periodic
/// level and take the samples nearest a and b.
fn sampled_entry(model: &LogModel, probe: &ExternalAddress, k: usize, a: Complex64, b: Complex64) -> Result<BadPairEntry> {
    let level = probe.prefix.len().max(1);
    let lo = model.base_point.max(model.q + 0.05);
    let potentials: Vec<f64> = (0..600).map(|i| lo * (700.0 / lo).powf(i as f64 / 599.0)).collect();
    let mut hair = trace_hair(model, probe, &potentials, level)?;
    // a constant real tail: the potentials lie exactly on the invariant real
    // hair, so only rounding in the pullbacks remains
    let t = probe.cycle[0];
    let real_tail = probe.cycle.len() == 1
        && t.offset == 0
        && model.forward_in(t, Complex64::new(lo, 0.0)).map_or(false, |v| v.im == 0.0 && v.re >= lo);
    if real_tail {
        for s in &mut hair.samples {
            s.error_bound = 1e-14 * level as f64 * (1.0 + s.z.norm());
        }
    }
    let nearest = |p: Complex64| {
        hair.samples
            .iter()
            .enumerate()
            .min_by(|x, y| (x.1.z - p).norm().total_cmp(&(y.1.z - p).norm()))
            .map(|(i, s)| (i, s.z, s.error_bound))
            .unwrap()
    };
    let (iz, zeta, ez) = nearest(a);
    let (iw, omega, ew) = nearest(b);
    let err = ez.max(ew);
    let margin = ((zeta - b).norm() - (zeta - a).norm()).min((omega - a).norm() - (omega - b).norm());
    // only points within 1/k of their targets count as located
    let located = (zeta - a).norm() < 1.0 / k as f64 && (omega - b).norm() < 1.0 / k as f64;
    let reversed = located && hair_order(&hair, iw, iz)? == Ordering::Less;
    Ok(BadPairEntry {
        k,
        address: probe.display(model.names()),
        zeta,
        omega,
        ln_dist_zeta: (zeta - a).norm().ln(),
        ln_dist_omega: (omega - b).norm().ln(),
        param_zeta: hair.samples[iz].t,
        param_omega: hair.samples[iw].t,
        ln_position_error: err.ln(),
        margin,
        reversed,
        unambiguous: located && margin >= 2.0 * err,
    })
}

/// Search for a bad pair (a, b) on the hair of `target`: points ζ_k → a and
/// ω_k → b on the probe hairs with the order reversed. A witness needs at
/// least three consecutive k with unambiguous margins.
pub fn detect_bad_pair(
    model: &LogModel,
    target: &ExternalAddress,
    a: Complex64,
    b: Complex64,
    probes: &[ExternalAddress],
) -> Result<BadPairSearch> {
    // a ≺ b on the target hair: compare their potentials along its real tail
    if !(target.prefix.is_empty() && target.cycle.len() == 1 && target.cycle[0].offset == 0) {
        return Err(Error::Precondition("the target hair must be a constant real address".into()));
    }
    if !(a.im == 0.0 && b.im == 0.0 && a.re < b.re) {
        return Err(Error::Precondition("need real a < b on the target hair".into()));
    }
    let anchored = model
        .sequences()
        .map(|s| (s.a[0].value() - a.re).abs() <= 1e-12 * a.re && (s.b[0].value() - b.re).abs() <= 1e-12 * b.re)
        .unwrap_or(false);
    let mut entries: Vec<BadPairEntry> = probes
        .par_iter()
        .enumerate()
        .map(|(i, p)| match hook_recipe_level(model, p) {
            Some(k) if anchored => hook_entry(model, p, k, a, b),
            _ => sampled_entry(model, p, i + 1, a, b),
        })
        .collect::<Result<_>>()?;
    entries.sort_by_key(|e| e.k);
    let consecutive = longest_run(&entries);
    let decreasing = entries
        .windows(2)
        .all(|w| w[1].ln_dist_zeta < w[0].ln_dist_zeta && w[1].ln_dist_omega < w[0].ln_dist_omega);
    let witness = if consecutive >= 3 {
        Some(BadPairWitness {
            target: target.display(model.names()),
            z: a,
            w: b,
            method: if anchored { "anchored pullback".into() } else { "sampled hairs".into() },
            entries: entries.clone(),
            consecutive,
            decreasing,
        })
    } else {
        None
    };
    if witness.is_none() {
        let ambiguous: Vec<usize> = entries.iter().filter(|e| e.reversed && !e.unambiguous).map(|e| e.k).collect();
        if !ambiguous.is_empty() {
            let e = entries.iter().find(|e| e.reversed && !e.unambiguous).unwrap();
            return Err(Error::AccuracyInsufficient(format!(
                "reversal at k = {ambiguous:?} but margin {} is below twice the position error e^{}",
                e.margin, e.ln_position_error
            )));
        }
    }
    Ok(BadPairSearch { entries, witness })
}

/// Potentials for hair windows.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Window {
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
    /// Level at which potentials are placed.
    pub depth: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct BrushEntry {
    /// Agreement length with the reference address.
    pub n: usize,
    pub address: String,
    pub hausdorff: f64,
    /// Distance of the first samples (nearest the endpoints).
    pub endpoint_gap: f64,
    /// hausdorff(n) / hausdorff(n − 1).
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BrushReport {
    pub address: String,
    pub window: Window,
    /// Largest error bound among the traced samples.
    pub resolution: f64,
    pub entries: Vec<BrushEntry>,
    pub max_ratio: f64,
    /// (t, hyperbolic diameter of the slice {Re = t}) in H_Q.
    pub anguine: Vec<(f64, f64)>,
}

/// The address agreeing with `s` on indices < n and moved one translate up
/// at index n.
pub fn neighbor_at(s: &ExternalAddress, n: usize) -> ExternalAddress {
    let tail = s.shift_by(n + 1);
    let mut prefix: Vec<TractRef> = (0..n).map(|k| s.get(k)).collect();
    prefix.push(s.get(n).shifted(1));
    prefix.extend(tail.prefix);
    ExternalAddress { prefix, cycle: tail.cycle }
}

fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let one_sided = |p: &[Complex64], q: &[Complex64]| {
        p.iter()
            .map(|x| q.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

/// Hausdorff distances between hair windows of `address` and its neighbors.
pub fn brush_convergence_probe(
    model: &LogModel,
    address: &ExternalAddress,
    neighbor: &(dyn Fn(&ExternalAddress, usize) -> ExternalAddress + Sync),
    n_range: std::ops::RangeInclusive<usize>,
    window: Window,
) -> Result<BrushReport> {
    if window.samples < 2 || !(window.t_min < window.t_max) {
        return Err(Error::Precondition("window needs t_min < t_max and at least two samples".into()));
    }
    if window.depth <= *n_range.end() {
        return Err(Error::Precondition(format!(
            "window depth {} must exceed the largest agreement length {}",
            window.depth,
            n_range.end()
        )));
    }
    let ts: Vec<f64> = (0..window.samples)
        .map(|i| window.t_min + (window.t_max - window.t_min) * i as f64 / (window.samples - 1) as f64)
        .collect();
    let reference = trace_hair(model, address, &ts, window.depth)?;
    let pts = |h: &Hair| h.samples.iter().map(|s| s.z).collect::<Vec<_>>();
    let ref_pts = pts(&reference);
    let ns: Vec<usize> = n_range.collect();
    let traced: Vec<(usize, ExternalAddress, Hair)> = ns
        .par_iter()
        .map(|&n| {
            let s = neighbor(address, n);
            trace_hair(model, &s, &ts, window.depth).map(|h| (n, s, h))
        })
        .collect::<Result<_>>()?;
    let mut resolution = reference.samples.iter().map(|s| s.error_bound).fold(0.0, f64::max);
    let mut entries: Vec<BrushEntry> = Vec::new();
    for (n, s, h) in &traced {
        resolution = h.samples.iter().map(|s| s.error_bound).fold(resolution, f64::max);
        let p = pts(h);
        let d = hausdorff(&ref_pts, &p);
        let ratio = entries.last().filter(|e| e.n + 1 == *n && e.hausdorff > 0.0).map(|e| d / e.hausdorff);
        entries.push(BrushEntry {
            n: *n,
            address: s.display(model.names()),
            hausdorff: d,
            endpoint_gap: (p[0] - ref_pts[0]).norm(),
            ratio,
        });
    }
    let max_ratio = entries.iter().filter_map(|e| e.ratio).fold(0.0, f64::max);
    let anguine = [1.0, 2.0, 5.0, 10.0, 50.0]
        .iter()
        .map(|&t| anguine_slice_diameter(model, model.q + t, 512).map(|d| (model.q + t, d)))
        .collect::<Result<_>>()?;
    Ok(BrushReport { address: address.display(model.names()), window, resolution, entries, max_ratio, anguine })
}

/// Lower edge of the band between adjacent translates of Γ = {Im = y₀}.
const GAMMA_LEVEL: f64 = -PI / 2.0 - 0.25;

/// Hyperbolic diameter in H_Q of the tract points on {Re = t} between two
/// adjacent translates of Γ, by sampling.
pub fn anguine_slice_diameter(model: &LogModel, t: f64, samples: usize) -> Result<f64> {
    if !(t > model.q) {
        return Err(Error::Domain(format!("t = {t} must exceed Q = {}", model.q)));
    }
    let ys: Vec<f64> = (0..samples)
        .map(|i| GAMMA_LEVEL + 2.0 * PI * (i as f64 + 0.5) / samples as f64)
        .filter(|&y| model.locate(Complex64::new(t, y)).is_ok())
        .collect();
    match (ys.first(), ys.last()) {
        (Some(&lo), Some(&hi)) => {
            let s = Complex64::new(t - model.q, 0.0);
            hyp_dist_halfplane(s + Complex64::new(0.0, lo), s + Complex64::new(0.0, hi))
        }
        _ => Ok(0.0),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FastEscape {
    pub point: Complex64,
    pub index: usize,
    pub n: u32,
    pub m_n: f64,
    pub arc_diameter: f64,
    /// Measured diam D⁰_j ∩ samples for j = 1..=depth.
    pub exclusion_diameters: Vec<f64>,
    /// L^j(ℓ_{n+j}).
    pub exclusion_bounds: Vec<f64>,
    /// α_{n+j} in model coordinates, j = 0..=depth.
    pub alphas: Vec<f64>,
    /// Re F^j(point), +∞ past the double range.
    pub orbit: Vec<f64>,
}

fn diameter(p: &[Complex64]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, x) in p.iter().enumerate() {
        for y in &p[i + 1..] {
            d = d.max((x - y).norm());
        }
    }
    d
}

/// A sample of the arc whose j-th iterate lies right of α_{n+j} for all
/// j ≤ depth, after excluding the pullbacks D⁰_j of {Re ≤ α_{n+j}}.
pub fn fast_escape_point(model: &LogModel, arc: &[Complex64], n: u32, depth: usize) -> Result<Option<FastEscape>> {
    if arc.len() < 2 {
        return Err(Error::Precondition("the arc needs at least two samples".into()));
    }
    let alphas: Vec<f64> = (0..=depth as u32).map(|j| alpha_sequence(model, n + j).map(|a| a.raw)).collect::<Result<_>>()?;
    let gap = arc.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max);
    let diam = diameter(arc);
    if gap > 0.01 * diam {
        return Err(Error::Precondition(format!("samples are not chain-connected: gap {gap} vs diameter {diam}")));
    }
    let m_n = M_sum(n);
    let m_n = m_n.value + m_n.tail_bound;
    if !(diam > m_n + gap) {
        return Err(Error::Hypothesis(format!("arc diameter {diam} does not exceed M_{n} = {m_n} plus resolution {gap}")));
    }
    if let Some(z) = arc.iter().find(|z| !(z.re > alphas[0])) {
        return Err(Error::Precondition(format!("{z} is not right of α_{n} = {}", alphas[0])));
    }
    let orbits: Vec<Vec<f64>> = arc
        .par_iter()
        .map(|&z| {
            let mut re = vec![z.re];
            let mut w = z;
            for _ in 0..depth {
                if w.re.is_infinite() {
                    re.push(w.re);
                    continue;
                }
                w = match model.forward(w) {
                    Ok((v, _)) if v.re.is_finite() => v,
                    Ok(_) | Err(Error::NotRepresentable(_)) => Complex64::new(f64::INFINITY, 0.0),
                    // the orbit left the tracts: excluded from here on
                    Err(Error::NotInDomain(_)) => Complex64::new(f64::NEG_INFINITY, 0.0),
                    Err(e) => return Err(e),
                };
                re.push(w.re);
            }
            Ok(re)
        })
        .collect::<Result<_>>()?;
    let mut exclusion_diameters = Vec::with_capacity(depth);
    let mut exclusion_bounds = Vec::with_capacity(depth);
    for j in 1..=depth {
        let hit: Vec<Complex64> = arc.iter().zip(&orbits).filter(|(_, o)| o[j] <= alphas[j]).map(|(z, _)| *z).collect();
        exclusion_diameters.push(diameter(&hit));
        let mut b = ell(n + j as u32);
        for _ in 0..j {
            b = L_eval(b);
        }
        exclusion_bounds.push(b);
    }
    let survivor = orbits.iter().position(|o| (1..=depth).all(|j| o[j] > alphas[j]));
    Ok(survivor.map(|i| FastEscape {
        point: arc[i],
        index: i,
        n,
        m_n,
        arc_diameter: diam,
        exclusion_diameters,
        exclusion_bounds,
        alphas,
        orbit: orbits[i].clone(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tractmodel::{build_model, ModelSpec};

    #[test]
    fn neighbor_construction() {
        let s = ExternalAddress::constant(TractRef::new(0, 0));
        let t = neighbor_at(&s, 3);
        assert_eq!(s.agreement(&t, 50), 3);
        assert_eq!(t.get(3), TractRef::new(0, 1));
        assert_eq!(t.get(4), TractRef::new(0, 0));
    }

    #[test]
    fn identical_address_has_zero_distance() {
        let m = build_model(&ModelSpec::exp_default()).unwrap();
        let s = ExternalAddress::constant(TractRef::new(0, 0));
        let w = Window { t_min: 1.0, t_max: 5.0, samples: 20, depth: 8 };
        let r = brush_convergence_probe(&m, &s, &|a, _| a.clone(), 2..=4, w).unwrap();
        assert!(r.entries.iter().all(|e| e.hausdorff == 0.0));
    }

    #[test]
    fn small_arc_violates_hypothesis() {
        let m = build_model(&ModelSpec::exp_default()).unwrap();
        let arc: Vec<Complex64> = (0..200).map(|i| Complex64::new(2.0 + i as f64 * 0.01, 0.0)).collect();
        assert!(matches!(fast_escape_point(&m, &arc, 0, 3), Err(Error::Hypothesis(_))));
    }
}
