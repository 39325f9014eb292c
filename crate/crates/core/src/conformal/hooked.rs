//! The hooked tract maps φₙ: Σ = {|Im s| < π} → T̂ₙ.
//!
//! T̂ₙ is a U-turn: a lower box (aₙ, bₙ) × (Y₃, Y₂), a connector
//! (aₙ, aₙ+1) × [Y₂, Y₁] and an upper band (aₙ, ∞) × (Y₁, Y₀). Its lower box
//! is a long channel (bₙ − aₙ ≥ 100 for n ≥ 1), so φₙ is assembled from two
//! pieces that agree in the channel up to e^{-60}:
//!
//! * the tip piece, in the frame v = z − bₙ, is closed form: the lower box
//!   seen as a half-strip ending at x = bₙ;
//! * the U-turn piece, in the frame u = z − aₙ, is a Schwarz–Christoffel map
//!   from {0 < Im W < π} with s = 2W − iπ + τ_U.
//!
//! For n ≥ 2 the frames sit ~10⁴⁹ (n = 2) or ~e^{10⁴⁹} (n = 3) apart, so
//! points are carried in local coordinates and τ_U is a LogReal plus a small
//! offset.

use super::halfstrip::{hook_levels, HookSequences};
use super::sc::{End, ScMap, ScProblem, Side, SolveOptions, VertexSpec, END_MARGIN};
use super::NumericMap;
use crate::error::{Error, Result};
use crate::scaled::LogReal;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{LN_2, PI};

/// Distance (in W) left of the first U-turn prevertex below which the tip
/// piece is used.
const SWITCH: f64 = 60.0;
/// Window margin for boundary samples, beyond the asymptotic cut-over.
const WINDOW: f64 = END_MARGIN + 8.0;

/// Shape data of T̂ₙ.
#[derive(Clone, Debug, Serialize)]
pub struct HookGeometry {
    pub n: usize,
    /// Y₀ > Y₁ > Y₂ > Y₃.
    pub levels: [f64; 4],
    pub a: LogReal,
    pub b: LogReal,
    /// bₙ − aₙ.
    pub length: LogReal,
}

impl HookGeometry {
    pub fn new(n: usize, seq: &HookSequences) -> Result<Self> {
        if n == 0 || n >= seq.a.len() {
            return Err(Error::Domain(format!("hook index {n} out of range")));
        }
        let (a, b) = (seq.a[n], seq.b[n]);
        if !a.ln.is_finite() || !b.ln.is_finite() {
            return Err(Error::NotRepresentable(format!("a_{n} or b_{n} exceeds the extended range")));
        }
        let length = b.sub(a).ok_or_else(|| Error::Domain("b_n ≤ a_n".into()))?;
        Ok(HookGeometry { n, levels: hook_levels(n), a, b, length })
    }

    pub fn upper_height(&self) -> f64 {
        self.levels[0] - self.levels[1]
    }

    pub fn lower_height(&self) -> f64 {
        self.levels[2] - self.levels[3]
    }

    /// Boundary segments of the U-turn frame (u = z − aₙ), channels cut at `far`.
    fn uturn_segments(&self, far: f64) -> Vec<(Complex64, Complex64)> {
        let [y0, y1, y2, y3] = self.levels;
        let c = Complex64::new;
        vec![
            (c(far, y3), c(0.0, y3)),
            (c(0.0, y3), c(0.0, y0)),
            (c(0.0, y0), c(far, y0)),
            (c(far, y1), c(1.0, y1)),
            (c(1.0, y1), c(1.0, y2)),
            (c(1.0, y2), c(far, y2)),
        ]
    }

    /// Boundary segments of the tip frame (v = z − bₙ), channel cut at `far` < 0.
    fn tip_segments(&self, far: f64) -> Vec<(Complex64, Complex64)> {
        let [_, _, y2, y3] = self.levels;
        let c = Complex64::new;
        vec![(c(far, y3), c(0.0, y3)), (c(0.0, y3), c(0.0, y2)), (c(0.0, y2), c(far, y2))]
    }

    /// Membership in T̂ₙ for a point in the U-turn frame.
    pub fn contains_uturn(&self, u: Complex64) -> bool {
        let [y0, y1, y2, y3] = self.levels;
        u.re > 0.0
            && ((u.im > y1 && u.im < y0) || (u.re < 1.0 && u.im >= y2 && u.im <= y1) || (u.im > y3 && u.im < y2))
    }
}

/// A point of Σ: globally (s) or in the U-turn chart W = (s − τ_U + iπ)/2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum StripPoint {
    Global(Complex64),
    UTurn(Complex64),
}

/// A point of T̂ₙ in the tip frame (z − bₙ) or the U-turn frame (z − aₙ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum HookLocal {
    Tip(Complex64),
    UTurn(Complex64),
}

/// Validation data gathered at construction.
#[derive(Clone, Debug, Serialize)]
pub struct HookReport {
    pub n: usize,
    pub uturn_residual: f64,
    /// Sup distance of boundary samples from ∂T̂ₙ.
    pub boundary_error: f64,
    /// Largest distance between consecutive boundary samples.
    pub sample_gap: f64,
    /// boundary_error + sample_gap/2: Hausdorff bound on the sampled window.
    pub hausdorff: f64,
    /// max |φₙ'| sampled on |Im s| ≤ π/2.
    pub derivative_max: f64,
    /// ζₙ in the tip frame.
    pub zeta_local: Complex64,
}

#[derive(Clone, Debug)]
pub struct HookedMap {
    pub geometry: HookGeometry,
    uturn: ScMap,
    tau_tip: f64,
    /// τ_U = tau_big + tau_small.
    tau_big: LogReal,
    tau_small: f64,
    table: Vec<(Complex64, Complex64)>,
    pub report: HookReport,
}

fn log_cosh(q: Complex64) -> Complex64 {
    if q.re > 15.0 {
        q + (1.0 + (-2.0 * q).exp()).ln() - LN_2
    } else {
        q.cosh().ln()
    }
}

fn dist_to_segment(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let t = (((z - a) * ab.conj()).re / ab.norm_sqr()).clamp(0.0, 1.0);
    (a + ab * t - z).norm()
}

fn dist_to_boundary(z: Complex64, segs: &[(Complex64, Complex64)]) -> f64 {
    segs.iter().map(|(a, b)| dist_to_segment(z, *a, *b)).fold(f64::INFINITY, f64::min)
}

/// Sample a boundary curve t ↦ f(t), refining until consecutive images are
/// at most `hmax` apart.
fn refine<F: Fn(f64) -> Complex64>(f: F, t0: f64, t1: f64, n0: usize, hmax: f64) -> Vec<Complex64> {
    let mut out = Vec::new();
    let mut stack: Vec<(f64, Complex64, f64, Complex64, u32)> = Vec::new();
    let ts: Vec<f64> = (0..=n0).map(|k| t0 + (t1 - t0) * k as f64 / n0 as f64).collect();
    let vals: Vec<Complex64> = ts.iter().map(|&t| f(t)).collect();
    out.push(vals[0]);
    for k in (0..n0).rev() {
        stack.push((ts[k], vals[k], ts[k + 1], vals[k + 1], 0));
    }
    while let Some((a, fa, b, fb, depth)) = stack.pop() {
        if (fb - fa).norm() <= hmax || depth >= 30 {
            out.push(fb);
            continue;
        }
        let m = 0.5 * (a + b);
        let fm = f(m);
        stack.push((m, fm, b, fb, depth + 1));
        stack.push((a, fa, m, fm, depth + 1));
    }
    out
}

/// The U-turn polygon problem in the frame u = z − aₙ.
fn uturn_problem(levels: [f64; 4]) -> ScProblem {
    let [y0, y1, y2, y3] = levels;
    let c = Complex64::new;
    ScProblem {
        vertices: vec![
            VertexSpec { pos: c(1.0, y2), alpha: 1.5, side: Side::Bottom },
            VertexSpec { pos: c(1.0, y1), alpha: 1.5, side: Side::Bottom },
            VertexSpec { pos: c(0.0, y3), alpha: 0.5, side: Side::Top },
            VertexSpec { pos: c(0.0, y0), alpha: 0.5, side: Side::Top },
        ],
        left: End::Channel { width: c(0.0, -(y2 - y3)) },
        right: End::Channel { width: c(0.0, y0 - y1) },
    }
}

/// Construct φₙ and validate it against `eps` (boundary Hausdorff bound).
pub fn hooked_tract_map(n: usize, seq: &HookSequences, eps: f64) -> Result<HookedMap> {
    let geometry = HookGeometry::new(n, seq)?;
    let uturn = ScMap::solve(&uturn_problem(geometry.levels), 0.0, &[0.0, 1.0, -2.0, 3.0], SolveOptions::default())?;
    let hl = geometry.lower_height();
    let [_, _, y2, y3] = geometry.levels;
    let mut map = HookedMap {
        geometry,
        uturn,
        tau_tip: 0.0,
        tau_big: LogReal::one(),
        tau_small: 0.0,
        table: Vec::new(),
        report: HookReport {
            n,
            uturn_residual: 0.0,
            boundary_error: 0.0,
            sample_gap: 0.0,
            hausdorff: 0.0,
            derivative_max: 0.0,
            zeta_local: Complex64::new(0.0, 0.0),
        },
    };
    map.report.uturn_residual = map.uturn.residual;

    // ζₙ: the point at Re v = −1 on the image of the real axis
    let im_g = |y: f64| map.tip_g(Complex64::new(-1.0, y)).im;
    let (mut lo, mut hi) = (y3 + 1e-12, y2 - 1e-12);
    if !(im_g(lo) > 0.0 && im_g(hi) < 0.0) {
        return Err(Error::GeodesicNotFound(format!("no sign change of the geodesic condition for n = {n}")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if im_g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let zeta = Complex64::new(-1.0, 0.5 * (lo + hi));
    map.tau_tip = 1.0 - map.tip_g(zeta).re;
    map.report.zeta_local = zeta;

    // glue: in the channel u ≈ E₋ − (h_L/π)W
    let (slope, _) = map.uturn.channel_slopes();
    let e = map.uturn.left_constant();
    if (slope + hl / PI).norm() > 1e-8 || (e.im - y2).abs() > 1e-8 {
        return Err(Error::AccuracyNotReached { achieved: (slope + hl / PI).norm().max((e.im - y2).abs()), requested: 1e-8 });
    }
    let k = 2.0 * PI / hl;
    map.tau_big = map.geometry.length.scale(k);
    map.tau_small = map.tau_tip - 2.0 * LN_2 - k * e.re;

    let (wlo, whi) = map.uturn.x_range();
    let mut table = Vec::new();
    let mut x = wlo - END_MARGIN;
    while x <= whi + END_MARGIN {
        for j in 1..16 {
            let w = Complex64::new(x, PI * j as f64 / 16.0);
            table.push((map.uturn.eval(w), w));
        }
        x += 0.5;
    }
    map.table = table;

    map.validate()?;
    if !(map.report.hausdorff <= eps) {
        return Err(Error::AccuracyNotReached { achieved: map.report.hausdorff, requested: eps });
    }
    Ok(map)
}

impl HookedMap {
    pub fn n(&self) -> usize {
        self.geometry.n
    }

    pub fn uturn_map(&self) -> &ScMap {
        &self.uturn
    }

    /// τ_U as a double, when representable.
    pub fn tau_uturn(&self) -> Option<f64> {
        self.tau_big.to_f64().map(|t| t + self.tau_small)
    }

    /// ln Re s for a point with Re s > 0: the order parameter along the
    /// real axis of Σ.
    pub fn ln_re_s(&self, p: StripPoint) -> Result<f64> {
        match p {
            StripPoint::Global(s) if s.re > 0.0 => Ok(s.re.ln()),
            StripPoint::Global(s) => Err(Error::Domain(format!("Re s = {} is not positive", s.re))),
            StripPoint::UTurn(w) => {
                let off = self.tau_small + 2.0 * w.re;
                let v = if off >= 0.0 {
                    Some(self.tau_big.add(LogReal::from_f64(off.max(f64::MIN_POSITIVE))))
                } else {
                    self.tau_big.sub(LogReal::from_f64(-off))
                };
                v.map(|v| v.ln).ok_or_else(|| Error::Domain("Re s is not positive".into()))
            }
        }
    }

    fn tip_p(&self, v: Complex64) -> Complex64 {
        let hl = self.geometry.lower_height();
        -(PI / hl) * (v - Complex64::new(0.0, self.geometry.levels[2]))
    }

    /// g(v) = 2 ln 2 + 4 log cosh(p/2) − iπ; s = g + τ_tip.
    fn tip_g(&self, v: Complex64) -> Complex64 {
        let q = self.tip_p(v) / 2.0;
        2.0 * LN_2 + 4.0 * log_cosh(q) - Complex64::new(0.0, PI)
    }

    fn tip_forward(&self, s: Complex64) -> Complex64 {
        let lc = (s - self.tau_tip - 2.0 * LN_2 + Complex64::new(0.0, PI)) / 4.0;
        let q = if lc.re > 15.0 { LN_2 + lc - (-2.0 * lc).exp() / 4.0 } else { lc.exp().acosh() };
        let q = Complex64::new(q.re.abs(), q.im.clamp(0.0, PI / 2.0));
        let hl = self.geometry.lower_height();
        Complex64::new(0.0, self.geometry.levels[2]) - (hl / PI) * (2.0 * q)
    }

    fn tip_inverse(&self, v: Complex64) -> Complex64 {
        self.tip_g(v) + self.tau_tip
    }

    /// dz/ds in the tip piece.
    fn tip_derivative(&self, v: Complex64) -> Complex64 {
        let hl = self.geometry.lower_height();
        let q = self.tip_p(v) / 2.0;
        1.0 / (2.0 * q.tanh() * (-PI / hl))
    }

    /// Which chart a global s belongs to.
    fn chart(&self, p: StripPoint) -> StripPoint {
        match (p, self.tau_uturn()) {
            (StripPoint::Global(s), Some(t)) => {
                let w = (s - t + Complex64::new(0.0, PI)) / 2.0;
                if w.re >= self.uturn.x_range().0 - SWITCH {
                    StripPoint::UTurn(w)
                } else {
                    p
                }
            }
            _ => p,
        }
    }

    /// φₙ in local coordinates.
    pub fn eval(&self, p: StripPoint) -> HookLocal {
        match self.chart(p) {
            StripPoint::Global(s) => HookLocal::Tip(self.tip_forward(s)),
            StripPoint::UTurn(w) => HookLocal::UTurn(self.uturn.eval(w)),
        }
    }

    /// φₙ'(s).
    pub fn derivative(&self, p: StripPoint) -> Complex64 {
        match self.chart(p) {
            StripPoint::Global(s) => self.tip_derivative(self.tip_forward(s)),
            StripPoint::UTurn(w) => self.uturn.derivative(w) / 2.0,
        }
    }

    /// φₙ⁻¹ of a local point.
    pub fn invert(&self, z: HookLocal) -> Result<StripPoint> {
        let hl = self.geometry.lower_height();
        let [_, _, y2, y3] = self.geometry.levels;
        let e = self.uturn.left_constant();
        let cut = e.re + (hl / PI) * (SWITCH - self.uturn.x_range().0);
        let in_lower = |y: f64| y > y3 && y < y2;
        match z {
            HookLocal::Tip(v) => {
                if !(v.re < 0.0 && in_lower(v.im)) {
                    return Err(Error::NotInDomain(format!("{v} is not in the lower box")));
                }
                // points near the U-turn are handed to the U-turn chart
                if let Some(lr) = self.geometry.length.to_f64() {
                    if v.re + lr < cut {
                        return self.invert(HookLocal::UTurn(v + lr));
                    }
                }
                Ok(StripPoint::Global(self.tip_inverse(v)))
            }
            HookLocal::UTurn(u) => {
                if !self.geometry.contains_uturn(u) {
                    return Err(Error::NotInDomain(format!("{u} is not in the hooked region")));
                }
                if in_lower(u.im) && u.re > cut {
                    if let Some(lr) = self.geometry.length.to_f64() {
                        if u.re - lr < 0.0 {
                            return Ok(StripPoint::Global(self.tip_inverse(u - lr)));
                        }
                    }
                }
                let guess = self.table_guess(u);
                let w = self.uturn.invert_from(u, guess, 1e-14 * u.norm().max(1.0))?;
                Ok(StripPoint::UTurn(w))
            }
        }
    }

    fn table_guess(&self, u: Complex64) -> Complex64 {
        let (slope_l, slope_r) = self.uturn.channel_slopes();
        let [_, y1, y2, _] = self.geometry.levels;
        let (wlo, whi) = self.uturn.x_range();
        if u.im < y2 {
            let w = (u - self.uturn.left_constant()) / slope_l;
            if w.re < wlo - END_MARGIN {
                return Complex64::new(w.re, w.im.clamp(1e-6, PI - 1e-6));
            }
        }
        if u.im > y1 {
            let w = (u - self.uturn.right_constant()) / slope_r;
            if w.re > whi + END_MARGIN {
                return Complex64::new(w.re, w.im.clamp(1e-6, PI - 1e-6));
            }
        }
        self.table
            .iter()
            .min_by(|a, b| (a.0 - u).norm().total_cmp(&(b.0 - u).norm()))
            .map(|p| p.1)
            .unwrap()
    }

    /// Absolute position of a local point, when aₙ and bₙ are doubles.
    pub fn to_absolute(&self, z: HookLocal) -> Option<Complex64> {
        match z {
            HookLocal::Tip(v) => self.geometry.b.to_f64().map(|b| v + b),
            HookLocal::UTurn(u) => self.geometry.a.to_f64().map(|a| u + a),
        }
    }

    /// Local coordinates of an absolute point (U-turn frame near aₙ, tip
    /// frame elsewhere in the lower box).
    pub fn from_absolute(&self, z: Complex64) -> Option<HookLocal> {
        let a = self.geometry.a.to_f64()?;
        let b = self.geometry.b.to_f64()?;
        let [_, _, y2, _] = self.geometry.levels;
        if z.im < y2 && z.re > 0.5 * (a + b) {
            Some(HookLocal::Tip(Complex64::new(z.re - b, z.im)))
        } else {
            Some(HookLocal::UTurn(Complex64::new(z.re - a, z.im)))
        }
    }

    /// The real point of Σ whose image crosses the connector midline
    /// Im z = (Y₁ + Y₂)/2.
    pub fn connector_crossing(&self) -> Result<StripPoint> {
        let [_, y1, y2, _] = self.geometry.levels;
        let mid = 0.5 * (y1 + y2);
        let (wlo, whi) = self.uturn.x_range();
        let f = |x: f64| self.uturn.eval(Complex64::new(x, PI / 2.0)).im - mid;
        let (mut lo, mut hi) = (wlo - END_MARGIN, whi + END_MARGIN);
        if !(f(lo) < 0.0 && f(hi) > 0.0) {
            return Err(Error::GeodesicNotFound("hair does not cross the connector".into()));
        }
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if f(m) < 0.0 {
                lo = m;
            } else {
                hi = m;
            }
            if hi - lo < 1e-14 {
                break;
            }
        }
        Ok(StripPoint::UTurn(Complex64::new(0.5 * (lo + hi), PI / 2.0)))
    }

    fn validate(&mut self) -> Result<()> {
        let g = &self.geometry;
        let hmax = 4e-4;
        let far = 1e3;
        let useg = g.uturn_segments(far);
        let tseg = g.tip_segments(-far);
        let (wlo, whi) = self.uturn.x_range();
        let pv = &self.uturn.integrand.prevertices;
        let gap = self.uturn.integrand.diff(3, 2).re;
        let mut curves: Vec<Vec<Complex64>> = Vec::new();
        // bottom line
        curves.push(refine(|x| self.uturn.eval(Complex64::new(x, 0.0)), wlo - WINDOW, whi + WINDOW, 400, hmax));
        // top line around the crowded pair T₂, T₁, in anchored coordinates
        let r_lo = (gap * 1e-6).ln();
        let left_span = (pv[2].x - (wlo - WINDOW)).ln();
        let right_span = ((whi + WINDOW) - pv[3].x).ln();
        curves.push(refine(
            |r| self.uturn.eval_anchored(2, Complex64::new(-r.exp(), 0.0)),
            r_lo,
            left_span,
            400,
            hmax,
        ));
        curves.push(refine(
            |t| {
                if t <= 0.5 {
                    self.uturn.eval_anchored(2, Complex64::new(t * gap, 0.0))
                } else {
                    self.uturn.eval_anchored(3, Complex64::new((t - 1.0) * gap, 0.0))
                }
            },
            0.0,
            1.0,
            200,
            hmax,
        ));
        curves.push(refine(
            |r| self.uturn.eval_anchored(3, Complex64::new(r.exp(), 0.0)),
            r_lo,
            right_span,
            400,
            hmax,
        ));
        let mut err: f64 = 0.0;
        let mut sample_gap: f64 = 0.0;
        for c in &curves {
            for w in c.windows(2) {
                sample_gap = sample_gap.max((w[1] - w[0]).norm());
            }
            for z in c {
                err = err.max(dist_to_boundary(*z, &useg));
            }
        }
        // the four corners must be reached
        let corners = [(1.0, g.levels[2]), (1.0, g.levels[1]), (0.0, g.levels[3]), (0.0, g.levels[0])];
        for (x, y) in corners {
            let cz = Complex64::new(x, y);
            let d = curves.iter().flatten().map(|z| (z - cz).norm()).fold(f64::INFINITY, f64::min);
            sample_gap = sample_gap.max(2.0 * d);
        }
        // tip piece, both boundary lines of Σ
        for sgn in [-1.0, 1.0] {
            let c = refine(|x| self.tip_forward(Complex64::new(x, sgn * PI)), -60.0, 120.0, 400, hmax);
            for w in c.windows(2) {
                sample_gap = sample_gap.max((w[1] - w[0]).norm());
            }
            for z in &c {
                err = err.max(dist_to_boundary(*z, &tseg));
            }
        }
        // derivative bound on |Im s| ≤ π/2
        let mut dmax: f64 = 0.0;
        let mut x = wlo - WINDOW;
        while x <= whi + WINDOW {
            for j in 0..=8 {
                let w = Complex64::new(x, PI / 4.0 + PI / 2.0 * j as f64 / 8.0);
                dmax = dmax.max(self.uturn.derivative(w).norm() / 2.0);
            }
            x += 0.05;
        }
        let mut x = -60.0;
        while x <= 120.0 {
            for j in 0..=8 {
                let s = Complex64::new(x, -PI / 2.0 + PI * j as f64 / 8.0);
                dmax = dmax.max(self.tip_derivative(self.tip_forward(s)).norm());
            }
            x += 0.05;
        }
        self.report.boundary_error = err;
        self.report.sample_gap = sample_gap;
        self.report.hausdorff = err + sample_gap / 2.0;
        self.report.derivative_max = dmax;
        Ok(())
    }
}

/// φₙ on absolute coordinates; only for n with aₙ, bₙ representable.
impl NumericMap for HookedMap {
    fn forward(&self, s: Complex64) -> Result<Complex64> {
        if !(s.im.abs() < PI) {
            return Err(Error::NotInDomain(format!("{s} is not in the strip |Im s| < π")));
        }
        self.to_absolute(self.eval(StripPoint::Global(s)))
            .ok_or_else(|| Error::NotRepresentable(format!("T̂_{} is out of double range", self.n())))
    }
    fn inverse(&self, z: Complex64) -> Result<Complex64> {
        let local = self
            .from_absolute(z)
            .ok_or_else(|| Error::NotRepresentable(format!("T̂_{} is out of double range", self.n())))?;
        match self.invert(local)? {
            StripPoint::Global(s) => Ok(s),
            StripPoint::UTurn(w) => {
                let t = self.tau_uturn().ok_or_else(|| Error::NotRepresentable("τ_U".into()))?;
                Ok(2.0 * w - Complex64::new(0.0, PI) + t)
            }
        }
    }
    fn derivative(&self, s: Complex64) -> Result<Complex64> {
        Ok(HookedMap::derivative(self, StripPoint::Global(s)))
    }
    fn boundary_accuracy(&self) -> f64 {
        self.report.hausdorff
    }
}
