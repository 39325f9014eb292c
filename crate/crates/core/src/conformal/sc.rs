//! Schwarz–Christoffel maps from the strip S = {0 < Im w < π}.
//!
//! f'(w) = C·exp(γw)·Π sinh((w − w_j)/2)^{β_j}, with prevertices w_j on the
//! bottom line (Im = 0) or the top line (Im = π). The ends of S map to
//! channels (exponent 0) or to vertices at finite points.

use crate::error::{Error, Result};
use crate::quad::GaussRule;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::{LN_2, PI};

const NODES: usize = 16;
const MAX_SEGMENT: f64 = 2.0;
/// Past this distance from the outermost prevertex the asymptotic form is used.
pub const END_MARGIN: f64 = 40.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Bottom,
    Top,
}

#[derive(Clone, Copy, Debug)]
pub struct Prevertex {
    pub x: f64,
    pub side: Side,
    pub beta: f64,
}

impl Prevertex {
    pub fn w(&self) -> Complex64 {
        match self.side {
            Side::Bottom => Complex64::new(self.x, 0.0),
            Side::Top => Complex64::new(self.x, PI),
        }
    }
}

/// Behaviour of the map at one end of the strip.
#[derive(Clone, Copy, Debug)]
pub enum End {
    /// The end maps into a channel; `width` is (top image) − (bottom image).
    Channel { width: Complex64 },
    /// The end maps to a finite vertex of interior angle α·π.
    Vertex { pos: Complex64, alpha: f64 },
}

/// A polygon vertex with its side of the strip.
#[derive(Clone, Copy, Debug)]
pub struct VertexSpec {
    pub pos: Complex64,
    pub alpha: f64,
    pub side: Side,
}

/// Polygon data for a strip map. Vertices on each side are listed in order
/// of increasing prevertex abscissa.
#[derive(Clone, Debug)]
pub struct ScProblem {
    pub vertices: Vec<VertexSpec>,
    pub left: End,
    pub right: End,
}

fn branch_sign(side: Side) -> f64 {
    match side {
        Side::Bottom => 1.0,
        Side::Top => -1.0,
    }
}

/// log sinh(u) on the branch continuous over the closed half strip adjacent
/// to a prevertex: Im in [0, π] for bottom prevertices, [−π, 0] for top ones.
fn log_sinh(u: Complex64, side: Side) -> Complex64 {
    let sgn = branch_sign(side);
    if u.re >= 20.0 {
        u + (Complex64::new(1.0, 0.0) - (-2.0 * u).exp()).ln() - LN_2
    } else if u.re <= -20.0 {
        -u + (Complex64::new(1.0, 0.0) - (2.0 * u).exp()).ln() - LN_2 + Complex64::new(0.0, sgn * PI)
    } else {
        let mut l = u.sinh().ln();
        if sgn > 0.0 && l.im < -PI / 2.0 {
            l.im += 2.0 * PI;
        } else if sgn < 0.0 && l.im > PI / 2.0 {
            l.im -= 2.0 * PI;
        }
        l
    }
}

/// The integrand exp(γw)·Π sinh((w − w_j)/2)^{β_j} and its quadrature.
///
/// Points can be given relative to a prevertex ("anchored"); differences to
/// prevertices on the same side are then formed from the exact gaps, which
/// keeps crowded prevertex clusters resolvable.
#[derive(Clone, Debug)]
pub struct ScIntegrand {
    pub prevertices: Vec<Prevertex>,
    pub gamma: f64,
    /// diff[i][p] = w_i − w_p
    diff: Vec<Vec<Complex64>>,
    start_rules: Vec<GaussRule>,
    legendre: GaussRule,
    radius: Vec<f64>,
}

impl ScIntegrand {
    pub fn new(prevertices: Vec<Prevertex>, gamma: f64) -> Self {
        let start_rules = prevertices.iter().map(|p| GaussRule::jacobi(NODES, 0.0, p.beta)).collect();
        let xs: Vec<f64> = prevertices.iter().map(|p| p.x).collect();
        let mut s = ScIntegrand {
            prevertices,
            gamma,
            diff: Vec::new(),
            start_rules,
            legendre: GaussRule::legendre(NODES),
            radius: Vec::new(),
        };
        s.set_positions(&xs, None);
        s
    }

    /// Move prevertices. `gaps[i]`, when finite, is the exact distance from
    /// the previous prevertex on the same side.
    pub fn set_positions(&mut self, xs: &[f64], gaps: Option<&[f64]>) {
        for (p, x) in self.prevertices.iter_mut().zip(xs) {
            p.x = *x;
        }
        let n = self.prevertices.len();
        // exact cumulative offsets along each side
        let mut cum = vec![0.0; n];
        let mut base = vec![0usize; n];
        for side in [Side::Bottom, Side::Top] {
            let idx: Vec<usize> = (0..n).filter(|&i| self.prevertices[i].side == side).collect();
            let mut acc = 0.0;
            let mut b = idx.first().copied().unwrap_or(0);
            for (k, &i) in idx.iter().enumerate() {
                if k > 0 {
                    match gaps.map(|g| g[i]).filter(|g| g.is_finite()) {
                        Some(g) => acc += g,
                        None => {
                            b = i;
                            acc = 0.0;
                        }
                    }
                }
                cum[i] = acc;
                base[i] = b;
            }
        }
        self.diff = (0..n)
            .map(|i| {
                (0..n)
                    .map(|p| {
                        let wi = self.prevertices[i].w();
                        let wp = self.prevertices[p].w();
                        if self.prevertices[i].side == self.prevertices[p].side && base[i] == base[p] {
                            Complex64::new(cum[i] - cum[p], 0.0)
                        } else {
                            wi - wp
                        }
                    })
                    .collect()
            })
            .collect();
        self.radius = (0..n)
            .map(|j| {
                let d = (0..n).filter(|&k| k != j).map(|k| self.diff[j][k].norm()).fold(f64::INFINITY, f64::min);
                (0.5 * d).min(MAX_SEGMENT)
            })
            .collect();
    }

    /// Exact difference w_i − w_p.
    pub fn diff(&self, i: usize, p: usize) -> Complex64 {
        self.diff[i][p]
    }

    fn log_g_at(&self, anchor: Option<usize>, s: Complex64) -> Complex64 {
        let w = match anchor {
            Some(i) => self.prevertices[i].w() + s,
            None => s,
        };
        let mut acc = Complex64::new(self.gamma * w.re, self.gamma * w.im);
        for (p, pv) in self.prevertices.iter().enumerate() {
            if pv.beta != 0.0 {
                let d = match anchor {
                    Some(i) => s + self.diff[i][p],
                    None => w - pv.w(),
                };
                acc += pv.beta * log_sinh(d / 2.0, pv.side);
            }
        }
        acc
    }

    pub fn log_g(&self, w: Complex64) -> Complex64 {
        self.log_g_at(None, w)
    }

    pub fn g(&self, w: Complex64) -> Complex64 {
        self.log_g(w).exp()
    }

    /// g at w_anchor + s.
    pub fn g_anchored(&self, anchor: usize, s: Complex64) -> Complex64 {
        self.log_g_at(Some(anchor), s).exp()
    }

    /// Sum of β_j.
    pub fn beta_sum(&self) -> f64 {
        self.prevertices.iter().map(|p| p.beta).sum()
    }

    /// Exponent of g at −∞ and the constant K₋ with g(w) ≈ K₋ e^{μ₋ w}.
    pub fn left_asymptote(&self) -> (f64, Complex64) {
        let mu = self.gamma - self.beta_sum() / 2.0;
        let mut l = Complex64::new(0.0, 0.0);
        for p in &self.prevertices {
            l += p.beta * (p.w() / 2.0 - LN_2 + Complex64::new(0.0, branch_sign(p.side) * PI));
        }
        (mu, l.exp())
    }

    /// Exponent of g at +∞ and the constant K₊ with g(w) ≈ K₊ e^{μ₊ w}.
    pub fn right_asymptote(&self) -> (f64, Complex64) {
        let mu = self.gamma + self.beta_sum() / 2.0;
        let mut l = Complex64::new(0.0, 0.0);
        for p in &self.prevertices {
            l += p.beta * (-p.w() / 2.0 - LN_2);
        }
        (mu, l.exp())
    }

    /// Distance from the segment a→b (in the anchor frame) to the prevertices.
    fn dist_to_prevertices(&self, anchor: Option<usize>, a: Complex64, b: Complex64) -> f64 {
        let ab = b - a;
        let len2 = ab.norm_sqr();
        (0..self.prevertices.len())
            .map(|p| {
                let w = match anchor {
                    Some(i) => -self.diff[i][p],
                    None => self.prevertices[p].w(),
                };
                let t = if len2 > 0.0 { (((w - a) * ab.conj()).re / len2).clamp(0.0, 1.0) } else { 0.0 };
                (a + ab * t - w).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn regular(&self, anchor: Option<usize>, a: Complex64, b: Complex64, depth: u32) -> Complex64 {
        let len = (b - a).norm();
        if len == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let d = self.dist_to_prevertices(anchor, a, b);
        if depth < 80 && (len > MAX_SEGMENT || len > d) {
            let m = (a + b) / 2.0;
            return self.regular(anchor, a, m, depth + 1) + self.regular(anchor, m, b, depth + 1);
        }
        let half = (b - a) / 2.0;
        let mid = (a + b) / 2.0;
        let mut s = Complex64::new(0.0, 0.0);
        for (x, wt) in self.legendre.nodes.iter().zip(&self.legendre.weights) {
            s += *wt * self.log_g_at(anchor, mid + half * *x).exp();
        }
        s * half
    }

    fn singular_piece(&self, j: usize, b: Complex64) -> Complex64 {
        let rule = &self.start_rules[j];
        let beta = self.prevertices[j].beta;
        let half = b / 2.0;
        let mut s = Complex64::new(0.0, 0.0);
        for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
            let z = half * (1.0 + x);
            s += *wt * (self.log_g_at(Some(j), z) - beta * (1.0 + x).ln()).exp();
        }
        s * half
    }

    /// ∫ g from w_j to w_j + s.
    pub fn integrate_from(&self, j: usize, s: Complex64) -> Complex64 {
        let len = s.norm();
        if len == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let r = self.radius[j];
        if len <= r {
            self.singular_piece(j, s)
        } else {
            let m = s * (r / len);
            self.singular_piece(j, m) + self.regular(Some(j), m, s, 0)
        }
    }

    /// ∫ g from prevertex i to prevertex j along the straight segment.
    pub fn integrate_between(&self, i: usize, j: usize) -> Complex64 {
        let d = self.diff[j][i];
        self.integrate_from(i, d / 2.0) - self.integrate_from(j, -d / 2.0)
    }

    /// ∫ g along a→b, with neither endpoint a prevertex.
    pub fn integrate(&self, a: Complex64, b: Complex64) -> Complex64 {
        self.regular(None, a, b, 0)
    }

    pub fn x_range(&self) -> (f64, f64) {
        let lo = self.prevertices.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
        let hi = self.prevertices.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

/// One displacement condition C·I(q) = D.
#[derive(Clone, Copy, Debug)]
enum Condition {
    /// Between two prevertices (indices into the prevertex list).
    Between(usize, usize),
    /// Channel width at the left or right end.
    ChannelLeft,
    ChannelRight,
    /// From the left vertex end to a prevertex along its side.
    FromLeftVertex(usize),
    /// From a prevertex to the right vertex end along its side.
    ToRightVertex(usize),
}

/// A solved strip map.
#[derive(Clone, Debug)]
pub struct ScMap {
    pub integrand: ScIntegrand,
    pub c: Complex64,
    pub images: Vec<Complex64>,
    pub left: End,
    pub right: End,
    pub residual: f64,
    left_const: Complex64,
    right_const: Complex64,
    waypoints: Vec<(Complex64, Complex64)>,
    waypoint_x0: f64,
    waypoint_step: f64,
}

fn conditions(problem: &ScProblem) -> Vec<(Condition, Complex64)> {
    let v = &problem.vertices;
    let mut out = Vec::new();
    let bottom: Vec<usize> = (0..v.len()).filter(|&i| v[i].side == Side::Bottom).collect();
    let top: Vec<usize> = (0..v.len()).filter(|&i| v[i].side == Side::Top).collect();
    for side in [&bottom, &top] {
        for pair in side.windows(2) {
            out.push((Condition::Between(pair[0], pair[1]), v[pair[1]].pos - v[pair[0]].pos));
        }
    }
    if let (Some(&b), Some(&t)) = (bottom.last(), top.last()) {
        out.push((Condition::Between(b, t), v[t].pos - v[b].pos));
    }
    match problem.left {
        End::Channel { width } => out.push((Condition::ChannelLeft, width)),
        End::Vertex { pos, .. } => {
            for side in [&bottom, &top] {
                if let Some(&first) = side.first() {
                    out.push((Condition::FromLeftVertex(first), v[first].pos - pos));
                }
            }
        }
    }
    match problem.right {
        End::Channel { width } => out.push((Condition::ChannelRight, width)),
        End::Vertex { pos, .. } => {
            for side in [&bottom, &top] {
                if let Some(&last) = side.last() {
                    out.push((Condition::ToRightVertex(last), pos - v[last].pos));
                }
            }
        }
    }
    out
}

fn line_point(x: f64, side: Side) -> Complex64 {
    match side {
        Side::Bottom => Complex64::new(x, 0.0),
        Side::Top => Complex64::new(x, PI),
    }
}

fn condition_integral(s: &ScIntegrand, c: Condition) -> Complex64 {
    let p = &s.prevertices;
    match c {
        Condition::Between(i, j) => s.integrate_between(i, j),
        Condition::ChannelLeft => {
            let (_, k) = s.left_asymptote();
            k * Complex64::new(0.0, PI)
        }
        Condition::ChannelRight => {
            let (_, k) = s.right_asymptote();
            k * Complex64::new(0.0, PI)
        }
        Condition::FromLeftVertex(j) => {
            let (mu, k) = s.left_asymptote();
            let w0 = line_point(p[j].x - END_MARGIN, p[j].side);
            k * (mu * w0).exp() / mu - s.integrate_from(j, w0 - p[j].w())
        }
        Condition::ToRightVertex(j) => {
            let (mu, k) = s.right_asymptote();
            let w1 = line_point(p[j].x + END_MARGIN, p[j].side);
            s.integrate_from(j, w1 - p[j].w()) - k * (mu * w1).exp() / mu
        }
    }
}

/// Unknowns: the first prevertex of the first nonempty side is fixed at 0;
/// the first of the other side is free; remaining abscissae are log-gaps.
struct Layout {
    bottom: Vec<usize>,
    top: Vec<usize>,
}

impl Layout {
    fn new(v: &[VertexSpec]) -> Self {
        Layout {
            bottom: (0..v.len()).filter(|&i| v[i].side == Side::Bottom).collect(),
            top: (0..v.len()).filter(|&i| v[i].side == Side::Top).collect(),
        }
    }

    fn unknowns(&self, n: usize) -> usize {
        n - 1
    }

    fn to_params(&self, xs: &[f64]) -> Vec<f64> {
        let mut q = Vec::new();
        let mut first = true;
        let anchor = if self.bottom.is_empty() { xs[self.top[0]] } else { xs[self.bottom[0]] };
        for side in [&self.bottom, &self.top] {
            if side.is_empty() {
                continue;
            }
            if !first {
                q.push(xs[side[0]] - anchor);
            }
            first = false;
            for pair in side.windows(2) {
                q.push((xs[pair[1]] - xs[pair[0]]).max(1e-300).ln());
            }
        }
        q
    }

    fn from_params(&self, q: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut xs = vec![0.0; n];
        let mut gaps = vec![f64::NAN; n];
        let mut it = q.iter();
        let mut first = true;
        for side in [&self.bottom, &self.top] {
            if side.is_empty() {
                continue;
            }
            xs[side[0]] = if first { 0.0 } else { *it.next().unwrap() };
            first = false;
            for pair in side.windows(2) {
                let g = it.next().unwrap().exp();
                gaps[pair[1]] = g;
                xs[pair[1]] = xs[pair[0]] + g;
            }
        }
        (xs, gaps)
    }
}

/// Options for the parameter solve.
#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-12, max_iter: 200 }
    }
}

fn best_constant(ints: &[Complex64], targets: &[Complex64]) -> Complex64 {
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (i, d) in ints.iter().zip(targets) {
        let w = 1.0 / d.norm_sqr();
        num += i.conj() * d * w;
        den += i.norm_sqr() * w;
    }
    num / den
}

fn residuals(s: &ScIntegrand, conds: &[(Condition, Complex64)]) -> (Vec<f64>, Complex64) {
    let ints: Vec<Complex64> = conds.iter().map(|(c, _)| condition_integral(s, *c)).collect();
    let targets: Vec<Complex64> = conds.iter().map(|(_, d)| *d).collect();
    let c = best_constant(&ints, &targets);
    let mut r = Vec::with_capacity(2 * conds.len());
    for (i, d) in ints.iter().zip(&targets) {
        let e = (c * i - d) / d.norm();
        r.push(e.re);
        r.push(e.im);
    }
    (r, c)
}

fn norm(r: &[f64]) -> f64 {
    r.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl ScMap {
    /// Solve for prevertices starting from the abscissae `guess` (one per vertex).
    pub fn solve(problem: &ScProblem, gamma: f64, guess: &[f64], opts: SolveOptions) -> Result<ScMap> {
        let v = &problem.vertices;
        if guess.len() != v.len() || v.is_empty() {
            return Err(Error::Solver("guess length must match the vertex count".into()));
        }
        let prev: Vec<Prevertex> = v
            .iter()
            .zip(guess)
            .map(|(vs, x)| Prevertex { x: *x, side: vs.side, beta: vs.alpha - 1.0 })
            .collect();
        let mut integrand = ScIntegrand::new(prev, gamma);
        let (mu_l, _) = integrand.left_asymptote();
        let (mu_r, _) = integrand.right_asymptote();
        let expect_l = match problem.left {
            End::Channel { .. } => 0.0,
            End::Vertex { alpha, .. } => alpha,
        };
        let expect_r = match problem.right {
            End::Channel { .. } => 0.0,
            End::Vertex { alpha, .. } => -alpha,
        };
        if (mu_l - expect_l).abs() > 1e-12 || (mu_r - expect_r).abs() > 1e-12 {
            return Err(Error::Solver(format!(
                "angle sum inconsistent with end behaviour: μ₋={mu_l}, μ₊={mu_r}"
            )));
        }
        let conds = conditions(problem);
        let layout = Layout::new(v);
        let n = v.len();
        let nq = layout.unknowns(n);
        let mut q = layout.to_params(guess);
        let eval = |integrand: &mut ScIntegrand, q: &[f64]| {
            let (xs, gaps) = layout.from_params(q, n);
            integrand.set_positions(&xs, Some(&gaps));
            residuals(integrand, &conds)
        };
        let (mut r, _) = eval(&mut integrand, &q);
        let mut rn = norm(&r);
        let mut lambda = 1e-3;
        let mut iter = 0;
        while rn > opts.tol && iter < opts.max_iter && nq > 0 {
            iter += 1;
            let m = r.len();
            let mut jac = DMatrix::<f64>::zeros(m, nq);
            for k in 0..nq {
                let h = 1e-7 * q[k].abs().max(1.0);
                let mut qp = q.clone();
                qp[k] += h;
                let (rp, _) = eval(&mut integrand, &qp);
                for i in 0..m {
                    jac[(i, k)] = (rp[i] - r[i]) / h;
                }
            }
            let rv = DVector::from_vec(r.clone());
            let jtj = jac.transpose() * &jac;
            let jtr = jac.transpose() * rv;
            let mut improved = false;
            for _ in 0..30 {
                let mut a = jtj.clone();
                for k in 0..nq {
                    a[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
                }
                let step = match a.lu().solve(&(-&jtr)) {
                    Some(s) => s,
                    None => {
                        lambda *= 10.0;
                        continue;
                    }
                };
                let qn: Vec<f64> = q.iter().zip(step.iter()).map(|(a, b)| a + b.clamp(-3.0, 3.0)).collect();
                let (rn_vec, _) = eval(&mut integrand, &qn);
                let rn_new = norm(&rn_vec);
                if rn_new.is_finite() && rn_new < rn {
                    q = qn;
                    r = rn_vec;
                    rn = rn_new;
                    lambda = (lambda / 5.0).max(1e-12);
                    improved = true;
                    break;
                }
                lambda *= 8.0;
            }
            if !improved {
                break;
            }
        }
        let (r, c) = eval(&mut integrand, &q);
        let residual = norm(&r);
        if residual > opts.tol.max(1e-9) * 1e3 {
            return Err(Error::AccuracyNotReached { achieved: residual, requested: opts.tol });
        }
        let images = v.iter().map(|vs| vs.pos).collect();
        let mut map = ScMap {
            integrand,
            c,
            images,
            left: problem.left,
            right: problem.right,
            residual,
            left_const: Complex64::new(0.0, 0.0),
            right_const: Complex64::new(0.0, 0.0),
            waypoints: Vec::new(),
            waypoint_x0: 0.0,
            waypoint_step: 4.0,
        };
        map.build_waypoints();
        Ok(map)
    }

    fn build_waypoints(&mut self) {
        let (lo, hi) = self.integrand.x_range();
        let x0 = lo - END_MARGIN;
        let x1 = hi + END_MARGIN;
        let steps = ((x1 - x0) / self.waypoint_step).ceil() as usize;
        let step = (x1 - x0) / steps as f64;
        let start = Complex64::new(x0, PI / 2.0);
        let mut val = self.eval_from_prevertex(start);
        let mut pts = vec![(start, val)];
        for k in 1..=steps {
            let a = pts[k - 1].0;
            let b = Complex64::new(x0 + step * k as f64, PI / 2.0);
            let nearest = self.nearest_prevertex(b);
            // re-anchor near prevertices to keep the march from drifting
            val = if (self.integrand.prevertices[nearest].w() - b).norm() < 2.0 * step {
                self.eval_from_prevertex(b)
            } else {
                val + self.c * self.integrand.integrate(a, b)
            };
            pts.push((b, val));
        }
        self.waypoint_x0 = x0;
        self.waypoint_step = step;
        self.waypoints = pts;
        let (_, kl) = self.integrand.left_asymptote();
        let (_, kr) = self.integrand.right_asymptote();
        let (wl, fl) = self.waypoints[0];
        let (wr, fr) = *self.waypoints.last().unwrap();
        self.left_const = match self.left {
            End::Channel { .. } => fl - self.c * kl * wl,
            End::Vertex { pos, .. } => pos,
        };
        self.right_const = match self.right {
            End::Channel { .. } => fr - self.c * kr * wr,
            End::Vertex { pos, .. } => pos,
        };
    }

    fn nearest_prevertex(&self, w: Complex64) -> usize {
        let mut best = 0;
        let mut bd = f64::INFINITY;
        for (j, p) in self.integrand.prevertices.iter().enumerate() {
            let d = (p.w() - w).norm();
            if d < bd {
                bd = d;
                best = j;
            }
        }
        best
    }

    fn eval_from_prevertex(&self, w: Complex64) -> Complex64 {
        let j = self.nearest_prevertex(w);
        let p = self.integrand.prevertices[j].w();
        self.images[j] + self.c * self.integrand.integrate_from(j, w - p)
    }

    pub fn x_range(&self) -> (f64, f64) {
        self.integrand.x_range()
    }

    /// Constant term of the asymptote at the left end: the channel offset
    /// (f(w) ≈ A + C·K₋·w) or the vertex position.
    pub fn left_constant(&self) -> Complex64 {
        self.left_const
    }

    pub fn right_constant(&self) -> Complex64 {
        self.right_const
    }

    /// Slope C·K of the channel asymptotes (left, right).
    pub fn channel_slopes(&self) -> (Complex64, Complex64) {
        (self.c * self.integrand.left_asymptote().1, self.c * self.integrand.right_asymptote().1)
    }

    /// f(w) for w in the closed strip.
    pub fn eval(&self, w: Complex64) -> Complex64 {
        let (lo, hi) = self.integrand.x_range();
        if w.re > hi + END_MARGIN {
            let (mu, k) = self.integrand.right_asymptote();
            return match self.right {
                End::Channel { .. } => self.right_const + self.c * k * w,
                End::Vertex { pos, .. } => pos + self.c * k * (mu * w).exp() / mu,
            };
        }
        if w.re < lo - END_MARGIN {
            let (mu, k) = self.integrand.left_asymptote();
            return match self.left {
                End::Channel { .. } => self.left_const + self.c * k * w,
                End::Vertex { pos, .. } => pos + self.c * k * (mu * w).exp() / mu,
            };
        }
        let j = self.nearest_prevertex(w);
        let dp = (self.integrand.prevertices[j].w() - w).norm();
        let idx = (((w.re - self.waypoint_x0) / self.waypoint_step).round() as isize)
            .clamp(0, self.waypoints.len() as isize - 1) as usize;
        let (wa, fa) = self.waypoints[idx];
        if (wa - w).norm() < dp {
            fa + self.c * self.integrand.integrate(wa, w)
        } else {
            self.eval_from_prevertex(w)
        }
    }

    pub fn derivative(&self, w: Complex64) -> Complex64 {
        self.c * self.integrand.g(w)
    }

    /// f(w_j + s), resolving points closer to w_j than its f64 spacing.
    pub fn eval_anchored(&self, j: usize, s: Complex64) -> Complex64 {
        self.images[j] + self.c * self.integrand.integrate_from(j, s)
    }

    pub fn derivative_anchored(&self, j: usize, s: Complex64) -> Complex64 {
        self.c * self.integrand.g_anchored(j, s)
    }

    /// Newton inversion from an initial guess; w is kept inside the strip.
    pub fn invert_from(&self, z: Complex64, guess: Complex64, tol: f64) -> Result<Complex64> {
        let mut w = Complex64::new(guess.re, guess.im.clamp(1e-12, PI - 1e-12));
        let mut err = (self.eval(w) - z).norm();
        for _ in 0..100 {
            if err <= tol {
                return Ok(w);
            }
            let d = self.derivative(w);
            let mut step = (self.eval(w) - z) / d;
            let mut accepted = false;
            for _ in 0..40 {
                let mut wn = w - step;
                wn.im = wn.im.clamp(0.0, PI);
                let en = (self.eval(wn) - z).norm();
                if en < err {
                    w = wn;
                    err = en;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if err <= tol * 1e3 {
            Ok(w)
        } else {
            Err(Error::AccuracyNotReached { achieved: err, requested: tol })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sinh_branches_are_continuous() {
        for side in [Side::Bottom, Side::Top] {
            let s = branch_sign(side);
            for y in [0.0, 0.3, 1.0, 1.5] {
                let y = s * y;
                for (x0, x1) in [(-20.0001, -19.9999), (-0.0001, 0.0001), (19.9999, 20.0001)] {
                    if y == 0.0 && x0 > -1.0 && x1 < 1.0 {
                        continue;
                    }
                    let a = log_sinh(Complex64::new(x0, y), side);
                    let b = log_sinh(Complex64::new(x1, y), side);
                    assert!((a - b).norm() < 1e-3, "{side:?} {x0} {y} {a} {b}");
                }
            }
        }
    }

    #[test]
    fn integrand_without_prevertices_is_exponential() {
        // V+ style half strip: one top vertex, left vertex end, right channel.
        let s = ScIntegrand::new(vec![Prevertex { x: 0.0, side: Side::Top, beta: -0.5 }], 0.25);
        let (mu, _) = s.left_asymptote();
        assert!((mu - 0.5).abs() < 1e-15);
        let (mu, _) = s.right_asymptote();
        assert!(mu.abs() < 1e-15);
    }
}

#[cfg(test)]
mod halfstrip_tests {
    use super::*;

    #[test]
    fn quarter_strip_matches_sinh() {
        let rho = 0.3;
        let problem = ScProblem {
            vertices: vec![VertexSpec { pos: Complex64::new(0.0, rho), alpha: 0.5, side: Side::Top }],
            left: End::Vertex { pos: Complex64::new(0.0, 0.0), alpha: 0.5 },
            right: End::Channel { width: Complex64::new(0.0, rho) },
        };
        let map = ScMap::solve(&problem, 0.25, &[0.0], SolveOptions::default()).unwrap();
        let k = PI / (2.0 * rho);
        let probe = |w: Complex64| (k * map.eval(w)).sinh().ln() - w / 2.0;
        let c0 = probe(Complex64::new(0.0, 1.0));
        for w in [
            Complex64::new(-3.0, 0.5),
            Complex64::new(2.0, 2.0),
            Complex64::new(10.0, 3.0),
            Complex64::new(45.0, 0.1),
            Complex64::new(-50.0, 1.0),
        ] {
            assert!((probe(w) - c0).norm() < 1e-10, "{w} {}", (probe(w) - c0).norm());
        }
        let z = Complex64::new(0.7, 0.1);
        let w = map.invert_from(z, Complex64::new(1.0, 1.0), 1e-13).unwrap();
        assert!((map.eval(w) - z).norm() < 1e-12);
    }
}
