//! Verification suites behind `bouquet verify`, one per acceptance check.

use crate::render::{render_image, with_threads, RenderConfig};
use anyhow::{bail, Result};
use bouquet::bouquet::{brush_convergence_probe, detect_bad_pair, hook_probes, neighbor_at, Window};
use bouquet::conformal::NumericMap;
use bouquet::contraction::{hook_constants_check, sum_constant_c, E_eval, L_eval, M_sum, C2, C3};
use bouquet::headstart::{hook_phi, verify_uniform_sampled, AddressSampler, PhiStep, PhiVariant};
use bouquet::hyperbolic::ahlfors_lower_bound;
use bouquet::tractmodel::trace::{preimage_constant, preimage_proximity, trace_point};
use bouquet::tractmodel::{build_model, ExternalAddress, ModelSpec, TractRef};
use bouquet::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::Instant;

pub const SCHEMA: &str = "bouquet.report/1";

/// Escaping-pixel fraction of the canonical render, recorded at first run.
pub const RENDER_SNAPSHOT: f64 = 0.135092;

pub const SUITES: [&str; 12] = [
    "contraction",
    "sum",
    "hook_constants",
    "endpoint",
    "conjugacy",
    "preimage",
    "headstart",
    "conformal",
    "badpair",
    "brush",
    "render",
    "ahlfors",
];

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, value: f64, tolerance: f64, passed: bool, detail: impl Into<String>) -> Check {
    Check { name: name.into(), value, tolerance, passed, detail: detail.into() }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub schema: String,
    pub suite: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub data: Value,
}

#[derive(Clone, Debug, Default)]
pub struct SuiteOptions {
    /// Overrides the suite's default model where the suite takes one.
    pub model: Option<ModelSpec>,
    pub seed: u64,
}

fn report(suite: &str, checks: Vec<Check>, data: Value) -> SuiteReport {
    SuiteReport { schema: SCHEMA.into(), suite: suite.into(), passed: checks.iter().all(|c| c.passed), checks, data }
}

pub fn run_suite(suite: &str, opts: &SuiteOptions) -> Result<SuiteReport> {
    match suite {
        "contraction" => contraction(),
        "sum" => sum(),
        "hook_constants" => hook_constants(),
        "endpoint" => endpoint(),
        "conjugacy" => conjugacy(opts),
        "preimage" => preimage(opts),
        "headstart" => headstart(opts),
        "conformal" => conformal(opts),
        "badpair" => badpair(opts),
        "brush" => brush(opts),
        "render" => render_suite(),
        "ahlfors" => ahlfors(),
        other => bail!("unknown suite '{other}'; known suites: {}", SUITES.join(", ")),
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64)).collect()
}

fn contraction() -> Result<SuiteReport> {
    let start = Instant::now();
    let grid = log_grid(1e-3, 1e9, 10_000);
    let worst = grid.iter().map(|&t| (E_eval(L_eval(t)) - t).abs() / t.max(1.0)).fold(0.0, f64::max);
    let increasing = grid.windows(2).all(|w| L_eval(w[1]) > L_eval(w[0]));
    let secs = start.elapsed().as_secs_f64();
    Ok(report(
        "contraction",
        vec![
            check("E(L(t)) = t", worst, 1e-9, worst <= 1e-9, "max relative error on 10^4 log-spaced t in [1e-3, 1e9]"),
            check("L increasing", increasing as u8 as f64, 1.0, increasing, "strict on the grid"),
            check("runtime", secs, 1.0, secs < 1.0, "seconds"),
        ],
        json!({ "grid_points": grid.len() }),
    ))
}

fn sum() -> Result<SuiteReport> {
    let start = Instant::now();
    let c = sum_constant_c();
    let mut worst_ratio: f64 = 0.0;
    let mut worst_tail: f64 = 0.0;
    let mut rows = Vec::new();
    for n in 0..=64 {
        let m = M_sum(n);
        worst_ratio = worst_ratio.max((m.value + m.tail_bound) / (c * (n + 1) as f64));
        worst_tail = worst_tail.max(m.tail_bound);
        rows.push(json!({ "n": n, "m": m.value, "tail": m.tail_bound }));
    }
    let secs = start.elapsed().as_secs_f64();
    Ok(report(
        "sum",
        vec![
            check("M_n + tail < C(n+1)", worst_ratio, 1.0, worst_ratio < 1.0, format!("max ratio over n <= 64, C = {c}")),
            check("tail bound", worst_tail, 1e-9, worst_tail <= 1e-9, "largest truncation bound"),
            check("runtime", secs, 1.0, secs < 1.0, "seconds"),
        ],
        json!({ "C": c, "rows": rows }),
    ))
}

fn hook_constants() -> Result<SuiteReport> {
    let start = Instant::now();
    let good = hook_constants_check(C2, C3, 1000);
    let bad = hook_constants_check(450.0, 450.0, 10);
    let bad_at_zero = !bad.passed && bad.failure.map_or(false, |(_, n)| n == 0);
    let secs = start.elapsed().as_secs_f64();
    Ok(report(
        "hook_constants",
        vec![
            check("(1350, 450) passes", good.passed as u8 as f64, 1.0, good.passed, good.certificate_detail.clone()),
            check(
                "eventual certificate",
                good.eventual_certificate as u8 as f64,
                1.0,
                good.eventual_certificate,
                "margins at n_max imply all larger n",
            ),
            check("(450, 450) fails at n = 0", bad_at_zero as u8 as f64, 1.0, bad_at_zero, format!("{:?}", bad.failure)),
            check("runtime", secs, 1.0, secs < 1.0, "seconds"),
        ],
        json!({ "canonical": good, "regression": bad }),
    ))
}

/// The fixed point of w ↦ ln(w + ln 4) by plain iteration.
pub fn exp_endpoint_oracle() -> f64 {
    let mut w: f64 = 1.0;
    for _ in 0..200 {
        w = (w + 4f64.ln()).ln();
    }
    w
}

fn endpoint() -> Result<SuiteReport> {
    let start = Instant::now();
    let model = build_model(&ModelSpec::exp_default())?;
    let s = ExternalAddress::constant(TractRef::new(0, 0));
    let p = trace_point(&model, &s, 60)?;
    let oracle = exp_endpoint_oracle();
    let err = (p.z - Complex64::new(oracle, 0.0)).norm();
    let secs = start.elapsed().as_secs_f64();
    Ok(report(
        "endpoint",
        vec![
            check("trace vs fixed-point oracle", err, 1e-9, err <= 1e-9, format!("traced {} oracle {oracle}", p.z)),
            check("runtime", secs, 1.0, secs < 1.0, "seconds"),
        ],
        json!({ "traced": p, "oracle": oracle }),
    ))
}

/// A random eventually periodic address over `bases` base tracts.
pub fn random_address(rng: &mut ChaCha8Rng, bases: usize) -> ExternalAddress {
    let letter = |rng: &mut ChaCha8Rng| TractRef::new(rng.random_range(0..bases), rng.random_range(-3..=3));
    let prefix = (0..rng.random_range(0..6)).map(|_| letter(rng)).collect();
    let cycle = (0..rng.random_range(1..4)).map(|_| letter(rng)).collect();
    ExternalAddress { prefix, cycle }
}

fn conjugacy(opts: &SuiteOptions) -> Result<SuiteReport> {
    let model = build_model(opts.model.as_ref().unwrap_or(&ModelSpec::exp_default()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let s = random_address(&mut rng, model.tract_count());
        let z = trace_point(&model, &s, 40)?.z;
        let w = trace_point(&model, &s.shift(), 39)?.z;
        let (fz, _) = model.forward(z)?;
        worst = worst.max((fz - w).norm());
    }
    Ok(report(
        "conjugacy",
        vec![check("|F(trace(s,40)) - trace(σs,39)|", worst, 1e-6, worst <= 1e-6, "max over 100 random addresses")],
        json!({ "addresses": 100, "depth": 40 }),
    ))
}

fn preimage(opts: &SuiteOptions) -> Result<SuiteReport> {
    let model = build_model(&ModelSpec::exp_default())?;
    let threshold = 4f64.ln();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let d = preimage_constant();
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    while pairs < 10_000 {
        let y = rng.random_range(-1.5..1.5f64);
        let x = (threshold / y.cos()).ln() + rng.random_range(1e-9..6.0);
        let z = Complex64::new(x, y);
        let fz = model.forward(z)?.0;
        if !(fz.re > 1.0) {
            continue;
        }
        let w = Complex64::new(rng.random_range(1.0..fz.re), rng.random_range(-100.0..100.0));
        let (_, dist) = preimage_proximity(&model, TractRef::new(0, 0), z, w)?;
        worst = worst.max(dist);
        pairs += 1;
    }
    Ok(report(
        "preimage",
        vec![check("dist(F⁻¹(w + 2πim), z) <= 2π² + π", worst, d, worst <= d, "max over 10^4 random pairs")],
        json!({ "pairs": pairs, "D": d, "max_distance": worst }),
    ))
}

fn headstart(opts: &SuiteOptions) -> Result<SuiteReport> {
    let spec = opts.model.clone().unwrap_or(ModelSpec::exp_default());
    let model = build_model(&spec)?;
    let (phi, sampler, pairs) = match spec {
        ModelSpec::Exp { .. } => (PhiStep::linear(2.0, 0.0)?, AddressSampler::exp_default(), 1000),
        ModelSpec::Hook { n_max, .. } => (hook_phi(PhiVariant::Hook, n_max)?, AddressSampler::hook_default(), 200),
        ModelSpec::HookStrips { n_max, .. } => (hook_phi(PhiVariant::Strips, n_max)?, AddressSampler::hook_default(), 200),
    };
    let r = verify_uniform_sampled(&model, &phi, &sampler, pairs, 50, opts.seed)?;
    let mut checks = vec![
        check("violations of condition (i)", r.violations.len() as f64, 0.0, r.violations.is_empty(), "both orderings"),
        check("both directions witnessed", r.both_directions as f64, 0.0, r.both_directions == 0, "antisymmetry of the order"),
    ];
    if matches!(spec, ModelSpec::Exp { .. }) {
        checks.push(check(
            "separated within depth",
            (r.pairs - r.inconclusive) as f64,
            r.pairs as f64,
            r.inconclusive == 0 && r.skipped == 0,
            format!("max separation time {}", r.max_separation),
        ));
    }
    Ok(report("headstart", checks, serde_json::to_value(&r)?))
}

fn conformal(opts: &SuiteOptions) -> Result<SuiteReport> {
    let start = Instant::now();
    let model = build_model(opts.model.as_ref().unwrap_or(&ModelSpec::hook_default()))?;
    let bound = 1.05 / (2.0 * 2f64.sqrt());
    let mut checks = Vec::new();
    let mut maps = Vec::new();
    let mut n = 1;
    while let Some(m) = model.hooked(n) {
        let r = &m.report;
        checks.push(check(&format!("T{n} boundary Hausdorff"), r.hausdorff, 1e-3, r.hausdorff <= 1e-3, "sampled window"));
        checks.push(check(&format!("T{n} sup |φ'|"), r.derivative_max, bound, r.derivative_max <= bound, "on |Im s| <= π/2"));
        maps.push(serde_json::to_value(r)?);
        n += 1;
    }
    let Some(v) = model.vmap() else { bail!("model {} has no V map", model.spec.name()) };
    checks.push(check("V boundary accuracy", v.boundary_accuracy(), 1e-3, v.boundary_accuracy() <= 1e-3, ""));
    let chain = v.distance_chain()?;
    let ok = !chain.is_empty() && chain.iter().all(|c| c.passed);
    checks.push(check(
        "distance chain",
        chain.len() as f64,
        0.0,
        ok,
        "log β̃_j <= dist_V(1, x_{j+1}) <= 8 log β̃_{j+1} at every resolved j",
    ));
    let secs = start.elapsed().as_secs_f64();
    checks.push(check("runtime", secs, 120.0, secs <= 120.0, "seconds, including the model build"));
    Ok(report("conformal", checks, json!({ "maps": maps, "chain": chain })))
}

fn badpair(opts: &SuiteOptions) -> Result<SuiteReport> {
    let start = Instant::now();
    let model = build_model(opts.model.as_ref().unwrap_or(&ModelSpec::hook_default()))?;
    let (a, b) = match model.sequences() {
        Some(s) => (s.a[0].value(), s.b[0].value()),
        None => (1.0, 1.5),
    };
    let probes = if model.sequences().is_some() { hook_probes(&model) } else { bouquet::bouquet::exp_probes(5) };
    let target = ExternalAddress::constant(TractRef::new(0, 0));
    let search = detect_bad_pair(&model, &target, Complex64::new(a, 0.0), Complex64::new(b, 0.0), &probes)?;
    let secs = start.elapsed().as_secs_f64();
    let mut checks = vec![check(
        "witness emitted",
        search.witness.as_ref().map_or(0.0, |w| w.consecutive as f64),
        3.0,
        search.witness.is_some(),
        "consecutive k with unambiguous reversal",
    )];
    if let Some(w) = &search.witness {
        let margins_ok = w.entries.iter().all(|e| e.margin.ln() >= 2f64.ln() + e.ln_position_error);
        checks.push(check("margins >= 2x error", margins_ok as u8 as f64, 1.0, margins_ok, "every k"));
        checks.push(check("distances decrease", w.decreasing as u8 as f64, 1.0, w.decreasing, "|ζ_k - a| and |ω_k - b|"));
    }
    checks.push(check("runtime", secs, 300.0, secs <= 300.0, "seconds, including the model build"));
    Ok(report("badpair", checks, serde_json::to_value(&search)?))
}

fn brush(opts: &SuiteOptions) -> Result<SuiteReport> {
    let model = build_model(opts.model.as_ref().unwrap_or(&ModelSpec::exp_default()))?;
    let s = ExternalAddress::constant(TractRef::new(0, 0));
    let window = Window { t_min: model.base_point, t_max: model.base_point + 19.0, samples: 100, depth: 24 };
    let r = brush_convergence_probe(&model, &s, &neighbor_at, 5..=20, window)?;
    let ok = r.entries.iter().filter_map(|e| e.ratio).all(|x| x <= 0.75);
    Ok(report(
        "brush",
        vec![check("decay ratio per agreement increment", r.max_ratio, 0.75, ok, "N = 5..20")],
        serde_json::to_value(&r)?,
    ))
}

fn render_suite() -> Result<SuiteReport> {
    let cfg = RenderConfig::canonical(PathBuf::from("canonical.ppm"));
    let model = build_model(&cfg.model)?;
    let (a, stats) = with_threads(1, || render_image(&cfg, &model))??;
    let (b, _) = with_threads(1, || render_image(&cfg, &model))??;
    let (c, _) = with_threads(8, || render_image(&cfg, &model))??;
    let same_runs = a.rgb == b.rgb;
    let same_threads = a.rgb == c.rgb;
    let dev = (stats.escaping_fraction - RENDER_SNAPSHOT).abs() / RENDER_SNAPSHOT;
    Ok(report(
        "render",
        vec![
            check("identical bytes across runs", same_runs as u8 as f64, 1.0, same_runs, ""),
            check("identical bytes for 1 and 8 threads", same_threads as u8 as f64, 1.0, same_threads, ""),
            check(
                "escaping fraction snapshot",
                dev,
                0.005,
                dev <= 0.005,
                format!("fraction {} vs snapshot {RENDER_SNAPSHOT}, relative deviation", stats.escaping_fraction),
            ),
        ],
        serde_json::to_value(&stats)?,
    ))
}

fn ahlfors() -> Result<SuiteReport> {
    let mut worst: f64 = 0.0;
    for (t, t1) in [(0.0, 10.0), (1.0, 50.0), (-3.0, 200.0), (2.5, 7.5)] {
        let b = ahlfors_lower_bound(|_| PI, t, t1)?;
        let exact = (t1 - t) / PI - 2.0 * 32f64.ln();
        worst = worst.max((b.bound - exact).abs());
    }
    Ok(report(
        "ahlfors",
        vec![check("constant width π", worst, 1e-9, worst <= 1e-9, "(t' - t)/π - 2 ln 32")],
        json!({}),
    ))
}
