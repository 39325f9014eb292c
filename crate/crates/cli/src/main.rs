use anyhow::{bail, Context, Result};
use bouquet::contraction::{hook_constants_check, small_c, sum_constant_c, M_sum, C2, C3};
use bouquet::tractmodel::config::parse_key_values;
use bouquet::tractmodel::trace::{alpha_sequence, trace_hair};
use bouquet::tractmodel::{build_model, ModelSpec};
use bouquet_cli::render::{render, with_threads, RenderConfig};
use bouquet_cli::suites::{run_suite, SuiteOptions, SUITES};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "bouquet", version, about = "Tract models, hairs and head-start checks in logarithmic coordinates")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "BOUQUET_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Model name: exp, hook or hook_strips.
    #[arg(long)]
    model: Option<String>,
    /// Config file of key = value lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra key=value overrides.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Escape-time image (binary PPM) plus JSON stats.
    Render {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "bouquet.ppm")]
        out: PathBuf,
        /// Where to write the stats JSON (stdout if absent).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Trace the hair of an external address.
    Trace {
        #[command(flatten)]
        model: ModelArgs,
        /// e.g. "0 | 0" or "T0 T1 | T0".
        #[arg(long)]
        address: String,
        #[arg(long, default_value_t = 60)]
        depth: usize,
        #[arg(long, default_value_t = 32)]
        samples: usize,
        /// Largest potential; potentials run from the base point up to it.
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite; exit code 0 iff every check passed.
    Verify {
        /// Suite id (or "all").
        suite_id: Option<String>,
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        model: Option<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the contraction constants and the α sequence of a model.
    Constants {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 8)]
        n: u32,
    },
}

fn collect_overrides(args: &ModelArgs) -> Result<BTreeMap<String, String>> {
    let mut map = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_key_values(&text)?
        }
        None => BTreeMap::new(),
    };
    if let Some(m) = &args.model {
        map.insert("model".into(), m.clone());
    }
    for kv in &args.set {
        let Some((k, v)) = kv.split_once('=') else { bail!("--set expects KEY=VALUE, got '{kv}'") };
        map.insert(k.trim().into(), v.trim().into());
    }
    Ok(map)
}

fn model_spec(args: &ModelArgs) -> Result<ModelSpec> {
    Ok(ModelSpec::from_map(&collect_overrides(args)?)?)
}

fn write_json(path: Option<&PathBuf>, value: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match path {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Render { model, out, report } => {
            let map = collect_overrides(&model)?;
            let mut cfg = RenderConfig::canonical(out);
            cfg.apply(&map)?;
            let stats = render(&cfg)?;
            write_json(report.as_ref(), &json!({ "config": cfg, "stats": stats }))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Trace { model, address, depth, samples, t_max, out } => {
            let m = build_model(&model_spec(&model)?)?;
            let s = m.parse_address(&address)?;
            if samples < 2 {
                bail!("need at least two samples");
            }
            let lo = m.base_point;
            let hi = t_max.unwrap_or(lo + 10.0);
            let ts: Vec<f64> = (0..samples).map(|k| lo + (hi - lo) * k as f64 / (samples - 1) as f64).collect();
            let hair = trace_hair(&m, &s, &ts, depth)?;
            let endpoint = bouquet::tractmodel::trace::trace_point(&m, &s, depth)?;
            write_json(out.as_ref(), &json!({ "model": m.spec, "endpoint": endpoint, "hair": hair }))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { suite_id, suite, model, seed, report } => {
            let id = match (suite_id, suite) {
                (Some(a), Some(b)) if a != b => bail!("suite given twice: '{a}' and '{b}'"),
                (Some(a), _) | (None, Some(a)) => a,
                (None, None) => bail!("no suite given; known suites: {}, all", SUITES.join(", ")),
            };
            let opts = SuiteOptions { model: model.as_deref().map(ModelSpec::named).transpose()?, seed };
            let ids: Vec<&str> = if id == "all" { SUITES.to_vec() } else { vec![id.as_str()] };
            let mut reports = Vec::new();
            for s in ids {
                reports.push(run_suite(s, &opts)?);
            }
            let passed = reports.iter().all(|r| r.passed);
            for r in &reports {
                eprintln!("{} {}", if r.passed { "PASS" } else { "FAIL" }, r.suite);
            }
            let value = if reports.len() == 1 { serde_json::to_value(&reports[0])? } else { serde_json::to_value(&reports)? };
            write_json(report.as_ref(), &value)?;
            Ok(if passed { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Constants { model, n } => {
            let m = build_model(&model_spec(&model)?)?;
            let alphas = (0..=n).map(|k| alpha_sequence(&m, k)).collect::<bouquet::Result<Vec<_>>>()?;
            let m_n: Vec<_> = (0..=n).map(M_sum).collect();
            write_json(
                None,
                &json!({
                    "model": m.spec,
                    "c": small_c(),
                    "C": sum_constant_c(),
                    "C2": C2,
                    "C3": C3,
                    "hook_constants": hook_constants_check(C2, C3, 1000),
                    "M": m_n,
                    "alpha": alphas,
                    "build": m.report,
                }),
            )?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads;
    let result = match threads {
        Some(0) => Err(anyhow::anyhow!("--threads must be positive")),
        Some(t) => with_threads(t, || run(cli)).and_then(|r| r),
        None => run(cli),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
