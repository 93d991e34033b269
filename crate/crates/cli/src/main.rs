//! `dq`: verification suites, products and asymptotic sweeps from the command line.
//!
//! Exit codes: 0 all checks pass, 1 failed checks or a failed computation,
//! 2 configuration error. `DQ_THREADS` bounds the worker pool.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use config::{GridConfig, RunConfig};
use dq_core::products::{asymptotic_compare, kernel_constant, star, twist_parameter, ProductConfig};
use dq_core::transforms::io::{write_binary, write_csv};
use dq_core::verify::{product_inputs, run_suite, SuiteOptions, SuiteSummary, SUITES};
use dq_core::Report;

#[derive(Parser)]
#[command(name = "dq", version, about = "Star products on split solvable symplectic symmetric spaces")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and emit a JSON report
    Verify(Common),
    /// Compute the product of two functions and write the grid
    Star(Common),
    /// Sweep theta and write residuals of the asymptotic expansion
    Asym(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// suite name (repeatable) or "all"
    #[arg(long)]
    suite: Vec<String>,
    #[arg(long)]
    n: Option<usize>,
    /// one value or a comma-separated sweep
    #[arg(long)]
    theta: Option<String>,
    /// points per axis
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// pipeline | kernel | tracial_kernel
    #[arg(long)]
    route: Option<String>,
    /// one | tracial[:c] | borel:<file>
    #[arg(long)]
    multiplier: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

enum Failure {
    Config(anyhow::Error),
    Run(anyhow::Error),
}

fn merged(c: &Common) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if !c.suite.is_empty() {
        cfg.suites = Some(c.suite.clone());
    }
    if let Some(n) = c.n {
        cfg.n = Some(n);
    }
    if let Some(t) = &c.theta {
        cfg.apply_theta_flag(t)?;
    }
    if let Some(g) = c.grid {
        cfg.grid = Some(match cfg.grid {
            Some(GridConfig::Box { min, max, .. }) => GridConfig::Box { points: g, min, max },
            _ => GridConfig::Points(g),
        });
    }
    if let Some(s) = c.seed {
        cfg.seed = Some(s);
    }
    if let Some(r) = &c.route {
        cfg.route = Some(r.clone());
    }
    if let Some(m) = &c.multiplier {
        cfg.multiplier = Some(m.clone());
    }
    if let Some(o) = &c.out {
        cfg.out = Some(o.clone());
    }
    Ok(cfg)
}

fn product_config(cfg: &RunConfig) -> Result<ProductConfig> {
    let mut p = ProductConfig::new(cfg.params(), cfg.theta()?, cfg.grid_spec()?)?.with_tau(cfg.tau()?).with_route(cfg.route()?);
    if let Some(t) = cfg.boundary_tol {
        p = p.with_boundary_tol(t);
    }
    Ok(p)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn verify(c: &Common) -> std::result::Result<bool, Failure> {
    let cfg = merged(c).map_err(Failure::Config)?;
    let names = cfg.suites.clone().unwrap_or_else(|| vec!["all".into()]);
    let list: Vec<String> = if names.iter().any(|s| s == "all") { SUITES.iter().map(|s| s.to_string()).collect() } else { names };
    if let Some(bad) = list.iter().find(|s| !SUITES.contains(&s.as_str())) {
        return Err(Failure::Config(anyhow::anyhow!("unknown suite {bad:?}; known: {}", SUITES.join(", "))));
    }
    let opts = (|| -> Result<SuiteOptions> {
        Ok(SuiteOptions {
            n: cfg.n(),
            theta: cfg.theta()?,
            grid: cfg.grid_points(),
            seed: cfg.seed.unwrap_or(7),
            tau: cfg.tau()?,
            route: cfg.route()?,
            samples: cfg.samples.unwrap_or(1000),
        })
    })()
    .map_err(Failure::Config)?;
    let mut report = Report::new();
    for s in &list {
        match run_suite(s, &opts) {
            Ok(r) => report.extend(r),
            Err(e) => {
                report.flag(&format!("{s}.error"), "suite completed", false).with_note(e.to_string());
            }
        }
    }
    report.sort();
    let summary = SuiteSummary { suites: list, passed: report.all_passed(), report };
    let text = serde_json::to_string_pretty(&summary).map_err(|e| Failure::Run(e.into()))?;
    write_out(cfg.out.as_deref(), &text).map_err(Failure::Run)?;
    Ok(summary.passed)
}

fn star_cmd(c: &Common) -> std::result::Result<bool, Failure> {
    let cfg = merged(c).map_err(Failure::Config)?;
    let pc = product_config(&cfg).map_err(Failure::Config)?;
    let out = cfg.out.clone().ok_or_else(|| Failure::Config(anyhow::anyhow!("star needs --out")))?;
    let fs = if cfg.functions.is_empty() {
        product_inputs(&pc.grid).map_err(|e| Failure::Run(e.into()))?[..2].to_vec()
    } else {
        cfg.functions(&pc.grid).map_err(Failure::Config)?
    };
    if fs.len() != 2 {
        return Err(Failure::Config(anyhow::anyhow!("star needs exactly two function specs, got {}", fs.len())));
    }
    let w = star(&fs[0], &fs[1], &pc).map_err(|e| Failure::Run(e.into()))?;
    let run = || -> Result<()> {
        let file = BufWriter::new(File::create(&out).with_context(|| format!("creating {}", out.display()))?);
        if out.extension().is_some_and(|e| e == "bin") {
            write_binary(&w, file)?;
        } else {
            write_csv(&w, file)?;
        }
        let constant = match pc.route {
            dq_core::products::Route::Pipeline => None,
            _ => Some(pc.kernel.constant.unwrap_or_else(|| kernel_constant(pc.params.n))),
        };
        let side = json!({
            "route": pc.route,
            "n": pc.params.n,
            "theta": pc.theta,
            "twist_parameter": twist_parameter(pc.theta),
            "multiplier": pc.tau.name(),
            "kernel_constant": constant,
            "kernel_refine": pc.kernel.refine,
            "boundary_tol": pc.boundary_tol,
        });
        let mut p = out.clone().into_os_string();
        p.push(".json");
        std::fs::write(PathBuf::from(p), serde_json::to_string_pretty(&side)?)?;
        Ok(())
    };
    run().map_err(Failure::Run)?;
    Ok(true)
}

fn asym_cmd(c: &Common) -> std::result::Result<bool, Failure> {
    let cfg = merged(c).map_err(Failure::Config)?;
    let pc = product_config(&cfg).map_err(Failure::Config)?;
    let sweep = cfg.theta_sweep.clone().unwrap_or_else(|| vec![0.2, 0.1, 0.05, 0.025]);
    if sweep.len() < 3 {
        return Err(Failure::Config(anyhow::anyhow!("theta sweep needs at least three values")));
    }
    let order = cfg.order.unwrap_or(if matches!(pc.tau, dq_core::multipliers::Tau::One) { 2 } else { 1 });
    let fs = if cfg.functions.is_empty() {
        product_inputs(&pc.grid).map_err(|e| Failure::Run(e.into()))?[..2].to_vec()
    } else {
        cfg.functions(&pc.grid).map_err(Failure::Config)?
    };
    if fs.len() != 2 {
        return Err(Failure::Config(anyhow::anyhow!("asym needs exactly two function specs")));
    }
    let res = asymptotic_compare(&pc, &fs[0], &fs[1], order, &sweep).map_err(|e| match e {
        dq_core::Error::InvalidArgument(_) => Failure::Config(e.into()),
        _ => Failure::Run(e.into()),
    })?;
    let mut text = String::from("theta,order,residual,fitted_slope,extrapolated_slope\n");
    for r in &res.rows {
        text.push_str(&format!("{:e},{},{:e},{:e},{:e}\n", r.theta, r.order, r.residual, res.slopes[r.order], res.extrapolated[r.order]));
    }
    let run = || -> Result<()> {
        match &cfg.out {
            Some(p) => {
                let mut f = BufWriter::new(File::create(p)?);
                f.write_all(text.as_bytes())?;
            }
            None => print!("{text}"),
        }
        Ok(())
    };
    run().map_err(Failure::Run)?;
    Ok(res.report.all_passed())
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("DQ_THREADS") {
        let n: usize = v.parse().with_context(|| format!("DQ_THREADS={v:?} is not a positive integer"))?;
        if n == 0 {
            bail!("DQ_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = init_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    let result = match &cli.cmd {
        Command::Verify(c) => verify(c),
        Command::Star(c) => star_cmd(c),
        Command::Asym(c) => asym_cmd(c),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("config error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
