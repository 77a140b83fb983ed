use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use sphwave::kernel::residue_diagnostics;
use sphwave::solver::config::{format_source, parse_probe, ProblemConfig};
use sphwave::solver::demo::{scattering_demo, write_demo, DemoConfig};
use sphwave::solver::sources::exterior_sources;
use sphwave::solver::sweep::{convergence_sweep, SweepAxis};
use sphwave::solver::{solve_with_cache, SolveOutput};
use sphwave::zeros::{validate_zero_table, zeros};
use sphwave::{BoundaryKind, ScatteringProblem, ZeroCache, ZeroTable};

#[derive(Parser)]
#[command(
    name = "sphwave",
    version,
    about = "Exterior wave solver on the unit sphere with exact nonreflecting kernels"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and report the error against the exact field.
    Solve(SolveArgs),
    /// Convergence sweep over the truncation order or the time points.
    Sweep(SweepArgs),
    /// Print the poles of one order.
    Zeros(ZerosArgs),
    /// Residue growth and cancellation diagnostics.
    Diagnostics(DiagArgs),
    /// Scattering demo: north-pole traces and an annulus snapshot.
    Demo(DemoArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Output {
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ProblemArgs {
    /// Key-value problem file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    bc: Option<BoundaryKind>,
    /// Truncation order N.
    #[arg(long)]
    order: Option<usize>,
    /// Collocation points per step p.
    #[arg(long)]
    ptime: Option<usize>,
    /// Total time points N_T (a multiple of p).
    #[arg(long)]
    steps: Option<usize>,
    /// Target sphere radius.
    #[arg(long)]
    radius: Option<f64>,
    /// Final time.
    #[arg(long)]
    time: Option<f64>,
    /// Grid override, NTHETAxNPHI.
    #[arg(long)]
    grid: Option<String>,
    /// CSV of boundary samples (t,theta,phi,value).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Zero cache directory.
    #[arg(long)]
    cache: Option<PathBuf>,
}

impl ProblemArgs {
    fn config(&self) -> Result<ProblemConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                ProblemConfig::load(p).with_context(|| format!("reading {}", p.display()))?
            }
            None => ProblemConfig::default(),
        };
        if let Some(v) = self.bc {
            cfg.bc = Some(v);
        }
        if let Some(v) = self.order {
            cfg.order = Some(v);
        }
        if let Some(v) = self.ptime {
            cfg.ptime = Some(v);
        }
        if let Some(v) = self.steps {
            cfg.steps = Some(v);
        }
        if let Some(v) = self.radius {
            cfg.radius = Some(v);
        }
        if let Some(v) = self.time {
            cfg.time = Some(v);
        }
        if let Some(v) = &self.grid {
            cfg.set("grid", v)?;
        }
        if let Some(v) = &self.data {
            cfg.data = Some(v.clone());
        }
        Ok(cfg)
    }

    fn zero_cache(&self) -> Option<ZeroCache> {
        self.cache.as_ref().map(ZeroCache::new)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Record a time trace at THETA,PHI (repeatable).
    #[arg(long)]
    probe: Vec<String>,
    /// Write the final field on the target grid to this CSV.
    #[arg(long)]
    field: Option<PathBuf>,
    /// Write probe traces to this CSV.
    #[arg(long)]
    traces: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// N or N_T.
    #[arg(long)]
    axis: SweepAxis,
    /// Ascending values, e.g. `16,24,32` or `50..400:50`.
    #[arg(long)]
    values: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ZerosArgs {
    #[arg(long, default_value = "dirichlet")]
    bc: BoundaryKind,
    #[arg(long)]
    order: usize,
    #[arg(long)]
    cache: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct DiagArgs {
    #[arg(long, default_value_t = 2.0)]
    radius: f64,
    /// Orders, e.g. `1..60` or `10,20,40`.
    #[arg(long, default_value = "1..60")]
    orders: String,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, default_value = "dirichlet")]
    bc: BoundaryKind,
    #[arg(long, default_value_t = 40)]
    order: usize,
    #[arg(long, default_value_t = 10)]
    ptime: usize,
    /// Steps per unit of boundary time.
    #[arg(long, default_value_t = 50.0)]
    rate: f64,
    /// Carrier frequency of both exterior sources.
    #[arg(long, default_value_t = 20.0)]
    k: f64,
    /// Radius of the far trace and the time it ends.
    #[arg(long, default_value_t = 100.0)]
    radius: f64,
    #[arg(long, default_value_t = 103.0)]
    time: f64,
    #[arg(long, default_value_t = 4.0)]
    snapshot: f64,
    /// Directory for the plot files.
    #[arg(long, default_value = "demo")]
    out: PathBuf,
}

/// Parse `a,b,c`, `a..b` or `a..b:step` (inclusive).
fn parse_list(v: &str) -> Result<Vec<usize>> {
    if let Some((a, rest)) = v.split_once("..") {
        let (b, step) = match rest.split_once(':') {
            Some((b, s)) => (b, s.trim().parse()?),
            None => (rest, 1usize),
        };
        let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
        if step == 0 || a > b {
            bail!("bad range `{v}`");
        }
        return Ok((a..=b).step_by(step).collect());
    }
    v.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .with_context(|| format!("bad list entry `{s}`"))
        })
        .collect()
}

fn writer(out: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn header(w: &mut dyn Write, config: &[(String, String)]) -> io::Result<()> {
    writeln!(w, "# version={}", sphwave::VERSION)?;
    for (k, v) in config {
        writeln!(w, "# {k}={v}")?;
    }
    Ok(())
}

fn config_json(config: &[(String, String)]) -> serde_json::Value {
    let mut m = serde_json::Map::new();
    for (k, v) in config {
        match m.get_mut(k) {
            Some(serde_json::Value::Array(a)) => a.push(v.clone().into()),
            Some(prev) => *prev = serde_json::json!([prev.clone(), v]),
            None => {
                m.insert(k.clone(), v.clone().into());
            }
        }
    }
    serde_json::Value::Object(m)
}

fn write_field(path: &Path, problem: &ScatteringProblem, out: &SolveOutput) -> Result<()> {
    let grid = problem.make_grid()?;
    let mut w = BufWriter::new(File::create(path)?);
    header(&mut w, &problem.describe())?;
    writeln!(w, "theta,phi,value,exact")?;
    for i in 0..grid.n_theta {
        for k in 0..grid.n_phi {
            let j = i * grid.n_phi + k;
            let exact = out
                .exact
                .as_ref()
                .map_or(String::new(), |e| format!("{:.12e}", e[j]));
            writeln!(
                w,
                "{:.12e},{:.12e},{:.12e},{exact}",
                grid.theta[i], grid.phi[k], out.field[j]
            )?;
        }
    }
    Ok(())
}

fn write_traces(path: &Path, problem: &ScatteringProblem, out: &SolveOutput) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    header(&mut w, &problem.describe())?;
    writeln!(w, "theta,phi,t,value")?;
    for tr in &out.probes {
        for (t, v) in tr.times.iter().zip(&tr.values) {
            writeln!(w, "{},{},{t:.12e},{v:.12e}", tr.probe.theta, tr.probe.phi)?;
        }
    }
    Ok(())
}

fn run_solve(args: SolveArgs) -> Result<()> {
    let mut cfg = args.problem.config()?;
    for p in &args.probe {
        cfg.probes.push(parse_probe(p)?);
    }
    let problem = cfg.to_problem()?;
    let cache = args.problem.zero_cache();
    let out = solve_with_cache(&problem, cache.as_ref())?;
    if let Some(path) = &args.field {
        write_field(path, &problem, &out)?;
    }
    if let Some(path) = &args.traces {
        write_traces(path, &problem, &out)?;
    }
    let config = problem.describe();
    let mut w = writer(&args.output.out)?;
    match args.output.format {
        Format::Csv => {
            header(&mut w, &config)?;
            writeln!(w, "quantity,value")?;
            if let Some(e) = out.rel_l2_error {
                writeln!(w, "rel_l2_error,{e:.6e}")?;
            }
            let s = &out.stats;
            let rows = [
                ("dt", out.dt),
                ("zeros_seconds", s.zeros_seconds),
                ("plan_seconds", s.plan_seconds),
                ("analysis_seconds", s.analysis_seconds),
                ("march_seconds", s.march_seconds),
                ("total_seconds", s.total_seconds),
                ("zonal_imaginary_ratio", s.zonal_imaginary_ratio),
            ];
            for (k, v) in rows {
                writeln!(w, "{k},{v:.6e}")?;
            }
        }
        Format::Json => {
            let v = serde_json::json!({
                "version": sphwave::VERSION,
                "config": config_json(&config),
                "rel_l2_error": out.rel_l2_error,
                "dt": out.dt,
                "grid": out.grid,
                "stats": out.stats,
                "probes": out.probes,
            });
            writeln!(w, "{}", serde_json::to_string_pretty(&v)?)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn run_sweep(args: SweepArgs) -> Result<()> {
    let problem = args.problem.config()?.to_problem()?;
    let values = parse_list(&args.values)?;
    let table = convergence_sweep(&problem, args.axis, &values)?;
    let mut w = writer(&args.output.out)?;
    match args.output.format {
        Format::Csv => table.write_csv(&mut w)?,
        Format::Json => writeln!(w, "{}", serde_json::to_string_pretty(&table.to_json())?)?,
    }
    w.flush()?;
    Ok(())
}

fn run_zeros(args: ZerosArgs) -> Result<()> {
    let table: ZeroTable = match &args.cache {
        Some(dir) => ZeroCache::new(dir).get(args.bc, args.order)?,
        None => zeros(args.bc, args.order)?,
    };
    let report = validate_zero_table(&table);
    let config = vec![
        ("bc".to_string(), args.bc.to_string()),
        ("order".to_string(), args.order.to_string()),
    ];
    let mut w = writer(&args.output.out)?;
    match args.output.format {
        Format::Csv => {
            header(&mut w, &config)?;
            writeln!(w, "# valid={}", report.ok())?;
            writeln!(w, "j,re,im,residual,iterations")?;
            for (j, z) in table.zeros.iter().enumerate() {
                let it = table.iterations.get(j).copied().unwrap_or(0);
                writeln!(
                    w,
                    "{j},{:.17e},{:.17e},{:.3e},{it}",
                    z.re, z.im, table.residuals[j]
                )?;
            }
        }
        Format::Json => {
            let v = serde_json::json!({
                "version": sphwave::VERSION,
                "config": config_json(&config),
                "zeros": table.zeros.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                "residuals": table.residuals,
                "iterations": table.iterations,
                "report": report,
            });
            writeln!(w, "{}", serde_json::to_string_pretty(&v)?)?;
        }
    }
    w.flush()?;
    if !report.ok() {
        bail!(
            "zero table failed validation: {}",
            report.violations.join("; ")
        );
    }
    Ok(())
}

fn run_diagnostics(args: DiagArgs) -> Result<()> {
    let orders = parse_list(&args.orders)?;
    let rows = residue_diagnostics(&orders, args.radius)?;
    let config = vec![
        ("radius".to_string(), args.radius.to_string()),
        ("orders".to_string(), args.orders.clone()),
    ];
    let mut w = writer(&args.output.out)?;
    match args.output.format {
        Format::Csv => {
            header(&mut w, &config)?;
            writeln!(w, "n,r,quantity,value")?;
            for r in &rows {
                writeln!(w, "{},{},{},{:.10e}", r.n, r.r, r.quantity, r.value)?;
            }
        }
        Format::Json => {
            let v = serde_json::json!({
                "version": sphwave::VERSION,
                "config": config_json(&config),
                "rows": rows,
            });
            writeln!(w, "{}", serde_json::to_string_pretty(&v)?)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn run_demo(args: DemoArgs) -> Result<()> {
    let cfg = DemoConfig {
        bc: args.bc,
        sources: exterior_sources(args.k),
        order: args.order,
        p: args.ptime,
        steps_per_unit: args.rate,
        trace_radius: args.radius,
        trace_time: args.time,
        snapshot_time: args.snapshot,
        ..DemoConfig::default()
    };
    let out = scattering_demo(&cfg)?;
    write_demo(&args.out, &out)?;
    let mut f = File::create(args.out.join("config.txt"))?;
    writeln!(f, "version={}", sphwave::VERSION)?;
    writeln!(
        f,
        "bc={}\norder={}\nptime={}\nrate={}",
        cfg.bc, cfg.order, cfg.p, cfg.steps_per_unit
    )?;
    for s in &cfg.sources {
        writeln!(f, "incident={}", format_source(s))?;
    }
    writeln!(
        f,
        "trace_radius={}\ntrace_time={}\nsnapshot={}",
        cfg.trace_radius, cfg.trace_time, cfg.snapshot_time
    )?;
    eprintln!("wrote demo files to {}", args.out.display());
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Solve(a) => run_solve(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Zeros(a) => run_zeros(a),
        Command::Diagnostics(a) => run_diagnostics(a),
        Command::Demo(a) => run_demo(a),
    }
}
