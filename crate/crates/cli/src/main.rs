//! `blowup-lab`: command-line driver for the blow-up laboratory.
//!
//! Exit status is 0 when every asserted contract of the subcommand holds,
//! 1 when a contract fails, and 2 on invalid input or I/O errors.

mod config;
mod rundir;

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use blowup_core::functionals::{
    monitor_cubic_mass_growth, monitor_holder_chain, monitor_pointwise_band,
    monitor_power_mass_growth, monitor_power_mass_ode, monitor_quartic_mass_ode,
    monitor_velocity_power, monitor_weighted_velocity, Band, MonitorReport,
};
use blowup_core::harness::{
    self, acceptance, assess_sweep, format_float, region_record, report, run_ode_sweep,
    run_sweep_records, table1_record, OdeSweepOutcome, ReportInputs, SweepOutcome,
};
use blowup_core::model::VanishingFlag;
use blowup_core::solver::{
    lifespan_from_run, simulate, LifespanConfig, NonlinearityPreset, ProblemSpec, RunStatus,
};
use blowup_core::special::Phi1Evaluator;
use clap::{Parser, Subcommand};
use serde::Serialize;

use config::{OdeSweepArgs, SimulateArgs, SweepArgs};
use rundir::{csv_writer, read_json, read_run, write_json, write_run};

#[derive(Parser)]
#[command(
    name = "blowup-lab",
    version,
    about = "Blow-up experiments for semilinear wave equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one radial problem to blow-up or t_max
    Simulate(SimulateArgs),
    /// Lifespan over a decreasing list of amplitudes
    Sweep(SweepArgs),
    /// Blow-up time of the comparison ODE over a decreasing list of δ
    OdeSweep(OdeSweepArgs),
    /// Tabulate φ₁ and its growth ratio
    Phi1 {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 50.0)]
        r_max: f64,
        #[arg(long, default_value_t = 501)]
        samples: usize,
        #[arg(long, default_value_t = 256)]
        nodes: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Classify (n, p, q) against the blow-up region
    Region {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        q: f64,
    },
    /// Look up the order of the lifespan lower bound
    Table1 {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        alpha: u32,
        /// Any of d2, d3, d34, int_g_zero, comma separated
        #[arg(long, value_delimiter = ',')]
        flags: Vec<String>,
    },
    /// Evaluate the inequality monitors on a stored run
    Monitor {
        /// Directory written by `simulate --out`
        #[arg(long)]
        run: PathBuf,
        /// Write all reports as one JSON array, readable by `report --monitors`
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Aggregate artifacts into one JSON report
    Report {
        /// `n,p,q`, repeatable
        #[arg(long)]
        region: Vec<String>,
        /// `n,alpha[,flag...]`, repeatable
        #[arg(long)]
        table1: Vec<String>,
        /// JSON written by `ode-sweep --json`
        #[arg(long)]
        ode_fit: Option<PathBuf>,
        /// JSON written by `sweep --json`
        #[arg(long)]
        sweep: Option<PathBuf>,
        /// JSON written by `monitor --json`
        #[arg(long)]
        monitors: Option<PathBuf>,
        /// Run every acceptance criterion (takes minutes)
        #[arg(long)]
        acceptance: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            let contract = matches!(
                e.downcast_ref::<blowup_core::Error>(),
                Some(blowup_core::Error::SweepFailed(_))
            );
            ExitCode::from(if contract { 1 } else { 2 })
        }
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::OdeSweep(args) => cmd_ode_sweep(args),
        Command::Phi1 {
            n,
            r_max,
            samples,
            nodes,
            output,
        } => cmd_phi1(n, r_max, samples, nodes, output),
        Command::Region { n, p, q } => {
            print_json(&region_record(n, p, q)?)?;
            Ok(true)
        }
        Command::Table1 { n, alpha, flags } => {
            print_json(&table1_record(n, alpha, &parse_flags(&flags)?)?)?;
            Ok(true)
        }
        Command::Monitor { run, json } => cmd_monitor(run, json),
        Command::Report {
            region,
            table1,
            ode_fit,
            sweep,
            monitors,
            acceptance,
            output,
        } => cmd_report(region, table1, ode_fit, sweep, monitors, acceptance, output),
    }
}

fn parse_flags(names: &[String]) -> Result<BTreeSet<VanishingFlag>> {
    names
        .iter()
        .filter(|s| !s.is_empty())
        .map(|s| Ok(VanishingFlag::parse(s.trim())?))
        .collect()
}

fn cmd_simulate(args: SimulateArgs) -> Result<bool> {
    let s = args.resolve()?;
    let preset = NonlinearityPreset::parse(&s.nonlinearity, s.p, s.q)?;
    let problem = ProblemSpec::from_preset(s.n, preset, s.epsilon)?;
    let life = LifespanConfig {
        h: s.h,
        cfl: s.cfl,
        threshold: s.threshold,
        t_max: s.t_max,
    };
    let cfg = if s.out.is_some() {
        life.sim().with_snapshot_interval(s.snapshot_interval)
    } else {
        life.sim()
    };
    let output = simulate(&problem, &cfg)?;
    let record = lifespan_from_run(&problem, &life, &output)?;
    if let Some(dir) = &s.out {
        write_run(dir, preset, &output)?;
        write_json(&dir.join("record.json"), &record)?;
    }
    print_json(&record)?;
    if !output.support_ok {
        eprintln!(
            "note: support leak {:e} exceeds the strict tolerance {:e}",
            output.support_leak, cfg.support_tol
        );
    }
    Ok(!matches!(record.status, RunStatus::Unstable { .. }))
}

fn cmd_sweep(args: SweepArgs) -> Result<bool> {
    let (cfg, json) = args.resolve()?;
    harness::worker_count()?;
    let outcome = assess_sweep(&cfg, run_sweep_records(&cfg)?);
    if let Some(path) = &cfg.output {
        let mut w = csv_writer(path)?;
        w.write_record([
            "epsilon",
            "h",
            "t_num",
            "t_num_fine",
            "refinement_ratio",
            "peak_r",
            "status",
            "steps",
        ])?;
        let opt = |x: Option<f64>| x.map(format_float).unwrap_or_default();
        for r in &outcome.records {
            w.write_record([
                format_float(r.epsilon),
                format_float(r.h),
                format_float(r.t_num),
                opt(r.t_num_fine),
                opt(r.refinement_ratio),
                format_float(r.peak_r),
                r.status.label().to_string(),
                r.steps.to_string(),
            ])?;
        }
        w.flush()?;
    }
    if let Some(path) = &json {
        write_json(path, &outcome)?;
    }
    #[derive(Serialize)]
    struct Summary<'a> {
        label: &'a str,
        n: u32,
        passed: bool,
        all_blew_up: bool,
        monotone: bool,
        fit: Option<harness::FitResult>,
        predicted_exponent: Option<f64>,
        a_fit: Option<f64>,
        diagnostics: &'a [String],
    }
    print_json(&Summary {
        label: &outcome.label,
        n: outcome.n,
        passed: outcome.passed,
        all_blew_up: outcome.all_blew_up,
        monotone: outcome.monotone,
        fit: outcome.fit,
        predicted_exponent: outcome.predicted_exponent,
        a_fit: outcome.a_fit,
        diagnostics: &outcome.diagnostics,
    })?;
    for d in &outcome.diagnostics {
        eprintln!("sweep: {d}");
    }
    Ok(outcome.passed)
}

fn cmd_ode_sweep(args: OdeSweepArgs) -> Result<bool> {
    let (cfg, output, json) = args.resolve()?;
    let out = run_ode_sweep(&cfg)?;
    if let Some(path) = &output {
        let mut w = csv_writer(path)?;
        w.write_record(["delta", "blow_time", "certified"])?;
        for (d, r) in &out.points {
            w.write_record([
                format_float(*d),
                format_float(r.blow_time),
                r.certified.to_string(),
            ])?;
        }
        w.flush()?;
    }
    if let Some(path) = &json {
        write_json(path, &out)?;
    }
    #[derive(Serialize)]
    struct Summary {
        slope: f64,
        intercept: f64,
        r2: f64,
        points_used: usize,
        lemma_exponent: f64,
        passed: bool,
    }
    print_json(&Summary {
        slope: out.fit.slope,
        intercept: out.fit.intercept,
        r2: out.fit.r_squared,
        points_used: out.fit.points_used,
        lemma_exponent: out.lemma_exponent,
        passed: out.passed,
    })?;
    Ok(out.passed)
}

fn cmd_phi1(
    n: u32,
    r_max: f64,
    samples: usize,
    nodes: usize,
    output: Option<PathBuf>,
) -> Result<bool> {
    let ev = Phi1Evaluator::new(n, nodes)?;
    let rep = ev.check_growth_bound(r_max, samples)?;
    let sink: Box<dyn Write> = match &output {
        Some(p) => {
            Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?)
        }
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(["r", "phi1", "bound_ratio"])?;
    for s in &rep.samples {
        w.write_record([s.r, s.phi1, s.bound_ratio].map(format_float))?;
    }
    w.flush()?;
    eprintln!(
        "phi1: max_ratio = {:e}, monotone_ok = {}",
        rep.max_ratio, rep.monotone_ok
    );
    Ok(rep.max_ratio.is_finite() && rep.monotone_ok)
}

fn cmd_monitor(dir: PathBuf, json: Option<PathBuf>) -> Result<bool> {
    let meta = read_run(&dir)?;
    let run = &meta.run;
    let reports: Vec<MonitorReport> = match meta.preset {
        NonlinearityPreset::UUt2PlusU4 if run.n == 2 => vec![
            monitor_pointwise_band(run, Band::default())?,
            monitor_cubic_mass_growth(run)?,
            monitor_quartic_mass_ode(run)?,
        ],
        NonlinearityPreset::PowerCombined { p, q } => {
            let ev = Phi1Evaluator::with_default_nodes(run.n)?;
            vec![
                monitor_weighted_velocity(run, &ev)?,
                monitor_velocity_power(run, p)?,
                monitor_power_mass_ode(run, q)?,
                monitor_power_mass_growth(run, p)?,
                monitor_holder_chain(run, p, &ev)?,
            ]
        }
        other => bail!(
            "no monitors are defined for {} in n = {}",
            other.label(),
            run.n
        ),
    };
    {
        let mut out = std::io::stdout().lock();
        for r in &reports {
            serde_json::to_writer(&mut out, r)?;
            writeln!(out)?;
        }
    }
    if let Some(path) = &json {
        write_json(path, &reports)?;
    }
    for r in &reports {
        eprintln!(
            "monitor {}: fitted_constant = {:e}, min_margin = {:e}, passed = {}",
            r.name, r.fitted_constant, r.min_margin, r.passed
        );
    }
    Ok(reports.iter().all(|r| r.passed))
}

fn split_numbers(s: &str) -> Vec<&str> {
    s.split(',').map(str::trim).collect()
}

#[allow(clippy::too_many_arguments)]
fn cmd_report(
    region: Vec<String>,
    table1: Vec<String>,
    ode_fit: Option<PathBuf>,
    sweep: Option<PathBuf>,
    monitors: Option<PathBuf>,
    run_acceptance: bool,
    output: Option<PathBuf>,
) -> Result<bool> {
    let mut inputs = ReportInputs::default();
    if !region.is_empty() {
        let mut rows = Vec::new();
        for spec in &region {
            let parts = split_numbers(spec);
            let [n, p, q] = parts.as_slice() else {
                bail!("--region expects n,p,q, got {spec:?}");
            };
            rows.push(region_record(n.parse()?, p.parse()?, q.parse()?)?);
        }
        inputs.region = Some(rows);
    }
    if !table1.is_empty() {
        let mut rows = Vec::new();
        for spec in &table1 {
            let parts = split_numbers(spec);
            if parts.len() < 2 {
                bail!("--table1 expects n,alpha[,flag...], got {spec:?}");
            }
            let flags: Vec<String> = parts[2..].iter().map(|s| s.to_string()).collect();
            rows.push(table1_record(
                parts[0].parse()?,
                parts[1].parse()?,
                &parse_flags(&flags)?,
            )?);
        }
        inputs.table1 = Some(rows);
    }
    if let Some(p) = &ode_fit {
        inputs.ode_fit = Some(read_json::<OdeSweepOutcome>(p)?);
    }
    if let Some(p) = &sweep {
        inputs.pde_sweep = Some(read_json::<SweepOutcome>(p)?);
    }
    if let Some(p) = &monitors {
        inputs.monitors = Some(read_json::<Vec<MonitorReport>>(p)?);
    }
    if run_acceptance {
        let lines = acceptance::run_all();
        for l in &lines {
            eprintln!("{}", l.summary());
        }
        inputs.acceptance = Some(lines);
    }
    let rep = report(&inputs)?;
    match &output {
        Some(p) => write_json(p, &rep)?,
        None => print_json(&rep)?,
    }
    Ok(rep.passed)
}
