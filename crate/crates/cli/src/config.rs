//! Subcommand options. Every option can come from a flag or from a TOML
//! file given with `--config`; flags win.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Deserialize;

fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Fills every `None` field of `$flags` from the config file, if one was given.
macro_rules! merge_config {
    ($flags:expr, $ty:ty, $($field:ident),+) => {{
        let mut merged = $flags;
        if let Some(path) = merged.config.take() {
            let file: $ty = load(&path)?;
            $( merged.$field = merged.$field.or(file.$field); )+
        }
        merged
    }};
}

fn need<T>(value: Option<T>, name: &str) -> Result<T> {
    match value {
        Some(v) => Ok(v),
        None => bail!(
            "missing --{name} (flag or config key {})",
            name.replace('-', "_")
        ),
    }
}

#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateArgs {
    /// TOML file with any of the options below
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// `uut2+u4`, `|ut|^p+|u|^q` (needs --p, --q), `u4`, `uut2`, `linear`
    #[arg(long)]
    pub nonlinearity: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub cfl: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Spacing of stored field snapshots
    #[arg(long)]
    pub snapshot_interval: Option<f64>,
    /// Directory receiving record.json, meta.json, series.csv, snapshots.csv
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub struct Simulate {
    pub n: u32,
    pub epsilon: f64,
    pub nonlinearity: String,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub h: f64,
    pub cfl: f64,
    pub t_max: f64,
    pub threshold: f64,
    pub snapshot_interval: f64,
    pub out: Option<PathBuf>,
}

impl SimulateArgs {
    pub fn resolve(self) -> Result<Simulate> {
        let a = merge_config!(
            self,
            SimulateArgs,
            n,
            epsilon,
            nonlinearity,
            p,
            q,
            h,
            cfl,
            t_max,
            threshold,
            snapshot_interval,
            out
        );
        Ok(Simulate {
            n: a.n.unwrap_or(2),
            epsilon: need(a.epsilon, "epsilon")?,
            nonlinearity: a.nonlinearity.unwrap_or_else(|| "uut2+u4".into()),
            p: a.p,
            q: a.q,
            h: a.h.unwrap_or(0.01),
            cfl: a.cfl.unwrap_or(0.45),
            t_max: a.t_max.unwrap_or(10.0),
            threshold: a.threshold.unwrap_or(1e6),
            snapshot_interval: a.snapshot_interval.unwrap_or(0.05),
            out: a.out,
        })
    }
}

#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct SweepArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<u32>,
    #[arg(long)]
    pub nonlinearity: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    /// Strictly decreasing, comma separated
    #[arg(long, value_delimiter = ',')]
    pub epsilons: Option<Vec<f64>>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub cfl: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// CSV table of lifespans
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Full JSON outcome, readable by `report --sweep`
    #[arg(long)]
    pub json: Option<PathBuf>,
}

impl SweepArgs {
    pub fn resolve(self) -> Result<(blowup_core::harness::SweepConfig, Option<PathBuf>)> {
        let a = merge_config!(
            self,
            SweepArgs,
            n,
            nonlinearity,
            p,
            q,
            epsilons,
            h,
            cfl,
            t_max,
            threshold,
            output,
            json
        );
        let name = a.nonlinearity.unwrap_or_else(|| "uut2+u4".into());
        let cfg = blowup_core::harness::SweepConfig {
            preset: blowup_core::solver::NonlinearityPreset::parse(&name, a.p, a.q)?,
            n: a.n.unwrap_or(2),
            epsilons: need(a.epsilons, "epsilons")?,
            h: a.h.unwrap_or(0.01),
            cfl: a.cfl.unwrap_or(0.45),
            threshold: a.threshold.unwrap_or(1e6),
            t_max: need(a.t_max, "t-max")?,
            output: a.output,
        };
        Ok((cfg, a.json))
    }
}

#[derive(Args, Deserialize, Debug, Default, Clone)]
#[serde(default, deny_unknown_fields)]
pub struct OdeSweepArgs {
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    /// Strictly decreasing, comma separated; default six log-spaced values
    /// from 1e-1 to 1e-2
    #[arg(long, value_delimiter = ',')]
    pub deltas: Option<Vec<f64>>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    /// CSV of (delta, blow_time, certified)
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Full JSON outcome, readable by `report --ode-fit`
    #[arg(long)]
    pub json: Option<PathBuf>,
}

impl OdeSweepArgs {
    pub fn resolve(
        self,
    ) -> Result<(
        blowup_core::harness::OdeSweepConfig,
        Option<PathBuf>,
        Option<PathBuf>,
    )> {
        let a = merge_config!(
            self,
            OdeSweepArgs,
            a,
            alpha,
            beta,
            k,
            deltas,
            threshold,
            rel_tol,
            output,
            json
        );
        let cfg = blowup_core::harness::OdeSweepConfig {
            a: a.a.unwrap_or(1.5),
            alpha: a.alpha.unwrap_or(6.0),
            beta: a.beta.unwrap_or(4.0),
            k: a.k.unwrap_or(1.0),
            deltas: a
                .deltas
                .unwrap_or_else(|| blowup_core::odecmp::log_spaced_descending(0.1, 0.01, 6)),
            threshold: a.threshold.unwrap_or(1e6),
            rel_tol: a.rel_tol.unwrap_or(1e-8),
        };
        Ok((cfg, a.output, a.json))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sim.toml");
        std::fs::write(&path, "epsilon = 2.0\nh = 0.02\nnonlinearity = \"u4\"\n").unwrap();
        let args = SimulateArgs {
            config: Some(path),
            h: Some(0.05),
            ..Default::default()
        };
        let s = args.resolve().unwrap();
        assert_eq!((s.epsilon, s.h, s.nonlinearity.as_str()), (2.0, 0.05, "u4"));
    }

    #[test]
    fn unknown_config_keys_rejected() {
        let parsed: std::result::Result<SweepArgs, _> = toml::from_str("epsilon = 1.0");
        assert!(parsed.is_err());
        let parsed: SweepArgs = toml::from_str("epsilons = [2.0, 1.5]\nt_max = 5.0").unwrap();
        assert_eq!(parsed.epsilons, Some(vec![2.0, 1.5]));
    }

    #[test]
    fn missing_required_option_is_named() {
        let err = SimulateArgs::default().resolve().err().unwrap();
        assert!(err.to_string().contains("--epsilon"));
    }
}
