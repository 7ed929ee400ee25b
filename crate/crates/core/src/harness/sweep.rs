use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_power_law, with_workers, FitResult};
use crate::error::{invalid, Error, Result};
use crate::model::{predicted_exponent, LemmaMapping};
use crate::odecmp::{delta_sweep, lemma_exponent, log_spaced_descending, BlowupResult, OdeProblem};
use crate::solver::{
    solve_lifespan, LifespanConfig, LifespanRecord, NonlinearityPreset, ProblemSpec,
};

fn default_cfl() -> f64 {
    0.45
}

fn default_threshold() -> f64 {
    1e6
}

/// ε-sweep of the PDE lifespan for one preset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub preset: NonlinearityPreset,
    pub n: u32,
    pub epsilons: Vec<f64>,
    pub h: f64,
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    pub t_max: f64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilons.len() < 4 {
            return Err(invalid("a sweep needs at least 4 epsilons"));
        }
        if self.epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite()))
            || self.epsilons.windows(2).any(|w| w[1] >= w[0])
        {
            return Err(invalid("epsilons must be positive and strictly decreasing"));
        }
        if !(self.h > 0.0) || !(self.t_max > 0.0) {
            return Err(invalid("h and t_max must be positive"));
        }
        self.problem(self.epsilons[0]).map(|_| ())
    }

    pub fn problem(&self, epsilon: f64) -> Result<ProblemSpec> {
        ProblemSpec::from_preset(self.n, self.preset, epsilon)
    }

    pub fn lifespan(&self) -> LifespanConfig {
        LifespanConfig {
            h: self.h,
            cfl: self.cfl,
            threshold: self.threshold,
            t_max: self.t_max,
        }
    }

    /// Exponent `m` in `T ~ ε^{-m}` when the preset has one.
    pub fn predicted_exponent(&self) -> Option<f64> {
        match self.preset {
            NonlinearityPreset::UUt2PlusU4 if self.n == 2 => Some(18.0),
            NonlinearityPreset::PowerCombined { p, q } => predicted_exponent(self.n, p, q).ok(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub label: String,
    pub n: u32,
    pub records: Vec<LifespanRecord>,
    /// Fit of `T` against `ε`, when every run blew up.
    pub fit: Option<FitResult>,
    pub predicted_exponent: Option<f64>,
    /// `max T ε^m`, when every run blew up and `m` is known.
    pub a_fit: Option<f64>,
    pub all_blew_up: bool,
    pub monotone: bool,
    pub passed: bool,
    pub diagnostics: Vec<String>,
}

/// Lifespan of every ε, run concurrently and returned in input order.
pub fn run_sweep_records(cfg: &SweepConfig) -> Result<Vec<LifespanRecord>> {
    cfg.validate()?;
    let life = cfg.lifespan();
    let results: Vec<Result<LifespanRecord>> = with_workers(|| {
        cfg.epsilons
            .par_iter()
            .map(|&e| solve_lifespan(&cfg.problem(e)?, &life))
            .collect()
    })?;
    results.into_iter().collect()
}

/// Checks blow-up and monotonicity of a finished sweep.
pub fn assess_sweep(cfg: &SweepConfig, records: Vec<LifespanRecord>) -> SweepOutcome {
    let mut diagnostics = Vec::new();
    for r in &records {
        if r.status.label() != "blew_up" {
            let detail = match &r.status {
                crate::solver::RunStatus::Unstable { reason } => format!(": {reason}"),
                _ => String::new(),
            };
            diagnostics.push(format!(
                "epsilon = {}: {} at t = {}{detail}",
                r.epsilon,
                r.status.label(),
                r.t_num
            ));
        }
    }
    let all_blew_up = diagnostics.is_empty() && !records.is_empty();
    let monotone = all_blew_up && records.windows(2).all(|w| w[1].t_num > w[0].t_num);
    if all_blew_up && !monotone {
        diagnostics.push("lifespan does not increase as epsilon decreases".into());
    }
    let predicted = cfg.predicted_exponent();
    let fit = if all_blew_up {
        let pts: Vec<(f64, f64)> = records.iter().map(|r| (r.epsilon, r.t_num)).collect();
        match fit_power_law(&pts) {
            Ok(f) => Some(f),
            Err(e) => {
                diagnostics.push(format!("fit: {e}"));
                None
            }
        }
    } else {
        None
    };
    let a_fit = match (all_blew_up, predicted) {
        (true, Some(m)) => records
            .iter()
            .map(|r| r.t_num * r.epsilon.powf(m))
            .reduce(f64::max),
        _ => None,
    };
    SweepOutcome {
        label: cfg.preset.label(),
        n: cfg.n,
        records,
        fit,
        predicted_exponent: predicted,
        a_fit,
        all_blew_up,
        monotone,
        passed: all_blew_up && monotone,
        diagnostics,
    }
}

/// Runs and assesses a sweep. A run without a confirmed blow-up, or a
/// lifespan that fails to grow as ε shrinks, is a `SweepFailed` error.
pub fn run_epsilon_sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    let out = assess_sweep(cfg, run_sweep_records(cfg)?);
    if out.passed {
        Ok(out)
    } else {
        Err(Error::SweepFailed(out.diagnostics.join("; ")))
    }
}

/// δ-sweep of the comparison ODE `F'' = k (1+t)^{-α} F^β` with minimal data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeSweepConfig {
    pub a: f64,
    pub alpha: f64,
    pub beta: f64,
    #[serde(default = "one")]
    pub k: f64,
    pub deltas: Vec<f64>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
}

fn one() -> f64 {
    1.0
}

fn default_rel_tol() -> f64 {
    1e-8
}

impl OdeSweepConfig {
    pub fn from_mapping(m: &LemmaMapping, deltas: Vec<f64>) -> Self {
        Self {
            a: m.a,
            alpha: m.alpha,
            beta: m.beta,
            k: 1.0,
            deltas,
            threshold: default_threshold(),
            rel_tol: default_rel_tol(),
        }
    }

    /// `a = 3/2, α = 6, β = 4` over six δ from 1e-1 to 1e-2.
    pub fn quartic() -> Self {
        Self::from_mapping(
            &crate::model::quartic_lemma_mapping(),
            log_spaced_descending(0.1, 0.01, 6),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdeSweepOutcome {
    pub config: OdeSweepConfig,
    pub points: Vec<(f64, BlowupResult)>,
    pub fit: FitResult,
    pub lemma_exponent: f64,
    /// `|slope + m| <= 0.1 m`.
    pub passed: bool,
}

pub fn run_ode_sweep(cfg: &OdeSweepConfig) -> Result<OdeSweepOutcome> {
    let m = lemma_exponent(cfg.a, cfg.alpha, cfg.beta)?;
    let first = *cfg.deltas.first().ok_or_else(|| invalid("no deltas"))?;
    let template = OdeProblem::minimal(first, cfg.k, cfg.a, cfg.alpha, cfg.beta)?;
    let points = with_workers(|| delta_sweep(&template, &cfg.deltas, cfg.threshold, cfg.rel_tol))??;
    let pts: Vec<(f64, f64)> = points.iter().map(|(d, r)| (*d, r.blow_time)).collect();
    let fit = fit_power_law(&pts)?;
    Ok(OdeSweepOutcome {
        config: cfg.clone(),
        points,
        fit,
        lemma_exponent: m,
        passed: (fit.slope + m).abs() <= 0.1 * m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(eps: Vec<f64>) -> SweepConfig {
        SweepConfig {
            preset: NonlinearityPreset::UUt2PlusU4,
            n: 2,
            epsilons: eps,
            h: 0.02,
            cfl: 0.45,
            threshold: 1e6,
            t_max: 10.0,
            output: None,
        }
    }

    #[test]
    fn validation() {
        assert!(cfg(vec![4.0, 3.0, 2.0]).validate().is_err());
        assert!(cfg(vec![4.0, 3.0, 3.0, 2.0]).validate().is_err());
        assert!(cfg(vec![4.0, 3.5, 3.0, 2.5]).validate().is_ok());
        let mut c = cfg(vec![4.0, 3.5, 3.0, 2.5]);
        c.n = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn predicted_exponents() {
        assert_eq!(cfg(vec![]).predicted_exponent(), Some(18.0));
        let mut c = cfg(vec![]);
        c.preset = NonlinearityPreset::PowerCombined { p: 3.0, q: 4.0 };
        assert_eq!(c.predicted_exponent(), Some(18.0));
        c.preset = NonlinearityPreset::U4;
        assert_eq!(c.predicted_exponent(), None);
    }

    #[test]
    fn quartic_ode_sweep_passes() {
        let out = run_ode_sweep(&OdeSweepConfig::quartic()).unwrap();
        assert_eq!(out.lemma_exponent, 6.0);
        assert!(out.passed, "{:?}", out.fit);
    }

    #[test]
    fn sweep_config_serde_round_trip() {
        let c = cfg(vec![4.0, 3.5, 3.0, 2.5]);
        let s = serde_json::to_string(&c).unwrap();
        let back: SweepConfig = serde_json::from_str(&s).unwrap();
        assert_eq!(back, c);
    }
}
