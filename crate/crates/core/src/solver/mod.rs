//! Explicit solver for radial semilinear wave equations
//! `u_tt - u_rr - ((n-1)/r) u_r = F(u, u_t)` with compactly supported data.
//!
//! Space is discretized by finite volumes on a cell-centered grid (see
//! [`RadialOperator`]), time by classical RK4 on the first-order system
//! `(u, u_t)`. The step is `min(cfl·h, rate_cap / rate)` where `rate` is the
//! local growth rate of the nonlinearity, so the scheme keeps resolving the
//! solution while it diverges. Only the cells inside the light cone of the
//! data support (plus a margin) are updated.

mod grid;
mod problem;
mod run;

pub use grid::{RadialGrid, RadialOperator};
pub use problem::{default_g, InitialData, NonlinearityPreset, ProblemSpec, Profile};
pub use run::{simulate, step, RunOutput, RunStatus, SeriesRow, SimConfig, SolutionState, Stepper};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifespanConfig {
    pub h: f64,
    pub cfl: f64,
    pub threshold: f64,
    pub t_max: f64,
}

impl Default for LifespanConfig {
    fn default() -> Self {
        Self {
            h: 1.0 / 200.0,
            cfl: 0.45,
            threshold: 1e6,
            t_max: 10.0,
        }
    }
}

impl LifespanConfig {
    pub fn sim(&self) -> SimConfig {
        SimConfig::new(self.h, self.cfl, self.t_max, self.threshold)
    }
}

/// Numerical lifespan of one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifespanRecord {
    pub epsilon: f64,
    pub h: f64,
    /// Blow-up time, or the time reached when there was none.
    pub t_num: f64,
    pub peak_r: f64,
    /// `|T(h) - T(h/2)| / T(h/2)`, present after a blow-up.
    pub refinement_ratio: Option<f64>,
    pub t_num_fine: Option<f64>,
    pub status: RunStatus,
    pub steps: usize,
}

/// Runs to blow-up or `t_max`. A blow-up is confirmed by a rerun at `h/2`
/// and downgraded to `unstable` when the two times differ by 5% or more.
pub fn solve_lifespan(problem: &ProblemSpec, cfg: &LifespanConfig) -> Result<LifespanRecord> {
    if cfg.threshold < 1e4 {
        return Err(invalid("blow_threshold must be >= 1e4"));
    }
    let coarse = simulate(problem, &cfg.sim())?;
    lifespan_from_run(problem, cfg, &coarse)
}

/// Lifespan record for a finished run made with `cfg`, including the `h/2`
/// confirmation when the run blew up.
pub fn lifespan_from_run(
    problem: &ProblemSpec,
    cfg: &LifespanConfig,
    coarse: &RunOutput,
) -> Result<LifespanRecord> {
    let mut rec = LifespanRecord {
        epsilon: problem.epsilon(),
        h: cfg.h,
        t_num: coarse.t_final,
        peak_r: coarse.peak_r,
        refinement_ratio: None,
        t_num_fine: None,
        status: coarse.status.clone(),
        steps: coarse.steps,
    };
    if coarse.blew_up() {
        let fine_cfg = LifespanConfig {
            h: cfg.h / 2.0,
            ..*cfg
        };
        let fine = simulate(problem, &fine_cfg.sim())?;
        let ratio = if fine.blew_up() {
            (coarse.t_final - fine.t_final).abs() / fine.t_final
        } else {
            f64::INFINITY
        };
        rec.refinement_ratio = Some(ratio);
        rec.t_num_fine = Some(fine.t_final);
        if !(ratio < 0.05) {
            rec.status = RunStatus::Unstable {
                reason: format!(
                    "blow-up time not refinement-stable: {} at h, {} at h/2 ({:?})",
                    coarse.t_final,
                    fine.t_final,
                    fine.status.label()
                ),
            };
        }
    }
    Ok(rec)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub min_value: f64,
    /// `10 h²`
    pub tolerance: f64,
    pub window_end: f64,
    pub passed: bool,
}

/// Minimum of `u` over the grid and over `[0, 0.9 T]` (or `[0, t_end]`
/// without blow-up). Needs nonnegative data and a nonlinearity that maps
/// `u >= 0` to nonnegative values.
pub fn positivity_check(
    problem: &ProblemSpec,
    h: f64,
    cfl: f64,
    t_end: f64,
) -> Result<PositivityReport> {
    if !problem.data.nonneg {
        return Err(invalid("positivity check needs nonnegative data"));
    }
    if !problem.nonlinearity.preserves_nonnegativity() {
        return Err(invalid(
            "positivity check needs a nonlinearity that is nonnegative for u >= 0",
        ));
    }
    let run = simulate(problem, &SimConfig::new(h, cfl, t_end, 1e6))?;
    if let RunStatus::Unstable { reason } = &run.status {
        return Err(Error::Degenerate(format!("run unstable: {reason}")));
    }
    let window_end = run.window_end();
    let min_value = run
        .series
        .iter()
        .filter(|r| r.t <= window_end)
        .map(|r| r.min_u)
        .fold(0.0, f64::min);
    let tolerance = 10.0 * h * h;
    Ok(PositivityReport {
        min_value,
        tolerance,
        window_end,
        passed: min_value >= -tolerance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub order: f64,
    /// `‖u_h - u_{h/2}‖`
    pub diff_coarse: f64,
    /// `‖u_{h/2} - u_{h/4}‖`
    pub diff_fine: f64,
}

/// Averages pairs of fine cells onto the coarse grid.
pub fn restrict(fine: &[f64]) -> Vec<f64> {
    fine.chunks(2)
        .map(|c| 0.5 * (c[0] + c.get(1).copied().unwrap_or(0.0)))
        .collect()
}

/// `sqrt(Σ V_j (a_j - b_j)²)`, missing cells counting as zero.
pub fn l2_difference(op: &RadialOperator, a: &[f64], b: &[f64]) -> f64 {
    let m = a.len().max(b.len()).min(op.volumes().len());
    (0..m)
        .map(|j| {
            let d = a.get(j).copied().unwrap_or(0.0) - b.get(j).copied().unwrap_or(0.0);
            op.volumes()[j] * d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// Self-convergence order of `u` at `t_probe` from runs at `h`, `h/2`,
/// `h/4`.
pub fn convergence_order(
    problem: &ProblemSpec,
    h: f64,
    cfl: f64,
    t_probe: f64,
    threshold: f64,
) -> Result<ConvergenceReport> {
    if problem.is_zero_data() {
        return Err(Error::Degenerate(
            "zero data has no convergence order".into(),
        ));
    }
    if !(t_probe > 0.0) {
        return Err(invalid("t_probe must be positive"));
    }
    let probe = |h: f64, t_max: f64| -> Result<(RunOutput, SolutionState)> {
        let cfg = SimConfig::new(h, cfl, t_max, threshold).with_snapshots(vec![t_probe]);
        let run = simulate(problem, &cfg)?;
        let snap = run
            .snapshots
            .iter()
            .find(|s| s.t == t_probe)
            .cloned()
            .ok_or_else(|| {
                invalid(format!(
                    "run ended at t = {} ({}) before t_probe = {t_probe}",
                    run.t_final,
                    run.status.label()
                ))
            })?;
        Ok((run, snap))
    };
    let (coarse_run, coarse) = probe(h, t_probe / 0.9)?;
    if coarse_run.blew_up() {
        return Err(invalid(format!(
            "t_probe = {t_probe} is within 10% of the blow-up time {}",
            coarse_run.t_final
        )));
    }
    if let RunStatus::Unstable { reason } = &coarse_run.status {
        return Err(Error::Degenerate(format!("coarse run unstable: {reason}")));
    }
    let peak = coarse.u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak > 0.1 * threshold {
        return Err(invalid("solution too large at t_probe"));
    }
    let (_, mid) = probe(h / 2.0, t_probe)?;
    let (_, fine) = probe(h / 4.0, t_probe)?;
    let op = coarse_run.operator()?;
    let mid_on_coarse = restrict(&mid.u);
    let fine_on_coarse = restrict(&restrict(&fine.u));
    let diff_coarse = l2_difference(&op, &coarse.u, &mid_on_coarse);
    let diff_fine = l2_difference(&op, &mid_on_coarse, &fine_on_coarse);
    if !(diff_fine > 0.0 && diff_coarse > 0.0) {
        return Err(Error::Degenerate("differences between grids vanish".into()));
    }
    Ok(ConvergenceReport {
        order: (diff_coarse / diff_fine).log2(),
        diff_coarse,
        diff_fine,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::NonlinearitySpec;

    fn linear_bump(n: u32) -> ProblemSpec {
        ProblemSpec::new(
            n,
            NonlinearitySpec::linear(),
            InitialData::new(Profile::Bump, Profile::Zero, 1.0).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn zero_data_stays_zero() {
        let p = ProblemSpec::new(
            2,
            NonlinearitySpec::quartic_combined(),
            InitialData::new(Profile::Zero, Profile::Zero, 1.0).unwrap(),
        )
        .unwrap();
        let run = simulate(&p, &SimConfig::new(0.05, 0.45, 2.0, 1e6)).unwrap();
        assert_eq!(run.status, RunStatus::ReachedTMax);
        assert!(run.series.iter().all(|r| r.max_u == 0.0 && r.max_v == 0.0));
        let pos = positivity_check(&p, 0.05, 0.45, 2.0).unwrap();
        assert_eq!(pos.min_value, 0.0);
        assert!(matches!(
            convergence_order(&p, 0.05, 0.45, 1.0, 1e6),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn step_rejects_large_dt_and_detects_overflow() {
        let g = RadialGrid::new(0.1, 40).unwrap();
        let nl = NonlinearitySpec::quartic();
        let s = SolutionState::zeros(40);
        assert!(step(&s, &g, &nl, 2, 0.2).is_err());
        let mut big = SolutionState::zeros(40);
        big.u[3] = 1e80;
        assert!(matches!(
            step(&big, &g, &nl, 2, 0.05),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn linear_problem_is_global() {
        let mut p = ProblemSpec::quartic_combined(1.0).unwrap();
        p.nonlinearity = NonlinearitySpec::linear();
        let rec = solve_lifespan(
            &p,
            &LifespanConfig {
                h: 0.02,
                t_max: 10.0,
                ..LifespanConfig::default()
            },
        )
        .unwrap();
        assert_eq!(rec.status, RunStatus::ReachedTMax);
        assert_eq!(rec.t_num, 10.0);
        assert!(rec.refinement_ratio.is_none());
    }

    #[test]
    fn snapshots_land_exactly() {
        let p = linear_bump(3);
        let cfg = SimConfig::new(0.05, 0.45, 1.0, 1e6).with_snapshot_interval(0.25);
        let run = simulate(&p, &cfg).unwrap();
        let times: Vec<f64> = run.snapshots.iter().map(|s| s.t).collect();
        assert_eq!(times, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(run.t_final, 1.0);
    }

    #[test]
    fn restriction_and_norm() {
        assert_eq!(restrict(&[1.0, 3.0, 5.0]), vec![2.0, 2.5]);
        let g = RadialGrid::new(0.5, 4).unwrap();
        let op = RadialOperator::new(g, 1).unwrap();
        assert!((l2_difference(&op, &[1.0, 1.0], &[]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn positivity_preconditions() {
        let signed = ProblemSpec::new(
            2,
            NonlinearitySpec::linear(),
            InitialData::new(
                Profile::custom(|r| default_g(r) * (1.0 - 3.0 * r)),
                Profile::Zero,
                1.0,
            )
            .unwrap(),
        )
        .unwrap();
        assert!(positivity_check(&signed, 0.05, 0.45, 1.0).is_err());
    }

    #[test]
    fn convergence_rejects_probe_near_blowup() {
        let p = ProblemSpec::quartic_combined(3.0).unwrap();
        assert!(convergence_order(&p, 0.04, 0.45, 0.48, 1e6).is_err());
    }
}
