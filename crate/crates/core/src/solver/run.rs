use serde::{Deserialize, Serialize};

use super::grid::{RadialGrid, RadialOperator};
use super::problem::ProblemSpec;
use crate::error::{invalid, Error, Result};
use crate::model::NonlinearitySpec;

/// Fields at one time level. Cells beyond `u.len()` are zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionState {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl SolutionState {
    pub fn zeros(cells: usize) -> Self {
        Self {
            t: 0.0,
            u: vec![0.0; cells],
            v: vec![0.0; cells],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }
}

/// Cells kept beyond the light cone of the data support. The discrete front
/// spreads dispersively over about `(t/h)^{1/3}` cells, so the margin grows
/// with it.
const PAD: usize = 24;

fn margin(t: f64, h: f64) -> usize {
    PAD + (6.0 * (t / h).cbrt()).ceil() as usize
}

/// Explicit classical Runge–Kutta 4 integrator for `u_t = v`,
/// `v_t = L u + F(u, v)`.
#[derive(Debug, Clone)]
pub struct Stepper {
    op: RadialOperator,
    nl: NonlinearitySpec,
    ku: [Vec<f64>; 4],
    kv: [Vec<f64>; 4],
    tu: Vec<f64>,
    tv: Vec<f64>,
}

impl Stepper {
    pub fn new(grid: RadialGrid, n: u32, nl: NonlinearitySpec) -> Result<Self> {
        let op = RadialOperator::new(grid, n)?;
        let z = || vec![0.0; grid.cells];
        Ok(Self {
            op,
            nl,
            ku: [z(), z(), z(), z()],
            kv: [z(), z(), z(), z()],
            tu: z(),
            tv: z(),
        })
    }

    pub fn operator(&self) -> &RadialOperator {
        &self.op
    }

    #[inline]
    fn deriv(
        op: &RadialOperator,
        nl: &NonlinearitySpec,
        u: &[f64],
        v: &[f64],
        du: &mut [f64],
        dv: &mut [f64],
        m: usize,
    ) {
        du[..m].copy_from_slice(&v[..m]);
        op.apply(u, dv, m);
        if !nl.is_linear() {
            for j in 0..m {
                dv[j] += nl.eval(u[j], v[j]);
            }
        }
    }

    /// Advances the first `m` cells of full-length `u`, `v` by `dt`.
    pub fn advance(&mut self, u: &mut [f64], v: &mut [f64], dt: f64, m: usize) {
        let Self {
            op,
            nl,
            ku,
            kv,
            tu,
            tv,
        } = self;
        let [ku1, ku2, ku3, ku4] = ku;
        let [kv1, kv2, kv3, kv4] = kv;
        Self::deriv(op, nl, u, v, ku1, kv1, m);
        for j in 0..m {
            tu[j] = u[j] + 0.5 * dt * ku1[j];
            tv[j] = v[j] + 0.5 * dt * kv1[j];
        }
        Self::deriv(op, nl, tu, tv, ku2, kv2, m);
        for j in 0..m {
            tu[j] = u[j] + 0.5 * dt * ku2[j];
            tv[j] = v[j] + 0.5 * dt * kv2[j];
        }
        Self::deriv(op, nl, tu, tv, ku3, kv3, m);
        for j in 0..m {
            tu[j] = u[j] + dt * ku3[j];
            tv[j] = v[j] + dt * kv3[j];
        }
        Self::deriv(op, nl, tu, tv, ku4, kv4, m);
        let c = dt / 6.0;
        for j in 0..m {
            u[j] += c * (ku1[j] + 2.0 * (ku2[j] + ku3[j]) + ku4[j]);
            v[j] += c * (kv1[j] + 2.0 * (kv2[j] + kv3[j]) + kv4[j]);
        }
    }

    /// Largest local rate of the nonlinear point dynamics over `m` cells.
    pub fn max_rate(&self, u: &[f64], v: &[f64], m: usize) -> f64 {
        if self.nl.is_linear() {
            return 0.0;
        }
        (0..m).map(|j| self.nl.rate(u[j], v[j])).fold(0.0, f64::max)
    }
}

/// One step on the full grid. Rejects `dt > h`, beyond the stability
/// interval of the scheme, and reports a non-finite result as an error
/// carrying the time reached.
pub fn step(
    state: &SolutionState,
    grid: &RadialGrid,
    nl: &NonlinearitySpec,
    n: u32,
    dt: f64,
) -> Result<SolutionState> {
    if !(dt > 0.0 && dt <= grid.h) {
        return Err(invalid(format!("dt must lie in (0, h], got {dt}")));
    }
    if state.u.len() != grid.cells || state.v.len() != grid.cells {
        return Err(invalid("state length does not match the grid"));
    }
    let mut stepper = Stepper::new(*grid, n, nl.clone())?;
    let mut out = state.clone();
    stepper.advance(&mut out.u, &mut out.v, dt, grid.cells);
    out.t = state.t + dt;
    if !out.is_finite() {
        return Err(Error::NonFinite { t: out.t });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub h: f64,
    pub cfl: f64,
    pub t_max: f64,
    /// Blow-up is declared once `max(|u|, |u_t|)` reaches this value.
    pub threshold: f64,
    /// `dt <= rate_cap / max_j rate(u_j, v_j)` keeps the nonlinear point
    /// dynamics resolved as the solution grows.
    pub rate_cap: f64,
    /// Times at which full field snapshots are stored; the step is clipped
    /// to land on each exactly.
    pub snapshot_times: Vec<f64>,
    pub max_steps: usize,
    /// Relative size allowed for values beyond `t + R + 2h`, where `R` is
    /// the data radius. Exceeding it is recorded in
    /// [`RunOutput::support_ok`] but does not stop the run.
    pub support_tol: f64,
    /// Relative size beyond `t + R + 2h` that marks the run unstable.
    pub support_guard: f64,
}

impl SimConfig {
    pub fn new(h: f64, cfl: f64, t_max: f64, threshold: f64) -> Self {
        Self {
            h,
            cfl,
            t_max,
            threshold,
            rate_cap: 0.1,
            snapshot_times: Vec::new(),
            max_steps: 50_000_000,
            support_tol: 1e-12,
            support_guard: 1e-2,
        }
    }

    /// Snapshots at `0, Δ, 2Δ, …` up to `t_max`.
    pub fn with_snapshot_interval(mut self, interval: f64) -> Self {
        let count = (self.t_max / interval + 1e-9).floor() as usize;
        self.snapshot_times = (0..=count).map(|k| k as f64 * interval).collect();
        self
    }

    pub fn with_snapshots(mut self, mut times: Vec<f64>) -> Self {
        times.sort_by(f64::total_cmp);
        times.dedup();
        self.snapshot_times = times;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.h > 0.0 && self.h <= 0.5) {
            return Err(invalid(format!("h must lie in (0, 0.5], got {}", self.h)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(invalid(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(invalid(format!(
                "t_max must be positive, got {}",
                self.t_max
            )));
        }
        if !(self.threshold >= 1e4) {
            return Err(invalid(format!(
                "threshold must be >= 1e4, got {}",
                self.threshold
            )));
        }
        if !(self.rate_cap > 0.0) {
            return Err(invalid("rate_cap must be positive"));
        }
        if self.snapshot_times.iter().any(|t| !(*t >= 0.0)) {
            return Err(invalid("snapshot times must be >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum RunStatus {
    BlewUp,
    ReachedTMax,
    Unstable { reason: String },
}

impl RunStatus {
    pub fn label(&self) -> &'static str {
        match self {
            Self::BlewUp => "blew_up",
            Self::ReachedTMax => "reached_t_max",
            Self::Unstable { .. } => "unstable",
        }
    }
}

/// Per-step scalar diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub max_u: f64,
    pub max_v: f64,
    pub min_u: f64,
    /// `∫ u dx`
    pub mass: f64,
    /// `∫ F(u, u_t) dx`, equal to the second time derivative of the mass.
    pub nonlinear_integral: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunOutput {
    pub n: u32,
    pub epsilon: f64,
    pub grid: RadialGrid,
    pub nonlinearity: NonlinearitySpec,
    pub status: RunStatus,
    pub t_final: f64,
    /// Radius where `max(|u|, |u_t|)` peaks at the end of the run.
    pub peak_r: f64,
    pub steps: usize,
    /// Radius containing the data support.
    pub data_radius: f64,
    /// Largest value seen beyond `t + R + 2h`, relative to
    /// `max(1, max|u|)` at the same step.
    pub support_leak: f64,
    /// `support_leak <= support_tol`.
    pub support_ok: bool,
    pub series: Vec<SeriesRow>,
    pub snapshots: Vec<SolutionState>,
}

impl RunOutput {
    pub fn blew_up(&self) -> bool {
        self.status == RunStatus::BlewUp
    }

    /// End of the trustworthy window: `0.9 T` after blow-up, `t_final`
    /// otherwise.
    pub fn window_end(&self) -> f64 {
        if self.blew_up() {
            0.9 * self.t_final
        } else {
            self.t_final
        }
    }

    pub fn operator(&self) -> Result<RadialOperator> {
        RadialOperator::new(self.grid, self.n)
    }
}

/// Smallest radius beyond which both data profiles vanish on `[0, 10]`.
fn data_radius(problem: &ProblemSpec) -> Result<f64> {
    let step = 1e-3;
    let mut last = 0.0;
    for i in 0..=10_000 {
        let r = i as f64 * step;
        if problem.data.f.eval(r) != 0.0 || problem.data.g.eval(r) != 0.0 {
            last = r;
        }
    }
    if last >= 10.0 - step {
        return Err(invalid("initial data must vanish for r >= 10"));
    }
    Ok(if last == 0.0 && problem.is_zero_data() {
        0.0
    } else {
        last + step
    })
}

fn stats(
    op: &RadialOperator,
    nl: &NonlinearitySpec,
    t: f64,
    u: &[f64],
    v: &[f64],
    m: usize,
) -> (SeriesRow, usize) {
    let vol = op.volumes();
    let (mut max_u, mut max_v, mut min_u) = (0.0f64, 0.0f64, f64::INFINITY);
    let (mut mass, mut nonlin) = (0.0, 0.0);
    let (mut peak, mut peak_j) = (-1.0, 0);
    for j in 0..m {
        let (a, b) = (u[j], v[j]);
        max_u = max_u.max(a.abs());
        max_v = max_v.max(b.abs());
        min_u = min_u.min(a);
        mass += vol[j] * a;
        if !nl.is_linear() {
            nonlin += vol[j] * nl.eval(a, b);
        }
        let p = a.abs().max(b.abs());
        if p > peak {
            peak = p;
            peak_j = j;
        }
    }
    let w = op.sphere_factor();
    (
        SeriesRow {
            t,
            max_u,
            max_v,
            min_u: if m == 0 { 0.0 } else { min_u },
            mass: w * mass,
            nonlinear_integral: w * nonlin,
        },
        peak_j,
    )
}

/// Runs the problem until blow-up, `t_max`, or a diagnostic failure.
pub fn simulate(problem: &ProblemSpec, cfg: &SimConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let radius = data_radius(problem)?;
    let grid = RadialGrid::covering(cfg.h, cfg.t_max + radius + 1.0)?;
    let mut stepper = Stepper::new(grid, problem.n, problem.nonlinearity.clone())?;
    let eps = problem.epsilon();
    let mut u: Vec<f64> = (0..grid.cells)
        .map(|j| eps * problem.data.f.eval(grid.r(j)))
        .collect();
    let mut v: Vec<f64> = (0..grid.cells)
        .map(|j| eps * problem.data.g.eval(grid.r(j)))
        .collect();

    let active =
        |t: f64| (((radius + t) / grid.h).ceil() as usize + margin(t, grid.h)).min(grid.cells);
    let mut t = 0.0;
    let mut steps = 0;
    let mut snaps = cfg
        .snapshot_times
        .iter()
        .copied()
        .filter(|s| *s <= cfg.t_max)
        .peekable();
    let mut snapshots = Vec::new();
    let mut series = Vec::new();
    let mut support_leak = 0.0f64;

    let take = |t: f64, u: &[f64], v: &[f64], m: usize| SolutionState {
        t,
        u: u[..m].to_vec(),
        v: v[..m].to_vec(),
    };

    let (row, mut peak_j) = stats(
        stepper.operator(),
        &problem.nonlinearity,
        0.0,
        &u,
        &v,
        active(0.0),
    );
    series.push(row);
    while snaps.peek().is_some_and(|s| *s <= 0.0) {
        snaps.next();
        snapshots.push(take(0.0, &u, &v, active(0.0)));
    }

    let status = loop {
        if t >= cfg.t_max {
            break RunStatus::ReachedTMax;
        }
        if steps >= cfg.max_steps {
            break RunStatus::Unstable {
                reason: format!("step budget of {} exhausted at t = {t}", cfg.max_steps),
            };
        }
        let m = active(t + cfg.cfl * grid.h);
        let rate = stepper.max_rate(&u, &v, m);
        let mut dt = cfg.cfl * grid.h;
        if rate > 0.0 {
            dt = dt.min(cfg.rate_cap / rate);
        }
        let mut t_new = t + dt;
        let mut landed_snapshot = false;
        if let Some(&s) = snaps.peek() {
            if t_new >= s - 1e-12 * s.max(1.0) {
                t_new = s;
                landed_snapshot = true;
            }
        }
        if t_new >= cfg.t_max {
            t_new = cfg.t_max;
        }
        dt = t_new - t;
        if !(dt > 0.0) {
            break RunStatus::Unstable {
                reason: format!("time step collapsed at t = {t}"),
            };
        }
        stepper.advance(&mut u, &mut v, dt, m);
        t = t_new;
        steps += 1;

        let (row, pj) = stats(stepper.operator(), &problem.nonlinearity, t, &u, &v, m);
        peak_j = pj;
        if !(row.max_u.is_finite() && row.max_v.is_finite() && row.mass.is_finite()) {
            break RunStatus::Unstable {
                reason: format!("non-finite state at t = {t} before reaching the threshold"),
            };
        }
        series.push(row);

        let edge = t + radius + 2.0 * grid.h;
        let scale = row.max_u.max(1.0);
        let first_out = ((edge / grid.h - 0.5).floor().max(0.0) as usize + 1).min(m);
        for j in first_out..m {
            support_leak = support_leak.max((u[j].abs() + v[j].abs()) / scale);
        }
        if support_leak > cfg.support_guard {
            break RunStatus::Unstable {
                reason: format!("support cone violated at t = {t} (leak {support_leak:e})"),
            };
        }

        if landed_snapshot {
            snaps.next();
            snapshots.push(take(t, &u, &v, m));
        }
        if row.max_u.max(row.max_v) >= cfg.threshold {
            break RunStatus::BlewUp;
        }
    };

    Ok(RunOutput {
        n: problem.n,
        epsilon: eps,
        grid,
        nonlinearity: problem.nonlinearity.clone(),
        status,
        t_final: t,
        peak_r: grid.r(peak_j),
        steps,
        data_radius: radius,
        support_leak,
        support_ok: support_leak <= cfg.support_tol,
        series,
        snapshots,
    })
}
