//! Integral functionals of solver output and monitors for the inequalities
//! they are expected to satisfy.
//!
//! Every monitor samples a run at its snapshot times (all of them when a
//! run has none stored, for series-only monitors), restricted to a window
//! that ends at `0.9 T` after a blow-up. Because snapshot times are fixed in
//! advance, runs at different `h` are compared on identical sample sets.
//! Monitors never assert a particular constant; they report the smallest
//! normalized value seen, which must be positive.

mod picard;

pub use picard::{dalembert_picard, PicardComparison, PicardConfig, PicardSample, PicardSolution};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::solver::{RadialOperator, RunOutput, SeriesRow, SolutionState};
use crate::special::Phi1Evaluator;

/// `∫ u dx = |S^{n-1}| Σ_j V_j u_j`.
pub fn mass_functional(state: &SolutionState, op: &RadialOperator) -> f64 {
    op.integrate(state.u.iter().copied())
}

/// `ψ₁(r_j, t)` on the cells of a grid, with `φ₁ e^{-r}` cached.
#[derive(Debug, Clone)]
pub struct PsiTable {
    phi_scaled: Vec<f64>,
    centers: Vec<f64>,
}

impl PsiTable {
    pub fn new(ev: &Phi1Evaluator, op: &RadialOperator) -> Result<Self> {
        if ev.dimension() != op.dimension() {
            return Err(invalid("evaluator and operator dimensions differ"));
        }
        let centers = op.grid().centers();
        let phi_scaled = centers
            .iter()
            .map(|&r| ev.phi1_scaled(r))
            .collect::<Result<_>>()?;
        Ok(Self {
            phi_scaled,
            centers,
        })
    }

    #[inline]
    pub fn psi(&self, j: usize, t: f64) -> f64 {
        self.phi_scaled[j] * (self.centers[j] - t).exp()
    }
}

/// `∫ ψ₁(x, t) u_t dx`.
pub fn weighted_velocity(state: &SolutionState, op: &RadialOperator, psi: &PsiTable) -> f64 {
    op.integrate(
        state
            .v
            .iter()
            .enumerate()
            .map(|(j, v)| psi.psi(j, state.t) * v),
    )
}

/// `∫ |u_t|^p dx`.
pub fn velocity_power_integral(state: &SolutionState, op: &RadialOperator, p: f64) -> f64 {
    op.integrate(state.v.iter().map(|v| v.abs().powf(p)))
}

/// `∫ ψ₁^{p'} dx` over the cells stored in the state.
pub fn psi_power_integral(
    state: &SolutionState,
    op: &RadialOperator,
    psi: &PsiTable,
    p_dual: f64,
) -> f64 {
    op.integrate((0..state.v.len()).map(|j| psi.psi(j, state.t).powf(p_dual)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginMode {
    /// margin `lhs - rhs`; the fitted constant is `min lhs`
    Difference,
    /// margin `lhs / rhs - 1`; the fitted constant is `min lhs / rhs`
    Ratio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorReport {
    pub name: String,
    pub times: Vec<f64>,
    pub lhs: Vec<f64>,
    pub rhs: Vec<f64>,
    pub margin_mode: MarginMode,
    pub min_margin: f64,
    pub fitted_constant: f64,
    /// Difference mode: `fitted_constant > 0`. Ratio mode: `min_margin >= -1e-12`.
    pub passed: bool,
}

impl MonitorReport {
    pub fn new(
        name: &str,
        times: Vec<f64>,
        lhs: Vec<f64>,
        rhs: Vec<f64>,
        margin_mode: MarginMode,
    ) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Degenerate(format!(
                "{name}: no samples in the window"
            )));
        }
        if times.len() != lhs.len() || lhs.len() != rhs.len() {
            return Err(invalid("monitor sequences differ in length"));
        }
        let (min_margin, fitted_constant) = match margin_mode {
            MarginMode::Difference => {
                let m = lhs
                    .iter()
                    .zip(&rhs)
                    .map(|(l, r)| l - r)
                    .fold(f64::INFINITY, f64::min);
                (m, lhs.iter().copied().fold(f64::INFINITY, f64::min))
            }
            MarginMode::Ratio => {
                let m = lhs
                    .iter()
                    .zip(&rhs)
                    .map(|(l, r)| l / r)
                    .fold(f64::INFINITY, f64::min);
                (m - 1.0, m)
            }
        };
        if !min_margin.is_finite() {
            return Err(Error::Degenerate(format!("{name}: margin is not finite")));
        }
        let passed = match margin_mode {
            MarginMode::Difference => fitted_constant > 0.0,
            MarginMode::Ratio => min_margin >= -1e-12,
        };
        Ok(Self {
            name: name.to_string(),
            times,
            lhs,
            rhs,
            margin_mode,
            min_margin,
            fitted_constant,
            passed,
        })
    }

    /// `|c_a - c_b| / |c_b|` for two reports of the same monitor.
    pub fn relative_change(&self, other: &MonitorReport) -> f64 {
        (self.fitted_constant - other.fitted_constant).abs() / other.fitted_constant.abs()
    }
}

/// Sampling window `[t_lo, min(t_hi, end of trustworthy window)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub t_lo: f64,
    pub t_hi: Option<f64>,
}

impl Window {
    pub fn from(t_lo: f64) -> Self {
        Self { t_lo, t_hi: None }
    }

    pub fn between(t_lo: f64, t_hi: f64) -> Self {
        Self {
            t_lo,
            t_hi: Some(t_hi),
        }
    }

    fn bounds(&self, run: &RunOutput) -> (f64, f64) {
        let end = run.window_end();
        (self.t_lo, self.t_hi.map_or(end, |t| t.min(end)))
    }
}

/// Series rows paired with the snapshots taken at the same times.
fn snapshot_rows(run: &RunOutput, window: Window) -> Vec<(SeriesRow, &SolutionState)> {
    let (lo, hi) = window.bounds(run);
    let mut out = Vec::new();
    let mut rows = run.series.iter().peekable();
    for snap in &run.snapshots {
        if snap.t < lo - 1e-12 || snap.t > hi + 1e-12 {
            continue;
        }
        while rows.peek().is_some_and(|r| r.t < snap.t) {
            rows.next();
        }
        if let Some(row) = rows.peek() {
            if row.t == snap.t {
                out.push((**row, snap));
            }
        }
    }
    out
}

/// Series rows at snapshot times, or every row if the run stored none.
fn series_rows(run: &RunOutput, window: Window) -> Vec<SeriesRow> {
    if run.snapshots.is_empty() {
        let (lo, hi) = window.bounds(run);
        run.series
            .iter()
            .filter(|r| r.t >= lo && r.t <= hi)
            .copied()
            .collect()
    } else {
        snapshot_rows(run, window)
            .into_iter()
            .map(|(r, _)| r)
            .collect()
    }
}

fn check_nondegenerate(run: &RunOutput) -> Result<()> {
    if run.series.iter().all(|r| r.max_u == 0.0 && r.max_v == 0.0) {
        return Err(Error::Degenerate("all functionals vanish".into()));
    }
    Ok(())
}

/// Linear interpolation of cell values at radius `r`.
pub(crate) fn interpolate(values: &[f64], h: f64, r: f64) -> f64 {
    let x = r / h - 0.5;
    if x <= 0.0 {
        return values.first().copied().unwrap_or(0.0);
    }
    let j = x.floor() as usize;
    let w = x - j as f64;
    let at = |k: usize| values.get(k).copied().unwrap_or(0.0);
    (1.0 - w) * at(j) + w * at(j + 1)
}

/// Band `t >= t_min`, `xi_lo <= r - t <= xi_hi` for the pointwise bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub t_min: f64,
    pub t_max: Option<f64>,
    pub xi_lo: f64,
    pub xi_hi: f64,
    pub samples: usize,
}

impl Default for Band {
    fn default() -> Self {
        Self {
            t_min: 0.5,
            t_max: None,
            xi_lo: 0.25,
            xi_hi: 0.75,
            samples: 21,
        }
    }
}

/// `min(u, u_t) · r^{1/2} / ε` on the band `¼ <= r - t <= ¾`, `t >= ½`,
/// for two-dimensional runs.
pub fn monitor_pointwise_band(run: &RunOutput, band: Band) -> Result<MonitorReport> {
    if run.n != 2 {
        return Err(invalid("the pointwise monitor applies to n = 2"));
    }
    if band.t_min < 0.5 || !(band.xi_lo < band.xi_hi) || band.samples < 2 {
        return Err(invalid("band needs t >= 1/2 and xi_lo < xi_hi"));
    }
    check_nondegenerate(run)?;
    let window = Window {
        t_lo: band.t_min,
        t_hi: band.t_max,
    };
    let h = run.grid.h;
    let (mut times, mut lhs) = (Vec::new(), Vec::new());
    for (_, snap) in snapshot_rows(run, window) {
        let mut low = f64::INFINITY;
        for i in 0..band.samples {
            let xi = band.xi_lo + (band.xi_hi - band.xi_lo) * i as f64 / (band.samples - 1) as f64;
            let r = snap.t + xi;
            let scale = r.sqrt() / run.epsilon;
            low = low
                .min(interpolate(&snap.u, h, r) * scale)
                .min(interpolate(&snap.v, h, r) * scale);
        }
        times.push(snap.t);
        lhs.push(low);
    }
    let rhs = vec![0.0; lhs.len()];
    MonitorReport::new(
        "pointwise_u_ut_band",
        times,
        lhs,
        rhs,
        MarginMode::Difference,
    )
}

/// `F(t) / (ε^m (1+t)^a)` over the window, with `F = ∫ u dx`.
pub fn monitor_mass_growth(
    run: &RunOutput,
    name: &str,
    eps_power: f64,
    a: f64,
    window: Window,
) -> Result<MonitorReport> {
    check_nondegenerate(run)?;
    let rows = series_rows(run, window);
    let times = rows.iter().map(|r| r.t).collect();
    let lhs = rows
        .iter()
        .map(|r| r.mass / (run.epsilon.powf(eps_power) * (1.0 + r.t).powf(a)))
        .collect();
    let rhs = vec![0.0; rows.len()];
    MonitorReport::new(name, times, lhs, rhs, MarginMode::Difference)
}

/// `F(t) / (ε³ (1+t)^{3/2})` for `t >= 1`.
pub fn monitor_cubic_mass_growth(run: &RunOutput) -> Result<MonitorReport> {
    monitor_mass_growth(run, "mass_growth_cubic", 3.0, 1.5, Window::from(1.0))
}

/// `F(t) / (ε^p (1+t)^{2 - (n-1)(p-2)/2})` for `t >= 1`.
pub fn monitor_power_mass_growth(run: &RunOutput, p: f64) -> Result<MonitorReport> {
    let a = 2.0 - (run.n as f64 - 1.0) * (p - 2.0) / 2.0;
    monitor_mass_growth(run, "mass_growth_power", p, a, Window::from(1.0))
}

/// `F''(t) (1+t)^α / F(t)^β` with `F'' = ∫ F(u, u_t) dx`, for `t >= 1`.
pub fn monitor_ode(run: &RunOutput, alpha: f64, beta: f64) -> Result<MonitorReport> {
    check_nondegenerate(run)?;
    let rows = series_rows(run, Window::from(1.0));
    if rows.iter().any(|r| r.mass <= 0.0) {
        return Err(Error::Degenerate(
            "mass is not positive in the window".into(),
        ));
    }
    let times = rows.iter().map(|r| r.t).collect();
    let lhs = rows
        .iter()
        .map(|r| r.nonlinear_integral * (1.0 + r.t).powf(alpha) / r.mass.powf(beta))
        .collect();
    let rhs = vec![0.0; rows.len()];
    MonitorReport::new("mass_ode", times, lhs, rhs, MarginMode::Difference)
}

/// `(α, β) = (6, 4)`, for `□u = u u_t² + u⁴` in two dimensions.
pub fn monitor_quartic_mass_ode(run: &RunOutput) -> Result<MonitorReport> {
    monitor_ode(run, 6.0, 4.0)
}

/// `(α, β) = (n(q-1), q)`, for `□u = |u_t|^p + |u|^q`.
pub fn monitor_power_mass_ode(run: &RunOutput, q: f64) -> Result<MonitorReport> {
    monitor_ode(run, run.n as f64 * (q - 1.0), q)
}

/// `∫ ψ₁ u_t dx / ε` from `t = 0`.
pub fn monitor_weighted_velocity(run: &RunOutput, ev: &Phi1Evaluator) -> Result<MonitorReport> {
    check_nondegenerate(run)?;
    let op = run.operator()?;
    let psi = PsiTable::new(ev, &op)?;
    let rows = snapshot_rows(run, Window::from(0.0));
    let times = rows.iter().map(|(r, _)| r.t).collect();
    let lhs = rows
        .iter()
        .map(|(_, s)| weighted_velocity(s, &op, &psi) / run.epsilon)
        .collect();
    let rhs = vec![0.0; rows.len()];
    MonitorReport::new("weighted_velocity", times, lhs, rhs, MarginMode::Difference)
}

/// `∫ |u_t|^p dx · (1+t)^{(n-1)(p-2)/2} / ε^p` for `t >= 1`.
pub fn monitor_velocity_power(run: &RunOutput, p: f64) -> Result<MonitorReport> {
    check_nondegenerate(run)?;
    let op = run.operator()?;
    let a = (run.n as f64 - 1.0) * (p - 2.0) / 2.0;
    let rows = snapshot_rows(run, Window::from(1.0));
    let times = rows.iter().map(|(r, _)| r.t).collect();
    let lhs = rows
        .iter()
        .map(|(r, s)| {
            velocity_power_integral(s, &op, p) * (1.0 + r.t).powf(a) / run.epsilon.powf(p)
        })
        .collect();
    let rhs = vec![0.0; rows.len()];
    MonitorReport::new("velocity_power", times, lhs, rhs, MarginMode::Difference)
}

/// Hölder: `|∫ ψ₁ u_t| <= (∫ |u_t|^p)^{1/p} (∫ ψ₁^{p'})^{1/p'}` at every
/// sample from `t = 0`, all integrals on the same cells.
pub fn monitor_holder_chain(run: &RunOutput, p: f64, ev: &Phi1Evaluator) -> Result<MonitorReport> {
    if !(p > 1.0) {
        return Err(invalid("Hölder exponent must exceed 1"));
    }
    check_nondegenerate(run)?;
    let op = run.operator()?;
    let psi = PsiTable::new(ev, &op)?;
    let p_dual = p / (p - 1.0);
    let rows = snapshot_rows(run, Window::from(0.0));
    let times = rows.iter().map(|(r, _)| r.t).collect();
    let lhs = rows
        .iter()
        .map(|(_, s)| {
            velocity_power_integral(s, &op, p).powf(1.0 / p)
                * psi_power_integral(s, &op, &psi, p_dual).powf(1.0 / p_dual)
        })
        .collect();
    let rhs = rows
        .iter()
        .map(|(_, s)| weighted_velocity(s, &op, &psi).abs())
        .collect();
    MonitorReport::new("holder_chain", times, lhs, rhs, MarginMode::Ratio)
}

/// `(t, Δ⁻² δ²F(t), ∫ F(u, u_t) dx)` at interior snapshot times whose
/// neighbors are equally spaced.
pub fn identity_residual(run: &RunOutput) -> Vec<(f64, f64, f64)> {
    let rows = series_rows(run, Window::from(0.0));
    rows.windows(3)
        .filter_map(|w| {
            let (d1, d2) = (w[1].t - w[0].t, w[2].t - w[1].t);
            ((d1 - d2).abs() <= 1e-9 * d1).then(|| {
                let second = (w[2].mass - 2.0 * w[1].mass + w[0].mass) / (d1 * d2);
                (w[1].t, second, w[1].nonlinear_integral)
            })
        })
        .collect()
}
