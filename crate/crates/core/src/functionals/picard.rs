//! Fixed-point solution of the two-dimensional exterior problem `r > t`.
//!
//! With `w = r^{1/2} u`, the radial equation becomes
//! `w_tt - w_rr = S`, `S = ¼ r^{-3/2} u + r^{1/2} F(u, u_t)`, and for
//! `u(0) = 0`, `u_t(0) = ε g` D'Alembert's formula gives
//!
//! ```text
//! w(ξ, η) = ε ∫_ξ^η G(λ) dλ + ¼ ∬_{ξ <= ξ' <= η' <= η} S(ξ', η') dξ' dη'
//! ```
//!
//! in `ξ = r - t`, `η = r + t`, with `G = ½ r^{1/2} g`. Every point of the
//! triangle has `ξ' >= ξ`, so the exterior region is closed under this map.
//! On a lattice aligned with the characteristics the triangle is a union of
//! grid squares (and half squares on the diagonal), so its integral is a
//! prefix sum and no interpolation across the light cone is needed.

use serde::{Deserialize, Serialize};

use super::interpolate;
use crate::error::{invalid, Error, Result};
use crate::solver::{ProblemSpec, RunOutput};
use crate::special::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardConfig {
    pub t_end: f64,
    /// Lattice spacing in `ξ` and `η`; times are multiples of `spacing/2`.
    pub spacing: f64,
    /// Smallest `ξ = r - t` kept, away from the origin.
    pub xi_lo: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            t_end: 0.5,
            spacing: 0.01,
            xi_lo: 0.05,
            tol: 1e-8,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardSample {
    pub t: f64,
    pub r: f64,
    pub w: f64,
    pub u: f64,
    pub ut: f64,
    /// `ε ∫_{r-t}^{r+t} G`
    pub linear: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardSolution {
    pub config: PicardConfig,
    pub iterations: usize,
    /// Sup norm of successive iterate differences.
    pub differences: Vec<f64>,
    /// Largest ratio of consecutive differences.
    pub contraction_ratio: f64,
    pub converged: bool,
    /// Nodes ordered by `ξ` index, then by time.
    pub samples: Vec<PicardSample>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardComparison {
    pub max_abs_diff: f64,
    pub compared: usize,
    pub max_abs_u: f64,
}

impl PicardSolution {
    /// Largest `|u_picard - u_fd|` over nodes at the run's snapshot times,
    /// with the finite-difference field interpolated linearly in `r`.
    pub fn compare_with_run(&self, run: &RunOutput) -> Result<PicardComparison> {
        let mut out = PicardComparison {
            max_abs_diff: 0.0,
            compared: 0,
            max_abs_u: 0.0,
        };
        for snap in &run.snapshots {
            if snap.t <= 0.0 || snap.t > self.config.t_end + 1e-12 {
                continue;
            }
            for s in self.samples.iter().filter(|s| (s.t - snap.t).abs() < 1e-12) {
                let fd = interpolate(&snap.u, run.grid.h, s.r);
                out.max_abs_diff = out.max_abs_diff.max((fd - s.u).abs());
                out.max_abs_u = out.max_abs_u.max(s.u.abs());
                out.compared += 1;
            }
        }
        if out.compared == 0 {
            return Err(Error::MissingInput(
                "no snapshot times coincide with lattice times".into(),
            ));
        }
        Ok(out)
    }

    /// `min (w - ε ∫ G)` over all nodes; nonnegative when the iterate
    /// dominates the linear term.
    pub fn min_excess_over_linear(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.w - s.linear)
            .fold(f64::INFINITY, f64::min)
    }
}

struct Lattice {
    xi_lo: f64,
    step: f64,
    /// last `ξ` index; `ξ_I >= 1` so everything beyond vanishes
    last: usize,
    /// `η - ξ` spans at most `depth` steps
    depth: usize,
}

impl Lattice {
    #[inline]
    fn idx(&self, i: usize, d: usize) -> usize {
        i * (self.depth + 1) + d
    }

    fn len(&self) -> usize {
        (self.last + 1) * (self.depth + 1)
    }

    #[inline]
    fn coord(&self, k: usize) -> f64 {
        self.xi_lo + k as f64 * self.step
    }
}

/// Iterates the D'Alembert map from `w = 0`. With `iterations = Some(m)`
/// exactly `m` iterates are taken; otherwise the loop runs until successive
/// iterates differ by less than `tol` in sup norm.
pub fn dalembert_picard(
    problem: &ProblemSpec,
    cfg: &PicardConfig,
    iterations: Option<usize>,
) -> Result<PicardSolution> {
    if problem.n != 2 {
        return Err(invalid("the exterior representation is two-dimensional"));
    }
    if !problem.data.f.is_zero() {
        return Err(invalid("the exterior representation assumes u(0) = 0"));
    }
    if !(cfg.t_end > 0.0 && cfg.t_end <= 1.0) {
        return Err(invalid(format!(
            "t_end must lie in (0, 1], got {}",
            cfg.t_end
        )));
    }
    if !(cfg.spacing > 0.0 && cfg.xi_lo > 0.0 && cfg.tol > 0.0) {
        return Err(invalid("spacing, xi_lo and tol must be positive"));
    }
    let depth_f = 2.0 * cfg.t_end / cfg.spacing;
    let depth = depth_f.round() as usize;
    if (depth_f - depth as f64).abs() > 1e-9 || depth == 0 {
        return Err(invalid(
            "2 t_end must be a positive multiple of the spacing",
        ));
    }
    let lat = Lattice {
        xi_lo: cfg.xi_lo,
        step: cfg.spacing,
        last: ((1.0 - cfg.xi_lo) / cfg.spacing).ceil().max(1.0) as usize,
        depth,
    };
    let eps = problem.epsilon();
    let g = &problem.data.g;
    let big_g = |lam: f64| 0.5 * lam.sqrt() * g.eval(lam);

    // prefix integrals P(k) = ∫_{ξ_lo}^{ξ_lo + kΔ} G by 10-point Gauss per cell
    let (gx, gw) = gauss_legendre(10);
    let top = lat.last + lat.depth;
    let mut prefix = vec![0.0; top + 1];
    for k in 1..=top {
        let (a, b) = (lat.coord(k - 1), lat.coord(k));
        let cell: f64 = gx
            .iter()
            .zip(&gw)
            .map(|(x, w)| w * big_g(0.5 * (a + b) + 0.5 * (b - a) * x))
            .sum::<f64>()
            * 0.5
            * (b - a);
        prefix[k] = prefix[k - 1] + cell;
    }

    let n = lat.len();
    let mut linear = vec![0.0; n];
    let mut radius = vec![0.0; n];
    let mut g_sum = vec![0.0; n];
    for i in 0..=lat.last {
        for d in 0..=lat.depth {
            let id = lat.idx(i, d);
            linear[id] = eps * (prefix[i + d] - prefix[i]);
            radius[id] = lat.xi_lo + (i as f64 + 0.5 * d as f64) * lat.step;
            g_sum[id] = eps * (big_g(lat.coord(i + d)) + big_g(lat.coord(i)));
        }
    }

    let nl = &problem.nonlinearity;
    let mut w = vec![0.0; n];
    let mut wt = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut area = vec![0.0; n];
    let mut line_xi = vec![0.0; n];
    let mut line_eta = vec![0.0; n];
    let mut differences = Vec::new();
    let mut converged = false;
    let mut growing = 0;
    let dd = lat.step;
    let limit = iterations.unwrap_or(cfg.max_iter);

    for m in 0..limit {
        for id in 0..n {
            let r = radius[id];
            let sr = r.sqrt();
            let (u, ut) = (w[id] / sr, wt[id] / sr);
            s[id] = 0.25 * u / (r * sr) + sr * nl.eval(u, ut);
        }
        let at = |v: &[f64], i: usize, d: usize| if i <= lat.last { v[lat.idx(i, d)] } else { 0.0 };
        for d in 0..=lat.depth {
            for i in 0..=lat.last {
                let id = lat.idx(i, d);
                if d == 0 {
                    area[id] = 0.0;
                    line_xi[id] = 0.0;
                    line_eta[id] = 0.0;
                    continue;
                }
                let cell = if d == 1 {
                    dd * dd / 6.0 * (s[lat.idx(i, 0)] + s[id] + at(&s, i + 1, 0))
                } else {
                    dd * dd / 4.0
                        * (s[lat.idx(i, d - 1)]
                            + s[id]
                            + at(&s, i + 1, d - 2)
                            + at(&s, i + 1, d - 1))
                };
                let back = if d >= 2 { at(&area, i + 1, d - 2) } else { 0.0 };
                area[id] = at(&area, i + 1, d - 1) + area[lat.idx(i, d - 1)] - back + cell;
                line_eta[id] =
                    at(&line_eta, i + 1, d - 1) + 0.5 * dd * (s[id] + at(&s, i + 1, d - 1));
                line_xi[id] =
                    line_xi[lat.idx(i, d - 1)] + 0.5 * dd * (s[lat.idx(i, d - 1)] + s[id]);
            }
        }
        let mut diff = 0.0f64;
        for id in 0..n {
            let w_new = linear[id] + 0.25 * area[id];
            let wt_new = g_sum[id] + 0.25 * (line_eta[id] + line_xi[id]);
            diff = diff.max((w_new - w[id]).abs());
            w[id] = w_new;
            wt[id] = wt_new;
        }
        if !diff.is_finite() {
            return Err(Error::NotContracting(format!(
                "non-finite iterate at step {}",
                m + 1
            )));
        }
        if let Some(&prev) = differences.last() {
            growing = if diff > prev { growing + 1 } else { 0 };
        }
        differences.push(diff);
        if iterations.is_none() {
            if diff < cfg.tol {
                converged = true;
                break;
            }
            if growing >= 3 {
                return Err(Error::NotContracting(format!(
                    "differences grew for three iterations (last {diff:e}); reduce t_end or epsilon"
                )));
            }
        }
    }
    if iterations.is_none() && !converged {
        return Err(Error::NotContracting(format!(
            "no convergence in {} iterations",
            cfg.max_iter
        )));
    }
    let contraction_ratio = differences
        .windows(2)
        .skip(1)
        .map(|p| p[1] / p[0])
        .fold(0.0, f64::max);

    let samples = (0..=lat.last)
        .flat_map(|i| (0..=lat.depth).map(move |d| (i, d)))
        .map(|(i, d)| {
            let id = lat.idx(i, d);
            let sr = radius[id].sqrt();
            PicardSample {
                t: 0.5 * d as f64 * lat.step,
                r: radius[id],
                w: w[id],
                u: w[id] / sr,
                ut: wt[id] / sr,
                linear: linear[id],
            }
        })
        .collect();
    Ok(PicardSolution {
        config: *cfg,
        iterations: differences.len(),
        differences,
        contraction_ratio,
        converged,
        samples,
    })
}
