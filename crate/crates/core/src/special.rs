//! The test functions `φ₁(x) = ∫_{S^{n-1}} e^{x·ω} dω` and
//! `ψ₁(x, t) = φ₁(x) e^{-t}`.
//!
//! `φ₁` is radial, so it reduces to a one-dimensional integral over the
//! polar angle. Two quadratures are used:
//!
//! * even `n`: periodic trapezoid in `θ` on `e^{r cos θ} sin^{n-2} θ`, which
//!   is smooth and periodic, so the rule converges spectrally;
//! * odd `n`: Gauss–Legendre in `ω₁ = cos θ` on `e^{r ω₁} (1 - ω₁²)^{(n-3)/2}`,
//!   whose weight is a polynomial.
//!
//! Values are also available pre-multiplied by `e^{-r}` so that `ψ₁` can be
//! formed as `φ̃₁(r) e^{r - t}` without overflow at large radii.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Surface area of the unit sphere `S^m ⊂ R^{m+1}`.
pub fn sphere_area(m: u32) -> f64 {
    match m {
        0 => 2.0,
        1 => 2.0 * std::f64::consts::PI,
        _ => 2.0 * std::f64::consts::PI / (m as f64 - 1.0) * sphere_area(m - 2),
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; count];
    let mut weights = vec![0.0; count];
    let n = count as f64;
    for i in 0..count.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=count {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            let p = if count == 0 { 1.0 } else { p1 };
            let pm1 = if count == 1 { 1.0 } else { p0 };
            dp = n * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[count - 1 - i] = x;
        weights[i] = w;
        weights[count - 1 - i] = w;
    }
    (nodes, weights)
}

/// Quadrature rule for `φ₁` in a fixed dimension. Immutable after
/// construction.
#[derive(Debug, Clone)]
pub struct Phi1Evaluator {
    n: u32,
    quadrature_nodes: usize,
    abscissae: Vec<f64>,
    weights: Vec<f64>,
}

impl Phi1Evaluator {
    pub const DEFAULT_NODES: usize = 256;

    pub fn new(n: u32, quadrature_nodes: usize) -> Result<Self> {
        if n < 2 {
            return Err(crate::error::Error::Dimension(n as i64));
        }
        if quadrature_nodes < 64 || !quadrature_nodes.is_multiple_of(2) {
            return Err(invalid(format!(
                "quadrature_nodes must be even and >= 64, got {quadrature_nodes}"
            )));
        }
        let area = sphere_area(n - 2);
        let (abscissae, weights) = if n.is_multiple_of(2) {
            let step = 2.0 * std::f64::consts::PI / quadrature_nodes as f64;
            (0..quadrature_nodes)
                .map(|i| {
                    let theta = step * i as f64;
                    let w = 0.5 * area * step * theta.sin().powi(n as i32 - 2);
                    (theta.cos(), w)
                })
                .unzip()
        } else {
            let (x, w) = gauss_legendre(quadrature_nodes);
            let half = (n as i32 - 3) / 2;
            let w = x
                .iter()
                .zip(&w)
                .map(|(x, w)| area * w * (1.0 - x * x).powi(half))
                .collect();
            (x, w)
        };
        Ok(Self {
            n,
            quadrature_nodes,
            abscissae,
            weights,
        })
    }

    pub fn with_default_nodes(n: u32) -> Result<Self> {
        Self::new(n, Self::DEFAULT_NODES)
    }

    pub fn dimension(&self) -> u32 {
        self.n
    }

    pub fn quadrature_nodes(&self) -> usize {
        self.quadrature_nodes
    }

    /// `φ₁(r) e^{-r}`, bounded for all `r >= 0`.
    pub fn phi1_scaled(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        Ok(self.phi1_scaled_unchecked(r))
    }

    pub(crate) fn phi1_scaled_unchecked(&self, r: f64) -> f64 {
        self.abscissae
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * (r * (c - 1.0)).exp())
            .sum()
    }

    pub fn phi1(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        Ok(self
            .abscissae
            .iter()
            .zip(&self.weights)
            .map(|(c, w)| w * (r * c).exp())
            .sum())
    }

    pub fn psi1(&self, r: f64, t: f64) -> Result<f64> {
        Ok(self.phi1_scaled(r)? * (r - t).exp())
    }

    /// Samples `φ₁(r) e^{-r} (1 + r)^{(n-1)/2}` on `samples` equispaced points
    /// of `[0, r_max]`. The maximum is an empirical constant for
    /// `φ₁(r) <= C e^r (1 + r)^{-(n-1)/2}`.
    pub fn check_growth_bound(&self, r_max: f64, samples: usize) -> Result<GrowthReport> {
        if !(r_max > 0.0) || !r_max.is_finite() {
            return Err(invalid(format!("r_max must be positive, got {r_max}")));
        }
        if samples < 10 {
            return Err(invalid("need at least 10 samples"));
        }
        let power = (self.n as f64 - 1.0) / 2.0;
        let rows: Vec<GrowthSample> = (0..samples)
            .map(|i| {
                let r = r_max * i as f64 / (samples - 1) as f64;
                let scaled = self.phi1_scaled_unchecked(r);
                GrowthSample {
                    r,
                    phi1: scaled * r.exp(),
                    bound_ratio: scaled * (1.0 + r).powf(power),
                }
            })
            .collect();
        let tail_start = samples - samples / 10;
        let head_max = rows[..tail_start]
            .iter()
            .map(|s| s.bound_ratio)
            .fold(f64::NEG_INFINITY, f64::max);
        let tail_max = rows[tail_start..]
            .iter()
            .map(|s| s.bound_ratio)
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(GrowthReport {
            max_ratio: head_max.max(tail_max),
            monotone_ok: tail_max <= head_max * (1.0 + 1e-12),
            samples: rows,
        })
    }

    /// `|D²φ₁ + ((n-1)/r) Dφ₁ - φ₁|` with centered differences of step `h`.
    pub fn check_eigen_relation(&self, r: f64, h: f64) -> Result<f64> {
        if !(h > 0.0 && r > h) {
            return Err(invalid(format!("need r > h > 0, got r = {r}, h = {h}")));
        }
        let (m, c, p) = (self.phi1(r - h)?, self.phi1(r)?, self.phi1(r + h)?);
        let d2 = (p - 2.0 * c + m) / (h * h);
        let d1 = (p - m) / (2.0 * h);
        Ok((d2 + (self.n as f64 - 1.0) / r * d1 - c).abs())
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("radius must be finite and >= 0, got {r}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthSample {
    pub r: f64,
    pub phi1: f64,
    pub bound_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub max_ratio: f64,
    /// The last decile of samples never exceeds the maximum of the rest.
    pub monotone_ok: bool,
    pub samples: Vec<GrowthSample>,
}
