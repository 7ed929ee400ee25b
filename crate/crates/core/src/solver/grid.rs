use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::special::sphere_area;

/// Cell-centered radial grid, `r_j = (j + ½) h` for `j = 0..cells`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub h: f64,
    pub cells: usize,
}

impl RadialGrid {
    pub fn new(h: f64, cells: usize) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid(format!("h must be positive, got {h}")));
        }
        if cells < 4 {
            return Err(invalid("a grid needs at least 4 cells"));
        }
        Ok(Self { h, cells })
    }

    /// Smallest grid covering `[0, r_max]`.
    pub fn covering(h: f64, r_max: f64) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(invalid(format!("r_max must be positive, got {r_max}")));
        }
        Self::new(h, (r_max / h - 1e-9).ceil().max(4.0) as usize)
    }

    #[inline]
    pub fn r(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.h
    }

    pub fn r_max(&self) -> f64 {
        self.cells as f64 * self.h
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.cells).map(|j| self.r(j)).collect()
    }

    /// Index of the cell containing `r`, clamped to the grid.
    pub fn cell_of(&self, r: f64) -> usize {
        ((r / self.h).floor().max(0.0) as usize).min(self.cells - 1)
    }
}

/// Conservative finite-volume discretization of
/// `Δ_r u = r^{1-n} (r^{n-1} u_r)_r` on a [`RadialGrid`].
///
/// Cell `j` has measure `V_j = (r_{j+½}^n - r_{j-½}^n) / n` and face `j+½`
/// carries `r_{j+½}^{n-1} / h`. The flux through `r = 0` vanishes (even
/// symmetry) and so does the flux through `r_max`. The scheme is exact on
/// quadratics, including the first cell, and `Σ_j V_j (L u)_j = 0`.
/// Dimension `n = 1` gives the plain three-point Laplacian with a reflecting
/// wall at `r = 0`.
#[derive(Debug, Clone)]
pub struct RadialOperator {
    grid: RadialGrid,
    n: u32,
    /// `face[j]` sits at `r_{j-½}`; `face[0] = face[cells] = 0`.
    face: Vec<f64>,
    volume: Vec<f64>,
    inv_volume: Vec<f64>,
}

impl RadialOperator {
    pub fn new(grid: RadialGrid, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(crate::error::Error::Dimension(0));
        }
        let h = grid.h;
        let nf = n as f64;
        let edge = |j: usize| j as f64 * h;
        let mut face: Vec<f64> = (0..=grid.cells)
            .map(|j| edge(j).powi(n as i32 - 1) / h)
            .collect();
        face[0] = 0.0;
        face[grid.cells] = 0.0;
        let volume: Vec<f64> = (0..grid.cells)
            .map(|j| (edge(j + 1).powi(n as i32) - edge(j).powi(n as i32)) / nf)
            .collect();
        let inv_volume = volume.iter().map(|v| 1.0 / v).collect();
        Ok(Self {
            grid,
            n,
            face,
            volume,
            inv_volume,
        })
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn dimension(&self) -> u32 {
        self.n
    }

    /// Radial cell measures `V_j`; the physical volume is `|S^{n-1}| V_j`.
    pub fn volumes(&self) -> &[f64] {
        &self.volume
    }

    /// `|S^{n-1}|`, with `2` for `n = 1`.
    pub fn sphere_factor(&self) -> f64 {
        sphere_area(self.n - 1)
    }

    /// `out[j] = (L u)_j` for `j < m`; cells at and beyond `m` are treated
    /// as zero.
    #[inline]
    pub fn apply(&self, u: &[f64], out: &mut [f64], m: usize) {
        debug_assert!(m <= self.grid.cells && u.len() >= m && out.len() >= m);
        if m == 0 {
            return;
        }
        let mut flux_in = 0.0;
        for j in 0..m {
            let right = if j + 1 < m { u[j + 1] } else { 0.0 };
            let flux_out = self.face[j + 1] * (right - u[j]);
            out[j] = (flux_out - flux_in) * self.inv_volume[j];
            flux_in = flux_out;
        }
    }

    /// `∫ w dx ≈ |S^{n-1}| Σ V_j w_j`.
    pub fn integrate(&self, w: impl IntoIterator<Item = f64>) -> f64 {
        self.sphere_factor()
            * w.into_iter()
                .zip(&self.volume)
                .map(|(w, v)| w * v)
                .sum::<f64>()
    }

    /// Discrete energy `½ Σ V_j v_j² + ½ Σ r_{j+½}^{n-1} (u_{j+1} - u_j)² / h`,
    /// conserved by the semi-discrete linear system.
    pub fn energy(&self, u: &[f64], v: &[f64]) -> f64 {
        let m = u.len().min(v.len()).min(self.grid.cells);
        let kinetic: f64 = (0..m).map(|j| self.volume[j] * v[j] * v[j]).sum();
        let potential: f64 = (0..m)
            .map(|j| {
                let right = if j + 1 < m { u[j + 1] } else { 0.0 };
                self.face[j + 1] * (right - u[j]).powi(2)
            })
            .sum();
        0.5 * (kinetic + potential)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn grid_geometry() {
        let g = RadialGrid::covering(0.1, 3.0).unwrap();
        assert_eq!(g.cells, 30);
        assert!((g.r(0) - 0.05).abs() < 1e-15);
        assert!((g.r_max() - 3.0).abs() < 1e-12);
        assert_eq!(g.cell_of(0.26), 2);
        assert!(RadialGrid::new(0.0, 10).is_err());
        assert!(RadialGrid::new(0.1, 2).is_err());
    }

    #[test]
    fn exact_on_quadratics() {
        for n in 1..=5 {
            let g = RadialGrid::new(0.05, 100).unwrap();
            let op = RadialOperator::new(g, n).unwrap();
            let u: Vec<f64> = g.centers().iter().map(|r| r * r).collect();
            let mut out = vec![0.0; g.cells];
            op.apply(&u, &mut out, g.cells);
            // the last cell sees the zero-flux wall at r_max
            for (j, lu) in out.iter().enumerate().take(g.cells - 1) {
                assert!((lu - 2.0 * n as f64).abs() < 1e-9, "n = {n}, j = {j}: {lu}");
            }
        }
    }

    #[test]
    fn volumes_sum_to_ball_measure() {
        let g = RadialGrid::new(0.01, 100).unwrap();
        let op = RadialOperator::new(g, 3).unwrap();
        let total = op.integrate(std::iter::repeat_n(1.0, g.cells));
        assert!((total - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
        let op2 = RadialOperator::new(g, 2).unwrap();
        for j in 0..g.cells {
            assert!((op2.volumes()[j] - g.r(j) * g.h).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn operator_is_conservative(values in prop::collection::vec(-1.0f64..1.0, 8..64), n in 1u32..5) {
            let g = RadialGrid::new(0.1, values.len()).unwrap();
            let op = RadialOperator::new(g, n).unwrap();
            let mut out = vec![0.0; values.len()];
            op.apply(&values, &mut out, values.len());
            let total: f64 = out.iter().zip(op.volumes()).map(|(o, v)| o * v).sum();
            prop_assert!(total.abs() < 1e-10);
        }

        #[test]
        fn operator_is_negative_semidefinite(values in prop::collection::vec(-1.0f64..1.0, 8..64), n in 1u32..5) {
            let g = RadialGrid::new(0.1, values.len()).unwrap();
            let op = RadialOperator::new(g, n).unwrap();
            let mut out = vec![0.0; values.len()];
            op.apply(&values, &mut out, values.len());
            let form: f64 = out.iter().zip(op.volumes()).zip(&values).map(|((o, v), u)| o * v * u).sum();
            let zeros = vec![0.0; values.len()];
            prop_assert!(form <= 1e-12);
            prop_assert!((form + 2.0 * op.energy(&values, &zeros)).abs() < 1e-9);
        }
    }
}
