use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::grid::Grid;

/// Exact heat-kernel action on the periodic box via FFT.
#[derive(Clone)]
pub struct Diffusion {
    grid: Grid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    k2: Vec<f64>,
}

impl std::fmt::Debug for Diffusion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Diffusion").field("grid", &self.grid).finish()
    }
}

impl Diffusion {
    pub fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let n = grid.points_per_axis();
        Diffusion {
            grid,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            k2: grid.wavenumber_squared(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn wavenumber_squared(&self) -> &[f64] {
        &self.k2
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let n = self.grid.points_per_axis();
        // rows
        fft.process(data);
        if self.grid.dim() == 2 {
            let mut col = vec![Complex64::default(); n];
            for ix in 0..n {
                for iy in 0..n {
                    col[iy] = data[iy * n + ix];
                }
                fft.process(&mut col);
                for iy in 0..n {
                    data[iy * n + ix] = col[iy];
                }
            }
        }
    }

    pub fn forward(&self, field: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.forward);
        data
    }

    pub fn inverse(&self, mut spectrum: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut spectrum, &self.inverse);
        let scale = 1.0 / self.grid.len() as f64;
        spectrum.iter().map(|c| c.re * scale).collect()
    }

    /// Multiplies every mode by `exp(−‖k‖² K)`; the zero mode is untouched.
    pub fn apply(&self, field: &mut [f64], k_integral: f64) {
        if k_integral == 0.0 {
            return;
        }
        let mut s = self.forward(field);
        for (c, k2) in s.iter_mut().zip(&self.k2) {
            *c *= (-k2 * k_integral).exp();
        }
        field.copy_from_slice(&self.inverse(s));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_fixed_and_mean_preserved() {
        let g = Grid::new(2, 32, 5.0).unwrap();
        let d = Diffusion::new(g);
        let mut f = vec![3.0; g.len()];
        d.apply(&mut f, 0.7);
        assert!(f.iter().all(|v| (v - 3.0).abs() < 1e-14));
        let mut f: Vec<f64> = (0..g.len()).map(|i| 1.0 + (i as f64 * 0.37).sin().abs()).collect();
        let mean = f.iter().sum::<f64>() / f.len() as f64;
        d.apply(&mut f, 0.3);
        let after = f.iter().sum::<f64>() / f.len() as f64;
        assert!((after - mean).abs() <= 1e-13 * mean);
    }

    #[test]
    fn gaussian_evolves_in_closed_form() {
        let g = Grid::new(1, 256, 20.0).unwrap();
        let d = Diffusion::new(g);
        let (s0, k) = (1.0, 0.8);
        let mut f: Vec<f64> = (0..g.len()).map(|i| (-g.coord(i).powi(2) / (4.0 * s0)).exp()).collect();
        d.apply(&mut f, k);
        for (i, v) in f.iter().enumerate() {
            let x = g.coord(i);
            let exact = (s0 / (s0 + k)).sqrt() * (-x * x / (4.0 * (s0 + k))).exp();
            assert!((v - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_integral_is_identity() {
        let g = Grid::new(1, 16, 1.0).unwrap();
        let d = Diffusion::new(g);
        let orig: Vec<f64> = (0..16).map(|i| i as f64).collect();
        let mut f = orig.clone();
        d.apply(&mut f, 0.0);
        assert_eq!(f, orig);
    }
}
