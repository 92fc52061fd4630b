//! Spectral heat flow against the closed-form Gaussian.

use blowup_lab::pde::{Diffusion, Grid};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = Grid::new(1, 256, 20.0)?;
    let heat = Diffusion::new(grid);
    let s0 = 1.0;
    for k in [0.1, 0.5, 2.0] {
        let mut u: Vec<f64> = (0..grid.len()).map(|i| (-grid.coord(i).powi(2) / (4.0 * s0)).exp()).collect();
        heat.apply(&mut u, k);
        let err = (0..grid.len())
            .map(|i| {
                let x = grid.coord(i);
                let exact = (s0 / (s0 + k)).sqrt() * (-x * x / (4.0 * (s0 + k))).exp();
                (u[i] - exact).abs()
            })
            .fold(0.0, f64::max);
        println!("K = {k}: max error {err:.2e}");
    }
    Ok(())
}
