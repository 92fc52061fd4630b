//! Fixed-point iteration of the mild formulation
//! `u_i(t) = U_i(0,t)φ_i + ∫_0^t U_i(s,t)[h_i u_i^{p_ii} u_j^{p_ij}](s) ds`
//! on composite Gauss–Legendre time nodes, compared against splitting.

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::Serialize;

use super::{FieldPair, PdeConfig, Splitting};
use crate::error::{Error, Result};
use crate::quad::gauss_legendre;

/// Distances below this are rounding noise and excluded from contraction ratios.
pub const CONTRACTION_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PicardOptions {
    /// `None` picks the default from [`default_t_short`].
    pub t_short: Option<f64>,
    pub iterations: usize,
    pub panels: usize,
    pub nodes_per_panel: usize,
    pub splitting_steps: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        PicardOptions {
            t_short: None,
            iterations: 20,
            panels: 8,
            nodes_per_panel: 4,
            splitting_steps: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardReport {
    pub t_short: f64,
    pub iterations: usize,
    pub time_nodes: usize,
    /// Sup distance between successive iterates over all time nodes.
    pub distances: Vec<f64>,
    /// `d_{m+1}/d_m` while both exceed the rounding floor.
    pub contraction_ratios: Vec<f64>,
    /// Sup difference between the last iterate and splitting at `t_short`.
    pub discrepancy: f64,
    pub diverging: bool,
}

impl PicardReport {
    pub fn max_contraction_ratio(&self) -> Option<f64> {
        self.contraction_ratios.iter().copied().reduce(f64::max)
    }
}

/// `T` with `max_i R^{p_ii+p_ij} ∫_0^T h_i = 0.45`, `R = 2 max_i ‖φ_i‖_u`,
/// capped at 1.
pub fn default_t_short(config: &PdeConfig) -> Result<f64> {
    let r = 2.0 * config.profiles[0].sup().max(config.profiles[1].sup());
    let mut t = 1.0f64;
    for i in 0..2 {
        let target = 0.45 / r.powf(config.exponents.row_sum(i));
        if let Some(ti) = config.h[i].invert_integral(0.0, target, 1.0, 1e-12)? {
            t = t.min(ti);
        }
    }
    Ok(t)
}

struct Nodes {
    /// Panel of each node, node time, weight.
    panel: Vec<usize>,
    time: Vec<f64>,
    weight: Vec<f64>,
    edges: Vec<f64>,
    per_panel: usize,
}

impl Nodes {
    fn new(t: f64, panels: usize, q: usize) -> Self {
        let (x, w) = gauss_legendre(q);
        let edges: Vec<f64> = (0..=panels).map(|p| t * p as f64 / panels as f64).collect();
        let (mut panel, mut time, mut weight) = (vec![], vec![], vec![]);
        for p in 0..panels {
            let (a, b) = (edges[p], edges[p + 1]);
            for r in 0..q {
                panel.push(p);
                time.push(a + 0.5 * (b - a) * (x[r] + 1.0));
                weight.push(0.5 * (b - a) * w[r]);
            }
        }
        Nodes {
            panel,
            time,
            weight,
            edges,
            per_panel: q,
        }
    }

    fn panel_nodes(&self, p: usize) -> std::ops::Range<usize> {
        p * self.per_panel..(p + 1) * self.per_panel
    }
}

fn lagrange(xs: &[f64], m: usize, x: f64) -> f64 {
    xs.iter()
        .enumerate()
        .filter(|&(k, _)| k != m)
        .map(|(_, &xk)| (x - xk) / (xs[m] - xk))
        .product()
}

struct Iteration<'a> {
    config: &'a PdeConfig,
    split: &'a Splitting,
    nodes: Nodes,
    targets: Vec<f64>,
    phi_hat: [Vec<Complex64>; 2],
    /// Gauss rule for partial panels.
    gauss: (Vec<f64>, Vec<f64>),
}

impl Iteration<'_> {
    fn k0(&self, i: usize, s: f64) -> Result<f64> {
        self.split.k_integral(i, 0.0, s)
    }

    /// Free evolution `U_i(0,t)φ_i` at every target.
    fn free(&self) -> Result<Vec<[Vec<f64>; 2]>> {
        let d = self.split.diffusion();
        self.targets
            .iter()
            .map(|&t| {
                let mut out: [Vec<f64>; 2] = Default::default();
                for i in 0..2 {
                    let kk = self.k0(i, t)?;
                    let s: Vec<Complex64> = self.phi_hat[i]
                        .iter()
                        .zip(d.wavenumber_squared())
                        .map(|(c, k2)| c * (-k2 * kk).exp())
                        .collect();
                    out[i] = d.inverse(s);
                }
                Ok(out)
            })
            .collect()
    }

    /// One application of the mild-solution map to values on the nodes.
    fn apply(&self, u: &[[Vec<f64>; 2]]) -> Result<Vec<[Vec<f64>; 2]>> {
        let d = self.split.diffusion();
        let k2 = d.wavenumber_squared();
        let p = self.config.exponents.rows();
        let n_nodes = self.nodes.time.len();
        // reaction term at each node, in Fourier space
        let n_hat: Vec<[Vec<Complex64>; 2]> = (0..n_nodes)
            .into_par_iter()
            .map(|n| {
                let s = self.nodes.time[n];
                let mut out: [Vec<Complex64>; 2] = Default::default();
                for i in 0..2 {
                    let j = 1 - i;
                    let h = self.config.h[i].eval(s);
                    let r: Vec<f64> = u[n][i]
                        .iter()
                        .zip(&u[n][j])
                        .map(|(&a, &b)| h * a.powf(p[i][i]) * b.powf(p[i][j]))
                        .collect();
                    out[i] = d.forward(&r);
                }
                out
            })
            .collect();
        let panels = self.nodes.edges.len() - 1;
        let (gx, gw) = &self.gauss;
        self.targets
            .par_iter()
            .enumerate()
            .map(|(ti, &t)| {
                let mut out: [Vec<f64>; 2] = Default::default();
                // targets are the nodes followed by the final time
                let (full, partial) = if ti < n_nodes {
                    (self.nodes.panel[ti], Some(self.nodes.panel[ti]))
                } else {
                    (panels, None)
                };
                for i in 0..2 {
                    let kt = self.k0(i, t)?;
                    let mut acc: Vec<Complex64> = self.phi_hat[i]
                        .iter()
                        .zip(k2)
                        .map(|(c, k)| c * (-k * kt).exp())
                        .collect();
                    let mut add = |coef: &[Complex64], w: f64, ks: f64| {
                        for ((a, c), k) in acc.iter_mut().zip(coef).zip(k2) {
                            *a += c * (w * (-k * (kt - ks)).exp());
                        }
                    };
                    for n in 0..self.nodes.panel_nodes(full).start {
                        add(&n_hat[n][i], self.nodes.weight[n], self.k0(i, self.nodes.time[n])?);
                    }
                    if let Some(pp) = partial {
                        let a = self.nodes.edges[pp];
                        let range = self.nodes.panel_nodes(pp);
                        let xs = &self.nodes.time[range.clone()];
                        for (x, w) in gx.iter().zip(gw) {
                            let s = a + 0.5 * (t - a) * (x + 1.0);
                            let ws = 0.5 * (t - a) * w;
                            let mut interp = vec![Complex64::default(); k2.len()];
                            for (m, n) in range.clone().enumerate() {
                                let l = lagrange(xs, m, s);
                                for (v, c) in interp.iter_mut().zip(&n_hat[n][i]) {
                                    *v += c * l;
                                }
                            }
                            add(&interp, ws, self.k0(i, s)?);
                        }
                    }
                    out[i] = d.inverse(acc);
                }
                Ok(out)
            })
            .collect()
    }
}

fn sup_distance(a: &[[Vec<f64>; 2]], b: &[[Vec<f64>; 2]]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| (0..2).flat_map(move |i| x[i].iter().zip(&y[i]).map(|(p, q)| (p - q).abs())))
        .fold(0.0, f64::max)
}

/// Iterates the mild-solution map from the free evolution and compares the
/// result at `T_short` with the splitting solution.
pub fn picard_validate(config: &PdeConfig, opts: PicardOptions) -> Result<PicardReport> {
    config.validate()?;
    if opts.panels == 0 || opts.nodes_per_panel == 0 || opts.splitting_steps == 0 {
        return Err(Error::Invalid("panels, nodes per panel and splitting steps must be positive".into()));
    }
    let t_short = match opts.t_short {
        Some(t) if t > 0.0 => t,
        Some(t) => return Err(Error::Invalid(format!("T_short must be positive, got {t}"))),
        None => default_t_short(config)?,
    };
    let grid = config.grid_for(t_short)?;
    let split = Splitting::from_config(config, grid, t_short)?;
    let nodes = Nodes::new(t_short, opts.panels, opts.nodes_per_panel);
    let mut targets = nodes.time.clone();
    targets.push(t_short);
    let phi = FieldPair::from_profiles(&grid, &config.profiles);
    let it = Iteration {
        config,
        split: &split,
        phi_hat: [split.diffusion().forward(&phi.u[0]), split.diffusion().forward(&phi.u[1])],
        nodes,
        targets,
        gauss: gauss_legendre(opts.nodes_per_panel + 2),
    };
    let mut u = it.free()?;
    let mut distances = Vec::with_capacity(opts.iterations);
    for _ in 0..opts.iterations {
        let next = it.apply(&u)?;
        distances.push(sup_distance(&next, &u));
        u = next;
    }
    let contraction_ratios: Vec<f64> = distances
        .windows(2)
        .filter(|w| w[0] > CONTRACTION_FLOOR && w[1] > CONTRACTION_FLOOR)
        .map(|w| w[1] / w[0])
        .collect();
    let diverging = distances.windows(2).any(|w| w[0] > CONTRACTION_FLOOR && w[1] > w[0]);

    let mut f = phi;
    let dt = t_short / opts.splitting_steps as f64;
    for _ in 0..opts.splitting_steps {
        split.strang_step(&mut f, dt)?;
    }
    let last = u.last().expect("final time is a target");
    let discrepancy = (0..2)
        .flat_map(|i| last[i].iter().zip(&f.u[i]).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max);
    Ok(PicardReport {
        t_short,
        iterations: opts.iterations,
        time_nodes: it.nodes.time.len(),
        distances,
        contraction_ratios,
        discrepancy,
        diverging,
    })
}
