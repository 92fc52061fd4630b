//! Spectral mild-solution simulator for
//! `u_i' = k_i(t) Δu_i + h_i(t) u_i^{p_ii} u_j^{p_ij}` on a periodic box.
//!
//! Diffusion is applied exactly in Fourier space; the reaction is advanced
//! pointwise with RK4 and the two are combined by Strang splitting.

mod grid;
mod picard;
mod report;
mod spectral;

use rayon::prelude::*;
use serde::Serialize;

pub use grid::{auto_half_length, FieldPair, Grid, InitialProfile};
pub use picard::{default_t_short, picard_validate, PicardOptions, PicardReport};
pub use report::{field_dump_csv, snapshots_csv, space_infinity_report, RadiusProbe, SpaceInfinityReport};
pub use spectral::Diffusion;

use crate::coeffs::{CumulativeIntegral, TimeCoefficient};
use crate::companion::{self, CompanionProblem, ExponentMatrix};
use crate::error::{Error, Result};

pub const U_MAX: f64 = 1e8;
pub const OVERFLOW_GUARD: f64 = 1e300;
/// Maximum relative sup-norm growth accepted in one step.
pub const STEP_GROWTH: f64 = 0.1;
/// Target relative growth per RK4 reaction substep.
pub const SUBSTEP_GROWTH: f64 = 0.005;

/// Box half-length; serialized as a number or `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HalfLength {
    Fixed(f64),
    Auto,
}

impl Serialize for HalfLength {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            HalfLength::Fixed(l) => s.serialize_f64(*l),
            HalfLength::Auto => s.serialize_str("auto"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PdeConfig {
    pub exponents: ExponentMatrix,
    pub h: [TimeCoefficient; 2],
    pub k: [TimeCoefficient; 2],
    pub profiles: [InitialProfile; 2],
    pub dim: usize,
    pub points_per_axis: usize,
    pub half_length: HalfLength,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    /// Also record a snapshot after every accepted step.
    pub record_every_step: bool,
    pub dt_max: f64,
    pub u_max: f64,
    pub max_steps: usize,
}

impl PdeConfig {
    pub fn new(
        exponents: ExponentMatrix,
        h: [TimeCoefficient; 2],
        k: [TimeCoefficient; 2],
        profiles: [InitialProfile; 2],
    ) -> Self {
        PdeConfig {
            exponents,
            h,
            k,
            profiles,
            dim: 1,
            points_per_axis: 256,
            half_length: HalfLength::Auto,
            t_end: 1.0,
            snapshot_times: Vec::new(),
            record_every_step: false,
            dt_max: 5e-3,
            u_max: U_MAX,
            max_steps: 1_000_000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for p in &self.profiles {
            p.validate()?;
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            return Err(Error::Invalid(format!("t_end must be positive, got {}", self.t_end)));
        }
        if !(self.dt_max > 0.0) {
            return Err(Error::Invalid(format!("dt_max must be positive, got {}", self.dt_max)));
        }
        if !(self.u_max > 0.0) {
            return Err(Error::Invalid(format!("u_max must be positive, got {}", self.u_max)));
        }
        if self.snapshot_times.iter().any(|&t| !(t >= 0.0 && t <= self.t_end)) {
            return Err(Error::Invalid("snapshot times must lie in [0, t_end]".into()));
        }
        if let HalfLength::Fixed(l) = self.half_length {
            if !(l > 0.0) {
                return Err(Error::Invalid(format!("half length must be positive, got {l}")));
            }
        }
        Ok(())
    }

    /// Resolves `Auto` half length against the horizon `t`.
    pub fn grid_for(&self, t: f64) -> Result<Grid> {
        let l = match self.half_length {
            HalfLength::Fixed(l) => l,
            HalfLength::Auto => {
                let k_max = self.k[0].integrate(0.0, t, 1e-10)?.max(self.k[1].integrate(0.0, t, 1e-10)?);
                let width = self.profiles[0].support_width().max(self.profiles[1].support_width());
                auto_half_length(width, k_max).max(1.0)
            }
        };
        Grid::new(self.dim, self.points_per_axis, l)
    }

    pub fn grid(&self) -> Result<Grid> {
        self.grid_for(self.t_end)
    }

    pub fn companion(&self) -> Result<CompanionProblem> {
        CompanionProblem::new(
            self.exponents,
            self.h[0].clone(),
            self.h[1].clone(),
            [self.profiles[0].sup(), self.profiles[1].sup()],
        )
    }
}

#[inline]
fn pw(x: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else if p == 1.0 {
        x
    } else if p == 2.0 {
        x * x
    } else {
        x.powf(p)
    }
}

/// Pointwise reaction `du_i/dt = h_i(t) u_i^{p_ii} u_j^{p_ij}`.
#[derive(Debug, Clone)]
pub struct Reaction {
    p: [[f64; 2]; 2],
    h: [TimeCoefficient; 2],
}

impl Reaction {
    pub fn new(exponents: ExponentMatrix, h: [TimeCoefficient; 2]) -> Self {
        Reaction {
            p: exponents.rows(),
            h,
        }
    }

    #[inline]
    fn rhs(&self, y: [f64; 2], h: [f64; 2]) -> [f64; 2] {
        let p = &self.p;
        [
            h[0] * pw(y[0], p[0][0]) * pw(y[1], p[0][1]),
            h[1] * pw(y[1], p[1][1]) * pw(y[0], p[1][0]),
        ]
    }

    fn rk4(&self, mut y: [f64; 2], hs: &[[[f64; 2]; 3]], delta: f64) -> [f64; 2] {
        for h in hs {
            let k1 = self.rhs(y, h[0]);
            let k2 = self.rhs([y[0] + 0.5 * delta * k1[0], y[1] + 0.5 * delta * k1[1]], h[1]);
            let k3 = self.rhs([y[0] + 0.5 * delta * k2[0], y[1] + 0.5 * delta * k2[1]], h[1]);
            let k4 = self.rhs([y[0] + delta * k3[0], y[1] + delta * k3[1]], h[2]);
            for n in 0..2 {
                y[n] += delta / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
            }
        }
        y
    }

    /// `h` at the RK4 stage times of `m` equal substeps over `[t, t+dt]`.
    fn stage_values(&self, t: f64, dt: f64, m: usize) -> Vec<[[f64; 2]; 3]> {
        let delta = dt / m as f64;
        let at = |s: f64| [self.h[0].eval(s), self.h[1].eval(s)];
        (0..m)
            .map(|k| {
                let s = t + k as f64 * delta;
                [at(s), at(s + 0.5 * delta), at(s + delta)]
            })
            .collect()
    }

    /// Advances every grid point over `[t, t+dt]`.
    pub fn step(&self, u: &mut [Vec<f64>; 2], t: f64, dt: f64) -> Result<()> {
        if dt == 0.0 {
            return Ok(());
        }
        let h_max = {
            let s = self.stage_values(t, dt, 1)[0];
            [0, 1].map(|i| s.iter().map(|v| v[i]).fold(0.0, f64::max))
        };
        let p = self.p;
        let rate = u[0]
            .par_iter()
            .zip(u[1].par_iter())
            .with_min_len(1024)
            .map(|(&a, &b)| {
                let r0 = h_max[0] * pw(a, p[0][0] - 1.0) * pw(b, p[0][1]);
                let r1 = h_max[1] * pw(b, p[1][1] - 1.0) * pw(a, p[1][0]);
                r0.max(r1)
            })
            .reduce(|| 0.0, f64::max);
        let m = ((rate * dt / SUBSTEP_GROWTH).ceil() as usize).clamp(1, 100_000);
        let hs = self.stage_values(t, dt, m);
        let delta = dt / m as f64;
        let [u0, u1] = u;
        let failed = u0
            .par_iter_mut()
            .zip(u1.par_iter_mut())
            .with_min_len(256)
            .map(|(a, b)| {
                let mut y = self.rk4([*a, *b], &hs, delta);
                let mut refine = 1;
                // stiff points: redo with finer substeps, h re-evaluated at the new stage times
                while !valid(y) && refine <= 20 {
                    let mm = m << refine;
                    y = self.rk4([*a, *b], &self.stage_values(t, dt, mm), dt / mm as f64);
                    refine += 1;
                }
                *a = y[0];
                *b = y[1];
                !valid(y)
            })
            .reduce(|| false, |x, y| x || y);
        if failed {
            return Err(Error::ReactionOverflow { t });
        }
        Ok(())
    }
}

fn valid(y: [f64; 2]) -> bool {
    y.iter().all(|v| *v >= 0.0 && *v <= OVERFLOW_GUARD)
}

/// Reaction–diffusion–reaction splitting on a fixed grid.
#[derive(Debug, Clone)]
pub struct Splitting {
    diffusion: Diffusion,
    reaction: Reaction,
    k: [CumulativeIntegral; 2],
}

impl Splitting {
    pub fn new(grid: Grid, exponents: ExponentMatrix, h: [TimeCoefficient; 2], k: [TimeCoefficient; 2], horizon: f64) -> Result<Self> {
        let [k0, k1] = k;
        let horizon = horizon.max(1e-6);
        Ok(Splitting {
            diffusion: Diffusion::new(grid),
            reaction: Reaction::new(exponents, h),
            k: [
                CumulativeIntegral::new(k0, horizon, 1000, 1e-12)?,
                CumulativeIntegral::new(k1, horizon, 1000, 1e-12)?,
            ],
        })
    }

    pub fn from_config(config: &PdeConfig, grid: Grid, horizon: f64) -> Result<Self> {
        Splitting::new(grid, config.exponents, config.h.clone(), config.k.clone(), horizon)
    }

    pub fn grid(&self) -> &Grid {
        self.diffusion.grid()
    }

    pub fn diffusion(&self) -> &Diffusion {
        &self.diffusion
    }

    /// `K_i(s,t) = ∫_s^t k_i`.
    pub fn k_integral(&self, i: usize, s: f64, t: f64) -> Result<f64> {
        self.k[i].between(s, t)
    }

    pub fn diffusion_step(&self, fields: &mut FieldPair, i: usize, s: f64, t: f64) -> Result<()> {
        let kk = self.k_integral(i, s, t)?;
        self.diffusion.apply(&mut fields.u[i], kk);
        Ok(())
    }

    pub fn reaction_step(&self, fields: &mut FieldPair, t: f64, dt: f64) -> Result<()> {
        self.reaction.step(&mut fields.u, t, dt)
    }

    /// Half reaction at `t`, diffusion over `[t, t+dt]`, half reaction at `t+dt/2`.
    pub fn strang_step(&self, fields: &mut FieldPair, dt: f64) -> Result<()> {
        let t = fields.t;
        self.reaction_step(fields, t, 0.5 * dt)?;
        let t1 = t + dt;
        for i in 0..2 {
            self.diffusion_step(fields, i, t, t1)?;
        }
        self.reaction_step(fields, t + 0.5 * dt, 0.5 * dt)?;
        fields.t = t1;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub sup: [f64; 2],
    pub center: [f64; 2],
    pub far: [f64; 2],
    /// Companion `y_i(t)`; `None` past its blow-up or escape.
    pub companion: Option<[f64; 2]>,
}

impl Snapshot {
    fn of(fields: &FieldPair, grid: &Grid) -> Self {
        let (c, f) = (grid.center_index(), grid.corner_index());
        Snapshot {
            t: fields.t,
            sup: [fields.sup(0), fields.sup(1)],
            center: [fields.u[0][c], fields.u[1][c]],
            far: [fields.u[0][f], fields.u[1][f]],
            companion: None,
        }
    }

    pub fn center_far_ratio(&self, i: usize) -> f64 {
        self.center[i] / self.far[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RunStatus {
    Completed { t_end: f64 },
    BlowUpDetected { last_stable_t: f64 },
    BudgetExceeded { t: f64 },
}

#[derive(Debug, Clone)]
pub struct SimulationRun {
    pub grid: Grid,
    pub snapshots: Vec<Snapshot>,
    pub status: RunStatus,
    /// Fields at the final (last stable) time.
    pub fields: FieldPair,
    pub steps: usize,
    pub rejected: usize,
}

/// Advances the splitting with adaptive `dt` until `t_end`, the sup-norm
/// threshold or the step budget.
pub fn run(config: &PdeConfig) -> Result<SimulationRun> {
    config.validate()?;
    let grid = config.grid()?;
    let split = Splitting::from_config(config, grid, config.t_end)?;
    let mut fields = FieldPair::from_profiles(&grid, &config.profiles);
    let mut stops: Vec<f64> = config.snapshot_times.iter().copied().filter(|&t| t > 0.0).collect();
    stops.push(config.t_end);
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    let mut next_stop = 0;
    let mut snapshots = vec![Snapshot::of(&fields, &grid)];
    let mut dt = config.dt_max;
    let (mut steps, mut rejected) = (0, 0);

    let status = loop {
        let t = fields.t;
        if t >= config.t_end {
            break RunStatus::Completed { t_end: t };
        }
        if steps >= config.max_steps {
            break RunStatus::BudgetExceeded { t };
        }
        let stop = stops[next_stop];
        // snap onto the stop instead of leaving a rounding-sized sliver
        let hits_stop = dt * (1.0 + 1e-9) >= stop - t;
        let h = if hits_stop { stop - t } else { dt };
        if dt <= 1e-15 * t.max(1.0) {
            break RunStatus::BlowUpDetected { last_stable_t: t };
        }
        let mut trial = fields.clone();
        match split.strang_step(&mut trial, h) {
            Ok(()) => {}
            Err(Error::ReactionOverflow { .. }) => {
                rejected += 1;
                dt = 0.5 * h;
                continue;
            }
            Err(e) => return Err(e),
        }
        if trial.has_nan() {
            return Err(Error::NaN { t: t + h });
        }
        let growth = (0..2).map(|i| trial.sup(i) / fields.sup(i) - 1.0).fold(0.0, f64::max);
        if growth > STEP_GROWTH {
            rejected += 1;
            dt = 0.5 * h;
            continue;
        }
        if trial.sup(0).max(trial.sup(1)) > config.u_max {
            break RunStatus::BlowUpDetected { last_stable_t: t };
        }
        if hits_stop {
            trial.t = stop;
            next_stop += 1;
        }
        fields = trial;
        steps += 1;
        if hits_stop || config.record_every_step {
            snapshots.push(Snapshot::of(&fields, &grid));
        }
        let by_growth = if growth > 0.0 { 0.9 * h * STEP_GROWTH / growth } else { f64::INFINITY };
        dt = config.dt_max.min(1.1 * dt).min(by_growth.max(0.5 * h));
    };
    if snapshots.last().map(|s| s.t) != Some(fields.t) {
        snapshots.push(Snapshot::of(&fields, &grid));
    }
    attach_companion(config, &mut snapshots)?;
    Ok(SimulationRun {
        grid,
        snapshots,
        status,
        fields,
        steps,
        rejected,
    })
}

fn attach_companion(config: &PdeConfig, snapshots: &mut [Snapshot]) -> Result<()> {
    let prob = config.companion()?;
    let times: Vec<f64> = snapshots.iter().map(|s| s.t).collect();
    for (s, y) in snapshots.iter_mut().zip(companion::values_at(&prob, &times, 1e-12)) {
        s.companion = y;
    }
    Ok(())
}
