//! Dormand–Prince 5(4) with PI step-size control on fixed-size states.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th-order weights minus embedded 4th-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct Dopri5Options<const N: usize> {
    pub atol: [f64; N],
    pub rtol: [f64; N],
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
    /// Steps smaller than `min_step_ratio * |t|` count as underflow.
    pub min_step_ratio: f64,
}

impl<const N: usize> Dopri5Options<N> {
    pub fn uniform(atol: f64, rtol: f64) -> Self {
        Dopri5Options {
            atol: [atol; N],
            rtol: [rtol; N],
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 10_000_000,
            min_step_ratio: 1e-15,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepFailure {
    Underflow,
    Budget,
}

/// Integrator state. `f(t, y)` returns the derivative.
pub struct Dopri5<const N: usize, F> {
    f: F,
    opts: Dopri5Options<N>,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    err_prev: f64,
    steps: usize,
    rejected: usize,
}

impl<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]> Dopri5<N, F> {
    pub fn new(f: F, t0: f64, y0: [f64; N], opts: Dopri5Options<N>) -> Self {
        let k1 = f(t0, &y0);
        let h = opts.h_init.unwrap_or_else(|| initial_step(&y0, &k1, &opts));
        Dopri5 {
            f,
            opts,
            t: t0,
            y: y0,
            k1,
            h,
            err_prev: 1e-4,
            steps: 0,
            rejected: 0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; N] {
        &self.y
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn rejected(&self) -> usize {
        self.rejected
    }

    pub fn next_step_size(&self) -> f64 {
        self.h
    }

    /// One unchecked step of size `h` from the current state; returns the
    /// new state, the scaled error norm and the last stage derivative.
    pub fn trial(&self, h: f64) -> ([f64; N], f64, [f64; N]) {
        let mut k = [[0.0; N]; 7];
        k[0] = self.k1;
        let mut y_stage = [0.0; N];
        for s in 1..7 {
            for n in 0..N {
                let mut acc = 0.0;
                for (r, a) in A[s][..s].iter().enumerate() {
                    acc += a * k[r][n];
                }
                y_stage[n] = self.y[n] + h * acc;
            }
            k[s] = (self.f)(self.t + C[s] * h, &y_stage);
        }
        // stage 7 is evaluated at the 5th-order solution (FSAL)
        let y_new = y_stage;
        let mut err = 0.0;
        for n in 0..N {
            let mut e = 0.0;
            for (s, w) in E.iter().enumerate() {
                e += w * k[s][n];
            }
            let scale = self.opts.atol[n] + self.opts.rtol[n] * self.y[n].abs().max(y_new[n].abs());
            let r = h * e / scale;
            err += r * r;
        }
        let err = (err / N as f64).sqrt();
        (y_new, err, k[6])
    }

    /// Accepts a trial result produced by [`Dopri5::trial`].
    pub fn accept(&mut self, h: f64, y_new: [f64; N], k7: [f64; N]) {
        self.t += h;
        self.y = y_new;
        self.k1 = k7;
        self.steps += 1;
    }

    /// Takes one accepted step, never passing `t_stop`.
    pub fn step(&mut self, t_stop: f64) -> std::result::Result<f64, StepFailure> {
        let mut reject_streak = false;
        loop {
            if self.steps >= self.opts.max_steps {
                return Err(StepFailure::Budget);
            }
            let remaining = t_stop - self.t;
            let mut h = self.h.min(self.opts.h_max);
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            if h < self.opts.min_step_ratio * self.t.abs() || h <= 0.0 {
                return Err(StepFailure::Underflow);
            }
            let (y_new, err, k7) = self.trial(h);
            let finite = y_new.iter().all(|v| v.is_finite()) && k7.iter().all(|v| v.is_finite());
            if finite && err <= 1.0 {
                // PI controller
                const BETA: f64 = 0.04;
                let err_c = err.max(1e-10);
                let mut fac = 0.9 * err_c.powf(-0.2 + 0.75 * BETA) * self.err_prev.powf(BETA);
                fac = fac.clamp(0.2, 10.0);
                if reject_streak {
                    fac = fac.min(1.0);
                }
                self.err_prev = err_c.max(1e-4);
                self.accept(h, y_new, k7);
                if last {
                    self.t = t_stop;
                }
                if !last || h * fac > self.h {
                    self.h = h * fac;
                }
                return Ok(h);
            }
            self.rejected += 1;
            reject_streak = true;
            self.h = if finite {
                h * (0.9 * err.powf(-0.2)).max(0.2)
            } else {
                h * 0.25
            };
        }
    }

    /// Advances to `t_end` exactly, calling `observe` after every step.
    pub fn advance_to<O: FnMut(f64, &[f64; N])>(&mut self, t_end: f64, mut observe: O) -> Result<()> {
        while self.t < t_end {
            match self.step(t_end) {
                Ok(_) => observe(self.t, &self.y),
                Err(StepFailure::Budget) => return Err(Error::BudgetExceeded(self.opts.max_steps)),
                Err(StepFailure::Underflow) => {
                    return Err(Error::Numerical(format!("step size underflow at t = {}", self.t)))
                }
            }
        }
        Ok(())
    }
}

fn initial_step<const N: usize>(y: &[f64; N], dy: &[f64; N], opts: &Dopri5Options<N>) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for n in 0..N {
        let sc = opts.atol[n] + opts.rtol[n] * y[n].abs();
        d0 += (y[n] / sc).powi(2);
        d1 += (dy[n] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(opts.h_max).min(0.1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let mut s = Dopri5::new(|_t, y: &[f64; 1]| [y[0]], 0.0, [1.0], Dopri5Options::uniform(1e-12, 1e-12));
        s.advance_to(1.0, |_, _| {}).unwrap();
        assert_eq!(s.t(), 1.0);
        assert!((s.y()[0] - std::f64::consts::E).abs() < 1e-10);
    }

    #[test]
    fn harmonic_oscillator() {
        let f = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut s = Dopri5::new(f, 0.0, [1.0, 0.0], Dopri5Options::uniform(1e-11, 1e-11));
        let tau = 2.0 * std::f64::consts::PI;
        s.advance_to(tau, |_, _| {}).unwrap();
        assert!((s.y()[0] - 1.0).abs() < 1e-8);
        assert!(s.y()[1].abs() < 1e-8);
    }

    #[test]
    fn time_dependent_rhs() {
        // y' = cos t
        let mut s = Dopri5::new(|t, _y: &[f64; 1]| [t.cos()], 0.0, [0.0], Dopri5Options::uniform(1e-12, 0.0));
        s.advance_to(3.0, |_, _| {}).unwrap();
        assert!((s.y()[0] - 3f64.sin()).abs() < 1e-10);
    }

    #[test]
    fn tolerance_controls_error() {
        let run = |tol: f64| {
            let mut s = Dopri5::new(|_t, y: &[f64; 1]| [-2.0 * y[0]], 0.0, [1.0], Dopri5Options::uniform(tol, 0.0));
            s.advance_to(2.0, |_, _| {}).unwrap();
            (s.y()[0] - (-4f64).exp()).abs()
        };
        assert!(run(1e-6) < 1e-5);
        assert!(run(1e-10) < 1e-9);
    }

    #[test]
    fn budget_is_enforced() {
        let mut o = Dopri5Options::uniform(1e-12, 0.0);
        o.max_steps = 3;
        let mut s = Dopri5::new(|_t, y: &[f64; 1]| [y[0]], 0.0, [1.0], o);
        assert!(matches!(s.advance_to(100.0, |_, _| {}), Err(Error::BudgetExceeded(3))));
    }
}
