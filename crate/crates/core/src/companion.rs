//! The companion system `y_i' = h_i(t) y_i^{p_ii} y_j^{p_ij}` integrated in
//! log variables, with blow-up bracketing.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::bounds;
use crate::coeffs::{invert_cumulative, TimeCoefficient};
use crate::error::{Error, Result};
use crate::quad::{self, QuadOptions};
use crate::rk::{Dopri5, Dopri5Options, StepFailure};

/// Exponents `p_ij` of the coupled system. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentMatrix {
    pub p11: f64,
    pub p12: f64,
    pub p21: f64,
    pub p22: f64,
}

impl ExponentMatrix {
    pub fn new(p11: f64, p12: f64, p21: f64, p22: f64) -> Result<Self> {
        for (name, v) in [("p11", p11), ("p12", p12), ("p21", p21), ("p22", p22)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Invalid(format!("{name} must be a finite number >= 0, got {v}")));
            }
        }
        Ok(ExponentMatrix { p11, p12, p21, p22 })
    }

    pub fn from_rows(rows: [[f64; 2]; 2]) -> Result<Self> {
        Self::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
    }

    pub fn rows(&self) -> [[f64; 2]; 2] {
        [[self.p11, self.p12], [self.p21, self.p22]]
    }

    pub fn p(&self, i: usize, j: usize) -> f64 {
        self.rows()[i][j]
    }

    /// `a_i = p_ji − p_ii + 1`.
    pub fn a(&self, i: usize) -> f64 {
        let j = 1 - i;
        self.p(j, i) - self.p(i, i) + 1.0
    }

    /// `α_i = p_ii + p_ij a_i / a_j`, defined when `a_j ≠ 0`.
    pub fn alpha(&self, i: usize) -> Option<f64> {
        let j = 1 - i;
        let aj = self.a(j);
        (aj != 0.0).then(|| self.p(i, i) + self.p(i, j) * self.a(i) / aj)
    }

    /// `p_ii + p_ij`.
    pub fn row_sum(&self, i: usize) -> f64 {
        self.p(i, 0) + self.p(i, 1)
    }

    /// `(p11 − 1)(p22 − 1) − p12 p21`.
    pub fn determinant(&self) -> f64 {
        (self.p11 - 1.0) * (self.p22 - 1.0) - self.p12 * self.p21
    }
}

#[derive(Debug, Clone)]
pub struct CompanionProblem {
    pub exponents: ExponentMatrix,
    pub h: [TimeCoefficient; 2],
    pub y0: [f64; 2],
}

impl CompanionProblem {
    pub fn new(exponents: ExponentMatrix, h1: TimeCoefficient, h2: TimeCoefficient, y0: [f64; 2]) -> Result<Self> {
        for (i, v) in y0.iter().enumerate() {
            if !(*v > 0.0) || !v.is_finite() {
                return Err(Error::Invalid(format!("y{}_0 must be positive, got {v}", i + 1)));
            }
        }
        Ok(CompanionProblem {
            exponents,
            h: [h1, h2],
            y0,
        })
    }

    /// Right-hand side in log variables.
    pub fn log_rhs(&self, t: f64, l: &[f64; 2]) -> [f64; 2] {
        let p = self.exponents.rows();
        let mut out = [0.0; 2];
        for i in 0..2 {
            let j = 1 - i;
            let e = (p[i][i] - 1.0) * l[i] + p[i][j] * l[j];
            out[i] = (self.h[i].ln_eval(t) + e).exp();
        }
        out
    }

    pub fn is_symmetric(&self) -> bool {
        let e = self.exponents;
        e.p11 == e.p22 && e.p12 == e.p21 && self.y0[0] == self.y0[1] && self.h[0].source() == self.h[1].source()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SolveControls {
    /// Absolute tolerance on `ln y`.
    pub atol: f64,
    /// Escape threshold; `INFINITY` disables it.
    pub y_max: f64,
    pub max_steps: usize,
}

impl Default for SolveControls {
    fn default() -> Self {
        SolveControls {
            atol: 1e-10,
            y_max: 1e12,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub ln_y: [f64; 2],
}

impl Sample {
    pub fn y(&self) -> [f64; 2] {
        [self.ln_y[0].exp(), self.ln_y[1].exp()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TrajectoryStatus {
    Completed { t_end: f64 },
    /// The escape threshold was crossed at `t_lo`; `t_hi` is a rigorous
    /// upper bound on the blow-up time when one is available.
    BlowUp { t_lo: f64, t_hi: Option<f64> },
    StepSizeUnderflow { t: f64 },
    BudgetExceeded { t: f64 },
}

#[derive(Debug, Clone)]
pub struct CompanionTrajectory {
    pub samples: Vec<Sample>,
    pub status: TrajectoryStatus,
    pub steps: usize,
}

impl CompanionTrajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory has at least the initial sample")
    }

    /// Linear interpolation of `ln y` between samples.
    pub fn ln_y_at(&self, t: f64) -> Option<[f64; 2]> {
        let s = &self.samples;
        if t < s[0].t || t > self.last().t {
            return None;
        }
        let k = s.partition_point(|x| x.t < t);
        if k == 0 {
            return Some(s[0].ln_y);
        }
        let (a, b) = (&s[k - 1], &s[k]);
        let w = (t - a.t) / (b.t - a.t);
        Some([
            a.ln_y[0] + w * (b.ln_y[0] - a.ln_y[0]),
            a.ln_y[1] + w * (b.ln_y[1] - a.ln_y[1]),
        ])
    }

    /// CSV with columns `t,y1,y2`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,y1,y2\n");
        for s in &self.samples {
            let y = s.y();
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", s.t, y[0], y[1]);
        }
        out
    }
}

/// Integrates the companion system up to `t_end` or the escape threshold.
pub fn solve(prob: &CompanionProblem, t_end: f64, controls: SolveControls) -> Result<CompanionTrajectory> {
    if !(t_end > 0.0) {
        return Err(Error::Invalid(format!("t_end must be positive, got {t_end}")));
    }
    let ln_max = controls.y_max.ln();
    let l0 = [prob.y0[0].ln(), prob.y0[1].ln()];
    let mut opts = Dopri5Options::uniform(controls.atol, 0.0);
    opts.max_steps = controls.max_steps;
    let rhs = |t: f64, l: &[f64; 2]| prob.log_rhs(t, l);
    let mut stepper = Dopri5::new(rhs, 0.0, l0, opts);
    let mut samples = vec![Sample { t: 0.0, ln_y: l0 }];
    if l0[0].max(l0[1]) > ln_max {
        return Err(Error::Invalid("initial data already above the escape threshold".into()));
    }
    let status = loop {
        if stepper.t() >= t_end {
            break TrajectoryStatus::Completed { t_end };
        }
        let prev = Sample {
            t: stepper.t(),
            ln_y: *stepper.y(),
        };
        match stepper.step(t_end) {
            Ok(h) => {
                let l = *stepper.y();
                if l[0].max(l[1]) > ln_max {
                    let crossing = localize_escape(prob, prev, h, ln_max, controls.atol);
                    samples.push(crossing);
                    let t_hi = tail_bound(prob, crossing.t, crossing.y())?.map(|b| crossing.t + b);
                    break TrajectoryStatus::BlowUp {
                        t_lo: crossing.t,
                        t_hi,
                    };
                }
                samples.push(Sample { t: stepper.t(), ln_y: l });
            }
            Err(StepFailure::Underflow) => {
                // the threshold can sit closer to the blow-up time than f64 resolves
                let (t, y) = (stepper.t(), stepper.y().map(f64::exp));
                match tail_bound(prob, t, y)? {
                    Some(b) => break TrajectoryStatus::BlowUp { t_lo: t, t_hi: Some(t + b) },
                    None => break TrajectoryStatus::StepSizeUnderflow { t },
                }
            }
            Err(StepFailure::Budget) => break TrajectoryStatus::BudgetExceeded { t: stepper.t() },
        }
    };
    Ok(CompanionTrajectory {
        samples,
        status,
        steps: stepper.steps(),
    })
}

/// `y(t)` at each of the increasing `times`, integrating exactly to every
/// time; `None` from the first time that cannot be reached.
pub fn values_at(prob: &CompanionProblem, times: &[f64], atol: f64) -> Vec<Option<[f64; 2]>> {
    let rhs = |t: f64, l: &[f64; 2]| prob.log_rhs(t, l);
    let l0 = [prob.y0[0].ln(), prob.y0[1].ln()];
    let mut stepper = Dopri5::new(rhs, 0.0, l0, Dopri5Options::uniform(atol, 0.0));
    let mut alive = true;
    times
        .iter()
        .map(|&t| {
            if alive && t >= stepper.t() {
                alive = stepper.advance_to(t, |_, _| {}).is_ok() && stepper.y().iter().all(|v| v.is_finite());
            }
            (alive && t == stepper.t()).then(|| stepper.y().map(f64::exp))
        })
        .collect()
}

/// Bisects the step size of the crossing step so that the returned sample
/// sits at or just below the threshold.
fn localize_escape(prob: &CompanionProblem, prev: Sample, h_cross: f64, ln_max: f64, atol: f64) -> Sample {
    let rhs = |t: f64, l: &[f64; 2]| prob.log_rhs(t, l);
    let stepper = Dopri5::new(rhs, prev.t, prev.ln_y, Dopri5Options::uniform(atol, 0.0));
    let (mut lo, mut hi) = (0.0, h_cross);
    let mut best = prev;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (l, _, _) = stepper.trial(mid);
        if l.iter().all(|v| v.is_finite()) && l[0].max(l[1]) <= ln_max {
            lo = mid;
            best = Sample { t: prev.t + mid, ln_y: l };
        } else {
            hi = mid;
        }
    }
    best
}

/// Rigorous upper bound on the remaining time to blow-up from state `y` at
/// time `t`, or `None` when no comparison argument applies.
pub fn tail_bound(prob: &CompanionProblem, t: f64, y: [f64; 2]) -> Result<Option<f64>> {
    let e = &prob.exponents;
    let cap = t + crate::osgood::TIME_CAP;
    let mut best: Option<f64> = None;
    let mut take = |v: Option<f64>| {
        if let Some(v) = v {
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
    };
    // the smaller component grows at least like min(h) z^s
    let s = e.row_sum(0).min(e.row_sum(1));
    let m = y[0].min(y[1]);
    if s > 1.0 && m >= 1.0 {
        let target = m.powf(1.0 - s) / (s - 1.0);
        let (h1, h2) = (&prob.h[0], &prob.h[1]);
        let hmin = |x: f64| h1.eval(x).min(h2.eval(x));
        let integral = |a: f64, b: f64| Ok(quad::integrate(&hmin, a, b, QuadOptions::with_rel_tol(1e-12))?.value);
        take(invert_cumulative(integral, t, target, cap)?.map(|x| x - t));
    }
    // freeze the other component at its current value
    for i in 0..2 {
        let j = 1 - i;
        let pii = e.p(i, i);
        if pii > 1.0 {
            let target = y[i].powf(1.0 - pii) / ((pii - 1.0) * y[j].powf(e.p(i, j)));
            take(prob.h[i].invert_integral(t, target, cap, 1e-12)?.map(|x| x - t));
        }
    }
    Ok(best)
}

/// Horizon for global-existence evidence and inconclusive runs.
pub const BRACKET_HORIZON: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BracketOutcome {
    BlowUp {
        t_lo: f64,
        t_hi: Option<f64>,
        /// Time at which `max y` reached the escape threshold.
        t_escape: f64,
        tail_bound: Option<f64>,
        integration_margin: f64,
    },
    Global {
        horizon_reached: f64,
        ln_y_at_horizon: [f64; 2],
        certificates: Vec<String>,
    },
    Inconclusive {
        reason: String,
        t_reached: f64,
    },
}

impl BracketOutcome {
    pub fn contains(&self, tau: f64) -> bool {
        match self {
            BracketOutcome::BlowUp { t_lo, t_hi, .. } => *t_lo <= tau && t_hi.map_or(true, |h| tau <= h),
            _ => false,
        }
    }

    pub fn width(&self) -> Option<f64> {
        match self {
            BracketOutcome::BlowUp {
                t_lo, t_hi: Some(t_hi), ..
            } => Some(t_hi - t_lo),
            _ => None,
        }
    }
}

/// Brackets the blow-up time, or reports global existence when the verdicts
/// certify both components.
pub fn blow_up_bracket(prob: &CompanionProblem, controls: SolveControls) -> Result<BracketOutcome> {
    if let Some(certificates) = bounds::global_certificates(prob)? {
        let free = SolveControls {
            y_max: f64::INFINITY,
            ..controls
        };
        let traj = solve(prob, BRACKET_HORIZON, free)?;
        let last = *traj.last();
        return Ok(BracketOutcome::Global {
            horizon_reached: last.t,
            ln_y_at_horizon: last.ln_y,
            certificates,
        });
    }
    let traj = solve(prob, BRACKET_HORIZON, controls)?;
    match traj.status {
        TrajectoryStatus::BlowUp { t_lo, t_hi } => {
            let fine = SolveControls {
                atol: controls.atol / 10.0,
                ..controls
            };
            let refined = solve(prob, BRACKET_HORIZON, fine)?;
            let t_lo_fine = match refined.status {
                TrajectoryStatus::BlowUp { t_lo, .. } => t_lo,
                _ => {
                    return Ok(BracketOutcome::Inconclusive {
                        reason: "escape not reproduced at the tighter tolerance".into(),
                        t_reached: refined.last().t,
                    })
                }
            };
            let margin = 2.0 * (t_lo - t_lo_fine).abs();
            Ok(BracketOutcome::BlowUp {
                t_lo: t_lo - margin,
                t_hi: t_hi.map(|h| h + margin),
                t_escape: t_lo,
                tail_bound: t_hi.map(|h| h - t_lo),
                integration_margin: margin,
            })
        }
        TrajectoryStatus::Completed { t_end } => Ok(BracketOutcome::Inconclusive {
            reason: format!("no escape and no global certificate by t = {t_end}"),
            t_reached: t_end,
        }),
        TrajectoryStatus::StepSizeUnderflow { t } => Ok(BracketOutcome::Inconclusive {
            reason: "step size underflow below the escape threshold".into(),
            t_reached: t,
        }),
        TrajectoryStatus::BudgetExceeded { .. } => Err(Error::BudgetExceeded(controls.max_steps)),
    }
}

/// Both sides of `a^p b^q − c^p d^q = p(a−c)∫(c+t(a−c))^{p−1}(d+t(b−d))^q dt
/// + q(b−d)∫(c+t(a−c))^p(d+t(b−d))^{q−1} dt`.
pub fn power_product_identity(a: f64, b: f64, c: f64, d: f64, p: f64, q: f64) -> Result<(f64, f64)> {
    for (name, v) in [("a", a), ("b", b), ("c", c), ("d", d), ("p", p), ("q", q)] {
        if !(v >= 0.0) || !v.is_finite() {
            return Err(Error::Invalid(format!("{name} must be finite and >= 0, got {v}")));
        }
    }
    let lhs = a.powf(p) * b.powf(q) - c.powf(p) * d.powf(q);
    let t1 = segment_term(p * (a - c), [c, a], p - 1.0, [d, b], q)?;
    let t2 = segment_term(q * (b - d), [c, a], p, [d, b], q - 1.0)?;
    Ok((lhs, t1 + t2))
}

/// `coef ∫_0^1 X(t)^ex Y(t)^ey dt` for the segments `X = x0 + t(x1−x0)`,
/// `Y = y0 + t(y1−y0)`. Each half is integrated from the endpoint it
/// touches so that zeros of `X` or `Y` sit at the origin of the variable.
fn segment_term(coef: f64, x: [f64; 2], ex: f64, y: [f64; 2], ey: f64) -> Result<f64> {
    if coef == 0.0 {
        return Ok(0.0);
    }
    let opts = QuadOptions::with_rel_tol(1e-12);
    let mut total = 0.0;
    for (start, end) in [(0usize, 1usize), (1, 0)] {
        let (xs, xe, ys, ye) = (x[start], x[end], y[start], y[end]);
        let mut exponent = 0.0;
        if xs == 0.0 {
            exponent += ex;
        }
        if ys == 0.0 {
            exponent += ey;
        }
        if exponent <= -1.0 {
            return Err(Error::SingularIntegrand(format!(
                "segment vanishes at an endpoint with non-integrable exponent {exponent}"
            )));
        }
        let g = |s: f64| {
            let xv = xs + s * (xe - xs);
            let yv = ys + s * (ye - ys);
            pow_or_zero(xv, ex) * pow_or_zero(yv, ey)
        };
        let singular = (exponent < 0.0).then_some(exponent);
        total += quad::integrate_endpoint_singular(&g, 0.0, 0.5, singular, None, opts)?;
    }
    Ok(coef * total)
}

fn pow_or_zero(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        x.powf(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Perturbation {
    Super,
    Sub,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonVerdict {
    Pass,
    PremiseViolated,
    OrderingViolated,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub perturbation: Perturbation,
    pub horizon: f64,
    pub delta_scale: f64,
    pub samples: usize,
    /// Smallest relative slack of the integral inequality (negative means violated).
    pub min_premise_slack: f64,
    pub premise_holds: bool,
    pub min_ordering_slack: f64,
    pub ordering_holds: bool,
    pub verdict: ComparisonVerdict,
}

pub const COMPARISON_TOL: f64 = 1e-8;

/// Checks the comparison principle on `z_i = y_i (1 ± δ(t))`,
/// `δ(t) = delta_scale · t/(1+t)`: the integral inequality
/// `z_i(t) ≷ z_i(0) + ∫_0^t h_i z_i^{p_ii} z_j^{p_ij}` and the resulting
/// ordering `z_i ≷ y_i`.
pub fn comparison_check(
    prob: &CompanionProblem,
    perturbation: Perturbation,
    horizon: f64,
    delta_scale: f64,
) -> Result<ComparisonReport> {
    if !(horizon > 0.0) {
        return Err(Error::Invalid(format!("horizon must be positive, got {horizon}")));
    }
    let sign = match perturbation {
        Perturbation::Super => 1.0,
        Perturbation::Sub => -1.0,
    };
    let delta = |t: f64| delta_scale * t / (1.0 + t);
    let p = prob.exponents.rows();
    // state: ln y1, ln y2, I1, I2
    let rhs = |t: f64, s: &[f64; 4]| {
        let l = [s[0], s[1]];
        let dl = prob.log_rhs(t, &l);
        let factor = (1.0 + sign * delta(t)).ln();
        let lz = [l[0] + factor, l[1] + factor];
        let mut di = [0.0; 2];
        for i in 0..2 {
            let j = 1 - i;
            di[i] = (prob.h[i].ln_eval(t) + p[i][i] * lz[i] + p[i][j] * lz[j]).exp();
        }
        [dl[0], dl[1], di[0], di[1]]
    };
    let mut opts = Dopri5Options::uniform(1e-12, 0.0);
    opts.rtol = [0.0, 0.0, 1e-12, 1e-12];
    let s0 = [prob.y0[0].ln(), prob.y0[1].ln(), 0.0, 0.0];
    let mut stepper = Dopri5::new(rhs, 0.0, s0, opts);
    let mut min_premise = f64::INFINITY;
    let mut min_order = f64::INFINITY;
    let mut samples = 0usize;
    let mut check = |t: f64, s: &[f64; 4]| {
        samples += 1;
        for i in 0..2 {
            let y = s[i].exp();
            let z = y * (1.0 + sign * delta(t));
            let z0 = prob.y0[i];
            let premise = sign * (z - z0 - s[2 + i]) / (1.0 + z.abs());
            let order = sign * (z - y) / (1.0 + y.abs());
            min_premise = min_premise.min(premise);
            min_order = min_order.min(order);
        }
    };
    check(0.0, &s0);
    stepper.advance_to(horizon, &mut check)?;
    let premise_holds = min_premise >= -COMPARISON_TOL;
    let ordering_holds = min_order >= -COMPARISON_TOL;
    let verdict = if !premise_holds {
        ComparisonVerdict::PremiseViolated
    } else if !ordering_holds {
        ComparisonVerdict::OrderingViolated
    } else {
        ComparisonVerdict::Pass
    };
    Ok(ComparisonReport {
        perturbation,
        horizon,
        delta_scale,
        samples,
        min_premise_slack: min_premise,
        premise_holds,
        min_ordering_slack: min_order,
        ordering_holds,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::osgood::{Nonlinearity, OsgoodProblem};
    use crate::quad::Tail;

    fn one() -> TimeCoefficient {
        TimeCoefficient::constant(1.0).unwrap()
    }

    fn problem(rows: [[f64; 2]; 2], h1: TimeCoefficient, h2: TimeCoefficient, y0: [f64; 2]) -> CompanionProblem {
        CompanionProblem::new(ExponentMatrix::from_rows(rows).unwrap(), h1, h2, y0).unwrap()
    }

    #[test]
    fn derived_exponents() {
        let e = ExponentMatrix::from_rows([[0.0, 2.0], [2.0, 0.0]]).unwrap();
        assert_eq!((e.a(0), e.a(1)), (3.0, 3.0));
        assert_eq!(e.alpha(0), Some(2.0));
        assert_eq!(e.determinant(), -3.0);
        let e = ExponentMatrix::from_rows([[2.0, 1.0], [1.0, 2.0]]).unwrap();
        assert_eq!((e.a(0), e.a(1)), (0.0, 0.0));
        assert_eq!(e.alpha(0), None);
        assert!(ExponentMatrix::new(-1.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn solve_examples() {
        let p = problem([[0.0, 2.0], [2.0, 0.0]], one(), one(), [1.0, 1.0]);
        let tr = solve(&p, 0.5, SolveControls::default()).unwrap();
        assert_eq!(tr.status, TrajectoryStatus::Completed { t_end: 0.5 });
        let y = tr.last().y();
        assert!((y[0] - 2.0).abs() < 1e-9 && (y[1] - 2.0).abs() < 1e-9, "{y:?}");

        let p = problem([[1.0, 0.0], [0.0, 1.0]], one(), one(), [3.0, 5.0]);
        let y = solve(&p, 1.0, SolveControls::default()).unwrap().last().y();
        let e = std::f64::consts::E;
        assert!((y[0] - 3.0 * e).abs() < 1e-9 && (y[1] - 5.0 * e).abs() < 1e-9);

        let d = TimeCoefficient::with_tail("exp(-t)", Tail::exp(1.0)).unwrap();
        let p = problem([[2.0, 0.0], [0.0, 2.0]], d.clone(), d, [2.0, 2.0]);
        let tr = solve(&p, 10.0, SolveControls::default()).unwrap();
        match tr.status {
            TrajectoryStatus::BlowUp { t_lo, t_hi } => {
                assert!(t_lo <= 2f64.ln() && 2f64.ln() <= t_hi.unwrap());
                assert!(tr.last().y()[0] <= 1e12);
            }
            s => panic!("unexpected status {s:?}"),
        }
    }

    #[test]
    fn trajectory_is_monotone_and_symmetric() {
        let p = problem([[0.5, 1.0], [1.0, 0.5]], one(), one(), [1.0, 1.0]);
        let tr = solve(&p, 3.0, SolveControls::default()).unwrap();
        for w in tr.samples.windows(2) {
            assert!(w[1].t > w[0].t);
            assert!(w[1].ln_y[0] >= w[0].ln_y[0] && w[1].ln_y[1] >= w[0].ln_y[1]);
        }
        assert!(p.is_symmetric());
        for s in &tr.samples {
            let y = s.y();
            assert!((y[0] - y[1]).abs() <= 1e-9 * y[0]);
        }
    }

    #[test]
    fn brackets() {
        let p = problem([[0.0, 2.0], [2.0, 0.0]], one(), one(), [1.0, 1.0]);
        let b = blow_up_bracket(&p, SolveControls::default()).unwrap();
        assert!(b.contains(1.0), "{b:?}");
        assert!(b.width().unwrap() <= 1e-6);

        let p = problem([[2.0, 1.0], [1.0, 2.0]], one(), one(), [1.0, 1.0]);
        let b = blow_up_bracket(&p, SolveControls::default()).unwrap();
        assert!(b.contains(0.5), "{b:?}");
        assert!(b.width().unwrap() <= 1e-6);

        let p = problem([[1.0, 0.0], [0.0, 1.0]], one(), one(), [1.0, 1.0]);
        let b = blow_up_bracket(&p, SolveControls::default()).unwrap();
        assert!(matches!(b, BracketOutcome::Global { .. }), "{b:?}");
    }

    #[test]
    fn decoupled_component_matches_osgood() {
        let d = TimeCoefficient::with_tail("exp(-t)", Tail::exp(1.0)).unwrap();
        let p = problem([[2.0, 0.0], [0.5, 1.0]], d.clone(), one(), [0.7, 1.0]);
        let o = OsgoodProblem::new(0.7, d, Nonlinearity::PowerLaw { alpha: 2.0 }).unwrap().solve().unwrap();
        let tr = solve(&p, 5.0, SolveControls::default()).unwrap();
        for s in tr.samples.iter().step_by(7) {
            let exact = o.evaluate(s.t).unwrap();
            assert!((s.y()[0] - exact).abs() <= 1e-6 * exact);
        }
    }

    #[test]
    fn csv_export() {
        let p = problem([[1.0, 0.0], [0.0, 1.0]], one(), one(), [1.0, 2.0]);
        let tr = solve(&p, 0.1, SolveControls::default()).unwrap();
        let csv = tr.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,y1,y2"));
        let first: Vec<f64> = lines.next().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(first, vec![0.0, 1.0, 2.0]);
    }

    #[test]
    fn identity_examples() {
        assert_eq!(power_product_identity(2.0, 3.0, 2.0, 3.0, 1.5, 0.7).unwrap(), (0.0, 0.0));
        assert_eq!(power_product_identity(1.0, 1.0, 1.0, 1.0, 0.3, 2.0).unwrap(), (0.0, 0.0));
        let (l, r) = power_product_identity(3.0, 2.0, 1.0, 1.0, 2.0, 1.0).unwrap();
        assert_eq!(l, 17.0);
        assert!((r - 17.0).abs() < 1e-8);
    }

    #[test]
    fn identity_with_vanishing_segments() {
        // c = 0 with p < 1: integrable singularity at t = 0
        let (l, r) = power_product_identity(2.0, 3.0, 0.0, 1.0, 0.5, 1.5).unwrap();
        assert!((l - r).abs() < 1e-8 * (1.0 + l.abs()), "{l} vs {r}");
        // a = 0: singularity at t = 1
        let (l, r) = power_product_identity(0.0, 3.0, 2.0, 1.0, 0.5, 1.5).unwrap();
        assert!((l - r).abs() < 1e-8 * (1.0 + l.abs()), "{l} vs {r}");
        assert!(power_product_identity(-1.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn comparison_examples() {
        let p = problem([[0.0, 2.0], [2.0, 0.0]], one(), one(), [1.0, 1.0]);
        let r = comparison_check(&p, Perturbation::Super, 0.5, 0.01).unwrap();
        assert_eq!(r.verdict, ComparisonVerdict::Pass, "{r:?}");
        let p = problem([[1.0, 0.0], [0.0, 1.0]], one(), one(), [1.0, 1.0]);
        let r = comparison_check(&p, Perturbation::Sub, 2.0, 0.01).unwrap();
        assert_eq!(r.verdict, ComparisonVerdict::Pass, "{r:?}");
        for pert in [Perturbation::Super, Perturbation::Sub] {
            let r = comparison_check(&p, pert, 2.0, 0.0).unwrap();
            assert_eq!(r.verdict, ComparisonVerdict::Pass);
            assert!(r.min_premise_slack.abs() < 1e-9);
        }
    }
}
