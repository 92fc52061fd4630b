//! Invariant suites behind `verify`. Each returns a named pass/fail check
//! with a JSON detail record.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::ExperimentConfig;
use crate::bounds::{c19, c20, case_dispatch, BoundsOptions, Case};
use crate::coeffs::{HtildeRatio, TimeCoefficient};
use crate::companion::{
    comparison_check, power_product_identity, solve, CompanionProblem, ComparisonVerdict, ExponentMatrix,
    Perturbation, SolveControls, TrajectoryStatus,
};
use crate::error::Result;
use crate::pde::{picard_validate, run, space_infinity_report, PicardOptions, RunStatus};
use crate::quad::Tail;

/// Relative slack allowed in the comparison-constant inequalities.
pub const INEQUALITY_SLACK: f64 = 1e-8;
pub const IDENTITY_TOL: f64 = 1e-8;
pub const SEPARATION_FACTOR: f64 = 0.9;
pub const PICARD_DISCREPANCY_TOL: f64 = 1e-5;
pub const PICARD_MAX_RATIO: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: Value,
}

impl Check {
    fn new(name: &str, pass: bool, detail: Value) -> Self {
        Check {
            name: name.to_string(),
            pass,
            detail,
        }
    }

    fn failed(name: &str, err: impl std::fmt::Display) -> Self {
        Check::new(name, false, json!({ "error": err.to_string() }))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityFuzz {
    pub tuples: usize,
    pub max_scaled_error: f64,
    pub worst: [f64; 6],
}

/// Seeded random `(a, b, c, d, p, q)` with `a..d ∈ [0, 5]`, `p, q ∈ [0, 4]`;
/// reports the largest `|lhs − rhs| / (1 + |lhs|)`.
pub fn identity_fuzz(seed: u64, tuples: usize) -> Result<IdentityFuzz> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draws: Vec<[f64; 6]> = (0..tuples)
        .map(|_| {
            [
                rng.gen_range(0.0..5.0),
                rng.gen_range(0.0..5.0),
                rng.gen_range(0.0..5.0),
                rng.gen_range(0.0..5.0),
                rng.gen_range(0.0..4.0),
                rng.gen_range(0.0..4.0),
            ]
        })
        .collect();
    let errors = draws
        .par_iter()
        .map(|&[a, b, c, d, p, q]| {
            let (lhs, rhs) = power_product_identity(a, b, c, d, p, q)?;
            Ok((lhs - rhs).abs() / (1.0 + lhs.abs()))
        })
        .collect::<Result<Vec<f64>>>()?;
    let (k, max) = errors
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0), |(bk, bv), (k, v)| if v > bv { (k, v) } else { (bk, bv) });
    Ok(IdentityFuzz {
        tuples,
        max_scaled_error: max,
        worst: draws.get(k).copied().unwrap_or([0.0; 6]),
    })
}

/// One sampled system together with the inequality it must satisfy.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityTrajectory {
    pub case: Case,
    /// 0-based index supplying the inequality.
    pub role: usize,
    pub exponents: [[f64; 2]; 2],
    pub h: [String; 2],
    pub y0: [f64; 2],
    pub blow_up_near: f64,
    pub samples: usize,
    /// Smallest `lhs/rhs − 1` over the samples.
    pub min_slack: f64,
}

impl InequalityTrajectory {
    pub fn holds(&self) -> bool {
        self.min_slack >= -INEQUALITY_SLACK
    }
}

fn draw_exponents(rng: &mut ChaCha8Rng, case: Case) -> [[f64; 2]; 2] {
    let mut u = |lo: f64, hi: f64| rng.gen_range(lo..hi);
    loop {
        let p = match case {
            Case::A => [[u(0.0, 3.0), u(0.0, 3.0)], [u(0.0, 3.0), u(0.0, 3.0)]],
            Case::B => {
                // role 0 with a_0 > 0, a_1 = 0
                let p22 = u(1.0, 3.0);
                [[u(0.0, 3.0), p22 - 1.0], [u(0.0, 3.0), p22]]
            }
            Case::C => {
                let (p11, p22) = (u(1.0, 3.0), u(1.0, 3.0));
                [[p11, p22 - 1.0], [p11 - 1.0, p22]]
            }
        };
        let e = ExponentMatrix::from_rows(p).expect("nonnegative draws");
        let ok = match case {
            Case::A => (0..2).any(|i| e.a(i) > 0.05 && e.a(1 - i).abs() > 0.05),
            Case::B => e.a(0) > 0.05,
            Case::C => true,
        };
        if ok {
            return p;
        }
    }
}

fn log_slack(case: Case, e: &ExponentMatrix, i: usize, y0: [f64; 2], ht0: f64, ht: f64, ln_y: [f64; 2]) -> Option<f64> {
    let j = 1 - i;
    let (lhs, rhs) = match case {
        Case::A => {
            let k = c19(e, ht0, y0, i);
            (e.a(i) * ln_y[i], e.a(i) * k.c.ln() + ht.ln() + e.a(j) * ln_y[j])
        }
        Case::B => {
            let k = c20(e, ht0, y0, i);
            if ln_y[j] <= 0.0 {
                return None;
            }
            (e.a(i) * ln_y[i], (k.c * ht * ln_y[j]).ln())
        }
        Case::C => (ln_y[i], y0[i].ln() + ht * (ln_y[j] - y0[j].ln())),
    };
    Some((lhs - rhs).exp_m1())
}

/// Samples `count` blow-up trajectories cycling through cases a, b, c, with
/// either constant `h` or `h_1 = c e^{−t/2}`, and evaluates the matching
/// comparison inequality at every accepted solver step.
pub fn inequality_trajectories(seed: u64, count: usize) -> Result<Vec<InequalityTrajectory>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases = [Case::A, Case::B, Case::C];
    let controls = SolveControls::default();
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 1000 * count.max(1) {
            return Err(crate::error::Error::Numerical(
                "could not sample enough blow-up trajectories".into(),
            ));
        }
        let case = cases[out.len() % 3];
        let p = draw_exponents(&mut rng, case);
        let e = ExponentMatrix::from_rows(p)?;
        let c1 = rng.gen_range(0.5..2.0);
        let c2 = rng.gen_range(0.5..2.0);
        let decaying = rng.gen_bool(0.5);
        let y0 = [rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0)];
        let (s1, t1) = if decaying {
            (format!("{c1:.6}*exp(-t/2)"), Tail::exp(0.5))
        } else {
            (format!("{c1:.6}"), Tail::Unknown)
        };
        let s2 = format!("{c2:.6}");
        let h1 = TimeCoefficient::with_tail(&s1, t1)?;
        let h2 = TimeCoefficient::new(&s2)?;
        let prob = CompanionProblem::new(e, h1, h2, y0)?;
        let traj = solve(&prob, 20.0, controls)?;
        let TrajectoryStatus::BlowUp { t_lo, .. } = traj.status else {
            continue;
        };
        let roles: Vec<usize> = case_dispatch(&e, &BoundsOptions::default())
            .into_iter()
            .filter(|rc| rc.case == case)
            .map(|rc| rc.i - 1)
            .collect();
        for i in roles {
            let ratio = HtildeRatio::new(&prob.h[i], &prob.h[1 - i])?;
            if !ratio.is_nonincreasing() {
                continue;
            }
            let ht0 = ratio.eval(0.0);
            let mut min_slack = f64::INFINITY;
            let mut samples = 0;
            for s in &traj.samples {
                if let Some(v) = log_slack(case, &e, i, y0, ht0, ratio.eval(s.t), s.ln_y) {
                    min_slack = min_slack.min(v);
                    samples += 1;
                }
            }
            out.push(InequalityTrajectory {
                case,
                role: i,
                exponents: p,
                h: [s1.clone(), s2.clone()],
                y0,
                blow_up_near: t_lo,
                samples,
                min_slack,
            });
            break;
        }
    }
    Ok(out)
}

fn identity_check(cfg: &ExperimentConfig) -> Check {
    const NAME: &str = "power_product_identity";
    match identity_fuzz(cfg.seed, cfg.verify.identity_tuples) {
        Ok(f) => Check::new(NAME, f.max_scaled_error <= IDENTITY_TOL, json!(f)),
        Err(e) => Check::failed(NAME, e),
    }
}

fn inequality_check(cfg: &ExperimentConfig) -> Check {
    const NAME: &str = "comparison_constants";
    match inequality_trajectories(cfg.seed, cfg.verify.trajectories) {
        Ok(ts) => {
            let pass = ts.iter().all(InequalityTrajectory::holds);
            let worst = ts.iter().map(|t| t.min_slack).fold(f64::INFINITY, f64::min);
            Check::new(NAME, pass, json!({ "min_slack": worst, "trajectories": ts }))
        }
        Err(e) => Check::failed(NAME, e),
    }
}

fn comparison_harness(cfg: &ExperimentConfig) -> Check {
    const NAME: &str = "comparison_harness";
    let reports = cfg.companion_problem().and_then(|prob| {
        [Perturbation::Super, Perturbation::Sub]
            .into_iter()
            .map(|p| comparison_check(&prob, p, cfg.verify.comparison_horizon, cfg.verify.comparison_delta))
            .collect::<Result<Vec<_>>>()
    });
    match reports {
        Ok(r) => Check::new(
            NAME,
            r.iter().all(|r| r.verdict == ComparisonVerdict::Pass),
            json!(r),
        ),
        Err(e) => Check::failed(NAME, e),
    }
}

fn picard_check(cfg: &ExperimentConfig) -> Check {
    const NAME: &str = "picard";
    let opts = PicardOptions {
        t_short: cfg.verify.picard_t_short,
        iterations: cfg.verify.picard_iterations,
        ..PicardOptions::default()
    };
    match cfg.pde_config().and_then(|c| picard_validate(&c, opts)) {
        Ok(r) => {
            let ratio_ok = r.max_contraction_ratio().map_or(true, |m| m <= PICARD_MAX_RATIO);
            let pass = !r.diverging && ratio_ok && r.discrepancy <= PICARD_DISCREPANCY_TOL;
            Check::new(NAME, pass, json!(r))
        }
        Err(e) => Check::failed(NAME, e),
    }
}

/// Domination, far-field tracking and interior separation from one run.
fn pde_checks(cfg: &ExperimentConfig) -> Vec<Check> {
    let names = ["domination", "far_field_tracking", "separation"];
    let sim = match cfg.pde_config().and_then(|c| run(&c)) {
        Ok(r) => r,
        Err(e) => return names.iter().map(|n| Check::failed(n, &e)).collect(),
    };
    let window = cfg.verify.tracking_window;
    let mut max_excess = f64::NEG_INFINITY;
    let mut max_far_err: f64 = 0.0;
    let mut compared = 0usize;
    let mut dominated = 0usize;
    for s in &sim.snapshots {
        let Some(y) = s.companion else { continue };
        dominated += 1;
        for i in 0..2 {
            max_excess = max_excess.max(s.sup[i] / y[i] - 1.0);
            if s.t <= window {
                max_far_err = max_far_err.max((s.far[i] - y[i]).abs());
            }
        }
        if s.t <= window {
            compared += 1;
        }
    }
    let enough = compared > 0;
    let domination = Check::new(
        names[0],
        dominated > 0 && max_excess <= cfg.verify.domination_tol,
        json!({ "snapshots": dominated, "max_relative_excess": max_excess, "tol": cfg.verify.domination_tol }),
    );
    let far = Check::new(
        names[1],
        enough && max_far_err <= cfg.verify.far_field_tol,
        json!({ "window": window, "snapshots": compared, "max_abs_error": max_far_err, "tol": cfg.verify.far_field_tol }),
    );
    let separation = match sim.status {
        RunStatus::BlowUpDetected { .. } => match space_infinity_report(&sim) {
            Ok(rep) => {
                let separated = (0..2).all(|i| rep.center[i] <= SEPARATION_FACTOR * rep.far[i]);
                Check::new(
                    names[2],
                    separated && rep.ratio_nonincreasing_late,
                    json!({
                        "last_stable_t": rep.last_stable_t,
                        "center": rep.center,
                        "far": rep.far,
                        "ratio_nonincreasing_late": rep.ratio_nonincreasing_late,
                        "ratio_nonincreasing_all": rep.ratio_nonincreasing_all,
                    }),
                )
            }
            Err(e) => Check::failed(names[2], e),
        },
        s => Check::new(names[2], false, json!({ "error": "run did not reach blow-up", "status": s })),
    };
    vec![domination, far, separation]
}

/// Runs every suite. Suites execute concurrently; the result order is fixed.
pub fn run_suites(cfg: &ExperimentConfig) -> Vec<Check> {
    type Suite = fn(&ExperimentConfig) -> Vec<Check>;
    let suites: [Suite; 5] = [
        pde_checks,
        |c| vec![comparison_harness(c)],
        |c| vec![identity_check(c)],
        |c| vec![inequality_check(c)],
        |c| vec![picard_check(c)],
    ];
    suites.par_iter().flat_map_iter(|s| s(cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_fuzz_deterministic() {
        let a = identity_fuzz(7, 50).unwrap();
        let b = identity_fuzz(7, 50).unwrap();
        assert_eq!(a, b);
        assert!(a.max_scaled_error <= IDENTITY_TOL, "{a:?}");
    }

    #[test]
    fn trajectories_cover_all_cases() {
        let ts = inequality_trajectories(3, 6).unwrap();
        assert_eq!(ts.len(), 6);
        for c in [Case::A, Case::B, Case::C] {
            assert!(ts.iter().any(|t| t.case == c));
        }
        for t in &ts {
            assert!(t.holds(), "{t:?}");
            assert!(t.samples > 0);
        }
    }

    #[test]
    fn harness_passes_on_riccati() {
        let cfg = ExperimentConfig::default_verify();
        let c = comparison_harness(&cfg);
        assert!(c.pass, "{c:?}");
    }
}
