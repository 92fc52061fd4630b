//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::error::Error;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use blowup_lab::bounds::{corollary_classify, prop1_check, verdict_a1, verdict_c1, CorollaryClass, Prop1Outcome};
use blowup_lab::cli::verify::{inequality_trajectories, identity_fuzz, INEQUALITY_SLACK, IDENTITY_TOL};
use blowup_lab::coeffs::TimeCoefficient;
use blowup_lab::companion::{
    blow_up_bracket, solve, BracketOutcome, CompanionProblem, ExponentMatrix, SolveControls, TrajectoryStatus,
};
use blowup_lab::osgood::{BlowUpTime, Nonlinearity, OsgoodProblem};
use blowup_lab::pde::{
    picard_validate, run, space_infinity_report, Diffusion, Grid, InitialProfile, PdeConfig, PicardOptions,
    RunStatus, SimulationRun,
};
use blowup_lab::quad::Tail;

type Outcome = Result<(bool, String), Box<dyn Error>>;

const SEED: u64 = 20240601;

fn one() -> TimeCoefficient {
    TimeCoefficient::constant(1.0).unwrap()
}

fn system(rows: [[f64; 2]; 2], y0: [f64; 2]) -> CompanionProblem {
    CompanionProblem::new(ExponentMatrix::from_rows(rows).unwrap(), one(), one(), y0).unwrap()
}

fn riccati_config(profile: InitialProfile, n: usize) -> PdeConfig {
    let e = ExponentMatrix::from_rows([[0.0, 2.0], [2.0, 0.0]]).unwrap();
    let mut c = PdeConfig::new(e, [one(), one()], [one(), one()], [profile.clone(), profile]);
    c.points_per_axis = n;
    c
}

fn bump() -> InitialProfile {
    InitialProfile::ConstantMinusBump {
        value: 1.0,
        amplitude: 0.5,
        width: 1.0,
    }
}

fn scalar_power_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let p = 1.0 + rng.gen_range(1e-3..=4.0);
        let m = rng.gen_range(0.5..=10.0);
        let prob = OsgoodProblem::new(m, one(), Nonlinearity::PowerLaw { alpha: p })?;
        let exact = m.powf(1.0 - p) / (p - 1.0);
        let rel = match prob.blow_up_time()? {
            BlowUpTime::Finite(t) => ((t - exact) / exact).abs(),
            _ => f64::INFINITY,
        };
        worst = worst.max(rel);
    }
    Ok((worst <= 1e-10, format!("20 pairs, max relative error {worst:.2e}")))
}

fn scalar_decaying() -> Outcome {
    let f = TimeCoefficient::with_tail("exp(-t)", Tail::exp(1.0))?;
    let b = Nonlinearity::PowerLaw { alpha: 2.0 };
    let t2 = OsgoodProblem::new(2.0, f.clone(), b.clone())?.blow_up_time()?;
    let t05 = OsgoodProblem::new(0.5, f, b)?.blow_up_time()?;
    let err = t2.finite().map_or(f64::INFINITY, |t| (t - 2f64.ln()).abs());
    Ok((
        err <= 1e-9 && t05.is_global(),
        format!("y0=2: |t - ln 2| = {err:.2e}; y0=0.5: {t05:?}"),
    ))
}

fn bracket_of(prob: &CompanionProblem) -> Result<BracketOutcome, Box<dyn Error>> {
    Ok(blow_up_bracket(prob, SolveControls::default())?)
}

fn symmetric_exactness() -> Outcome {
    let prob = system([[0.0, 2.0], [2.0, 0.0]], [1.0, 1.0]);
    let br = bracket_of(&prob)?;
    let width = br.width().unwrap_or(f64::INFINITY);
    let contains = br.contains(1.0);
    let tau = verdict_a1(&prob, 0)?.tau_bar().unwrap_or(f64::NAN);
    let class = corollary_classify(&prob.exponents);
    let pass = contains && width <= 1e-6 && (tau - 1.0).abs() <= 1e-9 && class == CorollaryClass::BlowUp;
    Ok((
        pass,
        format!("bracket contains 1: {contains}, width {width:.2e}; a.1 tau {tau:.12}; {class:?}"),
    ))
}

fn case_c_tightness() -> Outcome {
    let prob = system([[2.0, 1.0], [1.0, 2.0]], [1.0, 1.0]);
    let tau = verdict_c1(&prob, 0)?.tau_bar().unwrap_or(f64::NAN);
    let contains = bracket_of(&prob)?.contains(0.5);
    Ok((
        (tau - 0.5).abs() <= 1e-9 && contains,
        format!("c.1 tau {tau:.12}; bracket contains 0.5: {contains}"),
    ))
}

fn prop1_boundary() -> Outcome {
    let decay = TimeCoefficient::with_tail("exp(-t)", Tail::exp(1.0))?;
    let e = ExponentMatrix::from_rows([[2.0, 0.0], [0.0, 0.0]])?;
    let blow = CompanionProblem::new(e, decay.clone(), decay.clone(), [2.0, 2.0])?;
    let tau = match prop1_check(&blow, 0)?.outcome {
        Prop1Outcome::BlowUpCertificate { tau_bar } => tau_bar,
        _ => f64::NAN,
    };
    let small = CompanionProblem::new(e, decay.clone(), decay, [0.5, 0.5])?;
    let inconclusive = matches!(prop1_check(&small, 0)?.outcome, Prop1Outcome::Inconclusive { .. });
    let traj = solve(&small, 1e3, SolveControls::default())?;
    let completed = matches!(traj.status, TrajectoryStatus::Completed { .. });
    let max_y = traj
        .samples
        .iter()
        .map(|s| s.y()[0].max(s.y()[1]))
        .fold(0.0, f64::max);
    let pass = (tau - 2f64.ln()).abs() <= 1e-9 && inconclusive && completed && max_y < 1e3 * 0.5;
    Ok((
        pass,
        format!("y0=2 tau {tau:.12}; y0=0.5 inconclusive: {inconclusive}, max y on [0, 1e3] = {max_y:.6}"),
    ))
}

fn comparison_constants() -> Outcome {
    let ts = inequality_trajectories(SEED, 10)?;
    let worst = ts.iter().map(|t| t.min_slack).fold(f64::INFINITY, f64::min);
    let samples: usize = ts.iter().map(|t| t.samples).sum();
    let cases: Vec<String> = ts.iter().map(|t| format!("{:?}", t.case).to_lowercase()).collect();
    Ok((
        ts.len() == 10 && worst >= -INEQUALITY_SLACK,
        format!("cases [{}], {samples} samples, min slack {worst:.2e}", cases.join("")),
    ))
}

fn identity_check() -> Outcome {
    let f = identity_fuzz(SEED, 1000)?;
    Ok((
        f.max_scaled_error <= IDENTITY_TOL,
        format!("1000 tuples, max |lhs-rhs|/(1+|lhs|) = {:.2e}", f.max_scaled_error),
    ))
}

fn homogeneous_exactness() -> Outcome {
    let mut c = riccati_config(InitialProfile::Constant { value: 1.0 }, 64);
    c.t_end = 0.75;
    c.snapshot_times = vec![0.25, 0.5, 0.75];
    let sim = run(&c)?;
    let mut worst: f64 = 0.0;
    let mut seen = 0;
    for s in sim.snapshots.iter().filter(|s| c.snapshot_times.contains(&s.t)) {
        seen += 1;
        let exact = 1.0 / (1.0 - s.t);
        let y = s.companion.ok_or("companion missing")?;
        for i in 0..2 {
            for v in [s.sup[i], s.center[i], s.far[i], y[i]] {
                worst = worst.max(((v - exact) / exact).abs());
            }
        }
    }
    Ok((
        seen == 3 && worst <= 1e-4,
        format!("{seen} snapshots, max relative error vs 1/(1-t) {worst:.2e}"),
    ))
}

fn bump_run() -> Result<SimulationRun, Box<dyn Error>> {
    let mut c = riccati_config(bump(), 512);
    c.t_end = 1.0;
    c.record_every_step = true;
    c.snapshot_times = (1..=8).map(|k| 0.1 * k as f64).collect();
    Ok(run(&c)?)
}

fn far_field_tracking(sim: &SimulationRun) -> Outcome {
    let mut far_err: f64 = 0.0;
    let mut excess_window = f64::NEG_INFINITY;
    let mut excess_all = f64::NEG_INFINITY;
    let mut n = 0;
    for s in &sim.snapshots {
        let Some(y) = s.companion else { continue };
        for i in 0..2 {
            let ex = s.sup[i] / y[i] - 1.0;
            excess_all = excess_all.max(ex);
            if s.t <= 0.8 {
                excess_window = excess_window.max(ex);
                far_err = far_err.max((s.far[i] - y[i]).abs());
            }
        }
        if s.t <= 0.8 {
            n += 1;
        }
    }
    Ok((
        n > 0 && far_err <= 1e-3 && excess_all <= 1e-6,
        format!(
            "{n} snapshots t<=0.8: max |far-y| {far_err:.2e}; max sup/y-1 whole run {excess_all:.2e} (t<=0.8 {excess_window:.2e})"
        ),
    ))
}

fn separation(sim: &SimulationRun) -> Outcome {
    if !matches!(sim.status, RunStatus::BlowUpDetected { .. }) {
        return Ok((false, format!("run ended with {:?}", sim.status)));
    }
    let rep = space_infinity_report(sim)?;
    let q = [rep.center[0] / rep.far[0], rep.center[1] / rep.far[1]];
    let pass = q.iter().all(|&r| r <= 0.9) && rep.ratio_nonincreasing_late;
    Ok((
        pass,
        format!(
            "last stable t {:.10}, center/far {:.2e}; nonincreasing on [t/2, t]: {}, over all snapshots: {}",
            rep.last_stable_t, q[0], rep.ratio_nonincreasing_late, rep.ratio_nonincreasing_all
        ),
    ))
}

fn picard_oracle() -> Outcome {
    let c = riccati_config(bump(), 256);
    let rep = picard_validate(&c, PicardOptions::default())?;
    let ratio = rep.max_contraction_ratio().unwrap_or(f64::INFINITY);
    Ok((
        !rep.diverging && rep.discrepancy <= 1e-5 && ratio <= 0.5,
        format!(
            "T_short {:.4}, discrepancy {:.2e}, max contraction ratio {ratio:.3}",
            rep.t_short, rep.discrepancy
        ),
    ))
}

fn diffusion_exactness() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut tail: f64 = 0.0;
    let s0 = 1.0_f64;
    for (dim, n, l) in [(1, 256, 20.0), (2, 128, 20.0)] {
        let grid = Grid::new(dim, n, l)?;
        let heat = Diffusion::new(grid);
        for k in [0.1, 0.5, 2.0] {
            // kernel tail at the box edge after evolution
            tail = tail.max((s0 / (s0 + k)).sqrt() * (-l * l / (4.0 * (s0 + k))).exp());
            let gauss = |r2: f64, s: f64| ((s0 / s).sqrt()).powi(dim as i32) * (-r2 / (4.0 * s)).exp();
            let r2 = |i: usize| grid.point(i).iter().map(|x| x * x).sum::<f64>();
            let mut u: Vec<f64> = (0..grid.len()).map(|i| gauss(r2(i), s0)).collect();
            heat.apply(&mut u, k);
            for (i, v) in u.iter().enumerate() {
                worst = worst.max((v - gauss(r2(i), s0 + k)).abs());
            }
        }
    }
    Ok((
        worst <= 1e-10 && tail < 1e-14,
        format!("1-D and 2-D, max error {worst:.2e}, boundary tail {tail:.2e}"),
    ))
}

fn main() {
    let mut failures = 0;
    let mut report = |id: usize, name: &str, limit: Duration, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let result = f();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok((pass, detail)) => (pass && elapsed <= limit, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "{} criterion {id:>2} {name}: {detail} [{:.2}s, limit {}s]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    };
    let s = Duration::from_secs;
    report(1, "scalar power law", s(1), &scalar_power_law);
    report(2, "scalar decaying coefficient", s(1), &scalar_decaying);
    report(3, "symmetric system exactness", s(5), &symmetric_exactness);
    report(4, "case c tightness", s(5), &case_c_tightness);
    report(5, "frozen-component boundary", s(10), &prop1_boundary);
    report(6, "comparison-constant inequalities", s(30), &comparison_constants);
    report(7, "power-product identity", s(10), &identity_check);
    report(8, "homogeneous PDE exactness", s(30), &homogeneous_exactness);

    let start = Instant::now();
    let sim = bump_run().map_err(|e| e.to_string());
    let run_time = start.elapsed();
    let budget = s(120).saturating_sub(run_time);
    let with_run = |f: fn(&SimulationRun) -> Outcome| match &sim {
        Ok(sim) => f(sim),
        Err(e) => Err(e.clone().into()),
    };
    report(9, "far-field tracking", budget, &|| with_run(far_field_tracking));
    report(10, "interior separation", budget, &|| with_run(separation));
    report(11, "Picard oracle", s(60), &picard_oracle);
    report(12, "diffusion exactness", s(5), &diffusion_exactness);

    println!("shared bump run took {:.2}s", run_time.as_secs_f64());
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
