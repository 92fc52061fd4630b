use proptest::prelude::*;

use blowup_lab::bounds::{c19, c20, corollary_classify, report, BoundsOptions, CorollaryClass};
use blowup_lab::cli::ExperimentConfig;
use blowup_lab::coeffs::TimeCoefficient;
use blowup_lab::companion::{
    blow_up_bracket, power_product_identity, BracketOutcome, CompanionProblem, ExponentMatrix, SolveControls,
};
use blowup_lab::osgood::{Nonlinearity, OsgoodProblem};
use blowup_lab::pde::{Diffusion, Grid, Reaction};
use blowup_lab::quad::Tail;

fn one() -> TimeCoefficient {
    TimeCoefficient::constant(1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn power_law_blow_up_time_matches_closed_form(p in 1.01f64..5.0, m in 0.5f64..10.0) {
        let t = OsgoodProblem::new(m, one(), Nonlinearity::PowerLaw { alpha: p })
            .unwrap()
            .blow_up_time()
            .unwrap()
            .finite()
            .unwrap();
        let exact = m.powf(1.0 - p) / (p - 1.0);
        prop_assert!(((t - exact) / exact).abs() <= 1e-10);
    }

    #[test]
    fn blow_up_time_decreases_with_data(p in 1.2f64..4.0, m in 0.5f64..5.0, bump in 0.01f64..2.0) {
        let f = TimeCoefficient::with_tail("1 + t/(1 + t)", Tail::power(0.0)).unwrap();
        let time = |y0: f64| {
            OsgoodProblem::new(y0, f.clone(), Nonlinearity::PowerLaw { alpha: p })
                .unwrap()
                .blow_up_time()
                .unwrap()
                .finite()
                .unwrap()
        };
        prop_assert!(time(m + bump) < time(m));
    }

    #[test]
    fn power_product_identity_holds(
        a in 0.0f64..5.0, b in 0.0f64..5.0, c in 0.0f64..5.0, d in 0.0f64..5.0,
        p in 0.0f64..4.0, q in 0.0f64..4.0,
    ) {
        let (lhs, rhs) = power_product_identity(a, b, c, d, p, q).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-8 * (1.0 + lhs.abs()));
    }

    #[test]
    fn comparison_constants_hold_at_start(
        p in prop::array::uniform4(0.0f64..3.0), ht in 0.2f64..5.0, y in prop::array::uniform2(0.5f64..4.0),
    ) {
        let e = ExponentMatrix::new(p[0], p[1], p[2], p[3]).unwrap();
        for i in 0..2 {
            let j = 1 - i;
            if e.a(i) > 0.05 && e.a(j).abs() > 0.05 {
                let k = c19(&e, ht, y, i);
                prop_assert!(y[i].powf(e.a(i)) >= k.c.powf(e.a(i)) * ht * y[j].powf(e.a(j)) * (1.0 - 1e-12));
            }
            if e.a(i) > 0.05 && y[j] > 1.0 {
                let k = c20(&e, ht, y, i);
                prop_assert!(y[i].powf(e.a(i)) >= k.c * ht * y[j].ln() * (1.0 - 1e-12));
            }
        }
    }

    #[test]
    fn diffusion_preserves_mean_and_mirror_symmetry(
        values in prop::collection::vec(0.1f64..10.0, 32), k in 0.0f64..3.0,
    ) {
        let g = Grid::new(1, 64, 6.0).unwrap();
        // symmetric data under x -> -x
        let mut u = vec![0.0; g.len()];
        for idx in 0..g.len() {
            let m = g.mirror_index(idx).min(idx);
            u[idx] = values[m % values.len()];
        }
        for idx in 0..g.len() {
            u[idx] = u[g.mirror_index(idx)].max(u[idx]);
        }
        let mean = u.iter().sum::<f64>() / u.len() as f64;
        Diffusion::new(g).apply(&mut u, k);
        let after = u.iter().sum::<f64>() / u.len() as f64;
        prop_assert!((after - mean).abs() <= 1e-13 * mean);
        for idx in 0..g.len() {
            prop_assert!((u[idx] - u[g.mirror_index(idx)]).abs() <= 1e-12 * mean);
        }
    }

    #[test]
    fn reaction_keeps_positivity(
        p in prop::array::uniform4(0.0f64..2.0), u0 in prop::collection::vec(0.01f64..2.0, 8), dt in 1e-4f64..0.05,
    ) {
        let e = ExponentMatrix::new(p[0], p[1], p[2], p[3]).unwrap();
        let r = Reaction::new(e, [one(), one()]);
        let mut u = [u0.clone(), u0.iter().rev().copied().collect::<Vec<_>>()];
        let before = u.clone();
        r.step(&mut u, 0.0, dt).unwrap();
        for c in 0..2 {
            for (x, x0) in u[c].iter().zip(&before[c]) {
                prop_assert!(*x >= *x0 && x.is_finite());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Any finite upper bound is at least the simulated escape time, and an
    /// upper bound from any case implies the constant-coefficient criterion.
    #[test]
    fn upper_bounds_are_sound(p in prop::array::uniform4(0.0f64..3.0), y in prop::array::uniform2(0.5f64..3.0)) {
        let e = ExponentMatrix::new(p[0], p[1], p[2], p[3]).unwrap();
        let prob = CompanionProblem::new(e, one(), one(), y).unwrap();
        let rep = report(&prob, &BoundsOptions::default()).unwrap();
        if let Some(tau) = rep.system_upper_bound {
            prop_assert_eq!(corollary_classify(&e), CorollaryClass::BlowUp);
            if let BracketOutcome::BlowUp { t_lo, .. } = blow_up_bracket(&prob, SolveControls::default()).unwrap() {
                prop_assert!(t_lo <= tau * (1.0 + 1e-6), "t_lo {} > tau {}", t_lo, tau);
            }
        }
    }

    #[test]
    fn config_validation_never_panics(text in "\\PC{0,80}") {
        let _ = ExperimentConfig::from_json(&text);
    }
}

#[test]
fn bump_run_self_converges() {
    use blowup_lab::pde::{run, InitialProfile, PdeConfig};
    let e = ExponentMatrix::new(0.0, 2.0, 2.0, 0.0).unwrap();
    let bump = InitialProfile::ConstantMinusBump {
        value: 1.0,
        amplitude: 0.5,
        width: 1.0,
    };
    let times: Vec<f64> = (1..=8).map(|k| 0.1 * k as f64).collect();
    let snapshots = |n: usize, dt_max: f64| {
        let mut c = PdeConfig::new(e, [one(), one()], [one(), one()], [bump.clone(), bump.clone()]);
        c.points_per_axis = n;
        c.dt_max = dt_max;
        c.t_end = 0.8;
        c.snapshot_times = times.clone();
        run(&c).unwrap().snapshots
    };
    let coarse = snapshots(256, 5e-3);
    let fine = snapshots(512, 2.5e-3);
    let mut worst: f64 = 0.0;
    for t in &times {
        let a = coarse.iter().find(|s| s.t == *t).unwrap();
        let b = fine.iter().find(|s| s.t == *t).unwrap();
        for i in 0..2 {
            for (x, y) in [(a.sup[i], b.sup[i]), (a.center[i], b.center[i]), (a.far[i], b.far[i])] {
                worst = worst.max(((x - y) / y).abs());
            }
        }
    }
    assert!(worst < 1e-4, "max relative change {worst:e}");
}
