//! Bump data on a periodic box: the far field follows the companion ODE
//! while the interior stays bounded until the far field explodes.

use blowup_lab::coeffs::TimeCoefficient;
use blowup_lab::companion::ExponentMatrix;
use blowup_lab::pde::{run, snapshots_csv, space_infinity_report, InitialProfile, PdeConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let one = TimeCoefficient::constant(1.0)?;
    let e = ExponentMatrix::from_rows([[0.0, 2.0], [2.0, 0.0]])?;
    let bump = InitialProfile::ConstantMinusBump {
        value: 1.0,
        amplitude: 0.5,
        width: 1.0,
    };
    let mut config = PdeConfig::new(e, [one.clone(), one.clone()], [one.clone(), one], [bump.clone(), bump]);
    config.points_per_axis = 512;
    config.t_end = 1.0;
    config.snapshot_times = (1..=8).map(|k| 0.1 * k as f64).collect();

    let sim = run(&config)?;
    println!("status {:?}, {} steps, L = {:.3}", sim.status, sim.steps, sim.grid.half_length());
    for s in &sim.snapshots {
        let y = s.companion.map_or(f64::NAN, |y| y[0]);
        println!("t = {:.2}  center {:.6}  far {:.6}  y {:.6}", s.t, s.center[0], s.far[0], y);
    }

    let rep = space_infinity_report(&sim)?;
    println!("last stable t = {}", rep.last_stable_t);
    for p in &rep.probes {
        println!("  max over |x| <= {:.3}: {:.4e}", p.radius, p.max_inside[0]);
    }
    println!("  far field: {:.4e}", rep.far[0]);
    println!("  ratio nonincreasing late: {}", rep.ratio_nonincreasing_late);
    println!("  note: {}", rep.caveat);

    std::fs::write(std::env::temp_dir().join("pde_far_field.csv"), snapshots_csv(&sim.snapshots))?;
    Ok(())
}
