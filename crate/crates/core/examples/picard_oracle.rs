//! Picard iteration of the mild formulation as an independent check on
//! the splitting scheme.

use blowup_lab::coeffs::TimeCoefficient;
use blowup_lab::companion::ExponentMatrix;
use blowup_lab::pde::{default_t_short, picard_validate, InitialProfile, PdeConfig, PicardOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let one = TimeCoefficient::constant(1.0)?;
    let e = ExponentMatrix::from_rows([[0.0, 2.0], [2.0, 0.0]])?;
    let bump = InitialProfile::ConstantMinusBump {
        value: 1.0,
        amplitude: 0.5,
        width: 1.0,
    };
    let mut config = PdeConfig::new(e, [one.clone(), one.clone()], [one.clone(), one], [bump.clone(), bump]);
    config.points_per_axis = 256;
    println!("T_short = {}", default_t_short(&config)?);

    let rep = picard_validate(&config, PicardOptions::default())?;
    for (m, d) in rep.distances.iter().enumerate().take(8) {
        println!("  |u^({}) - u^({})| = {d:.3e}", m + 1, m);
    }
    println!("max contraction ratio {:?}", rep.max_contraction_ratio());
    println!("discrepancy against splitting {:.3e}", rep.discrepancy);

    let baseline = picard_validate(&config, PicardOptions { iterations: 0, ..PicardOptions::default() })?;
    println!("free evolution alone differs by {:.3e}", baseline.discrepancy);
    Ok(())
}
