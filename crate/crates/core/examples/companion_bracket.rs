//! Companion ODE trajectories and rigorous blow-up brackets.

use blowup_lab::coeffs::TimeCoefficient;
use blowup_lab::companion::{blow_up_bracket, solve, CompanionProblem, ExponentMatrix, SolveControls};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let one = TimeCoefficient::constant(1.0)?;
    let systems = [
        ("symmetric Riccati", [[0.0, 2.0], [2.0, 0.0]]),
        ("self-coupled", [[2.0, 1.0], [1.0, 2.0]]),
        ("linear", [[1.0, 0.0], [0.0, 1.0]]),
    ];
    for (name, rows) in systems {
        let e = ExponentMatrix::from_rows(rows)?;
        let prob = CompanionProblem::new(e, one.clone(), one.clone(), [1.0, 1.0])?;
        let bracket = blow_up_bracket(&prob, SolveControls::default())?;
        println!("{name}: {bracket:?}");
    }

    let e = ExponentMatrix::from_rows([[0.0, 2.0], [2.0, 0.0]])?;
    let prob = CompanionProblem::new(e, one.clone(), one, [1.0, 1.0])?;
    let traj = solve(&prob, 0.9, SolveControls::default())?;
    let last = traj.last();
    println!(
        "y(0.9) = {:?} after {} steps (exact 1/(1 - t) = {})",
        last.y(),
        traj.steps,
        1.0 / (1.0 - last.t)
    );
    let csv = traj.to_csv();
    println!("{}", csv.lines().take(4).collect::<Vec<_>>().join("\n"));
    Ok(())
}
