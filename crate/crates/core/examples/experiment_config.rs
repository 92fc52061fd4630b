//! Drives the command-line pipeline from a JSON experiment in-process.

use blowup_lab::cli::{execute, Command, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::from_json(
        r#"{
            "exponents": [[2, 1], [1, 2]],
            "h": ["1", "1"],
            "y0": [1, 1],
            "bounds": {"audit_simulation": true}
        }"#,
    )?;
    for cmd in [Command::Classify, Command::Ode, Command::Bounds] {
        let out = execute(cmd, &cfg)?;
        println!("{cmd:?} (exit {}): {}", out.exit, out.summary);
    }

    match ExperimentConfig::from_json(r#"{"exponents": [[0, 2]], "h": ["2*", "1"]}"#) {
        Ok(_) => println!("unexpectedly valid"),
        Err(errors) => println!("rejected:\n{errors}"),
    }
    Ok(())
}
