//! Blow-up times of scalar problems `y' = f(t) b(y)`.

use blowup_lab::coeffs::TimeCoefficient;
use blowup_lab::osgood::{BlowUpTime, Nonlinearity, OsgoodProblem};
use blowup_lab::quad::Tail;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let one = TimeCoefficient::constant(1.0)?;
    println!("y' = y^p, y(0) = M");
    for (p, m) in [(2.0, 1.0), (3.0, 0.5), (1.5, 4.0)] {
        let prob = OsgoodProblem::new(m, one.clone(), Nonlinearity::PowerLaw { alpha: p })?;
        let t = prob.blow_up_time()?;
        let exact = m.powf(1.0 - p) / (p - 1.0);
        println!("  p = {p}, M = {m}: {t:?} (closed form {exact})");
    }

    // f = e^{-t} integrates to 1, so blow-up needs B(y0) < 1
    let decay = TimeCoefficient::with_tail("exp(-t)", Tail::exp(1.0))?;
    println!("y' = e^(-t) y^2");
    for y0 in [2.0, 0.5] {
        let prob = OsgoodProblem::new(y0, decay.clone(), Nonlinearity::PowerLaw { alpha: 2.0 })?;
        match prob.blow_up_time()? {
            BlowUpTime::Finite(t) => println!("  y0 = {y0}: blow-up at {t} (ln 2 = {})", 2f64.ln()),
            other => println!("  y0 = {y0}: {other:?}"),
        }
    }

    // Osgood's condition fails for s ln s, so the solution is global
    let prob = OsgoodProblem::new(2.0, one, Nonlinearity::PowerLog { p: 1.0, q: 1.0, s0: 1.0 })?;
    println!("y' = y ln y, y(0) = 2: {:?}", prob.blow_up_time()?);
    Ok(())
}
