//! Upper bounds and global certificates from the comparison inequalities.

use blowup_lab::bounds::{corollary_classify, report, BoundsOptions};
use blowup_lab::coeffs::TimeCoefficient;
use blowup_lab::companion::{CompanionProblem, ExponentMatrix};
use blowup_lab::quad::Tail;

fn show(name: &str, prob: &CompanionProblem) -> Result<(), Box<dyn std::error::Error>> {
    let rep = report(prob, &BoundsOptions::default())?;
    println!("{name}");
    for v in &rep.verdicts {
        println!("  {} -> component {}: {:?}", v.case.as_str(), v.component, v.kind);
    }
    println!("  system upper bound: {:?}", rep.system_upper_bound);
    if let Some(c) = rep.corollary {
        println!("  constant-coefficient classification: {c:?}");
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let one = TimeCoefficient::constant(1.0)?;

    let e = ExponentMatrix::from_rows([[0.0, 2.0], [2.0, 0.0]])?;
    show("case a, exact bound 1", &CompanionProblem::new(e, one.clone(), one.clone(), [1.0, 1.0])?)?;

    let e = ExponentMatrix::from_rows([[2.0, 1.0], [1.0, 2.0]])?;
    show("case c, exact bound 1/2", &CompanionProblem::new(e, one.clone(), one.clone(), [1.0, 1.0])?)?;

    let e = ExponentMatrix::from_rows([[0.0, 1.0], [1.0, 2.0]])?;
    show("case b", &CompanionProblem::new(e, one.clone(), one.clone(), [1.0, 2.0])?)?;

    let decay = TimeCoefficient::with_tail("exp(-t)", Tail::exp(1.0))?;
    let e = ExponentMatrix::from_rows([[2.0, 0.0], [0.0, 0.0]])?;
    show("decaying h, y0 = 2", &CompanionProblem::new(e, decay.clone(), one.clone(), [2.0, 1.0])?)?;
    show("decaying h, y0 = 0.5", &CompanionProblem::new(e, decay, one, [0.5, 1.0])?)?;

    for rows in [[[0.5, 0.2], [0.3, 0.5]], [[0.5, 1.0], [1.0, 0.5]]] {
        let e = ExponentMatrix::from_rows(rows)?;
        println!("{rows:?}: det {:.3}, {:?}", e.determinant(), corollary_classify(&e));
    }
    Ok(())
}
