//! Finite Schauder bases: expansions, coordinate functionals, partial sums
//! and the uniform boundedness criterion on partial-sum operators.

use weakconv::target::{base_continuity_probe, base_criterion_report, LpNorm, SampleSpec};
use weakconv::{TargetSpace, Vector};

fn main() -> weakconv::Result<()> {
    let skew = TargetSpace::banach(3, LpNorm::L2)?.with_base(vec![
        Vector(vec![1.0, 0.0, 0.0]),
        Vector(vec![1.0, 1.0, 0.0]),
        Vector(vec![1.0, 1.0, 1.0]),
    ])?;
    let x = Vector(vec![3.0, -1.0, 2.0]);
    let coeffs = skew.expand(&x)?;
    println!("coefficients of {:?}: {coeffs:?}", x.0);
    for m in 1..=3 {
        println!("  partial sum {m}: {:?}", skew.partial_sum(&coeffs, m)?.0);
    }
    let probe = base_continuity_probe(&skew, SampleSpec::new(50, 1))?;
    println!("coordinate functionals continuous: {}", probe.converges);

    let omega = TargetSpace::omega(4)?.with_coordinate_base();
    let r = base_criterion_report(&omega, 1.0, 4, 4, SampleSpec::new(200, 2))?;
    println!("ω coordinate base, M = 1: pass = {}, worst ratio = {:.4}", r.pass, r.worst_ratio);

    let tilted = TargetSpace::banach(2, LpNorm::L2)?
        .with_base(vec![Vector(vec![1.0, 0.0]), Vector(vec![1.0, 0.1])])?;
    let r = base_criterion_report(&tilted, 1.0, 1, 1, SampleSpec::new(200, 2))?;
    println!(
        "nearly parallel base, M = 1: pass = {}, worst ratio = {:.4} at (m, n) = {:?}",
        r.pass, r.worst_ratio, r.worst_pair
    );
    Ok(())
}
