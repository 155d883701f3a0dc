//! Bounded-Lipschitz distance between atomic measures, with the optimal
//! dual function the linear program returns.

use std::sync::Arc;

use weakconv::{bl_distance, CompactSpace, FiniteMeasure, Point};

fn main() -> weakconv::Result<()> {
    let line = Arc::new(CompactSpace::unit_cube(1)?);
    let mu = FiniteMeasure::dirac(&line, Point::at(0.25))?;
    let nu = FiniteMeasure::dirac(&line, Point::at(0.0))?;
    let r = bl_distance(&mu, &nu)?;
    println!("BL(δ_0.25, δ_0) = {:.9}", r.value);

    let split = FiniteMeasure::from_pairs(&line, vec![(Point::at(0.0), 0.5), (Point::at(1.0), 0.5)])?;
    let r = bl_distance(&split, &nu)?;
    println!("BL(½δ_0 + ½δ_1, δ_0) = {:.9}", r.value);
    for (p, f) in &r.witness {
        println!("  f{p} = {f:+.6}");
    }
    println!(
        "  {} support points, {} Lipschitz rows, {} pivots",
        r.diagnostics.support, r.diagnostics.constraints, r.diagnostics.pivots
    );

    // On a finite space far-apart points saturate the bound at 2.
    let pair = Arc::new(CompactSpace::finite(
        vec!["x".into(), "y".into()],
        vec![vec![0.0, 5.0], vec![5.0, 0.0]],
    )?);
    let a = FiniteMeasure::dirac(&pair, Point::Index(0))?;
    let b = FiniteMeasure::dirac(&pair, Point::Index(1))?;
    println!("BL(δ_x, δ_y) with ρ = 5: {:.9}", bl_distance(&a, &b)?.value);
    Ok(())
}
