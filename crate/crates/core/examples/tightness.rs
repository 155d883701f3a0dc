//! A closed ball that carries all but ε of every measure in a family.

use std::sync::Arc;

use weakconv::measure::{scenario, tightness_witness, Rate, ScenarioSpec};
use weakconv::{CompactSpace, Point};

fn main() -> weakconv::Result<()> {
    let square = Arc::new(CompactSpace::unit_cube(2)?);
    let family = scenario(
        &square,
        ScenarioSpec::DiracDrift {
            start: Point::coords(vec![0.5, 0.5]),
            direction: vec![0.4, 0.0],
            rate: Rate::Harmonic,
        },
        0,
    )?
    .prefix(32)?;
    for eps in [0.5, 0.1, 0.0] {
        let w = tightness_witness(&family, eps)?;
        let worst = w.complement_masses.iter().copied().fold(0.0, f64::max);
        println!(
            "ε = {eps}: center {:?}, radius {:.4}, largest complement mass {worst}",
            w.center.map(|c| c.to_string()),
            w.radius
        );
    }
    Ok(())
}
