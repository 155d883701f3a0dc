//! Certifying weak convergence of a drifting Dirac sequence and detecting
//! divergence of an alternating one, with the separating witness.

use std::sync::Arc;

use weakconv::convergence::{certify, generate_battery, BatterySpec};
use weakconv::measure::{scenario, Label, Rate, ScenarioSpec};
use weakconv::{CompactSpace, Point, TargetSpace};

fn main() -> weakconv::Result<()> {
    let line = Arc::new(CompactSpace::unit_cube(1)?);
    let target = TargetSpace::omega(4)?.with_coordinate_base();
    let battery = generate_battery(&line, Some(&target), &BatterySpec::default(), 0)?;
    println!("battery of {} members on {}", battery.len(), target.label());

    let drift = scenario(
        &line,
        ScenarioSpec::DiracDrift { start: Point::at(0.0), direction: vec![1.0], rate: Rate::Harmonic },
        0,
    )?;
    let Label::ConvergesTo(limit) = drift.label().clone() else { unreachable!("drift has a limit") };
    let v = certify(&drift, &limit, &battery, 64, 0.05)?;
    println!("drift: {} (BL tail {:.4})", v.status.as_str(), v.bl_tail);
    for m in v.members.iter().take(4) {
        println!("  {:<14} tail {:.5}", m.id, m.tail);
    }

    let alt = scenario(&line, ScenarioSpec::Alternating { a: Point::at(0.0), b: Point::at(1.0) }, 0)?;
    let v = certify(&alt, &alt.measure(64)?, &battery, 64, 0.05)?;
    println!("alternating: {}", v.status.as_str());
    if let Some(w) = &v.witness {
        println!("  witness {} separates n = {} and n = {} by {:.4}", w.member_id, w.n1, w.n2, w.gap);
    }
    Ok(())
}
