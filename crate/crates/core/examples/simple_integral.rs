//! Integral of a vector-valued function by refining simple approximations,
//! with the per-mesh certificate and a failing discontinuous case.

use std::sync::Arc;

use weakconv::function::ScalarFn;
use weakconv::integral::{atomic_oracle, default_schedule, integrate};
use weakconv::target::LpNorm;
use weakconv::{CompactSpace, FiniteMeasure, Point, TargetSpace, VectorFunction};

fn main() -> weakconv::Result<()> {
    let square = Arc::new(CompactSpace::unit_cube(2)?);
    let g = VectorFunction::new(
        &square,
        vec![
            ScalarFn::coord(0),
            ScalarFn::tent(Point::coords(vec![0.5, 0.5]), 0.75),
            ScalarFn::dist(Point::coords(vec![0.0, 1.0])),
        ],
    )?;
    let mu = FiniteMeasure::from_pairs(
        &square,
        vec![
            (Point::coords(vec![0.1, 0.2]), 0.2),
            (Point::coords(vec![0.7, 0.4]), 0.5),
            (Point::coords(vec![0.9, 0.9]), 0.3),
        ],
    )?;
    let target = TargetSpace::omega(3)?;
    let cert = integrate(&square, &g, &mu, &target, &default_schedule())?;
    print!("{}", cert.to_csv());
    println!("certified: {}", cert.certified);
    println!("value:  {:?}", cert.value.0);
    println!("atomic: {:?}", atomic_oracle(&square, &g, &mu).0);

    let line = Arc::new(CompactSpace::unit_cube(1)?);
    let step = VectorFunction::scalar(
        &line,
        ScalarFn::Step { axis: 0, threshold: 0.5, below: 0.0, above: 1.0 },
    )?;
    let on_jump = FiniteMeasure::dirac(&line, Point::at(0.5))?;
    let cert = integrate(&line, &step, &on_jump, &TargetSpace::banach(1, LpNorm::L2)?, &default_schedule())?;
    let last = cert.rows.last().expect("nonempty schedule");
    println!("step with an atom on the jump: certified = {}, final gap = {}", cert.certified, last.pointwise_gap);
    Ok(())
}
