//! Random elements with atomic laws: seeded sampling, expectations of
//! continuous functions, and convergence in distribution.

use std::sync::Arc;

use weakconv::convergence::{
    distribution_convergence_report, expectation, generate_battery, monte_carlo, BatterySpec,
};
use weakconv::function::ScalarFn;
use weakconv::measure::RandomElement;
use weakconv::{CompactSpace, FiniteMeasure, Point, VectorFunction};

fn main() -> weakconv::Result<()> {
    let line = Arc::new(CompactSpace::unit_cube(1)?);
    let law = FiniteMeasure::from_pairs(&line, vec![(Point::at(0.2), 0.25), (Point::at(0.8), 0.75)])?;
    let zeta = RandomElement::new(law)?;
    let draws: Vec<String> = (0..8).map(|i| zeta.sample(42, i).to_string()).collect();
    println!("first draws: {}", draws.join(" "));

    let g = VectorFunction::new(&line, vec![ScalarFn::coord(0), ScalarFn::tent(Point::at(0.5), 0.5)])?;
    let exact = expectation(&line, &zeta, &g);
    let (mean, std) = monte_carlo(&line, &zeta, &g, 20_000, 42);
    println!("E g(ζ) = {:?}, Monte Carlo {:?} ± {:?}", exact.0, mean.0, std.0);

    // ζ_n puts mass 1/n on 0.5 and the rest on the law of ζ.
    let zetas = (1..=48)
        .map(|n| {
            let w = 1.0 / n as f64;
            let law = FiniteMeasure::from_pairs(
                &line,
                vec![(Point::at(0.5), w), (Point::at(0.2), 0.25 * (1.0 - w)), (Point::at(0.8), 0.75 * (1.0 - w))],
            )?;
            RandomElement::new(law)
        })
        .collect::<weakconv::Result<Vec<_>>>()?;
    let battery = generate_battery(&line, None, &BatterySpec { vector: false, ..BatterySpec::default() }, 0)?;
    let v = distribution_convergence_report(&zetas, &zeta, &battery, 0.05)?;
    println!("ζ_n → ζ in distribution: {} (BL tail {:.4})", v.status.as_str(), v.bl_tail);
    Ok(())
}
