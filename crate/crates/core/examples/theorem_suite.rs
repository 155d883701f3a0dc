//! The bundled labeled scenarios: the BL oracle, the scalar battery and a
//! vector battery per target should all reach the same verdict.

use weakconv::convergence::{theorem_equivalence_report, BatterySpec};
use weakconv::measure::scenario;
use weakconv::suite::{default_targets, scenario_suite};

fn main() -> weakconv::Result<()> {
    let targets = default_targets();
    let mut agree = 0;
    let suite = scenario_suite();
    for s in &suite {
        let family = scenario(&s.space, s.spec.clone(), 0)?;
        let r = theorem_equivalence_report(&family, &targets, &BatterySpec::default(), 64, 0.05, 0)?;
        agree += usize::from(r.agree);
        let per_target: Vec<&str> = r.targets.iter().map(|t| t.verdict.status.as_str()).collect();
        println!(
            "{:<22} oracle {:<20} scalar {:<20} targets {:?}{}",
            s.name,
            r.oracle.status.as_str(),
            r.scalar.status.as_str(),
            per_target,
            if r.augmented { " (+separator)" } else { "" }
        );
    }
    println!("{agree}/{} scenarios agree", suite.len());
    Ok(())
}
