//! Countably-normed targets: seminorm levels, the induced paranorm, axiom
//! checks, and agreement of the two convergence notions on sequences.

use weakconv::suite::labeled_vector_sequences;
use weakconv::target::{lemma2_equivalence_report, paranorm_axioms_report, SampleSpec};
use weakconv::{TargetSpace, Vector};

fn main() -> weakconv::Result<()> {
    let omega = TargetSpace::omega(4)?;
    let e1 = Vector::unit(4, 0);
    println!("{}: seminorms of e_1 = {:?}", omega.label(), omega.seminorms(&e1));
    println!("paranorm of e_1 = {}", omega.paranorm(&e1));

    for target in [omega.clone(), TargetSpace::cumulative_l1(5)?] {
        let report = paranorm_axioms_report(&target, SampleSpec::new(1000, 7));
        println!(
            "{}: {} samples, {} violations, ‖2^-40 x‖ = {:.3e}",
            target.label(),
            report.samples,
            report.violation_count,
            report.scalar_tail.last().copied().unwrap_or(0.0)
        );
    }

    let mut agree = 0;
    let seqs = labeled_vector_sequences(4, 12, 48, 3);
    for s in &seqs {
        let v = lemma2_equivalence_report(&omega, &s.terms, &s.limit, s.hint);
        agree += usize::from(v.agree && v.paranorm_convergent == s.converges);
    }
    println!("paranorm and seminorm verdicts agree with the labels on {agree}/{} sequences", seqs.len());
    Ok(())
}
