use serde::{Deserialize, Serialize};

use super::{
    bl_witness_function, certify, generate_battery, oracle_verdict, Battery, BatterySpec, OracleVerdict, Status,
    Verdict,
};
use crate::error::Result;
use crate::function::{ScalarFn, VectorFunction};
use crate::measure::{Label, MeasureFamily};
use crate::target::{TargetSpace, Vector};

/// Largest scale tried when lifting the oracle witness into a target.
const MAX_LIFT_SCALE: f64 = (1u64 << 40) as f64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetVerdict {
    pub target: String,
    pub verdict: Verdict,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub scenario: String,
    pub label: String,
    pub oracle: OracleVerdict,
    pub scalar: Verdict,
    pub scalar_agrees: bool,
    pub targets: Vec<TargetVerdict>,
    pub agree: bool,
    /// Whether the battery was augmented with the oracle's separating function.
    pub augmented: bool,
}

/// Runs the oracle, a scalar battery, and one vector battery per target on
/// the first `n` members of `family`, and compares their statuses.
///
/// When the oracle finds divergence, each battery also receives the
/// oracle's separating function for the farthest last-quarter pair (lifted
/// onto every base vector for vector batteries, scaled until its gap clears
/// the divergence threshold).
pub fn theorem_equivalence_report(
    family: &MeasureFamily,
    targets: &[TargetSpace],
    spec: &BatterySpec,
    n: usize,
    tol: f64,
    seed: u64,
) -> Result<EquivalenceReport> {
    let space = family.space();
    let prefix = family.prefix(n)?;
    let limit = match family.label() {
        Label::ConvergesTo(m) => m.clone(),
        _ => prefix[n - 1].clone(),
    };
    let oracle = oracle_verdict(&prefix, &limit, tol)?;

    let separator = if oracle.status == Status::Divergent {
        let (n1, n2) = oracle.worst_pair;
        let a = prefix[n1 - 1].normalize()?;
        let b = prefix[n2 - 1].normalize()?;
        Some(bl_witness_function(&a, &b)?)
    } else {
        None
    };

    let scalar_spec = BatterySpec {
        vector: false,
        scalar: true,
        ..spec.clone()
    };
    let mut scalar_battery = generate_battery(space, None, &scalar_spec, seed)?;
    if let Some((f, _)) = &separator {
        scalar_battery.push_scalar(space, "oracle_separator", f.clone())?;
    }
    let scalar = certify(family, &limit, &scalar_battery, n, tol)?;

    let vector_spec = BatterySpec {
        vector: true,
        scalar: false,
        ..spec.clone()
    };
    let mut per_target = Vec::with_capacity(targets.len());
    for target in targets {
        let mut battery = generate_battery(space, Some(target), &vector_spec, seed)?;
        if let Some((f, delta)) = &separator {
            push_lifted_separator(&mut battery, space, target, f, *delta, tol)?;
        }
        let verdict = certify(family, &limit, &battery, n, tol)?;
        per_target.push(TargetVerdict {
            target: target.label(),
            agrees: verdict.status == oracle.status,
            verdict,
        });
    }

    let scalar_agrees = scalar.status == oracle.status;
    Ok(EquivalenceReport {
        scenario: family.spec().map_or("explicit", |s| s.kind()).to_string(),
        label: family.label().name().to_string(),
        agree: scalar_agrees && per_target.iter().all(|t| t.agrees),
        scalar_agrees,
        augmented: separator.is_some(),
        oracle,
        scalar,
        targets: per_target,
    })
}

/// Adds `s·f·Σ_k x_k`, doubling `s` from 1 until the gap of the lifted
/// difference reaches `min(Δ, (1 + 10·tol)/2)`; the paranorm stays below 1.
fn push_lifted_separator(
    battery: &mut Battery,
    space: &crate::carrier::CompactSpace,
    target: &TargetSpace,
    f: &ScalarFn,
    delta: f64,
    tol: f64,
) -> Result<()> {
    let Some(base) = target.base() else {
        return Ok(());
    };
    let direction = base
        .vectors()
        .iter()
        .fold(Vector::zeros(target.dim()), |acc, x| &acc + x);
    let goal = delta.min(0.5 * (1.0 + super::DIVERGENCE_FACTOR * tol));
    let mut scale = 1.0;
    while target.gap(&direction.scaled(scale * delta)) < goal && scale < MAX_LIFT_SCALE {
        scale *= 2.0;
    }
    let coeff = if scale == 1.0 { f.clone() } else { f.clone().scale(scale) };
    let coeffs = vec![coeff; base.dim()];
    battery.push_vector(
        "oracle_separator",
        VectorFunction::lift(space, &coeffs, base.vectors())?,
    )
}
