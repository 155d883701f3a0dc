//! Certification of weak convergence along finite prefixes of measure
//! sequences, judged against the bounded-Lipschitz oracle.

mod battery;
mod equivalence;

use serde::{Deserialize, Serialize};

use crate::carrier::CompactSpace;
use crate::error::{domain, Result};
use crate::function::{ScalarFn, VectorFunction, VectorFunctionSpec};
use crate::integral::{atomic_oracle, fmt_num};
use crate::last_quarter;
use crate::measure::{bl_distance, FiniteMeasure, Label, MeasureFamily, RandomElement};
use crate::target::{TargetSpace, Vector};

pub use battery::{generate_battery, Battery, BatterySpec, Member, MemberKind, TentSpec};
pub use equivalence::{theorem_equivalence_report, EquivalenceReport};

pub const DEFAULT_N: usize = 64;
pub const DEFAULT_TOL: f64 = 0.05;
/// Shortest prefix [`certify`] accepts.
pub const MIN_PREFIX: usize = 8;
/// Divergence needs a Cauchy gap above this multiple of the tolerance.
pub const DIVERGENCE_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    ConvergentEvidence,
    Divergent,
    Inconclusive,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::ConvergentEvidence => 0,
            Status::Divergent => 1,
            Status::Inconclusive => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::ConvergentEvidence => "convergent-evidence",
            Status::Divergent => "divergent",
            Status::Inconclusive => "inconclusive",
        }
    }
}

/// A battery member whose integrals at `n1` and `n2` differ by `gap`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub member_id: String,
    pub kind: MemberKind,
    pub n1: usize,
    pub n2: usize,
    pub gap: f64,
    pub function: VectorFunctionSpec,
    /// Whether the gap refers to the normalized sequence.
    pub normalized: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemberTrace {
    pub id: String,
    pub kind: MemberKind,
    /// Gap to the limit for `n = 1..=N`.
    pub gaps: Vec<f64>,
    /// Largest gap over the last quarter.
    pub tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassCheck {
    pub masses: Vec<f64>,
    pub limit_mass: f64,
    pub tail: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub status: Status,
    pub witness: Option<Witness>,
    pub n: usize,
    pub tol: f64,
    pub members: Vec<MemberTrace>,
    /// `BL(μ_n, μ)` for `n = 1..=N`.
    pub bl: Vec<f64>,
    pub bl_tail: f64,
    /// Present when the inputs were not all probability measures.
    pub mass: Option<MassCheck>,
}

impl Verdict {
    /// One row per member per index: `scenario, member_id, n, gap, bl_value`.
    pub fn to_csv(&self, scenario: &str) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["scenario", "member_id", "n", "gap", "bl_value"])
            .expect("in-memory write");
        for m in &self.members {
            for (i, gap) in m.gaps.iter().enumerate() {
                let bl = self.bl.get(i).copied().unwrap_or(f64::NAN);
                w.write_record([
                    scenario.to_string(),
                    m.id.clone(),
                    (i + 1).to_string(),
                    fmt_num(*gap),
                    fmt_num(bl),
                ])
                .expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }
}

/// `‖∫g dμ_n − ∫g dμ‖` in the gap functional of `target`.
pub fn integral_gap(
    space: &CompactSpace,
    g: &VectorFunction,
    mu_n: &FiniteMeasure,
    mu: &FiniteMeasure,
    target: &TargetSpace,
) -> f64 {
    target.gap(&(&atomic_oracle(space, g, mu_n) - &atomic_oracle(space, g, mu)))
}

fn tail_max(values: &[f64]) -> f64 {
    values[last_quarter(values.len())]
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// Largest `‖I(n1) − I(n2)‖` over last-quarter pairs `n1 < n2`, 1-based.
fn cauchy_spread(values: &[Vector], target: &TargetSpace) -> (f64, usize, usize) {
    let q = last_quarter(values.len());
    let mut best = (0.0, q.start + 1, q.start + 1);
    for i in q.clone() {
        for j in i + 1..q.end {
            let gap = target.gap(&(&values[i] - &values[j]));
            if gap > best.0 {
                best = (gap, i + 1, j + 1);
            }
        }
    }
    best
}

fn normalized_all(prefix: &[FiniteMeasure]) -> Result<Vec<FiniteMeasure>> {
    prefix.iter().map(FiniteMeasure::normalize).collect()
}

/// Tail test of weak convergence on `μ_1..μ_N` against `limit`.
///
/// Divergent when some member's integrals at two last-quarter indices
/// differ by more than `10·tol`. Convergent evidence when every member's
/// gap to the limit and the oracle distance stay within `tol` over the last
/// quarter. Sequences of general finite measures must first converge in
/// total mass; they are then normalized.
pub fn certify(
    seq: &MeasureFamily,
    limit: &FiniteMeasure,
    battery: &Battery,
    n: usize,
    tol: f64,
) -> Result<Verdict> {
    if n < MIN_PREFIX {
        return Err(domain(format!("prefix length {n} below the minimum {MIN_PREFIX}")));
    }
    if !(tol > 0.0) {
        return Err(domain(format!("tolerance must be positive, got {tol}")));
    }
    let raw = seq.prefix(n)?;
    certify_prefix(seq.space(), &raw, limit, battery, tol)
}

pub(crate) fn certify_prefix(
    space: &CompactSpace,
    raw: &[FiniteMeasure],
    limit: &FiniteMeasure,
    battery: &Battery,
    tol: f64,
) -> Result<Verdict> {
    let n = raw.len();
    let all_probability = limit.is_probability() && raw.iter().all(FiniteMeasure::is_probability);
    let mut mass = None;
    let (prefix, limit) = if all_probability {
        (raw.to_vec(), limit.clone())
    } else {
        let masses: Vec<f64> = raw.iter().map(FiniteMeasure::total_mass).collect();
        let limit_mass = limit.total_mass();
        let gaps: Vec<f64> = masses.iter().map(|m| (m - limit_mass).abs()).collect();
        let tail = tail_max(&gaps);
        let mass_values: Vec<Vector> = masses.iter().map(|m| Vector(vec![*m])).collect();
        let (spread, n1, n2) = cauchy_spread(&mass_values, battery.gap_space(MemberKind::Scalar));
        let check = MassCheck {
            masses,
            limit_mass,
            tail,
        };
        if spread > DIVERGENCE_FACTOR * tol || tail > tol {
            let witness = (spread > DIVERGENCE_FACTOR * tol).then(|| Witness {
                member_id: "total_mass".into(),
                kind: MemberKind::Scalar,
                n1,
                n2,
                gap: spread,
                function: VectorFunctionSpec {
                    components: vec![ScalarFn::constant(1.0)],
                    metadata: None,
                },
                normalized: false,
            });
            return Ok(Verdict {
                status: if witness.is_some() {
                    Status::Divergent
                } else {
                    Status::Inconclusive
                },
                witness,
                n,
                tol,
                members: Vec::new(),
                bl: Vec::new(),
                bl_tail: f64::NAN,
                mass: Some(check),
            });
        }
        mass = Some(check);
        (normalized_all(raw)?, limit.normalize()?)
    };

    let bl: Vec<f64> = prefix
        .iter()
        .map(|m| bl_distance(m, &limit).map(|r| r.value))
        .collect::<Result<_>>()?;
    let bl_tail = tail_max(&bl);

    let mut members = Vec::with_capacity(battery.len());
    let mut best: Option<Witness> = None;
    for member in battery.members() {
        let target = battery.gap_space(member.kind);
        let at_limit = atomic_oracle(space, &member.g, &limit);
        let values: Vec<Vector> = prefix
            .iter()
            .map(|m| atomic_oracle(space, &member.g, m))
            .collect();
        let gaps: Vec<f64> = values.iter().map(|v| target.gap(&(v - &at_limit))).collect();
        let (spread, n1, n2) = cauchy_spread(&values, target);
        if best.as_ref().is_none_or(|w| spread > w.gap) {
            best = Some(Witness {
                member_id: member.id.clone(),
                kind: member.kind,
                n1,
                n2,
                gap: spread,
                function: member.g.to_spec(),
                normalized: mass.is_some(),
            });
        }
        members.push(MemberTrace {
            id: member.id.clone(),
            kind: member.kind,
            tail: tail_max(&gaps),
            gaps,
        });
    }

    let witness = best.filter(|w| w.gap > DIVERGENCE_FACTOR * tol);
    let status = if witness.is_some() {
        Status::Divergent
    } else if bl_tail <= tol && members.iter().all(|m| m.tail <= tol) {
        Status::ConvergentEvidence
    } else {
        Status::Inconclusive
    };
    Ok(Verdict {
        status,
        witness,
        n,
        tol,
        members,
        bl,
        bl_tail,
        mass,
    })
}

impl Witness {
    /// Recomputes the gap from the stored function.
    pub fn recompute(&self, seq: &MeasureFamily, battery: &Battery) -> Result<f64> {
        let space = seq.space();
        let g = self.function.build(space)?;
        let mut a = seq.measure(self.n1)?;
        let mut b = seq.measure(self.n2)?;
        if self.normalized {
            a = a.normalize()?;
            b = b.normalize()?;
        }
        Ok(integral_gap(space, &g, &a, &b, battery.gap_space(self.kind)))
    }
}

/// Clamped McShane extension of the oracle's optimal test function for
/// `(μ, ν)`: `|f| ≤ 1`, `Lip(f) ≤ 1`, and `∫f dμ − ∫f dν = BL(μ, ν)`.
pub fn bl_witness_function(mu: &FiniteMeasure, nu: &FiniteMeasure) -> Result<(ScalarFn, f64)> {
    let r = bl_distance(mu, nu)?;
    if r.witness.iter().all(|(_, v)| *v == 0.0) {
        return Ok((ScalarFn::constant(0.0), r.value));
    }
    Ok((ScalarFn::mcshane(r.witness, 1.0).clamp(-1.0, 1.0), r.value))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub status: Status,
    pub bl: Vec<f64>,
    pub bl_tail: f64,
    /// Largest `BL(μ_{n1}, μ_{n2})` over last-quarter pairs.
    pub spread: f64,
    pub worst_pair: (usize, usize),
}

/// Ground truth from the oracle alone: convergent when the distance to
/// `limit` stays within `tol` over the last quarter, divergent when two
/// last-quarter members are farther apart than `10·tol`.
pub fn oracle_verdict(prefix: &[FiniteMeasure], limit: &FiniteMeasure, tol: f64) -> Result<OracleVerdict> {
    let prefix = normalized_all(prefix)?;
    let limit = limit.normalize()?;
    let bl: Vec<f64> = prefix
        .iter()
        .map(|m| bl_distance(m, &limit).map(|r| r.value))
        .collect::<Result<_>>()?;
    let bl_tail = tail_max(&bl);
    let q = last_quarter(prefix.len());
    let mut spread = 0.0;
    let mut worst_pair = (q.start + 1, q.start + 1);
    for i in q.clone() {
        for j in i + 1..q.end {
            let d = bl_distance(&prefix[i], &prefix[j])?.value;
            if d > spread {
                spread = d;
                worst_pair = (i + 1, j + 1);
            }
        }
    }
    let status = if bl_tail <= tol {
        Status::ConvergentEvidence
    } else if spread > DIVERGENCE_FACTOR * tol {
        Status::Divergent
    } else {
        Status::Inconclusive
    };
    Ok(OracleVerdict {
        status,
        bl,
        bl_tail,
        spread,
        worst_pair,
    })
}

/// `E g(ζ) = ∫ g dμ_ζ`.
pub fn expectation(space: &CompactSpace, zeta: &RandomElement, g: &VectorFunction) -> Vector {
    atomic_oracle(space, g, zeta.law())
}

/// Sample mean and per-coordinate sample standard deviation of `g(ζ)`
/// over draws `0..samples` of stream `seed`.
pub fn monte_carlo(
    space: &CompactSpace,
    zeta: &RandomElement,
    g: &VectorFunction,
    samples: u64,
    seed: u64,
) -> (Vector, Vector) {
    let d = g.dim();
    let mut sum = vec![0.0; d];
    let mut sq = vec![0.0; d];
    for i in 0..samples {
        let v = g.eval(space, &zeta.sample(seed, i));
        for k in 0..d {
            sum[k] += v.0[k];
            sq[k] += v.0[k] * v.0[k];
        }
    }
    let n = samples as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / n).collect();
    let std = sq
        .iter()
        .zip(&mean)
        .map(|(q, m)| ((q / n - m * m).max(0.0) * n / (n - 1.0).max(1.0)).sqrt())
        .collect();
    (Vector(mean), Vector(std))
}

/// [`certify`] applied to the laws of `ζ_1..ζ_N` against the law of `ζ`.
pub fn distribution_convergence_report(
    zetas: &[RandomElement],
    zeta: &RandomElement,
    battery: &Battery,
    tol: f64,
) -> Result<Verdict> {
    let law = zeta.law();
    let laws: Vec<FiniteMeasure> = zetas.iter().map(|z| z.law().clone()).collect();
    let family = MeasureFamily::explicit(law.space_arc(), laws, Label::ConvergesTo(law.clone()))?;
    certify(&family, law, battery, zetas.len(), tol)
}
