//! Labeled measure sequences with known weak limits (or known divergence).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{FiniteMeasure, MeasureSpec, RandomElement};
use crate::carrier::{CompactSpace, Point};
use crate::error::{domain, Result};

/// Speed `c_n → 0` of a drifting point mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Rate {
    /// `1/n`
    Harmonic,
    /// `n^{-exponent}`
    Power { exponent: f64 },
    /// `ratio^n`
    Geometric { ratio: f64 },
}

impl Rate {
    pub fn at(&self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            Rate::Harmonic => 1.0 / n,
            Rate::Power { exponent } => n.powf(-exponent),
            Rate::Geometric { ratio } => ratio.powf(n),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Rate::Harmonic => Ok(()),
            Rate::Power { exponent } if *exponent > 0.0 && exponent.is_finite() => Ok(()),
            Rate::Geometric { ratio } if (0.0..1.0).contains(ratio) => Ok(()),
            other => Err(domain(format!("rate {other:?} does not tend to zero"))),
        }
    }
}

fn default_rate() -> Rate {
    Rate::Harmonic
}

/// Generator parameters. Indices `n` start at 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSpec {
    /// `δ_{start + c_n·direction}`.
    DiracDrift {
        start: Point,
        direction: Vec<f64>,
        #[serde(default = "default_rate")]
        rate: Rate,
    },
    /// `(1 − 1/n)δ_a + (1/n)δ_b`.
    MassSplit { a: Point, b: Point },
    /// `δ_a` for odd `n`, `δ_b` for even `n`.
    Alternating { a: Point, b: Point },
    /// Empirical measure of the first `n` draws from `law`.
    Empirical { law: MeasureSpec },
    /// `μ` for every `n`.
    Constant { measure: MeasureSpec },
    /// `(1 − mass)δ_base + mass·δ_{e_n}` where `e_n` cycles through `escape`.
    MassEscape {
        base: Point,
        escape: Vec<Point>,
        mass: f64,
    },
    /// `w_n δ_a + (1 − w_n) δ_b` with `w_n = (1 + amplitude·(−1)^n)/2`.
    OscillatingMixture { a: Point, b: Point, amplitude: f64 },
}

impl ScenarioSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ScenarioSpec::DiracDrift { .. } => "dirac_drift",
            ScenarioSpec::MassSplit { .. } => "mass_split",
            ScenarioSpec::Alternating { .. } => "alternating",
            ScenarioSpec::Empirical { .. } => "empirical",
            ScenarioSpec::Constant { .. } => "constant",
            ScenarioSpec::MassEscape { .. } => "mass_escape",
            ScenarioSpec::OscillatingMixture { .. } => "oscillating_mixture",
        }
    }
}

/// Ground truth attached to a family.
#[derive(Debug, Clone, PartialEq)]
pub enum Label {
    ConvergesTo(FiniteMeasure),
    Diverges,
    Unknown,
}

impl Label {
    pub fn name(&self) -> &'static str {
        match self {
            Label::ConvergesTo(_) => "converges",
            Label::Diverges => "diverges",
            Label::Unknown => "unknown",
        }
    }

    pub fn limit(&self) -> Option<&FiniteMeasure> {
        match self {
            Label::ConvergesTo(m) => Some(m),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Source {
    Spec {
        spec: ScenarioSpec,
        seed: u64,
        sampler: Option<RandomElement>,
    },
    Explicit(Vec<FiniteMeasure>),
}

/// A sequence `μ_1, μ_2, …` on one carrier, given by a generator or a list.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureFamily {
    space: Arc<CompactSpace>,
    source: Source,
    label: Label,
}

impl MeasureFamily {
    pub fn explicit(space: &Arc<CompactSpace>, measures: Vec<FiniteMeasure>, label: Label) -> Result<Self> {
        for m in &measures {
            if m.space() != space.as_ref() {
                return Err(domain("family members live on different carriers"));
            }
        }
        Ok(MeasureFamily {
            space: space.clone(),
            source: Source::Explicit(measures),
            label,
        })
    }

    pub fn space(&self) -> &Arc<CompactSpace> {
        &self.space
    }

    pub fn label(&self) -> &Label {
        &self.label
    }

    pub fn with_label(mut self, label: Label) -> Self {
        self.label = label;
        self
    }

    pub fn spec(&self) -> Option<&ScenarioSpec> {
        match &self.source {
            Source::Spec { spec, .. } => Some(spec),
            Source::Explicit(_) => None,
        }
    }

    /// Number of available members; `None` for generators.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> Option<usize> {
        match &self.source {
            Source::Spec { .. } => None,
            Source::Explicit(list) => Some(list.len()),
        }
    }

    /// `μ_n`, 1-based.
    pub fn measure(&self, n: usize) -> Result<FiniteMeasure> {
        if n == 0 {
            return Err(domain("sequence indices start at 1"));
        }
        let space = &self.space;
        let (spec, seed, sampler) = match &self.source {
            Source::Explicit(list) => {
                return list.get(n - 1).cloned().ok_or_else(|| {
                    domain(format!("index {n} beyond the {} listed measures", list.len()))
                })
            }
            Source::Spec { spec, seed, sampler } => (spec, *seed, sampler),
        };
        match spec {
            ScenarioSpec::DiracDrift {
                start, direction, rate,
            } => {
                let c = rate.at(n);
                let s = start.as_coords().unwrap_or(&[]);
                let p: Vec<f64> = s.iter().zip(direction).map(|(x, v)| x + c * v).collect();
                FiniteMeasure::dirac(space, Point::Coords(p))
            }
            ScenarioSpec::MassSplit { a, b } => {
                let w = 1.0 / n as f64;
                FiniteMeasure::from_pairs(space, vec![(a.clone(), 1.0 - w), (b.clone(), w)])
            }
            ScenarioSpec::Alternating { a, b } => {
                FiniteMeasure::dirac(space, if n % 2 == 1 { a.clone() } else { b.clone() })
            }
            ScenarioSpec::Empirical { .. } => {
                let z = sampler.as_ref().expect("empirical families carry a sampler");
                let w = 1.0 / n as f64;
                let pairs = (0..n as u64).map(|i| (z.sample(seed, i), w)).collect();
                FiniteMeasure::from_pairs(space, pairs)
            }
            ScenarioSpec::Constant { measure } => measure.build(space),
            ScenarioSpec::MassEscape { base, escape, mass } => {
                let e = &escape[(n - 1) % escape.len()];
                FiniteMeasure::from_pairs(space, vec![(base.clone(), 1.0 - mass), (e.clone(), *mass)])
            }
            ScenarioSpec::OscillatingMixture { a, b, amplitude } => {
                let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
                let w = 0.5 * (1.0 + amplitude * sign);
                FiniteMeasure::from_pairs(space, vec![(a.clone(), w), (b.clone(), 1.0 - w)])
            }
        }
    }

    /// `μ_1, …, μ_len`.
    pub fn prefix(&self, len: usize) -> Result<Vec<FiniteMeasure>> {
        (1..=len).map(|n| self.measure(n)).collect()
    }
}

fn distinct(space: &CompactSpace, a: &Point, b: &Point) -> Result<()> {
    if space.distance(a, b)? > 0.0 {
        Ok(())
    } else {
        Err(domain("the two points must differ"))
    }
}

/// Builds the labeled family described by `spec`; `seed` drives sampling.
pub fn scenario(space: &Arc<CompactSpace>, spec: ScenarioSpec, seed: u64) -> Result<MeasureFamily> {
    let dirac = |p: &Point| FiniteMeasure::dirac(space, p.clone());
    let mut sampler = None;
    let label = match &spec {
        ScenarioSpec::DiracDrift {
            start, direction, rate,
        } => {
            rate.validate()?;
            if !space.is_cube() {
                return Err(domain("dirac_drift needs a cube carrier"));
            }
            space.check(start)?;
            let s = start.as_coords().unwrap_or(&[]);
            if direction.len() != s.len() || direction.iter().any(|v| !v.is_finite()) {
                return Err(domain("drift direction must be finite and match the dimension"));
            }
            // c_n is largest at n = 1 and the cube is convex
            let c_max = rate.at(1);
            let end: Vec<f64> = s.iter().zip(direction).map(|(x, v)| x + c_max * v).collect();
            space.check(&Point::Coords(end))?;
            Label::ConvergesTo(dirac(start)?)
        }
        ScenarioSpec::MassSplit { a, b } => {
            space.check(a)?;
            space.check(b)?;
            Label::ConvergesTo(dirac(a)?)
        }
        ScenarioSpec::Alternating { a, b } => {
            distinct(space, a, b)?;
            Label::Diverges
        }
        ScenarioSpec::Empirical { law } => {
            let law = law.build(space)?.normalize()?;
            sampler = Some(RandomElement::new(law.clone())?);
            Label::ConvergesTo(law)
        }
        ScenarioSpec::Constant { measure } => Label::ConvergesTo(measure.build(space)?),
        ScenarioSpec::MassEscape { base, escape, mass } => {
            space.check(base)?;
            if escape.is_empty() {
                return Err(domain("mass_escape needs at least one escape point"));
            }
            for e in escape {
                space.check(e)?;
            }
            if !(*mass > 0.0 && *mass <= 1.0) {
                return Err(domain(format!("escaping mass must lie in (0, 1], got {mass}")));
            }
            let first = &escape[0];
            if escape.iter().all(|e| e == first) {
                Label::ConvergesTo(FiniteMeasure::from_pairs(
                    space,
                    vec![(base.clone(), 1.0 - mass), (first.clone(), *mass)],
                )?)
            } else {
                Label::Diverges
            }
        }
        ScenarioSpec::OscillatingMixture { a, b, amplitude } => {
            space.check(a)?;
            space.check(b)?;
            if !(0.0..=1.0).contains(amplitude) {
                return Err(domain(format!("amplitude must lie in [0, 1], got {amplitude}")));
            }
            if *amplitude > 0.0 && a != b {
                Label::Diverges
            } else {
                Label::ConvergesTo(FiniteMeasure::from_pairs(
                    space,
                    vec![(a.clone(), 0.5), (b.clone(), 0.5)],
                )?)
            }
        }
    };
    Ok(MeasureFamily {
        space: space.clone(),
        source: Source::Spec { spec, seed, sampler },
        label,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::bl_distance;

    fn line() -> Arc<CompactSpace> {
        Arc::new(CompactSpace::unit_cube(1).unwrap())
    }

    #[test]
    fn dirac_drift_sequence() {
        let f = scenario(
            &line(),
            ScenarioSpec::DiracDrift {
                start: Point::at(0.0),
                direction: vec![1.0],
                rate: Rate::Harmonic,
            },
            0,
        )
        .unwrap();
        for n in 1..=5 {
            let m = f.measure(n).unwrap();
            assert_eq!(m.atoms()[0].point, Point::at(1.0 / n as f64));
        }
        assert_eq!(f.label().limit().unwrap().atoms()[0].point, Point::at(0.0));
    }

    #[test]
    fn alternating_sequence() {
        let f = scenario(
            &line(),
            ScenarioSpec::Alternating {
                a: Point::at(0.0),
                b: Point::at(1.0),
            },
            0,
        )
        .unwrap();
        let pts: Vec<_> = f
            .prefix(4)
            .unwrap()
            .iter()
            .map(|m| m.atoms()[0].point.clone())
            .collect();
        assert_eq!(pts, [0.0, 1.0, 0.0, 1.0].map(Point::at));
        assert_eq!(f.label(), &Label::Diverges);
        assert!(scenario(
            &line(),
            ScenarioSpec::Alternating {
                a: Point::at(0.3),
                b: Point::at(0.3)
            },
            0
        )
        .is_err());
    }

    #[test]
    fn empirical_is_deterministic_and_approaches_law() {
        let law = MeasureSpec {
            atoms: vec![
                super::super::Atom { point: Point::at(0.0), weight: 0.5 },
                super::super::Atom { point: Point::at(1.0), weight: 0.5 },
            ],
        };
        let spec = ScenarioSpec::Empirical { law };
        let f = scenario(&line(), spec.clone(), 7).unwrap();
        let g = scenario(&line(), spec, 7).unwrap();
        assert_eq!(f.measure(100).unwrap(), g.measure(100).unwrap());
        let limit = f.label().limit().unwrap().clone();
        let d: Vec<f64> = [10, 100, 1000]
            .iter()
            .map(|&n| bl_distance(&f.measure(n).unwrap(), &limit).unwrap().value)
            .collect();
        assert!(d[2] <= d[0], "{d:?}");
    }

    #[test]
    fn rejects_bad_parameters() {
        let s = line();
        let drift_out = ScenarioSpec::DiracDrift {
            start: Point::at(0.5),
            direction: vec![1.0],
            rate: Rate::Harmonic,
        };
        assert!(scenario(&s, drift_out, 0).is_err());
        let bad_rate = ScenarioSpec::DiracDrift {
            start: Point::at(0.0),
            direction: vec![0.1],
            rate: Rate::Geometric { ratio: 1.5 },
        };
        assert!(scenario(&s, bad_rate, 0).is_err());
        let bad_mass = ScenarioSpec::MassEscape {
            base: Point::at(0.0),
            escape: vec![Point::at(1.0)],
            mass: 1.5,
        };
        assert!(scenario(&s, bad_mass, 0).is_err());
    }

    #[test]
    fn spec_json_shape() {
        let json = r#"{"scenario":"dirac_drift","start":[0.0],"direction":[1.0],"rate":{"kind":"power","exponent":2.0}}"#;
        let spec: ScenarioSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.kind(), "dirac_drift");
        let back = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<ScenarioSpec>(&back).unwrap(), spec);
    }
}
