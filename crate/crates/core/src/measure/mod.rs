//! Atomic finite measures on the carrier.

mod bl;
mod scenario;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::carrier::{CompactSpace, MeasurableSet, Point};
use crate::error::{domain, Result};

pub use bl::{bl_distance, BlDiagnostics, BlResult, MAX_BL_SUPPORT};
pub use scenario::{scenario, Label, MeasureFamily, Rate, ScenarioSpec};

/// Tolerance on total mass for a measure to count as a probability measure.
pub const PROBABILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub point: Point,
    pub weight: f64,
}

/// Wire form: `{"atoms": [{"point": [..], "weight": w}, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub atoms: Vec<Atom>,
}

impl MeasureSpec {
    pub fn build(&self, space: &Arc<CompactSpace>) -> Result<FiniteMeasure> {
        FiniteMeasure::new(space.clone(), self.atoms.clone())
    }
}

/// `μ = Σ w_i δ_{s_i}` with finitely many atoms of positive weight.
///
/// Construction merges coincident atoms (keeping first-seen order) and
/// drops zero weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMeasure {
    space: Arc<CompactSpace>,
    atoms: Vec<Atom>,
}

impl FiniteMeasure {
    pub fn new(space: Arc<CompactSpace>, atoms: Vec<Atom>) -> Result<Self> {
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for atom in atoms {
            space.check(&atom.point)?;
            if !atom.weight.is_finite() || atom.weight < 0.0 {
                return Err(domain(format!(
                    "atom weight must be finite and ≥ 0, got {}",
                    atom.weight
                )));
            }
            if atom.weight == 0.0 {
                continue;
            }
            match merged.iter_mut().find(|a| a.point == atom.point) {
                Some(a) => a.weight += atom.weight,
                None => merged.push(atom),
            }
        }
        Ok(FiniteMeasure {
            space,
            atoms: merged,
        })
    }

    /// Builds from `(point, weight)` pairs.
    pub fn from_pairs(space: &Arc<CompactSpace>, pairs: Vec<(Point, f64)>) -> Result<Self> {
        Self::new(
            space.clone(),
            pairs
                .into_iter()
                .map(|(point, weight)| Atom { point, weight })
                .collect(),
        )
    }

    pub fn dirac(space: &Arc<CompactSpace>, point: Point) -> Result<Self> {
        Self::from_pairs(space, vec![(point, 1.0)])
    }

    pub fn zero(space: &Arc<CompactSpace>) -> Self {
        FiniteMeasure {
            space: space.clone(),
            atoms: Vec::new(),
        }
    }

    pub fn space(&self) -> &CompactSpace {
        &self.space
    }

    pub fn space_arc(&self) -> &Arc<CompactSpace> {
        &self.space
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn to_spec(&self) -> MeasureSpec {
        MeasureSpec {
            atoms: self.atoms.clone(),
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().fold(0.0, |acc, a| acc + a.weight)
    }

    pub fn is_probability(&self) -> bool {
        (self.total_mass() - 1.0).abs() <= PROBABILITY_TOL
    }

    pub(crate) fn same_carrier(&self, other: &FiniteMeasure) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) || self.space == other.space {
            Ok(())
        } else {
            Err(domain("measures live on different carriers"))
        }
    }

    /// Weight of the atom at `p`, zero if there is none.
    pub fn weight_at(&self, p: &Point) -> f64 {
        self.atoms
            .iter()
            .find(|a| a.point == *p)
            .map_or(0.0, |a| a.weight)
    }

    /// `μ(A)`: the total weight of atoms lying in `A`.
    pub fn measure_of(&self, set: &MeasurableSet) -> f64 {
        match set {
            MeasurableSet::Empty => 0.0,
            MeasurableSet::All => self.total_mass(),
            _ => self
                .atoms
                .iter()
                .filter(|a| set.contains(&self.space, &a.point))
                .fold(0.0, |acc, a| acc + a.weight),
        }
    }

    /// Rescales to total mass one.
    pub fn normalize(&self) -> Result<FiniteMeasure> {
        let total = self.total_mass();
        if !(total > 0.0) {
            return Err(domain("cannot normalize a measure of zero total mass"));
        }
        if total == 1.0 {
            return Ok(self.clone());
        }
        Ok(self.scaled(1.0 / total))
    }

    pub fn scaled(&self, c: f64) -> FiniteMeasure {
        FiniteMeasure {
            space: self.space.clone(),
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    point: a.point.clone(),
                    weight: a.weight * c,
                })
                .filter(|a| a.weight > 0.0)
                .collect(),
        }
    }

    /// `μ + ν` on a shared carrier.
    pub fn plus(&self, other: &FiniteMeasure) -> Result<FiniteMeasure> {
        self.same_carrier(other)?;
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        FiniteMeasure::new(self.space.clone(), atoms)
    }

    /// Image measure under a point map `T`; coincident images merge.
    pub fn pushforward(&self, map: impl Fn(&Point) -> Point) -> Result<FiniteMeasure> {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                point: map(&a.point),
                weight: a.weight,
            })
            .collect();
        FiniteMeasure::new(self.space.clone(), atoms)
    }
}

/// A closed ball carrying all but `ε` of every measure in a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TightnessWitness {
    pub set: MeasurableSet,
    pub center: Option<Point>,
    pub radius: f64,
    /// `μ(Ω ∖ A)` for each member of the family.
    pub complement_masses: Vec<f64>,
}

fn pick_center(space: &CompactSpace, family: &[FiniteMeasure]) -> Option<Point> {
    let atoms: Vec<&Atom> = family.iter().flat_map(|m| m.atoms.iter()).collect();
    if atoms.is_empty() {
        return None;
    }
    let score: Box<dyn Fn(&Point) -> f64> = match space {
        CompactSpace::UnitCube { dim } => {
            let total: f64 = atoms.iter().map(|a| a.weight).sum();
            let mut bary = vec![0.0; *dim];
            for a in &atoms {
                for (b, x) in bary.iter_mut().zip(a.point.as_coords().unwrap_or(&[])) {
                    *b += a.weight * x / total;
                }
            }
            let bary = Point::Coords(bary);
            Box::new(move |p| space.distance_unchecked(p, &bary))
        }
        // no barycenter on a finite space: use the weighted medoid
        CompactSpace::Finite { .. } => Box::new(|p| {
            atoms
                .iter()
                .map(|a| a.weight * space.distance_unchecked(p, &a.point))
                .sum()
        }),
    };
    let mut best: Option<(f64, &Point)> = None;
    for a in &atoms {
        let s = score(&a.point);
        if best.is_none_or(|(b, _)| s < b) {
            best = Some((s, &a.point));
        }
    }
    best.map(|(_, p)| p.clone())
}

/// Finds a closed ball `A` with `μ(Ω ∖ A) ≤ ε` for every `μ` in the family.
///
/// The ball is centred at the atom nearest the weighted barycenter (the
/// weighted medoid on finite carriers); its radius is the smallest atom
/// distance from the centre that works. This is a witness, not a minimizer.
pub fn tightness_witness(family: &[FiniteMeasure], eps: f64) -> Result<TightnessWitness> {
    if !(eps >= 0.0) {
        return Err(domain(format!("ε must be ≥ 0, got {eps}")));
    }
    let Some(first) = family.first() else {
        return Ok(TightnessWitness {
            set: MeasurableSet::Empty,
            center: None,
            radius: 0.0,
            complement_masses: Vec::new(),
        });
    };
    for m in family {
        first.same_carrier(m)?;
    }
    let space = first.space();
    let Some(center) = pick_center(space, family) else {
        return Ok(TightnessWitness {
            set: MeasurableSet::Empty,
            center: None,
            radius: 0.0,
            complement_masses: vec![0.0; family.len()],
        });
    };

    let mut radii: Vec<f64> = family
        .iter()
        .flat_map(|m| m.atoms.iter())
        .map(|a| space.distance_unchecked(&center, &a.point))
        .collect();
    radii.push(0.0);
    radii.sort_by(f64::total_cmp);
    radii.dedup();

    let complements = |r: f64| -> Vec<f64> {
        family
            .iter()
            .map(|m| {
                m.atoms
                    .iter()
                    .filter(|a| space.distance_unchecked(&center, &a.point) > r)
                    .fold(0.0, |acc, a| acc + a.weight)
            })
            .collect()
    };
    for &r in &radii {
        let masses = complements(r);
        if masses.iter().all(|&c| c <= eps + 1e-12) {
            return Ok(TightnessWitness {
                set: MeasurableSet::Ball {
                    center: center.clone(),
                    radius: r,
                },
                center: Some(center),
                radius: r,
                complement_masses: masses,
            });
        }
    }
    unreachable!("the largest candidate radius covers every atom")
}

/// A random element of the carrier with a finitely supported law, sampled
/// by inverse CDF from a counter-based generator.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomElement {
    law: FiniteMeasure,
    cumulative: Vec<f64>,
}

impl RandomElement {
    pub fn new(law: FiniteMeasure) -> Result<Self> {
        if !law.is_probability() {
            return Err(domain(format!(
                "law of a random element must have mass 1, got {}",
                law.total_mass()
            )));
        }
        let mut acc = 0.0;
        let cumulative = law
            .atoms
            .iter()
            .map(|a| {
                acc += a.weight;
                acc
            })
            .collect();
        Ok(RandomElement { law, cumulative })
    }

    pub fn law(&self) -> &FiniteMeasure {
        &self.law
    }

    /// The `index`-th draw of stream `seed`; independent of draw order.
    pub fn sample(&self, seed: u64, index: u64) -> Point {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let total = *self.cumulative.last().unwrap_or(&1.0);
        let u = rng.random::<f64>() * total;
        let k = self.cumulative.partition_point(|&c| c <= u);
        self.law.atoms[k.min(self.law.atoms.len() - 1)].point.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> Arc<CompactSpace> {
        Arc::new(CompactSpace::unit_cube(1).unwrap())
    }

    fn two_atoms() -> FiniteMeasure {
        FiniteMeasure::from_pairs(&line(), vec![(Point::at(0.2), 0.3), (Point::at(0.8), 0.7)]).unwrap()
    }

    #[test]
    fn measure_of_sets() {
        let mu = two_atoms();
        let left = crate::carrier::grid_partition(&line(), 0.5).unwrap().cell(0);
        assert!((mu.measure_of(&left) - 0.3).abs() < 1e-15);
        assert_eq!(mu.measure_of(&MeasurableSet::Empty), 0.0);
        assert_eq!(mu.measure_of(&MeasurableSet::All), mu.total_mass());
    }

    #[test]
    fn construction_merges_and_validates() {
        let s = line();
        let m = FiniteMeasure::from_pairs(
            &s,
            vec![(Point::at(0.5), 0.25), (Point::at(0.1), 0.0), (Point::at(0.5), 0.5)],
        )
        .unwrap();
        assert_eq!(m.atoms().len(), 1);
        assert_eq!(m.atoms()[0].weight, 0.75);
        assert!(FiniteMeasure::from_pairs(&s, vec![(Point::at(0.5), -1.0)]).is_err());
        assert!(FiniteMeasure::from_pairs(&s, vec![(Point::at(1.5), 1.0)]).is_err());
        assert!(FiniteMeasure::from_pairs(&s, vec![(Point::at(0.5), f64::NAN)]).is_err());
    }

    #[test]
    fn normalize_examples() {
        let s = line();
        let m = FiniteMeasure::from_pairs(&s, vec![(Point::at(0.0), 1.0), (Point::at(1.0), 3.0)]).unwrap();
        let n = m.normalize().unwrap();
        assert_eq!(n.atoms()[0].weight, 0.25);
        assert_eq!(n.atoms()[1].weight, 0.75);
        assert_eq!(n.normalize().unwrap(), n);
        let z = FiniteMeasure::from_pairs(&s, vec![(Point::at(0.0), 0.0), (Point::at(1.0), 0.0)]).unwrap();
        assert!(z.normalize().is_err());
    }

    #[test]
    fn pushforward_examples() {
        let s = line();
        let mu = FiniteMeasure::from_pairs(&s, vec![(Point::at(0.2), 0.5), (Point::at(0.8), 0.5)]).unwrap();
        assert_eq!(mu.pushforward(|p| p.clone()).unwrap(), mu);
        let collapsed = mu.pushforward(|_| Point::at(0.0)).unwrap();
        assert_eq!(collapsed.atoms().len(), 1);
        assert_eq!(collapsed.total_mass(), 1.0);
        let flipped = mu
            .pushforward(|p| Point::at(1.0 - p.as_coords().unwrap()[0]))
            .unwrap();
        assert!((flipped.weight_at(&Point::at(0.8)) - 0.5).abs() < 1e-15);
        assert!(mu.pushforward(|_| Point::at(2.0)).is_err());
    }

    #[test]
    fn tightness_examples() {
        let s = line();
        let family: Vec<_> = (1..=10)
            .map(|n| {
                FiniteMeasure::from_pairs(
                    &s,
                    vec![(Point::at(0.5), 0.95), (Point::at(n as f64 / 11.0), 0.05)],
                )
                .unwrap()
            })
            .collect();
        let w = tightness_witness(&family, 0.05).unwrap();
        assert_eq!(w.center, Some(Point::at(0.5)));
        assert_eq!(w.radius, 0.0);
        assert!(w.complement_masses.iter().all(|&c| c <= 0.05 + 1e-12));

        let single = [FiniteMeasure::dirac(&s, Point::at(0.3)).unwrap()];
        let w = tightness_witness(&single, 0.1).unwrap();
        assert_eq!((w.center, w.radius), (Some(Point::at(0.3)), 0.0));

        let ends = [
            FiniteMeasure::dirac(&s, Point::at(0.0)).unwrap(),
            FiniteMeasure::dirac(&s, Point::at(1.0)).unwrap(),
        ];
        let w = tightness_witness(&ends, 0.5).unwrap();
        assert_eq!(w.radius, 1.0);
        for m in &ends {
            assert_eq!(m.measure_of(&w.set), 1.0);
        }
    }

    #[test]
    fn sampler_is_deterministic_and_unbiased() {
        let s = line();
        let law = FiniteMeasure::from_pairs(&s, vec![(Point::at(0.0), 0.25), (Point::at(1.0), 0.75)]).unwrap();
        let z = RandomElement::new(law).unwrap();
        assert_eq!(z.sample(3, 17), z.sample(3, 17));
        let ones = (0..20_000)
            .filter(|&i| z.sample(11, i) == Point::at(1.0))
            .count();
        let freq = ones as f64 / 20_000.0;
        assert!((freq - 0.75).abs() < 0.02, "{freq}");
        let half = FiniteMeasure::dirac(&s, Point::at(0.0)).unwrap().scaled(0.5);
        assert!(RandomElement::new(half).is_err());
    }
}
