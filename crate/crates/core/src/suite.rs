//! Bundled labeled scenarios, targets, measures and vector sequences.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::carrier::{CompactSpace, Point};
use crate::function::{ScalarFn, VectorFunction};
use crate::measure::{Atom, FiniteMeasure, MeasureSpec, Rate, ScenarioSpec};
use crate::target::{LpNorm, TailHint, TargetSpace, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expected {
    Converges,
    Diverges,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteScenario {
    pub name: &'static str,
    pub space: Arc<CompactSpace>,
    pub spec: ScenarioSpec,
    pub expected: Expected,
}

fn cube(dim: usize) -> Arc<CompactSpace> {
    Arc::new(CompactSpace::unit_cube(dim).expect("positive dimension"))
}

fn p1(x: f64) -> Point {
    Point::at(x)
}

fn p2(x: f64, y: f64) -> Point {
    Point::coords(vec![x, y])
}

fn law(pairs: &[(Point, f64)]) -> MeasureSpec {
    MeasureSpec {
        atoms: pairs
            .iter()
            .map(|(point, weight)| Atom {
                point: point.clone(),
                weight: *weight,
            })
            .collect(),
    }
}

/// Ten convergent and ten divergent labeled scenarios on `[0,1]` and
/// `[0,1]²`. Convergent ones reach an oracle distance well inside the
/// default tolerance by the last quarter of a 64-term prefix; divergent
/// ones keep last-quarter members at least `0.6` apart.
pub fn scenario_suite() -> Vec<SuiteScenario> {
    use Expected::*;
    use ScenarioSpec::*;
    let one = cube(1);
    let two = cube(2);
    let s = |name, space: &Arc<CompactSpace>, spec, expected| SuiteScenario {
        name,
        space: space.clone(),
        spec,
        expected,
    };
    vec![
        s("drift_harmonic", &one, DiracDrift { start: p1(0.0), direction: vec![1.0], rate: Rate::Harmonic }, Converges),
        s(
            "drift_power_2d",
            &two,
            DiracDrift { start: p2(0.5, 0.5), direction: vec![0.5, -0.5], rate: Rate::Power { exponent: 2.0 } },
            Converges,
        ),
        s(
            "drift_geometric",
            &one,
            DiracDrift { start: p1(0.2), direction: vec![1.6], rate: Rate::Geometric { ratio: 0.5 } },
            Converges,
        ),
        s("split_near", &one, MassSplit { a: p1(0.2), b: p1(0.5) }, Converges),
        s("split_2d", &two, MassSplit { a: p2(0.0, 0.0), b: p2(0.3, 0.4) }, Converges),
        s("split_far", &one, MassSplit { a: p1(0.1), b: p1(0.9) }, Converges),
        s(
            "empirical_pair",
            &one,
            Empirical { law: law(&[(p1(0.45), 0.5), (p1(0.55), 0.5)]) },
            Converges,
        ),
        s(
            "empirical_triple",
            &one,
            Empirical { law: law(&[(p1(0.4), 0.25), (p1(0.5), 0.5), (p1(0.6), 0.25)]) },
            Converges,
        ),
        s(
            "empirical_2d",
            &two,
            Empirical {
                law: law(&[
                    (p2(0.4, 0.4), 0.25),
                    (p2(0.5, 0.4), 0.25),
                    (p2(0.4, 0.5), 0.25),
                    (p2(0.5, 0.5), 0.25),
                ]),
            },
            Converges,
        ),
        s(
            "constant_mixture",
            &one,
            Constant { measure: law(&[(p1(0.1), 0.3), (p1(0.7), 0.7)]) },
            Converges,
        ),
        s("alternating_ends", &one, Alternating { a: p1(0.0), b: p1(1.0) }, Diverges),
        s("alternating_inner", &one, Alternating { a: p1(0.2), b: p1(0.9) }, Diverges),
        s("alternating_diagonal", &two, Alternating { a: p2(0.0, 0.0), b: p2(1.0, 1.0) }, Diverges),
        s("alternating_edge", &two, Alternating { a: p2(0.1, 0.2), b: p2(0.8, 0.2) }, Diverges),
        s(
            "escape_60",
            &one,
            MassEscape { base: p1(0.5), escape: vec![p1(0.0), p1(1.0)], mass: 0.6 },
            Diverges,
        ),
        s(
            "escape_75_2d",
            &two,
            MassEscape { base: p2(0.5, 0.5), escape: vec![p2(0.0, 0.0), p2(1.0, 1.0)], mass: 0.75 },
            Diverges,
        ),
        s(
            "escape_90_corners",
            &two,
            MassEscape {
                base: p2(0.5, 0.5),
                escape: vec![p2(0.0, 0.0), p2(1.0, 0.0), p2(1.0, 1.0), p2(0.0, 1.0)],
                mass: 0.9,
            },
            Diverges,
        ),
        s("oscillate_60", &one, OscillatingMixture { a: p1(0.0), b: p1(1.0), amplitude: 0.6 }, Diverges),
        s("oscillate_80", &one, OscillatingMixture { a: p1(0.0), b: p1(1.0), amplitude: 0.8 }, Diverges),
        s(
            "oscillate_100_2d",
            &two,
            OscillatingMixture { a: p2(0.0, 0.5), b: p2(1.0, 0.5), amplitude: 1.0 },
            Diverges,
        ),
    ]
}

/// `ℝ²` with the Euclidean norm and the `ω` instance of dimension 4, both
/// with coordinate bases.
pub fn default_targets() -> Vec<TargetSpace> {
    vec![
        TargetSpace::banach(2, LpNorm::L2).expect("valid target").with_coordinate_base(),
        TargetSpace::omega(4).expect("valid target").with_coordinate_base(),
    ]
}

/// A handful of probability measures on `space` (cube or finite).
pub fn bundled_measures(space: &Arc<CompactSpace>) -> Vec<FiniteMeasure> {
    let pts: Vec<Point> = match space.as_ref() {
        CompactSpace::UnitCube { dim } => {
            let d = *dim;
            vec![
                Point::coords(vec![0.0; d]),
                Point::coords(vec![1.0; d]),
                Point::coords(vec![0.5; d]),
                Point::coords((0..d).map(|k| if k % 2 == 0 { 0.2 } else { 0.7 }).collect::<Vec<_>>()),
                Point::coords(vec![1.0 / 3.0; d]),
            ]
        }
        CompactSpace::Finite { dist, .. } => (0..dist.len()).map(Point::Index).collect(),
    };
    let m = |pairs: Vec<(Point, f64)>| FiniteMeasure::from_pairs(space, pairs).expect("bundled measure");
    let mut out = vec![m(vec![(pts[0].clone(), 1.0)])];
    if pts.len() >= 2 {
        out.push(m(vec![(pts[0].clone(), 0.5), (pts[1].clone(), 0.5)]));
    }
    let w = 1.0 / pts.len() as f64;
    out.push(m(pts.iter().map(|p| (p.clone(), w)).collect()));
    if pts.len() >= 4 {
        out.push(m(vec![(pts[2].clone(), 0.3), (pts[3].clone(), 0.7)]));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVectorSequence {
    pub terms: Vec<Vector>,
    pub limit: Vector,
    pub hint: TailHint,
    pub converges: bool,
}

/// `count` seeded sequences of length `len` in dimension `dim`, alternating
/// between geometric convergence `x + 2^{-k} v` and two divergent shapes
/// (a stuck offset and a sign-flipping one).
pub fn labeled_vector_sequences(dim: usize, count: usize, len: usize, seed: u64) -> Vec<LabeledVectorSequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |scale: f64| Vector((0..dim).map(|_| rng.random_range(-scale..=scale)).collect());
    (0..count)
        .map(|i| {
            let limit = draw(5.0);
            let mut v = draw(1.0);
            // keep the perturbation visibly away from zero
            v.0[i % dim] = if v.0[i % dim] >= 0.0 { 1.0 } else { -1.0 };
            let (terms, converges) = match i % 3 {
                0 => ((1..=len).map(|k| &limit + &v.scaled(0.5f64.powi(k as i32))).collect(), true),
                1 => ((1..=len).map(|_| &limit + &v).collect(), false),
                _ => (
                    (1..=len)
                        .map(|k| &limit + &v.scaled(if k % 2 == 0 { 1.0 } else { -1.0 }))
                        .collect(),
                    false,
                ),
            };
            LabeledVectorSequence {
                terms,
                limit,
                hint: if converges { TailHint::Geometric } else { TailHint::None },
                converges,
            }
        })
        .collect()
}

/// A probability measure with `1..=max_atoms` atoms at uniform positions
/// and uniform-then-normalized weights.
pub fn random_probability<R: Rng + ?Sized>(space: &Arc<CompactSpace>, rng: &mut R, max_atoms: usize) -> FiniteMeasure {
    let k = rng.random_range(1..=max_atoms.max(1));
    let pairs = (0..k)
        .map(|_| (space.random_point(rng), rng.random_range(0.05..1.0)))
        .collect();
    FiniteMeasure::from_pairs(space, pairs)
        .and_then(|m| m.normalize())
        .expect("positive weights")
}

/// A continuous closed form drawn from the tent, distance, coordinate and
/// McShane shapes.
pub fn random_scalar_fn<R: Rng + ?Sized>(space: &CompactSpace, rng: &mut R) -> ScalarFn {
    match rng.random_range(0..5) {
        0 => ScalarFn::tent(space.random_point(rng), rng.random_range(0.2..1.5)),
        1 => ScalarFn::dist(space.random_point(rng)).scale(rng.random_range(-2.0..2.0)),
        2 if space.is_cube() => {
            let axis = match space {
                CompactSpace::UnitCube { dim } => rng.random_range(0..*dim),
                CompactSpace::Finite { .. } => 0,
            };
            ScalarFn::coord(axis).scale(rng.random_range(-3.0..3.0))
        }
        3 => {
            let anchors = (0..3)
                .map(|_| (space.random_point(rng), rng.random_range(-1.0..1.0)))
                .collect();
            ScalarFn::mcshane(anchors, rng.random_range(0.5..3.0)).clamp(-1.0, 1.0)
        }
        _ => ScalarFn::sum(vec![
            (rng.random_range(-1.0..1.0), ScalarFn::tent(space.random_point(rng), 0.5)),
            (rng.random_range(-1.0..1.0), ScalarFn::constant(rng.random_range(-1.0..1.0))),
        ]),
    }
}

/// A `dim`-coordinate function built from [`random_scalar_fn`].
pub fn random_vector_function<R: Rng + ?Sized>(space: &CompactSpace, dim: usize, rng: &mut R) -> VectorFunction {
    let comps = (0..dim).map(|_| random_scalar_fn(space, rng)).collect();
    VectorFunction::new(space, comps).expect("vocabulary functions are valid")
}
