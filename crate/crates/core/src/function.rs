//! Closed-form test functions on the carrier.
//!
//! Scalar functions are expression trees over a small vocabulary whose sup
//! bounds and Lipschitz constants can be computed structurally. Vector
//! functions `g: Ω → ℝ^D` are one scalar expression per coordinate, with
//! per-coordinate `(B_k, L_k)` metadata.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::carrier::{CompactSpace, Point};
use crate::error::{domain, Result};
use crate::target::Vector;

/// Points drawn when validating declared metadata on a cube.
pub const METADATA_SAMPLES: usize = 10_000;
/// Relative slack allowed on declared metadata.
pub const METADATA_SLACK: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub point: Point,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub weight: f64,
    pub f: ScalarFn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarFn {
    Const {
        value: f64,
    },
    /// Cube coordinate `s_axis` (zero based).
    Coord {
        axis: usize,
    },
    /// `ρ(s, to)`
    Dist {
        to: Point,
    },
    /// `max(0, 1 − ρ(s, center)/radius)`
    Tent {
        center: Point,
        radius: f64,
    },
    /// `min_i (v_i + L ρ(s, s_i))`
    Mcshane {
        anchors: Vec<Anchor>,
        lipschitz: f64,
    },
    Clamp {
        lo: f64,
        hi: f64,
        f: Box<ScalarFn>,
    },
    Sum {
        terms: Vec<Term>,
    },
    Scale {
        factor: f64,
        f: Box<ScalarFn>,
    },
    Product {
        factors: Vec<ScalarFn>,
    },
    /// `below` for `s_axis < threshold`, `above` for `s_axis > threshold`, and
    /// their midpoint on the jump itself. Discontinuous; only for exercising
    /// failure paths.
    Step {
        axis: usize,
        threshold: f64,
        below: f64,
        above: f64,
    },
}

impl ScalarFn {
    pub fn constant(value: f64) -> Self {
        ScalarFn::Const { value }
    }

    pub fn coord(axis: usize) -> Self {
        ScalarFn::Coord { axis }
    }

    pub fn dist(to: Point) -> Self {
        ScalarFn::Dist { to }
    }

    pub fn tent(center: Point, radius: f64) -> Self {
        ScalarFn::Tent { center, radius }
    }

    pub fn mcshane(anchors: Vec<(Point, f64)>, lipschitz: f64) -> Self {
        ScalarFn::Mcshane {
            anchors: anchors
                .into_iter()
                .map(|(point, value)| Anchor { point, value })
                .collect(),
            lipschitz,
        }
    }

    pub fn clamp(self, lo: f64, hi: f64) -> Self {
        ScalarFn::Clamp {
            lo,
            hi,
            f: Box::new(self),
        }
    }

    pub fn scale(self, factor: f64) -> Self {
        ScalarFn::Scale {
            factor,
            f: Box::new(self),
        }
    }

    pub fn sum(terms: Vec<(f64, ScalarFn)>) -> Self {
        ScalarFn::Sum {
            terms: terms
                .into_iter()
                .map(|(weight, f)| Term { weight, f })
                .collect(),
        }
    }

    pub fn product(factors: Vec<ScalarFn>) -> Self {
        ScalarFn::Product { factors }
    }

    pub fn step(axis: usize, threshold: f64, below: f64, above: f64) -> Self {
        ScalarFn::Step {
            axis,
            threshold,
            below,
            above,
        }
    }

    /// Checks that every parameter is meaningful on `space`.
    pub fn validate(&self, space: &CompactSpace) -> Result<()> {
        let finite = |x: f64, what: &str| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(domain(format!("{what} must be finite, got {x}")))
            }
        };
        let axis_ok = |axis: usize| match space {
            CompactSpace::UnitCube { dim } if axis < *dim => Ok(()),
            CompactSpace::UnitCube { dim } => {
                Err(domain(format!("axis {axis} outside cube of dimension {dim}")))
            }
            CompactSpace::Finite { .. } => Err(domain("coordinate forms need a cube carrier")),
        };
        match self {
            ScalarFn::Const { value } => finite(*value, "constant"),
            ScalarFn::Coord { axis } => axis_ok(*axis),
            ScalarFn::Dist { to } => space.check(to),
            ScalarFn::Tent { center, radius } => {
                space.check(center)?;
                if !(*radius > 0.0) || !radius.is_finite() {
                    return Err(domain(format!("tent radius must be positive, got {radius}")));
                }
                Ok(())
            }
            ScalarFn::Mcshane { anchors, lipschitz } => {
                if anchors.is_empty() {
                    return Err(domain("McShane form needs at least one anchor"));
                }
                if !(*lipschitz >= 0.0) || !lipschitz.is_finite() {
                    return Err(domain(format!("Lipschitz constant must be ≥ 0, got {lipschitz}")));
                }
                for a in anchors {
                    space.check(&a.point)?;
                    finite(a.value, "anchor value")?;
                }
                Ok(())
            }
            ScalarFn::Clamp { lo, hi, f } => {
                finite(*lo, "clamp bound")?;
                finite(*hi, "clamp bound")?;
                if lo > hi {
                    return Err(domain(format!("clamp bounds reversed: {lo} > {hi}")));
                }
                f.validate(space)
            }
            ScalarFn::Sum { terms } => terms.iter().try_for_each(|t| {
                finite(t.weight, "sum weight")?;
                t.f.validate(space)
            }),
            ScalarFn::Scale { factor, f } => {
                finite(*factor, "scale factor")?;
                f.validate(space)
            }
            ScalarFn::Product { factors } => factors.iter().try_for_each(|f| f.validate(space)),
            ScalarFn::Step {
                axis,
                threshold,
                below,
                above,
            } => {
                axis_ok(*axis)?;
                finite(*threshold, "step threshold")?;
                finite(*below, "step value")?;
                finite(*above, "step value")
            }
        }
    }

    /// Evaluates at a carrier point. Parameters are assumed validated.
    pub fn eval(&self, space: &CompactSpace, s: &Point) -> f64 {
        match self {
            ScalarFn::Const { value } => *value,
            ScalarFn::Coord { axis } => s.as_coords().map_or(f64::NAN, |c| c[*axis]),
            ScalarFn::Dist { to } => space.distance_unchecked(s, to),
            ScalarFn::Tent { center, radius } => {
                (1.0 - space.distance_unchecked(s, center) / radius).max(0.0)
            }
            ScalarFn::Mcshane { anchors, lipschitz } => anchors
                .iter()
                .map(|a| a.value + lipschitz * space.distance_unchecked(s, &a.point))
                .fold(f64::INFINITY, f64::min),
            ScalarFn::Clamp { lo, hi, f } => f.eval(space, s).clamp(*lo, *hi),
            ScalarFn::Sum { terms } => terms.iter().map(|t| t.weight * t.f.eval(space, s)).sum(),
            ScalarFn::Scale { factor, f } => factor * f.eval(space, s),
            ScalarFn::Product { factors } => factors.iter().map(|f| f.eval(space, s)).product(),
            ScalarFn::Step {
                axis,
                threshold,
                below,
                above,
            } => match s.as_coords() {
                Some(c) if c[*axis] < *threshold => *below,
                Some(c) if c[*axis] > *threshold => *above,
                Some(_) => 0.5 * (below + above),
                None => f64::NAN,
            },
        }
    }

    /// A structural upper bound on `sup |f|`.
    pub fn bound(&self, space: &CompactSpace) -> f64 {
        match self {
            ScalarFn::Const { value } => value.abs(),
            ScalarFn::Coord { .. } => 1.0,
            ScalarFn::Dist { .. } => space.diameter(),
            ScalarFn::Tent { .. } => 1.0,
            ScalarFn::Mcshane { anchors, lipschitz } => {
                let lo = anchors.iter().map(|a| a.value).fold(f64::INFINITY, f64::min);
                lo.abs().max((lo + lipschitz * space.diameter()).abs())
            }
            ScalarFn::Clamp { lo, hi, f } => {
                let b = f.bound(space);
                (-b).clamp(*lo, *hi).abs().max(b.clamp(*lo, *hi).abs())
            }
            ScalarFn::Sum { terms } => terms.iter().map(|t| t.weight.abs() * t.f.bound(space)).sum(),
            ScalarFn::Scale { factor, f } => factor.abs() * f.bound(space),
            ScalarFn::Product { factors } => factors.iter().map(|f| f.bound(space)).product(),
            ScalarFn::Step { below, above, .. } => below.abs().max(above.abs()),
        }
    }

    fn lipschitz_impl(&self, space: &CompactSpace, jumps: f64) -> f64 {
        let lip = |f: &ScalarFn| f.lipschitz_impl(space, jumps);
        match self {
            ScalarFn::Const { .. } => 0.0,
            ScalarFn::Coord { .. } | ScalarFn::Dist { .. } => 1.0,
            ScalarFn::Tent { radius, .. } => 1.0 / radius,
            ScalarFn::Mcshane { lipschitz, .. } => *lipschitz,
            ScalarFn::Clamp { f, .. } => lip(f),
            ScalarFn::Sum { terms } => terms.iter().map(|t| t.weight.abs() * lip(&t.f)).sum(),
            ScalarFn::Scale { factor, f } => factor.abs() * lip(f),
            ScalarFn::Product { factors } => {
                let bounds: Vec<f64> = factors.iter().map(|f| f.bound(space)).collect();
                factors
                    .iter()
                    .enumerate()
                    .map(|(i, f)| {
                        let others: f64 = bounds
                            .iter()
                            .enumerate()
                            .filter(|&(j, _)| j != i)
                            .map(|(_, b)| b)
                            .product();
                        let l = lip(f);
                        if l == 0.0 {
                            0.0
                        } else {
                            l * others
                        }
                    })
                    .sum()
            }
            ScalarFn::Step { below, above, .. } => {
                if below == above {
                    0.0
                } else {
                    jumps
                }
            }
        }
    }

    /// A structural Lipschitz constant; infinite for discontinuous forms.
    pub fn lipschitz(&self, space: &CompactSpace) -> f64 {
        self.lipschitz_impl(space, f64::INFINITY)
    }

    /// Lipschitz constant away from jump sets: step forms count as locally
    /// constant.
    pub fn piecewise_lipschitz(&self, space: &CompactSpace) -> f64 {
        self.lipschitz_impl(space, 0.0)
    }

    pub fn is_continuous(&self) -> bool {
        match self {
            ScalarFn::Step { below, above, .. } => below == above,
            ScalarFn::Clamp { f, .. } | ScalarFn::Scale { f, .. } => f.is_continuous(),
            ScalarFn::Sum { terms } => terms.iter().all(|t| t.f.is_continuous()),
            ScalarFn::Product { factors } => factors.iter().all(|f| f.is_continuous()),
            _ => true,
        }
    }
}

/// Sup bound and Lipschitz constant of one coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub bound: f64,
    pub lipschitz: f64,
}

impl Metadata {
    pub fn of(f: &ScalarFn, space: &CompactSpace) -> Self {
        Metadata {
            bound: f.bound(space),
            lipschitz: f.lipschitz(space),
        }
    }

    /// `max(B, L)`, the factor relating integral gaps to the
    /// bounded-Lipschitz distance.
    pub fn scale(&self) -> f64 {
        self.bound.max(self.lipschitz)
    }
}

/// Sample points used to validate metadata: the whole carrier when finite,
/// otherwise seeded uniform draws with nearby companions.
fn validation_pairs(space: &CompactSpace) -> (Vec<Point>, Vec<(Point, Point)>) {
    if let Some(points) = space.points() {
        let pairs = points
            .iter()
            .flat_map(|a| points.iter().map(move |b| (a.clone(), b.clone())))
            .collect();
        return (points, pairs);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let points: Vec<Point> = (0..METADATA_SAMPLES)
        .map(|_| space.random_point(&mut rng))
        .collect();
    let mut pairs: Vec<(Point, Point)> = points
        .chunks(2)
        .filter(|c| c.len() == 2)
        .map(|c| (c[0].clone(), c[1].clone()))
        .collect();
    for (i, p) in points.iter().enumerate().take(METADATA_SAMPLES / 2) {
        if let Point::Coords(c) = p {
            let eps = 1e-3 * (1 + i % 7) as f64;
            let near: Vec<f64> = c
                .iter()
                .enumerate()
                .map(|(k, x)| (x + if (i + k) % 2 == 0 { eps } else { -eps }).clamp(0.0, 1.0))
                .collect();
            pairs.push((p.clone(), Point::Coords(near)));
        }
    }
    (points, pairs)
}

/// Checks declared metadata against dense samples.
pub fn check_metadata(space: &CompactSpace, f: &ScalarFn, meta: Metadata) -> Result<()> {
    let (points, pairs) = validation_pairs(space);
    for p in &points {
        let v = f.eval(space, p);
        if !(v.abs() <= meta.bound * (1.0 + METADATA_SLACK) + 1e-12) {
            return Err(domain(format!(
                "declared bound {} violated: |f({p})| = {}",
                meta.bound,
                v.abs()
            )));
        }
    }
    if f.is_continuous() {
        for (a, b) in &pairs {
            let d = space.distance_unchecked(a, b);
            let gap = (f.eval(space, a) - f.eval(space, b)).abs();
            if gap > meta.lipschitz * (1.0 + METADATA_SLACK) * d + 1e-12 {
                return Err(domain(format!(
                    "declared Lipschitz constant {} violated between {a} and {b}",
                    meta.lipschitz
                )));
            }
        }
    }
    Ok(())
}

/// `g: Ω → ℝ^D`, one scalar expression per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFunction {
    components: Vec<ScalarFn>,
    metadata: Vec<Metadata>,
}

impl VectorFunction {
    /// Builds `g` with structurally computed metadata.
    pub fn new(space: &CompactSpace, components: Vec<ScalarFn>) -> Result<Self> {
        if components.is_empty() {
            return Err(domain("vector function needs at least one component"));
        }
        for f in &components {
            f.validate(space)?;
        }
        let metadata = components.iter().map(|f| Metadata::of(f, space)).collect();
        Ok(VectorFunction {
            components,
            metadata,
        })
    }

    /// Builds `g` with caller-declared metadata, validated by sampling.
    pub fn with_metadata(
        space: &CompactSpace,
        components: Vec<ScalarFn>,
        metadata: Vec<Metadata>,
    ) -> Result<Self> {
        if components.len() != metadata.len() {
            return Err(domain("one metadata entry per component is required"));
        }
        let mut g = Self::new(space, components)?;
        for (f, m) in g.components.iter().zip(&metadata) {
            check_metadata(space, f, *m)?;
        }
        g.metadata = metadata;
        Ok(g)
    }

    /// A one-dimensional vector function.
    pub fn scalar(space: &CompactSpace, f: ScalarFn) -> Result<Self> {
        Self::new(space, vec![f])
    }

    /// `g = Σ_k f_k x_k` for a list of base vectors.
    pub fn lift(space: &CompactSpace, coeffs: &[ScalarFn], base: &[Vector]) -> Result<Self> {
        if coeffs.len() != base.len() || base.is_empty() {
            return Err(domain("lift needs one coefficient function per base vector"));
        }
        let dim = base[0].dim();
        let components = (0..dim)
            .map(|j| {
                let terms: Vec<(f64, ScalarFn)> = coeffs
                    .iter()
                    .zip(base)
                    .filter(|(_, x)| x.0[j] != 0.0)
                    .map(|(f, x)| (x.0[j], f.clone()))
                    .collect();
                match terms.as_slice() {
                    [] => ScalarFn::constant(0.0),
                    [(w, f)] if *w == 1.0 => f.clone(),
                    _ => ScalarFn::sum(terms),
                }
            })
            .collect();
        Self::new(space, components)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[ScalarFn] {
        &self.components
    }

    pub fn metadata(&self) -> &[Metadata] {
        &self.metadata
    }

    pub fn lipschitz_max(&self) -> f64 {
        self.metadata.iter().map(|m| m.lipschitz).fold(0.0, f64::max)
    }

    pub fn piecewise_lipschitz_max(&self, space: &CompactSpace) -> f64 {
        self.components
            .iter()
            .map(|f| f.piecewise_lipschitz(space))
            .fold(0.0, f64::max)
    }

    pub fn is_continuous(&self) -> bool {
        self.components.iter().all(ScalarFn::is_continuous)
    }

    pub fn eval(&self, space: &CompactSpace, s: &Point) -> Vector {
        Vector(self.components.iter().map(|f| f.eval(space, s)).collect())
    }

    pub fn to_spec(&self) -> VectorFunctionSpec {
        VectorFunctionSpec {
            components: self.components.clone(),
            metadata: Some(self.metadata.clone()),
        }
    }
}

/// Serialized vector function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorFunctionSpec {
    pub components: Vec<ScalarFn>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<Vec<Metadata>>,
}

impl VectorFunctionSpec {
    pub fn build(&self, space: &CompactSpace) -> Result<VectorFunction> {
        match &self.metadata {
            None => VectorFunction::new(space, self.components.clone()),
            Some(m) => VectorFunction::with_metadata(space, self.components.clone(), m.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> CompactSpace {
        CompactSpace::unit_cube(1).unwrap()
    }

    #[test]
    fn vocabulary_values() {
        let s = line();
        let tent = ScalarFn::tent(Point::at(0.0), 1.0);
        assert_eq!(tent.eval(&s, &Point::at(0.25)), 0.75);
        assert_eq!(tent.eval(&s, &Point::at(1.0)), 0.0);
        assert_eq!((tent.bound(&s), tent.lipschitz(&s)), (1.0, 1.0));

        let m = ScalarFn::mcshane(vec![(Point::at(0.2), 0.0), (Point::at(0.8), 1.0)], 2.0);
        assert!((m.eval(&s, &Point::at(0.5)) - 0.6).abs() < 1e-15);
        assert_eq!(m.lipschitz(&s), 2.0);

        let c = ScalarFn::dist(Point::at(0.0)).clamp(-1.0, 1.0);
        assert_eq!(c.eval(&s, &Point::at(0.7)), 0.7);
        assert_eq!(c.bound(&s), 1.0);

        let p = ScalarFn::product(vec![ScalarFn::coord(0), ScalarFn::coord(0)]);
        assert_eq!(p.eval(&s, &Point::at(0.5)), 0.25);
        assert_eq!(p.lipschitz(&s), 2.0);

        let step = ScalarFn::step(0, 0.3, 0.0, 1.0);
        assert!(!step.is_continuous());
        assert_eq!(step.lipschitz(&s), f64::INFINITY);
        assert_eq!(step.piecewise_lipschitz(&s), 0.0);
        assert_eq!(step.eval(&s, &Point::at(0.3)), 0.5);
        assert_eq!(step.eval(&s, &Point::at(0.31)), 1.0);
    }

    #[test]
    fn validation() {
        let s = line();
        assert!(ScalarFn::tent(Point::at(0.0), 0.0).validate(&s).is_err());
        assert!(ScalarFn::coord(1).validate(&s).is_err());
        assert!(ScalarFn::dist(Point::at(2.0)).validate(&s).is_err());
        assert!(ScalarFn::mcshane(vec![], 1.0).validate(&s).is_err());
        assert!(ScalarFn::constant(1.0).clamp(1.0, 0.0).validate(&s).is_err());
    }

    #[test]
    fn declared_metadata_is_checked() {
        let s = line();
        let f = vec![ScalarFn::coord(0).scale(2.0)];
        let ok = Metadata {
            bound: 2.0,
            lipschitz: 2.0,
        };
        assert!(VectorFunction::with_metadata(&s, f.clone(), vec![ok]).is_ok());
        let low_l = Metadata {
            bound: 2.0,
            lipschitz: 1.5,
        };
        assert!(VectorFunction::with_metadata(&s, f.clone(), vec![low_l]).is_err());
        let low_b = Metadata {
            bound: 1.0,
            lipschitz: 2.0,
        };
        assert!(VectorFunction::with_metadata(&s, f, vec![low_b]).is_err());
    }

    #[test]
    fn structural_metadata_holds_on_samples() {
        let sq = CompactSpace::unit_cube(2).unwrap();
        let fs = [
            ScalarFn::tent(Point::coords([0.3, 0.4]), 0.5),
            ScalarFn::mcshane(
                vec![(Point::coords([0.0, 0.0]), -0.5), (Point::coords([1.0, 1.0]), 0.5)],
                1.0,
            )
            .clamp(-1.0, 1.0),
            ScalarFn::sum(vec![(0.5, ScalarFn::coord(0)), (-2.0, ScalarFn::coord(1))]),
            ScalarFn::product(vec![ScalarFn::coord(0), ScalarFn::dist(Point::coords([1.0, 0.0]))]),
        ];
        for f in fs {
            check_metadata(&sq, &f, Metadata::of(&f, &sq)).unwrap();
        }
    }

    #[test]
    fn lift_through_base() {
        let s = line();
        let base = [Vector::from([1.0, 0.0]), Vector::from([1.0, 1.0])];
        let g = VectorFunction::lift(
            &s,
            &[ScalarFn::coord(0), ScalarFn::constant(2.0)],
            &base,
        )
        .unwrap();
        assert_eq!(g.eval(&s, &Point::at(0.5)), Vector::from([2.5, 2.0]));
    }

    #[test]
    fn json_tree() {
        let json = r#"{"components":[{"kind":"clamp","lo":-1,"hi":1,
            "f":{"kind":"sum","terms":[{"weight":2,"f":{"kind":"coord","axis":0}},
                                        {"weight":-1,"f":{"kind":"const","value":0.5}}]}}]}"#;
        let spec: VectorFunctionSpec = serde_json::from_str(json).unwrap();
        let g = spec.build(&line()).unwrap();
        assert_eq!(g.eval(&line(), &Point::at(0.5)), Vector::from([0.5]));
        assert_eq!(g.metadata()[0].lipschitz, 2.0);
        assert!(serde_json::from_str::<VectorFunctionSpec>(
            r#"{"components":[{"kind":"wobble"}]}"#
        )
        .is_err());
    }
}
