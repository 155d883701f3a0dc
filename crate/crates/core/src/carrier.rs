//! The compact carrier `(Ω, ρ)`: finite metric spaces and unit cubes,
//! the measurable sets atomic measures are evaluated on, and the cell
//! partitions used to build simple functions.

use std::collections::BTreeSet;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Largest finite carrier checked exhaustively by [`metric_axioms_report`].
pub const EXHAUSTIVE_METRIC_LIMIT: usize = 64;

const METRIC_TOL: f64 = 1e-12;

/// A point of the carrier: coordinates in the unit cube, or an index into a
/// finite space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point {
    Index(usize),
    Coords(Vec<f64>),
}

impl Point {
    /// One-dimensional cube point.
    pub fn at(x: f64) -> Self {
        Point::Coords(vec![x])
    }

    pub fn coords(c: impl Into<Vec<f64>>) -> Self {
        Point::Coords(c.into())
    }

    pub fn as_coords(&self) -> Option<&[f64]> {
        match self {
            Point::Coords(c) => Some(c),
            Point::Index(_) => None,
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Index(i) => write!(f, "#{i}"),
            Point::Coords(c) => {
                write!(f, "(")?;
                for (k, x) in c.iter().enumerate() {
                    if k > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SpaceRepr {
    Finite {
        #[serde(default)]
        labels: Vec<String>,
        dist: Vec<Vec<f64>>,
    },
    UnitCube {
        dim: usize,
    },
}

/// A compact metric space: either finitely many labelled points with an
/// explicit distance matrix, or `[0,1]^dim` with the Euclidean metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub enum CompactSpace {
    Finite {
        labels: Vec<String>,
        dist: Vec<Vec<f64>>,
    },
    UnitCube {
        dim: usize,
    },
}

impl TryFrom<SpaceRepr> for CompactSpace {
    type Error = Error;

    fn try_from(repr: SpaceRepr) -> Result<Self> {
        match repr {
            SpaceRepr::Finite { labels, dist } => CompactSpace::finite(labels, dist),
            SpaceRepr::UnitCube { dim } => CompactSpace::unit_cube(dim),
        }
    }
}

impl From<CompactSpace> for SpaceRepr {
    fn from(space: CompactSpace) -> Self {
        match space {
            CompactSpace::Finite { labels, dist } => SpaceRepr::Finite { labels, dist },
            CompactSpace::UnitCube { dim } => SpaceRepr::UnitCube { dim },
        }
    }
}

impl CompactSpace {
    pub fn unit_cube(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(domain("unit cube dimension must be at least 1"));
        }
        Ok(CompactSpace::UnitCube { dim })
    }

    /// A finite metric space. The matrix must be square and satisfy the
    /// metric axioms; missing labels are filled with the point index.
    pub fn finite(labels: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        let space = CompactSpace::finite_unchecked(labels, dist)?;
        let report = metric_axioms_report(&space, &[]);
        if let Some(v) = report.violations.first() {
            return Err(Error::InvalidMetric(format!(
                "{} ({} violation(s))",
                v,
                report.violations.len()
            )));
        }
        Ok(space)
    }

    /// Builds a finite space without checking the metric axioms. Only the
    /// shape of the matrix is validated. Useful for exercising
    /// [`metric_axioms_report`] on broken matrices.
    pub fn finite_unchecked(mut labels: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        let n = dist.len();
        if n == 0 {
            return Err(domain("finite space needs at least one point"));
        }
        if dist.iter().any(|row| row.len() != n) {
            return Err(domain("distance matrix must be square"));
        }
        if labels.is_empty() {
            labels = (0..n).map(|i| i.to_string()).collect();
        }
        if labels.len() != n {
            return Err(domain(format!(
                "{} labels for {} points",
                labels.len(),
                n
            )));
        }
        Ok(CompactSpace::Finite { labels, dist })
    }

    pub fn is_cube(&self) -> bool {
        matches!(self, CompactSpace::UnitCube { .. })
    }

    /// Number of points of a finite carrier.
    pub fn size(&self) -> Option<usize> {
        match self {
            CompactSpace::Finite { dist, .. } => Some(dist.len()),
            CompactSpace::UnitCube { .. } => None,
        }
    }

    pub fn contains(&self, p: &Point) -> bool {
        match (self, p) {
            (CompactSpace::Finite { dist, .. }, Point::Index(i)) => *i < dist.len(),
            (CompactSpace::UnitCube { dim }, Point::Coords(c)) => {
                c.len() == *dim && c.iter().all(|x| (0.0..=1.0).contains(x))
            }
            _ => false,
        }
    }

    pub fn check(&self, p: &Point) -> Result<()> {
        if self.contains(p) {
            Ok(())
        } else {
            Err(domain(format!("point {p} is outside the carrier")))
        }
    }

    /// `ρ(a, b)`.
    pub fn distance(&self, a: &Point, b: &Point) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.distance_unchecked(a, b))
    }

    /// Distance for points already known to lie in the carrier.
    pub(crate) fn distance_unchecked(&self, a: &Point, b: &Point) -> f64 {
        match (self, a, b) {
            (CompactSpace::Finite { dist, .. }, Point::Index(i), Point::Index(j)) => dist[*i][*j],
            (CompactSpace::UnitCube { .. }, Point::Coords(x), Point::Coords(y)) => x
                .iter()
                .zip(y)
                .map(|(u, v)| (u - v) * (u - v))
                .sum::<f64>()
                .sqrt(),
            _ => f64::NAN,
        }
    }

    /// Upper bound on `ρ` over the whole carrier.
    pub fn diameter(&self) -> f64 {
        match self {
            CompactSpace::Finite { dist, .. } => dist
                .iter()
                .flat_map(|r| r.iter().copied())
                .fold(0.0, f64::max),
            CompactSpace::UnitCube { dim } => (*dim as f64).sqrt(),
        }
    }

    /// Draws a uniformly distributed point.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self {
            CompactSpace::Finite { dist, .. } => Point::Index(rng.random_range(0..dist.len())),
            CompactSpace::UnitCube { dim } => {
                Point::Coords((0..*dim).map(|_| rng.random::<f64>()).collect())
            }
        }
    }

    /// All points of a finite carrier; `None` for cubes.
    pub fn points(&self) -> Option<Vec<Point>> {
        self.size().map(|n| (0..n).map(Point::Index).collect())
    }
}

/// An axis-aligned box `[lo, hi)`; faces at `hi == 1` are closed so that
/// grids cover the cube exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCell {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxCell {
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.lo.len()
            && x.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(&v, (&lo, &hi))| lo <= v && (v < hi || (hi >= 1.0 && v <= hi)))
    }
}

/// A measurable subset of the carrier in one of the representable shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasurableSet {
    Empty,
    All,
    Boxes { cells: Vec<BoxCell> },
    Points { indices: BTreeSet<usize> },
    /// Closed ball `{s : ρ(s, center) ≤ radius}`.
    Ball { center: Point, radius: f64 },
}

impl MeasurableSet {
    pub fn contains(&self, space: &CompactSpace, p: &Point) -> bool {
        if !space.contains(p) {
            return false;
        }
        match self {
            MeasurableSet::Empty => false,
            MeasurableSet::All => true,
            MeasurableSet::Boxes { cells } => match p {
                Point::Coords(c) => cells.iter().any(|b| b.contains(c)),
                Point::Index(_) => false,
            },
            MeasurableSet::Points { indices } => match p {
                Point::Index(i) => indices.contains(i),
                Point::Coords(_) => false,
            },
            MeasurableSet::Ball { center, radius } => {
                space.distance_unchecked(center, p) <= *radius
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum PartitionKind {
    Grid { dim: usize, h: f64, per_axis: usize },
    Singletons { size: usize },
}

/// A finite partition of the carrier into cells, each with a representative
/// point. Grid partitions are generated lazily, so very fine grids cost
/// nothing until a cell is touched.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    kind: PartitionKind,
}

impl Partition {
    pub fn len(&self) -> usize {
        match &self.kind {
            PartitionKind::Grid { dim, per_axis, .. } => per_axis.saturating_pow(*dim as u32),
            PartitionKind::Singletons { size } => *size,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Mesh width of a grid partition; zero for singleton partitions.
    pub fn mesh(&self) -> f64 {
        match &self.kind {
            PartitionKind::Grid { h, .. } => *h,
            PartitionKind::Singletons { .. } => 0.0,
        }
    }

    /// Largest distance from any point of a cell to its representative.
    pub fn cell_radius(&self) -> f64 {
        match &self.kind {
            PartitionKind::Grid { dim, h, .. } => 0.5 * h.min(1.0) * (*dim as f64).sqrt(),
            PartitionKind::Singletons { .. } => 0.0,
        }
    }

    fn axis_bounds(h: f64, per_axis: usize, j: usize) -> (f64, f64) {
        let lo = j as f64 * h;
        let hi = if j + 1 == per_axis {
            1.0
        } else {
            ((j + 1) as f64 * h).min(1.0)
        };
        (lo, hi)
    }

    fn multi_index(per_axis: usize, dim: usize, mut i: usize) -> Vec<usize> {
        (0..dim)
            .map(|_| {
                let j = i % per_axis;
                i /= per_axis;
                j
            })
            .collect()
    }

    pub fn cell(&self, i: usize) -> MeasurableSet {
        match &self.kind {
            PartitionKind::Grid { dim, h, per_axis } => {
                let (lo, hi) = Self::multi_index(*per_axis, *dim, i)
                    .into_iter()
                    .map(|j| Self::axis_bounds(*h, *per_axis, j))
                    .unzip();
                MeasurableSet::Boxes {
                    cells: vec![BoxCell { lo, hi }],
                }
            }
            PartitionKind::Singletons { .. } => MeasurableSet::Points {
                indices: BTreeSet::from([i]),
            },
        }
    }

    pub fn representative(&self, i: usize) -> Point {
        match &self.kind {
            PartitionKind::Grid { dim, h, per_axis } => Point::Coords(
                Self::multi_index(*per_axis, *dim, i)
                    .into_iter()
                    .map(|j| {
                        let (lo, hi) = Self::axis_bounds(*h, *per_axis, j);
                        0.5 * (lo + hi)
                    })
                    .collect(),
            ),
            PartitionKind::Singletons { .. } => Point::Index(i),
        }
    }

    /// Index of the unique cell containing `p`.
    pub fn locate(&self, p: &Point) -> Option<usize> {
        match (&self.kind, p) {
            (PartitionKind::Grid { dim, h, per_axis }, Point::Coords(c)) if c.len() == *dim => {
                let mut index = 0;
                let mut stride = 1;
                for &x in c {
                    if !(0.0..=1.0).contains(&x) {
                        return None;
                    }
                    let mut j = ((x / h).floor() as usize).min(per_axis - 1);
                    let (lo, _) = Self::axis_bounds(*h, *per_axis, j);
                    if x < lo && j > 0 {
                        j -= 1;
                    }
                    let (_, hi) = Self::axis_bounds(*h, *per_axis, j);
                    if x >= hi && j + 1 < *per_axis {
                        j += 1;
                    }
                    index += j * stride;
                    stride *= per_axis;
                }
                Some(index)
            }
            (PartitionKind::Singletons { size }, Point::Index(i)) if i < size => Some(*i),
            _ => None,
        }
    }
}

/// Grid of `⌈1/h⌉^dim` boxes over the unit cube, representatives at the
/// cell centres.
pub fn grid_partition(space: &CompactSpace, h: f64) -> Result<Partition> {
    let dim = match space {
        CompactSpace::UnitCube { dim } => *dim,
        CompactSpace::Finite { .. } => {
            return Err(domain(
                "grid partitions need a cube carrier; use trivial_partition on finite spaces",
            ))
        }
    };
    if !(h > 0.0) || !h.is_finite() {
        return Err(domain(format!("mesh width must be positive, got {h}")));
    }
    let h = h.min(1.0);
    let per_axis = ((1.0 / h) - 1e-12).ceil().max(1.0) as usize;
    Ok(Partition {
        kind: PartitionKind::Grid { dim, h, per_axis },
    })
}

/// Every point of a finite carrier in its own cell.
pub fn trivial_partition(space: &CompactSpace) -> Result<Partition> {
    match space.size() {
        Some(size) => Ok(Partition {
            kind: PartitionKind::Singletons { size },
        }),
        None => Err(domain("trivial partitions exist only on finite carriers")),
    }
}

/// The natural partition of mesh `h`: a grid on cubes, singletons on finite
/// spaces (where every function is already simple).
pub fn partition_for(space: &CompactSpace, h: f64) -> Result<Partition> {
    if space.is_cube() {
        grid_partition(space, h)
    } else {
        trivial_partition(space)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricAxiom {
    NonNegative,
    Identity,
    Positivity,
    Symmetry,
    Triangle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricViolation {
    pub axiom: MetricAxiom,
    pub points: Vec<Point>,
    pub detail: String,
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} violated at [", self.axiom)?;
        for (k, p) in self.points.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]: {}", self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub triples_checked: usize,
    pub violations: Vec<MetricViolation>,
}

impl MetricReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    fn check_triple(&mut self, space: &CompactSpace, a: &Point, b: &Point, c: &Point) {
        self.triples_checked += 1;
        let d = |x: &Point, y: &Point| space.distance_unchecked(x, y);
        let (ab, ba, bc, ac, aa) = (d(a, b), d(b, a), d(b, c), d(a, c), d(a, a));
        let mut flag = |axiom, pts: &[&Point], detail: String| {
            self.violations.push(MetricViolation {
                axiom,
                points: pts.iter().map(|p| (*p).clone()).collect(),
                detail,
            })
        };
        if !(ab >= 0.0) {
            flag(MetricAxiom::NonNegative, &[a, b], format!("d = {ab}"));
        }
        if aa.abs() > METRIC_TOL {
            flag(MetricAxiom::Identity, &[a], format!("d(a,a) = {aa}"));
        }
        if a != b && ab <= 0.0 {
            flag(MetricAxiom::Positivity, &[a, b], format!("d = {ab} for distinct points"));
        }
        if (ab - ba).abs() > METRIC_TOL {
            flag(MetricAxiom::Symmetry, &[a, b], format!("d(a,b) = {ab}, d(b,a) = {ba}"));
        }
        if ac > ab + bc + METRIC_TOL {
            flag(
                MetricAxiom::Triangle,
                &[a, b, c],
                format!("d(a,c) = {ac} > d(a,b) + d(b,c) = {}", ab + bc),
            );
        }
    }
}

/// Checks the metric axioms. Finite carriers with at most
/// [`EXHAUSTIVE_METRIC_LIMIT`] points are checked on every triple; the
/// supplied samples are checked in addition.
pub fn metric_axioms_report(
    space: &CompactSpace,
    samples: &[(Point, Point, Point)],
) -> MetricReport {
    let mut report = MetricReport::default();
    if let Some(n) = space.size().filter(|&n| n <= EXHAUSTIVE_METRIC_LIMIT) {
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    report.check_triple(
                        space,
                        &Point::Index(i),
                        &Point::Index(j),
                        &Point::Index(k),
                    );
                }
            }
        }
    }
    for (a, b, c) in samples {
        if space.contains(a) && space.contains(b) && space.contains(c) {
            report.check_triple(space, a, b, c);
        }
    }
    report
}
