//! Simple functions and the μ-integral of vector-valued functions, built as
//! the limit of integrals of simple approximations on refining grids.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::carrier::{partition_for, CompactSpace, Partition, Point};
use crate::error::{domain, Error, Result};
use crate::function::VectorFunction;
use crate::measure::FiniteMeasure;
use crate::target::{TargetSpace, Vector};

/// Largest partition [`approximate_by_simple`] will materialize in full.
pub const MAX_DENSE_CELLS: usize = 1 << 20;

/// Mesh widths `2^-1, …, 2^-8`.
pub fn default_schedule() -> Vec<f64> {
    (1..=8).map(|k| 0.5f64.powi(k)).collect()
}

/// `g(s) = x_j` on cell `B_j`; cells without an entry carry the zero vector.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleFunction {
    partition: Partition,
    dim: usize,
    values: BTreeMap<usize, Vector>,
}

impl SimpleFunction {
    /// One value per cell, in cell order.
    pub fn dense(partition: Partition, values: Vec<Vector>) -> Result<Self> {
        if values.len() != partition.len() {
            return Err(domain(format!(
                "{} values for a partition of {} cells",
                values.len(),
                partition.len()
            )));
        }
        let dim = values.first().map_or(0, Vector::dim);
        Self::sparse(partition, dim, values.into_iter().enumerate().collect())
    }

    pub fn sparse(partition: Partition, dim: usize, values: BTreeMap<usize, Vector>) -> Result<Self> {
        for (&cell, v) in &values {
            if cell >= partition.len() {
                return Err(domain(format!("cell {cell} outside the partition")));
            }
            if v.dim() != dim {
                return Err(domain("simple-function values differ in dimension"));
            }
            if !v.is_finite() {
                return Err(domain(format!("non-finite value on cell {cell}")));
            }
        }
        Ok(SimpleFunction {
            partition,
            dim,
            values,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cell_value(&self, cell: usize) -> Vector {
        self.values
            .get(&cell)
            .cloned()
            .unwrap_or_else(|| Vector::zeros(self.dim))
    }

    pub fn value_at(&self, p: &Point) -> Result<Vector> {
        let cell = self
            .partition
            .locate(p)
            .ok_or_else(|| domain(format!("point {p} lies in no cell")))?;
        Ok(self.cell_value(cell))
    }

    /// `a·self + b·other` on a shared partition.
    pub fn combine(&self, a: f64, other: &SimpleFunction, b: f64) -> Result<SimpleFunction> {
        if self.partition != other.partition || self.dim != other.dim {
            return Err(domain("simple functions on different partitions"));
        }
        let mut values = BTreeMap::new();
        for &cell in self.values.keys().chain(other.values.keys()) {
            values.entry(cell).or_insert_with(|| {
                &self.cell_value(cell).scaled(a) + &other.cell_value(cell).scaled(b)
            });
        }
        SimpleFunction::sparse(self.partition.clone(), self.dim, values)
    }
}

/// `Σ_j x_j μ(B_j)`.
pub fn integrate_simple(sf: &SimpleFunction, mu: &FiniteMeasure) -> Result<Vector> {
    let mut cell_mass: BTreeMap<usize, f64> = BTreeMap::new();
    for atom in mu.atoms() {
        let cell = sf
            .partition
            .locate(&atom.point)
            .ok_or_else(|| domain(format!("atom {} lies in no cell", atom.point)))?;
        *cell_mass.entry(cell).or_default() += atom.weight;
    }
    let mut total = Vector::zeros(sf.dim);
    for (cell, mass) in cell_mass {
        if let Some(x) = sf.values.get(&cell) {
            total.axpy(mass, x);
        }
    }
    Ok(total)
}

/// `Σ_i w_i g(s_i)`, the exact integral against an atomic measure.
pub fn atomic_oracle(space: &CompactSpace, g: &VectorFunction, mu: &FiniteMeasure) -> Vector {
    let mut total = Vector::zeros(g.dim());
    for atom in mu.atoms() {
        total.axpy(atom.weight, &g.eval(space, &atom.point));
    }
    total
}

/// Samples `g` at every cell representative.
pub fn approximate_by_simple(
    space: &CompactSpace,
    g: &VectorFunction,
    partition: &Partition,
) -> Result<SimpleFunction> {
    let cells = partition.len();
    if cells > MAX_DENSE_CELLS {
        return Err(Error::Capacity {
            what: "partition cells",
            actual: cells,
            limit: MAX_DENSE_CELLS,
        });
    }
    let values = (0..cells)
        .map(|i| g.eval(space, &partition.representative(i)))
        .collect();
    SimpleFunction::dense(partition.clone(), values)
}

/// Like [`approximate_by_simple`], but only on the cells charged by `μ`;
/// every other cell carries zero.
pub fn approximate_on_support(
    space: &CompactSpace,
    g: &VectorFunction,
    partition: &Partition,
    mu: &FiniteMeasure,
) -> Result<SimpleFunction> {
    let mut values = BTreeMap::new();
    for atom in mu.atoms() {
        let cell = partition
            .locate(&atom.point)
            .ok_or_else(|| domain(format!("atom {} lies in no cell", atom.point)))?;
        values
            .entry(cell)
            .or_insert_with(|| g.eval(space, &partition.representative(cell)));
    }
    SimpleFunction::sparse(partition.clone(), g.dim(), values)
}

/// `∫ p_n(sf(s) − g(s)) dμ(s)`.
pub fn seminorm_mean_gap(
    space: &CompactSpace,
    g: &VectorFunction,
    sf: &SimpleFunction,
    mu: &FiniteMeasure,
    target: &TargetSpace,
    level: usize,
) -> Result<f64> {
    let mut total = 0.0;
    for atom in mu.atoms() {
        let diff = &sf.value_at(&atom.point)? - &g.eval(space, &atom.point);
        total += atom.weight * target.seminorm(level, &diff);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub h: f64,
    /// `max_i max_k |g_h(s_i)_k − g(s_i)_k|` over the atoms.
    pub pointwise_gap: f64,
    /// `∫ p_n(g_h − g) dμ` for `n = 1..=n_max`.
    pub mean_gaps: Vec<f64>,
    pub value: Vector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralCertificate {
    pub value: Vector,
    pub rows: Vec<ScheduleRow>,
    pub pointwise_tol: f64,
    pub mean_tols: Vec<f64>,
    pub certified: bool,
}

impl IntegralCertificate {
    /// Whether every mean-gap column is nonincreasing down the schedule.
    pub fn mean_gaps_nonincreasing(&self, slack: f64) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[0].mean_gaps.iter().zip(&w[1].mean_gaps).all(|(a, b)| *b <= a + slack))
    }

    pub fn pointwise_nonincreasing(&self, slack: f64) -> bool {
        self.rows
            .windows(2)
            .all(|w| w[1].pointwise_gap <= w[0].pointwise_gap + slack)
    }

    /// Columns `h, pointwise_gap, mean_gap_level_1.., value_1..`.
    pub fn to_csv(&self) -> String {
        let levels = self.mean_tols.len();
        let dim = self.value.dim();
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["h".to_string(), "pointwise_gap".to_string()];
        header.extend((1..=levels).map(|n| format!("mean_gap_level_{n}")));
        header.extend((1..=dim).map(|k| format!("value_{k}")));
        w.write_record(&header).expect("in-memory write");
        for row in &self.rows {
            let mut rec = vec![fmt_num(row.h), fmt_num(row.pointwise_gap)];
            rec.extend(row.mean_gaps.iter().copied().map(fmt_num));
            rec.extend(row.value.0.iter().copied().map(fmt_num));
            w.write_record(&rec).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
    }
}

pub(crate) fn fmt_num(x: f64) -> String {
    format!("{x:.12e}")
}

fn check_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.len() < 3 {
        return Err(domain("a schedule needs at least three mesh widths"));
    }
    if schedule.iter().any(|h| !(*h > 0.0) || !h.is_finite()) {
        return Err(domain("mesh widths must be positive"));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(domain("schedule must be strictly decreasing"));
    }
    Ok(())
}

fn check_pair(space: &CompactSpace, g: &VectorFunction, mu: &FiniteMeasure, target: &TargetSpace) -> Result<()> {
    if mu.space() != space {
        return Err(domain("measure lives on a different carrier"));
    }
    if g.dim() != target.dim() {
        return Err(domain(format!(
            "function has {} coordinates, target has dimension {}",
            g.dim(),
            target.dim()
        )));
    }
    Ok(())
}

/// Distance from a point to the representative of its cell, as a multiple
/// of the Lipschitz constant, at mesh `h`.
fn reach(space: &CompactSpace, h: f64) -> f64 {
    match space {
        CompactSpace::UnitCube { dim } => h * (0.5 * (*dim as f64).sqrt()).max(1.0),
        CompactSpace::Finite { .. } => 0.0,
    }
}

/// Builds the simple approximations `g_h` along `schedule`, checks
/// pointwise convergence at every atom and mean convergence in every
/// seminorm level, and returns the integral at the finest mesh.
///
/// Certification needs both gap columns to end within tolerance and to be
/// no larger at the end than at the start.
pub fn integrate(
    space: &CompactSpace,
    g: &VectorFunction,
    mu: &FiniteMeasure,
    target: &TargetSpace,
    schedule: &[f64],
) -> Result<IntegralCertificate> {
    check_schedule(schedule)?;
    check_pair(space, g, mu, target)?;
    for atom in mu.atoms() {
        if !g.eval(space, &atom.point).is_finite() {
            return Err(domain(format!("function is not finite at atom {}", atom.point)));
        }
    }
    let depth = target.depth();
    let exact: Vec<(Vector, f64, &Point)> = mu
        .atoms()
        .iter()
        .map(|a| (g.eval(space, &a.point), a.weight, &a.point))
        .collect();

    let mut rows = Vec::with_capacity(schedule.len());
    for &h in schedule {
        let partition = partition_for(space, h)?;
        let sf = approximate_on_support(space, g, &partition, mu)?;
        let mut pointwise: f64 = 0.0;
        let mut mean_gaps = vec![0.0; depth];
        for (gx, w, p) in &exact {
            let diff = &sf.value_at(p)? - gx;
            pointwise = pointwise.max(diff.max_abs());
            for (n, m) in mean_gaps.iter_mut().enumerate() {
                *m += w * target.seminorm(n + 1, &diff);
            }
        }
        rows.push(ScheduleRow {
            h,
            pointwise_gap: pointwise,
            mean_gaps,
            value: integrate_simple(&sf, mu)?,
        });
    }

    let lip = g.piecewise_lipschitz_max(space);
    let r = reach(space, schedule[schedule.len() - 1]);
    let ones = Vector(vec![1.0; g.dim()]);
    let pointwise_tol = lip * r + 1e-12;
    let mass = mu.total_mass();
    let mean_tols: Vec<f64> = (1..=depth)
        .map(|n| lip * r * mass * target.seminorm(n, &ones).max(1.0) + 1e-12)
        .collect();

    let first = &rows[0];
    let last = &rows[rows.len() - 1];
    let within = last.pointwise_gap <= pointwise_tol
        && last.mean_gaps.iter().zip(&mean_tols).all(|(g, t)| g <= t);
    let trending = last.pointwise_gap <= first.pointwise_gap + 1e-12
        && last
            .mean_gaps
            .iter()
            .zip(&first.mean_gaps)
            .all(|(l, f)| *l <= f + 1e-12);
    Ok(IntegralCertificate {
        value: last.value.clone(),
        certified: within && trending,
        rows,
        pointwise_tol,
        mean_tols,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityReport {
    /// The finite range `g(atoms)`: `g` is separably valued off the null
    /// set `Ω ∖ atoms`.
    pub separable_range: Vec<Vector>,
    pub null_complement_atoms: usize,
    /// `∫ p_n(g) dμ` for each level.
    pub level_integrals: Vec<f64>,
    pub separable: bool,
    pub finite_levels: bool,
    pub integrable: bool,
}

/// Checks essential separability and finiteness of every `∫ p_n(g) dμ`.
pub fn integrability_report(
    space: &CompactSpace,
    g: &VectorFunction,
    mu: &FiniteMeasure,
    target: &TargetSpace,
) -> Result<IntegrabilityReport> {
    check_pair(space, g, mu, target)?;
    let mut range: Vec<Vector> = Vec::new();
    let mut level_integrals = vec![0.0; target.depth()];
    for atom in mu.atoms() {
        let v = g.eval(space, &atom.point);
        for (n, total) in level_integrals.iter_mut().enumerate() {
            *total += atom.weight * target.seminorm(n + 1, &v);
        }
        if !range.contains(&v) {
            range.push(v);
        }
    }
    let finite_levels = level_integrals.iter().all(|x| x.is_finite());
    Ok(IntegrabilityReport {
        null_complement_atoms: mu.atoms().len(),
        separable: true,
        finite_levels,
        integrable: finite_levels,
        separable_range: range,
        level_integrals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma7Failure {
    pub function: usize,
    pub measure: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma7Report {
    pub pairs_checked: usize,
    /// Battery indices skipped because the function is not continuous.
    pub excluded: Vec<usize>,
    pub failures: Vec<Lemma7Failure>,
    pub pass: bool,
}

/// Every continuous `g` against every `μ`: integrable and certified.
pub fn lemma7_harness(
    space: &CompactSpace,
    battery: &[VectorFunction],
    measures: &[FiniteMeasure],
    target: &TargetSpace,
    schedule: &[f64],
) -> Result<Lemma7Report> {
    let mut excluded = Vec::new();
    let mut failures = Vec::new();
    let mut pairs_checked = 0;
    for (gi, g) in battery.iter().enumerate() {
        if !g.is_continuous() {
            excluded.push(gi);
            continue;
        }
        for (mi, mu) in measures.iter().enumerate() {
            pairs_checked += 1;
            let fail = |reason: String| Lemma7Failure {
                function: gi,
                measure: mi,
                reason,
            };
            let report = integrability_report(space, g, mu, target)?;
            if !report.integrable {
                failures.push(fail("level integrals not finite".into()));
                continue;
            }
            match integrate(space, g, mu, target, schedule) {
                Ok(c) if c.certified => {}
                Ok(c) => failures.push(fail(format!(
                    "not certified: final pointwise gap {} vs tolerance {}",
                    c.rows.last().map_or(0.0, |r| r.pointwise_gap),
                    c.pointwise_tol
                ))),
                Err(e) => failures.push(fail(e.to_string())),
            }
        }
    }
    Ok(Lemma7Report {
        pairs_checked,
        pass: failures.is_empty(),
        excluded,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::carrier::grid_partition;
    use crate::function::ScalarFn;
    use crate::target::LpNorm;

    fn line() -> Arc<CompactSpace> {
        Arc::new(CompactSpace::unit_cube(1).unwrap())
    }

    fn two_atoms(s: &Arc<CompactSpace>) -> FiniteMeasure {
        FiniteMeasure::from_pairs(s, vec![(Point::at(0.2), 0.3), (Point::at(0.8), 0.7)]).unwrap()
    }

    fn scalar_target() -> TargetSpace {
        TargetSpace::banach(1, LpNorm::LInf).unwrap()
    }

    #[test]
    fn simple_integral_examples() {
        let s = line();
        let p = grid_partition(&s, 0.5).unwrap();
        let sf = SimpleFunction::dense(p.clone(), vec![Vector::from([1.0, 0.0]), Vector::from([0.0, 2.0])]).unwrap();
        let v = integrate_simple(&sf, &two_atoms(&s)).unwrap();
        assert!((v.0[0] - 0.3).abs() < 1e-15 && (v.0[1] - 1.4).abs() < 1e-15);
        let zero = SimpleFunction::dense(p, vec![Vector::zeros(2), Vector::zeros(2)]).unwrap();
        assert_eq!(integrate_simple(&zero, &two_atoms(&s)).unwrap(), Vector::zeros(2));
        assert_eq!(integrate_simple(&sf, &FiniteMeasure::zero(&s)).unwrap(), Vector::zeros(2));
    }

    #[test]
    fn oracle_examples() {
        let s = line();
        let g = VectorFunction::new(
            &s,
            vec![ScalarFn::coord(0), ScalarFn::product(vec![ScalarFn::coord(0), ScalarFn::coord(0)])],
        )
        .unwrap();
        let third = 1.0 / 3.0;
        let mu = FiniteMeasure::from_pairs(
            &s,
            vec![(Point::at(0.0), third), (Point::at(0.5), third), (Point::at(1.0), third)],
        )
        .unwrap();
        let v = atomic_oracle(&s, &g, &mu);
        // mean of {0, 0.5, 1} and of {0, 0.25, 1}
        assert!((v.0[0] - 0.5).abs() < 1e-12);
        assert!((v.0[1] - 1.25 / 3.0).abs() < 1e-12);
        let id = VectorFunction::scalar(&s, ScalarFn::coord(0)).unwrap();
        assert!((atomic_oracle(&s, &id, &two_atoms(&s)).0[0] - (0.3 * 0.2 + 0.7 * 0.8)).abs() < 1e-15);
        let c = VectorFunction::scalar(&s, ScalarFn::constant(2.0)).unwrap();
        assert!((atomic_oracle(&s, &c, &two_atoms(&s)).0[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn approximation_examples() {
        let s = line();
        let p = grid_partition(&s, 0.5).unwrap();
        let id = VectorFunction::scalar(&s, ScalarFn::coord(0)).unwrap();
        let sf = approximate_by_simple(&s, &id, &p).unwrap();
        assert_eq!(sf.cell_value(0).0, vec![0.25]);
        assert_eq!(sf.cell_value(1).0, vec![0.75]);
        let tent = VectorFunction::scalar(&s, ScalarFn::tent(Point::at(0.0), 1.0)).unwrap();
        let sf = approximate_by_simple(&s, &tent, &p).unwrap();
        assert_eq!((sf.cell_value(0).0[0], sf.cell_value(1).0[0]), (0.75, 0.25));
    }

    #[test]
    fn mean_gap_example() {
        let s = line();
        let id = VectorFunction::scalar(&s, ScalarFn::coord(0)).unwrap();
        let sf = approximate_by_simple(&s, &id, &grid_partition(&s, 0.5).unwrap()).unwrap();
        let mu = FiniteMeasure::dirac(&s, Point::at(0.2)).unwrap();
        let gap = seminorm_mean_gap(&s, &id, &sf, &mu, &scalar_target(), 1).unwrap();
        assert!((gap - 0.05).abs() < 1e-15);
    }

    fn tent_gaps(seed: u64) -> Vec<f64> {
        use rand::SeedableRng;
        let s = line();
        let tent = VectorFunction::scalar(&s, ScalarFn::tent(Point::at(0.5), 0.5)).unwrap();
        let mu = crate::suite::random_probability(&s, &mut rand_chacha::ChaCha8Rng::seed_from_u64(seed), 5);
        [1.0, 0.5, 0.25, 0.125]
            .iter()
            .map(|&h| {
                let sf = approximate_by_simple(&s, &tent, &grid_partition(&s, h).unwrap()).unwrap();
                let gap = seminorm_mean_gap(&s, &tent, &sf, &mu, &scalar_target(), 1).unwrap();
                // L = 2, so every atom is within L·h/2 of its cell value
                assert!(gap <= h + 1e-12);
                gap
            })
            .collect()
    }

    #[test]
    fn tent_gap_shrinks_under_refinement() {
        let gaps = tent_gaps(0);
        assert!(gaps.windows(2).all(|w| w[1] <= w[0] + 1e-12), "{gaps:?}");
    }

    #[test]
    fn tent_gap_can_rise_between_meshes() {
        // an atom can sit closer to a coarse center than to the finer one
        let gaps = tent_gaps(2);
        assert!(gaps[1] > gaps[0], "{gaps:?}");
    }

    #[test]
    fn integrate_identity() {
        let s = line();
        let id = VectorFunction::scalar(&s, ScalarFn::coord(0)).unwrap();
        let schedule = [0.5, 0.25, 0.125, 1.0 / 16.0, 1.0 / 32.0];
        let c = integrate(&s, &id, &two_atoms(&s), &scalar_target(), &schedule).unwrap();
        assert!(c.certified);
        assert!((c.value.0[0] - 0.62).abs() <= 1.0 / 32.0);
        assert_eq!(c.to_csv().lines().count(), 1 + schedule.len());
    }

    #[test]
    fn integrate_constant_is_exact() {
        let s = line();
        let g = VectorFunction::scalar(&s, ScalarFn::constant(3.0)).unwrap();
        let c = integrate(&s, &g, &two_atoms(&s), &scalar_target(), &default_schedule()).unwrap();
        assert!(c.certified);
        assert_eq!(c.rows[0].pointwise_gap, 0.0);
        assert!((c.value.0[0] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn step_on_atom_fails() {
        let s = line();
        let g = VectorFunction::scalar(&s, ScalarFn::step(0, 0.5, 0.0, 1.0)).unwrap();
        let mu = FiniteMeasure::dirac(&s, Point::at(0.5)).unwrap();
        let c = integrate(&s, &g, &mu, &scalar_target(), &default_schedule()).unwrap();
        assert!(!c.certified);
        assert!(c.rows.iter().all(|r| r.pointwise_gap == 0.5));
    }

    #[test]
    fn schedule_validation() {
        let s = line();
        let g = VectorFunction::scalar(&s, ScalarFn::coord(0)).unwrap();
        let mu = two_atoms(&s);
        let t = scalar_target();
        assert!(integrate(&s, &g, &mu, &t, &[0.5, 0.25]).is_err());
        assert!(integrate(&s, &g, &mu, &t, &[0.5, 0.5, 0.25]).is_err());
        assert!(integrate(&s, &g, &mu, &t, &[0.5, 0.25, -0.1]).is_err());
    }

    #[test]
    fn integrability_branches() {
        let s = line();
        let t = scalar_target();
        let g = VectorFunction::scalar(&s, ScalarFn::tent(Point::at(0.5), 0.5)).unwrap();
        assert!(integrability_report(&s, &g, &two_atoms(&s), &t).unwrap().integrable);
        let zero = integrability_report(&s, &g, &FiniteMeasure::zero(&s), &t).unwrap();
        assert!(zero.integrable && zero.level_integrals == vec![0.0]);
        let huge = VectorFunction::scalar(&s, ScalarFn::constant(1.0).scale(1e300).scale(1e300)).unwrap();
        let r = integrability_report(&s, &huge, &two_atoms(&s), &t).unwrap();
        assert!(!r.integrable && r.separable);
    }

    #[test]
    fn lemma7_examples() {
        let s = line();
        let t = scalar_target();
        let measures = [two_atoms(&s)];
        let empty = lemma7_harness(&s, &[], &measures, &t, &default_schedule()).unwrap();
        assert!(empty.pass && empty.pairs_checked == 0);
        let battery = [
            VectorFunction::scalar(&s, ScalarFn::tent(Point::at(0.0), 1.0)).unwrap(),
            VectorFunction::scalar(&s, ScalarFn::step(0, 0.8, 0.0, 1.0)).unwrap(),
        ];
        let r = lemma7_harness(&s, &battery, &measures, &t, &default_schedule()).unwrap();
        assert!(r.pass);
        assert_eq!(r.excluded, vec![1]);
        assert_eq!(r.pairs_checked, 1);
    }
}
