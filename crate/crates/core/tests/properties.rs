//! Invariants checked on generated inputs.

use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use weakconv::carrier::grid_partition;
use weakconv::convergence::{generate_battery, BatterySpec};
use weakconv::function::ScalarFn;
use weakconv::integral::{atomic_oracle, integrate_simple, SimpleFunction};
use weakconv::measure::{scenario, ScenarioSpec};
use weakconv::target::LpNorm;
use weakconv::{
    bl_distance, CompactSpace, FiniteMeasure, MeasurableSet, Point, TargetSpace, Vector, VectorFunction,
};

fn line() -> Arc<CompactSpace> {
    Arc::new(CompactSpace::unit_cube(1).unwrap())
}

fn square() -> Arc<CompactSpace> {
    Arc::new(CompactSpace::unit_cube(2).unwrap())
}

fn atoms_1d(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0..=1.0f64, 0.05..1.0f64), 1..=max)
}

fn atoms_2d(max: usize) -> impl Strategy<Value = Vec<((f64, f64), f64)>> {
    prop::collection::vec(((0.0..=1.0f64, 0.0..=1.0f64), 0.05..1.0f64), 1..=max)
}

fn probability_1d(s: &Arc<CompactSpace>, atoms: &[(f64, f64)]) -> FiniteMeasure {
    let pairs = atoms.iter().map(|&(x, w)| (Point::at(x), w)).collect();
    FiniteMeasure::from_pairs(s, pairs).unwrap().normalize().unwrap()
}

fn measure_2d(s: &Arc<CompactSpace>, atoms: &[((f64, f64), f64)]) -> FiniteMeasure {
    let pairs = atoms.iter().map(|&((x, y), w)| (Point::coords(vec![x, y]), w)).collect();
    FiniteMeasure::from_pairs(s, pairs).unwrap()
}

/// Exhaustive search over dual values on the lattice `{−1, −1+s, …, 1}`.
/// With supports on the same lattice the LP optimum is a lattice point, so
/// the search is exact.
fn lattice_bl(mu: &FiniteMeasure, nu: &FiniteMeasure, step: f64) -> f64 {
    let mut support: Vec<f64> = mu
        .atoms()
        .iter()
        .chain(nu.atoms())
        .map(|a| a.point.as_coords().unwrap()[0])
        .collect();
    support.sort_by(f64::total_cmp);
    support.dedup();
    let diff: Vec<f64> = support
        .iter()
        .map(|&x| mu.weight_at(&Point::at(x)) - nu.weight_at(&Point::at(x)))
        .collect();
    let levels = (2.0 / step).round() as i64;
    let mut best = f64::NEG_INFINITY;
    let mut f = vec![0i64; support.len()];
    fn walk(
        k: usize,
        f: &mut Vec<i64>,
        support: &[f64],
        diff: &[f64],
        levels: i64,
        step: f64,
        best: &mut f64,
    ) {
        if k == support.len() {
            let v: f64 = f.iter().zip(diff).map(|(&i, d)| (-1.0 + i as f64 * step) * d).sum();
            *best = best.max(v);
            return;
        }
        for i in 0..=levels {
            let ok = (0..k).all(|j| ((i - f[j]) as f64 * step).abs() <= (support[k] - support[j]).abs() + 1e-12);
            if ok {
                f[k] = i;
                walk(k + 1, f, support, diff, levels, step, best);
            }
        }
    }
    walk(0, &mut f, &support, &diff, levels, step, &mut best);
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_cells_add_up(atoms in atoms_2d(8), h in prop::sample::select(vec![1.0, 0.5, 0.25, 0.125, 0.3])) {
        let s = square();
        let mu = measure_2d(&s, &atoms);
        let p = grid_partition(&s, h).unwrap();
        let total: f64 = (0..p.len()).map(|i| mu.measure_of(&p.cell(i))).sum();
        prop_assert!((total - mu.total_mass()).abs() <= 1e-12);
        prop_assert!((mu.measure_of(&MeasurableSet::All) - mu.total_mass()).abs() <= 1e-12);
        prop_assert_eq!(mu.measure_of(&MeasurableSet::Empty), 0.0);
    }

    #[test]
    fn bl_is_a_metric(a in atoms_1d(5), b in atoms_1d(5), c in atoms_1d(5)) {
        let s = line();
        let (mu, nu, xi) = (probability_1d(&s, &a), probability_1d(&s, &b), probability_1d(&s, &c));
        let d = |x: &FiniteMeasure, y: &FiniteMeasure| bl_distance(x, y).unwrap().value;
        prop_assert!(d(&mu, &mu) <= 1e-9);
        prop_assert!((d(&mu, &nu) - d(&nu, &mu)).abs() <= 1e-9);
        prop_assert!(d(&mu, &xi) <= d(&mu, &nu) + d(&nu, &xi) + 1e-9);
        prop_assert!((0.0..=2.0 + 1e-12).contains(&d(&mu, &nu)));
    }

    #[test]
    fn dirac_pairs_have_closed_form(x in 0.0..=1.0f64, y in 0.0..=1.0f64) {
        let s = line();
        let d = bl_distance(
            &FiniteMeasure::dirac(&s, Point::at(x)).unwrap(),
            &FiniteMeasure::dirac(&s, Point::at(y)).unwrap(),
        ).unwrap();
        prop_assert!((d.value - (x - y).abs().min(2.0)).abs() <= 1e-9);
    }

    #[test]
    fn dirac_pairs_on_a_wide_finite_space(r in 0.0..6.0f64) {
        let s = Arc::new(CompactSpace::finite(
            vec!["p".into(), "q".into()],
            vec![vec![0.0, r.max(1e-3)], vec![r.max(1e-3), 0.0]],
        ).unwrap());
        let d = bl_distance(
            &FiniteMeasure::dirac(&s, Point::Index(0)).unwrap(),
            &FiniteMeasure::dirac(&s, Point::Index(1)).unwrap(),
        ).unwrap();
        prop_assert!((d.value - r.clamp(1e-3, 2.0)).abs() <= 1e-9);
    }

    #[test]
    fn lp_matches_lattice_search(
        a in prop::collection::vec((0u8..=4, 1u8..=4), 1..=2),
        b in prop::collection::vec((0u8..=4, 1u8..=4), 1..=2),
    ) {
        let s = line();
        let build = |v: &[(u8, u8)]| {
            let pairs = v.iter().map(|&(i, w)| (Point::at(i as f64 * 0.25), w as f64)).collect();
            FiniteMeasure::from_pairs(&s, pairs).unwrap().normalize().unwrap()
        };
        let (mu, nu) = (build(&a), build(&b));
        let lp = bl_distance(&mu, &nu).unwrap().value;
        let brute = lattice_bl(&mu, &nu, 0.25);
        prop_assert!((lp - brute).abs() <= 1e-9, "lp {} lattice {}", lp, brute);
    }

    #[test]
    fn normalize_is_idempotent(atoms in atoms_2d(6)) {
        let s = square();
        let once = measure_2d(&s, &atoms).normalize().unwrap();
        let twice = once.normalize().unwrap();
        prop_assert!(once.is_probability());
        for (x, y) in once.atoms().iter().zip(twice.atoms()) {
            prop_assert_eq!(&x.point, &y.point);
            prop_assert!((x.weight - y.weight).abs() <= 1e-15);
        }
    }

    #[test]
    fn simple_integral_is_bilinear(
        vals in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 4),
        other in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 4),
        (alpha, beta) in (-3.0..3.0f64, -3.0..3.0f64),
        a in atoms_1d(5),
        b in atoms_1d(5),
    ) {
        let s = line();
        let p = grid_partition(&s, 0.25).unwrap();
        let to_sf = |v: &[(f64, f64)]| {
            SimpleFunction::dense(p.clone(), v.iter().map(|&(x, y)| Vector(vec![x, y])).collect()).unwrap()
        };
        let (f, g) = (to_sf(&vals), to_sf(&other));
        let mu = probability_1d(&s, &a);
        let nu = probability_1d(&s, &b);
        let comb = integrate_simple(&f.combine(alpha, &g, beta).unwrap(), &mu).unwrap();
        let expect = &integrate_simple(&f, &mu).unwrap().scaled(alpha) + &integrate_simple(&g, &mu).unwrap().scaled(beta);
        prop_assert!((&comb - &expect).max_abs() <= 1e-12);
        let sum = integrate_simple(&f, &mu.plus(&nu).unwrap()).unwrap();
        let parts = &integrate_simple(&f, &mu).unwrap() + &integrate_simple(&f, &nu).unwrap();
        prop_assert!((&sum - &parts).max_abs() <= 1e-12);
    }

    #[test]
    fn sparse_and_dense_agree(vals in prop::collection::vec(-5.0..5.0f64, 4), a in atoms_1d(6)) {
        let s = line();
        let p = grid_partition(&s, 0.25).unwrap();
        let dense = SimpleFunction::dense(p.clone(), vals.iter().map(|&v| Vector(vec![v])).collect()).unwrap();
        let sparse_vals: BTreeMap<usize, Vector> = vals
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, &v)| (i, Vector(vec![v])))
            .collect();
        let sparse = SimpleFunction::sparse(p, 1, sparse_vals).unwrap();
        let mu = probability_1d(&s, &a);
        prop_assert_eq!(integrate_simple(&dense, &mu).unwrap(), integrate_simple(&sparse, &mu).unwrap());
    }

    #[test]
    fn norm_of_integral_is_at_most_integral_of_norm(seed in any::<u64>(), a in atoms_2d(5)) {
        let s = square();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = weakconv::suite::random_vector_function(&s, 3, &mut rng);
        let mu = measure_2d(&s, &a).normalize().unwrap();
        for norm in [LpNorm::L1, LpNorm::L2, LpNorm::LInf] {
            let t = TargetSpace::banach(3, norm).unwrap();
            let lhs = t.seminorm(1, &atomic_oracle(&s, &g, &mu));
            let rhs: f64 = mu.atoms().iter().map(|at| at.weight * t.seminorm(1, &g.eval(&s, &at.point))).sum();
            prop_assert!(lhs <= rhs + 1e-12);
        }
    }

    #[test]
    fn integral_gap_is_bounded_by_bl(seed in any::<u64>(), a in atoms_1d(4), b in atoms_1d(4)) {
        let s = line();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = weakconv::suite::random_scalar_fn(&s, &mut rng);
        let g = VectorFunction::scalar(&s, f).unwrap();
        let meta = &g.metadata()[0];
        let (mu, nu) = (probability_1d(&s, &a), probability_1d(&s, &b));
        let gap = (atomic_oracle(&s, &g, &mu).0[0] - atomic_oracle(&s, &g, &nu).0[0]).abs();
        let bl = bl_distance(&mu, &nu).unwrap().value;
        prop_assert!(gap <= meta.bound.max(meta.lipschitz) * bl + 1e-9, "gap {} bl {}", gap, bl);
    }

    #[test]
    fn seeded_generators_are_deterministic(seed in any::<u64>()) {
        let s = line();
        let spec = ScenarioSpec::Empirical {
            law: FiniteMeasure::from_pairs(&s, vec![(Point::at(0.1), 0.5), (Point::at(0.9), 0.5)]).unwrap().to_spec(),
        };
        let a = scenario(&s, spec.clone(), seed).unwrap().prefix(12).unwrap();
        let b = scenario(&s, spec, seed).unwrap().prefix(12).unwrap();
        prop_assert_eq!(a, b);
        let target = TargetSpace::omega(3).unwrap().with_coordinate_base();
        let x = generate_battery(&s, Some(&target), &BatterySpec::default(), seed).unwrap();
        let y = generate_battery(&s, Some(&target), &BatterySpec::default(), seed).unwrap();
        let ids = |bat: &weakconv::convergence::Battery| bat.members().iter().map(|m| m.g.to_spec()).collect::<Vec<_>>();
        prop_assert_eq!(ids(&x), ids(&y));
    }
}

#[test]
fn partitions_cover_every_point_exactly_once() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (dim, h) in [(1, 0.1), (2, 0.25), (3, 0.5), (2, 0.3)] {
        let s = CompactSpace::unit_cube(dim).unwrap();
        let p = grid_partition(&s, h).unwrap();
        for i in 0..p.len() {
            assert!(p.cell(i).contains(&s, &p.representative(i)));
        }
        let mut probes: Vec<Point> = (0..100_000)
            .map(|_| Point::coords((0..dim).map(|_| rng.random::<f64>()).collect::<Vec<_>>()))
            .collect();
        probes.push(Point::coords(vec![1.0; dim]));
        probes.push(Point::coords(vec![0.0; dim]));
        for x in &probes {
            let hits = (0..p.len()).filter(|&i| p.cell(i).contains(&s, x)).count();
            assert_eq!(hits, 1, "{x} in {hits} cells (dim {dim}, h {h})");
            assert!(p.cell(p.locate(x).unwrap()).contains(&s, x));
        }
    }
}

#[test]
fn step_function_is_the_only_discontinuous_shape() {
    let s = line();
    let step = ScalarFn::Step { axis: 0, threshold: 0.5, below: 0.0, above: 1.0 };
    assert!(!step.is_continuous());
    assert!(ScalarFn::tent(Point::at(0.5), 0.2).is_continuous());
    assert_eq!(step.eval(&s, &Point::at(0.5)), 0.5);
}
