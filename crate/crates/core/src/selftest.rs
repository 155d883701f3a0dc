//! The bundled invariant and scenario suites behind `weakconv selftest`.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::carrier::{metric_axioms_report, CompactSpace, Point};
use crate::convergence::{generate_battery, theorem_equivalence_report, BatterySpec, DEFAULT_TOL};
use crate::error::Result;
use crate::function::VectorFunction;
use crate::integral::{atomic_oracle, default_schedule, integrate, lemma7_harness};
use crate::measure::{bl_distance, scenario, tightness_witness, FiniteMeasure};
use crate::suite::{
    bundled_measures, default_targets, labeled_vector_sequences, random_probability, random_vector_function,
    scenario_suite, Expected,
};
use crate::target::{
    base_criterion_report, lemma2_equivalence_report, paranorm_axioms_report, LpNorm, SampleSpec, TargetSpace,
    Vector,
};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub passed: usize,
    pub total: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        SuiteResult {
            name,
            passed: 0,
            total: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else {
            self.failures.push(what());
        }
    }

    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub seed: u64,
    pub suites: Vec<SuiteResult>,
    /// One row per bundled scenario: name, label, oracle and battery statuses.
    pub scenario_table: Vec<String>,
    pub elapsed: Duration,
}

impl SelftestReport {
    pub fn pass(&self) -> bool {
        self.suites.iter().all(SuiteResult::pass)
    }

    /// The deterministic part of the report; excludes the wall clock.
    pub fn render(&self) -> String {
        let mut out = String::new();
        writeln!(out, "selftest seed={} version={}", self.seed, env!("CARGO_PKG_VERSION")).unwrap();
        for s in &self.suites {
            let mark = if s.pass() { "pass" } else { "FAIL" };
            writeln!(out, "suite {:<12} {}/{} {mark}", s.name, s.passed, s.total).unwrap();
            for f in &s.failures {
                writeln!(out, "  failure: {f}").unwrap();
            }
        }
        writeln!(out, "scenario agreement table:").unwrap();
        for row in &self.scenario_table {
            writeln!(out, "  {row}").unwrap();
        }
        writeln!(out, "overall {}", if self.pass() { "pass" } else { "FAIL" }).unwrap();
        out
    }
}

fn metric_suite(seed: u64) -> SuiteResult {
    let mut s = SuiteResult::new("metric");
    let finite = CompactSpace::finite(
        vec!["a".into(), "b".into(), "c".into()],
        vec![vec![0.0, 0.3, 0.5], vec![0.3, 0.0, 0.4], vec![0.5, 0.4, 0.0]],
    );
    s.check(
        finite.as_ref().is_ok_and(|f| metric_axioms_report(f, &[]).is_clean()),
        || "three-point metric rejected".into(),
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for dim in [1, 2, 3] {
        let cube = CompactSpace::unit_cube(dim).expect("positive dimension");
        let triples: Vec<(Point, Point, Point)> = (0..10_000)
            .map(|_| {
                (
                    cube.random_point(&mut rng),
                    cube.random_point(&mut rng),
                    cube.random_point(&mut rng),
                )
            })
            .collect();
        let report = metric_axioms_report(&cube, &triples);
        s.check(report.is_clean(), || format!("unit_cube({dim}): {:?}", report.violations.first()));
    }
    s
}

fn bl_suite(seed: u64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("bl_oracle");
    let line = Arc::new(CompactSpace::unit_cube(1)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xb1);
    for t in 0..200 {
        let m: Vec<FiniteMeasure> = (0..3).map(|_| random_probability(&line, &mut rng, 10)).collect();
        let d01 = bl_distance(&m[0], &m[1])?;
        let d10 = bl_distance(&m[1], &m[0])?;
        let d12 = bl_distance(&m[1], &m[2])?;
        let d02 = bl_distance(&m[0], &m[2])?;
        let d00 = bl_distance(&m[0], &m[0])?;
        let feasible = d01.witness.iter().all(|(_, f)| f.abs() <= 1.0 + 1e-9)
            && d01.witness.iter().all(|(a, fa)| {
                d01.witness
                    .iter()
                    .all(|(b, fb)| (fa - fb).abs() <= line.distance_unchecked(a, b) + 1e-9)
            })
            && (d01.witness_gap(&m[0], &m[1]) - d01.value).abs() <= 1e-9;
        s.check(
            (d01.value - d10.value).abs() <= 1e-9
                && d00.value <= 1e-9
                && d02.value <= d01.value + d12.value + 1e-9
                && feasible,
            || format!("triple {t}: d01={} d10={} d02={} d12={}", d01.value, d10.value, d02.value, d12.value),
        );
    }
    for t in 0..100 {
        let (x, y) = (rng.random::<f64>(), rng.random::<f64>());
        let d = bl_distance(
            &FiniteMeasure::dirac(&line, Point::at(x))?,
            &FiniteMeasure::dirac(&line, Point::at(y))?,
        )?;
        let expect = (x - y).abs().min(2.0);
        s.check((d.value - expect).abs() <= 1e-9, || {
            format!("dirac pair {t}: {} vs {expect}", d.value)
        });
    }
    Ok(s)
}

fn instances() -> Vec<TargetSpace> {
    vec![
        TargetSpace::banach(3, LpNorm::L1).expect("valid"),
        TargetSpace::banach(3, LpNorm::L2).expect("valid"),
        TargetSpace::banach(3, LpNorm::LInf).expect("valid"),
        TargetSpace::omega(4).expect("valid"),
        TargetSpace::cumulative_l1(4).expect("valid"),
    ]
}

fn paranorm_suite(seed: u64) -> SuiteResult {
    let mut s = SuiteResult::new("paranorm");
    for t in instances() {
        let r = paranorm_axioms_report(&t, SampleSpec::new(1000, seed));
        s.check(r.is_clean(), || format!("{}: {} violations", t.label(), r.violation_count));
    }
    let omega = TargetSpace::omega(4).expect("valid");
    let unit = Vector::unit(4, 0);
    s.check(omega.paranorm(&unit) == 0.5, || "all-ones seminorm vector".into());
    for (i, seq) in labeled_vector_sequences(4, 50, 64, seed).iter().enumerate() {
        let v = lemma2_equivalence_report(&omega, &seq.terms, &seq.limit, seq.hint);
        s.check(v.agree && v.paranorm_convergent == seq.converges, || {
            format!("sequence {i}: paranorm {} seminorm {}", v.paranorm_convergent, v.seminorm_convergent)
        });
    }
    s
}

fn schauder_suite(seed: u64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("schauder");
    let skew = TargetSpace::banach(3, LpNorm::L2)?.with_base(vec![
        Vector::from([1.0, 0.0, 0.0]),
        Vector::from([1.0, 1.0, 0.0]),
        Vector::from([0.5, -1.0, 2.0]),
    ])?;
    let base = skew.base().expect("attached");
    let mut worst: f64 = 0.0;
    for (j, v) in base.vectors().iter().enumerate() {
        for i in 1..=3 {
            let expect = if i == j + 1 { 1.0 } else { 0.0 };
            worst = worst.max((skew.coordinate_functional(i, v)? - expect).abs());
        }
    }
    s.check(worst <= 1e-12, || format!("biorthogonality residual {worst:e}"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5c);
    let mut residual: f64 = 0.0;
    for _ in 0..1000 {
        let x = Vector((0..3).map(|_| rng.random_range(-10.0..10.0)).collect());
        let alpha = skew.expand(&x)?;
        residual = residual.max((&skew.partial_sum(&alpha, 3)? - &x).max_abs());
    }
    s.check(residual <= 1e-10, || format!("reconstruction residual {residual:e}"));
    let omega = TargetSpace::omega(4)?.with_coordinate_base();
    let depth = omega.depth();
    let good = base_criterion_report(&omega, 1.0, depth, depth, SampleSpec::new(1000, seed))?;
    s.check(good.pass, || format!("coordinate base ratio {}", good.worst_ratio));
    let tilted = TargetSpace::banach(2, LpNorm::L2)?.with_base(vec![Vector::from([1.0, 0.0]), Vector::from([1.0, 0.1])])?;
    let bad = base_criterion_report(&tilted, 1.0, 1, 1, SampleSpec::new(1000, seed))?;
    s.check(!bad.pass && bad.worst_ratio >= 9.9, || format!("tilted base ratio {}", bad.worst_ratio));
    Ok(s)
}

fn integral_suite(seed: u64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("integral");
    let schedule = default_schedule();
    let h_final = schedule[schedule.len() - 1];
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1a);
    for t in 0..100 {
        let space = Arc::new(CompactSpace::unit_cube(1 + t % 2)?);
        let d = 1 + (t / 2) % 2;
        let g = random_vector_function(&space, d, &mut rng);
        let mu = random_probability(&space, &mut rng, 6);
        let target = TargetSpace::banach(d, LpNorm::L2)?;
        let cert = integrate(&space, &g, &mu, &target, &schedule)?;
        let oracle = atomic_oracle(&space, &g, &mu);
        let bound = d as f64 * g.lipschitz_max() * h_final;
        let off = (&cert.value - &oracle).max_abs();
        s.check(cert.certified && off <= bound, || {
            format!("pair {t}: certified={} |value − oracle|={off:e} bound={bound:e}", cert.certified)
        });
    }
    Ok(s)
}

fn lemma7_suite(seed: u64) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("lemma7");
    for dim in [1, 2] {
        let space = Arc::new(CompactSpace::unit_cube(dim)?);
        let battery = generate_battery(&space, None, &BatterySpec::default(), seed)?;
        let members: Vec<VectorFunction> = battery.members().iter().map(|m| m.g.clone()).collect();
        let target = TargetSpace::banach(1, LpNorm::LInf)?;
        let r = lemma7_harness(&space, &members, &bundled_measures(&space), &target, &default_schedule())?;
        s.check(r.pass && r.excluded.is_empty(), || format!("unit_cube({dim}): {:?}", r.failures.first()));
    }
    let line = Arc::new(CompactSpace::unit_cube(1)?);
    let huge = VectorFunction::scalar(&line, crate::function::ScalarFn::constant(1.0).scale(1e300).scale(1e300))?;
    let target = TargetSpace::banach(1, LpNorm::LInf)?;
    let r = crate::integral::integrability_report(&line, &huge, &bundled_measures(&line)[0], &target)?;
    s.check(!r.integrable, || "overflowing function reported integrable".into());
    Ok(s)
}

fn tightness_suite() -> Result<SuiteResult> {
    let mut s = SuiteResult::new("tightness");
    let line = Arc::new(CompactSpace::unit_cube(1)?);
    let family: Vec<FiniteMeasure> = (1..=10)
        .map(|n| FiniteMeasure::from_pairs(&line, vec![(Point::at(0.5), 0.95), (Point::at(n as f64 / 11.0), 0.05)]))
        .collect::<Result<_>>()?;
    let w = tightness_witness(&family, 0.05)?;
    s.check(
        w.radius == 0.0
            && w.center == Some(Point::at(0.5))
            && w.complement_masses.iter().all(|c| *c <= 0.05 + 1e-12),
        || format!("radius {} centre {:?}", w.radius, w.center),
    );
    Ok(s)
}

fn scenario_suite_run(seed: u64, table: &mut Vec<String>) -> Result<SuiteResult> {
    let mut s = SuiteResult::new("scenarios");
    let targets = default_targets();
    for sc in scenario_suite() {
        let fam = scenario(&sc.space, sc.spec.clone(), seed)?;
        let r = theorem_equivalence_report(&fam, &targets, &BatterySpec::default(), 64, DEFAULT_TOL, seed)?;
        let label_ok = match sc.expected {
            Expected::Converges => r.oracle.status == crate::convergence::Status::ConvergentEvidence,
            Expected::Diverges => r.oracle.status == crate::convergence::Status::Divergent,
        };
        let vec_status: Vec<&str> = r.targets.iter().map(|t| t.verdict.status.as_str()).collect();
        table.push(format!(
            "{:<22} label={:<9} oracle={:<19} scalar={:<19} vector={} agree={}",
            sc.name,
            r.label,
            r.oracle.status.as_str(),
            r.scalar.status.as_str(),
            vec_status.join(","),
            r.agree
        ));
        s.check(r.agree && label_ok, || format!("{} disagrees", sc.name));
    }
    Ok(s)
}

/// Runs every suite with `seed`.
pub fn run(seed: u64) -> Result<SelftestReport> {
    let start = Instant::now();
    let mut table = Vec::new();
    let suites = vec![
        metric_suite(seed),
        bl_suite(seed)?,
        paranorm_suite(seed),
        schauder_suite(seed)?,
        integral_suite(seed)?,
        lemma7_suite(seed)?,
        tightness_suite()?,
        scenario_suite_run(seed, &mut table)?,
    ];
    Ok(SelftestReport {
        seed,
        suites,
        scenario_table: table,
        elapsed: start.elapsed(),
    })
}
