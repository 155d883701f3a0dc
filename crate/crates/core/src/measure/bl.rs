//! Bounded-Lipschitz distance between atomic probability measures.

use serde::{Deserialize, Serialize};

use super::FiniteMeasure;
use crate::carrier::Point;
use crate::error::{domain, Error, Result};
use crate::simplex::LinearProgram;

/// Largest union support accepted by [`bl_distance`].
pub const MAX_BL_SUPPORT: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlDiagnostics {
    pub support: usize,
    pub constraints: usize,
    pub pivots: usize,
    /// Objective value reported by the solver, before witness clean-up.
    pub lp_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlResult {
    pub value: f64,
    /// Optimal test function on the union support: `|f| ≤ 1`, 1-Lipschitz.
    pub witness: Vec<(Point, f64)>,
    pub diagnostics: BlDiagnostics,
}

impl BlResult {
    /// `∫f dμ − ∫f dν` for the stored witness.
    pub fn witness_gap(&self, mu: &FiniteMeasure, nu: &FiniteMeasure) -> f64 {
        self.witness
            .iter()
            .map(|(p, f)| f * (mu.weight_at(p) - nu.weight_at(p)))
            .sum()
    }
}

/// `sup { ∫f dμ − ∫f dν : |f| ≤ 1, Lip(f) ≤ 1 }`.
///
/// Only values on the union support matter, and any feasible assignment
/// there extends to the whole carrier, so the supremum is a finite LP in the
/// shifted variables `g = f + 1 ∈ [0, 2]`. Lipschitz rows are emitted only for
/// pairs closer than 2; farther pairs are implied by the box.
pub fn bl_distance(mu: &FiniteMeasure, nu: &FiniteMeasure) -> Result<BlResult> {
    mu.same_carrier(nu)?;
    for (name, m) in [("first", mu), ("second", nu)] {
        if !m.is_probability() {
            return Err(domain(format!(
                "{name} measure has total mass {}; normalize first",
                m.total_mass()
            )));
        }
    }
    let space = mu.space();

    let mut support: Vec<Point> = Vec::new();
    for a in mu.atoms().iter().chain(nu.atoms()) {
        if !support.contains(&a.point) {
            support.push(a.point.clone());
        }
    }
    let m = support.len();
    if m > MAX_BL_SUPPORT {
        return Err(Error::Capacity {
            what: "union support",
            actual: m,
            limit: MAX_BL_SUPPORT,
        });
    }
    let diff: Vec<f64> = support
        .iter()
        .map(|p| mu.weight_at(p) - nu.weight_at(p))
        .collect();

    let mut lp = LinearProgram::new(diff.clone());
    for i in 0..m {
        let mut row = vec![0.0; m];
        row[i] = 1.0;
        lp.add_le(row, 2.0);
    }
    for i in 0..m {
        for j in 0..m {
            if i == j {
                continue;
            }
            let r = space.distance_unchecked(&support[i], &support[j]);
            if r < 2.0 {
                let mut row = vec![0.0; m];
                row[i] = 1.0;
                row[j] = -1.0;
                lp.add_le(row, r);
            }
        }
    }
    let solution = lp.solve()?;
    let constraints = lp.num_constraints();

    let mut f: Vec<f64> = solution.x.iter().map(|g| (g - 1.0).clamp(-1.0, 1.0)).collect();
    if let (Some(lo), Some(hi)) = (
        f.iter().copied().reduce(f64::min),
        f.iter().copied().reduce(f64::max),
    ) {
        // centering keeps both constraints and, for equal masses, the objective
        let mid = 0.5 * (lo + hi);
        for v in &mut f {
            *v -= mid;
        }
    }
    let value = f
        .iter()
        .zip(&diff)
        .map(|(v, d)| v * d)
        .sum::<f64>()
        .max(0.0);
    Ok(BlResult {
        value,
        witness: support.into_iter().zip(f).collect(),
        diagnostics: BlDiagnostics {
            support: m,
            constraints,
            pivots: solution.pivots,
            lp_value: solution.value - diff.iter().sum::<f64>(),
        },
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::carrier::CompactSpace;

    fn line() -> Arc<CompactSpace> {
        Arc::new(CompactSpace::unit_cube(1).unwrap())
    }

    fn dirac(x: f64) -> FiniteMeasure {
        FiniteMeasure::dirac(&line(), Point::at(x)).unwrap()
    }

    /// Brute force over a grid of f-values on two atoms.
    fn grid_two_point(mu: [f64; 2], nu: [f64; 2], rho: f64) -> f64 {
        let steps = 400;
        let mut best = f64::NEG_INFINITY;
        for i in 0..=steps {
            for j in 0..=steps {
                let a = -1.0 + 2.0 * i as f64 / steps as f64;
                let b = -1.0 + 2.0 * j as f64 / steps as f64;
                if (a - b).abs() <= rho + 1e-15 {
                    best = best.max(a * (mu[0] - nu[0]) + b * (mu[1] - nu[1]));
                }
            }
        }
        best
    }

    #[test]
    fn identical_measures() {
        let mu = FiniteMeasure::from_pairs(&line(), vec![(Point::at(0.1), 0.4), (Point::at(0.7), 0.6)]).unwrap();
        let r = bl_distance(&mu, &mu).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.witness.iter().all(|(_, f)| *f == 0.0));
    }

    #[test]
    fn dirac_pair() {
        let r = bl_distance(&dirac(0.25), &dirac(0.0)).unwrap();
        let oracle = grid_two_point([1.0, 0.0], [0.0, 1.0], 0.25);
        assert!((oracle - 0.25).abs() < 1e-12);
        assert!((r.value - 0.25).abs() < 1e-9);
        assert!((r.witness_gap(&dirac(0.25), &dirac(0.0)) - r.value).abs() < 1e-12);
    }

    #[test]
    fn half_split() {
        let nu = FiniteMeasure::from_pairs(&line(), vec![(Point::at(0.0), 0.5), (Point::at(1.0), 0.5)]).unwrap();
        // vertices of {|a|,|b| ≤ 1, |a−b| ≤ 1} with objective 0.5a − 0.5b
        let vertices = [(1.0, 0.0), (0.0, -1.0), (1.0, 1.0), (-1.0, -1.0), (-1.0, 0.0), (0.0, 1.0)];
        let oracle = vertices
            .iter()
            .map(|(a, b)| 0.5 * a - 0.5 * b)
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(oracle, 0.5);
        let r = bl_distance(&dirac(0.0), &nu).unwrap();
        assert!((r.value - oracle).abs() < 1e-9);
    }

    #[test]
    fn far_points_cap_at_two() {
        let space = Arc::new(
            CompactSpace::finite(
                vec!["a".into(), "b".into()],
                vec![vec![0.0, 5.0], vec![5.0, 0.0]],
            )
            .unwrap(),
        );
        let a = FiniteMeasure::dirac(&space, Point::Index(0)).unwrap();
        let b = FiniteMeasure::dirac(&space, Point::Index(1)).unwrap();
        assert!((bl_distance(&a, &b).unwrap().value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_probability_and_large_supports() {
        let half = dirac(0.5).scaled(0.5);
        assert!(matches!(bl_distance(&half, &dirac(0.5)), Err(Error::Domain(_))));
        let n = MAX_BL_SUPPORT + 1;
        let wide = FiniteMeasure::from_pairs(
            &line(),
            (0..n).map(|i| (Point::at(i as f64 / n as f64), 1.0 / n as f64)).collect(),
        )
        .unwrap()
        .normalize()
        .unwrap();
        assert!(matches!(
            bl_distance(&wide, &dirac(0.5)),
            Err(Error::Capacity { .. })
        ));
    }
}
