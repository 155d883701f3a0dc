use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::carrier::{CompactSpace, Point};
use crate::error::{Error, Result};
use crate::function::{ScalarFn, VectorFunction};
use crate::target::{LpNorm, TargetSpace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TentSpec {
    pub center: Point,
    pub radius: f64,
}

/// What to put in a battery. Every generated member has `B ≤ 1`, `L ≤ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatterySpec {
    /// Radius-1 tents at the two extreme points (the all-zeros and all-ones
    /// corners of a cube; the first and last points of a finite space).
    pub corner_tents: bool,
    pub tents: Vec<TentSpec>,
    /// Radius-1 tents at seeded random centres.
    pub random_tents: usize,
    /// `ρ(·, a)` clamped to `[−1, 1]` for seeded random anchors `a`.
    pub distances: usize,
    /// Clamped McShane forms through seeded random anchors with values in
    /// `[−1, 1]` and slope 1.
    pub mcshane: usize,
    pub mcshane_anchors: usize,
    pub scalar: bool,
    /// Lift the scalar members through the target base.
    pub vector: bool,
}

impl Default for BatterySpec {
    fn default() -> Self {
        BatterySpec {
            corner_tents: true,
            tents: Vec::new(),
            random_tents: 4,
            distances: 2,
            mcshane: 2,
            mcshane_anchors: 3,
            scalar: true,
            vector: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberKind {
    Scalar,
    Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub id: String,
    pub kind: MemberKind,
    pub g: VectorFunction,
}

/// A finite list of bounded Lipschitz test functions. Scalar members are
/// compared in absolute value; vector members in the gap functional of the
/// battery's target.
#[derive(Debug, Clone, PartialEq)]
pub struct Battery {
    members: Vec<Member>,
    target: Option<TargetSpace>,
    line: TargetSpace,
}

impl Battery {
    pub fn new(target: Option<TargetSpace>) -> Self {
        Battery {
            members: Vec::new(),
            target,
            line: scalar_line(),
        }
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn target(&self) -> Option<&TargetSpace> {
        self.target.as_ref()
    }

    pub fn member(&self, id: &str) -> Option<&Member> {
        self.members.iter().find(|m| m.id == id)
    }

    /// Where gaps of `kind` members are measured.
    pub fn gap_space(&self, kind: MemberKind) -> &TargetSpace {
        match kind {
            MemberKind::Scalar => &self.line,
            MemberKind::Vector => self.target.as_ref().unwrap_or(&self.line),
        }
    }

    pub fn push_scalar(&mut self, space: &CompactSpace, id: impl Into<String>, f: ScalarFn) -> Result<()> {
        self.members.push(Member {
            id: id.into(),
            kind: MemberKind::Scalar,
            g: VectorFunction::scalar(space, f)?,
        });
        Ok(())
    }

    pub fn push_vector(&mut self, id: impl Into<String>, g: VectorFunction) -> Result<()> {
        let target = self
            .target
            .as_ref()
            .ok_or_else(|| Error::Unsupported("vector member in a battery without target".into()))?;
        if g.dim() != target.dim() {
            return Err(crate::error::domain("vector member does not match the target dimension"));
        }
        self.members.push(Member {
            id: id.into(),
            kind: MemberKind::Vector,
            g,
        });
        Ok(())
    }
}

/// `ℝ` with the absolute value.
pub(crate) fn scalar_line() -> TargetSpace {
    TargetSpace::banach(1, LpNorm::LInf).expect("one-dimensional norm")
}

fn corners(space: &CompactSpace) -> Vec<Point> {
    match space {
        CompactSpace::UnitCube { dim } => vec![Point::Coords(vec![0.0; *dim]), Point::Coords(vec![1.0; *dim])],
        CompactSpace::Finite { dist, .. } => {
            let mut v = vec![Point::Index(0)];
            if dist.len() > 1 {
                v.push(Point::Index(dist.len() - 1));
            }
            v
        }
    }
}

/// Generates a battery deterministically from `(spec, seed)`.
///
/// With a target, vector members `g_j = Σ_k f_{(j+k) mod S} x_k` are built
/// over its base from the `S` scalar functions.
pub fn generate_battery(
    space: &CompactSpace,
    target: Option<&TargetSpace>,
    spec: &BatterySpec,
    seed: u64,
) -> Result<Battery> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scalars: Vec<(String, ScalarFn)> = Vec::new();
    if spec.corner_tents {
        for (i, c) in corners(space).into_iter().enumerate() {
            scalars.push((format!("corner_tent_{i}"), ScalarFn::tent(c, 1.0)));
        }
    }
    for (i, t) in spec.tents.iter().enumerate() {
        space.check(&t.center)?;
        scalars.push((format!("tent_{i}"), ScalarFn::tent(t.center.clone(), t.radius)));
    }
    for i in 0..spec.random_tents {
        scalars.push((format!("random_tent_{i}"), ScalarFn::tent(space.random_point(&mut rng), 1.0)));
    }
    for i in 0..spec.distances {
        let f = ScalarFn::dist(space.random_point(&mut rng)).clamp(-1.0, 1.0);
        scalars.push((format!("distance_{i}"), f));
    }
    for i in 0..spec.mcshane {
        let anchors = (0..spec.mcshane_anchors.max(1))
            .map(|_| (space.random_point(&mut rng), rng.random_range(-1.0..=1.0)))
            .collect();
        let f = ScalarFn::mcshane(anchors, 1.0).clamp(-1.0, 1.0);
        scalars.push((format!("mcshane_{i}"), f));
    }

    let base = match target {
        Some(t) if spec.vector => Some(
            t.base()
                .ok_or_else(|| {
                    Error::Unsupported(format!("vector members need a base on target {}", t.label()))
                })?
                .vectors()
                .to_vec(),
        ),
        _ => None,
    };

    let mut battery = Battery::new(target.cloned());
    if spec.scalar {
        for (id, f) in &scalars {
            battery.push_scalar(space, id.clone(), f.clone())?;
        }
    }
    if let Some(base) = base {
        let s = scalars.len();
        for j in 0..s {
            let coeffs: Vec<ScalarFn> = (0..base.len()).map(|k| scalars[(j + k) % s].1.clone()).collect();
            battery.push_vector(format!("lift_{j}"), VectorFunction::lift(space, &coeffs, &base)?)?;
        }
    }
    Ok(battery)
}
