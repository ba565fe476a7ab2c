use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planar::RigidFootScenario;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TerrainKind {
    Flat,
    Step,
    Bump,
    Ridge,
    Custom,
}

/// Piecewise-linear height profile under the foot, heel at `x = 0`.
///
/// Outside the listed positions the profile keeps its end heights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TerrainProfile {
    pub name: String,
    pub kind: TerrainKind,
    /// Strictly increasing abscissae [m].
    pub positions: Vec<f64>,
    /// Heights above the base plane [m].
    pub heights: Vec<f64>,
    /// Toe height `δ` seen by the articulated foot [m].
    pub softfoot_delta: f64,
}

/// Tip-to-heel length of the default articulated sole, `(n + 3) L` [m].
pub const SOFTFOOT_SOLE_LENGTH: f64 = 0.18;

impl TerrainProfile {
    /// Builds a profile whose `δ` is the terrain height under the toe tip of
    /// a sole of length `toe_position`.
    pub fn new(
        name: &str,
        kind: TerrainKind,
        points: &[(f64, f64)],
        toe_position: f64,
    ) -> Result<Self> {
        let mut t = Self {
            name: name.to_owned(),
            kind,
            positions: points.iter().map(|p| p.0).collect(),
            heights: points.iter().map(|p| p.1).collect(),
            softfoot_delta: 0.0,
        };
        t.validate_shape()?;
        t.softfoot_delta = t.height_at(toe_position) - t.height_at(0.0);
        t.validate()?;
        Ok(t)
    }

    pub fn flat() -> Self {
        Self {
            name: "flat".into(),
            kind: TerrainKind::Flat,
            positions: vec![0.0, 1.0],
            heights: vec![0.0, 0.0],
            softfoot_delta: 0.0,
        }
    }

    fn validate_shape(&self) -> Result<()> {
        if self.positions.is_empty() || self.positions.len() != self.heights.len() {
            return Err(Error::invalid(
                "terrain",
                "positions and heights must be nonempty and of equal length",
            ));
        }
        if self.positions.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(
                "terrain.positions",
                "must be strictly increasing",
            ));
        }
        if self
            .positions
            .iter()
            .chain(&self.heights)
            .any(|v| !v.is_finite())
        {
            return Err(Error::invalid("terrain", "coordinates must be finite"));
        }
        if self.heights.iter().any(|h| *h < 0.0) {
            return Err(Error::invalid("terrain.heights", "must be >= 0"));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_shape()?;
        if !self.softfoot_delta.is_finite() {
            return Err(Error::invalid("terrain.softfoot_delta", "must be finite"));
        }
        if self.kind == TerrainKind::Flat
            && (self.heights.iter().any(|h| *h != 0.0) || self.softfoot_delta != 0.0)
        {
            return Err(Error::invalid(
                "terrain",
                "flat terrain needs zero heights and delta = 0",
            ));
        }
        Ok(())
    }

    pub fn is_flat(&self) -> bool {
        self.heights.iter().all(|h| *h == 0.0) && self.softfoot_delta == 0.0
    }

    /// Linear interpolation of the profile at `x`.
    pub fn height_at(&self, x: f64) -> f64 {
        let p = &self.positions;
        let h = &self.heights;
        if x <= p[0] {
            return h[0];
        }
        if x >= p[p.len() - 1] {
            return h[h.len() - 1];
        }
        let i = p.partition_point(|v| *v <= x) - 1;
        let t = (x - p[i]) / (p[i + 1] - p[i]);
        h[i] + t * (h[i + 1] - h[i])
    }

    /// Highest feature under a rigid sole of length `sole_length`, nearest
    /// to the heel among equal heights, as `(position, height)` above the
    /// heel level. Candidates are the interior vertices and the sole tip.
    pub fn dominant_feature(&self, sole_length: f64) -> (f64, f64) {
        let base = self.height_at(0.0);
        let candidates = self
            .positions
            .iter()
            .copied()
            .filter(|x| *x > 0.0 && *x < sole_length)
            .chain(std::iter::once(sole_length));
        let mut best = (sole_length, 0.0);
        for x in candidates {
            let h = self.height_at(x) - base;
            if h > best.1 {
                best = (x, h);
            }
        }
        best
    }

    /// Single-obstacle reduction used by the rigid and compliant models.
    pub fn rigid_scenario(
        &self,
        sole_length: f64,
        leg_height: f64,
        ankle_limit: f64,
    ) -> RigidFootScenario {
        let (position, height) = self.dominant_feature(sole_length);
        RigidFootScenario {
            sole_length,
            leg_height,
            obstacle_position: position,
            obstacle_height: height,
            ankle_limit,
        }
    }
}

/// The eight reference terrains. Dimensions are in metres, heel at `x = 0`;
/// `δ` is taken under the tip of the default articulated sole.
pub fn terrain_catalog() -> Vec<TerrainProfile> {
    let toe = SOFTFOOT_SOLE_LENGTH;
    let build = |name: &str, kind, pts: &[(f64, f64)]| {
        TerrainProfile::new(name, kind, pts, toe).expect("catalog terrain is valid")
    };
    vec![
        TerrainProfile::flat(),
        build(
            "low-ridge",
            TerrainKind::Ridge,
            &[
                (0.0, 0.0),
                (0.095, 0.0),
                (0.1, 0.005),
                (0.105, 0.0),
                (1.0, 0.0),
            ],
        ),
        build(
            "mid-bump",
            TerrainKind::Bump,
            &[
                (0.0, 0.0),
                (0.08, 0.0),
                (0.11, 0.01),
                (0.14, 0.0),
                (1.0, 0.0),
            ],
        ),
        build(
            "step",
            TerrainKind::Step,
            &[(0.0, 0.0), (0.149, 0.0), (0.15, 0.01), (1.0, 0.01)],
        ),
        build(
            "round",
            TerrainKind::Bump,
            &[
                (0.0, 0.0),
                (0.045, 0.0),
                (0.0506, 0.0094),
                (0.06, 0.015),
                (0.0694, 0.0094),
                (0.075, 0.0),
                (1.0, 0.0),
            ],
        ),
        build(
            "double-ridge",
            TerrainKind::Ridge,
            &[
                (0.0, 0.0),
                (0.055, 0.0),
                (0.06, 0.008),
                (0.065, 0.0),
                (0.155, 0.0),
                (0.16, 0.008),
                (0.165, 0.0),
                (1.0, 0.0),
            ],
        ),
        build("incline", TerrainKind::Custom, &[(0.0, 0.0), (1.0, 0.06)]),
        build(
            "tall-step",
            TerrainKind::Step,
            &[(0.0, 0.0), (0.159, 0.0), (0.16, 0.025), (1.0, 0.025)],
        ),
    ]
}
