//! Quasi-static tilt sweeps: a sequence of independent static solves while
//! the load moves along the foot.

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::terrain::TerrainProfile;
use crate::contact_geometry::{
    resultant_of_field, zmp_on_plane, ContactPlane, ContactRegion, TractionSample,
};
use crate::error::{Error, Result};
use crate::planar::{
    compliant_spring_forces, compliant_tilt_angle, rigid_foot_on_obstacle, CompliantLumpedParams,
    PoseBranch,
};
use crate::softfoot::{solve_equilibrium, EquilibriumState, FootLoad, SoftFootParams};

/// Contact forces above `-FORCE_TOLERANCE · P` count as non-negative; this
/// absorbs round-off on contacts that are unloaded in exact arithmetic.
pub const FORCE_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FootModel {
    Rigid,
    Compliant,
    Softfoot,
}

impl FootModel {
    pub fn label(self) -> &'static str {
        match self {
            FootModel::Rigid => "rigid",
            FootModel::Compliant => "compliant",
            FootModel::Softfoot => "softfoot",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RigidFootParams {
    pub sole_length: f64,
    pub leg_height: f64,
}

impl Default for RigidFootParams {
    fn default() -> Self {
        Self {
            sole_length: 0.219,
            leg_height: 0.8,
        }
    }
}

/// Foot description handed to a sweep; the variant must match the model.
#[derive(Clone, Debug, PartialEq)]
pub enum FootParams {
    Rigid(RigidFootParams),
    Compliant(CompliantLumpedParams),
    Softfoot(SoftFootParams),
}

impl FootParams {
    pub fn model(&self) -> FootModel {
        match self {
            FootParams::Rigid(_) => FootModel::Rigid,
            FootParams::Compliant(_) => FootModel::Compliant,
            FootParams::Softfoot(_) => FootModel::Softfoot,
        }
    }
}

/// Swept quantity and limits of one sweep.
///
/// Rigid feet sweep the load position from the heel, compliant feet the COM
/// offset from the support midpoint, the articulated foot its load arm
/// `x_H`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub foot_model: FootModel,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    /// Ankle range `θ_max` [rad].
    pub ankle_limit: f64,
    /// Vertical load `P` [N].
    pub load: f64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::invalid("step", "must be finite and > 0"));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.stop >= self.start) {
            return Err(Error::invalid("range", "needs finite start <= stop"));
        }
        if !(self.load > 0.0 && self.load.is_finite()) {
            return Err(Error::invalid("load", "must be finite and > 0"));
        }
        if !(self.ankle_limit > 0.0 && self.ankle_limit.is_finite()) {
            return Err(Error::invalid("ankle_limit", "must be finite and > 0"));
        }
        Ok(())
    }

    /// `start + i·step` up to `stop`, with a 1e-9 step slack at the end.
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|i| self.start + i as f64 * self.step)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub swept_value: f64,
    pub cop: f64,
    /// Ankle rotation that keeps the leg vertical [rad].
    pub ankle_compensation: f64,
    /// Heel, middle (obstacle or arch) and tip contact forces [N].
    pub forces: [f64; 3],
    pub tension: f64,
    pub admissible: bool,
    pub diagnostic: Option<String>,
}

impl SweepRow {
    fn failed(swept_value: f64, err: &Error) -> Self {
        Self {
            swept_value,
            cop: f64::NAN,
            ankle_compensation: f64::NAN,
            forces: [f64::NAN; 3],
            tension: f64::NAN,
            admissible: false,
            diagnostic: Some(err.to_string()),
        }
    }

    pub fn min_force(&self) -> f64 {
        self.forces.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub model: FootModel,
    pub branch: PoseBranch,
    pub terrain: String,
    pub load: f64,
    pub ankle_limit: f64,
    /// Swept value of the unperturbed stance.
    pub neutral: f64,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn label(&self) -> String {
        format!(
            "{}-{}-{}",
            self.model.label(),
            self.terrain,
            self.branch.label()
        )
    }

    /// `min(min_force / P, θ_max − |comp|)`, non-negative exactly on
    /// admissible rows; NaN for failed solves.
    pub fn margin(&self, row: &SweepRow) -> f64 {
        if row.diagnostic.is_some() {
            return f64::NAN;
        }
        (row.min_force() / self.load + FORCE_TOLERANCE)
            .min(self.ankle_limit - row.ankle_compensation.abs())
    }

    /// Largest `|comp|` over admissible rows.
    pub fn max_admissible_compensation(&self) -> Option<f64> {
        self.rows
            .iter()
            .filter(|r| r.admissible)
            .map(|r| r.ankle_compensation.abs())
            .reduce(f64::max)
    }
}

fn admissible(forces: &[f64; 3], compensation: f64, load: f64, ankle_limit: f64) -> bool {
    forces.iter().all(|f| *f >= -FORCE_TOLERANCE * load) && compensation.abs() <= ankle_limit
}

/// Centre of pressure `Σ F_i x_i / Σ F_i` on the flat base.
pub fn cop_from_forces(forces: &[f64], positions: &[f64]) -> Result<f64> {
    if forces.len() != positions.len() {
        return Err(Error::DimensionMismatch {
            what: "contact positions",
            expected: forces.len(),
            found: positions.len(),
        });
    }
    let total: f64 = forces.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return Err(Error::ZeroVerticalForce { total });
    }
    Ok(forces
        .iter()
        .zip(positions)
        .map(|(f, x)| f * x)
        .sum::<f64>()
        / total)
}

/// Vertical point forces on the base plane as a traction field.
pub fn point_force_field(forces: &[f64], positions: &[f64]) -> Result<ContactRegion> {
    let plane = ContactPlane::ground();
    let samples = forces
        .iter()
        .zip(positions)
        .map(|(f, x)| TractionSample::new(Vector2::new(*x, 0.0), Vector3::new(*f, 0.0, 0.0), 1.0))
        .collect::<Result<Vec<_>>>()?;
    ContactRegion::new(samples, plane)
}

/// ZMP of the point-force system along the base, through the wrench route.
pub fn zmp_of_forces(forces: &[f64], positions: &[f64]) -> Result<f64> {
    let field = point_force_field(forces, positions)?;
    let wrench = resultant_of_field(&field);
    zmp_on_plane(&wrench, field.plane())
        .map(|p| p.x)
        .ok_or(Error::ZeroVerticalForce {
            total: wrench.force.z,
        })
}

/// Horizontal contact positions of the articulated foot: heel, arch and
/// toe, with the arms of the heel moment balance.
pub fn softfoot_contact_positions(params: &SoftFootParams, state: &EquilibriumState) -> [f64; 3] {
    let span = params.arch_span();
    let n = params.n;
    let toe = params.phalanx_length * (state.q[n].cos() + (state.q[n] + state.q[n + 1]).cos());
    [0.0, span, span + toe]
}

/// Runs one sweep per resting branch of the foot on `terrain`.
pub fn tilt_sweep(
    spec: &SweepSpec,
    terrain: &TerrainProfile,
    foot: &FootParams,
) -> Result<Vec<SweepTable>> {
    spec.validate()?;
    terrain.validate()?;
    if foot.model() != spec.foot_model {
        return Err(Error::invalid(
            "foot_model",
            format!(
                "sweep expects {} parameters, got {}",
                spec.foot_model.label(),
                foot.model().label()
            ),
        ));
    }
    match foot {
        FootParams::Rigid(p) => rigid_sweep(spec, terrain, p),
        FootParams::Compliant(p) => compliant_sweep(spec, terrain, p),
        FootParams::Softfoot(p) => softfoot_sweep(spec, terrain, p).map(|t| vec![t]),
    }
}

fn table(
    spec: &SweepSpec,
    terrain: &TerrainProfile,
    branch: PoseBranch,
    neutral: f64,
    rows: Vec<SweepRow>,
) -> SweepTable {
    SweepTable {
        model: spec.foot_model,
        branch,
        terrain: terrain.name.clone(),
        load: spec.load,
        ankle_limit: spec.ankle_limit,
        neutral,
        rows,
    }
}

/// Two-contact lever: forces at `s0` and `s1` carrying `load` at `x`.
fn lever_forces(load: f64, s0: f64, s1: f64, x: f64) -> (f64, f64) {
    let span = s1 - s0;
    (load * (s1 - x) / span, load * (x - s0) / span)
}

/// Rear and front contacts go to the heel/middle/tip slots by branch.
fn slot(branch: PoseBranch, rear: f64, front: f64) -> [f64; 3] {
    match branch {
        PoseBranch::Flat => [rear, 0.0, front],
        PoseBranch::HeelSide => [rear, front, 0.0],
        PoseBranch::TipSide => [0.0, rear, front],
    }
}

fn rigid_sweep(
    spec: &SweepSpec,
    terrain: &TerrainProfile,
    foot: &RigidFootParams,
) -> Result<Vec<SweepTable>> {
    let scenario = terrain.rigid_scenario(foot.sole_length, foot.leg_height, spec.ankle_limit);
    let poses = rigid_foot_on_obstacle(&scenario)?;
    let mut tables = Vec::with_capacity(poses.len());
    for pose in poses {
        let (s0, s1) = pose.support_segment;
        let rows = spec
            .values()
            .into_iter()
            .map(|x| {
                let (rear, front) = lever_forces(spec.load, s0, s1, x);
                let forces = slot(pose.branch, rear, front);
                let cop = cop_from_forces(&[rear, front], &[s0, s1]).unwrap_or(f64::NAN);
                SweepRow {
                    swept_value: x,
                    cop,
                    ankle_compensation: pose.compensation,
                    forces,
                    tension: 0.0,
                    admissible: admissible(&forces, pose.compensation, spec.load, spec.ankle_limit),
                    diagnostic: None,
                }
            })
            .collect();
        tables.push(table(spec, terrain, pose.branch, 0.5 * (s0 + s1), rows));
    }
    Ok(tables)
}

fn compliant_sweep(
    spec: &SweepSpec,
    terrain: &TerrainProfile,
    foot: &CompliantLumpedParams,
) -> Result<Vec<SweepTable>> {
    foot.validate()?;
    let scenario = terrain.rigid_scenario(foot.sole_length, foot.leg_height, spec.ankle_limit);
    let poses = rigid_foot_on_obstacle(&scenario)?;
    let mut tables = Vec::with_capacity(poses.len());
    for pose in poses {
        let (s0, s1) = pose.support_segment;
        // springs under the two support points, load from the sweep spec
        let springs = CompliantLumpedParams {
            sole_length: s1 - s0,
            load: spec.load,
            ..foot.clone()
        };
        let rows = spec
            .values()
            .into_iter()
            .map(|x| {
                let (rear, front) = compliant_spring_forces(&springs, x);
                let forces = slot(pose.branch, rear, front);
                let comp = -(pose.tilt + compliant_tilt_angle(&springs, x));
                let cop = cop_from_forces(&[rear, front], &[s0, s1]).unwrap_or(f64::NAN);
                SweepRow {
                    swept_value: x,
                    cop,
                    ankle_compensation: comp,
                    forces,
                    tension: 0.0,
                    admissible: admissible(&forces, comp, spec.load, spec.ankle_limit),
                    diagnostic: None,
                }
            })
            .collect();
        tables.push(table(spec, terrain, pose.branch, 0.0, rows));
    }
    Ok(tables)
}

fn softfoot_sweep(
    spec: &SweepSpec,
    terrain: &TerrainProfile,
    foot: &SoftFootParams,
) -> Result<SweepTable> {
    let mut params = foot.clone();
    params.terrain_height = terrain.softfoot_delta;
    params.validate()?;
    let load = FootLoad::new(spec.load)?;
    let mut previous: Option<EquilibriumState> = None;
    let mut rows = Vec::new();
    for x in spec.values() {
        params.load_arm = x;
        let solved = solve_equilibrium(&params, &load, previous.as_ref())
            .or_else(|_| solve_equilibrium(&params, &load, None));
        let row = match solved {
            Ok(state) => {
                let positions = softfoot_contact_positions(&params, &state);
                let forces = state.forces();
                // Heel and arch contacts both sit on the base, so the arch
                // carrying the ankle keeps its orientation: the sole chain
                // absorbs δ and no ankle compensation is needed.
                let comp = 0.0;
                let row = SweepRow {
                    swept_value: x,
                    cop: cop_from_forces(&forces, &positions).unwrap_or(f64::NAN),
                    ankle_compensation: comp,
                    forces,
                    tension: state.tension,
                    admissible: admissible(&forces, comp, spec.load, spec.ankle_limit),
                    diagnostic: None,
                };
                previous = Some(state);
                row
            }
            Err(err) => SweepRow::failed(x, &err),
        };
        rows.push(row);
    }
    let neutral = 0.5 * foot.arch_span();
    Ok(table(spec, terrain, PoseBranch::Flat, neutral, rows))
}

/// One contiguous admissible stretch of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SupportInterval {
    pub cop_range: (f64, f64),
    pub swept_range: (f64, f64),
    pub compensation_range: (f64, f64),
}

impl SupportInterval {
    pub fn length(&self) -> f64 {
        self.cop_range.1 - self.cop_range.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupportReport {
    pub intervals: Vec<SupportInterval>,
    /// Interval holding the neutral stance, else the longest one.
    pub primary: Option<usize>,
    pub diagnostic: Option<String>,
}

impl SupportReport {
    pub fn length(&self) -> f64 {
        self.primary.map_or(0.0, |i| self.intervals[i].length())
    }

    pub fn compensation_range(&self) -> Option<(f64, f64)> {
        self.primary.map(|i| self.intervals[i].compensation_range)
    }
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

/// Admissible CoP intervals of a sweep.
///
/// Each run of admissible rows is widened to the zero of the linearly
/// interpolated margin against its inadmissible neighbours.
pub fn support_length(table: &SweepTable) -> Result<SupportReport> {
    if table.rows.is_empty() {
        return Err(Error::invalid("table", "sweep table is empty"));
    }
    let rows = &table.rows;
    let mut intervals = Vec::new();
    let mut i = 0;
    while i < rows.len() {
        if !rows[i].admissible {
            i += 1;
            continue;
        }
        let first = i;
        while i + 1 < rows.len() && rows[i + 1].admissible {
            i += 1;
        }
        let last = i;
        i += 1;

        let edge = |inside: usize, outside: Option<usize>| -> (f64, f64, f64) {
            let a = &rows[inside];
            let Some(o) = outside else {
                return (a.swept_value, a.cop, a.ankle_compensation);
            };
            let b = &rows[o];
            let (ma, mb) = (table.margin(a), table.margin(b));
            if !(mb.is_finite() && ma >= 0.0 && mb < 0.0) {
                return (a.swept_value, a.cop, a.ankle_compensation);
            }
            let t = ma / (ma - mb);
            (
                lerp(a.swept_value, b.swept_value, t),
                lerp(a.cop, b.cop, t),
                lerp(a.ankle_compensation, b.ankle_compensation, t),
            )
        };
        let lo = edge(first, first.checked_sub(1));
        let hi = edge(last, (last + 1 < rows.len()).then_some(last + 1));
        let comps = rows[first..=last]
            .iter()
            .map(|r| r.ankle_compensation)
            .chain([lo.2, hi.2]);
        let comp_range = comps.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), c| {
            (a.min(c), b.max(c))
        });
        intervals.push(SupportInterval {
            cop_range: (lo.1.min(hi.1), lo.1.max(hi.1)),
            swept_range: (lo.0, hi.0),
            compensation_range: comp_range,
        });
    }
    if intervals.is_empty() {
        return Ok(SupportReport {
            intervals,
            primary: None,
            diagnostic: Some(format!("no admissible rows in {}", table.label())),
        });
    }
    let containing = intervals
        .iter()
        .position(|iv| iv.swept_range.0 <= table.neutral && table.neutral <= iv.swept_range.1);
    let primary = containing.or_else(|| {
        (0..intervals.len())
            .max_by(|&a, &b| intervals[a].length().total_cmp(&intervals[b].length()))
    });
    Ok(SupportReport {
        intervals,
        primary,
        diagnostic: None,
    })
}

/// Bisection for the sign change of `f` on `[a, b]` with `f(a) ≥ 0 > f(b)`;
/// returns the last point where `f ≥ 0`, within `tolerance` of the root.
pub fn bisect_boundary<F>(mut f: F, mut a: f64, mut b: f64, tolerance: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    if !(f(a) >= 0.0 && f(b) < 0.0) {
        return Err(Error::invalid("bracket", "needs f(a) >= 0 > f(b)"));
    }
    while (b - a).abs() > tolerance {
        let m = 0.5 * (a + b);
        if f(m) >= 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::terrain::terrain_catalog;

    fn rigid_spec(load: f64) -> SweepSpec {
        SweepSpec {
            foot_model: FootModel::Rigid,
            start: -0.02,
            stop: 0.24,
            step: 0.001,
            ankle_limit: 0.35,
            load,
        }
    }

    #[test]
    fn cop_examples() {
        assert_eq!(cop_from_forces(&[5.0], &[0.1]).unwrap(), 0.1);
        assert_eq!(cop_from_forces(&[3.0, 3.0], &[-0.1, 0.1]).unwrap(), 0.0);
        assert!(matches!(
            cop_from_forces(&[1.0, -1.0], &[0.0, 1.0]),
            Err(Error::ZeroVerticalForce { .. })
        ));
        assert!(cop_from_forces(&[1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn cop_matches_zmp() {
        let forces = [10.0, 30.0, -2.0];
        let xs = [0.0, 0.12, 0.17];
        let cop = cop_from_forces(&forces, &xs).unwrap();
        assert!((zmp_of_forces(&forces, &xs).unwrap() - cop).abs() < 1e-12);
    }

    #[test]
    fn spec_values_include_stop() {
        let s = rigid_spec(10.0);
        let v = s.values();
        assert_eq!(v.len(), 261);
        assert!((v[260] - 0.24).abs() < 1e-12);
        let mut bad = s.clone();
        bad.step = 0.0;
        assert!(bad.validate().is_err());
        bad = s.clone();
        bad.stop = -1.0;
        assert!(bad.validate().is_err());
        bad = s;
        bad.load = 0.0;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn rigid_flat_support_is_the_sole() {
        let tables = tilt_sweep(
            &rigid_spec(100.0),
            &TerrainProfile::flat(),
            &FootParams::Rigid(RigidFootParams::default()),
        )
        .unwrap();
        assert_eq!(tables.len(), 1);
        let report = support_length(&tables[0]).unwrap();
        assert_eq!(report.intervals.len(), 1);
        assert!((report.length() - 0.219).abs() < 1e-8);
        assert_eq!(report.compensation_range(), Some((0.0, 0.0)));
        for r in &tables[0].rows {
            assert!((r.cop - r.swept_value).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_model_is_rejected() {
        let err = tilt_sweep(
            &rigid_spec(1.0),
            &TerrainProfile::flat(),
            &FootParams::Softfoot(SoftFootParams::nominal()),
        );
        assert!(err.is_err());
    }

    #[test]
    fn bump_gives_two_branches() {
        let c = terrain_catalog();
        let bump = c.iter().find(|t| t.name == "mid-bump").unwrap();
        let tables = tilt_sweep(
            &rigid_spec(50.0),
            bump,
            &FootParams::Rigid(RigidFootParams::default()),
        )
        .unwrap();
        let branches: Vec<_> = tables.iter().map(|t| t.branch).collect();
        assert_eq!(branches, vec![PoseBranch::HeelSide, PoseBranch::TipSide]);
        for t in &tables {
            let r = support_length(t).unwrap();
            assert!(r.length() > 0.0 && r.length() < 0.219);
        }
    }

    #[test]
    fn all_inadmissible_gives_zero_length() {
        let mut t = tilt_sweep(
            &rigid_spec(1.0),
            &TerrainProfile::flat(),
            &FootParams::Rigid(RigidFootParams::default()),
        )
        .unwrap()
        .remove(0);
        for r in &mut t.rows {
            r.admissible = false;
        }
        let rep = support_length(&t).unwrap();
        assert_eq!(rep.length(), 0.0);
        assert!(rep.compensation_range().is_none());
        assert!(rep.diagnostic.is_some());
        t.rows.clear();
        assert!(support_length(&t).is_err());
    }

    #[test]
    fn bisection_brackets() {
        let x = bisect_boundary(|x| 0.3 - x, 0.0, 1.0, 1e-9).unwrap();
        assert!((x - 0.3).abs() <= 1e-9);
        assert!(bisect_boundary(|x| x, 0.0, 1.0, 1e-9).is_err());
    }
}
