//! Closed-form sagittal-plane statics of three foot concepts: a rigid flat
//! sole resting on an obstacle, a flat sole on two lumped springs, and the
//! two-arch adaptive foot held together by a traction beam.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            name,
            format!("must be finite and > 0 (got {value})"),
        ))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidFootScenario {
    pub sole_length: f64,
    pub leg_height: f64,
    /// Distance of the obstacle from the heel, measured along the sole [m].
    pub obstacle_position: f64,
    pub obstacle_height: f64,
    pub ankle_limit: f64,
}

impl RigidFootScenario {
    pub fn validate(&self) -> Result<()> {
        require_positive("sole_length", self.sole_length)?;
        require_positive("leg_height", self.leg_height)?;
        require_positive("ankle_limit", self.ankle_limit)?;
        if !(0.0..=self.sole_length).contains(&self.obstacle_position) {
            return Err(Error::invalid(
                "obstacle_position",
                "must lie in [0, sole_length]",
            ));
        }
        if !(self.obstacle_height >= 0.0 && self.obstacle_height.is_finite()) {
            return Err(Error::invalid("obstacle_height", "must be finite and >= 0"));
        }
        Ok(())
    }
}

/// Which sole end stays on the ground while the sole rests on the obstacle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoseBranch {
    /// Flat ground, no obstacle contact.
    Flat,
    /// Heel on the ground, sole tilted up over the obstacle.
    HeelSide,
    /// Tip on the ground, sole tilted down over the obstacle.
    TipSide,
}

impl PoseBranch {
    pub fn label(self) -> &'static str {
        match self {
            PoseBranch::Flat => "flat",
            PoseBranch::HeelSide => "heel-side",
            PoseBranch::TipSide => "tip-side",
        }
    }
}

/// One statically admissible resting pose of a rigid sole.
#[derive(Clone, Debug, PartialEq)]
pub struct RigidPose {
    pub branch: PoseBranch,
    /// Sole tilt, positive when the tip is raised [rad].
    pub tilt: f64,
    /// Horizontal COM shift induced by the tilt, `tilt · H` [m].
    pub com_displacement: f64,
    /// Ankle rotation restoring a vertical leg, `-tilt` [rad].
    pub compensation: f64,
    /// Horizontal extent of the two-point support, heel at x = 0 [m].
    pub support_segment: (f64, f64),
}

impl RigidPose {
    pub fn within_ankle_limit(&self, ankle_limit: f64) -> bool {
        self.compensation.abs() <= ankle_limit
    }
}

/// Enumerates the resting poses of a rigid sole over a single obstacle.
///
/// With no obstacle the sole lies flat. Otherwise the sole pivots on either
/// end: heel-down poses satisfy `sin(tilt) = h / p`, tip-down poses
/// `sin(tilt) = h / (L − p)`, where `p` is the obstacle distance from the
/// heel along the sole. Poses whose lever arm is shorter than the obstacle
/// are geometrically impossible and skipped.
pub fn rigid_foot_on_obstacle(scenario: &RigidFootScenario) -> Result<Vec<RigidPose>> {
    scenario.validate()?;
    let l = scenario.sole_length;
    let h = scenario.obstacle_height;
    let p = scenario.obstacle_position;
    if h == 0.0 {
        return Ok(vec![RigidPose {
            branch: PoseBranch::Flat,
            tilt: 0.0,
            com_displacement: 0.0,
            compensation: 0.0,
            support_segment: (0.0, l),
        }]);
    }
    let mut poses = Vec::with_capacity(2);
    if h < p {
        let tilt = (h / p).asin();
        poses.push(RigidPose {
            branch: PoseBranch::HeelSide,
            tilt,
            com_displacement: tilt * scenario.leg_height,
            compensation: -tilt,
            support_segment: (0.0, p * tilt.cos()),
        });
    }
    if h < l - p {
        let tilt = -(h / (l - p)).asin();
        // tip at the far end of the sole, obstacle (L − p) behind it
        let heel_x = 0.0;
        let tip_x = heel_x + l * tilt.cos();
        poses.push(RigidPose {
            branch: PoseBranch::TipSide,
            tilt,
            com_displacement: tilt * scenario.leg_height,
            compensation: -tilt,
            support_segment: (tip_x - (l - p) * tilt.cos(), tip_x),
        });
    }
    if poses.is_empty() {
        return Err(Error::ObstacleTooTall {
            height: h,
            sole_length: l,
        });
    }
    Ok(poses)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompliantLumpedParams {
    pub spring_stiffness: f64,
    pub sole_length: f64,
    pub load: f64,
    pub mass: f64,
    pub gravity: f64,
    pub leg_height: f64,
}

impl CompliantLumpedParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("spring_stiffness", self.spring_stiffness)?;
        require_positive("sole_length", self.sole_length)?;
        require_positive("load", self.load)?;
        require_positive("mass", self.mass)?;
        require_positive("gravity", self.gravity)?;
        require_positive("leg_height", self.leg_height)
    }
}

/// Sole rotation of the two-spring foot when the COM moves `com_offset`
/// forward of the sole midpoint: `α = 2 P x / (k L²)`.
pub fn compliant_tilt_angle(params: &CompliantLumpedParams, com_offset: f64) -> f64 {
    2.0 * params.load * com_offset / (params.spring_stiffness * params.sole_length.powi(2))
}

/// Spring forces `(heel, tip)` of the two-spring foot under a COM offset.
pub fn compliant_spring_forces(params: &CompliantLumpedParams, com_offset: f64) -> (f64, f64) {
    let p = params.load;
    let lever = p * com_offset / params.sole_length;
    (0.5 * p - lever, 0.5 * p + lever)
}

/// Lowest spring stiffness for which the ankle range can compensate the sole
/// rotation over the whole sole: `P / (L θ_max)`.
pub fn k_min_support(load: f64, sole_length: f64, ankle_limit: f64) -> f64 {
    load / (sole_length * ankle_limit)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilityConvention {
    /// `2 m g L² / H`, taken literally.
    AsWritten,
    /// `2 m g H / L²`, from `k L² / 2 > m g H`.
    DimensionalCorrection,
}

impl StabilityConvention {
    pub fn label(self) -> &'static str {
        match self {
            StabilityConvention::AsWritten => "as-written",
            StabilityConvention::DimensionalCorrection => "dimensional-correction",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityBound {
    pub stiffness: f64,
    pub convention: StabilityConvention,
}

/// Minimum spring stiffness for a stable elastic inverted pendulum.
pub fn k_min_stability(
    params: &CompliantLumpedParams,
    convention: StabilityConvention,
) -> StabilityBound {
    let mg = params.mass * params.gravity;
    let l = params.sole_length;
    let h = params.leg_height;
    let stiffness = match convention {
        StabilityConvention::AsWritten => 2.0 * mg * l * l / h,
        StabilityConvention::DimensionalCorrection => 2.0 * mg * h / (l * l),
    };
    StabilityBound {
        stiffness,
        convention,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveArchParams {
    pub sole_length: f64,
    pub load: f64,
    pub com_position: f64,
    /// Beam angle with the ground at the tip [rad].
    pub alpha_1: f64,
    /// Beam angle with the ground at the heel [rad].
    pub alpha_2: f64,
    /// Heel-arch angle from the vertical [rad].
    pub alpha_h: f64,
}

impl AdaptiveArchParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("sole_length", self.sole_length)?;
        require_positive("load", self.load)?;
        for (name, a) in [
            ("alpha_1", self.alpha_1),
            ("alpha_2", self.alpha_2),
            ("alpha_h", self.alpha_h),
        ] {
            if !(a > 0.0 && a < std::f64::consts::FRAC_PI_2) {
                return Err(Error::invalid(name, "must lie in (0, pi/2)"));
            }
        }
        if !self.com_position.is_finite() {
            return Err(Error::invalid("com_position", "must be finite"));
        }
        Ok(())
    }
}

/// Heel, obstacle and tip contact forces of the adaptive foot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdaptiveForces {
    pub heel: f64,
    pub obstacle: f64,
    pub tip: f64,
}

impl AdaptiveForces {
    pub fn total(&self) -> f64 {
        self.heel + self.obstacle + self.tip
    }

    /// Unilateral contacts: every force must be non-negative.
    pub fn admissible(&self) -> bool {
        self.heel >= 0.0 && self.obstacle >= 0.0 && self.tip >= 0.0
    }
}

pub fn adaptive_arch_forces(params: &AdaptiveArchParams) -> AdaptiveForces {
    let p = params.load;
    let l = params.sole_length;
    let x = params.com_position;
    let t1 = params.alpha_1.tan();
    let t2 = params.alpha_2.tan();
    let th = params.alpha_h.tan();
    let rear = p * (l - x) / l;
    AdaptiveForces {
        heel: rear * (1.0 - t1 * th),
        obstacle: rear * (t1 + t2) * th,
        tip: p * ((x - l) * t2 * th + x) / l,
    }
}

/// COM positions for which all three adaptive-foot contacts push.
#[derive(Clone, Debug, PartialEq)]
pub struct ComRange {
    /// Closed-form lower COM bound `L (1 − tanα_H tanα₂) / (tanα_H tanα₂)`,
    /// not clamped; kept for comparison with the force-sign bound.
    pub closed_form_lower_bound: f64,
    /// Lower bound from the tip-force sign, `L t / (1 + t)` with
    /// `t = tanα_H tanα₂`.
    pub tip_lower_bound: f64,
    /// Admissible interval within `[0, L]`, `None` when empty.
    pub interval: Option<(f64, f64)>,
}

/// Admissible COM interval of the adaptive foot.
///
/// The interval is derived from the sign of each contact force: the tip force
/// is non-negative for `x ≥ L t / (1 + t)`, heel and obstacle forces for
/// `x ≤ L`, and the heel force additionally needs `tanα₁ tanα_H ≤ 1`
/// regardless of `x`.
pub fn adaptive_admissible_com_range(params: &AdaptiveArchParams) -> ComRange {
    let l = params.sole_length;
    let t = params.alpha_h.tan() * params.alpha_2.tan();
    let closed_form_lower_bound = l * (1.0 - t) / t;
    let tip_lower_bound = l * t / (1.0 + t);
    let heel_ok = params.alpha_1.tan() * params.alpha_h.tan() <= 1.0;
    let lo = tip_lower_bound.max(0.0);
    let interval = (heel_ok && lo <= l).then_some((lo, l));
    ComRange {
        closed_form_lower_bound,
        tip_lower_bound,
        interval,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_6};

    fn scenario(pos: f64, h: f64) -> RigidFootScenario {
        RigidFootScenario {
            sole_length: 0.2,
            leg_height: 0.8,
            obstacle_position: pos,
            obstacle_height: h,
            ankle_limit: 0.5,
        }
    }

    #[test]
    fn flat_ground_full_support() {
        let poses = rigid_foot_on_obstacle(&scenario(0.1, 0.0)).unwrap();
        assert_eq!(poses.len(), 1);
        assert_eq!(poses[0].tilt, 0.0);
        assert_eq!(poses[0].support_segment, (0.0, 0.2));
    }

    #[test]
    fn obstacle_at_tip() {
        let h = 0.01;
        let poses = rigid_foot_on_obstacle(&scenario(0.2, h)).unwrap();
        assert_eq!(poses.len(), 1);
        let pose = &poses[0];
        assert_eq!(pose.branch, PoseBranch::HeelSide);
        // oracle: heel at the origin, tip resting on the obstacle top
        let tip = (0.2 * pose.tilt.cos(), 0.2 * pose.tilt.sin());
        assert!((tip.1 - h).abs() < 1e-15);
        assert!((pose.tilt - (h / 0.2).asin()).abs() < 1e-15);
        assert!((pose.support_segment.1 - tip.0).abs() < 1e-15);
        assert!(pose.support_segment.1 < 0.2);
        assert!((pose.com_displacement - pose.tilt * 0.8).abs() < 1e-15);
    }

    #[test]
    fn mid_sole_obstacle_has_two_poses() {
        let poses = rigid_foot_on_obstacle(&scenario(0.08, 0.005)).unwrap();
        assert_eq!(poses.len(), 2);
        let heel = &poses[0];
        let tip = &poses[1];
        assert_eq!(heel.branch, PoseBranch::HeelSide);
        assert_eq!(tip.branch, PoseBranch::TipSide);
        // contact-point oracle: the obstacle top sits on the sole line
        assert!((0.08 * heel.tilt.sin() - 0.005).abs() < 1e-15);
        assert!((0.12 * (-tip.tilt).sin() - 0.005).abs() < 1e-15);
        assert!(heel.tilt > 0.0 && tip.tilt < 0.0);
        let width = |p: &RigidPose| p.support_segment.1 - p.support_segment.0;
        assert!((width(heel) - 0.08 * heel.tilt.cos()).abs() < 1e-15);
        assert!((width(tip) - 0.12 * tip.tilt.cos()).abs() < 1e-15);
    }

    #[test]
    fn obstacle_too_tall_is_rejected() {
        let err = rigid_foot_on_obstacle(&scenario(0.1, 0.15)).unwrap_err();
        assert!(matches!(err, Error::ObstacleTooTall { .. }));
    }

    #[test]
    fn tilt_angle_matches_spring_torque_balance() {
        let params = CompliantLumpedParams {
            spring_stiffness: 1000.0,
            sole_length: 0.2,
            load: 15.0,
            mass: 1.5,
            gravity: 10.0,
            leg_height: 1.0,
        };
        let x = 0.05;
        let alpha = compliant_tilt_angle(&params, x);
        assert!((alpha - 0.0375).abs() < 1e-15);
        // oracle: springs at ±L/2 deflect by F/k, the sole rotates by the
        // deflection difference over L
        let (heel, tip) = compliant_spring_forces(&params, x);
        assert!((heel + tip - 15.0).abs() < 1e-12);
        assert!((tip * 0.1 - heel * 0.1 - 15.0 * x).abs() < 1e-12);
        let rot = (tip - heel) / params.spring_stiffness / params.sole_length;
        assert!((rot - alpha).abs() < 1e-15);
        assert_eq!(compliant_tilt_angle(&params, 0.0), 0.0);
        let stiffer = CompliantLumpedParams {
            spring_stiffness: 2000.0,
            ..params.clone()
        };
        assert_eq!(alpha / compliant_tilt_angle(&stiffer, x), 2.0);
    }

    #[test]
    fn support_bound() {
        let k = k_min_support(15.0, 0.2, 0.3);
        assert!((k - 250.0).abs() < 1e-12);
        let params = CompliantLumpedParams {
            spring_stiffness: k,
            sole_length: 0.2,
            load: 15.0,
            mass: 1.5,
            gravity: 10.0,
            leg_height: 1.0,
        };
        assert!((compliant_tilt_angle(&params, 0.1) - 0.3).abs() < 1e-15);
        assert_eq!(k_min_support(30.0, 0.2, 0.3), 2.0 * k);
        assert!(k_min_support(15.0, 0.2, f64::INFINITY) == 0.0);
    }

    #[test]
    fn stability_bound_conventions() {
        let params = CompliantLumpedParams {
            spring_stiffness: 1.0,
            sole_length: 0.2,
            load: 1.0,
            mass: 50.0,
            gravity: 9.81,
            leg_height: 1.0,
        };
        let literal = k_min_stability(&params, StabilityConvention::AsWritten);
        assert!((literal.stiffness - 39.24).abs() < 1e-10);
        assert_eq!(literal.convention, StabilityConvention::AsWritten);
        let corrected = k_min_stability(&params, StabilityConvention::DimensionalCorrection);
        assert!((corrected.stiffness - 24525.0).abs() < 1e-9);
        // rotational stiffness of two springs at ±L/2 equals m g H at the bound
        let k_theta = corrected.stiffness * 0.2 * 0.2 / 2.0;
        assert!((k_theta - 50.0 * 9.81 * 1.0).abs() < 1e-9);
    }

    fn arch(x: f64, a1: f64, a2: f64, ah: f64) -> AdaptiveArchParams {
        AdaptiveArchParams {
            sole_length: 0.2,
            load: 15.0,
            com_position: x,
            alpha_1: a1,
            alpha_2: a2,
            alpha_h: ah,
        }
    }

    #[test]
    fn equal_angles_split_load_evenly() {
        let f = adaptive_arch_forces(&arch(0.1, FRAC_PI_6, FRAC_PI_6, FRAC_PI_6));
        for v in [f.heel, f.obstacle, f.tip] {
            assert!((v - 5.0).abs() < 1e-12, "{f:?}");
        }
        assert!((f.total() - 15.0).abs() < 1e-12);
    }

    #[test]
    fn heel_force_vanishes_when_factor_does() {
        let f = adaptive_arch_forces(&arch(0.07, FRAC_PI_4, 0.4, FRAC_PI_4));
        assert!(f.heel.abs() < 1e-14 * f.total());
    }

    #[test]
    fn com_over_tip_loads_tip_only() {
        let f = adaptive_arch_forces(&arch(0.2, 0.3, 0.5, 0.7));
        assert_eq!(f.heel, 0.0);
        assert_eq!(f.obstacle, 0.0);
        assert!((f.tip - 15.0).abs() < 1e-12);
    }

    #[test]
    fn negative_forces_are_flagged_not_clamped() {
        let f = adaptive_arch_forces(&arch(0.01, FRAC_PI_6, FRAC_PI_6, FRAC_PI_6));
        assert!(f.tip < 0.0);
        assert!(!f.admissible());
    }

    #[test]
    fn com_range_unit_product() {
        let r = adaptive_admissible_com_range(&arch(0.1, FRAC_PI_6, FRAC_PI_4, FRAC_PI_4));
        assert!(r.closed_form_lower_bound.abs() < 1e-15);
        let (lo, hi) = r.interval.unwrap();
        assert!((lo - 0.1).abs() < 1e-15);
        assert_eq!(hi, 0.2);
    }

    #[test]
    fn com_range_thirty_degrees() {
        let r = adaptive_admissible_com_range(&arch(0.1, FRAC_PI_6, FRAC_PI_6, FRAC_PI_6));
        assert!((r.closed_form_lower_bound - 0.4).abs() < 1e-12);
        let (lo, hi) = r.interval.unwrap();
        assert!((lo - 0.05).abs() < 1e-12);
        assert_eq!(hi, 0.2);
    }

    #[test]
    fn com_range_empty_when_heel_lifts() {
        let r = adaptive_admissible_com_range(&arch(0.1, 1.2, 0.5, 1.2));
        assert!(r.interval.is_none());
    }

    #[test]
    fn com_range_matches_dense_sign_scan() {
        for &(a1, a2, ah) in &[
            (0.3, 0.4, 0.5),
            (0.2, 1.1, 0.9),
            (0.6, 0.2, 0.3),
            (0.7, 0.7, 0.7),
        ] {
            let r = adaptive_admissible_com_range(&arch(0.0, a1, a2, ah));
            let admissible: Vec<f64> = (0..=2000)
                .map(|i| 0.2 * i as f64 / 2000.0)
                .filter(|&x| adaptive_arch_forces(&arch(x, a1, a2, ah)).admissible())
                .collect();
            match r.interval {
                None => assert!(admissible.is_empty()),
                Some((lo, hi)) => {
                    let first = admissible[0];
                    let last = *admissible.last().unwrap();
                    assert!(first >= lo - 1e-12 && first - lo <= 0.2 / 2000.0 + 1e-12);
                    assert!((last - hi).abs() < 1e-12);
                }
            }
        }
    }
}
