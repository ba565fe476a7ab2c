use std::f64::consts::{FRAC_PI_3, FRAC_PI_6};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Standard gravity used to convert load masses to forces [m/s²].
pub const GRAVITY: f64 = 9.81;

/// Pulley radius of the prototype tendon routing [m].
pub const NOMINAL_PULLEY_RADIUS: f64 = 1.5e-3;

/// Sole joint stiffness `ē` of the default configuration [N·m/rad].
///
/// Together with the arch stiffness it places the 25 kg equilibrium near
/// half of the arch flattening stroke.
pub const NOMINAL_JOINT_STIFFNESS: f64 = 4.0;

/// Arch spring stiffness `e₀` of the default configuration [N·m/rad].
pub const NOMINAL_ARCH_STIFFNESS: f64 = 4.0;

pub const NOMINAL_LINKS: usize = 6;
pub const NOMINAL_PHALANX_LENGTH: f64 = 0.02;

/// Constructive parameters of the articulated foot.
///
/// Joints are numbered `0..n+3`: joint 0 couples the front arch to the sole
/// through the arch spring `e₀`, joints `1..=n+2` are the sole and toe
/// joints. Every sole segment has length `L`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SoftFootParams {
    /// Number of sole links under the arch.
    pub n: usize,
    /// Phalanx length `L` [m].
    pub phalanx_length: f64,
    /// Heel-arch length `a` [m].
    pub arch_a: f64,
    /// Front-arch length `b` [m].
    pub arch_b: f64,
    /// Heel-arch angle `ᾱ` with the ground [rad].
    pub alpha_bar: f64,
    /// Front-arch angle `β̄` with the ground [rad].
    pub beta_bar: f64,
    /// Arch spring stiffness `e₀` [N·m/rad].
    pub arch_stiffness: f64,
    /// Joint stiffnesses `e₁..e_{n+2}` [N·m/rad].
    pub joint_stiffness: Vec<f64>,
    /// Pulley radii `r₀..r_{n+2}` [m].
    pub pulley_radii: Vec<f64>,
    /// Tendon length offset `σ` [m].
    pub tendon_length: f64,
    /// Terrain height `δ` seen by the toe [m].
    pub terrain_height: f64,
    /// Rest angle `β_pre` of the arch spring [rad].
    pub pretension_angle: f64,
    /// Horizontal distance of the ankle load from the heel `x_H` [m].
    pub load_arm: f64,
}

impl SoftFootParams {
    /// Nominal foot with uniform sole stiffness `e_bar` and arch stiffness `e0`.
    ///
    /// The arch lengths close the arch triangle over the `n` sole links
    /// (`a cos ᾱ + b cos β̄ = nL`, `a sin ᾱ = b sin β̄`) and the load acts at
    /// `x_H = b`.
    pub fn nominal_with(e_bar: f64, e0: f64) -> Self {
        let n = NOMINAL_LINKS;
        let l = NOMINAL_PHALANX_LENGTH;
        let alpha = FRAC_PI_6;
        let beta = FRAC_PI_3;
        let span = n as f64 * l;
        let s = (alpha + beta).sin();
        let arch_a = span * beta.sin() / s;
        let arch_b = span * alpha.sin() / s;
        Self {
            n,
            phalanx_length: l,
            arch_a,
            arch_b,
            alpha_bar: alpha,
            beta_bar: beta,
            arch_stiffness: e0,
            joint_stiffness: vec![e_bar; n + 2],
            pulley_radii: vec![NOMINAL_PULLEY_RADIUS; n + 3],
            tendon_length: 0.0,
            terrain_height: 0.0,
            pretension_angle: beta,
            load_arm: arch_b,
        }
    }

    pub fn nominal() -> Self {
        Self::nominal_with(NOMINAL_JOINT_STIFFNESS, NOMINAL_ARCH_STIFFNESS)
    }

    /// Same geometry with `n` links, keeping the arch triangle closed.
    pub fn with_links(mut self, n: usize, e_bar: f64) -> Self {
        let span = n as f64 * self.phalanx_length;
        let s = (self.alpha_bar + self.beta_bar).sin();
        self.n = n;
        self.arch_a = span * self.beta_bar.sin() / s;
        self.arch_b = span * self.alpha_bar.sin() / s;
        self.load_arm = self.arch_b;
        self.joint_stiffness = vec![e_bar; n + 2];
        let r = self
            .pulley_radii
            .first()
            .copied()
            .unwrap_or(NOMINAL_PULLEY_RADIUS);
        self.pulley_radii = vec![r; n + 3];
        self
    }

    /// Number of joint angles, `n + 3`.
    pub fn joints(&self) -> usize {
        self.n + 3
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::invalid("n", "n ≥ 1"));
        }
        for (name, v) in [
            ("phalanx_length", self.phalanx_length),
            ("arch_a", self.arch_a),
            ("arch_b", self.arch_b),
            ("arch_stiffness", self.arch_stiffness),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(
                    name,
                    format!("must be finite and > 0 (got {v})"),
                ));
            }
        }
        for (name, v) in [
            ("alpha_bar", self.alpha_bar),
            ("beta_bar", self.beta_bar),
            ("tendon_length", self.tendon_length),
            ("terrain_height", self.terrain_height),
            ("pretension_angle", self.pretension_angle),
            ("load_arm", self.load_arm),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if self.joint_stiffness.len() != self.n + 2 {
            return Err(Error::DimensionMismatch {
                what: "joint_stiffness",
                expected: self.n + 2,
                found: self.joint_stiffness.len(),
            });
        }
        if self.pulley_radii.len() != self.n + 3 {
            return Err(Error::DimensionMismatch {
                what: "pulley_radii",
                expected: self.n + 3,
                found: self.pulley_radii.len(),
            });
        }
        if self
            .joint_stiffness
            .iter()
            .any(|e| !(*e > 0.0 && e.is_finite()))
        {
            return Err(Error::invalid(
                "joint_stiffness",
                "entries must be finite and > 0",
            ));
        }
        if self
            .pulley_radii
            .iter()
            .any(|r| !(*r > 0.0 && r.is_finite()))
        {
            return Err(Error::invalid(
                "pulley_radii",
                "entries must be finite and > 0",
            ));
        }
        let reach = self.joints() as f64 * self.phalanx_length;
        if self.terrain_height.abs() >= reach {
            return Err(Error::invalid(
                "terrain_height",
                format!("|δ| must be below (n+3)·L = {reach}"),
            ));
        }
        Ok(())
    }

    /// Diagonal of the joint stiffness matrix, `(e₀, e₁, …, e_{n+2})`.
    pub fn stiffness_diagonal(&self) -> DVector<f64> {
        DVector::from_iterator(
            self.joints(),
            std::iter::once(self.arch_stiffness).chain(self.joint_stiffness.iter().copied()),
        )
    }

    pub fn pulley_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.pulley_radii)
    }

    /// `b sin(ᾱ + β̄)`, the lever of the arch reaction; rejected when zero.
    pub fn arch_lever(&self) -> Result<f64> {
        let value = self.arch_b * (self.alpha_bar + self.beta_bar).sin();
        if value.abs() < 1e-12 * self.arch_b.max(1.0) {
            return Err(Error::DegenerateArch { value });
        }
        Ok(value)
    }

    /// Horizontal span of the arch, `b cos β̄ + a cos ᾱ`.
    pub fn arch_span(&self) -> f64 {
        self.arch_b * self.beta_bar.cos() + self.arch_a * self.alpha_bar.cos()
    }

    /// Arch reaction `R_M = (F_P x_H + e₀ β_pre) / (b sin(ᾱ + β̄))`.
    pub fn arch_reaction(&self, load: &FootLoad) -> Result<f64> {
        Ok(
            (load.force * self.load_arm + self.arch_stiffness * self.pretension_angle)
                / self.arch_lever()?,
        )
    }
}

impl Default for SoftFootParams {
    fn default() -> Self {
        Self::nominal()
    }
}

/// Vertical load applied by the robot at the ankle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FootLoad {
    /// `F_P` [N].
    pub force: f64,
}

impl FootLoad {
    pub fn new(force: f64) -> Result<Self> {
        if !(force >= 0.0 && force.is_finite()) {
            return Err(Error::invalid("F_P", "load must be finite and ≥ 0"));
        }
        Ok(Self { force })
    }

    pub fn from_mass(kg: f64) -> Result<Self> {
        Self::new(kg * GRAVITY)
    }

    pub fn unloaded() -> Self {
        Self { force: 0.0 }
    }

    /// Same as [`FootLoad::new`] without the sign check; used for
    /// finite differences that straddle zero load.
    pub(crate) fn raw(force: f64) -> Self {
        Self { force }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveMethod {
    Nonlinear,
    Linear,
    ClosedForm,
}

/// Solved configuration and contact forces of the foot.
#[derive(Clone, Debug, PartialEq)]
pub struct EquilibriumState {
    pub q: DVector<f64>,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub tension: f64,
    /// Max-norm of the nonlinear residual at this state.
    pub residual_norm: f64,
    pub iterations: usize,
    pub method: SolveMethod,
}

impl EquilibriumState {
    /// Unknown vector `(q, F1, F2, F3, T)` of the nonlinear residual.
    pub fn unknowns(&self) -> DVector<f64> {
        let n = self.q.len();
        let mut x = DVector::zeros(n + 4);
        x.rows_mut(0, n).copy_from(&self.q);
        x[n] = self.f1;
        x[n + 1] = self.f2;
        x[n + 2] = self.f3;
        x[n + 3] = self.tension;
        x
    }

    pub fn forces(&self) -> [f64; 3] {
        [self.f1, self.f2, self.f3]
    }
}
