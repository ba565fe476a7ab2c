//! Compliance to compression, sole kinematics and arch-compression measures.

use nalgebra::{DVector, Vector2};
use serde::{Deserialize, Serialize};

use super::linear::{closed_form_load_derivative, solve_closed_form};
use super::nonlinear::{partial_sums, solve_equilibrium};
use super::params::{EquilibriumState, FootLoad, SoftFootParams};
use crate::error::{Error, Result};

/// Row vector `J(q) = L cos²ᾱ (S₀, S₁, …, S_{n+2})`.
pub fn contact_jacobian(params: &SoftFootParams, q: &DVector<f64>) -> Result<DVector<f64>> {
    if q.len() != params.joints() {
        return Err(Error::DimensionMismatch {
            what: "q",
            expected: params.joints(),
            found: q.len(),
        });
    }
    let scale = params.phalanx_length * params.alpha_bar.cos().powi(2);
    Ok(partial_sums(q).map(|phi| scale * phi.sin()))
}

/// Which equilibrium the compliance is taken from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComplianceModel {
    /// Central difference over the nonlinear equilibrium.
    #[default]
    Nonlinear,
    /// Central difference over the closed-form small-angle solution.
    ClosedForm,
    /// Analytic load derivative of the closed-form solution.
    ClosedFormAnalytic,
}

/// Default central-difference step: `max(1e-4 F_P, 1e-3 N)`.
pub fn default_load_step(load: &FootLoad) -> f64 {
    (1e-4 * load.force).max(1e-3)
}

/// Compliance to compression at the equilibrium under `load` [m/N].
///
/// `J(q) ∂q/∂F_P` is the rate of the sole height `h(q)`; the arch flattens
/// under load, so the value is reported as `−J ∂q/∂F_P` and is positive for
/// a foot that yields.
pub fn compliance_to_compression(
    params: &SoftFootParams,
    load: &FootLoad,
    step: Option<f64>,
    model: ComplianceModel,
) -> Result<f64> {
    let h = step.unwrap_or_else(|| default_load_step(load));
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::invalid("h_F", "load step must be finite and > 0"));
    }
    let plus = FootLoad::raw(load.force + h);
    let minus = FootLoad::raw(load.force - h);
    let (q, dq) = match model {
        ComplianceModel::Nonlinear => {
            let center = solve_equilibrium(params, load, None)?;
            let up = solve_equilibrium(params, &plus, Some(&center))?;
            let down = solve_equilibrium(params, &minus, Some(&center))?;
            (center.q, (up.q - down.q) / (2.0 * h))
        }
        ComplianceModel::ClosedForm => {
            let q = solve_closed_form(params, load)?;
            let up = solve_closed_form(params, &plus)?;
            let down = solve_closed_form(params, &minus)?;
            (q, (up - down) / (2.0 * h))
        }
        ComplianceModel::ClosedFormAnalytic => (
            solve_closed_form(params, load)?,
            closed_form_load_derivative(params, load)?,
        ),
    };
    Ok(-contact_jacobian(params, &q)?.dot(&dq))
}

/// Sole joint positions and arch attachment points in the sole frame.
#[derive(Clone, Debug, PartialEq)]
pub struct FootShape {
    /// `n + 4` chain points from the heel (origin) to the toe tip [m].
    pub sole: Vec<Vector2<f64>>,
    /// Top of the heel arch, `a (cos ᾱ, sin ᾱ)` from the heel [m].
    pub arch_apex: Vector2<f64>,
    /// Front-arch foot, `b` from the apex at `β̄` below the horizontal [m].
    pub arch_front: Vector2<f64>,
}

impl FootShape {
    /// Height of the toe tip, `L Σ S_i`.
    pub fn endpoint_height(&self) -> f64 {
        self.sole.last().map_or(0.0, |p| p.y)
    }

    /// Highest sole point above the heel–toe chord [m].
    pub fn arch_height(&self) -> f64 {
        let first = self.sole[0];
        let last = self.sole[self.sole.len() - 1];
        let chord = last - first;
        let len = chord.norm();
        if len == 0.0 {
            return 0.0;
        }
        self.sole
            .iter()
            .map(|p| (chord.x * (p.y - first.y) - chord.y * (p.x - first.x)) / len)
            .fold(0.0, f64::max)
    }
}

/// Forward kinematics of the sole chain with segment angles `Φ_i`.
pub fn foot_shape(params: &SoftFootParams, q: &DVector<f64>) -> Result<FootShape> {
    if q.len() != params.joints() {
        return Err(Error::DimensionMismatch {
            what: "q",
            expected: params.joints(),
            found: q.len(),
        });
    }
    let l = params.phalanx_length;
    let mut sole = Vec::with_capacity(q.len() + 1);
    let mut p = Vector2::zeros();
    sole.push(p);
    for phi in partial_sums(q).iter() {
        p += Vector2::new(phi.cos(), phi.sin()) * l;
        sole.push(p);
    }
    let arch_apex = Vector2::new(params.alpha_bar.cos(), params.alpha_bar.sin()) * params.arch_a;
    let arch_front =
        arch_apex + Vector2::new(params.beta_bar.cos(), -params.beta_bar.sin()) * params.arch_b;
    Ok(FootShape {
        sole,
        arch_apex,
        arch_front,
    })
}

/// Arch compression under `load` relative to the unloaded equilibrium.
#[derive(Clone, Debug, PartialEq)]
pub struct Compression {
    /// Sole arch height with no load [m]; flattening it completely is the
    /// full compression width.
    pub unloaded_height: f64,
    pub loaded_height: f64,
}

impl Compression {
    /// Drop of the arch height [m].
    pub fn stroke(&self) -> f64 {
        self.unloaded_height - self.loaded_height
    }

    /// Fraction of the full compression width used, in `[0, 1]` for a
    /// flattening arch.
    pub fn fraction(&self) -> f64 {
        if self.unloaded_height == 0.0 {
            0.0
        } else {
            self.stroke() / self.unloaded_height
        }
    }
}

/// Arch height of the nonlinear equilibrium at zero load and at `load`.
pub fn arch_compression(params: &SoftFootParams, load: &FootLoad) -> Result<Compression> {
    let rest = solve_equilibrium(params, &FootLoad::unloaded(), None)?;
    let loaded = solve_equilibrium(params, load, Some(&rest))
        .or_else(|_| solve_equilibrium(params, load, None))?;
    Ok(Compression {
        unloaded_height: foot_shape(params, &rest.q)?.arch_height(),
        loaded_height: foot_shape(params, &loaded.q)?.arch_height(),
    })
}

/// Equilibrium shapes for an ascending list of loads; each solve is seeded
/// with the previous state.
pub fn equilibrium_path(
    params: &SoftFootParams,
    loads: &[FootLoad],
) -> Vec<Result<EquilibriumState>> {
    let mut previous: Option<EquilibriumState> = None;
    loads
        .iter()
        .map(|load| {
            let state = solve_equilibrium(params, load, previous.as_ref())
                .or_else(|_| solve_equilibrium(params, load, None));
            if let Ok(s) = &state {
                previous = Some(s.clone());
            }
            state
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobian_vanishes_at_rest() {
        let p = SoftFootParams::nominal();
        let j = contact_jacobian(&p, &DVector::zeros(9)).unwrap();
        assert!(j.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn jacobian_direct_evaluation() {
        let p = SoftFootParams::nominal();
        let k = p.joints();
        let q = DVector::from_element(k, std::f64::consts::FRAC_PI_2 / k as f64);
        let j = contact_jacobian(&p, &q).unwrap();
        let scale = p.phalanx_length * p.alpha_bar.cos().powi(2);
        for i in 0..k {
            let phi = (i + 1) as f64 * std::f64::consts::FRAC_PI_2 / k as f64;
            assert!((j[i] - scale * phi.sin()).abs() < 1e-15);
            if i > 0 {
                assert!(j[i] > j[i - 1]);
            }
        }
        let mut longer = p.clone();
        longer.phalanx_length *= 3.0;
        let j3 = contact_jacobian(&longer, &q).unwrap();
        assert!((j3 - j * 3.0).amax() < 1e-15);
    }

    #[test]
    fn jacobian_rejects_wrong_length() {
        let p = SoftFootParams::nominal();
        assert!(contact_jacobian(&p, &DVector::zeros(3)).is_err());
        assert!(foot_shape(&p, &DVector::zeros(3)).is_err());
    }

    #[test]
    fn straight_chain_at_rest() {
        let p = SoftFootParams::nominal();
        let shape = foot_shape(&p, &DVector::zeros(9)).unwrap();
        assert_eq!(shape.sole.len(), 10);
        assert!((shape.sole[9].x - 9.0 * 0.02).abs() < 1e-15);
        assert!(shape.sole.iter().all(|pt| pt.y == 0.0));
        assert_eq!(shape.arch_height(), 0.0);
        // the closed arch lands on the sole n links ahead of the heel
        assert!((shape.arch_front - Vector2::new(0.12, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn uniform_bend_matches_circular_arc() {
        // equal joint angles trace a regular polygon inscribed in a circle of
        // radius ρ = L / (2 sin(θ/2)); the midpoint sagitta over the chord
        // follows from the arc geometry
        let mut p = SoftFootParams::nominal();
        p.n = 7; // 10 joints
        let k = 10;
        let l = p.phalanx_length;
        for &theta in &[0.01, 0.03, 0.05] {
            let mut q = DVector::from_element(k, theta);
            q[0] = theta / 2.0; // symmetric about the vertical through the midpoint
            let shape = foot_shape(&p, &q).unwrap();
            let rho = l / (2.0 * (theta / 2.0).sin());
            let half_angle = k as f64 * theta / 2.0;
            let chord = 2.0 * rho * half_angle.sin();
            let sagitta = rho * (1.0 - half_angle.cos());
            let first = shape.sole[0];
            let last = shape.sole[k];
            assert!(((last - first).norm() - chord).abs() / chord < 0.01);
            let mid = shape.sole[k / 2];
            let c = last - first;
            let dist = (c.x * (mid.y - first.y) - c.y * (mid.x - first.x)).abs() / c.norm();
            assert!(
                (dist - sagitta).abs() / sagitta < 0.01,
                "{dist} vs {sagitta}"
            );
        }
    }

    #[test]
    fn endpoint_height_is_ground_expression() {
        let p = SoftFootParams::nominal();
        let q = DVector::from_fn(9, |i, _| 0.02 * (i as f64 - 3.0));
        let shape = foot_shape(&p, &q).unwrap();
        let expected = p.phalanx_length * partial_sums(&q).map(f64::sin).sum();
        assert!((shape.endpoint_height() - expected).abs() < 1e-15);
    }

    #[test]
    fn compliance_is_null_in_the_rigid_configuration() {
        let mut p = SoftFootParams::nominal();
        p.pretension_angle = 0.0;
        let c =
            compliance_to_compression(&p, &FootLoad::unloaded(), None, ComplianceModel::Nonlinear)
                .unwrap();
        assert!(c.abs() <= 1e-9);
    }

    #[test]
    fn finite_difference_matches_analytic_derivative() {
        let p = SoftFootParams::nominal();
        let load = FootLoad::from_mass(1.5).unwrap();
        let fd = compliance_to_compression(&p, &load, None, ComplianceModel::ClosedForm).unwrap();
        let exact = compliance_to_compression(&p, &load, None, ComplianceModel::ClosedFormAnalytic)
            .unwrap();
        assert!((fd - exact).abs() <= 1e-6 * exact.abs(), "{fd} vs {exact}");
    }
}
