//! Nonlinear static balance of the articulated foot.
//!
//! Unknowns are `x = (q, F1, F2, F3, T)`, `n + 7` values in total. The
//! residual stacks, in order:
//!
//! * `n + 3` joint moment rows `M m + Lˣ + Lʸ`, with the joint torques
//!   `m = −E q + e_E β_pre + ℛᵀ T` and the inter-link reactions already
//!   eliminated through the horizontal and vertical force balances;
//! * the vertical force balance `F_P − F1 − F2 − F3`;
//! * the moment balance about the heel
//!   `F_P x_H − A F2 − (A + L (cos q_n + cos(q_n + q_{n+1}))) F3`, with
//!   `A = b cos β̄ + a cos ᾱ` the arch span;
//! * the ground constraint `L Σ S_i − δ`;
//! * the tendon constraint `ℛ q − σ`.
//!
//! `S_i`, `C_i` are sine and cosine of the partial sums `q_0 + … + q_i`.

use nalgebra::DVector;

use super::params::{EquilibriumState, FootLoad, SoftFootParams, SolveMethod};
use crate::error::{Error, Result};
use crate::newton::{self, max_norm, NewtonOptions};

/// Absolute angles of the sole segments, `Φ_i = q_0 + … + q_i`.
pub fn partial_sums(q: &DVector<f64>) -> DVector<f64> {
    let mut acc = 0.0;
    q.map(|qi| {
        acc += qi;
        acc
    })
}

/// Joint torques from the springs and the tendon.
pub fn joint_torques(params: &SoftFootParams, q: &DVector<f64>, tension: f64) -> DVector<f64> {
    let mut m = -params.stiffness_diagonal().component_mul(q) + params.pulley_vector() * tension;
    m[0] += params.arch_stiffness * params.pretension_angle;
    m
}

/// Newton tolerance for a given load: `1e-10 · max(1, F_P L)`.
pub fn residual_tolerance(params: &SoftFootParams, load: &FootLoad) -> f64 {
    1e-10 * (load.force * params.phalanx_length).max(1.0)
}

/// Residual of the `n + 7` balance equations at `x = (q, F1, F2, F3, T)`.
pub fn assemble_residual(
    params: &SoftFootParams,
    load: &FootLoad,
    x: &DVector<f64>,
) -> Result<DVector<f64>> {
    params.validate()?;
    let dim = params.joints() + 4;
    if x.len() != dim {
        return Err(Error::DimensionMismatch {
            what: "candidate state",
            expected: dim,
            found: x.len(),
        });
    }
    let arch_reaction = params.arch_reaction(load)?;
    Ok(residual_unchecked(params, load, arch_reaction, x))
}

pub(crate) fn residual_unchecked(
    params: &SoftFootParams,
    load: &FootLoad,
    arch_reaction: f64,
    x: &DVector<f64>,
) -> DVector<f64> {
    let n = params.n;
    let joints = params.joints();
    let l = params.phalanx_length;
    let q = x.rows(0, joints).into_owned();
    let (f1, f2, f3, tension) = (x[joints], x[joints + 1], x[joints + 2], x[joints + 3]);

    let phi = partial_sums(&q);
    let m = joint_torques(params, &q, tension);
    let horizontal = arch_reaction * params.alpha_bar.cos() * l;
    let vertical = (arch_reaction * params.alpha_bar.sin() - f2 - f3) * l;

    let mut r = DVector::zeros(joints + 4);
    for i in 0..joints {
        let mm = if i + 1 < joints {
            m[i] - m[i + 1]
        } else {
            m[i]
        };
        let lx = if i + 1 < joints {
            -horizontal * phi[i].sin()
        } else {
            0.0
        };
        let ly = if i <= n {
            -vertical * phi[i].cos()
        } else {
            f3 * l * phi[i].cos()
        };
        r[i] = mm + lx + ly;
    }

    let span = params.arch_span();
    let toe = l * (q[n].cos() + (q[n] + q[n + 1]).cos());
    r[joints] = load.force - f1 - f2 - f3;
    r[joints + 1] = load.force * params.load_arm - span * f2 - (span + toe) * f3;
    r[joints + 2] = l * phi.map(f64::sin).sum() - params.terrain_height;
    r[joints + 3] = params.pulley_vector().dot(&q) - params.tendon_length;
    r
}

/// Rigid-foot starting point: `q = 0`, `T = 0`, heel and toe forces from
/// the lever balance about the heel with the middle contact unloaded.
pub fn default_initial_guess(params: &SoftFootParams, load: &FootLoad) -> DVector<f64> {
    let joints = params.joints();
    let toe_arm = params.arch_span() + 2.0 * params.phalanx_length;
    let f3 = load.force * params.load_arm / toe_arm;
    let mut x = DVector::zeros(joints + 4);
    x[joints] = load.force - f3;
    x[joints + 2] = f3;
    x
}

/// Damped Newton solve of the nonlinear balance.
pub fn solve_equilibrium(
    params: &SoftFootParams,
    load: &FootLoad,
    initial_guess: Option<&EquilibriumState>,
) -> Result<EquilibriumState> {
    params.validate()?;
    let arch_reaction = params.arch_reaction(load)?;
    let x0 = match initial_guess {
        Some(state) => {
            let x = state.unknowns();
            if x.len() != params.joints() + 4 {
                return Err(Error::DimensionMismatch {
                    what: "initial guess",
                    expected: params.joints() + 4,
                    found: x.len(),
                });
            }
            x
        }
        None => default_initial_guess(params, load),
    };
    let options = NewtonOptions {
        tolerance: residual_tolerance(params, load),
        ..NewtonOptions::default()
    };
    let report = newton::solve(
        |x| residual_unchecked(params, load, arch_reaction, x),
        x0,
        &options,
    )?;
    Ok(state_from_unknowns(
        params,
        &report.x,
        report.residual_norm,
        report.iterations,
        SolveMethod::Nonlinear,
    ))
}

pub(crate) fn state_from_unknowns(
    params: &SoftFootParams,
    x: &DVector<f64>,
    residual_norm: f64,
    iterations: usize,
    method: SolveMethod,
) -> EquilibriumState {
    let joints = params.joints();
    EquilibriumState {
        q: x.rows(0, joints).into_owned(),
        f1: x[joints],
        f2: x[joints + 1],
        f3: x[joints + 2],
        tension: x[joints + 3],
        residual_norm,
        iterations,
        method,
    }
}

/// Max-norm of the nonlinear residual at a state from any solver.
pub fn residual_norm_of(
    params: &SoftFootParams,
    load: &FootLoad,
    state: &EquilibriumState,
) -> Result<f64> {
    Ok(max_norm(&assemble_residual(
        params,
        load,
        &state.unknowns(),
    )?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newton::fd_jacobian;

    fn bare(n: usize) -> SoftFootParams {
        let mut p = SoftFootParams::nominal().with_links(n, 2.0);
        p.pretension_angle = 0.0;
        p
    }

    #[test]
    fn unloaded_rest_is_exact_zero() {
        let p = bare(6);
        let r =
            assemble_residual(&p, &FootLoad::unloaded(), &DVector::zeros(p.joints() + 4)).unwrap();
        assert!(r.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn wrong_dimension_is_rejected() {
        let p = bare(3);
        let err = assemble_residual(&p, &FootLoad::unloaded(), &DVector::zeros(5)).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 10,
                found: 5,
                ..
            }
        ));
    }

    #[test]
    fn joint_perturbation_sparsity() {
        // q_j enters the torque rows j-1 and j through M m, rows i ≥ j
        // through the partial sums, the heel-moment row only for the toe
        // joints n and n+1, and both constraint rows.
        let p = bare(4);
        let load = FootLoad::new(20.0).unwrap();
        let joints = p.joints();
        let x = default_initial_guess(&p, &load);
        let jac = fd_jacobian(
            &|v: &DVector<f64>| assemble_residual(&p, &load, v).unwrap(),
            &x,
            &assemble_residual(&p, &load, &x).unwrap(),
            1e-7,
        );
        for j in 0..joints {
            for i in 0..joints + 4 {
                let touched = jac[(i, j)].abs() > 1e-6;
                let expected = if i < joints {
                    // the last row carries only m_{n+2} and the toe force
                    i == j || i + 1 == j || (j <= i && i + 1 < joints)
                } else {
                    // the first two rows vanish since cos'(0) = 0 at the rest pose
                    i > joints + 1
                };
                assert_eq!(touched, expected, "row {i} col {j}: {}", jac[(i, j)]);
            }
        }
    }

    #[test]
    fn unloaded_solve_stays_at_rest() {
        let p = bare(6);
        let s = solve_equilibrium(&p, &FootLoad::unloaded(), None).unwrap();
        assert_eq!(s.iterations, 0);
        assert!(s.q.iter().all(|v| *v == 0.0));
        assert_eq!((s.f1, s.f2, s.f3, s.tension), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn loaded_solve_meets_tolerance_and_is_a_fixed_point() {
        let p = SoftFootParams::nominal();
        let load = FootLoad::from_mass(1.5).unwrap();
        let s = solve_equilibrium(&p, &load, None).unwrap();
        let tol = residual_tolerance(&p, &load);
        assert!(s.residual_norm <= tol);
        assert!(residual_norm_of(&p, &load, &s).unwrap() <= tol);
        assert!((s.f1 + s.f2 + s.f3 - load.force).abs() <= tol);
        let again = solve_equilibrium(&p, &load, Some(&s)).unwrap();
        assert!(again.iterations <= 2);
    }
}
