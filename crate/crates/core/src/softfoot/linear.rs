//! Small-angle form of the foot balance and its block-inverse solution.
//!
//! With `S_i ≈ Σ_{j≤i} q_j` and `C_i ≈ 1` the balance reduces to
//!
//! ```text
//! [ -𝔼        ℛᵀ  dᵀ ] [ q    ]   [ m_E ]
//! [  ℛ        0   0  ] [ T    ] = [ σ   ]
//! [  c        0   0  ] [ L F3 ]   [ δ/L ]
//! ```
//!
//! where `F2` has been eliminated with the contact-moment balance
//! `F_P x_H = D₂ F2 + D₃ F3`, `D₂ = √(n²L² + δ²)`, `D₃ = √((n+2)²L² + δ²)`.

use nalgebra::{DMatrix, DVector, Vector2};

use super::nonlinear::residual_norm_of;
use super::params::{EquilibriumState, FootLoad, SoftFootParams, SolveMethod};
use crate::error::{Error, Result};

/// Upper-bidiagonal difference matrix with unit diagonal and `-1` above it.
pub fn difference_matrix(size: usize) -> DMatrix<f64> {
    DMatrix::from_fn(size, size, |i, j| {
        if i == j {
            1.0
        } else if j == i + 1 {
            -1.0
        } else {
            0.0
        }
    })
}

/// Inverse of [`difference_matrix`]: ones on and above the diagonal.
pub fn difference_matrix_inverse(size: usize) -> DMatrix<f64> {
    DMatrix::from_fn(size, size, |i, j| if j >= i { 1.0 } else { 0.0 })
}

/// `[[M_{n+2}^{-T}, 0], [0, 0]]`: partial-sum operator on all but the last joint.
pub fn partial_sum_block(size: usize) -> DMatrix<f64> {
    DMatrix::from_fn(size, size, |i, j| {
        if i + 1 < size && j + 1 < size && j <= i {
            1.0
        } else {
            0.0
        }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearEquilibriumSystem {
    /// Square `(n+5)` block matrix.
    pub matrix: DMatrix<f64>,
    /// `(m_E, σ, δ/L)`.
    pub rhs: DVector<f64>,
    /// Joint stiffness `E = diag(e₀, e₁, …)`.
    pub joint_stiffness: DMatrix<f64>,
    /// Effective stiffness `𝔼 = E + M⁻¹ [[M^{-T}, 0], [0, 0]] κ`.
    pub effective_stiffness: DMatrix<f64>,
    /// Load-dependent gain `κ = (F_P x_H + e₀ β) cos ᾱ L / (b sin(ᾱ+β̄))`.
    pub stiffness_gain: f64,
    /// Coupling columns `[ℛᵀ dᵀ]`, `(n+3) × 2`.
    pub coupling: DMatrix<f64>,
    /// Constraint rows `[ℛ; c]`, `2 × (n+3)`.
    pub constraints: DMatrix<f64>,
    /// `m_E`.
    pub load_vector: DVector<f64>,
    /// `(σ, δ/L)`.
    pub constraint_rhs: Vector2<f64>,
    /// `c = (n+3, n+2, …, 1)`.
    pub ground_row: DVector<f64>,
    pub d: DVector<f64>,
    pub e_r: DVector<f64>,
    pub e_f: DMatrix<f64>,
    /// Contact lever arms `(D₂, D₃)` used to eliminate `F2`.
    pub contact_arms: (f64, f64),
    /// Derivative of `κ` with respect to `F_P`.
    pub gain_per_newton: f64,
    /// Derivative of `m_E` with respect to `F_P`.
    pub load_vector_per_newton: DVector<f64>,
}

impl LinearEquilibriumSystem {
    pub fn joints(&self) -> usize {
        self.load_vector.len()
    }
}

pub fn assemble_linear_system(
    params: &SoftFootParams,
    load: &FootLoad,
) -> Result<LinearEquilibriumSystem> {
    params.validate()?;
    let lever = params.arch_lever()?;
    let joints = params.joints();
    let n = params.n as f64;
    let l = params.phalanx_length;
    let delta = params.terrain_height;
    let (sa, ca) = params.alpha_bar.sin_cos();
    let beta = params.pretension_angle;
    let e0 = params.arch_stiffness;
    let fp = load.force;
    let xh = params.load_arm;

    let m_inv = difference_matrix_inverse(joints);
    let stiffness = DMatrix::from_diagonal(&params.stiffness_diagonal());
    let gain = (fp * xh + e0 * beta) * ca * l / lever;
    let gain_per_newton = xh * ca * l / lever;
    let correction = &m_inv * partial_sum_block(joints);
    let effective = &stiffness + &correction * gain;

    let e_r = DVector::from_fn(joints, |i, _| if i <= params.n { l * sa } else { 0.0 });
    let e_f = DMatrix::from_fn(joints, 3, |i, j| match j {
        0 => 0.0,
        1 => {
            if i <= params.n {
                l
            } else {
                0.0
            }
        }
        _ => l,
    });
    let d2 = (n * n * l * l + delta * delta).sqrt();
    let d3 = ((n + 2.0).powi(2) * l * l + delta * delta).sqrt();
    let d = &m_inv * &e_f * DVector::from_vec(vec![0.0, -d3 / d2, 1.0]) / l;

    let m_inv_er = &m_inv * &e_r;
    let reaction_gain = (fp * xh + e0 * beta) / lever - fp * xh / (d2 * sa);
    let mut load_vector = &m_inv_er * reaction_gain;
    load_vector[0] -= e0 * beta;
    let load_vector_per_newton = &m_inv_er * (xh / lever - xh / (d2 * sa));

    let pulleys = params.pulley_vector();
    let ground_row = DVector::from_fn(joints, |i, _| (joints - i) as f64);
    let mut coupling = DMatrix::zeros(joints, 2);
    coupling.set_column(0, &pulleys);
    coupling.set_column(1, &d);
    let mut constraints = DMatrix::zeros(2, joints);
    constraints.set_row(0, &pulleys.transpose());
    constraints.set_row(1, &ground_row.transpose());
    let constraint_rhs = Vector2::new(params.tendon_length, delta / l);

    let size = joints + 2;
    let mut matrix = DMatrix::zeros(size, size);
    matrix
        .view_mut((0, 0), (joints, joints))
        .copy_from(&(-&effective));
    matrix
        .view_mut((0, joints), (joints, 2))
        .copy_from(&coupling);
    matrix
        .view_mut((joints, 0), (2, joints))
        .copy_from(&constraints);
    let mut rhs = DVector::zeros(size);
    rhs.rows_mut(0, joints).copy_from(&load_vector);
    rhs[joints] = constraint_rhs.x;
    rhs[joints + 1] = constraint_rhs.y;

    Ok(LinearEquilibriumSystem {
        matrix,
        rhs,
        joint_stiffness: stiffness,
        effective_stiffness: effective,
        stiffness_gain: gain,
        coupling,
        constraints,
        load_vector,
        constraint_rhs,
        ground_row,
        d,
        e_r,
        e_f,
        contact_arms: (d2, d3),
        gain_per_newton,
        load_vector_per_newton,
    })
}

/// Solution `(q, T, L·F3)` of the block system.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSolution {
    pub q: DVector<f64>,
    pub tension: f64,
    pub scaled_toe_force: f64,
}

/// Reciprocal 1-norm condition number, `1 / (‖A‖₁ ‖A⁻¹‖₁)`; zero if singular.
pub fn reciprocal_condition(matrix: &DMatrix<f64>) -> f64 {
    let one_norm = |m: &DMatrix<f64>| {
        m.column_iter()
            .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    };
    match matrix.clone().try_inverse() {
        Some(inv) if inv.iter().all(|v| v.is_finite()) => 1.0 / (one_norm(matrix) * one_norm(&inv)),
        _ => 0.0,
    }
}

const SINGULAR_RCOND: f64 = 1e-14;

fn solve_dense(matrix: &DMatrix<f64>, rhs: &DVector<f64>) -> Result<DVector<f64>> {
    let rcond = reciprocal_condition(matrix);
    if rcond < SINGULAR_RCOND {
        return Err(Error::SingularMatrix { rcond });
    }
    let lu = matrix.clone().lu();
    let mut x = lu.solve(rhs).ok_or(Error::SingularMatrix { rcond })?;
    // one step of iterative refinement
    let r = rhs - matrix * &x;
    if let Some(dx) = lu.solve(&r) {
        x += dx;
    }
    Ok(x)
}

/// Direct dense solve of the block system.
pub fn solve_linear(system: &LinearEquilibriumSystem) -> Result<LinearSolution> {
    let joints = system.joints();
    let y = solve_dense(&system.matrix, &system.rhs)?;
    Ok(LinearSolution {
        q: y.rows(0, joints).into_owned(),
        tension: y[joints],
        scaled_toe_force: y[joints + 1],
    })
}

/// Closed-form block inversion of an assembled system:
///
/// `q = −(I − 𝔼⁻¹B G⁻¹C) 𝔼⁻¹ m_E + 𝔼⁻¹B G⁻¹ (σ, δ/L)` with
/// `B = [ℛᵀ dᵀ]`, `C = [ℛ; c]`, `G = C 𝔼⁻¹ B`.
pub fn closed_form_from_system(system: &LinearEquilibriumSystem) -> Result<DVector<f64>> {
    let joints = system.joints();
    let e = &system.effective_stiffness;
    let rcond = reciprocal_condition(e);
    if rcond < SINGULAR_RCOND {
        return Err(Error::SingularMatrix { rcond });
    }
    let e_lu = e.clone().lu();
    let solve_e = |m: &DMatrix<f64>| e_lu.solve(m).ok_or(Error::SingularMatrix { rcond });
    let e_inv_b = solve_e(&system.coupling)?;
    let e_inv_m = solve_e(&DMatrix::from_column_slice(
        joints,
        1,
        system.load_vector.as_slice(),
    ))?;
    let g = &system.constraints * &e_inv_b;
    let g_rcond = reciprocal_condition(&g);
    if g_rcond < SINGULAR_RCOND {
        return Err(Error::ConstraintDegeneracy { rcond: g_rcond });
    }
    let g_inv = g
        .try_inverse()
        .ok_or(Error::ConstraintDegeneracy { rcond: g_rcond })?;
    let gain = &e_inv_b * g_inv;
    let projector = DMatrix::identity(joints, joints) - &gain * &system.constraints;
    let rhs = DMatrix::from_column_slice(2, 1, system.constraint_rhs.as_slice());
    let q = -(projector * e_inv_m) + gain * rhs;
    Ok(q.column(0).into_owned())
}

pub fn solve_closed_form(params: &SoftFootParams, load: &FootLoad) -> Result<DVector<f64>> {
    closed_form_from_system(&assemble_linear_system(params, load)?)
}

/// `∂q/∂F_P` of the small-angle solution, by differentiating the block
/// system: `A ∂y = ∂b − ∂A y`.
pub fn closed_form_load_derivative(
    params: &SoftFootParams,
    load: &FootLoad,
) -> Result<DVector<f64>> {
    let system = assemble_linear_system(params, load)?;
    let joints = system.joints();
    let y = solve_dense(&system.matrix, &system.rhs)?;
    let correction = difference_matrix_inverse(joints) * partial_sum_block(joints);
    let mut d_matrix = DMatrix::zeros(joints + 2, joints + 2);
    d_matrix
        .view_mut((0, 0), (joints, joints))
        .copy_from(&(-correction * system.gain_per_newton));
    let mut d_rhs = DVector::zeros(joints + 2);
    d_rhs
        .rows_mut(0, joints)
        .copy_from(&system.load_vector_per_newton);
    let dy = solve_dense(&system.matrix, &(d_rhs - d_matrix * y))?;
    Ok(dy.rows(0, joints).into_owned())
}

/// Small-angle equilibrium with contact forces recovered from the eliminated
/// balances, scored against the nonlinear residual.
pub fn linear_state(
    params: &SoftFootParams,
    load: &FootLoad,
    method: SolveMethod,
) -> Result<EquilibriumState> {
    let system = assemble_linear_system(params, load)?;
    let (q, tension, scaled_toe) = match method {
        SolveMethod::ClosedForm => {
            let q = closed_form_from_system(&system)?;
            // recover T and L F3 from the first two joint rows
            let b = system.load_vector.clone() + &system.effective_stiffness * &q;
            let coupling = system.coupling.clone();
            let normal = coupling.transpose() * &coupling;
            let y = normal
                .lu()
                .solve(&(coupling.transpose() * b))
                .ok_or(Error::ConstraintDegeneracy { rcond: 0.0 })?;
            (q, y[0], y[1])
        }
        _ => {
            let s = solve_linear(&system)?;
            (s.q, s.tension, s.scaled_toe_force)
        }
    };
    let (d2, d3) = system.contact_arms;
    let f3 = scaled_toe / params.phalanx_length;
    let f2 = (load.force * params.load_arm - f3 * d3) / d2;
    let f1 = load.force - f2 - f3;
    let mut state = EquilibriumState {
        q,
        f1,
        f2,
        f3,
        tension,
        residual_norm: 0.0,
        iterations: 0,
        method,
    };
    state.residual_norm = residual_norm_of(params, load, &state)?;
    Ok(state)
}
