//! The radiative flux `q`: the elliptic solve that slaves it to `(v, θ)`,
//! an Eulerian Fourier-space oracle, the torus Green kernel and the
//! pointwise bound `q_x ≤ b v θ⁴` that follows from its sign.

mod kernel;

pub use kernel::{
    certify_kernel_nonpositive, kernel_closed_form, kernel_series, tabulate_kernel, KernelCertificate, KernelRow,
    KernelSpec,
};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Field, Result};
use crate::grid::Grid;
use crate::model::{first_nonpositive, Params, State};
use crate::tridiag::{solve_cyclic_tridiagonal, CyclicTridiagonal};

/// Scaled residual accepted for any radiation solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct RadiationSolve {
    pub q: Vec<f64>,
    /// Scaled ∞-norm residual of the discrete equation.
    pub residual: f64,
    /// `h Σ v_j q_j`.
    pub weighted_sum: f64,
}

/// Assembles `−D_face[(D_face q)/v_face] + a v q` and its right-hand side
/// `−b D_centered(θ⁴) + source`.
fn assemble(
    v: &[f64],
    theta: &[f64],
    source: Option<&[f64]>,
    grid: &Grid,
    params: &Params,
) -> Result<(CyclicTridiagonal, Vec<f64>)> {
    let n = grid.n_cells();
    check_len(n, v.len())?;
    check_len(n, theta.len())?;
    first_nonpositive(v, Field::SpecificVolume)?;
    first_nonpositive(theta, Field::Temperature)?;

    let inv_h2 = 1.0 / (grid.h() * grid.h());
    // w[i] = 1 / v at face i
    let w: Vec<f64> = grid.face_average(v)?.iter().map(|vf| 1.0 / vf).collect();
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    for j in 0..n {
        let wl = w[j];
        let wr = w[grid.next(j)];
        sub[j] = -wl * inv_h2;
        sup[j] = -wr * inv_h2;
        diag[j] = (wl + wr) * inv_h2 + params.a * v[j];
    }

    let theta4: Vec<f64> = theta.iter().map(|t| t.powi(4)).collect();
    let mut rhs = grid.diff_centered(&theta4)?;
    for r in &mut rhs {
        *r *= -params.b;
    }
    if let Some(src) = source {
        check_len(n, src.len())?;
        rhs.iter_mut().zip(src).for_each(|(r, s)| *r += s);
    }
    Ok((CyclicTridiagonal::new(sub, diag, sup)?, rhs))
}

/// Solves `−(q_x/v)_x + a v q + b(θ⁴)_x = 0` on the Lagrangian grid.
pub fn solve_radiation_lagrangian(v: &[f64], theta: &[f64], grid: &Grid, params: &Params) -> Result<RadiationSolve> {
    solve_radiation_with_source(v, theta, None, grid, params)
}

/// As [`solve_radiation_lagrangian`] with an additive right-hand side, used
/// by manufactured-solution runs.
pub fn solve_radiation_with_source(
    v: &[f64],
    theta: &[f64],
    source: Option<&[f64]>,
    grid: &Grid,
    params: &Params,
) -> Result<RadiationSolve> {
    let (matrix, rhs) = assemble(v, theta, source, grid, params)?;
    let q = solve_cyclic_tridiagonal(&matrix, &rhs)?;
    let residual = matrix.scaled_residual(&q, &rhs)?;
    if !(residual <= RESIDUAL_TOL) {
        return Err(Error::Diagnostic(format!(
            "radiation residual {residual:e} exceeds {RESIDUAL_TOL:e}"
        )));
    }
    let weighted_sum = grid.h() * v.iter().zip(&q).map(|(a, b)| a * b).sum::<f64>();
    Ok(RadiationSolve {
        q,
        residual,
        weighted_sum,
    })
}

/// Scaled residual of the discrete radiation equation for a given `q`.
pub fn radiation_residual(v: &[f64], theta: &[f64], q: &[f64], grid: &Grid, params: &Params) -> Result<f64> {
    let (matrix, rhs) = assemble(v, theta, None, grid, params)?;
    check_len(grid.n_cells(), q.len())?;
    matrix.scaled_residual(q, &rhs)
}

/// Initial flux satisfying the compatibility condition
/// `−(q₀'/v₀)' + a v₀ q₀ + b(θ₀⁴)' = 0`.
pub fn init_compatible_q(v0: &[f64], theta0: &[f64], grid: &Grid, params: &Params) -> Result<Vec<f64>> {
    Ok(solve_radiation_lagrangian(v0, theta0, grid, params)?.q)
}

/// Eulerian spectral solve: `q̂(k) = −2πbki/(4π²k²+a) · θ̂⁴(k)`.
///
/// The highest mode of an even-length grid has no conjugate partner and is
/// dropped, which keeps the output real.
pub fn solve_radiation_euler_spectral(theta4: &[f64], grid: &Grid, kernel: &KernelSpec) -> Result<Vec<f64>> {
    let n = grid.n_cells();
    check_len(n, theta4.len())?;
    let coeffs = grid.dft(theta4)?;
    let nyquist = if n.is_multiple_of(2) {
        Some(-(n as i64) / 2)
    } else {
        None
    };
    let qhat: Vec<Complex64> = grid
        .modes()
        .zip(coeffs)
        .map(|(k, c)| {
            if Some(k) == nyquist {
                return Complex64::new(0.0, 0.0);
            }
            let kf = k as f64;
            let factor = Complex64::new(0.0, -2.0 * PI * kernel.b * kf / (4.0 * PI * PI * kf * kf + kernel.a));
            factor * c
        })
        .collect();
    let q = grid.idft_complex(&qhat)?;
    let scale = q.iter().fold(1e-300f64, |m, z| m.max(z.re.abs()));
    let imag = q.iter().fold(0.0f64, |m, z| m.max(z.im.abs()));
    if imag > 1e-12 * scale.max(1.0) {
        return Err(Error::Diagnostic(format!("spectral flux has imaginary part {imag:e}")));
    }
    Ok(q.into_iter().map(|z| z.re).collect())
}

/// Outcome of the discrete pointwise check `D_centered q − b v θ⁴ ≤ tol`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointwiseReport {
    /// `max_j [(D q)_j − b v_j θ_j⁴]`.
    pub max_margin: f64,
    /// Cell where the maximum is attained.
    pub cell: usize,
    /// `10 h² max_j(b v_j θ_j⁴)`.
    pub tolerance: f64,
    pub pass: bool,
}

/// The margin field `(D_centered q)_j − b v_j θ_j⁴`.
pub fn pointwise_margin(state: &State, grid: &Grid, params: &Params) -> Result<Vec<f64>> {
    let dq = grid.diff_centered(&state.q)?;
    check_len(grid.n_cells(), state.v.len())?;
    check_len(grid.n_cells(), state.theta.len())?;
    Ok(dq
        .iter()
        .zip(state.v.iter().zip(&state.theta))
        .map(|(d, (v, t))| d - params.b * v * t.powi(4))
        .collect())
}

pub fn check_pointwise_bound(state: &State, grid: &Grid, params: &Params) -> Result<PointwiseReport> {
    let margin = pointwise_margin(state, grid, params)?;
    let (cell, max_margin) =
        margin.iter().copied().enumerate().fold(
            (0, f64::NEG_INFINITY),
            |acc, (j, m)| if m > acc.1 { (j, m) } else { acc },
        );
    let peak = state
        .v
        .iter()
        .zip(&state.theta)
        .map(|(v, t)| params.b * v * t.powi(4))
        .fold(0.0, f64::max);
    let tolerance = 10.0 * grid.h() * grid.h() * peak;
    Ok(PointwiseReport {
        max_margin,
        cell,
        tolerance,
        pass: max_margin <= tolerance,
    })
}
