//! Cyclic tridiagonal systems, solved by a Sherman–Morrison correction of
//! two ordinary Thomas solves.

use crate::error::{check_len, Error, Result};

/// Relative pivot floor: pivots below `PIVOT_FLOOR · max|diag|` are singular.
pub const PIVOT_FLOOR: f64 = 1e-13;

/// Row `j` reads `sub[j]·x[j−1] + diag[j]·x[j] + sup[j]·x[j+1] = rhs[j]`
/// with indices taken modulo `n`, so `sub[0]` and `sup[n−1]` are the
/// periodic corner entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicTridiagonal {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

impl CyclicTridiagonal {
    pub fn new(sub: Vec<f64>, diag: Vec<f64>, sup: Vec<f64>) -> Result<Self> {
        check_len(diag.len(), sub.len())?;
        check_len(diag.len(), sup.len())?;
        if diag.len() < 3 {
            return Err(Error::Invalid("cyclic system needs at least 3 rows".into()));
        }
        Ok(Self { sub, diag, sup })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.len();
        check_len(n, x.len())?;
        Ok((0..n)
            .map(|j| {
                let jm = (j + n - 1) % n;
                let jp = (j + 1) % n;
                self.sub[j] * x[jm] + self.diag[j] * x[j] + self.sup[j] * x[jp]
            })
            .collect())
    }

    /// Row-sum norm `‖A‖_∞`.
    pub fn norm_inf(&self) -> f64 {
        (0..self.len())
            .map(|j| self.sub[j].abs() + self.diag[j].abs() + self.sup[j].abs())
            .fold(0.0, f64::max)
    }

    /// Scaled residual `‖Ax − rhs‖_∞ / (‖A‖_∞‖x‖_∞ + ‖rhs‖_∞)`.
    pub fn scaled_residual(&self, x: &[f64], rhs: &[f64]) -> Result<f64> {
        check_len(self.len(), rhs.len())?;
        let ax = self.apply(x)?;
        let res = ax.iter().zip(rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let scale = self.norm_inf() * norm_inf(x) + norm_inf(rhs);
        Ok(if scale > 0.0 { res / scale } else { res })
    }
}

pub(crate) fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Thomas algorithm on the non-cyclic part. Rows are `a[j] x[j−1] + b[j] x[j] + c[j] x[j+1]`
/// with `a[0]` and `c[n−1]` ignored.
fn thomas(a: &[f64], b: &[f64], c: &[f64], rhs: &[f64], floor: f64) -> Result<Vec<f64>> {
    let n = b.len();
    let mut cp = vec![0.0; n];
    let mut x = vec![0.0; n];
    let mut pivot = b[0];
    if pivot.abs() < floor {
        return Err(Error::Singular { pivot, floor });
    }
    cp[0] = c[0] / pivot;
    x[0] = rhs[0] / pivot;
    for j in 1..n {
        pivot = b[j] - a[j] * cp[j - 1];
        if !(pivot.abs() >= floor) {
            return Err(Error::Singular { pivot, floor });
        }
        cp[j] = c[j] / pivot;
        x[j] = (rhs[j] - a[j] * x[j - 1]) / pivot;
    }
    for j in (0..n - 1).rev() {
        x[j] -= cp[j] * x[j + 1];
    }
    Ok(x)
}

/// Solves `A x = rhs` for a cyclic tridiagonal `A`.
pub fn solve_cyclic_tridiagonal(matrix: &CyclicTridiagonal, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = matrix.len();
    check_len(n, rhs.len())?;
    let CyclicTridiagonal { sub, diag, sup } = matrix;
    let floor = PIVOT_FLOOR * norm_inf(diag);
    if floor == 0.0 {
        return Err(Error::Singular { pivot: 0.0, floor });
    }

    let alpha = sup[n - 1]; // A[n−1][0]
    let beta = sub[0]; // A[0][n−1]
    let gamma = -diag[0];

    let mut b = diag.clone();
    b[0] -= gamma;
    b[n - 1] -= alpha * beta / gamma;

    let y = thomas(sub, &b, sup, rhs, floor)?;
    let mut corner = vec![0.0; n];
    corner[0] = gamma;
    corner[n - 1] = alpha;
    let z = thomas(sub, &b, sup, &corner, floor)?;

    // x = y − (vᵀy / (1 + vᵀz)) z with v = (1, 0, …, 0, β/γ).
    let denom = 1.0 + z[0] + beta * z[n - 1] / gamma;
    let denom_scale = 1.0 + z[0].abs() + (beta * z[n - 1] / gamma).abs();
    if !(denom.abs() >= 1e3 * f64::EPSILON * denom_scale * n as f64) {
        return Err(Error::Singular {
            pivot: denom,
            floor: 1e3 * f64::EPSILON * denom_scale * n as f64,
        });
    }
    let fact = (y[0] + beta * y[n - 1] / gamma) / denom;
    Ok(y.iter().zip(&z).map(|(yi, zi)| yi - fact * zi).collect())
}
