//! Manufactured solution with closed-form sources for every equation,
//! and the fixed-step convergence studies built on it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{step, MmsSources, StepControl};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::{Params, State};
use crate::tridiag::norm_inf;

const K: f64 = 2.0 * PI;

/// `v = 1 + A_v sin 2πx`, `u = A_u sin 2πx cos t`, `θ = 1 + A_θ cos 2πx e^{−t}`,
/// `q = A_q sin 2πx e^{−t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Manufactured {
    pub params: Params,
    pub amp_v: f64,
    pub amp_u: f64,
    pub amp_theta: f64,
    pub amp_q: f64,
}

impl Manufactured {
    pub fn new(params: Params) -> Self {
        Self {
            params,
            amp_v: 0.1,
            amp_u: 0.1,
            amp_theta: 0.1,
            amp_q: 0.1,
        }
    }

    pub fn v(&self, _t: f64, x: f64) -> f64 {
        1.0 + self.amp_v * (K * x).sin()
    }

    pub fn u(&self, t: f64, x: f64) -> f64 {
        self.amp_u * (K * x).sin() * t.cos()
    }

    pub fn theta(&self, t: f64, x: f64) -> f64 {
        1.0 + self.amp_theta * (K * x).cos() * (-t).exp()
    }

    pub fn q(&self, t: f64, x: f64) -> f64 {
        self.amp_q * (K * x).sin() * (-t).exp()
    }

    pub fn exact_state(&self, grid: &Grid, t: f64) -> State {
        State {
            t,
            v: grid.sample(|x| self.v(t, x)),
            u: grid.sample(|x| self.u(t, x)),
            theta: grid.sample(|x| self.theta(t, x)),
            q: grid.sample(|x| self.q(t, x)),
        }
    }

    /// `v_t − u_x`.
    pub fn s_v(&self, t: f64, x: f64) -> f64 {
        -K * self.amp_u * (K * x).cos() * t.cos()
    }

    /// `u_t + p_x − (μ u_x / v)_x`.
    pub fn s_u(&self, t: f64, x: f64) -> f64 {
        let p = &self.params;
        let (s, c) = (K * x).sin_cos();
        let (au, av, at) = (self.amp_u, self.amp_v, self.amp_theta);
        let e = (-t).exp();
        let v = self.v(t, x);
        let vx = K * av * c;
        let th = self.theta(t, x);
        let thx = -K * at * s * e;
        let ut = -au * s * t.sin();
        let ux = K * au * c * t.cos();
        let uxx = -K * K * au * s * t.cos();
        let px = p.r * (thx * v - th * vx) / (v * v);
        let visc = p.mu * (uxx * v - ux * vx) / (v * v);
        ut + px - visc
    }

    /// `c_v θ_t + q_x − μ u_x²/v + (Rθ/v) u_x − (κ θ_x / v)_x`.
    pub fn s_theta(&self, t: f64, x: f64) -> f64 {
        let p = &self.params;
        let (s, c) = (K * x).sin_cos();
        let (au, av, at, aq) = (self.amp_u, self.amp_v, self.amp_theta, self.amp_q);
        let e = (-t).exp();
        let v = self.v(t, x);
        let vx = K * av * c;
        let th = self.theta(t, x);
        let tht = -at * c * e;
        let thx = -K * at * s * e;
        let thxx = -K * K * at * c * e;
        let ux = K * au * c * t.cos();
        let qx = K * aq * c * e;
        let kappa = p.kappa1 + p.kappa2 * v * th.powf(p.beta);
        let kappa_x = p.kappa2 * (vx * th.powf(p.beta) + p.beta * v * th.powf(p.beta - 1.0) * thx);
        let conduction = (kappa_x * thx + kappa * thxx) / v - kappa * thx * vx / (v * v);
        p.cv() * tht + qx - p.mu * ux * ux / v + p.r * th / v * ux - conduction
    }

    /// `−(q_x / v)_x + a v q + b (θ⁴)_x`.
    pub fn s_q(&self, t: f64, x: f64) -> f64 {
        let p = &self.params;
        let (s, c) = (K * x).sin_cos();
        let (av, at, aq) = (self.amp_v, self.amp_theta, self.amp_q);
        let e = (-t).exp();
        let v = self.v(t, x);
        let vx = K * av * c;
        let th = self.theta(t, x);
        let thx = -K * at * s * e;
        let q = aq * s * e;
        let qx = K * aq * c * e;
        let qxx = -K * K * aq * s * e;
        -(qxx * v - qx * vx) / (v * v) + p.a * v * q + 4.0 * p.b * th.powi(3) * thx
    }

    pub fn sources(&self) -> MmsSources {
        let (a, b, c, d) = (*self, *self, *self, *self);
        MmsSources {
            s_v: Some(Box::new(move |t, x| a.s_v(t, x))),
            s_u: Some(Box::new(move |t, x| b.s_u(t, x))),
            s_theta: Some(Box::new(move |t, x| c.s_theta(t, x))),
            s_q: Some(Box::new(move |t, x| d.s_q(t, x))),
        }
    }

    /// Fixed-step integration from the exact state at `t = 0` to `t_end`.
    pub fn integrate(&self, grid: &Grid, dt: f64, t_end: f64, control: &StepControl) -> Result<State> {
        let steps = (t_end / dt).round();
        if !(steps >= 1.0) || ((steps * dt - t_end).abs() > 1e-12 * t_end) {
            return Err(Error::Invalid(format!(
                "t_end = {t_end} is not an integer multiple of dt = {dt}"
            )));
        }
        let sources = self.sources();
        let mut state = self.exact_state(grid, 0.0);
        for i in 0..steps as usize {
            state = step(&state, dt, grid, &self.params, control, Some(&sources))?;
            state.t = (i + 1) as f64 * dt;
        }
        Ok(state)
    }

    /// Largest ∞-norm error over the four fields.
    pub fn error(&self, state: &State, grid: &Grid) -> f64 {
        let exact = self.exact_state(grid, state.t);
        [
            (&state.v, &exact.v),
            (&state.u, &exact.u),
            (&state.theta, &exact.theta),
            (&state.q, &exact.q),
        ]
        .iter()
        .map(|(a, b)| norm_inf(&a.iter().zip(b.iter()).map(|(x, y)| x - y).collect::<Vec<_>>()))
        .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    /// Refinement parameter (h or dt) per level, coarse to fine.
    pub levels: Vec<f64>,
    pub errors: Vec<f64>,
    /// `log2(e_k / e_{k+1})` for successive halvings.
    pub orders: Vec<f64>,
}

impl ConvergenceStudy {
    fn from(levels: Vec<f64>, errors: Vec<f64>) -> Self {
        let orders = levels
            .windows(2)
            .zip(errors.windows(2))
            .map(|(l, e)| (e[0] / e[1]).ln() / (l[0] / l[1]).ln())
            .collect();
        Self { levels, errors, orders }
    }
}

/// Error against the exact solution for each grid in `cells`, at a fixed
/// step small enough that the time error is negligible.
pub fn spatial_study(
    m: &Manufactured,
    cells: &[usize],
    dt: f64,
    t_end: f64,
    control: &StepControl,
) -> Result<ConvergenceStudy> {
    let mut hs = Vec::new();
    let mut errors = Vec::new();
    for &n in cells {
        let grid = Grid::new(n)?;
        let state = m.integrate(&grid, dt, t_end, control)?;
        hs.push(grid.h());
        errors.push(m.error(&state, &grid));
    }
    Ok(ConvergenceStudy::from(hs, errors))
}

/// Error against the exact solution for each step in `dts` on a grid fine
/// enough that the space error is negligible.
pub fn temporal_study(
    m: &Manufactured,
    n_cells: usize,
    dts: &[f64],
    t_end: f64,
    control: &StepControl,
) -> Result<ConvergenceStudy> {
    let grid = Grid::new(n_cells)?;
    let mut errors = Vec::new();
    for &dt in dts {
        let state = m.integrate(&grid, dt, t_end, control)?;
        errors.push(m.error(&state, &grid));
    }
    Ok(ConvergenceStudy::from(dts.to_vec(), errors))
}
