//! The representation `v = v₀/(BY)·(1 + (R/μ)∫₀ᵗ θBY/v₀ ds)` evaluated on
//! snapshots.
//!
//! With `B(t,x) = exp(−(1/μ)∫_{a(t)}^x (u − u₀) dy)`, the formula is exact
//! for any anchor choice provided
//! `Y(t) = (v₀(a)/v(t,a))·exp((1/μ)∫₀ᵗ Rθ(s,a)/v(s,a) ds)` with `a = a(t)`
//! held fixed inside the time integral. The variant that integrates along
//! the moving anchor `a(s)` with prefactor `v(t,a)/v₀(a)` is evaluated
//! alongside for comparison.

use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{check_len, Error, Result};
use crate::grid::Grid;
use crate::model::{Params, State};

/// A point `a` with `v(a) = 1`, located between cells `left` and
/// `left + 1` (mod n) at fractional offset `weight`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub x: f64,
    pub left: usize,
    pub weight: f64,
    /// Number of cell pairs around the circle where `v − 1` changes sign.
    pub crossings: usize,
}

impl Anchor {
    fn interpolate(&self, f: &[f64], grid: &Grid) -> f64 {
        (1.0 - self.weight) * f[self.left] + self.weight * f[grid.next(self.left)]
    }
}

/// Crossing of `v = 1` nearest to `x = −½` when scanning rightwards (the
/// segment between the last and first centers counts at both ends), with
/// linear interpolation between centers.
pub fn find_anchor(v: &[f64], grid: &Grid) -> Result<Anchor> {
    let n = grid.n_cells();
    check_len(n, v.len())?;
    let mut best: Option<Anchor> = None;
    let mut crossings = 0;
    for j in 0..n {
        let d0 = v[j] - 1.0;
        let d1 = v[grid.next(j)] - 1.0;
        let weight = if d0 == 0.0 {
            0.0
        } else if d0 * d1 < 0.0 {
            d0 / (d0 - d1)
        } else {
            continue;
        };
        crossings += 1;
        let mut x = grid.centers()[j] + weight * grid.h();
        if x >= 0.5 {
            x -= 1.0;
        }
        if best.is_none_or(|b| x < b.x) {
            best = Some(Anchor {
                x,
                left: j,
                weight,
                crossings: 0,
            });
        }
    }
    let mut anchor = best.ok_or_else(|| Error::Diagnostic("v never crosses 1".into()))?;
    anchor.crossings = crossings;
    Ok(anchor)
}

/// `∫_a^{x_j} g dy` for every cell, by cumulative trapezoid along the
/// centers. Path independent when `h Σ g = 0`.
fn integral_from_anchor(g: &[f64], anchor: &Anchor, grid: &Grid) -> Vec<f64> {
    let n = g.len();
    let h = grid.h();
    let mut cum = vec![0.0; n];
    for j in 1..n {
        cum[j] = cum[j - 1] + 0.5 * h * (g[j - 1] + g[j]);
    }
    let ga = anchor.interpolate(g, grid);
    let at_anchor = cum[anchor.left] + 0.5 * anchor.weight * h * (g[anchor.left] + ga);
    cum.iter().map(|c| c - at_anchor).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepresentationPoint {
    pub t: f64,
    pub anchor: f64,
    pub crossings: usize,
    pub y: f64,
    pub min_b: f64,
    pub max_b: f64,
    /// `max_x |RHS − v| / v`.
    pub max_rel_error: f64,
    pub y_moving_anchor: f64,
    pub max_rel_error_moving_anchor: f64,
}

/// Consumes snapshots in time order; trapezoidal rule between snapshots.
#[derive(Debug, Clone)]
pub struct RepresentationAuditor {
    grid: Grid,
    params: Params,
    v0: Vec<f64>,
    u0: Vec<f64>,
    /// `(t, v, θ)` of every snapshot seen.
    history: Vec<(f64, Vec<f64>, Vec<f64>)>,
    integral: Vec<f64>,
    last_integrand: Vec<f64>,
    moving_exponent: f64,
    last_moving_pressure: f64,
    moving_integral: Vec<f64>,
    last_moving_integrand: Vec<f64>,
}

impl RepresentationAuditor {
    pub fn new(grid: &Grid, params: &Params) -> Self {
        Self {
            grid: grid.clone(),
            params: *params,
            v0: Vec::new(),
            u0: Vec::new(),
            history: Vec::new(),
            integral: Vec::new(),
            last_integrand: Vec::new(),
            moving_exponent: 0.0,
            last_moving_pressure: 0.0,
            moving_integral: Vec::new(),
            last_moving_integrand: Vec::new(),
        }
    }

    pub fn push(&mut self, state: &State) -> Result<RepresentationPoint> {
        let grid = &self.grid;
        let n = grid.n_cells();
        state.validate(n)?;
        let (mu, r) = (self.params.mu, self.params.r);
        if self.history.is_empty() {
            self.v0 = state.v.clone();
            self.u0 = state.u.clone();
        } else if !(state.t > self.history.last().map_or(0.0, |h| h.0)) {
            return Err(Error::Diagnostic("snapshots must arrive in increasing time".into()));
        }
        self.history.push((state.t, state.v.clone(), state.theta.clone()));

        let anchor = find_anchor(&state.v, grid)?;
        let g: Vec<f64> = state.u.iter().zip(&self.u0).map(|(u, u0)| u - u0).collect();
        let b: Vec<f64> = integral_from_anchor(&g, &anchor, grid)
            .iter()
            .map(|i| (-i / mu).exp())
            .collect();

        // Frozen anchor: pressure history at a(t).
        let pressure_at = |v: &[f64], th: &[f64]| r * anchor.interpolate(th, grid) / anchor.interpolate(v, grid);
        let mut exponent = 0.0;
        for w in self.history.windows(2) {
            exponent += 0.5 * (w[1].0 - w[0].0) * (pressure_at(&w[0].1, &w[0].2) + pressure_at(&w[1].1, &w[1].2));
        }
        let v_a = anchor.interpolate(&state.v, grid);
        let v0_a = anchor.interpolate(&self.v0, grid);
        let y = v0_a / v_a * (exponent / mu).exp();

        // Moving anchor a(s).
        let p_now = pressure_at(&state.v, &state.theta);
        let dt = if self.history.len() > 1 {
            state.t - self.history[self.history.len() - 2].0
        } else {
            0.0
        };
        if self.history.len() > 1 {
            self.moving_exponent += 0.5 * dt * (self.last_moving_pressure + p_now);
        }
        self.last_moving_pressure = p_now;
        let y_moving = v_a / v0_a * (self.moving_exponent / mu).exp();

        let integrand: Vec<f64> = (0..n).map(|j| state.theta[j] * b[j] * y / self.v0[j]).collect();
        let moving_integrand: Vec<f64> = (0..n).map(|j| state.theta[j] * b[j] * y_moving / self.v0[j]).collect();
        if self.history.len() == 1 {
            self.integral = vec![0.0; n];
            self.moving_integral = vec![0.0; n];
        } else {
            for j in 0..n {
                self.integral[j] += 0.5 * dt * (self.last_integrand[j] + integrand[j]);
                self.moving_integral[j] += 0.5 * dt * (self.last_moving_integrand[j] + moving_integrand[j]);
            }
        }
        self.last_integrand = integrand;
        self.last_moving_integrand = moving_integrand;

        let error = |yy: f64, integral: &[f64]| {
            (0..n)
                .map(|j| {
                    let rhs = self.v0[j] / (b[j] * yy) * (1.0 + r / mu * integral[j]);
                    (rhs - state.v[j]).abs() / state.v[j]
                })
                .fold(0.0, f64::max)
        };
        Ok(RepresentationPoint {
            t: state.t,
            anchor: anchor.x,
            crossings: anchor.crossings,
            y,
            min_b: b.iter().copied().fold(f64::INFINITY, f64::min),
            max_b: b.iter().copied().fold(0.0, f64::max),
            max_rel_error: error(y, &self.integral),
            y_moving_anchor: y_moving,
            max_rel_error_moving_anchor: error(y_moving, &self.moving_integral),
        })
    }
}

/// Evaluates the representation at every snapshot of `trajectory`.
pub fn representation_check(trajectory: &Trajectory, grid: &Grid, params: &Params) -> Result<Vec<RepresentationPoint>> {
    let mut auditor = RepresentationAuditor::new(grid, params);
    trajectory.snapshots.iter().map(|s| auditor.push(s)).collect()
}
