//! Physical constants, the per-cell state, and the constitutive relations of
//! an ideal polytropic gas with the conductivity law `κ(v, θ) = κ₁ + κ₂ v θ^β`.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Field, Result};

/// Physical constants. All dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    /// Viscosity μ.
    pub mu: f64,
    /// Constant part of the conductivity, κ₁.
    pub kappa1: f64,
    /// Temperature-coupled conductivity coefficient, κ₂.
    pub kappa2: f64,
    /// Conductivity exponent β.
    pub beta: f64,
    /// Gas constant R.
    #[serde(rename = "R")]
    pub r: f64,
    /// Adiabatic exponent γ.
    pub gamma: f64,
    /// Absorption coefficient a.
    pub a: f64,
    /// Stefan–Boltzmann constant b.
    pub b: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            mu: 1.0,
            kappa1: 1.0,
            kappa2: 1.0,
            beta: 10.0,
            r: 1.0,
            gamma: 5.0 / 3.0,
            a: 1.0,
            b: 1.0,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mu", self.mu),
            ("kappa1", self.kappa1),
            ("kappa2", self.kappa2),
            ("beta", self.beta),
            ("R", self.r),
            ("a", self.a),
            ("b", self.b),
        ];
        for (what, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Domain { what, value });
            }
        }
        if !(self.gamma > 1.0 && self.gamma.is_finite()) {
            return Err(Error::Domain {
                what: "gamma",
                value: self.gamma,
            });
        }
        Ok(())
    }

    /// Specific heat at constant volume, `R/(γ−1)`.
    pub fn cv(&self) -> f64 {
        self.r / (self.gamma - 1.0)
    }
}

fn positive(what: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain { what, value })
    }
}

/// Lagrangian pressure `p = Rθ/v`.
pub fn pressure(v: f64, theta: f64, params: &Params) -> Result<f64> {
    Ok(params.r * positive("theta", theta)? / positive("v", v)?)
}

/// Specific internal energy `e = c_v θ`.
pub fn internal_energy(theta: f64, params: &Params) -> Result<f64> {
    Ok(params.cv() * positive("theta", theta)?)
}

/// Heat conductivity `κ₁ + κ₂ v θ^β`.
pub fn conductivity(v: f64, theta: f64, params: &Params) -> Result<f64> {
    let v = positive("v", v)?;
    let theta = positive("theta", theta)?;
    Ok(params.kappa1 + params.kappa2 * v * theta.powf(params.beta))
}

/// Normalized entropy `½u² + R(v − ln v − 1) + c_v(θ − ln θ − 1)` around `(1, 0, 1)`.
pub fn entropy_density(v: f64, u: f64, theta: f64, params: &Params) -> Result<f64> {
    let v = positive("v", v)?;
    let theta = positive("theta", theta)?;
    Ok(0.5 * u * u + params.r * phi(v) + params.cv() * phi(theta))
}

/// `s − ln s − 1`, evaluated so that it stays nonnegative near `s = 1`.
fn phi(s: f64) -> f64 {
    let d = s - 1.0;
    (d - d.ln_1p()).max(0.0)
}

// Unchecked variants for inner loops where positivity is already established.
#[inline]
pub(crate) fn kappa_unchecked(v: f64, theta: f64, params: &Params) -> f64 {
    params.kappa1 + params.kappa2 * v * theta.powf(params.beta)
}

#[inline]
pub(crate) fn eta_unchecked(v: f64, u: f64, theta: f64, params: &Params) -> f64 {
    0.5 * u * u + params.r * phi(v) + params.cv() * phi(theta)
}

/// Fields `(v, u, θ, q)` on the cell centers at time `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub t: f64,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub theta: Vec<f64>,
    pub q: Vec<f64>,
}

impl State {
    /// Constant state `(v, u, θ)` with `q = 0`.
    pub fn uniform(n_cells: usize, v: f64, u: f64, theta: f64) -> Self {
        Self {
            t: 0.0,
            v: vec![v; n_cells],
            u: vec![u; n_cells],
            theta: vec![theta; n_cells],
            q: vec![0.0; n_cells],
        }
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    /// Checks field lengths and strict positivity of `v` and `θ`.
    pub fn validate(&self, n_cells: usize) -> Result<()> {
        for field in [&self.v, &self.u, &self.theta, &self.q] {
            check_len(n_cells, field.len())?;
        }
        if !(self.t >= 0.0) {
            return Err(Error::Domain {
                what: "t",
                value: self.t,
            });
        }
        first_nonpositive(&self.v, Field::SpecificVolume)?;
        first_nonpositive(&self.theta, Field::Temperature)?;
        for (field, kind) in [(&self.u, Field::Velocity), (&self.q, Field::RadiativeFlux)] {
            if let Some((cell, &value)) = field.iter().enumerate().find(|(_, x)| !x.is_finite()) {
                return Err(Error::Positivity {
                    field: kind,
                    cell,
                    value,
                });
            }
        }
        Ok(())
    }
}

pub(crate) fn first_nonpositive(values: &[f64], field: Field) -> Result<()> {
    match values.iter().enumerate().find(|(_, x)| !(**x > 0.0 && x.is_finite())) {
        Some((cell, &value)) => Err(Error::Positivity { field, cell, value }),
        None => Ok(()),
    }
}
