//! Initial-data presets. Every preset rescales `v₀` to unit mass and starts
//! from the radiative flux compatible with `(v₀, θ₀)`.

use std::f64::consts::PI;
use std::str::FromStr;

use radhydro_core::radiation::init_compatible_q;
use radhydro_core::{Grid, Params, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, InitialSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// `(1, 0, 1)`.
    Equilibrium,
    /// `v₀ = 1 + α_v sin 2πx`, `u₀ = α_u sin 2πx`, `θ₀ = 1 + α_θ cos 2πx`.
    SingleMode,
    /// `single_mode` plus `α2_v sin 4πx`, `α2_u sin 4πx`, `α2_θ cos 4πx`.
    TwoMode,
    /// Seeded uniform noise, low-pass filtered to `1 ≤ |k| ≤ cutoff` and
    /// scaled to peak `noise_amplitude`, added to `(1, 0, 1)`.
    RandomSmooth,
    /// Read from a CSV file with columns `v,u,theta`, one row per cell.
    Tabulated,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Equilibrium,
        Preset::SingleMode,
        Preset::TwoMode,
        Preset::RandomSmooth,
        Preset::Tabulated,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Equilibrium => "equilibrium",
            Preset::SingleMode => "single_mode",
            Preset::TwoMode => "two_mode",
            Preset::RandomSmooth => "random_smooth",
            Preset::Tabulated => "tabulated",
        }
    }
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| format!("unknown preset `{s}`"))
    }
}

fn smooth_noise(rng: &mut ChaCha8Rng, grid: &Grid, cutoff: usize, amplitude: f64) -> Result<Vec<f64>, ConfigError> {
    let core = |e: radhydro_core::Error| ConfigError::new(Some("initial.cutoff"), e.to_string());
    let white: Vec<f64> = (0..grid.n_cells()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut spectrum = grid.dft(&white).map_err(core)?;
    for (m, c) in grid.modes().zip(spectrum.iter_mut()) {
        if m == 0 || m.unsigned_abs() as usize > cutoff {
            *c *= 0.0;
        }
    }
    let mut field = grid.idft(&spectrum).map_err(core)?;
    let peak = field.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak > 0.0 {
        field.iter_mut().for_each(|x| *x *= amplitude / peak);
    }
    Ok(field)
}

/// `(v, u, θ)` columns.
type Columns = (Vec<f64>, Vec<f64>, Vec<f64>);

fn read_table(spec: &InitialSpec, grid: &Grid) -> Result<Columns, ConfigError> {
    let key = Some("initial.path");
    let path = spec
        .path
        .as_ref()
        .ok_or_else(|| ConfigError::new(key, "the tabulated preset needs a path"))?;
    let fail = |m: String| ConfigError::new(key, format!("{}: {m}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| fail(e.to_string()))?;
    let headers = reader.headers().map_err(|e| fail(e.to_string()))?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| fail(format!("missing column `{name}`")))
    };
    let cols = [column("v")?, column("u")?, column("theta")?];
    let (mut v, mut u, mut theta) = (Vec::new(), Vec::new(), Vec::new());
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| fail(e.to_string()))?;
        let mut vals = [0.0; 3];
        for (slot, &c) in vals.iter_mut().zip(&cols) {
            let text = record.get(c).unwrap_or("").trim();
            *slot = text
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| fail(format!("row {}: `{text}` is not a finite number", row + 2)))?;
        }
        v.push(vals[0]);
        u.push(vals[1]);
        theta.push(vals[2]);
    }
    if v.len() != grid.n_cells() {
        return Err(fail(format!("{} rows for {} cells", v.len(), grid.n_cells())));
    }
    Ok((v, u, theta))
}

/// Builds the initial state. `v₀` is divided by `h Σ v₀`; `q₀` solves the
/// radiation equation for `(v₀, θ₀)`.
pub fn make_initial_data(spec: &InitialSpec, seed: u64, grid: &Grid, params: &Params) -> Result<State, ConfigError> {
    let s1 = |x: f64| (2.0 * PI * x).sin();
    let c1 = |x: f64| (2.0 * PI * x).cos();
    let s2 = |x: f64| (4.0 * PI * x).sin();
    let c2 = |x: f64| (4.0 * PI * x).cos();
    let dominant = |k1: &'static str, a1: f64, k2: &'static str, a2: f64| {
        if spec.preset == Preset::TwoMode && a2.abs() > a1.abs() {
            k2
        } else {
            k1
        }
    };
    let (v_key, theta_key) = match spec.preset {
        Preset::Equilibrium => ("initial.preset", "initial.preset"),
        Preset::SingleMode | Preset::TwoMode => (
            dominant("initial.alpha_v", spec.alpha_v, "initial.alpha2_v", spec.alpha2_v),
            dominant(
                "initial.alpha_theta",
                spec.alpha_theta,
                "initial.alpha2_theta",
                spec.alpha2_theta,
            ),
        ),
        Preset::RandomSmooth => ("initial.noise_amplitude", "initial.noise_amplitude"),
        Preset::Tabulated => ("initial.path", "initial.path"),
    };
    let (v, u, theta) = match spec.preset {
        Preset::Equilibrium => {
            let n = grid.n_cells();
            (vec![1.0; n], vec![0.0; n], vec![1.0; n])
        }
        Preset::SingleMode => (
            grid.sample(|x| 1.0 + spec.alpha_v * s1(x)),
            grid.sample(|x| spec.alpha_u * s1(x)),
            grid.sample(|x| 1.0 + spec.alpha_theta * c1(x)),
        ),
        Preset::TwoMode => (
            grid.sample(|x| 1.0 + spec.alpha_v * s1(x) + spec.alpha2_v * s2(x)),
            grid.sample(|x| spec.alpha_u * s1(x) + spec.alpha2_u * s2(x)),
            grid.sample(|x| 1.0 + spec.alpha_theta * c1(x) + spec.alpha2_theta * c2(x)),
        ),
        Preset::RandomSmooth => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let dv = smooth_noise(&mut rng, grid, spec.cutoff, spec.noise_amplitude)?;
            let du = smooth_noise(&mut rng, grid, spec.cutoff, spec.noise_amplitude)?;
            let dt = smooth_noise(&mut rng, grid, spec.cutoff, spec.noise_amplitude)?;
            (
                dv.iter().map(|d| 1.0 + d).collect(),
                du,
                dt.iter().map(|d| 1.0 + d).collect(),
            )
        }
        Preset::Tabulated => read_table(spec, grid)?,
    };
    let nonpositive = |field: &[f64], name: &str, key: &str| {
        field.iter().enumerate().find(|(_, &x)| !(x > 0.0)).map(|(j, &x)| {
            ConfigError::new(
                Some(key),
                format!("initial {name} is {x} at cell {j}; it must stay positive"),
            )
        })
    };
    if let Some(e) = nonpositive(&v, "v", v_key).or_else(|| nonpositive(&theta, "theta", theta_key)) {
        return Err(e);
    }
    let mass = grid
        .quadrature(&v)
        .map_err(|e| ConfigError::new(Some(v_key), e.to_string()))?;
    let v: Vec<f64> = v.iter().map(|x| x / mass).collect();
    if let Some(e) = nonpositive(&v, "v after renormalization", v_key) {
        return Err(e);
    }
    let q =
        init_compatible_q(&v, &theta, grid, params).map_err(|e| ConfigError::new(Some(theta_key), e.to_string()))?;
    Ok(State { t: 0.0, v, u, theta, q })
}
