//! Semi-implicit time advancement: explicit volume update, implicit
//! viscosity, implicit conduction with a lagged and Picard-refreshed
//! conductivity, then a fresh radiation solve.

pub mod mms;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{Recorder, Trajectory};
use crate::error::{Error, Field, Result};
use crate::grid::Grid;
use crate::model::{first_nonpositive, kappa_unchecked, Params, State};
use crate::radiation::solve_radiation_with_source;
use crate::tridiag::{norm_inf, solve_cyclic_tridiagonal, CyclicTridiagonal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepControl {
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub cfl_advective: f64,
    /// Extra conductivity refreshes after the lagged solve.
    pub picard_iters: usize,
    pub picard_tol: f64,
    pub positivity_shrink: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            dt_init: 1e-4,
            dt_min: 1e-12,
            dt_max: 1e-2,
            cfl_advective: 0.5,
            picard_iters: 1,
            picard_tol: 1e-10,
            positivity_shrink: 0.5,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        for (what, value) in [
            ("dt_init", self.dt_init),
            ("dt_min", self.dt_min),
            ("dt_max", self.dt_max),
            ("picard_tol", self.picard_tol),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::Domain { what, value });
            }
        }
        if !(self.dt_min <= self.dt_init && self.dt_init <= self.dt_max) {
            return Err(Error::Invalid(format!(
                "need dt_min <= dt_init <= dt_max, got {} / {} / {}",
                self.dt_min, self.dt_init, self.dt_max
            )));
        }
        if !(self.cfl_advective > 0.0 && self.cfl_advective <= 1.0) {
            return Err(Error::Domain {
                what: "cfl_advective",
                value: self.cfl_advective,
            });
        }
        if !(self.positivity_shrink > 0.0 && self.positivity_shrink < 1.0) {
            return Err(Error::Domain {
                what: "positivity_shrink",
                value: self.positivity_shrink,
            });
        }
        Ok(())
    }
}

pub type SourceFn = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Optional right-hand sides `s(t, x)` added to each equation.
#[derive(Default)]
pub struct MmsSources {
    pub s_v: Option<SourceFn>,
    pub s_u: Option<SourceFn>,
    pub s_theta: Option<SourceFn>,
    pub s_q: Option<SourceFn>,
}

impl std::fmt::Debug for MmsSources {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MmsSources")
            .field("s_v", &self.s_v.is_some())
            .field("s_u", &self.s_u.is_some())
            .field("s_theta", &self.s_theta.is_some())
            .field("s_q", &self.s_q.is_some())
            .finish()
    }
}

fn sample_source(source: Option<&SourceFn>, t: f64, grid: &Grid) -> Option<Vec<f64>> {
    source.map(|f| grid.sample(|x| f(t, x)))
}

fn add_into(target: &mut [f64], extra: Option<&[f64]>, scale: f64) {
    if let Some(extra) = extra {
        target.iter_mut().zip(extra).for_each(|(t, e)| *t += scale * e);
    }
}

/// Largest `|u| + √(γRθ/v)/v` over the cells.
pub fn signal_speed(state: &State, params: &Params) -> f64 {
    state
        .u
        .iter()
        .zip(state.v.iter().zip(&state.theta))
        .map(|(u, (v, t))| u.abs() + (params.gamma * params.r * t / v).sqrt() / v)
        .fold(0.0, f64::max)
}

/// Conductive face coefficients `κ_face / v_face` for cell values `κ`.
fn face_coefficients(kappa: &[f64], v_face: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    Ok(grid
        .face_average(kappa)?
        .iter()
        .zip(v_face)
        .map(|(k, v)| k / v)
        .collect())
}

/// Assembles `diag_extra + −D_face[c · D_face(·)]` with face coefficients `c`.
fn diffusion_matrix(coeff: &[f64], diag_extra: &[f64], grid: &Grid) -> Result<CyclicTridiagonal> {
    let n = grid.n_cells();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    for j in 0..n {
        let cl = coeff[j] * inv_h2;
        let cr = coeff[grid.next(j)] * inv_h2;
        sub[j] = -cl;
        sup[j] = -cr;
        diag[j] = diag_extra[j] + cl + cr;
    }
    CyclicTridiagonal::new(sub, diag, sup)
}

/// Advances `state` by `dt`.
///
/// A nonpositive `v` or `θ` in any sub-step is returned as
/// [`Error::Positivity`]; the caller decides whether to retry.
pub fn step(
    state: &State,
    dt: f64,
    grid: &Grid,
    params: &Params,
    control: &StepControl,
    sources: Option<&MmsSources>,
) -> Result<State> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain { what: "dt", value: dt });
    }
    let n = grid.n_cells();
    state.validate(n)?;
    let t_new = state.t + dt;
    let src =
        |pick: fn(&MmsSources) -> Option<&SourceFn>, t: f64| sources.and_then(|s| sample_source(pick(s), t, grid));

    // (1) volume
    let du = grid.diff_centered(&state.u)?;
    let mut v: Vec<f64> = state.v.iter().zip(&du).map(|(v, d)| v + dt * d).collect();
    add_into(&mut v, src(|s| s.s_v.as_ref(), state.t).as_deref(), dt);
    first_nonpositive(&v, Field::SpecificVolume)?;
    let v_face = grid.face_average(&v)?;

    // (2) velocity
    let pressure: Vec<f64> = v.iter().zip(&state.theta).map(|(v, t)| params.r * t / v).collect();
    let dp = grid.diff_centered(&pressure)?;
    let mut rhs: Vec<f64> = state.u.iter().zip(&dp).map(|(u, d)| u / dt - d).collect();
    add_into(&mut rhs, src(|s| s.s_u.as_ref(), t_new).as_deref(), 1.0);
    let visc: Vec<f64> = v_face.iter().map(|vf| params.mu / vf).collect();
    let u = solve_cyclic_tridiagonal(&diffusion_matrix(&visc, &vec![1.0 / dt; n], grid)?, &rhs)?;

    // (3) temperature
    let cv = params.cv();
    let du_new = grid.diff_centered(&u)?;
    let du_face = grid.diff_face(&u)?;
    let heating_face: Vec<f64> = du_face
        .iter()
        .zip(&v_face)
        .map(|(d, vf)| params.mu * d * d / vf)
        .collect();
    let dq = grid.diff_centered(&state.q)?;
    let mut rhs: Vec<f64> = (0..n)
        .map(|j| {
            let heating = 0.5 * (heating_face[j] + heating_face[grid.next(j)]);
            cv * state.theta[j] / dt - dq[j] + heating
        })
        .collect();
    add_into(&mut rhs, src(|s| s.s_theta.as_ref(), t_new).as_deref(), 1.0);
    let diag_extra: Vec<f64> = (0..n).map(|j| cv / dt + params.r * du_new[j] / v[j]).collect();

    let solve_theta = |lag: &[f64]| -> Result<Vec<f64>> {
        let kappa: Vec<f64> = v
            .iter()
            .zip(lag)
            .map(|(v, t)| kappa_unchecked(*v, *t, params))
            .collect();
        let coeff = face_coefficients(&kappa, &v_face, grid)?;
        let theta = solve_cyclic_tridiagonal(&diffusion_matrix(&coeff, &diag_extra, grid)?, &rhs)?;
        first_nonpositive(&theta, Field::Temperature)?;
        Ok(theta)
    };
    let mut theta = solve_theta(&state.theta)?;
    for _ in 0..control.picard_iters {
        let refreshed = solve_theta(&theta)?;
        let change: Vec<f64> = refreshed.iter().zip(&theta).map(|(a, b)| a - b).collect();
        let rel = norm_inf(&change) / norm_inf(&refreshed);
        theta = refreshed;
        if rel <= control.picard_tol {
            break;
        }
    }

    // (4) radiation
    let s_q = src(|s| s.s_q.as_ref(), t_new);
    let q = solve_radiation_with_source(&v, &theta, s_q.as_deref(), grid, params)?.q;

    Ok(State {
        t: t_new,
        v,
        u,
        theta,
        q,
    })
}

/// One accepted step as seen by a run observer.
#[derive(Debug, Clone, Copy)]
pub struct Accepted<'a> {
    /// Number of accepted steps since `t = 0`, including this one.
    pub index: usize,
    pub dt: f64,
    pub previous: &'a State,
    pub current: &'a State,
    pub rejections: usize,
}

/// Why a run stopped early, with the last state that was accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationFailure {
    pub reason: String,
    pub step_index: usize,
    pub t: f64,
    pub last_dt: f64,
    pub rejections: usize,
    pub last_state: State,
}

impl std::fmt::Display for SimulationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "simulation failed at step {} (t = {}, dt = {:e}): {}",
            self.step_index, self.t, self.last_dt, self.reason
        )
    }
}

impl std::error::Error for SimulationFailure {}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub final_state: State,
    pub steps: usize,
    pub rejections: usize,
}

/// Step size proposed before any rejection: CFL-limited, capped by `dt_max`
/// (and `dt_init` on the very first step), clipped to land on `t_end`.
pub fn proposed_dt(
    state: &State,
    index: usize,
    t_end: f64,
    grid: &Grid,
    params: &Params,
    control: &StepControl,
) -> f64 {
    let speed = signal_speed(state, params);
    let mut dt = control.dt_max;
    if speed > 0.0 {
        dt = dt.min(control.cfl_advective * grid.h() / speed);
    }
    if index == 0 {
        dt = dt.min(control.dt_init);
    }
    dt.min(t_end - state.t)
}

/// Advances from `initial` (which has already taken `start_index` steps) to
/// `t_end`, handing every accepted step to `observer`.
///
/// The step size depends only on the current state and step index, so a run
/// resumed from any accepted state continues identically.
/// A failure carries the last accepted state, hence the large error type.
#[allow(clippy::too_many_arguments, clippy::result_large_err)]
pub fn advance(
    initial: State,
    start_index: usize,
    t_end: f64,
    grid: &Grid,
    params: &Params,
    control: &StepControl,
    sources: Option<&MmsSources>,
    mut observer: impl FnMut(&Accepted<'_>) -> Result<()>,
) -> std::result::Result<RunOutcome, SimulationFailure> {
    let fail = |reason: String, index: usize, dt: f64, rejections: usize, state: &State| SimulationFailure {
        reason,
        step_index: index,
        t: state.t,
        last_dt: dt,
        rejections,
        last_state: state.clone(),
    };
    if let Err(e) = params
        .validate()
        .and_then(|_| control.validate())
        .and_then(|_| initial.validate(grid.n_cells()))
    {
        return Err(fail(e.to_string(), start_index, 0.0, 0, &initial));
    }
    if !(t_end > initial.t) {
        return Err(fail(
            format!("t_end = {t_end} must exceed the initial time {}", initial.t),
            start_index,
            0.0,
            0,
            &initial,
        ));
    }

    let mut state = initial;
    let mut index = start_index;
    let mut total_rejections = 0;
    while state.t < t_end {
        let mut dt = proposed_dt(&state, index, t_end, grid, params, control);
        let last = dt >= t_end - state.t;
        if dt < control.dt_min && !last {
            return Err(fail(
                format!("time step {dt:e} fell below dt_min = {:e}", control.dt_min),
                index,
                dt,
                total_rejections,
                &state,
            ));
        }
        let mut rejections = 0;
        let next = loop {
            match step(&state, dt, grid, params, control, sources) {
                Ok(mut next) => {
                    if dt >= t_end - state.t {
                        next.t = t_end;
                    }
                    break next;
                }
                Err(Error::Positivity { .. }) => {
                    rejections += 1;
                    total_rejections += 1;
                    dt *= control.positivity_shrink;
                    if dt < control.dt_min {
                        return Err(fail(
                            format!(
                                "time step {dt:e} fell below dt_min = {:e} after {rejections} positivity rejections",
                                control.dt_min
                            ),
                            index,
                            dt,
                            total_rejections,
                            &state,
                        ));
                    }
                }
                Err(e) => return Err(fail(e.to_string(), index, dt, total_rejections, &state)),
            }
        };
        index += 1;
        let accepted = Accepted {
            index,
            dt: next.t - state.t,
            previous: &state,
            current: &next,
            rejections,
        };
        if let Err(e) = observer(&accepted) {
            return Err(fail(e.to_string(), index, dt, total_rejections, &next));
        }
        state = next;
    }
    Ok(RunOutcome {
        final_state: state,
        steps: index - start_index,
        rejections: total_rejections,
    })
}

/// Runs from `initial` to `t_end`, keeping a snapshot every `cadence`
/// accepted steps plus the first and last states.
#[allow(clippy::too_many_arguments, clippy::result_large_err)]
pub fn run(
    initial: State,
    t_end: f64,
    grid: &Grid,
    params: &Params,
    control: &StepControl,
    sources: Option<&MmsSources>,
    cadence: usize,
) -> std::result::Result<Trajectory, SimulationFailure> {
    let mut recorder = Recorder::new(&initial, t_end, cadence, grid, params).map_err(|e| SimulationFailure {
        reason: e.to_string(),
        step_index: 0,
        t: initial.t,
        last_dt: 0.0,
        rejections: 0,
        last_state: initial.clone(),
    })?;
    advance(initial, 0, t_end, grid, params, control, sources, |a| {
        recorder.observe(a.index, a.dt, a.previous, a.current).map(|_| ())
    })?;
    Ok(recorder.finish())
}
