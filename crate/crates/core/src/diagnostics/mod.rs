//! Audits of the conserved quantities, the entropy balance, the
//! representation formula for `v`, the auxiliary functionals and the
//! extrema along a trajectory.
//!
//! Everything is computed from per-step [`StepRecord`]s and the stored
//! snapshots, either in one pass over a finished [`Trajectory`] or online
//! through an [`Auditor`].

mod audit;
mod representation;

pub use audit::{AuditSummary, Auditor, SnapshotRow};
pub use representation::{find_anchor, representation_check, Anchor, RepresentationAuditor, RepresentationPoint};

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::grid::Grid;
use crate::model::{eta_unchecked, kappa_unchecked, Params, State};
use crate::radiation::check_pointwise_bound;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Conserved {
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    pub radiation_weighted: f64,
}

/// `h Σ v`, `h Σ u`, `h Σ (c_v θ + ½u²)` and `h Σ v q`.
pub fn conserved_quantities(state: &State, grid: &Grid, params: &Params) -> Result<Conserved> {
    state.validate(grid.n_cells())?;
    let h = grid.h();
    let cv = params.cv();
    Ok(Conserved {
        mass: grid.quadrature(&state.v)?,
        momentum: grid.quadrature(&state.u)?,
        energy: h * state
            .u
            .iter()
            .zip(&state.theta)
            .map(|(u, t)| cv * t + 0.5 * u * u)
            .sum::<f64>(),
        radiation_weighted: h * state.v.iter().zip(&state.q).map(|(v, q)| v * q).sum::<f64>(),
    })
}

/// Cellwise integrands of the entropy balance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyIntegrands {
    /// `μ u_x² / (vθ)`
    pub viscous: Vec<f64>,
    /// `κ θ_x² / (vθ²)`
    pub conductive: Vec<f64>,
    /// `a v q² / (4bθ⁵)`
    pub absorption: Vec<f64>,
    /// `q_x² / (4b v θ⁵)`
    pub flux_gradient: Vec<f64>,
    /// `5 q θ_x q_x / (4b v θ⁶)`
    pub cross: Vec<f64>,
}

impl EntropyIntegrands {
    pub fn dissipative(&self) -> [&[f64]; 4] {
        [&self.viscous, &self.conductive, &self.absorption, &self.flux_gradient]
    }
}

/// Derivatives use the centered operator throughout.
pub fn entropy_integrands(state: &State, grid: &Grid, params: &Params) -> Result<EntropyIntegrands> {
    state.validate(grid.n_cells())?;
    let ux = grid.diff_centered(&state.u)?;
    let tx = grid.diff_centered(&state.theta)?;
    let qx = grid.diff_centered(&state.q)?;
    let n = grid.n_cells();
    let (a, b, mu) = (params.a, params.b, params.mu);
    let mut out = EntropyIntegrands {
        viscous: Vec::with_capacity(n),
        conductive: Vec::with_capacity(n),
        absorption: Vec::with_capacity(n),
        flux_gradient: Vec::with_capacity(n),
        cross: Vec::with_capacity(n),
    };
    for j in 0..n {
        let (v, th, q) = (state.v[j], state.theta[j], state.q[j]);
        let th5 = th.powi(5);
        out.viscous.push(mu * ux[j] * ux[j] / (v * th));
        out.conductive
            .push(kappa_unchecked(v, th, params) * tx[j] * tx[j] / (v * th * th));
        out.absorption.push(a * v * q * q / (4.0 * b * th5));
        out.flux_gradient.push(qx[j] * qx[j] / (4.0 * b * v * th5));
        out.cross.push(5.0 * q * tx[j] * qx[j] / (4.0 * b * v * th5 * th));
    }
    Ok(out)
}

/// Scalars measured after every accepted step (and once at the start).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Accepted steps since `t = 0`.
    pub index: usize,
    pub t: f64,
    /// Step that produced this record; zero for the initial record.
    pub dt: f64,
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    pub radiation_weighted: f64,
    /// `h Σ η`.
    pub entropy: f64,
    /// Quadratures of the four dissipative integrands, in the order of
    /// [`EntropyIntegrands::dissipative`].
    pub dissipation: [f64; 4],
    pub cross: f64,
    /// Cellwise minima of the four dissipative integrands.
    pub dissipation_min: [f64; 4],
    /// `h Σ κ θ_t² / v` with the backward-difference `θ_t` of the step;
    /// zero on the initial record.
    pub x_integrand: f64,
    /// `h Σ κ² θ_x² / v²`.
    pub y_quadrature: f64,
    /// `h Σ u_xx² / v²`.
    pub z_quadrature: f64,
    pub min_v: f64,
    pub argmin_v: f64,
    pub max_v: f64,
    pub argmax_v: f64,
    pub min_theta: f64,
    pub argmin_theta: f64,
    pub max_theta: f64,
    pub argmax_theta: f64,
    pub max_pointwise_margin: f64,
    pub pointwise_tolerance: f64,
}

fn extremum(values: &[f64], grid: &Grid, better: impl Fn(f64, f64) -> bool) -> (f64, f64) {
    let mut best = 0;
    for (j, &x) in values.iter().enumerate().skip(1) {
        if better(x, values[best]) {
            best = j;
        }
    }
    (values[best], grid.centers()[best])
}

impl StepRecord {
    /// Measures `state`, which was reached from `previous` in a step of `dt`.
    pub fn measure(
        index: usize,
        dt: f64,
        previous: Option<&State>,
        state: &State,
        grid: &Grid,
        params: &Params,
    ) -> Result<Self> {
        let c = conserved_quantities(state, grid, params)?;
        let ints = entropy_integrands(state, grid, params)?;
        let h = grid.h();
        let sum = |f: &[f64]| h * f.iter().sum::<f64>();
        let min = |f: &[f64]| f.iter().copied().fold(f64::INFINITY, f64::min);
        let d = ints.dissipative();

        let x_integrand = match previous {
            Some(prev) => {
                check_len(grid.n_cells(), prev.theta.len())?;
                if !(dt > 0.0) {
                    return Err(Error::Domain { what: "dt", value: dt });
                }
                h * (0..grid.n_cells())
                    .map(|j| {
                        let tt = (state.theta[j] - prev.theta[j]) / dt;
                        kappa_unchecked(state.v[j], state.theta[j], params) * tt * tt / state.v[j]
                    })
                    .sum::<f64>()
            }
            None => 0.0,
        };
        let tx = grid.diff_centered(&state.theta)?;
        let uxx = grid.diff_second(&state.u)?;
        let mut y_quadrature = 0.0;
        let mut z_quadrature = 0.0;
        for j in 0..grid.n_cells() {
            let (v, th) = (state.v[j], state.theta[j]);
            let k = kappa_unchecked(v, th, params);
            y_quadrature += k * k * tx[j] * tx[j] / (v * v);
            z_quadrature += uxx[j] * uxx[j] / (v * v);
        }
        let (min_v, argmin_v) = extremum(&state.v, grid, |a, b| a < b);
        let (max_v, argmax_v) = extremum(&state.v, grid, |a, b| a > b);
        let (min_theta, argmin_theta) = extremum(&state.theta, grid, |a, b| a < b);
        let (max_theta, argmax_theta) = extremum(&state.theta, grid, |a, b| a > b);
        let pw = check_pointwise_bound(state, grid, params)?;
        let entropy = h
            * (0..grid.n_cells())
                .map(|j| eta_unchecked(state.v[j], state.u[j], state.theta[j], params))
                .sum::<f64>();
        Ok(Self {
            index,
            t: state.t,
            dt,
            mass: c.mass,
            momentum: c.momentum,
            energy: c.energy,
            radiation_weighted: c.radiation_weighted,
            entropy,
            dissipation: [sum(d[0]), sum(d[1]), sum(d[2]), sum(d[3])],
            cross: sum(&ints.cross),
            dissipation_min: [min(d[0]), min(d[1]), min(d[2]), min(d[3])],
            x_integrand,
            y_quadrature: h * y_quadrature,
            z_quadrature: h * z_quadrature,
            min_v,
            argmin_v,
            max_v,
            argmax_v,
            min_theta,
            argmin_theta,
            max_theta,
            argmax_theta,
            max_pointwise_margin: pw.max_margin,
            pointwise_tolerance: pw.tolerance,
        })
    }
}

/// Snapshots at the diagnostic cadence plus a record for every accepted step.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub snapshots: Vec<State>,
    /// Index into `steps` of the record belonging to each snapshot.
    pub snapshot_steps: Vec<usize>,
    /// `steps[k]` describes the state after `k` accepted steps.
    pub steps: Vec<StepRecord>,
}

impl Trajectory {
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        check_len(self.snapshots.len(), self.snapshot_steps.len())?;
        if self.steps.is_empty() || self.snapshots.is_empty() {
            return Err(Error::Diagnostic("trajectory is empty".into()));
        }
        for (k, r) in self.steps.iter().enumerate() {
            if r.index != k {
                return Err(Error::Diagnostic(format!("step record {k} carries index {}", r.index)));
            }
        }
        if !self.steps.windows(2).all(|w| w[1].t > w[0].t) {
            return Err(Error::Diagnostic("step times are not strictly increasing".into()));
        }
        for (s, &k) in self.snapshots.iter().zip(&self.snapshot_steps) {
            s.validate(grid.n_cells())?;
            match self.steps.get(k) {
                Some(r) if r.t == s.t => {}
                _ => {
                    return Err(Error::Diagnostic(format!(
                        "snapshot at t = {} has no matching step record",
                        s.t
                    )))
                }
            }
        }
        if !self.snapshot_steps.windows(2).all(|w| w[1] > w[0]) {
            return Err(Error::Diagnostic("snapshot times are not strictly increasing".into()));
        }
        Ok(())
    }

    pub fn snapshot_records(&self) -> impl Iterator<Item = &StepRecord> {
        self.snapshot_steps.iter().map(|&k| &self.steps[k])
    }
}

/// Running time integrals over step records, shared by the batch functions
/// and the online auditor.
#[derive(Debug, Clone, Default, PartialEq)]
pub(crate) struct Integrals {
    last: Option<StepRecord>,
    entropy0: f64,
    dissipation: f64,
    cross: f64,
    x: f64,
    y_max: f64,
    z_max: f64,
}

impl Integrals {
    pub(crate) fn push(&mut self, r: &StepRecord) {
        match &self.last {
            None => {
                self.entropy0 = r.entropy;
                self.y_max = r.y_quadrature;
                self.z_max = r.z_quadrature;
            }
            Some(prev) => {
                let dt = r.t - prev.t;
                let total = |x: &StepRecord| x.dissipation.iter().sum::<f64>();
                self.dissipation += 0.5 * dt * (total(prev) + total(r));
                self.cross += 0.5 * dt * (prev.cross + r.cross);
                // The initial record has no θ_t; it takes the first step's value.
                let g0 = if prev.index == 0 {
                    r.x_integrand
                } else {
                    prev.x_integrand
                };
                self.x += 0.5 * dt * (g0 + r.x_integrand);
                self.y_max = self.y_max.max(r.y_quadrature);
                self.z_max = self.z_max.max(r.z_quadrature);
            }
        }
        self.last = Some(*r);
    }

    /// Left side minus right side of the entropy balance at the last record.
    pub(crate) fn entropy_residual(&self) -> f64 {
        let eta = self.last.map_or(self.entropy0, |r| r.entropy);
        (eta - self.entropy0) + self.dissipation - self.cross
    }

    pub(crate) fn aux(&self) -> AuxPoint {
        AuxPoint {
            t: self.last.map_or(0.0, |r| r.t),
            x: self.x,
            y_frak: self.y_max,
            z: self.z_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyPoint {
    pub t: f64,
    pub residual: f64,
}

/// Signed residual of the entropy balance at every snapshot time, with
/// trapezoidal time integration over all step records.
pub fn entropy_balance_residual(trajectory: &Trajectory) -> Result<Vec<EntropyPoint>> {
    if trajectory.snapshots.len() < 2 {
        return Err(Error::Diagnostic("entropy balance needs at least two snapshots".into()));
    }
    let mut acc = Integrals::default();
    let mut out = Vec::new();
    let mut next = trajectory.snapshot_steps.iter().peekable();
    for (k, r) in trajectory.steps.iter().enumerate() {
        acc.push(r);
        if next.peek() == Some(&&k) {
            next.next();
            out.push(EntropyPoint {
                t: r.t,
                residual: acc.entropy_residual(),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuxPoint {
    pub t: f64,
    pub x: f64,
    pub y_frak: f64,
    pub z: f64,
}

/// `𝔛`, `𝔜`, `ℨ` at every snapshot time.
pub fn aux_functionals(trajectory: &Trajectory) -> Vec<AuxPoint> {
    let mut acc = Integrals::default();
    let mut out = Vec::new();
    let mut next = trajectory.snapshot_steps.iter().peekable();
    for (k, r) in trajectory.steps.iter().enumerate() {
        acc.push(r);
        if next.peek() == Some(&&k) {
            next.next();
            out.push(acc.aux());
        }
    }
    out
}

/// `∫₀ᵗ ‖θ(s)‖_∞^p ds` by the trapezoidal rule over step records.
pub fn theta_lp_linfty(trajectory: &Trajectory, p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Domain { what: "p", value: p });
    }
    Ok(trajectory
        .steps
        .windows(2)
        .map(|w| 0.5 * (w[1].t - w[0].t) * (w[0].max_theta.powf(p) + w[1].max_theta.powf(p)))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub value: f64,
    pub x: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremaReport {
    pub min_v: Extremum,
    pub max_v: Extremum,
    pub min_theta: Extremum,
    pub max_theta: Extremum,
}

impl ExtremaReport {
    fn from_record(r: &StepRecord) -> Self {
        Self {
            min_v: Extremum {
                value: r.min_v,
                x: r.argmin_v,
                t: r.t,
            },
            max_v: Extremum {
                value: r.max_v,
                x: r.argmax_v,
                t: r.t,
            },
            min_theta: Extremum {
                value: r.min_theta,
                x: r.argmin_theta,
                t: r.t,
            },
            max_theta: Extremum {
                value: r.max_theta,
                x: r.argmax_theta,
                t: r.t,
            },
        }
    }

    pub(crate) fn merge(&mut self, r: &StepRecord) {
        let o = Self::from_record(r);
        if o.min_v.value < self.min_v.value {
            self.min_v = o.min_v;
        }
        if o.max_v.value > self.max_v.value {
            self.max_v = o.max_v;
        }
        if o.min_theta.value < self.min_theta.value {
            self.min_theta = o.min_theta;
        }
        if o.max_theta.value > self.max_theta.value {
            self.max_theta = o.max_theta;
        }
    }

    pub fn positive(&self) -> bool {
        self.min_v.value > 0.0 && self.min_theta.value > 0.0
    }
}

/// Extremes of `v` and `θ` over every accepted step, with where and when.
pub fn extrema_report(trajectory: &Trajectory) -> Result<ExtremaReport> {
    let first = trajectory
        .steps
        .first()
        .ok_or_else(|| Error::Diagnostic("trajectory has no step records".into()))?;
    let mut rep = ExtremaReport::from_record(first);
    for r in &trajectory.steps[1..] {
        rep.merge(r);
    }
    Ok(rep)
}

/// Whether every dissipative integrand was nonnegative in every cell at
/// every step.
pub fn dissipation_nonnegative(trajectory: &Trajectory) -> bool {
    trajectory
        .steps
        .iter()
        .all(|r| r.dissipation_min.iter().all(|&m| m >= 0.0))
}

/// Collects step records and snapshots (every `cadence` steps, plus the
/// initial and final states) from accepted steps.
#[derive(Debug, Clone)]
pub struct Recorder {
    grid: Grid,
    params: Params,
    cadence: usize,
    t_end: f64,
    trajectory: Trajectory,
}

impl Recorder {
    pub fn new(initial: &State, t_end: f64, cadence: usize, grid: &Grid, params: &Params) -> Result<Self> {
        if cadence == 0 {
            return Err(Error::Invalid("snapshot cadence must be at least 1".into()));
        }
        let record = StepRecord::measure(0, 0.0, None, initial, grid, params)?;
        Ok(Self {
            grid: grid.clone(),
            params: *params,
            cadence,
            t_end,
            trajectory: Trajectory {
                snapshots: vec![initial.clone()],
                snapshot_steps: vec![0],
                steps: vec![record],
            },
        })
    }

    /// Continues a trajectory recorded earlier.
    pub fn resume(trajectory: Trajectory, t_end: f64, cadence: usize, grid: &Grid, params: &Params) -> Result<Self> {
        if cadence == 0 {
            return Err(Error::Invalid("snapshot cadence must be at least 1".into()));
        }
        trajectory.validate(grid)?;
        Ok(Self {
            grid: grid.clone(),
            params: *params,
            cadence,
            t_end,
            trajectory,
        })
    }

    /// Records a step; returns the record and whether a snapshot was taken.
    pub fn observe(&mut self, index: usize, dt: f64, previous: &State, current: &State) -> Result<(StepRecord, bool)> {
        let expected = self.trajectory.steps.len();
        if index != expected {
            return Err(Error::Diagnostic(format!("expected step {expected}, got {index}")));
        }
        let record = StepRecord::measure(index, dt, Some(previous), current, &self.grid, &self.params)?;
        self.trajectory.steps.push(record);
        let snap = index.is_multiple_of(self.cadence) || current.t >= self.t_end;
        if snap {
            self.trajectory.snapshots.push(current.clone());
            self.trajectory.snapshot_steps.push(index);
        }
        Ok((record, snap))
    }

    pub fn trajectory(&self) -> &Trajectory {
        &self.trajectory
    }

    pub fn finish(self) -> Trajectory {
        self.trajectory
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radiation::init_compatible_q;
    use std::f64::consts::PI;

    fn frozen(grid: &Grid, params: &Params, times: &[f64]) -> Trajectory {
        let mut s = State::uniform(grid.n_cells(), 1.0, 0.0, 1.0);
        s.theta = grid.sample(|x| 1.0 + 0.2 * (2.0 * PI * x).cos());
        s.q = init_compatible_q(&s.v, &s.theta, grid, params).unwrap();
        let mut rec = Recorder::new(&s, *times.last().unwrap(), 1, grid, params).unwrap();
        let mut prev = s.clone();
        for (k, &t) in times.iter().enumerate() {
            let mut next = prev.clone();
            next.t = t;
            rec.observe(k + 1, t - prev.t, &prev, &next).unwrap();
            prev = next;
        }
        rec.finish()
    }

    #[test]
    fn conserved_at_equilibrium() {
        let g = Grid::new(16).unwrap();
        let p = Params::default();
        let c = conserved_quantities(&State::uniform(16, 1.0, 0.0, 1.0), &g, &p).unwrap();
        assert_eq!(
            (c.mass, c.momentum, c.energy, c.radiation_weighted),
            (1.0, 0.0, p.cv(), 0.0)
        );
    }

    #[test]
    fn conserved_for_analytic_profile() {
        let p = Params::default();
        for n in [64, 128] {
            let g = Grid::new(n).unwrap();
            let mut s = State::uniform(n, 1.0, 0.0, 1.0);
            s.v = g.sample(|x| 1.0 + 0.1 * (2.0 * PI * x).sin());
            s.q = init_compatible_q(&s.v, &s.theta, &g, &p).unwrap();
            let c = conserved_quantities(&s, &g, &p).unwrap();
            assert!((c.mass - 1.0).abs() <= 1e-14);
            assert!(c.momentum == 0.0);
            assert!(c.radiation_weighted.abs() <= g.h() * g.h());
        }
    }

    #[test]
    fn integrands_vanish_at_equilibrium() {
        let g = Grid::new(16).unwrap();
        let ints = entropy_integrands(&State::uniform(16, 1.0, 0.0, 1.0), &g, &Params::default()).unwrap();
        for f in ints.dissipative() {
            assert!(f.iter().all(|&x| x == 0.0));
        }
        assert!(ints.cross.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn frozen_fields_give_zero_x_and_constant_y() {
        let g = Grid::new(32).unwrap();
        let p = Params::default();
        let traj = frozen(&g, &p, &[0.1, 0.2, 0.35]);
        traj.validate(&g).unwrap();
        let aux = aux_functionals(&traj);
        assert_eq!(aux.len(), 4);
        assert!(aux.iter().all(|a| a.x == 0.0));
        assert!(aux
            .iter()
            .all(|a| a.y_frak == traj.steps[0].y_quadrature && a.y_frak > 0.0));
        assert!(aux.iter().all(|a| a.z == 0.0));
    }

    #[test]
    fn theta_lp_examples() {
        let g = Grid::new(16).unwrap();
        let p = Params::default();
        let mut rec = Recorder::new(&State::uniform(16, 1.0, 0.0, 1.0), 2.0, 1, &g, &p).unwrap();
        let mut prev = State::uniform(16, 1.0, 0.0, 1.0);
        for k in 1..=20 {
            let mut next = prev.clone();
            next.t = k as f64 * 0.1;
            rec.observe(k, 0.1, &prev, &next).unwrap();
            prev = next;
        }
        let traj = rec.finish();
        assert!((theta_lp_linfty(&traj, 3.0).unwrap() - 2.0).abs() < 1e-14);
        let rep = extrema_report(&traj).unwrap();
        assert_eq!(
            (
                rep.min_v.value,
                rep.max_v.value,
                rep.min_theta.value,
                rep.max_theta.value
            ),
            (1.0, 1.0, 1.0, 1.0)
        );
        let r = entropy_balance_residual(&traj).unwrap();
        assert!(r.iter().all(|e| e.residual == 0.0));

        // max θ = 1 + t on [0, 1].
        let mut traj = traj;
        for r in &mut traj.steps {
            r.max_theta = 1.0 + r.t;
        }
        traj.steps.truncate(11);
        assert!((theta_lp_linfty(&traj, 1.0).unwrap() - 1.5).abs() < 1e-14);
        assert!(theta_lp_linfty(&traj, 0.5).is_err());
    }

    #[test]
    fn extrema_of_initial_profile() {
        let g = Grid::new(100).unwrap();
        let p = Params::default();
        let mut s = State::uniform(100, 1.0, 0.0, 1.0);
        s.v = g.sample(|x| 1.0 + 0.2 * (2.0 * PI * x).sin());
        s.q = init_compatible_q(&s.v, &s.theta, &g, &p).unwrap();
        let rec = Recorder::new(&s, 1.0, 1, &g, &p).unwrap();
        let rep = extrema_report(rec.trajectory()).unwrap();
        assert!((rep.min_v.value - 0.8).abs() < 1e-3 && (rep.min_v.x + 0.25).abs() < 0.01);
        assert!((rep.max_v.value - 1.2).abs() < 1e-3 && (rep.max_v.x - 0.25).abs() < 0.01);
        assert!(rep.positive());
    }

    #[test]
    fn recorder_rejects_out_of_order_steps() {
        let g = Grid::new(8).unwrap();
        let p = Params::default();
        let s = State::uniform(8, 1.0, 0.0, 1.0);
        let mut rec = Recorder::new(&s, 1.0, 2, &g, &p).unwrap();
        assert!(rec.observe(2, 0.1, &s, &s).is_err());
        assert!(Recorder::new(&s, 1.0, 0, &g, &p).is_err());
    }
}
