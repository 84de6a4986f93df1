use serde::{Deserialize, Serialize};

use super::{ExtremaReport, Integrals, RepresentationAuditor, RepresentationPoint, StepRecord, Trajectory};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::model::{Params, State};

/// One row of the per-snapshot time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub t: f64,
    pub mass: f64,
    pub momentum: f64,
    pub energy: f64,
    pub radiation_weighted: f64,
    pub entropy_residual: f64,
    /// NaN when the representation audit is disabled.
    pub repr_error: f64,
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "Yfrak")]
    pub y_frak: f64,
    #[serde(rename = "Z")]
    pub z: f64,
    pub min_v: f64,
    pub max_v: f64,
    pub min_theta: f64,
    pub max_theta: f64,
    pub max_pointwise_margin: f64,
}

impl SnapshotRow {
    pub const HEADER: [&'static str; 15] = [
        "t",
        "mass",
        "momentum",
        "energy",
        "radiation_weighted",
        "entropy_residual",
        "repr_error",
        "X",
        "Yfrak",
        "Z",
        "min_v",
        "max_v",
        "min_theta",
        "max_theta",
        "max_pointwise_margin",
    ];

    pub fn values(&self) -> [f64; 15] {
        [
            self.t,
            self.mass,
            self.momentum,
            self.energy,
            self.radiation_weighted,
            self.entropy_residual,
            self.repr_error,
            self.x,
            self.y_frak,
            self.z,
            self.min_v,
            self.max_v,
            self.min_theta,
            self.max_theta,
            self.max_pointwise_margin,
        ]
    }
}

/// Worst values seen so far over every step (conservation, pointwise
/// bound, dissipation signs, extrema) and every snapshot (entropy and
/// representation residuals).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub steps: usize,
    pub snapshots: usize,
    pub t_final: f64,
    /// `max |M(t) − M(0)| / |M(0)|`.
    pub mass_drift: f64,
    /// `max |P(t) − P(0)| / max(h Σ |u₀|, M(0))`.
    pub momentum_drift: f64,
    /// `max |E(t) − E(0)|`.
    pub energy_drift: f64,
    pub final_energy_drift: f64,
    pub max_abs_radiation_weighted: f64,
    pub max_abs_entropy_residual: f64,
    pub final_entropy_residual: f64,
    pub max_repr_error: Option<f64>,
    pub max_repr_error_moving_anchor: Option<f64>,
    pub min_anchor_crossings: Option<usize>,
    pub max_anchor_crossings: Option<usize>,
    /// `max (margin − tolerance)`; the bound holds iff this is `≤ 0`.
    pub max_pointwise_excess: f64,
    pub dissipation_nonnegative: bool,
    pub extrema: ExtremaReport,
    pub x_final: f64,
    pub y_frak_final: f64,
    pub z_final: f64,
    pub aux_monotone: bool,
}

/// Online audit of a run: feed every step record, then each snapshot
/// after its record.
#[derive(Debug, Clone)]
pub struct Auditor {
    integrals: Integrals,
    representation: Option<RepresentationAuditor>,
    first: Option<StepRecord>,
    momentum_scale: f64,
    last_record: Option<StepRecord>,
    last_aux: Option<(f64, f64, f64)>,
    summary: Option<AuditSummary>,
}

impl Auditor {
    pub fn new(grid: &Grid, params: &Params, representation: bool) -> Self {
        Self {
            integrals: Integrals::default(),
            representation: representation.then(|| RepresentationAuditor::new(grid, params)),
            first: None,
            momentum_scale: 1.0,
            last_record: None,
            last_aux: None,
            summary: None,
        }
    }

    pub fn push_record(&mut self, r: &StepRecord) {
        self.integrals.push(r);
        let first = *self.first.get_or_insert(*r);
        let aux = self.integrals.aux();
        let s = self.summary.get_or_insert_with(|| AuditSummary {
            steps: 0,
            snapshots: 0,
            t_final: r.t,
            mass_drift: 0.0,
            momentum_drift: 0.0,
            energy_drift: 0.0,
            final_energy_drift: 0.0,
            max_abs_radiation_weighted: 0.0,
            max_abs_entropy_residual: 0.0,
            final_entropy_residual: 0.0,
            max_repr_error: None,
            max_repr_error_moving_anchor: None,
            min_anchor_crossings: None,
            max_anchor_crossings: None,
            max_pointwise_excess: f64::NEG_INFINITY,
            dissipation_nonnegative: true,
            extrema: ExtremaReport::from_record(r),
            x_final: 0.0,
            y_frak_final: 0.0,
            z_final: 0.0,
            aux_monotone: true,
        });
        s.steps = r.index;
        s.t_final = r.t;
        s.mass_drift = s.mass_drift.max((r.mass - first.mass).abs() / first.mass.abs());
        s.momentum_drift = s
            .momentum_drift
            .max((r.momentum - first.momentum).abs() / self.momentum_scale);
        let de = (r.energy - first.energy).abs();
        s.energy_drift = s.energy_drift.max(de);
        s.final_energy_drift = de;
        s.max_abs_radiation_weighted = s.max_abs_radiation_weighted.max(r.radiation_weighted.abs());
        s.max_pointwise_excess = s
            .max_pointwise_excess
            .max(r.max_pointwise_margin - r.pointwise_tolerance);
        s.dissipation_nonnegative &= r.dissipation_min.iter().all(|&m| m >= 0.0);
        s.extrema.merge(r);
        if let Some((x, y, z)) = self.last_aux {
            s.aux_monotone &= aux.x >= x && aux.y_frak >= y && aux.z >= z;
        }
        s.x_final = aux.x;
        s.y_frak_final = aux.y_frak;
        s.z_final = aux.z;
        self.last_aux = Some((aux.x, aux.y_frak, aux.z));
        self.last_record = Some(*r);
    }

    /// Audits a snapshot whose record was the last one pushed.
    pub fn push_snapshot(&mut self, state: &State) -> Result<(SnapshotRow, Option<RepresentationPoint>)> {
        let r = self
            .last_record
            .ok_or_else(|| Error::Diagnostic("snapshot pushed before its step record".into()))?;
        if r.t != state.t {
            return Err(Error::Diagnostic(format!(
                "snapshot at t = {} does not match the last record at t = {}",
                state.t, r.t
            )));
        }
        if r.index == 0 {
            let h = 1.0 / state.len() as f64;
            let l1 = h * state.u.iter().map(|u| u.abs()).sum::<f64>();
            self.momentum_scale = l1.max(r.mass.abs());
        }
        let point = match &mut self.representation {
            Some(aud) => Some(aud.push(state)?),
            None => None,
        };
        let residual = self.integrals.entropy_residual();
        let aux = self.integrals.aux();
        let s = self.summary.as_mut().expect("record pushed");
        s.snapshots += 1;
        s.max_abs_entropy_residual = s.max_abs_entropy_residual.max(residual.abs());
        s.final_entropy_residual = residual;
        if let Some(p) = point {
            s.max_repr_error = Some(s.max_repr_error.map_or(p.max_rel_error, |m| m.max(p.max_rel_error)));
            s.max_repr_error_moving_anchor = Some(
                s.max_repr_error_moving_anchor
                    .map_or(p.max_rel_error_moving_anchor, |m| m.max(p.max_rel_error_moving_anchor)),
            );
            s.min_anchor_crossings = Some(s.min_anchor_crossings.map_or(p.crossings, |m| m.min(p.crossings)));
            s.max_anchor_crossings = Some(s.max_anchor_crossings.map_or(p.crossings, |m| m.max(p.crossings)));
        }
        let row = SnapshotRow {
            t: r.t,
            mass: r.mass,
            momentum: r.momentum,
            energy: r.energy,
            radiation_weighted: r.radiation_weighted,
            entropy_residual: residual,
            repr_error: point.map_or(f64::NAN, |p| p.max_rel_error),
            x: aux.x,
            y_frak: aux.y_frak,
            z: aux.z,
            min_v: r.min_v,
            max_v: r.max_v,
            min_theta: r.min_theta,
            max_theta: r.max_theta,
            max_pointwise_margin: r.max_pointwise_margin,
        };
        Ok((row, point))
    }

    pub fn summary(&self) -> Option<&AuditSummary> {
        self.summary.as_ref()
    }

    /// Replays a stored trajectory, returning the auditor and every row.
    pub fn replay(
        trajectory: &Trajectory,
        grid: &Grid,
        params: &Params,
        representation: bool,
    ) -> Result<(Self, Vec<SnapshotRow>)> {
        trajectory.validate(grid)?;
        let mut aud = Self::new(grid, params, representation);
        let mut rows = Vec::with_capacity(trajectory.snapshots.len());
        let mut snaps = trajectory.snapshot_steps.iter().zip(&trajectory.snapshots).peekable();
        for (k, r) in trajectory.steps.iter().enumerate() {
            aud.push_record(r);
            while let Some((&idx, state)) = snaps.peek() {
                if idx != k {
                    break;
                }
                rows.push(aud.push_snapshot(state)?.0);
                snaps.next();
            }
        }
        Ok((aud, rows))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::Recorder;

    #[test]
    fn equilibrium_rows() {
        let g = Grid::new(16).unwrap();
        let p = Params::default();
        let s0 = State::uniform(16, 1.0, 0.0, 1.0);
        let mut rec = Recorder::new(&s0, 0.3, 1, &g, &p).unwrap();
        let mut prev = s0.clone();
        for k in 1..=3 {
            let mut next = prev.clone();
            next.t = 0.1 * k as f64;
            rec.observe(k, 0.1, &prev, &next).unwrap();
            prev = next;
        }
        let (aud, rows) = Auditor::replay(rec.trajectory(), &g, &p, true).unwrap();
        assert_eq!(rows.len(), 4);
        for r in &rows {
            assert_eq!(
                (r.mass, r.momentum, r.energy, r.radiation_weighted),
                (1.0, 0.0, p.cv(), 0.0)
            );
            assert_eq!((r.entropy_residual, r.x, r.y_frak, r.z), (0.0, 0.0, 0.0, 0.0));
        }
        let s = aud.summary().unwrap();
        assert_eq!(s.steps, 3);
        assert_eq!(s.mass_drift, 0.0);
        assert!(s.max_pointwise_excess < 0.0);
        assert!(s.dissipation_nonnegative && s.aux_monotone && s.extrema.positive());
        assert_eq!(SnapshotRow::HEADER.len(), rows[0].values().len());
    }

    #[test]
    fn snapshot_needs_matching_record() {
        let g = Grid::new(8).unwrap();
        let p = Params::default();
        let mut aud = Auditor::new(&g, &p, false);
        let s = State::uniform(8, 1.0, 0.0, 1.0);
        assert!(aud.push_snapshot(&s).is_err());
    }
}
