//! The `run` and `verify` commands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc::{sync_channel, SyncSender};
use std::thread::JoinHandle;

use anyhow::{bail, Context};
use radhydro_core::diagnostics::{theta_lp_linfty, AuditSummary, Auditor, Recorder, SnapshotRow, Trajectory};
use radhydro_core::exponents::{find_admissible_n, ExponentReport, T0Reading};
use radhydro_core::integrator::{advance, SimulationFailure};
use radhydro_core::radiation::{certify_kernel_nonpositive, KernelCertificate, KernelSpec};
use radhydro_core::{Error as CoreError, Grid};
use serde::Serialize;

use crate::checkpoint::{checkpoint_load, checkpoint_save, Checkpoint};
use crate::config::{parse_config, RunConfig};
use crate::presets::make_initial_data;

pub const CONFIG_FILE: &str = "config.ini";
pub const CSV_FILE: &str = "diagnostics.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const FAILURE_FILE: &str = "failure.json";
pub const FINAL_CHECKPOINT: &str = "final.ckpt";

/// Bound on snapshot rows in flight between the stepper and the writer.
const ROW_BUFFER: usize = 256;
/// Samples used for the kernel sign certificate in run summaries.
const KERNEL_SAMPLES: usize = 1000;

pub fn checkpoint_name(step: usize) -> String {
    format!("checkpoint_{step:08}.ckpt")
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub resume: Option<PathBuf>,
    pub quiet: bool,
}

/// RFC 4180 rows with 17 significant digits.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else {
        format!("{x:.16e}")
    }
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(w)
}

fn write_row<W: Write>(w: &mut csv::Writer<W>, row: &SnapshotRow) -> csv::Result<()> {
    w.write_record(row.values().map(format_float))
}

/// The CSV text a run emits for `rows`.
pub fn render_csv(rows: &[SnapshotRow]) -> anyhow::Result<Vec<u8>> {
    let mut w = csv_writer(Vec::new());
    w.write_record(SnapshotRow::HEADER)?;
    for r in rows {
        write_row(&mut w, r)?;
    }
    w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))
}

fn spawn_writer(path: &Path) -> anyhow::Result<(SyncSender<SnapshotRow>, JoinHandle<anyhow::Result<()>>)> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let (tx, rx) = sync_channel::<SnapshotRow>(ROW_BUFFER);
    let handle = std::thread::spawn(move || -> anyhow::Result<()> {
        let mut w = csv_writer(BufWriter::new(file));
        w.write_record(SnapshotRow::HEADER)?;
        for row in rx {
            write_row(&mut w, &row)?;
        }
        w.flush()?;
        Ok(())
    });
    Ok((tx, handle))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub name: &'static str,
    pub enabled: bool,
    /// `None` when disabled.
    pub pass: Option<bool>,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
}

impl Verdict {
    fn bound(name: &'static str, enabled: bool, value: f64, tolerance: f64) -> Self {
        Self {
            name,
            enabled,
            pass: enabled.then_some(value <= tolerance),
            value: Some(value),
            tolerance: Some(tolerance),
        }
    }

    fn flag(name: &'static str, enabled: bool, holds: bool) -> Self {
        Self {
            name,
            enabled,
            pass: enabled.then_some(holds),
            value: None,
            tolerance: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpPoint {
    pub p: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentBlock {
    pub beta: f64,
    pub admissible_n: Option<f64>,
    pub report: Option<ExponentReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub status: &'static str,
    pub config: RunConfig,
    pub config_hash: String,
    pub steps: usize,
    pub rejections: u64,
    /// Fields are never clipped; positivity is enforced by rejection.
    pub clipping_events: u64,
    pub audit: AuditSummary,
    pub verdicts: Vec<Verdict>,
    pub all_pass: bool,
    /// `∫₀ᵗ ‖θ‖_∞^p ds`, paired with `Yfrak` in `audit.y_frak_final`.
    pub theta_lp_linfty: Vec<LpPoint>,
    pub kernel: Option<KernelCertificate>,
    pub exponents: Option<ExponentBlock>,
    pub failure: Option<SimulationFailure>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Passed,
    AuditFailed,
    SimulationFailed,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Passed => 0,
            Outcome::AuditFailed => 1,
            Outcome::SimulationFailed => 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub outcome: Outcome,
    pub summary: RunSummary,
}

/// Builds the summary from the audit state. Everything in it is a pure
/// function of the trajectory, so a replay reproduces it exactly.
pub fn build_summary(
    config: &RunConfig,
    trajectory: &Trajectory,
    audit: &AuditSummary,
    rejections: u64,
    failure: Option<SimulationFailure>,
) -> anyhow::Result<RunSummary> {
    let a = &config.audit;
    let h = 1.0 / config.n_cells as f64;
    let kernel = if a.pointwise {
        Some(certify_kernel_nonpositive(
            &KernelSpec::new(config.params.a, config.params.b)?,
            KERNEL_SAMPLES,
        )?)
    } else {
        None
    };
    let mut verdicts = vec![
        Verdict::flag("positivity", true, audit.extrema.positive()),
        Verdict::bound("mass_conservation", true, audit.mass_drift, a.conservation_tol),
        Verdict::bound("momentum_conservation", true, audit.momentum_drift, a.conservation_tol),
        Verdict::bound(
            "radiation_neutrality",
            true,
            audit.max_abs_radiation_weighted,
            a.neutrality_c * h * h,
        ),
        Verdict::bound(
            "entropy_balance",
            a.entropy,
            audit.max_abs_entropy_residual,
            a.entropy_tol,
        ),
        Verdict::flag("dissipation_nonnegative", a.entropy, audit.dissipation_nonnegative),
        Verdict::bound("pointwise_bound", a.pointwise, audit.max_pointwise_excess, 0.0),
        Verdict::flag(
            "kernel_nonpositive",
            a.pointwise,
            kernel.as_ref().is_some_and(|k| k.pass),
        ),
        Verdict::flag("aux_monotone", a.aux, audit.aux_monotone),
    ];
    verdicts.push(match audit.max_repr_error {
        Some(e) => Verdict::bound("representation", a.representation, e, a.repr_tol),
        None => Verdict::flag("representation", false, false),
    });
    let all_pass = failure.is_none() && verdicts.iter().all(|v| v.pass != Some(false));
    let theta_lp = if trajectory.snapshots.len() >= 2 {
        [1.0, 2.0, 4.0, 8.0]
            .into_iter()
            .map(|p| {
                Ok(LpPoint {
                    p,
                    value: theta_lp_linfty(trajectory, p)?,
                })
            })
            .collect::<Result<Vec<_>, CoreError>>()?
    } else {
        Vec::new()
    };
    let exponents = if a.exponents {
        let beta = config.params.beta;
        let n = find_admissible_n(beta, T0Reading::AsPrinted)?;
        let report = n
            .map(|n| ExponentReport::evaluate(n, beta, T0Reading::AsPrinted))
            .transpose()?;
        Some(ExponentBlock {
            beta,
            admissible_n: n,
            report,
        })
    } else {
        None
    };
    Ok(RunSummary {
        status: if failure.is_some() { "failed" } else { "completed" },
        config: config.clone(),
        config_hash: hex::encode(config.hash()),
        steps: trajectory.steps.len() - 1,
        rejections,
        clipping_events: 0,
        audit: audit.clone(),
        verdicts,
        all_pass,
        theta_lp_linfty: theta_lp,
        kernel,
        exponents,
        failure,
    })
}

pub fn summary_json(summary: &RunSummary) -> anyhow::Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(summary)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn core_err(e: impl std::fmt::Display) -> CoreError {
    CoreError::Invalid(e.to_string())
}

/// Simulates, audits and writes every artifact into `config.output_dir`.
pub fn run_command(config: &RunConfig, opts: &RunOptions) -> anyhow::Result<RunReport> {
    config.validate()?;
    let out = &config.output_dir;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    std::fs::write(out.join(CONFIG_FILE), config.to_ini())?;
    let grid = Grid::new(config.n_cells)?;
    let params = config.params;
    let hash = config.hash();

    let (state, recorder, mut rejections) = match &opts.resume {
        Some(path) => {
            let c = checkpoint_load(path, Some(&hash)).with_context(|| format!("resuming from {}", path.display()))?;
            let rec = Recorder::resume(c.history, config.t_end, config.cadence, &grid, &params)?;
            (c.state, rec, c.rejections)
        }
        None => {
            let s = make_initial_data(&config.initial, config.seed, &grid, &params)?;
            let rec = Recorder::new(&s, config.t_end, config.cadence, &grid, &params)?;
            (s, rec, 0)
        }
    };
    if state.t >= config.t_end {
        bail!("checkpoint time {} is not before t_end = {}", state.t, config.t_end);
    }
    let start = recorder.trajectory().steps.len() - 1;
    let mut recorder = recorder;
    let (mut auditor, rows) = Auditor::replay(recorder.trajectory(), &grid, &params, config.audit.representation)?;

    let (tx, writer) = spawn_writer(&out.join(CSV_FILE))?;
    for row in rows {
        tx.send(row)
            .map_err(|_| anyhow::anyhow!("diagnostics writer stopped"))?;
    }
    if !opts.quiet {
        eprintln!(
            "run: {} cells, {} preset, t = {} -> {}, output {}",
            config.n_cells,
            config.initial.preset.name(),
            state.t,
            config.t_end,
            out.display()
        );
    }
    let mut next_progress = 0.1;
    let result = advance(state, start, config.t_end, &grid, &params, &config.control, None, |a| {
        rejections += a.rejections as u64;
        let (record, snap) = recorder.observe(a.index, a.dt, a.previous, a.current)?;
        auditor.push_record(&record);
        if snap {
            let (row, _) = auditor.push_snapshot(a.current)?;
            tx.send(row).map_err(|_| core_err("diagnostics writer stopped"))?;
        }
        if config.checkpoint_interval > 0 && a.index % config.checkpoint_interval == 0 {
            let c = Checkpoint {
                step: a.index as u64,
                rejections,
                config_hash: hash,
                state: a.current.clone(),
                history: recorder.trajectory().clone(),
            };
            checkpoint_save(&c, &out.join(checkpoint_name(a.index))).map_err(core_err)?;
        }
        if !opts.quiet && a.current.t >= next_progress * config.t_end {
            eprintln!("  t = {:.6} after {} steps", a.current.t, a.index);
            while next_progress * config.t_end <= a.current.t {
                next_progress += 0.1;
            }
        }
        Ok(())
    });
    drop(tx);
    writer
        .join()
        .map_err(|_| anyhow::anyhow!("diagnostics writer panicked"))??;

    let trajectory = recorder.trajectory();
    let audit = auditor.summary().context("no step record was audited")?.clone();
    match result {
        Ok(outcome) => {
            let c = Checkpoint {
                step: (trajectory.steps.len() - 1) as u64,
                rejections,
                config_hash: hash,
                state: outcome.final_state,
                history: trajectory.clone(),
            };
            checkpoint_save(&c, &out.join(FINAL_CHECKPOINT))?;
            let summary = build_summary(config, trajectory, &audit, rejections, None)?;
            std::fs::write(out.join(SUMMARY_FILE), summary_json(&summary)?)?;
            let outcome = if summary.all_pass {
                Outcome::Passed
            } else {
                Outcome::AuditFailed
            };
            if !opts.quiet {
                report_verdicts(&summary);
            }
            Ok(RunReport { outcome, summary })
        }
        Err(failure) => {
            if !opts.quiet {
                eprintln!("{failure}");
            }
            let summary = build_summary(config, trajectory, &audit, rejections, Some(failure))?;
            std::fs::write(out.join(FAILURE_FILE), summary_json(&summary)?)?;
            Ok(RunReport {
                outcome: Outcome::SimulationFailed,
                summary,
            })
        }
    }
}

fn report_verdicts(s: &RunSummary) {
    for v in s.verdicts.iter().filter(|v| v.enabled) {
        let mark = if v.pass == Some(true) { "pass" } else { "FAIL" };
        match (v.value, v.tolerance) {
            (Some(x), Some(t)) => eprintln!("  {mark} {:<24} {x:.3e} (tolerance {t:.3e})", v.name),
            _ => eprintln!("  {mark} {}", v.name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub csv_identical: bool,
    pub summary_identical: bool,
    pub all_pass: bool,
    pub verdicts: Vec<Verdict>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.csv_identical && self.summary_identical && self.all_pass
    }
}

/// Re-audits a completed run directory from its final checkpoint and
/// compares the regenerated artifacts with the stored ones.
pub fn verify_command(dir: &Path) -> anyhow::Result<VerifyReport> {
    let mut config = parse_config(&dir.join(CONFIG_FILE))?;
    config.output_dir = dir.to_owned();
    let c = checkpoint_load(&dir.join(FINAL_CHECKPOINT), Some(&config.hash()))?;
    let grid = Grid::new(config.n_cells)?;
    let (auditor, rows) = Auditor::replay(&c.history, &grid, &config.params, config.audit.representation)?;
    let csv = render_csv(&rows)?;
    let audit = auditor.summary().context("empty history")?;
    let summary = build_summary(&config, &c.history, audit, c.rejections, None)?;
    let json = summary_json(&summary)?;
    let read = |name: &str| std::fs::read(dir.join(name)).with_context(|| format!("reading {name}"));
    Ok(VerifyReport {
        csv_identical: read(CSV_FILE)? == csv,
        summary_identical: read(SUMMARY_FILE)? == json,
        all_pass: summary.all_pass,
        verdicts: summary.verdicts,
    })
}
