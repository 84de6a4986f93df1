//! The `kernel`, `exponents` and `mms` commands.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::Context;
use radhydro_core::exponents::{
    branch_usage, existence_certificate, iff_sweep, log_spaced, verify_appendix_iff, BranchUsage, ExistenceReport,
    Exponent, ExponentReport, IffReport, SweepReport, T0Reading, EXISTENCE_THRESHOLD, SUB_UNIT_P,
};
use radhydro_core::integrator::mms::{spatial_study, temporal_study, ConvergenceStudy, Manufactured};
use radhydro_core::integrator::StepControl;
use radhydro_core::radiation::{certify_kernel_nonpositive, tabulate_kernel, KernelCertificate, KernelSpec};
use radhydro_core::Params;
use serde::Serialize;

use crate::run::format_float;

fn write_json(path: &Path, value: &impl Serialize) -> anyhow::Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> anyhow::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Points excluded around the origin when comparing the series with the
/// closed form; the truncated series converges slowly at the kink.
pub const KERNEL_ORIGIN_EXCLUSION: f64 = 1e-3;
pub const KERNEL_SERIES_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy)]
pub struct KernelArgs {
    pub a: f64,
    pub b: f64,
    pub points: usize,
    pub terms: u32,
    pub samples: usize,
}

impl Default for KernelArgs {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            points: 1000,
            terms: 100_000,
            samples: 1000,
        }
    }
}

/// The 5×5 log grid of `(a, b)` over `[10⁻², 10²]²`.
pub fn kernel_parameter_grid() -> Vec<(f64, f64)> {
    let axis: Vec<f64> = (0..5).map(|i| 10f64.powi(i - 2)).collect();
    axis.iter().flat_map(|&a| axis.iter().map(move |&b| (a, b))).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelSummary {
    pub spec: KernelSpec,
    pub terms: u32,
    pub points: usize,
    pub origin_exclusion: f64,
    pub max_abs_difference: f64,
    pub series_tolerance: f64,
    pub series_pass: bool,
    pub certificate: KernelCertificate,
    pub parameter_grid: Vec<KernelCertificate>,
    pub all_pass: bool,
}

pub fn kernel_summary(args: &KernelArgs) -> anyhow::Result<(KernelSummary, Vec<radhydro_core::radiation::KernelRow>)> {
    let spec = KernelSpec::new(args.a, args.b)?;
    let rows = tabulate_kernel(&spec, args.points, args.terms)?;
    let max_abs_difference = rows
        .iter()
        .filter(|r| r.z.abs() >= KERNEL_ORIGIN_EXCLUSION)
        .fold(0.0f64, |m, r| m.max(r.difference.abs()));
    let certificate = certify_kernel_nonpositive(&spec, args.samples)?;
    let parameter_grid = kernel_parameter_grid()
        .into_iter()
        .map(|(a, b)| certify_kernel_nonpositive(&KernelSpec::new(a, b)?, args.samples))
        .collect::<Result<Vec<_>, _>>()?;
    let series_pass = max_abs_difference <= KERNEL_SERIES_TOL;
    let all_pass = series_pass && certificate.pass && parameter_grid.iter().all(|c| c.pass);
    Ok((
        KernelSummary {
            spec,
            terms: args.terms,
            points: args.points,
            origin_exclusion: KERNEL_ORIGIN_EXCLUSION,
            max_abs_difference,
            series_tolerance: KERNEL_SERIES_TOL,
            series_pass,
            certificate,
            parameter_grid,
            all_pass,
        },
        rows,
    ))
}

/// Writes `kernel_table.csv` and `kernel.json`; returns the summary.
pub fn kernel_command(args: &KernelArgs, out: &Path) -> anyhow::Result<KernelSummary> {
    std::fs::create_dir_all(out)?;
    let (summary, rows) = kernel_summary(args)?;
    write_csv(
        &out.join("kernel_table.csv"),
        &["z", "closed_form", "series", "difference"],
        rows.iter()
            .map(|r| [r.z, r.closed, r.series, r.difference].map(format_float).to_vec()),
    )?;
    write_json(&out.join("kernel.json"), &summary)?;
    Ok(summary)
}

/// Agreement the closed-form conditions must reach on the sweep.
pub const IFF_REQUIRED_RATE: f64 = 0.999;

#[derive(Debug, Clone, Copy)]
pub struct ExponentArgs {
    pub reading: T0Reading,
    pub betas: usize,
    pub probes: usize,
}

impl Default for ExponentArgs {
    fn default() -> Self {
        Self {
            reading: T0Reading::AsPrinted,
            betas: 200,
            probes: 10_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepStats {
    pub reading: T0Reading,
    pub requested: usize,
    pub evaluated: usize,
    pub skipped_poles: usize,
    pub agreeing: usize,
    pub agreement_rate: f64,
    pub per_exponent_rate: BTreeMap<&'static str, f64>,
    pub disagreements: usize,
}

impl From<&SweepReport> for SweepStats {
    fn from(s: &SweepReport) -> Self {
        Self {
            reading: s.reading,
            requested: s.requested,
            evaluated: s.evaluated,
            skipped_poles: s.skipped_poles,
            agreeing: s.agreeing,
            agreement_rate: s.agreement_rate,
            per_exponent_rate: Exponent::ALL
                .iter()
                .map(|e| e.name())
                .zip(s.per_exponent_rate)
                .collect(),
            disagreements: s.disagreements.len(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExponentSummary {
    pub reading: T0Reading,
    pub witness: ExponentReport,
    pub witness_iff: IffReport,
    pub existence_range: (f64, f64),
    pub existence_found: usize,
    pub existence_admissible: usize,
    pub existence_iff_all_agree: usize,
    pub existence_pass: bool,
    pub sweep: SweepStats,
    pub sweep_required_rate: f64,
    pub sweep_pass: bool,
    /// The same sweep under the other reading of `p` in `𝔗^𝔶₀`.
    pub alternate_sweep: SweepStats,
    pub branch_usage: BranchUsage,
    pub unused_t_y2_branches: Vec<usize>,
    pub unused_t_z2_branches: Vec<usize>,
    /// `p < 1` arguments of `𝔗^𝔶₀` used by the exponents.
    pub sub_unit_p: Vec<f64>,
    pub all_pass: bool,
}

pub struct ExponentOutput {
    pub summary: ExponentSummary,
    pub existence: ExistenceReport,
    pub sweep: SweepReport,
}

pub fn exponent_summary(args: &ExponentArgs) -> anyhow::Result<ExponentOutput> {
    let r = args.reading;
    let witness = ExponentReport::evaluate(9.5, 10.0, r)?;
    let witness_iff = verify_appendix_iff(9.5, 10.0, r)?;
    let lo = EXISTENCE_THRESHOLD + 1e-6;
    let existence = existence_certificate(&log_spaced(lo, 30.0, args.betas), r)?;
    let sweep = iff_sweep(args.probes, r);
    let other = match r {
        T0Reading::AsPrinted => T0Reading::LinearInP,
        T0Reading::LinearInP => T0Reading::AsPrinted,
    };
    let alternate = iff_sweep(args.probes, other);
    let usage = branch_usage(args.probes, r);
    let (unused_y, unused_z) = usage.unused();
    let existence_pass = existence.certified() && witness.admissible && witness_iff.all_agree();
    let sweep_pass = sweep.agreement_rate >= IFF_REQUIRED_RATE;
    let summary = ExponentSummary {
        reading: r,
        witness,
        witness_iff,
        existence_range: (lo, 30.0),
        existence_found: existence.found,
        existence_admissible: existence.admissible,
        existence_iff_all_agree: existence.iff_all_agree,
        existence_pass,
        sweep: (&sweep).into(),
        sweep_required_rate: IFF_REQUIRED_RATE,
        sweep_pass,
        alternate_sweep: (&alternate).into(),
        branch_usage: usage,
        unused_t_y2_branches: unused_y,
        unused_t_z2_branches: unused_z,
        sub_unit_p: SUB_UNIT_P.to_vec(),
        all_pass: existence_pass && sweep_pass,
    };
    Ok(ExponentOutput {
        summary,
        existence,
        sweep,
    })
}

const EXPONENT_COLUMNS: [&str; 6] = ["t_y2", "u_y11", "u_y2", "t_z2", "u_z11", "u_z2"];

/// Writes `exponents.csv` (one row per `β`), `iff_disagreements.csv` and
/// `exponents.json`.
pub fn exponents_command(args: &ExponentArgs, out: &Path) -> anyhow::Result<ExponentSummary> {
    std::fs::create_dir_all(out)?;
    let o = exponent_summary(args)?;
    let mut header = vec!["beta", "n"];
    header.extend(EXPONENT_COLUMNS);
    header.extend(["admissible", "iff_all_agree"]);
    write_csv(
        &out.join("exponents.csv"),
        &header,
        o.existence.entries.iter().map(|e| {
            let mut row = vec![format_float(e.beta), e.n.map_or("".into(), format_float)];
            row.extend(e.values.map_or([f64::NAN; 6], |v| v).map(format_float));
            row.push(e.admissible.to_string());
            row.push(e.iff_all_agree.map_or("".into(), |a| a.to_string()));
            row
        }),
    )?;
    let mut header = vec!["n", "beta", "disagreeing"];
    header.extend(EXPONENT_COLUMNS);
    write_csv(
        &out.join("iff_disagreements.csv"),
        &header,
        o.sweep.disagreements.iter().map(|d| {
            let names: Vec<&str> = d.exponents.iter().map(|e| e.name()).collect();
            let mut row = vec![format_float(d.n), format_float(d.beta), names.join(";")];
            row.extend(d.values.map(format_float));
            row
        }),
    )?;
    write_json(&out.join("exponents.json"), &o.summary)?;
    Ok(o.summary)
}

/// Settings of the manufactured-solution studies.
pub const MMS_SPATIAL_CELLS: [usize; 3] = [16, 32, 64];
pub const MMS_SPATIAL_DT: f64 = 1e-5;
pub const MMS_SPATIAL_T_END: f64 = 0.1;
pub const MMS_TEMPORAL_CELLS: usize = 512;
pub const MMS_TEMPORAL_DTS: [f64; 3] = [0.04, 0.02, 0.01];
pub const MMS_TEMPORAL_T_END: f64 = 0.4;
pub const MMS_ORDER_TOL: f64 = 0.2;

#[derive(Debug, Clone, Serialize)]
pub struct MmsSummary {
    pub params: Params,
    pub spatial: ConvergenceStudy,
    pub temporal: ConvergenceStudy,
    pub spatial_pass: bool,
    pub temporal_pass: bool,
    pub all_pass: bool,
}

pub fn mms_summary(params: &Params) -> anyhow::Result<MmsSummary> {
    let m = Manufactured::new(*params);
    let control = StepControl::default();
    let spatial = spatial_study(&m, &MMS_SPATIAL_CELLS, MMS_SPATIAL_DT, MMS_SPATIAL_T_END, &control)?;
    let temporal = temporal_study(&m, MMS_TEMPORAL_CELLS, &MMS_TEMPORAL_DTS, MMS_TEMPORAL_T_END, &control)?;
    let within = |s: &ConvergenceStudy, target: f64| s.orders.iter().all(|o| (o - target).abs() <= MMS_ORDER_TOL);
    let spatial_pass = within(&spatial, 2.0);
    let temporal_pass = within(&temporal, 1.0);
    Ok(MmsSummary {
        params: *params,
        spatial,
        temporal,
        spatial_pass,
        temporal_pass,
        all_pass: spatial_pass && temporal_pass,
    })
}

/// Writes `mms.csv` and `mms.json`.
pub fn mms_command(params: &Params, out: &Path) -> anyhow::Result<MmsSummary> {
    std::fs::create_dir_all(out)?;
    let s = mms_summary(params)?;
    let rows = [("space", &s.spatial), ("time", &s.temporal)]
        .into_iter()
        .flat_map(|(name, st)| {
            (0..st.levels.len()).map(move |k| {
                vec![
                    name.to_owned(),
                    format_float(st.levels[k]),
                    format_float(st.errors[k]),
                    if k == 0 {
                        String::new()
                    } else {
                        format_float(st.orders[k - 1])
                    },
                ]
            })
        });
    write_csv(&out.join("mms.csv"), &["study", "step", "error", "order"], rows)?;
    write_json(&out.join("mms.json"), &s)?;
    Ok(s)
}
