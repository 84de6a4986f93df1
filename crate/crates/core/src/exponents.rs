//! Exponent algebra of the a priori estimates: the 𝔗/𝔘 families as
//! functions of `(n, β)`, the search for admissible `n`, and a comparison
//! of direct evaluation against the closed-form characterizations.
//!
//! `d = 2β + 3` throughout.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Denominators smaller than this in magnitude are treated as poles.
pub const POLE_TOL: f64 = 1e-12;

/// How `p` enters `𝔗^𝔶₀(n, p, β)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum T0Reading {
    /// The stated formula, which does not depend on `p`.
    #[default]
    AsPrinted,
    /// The stated formula multiplied by `p`.
    LinearInP,
}

/// The six exponents that must lie in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exponent {
    TY2,
    UY11,
    UY2,
    TZ2,
    UZ11,
    UZ2,
}

impl Exponent {
    pub const ALL: [Exponent; 6] = [
        Exponent::TY2,
        Exponent::UY11,
        Exponent::UY2,
        Exponent::TZ2,
        Exponent::UZ11,
        Exponent::UZ2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Exponent::TY2 => "t_y2",
            Exponent::UY11 => "u_y11",
            Exponent::UY2 => "u_y2",
            Exponent::TZ2 => "t_z2",
            Exponent::UZ11 => "u_z11",
            Exponent::UZ2 => "u_z2",
        }
    }
}

impl std::fmt::Display for Exponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

fn positive(what: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Domain { what, value })
    }
}

fn ratio(num: f64, den: f64, which: &'static str) -> Result<f64> {
    if den.abs() < POLE_TOL {
        Err(Error::Pole {
            which,
            denominator: den,
        })
    } else {
        Ok(num / den)
    }
}

/// `𝔗^𝔶₀(n, p, β)`: `4/(n d)` if `n < (β+3)/2`, else `(n − β + 5)/(n d)`.
pub fn t_y0(n: f64, p: f64, beta: f64) -> Result<f64> {
    t_y0_with(n, p, beta, T0Reading::AsPrinted)
}

pub fn t_y0_with(n: f64, p: f64, beta: f64, reading: T0Reading) -> Result<f64> {
    let n = positive("n", n)?;
    let p = positive("p", p)?;
    let beta = positive("beta", beta)?;
    let d = 2.0 * beta + 3.0;
    let printed = if n - (beta + 3.0) / 2.0 < 0.0 {
        4.0 / (n * d)
    } else {
        (n - beta + 5.0) / (n * d)
    };
    Ok(match reading {
        T0Reading::AsPrinted => printed,
        T0Reading::LinearInP => p * printed,
    })
}

/// Values of `p` at which `𝔗^𝔶₀` is invoked below 1 by the exponents here.
pub const SUB_UNIT_P: [f64; 2] = [0.5, 0.75];

/// Exponent formulas at one `(n, β)` under a chosen [`T0Reading`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Algebra {
    pub n: f64,
    pub beta: f64,
    pub reading: T0Reading,
}

impl Algebra {
    pub fn new(n: f64, beta: f64, reading: T0Reading) -> Result<Self> {
        positive("n", n)?;
        positive("beta", beta)?;
        Ok(Self { n, beta, reading })
    }

    fn d(&self) -> f64 {
        2.0 * self.beta + 3.0
    }

    pub fn t0(&self, p: f64) -> Result<f64> {
        t_y0_with(self.n, p, self.beta, self.reading)
    }

    /// `max{𝔗₀(8), 1/d + 𝔗₀(1)}`.
    pub fn t_y1(&self) -> Result<f64> {
        Ok(self.t0(8.0)?.max(1.0 / self.d() + self.t0(1.0)?))
    }

    /// `(3/4) / (1 − 𝔗₀(5/2))`.
    pub fn u_z11(&self) -> Result<f64> {
        ratio(0.75, 1.0 - self.t0(2.5)?, "u_z11")
    }

    /// `2/d + 𝔗₀(1)`.
    pub fn u_y11(&self) -> Result<f64> {
        Ok(2.0 / self.d() + self.t0(1.0)?)
    }

    /// `2/d + 𝔗^𝔶₁`.
    pub fn u_y2(&self) -> Result<f64> {
        Ok(2.0 / self.d() + self.t_y1()?)
    }

    /// `(3/4) / (1 − 𝔗₀(3/2) − 𝔗^𝔶₁)`.
    pub fn u_z2(&self) -> Result<f64> {
        ratio(0.75, 1.0 - self.t0(1.5)? - self.t_y1()?, "u_z2")
    }

    /// The eight expressions whose maximum is `𝔗^𝔶₂`.
    pub fn t_y2_branches(&self) -> Result<[f64; 8]> {
        let b = self.beta;
        let d = self.d();
        let t1 = self.t_y1()?;
        let t = |p| self.t0(p);
        Ok([
            2.0 / d + t(1.0)?,
            (2.0 * b + 2.0) / d + t(2.0)?,
            (b + 1.0) / d + t(1.0)? + 0.5,
            (b + 1.0) / d + t(1.0)? + self.u_y11()? / 2.0,
            1.0 / d + t(4.5)?,
            t(2.0)? + b / d + 3.0 * t1,
            t(1.0)? + (b + 2.0) / (4.0 * b + 6.0) + 1.5 * t1,
            t(5.5)? + b / (4.0 * b + 6.0) + 1.5 * t1,
        ])
    }

    /// The eight expressions whose maximum is `𝔗^𝔷₂`.
    pub fn t_z2_branches(&self) -> Result<[f64; 8]> {
        const NAMES: [&str; 8] = [
            "t_z2[0]", "t_z2[1]", "t_z2[2]", "t_z2[3]", "t_z2[4]", "t_z2[5]", "t_z2[6]", "t_z2[7]",
        ];
        let b = self.beta;
        let d = self.d();
        let q = 4.0 * b + 6.0;
        let t1 = self.t_y1()?;
        let t = |p| self.t0(p);
        Ok([
            ratio(0.5, 1.0 - 1.0 / d - t(0.5)?, NAMES[0])?,
            ratio(0.5, 1.0 - (b + 2.0) / q - t(0.5)?, NAMES[1])?,
            ratio(self.u_z11()? / 2.0, 1.0 - (b + 1.0) / d - t(1.0)?, NAMES[2])?,
            ratio(0.375, 1.0 - (b + 1.0) / d - t(1.75)?, NAMES[3])?,
            ratio(0.375, 1.0 - 1.0 / d - t(1.75)?, NAMES[4])?,
            ratio(0.375, 1.0 - t(0.75)? - t1, NAMES[5])?,
            ratio(0.375, 1.0 - t(1.75)? - b / q - 1.5 * t1, NAMES[6])?,
            ratio(0.5, 1.0 - b / q - t(4.5)?, NAMES[7])?,
        ])
    }

    pub fn t_y2(&self) -> Result<f64> {
        Ok(self.t_y2_branches()?.into_iter().fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn t_z2(&self) -> Result<f64> {
        Ok(self.t_z2_branches()?.into_iter().fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn value(&self, e: Exponent) -> Result<f64> {
        match e {
            Exponent::TY2 => self.t_y2(),
            Exponent::UY11 => self.u_y11(),
            Exponent::UY2 => self.u_y2(),
            Exponent::TZ2 => self.t_z2(),
            Exponent::UZ11 => self.u_z11(),
            Exponent::UZ2 => self.u_z2(),
        }
    }
}

macro_rules! printed {
    ($($name:ident),*) => {$(
        pub fn $name(n: f64, beta: f64) -> Result<f64> {
            Algebra::new(n, beta, T0Reading::AsPrinted)?.$name()
        }
    )*};
}
printed!(t_y1, u_y11, u_z11, u_y2, u_z2, t_y2, t_z2);

fn in_unit_interval(x: f64) -> bool {
    x > 0.0 && x < 1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub n: f64,
    pub beta: f64,
    pub reading: T0Reading,
    pub t_y2: f64,
    pub u_y11: f64,
    pub u_y2: f64,
    pub t_z2: f64,
    pub u_z11: f64,
    pub u_z2: f64,
    pub t_y1: f64,
    /// `(p, 𝔗^𝔶₀(n, p, β))` for every `p` the formulas use.
    pub t_y0_used: Vec<(f64, f64)>,
    /// The entries of `t_y0_used` with `p < 1`.
    pub sub_unit_p: Vec<f64>,
    pub admissible: bool,
}

impl ExponentReport {
    pub fn evaluate(n: f64, beta: f64, reading: T0Reading) -> Result<Self> {
        if !(n > 8.0) {
            return Err(Error::Domain { what: "n", value: n });
        }
        let alg = Algebra::new(n, beta, reading)?;
        const PS: [f64; 10] = [0.5, 0.75, 1.0, 1.5, 1.75, 2.0, 2.5, 4.5, 5.5, 8.0];
        let t_y0_used = PS.iter().map(|&p| Ok((p, alg.t0(p)?))).collect::<Result<Vec<_>>>()?;
        let mut r = Self {
            n,
            beta,
            reading,
            t_y2: alg.t_y2()?,
            u_y11: alg.u_y11()?,
            u_y2: alg.u_y2()?,
            t_z2: alg.t_z2()?,
            u_z11: alg.u_z11()?,
            u_z2: alg.u_z2()?,
            t_y1: alg.t_y1()?,
            t_y0_used,
            sub_unit_p: SUB_UNIT_P.to_vec(),
            admissible: false,
        };
        r.admissible = r.values().iter().all(|&v| in_unit_interval(v));
        Ok(r)
    }

    /// In the order of [`Exponent::ALL`].
    pub fn values(&self) -> [f64; 6] {
        [self.t_y2, self.u_y11, self.u_y2, self.t_z2, self.u_z11, self.u_z2]
    }
}

fn admissible_at(n: f64, beta: f64, reading: T0Reading) -> bool {
    ExponentReport::evaluate(n, beta, reading).is_ok_and(|r| r.admissible)
}

/// Grid spacing of the admissibility scan.
pub const SCAN_STEP: f64 = 1e-3;
pub const SCAN_MAX: f64 = 200.0;

/// Smallest `n ∈ (8, 200]` found admissible: geometric probes
/// `8 + 10⁻³·2⁻ᵏ` first, then a grid of step `10⁻³`, refining each first hit
/// by bisection against the preceding non-admissible probe.
pub fn find_admissible_n(beta: f64, reading: T0Reading) -> Result<Option<f64>> {
    positive("beta", beta)?;
    let refine = |mut lo: f64, mut hi: f64| {
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if admissible_at(mid, beta, reading) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    let mut prev = 8.0;
    for k in (1..=40).rev() {
        let n = 8.0 + SCAN_STEP * 0.5f64.powi(k);
        if admissible_at(n, beta, reading) {
            return Ok(Some(refine(prev, n)));
        }
        prev = n;
    }
    let steps = ((SCAN_MAX - 8.0) / SCAN_STEP).round() as usize;
    for k in 1..=steps {
        let n = 8.0 + k as f64 * SCAN_STEP;
        if admissible_at(n, beta, reading) {
            return Ok(Some(refine(prev, n)));
        }
        prev = n;
    }
    Ok(None)
}

/// The closed-form characterization of `exponent ∈ (0, 1)`.
pub fn printed_condition(e: Exponent, n: f64, beta: f64) -> bool {
    let b = beta;
    let upper = b <= 2.0 * n - 3.0;
    match e {
        Exponent::TY2 => {
            if n <= 10.0 {
                (23.0 * n + 130.0) / (n + 26.0) < b && upper
            } else {
                (n + 10.0) / 2.0 < b && upper
            }
        }
        Exponent::UY11 => b > 5.0 / (1.0 + 2.0 * n),
        Exponent::UY2 => {
            let lower = (7.0 * n + 40.0) / (2.0 * n + 8.0);
            let c = (11.0 * 33f64.sqrt() + 69.0) / 8.0;
            if n <= 16.0 {
                lower < b && upper
            } else if n < c {
                (lower < b && upper) || b > (48.0 - n) / (2.0 * n - 32.0)
            } else {
                b > lower
            }
        }
        Exponent::TZ2 => {
            let lower = (47.0 * n + 310.0) / (6.0 * n + 62.0);
            let c = (231145f64.sqrt() + 499.0) / 24.0;
            if n <= c {
                lower < b && upper
            } else if n < 124.0 / 3.0 {
                lower < b && b < (372.0 - 15.0 * n) / (6.0 * n - 248.0)
            } else {
                b > lower
            }
        }
        Exponent::UZ11 => {
            let lower = (7.0 * n + 50.0) / (2.0 * n + 10.0);
            if n <= 20.0 {
                lower < b && upper
            } else {
                b > lower
            }
        }
        Exponent::UZ2 => {
            let lower = (35.0 * n + 190.0) / (2.0 * n + 38.0);
            if n <= 76.0 {
                lower < b && upper
            } else {
                b > lower
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IffReport {
    pub n: f64,
    pub beta: f64,
    pub values: [f64; 6],
    pub direct: [bool; 6],
    pub printed: [bool; 6],
    pub agree: [bool; 6],
}

impl IffReport {
    pub fn all_agree(&self) -> bool {
        self.agree.iter().all(|&a| a)
    }

    pub fn disagreeing(&self) -> Vec<Exponent> {
        Exponent::ALL
            .iter()
            .zip(self.agree)
            .filter(|(_, a)| !a)
            .map(|(e, _)| *e)
            .collect()
    }
}

/// Direct evaluation of each exponent against its closed-form condition.
pub fn verify_appendix_iff(n: f64, beta: f64, reading: T0Reading) -> Result<IffReport> {
    let r = ExponentReport::evaluate(n, beta, reading)?;
    let values = r.values();
    let direct = values.map(in_unit_interval);
    let printed = Exponent::ALL.map(|e| printed_condition(e, n, beta));
    let mut agree = [false; 6];
    for i in 0..6 {
        agree[i] = direct[i] == printed[i];
    }
    Ok(IffReport {
        n,
        beta,
        values,
        direct,
        printed,
        agree,
    })
}

/// Radical inverse of `i` in `base`.
pub fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Probe `i ≥ 1` of the sweep over `(8, 100] × (0, 50]`.
pub fn sweep_point(i: u64) -> (f64, f64) {
    (8.0 + 92.0 * halton(i, 2), 50.0 * halton(i, 3))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Disagreement {
    pub n: f64,
    pub beta: f64,
    pub exponents: Vec<Exponent>,
    pub values: [f64; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub reading: T0Reading,
    pub requested: usize,
    /// Probes skipped because some exponent hit a pole.
    pub skipped_poles: usize,
    pub evaluated: usize,
    pub agreeing: usize,
    pub agreement_rate: f64,
    /// Per exponent, in the order of [`Exponent::ALL`].
    pub per_exponent_rate: [f64; 6],
    pub disagreements: Vec<Disagreement>,
}

/// Halton probes `1..=count` through [`verify_appendix_iff`].
pub fn iff_sweep(count: usize, reading: T0Reading) -> SweepReport {
    let mut skipped_poles = 0;
    let mut evaluated = 0;
    let mut agreeing = 0;
    let mut per = [0usize; 6];
    let mut disagreements = Vec::new();
    for i in 1..=count as u64 {
        let (n, beta) = sweep_point(i);
        let Ok(r) = verify_appendix_iff(n, beta, reading) else {
            skipped_poles += 1;
            continue;
        };
        evaluated += 1;
        for (k, a) in r.agree.iter().enumerate() {
            per[k] += *a as usize;
        }
        if r.all_agree() {
            agreeing += 1;
        } else {
            disagreements.push(Disagreement {
                n,
                beta,
                exponents: r.disagreeing(),
                values: r.values,
            });
        }
    }
    let rate = |k: usize| {
        if evaluated == 0 {
            0.0
        } else {
            k as f64 / evaluated as f64
        }
    };
    SweepReport {
        reading,
        requested: count,
        skipped_poles,
        evaluated,
        agreeing,
        agreement_rate: rate(agreeing),
        per_exponent_rate: per.map(rate),
        disagreements,
    }
}

/// For each branch of the two max-expressions, the number of sweep probes
/// at which removing it changes the maximum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchUsage {
    pub t_y2: [usize; 8],
    pub t_z2: [usize; 8],
}

impl BranchUsage {
    pub fn unused(&self) -> (Vec<usize>, Vec<usize>) {
        let idle = |c: &[usize; 8]| (0..8).filter(|&i| c[i] == 0).collect();
        (idle(&self.t_y2), idle(&self.t_z2))
    }
}

pub fn branch_usage(count: usize, reading: T0Reading) -> BranchUsage {
    fn bump(counts: &mut [usize; 8], branches: &[f64; 8]) {
        let max = branches.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for (i, count) in counts.iter_mut().enumerate() {
            let without = (0..8)
                .filter(|&j| j != i)
                .map(|j| branches[j])
                .fold(f64::NEG_INFINITY, f64::max);
            if without != max {
                *count += 1;
            }
        }
    }
    let mut usage = BranchUsage {
        t_y2: [0; 8],
        t_z2: [0; 8],
    };
    for i in 1..=count as u64 {
        let (n, beta) = sweep_point(i);
        let Ok(alg) = Algebra::new(n, beta, reading) else {
            continue;
        };
        let (Ok(y), Ok(z)) = (alg.t_y2_branches(), alg.t_z2_branches()) else {
            continue;
        };
        bump(&mut usage.t_y2, &y);
        bump(&mut usage.t_z2, &z);
    }
    usage
}

/// Lower end (excluded) of the existence range.
pub const EXISTENCE_THRESHOLD: f64 = 157.0 / 17.0;

/// `count` values log-spaced in `(lo, hi]`, excluding `lo`.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (1..=count)
        .map(|k| {
            if k == count {
                hi
            } else {
                (a + (b - a) * k as f64 / count as f64).exp()
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceEntry {
    pub beta: f64,
    pub n: Option<f64>,
    pub values: Option<[f64; 6]>,
    pub admissible: bool,
    /// Whether the closed-form conditions also accept the returned `n`.
    pub iff_all_agree: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExistenceReport {
    pub reading: T0Reading,
    pub entries: Vec<ExistenceEntry>,
    pub found: usize,
    pub admissible: usize,
    pub iff_all_agree: usize,
}

impl ExistenceReport {
    pub fn certified(&self) -> bool {
        self.admissible == self.entries.len()
    }
}

/// [`find_admissible_n`] at each `β`, with the returned `n` re-evaluated.
pub fn existence_certificate(betas: &[f64], reading: T0Reading) -> Result<ExistenceReport> {
    let mut entries = Vec::with_capacity(betas.len());
    for &beta in betas {
        let n = find_admissible_n(beta, reading)?;
        let (values, admissible, agree) = match n {
            Some(n) => {
                let r = ExponentReport::evaluate(n, beta, reading)?;
                let agree = verify_appendix_iff(n, beta, reading)?.all_agree();
                (Some(r.values()), r.admissible, Some(agree))
            }
            None => (None, false, None),
        };
        entries.push(ExistenceEntry {
            beta,
            n,
            values,
            admissible,
            iff_all_agree: agree,
        });
    }
    Ok(ExistenceReport {
        reading,
        found: entries.iter().filter(|e| e.n.is_some()).count(),
        admissible: entries.iter().filter(|e| e.admissible).count(),
        iff_all_agree: entries.iter().filter(|e| e.iff_all_agree == Some(true)).count(),
        entries,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub exponent: Exponent,
    pub beta: f64,
    pub step: f64,
    pub slope_bound: f64,
}

/// Scans `β` on a uniform grid at fixed `n` and reports steps larger than
/// ten times the neighboring finite-difference slopes. Cells that contain
/// the branch switch `β = 2n − 3` of `𝔗^𝔶₀`, a pole, or a sign change
/// through large values are skipped.
pub fn continuity_probe(n: f64, beta_lo: f64, beta_hi: f64, cells: usize, reading: T0Reading) -> Result<Vec<Jump>> {
    if cells < 4 || !(beta_hi > beta_lo) {
        return Err(Error::Invalid(
            "continuity probe needs at least 4 cells on a nonempty range".into(),
        ));
    }
    let db = (beta_hi - beta_lo) / cells as f64;
    let betas: Vec<f64> = (0..=cells).map(|i| beta_lo + i as f64 * db).collect();
    let switch = 2.0 * n - 3.0;
    let mut jumps = Vec::new();
    for e in Exponent::ALL {
        let vals: Vec<Option<f64>> = betas
            .iter()
            .map(|&b| Algebra::new(n, b, reading).and_then(|a| a.value(e)).ok())
            .collect();
        let diff = |i: usize| match (vals[i], vals[i + 1]) {
            (Some(a), Some(b)) if !(a.signum() != b.signum() && a.abs().max(b.abs()) > 10.0) => Some((b - a).abs()),
            _ => None,
        };
        let blocked = |i: usize| betas[i] <= switch && switch <= betas[i + 1] || diff(i).is_none();
        #[allow(clippy::needless_range_loop)]
        for i in 1..cells - 1 {
            if blocked(i - 1) || blocked(i) || blocked(i + 1) {
                continue;
            }
            let step = diff(i).unwrap_or(0.0);
            let slope_bound = diff(i - 1).unwrap_or(0.0).max(diff(i + 1).unwrap_or(0.0));
            if step > 10.0 * slope_bound && step > 1e-12 {
                jumps.push(Jump {
                    exponent: e,
                    beta: betas[i],
                    step,
                    slope_bound,
                });
            }
        }
    }
    Ok(jumps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn t_y0_examples() {
        assert_abs_diff_eq!(t_y0(10.0, 1.0, 10.0).unwrap(), 5.0 / 230.0, epsilon = 1e-16);
        assert_abs_diff_eq!(t_y0(8.5, 1.0, 20.0).unwrap(), 4.0 / (8.5 * 43.0), epsilon = 1e-16);
        assert_abs_diff_eq!(t_y0(10.0, 1.0, 10.0).unwrap(), 0.0217391, epsilon = 1e-7);
        assert_abs_diff_eq!(t_y0(8.5, 1.0, 20.0).unwrap(), 0.0109439, epsilon = 1e-7);
        // On the boundary n = (β+3)/2 the second branch applies.
        let (n, b) = (9.0, 15.0);
        assert_eq!(t_y0(n, 1.0, b).unwrap(), (n - b + 5.0) / (n * 33.0));
        // Continuous across the boundary only at β = 5.
        let below = t_y0(4.0 - 1e-12, 1.0, 5.0).unwrap();
        assert_abs_diff_eq!(below, t_y0(4.0, 1.0, 5.0).unwrap(), epsilon = 1e-12);
        assert!(t_y0(0.0, 1.0, 1.0).is_err());
        assert!(t_y0(9.0, -1.0, 1.0).is_err());
        assert!(t_y0(9.0, 1.0, 0.0).is_err());
        assert_eq!(t_y0(9.0, 0.25, 10.0).unwrap(), t_y0(9.0, 4.0, 10.0).unwrap());
        assert_eq!(
            t_y0_with(9.0, 0.25, 10.0, T0Reading::LinearInP).unwrap(),
            0.25 * t_y0(9.0, 1.0, 10.0).unwrap()
        );
    }

    #[test]
    fn u_y11_examples() {
        assert_abs_diff_eq!(t_y0(9.0, 1.0, 1.0).unwrap(), 13.0 / 45.0, epsilon = 1e-16);
        assert_abs_diff_eq!(u_y11(9.0, 1.0).unwrap(), 31.0 / 45.0, epsilon = 1e-15);
        let r = verify_appendix_iff(9.0, 5.0 / 19.0, T0Reading::AsPrinted).unwrap();
        assert_eq!(r.values[1], 1.0);
        assert!(!r.direct[1] && !r.printed[1] && r.agree[1]);
    }

    /// Independent transcription of the branch formulas with exact-rational
    /// coefficients written out differently.
    fn oracle(n: f64, b: f64) -> ([f64; 8], [f64; 8]) {
        let t0 = |_p: f64| {
            if 2.0 * n < b + 3.0 {
                4.0 / (n * (2.0 * b + 3.0))
            } else {
                (n - b + 5.0) / (n * (2.0 * b + 3.0))
            }
        };
        let inv = 1.0 / (2.0 * b + 3.0);
        let ty1 = t0(8.0).max(inv + t0(1.0));
        let uy11 = 2.0 * inv + t0(1.0);
        let uz11 = 3.0 / (4.0 * (1.0 - t0(2.5)));
        let h = b * inv / 2.0;
        let y = [
            2.0 * inv + t0(1.0),
            (2.0 * b + 2.0) * inv + t0(2.0),
            (b + 1.0) * inv + t0(1.0) + 0.5,
            (b + 1.0) * inv + t0(1.0) + 0.5 * uy11,
            inv + t0(4.5),
            t0(2.0) + b * inv + 3.0 * ty1,
            t0(1.0) + (b + 2.0) * inv / 2.0 + 1.5 * ty1,
            t0(5.5) + h + 1.5 * ty1,
        ];
        let z = [
            1.0 / (2.0 * (1.0 - inv - t0(0.5))),
            1.0 / (2.0 * (1.0 - (b + 2.0) * inv / 2.0 - t0(0.5))),
            uz11 / (2.0 * (1.0 - (b + 1.0) * inv - t0(1.0))),
            3.0 / (8.0 * (1.0 - (b + 1.0) * inv - t0(1.75))),
            3.0 / (8.0 * (1.0 - inv - t0(1.75))),
            3.0 / (8.0 * (1.0 - t0(0.75) - ty1)),
            3.0 / (8.0 * (1.0 - t0(1.75) - h - 1.5 * ty1)),
            1.0 / (2.0 * (1.0 - h - t0(4.5))),
        ];
        (y, z)
    }

    #[test]
    fn branches_match_oracle() {
        for i in 1..500 {
            let (n, b) = sweep_point(i);
            let alg = Algebra::new(n, b, T0Reading::AsPrinted).unwrap();
            let (y, z) = oracle(n, b);
            let (Ok(ay), Ok(az)) = (alg.t_y2_branches(), alg.t_z2_branches()) else {
                continue;
            };
            for k in 0..8 {
                assert!((ay[k] - y[k]).abs() <= 1e-12 * y[k].abs().max(1.0), "y{k} at ({n},{b})");
                assert!((az[k] - z[k]).abs() <= 1e-9 * z[k].abs().max(1.0), "z{k} at ({n},{b})");
            }
        }
    }

    #[test]
    fn witness_at_nine_and_a_half() {
        let r = ExponentReport::evaluate(9.5, 10.0, T0Reading::AsPrinted).unwrap();
        assert!(r.admissible, "{r:?}");
        assert_abs_diff_eq!(r.t_y2, 0.99886, epsilon = 1e-5);
        assert_abs_diff_eq!(r.u_y11, 0.1076, epsilon = 1e-4);
        assert_eq!(r.sub_unit_p, vec![0.5, 0.75]);
        let iff = verify_appendix_iff(9.5, 10.0, T0Reading::AsPrinted).unwrap();
        assert!(iff.all_agree(), "{iff:?}");
        // Closed-form thresholds quoted for the witness.
        let n = 9.5;
        assert_abs_diff_eq!((23.0 * n + 130.0) / (n + 26.0), 9.8169, epsilon = 1e-4);
        assert_abs_diff_eq!((47.0 * n + 310.0) / (6.0 * n + 62.0), 6.357, epsilon = 1e-3);
        assert_abs_diff_eq!((7.0 * n + 50.0) / (2.0 * n + 10.0), 4.017, epsilon = 1e-3);
        assert_abs_diff_eq!((35.0 * n + 190.0) / (2.0 * n + 38.0), 9.167, epsilon = 1e-3);
        assert_abs_diff_eq!((7.0 * n + 40.0) / (2.0 * n + 8.0), 3.944, epsilon = 1e-3);
    }

    #[test]
    fn ten_is_admissible_and_search_finds_it() {
        let n = find_admissible_n(10.0, T0Reading::AsPrinted).unwrap().unwrap();
        assert!(n > 8.0 && n <= 9.5);
        assert!(
            ExponentReport::evaluate(n, 10.0, T0Reading::AsPrinted)
                .unwrap()
                .admissible
        );
        let n = find_admissible_n(157.0 / 17.0 + 0.01, T0Reading::AsPrinted)
            .unwrap()
            .unwrap();
        assert!(n > 8.0 && n < 10.0);
        // Below the threshold nothing is asserted; the call must still return.
        find_admissible_n(1.0, T0Reading::AsPrinted).unwrap();
    }

    #[test]
    fn poles_are_reported() {
        // 1 − 𝔗₀(5/2) = 0 needs 𝔗₀ = 1, i.e. 4/(n d) = 1 on the first branch.
        let beta = 1.0;
        let n = 4.0 / (2.0 * beta + 3.0);
        assert!(n < (beta + 3.0) / 2.0);
        assert!(matches!(
            Algebra::new(n, beta, T0Reading::AsPrinted).unwrap().u_z11(),
            Err(Error::Pole { which: "u_z11", .. })
        ));
    }

    #[test]
    fn halton_is_radical_inverse() {
        assert_eq!(halton(1, 2), 0.5);
        assert_eq!(halton(3, 2), 0.75);
        assert_abs_diff_eq!(halton(5, 3), 7.0 / 9.0, epsilon = 1e-15);
    }

    #[test]
    fn continuity_away_from_switch() {
        for n in [9.0, 12.5, 40.0] {
            let jumps = continuity_probe(n, 0.05, 50.0, 20_000, T0Reading::AsPrinted).unwrap();
            assert!(jumps.is_empty(), "n = {n}: {jumps:?}");
        }
    }
}
