//! Run configuration: a sectioned `key = value` text format with strict
//! key checking, line-numbered errors and documented defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use radhydro_core::grid::MIN_CELLS;
use radhydro_core::integrator::StepControl;
use radhydro_core::{Error as CoreError, Params};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::presets::{make_initial_data, Preset};

/// A configuration problem located as precisely as possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: Option<PathBuf>,
    pub line: Option<usize>,
    /// Full key path, `section.key`.
    pub key: Option<String>,
    pub message: String,
    pub suggestion: Option<String>,
}

impl ConfigError {
    pub fn new(key: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            path: None,
            line: None,
            key: key.map(str::to_owned),
            message: message.into(),
            suggestion: None,
        }
    }

    fn at(mut self, line: Option<usize>) -> Self {
        self.line = self.line.or(line);
        self
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error")?;
        match (&self.path, self.line) {
            (Some(p), Some(l)) => write!(f, " at {}:{l}", p.display())?,
            (Some(p), None) => write!(f, " in {}", p.display())?,
            (None, Some(l)) => write!(f, " at line {l}")?,
            (None, None) => {}
        }
        if let Some(k) = &self.key {
            write!(f, " [{k}]")?;
        }
        write!(f, ": {}", self.message)?;
        if let Some(s) = &self.suggestion {
            write!(f, " (did you mean `{s}`?)")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// How the initial state is built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialSpec {
    pub preset: Preset,
    pub alpha_v: f64,
    pub alpha_u: f64,
    pub alpha_theta: f64,
    /// Amplitudes of the `k = 2` component of `two_mode`.
    pub alpha2_v: f64,
    pub alpha2_u: f64,
    pub alpha2_theta: f64,
    /// Peak perturbation of `random_smooth`.
    pub noise_amplitude: f64,
    /// Highest retained wavenumber of `random_smooth`.
    pub cutoff: usize,
    /// Columns `v,u,theta` for `tabulated`.
    pub path: Option<PathBuf>,
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self {
            preset: Preset::Equilibrium,
            alpha_v: 0.1,
            alpha_u: 0.1,
            alpha_theta: 0.1,
            alpha2_v: 0.05,
            alpha2_u: 0.05,
            alpha2_theta: 0.05,
            noise_amplitude: 0.1,
            cutoff: 4,
            path: None,
        }
    }
}

/// Which audits run, and the tolerances their verdicts use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub entropy: bool,
    pub representation: bool,
    pub pointwise: bool,
    pub aux: bool,
    pub exponents: bool,
    /// Relative bound on mass and momentum drift.
    pub conservation_tol: f64,
    /// `|h Σ v q| ≤ neutrality_c · h²` at every step.
    pub neutrality_c: f64,
    pub entropy_tol: f64,
    pub repr_tol: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            entropy: true,
            representation: false,
            pointwise: true,
            aux: true,
            exponents: false,
            conservation_tol: 1e-12,
            neutrality_c: 1.0,
            entropy_tol: 1e-2,
            repr_tol: 1e-2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub params: Params,
    pub n_cells: usize,
    pub t_end: f64,
    /// Snapshot every this many accepted steps.
    pub cadence: usize,
    /// Checkpoint every this many accepted steps; zero disables.
    pub checkpoint_interval: usize,
    pub seed: u64,
    pub control: StepControl,
    pub initial: InitialSpec,
    pub audit: AuditConfig,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// Defaults for everything except the preset and `t_end`.
    pub fn new(preset: Preset, t_end: f64) -> Self {
        Self {
            params: Params::default(),
            n_cells: 128,
            t_end,
            cadence: 10,
            checkpoint_interval: 0,
            seed: 0,
            control: StepControl::default(),
            initial: InitialSpec {
                preset,
                ..InitialSpec::default()
            },
            audit: AuditConfig::default(),
            output_dir: PathBuf::from("out"),
        }
    }

    /// Every invariant checked by the parser, without line information.
    pub fn validate(&self) -> Result<(), ConfigError> {
        validate(self, &BTreeMap::new())
    }

    /// Canonical text form: every key, no output directory. Parsing it
    /// yields an equal configuration.
    pub fn to_ini(&self) -> String {
        let p = &self.params;
        let c = &self.control;
        let i = &self.initial;
        let a = &self.audit;
        let mut s = String::new();
        let mut section = |name: &str, entries: Vec<(&str, String)>| {
            s.push_str(&format!("[{name}]\n"));
            for (k, v) in entries {
                s.push_str(&format!("{k} = {v}\n"));
            }
            s.push('\n');
        };
        let f = |x: f64| format!("{x:?}");
        section(
            "params",
            vec![
                ("mu", f(p.mu)),
                ("kappa1", f(p.kappa1)),
                ("kappa2", f(p.kappa2)),
                ("beta", f(p.beta)),
                ("R", f(p.r)),
                ("gamma", f(p.gamma)),
                ("a", f(p.a)),
                ("b", f(p.b)),
            ],
        );
        section(
            "run",
            vec![
                ("n_cells", self.n_cells.to_string()),
                ("t_end", f(self.t_end)),
                ("cadence", self.cadence.to_string()),
                ("checkpoint_interval", self.checkpoint_interval.to_string()),
                ("seed", self.seed.to_string()),
            ],
        );
        section(
            "control",
            vec![
                ("dt_init", f(c.dt_init)),
                ("dt_min", f(c.dt_min)),
                ("dt_max", f(c.dt_max)),
                ("cfl_advective", f(c.cfl_advective)),
                ("picard_iters", c.picard_iters.to_string()),
                ("picard_tol", f(c.picard_tol)),
                ("positivity_shrink", f(c.positivity_shrink)),
            ],
        );
        let mut init = vec![
            ("preset", i.preset.name().to_owned()),
            ("alpha_v", f(i.alpha_v)),
            ("alpha_u", f(i.alpha_u)),
            ("alpha_theta", f(i.alpha_theta)),
            ("alpha2_v", f(i.alpha2_v)),
            ("alpha2_u", f(i.alpha2_u)),
            ("alpha2_theta", f(i.alpha2_theta)),
            ("noise_amplitude", f(i.noise_amplitude)),
            ("cutoff", i.cutoff.to_string()),
        ];
        if let Some(path) = &i.path {
            init.push(("path", path.display().to_string()));
        }
        section("initial", init);
        section(
            "audit",
            vec![
                ("entropy", a.entropy.to_string()),
                ("representation", a.representation.to_string()),
                ("pointwise", a.pointwise.to_string()),
                ("aux", a.aux.to_string()),
                ("exponents", a.exponents.to_string()),
                ("conservation_tol", f(a.conservation_tol)),
                ("neutrality_c", f(a.neutrality_c)),
                ("entropy_tol", f(a.entropy_tol)),
                ("repr_tol", f(a.repr_tol)),
            ],
        );
        s.pop();
        s
    }

    /// SHA-256 of [`RunConfig::to_ini`].
    pub fn hash(&self) -> [u8; 32] {
        Sha256::digest(self.to_ini().as_bytes()).into()
    }
}

/// Every accepted key, by section.
pub const KEYS: &[(&str, &[&str])] = &[
    ("params", &["mu", "kappa1", "kappa2", "beta", "R", "gamma", "a", "b"]),
    ("run", &["n_cells", "t_end", "cadence", "checkpoint_interval", "seed"]),
    (
        "control",
        &[
            "dt_init",
            "dt_min",
            "dt_max",
            "cfl_advective",
            "picard_iters",
            "picard_tol",
            "positivity_shrink",
        ],
    ),
    (
        "initial",
        &[
            "preset",
            "alpha_v",
            "alpha_u",
            "alpha_theta",
            "alpha2_v",
            "alpha2_u",
            "alpha2_theta",
            "noise_amplitude",
            "cutoff",
            "path",
        ],
    ),
    (
        "audit",
        &[
            "entropy",
            "representation",
            "pointwise",
            "aux",
            "exponents",
            "conservation_tol",
            "neutrality_c",
            "entropy_tol",
            "repr_tol",
        ],
    ),
    ("output", &["dir"]),
];

/// Descriptive names people reach for, mapped to the accepted key.
const ALIASES: &[(&str, &str)] = &[
    ("viscosity", "params.mu"),
    ("conductivity_exponent", "params.beta"),
    ("gas_constant", "params.R"),
    ("adiabatic_index", "params.gamma"),
    ("absorption", "params.a"),
    ("stefan_boltzmann", "params.b"),
    ("cells", "run.n_cells"),
    ("final_time", "run.t_end"),
    ("snapshot_every", "run.cadence"),
    ("cfl", "control.cfl_advective"),
    ("shrink", "control.positivity_shrink"),
    ("amplitude", "initial.noise_amplitude"),
    ("output_dir", "output.dir"),
];

fn levenshtein(a: &str, b: &str) -> usize {
    let b: Vec<char> = b.chars().collect();
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.chars().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let next = (diag + usize::from(ca != cb)).min(row[j] + 1).min(row[j + 1] + 1);
            diag = row[j + 1];
            row[j + 1] = next;
        }
    }
    row[b.len()]
}

/// Closest accepted key to `key` (found in `section`): the bare name when
/// it lives in the same section, the full path otherwise.
pub fn suggest_key(section: &str, key: &str) -> Option<String> {
    let lower = key.to_ascii_lowercase();
    let mut candidates: Vec<(String, String)> = KEYS
        .iter()
        .flat_map(|(s, keys)| keys.iter().map(move |k| (k.to_ascii_lowercase(), format!("{s}.{k}"))))
        .collect();
    candidates.extend(
        ALIASES
            .iter()
            .map(|(alias, full)| (alias.to_string(), full.to_string())),
    );
    let (dist, full) = candidates
        .into_iter()
        .map(|(name, full)| (levenshtein(&lower, &name), full))
        .min_by_key(|(d, _)| *d)?;
    if dist > 2.max(key.len() / 3) {
        return None;
    }
    match full.split_once('.') {
        Some((s, k)) if s == section => Some(k.to_owned()),
        _ => Some(full),
    }
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

fn parse_entries(text: &str) -> Result<BTreeMap<String, Entry>, ConfigError> {
    let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::new(None, format!("malformed section header `{trimmed}`")).at(Some(line)))?
                .trim();
            if !KEYS.iter().any(|(s, _)| *s == name) {
                let best = KEYS
                    .iter()
                    .map(|(s, _)| (levenshtein(name, s), *s))
                    .min()
                    .filter(|(d, _)| *d <= 2);
                let mut e = ConfigError::new(Some(name), format!("unknown section `{name}`")).at(Some(line));
                e.suggestion = best.map(|(_, s)| s.to_owned());
                return Err(e);
            }
            section = Some(name.to_owned());
            continue;
        }
        let (key, value) = trimmed
            .split_once('=')
            .ok_or_else(|| ConfigError::new(None, format!("expected `key = value`, got `{trimmed}`")).at(Some(line)))?;
        let key = key.trim();
        let value = value.trim();
        if key.is_empty() {
            return Err(ConfigError::new(None, "empty key").at(Some(line)));
        }
        let Some(sec) = &section else {
            return Err(ConfigError::new(Some(key), "key appears before any [section] header").at(Some(line)));
        };
        let full = format!("{sec}.{key}");
        let known = KEYS.iter().any(|(s, keys)| s == sec && keys.contains(&key));
        if !known {
            let mut e = ConfigError::new(Some(&full), format!("unknown key `{key}` in [{sec}]")).at(Some(line));
            e.suggestion = suggest_key(sec, key);
            return Err(e);
        }
        if let Some(prev) = entries.get(&full) {
            return Err(
                ConfigError::new(Some(&full), format!("duplicate key (first set on line {})", prev.line))
                    .at(Some(line)),
            );
        }
        entries.insert(
            full,
            Entry {
                value: value.to_owned(),
                line,
            },
        );
    }
    Ok(entries)
}

struct Reader<'a> {
    entries: &'a BTreeMap<String, Entry>,
}

impl Reader<'_> {
    fn get<T>(&self, key: &str, default: T, parse: impl Fn(&str) -> Option<T>, kind: &str) -> Result<T, ConfigError> {
        match self.entries.get(key) {
            None => Ok(default),
            Some(e) => parse(&e.value).ok_or_else(|| {
                ConfigError::new(Some(key), format!("expected {kind}, got `{}`", e.value)).at(Some(e.line))
            }),
        }
    }

    fn float(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        self.get(
            key,
            default,
            |s| s.parse::<f64>().ok().filter(|x| x.is_finite()),
            "a finite number",
        )
    }

    fn count(&self, key: &str, default: usize) -> Result<usize, ConfigError> {
        self.get(key, default, |s| s.parse().ok(), "a nonnegative integer")
    }

    fn flag(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        let parse = |s: &str| match s {
            "true" => Some(true),
            "false" => Some(false),
            _ => None,
        };
        self.get(key, default, parse, "`true` or `false`")
    }

    fn required(&self, key: &str) -> Result<&Entry, ConfigError> {
        self.entries
            .get(key)
            .ok_or_else(|| ConfigError::new(Some(key), "required key is missing"))
    }
}

/// Parses configuration text. Relative tabulated-data paths are resolved
/// against `base`.
pub fn parse_str(text: &str, base: Option<&Path>) -> Result<RunConfig, ConfigError> {
    let entries = parse_entries(text)?;
    let r = Reader { entries: &entries };
    let preset_entry = r.required("initial.preset")?;
    let preset = preset_entry.value.parse::<Preset>().map_err(|_| {
        let mut e = ConfigError::new(
            Some("initial.preset"),
            format!("unknown preset `{}`", preset_entry.value),
        )
        .at(Some(preset_entry.line));
        e.suggestion = Preset::ALL
            .iter()
            .map(|p| (levenshtein(&preset_entry.value, p.name()), p.name()))
            .min()
            .filter(|(d, _)| *d <= 3)
            .map(|(_, n)| n.to_owned());
        e
    })?;
    r.required("run.t_end")?;
    let t_end = r.float("run.t_end", f64::NAN)?;

    let d = RunConfig::new(preset, t_end);
    let dp = d.params;
    let dc = d.control;
    let di = d.initial.clone();
    let da = d.audit;
    let params = Params {
        mu: r.float("params.mu", dp.mu)?,
        kappa1: r.float("params.kappa1", dp.kappa1)?,
        kappa2: r.float("params.kappa2", dp.kappa2)?,
        beta: r.float("params.beta", dp.beta)?,
        r: r.float("params.R", dp.r)?,
        gamma: r.float("params.gamma", dp.gamma)?,
        a: r.float("params.a", dp.a)?,
        b: r.float("params.b", dp.b)?,
    };
    let control = StepControl {
        dt_init: r.float("control.dt_init", dc.dt_init)?,
        dt_min: r.float("control.dt_min", dc.dt_min)?,
        dt_max: r.float("control.dt_max", dc.dt_max)?,
        cfl_advective: r.float("control.cfl_advective", dc.cfl_advective)?,
        picard_iters: r.count("control.picard_iters", dc.picard_iters)?,
        picard_tol: r.float("control.picard_tol", dc.picard_tol)?,
        positivity_shrink: r.float("control.positivity_shrink", dc.positivity_shrink)?,
    };
    let path = entries.get("initial.path").map(|e| {
        let p = PathBuf::from(&e.value);
        match base {
            Some(b) if p.is_relative() => b.join(p),
            _ => p,
        }
    });
    let initial = InitialSpec {
        preset,
        alpha_v: r.float("initial.alpha_v", di.alpha_v)?,
        alpha_u: r.float("initial.alpha_u", di.alpha_u)?,
        alpha_theta: r.float("initial.alpha_theta", di.alpha_theta)?,
        alpha2_v: r.float("initial.alpha2_v", di.alpha2_v)?,
        alpha2_u: r.float("initial.alpha2_u", di.alpha2_u)?,
        alpha2_theta: r.float("initial.alpha2_theta", di.alpha2_theta)?,
        noise_amplitude: r.float("initial.noise_amplitude", di.noise_amplitude)?,
        cutoff: r.count("initial.cutoff", di.cutoff)?,
        path,
    };
    let audit = AuditConfig {
        entropy: r.flag("audit.entropy", da.entropy)?,
        representation: r.flag("audit.representation", da.representation)?,
        pointwise: r.flag("audit.pointwise", da.pointwise)?,
        aux: r.flag("audit.aux", da.aux)?,
        exponents: r.flag("audit.exponents", da.exponents)?,
        conservation_tol: r.float("audit.conservation_tol", da.conservation_tol)?,
        neutrality_c: r.float("audit.neutrality_c", da.neutrality_c)?,
        entropy_tol: r.float("audit.entropy_tol", da.entropy_tol)?,
        repr_tol: r.float("audit.repr_tol", da.repr_tol)?,
    };
    let output_dir = entries
        .get("output.dir")
        .map_or(d.output_dir.clone(), |e| PathBuf::from(&e.value));
    let config = RunConfig {
        params,
        n_cells: r.count("run.n_cells", d.n_cells)?,
        t_end,
        cadence: r.count("run.cadence", d.cadence)?,
        checkpoint_interval: r.count("run.checkpoint_interval", d.checkpoint_interval)?,
        seed: r.get("run.seed", d.seed, |s| s.parse().ok(), "a nonnegative integer")?,
        control,
        initial,
        audit,
        output_dir,
    };
    let lines = entries.iter().map(|(k, e)| (k.clone(), e.line)).collect();
    validate(&config, &lines)?;
    Ok(config)
}

/// Reads and parses a configuration file.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        path: Some(path.to_owned()),
        line: None,
        key: None,
        message: format!("cannot read file: {e}"),
        suggestion: None,
    })?;
    parse_str(&text, path.parent()).map_err(|mut e| {
        e.path = Some(path.to_owned());
        e
    })
}

fn validate(c: &RunConfig, lines: &BTreeMap<String, usize>) -> Result<(), ConfigError> {
    let fail = |key: &str, message: String| Err(ConfigError::new(Some(key), message).at(lines.get(key).copied()));
    if !(c.t_end > 0.0 && c.t_end.is_finite()) {
        return fail("run.t_end", format!("t_end must be positive, got {}", c.t_end));
    }
    if c.cadence < 1 {
        return fail("run.cadence", "cadence must be at least 1".into());
    }
    if c.n_cells < MIN_CELLS {
        return fail(
            "run.n_cells",
            format!("need at least {MIN_CELLS} cells, got {}", c.n_cells),
        );
    }
    let core_key = |section: &str, e: &CoreError| match e {
        CoreError::Domain { what, .. } => format!("{section}.{what}"),
        _ => format!("{section}.dt_init"),
    };
    if let Err(e) = c.params.validate() {
        return fail(&core_key("params", &e), e.to_string());
    }
    if let Err(e) = c.control.validate() {
        return fail(&core_key("control", &e), e.to_string());
    }
    let a = &c.audit;
    for (key, value) in [
        ("audit.conservation_tol", a.conservation_tol),
        ("audit.neutrality_c", a.neutrality_c),
        ("audit.entropy_tol", a.entropy_tol),
        ("audit.repr_tol", a.repr_tol),
    ] {
        if !(value > 0.0) {
            return fail(key, format!("tolerance must be positive, got {value}"));
        }
    }
    if c.initial.preset == Preset::Tabulated && c.initial.path.is_none() {
        return fail("initial.path", "the tabulated preset needs a path".into());
    }
    if c.initial.preset == Preset::RandomSmooth && c.initial.cutoff == 0 {
        return fail("initial.cutoff", "cutoff must be at least 1".into());
    }
    let grid = radhydro_core::Grid::new(c.n_cells).map_err(|e| ConfigError::new(Some("run.n_cells"), e.to_string()))?;
    make_initial_data(&c.initial, c.seed, &grid, &c.params)
        .map(|_| ())
        .map_err(|e| {
            let line = e
                .key
                .as_deref()
                .and_then(|k| lines.get(k).copied())
                .or_else(|| lines.get("initial.preset").copied());
            e.at(line)
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_str("[initial]\npreset = equilibrium\n[run]\nt_end = 1\n", None).unwrap();
        assert_eq!(c, RunConfig::new(Preset::Equilibrium, 1.0));
    }

    #[test]
    fn canonical_text_round_trips() {
        let mut c = RunConfig::new(Preset::TwoMode, 0.3);
        c.params.mu = 0.1 + 0.2;
        c.control.dt_min = 1e-300;
        c.seed = u64::MAX;
        c.audit.representation = true;
        let back = parse_str(&c.to_ini(), None).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        let mut d = c.clone();
        d.params.mu = f64::from_bits(c.params.mu.to_bits() + 1);
        assert_ne!(d.hash(), c.hash());
    }

    #[test]
    fn misspelled_key_suggests_mu() {
        let e = parse_str(
            "[initial]\npreset = equilibrium\n[params]\nviscocity = 2\n[run]\nt_end = 1\n",
            None,
        )
        .unwrap_err();
        assert_eq!(e.line, Some(4));
        assert_eq!(e.key.as_deref(), Some("params.viscocity"));
        assert_eq!(e.suggestion.as_deref(), Some("mu"));
        assert!(e.to_string().contains("did you mean `mu`"), "{e}");
    }

    #[test]
    fn suggestions_cross_sections_with_full_path() {
        assert_eq!(suggest_key("run", "dt_intt").as_deref(), Some("control.dt_init"));
        assert_eq!(suggest_key("params", "gama").as_deref(), Some("gamma"));
        assert_eq!(suggest_key("params", "zzzzzzzz"), None);
    }

    #[test]
    fn nonpositive_temperature_names_amplitude() {
        let text = "[initial]\npreset = single_mode\nalpha_theta = 1.5\n[run]\nt_end = 1\n";
        let e = parse_str(text, None).unwrap_err();
        assert_eq!(e.key.as_deref(), Some("initial.alpha_theta"));
        assert_eq!(e.line, Some(3));
    }

    #[test]
    fn invariant_violations_are_located() {
        let base = "[initial]\npreset = equilibrium\n";
        let cases = [
            ("[run]\nt_end = -1\n", "run.t_end", 4),
            ("[run]\nt_end = 1\ncadence = 0\n", "run.cadence", 5),
            ("[run]\nt_end = 1\n[params]\ngamma = 0.5\n", "params.gamma", 6),
            (
                "[run]\nt_end = 1\n[control]\ncfl_advective = 2\n",
                "control.cfl_advective",
                6,
            ),
            ("[run]\nt_end = 1\n[audit]\nentropy = yes\n", "audit.entropy", 6),
            ("[run]\nt_end = 1\nn_cells = 4\n", "run.n_cells", 5),
        ];
        for (tail, key, line) in cases {
            let e = parse_str(&format!("{base}{tail}"), None).unwrap_err();
            assert_eq!(e.key.as_deref(), Some(key), "{e}");
            assert_eq!(e.line, Some(line), "{e}");
        }
    }

    #[test]
    fn syntax_errors() {
        for (text, line) in [
            ("[initial\npreset = equilibrium\n", 1),
            ("[initial]\npreset equilibrium\n", 2),
            ("t_end = 1\n", 1),
            ("[initial]\npreset = equilibrium\npreset = single_mode\n", 3),
            ("[inital]\n", 1),
        ] {
            assert_eq!(parse_str(text, None).unwrap_err().line, Some(line), "{text}");
        }
        let e = parse_str("[run]\nt_end = 1\n", None).unwrap_err();
        assert_eq!(e.key.as_deref(), Some("initial.preset"));
        let e = parse_str("[initial]\npreset = singlemode\n[run]\nt_end = 1\n", None).unwrap_err();
        assert_eq!(e.suggestion.as_deref(), Some("single_mode"));
    }

    #[test]
    fn missing_file() {
        let e = parse_config(Path::new("/nonexistent/run.ini")).unwrap_err();
        assert!(e.message.contains("cannot read"));
    }
}
