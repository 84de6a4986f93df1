//! Binary checkpoints. Little-endian throughout:
//!
//! ```text
//! magic[16] version:u32 n_cells:u64 t:f64 step:u64 rejections:u64 config_hash[32]
//! v[n] u[n] theta[n] q[n]
//! records:u64 { index:u64 f64 × RECORD_FLOATS } × records
//! snapshots:u64 { step:u64 t:f64 v[n] u[n] theta[n] q[n] } × snapshots
//! sha256[32] of everything above
//! ```
//!
//! The history lets a resumed run rebuild its audit state and reproduce
//! every output byte of the uninterrupted run.

use std::fmt;
use std::path::Path;

use radhydro_core::diagnostics::{StepRecord, Trajectory};
use radhydro_core::State;
use sha2::{Digest, Sha256};

pub const MAGIC: [u8; 16] = *b"RADHYDRO-CKPT\0\0\0";
pub const VERSION: u32 = 1;
const RECORD_FLOATS: usize = 29;
const DIGEST: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    /// Accepted steps since `t = 0`.
    pub step: u64,
    /// Positivity rejections so far.
    pub rejections: u64,
    pub config_hash: [u8; 32],
    pub state: State,
    pub history: Trajectory,
}

#[derive(Debug)]
pub enum CheckpointError {
    Io(std::io::Error),
    BadMagic,
    Version { found: u32 },
    ConfigMismatch { expected: String, found: String },
    Truncated { needed: usize, available: usize },
    Integrity,
    Malformed(String),
}

impl fmt::Display for CheckpointError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io(e) => write!(f, "checkpoint i/o: {e}"),
            Self::BadMagic => write!(f, "not a checkpoint file (bad magic header)"),
            Self::Version { found } => write!(f, "checkpoint format version {found}, this build reads {VERSION}"),
            Self::ConfigMismatch { expected, found } => write!(
                f,
                "checkpoint was written by a different configuration (hash {found}, current {expected}); refusing to resume"
            ),
            Self::Truncated { needed, available } => {
                write!(f, "checkpoint is truncated: needed {needed} bytes, {available} available")
            }
            Self::Integrity => write!(f, "checkpoint digest mismatch; file is corrupt"),
            Self::Malformed(m) => write!(f, "malformed checkpoint: {m}"),
        }
    }
}

impl std::error::Error for CheckpointError {}

impl From<std::io::Error> for CheckpointError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

fn record_floats(r: &StepRecord) -> [f64; RECORD_FLOATS] {
    let d = r.dissipation;
    let m = r.dissipation_min;
    [
        r.t,
        r.dt,
        r.mass,
        r.momentum,
        r.energy,
        r.radiation_weighted,
        r.entropy,
        d[0],
        d[1],
        d[2],
        d[3],
        r.cross,
        m[0],
        m[1],
        m[2],
        m[3],
        r.x_integrand,
        r.y_quadrature,
        r.z_quadrature,
        r.min_v,
        r.argmin_v,
        r.max_v,
        r.argmax_v,
        r.min_theta,
        r.argmin_theta,
        r.max_theta,
        r.argmax_theta,
        r.max_pointwise_margin,
        r.pointwise_tolerance,
    ]
}

fn record_from(index: usize, f: &[f64]) -> StepRecord {
    StepRecord {
        index,
        t: f[0],
        dt: f[1],
        mass: f[2],
        momentum: f[3],
        energy: f[4],
        radiation_weighted: f[5],
        entropy: f[6],
        dissipation: [f[7], f[8], f[9], f[10]],
        cross: f[11],
        dissipation_min: [f[12], f[13], f[14], f[15]],
        x_integrand: f[16],
        y_quadrature: f[17],
        z_quadrature: f[18],
        min_v: f[19],
        argmin_v: f[20],
        max_v: f[21],
        argmax_v: f[22],
        min_theta: f[23],
        argmin_theta: f[24],
        max_theta: f[25],
        argmax_theta: f[26],
        max_pointwise_margin: f[27],
        pointwise_tolerance: f[28],
    }
}

struct Writer(Vec<u8>);

impl Writer {
    fn u32(&mut self, x: u32) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn u64(&mut self, x: u64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn f64(&mut self, x: f64) {
        self.0.extend_from_slice(&x.to_le_bytes());
    }
    fn fields(&mut self, s: &State) {
        for field in [&s.v, &s.u, &s.theta, &s.q] {
            field.iter().for_each(|&x| self.f64(x));
        }
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, k: usize) -> Result<&[u8], CheckpointError> {
        let end = self
            .pos
            .checked_add(k)
            .filter(|&e| e <= self.bytes.len())
            .ok_or(CheckpointError::Truncated {
                needed: self.pos.saturating_add(k),
                available: self.bytes.len(),
            })?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u32(&mut self) -> Result<u32, CheckpointError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }
    fn u64(&mut self) -> Result<u64, CheckpointError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn f64(&mut self) -> Result<f64, CheckpointError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn floats(&mut self, n: usize) -> Result<Vec<f64>, CheckpointError> {
        (0..n).map(|_| self.f64()).collect()
    }
    fn count(&mut self, per_item: usize) -> Result<usize, CheckpointError> {
        let k = self.u64()?;
        let remaining = self.bytes.len() - self.pos;
        let needed = (k as usize).saturating_mul(per_item);
        if k > usize::MAX as u64 || needed > remaining {
            return Err(CheckpointError::Truncated {
                needed: self.pos.saturating_add(needed),
                available: self.bytes.len(),
            });
        }
        Ok(k as usize)
    }
    fn state(&mut self, t: f64, n: usize) -> Result<State, CheckpointError> {
        Ok(State {
            t,
            v: self.floats(n)?,
            u: self.floats(n)?,
            theta: self.floats(n)?,
            q: self.floats(n)?,
        })
    }
}

pub fn encode(c: &Checkpoint) -> Vec<u8> {
    let n = c.state.len();
    let mut w = Writer(Vec::with_capacity(128 + 32 * n));
    w.0.extend_from_slice(&MAGIC);
    w.u32(VERSION);
    w.u64(n as u64);
    w.f64(c.state.t);
    w.u64(c.step);
    w.u64(c.rejections);
    w.0.extend_from_slice(&c.config_hash);
    w.fields(&c.state);
    w.u64(c.history.steps.len() as u64);
    for r in &c.history.steps {
        w.u64(r.index as u64);
        record_floats(r).iter().for_each(|&x| w.f64(x));
    }
    w.u64(c.history.snapshots.len() as u64);
    for (s, &k) in c.history.snapshots.iter().zip(&c.history.snapshot_steps) {
        w.u64(k as u64);
        w.f64(s.t);
        w.fields(s);
    }
    let digest = Sha256::digest(&w.0);
    w.0.extend_from_slice(&digest);
    w.0
}

/// Decodes and checks a checkpoint; with `expected_hash`, also refuses one
/// written under another configuration.
pub fn decode(bytes: &[u8], expected_hash: Option<&[u8; 32]>) -> Result<Checkpoint, CheckpointError> {
    if bytes.len() < MAGIC.len() || bytes[..MAGIC.len()] != MAGIC {
        return if bytes.len() < MAGIC.len() && MAGIC.starts_with(bytes) {
            Err(CheckpointError::Truncated {
                needed: MAGIC.len(),
                available: bytes.len(),
            })
        } else {
            Err(CheckpointError::BadMagic)
        };
    }
    let mut r = Reader {
        bytes,
        pos: MAGIC.len(),
    };
    let version = r.u32()?;
    if version != VERSION {
        return Err(CheckpointError::Version { found: version });
    }
    let n = r.u64()? as usize;
    let t = r.f64()?;
    let step = r.u64()?;
    let rejections = r.u64()?;
    let config_hash: [u8; 32] = r.take(32)?.try_into().expect("32 bytes");
    let state = r.state(t, n)?;
    let records = r.count(8 * (1 + RECORD_FLOATS))?;
    let mut steps = Vec::with_capacity(records);
    for _ in 0..records {
        let index = r.u64()? as usize;
        steps.push(record_from(index, &r.floats(RECORD_FLOATS)?));
    }
    let snaps = r.count(8 * (2 + 4 * n))?;
    let mut snapshots = Vec::with_capacity(snaps);
    let mut snapshot_steps = Vec::with_capacity(snaps);
    for _ in 0..snaps {
        snapshot_steps.push(r.u64()? as usize);
        let t = r.f64()?;
        snapshots.push(r.state(t, n)?);
    }
    let body = r.pos;
    let digest = r.take(DIGEST)?;
    if digest != Sha256::digest(&bytes[..body]).as_slice() {
        return Err(CheckpointError::Integrity);
    }
    if r.pos != bytes.len() {
        return Err(CheckpointError::Malformed(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    if let Some(expected) = expected_hash {
        if *expected != config_hash {
            return Err(CheckpointError::ConfigMismatch {
                expected: hex::encode(expected),
                found: hex::encode(config_hash),
            });
        }
    }
    if steps.len() as u64 != step + 1 || steps.last().map(|s| s.t) != Some(t) {
        return Err(CheckpointError::Malformed(
            "history does not end at the stored state".into(),
        ));
    }
    Ok(Checkpoint {
        step,
        rejections,
        config_hash,
        state,
        history: Trajectory {
            snapshots,
            snapshot_steps,
            steps,
        },
    })
}

/// Writes through a temporary file and renames, so an interrupted save
/// never leaves a partial checkpoint under `path`.
pub fn checkpoint_save(c: &Checkpoint, path: &Path) -> Result<(), CheckpointError> {
    let tmp = path.with_extension("partial");
    std::fs::write(&tmp, encode(c))?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn checkpoint_load(path: &Path, expected_hash: Option<&[u8; 32]>) -> Result<Checkpoint, CheckpointError> {
    decode(&std::fs::read(path)?, expected_hash)
}

#[cfg(test)]
mod tests {
    use super::*;
    use radhydro_core::diagnostics::Recorder;
    use radhydro_core::{Grid, Params};

    fn sample() -> Checkpoint {
        let g = Grid::new(8).unwrap();
        let p = Params::default();
        let mut s = State::uniform(8, 1.0, 0.0, 1.0);
        s.u = g.sample(|x| 0.1 * x - 1e-300);
        let mut rec = Recorder::new(&s, 1.0, 2, &g, &p).unwrap();
        let mut prev = s.clone();
        for k in 1..=3 {
            let mut next = prev.clone();
            next.t = 0.25 * k as f64;
            next.theta[k] = 1.0 + 0.01 * k as f64;
            rec.observe(k, 0.25, &prev, &next).unwrap();
            prev = next;
        }
        Checkpoint {
            step: 3,
            rejections: 5,
            config_hash: [7; 32],
            state: prev,
            history: rec.finish(),
        }
    }

    #[test]
    fn round_trip_is_bitwise() {
        let c = sample();
        let back = decode(&encode(&c), Some(&[7; 32])).unwrap();
        assert_eq!(back, c);
        let bits = |s: &State| [&s.v, &s.u, &s.theta, &s.q].map(|f| f.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
        assert_eq!(bits(&back.state), bits(&c.state));
    }

    #[test]
    fn nan_payloads_survive() {
        let mut c = sample();
        c.history.steps[1].cross = f64::from_bits(0x7ff8_0000_dead_beef);
        c.state.u[0] = -0.0;
        let bytes = encode(&c);
        assert_eq!(encode(&decode(&bytes, None).unwrap()), bytes);
    }

    #[test]
    fn header_layout() {
        let bytes = encode(&sample());
        assert_eq!(&bytes[..16], &MAGIC);
        assert_eq!(u32::from_le_bytes(bytes[16..20].try_into().unwrap()), VERSION);
        assert_eq!(u64::from_le_bytes(bytes[20..28].try_into().unwrap()), 8);
        assert_eq!(f64::from_le_bytes(bytes[28..36].try_into().unwrap()), 0.75);
    }

    #[test]
    fn mismatched_config_is_refused() {
        let e = decode(&encode(&sample()), Some(&[8; 32])).unwrap_err();
        assert!(matches!(e, CheckpointError::ConfigMismatch { .. }), "{e}");
    }

    #[test]
    fn every_truncation_is_detected() {
        let bytes = encode(&sample());
        for len in 0..bytes.len() {
            let e = decode(&bytes[..len], None).unwrap_err();
            assert!(
                matches!(e, CheckpointError::Truncated { .. } | CheckpointError::Integrity),
                "length {len}: {e}"
            );
        }
    }

    #[test]
    fn corruption_and_version() {
        let mut bytes = encode(&sample());
        let mid = bytes.len() / 2;
        bytes[mid] ^= 1;
        assert!(matches!(decode(&bytes, None), Err(CheckpointError::Integrity)));
        let mut bytes = encode(&sample());
        bytes[16] = 9;
        assert!(matches!(
            decode(&bytes, None),
            Err(CheckpointError::Version { found: 9 })
        ));
        assert!(matches!(
            decode(b"not a checkpoint file", None),
            Err(CheckpointError::BadMagic)
        ));
    }

    #[test]
    fn save_and_load() {
        let dir = std::env::temp_dir().join(format!("radhydro-ckpt-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("a.ckpt");
        let c = sample();
        checkpoint_save(&c, &path).unwrap();
        assert_eq!(checkpoint_load(&path, None).unwrap(), c);
        assert!(!path.with_extension("partial").exists());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
