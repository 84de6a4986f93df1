use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absorption `a` and Stefan–Boltzmann constant `b` of the torus kernel
/// `K(z) = Σ_k −ab/(4π²k² + a) e^{2πikz}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub a: f64,
    pub b: f64,
}

impl KernelSpec {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Domain { what: "a", value: a });
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::Domain { what: "b", value: b });
        }
        Ok(Self { a, b })
    }
}

fn heaviside(z: f64) -> f64 {
    if z > 0.0 {
        1.0
    } else if z < 0.0 {
        0.0
    } else {
        0.5
    }
}

/// Closed form with a prescribed value of `H(z)` (1, 0 or ½); the one-sided
/// limits at the origin use `h = 1` and `h = 0`.
fn closed_form_with(z: f64, h: f64, spec: &KernelSpec) -> f64 {
    let s = spec.a.sqrt();
    // √a e^{√a} b / (2(e^{√a} − 1)), written without overflow for large a.
    let c = s * spec.b / (2.0 * -(-s).exp_m1());
    let half = 0.5 * s * spec.b;
    (-s * z).exp() * (half * (1.0 - h) - c) + (s * z).exp() * (half * h - c)
}

/// `K(z)` on the fundamental domain `[−½, ½]`, with `H(0) = ½`.
pub fn kernel_closed_form(z: f64, spec: &KernelSpec) -> Result<f64> {
    if !(-0.5..=0.5).contains(&z) {
        return Err(Error::Domain { what: "z", value: z });
    }
    Ok(closed_form_with(z, heaviside(z), spec))
}

/// Symmetric partial sum over `|k| ≤ m`, paired into cosines.
pub fn kernel_series(z: f64, spec: &KernelSpec, m: u32) -> f64 {
    let ab = spec.a * spec.b;
    // Sum smallest terms first.
    let tail: f64 = (1..=m)
        .rev()
        .map(|k| {
            let k = k as f64;
            (2.0 * PI * k * z).cos() / (4.0 * PI * PI * k * k + spec.a)
        })
        .sum();
    -spec.b - 2.0 * ab * tail
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelCertificate {
    pub spec: KernelSpec,
    pub samples: usize,
    pub max_value: f64,
    pub argmax: f64,
    pub pass: bool,
}

/// Samples the closed form on a uniform grid of `[−½, ½]` together with
/// `0⁻`, `0` and `0⁺`, and reports the largest value.
pub fn certify_kernel_nonpositive(spec: &KernelSpec, sample_count: usize) -> Result<KernelCertificate> {
    if sample_count < 1000 {
        return Err(Error::Invalid(format!(
            "kernel certification needs at least 1000 samples, got {sample_count}"
        )));
    }
    let step = 1.0 / (sample_count - 1) as f64;
    let uniform = (0..sample_count).map(|i| {
        let z = if i + 1 == sample_count {
            0.5
        } else {
            -0.5 + i as f64 * step
        };
        (z, closed_form_with(z, heaviside(z), spec))
    });
    let origin = [(0.0, 0.0), (0.0, 0.5), (0.0, 1.0)]
        .into_iter()
        .map(|(z, h)| (z, closed_form_with(z, h, spec)));
    let (argmax, max_value) =
        uniform.chain(origin).fold(
            (f64::NAN, f64::NEG_INFINITY),
            |acc, (z, k)| if k > acc.1 { (z, k) } else { acc },
        );
    Ok(KernelCertificate {
        spec: *spec,
        samples: sample_count,
        max_value,
        argmax,
        pass: max_value <= 1e-12,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelRow {
    pub z: f64,
    pub closed: f64,
    pub series: f64,
    pub difference: f64,
}

/// Closed form against the truncated series at `points` uniform abscissae.
pub fn tabulate_kernel(spec: &KernelSpec, points: usize, m: u32) -> Result<Vec<KernelRow>> {
    if points < 2 {
        return Err(Error::Invalid("kernel table needs at least two points".into()));
    }
    (0..points)
        .map(|i| {
            let z = if i + 1 == points {
                0.5
            } else {
                -0.5 + i as f64 / (points - 1) as f64
            };
            let closed = kernel_closed_form(z, spec)?;
            let series = kernel_series(z, spec, m);
            Ok(KernelRow {
                z,
                closed,
                series,
                difference: series - closed,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::E;

    fn unit() -> KernelSpec {
        KernelSpec::new(1.0, 1.0).unwrap()
    }

    #[test]
    fn spot_values() {
        let k = unit();
        let half = kernel_closed_form(0.5, &k).unwrap();
        assert_abs_diff_eq!(half, -0.95960, epsilon = 1e-4);
        // Both exponentials evaluated by hand: e^{∓½}(... ) with c = e/(2(e−1)).
        let c = E / (2.0 * (E - 1.0));
        assert_abs_diff_eq!(half, -(-0.5f64).exp() * c + 0.5f64.exp() * (0.5 - c), epsilon = 1e-15);
        assert_abs_diff_eq!(half, -0.959517, epsilon = 5e-7);
        assert_abs_diff_eq!(
            kernel_closed_form(0.0, &k).unwrap(),
            0.5 - E / (E - 1.0),
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(0.5 - E / (E - 1.0), -1.08198, epsilon = 5e-6);
        // One-sided limits meet at the origin.
        let left = closed_form_with(0.0, 0.0, &k);
        let right = closed_form_with(0.0, 1.0, &k);
        assert_abs_diff_eq!(left, right, epsilon = 1e-15);
        assert!(kernel_closed_form(0.51, &k).is_err());
        assert!(kernel_closed_form(f64::NAN, &k).is_err());
    }

    #[test]
    fn mean_and_derivative_jump() {
        for (a, b) in [(1.0, 1.0), (7.0, 0.3), (0.05, 4.0)] {
            let k = KernelSpec::new(a, b).unwrap();
            // Composite Simpson on [−½, ½].
            let n = 20_000;
            let h = 1.0 / n as f64;
            let f = |i: usize| kernel_closed_form(-0.5 + i as f64 * h, &k).unwrap();
            let mut s = f(0) + f(n);
            for i in 1..n {
                s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i);
            }
            assert_abs_diff_eq!(s * h / 3.0, -b, epsilon = 1e-8 * b.max(1.0));
            let eps = 1e-7;
            let d_right = (closed_form_with(eps, 1.0, &k) - closed_form_with(0.0, 1.0, &k)) / eps;
            let d_left = (closed_form_with(0.0, 0.0, &k) - closed_form_with(-eps, 0.0, &k)) / eps;
            assert_abs_diff_eq!(d_right - d_left, a * b, epsilon = 1e-5 * (a * b).max(1.0));
        }
    }

    #[test]
    fn series_oracle() {
        let k = unit();
        assert_eq!(kernel_series(0.3, &k, 0), -1.0);
        assert_eq!(kernel_series(0.25, &k, 50), kernel_series(-0.25, &k, 50));
        let m = 100_000;
        assert_abs_diff_eq!(kernel_series(0.5, &k, m), -0.95960, epsilon = 1e-4);
        let mut worst = 0.0f64;
        for i in 0..=200 {
            let z = -0.5 + i as f64 / 200.0;
            let d = (kernel_series(z, &k, m) - kernel_closed_form(z, &k).unwrap()).abs();
            worst = worst.max(d);
        }
        assert!(worst <= 1e-4, "{worst}");
    }

    #[test]
    fn series_error_decays_like_inverse_m() {
        let k = unit();
        let err = |m: u32| {
            let z0 = 2.0 / m as f64;
            (0..=100)
                .map(|i| -0.5 + i as f64 / 100.0)
                .filter(|z| z.abs() > z0)
                .map(|z| (kernel_series(z, &k, m) - kernel_closed_form(z, &k).unwrap()).abs())
                .fold(0.0, f64::max)
        };
        let ms = [100u32, 1000, 10_000];
        let scaled: Vec<f64> = ms.iter().map(|&m| err(m) * m as f64).collect();
        assert!(scaled.iter().all(|&c| c < 0.1), "{scaled:?}");
    }

    #[test]
    fn certification_on_log_grid() {
        let r = certify_kernel_nonpositive(&unit(), 10_000).unwrap();
        assert!(r.pass);
        assert_abs_diff_eq!(r.max_value, kernel_closed_form(0.5, &unit()).unwrap(), epsilon = 1e-15);
        assert_eq!(r.argmax.abs(), 0.5);
        for i in 0..5 {
            for j in 0..5 {
                let a = 10f64.powf(-2.0 + i as f64);
                let b = 10f64.powf(-2.0 + j as f64);
                let r = certify_kernel_nonpositive(&KernelSpec::new(a, b).unwrap(), 2000).unwrap();
                assert!(r.pass, "a={a} b={b} max={}", r.max_value);
            }
        }
        assert!(certify_kernel_nonpositive(&unit(), 999).is_err());
    }

    #[test]
    fn table_columns() {
        let rows = tabulate_kernel(&unit(), 11, 1000).unwrap();
        assert_eq!(rows.len(), 11);
        assert_eq!(rows[0].z, -0.5);
        assert_eq!(rows[10].z, 0.5);
        for r in rows {
            assert_eq!(r.difference, r.series - r.closed);
            assert!(r.difference.abs() < 1e-3);
        }
    }

    #[test]
    fn rejects_bad_spec() {
        assert!(KernelSpec::new(0.0, 1.0).is_err());
        assert!(KernelSpec::new(1.0, -1.0).is_err());
    }
}
