//! Uniform periodic mesh on the torus `[−½, ½)`, the difference and
//! quadrature operators used throughout, and a direct discrete Fourier
//! transform.
//!
//! Cells are indexed `0..n`; face `i` sits between cells `i−1` and `i`
//! (modulo `n`), at `x = −½ + i·h`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

pub const MIN_CELLS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n_cells: usize,
    h: f64,
    centers: Vec<f64>,
}

impl Grid {
    pub fn new(n_cells: usize) -> Result<Self> {
        if n_cells < MIN_CELLS {
            return Err(Error::Invalid(format!(
                "grid needs at least {MIN_CELLS} cells, got {n_cells}"
            )));
        }
        let h = 1.0 / n_cells as f64;
        let centers = (0..n_cells).map(|j| -0.5 + (j as f64 + 0.5) * h).collect();
        Ok(Self { n_cells, h, centers })
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// Position of face `i`.
    pub fn face(&self, i: usize) -> f64 {
        -0.5 + i as f64 * self.h
    }

    pub fn faces(&self) -> Vec<f64> {
        (0..self.n_cells).map(|i| self.face(i)).collect()
    }

    #[inline]
    pub(crate) fn prev(&self, j: usize) -> usize {
        if j == 0 {
            self.n_cells - 1
        } else {
            j - 1
        }
    }

    #[inline]
    pub(crate) fn next(&self, j: usize) -> usize {
        if j + 1 == self.n_cells {
            0
        } else {
            j + 1
        }
    }

    /// Samples `f` at the cell centers.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.centers.iter().map(|&x| f(x)).collect()
    }

    /// Central difference `(f_{j+1} − f_{j−1}) / 2h`.
    pub fn diff_centered(&self, field: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n_cells, field.len())?;
        let inv = 0.5 / self.h;
        Ok((0..self.n_cells)
            .map(|j| (field[self.next(j)] - field[self.prev(j)]) * inv)
            .collect())
    }

    /// Conservative divergence `(F_{j+½} − F_{j−½}) / h` of a face flux.
    pub fn div_flux(&self, flux_at_faces: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n_cells, flux_at_faces.len())?;
        let inv = 1.0 / self.h;
        Ok((0..self.n_cells)
            .map(|j| (flux_at_faces[self.next(j)] - flux_at_faces[j]) * inv)
            .collect())
    }

    /// One-sided gradient at the faces, `(f_i − f_{i−1}) / h`.
    pub fn diff_face(&self, field: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n_cells, field.len())?;
        let inv = 1.0 / self.h;
        Ok((0..self.n_cells)
            .map(|i| (field[i] - field[self.prev(i)]) * inv)
            .collect())
    }

    /// Arithmetic mean of the two cells adjacent to each face.
    pub fn face_average(&self, field: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n_cells, field.len())?;
        Ok((0..self.n_cells)
            .map(|i| 0.5 * (field[i] + field[self.prev(i)]))
            .collect())
    }

    /// Second difference `(f_{j+1} − 2f_j + f_{j−1}) / h²`.
    pub fn diff_second(&self, field: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n_cells, field.len())?;
        let inv = 1.0 / (self.h * self.h);
        Ok((0..self.n_cells)
            .map(|j| (field[self.next(j)] - 2.0 * field[j] + field[self.prev(j)]) * inv)
            .collect())
    }

    /// Midpoint rule `h Σ f_j`.
    pub fn quadrature(&self, field: &[f64]) -> Result<f64> {
        check_len(self.n_cells, field.len())?;
        Ok(self.h * field.iter().sum::<f64>())
    }

    /// Mode numbers `−n/2 ..= n/2 − 1` in the order used by [`Grid::dft`].
    pub fn modes(&self) -> impl Iterator<Item = i64> {
        let n = self.n_cells as i64;
        (-(n / 2))..(n - n / 2)
    }

    /// `e^{−2πi m x_j}` built from exact roots of unity to keep large-`m`
    /// phases accurate.
    fn phase(&self, roots: &[Complex64], m: i64, j: usize) -> Complex64 {
        let n = self.n_cells as i64;
        // x_j = −½ + (j + ½)/n, so m·x_j·n = m(2j + 1 − n)/2.
        let k = (m * (2 * j as i64 + 1 - n)).rem_euclid(2 * n) as usize;
        roots[k]
    }

    fn half_roots(&self) -> Vec<Complex64> {
        let n2 = 2 * self.n_cells;
        (0..n2)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n2 as f64))
            .collect()
    }

    /// Fourier coefficients `f̂(m) = h Σ_j f_j e^{−2πi m x_j}` for
    /// `m ∈ [−n/2, n/2)`, ordered by [`Grid::modes`].
    pub fn dft(&self, field: &[f64]) -> Result<Vec<Complex64>> {
        check_len(self.n_cells, field.len())?;
        let roots = self.half_roots();
        Ok(self
            .modes()
            .map(|m| {
                let s: Complex64 = field
                    .iter()
                    .enumerate()
                    .map(|(j, &f)| self.phase(&roots, m, j) * f)
                    .sum();
                s * self.h
            })
            .collect())
    }

    /// Inverse of [`Grid::dft`]: `f_j = Σ_m f̂(m) e^{2πi m x_j}`, real part.
    pub fn idft(&self, coefficients: &[Complex64]) -> Result<Vec<f64>> {
        Ok(self.idft_complex(coefficients)?.into_iter().map(|z| z.re).collect())
    }

    pub fn idft_complex(&self, coefficients: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.n_cells, coefficients.len())?;
        let roots = self.half_roots();
        Ok((0..self.n_cells)
            .map(|j| {
                self.modes()
                    .zip(coefficients)
                    .map(|(m, c)| c * self.phase(&roots, m, j).conj())
                    .sum()
            })
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn rejects_tiny_grid() {
        assert!(Grid::new(7).is_err());
        let g = Grid::new(8).unwrap();
        assert_eq!(g.quadrature(&[1.0; 8]).unwrap(), 1.0);
        assert!(g.centers()[0] > -0.5 && g.centers()[7] < 0.5);
    }

    #[test]
    fn shape_errors() {
        let g = Grid::new(16).unwrap();
        let short = vec![0.0; 15];
        assert!(matches!(
            g.diff_centered(&short),
            Err(Error::Shape { expected: 16, got: 15 })
        ));
        assert!(g.div_flux(&short).is_err());
        assert!(g.quadrature(&short).is_err());
        assert!(g.dft(&short).is_err());
    }

    #[test]
    fn centered_difference_of_constant_is_zero() {
        let g = Grid::new(32).unwrap();
        assert!(g.diff_centered(&[3.5; 32]).unwrap().iter().all(|&d| d == 0.0));
        assert!(g.div_flux(&[-1.25; 32]).unwrap().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn centered_difference_of_sine() {
        let g = Grid::new(64).unwrap();
        let f = g.sample(|x| (2.0 * PI * x).sin());
        let exact = g.sample(|x| 2.0 * PI * (2.0 * PI * x).cos());
        let err = max_abs_diff(&g.diff_centered(&f).unwrap(), &exact);
        // Truncation term (2π)³h²/6 · max|cos|.
        let bound = (2.0 * PI).powi(3) * g.h() * g.h() / 6.0;
        assert!(err <= 1.01 * bound, "{err} > {bound}");
    }

    #[test]
    fn sawtooth_wrap_is_conservative() {
        let g = Grid::new(33).unwrap();
        let d = g.diff_centered(g.centers()).unwrap();
        assert!(g.quadrature(&d).unwrap().abs() < 1e-14);
        // The wrap cells see the jump, the interior sees slope 1.
        assert!((d[10] - 1.0).abs() < 1e-12);
        assert!(d[0] < 0.0 && d[32] < 0.0);
    }

    #[test]
    fn div_flux_of_sine() {
        let g = Grid::new(128).unwrap();
        let f: Vec<f64> = g.faces().iter().map(|&x| (2.0 * PI * x).sin()).collect();
        let exact = g.sample(|x| 2.0 * PI * (2.0 * PI * x).cos());
        let err = max_abs_diff(&g.div_flux(&f).unwrap(), &exact);
        let bound = (2.0 * PI).powi(3) * g.h() * g.h() / 24.0;
        assert!(err <= 1.01 * bound, "{err} > {bound}");
    }

    #[test]
    fn second_order_under_refinement() {
        let mut errs = Vec::new();
        for n in [64, 128, 256] {
            let g = Grid::new(n).unwrap();
            let f = g.sample(|x| (2.0 * PI * x).sin() + 0.3 * (4.0 * PI * x).cos());
            let fc = g.diff_centered(&f).unwrap();
            let flux = g.face_average(&f).unwrap();
            let fd = g.div_flux(&flux).unwrap();
            errs.push(max_abs_diff(&fc, &fd));
        }
        // div_flux of face averages reproduces the centered difference exactly.
        assert!(errs.iter().all(|&e| e < 1e-12));

        let mut e_c = Vec::new();
        let mut e_f = Vec::new();
        for n in [64, 128, 256] {
            let g = Grid::new(n).unwrap();
            let f = g.sample(|x| (2.0 * PI * x).sin() + 0.3 * (4.0 * PI * x).cos());
            let exact = g.sample(|x| 2.0 * PI * (2.0 * PI * x).cos() - 1.2 * PI * (4.0 * PI * x).sin());
            e_c.push(max_abs_diff(&g.diff_centered(&f).unwrap(), &exact));
            let face_vals: Vec<f64> = g
                .faces()
                .iter()
                .map(|&x| (2.0 * PI * x).sin() + 0.3 * (4.0 * PI * x).cos())
                .collect();
            e_f.push(max_abs_diff(&g.div_flux(&face_vals).unwrap(), &exact));
        }
        for e in [&e_c, &e_f] {
            for w in e.windows(2) {
                let order = (w[0] / w[1]).log2();
                assert!((order - 2.0).abs() <= 0.2, "order {order}");
            }
        }
    }

    #[test]
    fn quadrature_examples() {
        let g = Grid::new(32).unwrap();
        assert!(g.quadrature(&g.sample(|x| (2.0 * PI * x).sin())).unwrap().abs() < 1e-15);
        let g = Grid::new(64).unwrap();
        let q = g.quadrature(&g.sample(|x| 2.0 + (2.0 * PI * x).cos())).unwrap();
        assert!((q - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn dft_of_constant_and_cosine() {
        let g = Grid::new(16).unwrap();
        let c = g.dft(&[2.5; 16]).unwrap();
        for (m, z) in g.modes().zip(&c) {
            let expect = if m == 0 { 2.5 } else { 0.0 };
            assert!((z - Complex64::new(expect, 0.0)).norm() < 1e-14, "m={m}");
        }
        let c = g.dft(&g.sample(|x| (2.0 * PI * x).cos())).unwrap();
        for (m, z) in g.modes().zip(&c) {
            let expect = if m.abs() == 1 { 0.5 } else { 0.0 };
            assert!((z - Complex64::new(expect, 0.0)).norm() < 1e-14, "m={m}");
        }
    }

    #[test]
    fn dft_round_trip_large() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for n in [8, 9, 255, 1024, 4096] {
            let g = Grid::new(n).unwrap();
            let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let back = g.idft(&g.dft(&f).unwrap()).unwrap();
            let scale = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(max_abs_diff(&f, &back) <= 1e-12 * scale, "n={n}");
        }
    }

    proptest! {
        #[test]
        fn div_flux_telescopes(flux in prop::collection::vec(-1e3f64..1e3, 8..200)) {
            let g = Grid::new(flux.len()).unwrap();
            let s = g.quadrature(&g.div_flux(&flux).unwrap()).unwrap();
            let scale = flux.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            prop_assert!(s.abs() <= 1e-12 * scale);
        }

        #[test]
        fn dft_round_trip(f in prop::collection::vec(-10.0f64..10.0, 8..96)) {
            let g = Grid::new(f.len()).unwrap();
            let back = g.idft(&g.dft(&f).unwrap()).unwrap();
            let scale = f.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            prop_assert!(max_abs_diff(&f, &back) <= 1e-12 * scale);
        }
    }
}
