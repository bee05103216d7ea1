//! Dense complex matrices.
//!
//! Only what the estimators need: products, conjugate transpose,
//! Gauss-Jordan inversion and the squared Frobenius norm. Problems here are
//! at most a few tens of rows, so everything is a plain row-major `Vec`.

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

pub use num_complex::Complex64 as Complex;

/// Pivots with magnitude below this are treated as exact zeros.
pub const SINGULARITY_THRESHOLD: f64 = 1e-12;

/// Row-major dense complex matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major data, rejecting wrong lengths and
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<Complex>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    /// Real matrix from row slices.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diag(values: &[Complex]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[Complex] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex> {
        self.data
    }

    pub fn matmul(&self, rhs: &CMatrix) -> Result<CMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = CMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<CMatrix> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "cannot invert non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = CMatrix::identity(n);

        for col in 0..n {
            let (pivot_row, pivot_mag) = (col..n)
                .map(|r| (r, a[(r, col)].norm()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_mag < SINGULARITY_THRESHOLD {
                return Err(Error::Singular {
                    pivot: pivot_mag,
                    threshold: SINGULARITY_THRESHOLD,
                });
            }
            if pivot_row != col {
                a.swap_rows(pivot_row, col);
                inv.swap_rows(pivot_row, col);
            }

            let p = a[(col, col)].inv();
            for j in 0..n {
                a[(col, j)] *= p;
                inv[(col, j)] *= p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[(r, col)];
                if factor == Complex::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                    a[(r, j)] -= factor * ac;
                    inv[(r, j)] -= factor * ic;
                }
            }
        }
        Ok(inv)
    }

    /// Sum of squared magnitudes of all entries.
    pub fn frob_norm_sq(&self) -> f64 {
        self.data.iter().map(Complex::norm_sqr).sum()
    }

    pub fn scale(&self, factor: Complex) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> CMatrix {
        self.scale(Complex::new(factor, 0.0))
    }

    pub fn add(&self, rhs: &CMatrix) -> Result<CMatrix> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &CMatrix) -> Result<CMatrix> {
        self.zip_with(rhs, |a, b| a - b)
    }

    fn zip_with(&self, rhs: &CMatrix, f: impl Fn(Complex, Complex) -> Complex) -> Result<CMatrix> {
        if self.shape() != rhs.shape() {
            return Err(Error::Shape(format!(
                "elementwise operation on {}x{} and {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex;

    fn index(&self, (r, c): (usize, usize)) -> &Complex {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        &mut self.data[r * self.cols + c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
        let data = (0..rows * cols)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        CMatrix::from_vec(rows, cols, data).unwrap()
    }

    /// Independent product: explicit real/imaginary arithmetic per entry.
    fn naive_product(a: &CMatrix, b: &CMatrix) -> Vec<Vec<(f64, f64)>> {
        let mut out = vec![vec![(0.0, 0.0); b.cols()]; a.rows()];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                for k in 0..a.cols() {
                    let (x, y) = (a[(i, k)], b[(k, j)]);
                    cell.0 += x.re * y.re - x.im * y.im;
                    cell.1 += x.re * y.im + x.im * y.re;
                }
            }
        }
        out
    }

    fn rel_err(a: &CMatrix, b: &CMatrix) -> f64 {
        a.sub(b).unwrap().frob_norm_sq().sqrt() / b.frob_norm_sq().sqrt().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn identity_times_matrix() {
        let m = CMatrix::from_rows(&[vec![c(1.0, 2.0), c(-3.0, 0.5)], vec![c(0.0, -1.0), c(4.0, 4.0)]])
            .unwrap();
        assert_eq!(CMatrix::identity(2).matmul(&m).unwrap(), m);
    }

    #[test]
    fn scalar_conjugate_product() {
        let a = CMatrix::from_rows(&[vec![c(1.0, 1.0)]]).unwrap();
        let b = CMatrix::from_rows(&[vec![c(1.0, -1.0)]]).unwrap();
        assert_eq!(a.matmul(&b).unwrap()[(0, 0)], c(2.0, 0.0));
    }

    #[test]
    fn matmul_matches_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_matrix(&mut rng, 3, 4);
        let b = random_matrix(&mut rng, 4, 2);
        let got = a.matmul(&b).unwrap();
        let want = naive_product(&a, &b);
        assert_eq!(got.shape(), (3, 2));
        for i in 0..3 {
            for j in 0..2 {
                assert!((got[(i, j)].re - want[i][j].0).abs() < 1e-14);
                assert!((got[(i, j)].im - want[i][j].1).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn matmul_shape_error() {
        let a = CMatrix::zeros(2, 3);
        assert!(matches!(a.matmul(&CMatrix::zeros(2, 3)), Err(Error::Shape(_))));
    }

    #[test]
    fn hermitian_examples() {
        let m = CMatrix::from_rows(&[vec![c(0.0, 1.0)]]).unwrap();
        assert_eq!(m.hermitian()[(0, 0)], c(0.0, -1.0));

        let r = CMatrix::from_real_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]]).unwrap();
        let t = CMatrix::from_real_rows(&[&[1.0, 4.0], &[2.0, 5.0], &[3.0, 6.0]]).unwrap();
        assert_eq!(r.hermitian(), t);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(CMatrix::identity(4).inverse().unwrap(), CMatrix::identity(4));

        let d = CMatrix::diag(&[c(2.0, 0.0), c(4.0, 0.0)]);
        assert_eq!(d.inverse().unwrap(), CMatrix::diag(&[c(0.5, 0.0), c(0.25, 0.0)]));

        assert!(matches!(CMatrix::zeros(3, 3).inverse(), Err(Error::Singular { .. })));
        assert!(matches!(CMatrix::zeros(2, 3).inverse(), Err(Error::Shape(_))));
    }

    #[test]
    fn inverse_round_trip_8x8() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            // Diagonal loading keeps the condition number modest.
            let a = random_matrix(&mut rng, 8, 8)
                .add(&CMatrix::identity(8).scale_real(4.0))
                .unwrap();
            let resid = a.matmul(&a.inverse().unwrap()).unwrap().sub(&CMatrix::identity(8)).unwrap();
            assert!(resid.frob_norm_sq().sqrt() < 1e-10);
        }
    }

    #[test]
    fn frob_norm_examples() {
        assert_eq!(CMatrix::zeros(3, 2).frob_norm_sq(), 0.0);
        assert_eq!(CMatrix::from_rows(&[vec![c(3.0, 4.0)]]).unwrap().frob_norm_sq(), 25.0);
        assert_eq!(CMatrix::identity(5).frob_norm_sq(), 5.0);
    }

    #[test]
    fn constructors_reject_bad_input() {
        assert!(matches!(
            CMatrix::from_vec(2, 2, vec![c(0.0, 0.0); 3]),
            Err(Error::Shape(_))
        ));
        assert_eq!(
            CMatrix::from_vec(1, 2, vec![c(0.0, 0.0), c(f64::NAN, 0.0)]),
            Err(Error::NonFinite { row: 0, col: 1 })
        );
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn product_properties(seed in any::<u64>(), n in 1usize..6, m in 1usize..6, p in 1usize..6, q in 1usize..6) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, n, m);
            let b = random_matrix(&mut rng, m, p);
            let c = random_matrix(&mut rng, p, q);

            let left = a.matmul(&b).unwrap().matmul(&c).unwrap();
            let right = a.matmul(&b.matmul(&c).unwrap()).unwrap();
            prop_assert!(rel_err(&left, &right) < 1e-9);

            prop_assert_eq!(a.hermitian().hermitian(), a.clone());
            let ab_h = a.matmul(&b).unwrap().hermitian();
            let bh_ah = b.hermitian().matmul(&a.hermitian()).unwrap();
            prop_assert!(rel_err(&ab_h, &bh_ah) < 1e-12);

            prop_assert!((a.frob_norm_sq() - a.hermitian().frob_norm_sq()).abs() <= 1e-14 * a.frob_norm_sq());
        }

        #[test]
        fn inverse_round_trip(seed in any::<u64>(), n in 1usize..9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, n, n).add(&CMatrix::identity(n).scale_real(3.0)).unwrap();
            let resid = a.matmul(&a.inverse().unwrap()).unwrap().sub(&CMatrix::identity(n)).unwrap();
            prop_assert!(resid.frob_norm_sq().sqrt() < 1e-10);
        }
    }
}
