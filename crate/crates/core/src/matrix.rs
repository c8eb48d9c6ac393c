//! Dense complex matrices in row-major order.
//!
//! This is the universal carrier for channel and correlation matrices. The
//! multiply kernel is backed by `matrixmultiply::zgemm`; everything else is
//! straightforward elementwise code.

use matrixmultiply::{zgemm, CGemmOption};
use num_complex::Complex64;

/// Dense complex-valued matrix, entries stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    /// All-zero matrix. `rows` and `cols` must be at least 1.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be >= 1");
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    /// Identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from a function of the (row, col) index.
    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(
        rows: usize,
        cols: usize,
        mut f: F,
    ) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Real diagonal matrix.
    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    /// Builds from row-major complex entries; `entries.len()` must equal
    /// `rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be >= 1");
        assert_eq!(entries.len(), rows * cols, "entry count mismatch");
        Self {
            rows,
            cols,
            data: entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entry slice.
    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Matrix product `self * rhs` via zgemm.
    pub fn mul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "dimension mismatch: {}x{} * {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        let (m, k, n) = (self.rows, self.cols, rhs.cols);
        // Complex64 is repr(C) { re: f64, im: f64 }, layout-compatible with [f64; 2].
        unsafe {
            zgemm(
                CGemmOption::Standard,
                CGemmOption::Standard,
                m,
                k,
                n,
                [1.0, 0.0],
                self.data.as_ptr() as *const [f64; 2],
                k as isize,
                1,
                rhs.data.as_ptr() as *const [f64; 2],
                n as isize,
                1,
                [0.0, 0.0],
                out.data.as_mut_ptr() as *mut [f64; 2],
                n as isize,
                1,
            );
        }
        out
    }

    /// Conjugate transpose.
    pub fn conj_transpose(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// `self * rhs^H` without materializing the transpose separately from the
    /// result path; used for Gram-type products.
    pub fn mul_conj_transpose(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.mul(&rhs.conj_transpose())
    }

    /// Elementwise sum.
    pub fn add(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (o, r) in out.data.iter_mut().zip(rhs.data.iter()) {
            *o += r;
        }
        out
    }

    /// In-place `self += alpha * rhs` with a real scale.
    pub fn add_scaled_assign(&mut self, alpha: f64, rhs: &ComplexMatrix) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        for (o, r) in self.data.iter_mut().zip(rhs.data.iter()) {
            *o += alpha * r;
        }
    }

    /// Returns `self` scaled by a real factor.
    pub fn scaled(&self, alpha: f64) -> ComplexMatrix {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v *= alpha;
        }
        out
    }

    /// In-place `self += alpha * I`.
    pub fn add_scaled_identity(&mut self, alpha: f64) {
        assert!(self.is_square());
        for i in 0..self.rows {
            self[(i, i)] += alpha;
        }
    }

    /// Complex trace.
    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Real part of the trace.
    pub fn trace_re(&self) -> f64 {
        self.trace().re
    }

    /// Hermitian part `(A + A^H) / 2`; removes rounding asymmetry after
    /// products of the form `H R H^H`.
    pub fn hermitized(&self) -> ComplexMatrix {
        assert!(self.is_square());
        let mut out = ComplexMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = 0.5 * (self[(i, j)] + self[(j, i)].conj());
            }
        }
        out
    }

    /// Maximum elementwise deviation from Hermitian symmetry,
    /// `max_{i,j} |A_ij - conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Column `j` as a vector.
    pub fn col(&self, j: usize) -> Vec<Complex64> {
        assert!(j < self.cols);
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Scales column `j` by `factors[j]` (right-multiplication by a real
    /// diagonal matrix).
    pub fn scale_cols(&self, factors: &[f64]) -> ComplexMatrix {
        assert_eq!(factors.len(), self.cols);
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] *= factors[j];
            }
        }
        out
    }

    /// `trace(self * rhs)` without forming the product; both square of equal
    /// size.
    pub fn trace_of_product(&self, rhs: &ComplexMatrix) -> Complex64 {
        assert!(self.is_square() && rhs.is_square());
        assert_eq!(self.rows, rhs.rows);
        let n = self.rows;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self[(i, j)] * rhs[(j, i)];
            }
        }
        acc
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}
