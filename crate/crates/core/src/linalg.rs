//! Hermitian factorizations and norms, backed by nalgebra.
//!
//! Resolvents are evaluated through Cholesky solves rather than explicit
//! inverses wherever a right-hand side is available; `hermitian_inverse` is
//! reserved for the trace-of-inverse forms of the fixed-point equations.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;

// Factorization split: log-dets and linear solves go through the hand-rolled
// HPD Cholesky below (whose pivot test is the definiteness contract);
// eigenvalue and singular-value work is delegated to nalgebra.

pub(crate) fn to_na(m: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

/// Lower-triangular Cholesky factor of a Hermitian positive definite
/// matrix. Fails unless every pivot is strictly positive, which is the
/// positive-definiteness test (complex square roots would otherwise happily
/// factor indefinite matrices).
pub fn cholesky_lower(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    assert!(a.is_square(), "Cholesky needs a square matrix");
    let n = a.rows();
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let pivot = d.sqrt();
        l[(j, j)] = Complex64::new(pivot, 0.0);
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / pivot;
        }
    }
    Ok(l)
}

/// Natural-log determinant of a Hermitian positive definite matrix, via
/// Cholesky factorization.
pub fn logdet_hpd(a: &ComplexMatrix) -> Result<f64> {
    let l = cholesky_lower(a)?;
    Ok(2.0 * (0..a.rows()).map(|j| l[(j, j)].re.ln()).sum::<f64>())
}

/// Solves `A X = B` for Hermitian positive definite `A` by forward and back
/// substitution through the Cholesky factor.
pub fn hermitian_solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    assert!(a.is_square());
    assert_eq!(a.rows(), b.rows());
    let l = cholesky_lower(a)?;
    let n = a.rows();
    let m = b.cols();
    // L y = b
    let mut x = b.clone();
    for c in 0..m {
        for i in 0..n {
            let mut s = x[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)].re;
        }
        // L^H x = y
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in (i + 1)..n {
                s -= l[(k, i)].conj() * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)].re;
        }
    }
    Ok(x)
}

/// Inverse of a Hermitian positive definite matrix.
pub fn hermitian_inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    hermitian_solve(a, &ComplexMatrix::identity(a.rows()))
}

/// Eigendecomposition of a Hermitian matrix. Returns eigenvalues in
/// descending order with matching eigenvector columns.
pub fn herm_eigen(a: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    assert!(a.is_square());
    let sym = to_na(&a.hermitized());
    let eig = nalgebra::linalg::SymmetricEigen::try_new(sym, f64::EPSILON, 100_000)
        .ok_or(Error::NotPositiveDefinite)?;
    let n = a.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .expect("eigenvalues are finite")
    });
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Hermitian PSD square root. Eigenvalues in `[-1e-10 * ||a||, 0)` are
/// clamped to zero (correlation generators are often numerically
/// rank-deficient); anything below that threshold is an error.
pub fn herm_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (values, vectors) = herm_eigen(a)?;
    let scale = values.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let tol = 1e-10 * scale;
    if let Some(&min) = values
        .iter()
        .min_by(|x, y| x.partial_cmp(y).expect("finite"))
    {
        if min < -tol {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
            });
        }
    }
    let sqrt_vals: Vec<f64> = values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    // B = V diag(sqrt(lambda)) V^H
    let scaled = vectors.scale_cols(&sqrt_vals);
    Ok(scaled.mul_conj_transpose(&vectors).hermitized())
}

/// Largest singular value, relative accuracy ~1e-10.
pub fn spectral_norm(a: &ComplexMatrix) -> f64 {
    let sv = to_na(a).singular_values();
    sv.iter().fold(0.0f64, |m, &v| m.max(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian_pd(n: usize, seed: u64) -> ComplexMatrix {
        let mut rng = crate::rng::SimRng::new(seed);
        let x = crate::rng::sample_standard_complex_gaussian(n, n, &mut rng);
        let mut g = x.mul_conj_transpose(&x).scaled(1.0 / n as f64).hermitized();
        g.add_scaled_identity(0.5);
        g
    }

    #[test]
    fn logdet_of_identity_is_zero() {
        let i5 = ComplexMatrix::identity(5);
        assert!(logdet_hpd(&i5).unwrap().abs() < 1e-14);
    }

    #[test]
    fn logdet_of_diagonal() {
        let d = ComplexMatrix::from_real_diagonal(&[2.0, 4.0]);
        let ld = logdet_hpd(&d).unwrap();
        assert!((ld - 8.0f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn logdet_matches_eigenvalue_sum() {
        let a = random_hermitian_pd(8, 11);
        let ld = logdet_hpd(&a).unwrap();
        let (vals, _) = herm_eigen(&a).unwrap();
        let oracle: f64 = vals.iter().map(|v| v.ln()).sum();
        assert!((ld - oracle).abs() < 1e-10, "{ld} vs {oracle}");
    }

    #[test]
    fn logdet_rejects_indefinite() {
        let d = ComplexMatrix::from_real_diagonal(&[1.0, -1.0]);
        assert!(logdet_hpd(&d).is_err());
    }

    #[test]
    fn logdet_is_additive_over_block_diagonals() {
        let a = random_hermitian_pd(5, 3);
        let b = random_hermitian_pd(7, 4);
        let n = a.rows() + b.rows();
        let mut block = ComplexMatrix::zeros(n, n);
        for i in 0..a.rows() {
            for j in 0..a.rows() {
                block[(i, j)] = a[(i, j)];
            }
        }
        for i in 0..b.rows() {
            for j in 0..b.rows() {
                block[(a.rows() + i, a.rows() + j)] = b[(i, j)];
            }
        }
        let sum = logdet_hpd(&a).unwrap() + logdet_hpd(&b).unwrap();
        let whole = logdet_hpd(&block).unwrap();
        assert!((sum - whole).abs() < 1e-10);
    }

    #[test]
    fn herm_sqrt_identity_and_diagonal() {
        let i4 = ComplexMatrix::identity(4);
        let s = herm_sqrt(&i4).unwrap();
        assert!((&s.add(&i4.scaled(-1.0))).max_abs() < 1e-12);

        let d = ComplexMatrix::from_real_diagonal(&[4.0, 9.0]);
        let s = herm_sqrt(&d).unwrap();
        assert!((s[(0, 0)].re - 2.0).abs() < 1e-12);
        assert!((s[(1, 1)].re - 3.0).abs() < 1e-12);
        assert!(s[(0, 1)].norm() < 1e-12);
    }

    #[test]
    fn herm_sqrt_multiplies_back() {
        let a = random_hermitian_pd(6, 9);
        let s = herm_sqrt(&a).unwrap();
        assert!(s.hermitian_defect() < 1e-12);
        let back = s.mul(&s);
        let err = back.add(&a.scaled(-1.0)).max_abs();
        assert!(err < 1e-10 * (1.0 + spectral_norm(&a)), "error {err}");
    }

    #[test]
    fn herm_sqrt_rejects_negative_eigenvalues() {
        let d = ComplexMatrix::from_real_diagonal(&[1.0, -0.5]);
        match herm_sqrt(&d) {
            Err(Error::NotPsd { min_eigenvalue }) => assert!(min_eigenvalue < 0.0),
            other => panic!("expected NotPsd, got {other:?}"),
        }
    }

    #[test]
    fn spectral_norm_basics() {
        let z = ComplexMatrix::zeros(3, 4);
        assert_eq!(spectral_norm(&z), 0.0);
        let d = ComplexMatrix::from_real_diagonal(&[1.0, -3.0]);
        assert!((spectral_norm(&d) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_norm_matches_gram_eigenvalue() {
        let mut rng = crate::rng::SimRng::new(5);
        let a = crate::rng::sample_standard_complex_gaussian(6, 4, &mut rng);
        let direct = spectral_norm(&a);
        let gram = a.conj_transpose().mul(&a).hermitized();
        let (vals, _) = herm_eigen(&gram).unwrap();
        let oracle = vals[0].max(0.0).sqrt();
        assert!((direct - oracle).abs() < 1e-9, "{direct} vs {oracle}");
    }

    #[test]
    fn hermitian_solve_round_trips() {
        let a = random_hermitian_pd(6, 21);
        let b = {
            let mut rng = crate::rng::SimRng::new(22);
            crate::rng::sample_standard_complex_gaussian(6, 2, &mut rng)
        };
        let x = hermitian_solve(&a, &b).unwrap();
        let err = a.mul(&x).add(&b.scaled(-1.0)).max_abs();
        assert!(err < 1e-10, "residual {err}");
    }
}
