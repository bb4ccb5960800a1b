//! Dense complex linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Largest dimension for which `spectral_norm` uses a dense SVD.
pub const DENSE_SVD_LIMIT: usize = 1200;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `(M + M*) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c(0.5)
}

/// `(M − M*) / 2i`.
pub fn skew_part(m: &CMatrix) -> CMatrix {
    (m - m.adjoint()) * Complex64::new(0.0, -0.5)
}

/// Max-entry deviation from Hermitian symmetry, relative to the largest entry.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    (m - m.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
        / scale
}

pub fn is_hermitian(m: &CMatrix, tol: f64) -> bool {
    hermitian_defect(m) <= tol
}

/// Ascending eigenvalues of a Hermitian matrix (the strict upper triangle is
/// mirrored from the lower one).
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Ascending eigenpairs of a Hermitian matrix; eigenvectors are the columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, k| {
        eig.eigenvectors[(r, order[k])]
    });
    (values, vectors)
}

pub fn lambda_max(m: &CMatrix) -> f64 {
    *hermitian_eigenvalues(m).last().expect("non-empty matrix")
}

pub fn lambda_min(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)[0]
}

/// `f(H) = V f(Λ) V*` for Hermitian `H`.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = hermitian_eigen(m);
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |r, k| {
        vectors[(r, k)] * f(values[k])
    });
    scaled * vectors.adjoint()
}

/// `H^{-1/2}` for Hermitian positive definite `H`; diagonal input is handled
/// entrywise.
pub fn inverse_sqrt(m: &CMatrix) -> Result<CMatrix> {
    if is_diagonal(m) {
        let d: Vec<f64> = (0..m.nrows()).map(|i| m[(i, i)].re).collect();
        if let Some(bad) = d.iter().find(|&&x| x <= 0.0) {
            return Err(Error::Coercivity(format!(
                "matrix is not positive definite (diagonal entry {bad:e})"
            )));
        }
        return Ok(CMatrix::from_diagonal(&CVector::from_iterator(
            d.len(),
            d.iter().map(|x| c(x.powf(-0.5))),
        )));
    }
    let min = lambda_min(m);
    if min <= 0.0 {
        return Err(Error::Coercivity(format!(
            "matrix is not positive definite (min eigenvalue {min:e})"
        )));
    }
    Ok(hermitian_function(m, |x| x.powf(-0.5)))
}

pub fn is_diagonal(m: &CMatrix) -> bool {
    m.is_square()
        && m.iter()
            .enumerate()
            .all(|(k, z)| k % (m.nrows() + 1) == 0 || *z == Complex64::ZERO)
}

/// `D M D` for real diagonal `D` given by its entries.
pub fn scale_both(m: &CMatrix, left: &[f64], right: &[f64]) -> CMatrix {
    CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        m[(i, j)] * (left[i] * right[j])
    })
}

/// Largest singular value. Dense SVD up to [`DENSE_SVD_LIMIT`], power
/// iteration on `A*A` beyond.
pub fn spectral_norm(m: &CMatrix) -> Result<f64> {
    if m.is_empty() {
        return Ok(0.0);
    }
    if m.nrows().max(m.ncols()) <= DENSE_SVD_LIMIT {
        let s = m.clone().singular_values();
        return Ok(s.iter().copied().fold(0.0, f64::max));
    }
    power_iteration_norm(m, 1e-12, 50_000)
}

/// `σ_max(A)` by power iteration on `A*A`, started from the all-ones vector
/// plus a deterministic perturbation. Convergence is declared when the
/// eigen-residual `‖A*Av − λv‖ ≤ tol·λ`.
pub fn power_iteration_norm(m: &CMatrix, tol: f64, max_iter: usize) -> Result<f64> {
    let n = m.ncols();
    let mut v = CVector::from_fn(n, |i, _| c(1.0 + (i as f64 * 0.618_033_988_7).fract()));
    v /= c(v.norm());
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let w = m.adjoint() * (m * &v);
        let lambda = v.dotc(&w).re;
        if lambda <= 0.0 {
            return Ok(0.0);
        }
        residual = (&w - &v * c(lambda)).norm();
        if residual <= tol * lambda {
            return Ok(lambda.sqrt());
        }
        let norm = w.norm();
        v = w / c(norm);
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual,
    })
}

/// Eigenvalues of a general square matrix through its complex Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    let schur = m
        .clone()
        .try_schur(f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Numeric("Schur iteration did not converge".into()))?;
    let t = schur.unpack().1;
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// `M^{-1}` through LU, rejected when the residual `‖MX − I‖` exceeds `tol`.
pub fn inverse_checked(m: &CMatrix, tol: f64) -> Result<CMatrix> {
    let n = m.nrows();
    let inv = m
        .clone()
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Numeric("singular matrix".into()))?;
    let residual = residual_norm(m, &inv);
    if !residual.is_finite() || residual > tol {
        return Err(Error::Numeric(format!(
            "inverse residual {residual:e} exceeds {tol:e} (n = {n})"
        )));
    }
    Ok(inv)
}

/// `‖MX − I‖_F`, an upper bound for the spectral norm that avoids an SVD.
pub fn residual_norm(m: &CMatrix, x: &CMatrix) -> f64 {
    let mut r = m * x;
    for i in 0..r.nrows() {
        r[(i, i)] -= Complex64::ONE;
    }
    r.norm()
}

/// `x* M x`.
pub fn quadratic_form(m: &CMatrix, x: &CVector) -> Complex64 {
    x.dotc(&(m * x))
}

/// `e^{iθ}`-rotations on a uniform grid of `count` angles over `[0, 2π)`.
pub fn angle_grid(count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |k| 2.0 * std::f64::consts::PI * k as f64 / count as f64)
}
