use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{MultiIndex, TorusGrid};
use crate::linalg::{c, hermitian_eigenvalues, hermitian_part, CMatrix};

/// Gårding constant and the two-sided `H^m` constants of a principal part.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoercivityReport {
    /// `Re(Tu,u) ≥ δ Σ_{|α|=m}‖D^α u‖²` without the shift.
    pub delta: f64,
    /// `c₁‖u‖²_m ≤ Re(Tu,u) ≤ c₂‖u‖²_m` with the shift included.
    pub c1: f64,
    pub c2: f64,
    pub shift: f64,
}

/// Diagonal of the `H^m` Gram matrix, `(1 + |j|²)^m`.
pub fn sobolev_gram(grid: &TorusGrid, m: u32) -> Vec<f64> {
    (0..grid.size())
        .map(|i| grid.bessel_base(i).powi(m as i32))
        .collect()
}

/// `Σ_{|α|=m} σ_α(j)²`, the symbol of `Σ (D^α)* D^α`.
fn top_order_gram(grid: &TorusGrid, m: u32) -> Vec<f64> {
    let indices = MultiIndex::all_of_order(grid.dim(), m);
    (0..grid.size())
        .map(|i| indices.iter().map(|a| a.symbol(grid.mode(i)).powi(2)).sum())
        .collect()
}

/// Below this `δ` counts as zero: the Hermitian part has no coercive
/// top-order component.
const DELTA_FLOOR: f64 = 1e-12;

/// `δ` as the smallest generalized eigenvalue of `Re T` against the top-order
/// Gram on the complement of its kernel (the constants), and `c₁, c₂` as the
/// extreme generalized eigenvalues of `Re T + ρ₀` against the `H^m` Gram.
pub fn verify_garding(
    unshifted: &CMatrix,
    m: u32,
    grid: &TorusGrid,
    shift: f64,
) -> Result<CoercivityReport> {
    let d = grid.size();
    if unshifted.nrows() != d || unshifted.ncols() != d {
        return Err(Error::Dimension(format!(
            "principal matrix is {}x{}, grid has {d} modes",
            unshifted.nrows(),
            unshifted.ncols()
        )));
    }
    let re = hermitian_part(unshifted);

    let top = top_order_gram(grid, m);
    let active: Vec<usize> = (0..d).filter(|&i| top[i] > 0.0).collect();
    let scaled = CMatrix::from_fn(active.len(), active.len(), |a, b| {
        let (i, j) = (active[a], active[b]);
        re[(i, j)] / (top[i] * top[j]).sqrt()
    });
    let delta = hermitian_eigenvalues(&scaled)[0];
    if delta <= DELTA_FLOOR {
        return Err(Error::Coercivity(format!(
            "Gårding inequality fails: δ = {delta:e}"
        )));
    }

    let h1 = sobolev_gram(grid, m);
    let mut shifted = CMatrix::from_fn(d, d, |i, j| re[(i, j)] / (h1[i] * h1[j]).sqrt());
    for i in 0..d {
        shifted[(i, i)] += c(shift / h1[i]);
    }
    let values = hermitian_eigenvalues(&shifted);
    let (c1, c2) = (values[0], values[d - 1]);
    if c1 <= DELTA_FLOOR {
        return Err(Error::Coercivity(format!(
            "shift ρ₀ = {shift} does not make Re T coercive on H^{m}: c₁ = {c1:e}"
        )));
    }
    Ok(CoercivityReport {
        delta,
        c1,
        c2,
        shift,
    })
}
