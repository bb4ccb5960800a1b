//! Trial spaces of trigonometric polynomials on the 2π-periodic torus.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice point of the Fourier dual. One-dimensional grids keep the second
/// entry at zero.
pub type Mode = [i64; 2];

/// Modes `j` with `|j|_∞ ≤ N` on the torus `[0, 2π)ⁿ`, `n ∈ {1, 2}`.
///
/// Basis functions are `e_j(x) = (2π)^{-n/2} e^{i j·x}`; modes are ordered
/// lexicographically from `(-N, …)` to `(N, …)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TorusGrid {
    #[serde(rename = "n")]
    dim: usize,
    #[serde(rename = "N")]
    bandlimit: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, bandlimit: usize) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::Precondition(format!(
                "torus dimension must be 1 or 2, got {dim}"
            )));
        }
        if bandlimit == 0 {
            return Err(Error::Precondition("bandlimit must be at least 1".into()));
        }
        Ok(Self { dim, bandlimit })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandlimit(&self) -> usize {
        self.bandlimit
    }

    /// Modes per axis, `2N + 1`.
    pub fn side(&self) -> usize {
        2 * self.bandlimit + 1
    }

    /// Basis size `(2N + 1)ⁿ`.
    pub fn size(&self) -> usize {
        self.side().pow(self.dim as u32)
    }

    /// Grid with twice the bandlimit: the band of a product of two fields of
    /// this grid, and of the symbols `φ̂_{i−j}` needed by convolution matrices.
    pub fn product_grid(&self) -> Self {
        Self {
            dim: self.dim,
            bandlimit: 2 * self.bandlimit,
        }
    }

    pub fn with_bandlimit(&self, bandlimit: usize) -> Result<Self> {
        Self::new(self.dim, bandlimit)
    }

    pub fn mode(&self, index: usize) -> Mode {
        let n = self.bandlimit as i64;
        let side = self.side();
        match self.dim {
            1 => [index as i64 - n, 0],
            _ => [(index / side) as i64 - n, (index % side) as i64 - n],
        }
    }

    pub fn index_of(&self, mode: Mode) -> Option<usize> {
        let n = self.bandlimit as i64;
        let side = self.side();
        let inside = |j: i64| (-n..=n).contains(&j);
        match self.dim {
            1 => (mode[1] == 0 && inside(mode[0])).then(|| (mode[0] + n) as usize),
            _ => (inside(mode[0]) && inside(mode[1]))
                .then(|| (mode[0] + n) as usize * side + (mode[1] + n) as usize),
        }
    }

    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        (0..self.size()).map(move |i| self.mode(i))
    }

    /// `|j|_∞` of the mode at `index`.
    pub fn sup_norm(&self, index: usize) -> i64 {
        let [a, b] = self.mode(index);
        a.abs().max(b.abs())
    }

    /// `1 + |j|²` at `index`; the Bessel symbol base.
    pub fn bessel_base(&self, index: usize) -> f64 {
        let [a, b] = self.mode(index);
        1.0 + (a * a + b * b) as f64
    }

    /// `(2π)^{-n/2}`, the normalization of the orthonormal basis.
    pub fn basis_scale(&self) -> f64 {
        (2.0 * std::f64::consts::PI).powf(-(self.dim as f64) / 2.0)
    }

    pub fn ensure_same(&self, other: &TorusGrid) -> Result<()> {
        if self != other {
            return Err(Error::Dimension(format!(
                "grid mismatch: (n={}, N={}) vs (n={}, N={})",
                self.dim, self.bandlimit, other.dim, other.bandlimit
            )));
        }
        Ok(())
    }

    pub fn ensure_dim(&self, other: &TorusGrid) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::Dimension(format!(
                "torus dimension mismatch: {} vs {}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }
}

/// Multi-index `α = (α₁, …, αₙ)` of a derivative `D^α`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Self {
        Self(entries)
    }

    pub fn zero(dim: usize) -> Self {
        Self(vec![0; dim])
    }

    /// `α = r·e_axis`.
    pub fn axis(dim: usize, axis: usize, order: u32) -> Self {
        let mut entries = vec![0; dim];
        entries[axis] = order;
        Self(entries)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `|α| = Σ αᵢ`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// Symbol of `D^α = i^{|α|} ∂^α` at mode `j`: `Π (−jᵢ)^{αᵢ}`.
    pub fn symbol(&self, mode: Mode) -> f64 {
        self.0
            .iter()
            .zip(mode.iter())
            .map(|(&a, &j)| (-j as f64).powi(a as i32))
            .product()
    }

    /// All multi-indices of length `dim` with `|α| = order`.
    pub fn all_of_order(dim: usize, order: u32) -> Vec<Self> {
        match dim {
            1 => vec![Self(vec![order])],
            _ => (0..=order)
                .rev()
                .map(|a| Self(vec![a, order - a]))
                .collect(),
        }
    }
}
