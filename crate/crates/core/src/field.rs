//! Band-limited fields on the torus and the exact Sobolev calculus on them.
//!
//! A [`SpectralField`] stores coefficients against the orthonormal basis
//! `e_j = (2π)^{-n/2} e^{i j·x}`, so `‖f‖_s² = Σ (1+|j|²)^s |f̂_j|²` holds
//! exactly and Bessel potentials are diagonal.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::grid::{MultiIndex, TorusGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.size() {
            return Err(Error::Dimension(format!(
                "expected {} coefficients for n={}, N={}, got {}",
                grid.size(),
                grid.dim(),
                grid.bandlimit(),
                coeffs.len()
            )));
        }
        if coeffs
            .iter()
            .any(|c| !c.re.is_finite() || !c.im.is_finite())
        {
            return Err(Error::Numeric("non-finite Fourier coefficient".into()));
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::ZERO; grid.size()],
        }
    }

    /// Single basis function `e_j`.
    pub fn basis(grid: TorusGrid, mode: [i64; 2]) -> Result<Self> {
        let index = grid
            .index_of(mode)
            .ok_or_else(|| Error::Dimension(format!("mode {mode:?} outside the band")))?;
        let mut field = Self::zeros(grid);
        field.coeffs[index] = Complex64::ONE;
        Ok(field)
    }

    /// The constant function `c`; its only coefficient is `c·(2π)^{n/2}`.
    pub fn constant(grid: TorusGrid, value: Complex64) -> Self {
        let mut field = Self::zeros(grid);
        let zero = grid.index_of([0, 0]).expect("mode 0 is always in band");
        field.coeffs[zero] = value / grid.basis_scale();
        field
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient at `mode`, zero outside the band.
    pub fn coeff(&self, mode: [i64; 2]) -> Complex64 {
        self.grid
            .index_of(mode)
            .map_or(Complex64::ZERO, |i| self.coeffs[i])
    }

    pub fn map_modes(&self, mut f: impl FnMut(usize, Complex64) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| f(i, c))
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        self.map_modes(|_, c| c * factor)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self.map_modes(|i, c| c + other.coeffs[i]))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-Complex64::ONE))
    }

    /// Re-expresses the field on another bandlimit: truncation or zero padding.
    pub fn resample(&self, grid: TorusGrid) -> Result<Self> {
        self.grid.ensure_dim(&grid)?;
        let coeffs = grid.modes().map(|j| self.coeff(j)).collect();
        Ok(Self { grid, coeffs })
    }

    /// Pointwise complex conjugate, `conj(f)^_j = conj(f̂_{−j})`.
    pub fn conj(&self) -> Self {
        let coeffs = self
            .grid
            .modes()
            .map(|[a, b]| self.coeff([-a, -b]).conj())
            .collect();
        Self {
            grid: self.grid,
            coeffs,
        }
    }

    /// `‖f‖_s`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        sobolev_inner(self, self, s)
            .expect("same grid")
            .re
            .max(0.0)
            .sqrt()
    }

    /// Values on the uniform grid `x_p = 2πp/P` (row-major over axes).
    pub fn sample(&self, points: usize) -> Vec<Complex64> {
        let n = self.grid.bandlimit() as i64;
        let side = self.grid.side();
        let scale = self.grid.basis_scale();
        // twiddle[p][j + N] = e^{i j x_p}
        let twiddle: Vec<Vec<Complex64>> = (0..points)
            .map(|p| {
                let x = 2.0 * PI * p as f64 / points as f64;
                (-n..=n).map(|j| Complex64::cis(j as f64 * x)).collect()
            })
            .collect();
        match self.grid.dim() {
            1 => twiddle
                .iter()
                .map(|row| {
                    row.iter()
                        .zip(&self.coeffs)
                        .map(|(t, c)| t * c)
                        .sum::<Complex64>()
                        * scale
                })
                .collect(),
            _ => {
                // Sum over the second axis first, then the first.
                let mut partial = vec![Complex64::ZERO; side * points];
                for a in 0..side {
                    for (q, row) in twiddle.iter().enumerate() {
                        partial[a * points + q] =
                            (0..side).map(|b| self.coeffs[a * side + b] * row[b]).sum();
                    }
                }
                let mut out = vec![Complex64::ZERO; points * points];
                for (p, row) in twiddle.iter().enumerate() {
                    for q in 0..points {
                        out[p * points + q] = (0..side)
                            .map(|a| partial[a * points + q] * row[a])
                            .sum::<Complex64>()
                            * scale;
                    }
                }
                out
            }
        }
    }

    /// Orthogonal projection onto `grid` of a function given by samples on
    /// the uniform `P`-point grid per axis (trapezoidal rule).
    pub fn from_samples(grid: TorusGrid, samples: &[Complex64], points: usize) -> Result<Self> {
        let expected = points.pow(grid.dim() as u32);
        if samples.len() != expected {
            return Err(Error::Dimension(format!(
                "expected {expected} samples, got {}",
                samples.len()
            )));
        }
        let n = grid.bandlimit() as i64;
        let side = grid.side();
        let weight = (2.0 * PI / points as f64).powi(grid.dim() as i32) * grid.basis_scale();
        // twiddle[p][j + N] = e^{-i j x_p}
        let twiddle: Vec<Vec<Complex64>> = (0..points)
            .map(|p| {
                let x = 2.0 * PI * p as f64 / points as f64;
                (-n..=n).map(|j| Complex64::cis(-(j as f64) * x)).collect()
            })
            .collect();
        let coeffs = match grid.dim() {
            1 => (0..side)
                .map(|j| {
                    samples
                        .iter()
                        .zip(&twiddle)
                        .map(|(s, t)| s * t[j])
                        .sum::<Complex64>()
                        * weight
                })
                .collect(),
            _ => {
                let mut partial = vec![Complex64::ZERO; points * side];
                for p in 0..points {
                    for b in 0..side {
                        partial[p * side + b] = (0..points)
                            .map(|q| samples[p * points + q] * twiddle[q][b])
                            .sum();
                    }
                }
                let mut coeffs = vec![Complex64::ZERO; side * side];
                for a in 0..side {
                    for b in 0..side {
                        coeffs[a * side + b] = (0..points)
                            .map(|p| partial[p * side + b] * twiddle[p][a])
                            .sum::<Complex64>()
                            * weight;
                    }
                }
                coeffs
            }
        };
        Self::new(grid, coeffs)
    }
}

/// `(1+|j|²)^{s/2}` over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SobolevWeight {
    s: f64,
    values: Vec<f64>,
}

impl SobolevWeight {
    pub fn new(grid: &TorusGrid, s: f64) -> Self {
        let values = (0..grid.size())
            .map(|i| grid.bessel_base(i).powf(s / 2.0))
            .collect();
        Self { s, values }
    }

    pub fn smoothness(&self) -> f64 {
        self.s
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `Σ_j w_j²`, i.e. `Σ (1+|j|²)^s`.
    pub fn squared_sum(&self) -> f64 {
        self.values.iter().map(|w| w * w).sum()
    }
}

/// `(f, g)_s = Σ_j (1+|j|²)^s f̂_j conj(ĝ_j)`.
pub fn sobolev_inner(f: &SpectralField, g: &SpectralField, s: f64) -> Result<Complex64> {
    f.grid.ensure_same(&g.grid)?;
    Ok((0..f.grid.size())
        .map(|i| f.grid.bessel_base(i).powf(s) * f.coeffs[i] * g.coeffs[i].conj())
        .sum())
}

/// `(−Δ+1)^{a/2} f`; an isometry `H^s → H^{s−a}`.
pub fn apply_bessel(f: &SpectralField, a: f64) -> SpectralField {
    let grid = f.grid;
    f.map_modes(|i, c| c * grid.bessel_base(i).powf(a / 2.0))
}

/// `D^α f` with `D = i ∂`, symbol `Π(−jᵢ)^{αᵢ}`.
pub fn apply_derivative(f: &SpectralField, alpha: &MultiIndex) -> Result<SpectralField> {
    if alpha.len() != f.grid.dim() {
        return Err(Error::Dimension(format!(
            "multi-index of length {} on a {}-dimensional torus",
            alpha.len(),
            f.grid.dim()
        )));
    }
    let grid = f.grid;
    Ok(f.map_modes(|i, c| c * alpha.symbol(grid.mode(i))))
}

/// Galerkin product `P_N(φ f)`: `(φf)^_i = (2π)^{-n/2} Σ_j φ̂_{i−j} f̂_j`.
///
/// `φ` may carry a wider band than `f`; the result lives on `f`'s grid.
pub fn pointwise_product(phi: &SpectralField, f: &SpectralField) -> Result<SpectralField> {
    phi.grid.ensure_dim(&f.grid)?;
    let grid = f.grid;
    let scale = grid.basis_scale();
    let coeffs = grid
        .modes()
        .map(|[i0, i1]| {
            grid.modes()
                .zip(&f.coeffs)
                .map(|([j0, j1], c)| phi.coeff([i0 - j0, i1 - j1]) * c)
                .sum::<Complex64>()
                * scale
        })
        .collect();
    Ok(SpectralField { grid, coeffs })
}

#[derive(Serialize, Deserialize)]
struct RawField {
    n: usize,
    #[serde(rename = "N")]
    bandlimit: usize,
    coeffs: Vec<[f64; 2]>,
}

impl Serialize for SpectralField {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RawField {
            n: self.grid.dim(),
            bandlimit: self.grid.bandlimit(),
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SpectralField {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawField::deserialize(deserializer)?;
        let grid = TorusGrid::new(raw.n, raw.bandlimit).map_err(serde::de::Error::custom)?;
        let coeffs = raw
            .coeffs
            .into_iter()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        SpectralField::new(grid, coeffs).map_err(serde::de::Error::custom)
    }
}
