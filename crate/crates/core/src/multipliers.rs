//! Multipliers `H^k → H^{−l}` as weighted convolution matrices.
//!
//! In orthonormalized `H^k` / `H^{−l}` coordinates, multiplication by `φ`
//! becomes `A[i,j] = (1+|i|²)^{−l/2} (2π)^{−n/2} φ̂_{i−j} (1+|j|²)^{−k/2}`, and
//! the truncated multiplier norm is `σ_max(A)`. Truncation only restricts
//! the operator, so the value is a lower bound of the true norm and is
//! monotone in the bandlimit.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::{lp_sobolev_norm, realize, CoefficientSpec, LpNormRequest};
use crate::error::{Error, Result};
use crate::field::{pointwise_product, SobolevWeight, SpectralField};
use crate::grid::{MultiIndex, TorusGrid};
use crate::linalg::{scale_both, spectral_norm, CMatrix, CVector};
use crate::probes::ProbeSet;

/// `C_φ[i,j] = (2π)^{−n/2} φ̂_{i−j}`: Galerkin multiplication by `φ` in `L₂`
/// coordinates of `grid`. Symbols outside `φ`'s band count as zero.
pub fn convolution_matrix(phi: &SpectralField, grid: &TorusGrid) -> Result<CMatrix> {
    phi.grid().ensure_dim(grid)?;
    let scale = grid.basis_scale();
    Ok(CMatrix::from_fn(grid.size(), grid.size(), |i, j| {
        let [a0, a1] = grid.mode(i);
        let [b0, b1] = grid.mode(j);
        phi.coeff([a0 - b0, a1 - b1]) * scale
    }))
}

/// Diagonal of the derivative symbol `σ_α(j)` over a grid.
pub fn derivative_symbols(grid: &TorusGrid, alpha: &MultiIndex) -> Result<Vec<f64>> {
    if alpha.len() != grid.dim() {
        return Err(Error::Dimension(format!(
            "multi-index of length {} on a {}-dimensional torus",
            alpha.len(),
            grid.dim()
        )));
    }
    Ok(grid.modes().map(|j| alpha.symbol(j)).collect())
}

fn check_orders(k: f64, l: f64) -> Result<()> {
    if !(k >= 0.0 && l >= 0.0 && k.is_finite() && l.is_finite()) {
        return Err(Error::Precondition(format!(
            "multiplier orders must be finite and nonnegative, got k={k}, l={l}"
        )));
    }
    Ok(())
}

/// The operator `M_φ: H^k → H^{−l}` restricted to a trial grid.
#[derive(Debug, Clone)]
pub struct MultiplierOperator {
    phi: SpectralField,
    k: f64,
    l: f64,
    grid: TorusGrid,
    matrix: CMatrix,
}

impl MultiplierOperator {
    /// Assembles `A` on `grid`. For exact convolution on the trial space,
    /// `phi` should carry the doubled band `grid.product_grid()`.
    pub fn assemble(phi: &SpectralField, k: f64, l: f64, grid: &TorusGrid) -> Result<Self> {
        check_orders(k, l)?;
        let conv = convolution_matrix(phi, grid)?;
        let left = SobolevWeight::new(grid, -l);
        let right = SobolevWeight::new(grid, -k);
        let matrix = scale_both(&conv, left.values(), right.values());
        Ok(Self {
            phi: phi.clone(),
            k,
            l,
            grid: *grid,
            matrix,
        })
    }

    /// Realizes `spec` on the doubled band and assembles on `grid`.
    pub fn from_spec(spec: &CoefficientSpec, k: f64, l: f64, grid: &TorusGrid) -> Result<Self> {
        let phi = realize(spec, &grid.product_grid())?;
        Self::assemble(&phi, k, l, grid)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn phi(&self) -> &SpectralField {
        &self.phi
    }

    pub fn orders(&self) -> (f64, f64) {
        (self.k, self.l)
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    /// `σ_max(A)`, the multiplier norm on the trial space.
    pub fn norm(&self) -> Result<f64> {
        spectral_norm(&self.matrix)
    }

    /// `A` restricted to input modes selected by `keep(|j|_∞)`.
    fn column_restriction(&self, keep: impl Fn(i64) -> bool) -> CMatrix {
        let cols: Vec<usize> = (0..self.grid.size())
            .filter(|&j| keep(self.grid.sup_norm(j)))
            .collect();
        CMatrix::from_fn(self.matrix.nrows(), cols.len(), |i, c| {
            self.matrix[(i, cols[c])]
        })
    }
}

/// `‖φ‖_{M[k,−l]}` on the trial space.
pub fn multiplier_norm(op: &MultiplierOperator) -> Result<f64> {
    op.norm()
}

/// Convenience: norm of `spec` in `M[k,−l]` on `grid`.
pub fn spec_multiplier_norm(
    spec: &CoefficientSpec,
    k: f64,
    l: f64,
    grid: &TorusGrid,
) -> Result<f64> {
    MultiplierOperator::from_spec(spec, k, l, grid)?.norm()
}

/// `(‖φ‖_{M[k,−l]}, ‖φ‖_{M[l,−k]})`.
pub fn check_symmetry(phi: &SpectralField, k: f64, l: f64, grid: &TorusGrid) -> Result<(f64, f64)> {
    let forward = MultiplierOperator::assemble(phi, k, l, grid)?.norm()?;
    let backward = MultiplierOperator::assemble(phi, l, k, grid)?.norm()?;
    Ok((forward, backward))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationCheck {
    /// `‖φ‖_{M[k₂,−l₂]}`.
    pub inner: f64,
    /// `‖φ‖_{M[k₁,−l₁]}`.
    pub outer: f64,
    pub holds: bool,
}

/// `M[k₁,−l₁] ⊂ M[k₂,−l₂]` with norm inequality, for `k₂ < k₁`,
/// `k₁ + l₁ = k₂ + l₂`, `l₁ ≤ k₂`.
pub fn check_interpolation(
    phi: &SpectralField,
    (k1, l1): (f64, f64),
    (k2, l2): (f64, f64),
    grid: &TorusGrid,
) -> Result<InterpolationCheck> {
    check_orders(k1, l1)?;
    check_orders(k2, l2)?;
    if k2 >= k1 || (k1 + l1 - k2 - l2).abs() > 1e-12 || l1 > k2 {
        return Err(Error::Precondition(format!(
            "interpolation needs k₂ < k₁, k₁+l₁ = k₂+l₂ and l₁ ≤ k₂; got ({k1},{l1}) → ({k2},{l2})"
        )));
    }
    let outer = MultiplierOperator::assemble(phi, k1, l1, grid)?.norm()?;
    let inner = MultiplierOperator::assemble(phi, k2, l2, grid)?.norm()?;
    Ok(InterpolationCheck {
        inner,
        outer,
        holds: inner <= outer * (1.0 + 1e-9),
    })
}

/// High-frequency relative bound of `M_φ`.
///
/// For each cutoff `Λ`, `eps(Λ)` is the norm of `A` on input modes with
/// `|j|_∞ ≥ Λ` and `witness(Λ)` is the norm on the remaining modes times
/// `max_{|j|_∞<Λ} (1+|j|²)^{(k+l)/2}`, so that for every in-band `f`
///
/// `‖M_φ f‖_{−l} ≤ eps(Λ) ‖(−Δ+1)^{(k+l)/2} f‖_{−l} + witness(Λ) ‖f‖_{−l}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeBoundCurve {
    pub k: f64,
    pub l: f64,
    pub cutoffs: Vec<usize>,
    pub eps: Vec<f64>,
    pub witness: Vec<f64>,
}

impl RelativeBoundCurve {
    /// Largest violation of the certified split over the probes (≤ 0 when
    /// the certificate holds).
    pub fn validate(&self, op: &MultiplierOperator, probes: &ProbeSet) -> f64 {
        let grid = op.grid();
        let hk = SobolevWeight::new(grid, self.k);
        let hl = SobolevWeight::new(grid, -self.l);
        let mut worst = f64::NEG_INFINITY;
        for f in probes.iter() {
            // A acts on H^k-orthonormal coordinates g = W_k f.
            let g = CVector::from_fn(f.len(), |i, _| f[i] * hk.values()[i]);
            let image = (op.matrix() * &g).norm();
            let norm_k = g.norm();
            let norm_minus_l = f
                .iter()
                .zip(hl.values())
                .map(|(z, w)| (z * w).norm_sqr())
                .sum::<f64>()
                .sqrt();
            for (e, m) in self.eps.iter().zip(&self.witness) {
                let bound = e * norm_k + m * norm_minus_l;
                worst = worst.max((image - bound) / bound.max(f64::MIN_POSITIVE));
            }
        }
        worst
    }

    /// `eps` at the largest cutoff not above `cutoff`.
    pub fn eps_at(&self, cutoff: usize) -> Option<f64> {
        self.cutoffs
            .iter()
            .zip(&self.eps)
            .filter(|(c, _)| **c <= cutoff)
            .map(|(_, e)| *e)
            .next_back()
    }
}

pub fn relative_bound_curve(
    op: &MultiplierOperator,
    cutoffs: &[usize],
) -> Result<RelativeBoundCurve> {
    let n = op.grid().bandlimit();
    if cutoffs.windows(2).any(|w| w[0] >= w[1]) || cutoffs.iter().any(|&c| c > n) {
        return Err(Error::Precondition(format!(
            "cutoffs must be strictly ascending and at most N = {n}"
        )));
    }
    let (k, l) = op.orders();
    let mut eps = Vec::with_capacity(cutoffs.len());
    let mut witness = Vec::with_capacity(cutoffs.len());
    for &cut in cutoffs {
        let cut = cut as i64;
        eps.push(spectral_norm(&op.column_restriction(|j| j >= cut))?);
        let low = spectral_norm(&op.column_restriction(|j| j < cut))?;
        let ratio = if cut == 0 {
            0.0
        } else {
            // Largest |j|² with |j|_∞ < Λ is n·(Λ−1)².
            let r2 = (op.grid().dim() as i64 * (cut - 1) * (cut - 1)) as f64;
            (1.0 + r2).powf((k + l) / 2.0)
        };
        witness.push(low * ratio);
    }
    Ok(RelativeBoundCurve {
        k,
        l,
        cutoffs: cutoffs.to_vec(),
        eps,
        witness,
    })
}

/// `M₀` membership on the trial space: `eps(Λ) ≤ threshold` at `Λ = N/2`.
pub fn small_relative_bound(op: &MultiplierOperator, threshold: f64) -> Result<(bool, f64)> {
    let half = op.grid().bandlimit() / 2;
    let curve = relative_bound_curve(op, &[half])?;
    Ok((curve.eps[0] <= threshold, curve.eps[0]))
}

/// Singular-value decay proxy for a compact operator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompactnessProxy {
    pub holds: bool,
    /// `σ_{q} / σ_max` at the probe index `q`.
    pub ratio: f64,
    pub index: usize,
}

/// Holds when `σ_q ≤ threshold·σ_max` at `q = ⌈fraction·dim⌉`.
pub fn compactness_proxy(matrix: &CMatrix, fraction: f64, threshold: f64) -> CompactnessProxy {
    let mut s: Vec<f64> = matrix.clone().singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    let index = ((fraction * s.len() as f64).ceil() as usize).min(s.len().saturating_sub(1));
    let top = s.first().copied().unwrap_or(0.0);
    let ratio = if top > 0.0 { s[index] / top } else { 0.0 };
    CompactnessProxy {
        holds: ratio <= threshold,
        ratio,
        index,
    }
}

/// Matrix of `φ_m[f, g] = (φ D^{m−k} f, D^{m−l} g)` with derivatives along
/// the first axis, and the multiplier norm bounding it by `‖f‖_m ‖g‖_m`.
#[derive(Debug, Clone)]
pub struct LowerOrderForm {
    pub matrix: CMatrix,
    pub multiplier_norm: f64,
    pub m: u32,
}

impl LowerOrderForm {
    /// Largest `|f*Bf| − ‖φ‖_{M[k,−l]} ‖f‖_m²` over the probes.
    pub fn max_bound_violation(&self, grid: &TorusGrid, probes: &ProbeSet) -> f64 {
        let hm = SobolevWeight::new(grid, self.m as f64);
        probes
            .iter()
            .map(|f| {
                let value = f.dotc(&(&self.matrix * f)).norm();
                let norm2: f64 = f
                    .iter()
                    .zip(hm.values())
                    .map(|(z, w)| (z * w).norm_sqr())
                    .sum();
                value - self.multiplier_norm * norm2
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn lower_order_form(
    phi: &SpectralField,
    k: f64,
    l: f64,
    m: u32,
    grid: &TorusGrid,
) -> Result<LowerOrderForm> {
    let integral = |x: f64| x.fract() == 0.0 && x >= 0.0 && x <= m as f64;
    if !integral(k) || !integral(l) {
        return Err(Error::Precondition(format!(
            "derivative orders m−k, m−l must be nonnegative integers (m={m}, k={k}, l={l})"
        )));
    }
    let right = derivative_symbols(grid, &MultiIndex::axis(grid.dim(), 0, m - k as u32))?;
    let left = derivative_symbols(grid, &MultiIndex::axis(grid.dim(), 0, m - l as u32))?;
    let conv = convolution_matrix(phi, grid)?;
    let multiplier_norm = MultiplierOperator::assemble(phi, k, l, grid)?.norm()?;
    Ok(LowerOrderForm {
        matrix: scale_both(&conv, &left, &right),
        multiplier_norm,
        m,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EmbeddingLemma {
    /// `H^{−l} ⊂ M̊[k,−l]` for `k > n/2`.
    H2,
    /// `H_p^γ ⊂ M̊[k,−l]` for `k ≤ n/2`, `γ ≤ l`, `p > n/(k+l−γ)`.
    Hp,
    /// Boundary case `k < n/2`, `p = n/(k+l−γ)` allowed.
    Polking,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    pub n: usize,
    pub k: f64,
    pub l: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default = "default_p")]
    pub p: f64,
}

fn default_p() -> f64 {
    2.0
}

impl EmbeddingParams {
    /// Rejects parameter sets outside the lemma's hypotheses.
    pub fn check(&self, lemma: EmbeddingLemma) -> Result<()> {
        check_orders(self.k, self.l)?;
        let half = self.n as f64 / 2.0;
        let reject = |why: String| Err(Error::Precondition(format!("{lemma:?}: {why}")));
        match lemma {
            EmbeddingLemma::H2 => {
                if self.k <= half {
                    return reject(format!("needs k > n/2, got k={}, n={}", self.k, self.n));
                }
                if self.l > self.k {
                    return reject(format!("needs l ≤ k, got k={}, l={}", self.k, self.l));
                }
            }
            EmbeddingLemma::Hp | EmbeddingLemma::Polking => {
                let strict = lemma == EmbeddingLemma::Hp;
                if (strict && self.k > half) || (!strict && self.k >= half) {
                    return reject(format!(
                        "k={} violates the bound against n/2={half}",
                        self.k
                    ));
                }
                if self.gamma > self.l {
                    return reject(format!("needs γ ≤ l, got γ={}, l={}", self.gamma, self.l));
                }
                let gap = self.k + self.l - self.gamma;
                if gap <= 0.0 {
                    return reject("needs k + l − γ > 0".into());
                }
                let critical = self.n as f64 / gap;
                let ok = if strict {
                    self.p > critical
                } else {
                    self.p >= critical - 1e-12
                };
                if !ok || self.p <= 1.0 {
                    return reject(format!("p={} against critical exponent {critical}", self.p));
                }
            }
        }
        Ok(())
    }
}

/// Sample families for embedding sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SampleSpec {
    Coefficient {
        spec: CoefficientSpec,
    },
    /// Complex Gaussian coefficients, white in the source scale.
    WhiteNoise {
        count: usize,
        seed: u64,
    },
    /// `e_j` for `j = 0, …, max` along the first axis.
    SingleModes {
        max: i64,
    },
    /// Deltas at seeded random points.
    Deltas {
        count: usize,
        seed: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSample {
    pub sample_id: String,
    pub source_norm: f64,
    pub mult_norm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub lemma: EmbeddingLemma,
    pub params: EmbeddingParams,
    pub bandlimit: usize,
    pub samples: Vec<EmbeddingSample>,
    pub max_ratio: f64,
    /// Empirical `C` in `‖fg‖_l ≤ C‖f‖_k‖g‖_l` (H2 branch only).
    pub product_constant: Option<f64>,
}

impl EmbeddingReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("sample_id,source_norm,mult_norm,ratio\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{:.12e},{:.12e},{:.12e}\n",
                s.sample_id, s.source_norm, s.mult_norm, s.ratio
            ));
        }
        out
    }
}

fn source_norm(
    field: &SpectralField,
    lemma: EmbeddingLemma,
    params: &EmbeddingParams,
) -> Result<f64> {
    match lemma {
        EmbeddingLemma::H2 => Ok(field.sobolev_norm(-params.l)),
        _ => Ok(lp_sobolev_norm(
            field,
            &LpNormRequest {
                gamma: params.gamma,
                p: params.p,
                quadrature: None,
            },
        )?
        .value),
    }
}

fn source_smoothness(lemma: EmbeddingLemma, params: &EmbeddingParams) -> f64 {
    match lemma {
        EmbeddingLemma::H2 => -params.l,
        _ => params.gamma,
    }
}

fn expand_samples(
    samples: &[SampleSpec],
    band: &TorusGrid,
    smoothness: f64,
) -> Result<Vec<(String, SpectralField)>> {
    let mut out = Vec::new();
    for sample in samples {
        match sample {
            SampleSpec::Coefficient { spec } => out.push((spec.name(), realize(spec, band)?)),
            SampleSpec::WhiteNoise { count, seed } => {
                let weight = SobolevWeight::new(band, -smoothness);
                for (i, v) in ProbeSet::gaussian(band.size(), *count, *seed)
                    .into_vectors()
                    .into_iter()
                    .enumerate()
                {
                    let coeffs = v.iter().zip(weight.values()).map(|(z, w)| z * w).collect();
                    out.push((format!("white_{i}"), SpectralField::new(*band, coeffs)?));
                }
            }
            SampleSpec::SingleModes { max } => {
                for j in 0..=*max {
                    out.push((format!("mode_{j}"), SpectralField::basis(*band, [j, 0])?));
                }
            }
            SampleSpec::Deltas { count, seed } => {
                let points = ProbeSet::gaussian(band.dim(), *count, *seed).into_vectors();
                for (i, p) in points.iter().enumerate() {
                    let x0: Vec<f64> = p
                        .iter()
                        .map(|z| z.re.rem_euclid(std::f64::consts::TAU))
                        .collect();
                    let spec = CoefficientSpec::delta(x0);
                    out.push((format!("delta_{i}"), realize(&spec, band)?));
                }
            }
        }
    }
    Ok(out)
}

/// Empirical supremum of `‖φ‖_{M[k,−l]} / ‖φ‖_source` over a sample set,
/// with samples realized on the doubled band of `grid`.
pub fn embedding_sweep(
    lemma: EmbeddingLemma,
    params: &EmbeddingParams,
    samples: &[SampleSpec],
    grid: &TorusGrid,
) -> Result<EmbeddingReport> {
    params.check(lemma)?;
    if params.n != grid.dim() {
        return Err(Error::Dimension(format!(
            "parameters for n={} on a {}-dimensional torus",
            params.n,
            grid.dim()
        )));
    }
    let band = grid.product_grid();
    let fields = expand_samples(samples, &band, source_smoothness(lemma, params))?;
    let mut rows = Vec::with_capacity(fields.len());
    for (id, field) in fields {
        let source = source_norm(&field, lemma, params)?;
        if source <= 0.0 {
            continue;
        }
        let field = field.scale(Complex64::new(1.0 / source, 0.0));
        let mult = MultiplierOperator::assemble(&field, params.k, params.l, grid)?.norm()?;
        rows.push(EmbeddingSample {
            sample_id: id,
            source_norm: 1.0,
            mult_norm: mult,
            ratio: mult,
        });
    }
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let product_constant = match lemma {
        EmbeddingLemma::H2 => Some(product_constant(params, grid, 20, 0x5EED)?),
        _ => None,
    };
    Ok(EmbeddingReport {
        lemma,
        params: *params,
        bandlimit: grid.bandlimit(),
        samples: rows,
        max_ratio,
        product_constant,
    })
}

/// `max ‖fg‖_l / (‖f‖_k ‖g‖_l)` over random band-limited pairs, with the
/// product computed exactly on the doubled band.
fn product_constant(
    params: &EmbeddingParams,
    grid: &TorusGrid,
    pairs: usize,
    seed: u64,
) -> Result<f64> {
    let band = grid.product_grid();
    let vectors = ProbeSet::gaussian(grid.size(), 2 * pairs, seed).into_vectors();
    let mut worst: f64 = 0.0;
    for pair in vectors.chunks(2) {
        let f = SpectralField::new(*grid, pair[0].iter().copied().collect())?;
        let g = SpectralField::new(*grid, pair[1].iter().copied().collect())?;
        let fg = pointwise_product(&f, &g.resample(band)?)?;
        let ratio =
            fg.sobolev_norm(params.l) / (f.sobolev_norm(params.k) * g.sobolev_norm(params.l));
        worst = worst.max(ratio);
    }
    Ok(worst)
}
