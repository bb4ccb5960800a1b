use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coercivity::{sobolev_gram, verify_garding, CoercivityReport};
use super::operator::{principal_form, OperatorSpec};
use super::sector::{sector_estimate, SectorEstimate, SECTOR_ANGLES};
use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::linalg::{
    angle_grid, c, hermitian_defect, hermitian_eigenvalues, hermitian_part, inverse_checked,
    inverse_sqrt, is_diagonal, lambda_max, lambda_min, quadratic_form, scale_both, spectral_norm,
    CMatrix,
};
use crate::probes::{ProbeSet, PROBE_COUNT, PROBE_SEED};

const CERTIFICATE_TOL: f64 = 1e-9;

/// `|(Qf,f)| ≤ ε(f,f)_m + M(ε)(f,f)` on the trial space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeBoundCertificate {
    pub eps: f64,
    pub m_eps: f64,
    /// Largest `|(Qf,f)| − ε(f,f)_m − M(f,f)` over the probes.
    pub residual: f64,
    pub probes: usize,
}

/// `M(ε) = max_θ λ_max(Re(e^{iθ}Q) − εH)` clipped at zero. Hermitian `Q` needs
/// only `θ ∈ {0, π}`. Otherwise the 64-angle grid underestimates `|(Qf,f)|` by
/// at most `sec(π/64)`, which is absorbed by evaluating at `ε cos(π/64)` and
/// scaling the maximum by `sec(π/64)`.
pub fn certify_relative_bound(
    q: &CMatrix,
    h1: &[f64],
    eps: f64,
) -> Result<RelativeBoundCertificate> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Precondition(format!(
            "ε must lie in (0, 1), got {eps}"
        )));
    }
    let d = q.nrows();
    if h1.len() != d || q.ncols() != d {
        return Err(Error::Dimension(format!(
            "Q is {}x{}, Gram has {} entries",
            q.nrows(),
            q.ncols(),
            h1.len()
        )));
    }
    let shifted_max = |rotated: &CMatrix, e: f64| {
        let mut h = hermitian_part(rotated);
        for i in 0..d {
            h[(i, i)] -= c(e * h1[i]);
        }
        lambda_max(&h)
    };
    let m_eps = if hermitian_defect(q) <= 1e-12 {
        shifted_max(q, eps).max(shifted_max(&-q, eps))
    } else {
        let half_step = std::f64::consts::PI / SECTOR_ANGLES as f64;
        let angles: Vec<f64> = angle_grid(SECTOR_ANGLES).collect();
        let worst = angles
            .par_iter()
            .map(|&t| shifted_max(&(q * Complex64::from_polar(1.0, t)), eps * half_step.cos()))
            .reduce(|| f64::NEG_INFINITY, f64::max);
        worst / half_step.cos()
    }
    .max(0.0);

    let probes = ProbeSet::gaussian(d, PROBE_COUNT, PROBE_SEED);
    let residual = probes
        .iter()
        .map(|f| {
            let energy: f64 = f.iter().zip(h1).map(|(z, w)| z.norm_sqr() * w).sum();
            quadratic_form(q, f).norm() - eps * energy - m_eps * f.norm_squared()
        })
        .fold(f64::NEG_INFINITY, f64::max);
    if residual > CERTIFICATE_TOL {
        return Err(Error::Internal(format!(
            "relative-bound certificate violated by {residual:e} at ε = {eps}"
        )));
    }
    Ok(RelativeBoundCertificate {
        eps,
        m_eps,
        residual,
        probes: probes.len(),
    })
}

/// Shifted principal matrix `T` with the data every sum over it shares.
#[derive(Debug, Clone)]
pub struct PrincipalPart {
    pub grid: TorusGrid,
    pub m: u32,
    pub matrix: CMatrix,
    /// `T₀ = (T + T*)/2`.
    pub t0: CMatrix,
    pub t0_inv_sqrt: CMatrix,
    /// `T₀^{-1}`.
    pub t0_inv: CMatrix,
    /// Diagonal of `T₀^{-1/2}` when `T₀` is diagonal.
    diagonal: Option<Vec<f64>>,
    pub t0_min: f64,
    pub coercivity: CoercivityReport,
    /// `H^m` Gram diagonal.
    pub h1: Vec<f64>,
}

impl PrincipalPart {
    pub fn new(spec: &OperatorSpec, grid: &TorusGrid) -> Result<Self> {
        let unshifted = principal_form(spec, grid)?;
        let coercivity = verify_garding(&unshifted, spec.m, grid, spec.shift)?;
        let mut matrix = unshifted;
        for i in 0..grid.size() {
            matrix[(i, i)] += c(spec.shift);
        }
        Self::from_matrix(matrix, coercivity, spec.m, *grid)
    }

    pub fn from_matrix(
        matrix: CMatrix,
        coercivity: CoercivityReport,
        m: u32,
        grid: TorusGrid,
    ) -> Result<Self> {
        if matrix.nrows() != grid.size() || !matrix.is_square() {
            return Err(Error::Dimension(
                "principal matrix does not match the grid".into(),
            ));
        }
        let t0 = hermitian_part(&matrix);
        let t0_inv_sqrt = inverse_sqrt(&t0)?;
        let diagonal = is_diagonal(&t0_inv_sqrt).then(|| {
            (0..t0.nrows())
                .map(|i| t0_inv_sqrt[(i, i)].re)
                .collect::<Vec<_>>()
        });
        let t0_inv = &t0_inv_sqrt * &t0_inv_sqrt;
        let t0_min = lambda_min(&t0);
        Ok(Self {
            t0_inv,
            diagonal,
            h1: sobolev_gram(&grid, m),
            grid,
            m,
            matrix,
            t0,
            t0_inv_sqrt,
            t0_min,
            coercivity,
        })
    }

    /// `‖T₀^{-1/2}‖² = 1/λ_min(T₀)`.
    pub fn inv_sqrt_norm_sq(&self) -> f64 {
        1.0 / self.t0_min
    }

    /// `(T₀^{-1/2} X T₀^{-1/2})`.
    pub fn congruence(&self, x: &CMatrix) -> CMatrix {
        match &self.diagonal {
            Some(d) => scale_both(x, d, d),
            None => &self.t0_inv_sqrt * x * &self.t0_inv_sqrt,
        }
    }
}

/// Shift `ρ` separating the numerical range of `Z + ρ` from zero by `c₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HausdorffShift {
    pub rho: f64,
    /// Required lower bound `c₁`.
    pub bound: f64,
    /// `λ_min(Re(Z + ρ))`.
    pub exact_min: f64,
    /// Smallest `Re((Z + ρ)y, y)` over unit probes.
    pub probe_min: f64,
}

/// `S = T +̃ Q` on the trial space.
#[derive(Debug, Clone)]
pub struct GeneralizedSum {
    pub principal: Arc<PrincipalPart>,
    pub q: CMatrix,
    pub s: CMatrix,
    /// `T₀^{-1/2} S T₀^{-1/2}`.
    pub z: CMatrix,
    pub sector: SectorEstimate,
    pub hausdorff: Option<HausdorffShift>,
}

/// Assembles `S`, `Z` and the sector. With a certificate, the shift
/// `ρ = c₁ − (1 − ε/c₁ − M(ε)/λ_min(T₀))` (clipped at 0) is derived from
/// `Re(Zy,y) ≥ (1 − ε/c₁ − M/λ_min T₀)‖y‖²` and checked exactly and on probes.
pub fn build_generalized_sum(
    principal: &Arc<PrincipalPart>,
    q: CMatrix,
    certificate: Option<&RelativeBoundCertificate>,
) -> Result<GeneralizedSum> {
    if q.shape() != principal.matrix.shape() {
        return Err(Error::Dimension(format!(
            "Q has shape {:?}, T has {:?}",
            q.shape(),
            principal.matrix.shape()
        )));
    }
    let s = &principal.matrix + &q;
    let z = principal.congruence(&s);
    let sector = sector_estimate(&s)?;
    let hausdorff = certificate
        .map(|cert| hausdorff_shift(principal, &z, cert))
        .transpose()?;
    Ok(GeneralizedSum {
        principal: Arc::clone(principal),
        q,
        s,
        z,
        sector,
        hausdorff,
    })
}

fn hausdorff_shift(
    principal: &PrincipalPart,
    z: &CMatrix,
    cert: &RelativeBoundCertificate,
) -> Result<HausdorffShift> {
    let c1 = principal.coercivity.c1;
    let floor = 1.0 - cert.eps / c1 - cert.m_eps / principal.t0_min;
    let rho = (c1 - floor).max(0.0);
    let mut shifted = hermitian_part(z);
    for i in 0..z.nrows() {
        shifted[(i, i)] += c(rho);
    }
    let exact_min = hermitian_eigenvalues(&shifted)[0];
    let probe_min = ProbeSet::gaussian(z.nrows(), PROBE_COUNT, PROBE_SEED)
        .iter()
        .map(|y| quadratic_form(&shifted, y).re)
        .fold(f64::INFINITY, f64::min);
    if exact_min.min(probe_min) < c1 - CERTIFICATE_TOL {
        return Err(Error::Internal(format!(
            "Re(Z + ρ) ≥ c₁ fails: λ_min = {exact_min:e}, probes {probe_min:e}, c₁ = {c1:e}"
        )));
    }
    Ok(HausdorffShift {
        rho,
        bound: c1,
        exact_min,
        probe_min,
    })
}

impl GeneralizedSum {
    pub fn grid(&self) -> &TorusGrid {
        &self.principal.grid
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        hermitian_defect(&self.s) <= tol
    }

    /// `(S + σ)^{-1}` written through `Z`:
    /// `T₀^{-1/2}(Z + σT₀^{-1})^{-1}T₀^{-1/2}`. Returns the middle inverse.
    pub fn shifted_z_inverse(&self, sigma: f64) -> Result<CMatrix> {
        inverse_checked(&self.shifted_z(sigma), 1e-9).map_err(|e| Error::InSpectrum {
            point: format!("{}", -sigma),
            detail: e.to_string(),
        })
    }

    /// `Z + σT₀^{-1}`.
    pub fn shifted_z(&self, sigma: f64) -> CMatrix {
        &self.z + &self.principal.t0_inv * c(sigma)
    }
}

/// Both sides of
/// `(S_n+σ)^{-1} − (S+σ)^{-1} = T₀^{-1/2}(Z_n+σT₀^{-1})^{-1}[T₀^{-1/2}(Q−Q_n)T₀^{-1/2}](Z+σT₀^{-1})^{-1}T₀^{-1/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolventIdentity {
    pub sigma: f64,
    pub lhs_norm: f64,
    pub residual: f64,
    /// `residual / ‖LHS‖`, zero when both vanish.
    pub relative: f64,
}

/// Checks the factorization for `approx = T + Q_n` against `limit = T + Q`
/// at the resolvent point `z = −σ`.
pub fn verify_resolvent_identity(
    approx: &GeneralizedSum,
    limit: &GeneralizedSum,
    sigma: f64,
) -> Result<ResolventIdentity> {
    if approx.principal.matrix != limit.principal.matrix {
        return Err(Error::Precondition(
            "resolvent identity needs the same principal part".into(),
        ));
    }
    let z = Complex64::new(-sigma, 0.0);
    let lhs = super::resolvent(&approx.s, z)? - super::resolvent(&limit.s, z)?;
    let p = &limit.principal;
    let middle = p.congruence(&(&limit.q - &approx.q));
    let rhs = &p.t0_inv_sqrt
        * approx.shifted_z_inverse(sigma)?
        * middle
        * limit.shifted_z_inverse(sigma)?
        * &p.t0_inv_sqrt;
    let lhs_norm = spectral_norm(&lhs)?;
    let residual = spectral_norm(&(&lhs - rhs))?;
    let relative = if lhs_norm > 0.0 {
        residual / lhs_norm
    } else if residual == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(ResolventIdentity {
        sigma,
        lhs_norm,
        residual,
        relative,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::{mollify, CoefficientSpec, MollifierSpec};
    use crate::formsum::{assemble_lower, FormTerm};
    use crate::grid::MultiIndex;
    use crate::linalg::{eigenvalues, CVector};
    use crate::multipliers::convolution_matrix;
    use std::f64::consts::PI;

    fn laplacian(n: usize) -> Arc<PrincipalPart> {
        let spec = OperatorSpec::laplacian_power(1, 1);
        Arc::new(PrincipalPart::new(&spec, &spec.grid(n).unwrap()).unwrap())
    }

    fn delta_q(grid: &TorusGrid, weight: f64) -> CMatrix {
        CMatrix::from_element(grid.size(), grid.size(), c(weight / (2.0 * PI)))
    }

    #[test]
    fn scalar_and_zero_certificates() {
        let g = TorusGrid::new(1, 6).unwrap();
        let h1 = sobolev_gram(&g, 1);
        let zero = CMatrix::zeros(g.size(), g.size());
        assert_eq!(certify_relative_bound(&zero, &h1, 0.5).unwrap().m_eps, 0.0);
        let v0 = Complex64::new(0.6, 0.8);
        let q = CMatrix::identity(g.size(), g.size()) * v0;
        for eps in [0.1, 0.5, 0.9] {
            let cert = certify_relative_bound(&q, &h1, eps).unwrap();
            assert!(cert.m_eps <= v0.norm() + 1e-12);
            assert!(cert.m_eps >= (v0.norm() - eps).max(0.0) - 1e-12);
        }
        assert!(certify_relative_bound(&q, &h1, 1.0).is_err());
    }

    #[test]
    fn delta_certificate_grows_as_eps_shrinks() {
        let g = TorusGrid::new(1, 64).unwrap();
        let h1 = sobolev_gram(&g, 1);
        let q = delta_q(&g, 1.0);
        let values: Vec<f64> = [0.5, 0.25, 0.1]
            .iter()
            .map(|&e| certify_relative_bound(&q, &h1, e).unwrap().m_eps)
            .collect();
        assert!(values[0] < values[1] && values[1] < values[2], "{values:?}");
    }

    /// `M(ε)` for `Q = (2π)^{-1}𝟙𝟙*` is the root `μ` of the secular equation
    /// `(2π)^{-1} Σ 1/(μ + ε(1+j²)) = 1`.
    #[test]
    fn delta_certificate_matches_secular_root() {
        let g = TorusGrid::new(1, 64).unwrap();
        let h1 = sobolev_gram(&g, 1);
        let eps = 0.25;
        let f = |mu: f64| h1.iter().map(|w| 1.0 / (mu + eps * w)).sum::<f64>() / (2.0 * PI) - 1.0;
        let (mut lo, mut hi) = (1e-9, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let m = certify_relative_bound(&delta_q(&g, 1.0), &h1, eps)
            .unwrap()
            .m_eps;
        assert!((m - lo).abs() < 1e-9, "{m} vs {lo}");
    }

    #[test]
    fn zero_perturbation_gives_identity_z() {
        let p = laplacian(8);
        let sum = build_generalized_sum(&p, CMatrix::zeros(17, 17), None).unwrap();
        assert_eq!(sum.s, p.matrix);
        assert!((&sum.z - CMatrix::identity(17, 17)).norm() < 1e-13);
    }

    #[test]
    fn rank_one_z_algebra() {
        let p = laplacian(16);
        let g = p.grid;
        let weight = -1.5;
        let sum = build_generalized_sum(&p, delta_q(&g, weight), None).unwrap();
        let v = CVector::from_fn(g.size(), |i, _| c(g.bessel_base(i).powf(-0.5)));
        let expected =
            CMatrix::identity(g.size(), g.size()) + &v * v.adjoint() * c(weight / (2.0 * PI));
        assert!((&sum.z - expected).norm() < 1e-13);
    }

    #[test]
    fn hausdorff_shift_separates_numerical_range() {
        let p = laplacian(32);
        let q = delta_q(&p.grid, -2.0);
        for eps in [0.5, 0.25] {
            let cert = certify_relative_bound(&q, &p.h1, eps).unwrap();
            let h = build_generalized_sum(&p, q.clone(), Some(&cert))
                .unwrap()
                .hausdorff
                .unwrap();
            assert!(h.exact_min >= h.bound - 1e-9 && h.probe_min >= h.exact_min - 1e-12);
        }
    }

    #[test]
    fn eigenvalues_inside_sector() {
        let spec = OperatorSpec {
            principal: vec![FormTerm::new(
                MultiIndex::new(vec![1]),
                MultiIndex::new(vec![1]),
                CoefficientSpec::smooth(crate::coefficients::SmoothFunction::sine(
                    1.0,
                    0.5,
                    vec![1],
                )),
            )],
            ..OperatorSpec::laplacian_power(1, 1)
        }
        .with_lower(FormTerm::new(
            MultiIndex::new(vec![1]),
            MultiIndex::zero(1),
            CoefficientSpec::weighted_delta(vec![0.5], Complex64::new(0.0, 1.0)),
        ));
        let g = spec.grid(24).unwrap();
        let p = Arc::new(PrincipalPart::new(&spec, &g).unwrap());
        let sum =
            build_generalized_sum(&p, assemble_lower(&spec, &g).unwrap().matrix, None).unwrap();
        assert!(sum.sector.half_angle < PI / 2.0);
        for ev in eigenvalues(&sum.s).unwrap() {
            assert!(
                sum.sector.contains(ev, 1e-9),
                "{ev} outside {:?}",
                sum.sector
            );
        }
    }

    #[test]
    fn identity_with_equal_perturbations_is_exact() {
        let p = laplacian(8);
        let q = delta_q(&p.grid, 1.0);
        let a = build_generalized_sum(&p, q.clone(), None).unwrap();
        let r = verify_resolvent_identity(&a, &a, 2.0).unwrap();
        assert_eq!(r.residual, 0.0);
        assert_eq!(r.relative, 0.0);
    }

    #[test]
    fn diagonal_identity_closed_form() {
        let p = laplacian(16);
        let d = p.grid.size();
        let n = 3.0;
        let limit = build_generalized_sum(&p, CMatrix::zeros(d, d), None).unwrap();
        let approx = build_generalized_sum(&p, CMatrix::identity(d, d) * c(1.0 / n), None).unwrap();
        let sigma = 0.5;
        let r = verify_resolvent_identity(&approx, &limit, sigma).unwrap();
        // (λ + 1/n + σ)^{-1} − (λ + σ)^{-1} with λ = j² + 1, largest at j = 0
        let exact = 1.0 / (1.0 + sigma) - 1.0 / (1.0 + 1.0 / n + sigma);
        assert!((r.lhs_norm - exact).abs() < 1e-14);
        assert!(r.relative < 1e-10, "{r:?}");
    }

    #[test]
    fn mollified_delta_identity() {
        let p = laplacian(32);
        let g = p.grid;
        let spec = CoefficientSpec::delta(vec![0.0]);
        let limit = build_generalized_sum(&p, delta_q(&g, -2.0), None).unwrap();
        let moll = mollify(
            &spec,
            &MollifierSpec::Gaussian { h: 0.25 },
            &g.product_grid(),
        )
        .unwrap();
        let qn = convolution_matrix(&moll, &g).unwrap() * c(-2.0);
        let approx = build_generalized_sum(&p, qn, None).unwrap();
        let r =
            verify_resolvent_identity(&approx, &limit, -limit.sector.reference_point()).unwrap();
        assert!(r.relative < 1e-10, "{r:?}");
    }
}
