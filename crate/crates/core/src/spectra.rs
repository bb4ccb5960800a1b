//! Spectra of generalized sums, one-sided Hausdorff semidistances between
//! them, and convergence studies under mollification of the lower-order
//! coefficients.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::MollifierSpec;
use crate::error::{Error, Result};
use crate::formsum::{
    assemble_lower, build_generalized_sum, certify_relative_bound, lower_matrix, mollified,
    resolvent, CoercivityReport, GeneralizedSum, OperatorSpec, PrincipalPart,
    RelativeBoundCertificate,
};
use crate::grid::TorusGrid;
use crate::linalg::{
    c, hermitian_defect, hermitian_eigen, hermitian_eigenvalues, hermitian_part, scale_both,
    spectral_norm, CMatrix,
};
use crate::multipliers::compactness_proxy;

/// Largest accepted `‖S − UTU*‖_F / ‖S‖_F`.
pub const BACKWARD_TOL: f64 = 1e-9;
const HERMITIAN_TOL: f64 = 1e-12;

/// Rectangle `Re ∈ [re_min, re_max]`, `|Im| ≤ im_max` in which spectra are
/// compared.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_max: f64,
}

impl Default for Window {
    fn default() -> Self {
        Self {
            re_min: -10.0,
            re_max: 50.0,
            im_max: 25.0,
        }
    }
}

impl Window {
    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im.abs() <= self.im_max
    }
}

/// All eigenvalues of `S − ρ₀`, sorted by real then imaginary part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<Complex64>,
    pub window: Window,
    /// Shift that was removed.
    pub shift: f64,
    pub backward_error: f64,
    pub hermitian: bool,
}

impl SpectrumReport {
    pub fn windowed(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.eigenvalues
            .iter()
            .copied()
            .filter(|z| self.window.contains(*z))
    }

    pub fn lowest_real(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im\n");
        for z in &self.eigenvalues {
            let _ = writeln!(out, "{},{}", z.re, z.im);
        }
        out
    }
}

/// Hermitian eigensolve when `S` is Hermitian, complex Schur form otherwise.
pub fn compute_spectrum(sum: &GeneralizedSum, window: Window) -> Result<SpectrumReport> {
    spectrum_of(&sum.s, sum.principal.coercivity.shift, window)
}

pub fn spectrum_of(s: &CMatrix, shift: f64, window: Window) -> Result<SpectrumReport> {
    let scale = s.norm().max(f64::MIN_POSITIVE);
    let hermitian = hermitian_defect(s) <= HERMITIAN_TOL;
    let (mut eigenvalues, backward_error) = if hermitian {
        let h = hermitian_part(s);
        let (values, vectors) = hermitian_eigen(&h);
        let scaled = scale_both(&vectors, &vec![1.0; vectors.nrows()], &values);
        let err = (s * &vectors - scaled).norm() / scale;
        (values.into_iter().map(c).collect::<Vec<_>>(), err)
    } else {
        let schur = s
            .clone()
            .try_schur(f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Numeric("Schur iteration did not converge".into()))?;
        let (u, t) = schur.unpack();
        let err = (s - &u * &t * u.adjoint()).norm() / scale;
        ((0..t.nrows()).map(|i| t[(i, i)]).collect(), err)
    };
    if backward_error.is_nan() || backward_error > BACKWARD_TOL {
        return Err(Error::Numeric(format!(
            "eigensolve backward error {backward_error:e} exceeds {BACKWARD_TOL:e}"
        )));
    }
    for z in &mut eigenvalues {
        *z -= shift;
    }
    eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(SpectrumReport {
        eigenvalues,
        window,
        shift,
        backward_error,
        hermitian,
    })
}

/// `d_upper = sup_{λ ∈ σ(a) ∩ window} dist(λ, σ(b))` and
/// `d_lower = sup_{μ ∈ σ(b) ∩ window} dist(μ, σ(a))`. An empty windowed set
/// gives zero and raises its flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Semidistances {
    pub d_upper: f64,
    pub d_lower: f64,
    pub upper_empty: bool,
    pub lower_empty: bool,
}

pub fn semidistances(a: &SpectrumReport, b: &SpectrumReport, window: Window) -> Semidistances {
    let one_sided = |from: &[Complex64], to: &[Complex64]| -> Option<f64> {
        from.iter()
            .filter(|z| window.contains(**z))
            .map(|z| {
                to.iter()
                    .map(|w| (z - w).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .reduce(f64::max)
    };
    let up = one_sided(&a.eigenvalues, &b.eigenvalues);
    let low = one_sided(&b.eigenvalues, &a.eigenvalues);
    Semidistances {
        d_upper: up.unwrap_or(0.0),
        d_lower: low.unwrap_or(0.0),
        upper_empty: up.is_none(),
        lower_empty: low.is_none(),
    }
}

/// Settings of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyOptions {
    #[serde(default)]
    pub window: Window,
    /// Relative-bound target used for the Hausdorff shift.
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Resolvent point `z = −σ`; defaults to the leftmost sector reference
    /// point over all sums.
    #[serde(default)]
    pub reference: Option<f64>,
    #[serde(default)]
    pub compactness: CompactnessSettings,
}

fn default_eps() -> f64 {
    0.5
}

impl Default for StudyOptions {
    fn default() -> Self {
        Self {
            window: Window::default(),
            eps: default_eps(),
            reference: None,
            compactness: CompactnessSettings::default(),
        }
    }
}

/// Singular values of the `H^m`-weighted `Q` must drop below
/// `threshold·σ_max` by index `⌈fraction·dim⌉`; every lower term must have
/// `eps(N/2) ≤ tail_eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompactnessSettings {
    pub fraction: f64,
    pub threshold: f64,
    pub tail_eps: f64,
}

impl Default for CompactnessSettings {
    fn default() -> Self {
        Self {
            fraction: 0.25,
            threshold: 0.05,
            tail_eps: 0.1,
        }
    }
}

/// One mollifier of the schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub n: usize,
    pub h: f64,
    /// `‖Q − Q_n‖_{H^m → H^{−m}}`.
    pub q_norm_gap: f64,
    /// `‖(S_n + σ)^{-1} − (S + σ)^{-1}‖₂`.
    pub resolvent_diff: f64,
    pub d_upper: f64,
    pub d_lower: f64,
    pub upper_empty: bool,
    pub lower_empty: bool,
    /// `‖T₀^{-1/2}(Q − Q_n)T₀^{-1/2}‖₂`.
    pub middle_norm: f64,
    /// `c_Z = min Re W(Z_• + σT₀^{-1})` over the limit and this approximant.
    pub c_z: f64,
    /// `c_Z^{-2}·‖T₀^{-1/2}‖²·‖Q − Q_n‖_{m→−m}/c₁`.
    pub chain_bound: f64,
    pub chain_holds: bool,
    pub lowest_eigenvalue: f64,
}

/// `Applicable(holds)` or the reason the hypotheses fail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum LowerVerdict {
    Applicable { converges: bool },
    NotApplicable { reason: String },
}

impl LowerVerdict {
    pub fn converges(&self) -> Option<bool> {
        match self {
            Self::Applicable { converges } => Some(*converges),
            Self::NotApplicable { .. } => None,
        }
    }
}

/// Evidence for the symmetric, compact-perturbation hypotheses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemarkHypotheses {
    pub principal_defect: f64,
    pub compactness_ratio: f64,
    pub compactness_index: usize,
    pub worst_tail_eps: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub q_conv: bool,
    pub resolvent_conv: bool,
    pub upper_conv: bool,
    pub lower_conv: LowerVerdict,
    pub chain_holds: bool,
    pub q_strictly_decreasing: bool,
    pub resolvent_strictly_decreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub bandlimit: usize,
    pub dim: usize,
    pub shift: f64,
    pub window: Window,
    /// Resolvent point `z = −σ`.
    pub sigma: f64,
    pub coercivity: CoercivityReport,
    pub certificate: RelativeBoundCertificate,
    pub hausdorff_rho: f64,
    pub limit_lowest: f64,
    pub limit_sector: (f64, f64),
    pub hypotheses: RemarkHypotheses,
    pub rows: Vec<StudyRow>,
    pub verdicts: Verdicts,
}

impl ConvergenceReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,h,q_norm_gap,resolvent_diff,d_upper,d_lower\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.n, r.h, r.q_norm_gap, r.resolvent_diff, r.d_upper, r.d_lower
            );
        }
        out
    }
}

/// A sequence tends to zero on the schedule when it is negligible throughout,
/// or its last value has at least halved against the first and is the
/// smallest seen.
pub fn trend_to_zero(values: &[f64]) -> bool {
    const NEGLIGIBLE: f64 = 1e-12;
    if values.iter().all(|&v| v <= NEGLIGIBLE) {
        return true;
    }
    match (values.first(), values.last()) {
        (Some(&first), Some(&last)) => {
            let min = values.iter().copied().fold(f64::INFINITY, f64::min);
            last <= 0.5 * first && last <= min * (1.0 + 1e-9)
        }
        _ => false,
    }
}

pub fn strictly_decreasing(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] < w[0])
}

/// `σ_max(H^{-1/2} A H^{-1/2})`, the `H^m → H^{−m}` norm.
fn energy_norm(a: &CMatrix, h1: &[f64]) -> Result<f64> {
    let w: Vec<f64> = h1.iter().map(|x| x.powf(-0.5)).collect();
    spectral_norm(&scale_both(a, &w, &w))
}

fn c_z(sum: &GeneralizedSum, sigma: f64) -> f64 {
    hermitian_eigenvalues(&hermitian_part(&sum.shifted_z(sigma)))[0]
}

fn remark_hypotheses(
    principal: &PrincipalPart,
    spec: &OperatorSpec,
    q: &CMatrix,
    settings: CompactnessSettings,
) -> Result<RemarkHypotheses> {
    let grid = principal.grid;
    let principal_defect = hermitian_defect(&principal.matrix);
    let w: Vec<f64> = principal.h1.iter().map(|x| x.powf(-0.5)).collect();
    let proxy = compactness_proxy(
        &scale_both(q, &w, &w),
        settings.fraction,
        settings.threshold,
    );
    let worst_tail_eps = assemble_lower(spec, &grid)?.worst_tail_eps(grid.bandlimit());
    Ok(RemarkHypotheses {
        principal_defect,
        compactness_ratio: proxy.ratio,
        compactness_index: proxy.index,
        worst_tail_eps,
        holds: principal_defect <= 1e-9 && proxy.holds && worst_tail_eps <= settings.tail_eps,
    })
}

/// Builds `S` from the singular coefficients and `S_n` from each mollifier,
/// then tabulates the distances between them. Rows are computed in parallel
/// and reported in schedule order.
pub fn convergence_study(
    spec: &OperatorSpec,
    grid: &TorusGrid,
    schedule: &[MollifierSpec],
    options: &StudyOptions,
) -> Result<ConvergenceReport> {
    if schedule.is_empty() {
        return Err(Error::Precondition("mollifier schedule is empty".into()));
    }
    let principal = Arc::new(PrincipalPart::new(spec, grid)?);
    let q = lower_matrix(spec, grid)?;
    let certificate = certify_relative_bound(&q, &principal.h1, options.eps)?;
    let limit = build_generalized_sum(&principal, q, Some(&certificate))?;
    let hypotheses = remark_hypotheses(&principal, spec, &limit.q, options.compactness)?;

    let approximants = schedule
        .par_iter()
        .map(|m| {
            let qn = lower_matrix(&mollified(spec, m, grid)?, grid)?;
            build_generalized_sum(&principal, qn, None)
        })
        .collect::<Result<Vec<_>>>()?;

    let sigma = match options.reference {
        Some(z) => -z,
        None => -std::iter::once(&limit)
            .chain(&approximants)
            .map(|s| s.sector.reference_point())
            .fold(f64::INFINITY, f64::min),
    };
    let window = options.window;
    let limit_spectrum = compute_spectrum(&limit, window)?;
    let limit_resolvent = resolvent(&limit.s, c(-sigma))?;
    let limit_cz = c_z(&limit, sigma);
    let inv_sqrt_sq = principal.inv_sqrt_norm_sq();
    let c1 = principal.coercivity.c1;

    let rows = schedule
        .par_iter()
        .zip(&approximants)
        .enumerate()
        .map(|(i, (m, sum))| {
            let diff = &limit.q - &sum.q;
            let q_norm_gap = energy_norm(&diff, &principal.h1)?;
            let middle_norm = spectral_norm(&principal.congruence(&diff))?;
            let resolvent_diff =
                spectral_norm(&(resolvent(&sum.s, c(-sigma))? - &limit_resolvent))?;
            let cz = limit_cz.min(c_z(sum, sigma));
            if cz <= 0.0 {
                return Err(Error::InSpectrum {
                    point: format!("{}", -sigma),
                    detail: format!("Re W(Z + σT₀^-1) reaches {cz:e}"),
                });
            }
            let chain_bound = inv_sqrt_sq * q_norm_gap / (cz * cz * c1);
            let spectrum = compute_spectrum(sum, window)?;
            let d = semidistances(&spectrum, &limit_spectrum, window);
            Ok(StudyRow {
                n: i + 1,
                h: m.parameter(),
                q_norm_gap,
                resolvent_diff,
                d_upper: d.d_upper,
                d_lower: d.d_lower,
                upper_empty: d.upper_empty,
                lower_empty: d.lower_empty,
                middle_norm,
                c_z: cz,
                chain_bound,
                chain_holds: resolvent_diff <= chain_bound + 1e-8,
                lowest_eigenvalue: spectrum.lowest_real(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let column = |f: fn(&StudyRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
    let gaps = column(|r| r.q_norm_gap);
    let diffs = column(|r| r.resolvent_diff);
    let lower_conv = if hypotheses.holds {
        LowerVerdict::Applicable {
            converges: trend_to_zero(&column(|r| r.d_lower)),
        }
    } else {
        LowerVerdict::NotApplicable {
            reason: hypothesis_failure(&hypotheses, options.compactness),
        }
    };
    let verdicts = Verdicts {
        q_conv: trend_to_zero(&gaps),
        resolvent_conv: trend_to_zero(&diffs),
        upper_conv: trend_to_zero(&column(|r| r.d_upper)),
        lower_conv,
        chain_holds: rows.iter().all(|r| r.chain_holds),
        q_strictly_decreasing: strictly_decreasing(&gaps),
        resolvent_strictly_decreasing: strictly_decreasing(&diffs),
    };
    Ok(ConvergenceReport {
        bandlimit: grid.bandlimit(),
        dim: grid.dim(),
        shift: spec.shift,
        window,
        sigma,
        coercivity: principal.coercivity,
        certificate,
        hausdorff_rho: limit.hausdorff.map_or(0.0, |h| h.rho),
        limit_lowest: limit_spectrum.lowest_real(),
        limit_sector: (limit.sector.vertex, limit.sector.half_angle),
        hypotheses,
        rows,
        verdicts,
    })
}

fn hypothesis_failure(h: &RemarkHypotheses, s: CompactnessSettings) -> String {
    let mut reasons = Vec::new();
    if h.principal_defect > 1e-9 {
        reasons.push(format!(
            "principal part not Hermitian (defect {:e})",
            h.principal_defect
        ));
    }
    if h.compactness_ratio > s.threshold {
        reasons.push(format!(
            "weighted Q singular values decay to only {:.3} of the maximum by index {}",
            h.compactness_ratio, h.compactness_index
        ));
    }
    if h.worst_tail_eps > s.tail_eps {
        reasons.push(format!(
            "lower-order tail bound eps(N/2) = {:.3} exceeds {}",
            h.worst_tail_eps, s.tail_eps
        ));
    }
    reasons.join("; ")
}

/// Per-row evidence of two-sided convergence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricCompactVerdict {
    pub hypotheses: RemarkHypotheses,
    pub verdict: LowerVerdict,
    /// `(n, d_upper, d_lower)`.
    pub evidence: Vec<(usize, f64, f64)>,
}

/// Two-sided convergence under the symmetric-principal, compact-perturbation
/// hypotheses. When they fail the verdict is not applicable; nothing is
/// asserted.
pub fn symmetric_compact_check(report: &ConvergenceReport) -> SymmetricCompactVerdict {
    let evidence: Vec<_> = report
        .rows
        .iter()
        .map(|r| (r.n, r.d_upper, r.d_lower))
        .collect();
    let verdict = match &report.verdicts.lower_conv {
        LowerVerdict::Applicable { converges } => LowerVerdict::Applicable {
            converges: *converges && report.verdicts.upper_conv,
        },
        other => other.clone(),
    };
    SymmetricCompactVerdict {
        hypotheses: report.hypotheses.clone(),
        verdict,
        evidence,
    }
}
