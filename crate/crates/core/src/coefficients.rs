//! Coefficient distributions, their Fourier realizations, mollifiers,
//! `H_p^γ` norms and tensor products.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{apply_bessel, SpectralField};
use crate::grid::TorusGrid;

fn one() -> Complex64 {
    Complex64::ONE
}

fn is_one(z: &Complex64) -> bool {
    *z == Complex64::ONE
}

/// Symbolic description of a coefficient `c_{αβ}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(flatten)]
    pub kind: CoefficientKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum CoefficientKind {
    /// `w·δ(x − x₀)`.
    Delta {
        x0: Vec<f64>,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        weight: Complex64,
    },
    /// `w·D^r δ(x − x₀)` along `axis`, with `D = i∂`.
    DeltaDerivative {
        x0: Vec<f64>,
        order: u32,
        #[serde(default)]
        axis: usize,
        #[serde(default = "one", skip_serializing_if = "is_one")]
        weight: Complex64,
    },
    FourierTable {
        field: SpectralField,
    },
    /// A trigonometric function, realized by sampling and projecting.
    SmoothSamples {
        function: SmoothFunction,
    },
    /// `φ(x)ψ(y)` on `T²` from two one-dimensional factors; `psi_sup`
    /// records `‖ψ‖_∞`.
    TensorProduct {
        phi: Box<CoefficientSpec>,
        psi: Box<CoefficientSpec>,
        psi_sup: f64,
    },
}

/// `offset + Σ a_k trig_k(ν_k·x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothFunction {
    #[serde(default)]
    pub offset: Complex64,
    #[serde(default)]
    pub terms: Vec<TrigTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub kind: TrigKind,
    pub amplitude: Complex64,
    pub freq: Vec<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrigKind {
    Sin,
    Cos,
}

impl SmoothFunction {
    pub fn constant(value: Complex64) -> Self {
        Self {
            offset: value,
            terms: Vec::new(),
        }
    }

    /// `offset + amplitude · sin(freq·x)`.
    pub fn sine(offset: f64, amplitude: f64, freq: Vec<i64>) -> Self {
        Self {
            offset: Complex64::new(offset, 0.0),
            terms: vec![TrigTerm {
                kind: TrigKind::Sin,
                amplitude: Complex64::new(amplitude, 0.0),
                freq,
            }],
        }
    }

    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.offset
            + self
                .terms
                .iter()
                .map(|t| {
                    let phase: f64 = t.freq.iter().zip(x).map(|(&k, &xi)| k as f64 * xi).sum();
                    t.amplitude
                        * match t.kind {
                            TrigKind::Sin => phase.sin(),
                            TrigKind::Cos => phase.cos(),
                        }
                })
                .sum::<Complex64>()
    }

    fn dimension(&self) -> Option<usize> {
        self.terms.first().map(|t| t.freq.len())
    }
}

impl CoefficientSpec {
    pub fn new(kind: CoefficientKind) -> Self {
        Self { label: None, kind }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn delta(x0: Vec<f64>) -> Self {
        Self::weighted_delta(x0, Complex64::ONE)
    }

    pub fn weighted_delta(x0: Vec<f64>, weight: Complex64) -> Self {
        Self::new(CoefficientKind::Delta { x0, weight })
    }

    pub fn delta_derivative(x0: Vec<f64>, order: u32) -> Self {
        Self::new(CoefficientKind::DeltaDerivative {
            x0,
            order,
            axis: 0,
            weight: Complex64::ONE,
        })
    }

    pub fn table(field: SpectralField) -> Self {
        Self::new(CoefficientKind::FourierTable { field })
    }

    pub fn smooth(function: SmoothFunction) -> Self {
        Self::new(CoefficientKind::SmoothSamples { function })
    }

    pub fn constant(value: Complex64) -> Self {
        Self::smooth(SmoothFunction::constant(value))
    }

    /// Number of variables, `None` when any dimension is accepted.
    pub fn dimension(&self) -> Option<usize> {
        match &self.kind {
            CoefficientKind::Delta { x0, .. } | CoefficientKind::DeltaDerivative { x0, .. } => {
                Some(x0.len())
            }
            CoefficientKind::FourierTable { field } => Some(field.grid().dim()),
            CoefficientKind::SmoothSamples { function } => function.dimension(),
            CoefficientKind::TensorProduct { .. } => Some(2),
        }
    }

    /// Whether the realization is an `L_∞` function rather than a singular
    /// distribution.
    pub fn is_bounded(&self) -> bool {
        match &self.kind {
            CoefficientKind::Delta { .. } | CoefficientKind::DeltaDerivative { .. } => false,
            CoefficientKind::FourierTable { .. } | CoefficientKind::SmoothSamples { .. } => true,
            CoefficientKind::TensorProduct { phi, psi, .. } => phi.is_bounded() && psi.is_bounded(),
        }
    }

    pub fn name(&self) -> String {
        if let Some(label) = &self.label {
            return label.clone();
        }
        match &self.kind {
            CoefficientKind::Delta { .. } => "delta".into(),
            CoefficientKind::DeltaDerivative { order, .. } => format!("delta_derivative_{order}"),
            CoefficientKind::FourierTable { .. } => "fourier_table".into(),
            CoefficientKind::SmoothSamples { .. } => "smooth".into(),
            CoefficientKind::TensorProduct { phi, psi, .. } => {
                format!("{}⊗{}", phi.name(), psi.name())
            }
        }
    }
}

fn check_dimension(spec: &CoefficientSpec, grid: &TorusGrid) -> Result<()> {
    match spec.dimension() {
        Some(d) if d != grid.dim() => Err(Error::Dimension(format!(
            "coefficient '{}' has {d} variables but the torus has dimension {}",
            spec.name(),
            grid.dim()
        ))),
        _ => Ok(()),
    }
}

/// Band-limited Fourier coefficients of `spec` on `grid`.
pub fn realize(spec: &CoefficientSpec, grid: &TorusGrid) -> Result<SpectralField> {
    check_dimension(spec, grid)?;
    let scale = grid.basis_scale();
    match &spec.kind {
        CoefficientKind::Delta { x0, weight } => {
            let coeffs = grid
                .modes()
                .map(|j| weight * scale * Complex64::cis(-phase(j, x0)))
                .collect();
            SpectralField::new(*grid, coeffs)
        }
        CoefficientKind::DeltaDerivative {
            x0,
            order,
            axis,
            weight,
        } => {
            if *axis >= grid.dim() {
                return Err(Error::Dimension(format!(
                    "derivative axis {axis} on a {}-dimensional torus",
                    grid.dim()
                )));
            }
            let coeffs = grid
                .modes()
                .map(|j| {
                    weight
                        * scale
                        * Complex64::cis(-phase(j, x0))
                        * (-j[*axis] as f64).powi(*order as i32)
                })
                .collect();
            SpectralField::new(*grid, coeffs)
        }
        CoefficientKind::FourierTable { field } => field.resample(*grid),
        CoefficientKind::SmoothSamples { function } => {
            // Exact band projection of the trigonometric polynomial; the
            // equispaced samples of it would reproduce the same table up to
            // rounding.
            if let Some(t) = function.terms.iter().find(|t| t.freq.len() != grid.dim()) {
                return Err(Error::Dimension(format!(
                    "trigonometric term with frequency {:?} on a {}-dimensional torus",
                    t.freq,
                    grid.dim()
                )));
            }
            let mut coeffs = vec![Complex64::ZERO; grid.size()];
            let mut add = |mode: [i64; 2], value: Complex64| {
                if let Some(i) = grid.index_of(mode) {
                    coeffs[i] += value / scale;
                }
            };
            add([0, 0], function.offset);
            for term in &function.terms {
                let mut nu = [0i64; 2];
                nu[..term.freq.len()].copy_from_slice(&term.freq);
                let half = term.amplitude * 0.5;
                let (plus, minus) = match term.kind {
                    TrigKind::Cos => (half, half),
                    TrigKind::Sin => (
                        half * Complex64::new(0.0, -1.0),
                        half * Complex64::new(0.0, 1.0),
                    ),
                };
                add(nu, plus);
                add([-nu[0], -nu[1]], minus);
            }
            SpectralField::new(*grid, coeffs)
        }
        CoefficientKind::TensorProduct { phi, psi, .. } => {
            if grid.dim() != 2 {
                return Err(Error::Dimension("tensor products live on T²".into()));
            }
            let line = TorusGrid::new(1, grid.bandlimit())?;
            let a = realize(phi, &line)?;
            let b = realize(psi, &line)?;
            let coeffs = grid
                .modes()
                .map(|[j0, j1]| a.coeff([j0, 0]) * b.coeff([j1, 0]))
                .collect();
            SpectralField::new(*grid, coeffs)
        }
    }
}

fn phase(j: [i64; 2], x0: &[f64]) -> f64 {
    j.iter().zip(x0).map(|(&k, &x)| k as f64 * x).sum()
}

/// Smoothing by Fourier-mode damping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MollifierSpec {
    /// Fejér means: `Π (1 − |jᵢ|/(M+1))₊`.
    Fejer { cutoff: u64 },
    /// Heat-kernel damping `e^{−h²|j|²}`.
    Gaussian { h: f64 },
}

impl MollifierSpec {
    pub fn damping(&self, mode: [i64; 2]) -> f64 {
        match *self {
            MollifierSpec::Fejer { cutoff } => mode
                .iter()
                .map(|&j| (1.0 - j.unsigned_abs() as f64 / (cutoff as f64 + 1.0)).max(0.0))
                .product(),
            MollifierSpec::Gaussian { h } => {
                let r2 = (mode[0] * mode[0] + mode[1] * mode[1]) as f64;
                (-h * h * r2).exp()
            }
        }
    }

    /// The schedule parameter reported in tables (`h`, or `1/(M+1)`).
    pub fn parameter(&self) -> f64 {
        match *self {
            MollifierSpec::Fejer { cutoff } => 1.0 / (cutoff as f64 + 1.0),
            MollifierSpec::Gaussian { h } => h,
        }
    }
}

/// `realize(spec)` with every mode damped by the mollifier.
pub fn mollify(
    spec: &CoefficientSpec,
    m: &MollifierSpec,
    grid: &TorusGrid,
) -> Result<SpectralField> {
    let field = realize(spec, grid)?;
    Ok(field.map_modes(|i, c| c * m.damping(grid.mode(i))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpNormRequest {
    pub gamma: f64,
    pub p: f64,
    /// Quadrature points per axis; defaults to `4N + 1`.
    #[serde(default)]
    pub quadrature: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LpNorm {
    pub value: f64,
    /// `|value(P) − value(2P + 1)|`; zero up to rounding for even integer `p`.
    pub quadrature_error: f64,
}

/// `‖(−Δ+1)^{γ/2} f‖_{L_p}` by the trapezoidal rule.
pub fn lp_sobolev_norm(field: &SpectralField, req: &LpNormRequest) -> Result<LpNorm> {
    if !(req.p > 1.0 && req.p.is_finite()) {
        return Err(Error::Precondition(format!(
            "p must lie in (1, ∞), got {}",
            req.p
        )));
    }
    let minimum = 4 * field.grid().bandlimit() + 1;
    let points = req.quadrature.unwrap_or(minimum);
    if points < minimum {
        return Err(Error::Precondition(format!(
            "quadrature size {points} below 4N+1 = {minimum}"
        )));
    }
    let lifted = apply_bessel(field, req.gamma);
    let value = lp_quadrature(&lifted, req.p, points);
    let refined = lp_quadrature(&lifted, req.p, 2 * points + 1);
    if !value.is_finite() || !refined.is_finite() {
        return Err(Error::Numeric("non-finite L_p quadrature".into()));
    }
    Ok(LpNorm {
        value,
        quadrature_error: (value - refined).abs(),
    })
}

fn lp_quadrature(field: &SpectralField, p: f64, points: usize) -> f64 {
    let cell = (2.0 * PI / points as f64).powi(field.grid().dim() as i32);
    let sum: f64 = field.sample(points).iter().map(|v| v.norm().powf(p)).sum();
    (sum * cell).powf(1.0 / p)
}

/// `φ(x)ψ(y)` from one-dimensional factors with `‖ψ‖_∞ ≤ psi_sup`.
pub fn tensorize(
    phi: &CoefficientSpec,
    psi: &CoefficientSpec,
    psi_sup: f64,
) -> Result<CoefficientSpec> {
    for (name, spec) in [("phi", phi), ("psi", psi)] {
        if spec.dimension().is_some_and(|d| d != 1) {
            return Err(Error::Dimension(format!(
                "{name} must depend on one variable (only p = q = 1 is supported)"
            )));
        }
    }
    if !psi.is_bounded() {
        return Err(Error::Precondition("psi must be an L_∞ function".into()));
    }
    if !(psi_sup.is_finite() && psi_sup >= 0.0) {
        return Err(Error::Precondition(format!("invalid sup bound {psi_sup}")));
    }
    Ok(CoefficientSpec::new(CoefficientKind::TensorProduct {
        phi: Box::new(phi.clone()),
        psi: Box::new(psi.clone()),
        psi_sup,
    }))
}

/// `max |f|` over a uniform grid sixteen times finer than the band.
pub fn sampled_sup(field: &SpectralField) -> f64 {
    field
        .sample(16 * field.grid().side())
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::sobolev_inner;
    use crate::probes::ProbeSet;

    fn grid1(n: usize) -> TorusGrid {
        TorusGrid::new(1, n).unwrap()
    }

    #[test]
    fn delta_table() {
        let f = realize(&CoefficientSpec::delta(vec![0.0]), &grid1(1)).unwrap();
        let expected = (2.0 * PI).powf(-0.5);
        for c in f.coeffs() {
            assert!((c - Complex64::new(expected, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn constant_realization() {
        let f = realize(&CoefficientSpec::constant(Complex64::ONE), &grid1(5)).unwrap();
        for ([j, _], c) in f.grid().modes().zip(f.coeffs()) {
            let expected = if j == 0 { (2.0 * PI).sqrt() } else { 0.0 };
            assert_eq!(*c, Complex64::new(expected, 0.0));
        }
    }

    /// `D δ` by differentiating the delta table mode-wise: `(−j) δ̂_j`.
    #[test]
    fn delta_derivative_table() {
        let g = grid1(4);
        let delta = realize(&CoefficientSpec::delta(vec![0.0]), &g).unwrap();
        let d = realize(&CoefficientSpec::delta_derivative(vec![0.0], 1), &g).unwrap();
        for ([j, _], (a, b)) in g.modes().zip(d.coeffs().iter().zip(delta.coeffs())) {
            assert!((a - b * (-j as f64)).norm() < 1e-15);
            assert!((d.coeff([j, 0]) + d.coeff([-j, 0])).norm() < 1e-15);
        }
    }

    #[test]
    fn sine_realization() {
        let f = realize(
            &CoefficientSpec::smooth(SmoothFunction::sine(1.0, 0.5, vec![1])),
            &grid1(6),
        )
        .unwrap();
        let s = (2.0 * PI).sqrt();
        assert!((f.coeff([0, 0]) - Complex64::new(s, 0.0)).norm() < 1e-12);
        // ½ sin x = (e^{ix} − e^{−ix}) / 4i
        assert!((f.coeff([1, 0]) - Complex64::new(0.0, -0.25 * s)).norm() < 1e-12);
        assert!((f.coeff([-1, 0]) - Complex64::new(0.0, 0.25 * s)).norm() < 1e-12);
        assert!(f.coeff([2, 0]).norm() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let g2 = TorusGrid::new(2, 3).unwrap();
        assert!(matches!(
            realize(&CoefficientSpec::delta(vec![0.0]), &g2),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn table_realization_is_linear() {
        let g = grid1(5);
        let v = ProbeSet::gaussian(g.size(), 2, 17).into_vectors();
        let a = SpectralField::new(g, v[0].iter().copied().collect()).unwrap();
        let b = SpectralField::new(g, v[1].iter().copied().collect()).unwrap();
        let z = Complex64::new(0.3, -1.2);
        let lhs = realize(&CoefficientSpec::table(a.scale(z).add(&b).unwrap()), &g).unwrap();
        let rhs = realize(&CoefficientSpec::table(a.clone()), &g)
            .unwrap()
            .scale(z)
            .add(&realize(&CoefficientSpec::table(b), &g).unwrap())
            .unwrap();
        assert!(lhs.sub(&rhs).unwrap().sobolev_norm(0.0) < 1e-13);
    }

    #[test]
    fn fejer_with_huge_cutoff_is_identity() {
        let g = grid1(16);
        let spec = CoefficientSpec::delta(vec![0.4]);
        let raw = realize(&spec, &g).unwrap();
        let m = mollify(&spec, &MollifierSpec::Fejer { cutoff: u64::MAX }, &g).unwrap();
        assert_eq!(raw, m);
    }

    #[test]
    fn wide_gaussian_keeps_only_the_mean() {
        let g = grid1(16);
        let spec = CoefficientSpec::delta(vec![0.0]);
        let mean = SpectralField::basis(g, [0, 0])
            .unwrap()
            .scale(Complex64::new((2.0 * PI).powf(-0.5), 0.0));
        let mut last = f64::INFINITY;
        for h in [1.0, 2.0, 4.0, 8.0] {
            let m = mollify(&spec, &MollifierSpec::Gaussian { h }, &g).unwrap();
            let gap = m.sub(&mean).unwrap().sobolev_norm(0.0);
            assert!(gap < last);
            last = gap;
        }
        assert!(last < 1e-25);
    }

    #[test]
    fn mollification_damps_every_mode() {
        let g = TorusGrid::new(2, 5).unwrap();
        let spec = CoefficientSpec::delta(vec![0.3, -1.0]);
        let raw = realize(&spec, &g).unwrap();
        for m in [
            MollifierSpec::Fejer { cutoff: 3 },
            MollifierSpec::Gaussian { h: 0.2 },
        ] {
            let smooth = mollify(&spec, &m, &g).unwrap();
            for (a, b) in smooth.coeffs().iter().zip(raw.coeffs()) {
                assert!(a.norm() <= b.norm() * (1.0 + 1e-15));
            }
        }
    }

    #[test]
    fn lp_norm_of_constant() {
        let g = grid1(4);
        let one = SpectralField::constant(g, Complex64::ONE);
        for p in [1.5, 2.0, 3.0, 6.0] {
            let got = lp_sobolev_norm(
                &one,
                &LpNormRequest {
                    gamma: 0.7,
                    p,
                    quadrature: None,
                },
            )
            .unwrap();
            assert!((got.value - (2.0 * PI).powf(1.0 / p)).abs() < 1e-12);
        }
    }

    #[test]
    fn lp_norm_p2_is_sobolev_norm() {
        let g = TorusGrid::new(2, 3).unwrap();
        let v = ProbeSet::gaussian(g.size(), 1, 5).into_vectors().remove(0);
        let f = SpectralField::new(g, v.iter().copied().collect()).unwrap();
        for gamma in [-1.0, 0.0, 1.5] {
            let got = lp_sobolev_norm(
                &f,
                &LpNormRequest {
                    gamma,
                    p: 2.0,
                    quadrature: None,
                },
            )
            .unwrap();
            let exact = sobolev_inner(&f, &f, gamma).unwrap().re.sqrt();
            assert!((got.value - exact).abs() < 1e-10 * exact);
        }
    }

    /// `∫|2(2π)^{-1/2} cos x|⁴ dx = 3/π`.
    #[test]
    fn lp_norm_of_cosine() {
        let g = grid1(3);
        let f = SpectralField::basis(g, [1, 0])
            .unwrap()
            .add(&SpectralField::basis(g, [-1, 0]).unwrap())
            .unwrap();
        let got = lp_sobolev_norm(
            &f,
            &LpNormRequest {
                gamma: 0.0,
                p: 4.0,
                quadrature: None,
            },
        )
        .unwrap();
        assert!((got.value - (3.0 / PI).powf(0.25)).abs() < 1e-12);
        assert!(got.quadrature_error < 1e-12);
        assert!(lp_sobolev_norm(
            &f,
            &LpNormRequest {
                gamma: 0.0,
                p: 1.0,
                quadrature: None
            }
        )
        .is_err());
        assert!(lp_sobolev_norm(
            &f,
            &LpNormRequest {
                gamma: 0.0,
                p: 3.0,
                quadrature: Some(5)
            }
        )
        .is_err());
    }

    #[test]
    fn lp_norm_monotone_in_gamma() {
        let g = grid1(6);
        let v = ProbeSet::gaussian(g.size(), 1, 8).into_vectors().remove(0);
        let f = SpectralField::new(g, v.iter().copied().collect()).unwrap();
        let mut last = 0.0;
        for gamma in [-2.0, -1.0, 0.0, 0.5, 1.0] {
            let v = lp_sobolev_norm(
                &f,
                &LpNormRequest {
                    gamma,
                    p: 4.0,
                    quadrature: None,
                },
            )
            .unwrap()
            .value;
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn tensor_examples() {
        let g2 = TorusGrid::new(2, 3).unwrap();
        let one = CoefficientSpec::constant(Complex64::ONE);
        let t = tensorize(&CoefficientSpec::delta(vec![0.0]), &one, 1.0).unwrap();
        let f = realize(&t, &g2).unwrap();
        let s = (2.0 * PI).powf(-0.5) * (2.0 * PI).sqrt();
        for [a, b] in g2.modes() {
            let expected = if b == 0 { s } else { 0.0 };
            assert!((f.coeff([a, b]) - Complex64::new(expected, 0.0)).norm() < 1e-12);
        }
        let ones = realize(&tensorize(&one, &one, 1.0).unwrap(), &g2).unwrap();
        let constant = SpectralField::constant(g2, Complex64::ONE);
        assert!(ones.sub(&constant).unwrap().sobolev_norm(0.0) < 1e-12);
        assert!(tensorize(&t, &one, 1.0).is_err());
        assert!(tensorize(&one, &CoefficientSpec::delta(vec![0.0]), 1.0).is_err());
    }

    #[test]
    fn json_tagged_union() {
        let spec: CoefficientSpec =
            serde_json::from_str(r#"{"variant":"delta","x0":[0.0]}"#).unwrap();
        assert_eq!(spec, CoefficientSpec::delta(vec![0.0]));
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(text, r#"{"variant":"delta","x0":[0.0]}"#);
        let m: MollifierSpec = serde_json::from_str(r#"{"kind":"gaussian","h":0.5}"#).unwrap();
        assert_eq!(m, MollifierSpec::Gaussian { h: 0.5 });
        let w: CoefficientSpec = serde_json::from_str(
            r#"{"variant":"delta","x0":[0.0],"weight":[-2.0,0.0],"label":"well"}"#,
        )
        .unwrap();
        assert_eq!(w.name(), "well");
    }
}
