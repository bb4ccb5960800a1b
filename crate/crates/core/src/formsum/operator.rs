use serde::{Deserialize, Serialize};

use crate::coefficients::{mollify, realize, CoefficientSpec, MollifierSpec};
use crate::error::{Error, Result};
use crate::grid::{MultiIndex, TorusGrid};
use crate::linalg::{c, scale_both, CMatrix};
use crate::multipliers::{
    convolution_matrix, derivative_symbols, relative_bound_curve, MultiplierOperator,
    RelativeBoundCurve,
};

fn default_shift() -> f64 {
    1.0
}

/// One summand `D^α c_{αβ} D^β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormTerm {
    pub alpha: MultiIndex,
    pub beta: MultiIndex,
    pub coeff: CoefficientSpec,
}

impl FormTerm {
    pub fn new(alpha: MultiIndex, beta: MultiIndex, coeff: CoefficientSpec) -> Self {
        Self { alpha, beta, coeff }
    }

    /// Matrix of `(c D^β u, D^α v)` in `L₂` coordinates:
    /// `S_α* C_c S_β` with the coefficient realized on the doubled band.
    fn matrix(&self, grid: &TorusGrid) -> Result<CMatrix> {
        let coeff = realize(&self.coeff, &grid.product_grid())?;
        let conv = convolution_matrix(&coeff, grid)?;
        let left = derivative_symbols(grid, &self.alpha)?;
        let right = derivative_symbols(grid, &self.beta)?;
        Ok(scale_both(&conv, &left, &right))
    }

    fn describe(&self) -> String {
        format!(
            "{} (α={:?}, β={:?})",
            self.coeff.name(),
            self.alpha.entries(),
            self.beta.entries()
        )
    }
}

/// `L = Σ D^α c_{αβ} D^β` of order `2m` on `Tⁿ`, with the shift `ρ₀` added
/// to the principal part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub m: u32,
    pub n: usize,
    pub principal: Vec<FormTerm>,
    #[serde(default)]
    pub lower: Vec<FormTerm>,
    #[serde(default = "default_shift")]
    pub shift: f64,
}

impl OperatorSpec {
    /// `−Δ + ρ₀` style principal part `Σ_{|α|=m} D^α D^α` with unit
    /// coefficients, no lower-order terms.
    pub fn laplacian_power(n: usize, m: u32) -> Self {
        let principal = MultiIndex::all_of_order(n, m)
            .into_iter()
            .map(|a| FormTerm::new(a.clone(), a, CoefficientSpec::constant(c(1.0))))
            .collect();
        Self {
            m,
            n,
            principal,
            lower: Vec::new(),
            shift: 1.0,
        }
    }

    pub fn with_lower(mut self, term: FormTerm) -> Self {
        self.lower.push(term);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::Precondition(
                "operator order parameter m must be ≥ 1".into(),
            ));
        }
        if !(self.shift >= 0.0 && self.shift.is_finite()) {
            return Err(Error::Precondition(format!(
                "shift must be ≥ 0, got {}",
                self.shift
            )));
        }
        if self.principal.is_empty() {
            return Err(Error::Precondition("principal part is empty".into()));
        }
        for term in self.principal.iter().chain(&self.lower) {
            if term.alpha.len() != self.n || term.beta.len() != self.n {
                return Err(Error::Dimension(format!(
                    "multi-indices of {} do not match n = {}",
                    term.describe(),
                    self.n
                )));
            }
            if term.alpha.order() > self.m || term.beta.order() > self.m {
                return Err(Error::Precondition(format!(
                    "{} exceeds order m = {}",
                    term.describe(),
                    self.m
                )));
            }
            if term.coeff.dimension().is_some_and(|d| d != self.n) {
                return Err(Error::Dimension(format!(
                    "coefficient {} does not live on a {}-torus",
                    term.describe(),
                    self.n
                )));
            }
        }
        for term in &self.principal {
            if term.alpha.order() != self.m || term.beta.order() != self.m {
                return Err(Error::Precondition(format!(
                    "principal term {} must have |α| = |β| = m",
                    term.describe()
                )));
            }
            if !term.coeff.is_bounded() {
                return Err(Error::Precondition(format!(
                    "principal coefficient {} is not an L_∞ function",
                    term.describe()
                )));
            }
        }
        for term in &self.lower {
            if term.alpha.order() + term.beta.order() >= 2 * self.m {
                return Err(Error::Precondition(format!(
                    "lower-order term {} must have |α|+|β| < 2m",
                    term.describe()
                )));
            }
        }
        Ok(())
    }

    pub fn grid(&self, bandlimit: usize) -> Result<TorusGrid> {
        TorusGrid::new(self.n, bandlimit)
    }
}

/// `Σ_{|α|=|β|=m} S_α* C_{c_{αβ}} S_β` without the shift.
pub fn principal_form(spec: &OperatorSpec, grid: &TorusGrid) -> Result<CMatrix> {
    spec.validate()?;
    check_grid(spec, grid)?;
    let mut t = CMatrix::zeros(grid.size(), grid.size());
    for term in &spec.principal {
        let coeff = realize(&term.coeff, &grid.product_grid())?;
        let samples = coeff.sample(4 * coeff.grid().bandlimit() + 1);
        if samples
            .iter()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::Precondition(format!(
                "principal coefficient {} has an unbounded realization",
                term.describe()
            )));
        }
        t += term.matrix(grid)?;
    }
    Ok(t)
}

/// Principal matrix `T` including the shift `ρ₀·I`.
pub fn assemble_principal(spec: &OperatorSpec, grid: &TorusGrid) -> Result<CMatrix> {
    let mut t = principal_form(spec, grid)?;
    for i in 0..grid.size() {
        t[(i, i)] += c(spec.shift);
    }
    Ok(t)
}

/// Perturbation matrix `Q` with one relative-bound curve per term.
#[derive(Debug, Clone)]
pub struct LowerPart {
    pub matrix: CMatrix,
    /// `(term label, k, l, curve)` with `k = m − |β|`, `l = m − |α|`.
    pub curves: Vec<(String, RelativeBoundCurve)>,
}

impl LowerPart {
    /// Largest `eps(N/2)` over all terms, the `M₀` tail indicator.
    pub fn worst_tail_eps(&self, bandlimit: usize) -> f64 {
        self.curves
            .iter()
            .filter_map(|(_, c)| c.eps_at(bandlimit / 2))
            .fold(0.0, f64::max)
    }
}

/// Cutoffs `0, N/8, N/4, N/2, N` (deduplicated).
pub fn default_cutoffs(bandlimit: usize) -> Vec<usize> {
    let mut cuts = vec![0, bandlimit / 8, bandlimit / 4, bandlimit / 2, bandlimit];
    cuts.dedup();
    cuts
}

/// `Q` alone, without the per-term curves.
pub fn lower_matrix(spec: &OperatorSpec, grid: &TorusGrid) -> Result<CMatrix> {
    spec.validate()?;
    check_grid(spec, grid)?;
    let mut q = CMatrix::zeros(grid.size(), grid.size());
    for term in &spec.lower {
        q += term.matrix(grid)?;
    }
    Ok(q)
}

/// The same operator with every lower-order coefficient replaced by its
/// mollification, realized on the doubled band of `grid`.
pub fn mollified(
    spec: &OperatorSpec,
    mollifier: &MollifierSpec,
    grid: &TorusGrid,
) -> Result<OperatorSpec> {
    let mut out = spec.clone();
    for term in &mut out.lower {
        let field = mollify(&term.coeff, mollifier, &grid.product_grid())?;
        let label = term.coeff.name();
        term.coeff = CoefficientSpec::table(field).labeled(label);
    }
    Ok(out)
}

pub fn assemble_lower(spec: &OperatorSpec, grid: &TorusGrid) -> Result<LowerPart> {
    spec.validate()?;
    check_grid(spec, grid)?;
    let mut q = CMatrix::zeros(grid.size(), grid.size());
    let mut curves = Vec::with_capacity(spec.lower.len());
    for term in &spec.lower {
        q += term.matrix(grid)?;
        let k = (spec.m - term.beta.order()) as f64;
        let l = (spec.m - term.alpha.order()) as f64;
        let coeff = realize(&term.coeff, &grid.product_grid())?;
        let op = MultiplierOperator::assemble(&coeff, k, l, grid)?;
        curves.push((
            term.describe(),
            relative_bound_curve(&op, &default_cutoffs(grid.bandlimit()))?,
        ));
    }
    Ok(LowerPart { matrix: q, curves })
}

fn check_grid(spec: &OperatorSpec, grid: &TorusGrid) -> Result<()> {
    if grid.dim() != spec.n {
        return Err(Error::Dimension(format!(
            "operator on T^{} assembled on a {}-dimensional grid",
            spec.n,
            grid.dim()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::SmoothFunction;
    use crate::field::SpectralField;
    use crate::linalg::quadratic_form;
    use crate::probes::ProbeSet;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn grid1(n: usize) -> TorusGrid {
        TorusGrid::new(1, n).unwrap()
    }

    fn sine_principal() -> OperatorSpec {
        let a = MultiIndex::new(vec![1]);
        OperatorSpec {
            m: 1,
            n: 1,
            principal: vec![FormTerm::new(
                a.clone(),
                a,
                CoefficientSpec::smooth(SmoothFunction::sine(1.0, 0.5, vec![1])),
            )],
            lower: vec![],
            shift: 1.0,
        }
    }

    #[test]
    fn laplacian_plus_one_is_bessel_weight() {
        let g = grid1(6);
        let t = assemble_principal(&OperatorSpec::laplacian_power(1, 1), &g).unwrap();
        for i in 0..g.size() {
            for j in 0..g.size() {
                let expected = if i == j { g.bessel_base(i) } else { 0.0 };
                assert!((t[(i, j)] - c(expected)).norm() < 1e-12);
            }
        }
        let t2 = assemble_principal(&OperatorSpec::laplacian_power(1, 2), &g).unwrap();
        for i in 0..g.size() {
            let [j, _] = g.mode(i);
            assert!((t2[(i, i)].re - ((j as f64).powi(4) + 1.0)).abs() < 1e-9);
        }
    }

    /// `v*Tu` against trapezoidal quadrature of `∫ c u′ conj(v′) + u conj(v)`.
    #[test]
    fn variable_principal_matches_form_quadrature() {
        let g = grid1(6);
        let t = assemble_principal(&sine_principal(), &g).unwrap();
        assert!(crate::linalg::is_hermitian(&t, 1e-13));
        let probes = ProbeSet::gaussian(g.size(), 4, 77).into_vectors();
        let points = 64;
        let h = 2.0 * PI / points as f64;
        for pair in probes.chunks(2) {
            let u = SpectralField::new(g, pair[0].iter().copied().collect()).unwrap();
            let v = SpectralField::new(g, pair[1].iter().copied().collect()).unwrap();
            // u′ = i Σ j û_j e_j
            let du = u.map_modes(|i, z| z * Complex64::new(0.0, g.mode(i)[0] as f64));
            let dv = v.map_modes(|i, z| z * Complex64::new(0.0, g.mode(i)[0] as f64));
            let (us, vs, dus, dvs) = (
                u.sample(points),
                v.sample(points),
                du.sample(points),
                dv.sample(points),
            );
            let quad: Complex64 = (0..points)
                .map(|p| {
                    let x = p as f64 * h;
                    let cx = 1.0 + 0.5 * x.sin();
                    dus[p] * dvs[p].conj() * cx + us[p] * vs[p].conj()
                })
                .sum::<Complex64>()
                * h;
            let direct = pair[1].dotc(&(&t * &pair[0]));
            assert!((quad - direct).norm() < 1e-10);
        }
    }

    #[test]
    fn constant_lower_term_is_scalar() {
        let g = grid1(5);
        let v0 = Complex64::new(0.7, -0.2);
        let spec = OperatorSpec::laplacian_power(1, 1).with_lower(FormTerm::new(
            MultiIndex::zero(1),
            MultiIndex::zero(1),
            CoefficientSpec::constant(v0),
        ));
        let q = assemble_lower(&spec, &g).unwrap().matrix;
        assert!((q - CMatrix::identity(g.size(), g.size()) * v0).norm() < 1e-12);
    }

    #[test]
    fn delta_potential_is_rank_one() {
        let g = grid1(8);
        let spec = OperatorSpec::laplacian_power(1, 1).with_lower(FormTerm::new(
            MultiIndex::zero(1),
            MultiIndex::zero(1),
            CoefficientSpec::delta(vec![0.0]),
        ));
        let lower = assemble_lower(&spec, &g).unwrap();
        let expected = CMatrix::from_element(g.size(), g.size(), c(1.0 / (2.0 * PI)));
        assert!((&lower.matrix - expected).norm() < 1e-13);
        assert_eq!(lower.curves.len(), 1);
        assert!(lower.curves[0].1.eps.windows(2).all(|w| w[1] <= w[0]));
    }

    /// `(δ u, D v) = u(0) conj((Dv)(0))` for the derivative-coupled drift.
    #[test]
    fn derivative_coupled_delta() {
        let g = grid1(8);
        let spec = OperatorSpec::laplacian_power(1, 1).with_lower(FormTerm::new(
            MultiIndex::new(vec![1]),
            MultiIndex::zero(1),
            CoefficientSpec::delta(vec![0.0]),
        ));
        let q = assemble_lower(&spec, &g).unwrap().matrix;
        for i in 0..g.size() {
            for j in 0..g.size() {
                let expected = -(g.mode(i)[0] as f64) / (2.0 * PI);
                assert!((q[(i, j)] - c(expected)).norm() < 1e-13);
            }
        }
        let probes = ProbeSet::gaussian(g.size(), 3, 5);
        let scale = (2.0 * PI).powf(-0.5);
        for u in probes.iter() {
            let at0: Complex64 = u.iter().sum::<Complex64>() * scale;
            let dat0: Complex64 = (0..g.size())
                .map(|i| u[i] * (-(g.mode(i)[0] as f64)))
                .sum::<Complex64>()
                * scale;
            assert!((quadratic_form(&q, u) - at0 * dat0.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn validation_errors() {
        let g = grid1(4);
        let mut bad = OperatorSpec::laplacian_power(1, 1);
        bad.principal[0].coeff = CoefficientSpec::delta(vec![0.0]);
        assert!(matches!(
            assemble_principal(&bad, &g),
            Err(Error::Precondition(_))
        ));

        let wrong_order = OperatorSpec::laplacian_power(1, 1).with_lower(FormTerm::new(
            MultiIndex::new(vec![1]),
            MultiIndex::new(vec![1]),
            CoefficientSpec::delta(vec![0.0]),
        ));
        assert!(wrong_order.validate().is_err());
        assert!(assemble_principal(
            &OperatorSpec::laplacian_power(1, 1),
            &TorusGrid::new(2, 2).unwrap()
        )
        .is_err());
    }

    #[test]
    fn json_round_trip() {
        let spec = OperatorSpec::laplacian_power(2, 1).with_lower(FormTerm::new(
            MultiIndex::zero(2),
            MultiIndex::zero(2),
            CoefficientSpec::delta(vec![0.0, 0.0]),
        ));
        let text = serde_json::to_string(&spec).unwrap();
        let back: OperatorSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let minimal: OperatorSpec = serde_json::from_str(
            r#"{"m":1,"n":1,"principal":[{"alpha":[1],"beta":[1],"coeff":{"variant":"smooth_samples","function":{"offset":[1.0,0.0]}}}]}"#,
        )
        .unwrap();
        assert_eq!(minimal.shift, 1.0);
        assert!(minimal.lower.is_empty());
    }
}
