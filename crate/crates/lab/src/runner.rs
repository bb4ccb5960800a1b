//! Execution of each scenario kind. Every run yields named output files,
//! asserted verdicts and a JSON detail block; nothing here touches disk.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;
use std::sync::Arc;

use formsum_core::coefficients::{
    realize, CoefficientKind, CoefficientSpec, MollifierSpec, SmoothFunction, TrigKind, TrigTerm,
};
use formsum_core::export::to_bytes;
use formsum_core::field::SpectralField;
use formsum_core::formsum::{
    assemble_lower, build_generalized_sum, certify_relative_bound, lower_matrix, mollified,
    principal_form, verify_garding, verify_resolvent_identity, FormTerm, GeneralizedSum,
    OperatorSpec, PrincipalPart,
};
use formsum_core::grid::{MultiIndex, TorusGrid};
use formsum_core::linalg::{c, CMatrix};
use formsum_core::multipliers::{
    check_interpolation, embedding_sweep, MultiplierOperator, SampleSpec,
};
use formsum_core::spectra::{
    compute_spectrum, convergence_study, symmetric_compact_check, ConvergenceReport, LowerVerdict,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::LabError;
use crate::scenario::*;

/// Result of one scenario before it is written out.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    /// `(file name, contents)` in write order.
    pub files: Vec<(String, Vec<u8>)>,
    pub verdicts: BTreeMap<String, bool>,
    pub details: Value,
}

impl Outcome {
    fn file(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), contents.into()));
    }

    fn verdict(&mut self, name: &str, holds: bool) {
        self.verdicts.insert(name.to_string(), holds);
    }

    pub fn passed(&self) -> bool {
        self.verdicts.values().all(|&v| v)
    }
}

pub fn run_scenario(scenario: &Scenario) -> Result<Outcome, LabError> {
    let grid = scenario.grid;
    let seed = scenario.seed;
    match &scenario.body {
        ScenarioKind::Garding(p) => garding(p, &grid),
        ScenarioKind::MultiplierTable(p) => multiplier_table(p, &grid, seed),
        ScenarioKind::EmbeddingSweep(p) => embedding(p, &grid, seed),
        ScenarioKind::RelativeBound(p) => relative_bound(p, &grid),
        ScenarioKind::FormsumBuild(p) => formsum_build(p, &grid),
        ScenarioKind::ConvergenceStudy(p) => study(p, &grid, false),
        ScenarioKind::SymmetricCompact(p) => study(p, &grid, true),
        ScenarioKind::ResolventIdentity(p) => resolvent_identity(p, &grid, seed),
    }
}

fn check_operator(op: &OperatorSpec, grid: &TorusGrid) -> Result<(), LabError> {
    if op.n != grid.dim() {
        return Err(LabError::Config(format!(
            "operator is posed on T^{} but the grid has n = {}",
            op.n,
            grid.dim()
        )));
    }
    op.validate()?;
    Ok(())
}

fn garding(p: &GardingParams, grid: &TorusGrid) -> Result<Outcome, LabError> {
    check_operator(&p.operator, grid)?;
    let op = &p.operator;
    let report = verify_garding(&principal_form(op, grid)?, op.m, grid, op.shift)?;
    let mut out = Outcome::default();
    out.verdict("coercive", report.delta > 0.0);
    out.verdict("two_sided_ordered", report.c1 <= report.c2);
    if let Some((lo, hi)) = p.delta_range {
        out.verdict(
            "delta_in_range",
            report.delta >= lo - 1e-12 && report.delta <= hi + 1e-12,
        );
    }
    let mut csv = String::from("quantity,value\n");
    for (name, v) in [
        ("delta", report.delta),
        ("c1", report.c1),
        ("c2", report.c2),
        ("shift", report.shift),
    ] {
        let _ = writeln!(csv, "{name},{v}");
    }
    out.file("garding.csv", csv);
    out.details = json!({ "coercivity": report });
    Ok(out)
}

/// `‖w·δ‖_{M[k,−l]}` and `‖v‖_{M[k,−l]}` for constants, where known exactly.
fn closed_form(spec: &CoefficientSpec, k: f64, l: f64, grid: &TorusGrid) -> Option<f64> {
    let weights = |s: f64| -> f64 { (0..grid.size()).map(|i| grid.bessel_base(i).powf(-s)).sum() };
    match &spec.kind {
        CoefficientKind::Delta { weight, .. } => Some(
            weight.norm()
                * (2.0 * PI).powi(-(grid.dim() as i32))
                * (weights(k) * weights(l)).sqrt(),
        ),
        CoefficientKind::SmoothSamples { function } if function.terms.is_empty() => {
            let peak = (0..grid.size())
                .map(|i| grid.bessel_base(i).powf(-(k + l) / 2.0))
                .fold(0.0, f64::max);
            Some(function.offset.norm() * peak)
        }
        _ => None,
    }
}

fn random_field(band: &TorusGrid, decay: f64, rng: &mut ChaCha8Rng) -> SpectralField {
    let coeffs = (0..band.size())
        .map(|i| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) * band.bessel_base(i).powf(-decay / 2.0)
        })
        .collect();
    SpectralField::new(*band, coeffs).expect("finite coefficients")
}

#[derive(Serialize)]
struct TableRow {
    coefficient: String,
    bandlimit: usize,
    k: f64,
    l: f64,
    norm: f64,
    dual_norm: f64,
    reference: Option<f64>,
}

fn multiplier_table(
    p: &MultiplierTableParams,
    grid: &TorusGrid,
    seed: u64,
) -> Result<Outcome, LabError> {
    if p.orders.is_empty() {
        return Err(LabError::Config(
            "multiplier_table needs at least one (k, l) pair".into(),
        ));
    }
    let bandlimits = if p.bandlimits.is_empty() {
        vec![grid.bandlimit()]
    } else {
        p.bandlimits.clone()
    };
    let largest = grid
        .with_bandlimit(*bandlimits.iter().max().unwrap())?
        .product_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random: Vec<SpectralField> = p
        .random_fields
        .map(|r| {
            (0..r.count)
                .map(|_| random_field(&largest, r.decay, &mut rng))
                .collect()
        })
        .unwrap_or_default();

    // (label, spec if symbolic, field on the band of N) per bandlimit
    let mut rows = Vec::new();
    let mut interpolation_ok = true;
    let mut tensor_ok = true;
    let mut interpolation_rows = Vec::new();
    let mut tensor_rows = Vec::new();
    for &n in &bandlimits {
        let g = grid.with_bandlimit(n)?;
        let band = g.product_grid();
        let mut entries: Vec<(String, Option<&CoefficientSpec>, SpectralField)> = Vec::new();
        for spec in &p.coefficients {
            entries.push((spec.name(), Some(spec), realize(spec, &band)?));
        }
        for (i, f) in random.iter().enumerate() {
            entries.push((format!("random_{i}"), None, f.resample(band)?));
        }
        let computed = entries
            .par_iter()
            .map(|(name, spec, field)| -> Result<_, LabError> {
                let mut local = Vec::new();
                for &(k, l) in &p.orders {
                    let norm = MultiplierOperator::assemble(field, k, l, &g)?.norm()?;
                    let dual_norm = if k == l {
                        norm
                    } else {
                        MultiplierOperator::assemble(field, l, k, &g)?.norm()?
                    };
                    local.push(TableRow {
                        coefficient: name.clone(),
                        bandlimit: n,
                        k,
                        l,
                        norm,
                        dual_norm,
                        reference: spec.and_then(|s| closed_form(s, k, l, &g)),
                    });
                }
                let mut checks = Vec::new();
                for &(outer, inner) in &p.interpolation {
                    checks.push((
                        name.clone(),
                        outer,
                        inner,
                        check_interpolation(field, outer, inner, &g)?,
                    ));
                }
                Ok((local, checks))
            })
            .collect::<Result<Vec<_>, _>>()?;
        for (local, checks) in computed {
            rows.extend(local);
            for (name, outer, inner, check) in checks {
                interpolation_ok &= check.holds;
                interpolation_rows.push(json!({
                    "coefficient": name, "bandlimit": n, "outer_orders": outer,
                    "inner_orders": inner, "outer": check.outer, "inner": check.inner, "holds": check.holds,
                }));
            }
        }
        if let Some(bound) = p.tensor_bound {
            for spec in &p.coefficients {
                if let CoefficientKind::TensorProduct { phi, psi_sup, .. } = &spec.kind {
                    let g1 = TorusGrid::new(1, n)?;
                    for &(k, l) in &p.orders {
                        let tensor = rows
                            .iter()
                            .find(|r| {
                                r.coefficient == spec.name()
                                    && r.bandlimit == n
                                    && r.k == k
                                    && r.l == l
                            })
                            .map(|r| r.norm)
                            .expect("tensor row computed");
                        let factor = MultiplierOperator::from_spec(phi, k, l, &g1)?.norm()?;
                        let limit = factor * psi_sup * (1.0 + bound.slack);
                        tensor_ok &= tensor <= limit;
                        tensor_rows.push(json!({
                            "coefficient": spec.name(), "bandlimit": n, "k": k, "l": l,
                            "tensor_norm": tensor, "factor_norm": factor, "psi_sup": psi_sup, "bound": limit,
                        }));
                    }
                }
            }
        }
    }

    let mut out = Outcome::default();
    out.verdict(
        "symmetry",
        rows.iter()
            .all(|r| (r.norm - r.dual_norm).abs() <= 1e-9 * r.norm.max(1.0)),
    );
    if rows.iter().any(|r| r.reference.is_some()) {
        out.verdict(
            "closed_form",
            rows.iter().all(|r| {
                r.reference
                    .is_none_or(|v| (r.norm - v).abs() <= 1e-10 * v.max(1.0))
            }),
        );
    }
    if !p.interpolation.is_empty() {
        out.verdict("interpolation", interpolation_ok);
    }
    if p.tensor_bound.is_some() {
        if tensor_rows.is_empty() {
            return Err(LabError::Config(
                "tensor_bound needs a tensor_product coefficient".into(),
            ));
        }
        out.verdict("tensor_bound", tensor_ok);
    }
    let mut csv = String::from("coefficient,N,k,l,norm,dual_norm,reference\n");
    for r in &rows {
        let reference = r.reference.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            r.coefficient, r.bandlimit, r.k, r.l, r.norm, r.dual_norm, reference
        );
    }
    out.file("multipliers.csv", csv);
    out.details =
        json!({ "rows": rows, "interpolation": interpolation_rows, "tensor_bound": tensor_rows });
    Ok(out)
}

fn offset_seeds(samples: &[SampleSpec], seed: u64) -> Vec<SampleSpec> {
    samples
        .iter()
        .cloned()
        .map(|s| match s {
            SampleSpec::WhiteNoise { count, seed: o } => SampleSpec::WhiteNoise {
                count,
                seed: seed.wrapping_add(o),
            },
            SampleSpec::Deltas { count, seed: o } => SampleSpec::Deltas {
                count,
                seed: seed.wrapping_add(o),
            },
            other => other,
        })
        .collect()
}

fn embedding(p: &EmbeddingSweepParams, grid: &TorusGrid, seed: u64) -> Result<Outcome, LabError> {
    p.params.check(p.lemma)?;
    let bandlimits = if p.bandlimits.is_empty() {
        vec![grid.bandlimit()]
    } else {
        p.bandlimits.clone()
    };
    let samples = offset_seeds(&p.samples, seed);
    let reports = bandlimits
        .par_iter()
        .map(|&n| {
            Ok(embedding_sweep(
                p.lemma,
                &p.params,
                &samples,
                &grid.with_bandlimit(n)?,
            )?)
        })
        .collect::<Result<Vec<_>, LabError>>()?;
    let maxima: Vec<f64> = reports.iter().map(|r| r.max_ratio).collect();
    let lo = maxima.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = maxima.iter().copied().fold(0.0, f64::max);
    let variation = (hi - lo) / lo;
    let mut out = Outcome::default();
    out.verdict(
        "finite_ratios",
        maxima.iter().all(|m| m.is_finite() && *m > 0.0),
    );
    if reports.len() > 1 {
        out.verdict("bandlimit_stability", variation < p.stability_tolerance);
    }
    let mut csv = String::from("N,sample_id,source_norm,mult_norm,ratio\n");
    for r in &reports {
        for line in r.to_csv().lines().skip(1) {
            let _ = writeln!(csv, "{},{line}", r.bandlimit);
        }
    }
    out.file("embedding.csv", csv);
    let summary: Vec<Value> = reports
        .iter()
        .map(|r| json!({ "bandlimit": r.bandlimit, "max_ratio": r.max_ratio, "product_constant": r.product_constant }))
        .collect();
    out.details = json!({ "lemma": p.lemma, "params": p.params, "per_bandlimit": summary, "relative_variation": variation });
    Ok(out)
}

fn relative_bound(p: &RelativeBoundParams, grid: &TorusGrid) -> Result<Outcome, LabError> {
    check_operator(&p.operator, grid)?;
    if p.eps.is_empty() {
        return Err(LabError::Config(
            "relative_bound needs at least one ε".into(),
        ));
    }
    let lower = assemble_lower(&p.operator, grid)?;
    let h1 = formsum_core::formsum::sobolev_gram(grid, p.operator.m);
    let certificates = p
        .eps
        .par_iter()
        .map(|&e| certify_relative_bound(&lower.matrix, &h1, e))
        .collect::<Result<Vec<_>, _>>()?;
    let mut by_eps: Vec<_> = certificates.iter().collect();
    by_eps.sort_by(|a, b| b.eps.total_cmp(&a.eps));
    let mut out = Outcome::default();
    out.verdict(
        "certificates_validate",
        certificates.iter().all(|c| c.residual <= 1e-9),
    );
    out.verdict(
        "m_grows_as_eps_shrinks",
        by_eps.windows(2).all(|w| w[1].m_eps >= w[0].m_eps),
    );
    let mut csv = String::from("eps,m_eps,residual,probes\n");
    for c in &certificates {
        let _ = writeln!(csv, "{},{},{},{}", c.eps, c.m_eps, c.residual, c.probes);
    }
    out.file("certificates.csv", csv);
    let mut curves = String::from("term,cutoff,eps,witness\n");
    for (term, curve) in &lower.curves {
        for ((cut, e), w) in curve.cutoffs.iter().zip(&curve.eps).zip(&curve.witness) {
            let _ = writeln!(curves, "\"{term}\",{cut},{e},{w}");
        }
    }
    out.file("relative_bound_curves.csv", curves);
    out.details = json!({ "certificates": certificates, "curves": lower.curves });
    Ok(out)
}

fn formsum_build(p: &FormsumBuildParams, grid: &TorusGrid) -> Result<Outcome, LabError> {
    check_operator(&p.operator, grid)?;
    let principal = Arc::new(PrincipalPart::new(&p.operator, grid)?);
    let lower = assemble_lower(&p.operator, grid)?;
    let certificate = certify_relative_bound(&lower.matrix, &principal.h1, p.eps)?;
    let sum = build_generalized_sum(&principal, lower.matrix.clone(), Some(&certificate))?;
    let spectrum = compute_spectrum(&sum, Default::default())?;
    let shift = principal.coercivity.shift;
    let in_sector = spectrum
        .eigenvalues
        .iter()
        .all(|z| sum.sector.contains(z + shift, 1e-9 * (1.0 + z.norm())));
    let hausdorff = sum.hausdorff.expect("certificate supplied");
    let mut out = Outcome::default();
    out.verdict("coercive", principal.coercivity.delta > 0.0);
    out.verdict(
        "hausdorff_separation",
        hausdorff.exact_min >= hausdorff.bound - 1e-9,
    );
    out.verdict("eigenvalues_in_sector", in_sector);
    if spectrum.hermitian {
        out.verdict(
            "real_spectrum",
            spectrum.eigenvalues.iter().all(|z| z.im.abs() <= 1e-9),
        );
    }
    out.file("spectrum.csv", spectrum.to_csv());
    if p.export_matrix {
        out.file("S.bin", to_bytes(&sum.s));
    }
    out.details = json!({
        "coercivity": principal.coercivity,
        "certificate": certificate,
        "hausdorff": hausdorff,
        "sector": sum.sector,
        "backward_error": spectrum.backward_error,
        "lowest_eigenvalue": spectrum.lowest_real(),
        "relative_bound_curves": lower.curves,
    });
    Ok(out)
}

/// `κ` with `κ tanh(πκ) = −c/2`, by bisection.
pub fn secular_root(coupling: f64) -> Option<f64> {
    let target = -coupling / 2.0;
    if target <= 0.0 {
        return None;
    }
    let f = |k: f64| k * (PI * k).tanh() - target;
    let (mut lo, mut hi) = (0.0, target + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

fn study(p: &StudyParams, grid: &TorusGrid, two_sided: bool) -> Result<Outcome, LabError> {
    check_operator(&p.operator, grid)?;
    if p.schedule.is_empty() {
        return Err(LabError::Config("mollifier schedule is empty".into()));
    }
    let report: ConvergenceReport = convergence_study(&p.operator, grid, &p.schedule, &p.options)?;
    let v = &report.verdicts;
    let mut out = Outcome::default();
    out.verdict("q_conv", v.q_conv);
    out.verdict("resolvent_conv", v.resolvent_conv);
    out.verdict("upper_conv", v.upper_conv);
    out.verdict("chain_holds", v.chain_holds);
    out.verdict("q_strictly_decreasing", v.q_strictly_decreasing);
    out.verdict(
        "resolvent_strictly_decreasing",
        v.resolvent_strictly_decreasing,
    );
    if let Some(converges) = v.lower_conv.converges() {
        out.verdict("lower_conv", converges);
    }
    let mut oracle = Value::Null;
    if let Some(o) = p.secular_oracle {
        let kappa = secular_root(o.coupling).ok_or_else(|| {
            LabError::Config(format!(
                "secular oracle needs an attractive coupling, got {}",
                o.coupling
            ))
        })?;
        let expected = -kappa * kappa;
        let error = (report.limit_lowest - expected).abs();
        out.verdict("secular_oracle", error <= o.tolerance);
        oracle = json!({ "kappa": kappa, "expected": expected, "computed": report.limit_lowest, "error": error });
    }
    let check = symmetric_compact_check(&report);
    if two_sided {
        if let LowerVerdict::Applicable { converges } = check.verdict {
            out.verdict("two_sided", converges);
        }
    }
    let details = json!({ "report": report, "secular_oracle": oracle, "symmetric_compact": check });
    out.file("study.csv", report.to_csv());
    out.details = details;
    Ok(out)
}

/// Random complex principal coefficient with `Re c ≥ 0.4` and a weighted
/// delta at a random point, mollified by a random Gaussian.
pub fn random_case(grid: &TorusGrid, seed: u64) -> (OperatorSpec, MollifierSpec) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = grid.dim();
    let amp = |rng: &mut ChaCha8Rng| {
        Complex64::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1))
    };
    let mut terms = Vec::new();
    for k in 1..=3 {
        for kind in [TrigKind::Cos, TrigKind::Sin] {
            let mut freq = vec![0; dim];
            freq[0] = k;
            terms.push(TrigTerm {
                kind,
                amplitude: amp(&mut rng),
                freq,
            });
        }
    }
    let coeff = CoefficientSpec::smooth(SmoothFunction {
        offset: c(1.0),
        terms,
    });
    let principal = MultiIndex::all_of_order(dim, 1)
        .into_iter()
        .map(|a| FormTerm::new(a.clone(), a, coeff.clone()))
        .collect();
    let x0: Vec<f64> = (0..dim).map(|_| rng.random_range(0.0..TAU)).collect();
    let weight = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    let spec = OperatorSpec {
        m: 1,
        n: dim,
        principal,
        lower: vec![FormTerm::new(
            MultiIndex::zero(dim),
            MultiIndex::zero(dim),
            CoefficientSpec::weighted_delta(x0, weight),
        )],
        shift: 1.0,
    };
    let h = rng.random_range(0.1..0.5);
    (spec, MollifierSpec::Gaussian { h })
}

fn leftmost_sigma(sums: &[&GeneralizedSum]) -> f64 {
    -sums
        .iter()
        .map(|s| s.sector.reference_point())
        .fold(f64::INFINITY, f64::min)
}

fn mollified_pair(
    spec: &OperatorSpec,
    m: &MollifierSpec,
    grid: &TorusGrid,
    principal: &Arc<PrincipalPart>,
    limit: &GeneralizedSum,
) -> Result<(f64, formsum_core::formsum::ResolventIdentity), LabError> {
    let approx = build_generalized_sum(
        principal,
        lower_matrix(&mollified(spec, m, grid)?, grid)?,
        None,
    )?;
    let sigma = leftmost_sigma(&[limit, &approx]);
    Ok((
        m.parameter(),
        verify_resolvent_identity(&approx, limit, sigma)?,
    ))
}

fn resolvent_identity(
    p: &ResolventIdentityParams,
    grid: &TorusGrid,
    seed: u64,
) -> Result<Outcome, LabError> {
    if p.operator.is_none() && p.diagonal_cases.is_empty() && p.random_cases == 0 {
        return Err(LabError::Config("resolvent_identity has no cases".into()));
    }
    let mut rows: Vec<(String, formsum_core::formsum::ResolventIdentity)> = Vec::new();
    if let Some(op) = &p.operator {
        check_operator(op, grid)?;
        if p.mollifiers.is_empty() {
            return Err(LabError::Config("operator cases need mollifiers".into()));
        }
        let principal = Arc::new(PrincipalPart::new(op, grid)?);
        let limit = build_generalized_sum(&principal, lower_matrix(op, grid)?, None)?;
        let results = p
            .mollifiers
            .par_iter()
            .map(|m| mollified_pair(op, m, grid, &principal, &limit))
            .collect::<Result<Vec<_>, _>>()?;
        rows.extend(
            results
                .into_iter()
                .map(|(h, r)| (format!("mollified_h={h}"), r)),
        );
    }
    if !p.diagonal_cases.is_empty() {
        let spec = OperatorSpec::laplacian_power(grid.dim(), 1);
        let principal = Arc::new(PrincipalPart::new(&spec, grid)?);
        let d = grid.size();
        let limit = build_generalized_sum(&principal, CMatrix::zeros(d, d), None)?;
        for &n in &p.diagonal_cases {
            if n == 0 {
                return Err(LabError::Config("diagonal case n must be ≥ 1".into()));
            }
            let approx = build_generalized_sum(
                &principal,
                CMatrix::identity(d, d) * c(1.0 / n as f64),
                None,
            )?;
            let sigma = leftmost_sigma(&[&limit, &approx]);
            rows.push((
                format!("diagonal_n={n}"),
                verify_resolvent_identity(&approx, &limit, sigma)?,
            ));
        }
    }
    let random = (0..p.random_cases)
        .into_par_iter()
        .map(|i| -> Result<_, LabError> {
            let (spec, m) = random_case(grid, seed.wrapping_add(i as u64));
            let principal = Arc::new(PrincipalPart::new(&spec, grid)?);
            let limit = build_generalized_sum(&principal, lower_matrix(&spec, grid)?, None)?;
            let (_, r) = mollified_pair(&spec, &m, grid, &principal, &limit)?;
            Ok((format!("random_{i}"), r))
        })
        .collect::<Result<Vec<_>, _>>()?;
    rows.extend(random);

    let mut out = Outcome::default();
    out.verdict(
        "identity",
        rows.iter().all(|(_, r)| r.relative <= p.tolerance),
    );
    let mut csv = String::from("case,sigma,lhs_norm,residual,relative\n");
    for (name, r) in &rows {
        let _ = writeln!(
            csv,
            "{name},{},{},{},{}",
            r.sigma, r.lhs_norm, r.residual, r.relative
        );
    }
    out.file("identity.csv", csv);
    let cases: Vec<Value> = rows
        .iter()
        .map(|(n, r)| json!({ "case": n, "result": r }))
        .collect();
    out.details = json!({ "cases": cases, "tolerance": p.tolerance });
    Ok(out)
}
