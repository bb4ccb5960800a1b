//! Acceptance criteria 1–11. Each test prints one PASS/FAIL line; tests are
//! serialized so their runtime budgets are measured without contention.

use std::f64::consts::PI;
use std::fs;
use std::process::Command;
use std::sync::{Arc, Mutex, MutexGuard, OnceLock};
use std::time::{Duration, Instant};

use formsum_core::coefficients::{tensorize, CoefficientSpec, SmoothFunction};
use formsum_core::field::SpectralField;
use formsum_core::formsum::{
    assemble_lower, build_generalized_sum, certify_relative_bound, lower_matrix, mollified,
    principal_form, sobolev_gram, verify_garding, verify_resolvent_identity, FormTerm,
    OperatorSpec, PrincipalPart,
};
use formsum_core::grid::{MultiIndex, TorusGrid};
use formsum_core::linalg::{c, CMatrix};
use formsum_core::multipliers::{check_interpolation, check_symmetry, spec_multiplier_norm};
use formsum_core::spectra::{
    convergence_study, symmetric_compact_check, ConvergenceReport, LowerVerdict,
};
use formsum_lab::runner::{random_case, run_scenario, secular_root};
use formsum_lab::{execute, preset, ScenarioKind};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

static SERIAL: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|e| e.into_inner())
}

fn report(criterion: u32, pass: bool, detail: &str, elapsed: Duration, budget_s: f64) {
    println!(
        "criterion {criterion:>2}: {}  {detail} [{:.1} s / {budget_s} s]",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
}

fn finish(criterion: u32, checks: &[(bool, String)], start: Instant, budget_s: f64) {
    let elapsed = start.elapsed();
    let in_time = elapsed.as_secs_f64() < budget_s;
    let pass = in_time && checks.iter().all(|(ok, _)| *ok);
    let detail = checks
        .iter()
        .map(|(ok, d)| format!("{}{d}", if *ok { "" } else { "✗ " }))
        .collect::<Vec<_>>()
        .join("; ");
    report(criterion, pass, &detail, elapsed, budget_s);
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn grid1(n: usize) -> TorusGrid {
    TorusGrid::new(1, n).unwrap()
}

#[test]
fn criterion_01_multiplier_norm_oracles() {
    let _g = serial();
    let start = Instant::now();
    let mut checks = Vec::new();
    let one = CoefficientSpec::constant(Complex64::ONE);
    let mut worst_one: f64 = 0.0;
    for n in [4, 32, 128, 256] {
        for (k, l) in [(1.0, 1.0), (0.5, 0.0), (2.0, 1.0)] {
            let norm = spec_multiplier_norm(&one, k, l, &grid1(n)).unwrap();
            worst_one = worst_one.max((norm - 1.0).abs());
        }
    }
    checks.push((
        worst_one <= 1e-12,
        format!("max |‖1‖ − 1| = {worst_one:.2e}"),
    ));
    let mut worst_delta: f64 = 0.0;
    for n in [8, 64, 256] {
        let norm =
            spec_multiplier_norm(&CoefficientSpec::delta(vec![0.0]), 1.0, 1.0, &grid1(n)).unwrap();
        let closed: f64 = (-(n as i64)..=n as i64)
            .map(|j| 1.0 / (1.0 + (j * j) as f64))
            .sum::<f64>()
            / (2.0 * PI);
        worst_delta = worst_delta.max((norm - closed).abs());
    }
    checks.push((
        worst_delta <= 1e-10,
        format!("max |‖δ‖ − closed form| = {worst_delta:.2e}"),
    ));
    finish(1, &checks, start, 5.0);
}

fn random_fields(count: usize, band: &TorusGrid, seed: u64) -> Vec<SpectralField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let coeffs = (0..band.size())
                .map(|i| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im) / band.bessel_base(i)
                })
                .collect();
            SpectralField::new(*band, coeffs).unwrap()
        })
        .collect()
}

#[test]
fn criterion_02_symmetry_and_interpolation() {
    let _g = serial();
    let start = Instant::now();
    let grid = grid1(32);
    let mut sym: f64 = 0.0;
    let mut interp: f64 = f64::NEG_INFINITY;
    for phi in random_fields(20, &grid.product_grid(), 2024) {
        for (k, l) in [(1.0, 0.0), (2.0, 0.0), (1.5, 0.5), (0.25, 1.0)] {
            let (a, b) = check_symmetry(&phi, k, l, &grid).unwrap();
            sym = sym.max((a - b).abs());
        }
        let check = check_interpolation(&phi, (2.0, 0.0), (1.0, 1.0), &grid).unwrap();
        interp = interp.max(check.inner - check.outer);
    }
    finish(
        2,
        &[
            (
                sym <= 1e-9,
                format!("max |‖φ‖_[k,−l] − ‖φ‖_[l,−k]| = {sym:.2e}"),
            ),
            (
                interp <= 1e-9,
                format!("max (‖φ‖_[1,−1] − ‖φ‖_[2,0]) = {interp:.3e}"),
            ),
        ],
        start,
        30.0,
    );
}

fn single_principal(coeff: CoefficientSpec) -> OperatorSpec {
    OperatorSpec {
        principal: vec![FormTerm::new(
            MultiIndex::new(vec![1]),
            MultiIndex::new(vec![1]),
            coeff,
        )],
        ..OperatorSpec::laplacian_power(1, 1)
    }
}

#[test]
fn criterion_03_garding() {
    let _g = serial();
    let start = Instant::now();
    let delta = |spec: &OperatorSpec, n: usize| {
        let grid = grid1(n);
        verify_garding(&principal_form(spec, &grid).unwrap(), 1, &grid, spec.shift)
            .unwrap()
            .delta
    };
    let lap = delta(&OperatorSpec::laplacian_power(1, 1), 128);
    let sine = delta(
        &single_principal(CoefficientSpec::smooth(SmoothFunction::sine(
            1.0,
            0.5,
            vec![1],
        ))),
        128,
    );
    finish(
        3,
        &[
            (lap == 1.0, format!("δ(−Δ) = {lap}")),
            (
                (0.5..=1.0).contains(&sine),
                format!("δ(1+½sin x) = {sine:.6}"),
            ),
        ],
        start,
        5.0,
    );
}

#[test]
fn criterion_04_relative_bound() {
    let _g = serial();
    let start = Instant::now();
    let spec = OperatorSpec::laplacian_power(1, 1).with_lower(FormTerm::new(
        MultiIndex::zero(1),
        MultiIndex::zero(1),
        CoefficientSpec::delta(vec![0.0]),
    ));
    let grid = grid1(64);
    let q = assemble_lower(&spec, &grid).unwrap().matrix;
    let h1 = sobolev_gram(&grid, 1);
    let certs: Vec<_> = [0.5, 0.25, 0.1]
        .iter()
        .map(|&e| certify_relative_bound(&q, &h1, e))
        .collect();
    let ok = certs.iter().all(|c| {
        c.as_ref()
            .is_ok_and(|c| c.residual <= 1e-9 && c.probes == 100)
    });
    let m: Vec<f64> = certs
        .iter()
        .filter_map(|c| c.as_ref().ok())
        .map(|c| c.m_eps)
        .collect();
    let increasing = m.len() == 3 && m[0] < m[1] && m[1] < m[2];
    finish(
        4,
        &[
            (ok, "certificates validate on 100 probes".into()),
            (increasing, format!("M(0.5, 0.25, 0.1) = {m:.4?}")),
        ],
        start,
        20.0,
    );
}

#[test]
fn criterion_05_resolvent_identity() {
    let _g = serial();
    let start = Instant::now();
    let grid = grid1(64);
    let d = grid.size();
    let lap = Arc::new(PrincipalPart::new(&OperatorSpec::laplacian_power(1, 1), &grid).unwrap());
    let limit = build_generalized_sum(&lap, CMatrix::zeros(d, d), None).unwrap();
    let approx = build_generalized_sum(&lap, CMatrix::identity(d, d) * c(0.25), None).unwrap();
    let diagonal = verify_resolvent_identity(&approx, &limit, 1.0).unwrap();
    let exact = 1.0 / 2.0 - 1.0 / 2.25;
    let mut worst = diagonal.relative;
    let mut checks = vec![(
        (diagonal.lhs_norm - exact).abs() < 1e-14,
        format!(
            "diagonal ‖LHS‖ = {:.6} (closed form {exact:.6})",
            diagonal.lhs_norm
        ),
    )];
    for i in 0..5 {
        let (spec, m) = random_case(&grid, 0x5EED + i);
        let p = Arc::new(PrincipalPart::new(&spec, &grid).unwrap());
        let limit = build_generalized_sum(&p, lower_matrix(&spec, &grid).unwrap(), None).unwrap();
        let qn = lower_matrix(&mollified(&spec, &m, &grid).unwrap(), &grid).unwrap();
        let approx = build_generalized_sum(&p, qn, None).unwrap();
        let sigma = -limit
            .sector
            .reference_point()
            .min(approx.sector.reference_point());
        worst = worst.max(
            verify_resolvent_identity(&approx, &limit, sigma)
                .unwrap()
                .relative,
        );
    }
    checks.push((
        worst <= 1e-10,
        format!("max relative residual (diagonal + 5 random) = {worst:.2e}"),
    ));
    finish(5, &checks, start, 20.0);
}

struct Study {
    report: ConvergenceReport,
    elapsed: Duration,
}

fn study(name: &str) -> Study {
    let scenario = preset(name).unwrap();
    let ScenarioKind::ConvergenceStudy(p) = scenario.body else {
        unreachable!()
    };
    let start = Instant::now();
    let report = convergence_study(&p.operator, &scenario.grid, &p.schedule, &p.options).unwrap();
    Study {
        report,
        elapsed: start.elapsed(),
    }
}

fn delta_well() -> &'static Study {
    static CELL: OnceLock<Study> = OnceLock::new();
    CELL.get_or_init(|| study("delta-well"))
}

fn drift() -> &'static Study {
    static CELL: OnceLock<Study> = OnceLock::new();
    CELL.get_or_init(|| study("nonsymmetric-drift"))
}

#[test]
fn criterion_06_theorem_chain() {
    let _g = serial();
    let start = Instant::now();
    let mut checks = Vec::new();
    for (name, s) in [
        ("delta-well", delta_well()),
        ("nonsymmetric-drift", drift()),
    ] {
        let slack = s
            .report
            .rows
            .iter()
            .map(|r| r.resolvent_diff - r.chain_bound)
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push((
            slack <= 1e-8,
            format!("{name}: max(resolvent_diff − bound) = {slack:.3e}"),
        ));
    }
    // Studies are shared with criteria 7 and 8; the budget is theirs.
    finish(6, &checks, start, 300.0);
}

#[test]
fn criterion_07_delta_well_main_theorem() {
    let _g = serial();
    let s = delta_well();
    let r = &s.report;
    let last = r.rows.last().unwrap();
    let kappa = secular_root(-2.0).unwrap();
    let oracle = (r.limit_lowest + kappa * kappa).abs();
    let checks = [
        (
            r.verdicts.q_strictly_decreasing,
            "‖Q−Q_n‖_{1→−1} strictly decreasing".to_string(),
        ),
        (
            r.verdicts.resolvent_strictly_decreasing,
            "resolvent_diff strictly decreasing".to_string(),
        ),
        (
            last.d_upper <= 1e-3,
            format!("d_upper(h=1/16) = {:.4e} (threshold 1e-3)", last.d_upper),
        ),
        (
            oracle <= 5e-3,
            format!(
                "|λ₀ − (−κ²)| = {oracle:.3e} (λ₀ = {:.6}, −κ² = {:.6})",
                r.limit_lowest,
                -kappa * kappa
            ),
        ),
    ];
    let elapsed = s.elapsed;
    let pass = elapsed.as_secs_f64() < 120.0 && checks.iter().all(|(ok, _)| *ok);
    let detail = checks
        .iter()
        .map(|(ok, d)| format!("{}{d}", if *ok { "" } else { "✗ " }))
        .collect::<Vec<_>>()
        .join("; ");
    report(7, pass, &detail, elapsed, 120.0);
    assert!(pass, "criterion 7 failed: {detail}");
}

#[test]
fn criterion_08_two_sided_convergence() {
    let _g = serial();
    let well = delta_well();
    let check = symmetric_compact_check(&well.report);
    let last = well.report.rows.last().unwrap();
    let applicable = matches!(check.verdict, LowerVerdict::Applicable { converges: true });
    let d = drift();
    let drift_lower_not_asserted = matches!(
        d.report.verdicts.lower_conv,
        LowerVerdict::NotApplicable { .. }
    );
    let checks = [
        (
            applicable,
            format!("δ-well symmetric_compact_check: {:?}", check.verdict),
        ),
        (
            last.d_lower <= 1e-3,
            format!("d_lower(h=1/16) = {:.4e} (threshold 1e-3)", last.d_lower),
        ),
        (
            d.report.verdicts.upper_conv,
            "drift upper_conv = true".to_string(),
        ),
        (
            drift_lower_not_asserted,
            "drift lower_conv not asserted".to_string(),
        ),
    ];
    let elapsed = well.elapsed + d.elapsed;
    let pass = well.elapsed.as_secs_f64() < 120.0
        && d.elapsed.as_secs_f64() < 120.0
        && checks.iter().all(|(ok, _)| *ok);
    let detail = checks
        .iter()
        .map(|(ok, d)| format!("{}{d}", if *ok { "" } else { "✗ " }))
        .collect::<Vec<_>>()
        .join("; ");
    report(8, pass, &detail, elapsed, 240.0);
    assert!(pass, "criterion 8 failed: {detail}");
}

#[test]
fn criterion_09_embedding_sweeps() {
    let _g = serial();
    let start = Instant::now();
    let mut checks = Vec::new();
    for name in ["embedding-h2", "embedding-hp"] {
        let out = run_scenario(&preset(name).unwrap()).unwrap();
        let variation = out.details["relative_variation"].as_f64().unwrap();
        checks.push((
            variation < 0.1 && out.passed(),
            format!(
                "{name}: max-ratio variation over N ∈ {{16,32,64}} = {:.2}%",
                100.0 * variation
            ),
        ));
    }
    let dir = tempfile::tempdir().unwrap();
    for (lemma, params) in [
        ("H2", r#"{"n":1,"k":0.5,"l":0.5}"#),
        ("Hp", r#"{"n":1,"k":0.5,"l":0.5,"gamma":0.0,"p":1.0}"#),
        ("Hp", r#"{"n":1,"k":1.0,"l":0.5,"gamma":0.0,"p":2.0}"#),
    ] {
        let config = format!(
            r#"{{"name":"bad","kind":"embedding_sweep","grid":{{"n":1,"N":16}},
                "parameters":{{"lemma":"{lemma}","params":{params},"samples":[{{"family":"single_modes","max":2}}]}}}}"#
        );
        let path = dir.path().join("bad.json");
        fs::write(&path, config).unwrap();
        let code = Command::new(env!("CARGO_BIN_EXE_formsum-lab"))
            .args([
                "run",
                path.to_str().unwrap(),
                "--out",
                dir.path().join("o").to_str().unwrap(),
            ])
            .output()
            .unwrap()
            .status
            .code();
        checks.push((code == Some(3), format!("{lemma} {params} → exit {code:?}")));
    }
    finish(9, &checks, start, 60.0);
}

#[test]
fn criterion_10_fubini_tensor() {
    let _g = serial();
    let start = Instant::now();
    let delta = CoefficientSpec::delta(vec![0.0]);
    let sine = CoefficientSpec::smooth(SmoothFunction::sine(0.0, 1.0, vec![1]));
    let tensor = tensorize(&delta, &sine, 1.0).unwrap();
    let two = spec_multiplier_norm(&tensor, 1.0, 1.0, &TorusGrid::new(2, 16).unwrap()).unwrap();
    let one = spec_multiplier_norm(&delta, 1.0, 1.0, &grid1(16)).unwrap();
    let bound = one * 1.0 * 1.05;
    finish(
        10,
        &[(two <= bound, format!("‖δ⊗sin‖ = {two:.6} ≤ {bound:.6}"))],
        start,
        60.0,
    );
}

#[test]
fn criterion_11_determinism() {
    let _g = serial();
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let scenario = preset("delta-well").unwrap();
    let mut manifests = Vec::new();
    for (threads, sub) in [(1, "a"), (2, "b")] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        manifests.push(
            pool.install(|| execute(&scenario, &dir.path().join(sub)))
                .unwrap(),
        );
    }
    let mut identical = true;
    let mut compared = Vec::new();
    for entry in &manifests[0].files {
        let a = fs::read(dir.path().join("a").join(&entry.name)).unwrap();
        let b = fs::read(dir.path().join("b").join(&entry.name)).unwrap();
        identical &= a == b;
        compared.push(entry.name.clone());
    }
    identical &= manifests[0].files == manifests[1].files;
    finish(
        11,
        &[(
            identical,
            format!(
                "byte-identical across 1 and 2 threads: {}",
                compared.join(", ")
            ),
        )],
        start,
        2.0 * 120.0,
    );
}
