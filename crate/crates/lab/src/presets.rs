//! Built-in scenarios, one per checked result.

use formsum_core::coefficients::{tensorize, CoefficientSpec, MollifierSpec, SmoothFunction};
use formsum_core::formsum::{FormTerm, OperatorSpec};
use formsum_core::grid::{MultiIndex, TorusGrid};
use formsum_core::multipliers::{EmbeddingLemma, EmbeddingParams, SampleSpec};
use formsum_core::spectra::StudyOptions;
use num_complex::Complex64;

use crate::error::LabError;
use crate::scenario::*;

pub const DEFAULT_SEED: u64 = 0x5EED;

/// Preset names in catalog order.
pub const PRESETS: [&str; 11] = [
    "garding-constant",
    "delta-multiplier-table",
    "embedding-h2",
    "embedding-hp",
    "interpolation-chain",
    "fubini-tensor",
    "delta-well",
    "nonsymmetric-drift",
    "resolvent-identity",
    "relative-bound-delta",
    "sectorial-build",
];

fn grid(n: usize, bandlimit: usize) -> TorusGrid {
    TorusGrid::new(n, bandlimit).expect("preset grid")
}

fn anchor(result: &str, statement: &str) -> Option<Anchor> {
    Some(Anchor {
        result: result.into(),
        statement: statement.into(),
    })
}

fn delta_well(coupling: f64) -> OperatorSpec {
    OperatorSpec::laplacian_power(1, 1).with_lower(FormTerm::new(
        MultiIndex::zero(1),
        MultiIndex::zero(1),
        CoefficientSpec::weighted_delta(vec![0.0], Complex64::new(coupling, 0.0)),
    ))
}

fn gaussians(hs: &[f64]) -> Vec<MollifierSpec> {
    hs.iter().map(|&h| MollifierSpec::Gaussian { h }).collect()
}

fn embedding_samples() -> Vec<SampleSpec> {
    vec![
        SampleSpec::WhiteNoise { count: 20, seed: 0 },
        SampleSpec::Deltas {
            count: 10,
            seed: 100,
        },
        SampleSpec::SingleModes { max: 16 },
    ]
}

fn scenario(name: &str, grid: TorusGrid, anchor: Option<Anchor>, body: ScenarioKind) -> Scenario {
    Scenario {
        name: name.into(),
        grid,
        seed: DEFAULT_SEED,
        output: None,
        anchor,
        body,
    }
}

pub fn preset(name: &str) -> Result<Scenario, LabError> {
    let s = match name {
        "garding-constant" => scenario(
            name,
            grid(1, 128),
            anchor("Gårding inequality", "Re(L₀u,u) ≥ δ‖∇^m u‖², δ > 0"),
            ScenarioKind::Garding(GardingParams {
                operator: OperatorSpec::laplacian_power(1, 1),
                delta_range: Some((1.0, 1.0)),
            }),
        ),
        "delta-multiplier-table" => scenario(
            name,
            grid(1, 128),
            anchor(
                "multiplier norms and duality",
                "‖φ‖_{M[k,−l]} = sup ‖φf‖_{−l}/‖f‖_k; ‖φ‖_{M[k,−l]} = ‖φ̄‖_{M[l,−k]}",
            ),
            ScenarioKind::MultiplierTable(MultiplierTableParams {
                coefficients: vec![
                    CoefficientSpec::delta(vec![0.0]),
                    CoefficientSpec::delta(vec![1.0]).labeled("delta_shifted"),
                    CoefficientSpec::constant(Complex64::ONE).labeled("one"),
                ],
                random_fields: None,
                orders: vec![(1.0, 1.0), (0.75, 0.75), (1.0, 0.5)],
                bandlimits: vec![32, 128, 256],
                interpolation: vec![],
                tensor_bound: None,
            }),
        ),
        "embedding-h2" => scenario(
            name,
            grid(1, 64),
            anchor("Sobolev embedding, k > n/2", "‖φ‖_{M[k,−l]} ≤ C‖φ‖_{H^{−l}}, k > n/2, l ≤ k"),
            ScenarioKind::EmbeddingSweep(EmbeddingSweepParams {
                lemma: EmbeddingLemma::H2,
                params: EmbeddingParams { n: 1, k: 1.0, l: 1.0, gamma: 0.0, p: 2.0 },
                samples: embedding_samples(),
                bandlimits: vec![16, 32, 64],
                stability_tolerance: 0.1,
            }),
        ),
        "embedding-hp" => scenario(
            name,
            grid(1, 64),
            anchor(
                "Bessel-potential embedding, k ≤ n/2",
                "‖φ‖_{M[k,−l]} ≤ C‖φ‖_{H_p^γ}, γ ≤ l, p > n/(k+l−γ)",
            ),
            ScenarioKind::EmbeddingSweep(EmbeddingSweepParams {
                lemma: EmbeddingLemma::Hp,
                params: EmbeddingParams { n: 1, k: 0.5, l: 0.5, gamma: 0.0, p: 2.0 },
                samples: embedding_samples(),
                bandlimits: vec![16, 32, 64],
                stability_tolerance: 0.1,
            }),
        ),
        "interpolation-chain" => scenario(
            name,
            grid(1, 32),
            anchor(
                "interpolation of multiplier spaces",
                "M[k₁,−l₁] ⊂ M[k₂,−l₂] for k₂ < k₁, k₁+l₁ = k₂+l₂, l₁ ≤ k₂",
            ),
            ScenarioKind::MultiplierTable(MultiplierTableParams {
                coefficients: vec![],
                random_fields: Some(RandomFields { count: 20, decay: 1.0 }),
                orders: vec![(1.0, 1.0), (2.0, 0.0), (1.5, 0.5)],
                bandlimits: vec![],
                interpolation: vec![((2.0, 0.0), (1.0, 1.0)), ((2.0, 0.0), (1.5, 0.5))],
                tensor_bound: None,
            }),
        ),
        "fubini-tensor" => scenario(
            name,
            grid(2, 16),
            anchor("tensor products", "‖φ⊗ψ‖_{M[k,−l]}(T²) ≤ ‖φ‖_{M[k,−l]}(T¹)·‖ψ‖_∞"),
            ScenarioKind::MultiplierTable(MultiplierTableParams {
                coefficients: vec![tensorize(
                    &CoefficientSpec::delta(vec![0.0]),
                    &CoefficientSpec::smooth(SmoothFunction::sine(0.0, 1.0, vec![1])),
                    1.0,
                )
                .expect("one-dimensional factors")],
                random_fields: None,
                orders: vec![(1.0, 1.0)],
                bandlimits: vec![],
                interpolation: vec![],
                tensor_bound: Some(TensorBound { slack: 0.05 }),
            }),
        ),
        "delta-well" => scenario(
            name,
            grid(1, 256),
            anchor(
                "uniform resolvent convergence under mollification",
                "‖Q−Q_n‖_{ℋ₁→ℋ₋₁} → 0 ⇒ ‖(S_n−ρ)^{-1} − (S−ρ)^{-1}‖ → 0; σ(S_n) → σ(S)",
            ),
            ScenarioKind::ConvergenceStudy(StudyParams {
                operator: delta_well(-2.0),
                schedule: gaussians(&[1.0, 0.5, 0.25, 0.125, 0.0625]),
                options: StudyOptions::default(),
                secular_oracle: Some(SecularOracle { coupling: -2.0, tolerance: 5e-3 }),
            }),
        ),
        "nonsymmetric-drift" => scenario(
            name,
            grid(1, 128),
            anchor(
                "spectral convergence from above",
                "σ(S_n) → σ(S) from above for m-sectorial generalized sums",
            ),
            ScenarioKind::ConvergenceStudy(StudyParams {
                operator: OperatorSpec::laplacian_power(1, 1).with_lower(FormTerm::new(
                    MultiIndex::new(vec![1]),
                    MultiIndex::zero(1),
                    CoefficientSpec::weighted_delta(vec![0.0], Complex64::new(0.0, 1.0)),
                )),
                schedule: gaussians(&[0.125, 0.0625, 0.03125, 0.015625, 0.0078125]),
                options: StudyOptions::default(),
                secular_oracle: None,
            }),
        ),
        "resolvent-identity" => scenario(
            name,
            grid(1, 64),
            anchor(
                "resolvent factorization",
                "(S_n+σ)^{-1} − (S+σ)^{-1} = T₀^{-1/2}(Z_n+σT₀^{-1})^{-1}[T₀^{-1/2}(Q−Q_n)T₀^{-1/2}](Z+σT₀^{-1})^{-1}T₀^{-1/2}",
            ),
            ScenarioKind::ResolventIdentity(ResolventIdentityParams {
                operator: Some(delta_well(-2.0)),
                mollifiers: gaussians(&[1.0, 0.5, 0.25]),
                diagonal_cases: vec![1, 2, 4],
                random_cases: 5,
                tolerance: 1e-10,
            }),
        ),
        "relative-bound-delta" => scenario(
            name,
            grid(1, 64),
            anchor("relative form bound", "|(Qf,f)| ≤ ε(f,f)₁ + M(ε)(f,f), ε < 1"),
            ScenarioKind::RelativeBound(RelativeBoundParams {
                operator: delta_well(1.0),
                eps: vec![0.5, 0.25, 0.1],
            }),
        ),
        "sectorial-build" => scenario(
            name,
            grid(1, 64),
            anchor(
                "generalized sum",
                "S = T +̃ Q is m-sectorial: |Im(Sx,x)| ≤ tan θ (Re(Sx,x) + M(x,x))",
            ),
            ScenarioKind::FormsumBuild(FormsumBuildParams {
                operator: OperatorSpec {
                    principal: vec![FormTerm::new(
                        MultiIndex::new(vec![1]),
                        MultiIndex::new(vec![1]),
                        CoefficientSpec::smooth(SmoothFunction::sine(1.0, 0.5, vec![1])),
                    )],
                    ..OperatorSpec::laplacian_power(1, 1)
                }
                .with_lower(FormTerm::new(
                    MultiIndex::zero(1),
                    MultiIndex::zero(1),
                    CoefficientSpec::weighted_delta(vec![0.5], Complex64::new(-1.0, 1.0)),
                )),
                eps: 0.5,
                export_matrix: true,
            }),
        ),
        other => {
            return Err(LabError::Config(format!(
                "unknown preset '{other}'; available: {}",
                PRESETS.join(", ")
            )))
        }
    };
    Ok(s)
}
