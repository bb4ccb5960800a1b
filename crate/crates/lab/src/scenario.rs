//! Scenario files: one experiment per JSON document.

use std::path::PathBuf;

use formsum_core::coefficients::{CoefficientSpec, MollifierSpec};
use formsum_core::formsum::OperatorSpec;
use formsum_core::grid::TorusGrid;
use formsum_core::multipliers::{EmbeddingLemma, EmbeddingParams, SampleSpec};
use formsum_core::spectra::StudyOptions;
use serde::{Deserialize, Serialize};

use crate::error::LabError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub grid: TorusGrid,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Mathematical result the scenario exercises.
    #[serde(default)]
    pub anchor: Option<Anchor>,
    #[serde(flatten)]
    pub body: ScenarioKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub result: String,
    pub statement: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "snake_case")]
pub enum ScenarioKind {
    Garding(GardingParams),
    MultiplierTable(MultiplierTableParams),
    EmbeddingSweep(EmbeddingSweepParams),
    RelativeBound(RelativeBoundParams),
    FormsumBuild(FormsumBuildParams),
    ConvergenceStudy(StudyParams),
    SymmetricCompact(StudyParams),
    ResolventIdentity(ResolventIdentityParams),
}

impl ScenarioKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Garding(_) => "garding",
            Self::MultiplierTable(_) => "multiplier_table",
            Self::EmbeddingSweep(_) => "embedding_sweep",
            Self::RelativeBound(_) => "relative_bound",
            Self::FormsumBuild(_) => "formsum_build",
            Self::ConvergenceStudy(_) => "convergence_study",
            Self::SymmetricCompact(_) => "symmetric_compact",
            Self::ResolventIdentity(_) => "resolvent_identity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GardingParams {
    pub operator: OperatorSpec,
    /// Asserted envelope `[lo, hi]` for δ.
    #[serde(default)]
    pub delta_range: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplierTableParams {
    #[serde(default)]
    pub coefficients: Vec<CoefficientSpec>,
    /// Seeded random fields added to the coefficient list.
    #[serde(default)]
    pub random_fields: Option<RandomFields>,
    /// `(k, l)` pairs.
    pub orders: Vec<(f64, f64)>,
    /// Bandlimits to tabulate; the scenario grid's when empty.
    #[serde(default)]
    pub bandlimits: Vec<usize>,
    /// `((k₁, l₁), (k₂, l₂))` inclusions to check on every coefficient.
    #[serde(default)]
    pub interpolation: Vec<((f64, f64), (f64, f64))>,
    #[serde(default)]
    pub tensor_bound: Option<TensorBound>,
}

/// Complex Gaussian Fourier coefficients with `(1+|j|²)^{-decay/2}` envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomFields {
    pub count: usize,
    #[serde(default = "default_decay")]
    pub decay: f64,
}

fn default_decay() -> f64 {
    1.0
}

/// `‖φ⊗ψ‖_{M[k,−l]}(T²) ≤ ‖φ‖_{M[k,−l]}(T¹)·sup|ψ|·(1 + slack)` for every
/// tensor-product coefficient in the table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorBound {
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSweepParams {
    pub lemma: EmbeddingLemma,
    pub params: EmbeddingParams,
    /// Random families take their `seed` as an offset to the scenario seed.
    pub samples: Vec<SampleSpec>,
    #[serde(default)]
    pub bandlimits: Vec<usize>,
    /// Largest accepted `(max − min)/min` of the sweep maxima across bandlimits.
    #[serde(default = "default_stability")]
    pub stability_tolerance: f64,
}

fn default_stability() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelativeBoundParams {
    pub operator: OperatorSpec,
    pub eps: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormsumBuildParams {
    pub operator: OperatorSpec,
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// Also write `S` in the binary matrix layout.
    #[serde(default)]
    pub export_matrix: bool,
}

fn default_eps() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyParams {
    pub operator: OperatorSpec,
    pub schedule: Vec<MollifierSpec>,
    #[serde(default)]
    pub options: StudyOptions,
    /// Coefficient `c` of a `cδ` well: the limit's lowest eigenvalue must
    /// match `−κ²` with `κ tanh(πκ) = −c/2`.
    #[serde(default)]
    pub secular_oracle: Option<SecularOracle>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SecularOracle {
    pub coupling: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolventIdentityParams {
    /// Operator whose lower-order coefficients are mollified.
    #[serde(default)]
    pub operator: Option<OperatorSpec>,
    #[serde(default)]
    pub mollifiers: Vec<MollifierSpec>,
    /// Include `T = −Δ+1`, `Q = 0`, `Q_n = I/n` for these `n`.
    #[serde(default)]
    pub diagonal_cases: Vec<u32>,
    /// Seeded random sectorial principal parts with a rank-one `Q`.
    #[serde(default)]
    pub random_cases: usize,
    #[serde(default = "default_identity_tol")]
    pub tolerance: f64,
}

fn default_identity_tol() -> f64 {
    1e-10
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, LabError> {
        serde_json::from_str(text).map_err(|e| LabError::Config(format!("invalid scenario: {e}")))
    }

    /// Canonical JSON used for hashing and for the manifest.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("scenario serializes")
    }
}
