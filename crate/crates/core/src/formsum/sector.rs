use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    angle_grid, c, hermitian_defect, hermitian_eigenvalues, hermitian_part, inverse_checked,
    quadratic_form, CMatrix,
};
use crate::probes::{ProbeSet, PROBE_COUNT, PROBE_SEED};

/// Angles of the support-function grid.
pub const SECTOR_ANGLES: usize = 64;
const SECTOR_TOL: f64 = 1e-9;
/// Below this defect `S` is treated as Hermitian and the numerical range is
/// the interval `[λ_min, λ_max]`.
const HERMITIAN_TOL: f64 = 1e-12;

/// Sector `|Im λ| ≤ tan θ (Re λ + M)` containing the numerical range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorEstimate {
    pub vertex: f64,
    pub half_angle: f64,
    /// Support-function angles used.
    pub angles: usize,
    pub probes: usize,
    /// Largest `|Im λ| − tan θ (Re λ + M)` over the probe Rayleigh quotients.
    pub probe_violation: f64,
    /// Vertices of the outer polygon of the numerical range.
    #[serde(skip)]
    pub polygon: Vec<Complex64>,
}

impl SectorEstimate {
    pub fn excess(&self, z: Complex64) -> f64 {
        z.im.abs() - self.half_angle.tan() * (z.re + self.vertex)
    }

    pub fn contains(&self, z: Complex64, tol: f64) -> bool {
        self.excess(z) <= tol
    }

    /// Real point `−(M + 1 + tan θ·M)` left of the vertex.
    pub fn reference_point(&self) -> f64 {
        -(self.vertex + 1.0 + self.half_angle.tan() * self.vertex)
    }
}

/// Outer polygon of the numerical range from the support function
/// `h(θ) = λ_max(Re(e^{−iθ}S))` on a uniform angle grid.
fn outer_polygon(s: &CMatrix) -> Vec<Complex64> {
    if hermitian_defect(s) <= HERMITIAN_TOL {
        let values = hermitian_eigenvalues(&hermitian_part(s));
        return vec![c(values[0]), c(values[values.len() - 1])];
    }
    let angles: Vec<f64> = angle_grid(SECTOR_ANGLES).collect();
    let support: Vec<f64> = angles
        .par_iter()
        .map(|&t| {
            let rotated = s * Complex64::from_polar(1.0, -t);
            *hermitian_eigenvalues(&hermitian_part(&rotated))
                .last()
                .unwrap()
        })
        .collect();
    (0..SECTOR_ANGLES)
        .map(|k| {
            let k2 = (k + 1) % SECTOR_ANGLES;
            let (a, b) = (angles[k], angles[k2]);
            // x cos a + y sin a = h_a, x cos b + y sin b = h_b
            let det = (b - a).sin();
            let x = (support[k] * b.sin() - support[k2] * a.sin()) / det;
            let y = (support[k2] * a.cos() - support[k] * b.cos()) / det;
            Complex64::new(x, y)
        })
        .collect()
}

fn half_angle(points: &[Complex64], vertex: f64) -> f64 {
    points
        .iter()
        .map(|p| {
            let im = (p.im.abs() - SECTOR_TOL).max(0.0);
            if im == 0.0 {
                0.0
            } else if p.re + vertex <= 0.0 {
                std::f64::consts::FRAC_PI_2
            } else {
                (im / (p.re + vertex)).atan()
            }
        })
        .fold(0.0, f64::max)
}

/// Smallest vertex `M ≥ 0` with `Re W ≥ −M`, then the smallest angle; when the
/// range touches the vertex off the real axis the vertex is moved one unit
/// left.
pub fn sector_estimate(s: &CMatrix) -> Result<SectorEstimate> {
    if !s.is_square() || s.is_empty() {
        return Err(Error::Dimension(
            "sector estimate needs a non-empty square matrix".into(),
        ));
    }
    let polygon = outer_polygon(s);
    let min_re = polygon.iter().map(|p| p.re).fold(f64::INFINITY, f64::min);
    let mut vertex = (-min_re).max(0.0);
    let mut theta = half_angle(&polygon, vertex);
    let limit = std::f64::consts::FRAC_PI_2 - 1e-3;
    if theta >= limit {
        vertex += 1.0;
        theta = half_angle(&polygon, vertex);
    }
    if theta >= limit {
        return Err(Error::Sectoriality(format!(
            "numerical range needs half-angle {theta:.6} at vertex {vertex}"
        )));
    }
    let probes = ProbeSet::gaussian(s.nrows(), PROBE_COUNT, PROBE_SEED);
    let mut estimate = SectorEstimate {
        vertex,
        half_angle: theta,
        angles: SECTOR_ANGLES,
        probes: probes.len(),
        probe_violation: f64::NEG_INFINITY,
        polygon,
    };
    estimate.probe_violation = probes
        .iter()
        .map(|x| estimate.excess(quadratic_form(s, x)))
        .fold(f64::NEG_INFINITY, f64::max);
    if estimate.probe_violation > SECTOR_TOL {
        return Err(Error::Internal(format!(
            "sector misses a probe by {:e}",
            estimate.probe_violation
        )));
    }
    Ok(estimate)
}

/// `(S − z)^{-1}`, with `‖(S − z)R − I‖ ≤ 1e−9` enforced.
pub fn resolvent(s: &CMatrix, z: Complex64) -> Result<CMatrix> {
    let mut shifted = s.clone();
    for i in 0..s.nrows() {
        shifted[(i, i)] -= z;
    }
    inverse_checked(&shifted, 1e-9).map_err(|e| Error::InSpectrum {
        point: format!("{z}"),
        detail: e.to_string(),
    })
}
