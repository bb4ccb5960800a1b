//! Browser bindings: three small computations behind `www/index.html`.
//!
//! Each export returns a JSON string so the page needs no glue beyond
//! `JSON.parse`. The `*_json` functions are the plain-Rust versions the
//! exports wrap; they are what the tests call.

use std::sync::Arc;

use formsum_core::coefficients::{CoefficientSpec, MollifierSpec};
use formsum_core::formsum::{
    build_generalized_sum, lower_matrix, mollified, FormTerm, OperatorSpec, PrincipalPart,
};
use formsum_core::grid::MultiIndex;
use formsum_core::multipliers::spec_multiplier_norm;
use formsum_core::spectra::{compute_spectrum, Window};
use num_complex::Complex64;
use serde::Serialize;
use wasm_bindgen::prelude::*;

// Dense eigensolves in the browser get slow past a few hundred modes.
const MAX_BAND: usize = 96;

#[derive(Debug, Serialize)]
pub struct WellSpectrum {
    pub limit: Vec<[f64; 2]>,
    pub mollified: Vec<[f64; 2]>,
    pub bound_state: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Sector {
    /// Apex on the real axis.
    pub vertex: f64,
    pub half_angle: f64,
    pub polygon: Vec<[f64; 2]>,
    pub eigenvalues: Vec<[f64; 2]>,
}

fn check_band(n: usize) -> Result<(), String> {
    if (1..=MAX_BAND).contains(&n) {
        Ok(())
    } else {
        Err(format!("bandlimit must lie in 1..={MAX_BAND}"))
    }
}

fn well(weight: Complex64, order: usize) -> OperatorSpec {
    OperatorSpec::laplacian_power(1, 1).with_lower(FormTerm::new(
        MultiIndex::new(vec![order as u32]),
        MultiIndex::zero(1),
        CoefficientSpec::weighted_delta(vec![0.0], weight),
    ))
}

fn points(z: impl Iterator<Item = Complex64>) -> Vec<[f64; 2]> {
    z.map(|z| [z.re, z.im]).collect()
}

/// Bound state of `−u″ + cδ` on the circle: `−κ²` with `κ tanh(πκ) = −c/2`.
pub fn bound_state(c: f64) -> Option<f64> {
    if c >= 0.0 {
        return None;
    }
    let f = |k: f64| k * (std::f64::consts::PI * k).tanh() + c / 2.0;
    let (mut lo, mut hi) = (0.0, 1.0 - c);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let k = 0.5 * (lo + hi);
    Some(-k * k)
}

/// Windowed spectra of `−Δ + cδ` and of its Gaussian-mollified version.
pub fn well_spectrum(n: usize, c: f64, h: f64) -> Result<WellSpectrum, String> {
    check_band(n)?;
    if !(h > 0.0 && h.is_finite() && c.is_finite()) {
        return Err("need finite c and h > 0".into());
    }
    let spec = well(Complex64::new(c, 0.0), 0);
    let grid = spec.grid(n).map_err(|e| e.to_string())?;
    let principal = Arc::new(PrincipalPart::new(&spec, &grid).map_err(|e| e.to_string())?);
    let window = Window::default();
    let spectrum = |spec: &OperatorSpec| -> Result<Vec<[f64; 2]>, String> {
        let q = lower_matrix(spec, &grid).map_err(|e| e.to_string())?;
        let sum = build_generalized_sum(&principal, q, None).map_err(|e| e.to_string())?;
        let report = compute_spectrum(&sum, window).map_err(|e| e.to_string())?;
        Ok(points(report.windowed()))
    };
    let smooth =
        mollified(&spec, &MollifierSpec::Gaussian { h }, &grid).map_err(|e| e.to_string())?;
    Ok(WellSpectrum {
        limit: spectrum(&spec)?,
        mollified: spectrum(&smooth)?,
        bound_state: bound_state(c),
    })
}

/// `‖δ‖` as a multiplier from `H^k` to `H^{-l}` on the circle.
pub fn delta_norm(k: f64, l: f64, n: usize) -> Result<f64, String> {
    check_band(n)?;
    let grid = formsum_core::grid::TorusGrid::new(1, n).map_err(|e| e.to_string())?;
    spec_multiplier_norm(&CoefficientSpec::delta(vec![0.0]), k, l, &grid).map_err(|e| e.to_string())
}

/// Sector enclosing the numerical range of `−Δ + (a+ib) δ′`.
pub fn drift_sector(n: usize, a: f64, b: f64) -> Result<Sector, String> {
    check_band(n)?;
    let spec = well(Complex64::new(a, b), 1);
    let grid = spec.grid(n).map_err(|e| e.to_string())?;
    let principal = Arc::new(PrincipalPart::new(&spec, &grid).map_err(|e| e.to_string())?);
    let q = lower_matrix(&spec, &grid).map_err(|e| e.to_string())?;
    let sum = build_generalized_sum(&principal, q, None).map_err(|e| e.to_string())?;
    let report = compute_spectrum(&sum, Window::default()).map_err(|e| e.to_string())?;
    // The sector is fitted to the shifted matrix; report it unshifted.
    let shift = report.shift;
    Ok(Sector {
        vertex: -sum.sector.vertex - shift,
        half_angle: sum.sector.half_angle,
        polygon: points(sum.sector.polygon.iter().map(|z| z - shift)),
        eigenvalues: points(report.windowed()),
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = wellSpectrum)]
pub fn well_spectrum_js(n: usize, c: f64, h: f64) -> Result<String, JsValue> {
    to_js(well_spectrum(n, c, h))
}

#[wasm_bindgen(js_name = deltaNorm)]
pub fn delta_norm_js(k: f64, l: f64, n: usize) -> Result<f64, JsValue> {
    delta_norm(k, l, n).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = driftSector)]
pub fn drift_sector_js(n: usize, a: f64, b: f64) -> Result<String, JsValue> {
    to_js(drift_sector(n, a, b))
}
