//! Browser bindings. Each export returns a JSON string; the `*_json`
//! functions do the work and are plain Rust so they test natively.

use poisson_spectral::diophantine::{classify, profile, MAX_DEPTH};
use poisson_spectral::homology::{zeroth_homology, MtSettings};
use poisson_spectral::leafwise::DEFAULT_DIVISOR_FLOOR;
use poisson_spectral::mapping_torus::orbit_decomposition;
use poisson_spectral::models::{
    ConstantTorusModel, CosymplecticTorusModel, MappingTorusModel, Model,
};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Keeps the page responsive; the brute-force table is O(N²).
const MAX_TRUNCATION: i64 = 64;

fn check_truncation(n: i64) -> Result<(), String> {
    if (1..=MAX_TRUNCATION).contains(&n) {
        Ok(())
    } else {
        Err(format!("N must be between 1 and {MAX_TRUNCATION}, got {n}"))
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct DivisorView {
    alpha: f64,
    /// `(N, min_{0<|k|≤N} |k₁ + k₂α|)`.
    table: Vec<(i64, f64)>,
    quotients: Vec<u64>,
    convergents: Vec<(u64, u64)>,
    regime: String,
    exponent_estimate: Option<f64>,
    caveat: String,
    /// First `N` whose smallest divisor `2π·d` drops under the default floor.
    first_resonant_n: Option<i64>,
}

pub fn divisor_profile_json(alpha: f64, n_max: i64) -> Result<String, String> {
    check_truncation(n_max)?;
    let p = profile(alpha, MAX_DEPTH, n_max).map_err(|e| e.to_string())?;
    let c = classify(&p);
    let first_resonant_n = p
        .min_divisor_table
        .iter()
        .find(|(_, d)| 2.0 * std::f64::consts::PI * d < DEFAULT_DIVISOR_FLOOR)
        .map(|(n, _)| *n);
    to_json(&DivisorView {
        alpha,
        table: p.min_divisor_table,
        quotients: p.expansion.quotients,
        convergents: p.expansion.convergents,
        regime: format!("{:?}", c.regime),
        exponent_estimate: c.exponent_estimate,
        caveat: c.caveat,
        first_resonant_n,
    })
}

#[derive(Serialize)]
struct OrbitView {
    lambda: f64,
    log_lambda: f64,
    v: [f64; 2],
    /// `ã₀(0)` for the constant top form: `-1/(λ-1)`.
    unit_seam_constant: f64,
    /// Each orbit as `(j, k₁, k₂, |2π k·v|)` in increasing `j`.
    orbits: Vec<Vec<(i64, i64, i64, f64)>>,
}

pub fn mapping_torus_orbits_json(matrix: [[i64; 2]; 2], n: i64) -> Result<String, String> {
    check_truncation(n)?;
    let m = MappingTorusModel::new(matrix).map_err(|e| e.to_string())?;
    let v = m.v();
    let orbits = orbit_decomposition(&m, n)
        .into_iter()
        .map(|o| {
            o.members()
                .into_iter()
                .map(|(j, k)| {
                    let d = (2.0 * std::f64::consts::PI * k.dot(&v)).abs();
                    (j, k.0[0], k.0[1], d)
                })
                .collect()
        })
        .collect();
    to_json(&OrbitView {
        lambda: m.lambda(),
        log_lambda: m.log_lambda(),
        v,
        unit_seam_constant: -1.0 / (m.lambda() - 1.0),
        orbits,
    })
}

#[derive(Serialize)]
struct Count {
    n: i64,
    dim: usize,
    stable: bool,
    reliable: bool,
}

#[derive(Serialize)]
struct ScanView {
    alpha: f64,
    kronecker: Vec<Count>,
    fibration: Vec<Count>,
    symplectic: Vec<Count>,
}

fn scan(model: &Model, n_max: i64) -> Result<Vec<Count>, String> {
    (1..=n_max)
        .map(|n| {
            let h = zeroth_homology(model, n, DEFAULT_DIVISOR_FLOOR, &MtSettings::default())
                .map_err(|e| e.to_string())?;
            Ok(Count {
                n,
                dim: h.dim,
                stable: h.stable,
                reliable: h.reliable,
            })
        })
        .collect()
}

/// `dim H₀` against `N` for the Kronecker model with slope `alpha`, the
/// fibration and the symplectic 2-torus.
pub fn homology_scan_json(alpha: f64, n_max: i64) -> Result<String, String> {
    if !(1..=24).contains(&n_max) {
        return Err(format!("N must be between 1 and 24, got {n_max}"));
    }
    let kron = CosymplecticTorusModel::kronecker_t3(alpha).map_err(|e| e.to_string())?;
    to_json(&ScanView {
        alpha,
        kronecker: scan(&Model::Cosymplectic(kron), n_max)?,
        fibration: scan(
            &Model::Cosymplectic(CosymplecticTorusModel::fibration_t3()),
            n_max,
        )?,
        symplectic: scan(
            &Model::ConstantTorus(ConstantTorusModel::symplectic_t2()),
            n_max,
        )?,
    })
}

fn js(r: Result<String, String>) -> Result<String, JsValue> {
    r.map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn divisor_profile(alpha: f64, n_max: i32) -> Result<String, JsValue> {
    js(divisor_profile_json(alpha, n_max as i64))
}

#[wasm_bindgen]
pub fn mapping_torus_orbits(a: i32, b: i32, c: i32, d: i32, n: i32) -> Result<String, JsValue> {
    js(mapping_torus_orbits_json(
        [[a as i64, b as i64], [c as i64, d as i64]],
        n as i64,
    ))
}

#[wasm_bindgen]
pub fn homology_scan(alpha: f64, n_max: i32) -> Result<String, JsValue> {
    js(homology_scan_json(alpha, n_max as i64))
}
