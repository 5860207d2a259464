//! Top-degree Poisson cohomology of a constant bivector, assembled from the
//! Lichnerowicz differential on multivector fields.
//!
//! For constant `π` the differential `[π, ·]` preserves each Fourier mode.
//! On `e_k Y` with `Y` a constant `(m-1)`-vector it acts as
//! `Y ↦ 2πi (Pk) ∧ Y` up to sign, so the top cokernel of mode `k` is the
//! cokernel of the `1 × m` block `[(−1)^j (Pk)_j]`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::modes_in_box;
use crate::leafwise::RESONANCE_EPS;
use crate::models::Model;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopPoissonEstimate {
    pub truncation: i64,
    /// Degree of the cohomology, the manifold dimension `m`.
    pub degree: usize,
    pub dim: usize,
}

pub fn top_poisson_cohomology_dim(model: &Model, n: i64) -> Result<TopPoissonEstimate> {
    let c = model.as_constant().ok_or_else(|| Error::UnsupportedModel {
        operation: "top_poisson_cohomology_dim",
        reason: "needs a constant-bivector torus model".into(),
    })?;
    if n < 1 {
        return Err(Error::InvalidConfig(format!(
            "truncation must be ≥ 1, got {n}"
        )));
    }
    let m = c.dim();
    let p = c.bivector();
    let mut dim = 0;
    for k in modes_in_box(m, n) {
        let block = DMatrix::from_fn(1, m, |_, j| {
            let pk: f64 = (0..m).map(|i| p[j][i] * k.0[i] as f64).sum();
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            2.0 * std::f64::consts::PI * sign * pk
        });
        // codomain of the block is one-dimensional
        dim += 1 - block.rank(2.0 * std::f64::consts::PI * RESONANCE_EPS);
    }
    Ok(TopPoissonEstimate {
        truncation: n,
        degree: m,
        dim,
    })
}
