//! Explicit sums of brackets for torus models whose only obstructed mode is `k = 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{Mode, TrigPoly};
use crate::leafwise::{classify_mode, ModeClass, DEFAULT_DIVISOR_FLOOR};
use crate::models::Model;

/// `f = obstruction + Σ {gᵢ, hᵢ}` up to `residual`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommutatorCertificate {
    /// The constant bivector the brackets are taken with.
    pub bivector: Vec<Vec<f64>>,
    pub target: TrigPoly,
    pub pairs: Vec<(TrigPoly, TrigPoly)>,
    pub obstruction: Complex64,
    pub residual: f64,
}

/// `|4π² eᵀ P c|` for the bracket `{e_e, e_{c-e}} = -4π² (eᵀPc) e_c`.
fn pairing(p: &[Vec<f64>], a: &[i64], b: &[i64]) -> f64 {
    let mut s = 0.0;
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            s += *ai as f64 * p[i][j] * *bj as f64;
        }
    }
    s
}

pub fn decompose_commutators(model: &Model, f: &TrigPoly, n: i64) -> Result<CommutatorCertificate> {
    let c = model.as_constant().ok_or_else(|| Error::UnsupportedModel {
        operation: "decompose_commutators",
        reason: "needs a constant-bivector torus model".into(),
    })?;
    if f.dim() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            got: f.dim(),
        });
    }
    if f.degree() > n {
        return Err(Error::InvalidConfig(format!(
            "input has degree {} above the truncation {n}",
            f.degree()
        )));
    }
    let dim = c.dim();
    let p = c.bivector().to_vec();
    // axes e_i, tried in lexicographic order of the unit vectors
    let mut axes: Vec<Mode> = (0..dim).map(|i| Mode::unit(dim, i, 1)).collect();
    axes.sort();
    let mut pairs = Vec::new();
    let mut obstruction = Complex64::new(0.0, 0.0);
    for (k, coeff) in f.terms() {
        if k.is_zero() {
            obstruction = *coeff;
            continue;
        }
        match classify_mode(&c, k, DEFAULT_DIVISOR_FLOOR) {
            ModeClass::Obstructed => {
                return Err(Error::UnsupportedModel {
                    operation: "decompose_commutators",
                    reason: format!(
                        "mode {k} is a non-constant obstruction; only the mean can be split off"
                    ),
                })
            }
            ModeClass::Resonant => {
                return Err(Error::SolverFailure(format!(
                    "mode {k} is numerically resonant"
                )));
            }
            ModeClass::Solvable { .. } => {}
        }
        let chosen = axes.iter().find_map(|e| {
            let s = 4.0 * PI * PI * pairing(&p, e.as_slice(), k.as_slice());
            (s.abs() >= DEFAULT_DIVISOR_FLOOR).then_some((e, s))
        });
        let Some((e, s)) = chosen else {
            return Err(Error::SolverFailure(format!(
                "no axis pairs with mode {k} above the floor"
            )));
        };
        // {a e_e, e_{k-e}} = -a s e_k
        let scale = -coeff / s;
        pairs.push((
            TrigPoly::monomial(e.clone(), scale),
            TrigPoly::monomial(k.sub(e), 1.0),
        ));
    }
    let mut cert = CommutatorCertificate {
        bivector: p,
        target: f.clone(),
        pairs,
        obstruction,
        residual: 0.0,
    };
    cert.residual = verify_certificate(&cert)?;
    Ok(cert)
}

/// `{g,h} = Σ_{a,b} g_a h_b (2πi)² aᵀPb e_{a+b}`, term by term.
pub fn independent_bracket(p: &[Vec<f64>], g: &TrigPoly, h: &TrigPoly) -> Result<TrigPoly> {
    let mut terms = Vec::new();
    for (a, ga) in g.terms() {
        for (b, hb) in h.terms() {
            let w = -4.0 * PI * PI * pairing(p, a.as_slice(), b.as_slice());
            if w != 0.0 {
                terms.push((a.add(b), ga * hb * w));
            }
        }
    }
    TrigPoly::from_terms(g.dim(), terms)
}

/// Recomputes `sup-estimate(f - obstruction - Σ{g,h})` from the certificate alone.
pub fn verify_certificate(cert: &CommutatorCertificate) -> Result<f64> {
    let dim = cert.target.dim();
    if cert.bivector.len() != dim || cert.bivector.iter().any(|r| r.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: cert.bivector.len(),
        });
    }
    let mut rest = cert
        .target
        .sub(&TrigPoly::constant(dim, cert.obstruction))?;
    for (g, h) in &cert.pairs {
        rest = rest.sub(&independent_bracket(&cert.bivector, g, h)?)?;
    }
    Ok(rest.sup_norm_estimate())
}
