//! Zeroth Poisson homology through top foliated cohomology, and the
//! verdicts built on it.
//!
//! `H₀` of a regular Poisson manifold is computed as the top leafwise
//! cohomology: `f` is a sum of brackets exactly when `f·ω_F` is
//! leafwise exact. Every count here is a statement at a truncation `N`.

mod commutator;
mod lichnerowicz;
mod verdict;

pub use commutator::{
    decompose_commutators, independent_bracket, verify_certificate, CommutatorCertificate,
};
pub use lichnerowicz::{top_poisson_cohomology_dim, TopPoissonEstimate};
pub use verdict::{
    decide, modular_class, perfectness_verdict, ModularReport, PerfectnessVerdict, VerdictRule,
    VerdictStatus, VolumeDescriptor, MODULAR_TOL,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::Mode;
use crate::leafwise::{casimir_count, estimate_h_top_dim};
pub use crate::mapping_torus::MtSettings;
use crate::mapping_torus::{h2_vanishing_certificate, H2Certificate};
use crate::models::{MappingTorusModel, Model};

pub const NORMALIZATION_NOTE: &str =
    "top forms are written in the leafwise Liouville coframe; brackets use the basis e_k = exp(2πi k·x)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HomologyMethod {
    /// Obstructed-mode count of the leafwise differential.
    ModeCount,
    /// Every sampled top form was shown exact.
    VanishingCertificate,
    /// Product of the factors' top-degree counts.
    Kunneth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomologyReport {
    pub model: String,
    pub truncation: i64,
    pub dim: usize,
    /// The same count at truncation `⌈N/2⌉`.
    pub dim_half: usize,
    pub stable: bool,
    /// False when some mode fell between the exact-resonance threshold and the divisor floor.
    pub reliable: bool,
    pub resonant_count: usize,
    /// One descriptor per surviving class; `dim == basis.len()`.
    pub basis: Vec<String>,
    pub smallest_divisor: Option<f64>,
    pub divisor_floor: f64,
    pub method: HomologyMethod,
    pub normalization: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Box<H2Certificate>>,
}

fn functional(k: &Mode) -> String {
    if k.is_zero() {
        "mean".into()
    } else {
        format!("coefficient of e_{k}")
    }
}

pub fn zeroth_homology(
    model: &Model,
    n: i64,
    divisor_floor: f64,
    mt: &MtSettings,
) -> Result<HomologyReport> {
    if n < 1 {
        return Err(Error::InvalidConfig(format!(
            "truncation must be ≥ 1, got {n}"
        )));
    }
    if let Some(c) = model.as_constant() {
        let est = estimate_h_top_dim(&c, n, divisor_floor)?;
        return Ok(HomologyReport {
            model: model.label(),
            truncation: n,
            dim: est.dim,
            dim_half: est.dim_half,
            stable: est.stable,
            reliable: est.reliable(),
            resonant_count: est.resonant_count,
            basis: est.obstructed.iter().map(functional).collect(),
            smallest_divisor: est.smallest_divisor,
            divisor_floor,
            method: HomologyMethod::ModeCount,
            normalization: NORMALIZATION_NOTE.into(),
            certificate: None,
        });
    }
    match model {
        Model::MappingTorus(m) => mapping_torus_homology(model, m, n, divisor_floor, mt),
        Model::Product(p) => {
            let left = zeroth_homology(&p.left, n, divisor_floor, mt)?;
            let right = zeroth_homology(&p.right, n, divisor_floor, mt)?;
            Ok(product_report(model.label(), &left, &right))
        }
        _ => unreachable!("torus models flatten to constant bivectors"),
    }
}

fn mapping_torus_homology(
    model: &Model,
    m: &MappingTorusModel,
    n: i64,
    divisor_floor: f64,
    mt: &MtSettings,
) -> Result<HomologyReport> {
    let cert = h2_vanishing_certificate(m, n, mt, divisor_floor)?;
    let half = h2_vanishing_certificate(m, (n + 1) / 2, mt, divisor_floor)?;
    for c in [&cert, &half] {
        if !c.passed {
            return Err(Error::SolverFailure(format!(
                "vanishing certificate failed at N = {}: max residual {:e} > tol {:e}",
                c.truncation, c.max_residual, c.tol
            )));
        }
    }
    Ok(HomologyReport {
        model: model.label(),
        truncation: n,
        dim: 0,
        dim_half: 0,
        stable: true,
        reliable: true,
        resonant_count: 0,
        basis: vec![],
        smallest_divisor: cert.smallest_divisor,
        divisor_floor,
        method: HomologyMethod::VanishingCertificate,
        normalization: format!(
            "{NORMALIZATION_NOTE}; mapping-torus top forms use the cover coframe v*∧dt"
        ),
        certificate: Some(Box::new(cert)),
    })
}

fn product_report(label: String, left: &HomologyReport, right: &HomologyReport) -> HomologyReport {
    let basis = left
        .basis
        .iter()
        .flat_map(|a| right.basis.iter().map(move |b| format!("{a} ⊗ {b}")))
        .collect();
    HomologyReport {
        model: label,
        truncation: left.truncation,
        dim: left.dim * right.dim,
        dim_half: left.dim_half * right.dim_half,
        stable: left.dim * right.dim == left.dim_half * right.dim_half,
        reliable: left.reliable && right.reliable,
        resonant_count: left.resonant_count + right.resonant_count,
        basis,
        smallest_divisor: match (left.smallest_divisor, right.smallest_divisor) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        },
        divisor_floor: left.divisor_floor,
        method: HomologyMethod::Kunneth,
        normalization: NORMALIZATION_NOTE.into(),
        certificate: None,
    }
}

/// Foliated cohomology dimensions by degree; `None` marks a degree this
/// crate does not compute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeTable {
    pub dims: Vec<Option<usize>>,
}

impl DegreeTable {
    /// The one-point manifold: `H⁰ = 1`.
    pub fn point() -> Self {
        DegreeTable {
            dims: vec![Some(1)],
        }
    }

    pub fn top_degree(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn top(&self) -> Option<usize> {
        *self.dims.last().expect("tables have at least degree 0")
    }

    pub fn is_partial(&self) -> bool {
        self.dims.iter().any(Option::is_none)
    }

    pub fn missing_degrees(&self) -> Vec<usize> {
        (0..self.dims.len())
            .filter(|&d| self.dims[d].is_none())
            .collect()
    }

    /// Degree 0 (Casimirs) and top degree; middle degrees unknown.
    pub fn for_model(model: &Model, n: i64, divisor_floor: f64, mt: &MtSettings) -> Result<Self> {
        match model {
            Model::Product(p) => Ok(kunneth_compose(
                &Self::for_model(&p.left, n, divisor_floor, mt)?,
                &Self::for_model(&p.right, n, divisor_floor, mt)?,
            )),
            _ => {
                let top = zeroth_homology(model, n, divisor_floor, mt)?.dim;
                let casimirs = match model.as_constant() {
                    Some(c) => casimir_count(&c, n),
                    // dense leaves: only constants
                    None => 1,
                };
                let r = model.rank();
                let mut dims = vec![None; r + 1];
                dims[0] = Some(casimirs);
                dims[r] = Some(top);
                Ok(DegreeTable { dims })
            }
        }
    }
}

/// `dim Hⁿ = Σ_{p+q=n} dim Hᵖ · dim H^q`; a degree is `None` only when a
/// missing entry meets a nonzero partner.
pub fn kunneth_compose(left: &DegreeTable, right: &DegreeTable) -> DegreeTable {
    let top = left.top_degree() + right.top_degree();
    let dims = (0..=top)
        .map(|n| {
            let mut sum = Some(0usize);
            for p in 0..=n.min(left.top_degree()) {
                let q = n - p;
                if q > right.top_degree() {
                    continue;
                }
                let term = match (left.dims[p], right.dims[q]) {
                    (Some(a), Some(b)) => Some(a * b),
                    (Some(0), None) | (None, Some(0)) => Some(0),
                    _ => None,
                };
                sum = sum.zip(term).map(|(s, t)| s + t);
            }
            sum
        })
        .collect();
    DegreeTable { dims }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::leafwise::DEFAULT_DIVISOR_FLOOR;
    use crate::models::{ConstantTorusModel, CosymplecticTorusModel};

    fn golden() -> f64 {
        (5f64.sqrt() - 1.0) / 2.0
    }

    fn t2() -> Model {
        Model::ConstantTorus(ConstantTorusModel::symplectic_t2())
    }

    fn kron() -> Model {
        Model::Cosymplectic(CosymplecticTorusModel::kronecker_t3(golden()).unwrap())
    }

    fn fibration() -> Model {
        Model::Cosymplectic(CosymplecticTorusModel::fibration_t3())
    }

    fn mt() -> MtSettings {
        MtSettings {
            trials: 4,
            ..Default::default()
        }
    }

    #[test]
    fn symplectic_t2_has_the_mean() {
        let r = zeroth_homology(&t2(), 6, DEFAULT_DIVISOR_FLOOR, &mt()).unwrap();
        assert_eq!(r.dim, 1);
        assert_eq!(r.basis, vec!["mean".to_string()]);
        assert!(r.stable && r.reliable);
    }

    #[test]
    fn fibration_grows_with_truncation() {
        for n in [2, 4, 7] {
            let r = zeroth_homology(&fibration(), n, DEFAULT_DIVISOR_FLOOR, &mt()).unwrap();
            assert_eq!(r.dim, 2 * n as usize + 1);
            assert_eq!(r.dim, r.basis.len());
            assert!(!r.stable);
        }
    }

    #[test]
    fn mapping_torus_vanishes() {
        let m = Model::MappingTorus(MappingTorusModel::cat_map());
        let r = zeroth_homology(&m, 4, DEFAULT_DIVISOR_FLOOR, &mt()).unwrap();
        assert_eq!(r.dim, 0);
        assert!(r.certificate.as_ref().unwrap().passed);
    }

    #[test]
    fn kunneth_matches_direct_count() {
        let n = 3;
        let f = DEFAULT_DIVISOR_FLOOR;
        for (a, b) in [(kron(), t2()), (fibration(), t2()), (kron(), fibration())] {
            let prod = Model::product(a.clone(), b.clone());
            let direct = zeroth_homology(&prod, n, f, &mt()).unwrap();
            let la = zeroth_homology(&a, n, f, &mt()).unwrap();
            let lb = zeroth_homology(&b, n, f, &mt()).unwrap();
            assert_eq!(direct.dim, la.dim * lb.dim);
            let table = DegreeTable::for_model(&prod, n, f, &mt()).unwrap();
            assert_eq!(table.top(), Some(direct.dim));
        }
    }

    #[test]
    fn kunneth_tables() {
        let f = DEFAULT_DIVISOR_FLOOR;
        let k = DegreeTable::for_model(&kron(), 4, f, &mt()).unwrap();
        let s = DegreeTable::for_model(&t2(), 4, f, &mt()).unwrap();
        let p = kunneth_compose(&k, &s);
        assert_eq!(p.top(), Some(1));
        assert_eq!(p.dims[0], Some(1));
        assert!(p.is_partial());
        assert_eq!(kunneth_compose(&k, &DegreeTable::point()), k);
        assert_eq!(kunneth_compose(&DegreeTable::point(), &s), s);

        let a = DegreeTable::for_model(
            &Model::MappingTorus(MappingTorusModel::cat_map()),
            2,
            f,
            &mt(),
        )
        .unwrap();
        assert_eq!(a.dims, vec![Some(1), None, Some(0)]);
        let p = kunneth_compose(&a, &s);
        assert_eq!(p.top(), Some(0));
    }
}
