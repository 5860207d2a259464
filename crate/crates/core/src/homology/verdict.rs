use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::HomologyReport;
use crate::error::{Error, Result};
use crate::mapping_torus::cumulative_integral;
use crate::models::Model;

/// A modular obstruction below this counts as zero.
pub const MODULAR_TOL: f64 = 1e-10;

/// Grid for the zero-mode solve of the mapping-torus modular equation.
const MODULAR_GRID: usize = 64;

/// Positive constant density `ρ` times the standard volume of the torus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VolumeDescriptor {
    pub density: f64,
}

impl Default for VolumeDescriptor {
    fn default() -> Self {
        VolumeDescriptor { density: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModularReport {
    pub model: String,
    pub volume: String,
    pub modular_field: String,
    pub is_hamiltonian: bool,
    pub obstruction: f64,
    pub tolerance: f64,
}

fn volume_label(model: &Model, rho: f64) -> String {
    let base = match model {
        Model::MappingTorus(_) => "dx∧dy∧dt".to_string(),
        Model::Cosymplectic(_) => "θ∧η".to_string(),
        _ => format!("dx¹∧…∧dx^{}", model.dim()),
    };
    if rho == 1.0 {
        base
    } else {
        format!("{rho} {base}")
    }
}

pub fn modular_class(model: &Model, volume: VolumeDescriptor) -> Result<ModularReport> {
    if !(volume.density > 0.0 && volume.density.is_finite()) {
        return Err(Error::InvalidVolume(format!(
            "density {} is not positive",
            volume.density
        )));
    }
    let (field, obstruction) = match model {
        // div of X_f = Σ ∂_i(P_ij ∂_j f) vanishes for constant P and constant density
        Model::ConstantTorus(_) | Model::Cosymplectic(_) => ("0".to_string(), 0.0),
        Model::MappingTorus(m) => {
            let l = m.log_lambda();
            // X_g = X_mod forces V g = 0 and ∂_t g = log λ on the zero mode
            let rhs = vec![Complex64::new(l, 0.0); MODULAR_GRID + 1];
            let g = cumulative_integral(&rhs, 1.0 / MODULAR_GRID as f64);
            let jump = (g[MODULAR_GRID] - g[0]).norm();
            (format!("-{l} λ^(-t) V"), jump)
        }
        Model::Product(p) => {
            let l = modular_class(&p.left, volume)?;
            let r = modular_class(&p.right, VolumeDescriptor::default())?;
            (
                format!("({}) ⊕ ({})", l.modular_field, r.modular_field),
                l.obstruction.max(r.obstruction),
            )
        }
    };
    Ok(ModularReport {
        model: model.label(),
        volume: volume_label(model, volume.density),
        modular_field: field,
        is_hamiltonian: obstruction <= MODULAR_TOL,
        obstruction,
        tolerance: MODULAR_TOL,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictStatus {
    Perfect,
    NotPerfect,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictRule {
    NumericallyResonant,
    DimAtLeastTwo,
    TruncationUnstable,
    VanishingHomology,
    UnimodularDimOne,
    NonUnimodularDimOne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfectnessVerdict {
    pub status: VerdictStatus,
    pub rule: VerdictRule,
    pub justification: String,
    pub dim: usize,
    pub stable: bool,
    pub reliable: bool,
    pub unimodular: bool,
    pub truncation: i64,
    pub divisor_floor: f64,
}

pub fn perfectness_verdict(h: &HomologyReport, m: &ModularReport) -> Result<PerfectnessVerdict> {
    if h.model != m.model {
        return Err(Error::MismatchedReports(format!(
            "{} vs {}",
            h.model, m.model
        )));
    }
    let (status, rule, why) = decide(h.dim, h.stable, h.reliable, m.is_hamiltonian);
    Ok(PerfectnessVerdict {
        status,
        rule,
        justification: format!(
            "{why} (at N = {}, divisor floor {:e})",
            h.truncation, h.divisor_floor
        ),
        dim: h.dim,
        stable: h.stable,
        reliable: h.reliable,
        unimodular: m.is_hamiltonian,
        truncation: h.truncation,
        divisor_floor: h.divisor_floor,
    })
}

/// The decision table, in priority order.
pub fn decide(
    dim: usize,
    stable: bool,
    reliable: bool,
    unimodular: bool,
) -> (VerdictStatus, VerdictRule, &'static str) {
    use VerdictRule::*;
    use VerdictStatus::*;
    if !reliable {
        return (
            Inconclusive,
            NumericallyResonant,
            "numerically resonant modes were neither inverted nor counted",
        );
    }
    if dim >= 2 {
        return (
            NotPerfect,
            DimAtLeastTwo,
            "derived: dim H₀ ≥ 2 means the brackets plus constants have codimension ≥ 1 \
             (definition of perfectness plus a codimension argument); exact obstructions only grow with N",
        );
    }
    if !stable {
        return (
            Inconclusive,
            TruncationUnstable,
            "truncation-unstable: the count changes between N/2 and N",
        );
    }
    match (dim, unimodular) {
        (0, _) => (Perfect, VanishingHomology, "H₀ = 0 implies perfect"),
        (_, true) => (
            Perfect,
            UnimodularDimOne,
            "unimodular with dim H₀ = 1 implies perfect",
        ),
        (_, false) => (
            Inconclusive,
            NonUnimodularDimOne,
            "dim H₀ = 1 without unimodularity decides nothing",
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::{zeroth_homology, MtSettings};
    use crate::leafwise::DEFAULT_DIVISOR_FLOOR;
    use crate::models::{ConstantTorusModel, CosymplecticTorusModel, MappingTorusModel};

    fn verdict(model: &Model, n: i64) -> PerfectnessVerdict {
        let mt = MtSettings {
            trials: 3,
            ..Default::default()
        };
        let h = zeroth_homology(model, n, DEFAULT_DIVISOR_FLOOR, &mt).unwrap();
        let m = modular_class(model, VolumeDescriptor::default()).unwrap();
        perfectness_verdict(&h, &m).unwrap()
    }

    #[test]
    fn modular_examples() {
        let t2 = Model::ConstantTorus(ConstantTorusModel::symplectic_t2());
        assert!(
            modular_class(&t2, VolumeDescriptor::default())
                .unwrap()
                .is_hamiltonian
        );
        let fib = Model::Cosymplectic(CosymplecticTorusModel::fibration_t3());
        assert!(
            modular_class(&fib, VolumeDescriptor::default())
                .unwrap()
                .is_hamiltonian
        );
        let mt = Model::MappingTorus(MappingTorusModel::cat_map());
        let r = modular_class(&mt, VolumeDescriptor::default()).unwrap();
        assert!(!r.is_hamiltonian);
        assert!((r.obstruction - ((3.0 + 5f64.sqrt()) / 2.0).ln()).abs() < 1e-12);
        assert!(modular_class(&t2, VolumeDescriptor { density: -1.0 }).is_err());
        assert!(modular_class(&t2, VolumeDescriptor { density: 0.0 }).is_err());
    }

    #[test]
    fn verdict_examples() {
        let t2 = Model::ConstantTorus(ConstantTorusModel::symplectic_t2());
        assert_eq!(verdict(&t2, 4).status, VerdictStatus::Perfect);
        let mt = Model::MappingTorus(MappingTorusModel::cat_map());
        let v = verdict(&mt, 4);
        assert_eq!(v.status, VerdictStatus::Perfect);
        assert_eq!(v.rule, VerdictRule::VanishingHomology);
        let fib = Model::Cosymplectic(CosymplecticTorusModel::fibration_t3());
        assert_eq!(verdict(&fib, 4).status, VerdictStatus::NotPerfect);
    }

    #[test]
    fn decision_table() {
        use VerdictStatus::*;
        assert_eq!(decide(0, true, true, false).0, Perfect);
        assert_eq!(decide(1, true, true, true).0, Perfect);
        assert_eq!(decide(1, true, true, false).0, Inconclusive);
        assert_eq!(decide(3, true, true, true).0, NotPerfect);
        assert_eq!(decide(3, false, true, true).0, NotPerfect);
        assert_eq!(
            decide(1, false, true, true).1,
            VerdictRule::TruncationUnstable
        );
        assert_eq!(decide(0, true, false, true).0, Inconclusive);
    }

    #[test]
    fn mismatched_reports() {
        let t2 = Model::ConstantTorus(ConstantTorusModel::symplectic_t2());
        let mt = Model::MappingTorus(MappingTorusModel::cat_map());
        let h = zeroth_homology(&t2, 2, DEFAULT_DIVISOR_FLOOR, &MtSettings::default()).unwrap();
        let m = modular_class(&mt, VolumeDescriptor::default()).unwrap();
        assert!(matches!(
            perfectness_verdict(&h, &m),
            Err(Error::MismatchedReports(_))
        ));
    }
}
