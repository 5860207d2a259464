//! Run configurations, the built-in gallery, and report assembly.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diophantine::{classify, profile, Classification, DiophantineProfile};
use crate::error::{Error, Result};
use crate::homology::kunneth_compose;
use crate::homology::{
    decompose_commutators, modular_class, perfectness_verdict, top_poisson_cohomology_dim,
    zeroth_homology, CommutatorCertificate, DegreeTable, HomologyReport, ModularReport, MtSettings,
    PerfectnessVerdict, TopPoissonEstimate, VolumeDescriptor,
};
use crate::leafwise::DEFAULT_DIVISOR_FLOOR;
use crate::mapping_torus::{MIN_GRID, SEAM_TOLERANCE};
use crate::models::{Check, ConstantTorusModel, CosymplecticTorusModel, MappingTorusModel, Model};
use crate::random::{real_trig_poly, rng, PolySpec};

pub const REPORT_SCHEMA: &str = "poisson-spectral-report/1";

/// Model payload, tagged by `family`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ModelSpec {
    ConstantTorus {
        bivector: Vec<Vec<f64>>,
    },
    CosymplecticTorus {
        theta: Vec<f64>,
        eta: Vec<Vec<f64>>,
    },
    MappingTorus {
        matrix: [[i64; 2]; 2],
    },
    Product {
        left: Box<ModelSpec>,
        right: Box<ModelSpec>,
    },
}

impl ModelSpec {
    pub fn build(&self) -> Result<Model> {
        Ok(match self {
            ModelSpec::ConstantTorus { bivector } => {
                Model::ConstantTorus(ConstantTorusModel::new(bivector.clone())?)
            }
            ModelSpec::CosymplecticTorus { theta, eta } => {
                Model::Cosymplectic(CosymplecticTorusModel::new(theta.clone(), eta.clone())?)
            }
            ModelSpec::MappingTorus { matrix } => {
                Model::MappingTorus(MappingTorusModel::new(*matrix)?)
            }
            ModelSpec::Product { left, right } => Model::product(left.build()?, right.build()?),
        })
    }

    pub fn symplectic_t2() -> Self {
        ModelSpec::ConstantTorus {
            bivector: vec![vec![0.0, 1.0], vec![-1.0, 0.0]],
        }
    }

    pub fn fibration_t3() -> Self {
        ModelSpec::CosymplecticTorus {
            theta: vec![0.0, 0.0, 1.0],
            eta: dxdy3(),
        }
    }

    /// Kronecker foliation `θ = dz - α dx`, `η = dx∧dy`.
    pub fn kronecker_t3(alpha: f64) -> Self {
        ModelSpec::CosymplecticTorus {
            theta: vec![-alpha, 0.0, 1.0],
            eta: dxdy3(),
        }
    }

    pub fn cat_map() -> Self {
        ModelSpec::MappingTorus {
            matrix: [[2, 1], [1, 1]],
        }
    }

    pub fn product(left: ModelSpec, right: ModelSpec) -> Self {
        ModelSpec::Product {
            left: Box::new(left),
            right: Box::new(right),
        }
    }
}

fn dxdy3() -> Vec<Vec<f64>> {
    vec![vec![0.0, 1.0, 0.0], vec![-1.0, 0.0, 0.0], vec![0.0; 3]]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Homology,
    Modular,
    Perfectness,
    Decompose,
    Kunneth,
    PoissonCohomology,
    Diophantine,
}

fn default_analyses() -> Vec<Analysis> {
    vec![Analysis::Homology, Analysis::Modular, Analysis::Perfectness]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub name: String,
    #[serde(flatten)]
    pub model: ModelSpec,
    #[serde(default = "RunConfig::default_truncation")]
    pub truncation: i64,
    #[serde(default = "RunConfig::default_grid")]
    pub t_grid: usize,
    #[serde(default = "RunConfig::default_floor")]
    pub divisor_floor: f64,
    /// Residual tolerance for solvers and certificates.
    #[serde(default = "RunConfig::default_tol")]
    pub tol: f64,
    #[serde(default = "RunConfig::default_seam_tol")]
    pub seam_tol: f64,
    #[serde(default)]
    pub seed: u64,
    /// Random trials for the mapping-torus certificate.
    #[serde(default = "RunConfig::default_trials")]
    pub trials: usize,
    #[serde(default = "default_analyses")]
    pub analyses: Vec<Analysis>,
    /// Degree of the seeded random input for `decompose`.
    #[serde(default = "RunConfig::default_decompose_degree")]
    pub decompose_degree: i64,
    /// Slope for `diophantine`; taken from the model when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

impl RunConfig {
    fn default_truncation() -> i64 {
        8
    }
    fn default_grid() -> usize {
        64
    }
    fn default_floor() -> f64 {
        DEFAULT_DIVISOR_FLOOR
    }
    fn default_tol() -> f64 {
        1e-8
    }
    fn default_seam_tol() -> f64 {
        SEAM_TOLERANCE
    }
    fn default_trials() -> usize {
        20
    }
    fn default_decompose_degree() -> i64 {
        3
    }

    pub fn new(name: &str, model: ModelSpec) -> Self {
        RunConfig {
            name: name.into(),
            model,
            truncation: Self::default_truncation(),
            t_grid: Self::default_grid(),
            divisor_floor: Self::default_floor(),
            tol: Self::default_tol(),
            seam_tol: Self::default_seam_tol(),
            seed: 0,
            trials: Self::default_trials(),
            analyses: default_analyses(),
            decompose_degree: Self::default_decompose_degree(),
            alpha: None,
        }
    }

    pub fn with_analyses(mut self, analyses: &[Analysis]) -> Self {
        self.analyses = analyses.to_vec();
        self
    }

    /// Checks numeric fields and the model invariants, naming the first failure.
    pub fn validate(&self) -> Result<Model> {
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if self.truncation < 1 {
            return bad("truncation must be ≥ 1");
        }
        if self.t_grid < MIN_GRID {
            return Err(Error::InvalidConfig(format!("t_grid must be ≥ {MIN_GRID}")));
        }
        for (name, v) in [
            ("divisor_floor", self.divisor_floor),
            ("tol", self.tol),
            ("seam_tol", self.seam_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.decompose_degree < 0 {
            return bad("decompose_degree must be ≥ 0");
        }
        let model = self.model.build()?;
        if let Some(c) = model.validate().into_iter().find(|c| !c.passed) {
            return Err(Error::InvalidModel(format!(
                "invariant '{}' failed: {}",
                c.invariant, c.detail
            )));
        }
        Ok(model)
    }

    fn mt_settings(&self) -> MtSettings {
        MtSettings {
            grid: self.t_grid,
            trials: self.trials,
            tol: self.tol,
            seam_tol: self.seam_tol,
            seed: self.seed,
        }
    }
}

/// Result of one analysis: a value, a principled refusal, or a failure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Outcome<T> {
    Ok { value: T },
    Unsupported { reason: String },
    Failed { error: String, numerical: bool },
}

impl<T> Outcome<T> {
    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(value) => Outcome::Ok { value },
            Err(Error::UnsupportedModel { reason, .. }) => Outcome::Unsupported { reason },
            Err(e) => Outcome::Failed {
                numerical: matches!(e, Error::SolverFailure(_)),
                error: e.to_string(),
            },
        }
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            Outcome::Ok { value } => Some(value),
            _ => None,
        }
    }

    fn is_numerical_failure(&self) -> bool {
        matches!(
            self,
            Outcome::Failed {
                numerical: true,
                ..
            }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecomposeResult {
    /// Seed and degree of the random input.
    pub input_seed: u64,
    pub input_degree: i64,
    pub certificate: CommutatorCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KunnethResult {
    pub left: DegreeTable,
    pub right: DegreeTable,
    pub composed: DegreeTable,
    pub missing_degrees: Vec<usize>,
    /// Direct count on the flattened product, when it is a torus model.
    pub direct_top: Option<usize>,
    pub verdict: PerfectnessVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonCohomologyResult {
    pub estimate: TopPoissonEstimate,
    /// `dim H₀` at the same truncation, when it was computed.
    pub zeroth_homology_dim: Option<usize>,
    pub consistent: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiophantineResult {
    pub profile: DiophantineProfile,
    pub classification: Classification,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Results {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub homology: Option<Outcome<HomologyReport>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub modular: Option<Outcome<ModularReport>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub perfectness: Option<Outcome<PerfectnessVerdict>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub decompose: Option<Outcome<DecomposeResult>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kunneth: Option<Outcome<KunnethResult>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub poisson_cohomology: Option<Outcome<PoissonCohomologyResult>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub diophantine: Option<Outcome<DiophantineResult>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub tool_version: String,
    pub config: RunConfig,
    pub model: String,
    pub validation: Vec<Check>,
    pub results: Results,
    /// Wall-clock milliseconds per analysis.
    pub timings_ms: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn has_numerical_failure(&self) -> bool {
        let r = &self.results;
        r.homology
            .as_ref()
            .is_some_and(Outcome::is_numerical_failure)
            || r.modular
                .as_ref()
                .is_some_and(Outcome::is_numerical_failure)
            || r.perfectness
                .as_ref()
                .is_some_and(Outcome::is_numerical_failure)
            || r.decompose
                .as_ref()
                .is_some_and(Outcome::is_numerical_failure)
            || r.kunneth
                .as_ref()
                .is_some_and(Outcome::is_numerical_failure)
            || r.poisson_cohomology
                .as_ref()
                .is_some_and(Outcome::is_numerical_failure)
            || r.diophantine
                .as_ref()
                .is_some_and(Outcome::is_numerical_failure)
    }

    /// Every commutator certificate carried by the report.
    pub fn certificates(&self) -> Vec<&CommutatorCertificate> {
        self.results
            .decompose
            .iter()
            .filter_map(|o| o.value())
            .map(|d| &d.certificate)
            .collect()
    }

    /// The report with timings cleared, for byte comparisons.
    pub fn without_timings(&self) -> RunReport {
        RunReport {
            timings_ms: BTreeMap::new(),
            ..self.clone()
        }
    }
}

fn timed<T>(timings: &mut BTreeMap<String, f64>, key: &str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    timings.insert(key.to_string(), start.elapsed().as_secs_f64() * 1e3);
    out
}

/// Slope in `(0,1)` read off the model, if it has one.
fn model_slope(model: &Model) -> Option<f64> {
    let frac = |s: f64| {
        let f = s.fract();
        (f > 0.0).then_some(f)
    };
    match model {
        Model::Cosymplectic(m) => m.slope().and_then(frac),
        Model::MappingTorus(m) => frac(m.slope()),
        Model::Product(p) => model_slope(&p.left).or_else(|| model_slope(&p.right)),
        Model::ConstantTorus(_) => None,
    }
}

/// Runs the requested analyses in dependency order.
pub fn run(config: &RunConfig) -> Result<RunReport> {
    let model = config.validate()?;
    let mut wanted = config.analyses.clone();
    wanted.sort();
    wanted.dedup();
    let mut notes = vec![
        format!(
            "all dimensions are counts at truncation |k| ≤ {} with divisor floor {:e}",
            config.truncation, config.divisor_floor
        ),
        crate::homology::NORMALIZATION_NOTE.to_string(),
    ];
    let mut timings = BTreeMap::new();
    let mut results = Results::default();
    let n = config.truncation;
    let floor = config.divisor_floor;
    let mt = config.mt_settings();
    let needs = |a: Analysis| wanted.contains(&a);

    if needs(Analysis::Homology)
        || needs(Analysis::Perfectness)
        || needs(Analysis::PoissonCohomology)
    {
        results.homology = Some(timed(&mut timings, "homology", || {
            Outcome::from_result(zeroth_homology(&model, n, floor, &mt))
        }));
    }
    if needs(Analysis::Modular) || needs(Analysis::Perfectness) {
        results.modular = Some(timed(&mut timings, "modular", || {
            Outcome::from_result(modular_class(&model, VolumeDescriptor::default()))
        }));
    }
    if needs(Analysis::Perfectness) {
        let h = results.homology.as_ref().and_then(Outcome::value);
        let m = results.modular.as_ref().and_then(Outcome::value);
        results.perfectness = Some(match (h, m) {
            (Some(h), Some(m)) => timed(&mut timings, "perfectness", || {
                Outcome::from_result(perfectness_verdict(h, m))
            }),
            _ => Outcome::Failed {
                error: "homology or modular analysis did not produce a report".into(),
                numerical: results
                    .homology
                    .as_ref()
                    .is_some_and(Outcome::is_numerical_failure),
            },
        });
    }
    if needs(Analysis::Decompose) {
        results.decompose = Some(timed(&mut timings, "decompose", || {
            let f = real_trig_poly(
                &mut rng(config.seed),
                PolySpec::new(model.dim(), config.decompose_degree),
            );
            Outcome::from_result(
                decompose_commutators(&model, &f, config.decompose_degree.max(1)).map(
                    |certificate| DecomposeResult {
                        input_seed: config.seed,
                        input_degree: config.decompose_degree,
                        certificate,
                    },
                ),
            )
        }));
    }
    if needs(Analysis::Kunneth) {
        results.kunneth = Some(timed(&mut timings, "kunneth", || {
            Outcome::from_result(kunneth(&model, n, floor, &mt, results.homology.as_ref()))
        }));
    }
    if needs(Analysis::PoissonCohomology) {
        let h0 = results
            .homology
            .as_ref()
            .and_then(Outcome::value)
            .map(|h| h.dim);
        results.poisson_cohomology = Some(timed(&mut timings, "poisson-cohomology", || {
            Outcome::from_result(top_poisson_cohomology_dim(&model, n).map(|estimate| {
                PoissonCohomologyResult {
                    consistent: h0.map(|d| d == estimate.dim),
                    zeroth_homology_dim: h0,
                    estimate,
                }
            }))
        }));
    }
    if needs(Analysis::Diophantine) {
        results.diophantine = Some(timed(&mut timings, "diophantine", || {
            let alpha = config.alpha.or_else(|| model_slope(&model));
            Outcome::from_result(match alpha {
                None => Err(Error::UnsupportedModel {
                    operation: "diophantine",
                    reason: "the model has no irrational slope; pass `alpha`".into(),
                }),
                Some(a) => profile(a, 40, n).map(|p| DiophantineResult {
                    classification: classify(&p),
                    profile: p,
                }),
            })
        }));
    }
    if results
        .homology
        .as_ref()
        .and_then(Outcome::value)
        .is_some_and(|h| !h.stable)
    {
        notes.push("the homology count changes between N/2 and N: truncation-unstable".into());
    }
    Ok(RunReport {
        schema: REPORT_SCHEMA.into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        config: config.clone(),
        model: model.label(),
        validation: model.validate(),
        results,
        timings_ms: timings,
        notes,
    })
}

fn kunneth(
    model: &Model,
    n: i64,
    floor: f64,
    mt: &MtSettings,
    homology: Option<&Outcome<HomologyReport>>,
) -> Result<KunnethResult> {
    let Model::Product(p) = model else {
        return Err(Error::UnsupportedModel {
            operation: "kunneth",
            reason: "not a product model".into(),
        });
    };
    let left = DegreeTable::for_model(&p.left, n, floor, mt)?;
    let right = DegreeTable::for_model(&p.right, n, floor, mt)?;
    let composed = kunneth_compose(&left, &right);
    let direct_top = match model.as_constant() {
        Some(c) => Some(crate::leafwise::estimate_h_top_dim(&c, n, floor)?.dim),
        None => None,
    };
    let h = match homology.and_then(Outcome::value) {
        Some(h) => h.clone(),
        None => zeroth_homology(model, n, floor, mt)?,
    };
    let verdict = perfectness_verdict(&h, &modular_class(model, VolumeDescriptor::default())?)?;
    Ok(KunnethResult {
        missing_degrees: composed.missing_degrees(),
        left,
        right,
        composed,
        direct_top,
        verdict,
    })
}

pub fn golden_slope() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// Built-in configurations covering every model family.
pub fn gallery() -> Vec<RunConfig> {
    use Analysis::*;
    let g = golden_slope();
    let all_torus = [Homology, Modular, Perfectness, Decompose, PoissonCohomology];
    vec![
        RunConfig::new("symplectic-t2", ModelSpec::symplectic_t2()).with_analyses(&all_torus),
        RunConfig::new("fibration-t3", ModelSpec::fibration_t3()).with_analyses(&[
            Homology,
            Modular,
            Perfectness,
            PoissonCohomology,
        ]),
        RunConfig::new("kronecker-t3", ModelSpec::kronecker_t3(g)).with_analyses(&[
            Homology,
            Modular,
            Perfectness,
            Decompose,
            PoissonCohomology,
            Diophantine,
        ]),
        RunConfig::new("mapping-torus-cat", ModelSpec::cat_map()).with_analyses(&[
            Homology,
            Modular,
            Perfectness,
            Diophantine,
        ]),
        RunConfig::new(
            "mapping-torus-x-t2",
            ModelSpec::product(ModelSpec::cat_map(), ModelSpec::symplectic_t2()),
        )
        .with_analyses(&[Homology, Modular, Perfectness, Kunneth]),
        RunConfig::new(
            "kronecker-x-t2",
            ModelSpec::product(ModelSpec::kronecker_t3(g), ModelSpec::symplectic_t2()),
        )
        .with_analyses(&[Homology, Modular, Perfectness, Kunneth, PoissonCohomology]),
        RunConfig::new(
            "kronecker-x-kronecker",
            ModelSpec::product(
                ModelSpec::kronecker_t3(g),
                ModelSpec::kronecker_t3(2f64.sqrt() - 1.0),
            ),
        )
        .with_analyses(&[Homology, Modular, Perfectness, Kunneth]),
        RunConfig::new(
            "kronecker-x-mapping-torus",
            ModelSpec::product(ModelSpec::kronecker_t3(g), ModelSpec::cat_map()),
        )
        .with_analyses(&[Homology, Modular, Perfectness, Kunneth]),
    ]
}

pub fn gallery_entry(name: &str) -> Option<RunConfig> {
    gallery().into_iter().find(|c| c.name == name)
}
