//! Regular Poisson manifolds in the gallery: constant bivectors on tori,
//! cosymplectic tori, the hyperbolic mapping torus, and products.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{Mode, TrigPoly};

/// Pivots below `RANK_TOL · max|P_ij|` are treated as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Minimum admissible `|θ∧ηⁿ/n!|` for a cosymplectic pair.
pub const VOLUME_TOL: f64 = 1e-12;

/// Outcome of a single invariant check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub invariant: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(invariant: &str, passed: bool, detail: String) -> Self {
        Check {
            invariant: invariant.to_string(),
            passed,
            detail,
        }
    }
}

pub fn failures(checks: &[Check]) -> Vec<&Check> {
    checks.iter().filter(|c| !c.passed).collect()
}

fn wedge(x: &[f64], y: &[f64]) -> Vec<Vec<f64>> {
    x.iter()
        .map(|&xa| y.iter().map(|&yb| xa * yb).collect::<Vec<_>>())
        .enumerate()
        .map(|(a, row)| {
            row.iter()
                .enumerate()
                .map(|(b, &v)| v - y[a] * x[b])
                .collect()
        })
        .collect()
}

fn max_abs(p: &[Vec<f64>]) -> f64 {
    p.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
}

/// Splits an antisymmetric matrix as `P = Σ E_{2r-1} ∧ E_{2r}` by repeated
/// skew elimination on the first admissible pivot `(i, j)` in lexicographic
/// order. For `P = ∂_x∧∂_y` this returns `{∂_x, ∂_y}`.
pub fn darboux_frame(p: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let scale = max_abs(p);
    let mut frame = Vec::new();
    if scale == 0.0 {
        return frame;
    }
    let m = p.len();
    let mut r: Vec<Vec<f64>> = p.to_vec();
    loop {
        let pivot = (0..m)
            .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
            .find(|&(i, j)| r[i][j].abs() > RANK_TOL * scale);
        let Some((i, j)) = pivot else { break };
        let c = r[i][j];
        let x: Vec<f64> = (0..m).map(|a| r[a][i]).collect();
        let y: Vec<f64> = (0..m).map(|a| r[a][j]).collect();
        let xy = wedge(&x, &y);
        for a in 0..m {
            for b in 0..m {
                r[a][b] -= xy[a][b] / c;
            }
        }
        frame.push(y);
        frame.push(x.iter().map(|v| -v / c).collect());
        if frame.len() >= m {
            break;
        }
    }
    frame
}

/// Constant Poisson bivector `P` on `T^m`; `{f,g} = Σ P_ij ∂_i f ∂_j g`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstantTorusModel {
    bivector: Vec<Vec<f64>>,
    frame: Vec<Vec<f64>>,
}

impl ConstantTorusModel {
    pub fn new(bivector: Vec<Vec<f64>>) -> Result<Self> {
        let m = bivector.len();
        if m == 0 || bivector.iter().any(|row| row.len() != m) {
            return Err(Error::InvalidModel(
                "bivector must be a non-empty square matrix".into(),
            ));
        }
        if bivector.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel(
                "bivector entries must be finite".into(),
            ));
        }
        let frame = darboux_frame(&bivector);
        Ok(ConstantTorusModel { bivector, frame })
    }

    /// The standard symplectic structure `∂_x ∧ ∂_y` on `T²`.
    pub fn symplectic_t2() -> Self {
        Self::new(vec![vec![0.0, 1.0], vec![-1.0, 0.0]]).expect("static bivector")
    }

    pub fn dim(&self) -> usize {
        self.bivector.len()
    }

    pub fn rank(&self) -> usize {
        self.frame.len()
    }

    pub fn bivector(&self) -> &[Vec<f64>] {
        &self.bivector
    }

    /// Leafwise frame `E_1..E_{2n}` with `P = Σ E_{2r-1}∧E_{2r}`.
    pub fn frame(&self) -> &[Vec<f64>] {
        &self.frame
    }

    /// Leafwise symbols `D_j(k) = 2πi (k·E_j)`.
    pub fn symbols(&self, k: &Mode) -> Vec<Complex64> {
        self.frame
            .iter()
            .map(|e| Complex64::new(0.0, 2.0 * PI * k.dot(e)))
            .collect()
    }

    /// `Σ_j (k·E_j)` magnitudes without the `2π` factor.
    pub fn pairings(&self, k: &Mode) -> Vec<f64> {
        self.frame.iter().map(|e| k.dot(e)).collect()
    }

    pub fn validate(&self) -> Vec<Check> {
        let m = self.dim();
        let mut asym = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                asym = asym.max((self.bivector[i][j] + self.bivector[j][i]).abs());
            }
        }
        let mut recon = vec![vec![0.0; m]; m];
        for pair in self.frame.chunks(2) {
            let w = wedge(&pair[0], &pair[1]);
            for (row, wrow) in recon.iter_mut().zip(&w) {
                row.iter_mut().zip(wrow).for_each(|(r, x)| *r += x);
            }
        }
        let frame_err = recon
            .iter()
            .flatten()
            .zip(self.bivector.iter().flatten())
            .map(|(r, p)| (r - p).abs())
            .fold(0.0f64, f64::max);
        let scale = max_abs(&self.bivector).max(1.0);
        vec![
            Check::new(
                "antisymmetric",
                asym == 0.0,
                format!("max |P + Pᵀ| = {asym:e}"),
            ),
            Check::new(
                "even constant rank",
                self.rank().is_multiple_of(2) && self.rank() > 0,
                format!("rank {}", self.rank()),
            ),
            Check::new(
                "leafwise frame reproduces bivector",
                frame_err <= 1e-12 * scale,
                format!("max |P - ΣE∧E| = {frame_err:e}"),
            ),
        ]
    }

    pub fn bracket(&self, f: &TrigPoly, g: &TrigPoly) -> Result<TrigPoly> {
        let m = self.dim();
        for p in [f, g] {
            if p.dim() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: p.dim(),
                });
            }
        }
        let df: Vec<TrigPoly> = (0..m)
            .map(|i| f.partial_derivative(i))
            .collect::<Result<_>>()?;
        let dg: Vec<TrigPoly> = (0..m)
            .map(|j| g.partial_derivative(j))
            .collect::<Result<_>>()?;
        let mut acc = TrigPoly::zero(m);
        for i in 0..m {
            for j in i + 1..m {
                let pij = self.bivector[i][j];
                if pij == 0.0 {
                    continue;
                }
                let term = df[i].mul(&dg[j])?.sub(&df[j].mul(&dg[i])?)?;
                acc = acc.add(&term.scale(pij))?;
            }
        }
        Ok(acc)
    }

    /// Block-diagonal product of two constant models.
    pub fn product(&self, other: &ConstantTorusModel) -> ConstantTorusModel {
        let (m1, m2) = (self.dim(), other.dim());
        let mut p = vec![vec![0.0; m1 + m2]; m1 + m2];
        for (row, src) in p.iter_mut().zip(&self.bivector) {
            row[..m1].copy_from_slice(src);
        }
        for (row, src) in p[m1..].iter_mut().zip(&other.bivector) {
            row[m1..].copy_from_slice(src);
        }
        let pad = |v: &Vec<f64>, left: bool| -> Vec<f64> {
            let mut out = vec![0.0; m1 + m2];
            if left {
                out[..m1].copy_from_slice(v);
            } else {
                out[m1..].copy_from_slice(v);
            }
            out
        };
        let frame = self
            .frame
            .iter()
            .map(|v| pad(v, true))
            .chain(other.frame.iter().map(|v| pad(v, false)))
            .collect();
        ConstantTorusModel { bivector: p, frame }
    }
}

/// Cosymplectic pair `(θ, η)` of constant forms on `T^{2n+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CosymplecticTorusModel {
    theta: Vec<f64>,
    eta: Vec<Vec<f64>>,
    volume: f64,
    poisson: ConstantTorusModel,
}

impl CosymplecticTorusModel {
    pub fn new(theta: Vec<f64>, eta: Vec<Vec<f64>>) -> Result<Self> {
        let m = theta.len();
        if m.is_multiple_of(2) {
            return Err(Error::InvalidModel(
                "cosymplectic dimension must be odd".into(),
            ));
        }
        if eta.len() != m || eta.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidModel(
                "eta must be a square matrix matching theta".into(),
            ));
        }
        // b(v) = θ(v)θ + i_v η, as a matrix B = θθᵀ + ηᵀ
        let b = DMatrix::from_fn(m, m, |i, j| theta[i] * theta[j] + eta[j][i]);
        let det = b.determinant();
        let volume = det.abs().sqrt();
        if volume.is_nan() || volume <= VOLUME_TOL {
            return Err(Error::InvalidModel(format!(
                "θ∧ηⁿ is not a volume form (|θ∧ηⁿ/n!| = {volume:e})"
            )));
        }
        let b_inv = b
            .try_inverse()
            .ok_or_else(|| Error::InvalidModel("θθᵀ + ηᵀ is singular".into()))?;
        let eta_m = DMatrix::from_fn(m, m, |i, j| eta[i][j]);
        let p = b_inv.transpose() * eta_m * &b_inv;
        // exact antisymmetrization removes rounding asymmetry
        let bivector = (0..m)
            .map(|i| (0..m).map(|j| 0.5 * (p[(i, j)] - p[(j, i)])).collect())
            .collect();
        let poisson = ConstantTorusModel::new(bivector)?;
        Ok(CosymplecticTorusModel {
            theta,
            eta,
            volume,
            poisson,
        })
    }

    /// `θ = dz`, `η = dx∧dy`: leaves are the horizontal 2-tori.
    pub fn fibration_t3() -> Self {
        Self::new(
            vec![0.0, 0.0, 1.0],
            vec![vec![0.0, 1.0, 0.0], vec![-1.0, 0.0, 0.0], vec![0.0; 3]],
        )
        .expect("static cosymplectic data")
    }

    /// `θ = dz − α dx`, `η = dx∧dy`: leaves spanned by `∂_x + α∂_z` and `∂_y`.
    pub fn kronecker_t3(alpha: f64) -> Result<Self> {
        Self::new(
            vec![-alpha, 0.0, 1.0],
            vec![vec![0.0, 1.0, 0.0], vec![-1.0, 0.0, 0.0], vec![0.0; 3]],
        )
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn eta(&self) -> &[Vec<f64>] {
        &self.eta
    }

    /// `|θ∧ηⁿ/n!|` evaluated on the coordinate basis.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn poisson(&self) -> &ConstantTorusModel {
        &self.poisson
    }

    /// Irrational slope of the leaves when `θ = (θ_x, 0, θ_z)` on `T³`.
    pub fn slope(&self) -> Option<f64> {
        if self.theta.len() != 3 || self.theta[1] != 0.0 || self.theta[2] == 0.0 {
            return None;
        }
        Some((self.theta[0] / self.theta[2]).abs())
    }

    pub fn validate(&self) -> Vec<Check> {
        let m = self.theta.len();
        let mut checks = self.poisson.validate();
        let mut asym = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                asym = asym.max((self.eta[i][j] + self.eta[j][i]).abs());
            }
        }
        checks.push(Check::new(
            "eta antisymmetric",
            asym == 0.0,
            format!("{asym:e}"),
        ));
        checks.push(Check::new(
            "θ∧ηⁿ is a volume form",
            self.volume > VOLUME_TOL,
            format!("|θ∧ηⁿ/n!| = {}", self.volume),
        ));
        let p = self.poisson.bivector();
        let leak = (0..m)
            .map(|j| (0..m).map(|i| self.theta[i] * p[i][j]).sum::<f64>().abs())
            .fold(0.0, f64::max);
        checks.push(Check::new(
            "image of bivector is ker θ",
            leak <= 1e-12 && self.poisson.rank() == m - 1,
            format!("max |θᵀP| = {leak:e}, rank {}", self.poisson.rank()),
        ));
        checks
    }
}

/// Mapping torus of a hyperbolic `A ∈ SL(2,Z)`: `T² × R` modulo `(m,t) ~ (Am, t+1)`.
///
/// The leaves are spanned by `∂_t` and the contracting eigenline `v`
/// (`Av = λ⁻¹v`, `λ` the dominant eigenvalue). The gluing-invariant bivector
/// is `π = λ^{-t} v∧∂_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingTorusModel {
    matrix: [[i64; 2]; 2],
    lambda: f64,
    v: [f64; 2],
}

impl MappingTorusModel {
    pub fn new(matrix: [[i64; 2]; 2]) -> Result<Self> {
        let [[a, b], [c, d]] = matrix;
        let det = a * d - b * c;
        let tr = a + d;
        if det != 1 {
            return Err(Error::InvalidModel(format!("det A = {det}, expected 1")));
        }
        if tr.abs() <= 2 {
            return Err(Error::InvalidModel(format!(
                "A is not hyperbolic: |tr A| = {} ≤ 2",
                tr.abs()
            )));
        }
        if tr < 0 {
            return Err(Error::InvalidModel(
                "tr A < -2: negative eigenvalues reverse the leaf orientation across the seam"
                    .into(),
            ));
        }
        let trf = tr as f64;
        let disc = (trf * trf - 4.0).sqrt();
        let lambda = (trf + disc) / 2.0;
        let mu = 1.0 / lambda;
        // (A - μ) v = 0; pick the better-conditioned row
        let (af, bf, cf, df) = (a as f64, b as f64, c as f64, d as f64);
        let raw = if bf.abs() >= cf.abs() && bf != 0.0 {
            [bf, mu - af]
        } else {
            [mu - df, cf]
        };
        let n = (raw[0] * raw[0] + raw[1] * raw[1]).sqrt();
        let mut v = [raw[0] / n, raw[1] / n];
        if v[0] < 0.0 || (v[0] == 0.0 && v[1] < 0.0) {
            v = [-v[0], -v[1]];
        }
        Ok(MappingTorusModel { matrix, lambda, v })
    }

    /// Arnold's cat map `[[2,1],[1,1]]`.
    pub fn cat_map() -> Self {
        Self::new([[2, 1], [1, 1]]).expect("cat map is hyperbolic")
    }

    pub fn matrix(&self) -> [[i64; 2]; 2] {
        self.matrix
    }

    /// Dominant eigenvalue `λ > 1`.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Eigenvalue `λ⁻¹` of the leaf direction.
    pub fn leaf_eigenvalue(&self) -> f64 {
        1.0 / self.lambda
    }

    pub fn log_lambda(&self) -> f64 {
        self.lambda.ln()
    }

    /// Unit leaf direction `v` with `Av = λ⁻¹ v`.
    pub fn v(&self) -> [f64; 2] {
        self.v
    }

    /// Slope `|v_y / v_x|` of the leaf lines on `T²`.
    pub fn slope(&self) -> f64 {
        (self.v[1] / self.v[0]).abs()
    }

    /// Transpose action on Fourier modes: the pullback of `e_k` under `m ↦ Am` is `e_{Aᵀk}`.
    pub fn transpose_action(&self, k: [i64; 2]) -> [i64; 2] {
        let [[a, b], [c, d]] = self.matrix;
        [a * k[0] + c * k[1], b * k[0] + d * k[1]]
    }

    /// Inverse of [`Self::transpose_action`].
    pub fn transpose_inverse_action(&self, k: [i64; 2]) -> [i64; 2] {
        let [[a, b], [c, d]] = self.matrix;
        // (Aᵀ)⁻¹ = [[d, -c], [-b, a]] since det A = 1
        [d * k[0] - c * k[1], -b * k[0] + a * k[1]]
    }

    /// Bivector prefactor `λ^{-t}`.
    pub fn bivector_factor(&self, t: f64) -> f64 {
        self.lambda.powf(-t)
    }

    pub fn validate(&self) -> Vec<Check> {
        let [[a, b], [c, d]] = self.matrix;
        let det = a * d - b * c;
        let tr = a + d;
        let av = [
            a as f64 * self.v[0] + b as f64 * self.v[1],
            c as f64 * self.v[0] + d as f64 * self.v[1],
        ];
        let mu = self.leaf_eigenvalue();
        let eig_err = ((av[0] - mu * self.v[0]).powi(2) + (av[1] - mu * self.v[1]).powi(2)).sqrt();
        let cross = (av[0] * self.v[1] - av[1] * self.v[0]).abs();
        vec![
            Check::new("det A = 1", det == 1, format!("det A = {det}")),
            Check::new(
                "hyperbolic |tr A| > 2",
                tr.abs() > 2,
                format!("tr A = {tr}"),
            ),
            Check::new("positive eigenvalues", tr > 2, format!("tr A = {tr}")),
            Check::new("|λ| > 1", self.lambda > 1.0, format!("λ = {}", self.lambda)),
            Check::new(
                "A v = λ⁻¹ v",
                eig_err <= 1e-12,
                format!("residual {eig_err:e}"),
            ),
            Check::new(
                "leaf line field is A-invariant",
                cross <= 1e-12,
                format!("|Av × v| = {cross:e}"),
            ),
        ]
    }
}

/// Product of two regular Poisson manifolds; ranks and dimensions add.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductModel {
    pub left: Model,
    pub right: Model,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    ConstantTorus(ConstantTorusModel),
    Cosymplectic(CosymplecticTorusModel),
    MappingTorus(MappingTorusModel),
    Product(Box<ProductModel>),
}

impl Model {
    pub fn product(left: Model, right: Model) -> Model {
        Model::Product(Box::new(ProductModel { left, right }))
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::ConstantTorus(m) => m.dim(),
            Model::Cosymplectic(m) => m.theta.len(),
            Model::MappingTorus(_) => 3,
            Model::Product(p) => p.left.dim() + p.right.dim(),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            Model::ConstantTorus(m) => m.rank(),
            Model::Cosymplectic(m) => m.poisson.rank(),
            Model::MappingTorus(_) => 2,
            Model::Product(p) => p.left.rank() + p.right.rank(),
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            Model::ConstantTorus(_) => "constant-torus",
            Model::Cosymplectic(_) => "cosymplectic-torus",
            Model::MappingTorus(_) => "mapping-torus",
            Model::Product(_) => "product",
        }
    }

    /// Short human-readable identifier used to match reports.
    pub fn label(&self) -> String {
        match self {
            Model::ConstantTorus(m) => format!("constant-torus(T^{}, rank {})", m.dim(), m.rank()),
            Model::Cosymplectic(m) => match m.slope() {
                Some(a) if a != 0.0 => {
                    format!("cosymplectic-torus(T^{}, slope {a})", m.theta.len())
                }
                _ => format!(
                    "cosymplectic-torus(T^{}, theta {:?})",
                    m.theta.len(),
                    m.theta
                ),
            },
            Model::MappingTorus(m) => format!("mapping-torus(A = {:?})", m.matrix()),
            Model::Product(p) => format!("{} x {}", p.left.label(), p.right.label()),
        }
    }

    /// The constant-bivector torus underlying this model, flattening
    /// products whose factors are all torus models.
    pub fn as_constant(&self) -> Option<ConstantTorusModel> {
        match self {
            Model::ConstantTorus(m) => Some(m.clone()),
            Model::Cosymplectic(m) => Some(m.poisson.clone()),
            Model::MappingTorus(_) => None,
            Model::Product(p) => Some(p.left.as_constant()?.product(&p.right.as_constant()?)),
        }
    }

    pub fn validate(&self) -> Vec<Check> {
        match self {
            Model::ConstantTorus(m) => m.validate(),
            Model::Cosymplectic(m) => m.validate(),
            Model::MappingTorus(m) => m.validate(),
            Model::Product(p) => {
                let mut checks: Vec<Check> = p
                    .left
                    .validate()
                    .into_iter()
                    .map(|mut c| {
                        c.invariant = format!("left: {}", c.invariant);
                        c
                    })
                    .collect();
                checks.extend(p.right.validate().into_iter().map(|mut c| {
                    c.invariant = format!("right: {}", c.invariant);
                    c
                }));
                checks
            }
        }
    }

    pub fn is_valid(&self) -> bool {
        self.validate().iter().all(|c| c.passed)
    }

    /// Poisson bracket of trig polynomials on torus models.
    pub fn bracket(&self, f: &TrigPoly, g: &TrigPoly) -> Result<TrigPoly> {
        match self.as_constant() {
            Some(c) => c.bracket(f, g),
            None => Err(Error::UnsupportedModel {
                operation: "bracket",
                reason:
                    "mapping-torus functions are equivariant curves; use mapping_torus::mt_bracket"
                        .into(),
            }),
        }
    }

    /// `X_f(g) = {f, g}`.
    pub fn hamiltonian_field_apply(&self, f: &TrigPoly, g: &TrigPoly) -> Result<TrigPoly> {
        self.bracket(f, g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> f64 {
        (5f64.sqrt() - 1.0) / 2.0
    }

    fn e(k: &[i64]) -> TrigPoly {
        TrigPoly::monomial(Mode::new(k.to_vec()), 1.0)
    }

    #[test]
    fn symplectic_t2_is_valid_rank_two() {
        let m = ConstantTorusModel::symplectic_t2();
        assert!(m.validate().iter().all(|c| c.passed));
        assert_eq!(m.rank(), 2);
        assert_eq!(m.frame(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn cat_map_eigendata() {
        let m = MappingTorusModel::cat_map();
        assert!(m.validate().iter().all(|c| c.passed));
        let expected = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((m.lambda() - expected).abs() < 1e-14);
        assert!((m.lambda() - 2.6180).abs() < 1e-4);
        // contracting eigenline (1, μ - 2) has slope (1 + √5)/2
        let v = m.v();
        assert!((v[0] * v[0] + v[1] * v[1] - 1.0).abs() < 1e-15);
        assert!((m.slope() - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn non_hyperbolic_matrices_are_rejected() {
        assert!(MappingTorusModel::new([[1, 1], [0, 1]]).is_err());
        assert!(MappingTorusModel::new([[0, -1], [1, 0]]).is_err());
        assert!(MappingTorusModel::new([[2, 1], [1, 2]]).is_err());
        assert!(MappingTorusModel::new([[-2, 1], [1, -1]]).is_err());
    }

    #[test]
    fn fibration_cosymplectic_is_valid() {
        let m = CosymplecticTorusModel::fibration_t3();
        assert!(m.validate().iter().all(|c| c.passed), "{:?}", m.validate());
        assert_eq!(m.poisson().rank(), 2);
        assert_eq!(
            m.poisson().bivector(),
            &[vec![0.0, 1.0, 0.0], vec![-1.0, 0.0, 0.0], vec![0.0; 3]]
        );
        assert!((m.volume() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kronecker_frame_is_the_leaf_frame() {
        let a = golden();
        let m = CosymplecticTorusModel::kronecker_t3(a).unwrap();
        assert!(m.validate().iter().all(|c| c.passed));
        let f = m.poisson().frame();
        assert!(
            (f[0][0] - 1.0).abs() < 1e-15 && f[0][1].abs() < 1e-15 && (f[0][2] - a).abs() < 1e-15
        );
        assert!(f[1][0].abs() < 1e-15 && (f[1][1] - 1.0).abs() < 1e-15 && f[1][2].abs() < 1e-15);
        assert_eq!(m.slope(), Some(a));
    }

    #[test]
    fn degenerate_cosymplectic_rejected() {
        let r = CosymplecticTorusModel::new(
            vec![1.0, 0.0, 0.0],
            vec![vec![0.0, 1.0, 0.0], vec![-1.0, 0.0, 0.0], vec![0.0; 3]],
        );
        assert!(matches!(r, Err(Error::InvalidModel(_))));
        assert!(CosymplecticTorusModel::new(vec![0.0, 1.0], vec![vec![0.0; 2]; 2]).is_err());
    }

    #[test]
    fn bracket_on_symplectic_t2_monomials() {
        let m = ConstantTorusModel::symplectic_t2();
        let (a, b) = ([2i64, -1], [1i64, 3]);
        let br = m.bracket(&e(&a), &e(&b)).unwrap();
        let cross = (a[0] * b[1] - a[1] * b[0]) as f64;
        let expected = -4.0 * PI * PI * cross;
        let got = br.coeff(&Mode::new(vec![3, 2]));
        assert!((got.re - expected).abs() < 1e-12 && got.im.abs() < 1e-12);
        assert_eq!(br.len(), 1);
    }

    #[test]
    fn constants_and_z_modes_are_casimirs() {
        let m = ConstantTorusModel::symplectic_t2();
        assert!(m
            .bracket(&e(&[3, 1]), &TrigPoly::constant(2, 1.0))
            .unwrap()
            .is_empty());
        let fib = Model::Cosymplectic(CosymplecticTorusModel::fibration_t3());
        for g in [e(&[1, 0, 0]), e(&[2, -3, 1]), e(&[0, 1, 5])] {
            assert!(fib.bracket(&e(&[0, 0, 1]), &g).unwrap().is_empty());
        }
    }

    #[test]
    fn dimension_mismatch_in_bracket() {
        let m = ConstantTorusModel::symplectic_t2();
        assert!(m.bracket(&e(&[1, 0, 0]), &e(&[1, 0])).is_err());
    }

    #[test]
    fn product_flattens_to_block_bivector() {
        let kron = Model::Cosymplectic(CosymplecticTorusModel::kronecker_t3(golden()).unwrap());
        let t2 = Model::ConstantTorus(ConstantTorusModel::symplectic_t2());
        let p = Model::product(kron, t2);
        assert_eq!(p.dim(), 5);
        assert_eq!(p.rank(), 4);
        let c = p.as_constant().unwrap();
        assert!(c.validate().iter().all(|c| c.passed));
        let mt = Model::product(Model::MappingTorus(MappingTorusModel::cat_map()), p.clone());
        assert!(mt.as_constant().is_none());
        assert_eq!(mt.rank(), 6);
        assert!(mt.is_valid());
    }

    #[test]
    fn transpose_action_pulls_back_characters() {
        let m = MappingTorusModel::cat_map();
        let a = m.matrix();
        for k in [[1i64, 0], [0, 1], [2, -3], [-1, 4]] {
            let ak = m.transpose_action(k);
            for &(x, y) in &[(0.13, 0.7), (0.5, 0.25), (0.91, 0.33)] {
                let mx = [
                    a[0][0] as f64 * x + a[0][1] as f64 * y,
                    a[1][0] as f64 * x + a[1][1] as f64 * y,
                ];
                let lhs = 2.0 * PI * (k[0] as f64 * mx[0] + k[1] as f64 * mx[1]);
                let rhs = 2.0 * PI * (ak[0] as f64 * x + ak[1] as f64 * y);
                assert!(
                    (lhs.cos() - rhs.cos()).abs() < 1e-9 && (lhs.sin() - rhs.sin()).abs() < 1e-9
                );
            }
            assert_eq!(m.transpose_inverse_action(ak), k);
        }
    }

    #[test]
    fn darboux_frame_rank_four() {
        let t2 = ConstantTorusModel::symplectic_t2();
        let p = t2.product(&t2);
        let again = ConstantTorusModel::new(p.bivector().to_vec()).unwrap();
        assert_eq!(again.rank(), 4);
        assert!(again.validate().iter().all(|c| c.passed));
    }
}
