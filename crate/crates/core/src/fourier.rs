//! Truncated Fourier series on the flat torus `T^m = R^m / Z^m`.
//!
//! A [`TrigPoly`] is a finite map from lattice modes `k ∈ Z^m` to complex
//! coefficients, standing for `Σ c_k exp(2πi k·x)`. Every operation prunes
//! coefficients whose magnitude falls below [`PRUNE_THRESHOLD`], and all
//! iteration follows the lexicographic order of [`Mode`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients with magnitude below this are dropped after every operation.
pub const PRUNE_THRESHOLD: f64 = 1e-14;

const TWO_PI_I: Complex64 = Complex64::new(0.0, 2.0 * PI);

/// A lattice point of `Z^m`, ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mode(pub Vec<i64>);

impl Mode {
    pub fn new(k: impl Into<Vec<i64>>) -> Self {
        Mode(k.into())
    }

    pub fn zero(dim: usize) -> Self {
        Mode(vec![0; dim])
    }

    /// The unit vector `±e_axis`.
    pub fn unit(dim: usize, axis: usize, sign: i64) -> Self {
        let mut k = vec![0; dim];
        k[axis] = sign;
        Mode(k)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Sup-norm `|k|∞`.
    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn dot(&self, v: &[f64]) -> f64 {
        self.0.iter().zip(v).map(|(&k, &x)| k as f64 * x).sum()
    }

    pub fn add(&self, other: &Mode) -> Mode {
        Mode(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Mode) -> Mode {
        Mode(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Mode {
        Mode(self.0.iter().map(|a| -a).collect())
    }

    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<&[i64]> for Mode {
    fn from(k: &[i64]) -> Self {
        Mode(k.to_vec())
    }
}

/// All modes with `|k|∞ ≤ n` in dimension `dim`, in lexicographic order.
pub fn modes_in_box(dim: usize, n: i64) -> impl Iterator<Item = Mode> {
    let side = (2 * n + 1) as u64;
    let total = side.pow(dim as u32);
    (0..total).map(move |mut idx| {
        let mut k = vec![0i64; dim];
        for slot in k.iter_mut().rev() {
            *slot = (idx % side) as i64 - n;
            idx /= side;
        }
        Mode(k)
    })
}

/// Products whose bounding box has at most this many cells are accumulated densely.
const DENSE_CELLS: i64 = 1 << 22;

/// Row-major box of modes holding every `a + b` of a product.
struct DenseBox {
    lo: Vec<i64>,
    extent: Vec<i64>,
    stride: Vec<i64>,
}

impl DenseBox {
    fn around(x: &TrigPoly, y: &TrigPoly) -> Option<DenseBox> {
        if x.coeffs.is_empty() || y.coeffs.is_empty() {
            return None;
        }
        let bounds = |p: &TrigPoly, i: usize| {
            let it = p.coeffs.keys().map(|k| k.0[i]);
            (it.clone().min().unwrap(), it.max().unwrap())
        };
        let mut lo = Vec::with_capacity(x.dim);
        let mut extent = Vec::with_capacity(x.dim);
        let mut cells: i64 = 1;
        for i in 0..x.dim {
            let ((xl, xh), (yl, yh)) = (bounds(x, i), bounds(y, i));
            let e = xh + yh - xl - yl + 1;
            cells = cells.checked_mul(e)?;
            if cells > DENSE_CELLS {
                return None;
            }
            lo.push(xl + yl);
            extent.push(e);
        }
        let mut stride = vec![1; x.dim];
        for i in (0..x.dim.saturating_sub(1)).rev() {
            stride[i] = stride[i + 1] * extent[i + 1];
        }
        Some(DenseBox { lo, extent, stride })
    }

    fn offset(&self, k: &Mode) -> i64 {
        k.0.iter().zip(&self.stride).map(|(a, s)| a * s).sum()
    }

    /// Same summation order as the sparse loop, so results agree bitwise.
    fn convolve(&self, x: &TrigPoly, y: &TrigPoly) -> BTreeMap<Mode, Complex64> {
        let base: i64 = self.lo.iter().zip(&self.stride).map(|(l, s)| l * s).sum();
        let cells = self.extent.iter().product::<i64>() as usize;
        let mut acc = vec![Complex64::new(0.0, 0.0); cells];
        let ys: Vec<(i64, Complex64)> =
            y.coeffs.iter().map(|(k, c)| (self.offset(k), *c)).collect();
        for (a, ca) in &x.coeffs {
            let oa = self.offset(a) - base;
            for (ob, cb) in &ys {
                acc[(oa + ob) as usize] += ca * cb;
            }
        }
        acc.into_iter()
            .enumerate()
            .filter(|(_, c)| c.norm() >= PRUNE_THRESHOLD)
            .map(|(idx, c)| {
                let mut rest = idx as i64;
                let k = self
                    .stride
                    .iter()
                    .zip(&self.lo)
                    .map(|(s, l)| {
                        let q = rest / s;
                        rest %= s;
                        q + l
                    })
                    .collect();
                (Mode(k), c)
            })
            .collect()
    }
}

/// Finite trigonometric polynomial on `T^dim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "TrigPolyRepr", try_from = "TrigPolyRepr")]
pub struct TrigPoly {
    dim: usize,
    coeffs: BTreeMap<Mode, Complex64>,
}

#[derive(Serialize, Deserialize)]
struct TrigPolyRepr {
    dim: usize,
    terms: Vec<(Mode, Complex64)>,
}

impl From<TrigPoly> for TrigPolyRepr {
    fn from(p: TrigPoly) -> Self {
        TrigPolyRepr {
            dim: p.dim,
            terms: p.coeffs.into_iter().collect(),
        }
    }
}

impl TryFrom<TrigPolyRepr> for TrigPoly {
    type Error = Error;

    fn try_from(r: TrigPolyRepr) -> Result<Self> {
        TrigPoly::from_terms(r.dim, r.terms)
    }
}

impl TrigPoly {
    pub fn zero(dim: usize) -> Self {
        TrigPoly {
            dim,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: impl Into<Complex64>) -> Self {
        Self::monomial(Mode::zero(dim), c)
    }

    /// `c · e_k`.
    pub fn monomial(k: Mode, c: impl Into<Complex64>) -> Self {
        let dim = k.dim();
        let mut coeffs = BTreeMap::new();
        let c = c.into();
        if c.norm() >= PRUNE_THRESHOLD {
            coeffs.insert(k, c);
        }
        TrigPoly { dim, coeffs }
    }

    /// Builds a polynomial from `(mode, coefficient)` pairs; repeated modes accumulate.
    pub fn from_terms(
        dim: usize,
        terms: impl IntoIterator<Item = (Mode, Complex64)>,
    ) -> Result<Self> {
        let mut coeffs: BTreeMap<Mode, Complex64> = BTreeMap::new();
        for (k, c) in terms {
            if k.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: k.dim(),
                });
            }
            *coeffs.entry(k).or_default() += c;
        }
        Ok(TrigPoly { dim, coeffs }.pruned())
    }

    fn pruned(mut self) -> Self {
        self.coeffs.retain(|_, c| c.norm() >= PRUNE_THRESHOLD);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: &Mode) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Mode, &Complex64)> {
        self.coeffs.iter()
    }

    /// Max sup-norm over supported modes; 0 for the zero polynomial.
    pub fn degree(&self) -> i64 {
        self.coeffs.keys().map(Mode::sup_norm).max().unwrap_or(0)
    }

    fn check_dim(&self, other: &TrigPoly) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &TrigPoly) -> Result<TrigPoly> {
        self.check_dim(other)?;
        let mut coeffs = self.coeffs.clone();
        for (k, c) in &other.coeffs {
            *coeffs.entry(k.clone()).or_default() += c;
        }
        Ok(TrigPoly {
            dim: self.dim,
            coeffs,
        }
        .pruned())
    }

    pub fn sub(&self, other: &TrigPoly) -> Result<TrigPoly> {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: impl Into<Complex64>) -> TrigPoly {
        let s = s.into();
        TrigPoly {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, c)| (k.clone(), c * s))
                .collect(),
        }
        .pruned()
    }

    /// Total order on coefficient maps, used to fix the summation order in `mul`.
    fn bit_order(&self, other: &TrigPoly) -> std::cmp::Ordering {
        let key = |(k, c): (&Mode, &Complex64)| (k.clone(), c.re.to_bits(), c.im.to_bits());
        self.coeffs.len().cmp(&other.coeffs.len()).then_with(|| {
            self.coeffs
                .iter()
                .map(key)
                .cmp(other.coeffs.iter().map(key))
        })
    }

    /// Convolution of coefficient maps. Bitwise commutative: the operands are
    /// put in a fixed order before summing.
    pub fn mul(&self, other: &TrigPoly) -> Result<TrigPoly> {
        self.check_dim(other)?;
        let (x, y) = if self.bit_order(other).is_gt() {
            (other, self)
        } else {
            (self, other)
        };
        let coeffs = match DenseBox::around(x, y) {
            Some(b) => b.convolve(x, y),
            None => {
                let mut coeffs: BTreeMap<Mode, Complex64> = BTreeMap::new();
                for (a, ca) in &x.coeffs {
                    for (b, cb) in &y.coeffs {
                        *coeffs.entry(a.add(b)).or_default() += ca * cb;
                    }
                }
                coeffs
            }
        };
        Ok(TrigPoly {
            dim: self.dim,
            coeffs,
        }
        .pruned())
    }

    /// Multiplies each coefficient `c_k` by `symbol(k)`.
    pub fn apply_symbol(&self, symbol: impl Fn(&Mode) -> Complex64) -> TrigPoly {
        TrigPoly {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, c)| (k.clone(), c * symbol(k)))
                .collect(),
        }
        .pruned()
    }

    /// `∂/∂x_j`: `c_k ↦ 2πi k_j c_k`.
    pub fn partial_derivative(&self, axis: usize) -> Result<TrigPoly> {
        if axis >= self.dim {
            return Err(Error::AxisOutOfRange {
                axis,
                dim: self.dim,
            });
        }
        Ok(self.apply_symbol(|k| TWO_PI_I * k.0[axis] as f64))
    }

    /// Derivative along a constant vector field: `c_k ↦ 2πi (k·v) c_k`.
    pub fn directional_derivative(&self, v: &[f64]) -> Result<TrigPoly> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        Ok(self.apply_symbol(|k| TWO_PI_I * k.dot(v)))
    }

    /// Average over the torus, i.e. the zero-mode coefficient.
    pub fn mean(&self) -> Complex64 {
        self.coeff(&Mode::zero(self.dim))
    }

    /// Upper bound `Σ|c_k|` on the sup-norm.
    pub fn sup_norm_estimate(&self) -> f64 {
        self.coeffs.values().fold(0.0, |s, c| s + c.norm())
    }

    /// `(Σ (1+|k|²)^s |c_k|²)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(k, c)| {
                let k2: f64 = k.0.iter().map(|&x| (x * x) as f64).sum();
                (1.0 + k2).powf(s) * c.norm_sqr()
            })
            .sum::<f64>()
            .sqrt()
    }

    pub fn conj(&self) -> TrigPoly {
        TrigPoly {
            dim: self.dim,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, c)| (k.neg(), c.conj()))
                .collect(),
        }
    }

    /// Hermitian scan: `c_{-k} = conj(c_k)` for every supported `k`, within `tol`.
    pub fn is_real(&self, tol: f64) -> bool {
        self.coeffs
            .iter()
            .all(|(k, c)| (self.coeff(&k.neg()) - c.conj()).norm() <= tol)
    }

    /// Point evaluation at `x ∈ R^dim`.
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(k, c)| c * Complex64::from_polar(1.0, 2.0 * PI * k.dot(x)))
            .sum()
    }

    /// Lattice pairing `Σ_k f_k g_{-k}`, equal to the mean of `f·g`.
    pub fn lattice_pairing(&self, other: &TrigPoly) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(k, c)| c * other.coeff(&k.neg()))
            .sum()
    }
}
