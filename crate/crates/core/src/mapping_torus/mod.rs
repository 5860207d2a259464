//! Calculus on the hyperbolic mapping torus `T³_A = T² × [0,1] / (m,0) ~ (Am,1)`.
//!
//! Functions live on the cover `T² × [0,1]`: a Fourier series in `m` whose
//! coefficients are curves sampled on `t = j/G`, `j = 0..=G`. Equivariance
//! is `c_{Aᵀk}(t) = λ^w c_k(t+1)`, with weight `w = -1` for the leafwise
//! coframe component dual to `v` and `w = 0` for plain functions.

mod orbit;
mod solver;

pub use orbit::{
    orbit_decomposition, orbit_decomposition_extended, random_equivariant, LatticeOrbit,
    ORBIT_STEP_BUDGET,
};
pub use solver::{
    h2_vanishing_certificate, mt_d_f, mt_d_f_function, solve_mt_top_primitive, H2Certificate,
    MtPrimitive, MtSettings, MtSolveReport, MtTrial,
};

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{Mode, PRUNE_THRESHOLD};
use crate::models::MappingTorusModel;

pub const SEAM_TOLERANCE: f64 = 1e-8;

/// Smallest grid that supports the seven-point boundary closures.
pub const MIN_GRID: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivariantFunction {
    truncation: i64,
    grid: usize,
    weight: i32,
    coeffs: BTreeMap<Mode, Vec<Complex64>>,
}

impl EquivariantFunction {
    pub fn zero(truncation: i64, grid: usize, weight: i32) -> Result<Self> {
        if truncation < 0 {
            return Err(Error::InvalidConfig(format!("truncation {truncation} < 0")));
        }
        if grid < MIN_GRID {
            return Err(Error::GridMismatch(format!(
                "t-grid needs at least {MIN_GRID} intervals, got {grid}"
            )));
        }
        Ok(EquivariantFunction {
            truncation,
            grid,
            weight,
            coeffs: BTreeMap::new(),
        })
    }

    /// Samples `curve(k, t)` on every mode of `modes`.
    pub fn from_fn<'a>(
        truncation: i64,
        grid: usize,
        weight: i32,
        modes: impl IntoIterator<Item = &'a Mode>,
        curve: impl Fn(&Mode, f64) -> Complex64,
    ) -> Result<Self> {
        let mut out = Self::zero(truncation, grid, weight)?;
        for k in modes {
            let samples = (0..=grid)
                .map(|j| curve(k, j as f64 / grid as f64))
                .collect();
            out.set(k.clone(), samples)?;
        }
        Ok(out)
    }

    /// Constant-in-`m` function with the given `t` profile.
    pub fn from_profile(
        truncation: i64,
        grid: usize,
        weight: i32,
        profile: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        Self::from_fn(truncation, grid, weight, [&Mode::zero(2)], |_, t| {
            profile(t)
        })
    }

    pub fn set(&mut self, k: Mode, samples: Vec<Complex64>) -> Result<()> {
        if k.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: k.dim(),
            });
        }
        if k.sup_norm() > self.truncation {
            return Err(Error::InvalidConfig(format!(
                "mode {k} outside |k| ≤ {}",
                self.truncation
            )));
        }
        if samples.len() != self.grid + 1 {
            return Err(Error::GridMismatch(format!(
                "curve for {k} has {} samples, expected {}",
                samples.len(),
                self.grid + 1
            )));
        }
        if samples.iter().all(|c| c.norm() <= PRUNE_THRESHOLD) {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, samples);
        }
        Ok(())
    }

    pub fn truncation(&self) -> i64 {
        self.truncation
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn weight(&self) -> i32 {
        self.weight
    }

    pub fn step(&self) -> f64 {
        1.0 / self.grid as f64
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.grid).map(|j| j as f64 / self.grid as f64)
    }

    pub fn curve(&self, k: &Mode) -> Option<&[Complex64]> {
        self.coeffs.get(k).map(Vec::as_slice)
    }

    pub fn curves(&self) -> impl Iterator<Item = (&Mode, &Vec<Complex64>)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.coeffs
            .values()
            .flat_map(|c| c.iter().map(|z| z.norm()))
            .fold(0.0, f64::max)
    }

    fn check_compatible(&self, other: &EquivariantFunction) -> Result<()> {
        if self.grid != other.grid || self.truncation != other.truncation {
            return Err(Error::GridMismatch(format!(
                "(N={}, G={}) vs (N={}, G={})",
                self.truncation, self.grid, other.truncation, other.grid
            )));
        }
        Ok(())
    }

    fn map_curves(&self, weight: i32, f: impl Fn(&Mode, &[Complex64]) -> Vec<Complex64>) -> Self {
        let mut out = EquivariantFunction {
            weight,
            coeffs: BTreeMap::new(),
            ..*self
        };
        for (k, c) in &self.coeffs {
            out.set(k.clone(), f(k, c)).expect("shape preserved");
        }
        out
    }

    pub fn add(&self, other: &EquivariantFunction) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            let mut sum = out
                .coeffs
                .get(k)
                .cloned()
                .unwrap_or_else(|| vec![Complex64::new(0.0, 0.0); self.grid + 1]);
            sum.iter_mut().zip(c).for_each(|(a, b)| *a += b);
            out.set(k.clone(), sum)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &EquivariantFunction) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map_curves(self.weight, |_, c| c.iter().map(|z| z * s).collect())
    }

    /// Pointwise product with a real profile `h(t)` of weight `dw`.
    pub fn times_profile(&self, h: impl Fn(f64) -> f64, dw: i32) -> Self {
        let g = self.grid as f64;
        self.map_curves(self.weight + dw, |_, c| {
            c.iter()
                .enumerate()
                .map(|(j, z)| z * h(j as f64 / g))
                .collect()
        })
    }

    /// Product of two functions: convolution in `k`, truncated to `|k| ≤ N`.
    pub fn mul(&self, other: &EquivariantFunction) -> Result<Self> {
        self.check_compatible(other)?;
        let mut acc: BTreeMap<Mode, Vec<Complex64>> = BTreeMap::new();
        for (a, ca) in &self.coeffs {
            for (b, cb) in &other.coeffs {
                let k = a.add(b);
                if k.sup_norm() > self.truncation {
                    continue;
                }
                let slot = acc
                    .entry(k)
                    .or_insert_with(|| vec![Complex64::new(0.0, 0.0); self.grid + 1]);
                for ((s, x), y) in slot.iter_mut().zip(ca).zip(cb) {
                    *s += x * y;
                }
            }
        }
        let mut out = Self::zero(self.truncation, self.grid, self.weight + other.weight)?;
        for (k, c) in acc {
            out.set(k, c)?;
        }
        Ok(out)
    }

    /// Leaf derivative `V`: multiplies mode `k` by `2πi (k·v)`. Since
    /// `Aᵀk·v = λ⁻¹ k·v` it lowers the weight by one.
    pub fn leaf_derivative(&self, v: [f64; 2]) -> Self {
        self.map_curves(self.weight - 1, |k, c| {
            let s = Complex64::new(0.0, 2.0 * PI * k.dot(&v));
            c.iter().map(|z| z * s).collect()
        })
    }

    /// Fourth-order finite-difference `∂_t`.
    pub fn t_derivative(&self) -> Self {
        let h = self.step();
        self.map_curves(self.weight, |_, c| t_derivative(c, h))
    }

    /// Largest `|c_{Aᵀk}(0) - λ^w c_k(1)|` over pairs with both modes in the box.
    pub fn seam_mismatch(&self, model: &MappingTorusModel) -> f64 {
        let scale = model.lambda().powi(self.weight);
        let zero = Complex64::new(0.0, 0.0);
        let mut worst: f64 = 0.0;
        let n = self.truncation;
        for k in crate::fourier::modes_in_box(2, n) {
            let a = model.transpose_action([k.0[0], k.0[1]]);
            if a[0].abs() > n || a[1].abs() > n {
                continue;
            }
            let ak = Mode::new(a.to_vec());
            let left = self.curve(&ak).map_or(zero, |c| c[0]);
            let right = self.curve(&k).map_or(zero, |c| c[self.grid]);
            worst = worst.max((left - scale * right).norm());
        }
        worst
    }

    /// Largest `|c_{-k}(t) - conj(c_k(t))|`.
    pub fn realness_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (k, c) in &self.coeffs {
            let d = match self.curve(&k.neg()) {
                Some(m) => c
                    .iter()
                    .zip(m)
                    .map(|(a, b)| (a - b.conj()).norm())
                    .fold(0.0, f64::max),
                None => c.iter().map(|z| z.norm()).fold(0.0, f64::max),
            };
            worst = worst.max(d);
        }
        worst
    }

    /// Value at `(x, y)` and grid index `j`.
    pub fn eval(&self, x: [f64; 2], j: usize) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(k, c)| c[j] * Complex64::from_polar(1.0, 2.0 * PI * k.dot(&x)))
            .sum()
    }
}

/// `{f,g} = λ^{-t} (V f · ∂_t g - ∂_t f · V g)`.
pub fn mt_bracket(
    model: &MappingTorusModel,
    f: &EquivariantFunction,
    g: &EquivariantFunction,
) -> Result<EquivariantFunction> {
    f.check_compatible(g)?;
    let v = model.v();
    let left = f.leaf_derivative(v).mul(&g.t_derivative())?;
    let right = f.t_derivative().mul(&g.leaf_derivative(v))?;
    // λ^{-t} has weight +1
    Ok(left
        .sub(&right)?
        .times_profile(|t| model.bivector_factor(t), 1))
}

/// Sixth-order one-sided closures for the first two samples, in units of `1/(60h)`.
const CLOSURE: [[f64; 7]; 2] = [
    [-147.0, 360.0, -450.0, 400.0, -225.0, 72.0, -10.0],
    [-10.0, -77.0, 150.0, -100.0, 50.0, -15.0, 2.0],
];

/// Fourth-order central differences inside, sixth-order one-sided closures
/// at the two ends so the seam samples are no less accurate than the interior.
pub fn t_derivative(c: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = c.len();
    assert!(
        n > MIN_GRID,
        "boundary closures need at least {} samples",
        MIN_GRID + 1
    );
    let s = 1.0 / (12.0 * h);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for j in 2..n - 2 {
        out[j] = (-c[j + 2] + 8.0 * c[j + 1] - 8.0 * c[j - 1] + c[j - 2]) * s;
    }
    let s = 1.0 / (60.0 * h);
    let m = n - 1;
    for (j, w) in CLOSURE.iter().enumerate() {
        let head: Complex64 = w.iter().enumerate().map(|(i, wi)| c[i] * *wi).sum();
        let tail: Complex64 = w.iter().enumerate().map(|(i, wi)| c[m - i] * *wi).sum();
        out[j] = head * s;
        out[m - j] = -tail * s;
    }
    out
}

const GAUSS3: [(f64, f64); 3] = [
    (0.5 - 0.387_298_334_620_741_7, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.5 + 0.387_298_334_620_741_7, 5.0 / 18.0),
];

/// `∫₀^{t_j} c` at every grid point, integrating the six-point interpolant on each cell.
pub fn cumulative_integral(c: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = c.len();
    assert!(
        n > MIN_GRID,
        "six-point interpolation needs at least {} samples",
        MIN_GRID + 1
    );
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n - 1 {
        let start = j.saturating_sub(2).min(n - 6);
        // cell [j, j+1] in units of h, nodes at start..start+6
        let mut cell = Complex64::new(0.0, 0.0);
        for (x, w) in GAUSS3 {
            let at = j as f64 + x;
            for i in 0..6 {
                let xi = (start + i) as f64;
                let basis: f64 = (0..6)
                    .filter(|&m| m != i)
                    .map(|m| (at - (start + m) as f64) / (xi - (start + m) as f64))
                    .product();
                cell += c[start + i] * (w * basis);
            }
        }
        out[j + 1] = out[j] + cell * h;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sampled(g: usize, f: impl Fn(f64) -> f64) -> Vec<Complex64> {
        (0..=g)
            .map(|j| Complex64::new(f(j as f64 / g as f64), 0.0))
            .collect()
    }

    #[test]
    fn derivative_is_fourth_order() {
        let f = |t: f64| (3.0 * t).sin() + t.exp();
        let df = |t: f64| 3.0 * (3.0 * t).cos() + t.exp();
        let err = |g: usize| {
            let d = t_derivative(&sampled(g, f), 1.0 / g as f64);
            d.iter()
                .enumerate()
                .map(|(j, z)| (z.re - df(j as f64 / g as f64)).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(32), err(64));
        assert!(e2 < 1e-5, "{e2:e}");
        assert!(e1 / e2 > 12.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn quadrature_matches_antiderivative() {
        let g = 64;
        let c = sampled(g, |t| (2.0 * PI * t).cos() * 1.5f64.powf(t));
        let anti = |t: f64| {
            // ∫ e^{at} cos(bt) = e^{at}(a cos bt + b sin bt)/(a²+b²)
            let (a, b) = (1.5f64.ln(), 2.0 * PI);
            (a * t).exp() * (a * (b * t).cos() + b * (b * t).sin()) / (a * a + b * b)
                - a / (a * a + b * b)
        };
        let q = cumulative_integral(&c, 1.0 / g as f64);
        for (j, z) in q.iter().enumerate() {
            assert!((z.re - anti(j as f64 / g as f64)).abs() < 1e-9);
        }
    }

    #[test]
    fn weights_and_shapes_are_checked() {
        assert!(EquivariantFunction::zero(4, 3, 0).is_err());
        let mut f = EquivariantFunction::zero(2, 8, 0).unwrap();
        assert!(f
            .set(Mode::new(vec![3, 0]), vec![Complex64::new(1.0, 0.0); 9])
            .is_err());
        assert!(f
            .set(Mode::new(vec![1, 0]), vec![Complex64::new(1.0, 0.0); 8])
            .is_err());
        let g = EquivariantFunction::zero(2, 16, 0).unwrap();
        assert!(f.add(&g).is_err());
    }

    #[test]
    fn bracket_with_constant_vanishes() {
        let m = MappingTorusModel::cat_map();
        let one =
            EquivariantFunction::from_profile(4, 32, 0, |_| Complex64::new(1.0, 0.0)).unwrap();
        let f = random_equivariant(&m, 4, 32, 0, &mut crate::random::rng(3)).unwrap();
        assert!(mt_bracket(&m, &f, &one).unwrap().sup_norm() < 1e-10);
        let a =
            EquivariantFunction::from_profile(4, 32, 0, |t| Complex64::new(t.sin(), 0.0)).unwrap();
        let b =
            EquivariantFunction::from_profile(4, 32, 0, |t| Complex64::new(t * t, 0.0)).unwrap();
        assert!(mt_bracket(&m, &a, &b).unwrap().is_zero());
    }

    #[test]
    fn bracket_matches_direct_formula() {
        let m = MappingTorusModel::cat_map();
        let (n, g) = (2, 64);
        let e10 = Mode::new(vec![1, 0]);
        let f =
            EquivariantFunction::from_fn(n, g, 0, [&e10], |_, _| Complex64::new(1.0, 0.0)).unwrap();
        let prof = |t: f64| (0.7 * t).exp() + t * t * t;
        let dprof = |t: f64| 0.7 * (0.7 * t).exp() + 3.0 * t * t;
        let h =
            EquivariantFunction::from_profile(n, g, 0, |t| Complex64::new(prof(t), 0.0)).unwrap();
        let b = mt_bracket(&m, &f, &h).unwrap();
        let v1 = m.v()[0];
        let curve = b.curve(&e10).unwrap();
        for (j, z) in curve.iter().enumerate() {
            let t = j as f64 / g as f64;
            let want = Complex64::new(0.0, 2.0 * PI * v1) * m.bivector_factor(t) * dprof(t);
            assert!((z - want).norm() < 1e-6, "t={t}: {z} vs {want}");
        }
        assert_eq!(b.curves().count(), 1);
    }

    #[test]
    fn bracket_is_antisymmetric_and_preserves_equivariance() {
        let m = MappingTorusModel::cat_map();
        let mut r = crate::random::rng(11);
        let f = random_equivariant(&m, 6, 64, 0, &mut r).unwrap();
        let g = random_equivariant(&m, 6, 64, 0, &mut r).unwrap();
        let fg = mt_bracket(&m, &f, &g).unwrap();
        let gf = mt_bracket(&m, &g, &f).unwrap();
        assert!(fg.add(&gf).unwrap().sup_norm() < 1e-12);
        assert!(fg.realness_defect() < 1e-12);
        assert_eq!(fg.weight(), 0);
        assert!(f.seam_mismatch(&m) < 1e-12);
    }
}
