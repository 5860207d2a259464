//! Foliated de Rham complex for constant-coefficient torus models.
//!
//! Leafwise forms are expressed in the coframe `ε¹..ε^r` dual to the model's
//! leafwise frame `E_1..E_r` (see [`ConstantTorusModel::frame`]). Because the
//! frame is constant, every `E_j` acts diagonally on Fourier modes with symbol
//! `D_j(k) = 2πi (k·E_j)`, so the top-degree cohomological equation can be
//! inverted mode by mode.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{modes_in_box, Mode, TrigPoly};
use crate::models::ConstantTorusModel;

/// Default floor on `max_j |D_j(k)|` below which a mode is not inverted.
pub const DEFAULT_DIVISOR_FLOOR: f64 = 1e-9;

/// Pairings `|k·E_j|` at or below this are exact resonances (true cokernel).
pub const RESONANCE_EPS: f64 = 1e-13;

/// Sorted `d`-subsets of `0..r` in lexicographic order.
pub fn combinations(r: usize, d: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, r: usize, d: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        for i in start..r {
            cur.push(i);
            rec(i + 1, r, d, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, r, d, &mut Vec::new(), &mut out);
    out
}

/// Degree-`d` leafwise form `Σ_I a_I ε^I` on a rank-`r` foliation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafwiseForm {
    rank: usize,
    degree: usize,
    coeffs: Vec<TrigPoly>,
}

impl LeafwiseForm {
    /// Coefficients are listed in the order of [`combinations`]`(rank, degree)`.
    pub fn new(rank: usize, degree: usize, coeffs: Vec<TrigPoly>) -> Result<Self> {
        if degree > rank {
            return Err(Error::TopDegree { degree, top: rank });
        }
        let expected = combinations(rank, degree).len();
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: coeffs.len(),
            });
        }
        if let Some(first) = coeffs.first() {
            if let Some(bad) = coeffs.iter().find(|c| c.dim() != first.dim()) {
                return Err(Error::DimensionMismatch {
                    expected: first.dim(),
                    got: bad.dim(),
                });
            }
        }
        Ok(LeafwiseForm {
            rank,
            degree,
            coeffs,
        })
    }

    pub fn zero(rank: usize, degree: usize, dim: usize) -> Self {
        let n = combinations(rank, degree).len();
        LeafwiseForm {
            rank,
            degree,
            coeffs: vec![TrigPoly::zero(dim); n],
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[TrigPoly] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(TrigPoly::is_empty)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.is_real(tol))
    }

    pub fn add(&self, other: &LeafwiseForm) -> Result<LeafwiseForm> {
        if self.rank != other.rank || self.degree != other.degree {
            return Err(Error::DimensionMismatch {
                expected: self.degree,
                got: other.degree,
            });
        }
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(LeafwiseForm { coeffs, ..*self })
    }

    pub fn sub(&self, other: &LeafwiseForm) -> Result<LeafwiseForm> {
        self.add(&LeafwiseForm {
            coeffs: other.coeffs.iter().map(|c| c.scale(-1.0)).collect(),
            ..*other
        })
    }

    /// Sum of coefficient sup-norm estimates.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(TrigPoly::sup_norm_estimate).sum()
    }
}

fn check_rank(model: &ConstantTorusModel, form: &LeafwiseForm) -> Result<()> {
    if form.rank != model.rank() {
        return Err(Error::DimensionMismatch {
            expected: model.rank(),
            got: form.rank,
        });
    }
    Ok(())
}

/// Foliated differential `d_F`.
pub fn d_f(model: &ConstantTorusModel, form: &LeafwiseForm) -> Result<LeafwiseForm> {
    check_rank(model, form)?;
    let r = form.rank;
    if form.degree >= r {
        return Err(Error::TopDegree {
            degree: form.degree,
            top: r,
        });
    }
    let dim = model.dim();
    let src = combinations(r, form.degree);
    let index: BTreeMap<&[usize], usize> = src
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_slice(), i))
        .collect();
    let frame = model.frame();
    let coeffs = combinations(r, form.degree + 1)
        .into_iter()
        .map(|target| {
            let mut acc = TrigPoly::zero(dim);
            for s in 0..target.len() {
                let mut rest = target.clone();
                let j = rest.remove(s);
                let a = &form.coeffs[index[rest.as_slice()]];
                let term = a.directional_derivative(&frame[j])?;
                acc = if s % 2 == 0 {
                    acc.add(&term)?
                } else {
                    acc.sub(&term)?
                };
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    Ok(LeafwiseForm {
        rank: r,
        degree: form.degree + 1,
        coeffs,
    })
}

/// `φ(f) = f · ωⁿ/n!`, the top-degree form with coefficient `f` in the
/// leafwise Liouville coframe `ε¹∧…∧ε^r`.
pub fn phi(model: &ConstantTorusModel, f: &TrigPoly) -> Result<LeafwiseForm> {
    if f.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: f.dim(),
        });
    }
    LeafwiseForm::new(model.rank(), model.rank(), vec![f.clone()])
}

/// Leafwise Liouville volume `ωⁿ/n!`.
pub fn leafwise_volume(model: &ConstantTorusModel) -> LeafwiseForm {
    LeafwiseForm {
        rank: model.rank(),
        degree: model.rank(),
        coeffs: vec![TrigPoly::constant(model.dim(), 1.0)],
    }
}

/// `g · i_{X_f}(ωⁿ/n!)`, whose leafwise differential is `{f,g} ωⁿ/n!`.
pub fn contract_hamiltonian_volume(
    model: &ConstantTorusModel,
    f: &TrigPoly,
    g: &TrigPoly,
) -> Result<LeafwiseForm> {
    let r = model.rank();
    let frame = model.frame();
    // X_f = -P df; with P = Σ E_a∧E_b: X^a = -E_b f, X^b = E_a f
    let mut x = Vec::with_capacity(r);
    for pair in frame.chunks(2) {
        x.push(f.directional_derivative(&pair[1])?.scale(-1.0));
        x.push(f.directional_derivative(&pair[0])?);
    }
    // i_X(ε^0∧…∧ε^{r-1}) = Σ_j (-1)^j X^j ε^{ĵ}; combinations(r, r-1) lists ĵ for j = r-1..0
    let mut coeffs = vec![TrigPoly::zero(model.dim()); r];
    for (j, xj) in x.iter().enumerate() {
        let slot = r - 1 - j;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        coeffs[slot] = g.mul(xj)?.scale(sign);
    }
    LeafwiseForm::new(r, r - 1, coeffs)
}

/// Modes that the solvers could not invert.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ObstructionReport {
    /// Exactly resonant modes (all symbols vanish) with the input coefficient.
    pub obstructed: Vec<(Mode, Complex64)>,
    /// Modes whose largest symbol is nonzero but below the divisor floor.
    pub resonant: Vec<(Mode, Complex64)>,
    /// Smallest divisor actually inverted; `None` when nothing was inverted.
    pub smallest_divisor: Option<f64>,
    /// Inverted divisors counted by decade `floor(log10 |D|)`.
    pub divisor_histogram: BTreeMap<i32, usize>,
    pub divisor_floor: f64,
}

impl ObstructionReport {
    fn new(divisor_floor: f64) -> Self {
        ObstructionReport {
            divisor_floor,
            ..Default::default()
        }
    }

    fn record_divisor(&mut self, d: f64) {
        self.smallest_divisor = Some(self.smallest_divisor.map_or(d, |s| s.min(d)));
        *self
            .divisor_histogram
            .entry(d.log10().floor() as i32)
            .or_default() += 1;
    }

    /// False when some mode was skipped for being numerically resonant.
    pub fn reliable(&self) -> bool {
        self.resonant.is_empty()
    }
}

/// How a single mode behaves under the leafwise symbols.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeClass {
    /// All symbols vanish: contributes to top cohomology.
    Obstructed,
    /// Largest symbol nonzero but below the floor.
    Resonant,
    /// Invertible along `axis` with divisor `symbol`.
    Solvable { axis: usize, symbol: Complex64 },
}

pub fn classify_mode(model: &ConstantTorusModel, k: &Mode, divisor_floor: f64) -> ModeClass {
    let pairings = model.pairings(k);
    if pairings.iter().all(|p| p.abs() <= RESONANCE_EPS) {
        return ModeClass::Obstructed;
    }
    let mut axis = 0;
    for (j, p) in pairings.iter().enumerate() {
        if p.abs() > pairings[axis].abs() {
            axis = j;
        }
    }
    let symbol = Complex64::new(0.0, 2.0 * PI * pairings[axis]);
    if symbol.norm() < divisor_floor {
        ModeClass::Resonant
    } else {
        ModeClass::Solvable { axis, symbol }
    }
}

/// Inverts `d_F` on a top-degree form mode by mode.
///
/// Returns a primitive `γ` of degree `r-1` with `d_F γ = top` on every
/// solvable mode; the rest is listed in the report.
pub fn solve_top_primitive(
    model: &ConstantTorusModel,
    top: &LeafwiseForm,
    divisor_floor: f64,
) -> Result<(LeafwiseForm, ObstructionReport)> {
    check_rank(model, top)?;
    let r = model.rank();
    if top.degree != r {
        return Err(Error::DimensionMismatch {
            expected: r,
            got: top.degree,
        });
    }
    let dim = model.dim();
    let mut report = ObstructionReport::new(divisor_floor);
    let mut terms: Vec<Vec<(Mode, Complex64)>> = vec![Vec::new(); r];
    for (k, c) in top.coeffs[0].terms() {
        match classify_mode(model, k, divisor_floor) {
            ModeClass::Obstructed => report.obstructed.push((k.clone(), *c)),
            ModeClass::Resonant => report.resonant.push((k.clone(), *c)),
            ModeClass::Solvable { axis, symbol } => {
                report.record_divisor(symbol.norm());
                let sign = if axis % 2 == 0 { 1.0 } else { -1.0 };
                terms[r - 1 - axis].push((k.clone(), c / symbol * sign));
            }
        }
    }
    let coeffs = terms
        .into_iter()
        .map(|t| TrigPoly::from_terms(dim, t))
        .collect::<Result<_>>()?;
    Ok((LeafwiseForm::new(r, r - 1, coeffs)?, report))
}

/// Solves `∂_w u = f` for a constant direction `w`, skipping resonant modes.
pub fn solve_cohomological_equation(
    w: &[f64],
    f: &TrigPoly,
    divisor_floor: f64,
) -> Result<(TrigPoly, ObstructionReport)> {
    if w.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: w.len(),
        });
    }
    let mut report = ObstructionReport::new(divisor_floor);
    let mut terms = Vec::new();
    for (k, c) in f.terms() {
        let p = k.dot(w);
        if p.abs() <= RESONANCE_EPS {
            report.obstructed.push((k.clone(), *c));
            continue;
        }
        let symbol = Complex64::new(0.0, 2.0 * PI * p);
        if symbol.norm() < divisor_floor {
            report.resonant.push((k.clone(), *c));
        } else {
            report.record_divisor(symbol.norm());
            terms.push((k.clone(), c / symbol));
        }
    }
    Ok((TrigPoly::from_terms(f.dim(), terms)?, report))
}

/// Truncated count of top foliated cohomology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopDimEstimate {
    pub truncation: i64,
    pub dim: usize,
    /// Count at truncation `⌈N/2⌉`.
    pub dim_half: usize,
    pub stable: bool,
    pub obstructed: Vec<Mode>,
    pub resonant_count: usize,
    pub smallest_divisor: Option<f64>,
    pub divisor_floor: f64,
}

impl TopDimEstimate {
    pub fn reliable(&self) -> bool {
        self.resonant_count == 0
    }
}

fn count_obstructed(
    model: &ConstantTorusModel,
    n: i64,
    floor: f64,
) -> (Vec<Mode>, usize, Option<f64>) {
    let mut obstructed = Vec::new();
    let mut resonant = 0;
    let mut smallest: Option<f64> = None;
    for k in modes_in_box(model.dim(), n) {
        match classify_mode(model, &k, floor) {
            ModeClass::Obstructed => obstructed.push(k),
            ModeClass::Resonant => resonant += 1,
            ModeClass::Solvable { symbol, .. } => {
                let d = symbol.norm();
                smallest = Some(smallest.map_or(d, |s| s.min(d)));
            }
        }
    }
    (obstructed, resonant, smallest)
}

/// Counts modes `|k|∞ ≤ N` for which `φ(e_k)` is not exact.
pub fn estimate_h_top_dim(
    model: &ConstantTorusModel,
    n: i64,
    divisor_floor: f64,
) -> Result<TopDimEstimate> {
    if n < 1 {
        return Err(Error::InvalidConfig(format!(
            "truncation must be ≥ 1, got {n}"
        )));
    }
    let (obstructed, resonant_count, smallest_divisor) = count_obstructed(model, n, divisor_floor);
    let half = (n + 1) / 2;
    let dim_half = count_obstructed(model, half, divisor_floor).0.len();
    Ok(TopDimEstimate {
        truncation: n,
        dim: obstructed.len(),
        dim_half,
        stable: dim_half == obstructed.len(),
        obstructed,
        resonant_count,
        smallest_divisor,
        divisor_floor,
    })
}

/// Dimension of `ker d_F` on functions at truncation (leafwise constant modes).
pub fn casimir_count(model: &ConstantTorusModel, n: i64) -> usize {
    modes_in_box(model.dim(), n)
        .filter(|k| model.pairings(k).iter().all(|p| p.abs() <= RESONANCE_EPS))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::CosymplecticTorusModel;

    fn golden() -> f64 {
        (5f64.sqrt() - 1.0) / 2.0
    }

    fn e(k: &[i64]) -> TrigPoly {
        TrigPoly::monomial(Mode::new(k.to_vec()), 1.0)
    }

    fn t2() -> ConstantTorusModel {
        ConstantTorusModel::symplectic_t2()
    }

    fn kron() -> ConstantTorusModel {
        CosymplecticTorusModel::kronecker_t3(golden())
            .unwrap()
            .poisson()
            .clone()
    }

    fn fibration() -> ConstantTorusModel {
        CosymplecticTorusModel::fibration_t3().poisson().clone()
    }

    #[test]
    fn combinations_order() {
        assert_eq!(combinations(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        assert_eq!(combinations(2, 0), vec![Vec::<usize>::new()]);
    }

    #[test]
    fn d_f_examples() {
        let m = t2();
        let c = LeafwiseForm::new(2, 0, vec![TrigPoly::constant(2, 4.0)]).unwrap();
        assert!(d_f(&m, &c).unwrap().is_zero());

        let f = LeafwiseForm::new(2, 0, vec![e(&[1, 0])]).unwrap();
        let df = d_f(&m, &f).unwrap();
        assert_eq!(df.degree(), 1);
        assert_eq!(
            df.coeffs()[0],
            e(&[1, 0]).scale(Complex64::new(0.0, 2.0 * PI))
        );
        assert!(df.coeffs()[1].is_empty());
    }

    #[test]
    fn d_f_rejects_top_degree() {
        let m = t2();
        let top = leafwise_volume(&m);
        assert!(matches!(d_f(&m, &top), Err(Error::TopDegree { .. })));
    }

    #[test]
    fn phi_examples() {
        let m = t2();
        assert_eq!(
            phi(&m, &TrigPoly::constant(2, 1.0)).unwrap(),
            leafwise_volume(&m)
        );
        assert!(phi(&m, &TrigPoly::zero(2)).unwrap().is_zero());
        let (f, g) = (e(&[1, 2]), e(&[0, -1]).scale(3.0));
        let lhs = phi(&m, &f.add(&g).unwrap()).unwrap();
        let rhs = phi(&m, &f).unwrap().add(&phi(&m, &g).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        assert!(phi(&m, &e(&[1, 0, 0])).is_err());
    }

    #[test]
    fn symplectic_volume_is_obstructed_only_at_zero() {
        let m = t2();
        let (prim, rep) =
            solve_top_primitive(&m, &leafwise_volume(&m), DEFAULT_DIVISOR_FLOOR).unwrap();
        assert!(prim.is_zero());
        assert_eq!(
            rep.obstructed,
            vec![(Mode::zero(2), Complex64::new(1.0, 0.0))]
        );
        assert!(rep.reliable());
    }

    #[test]
    fn kronecker_y_mode_solved_by_b() {
        let m = kron();
        let top = phi(&m, &e(&[0, 1, 0])).unwrap();
        let (prim, rep) = solve_top_primitive(&m, &top, DEFAULT_DIVISOR_FLOOR).unwrap();
        assert!(rep.obstructed.is_empty());
        // primitive a ε¹ + b ε²; only D₂ = 2πi is nonzero so a = -c/D₂
        let (a, b) = (&prim.coeffs()[0], &prim.coeffs()[1]);
        assert!(b.is_empty());
        let expected = e(&[0, 1, 0]).scale(-Complex64::new(0.0, 2.0 * PI).inv());
        assert!(a.sub(&expected).unwrap().sup_norm_estimate() < 1e-15);
        assert!(d_f(&m, &prim).unwrap().sub(&top).unwrap().norm() < 1e-14);

        let (_, rep) =
            solve_top_primitive(&m, &leafwise_volume(&m), DEFAULT_DIVISOR_FLOOR).unwrap();
        assert_eq!(rep.obstructed.len(), 1);
        assert!(rep.obstructed[0].0.is_zero());
    }

    #[test]
    fn cohomological_equation_examples() {
        let a = golden();
        let w = [1.0, a];
        let (u, rep) =
            solve_cohomological_equation(&w, &e(&[0, 1]), DEFAULT_DIVISOR_FLOOR).unwrap();
        let expected = Complex64::new(0.0, 2.0 * PI * a).inv();
        assert!((u.coeff(&Mode::new(vec![0, 1])) - expected).norm() < 1e-15);
        assert!(rep.reliable());

        let (u, rep) =
            solve_cohomological_equation(&w, &TrigPoly::constant(2, 1.0), DEFAULT_DIVISOR_FLOOR)
                .unwrap();
        assert!(u.is_empty());
        assert_eq!(rep.obstructed.len(), 1);

        let (u, rep) =
            solve_cohomological_equation(&w, &e(&[5, -8]), DEFAULT_DIVISOR_FLOOR).unwrap();
        let div = rep.smallest_divisor.unwrap();
        assert!((div - 2.0 * PI * (5.0 - 8.0 * a).abs()).abs() < 1e-12);
        assert!((div - 0.350).abs() < 1e-3);
        assert!(u.sup_norm_estimate() < 3.0);
    }

    #[test]
    fn cohomological_equation_flags_tiny_divisors() {
        let w = [1.0, 0.5 + 2.5e-11];
        let f = e(&[-1, 2]).add(&e(&[1, 1])).unwrap();
        let (u, rep) = solve_cohomological_equation(&w, &f, DEFAULT_DIVISOR_FLOOR).unwrap();
        assert_eq!(rep.resonant.len(), 1);
        assert_eq!(rep.resonant[0].0, Mode::new(vec![-1, 2]));
        assert!(!rep.reliable());
        assert_eq!(u.len(), 1);
    }

    #[test]
    fn dimension_estimates() {
        for n in [1, 4, 8] {
            let est = estimate_h_top_dim(&t2(), n, DEFAULT_DIVISOR_FLOOR).unwrap();
            assert_eq!((est.dim, est.stable), (1, true));
        }
        for n in [4, 8] {
            let est = estimate_h_top_dim(&kron(), n, DEFAULT_DIVISOR_FLOOR).unwrap();
            assert_eq!((est.dim, est.stable), (1, true));
            assert!(est.reliable());
        }
        let est = estimate_h_top_dim(&fibration(), 4, DEFAULT_DIVISOR_FLOOR).unwrap();
        assert_eq!(est.dim, 9);
        assert_eq!(est.dim_half, 5);
        assert!(!est.stable);
        assert!(est.obstructed.iter().all(|k| k.0[0] == 0 && k.0[1] == 0));
        assert!(estimate_h_top_dim(&t2(), 0, DEFAULT_DIVISOR_FLOOR).is_err());
    }

    #[test]
    fn casimirs_match_top_count_on_constant_models() {
        assert_eq!(casimir_count(&t2(), 5), 1);
        assert_eq!(casimir_count(&fibration(), 3), 7);
        assert_eq!(casimir_count(&kron(), 4), 1);
    }
}
