use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::EquivariantFunction;
use crate::error::Result;
use crate::fourier::{modes_in_box, Mode};
use crate::models::MappingTorusModel;

/// Maximum number of transport steps in either direction.
pub const ORBIT_STEP_BUDGET: usize = 64;

/// Width of the `t`-profiles seeded along each orbit.
const PROFILE_WIDTH: f64 = 1.5;

/// One `Aᵀ`-orbit: `backward[i] = (Aᵀ)^{-(i+1)} base`, `forward[i] = (Aᵀ)^{i+1} base`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeOrbit {
    pub base: Mode,
    pub backward: Vec<Mode>,
    pub forward: Vec<Mode>,
    pub fixed: bool,
}

impl LatticeOrbit {
    /// `(j, (Aᵀ)^j base)` in increasing `j`.
    pub fn members(&self) -> Vec<(i64, Mode)> {
        let mut out: Vec<(i64, Mode)> = self
            .backward
            .iter()
            .enumerate()
            .rev()
            .map(|(i, k)| (-(i as i64) - 1, k.clone()))
            .collect();
        out.push((0, self.base.clone()));
        out.extend(
            self.forward
                .iter()
                .enumerate()
                .map(|(i, k)| (i as i64 + 1, k.clone())),
        );
        out
    }

    pub fn len(&self) -> usize {
        1 + self.backward.len() + self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

fn to_mode(k: [i64; 2]) -> Mode {
    Mode::new(k.to_vec())
}

fn walk(k: &Mode, extent: i64, step: impl Fn([i64; 2]) -> [i64; 2]) -> Vec<Mode> {
    let mut out = Vec::new();
    let mut cur = [k.0[0], k.0[1]];
    for _ in 0..ORBIT_STEP_BUDGET {
        cur = step(cur);
        if cur[0].abs() > extent || cur[1].abs() > extent {
            break;
        }
        out.push(to_mode(cur));
    }
    out
}

/// Orbits through every mode of `|k| ≤ n`, segments clipped to the same box.
pub fn orbit_decomposition(model: &MappingTorusModel, n: i64) -> Vec<LatticeOrbit> {
    orbit_decomposition_extended(model, n, n)
}

/// Orbits through every mode of `|k| ≤ n`, segments extended to `|k| ≤ n_ext`.
///
/// The sup norm along an orbit is quasi-convex in the step index, so each
/// orbit meets the box in one contiguous segment and the lexicographically
/// smallest member seen first is its base.
pub fn orbit_decomposition_extended(
    model: &MappingTorusModel,
    n: i64,
    n_ext: i64,
) -> Vec<LatticeOrbit> {
    let n_ext = n_ext.max(n);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for k in modes_in_box(2, n) {
        if seen.contains(&k) {
            continue;
        }
        if k.is_zero() {
            seen.insert(k.clone());
            out.push(LatticeOrbit {
                base: k,
                backward: vec![],
                forward: vec![],
                fixed: true,
            });
            continue;
        }
        let forward = walk(&k, n_ext, |m| model.transpose_action(m));
        let backward = walk(&k, n_ext, |m| model.transpose_inverse_action(m));
        seen.insert(k.clone());
        seen.extend(
            forward
                .iter()
                .chain(&backward)
                .filter(|m| m.sup_norm() <= n)
                .cloned(),
        );
        out.push(LatticeOrbit {
            base: k,
            backward,
            forward,
            fixed: false,
        });
    }
    out
}

/// Random real function of weight `w`, smooth in `t` and equivariant.
///
/// Each orbit pair `{O, -O}` gets one profile `Γ(s) = z exp(-(s-s₀)²/2σ²)`,
/// transported as `c_{(Aᵀ)^j k₀}(t) = λ^{jw} Γ(t+j)`; the fixed mode gets
/// `λ^{-wt}(a + ε cos 2πt + δ sin 2πt)`.
pub fn random_equivariant<R: Rng>(
    model: &MappingTorusModel,
    n: i64,
    grid: usize,
    weight: i32,
    rng: &mut R,
) -> Result<EquivariantFunction> {
    let lambda = model.lambda();
    let mut out = EquivariantFunction::zero(n, grid, weight)?;
    let mut seeded = BTreeSet::new();
    let times: Vec<f64> = out.times().collect();
    for orbit in orbit_decomposition(model, n) {
        if orbit.fixed {
            let a: f64 = rng.gen_range(-1.0..1.0);
            let (eps, delta): (f64, f64) = (rng.gen_range(-1e-4..1e-4), rng.gen_range(-1e-4..1e-4));
            let w = f64::from(weight);
            let samples = times
                .iter()
                .map(|&t| {
                    let p = a
                        + eps * (2.0 * std::f64::consts::PI * t).cos()
                        + delta * (2.0 * std::f64::consts::PI * t).sin();
                    Complex64::new(lambda.powf(-w * t) * p, 0.0)
                })
                .collect();
            out.set(orbit.base.clone(), samples)?;
            continue;
        }
        if seeded.contains(&orbit.base) {
            continue;
        }
        let members = orbit.members();
        let (lo, hi) = (members[0].0 as f64, members[members.len() - 1].0 as f64);
        let center = rng.gen_range(lo..=hi);
        let b = &orbit.base;
        let radius = 1.0 / (1.0 + (b.0[0] * b.0[0] + b.0[1] * b.0[1]) as f64);
        let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * radius;
        for (j, k) in members {
            let scale = lambda.powi(weight * j as i32);
            let curve: Vec<Complex64> = times
                .iter()
                .map(|&t| {
                    let s = t + j as f64 - center;
                    z * scale * (-s * s / (2.0 * PROFILE_WIDTH * PROFILE_WIDTH)).exp()
                })
                .collect();
            seeded.insert(k.neg());
            out.set(k.neg(), curve.iter().map(|c| c.conj()).collect())?;
            out.set(k, curve)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::rng;

    #[test]
    fn zero_is_a_singleton_fixed_orbit() {
        let orbits = orbit_decomposition(&MappingTorusModel::cat_map(), 3);
        let fixed: Vec<_> = orbits.iter().filter(|o| o.fixed).collect();
        assert_eq!(fixed.len(), 1);
        assert!(fixed[0].base.is_zero());
        assert_eq!(fixed[0].len(), 1);
    }

    #[test]
    fn cat_map_orbit_of_e1() {
        let m = MappingTorusModel::cat_map();
        let orbits = orbit_decomposition_extended(&m, 8, 100);
        let o = orbits
            .iter()
            .find(|o| o.members().iter().any(|(_, k)| *k == Mode::new(vec![1, 0])))
            .unwrap();
        let ks: Vec<Mode> = o.members().into_iter().map(|(_, k)| k).collect();
        let i = ks.iter().position(|k| *k == Mode::new(vec![1, 0])).unwrap();
        assert_eq!(ks[i + 1], Mode::new(vec![2, 1]));
        assert_eq!(ks[i + 2], Mode::new(vec![5, 3]));
        assert_eq!(ks[i + 3], Mode::new(vec![13, 8]));
    }

    #[test]
    fn every_box_mode_lies_on_exactly_one_orbit() {
        let m = MappingTorusModel::new([[3, 1], [2, 1]]).unwrap();
        let n = 6;
        let orbits = orbit_decomposition(&m, n);
        let mut count = std::collections::BTreeMap::new();
        for o in &orbits {
            for (_, k) in o.members() {
                *count.entry(k).or_insert(0) += 1;
            }
        }
        for k in modes_in_box(2, n) {
            assert_eq!(count.get(&k), Some(&1), "mode {k}");
        }
        // consecutive members are related by the transpose action
        for o in &orbits {
            let ms = o.members();
            for w in ms.windows(2) {
                let a = model_step(&m, &w[0].1);
                assert_eq!(a, w[1].1);
            }
        }
    }

    fn model_step(m: &MappingTorusModel, k: &Mode) -> Mode {
        to_mode(m.transpose_action([k.0[0], k.0[1]]))
    }

    #[test]
    fn segment_growth_rate_is_lambda() {
        let m = MappingTorusModel::cat_map();
        let mut k = [1i64, 0];
        let mut norms = vec![];
        for _ in 0..10 {
            k = m.transpose_action(k);
            norms.push(((k[0] * k[0] + k[1] * k[1]) as f64).sqrt());
        }
        let ratio = norms[9] / norms[8];
        assert!((ratio - m.lambda()).abs() < 1e-6);
        // divisors along the orbit shrink by λ⁻¹
        let v = m.v();
        let d = |k: [i64; 2]| (k[0] as f64 * v[0] + k[1] as f64 * v[1]).abs();
        let k1 = [1, 0];
        let k2 = m.transpose_action(k1);
        assert!((d(k2) / d(k1) - 1.0 / m.lambda()).abs() < 1e-12);
    }

    #[test]
    fn random_functions_are_real_and_equivariant() {
        let m = MappingTorusModel::cat_map();
        for w in [-1, 0, 1] {
            let f = random_equivariant(&m, 8, 64, w, &mut rng(5)).unwrap();
            assert!(
                f.seam_mismatch(&m) < 1e-12,
                "weight {w}: {}",
                f.seam_mismatch(&m)
            );
            assert!(f.realness_defect() == 0.0);
            assert!(f.curves().count() > 100);
        }
    }
}
