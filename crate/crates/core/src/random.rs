//! Seeded generators for test inputs. Every report records the seed.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fourier::{modes_in_box, Mode, TrigPoly};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Shape of a random real trigonometric polynomial.
#[derive(Debug, Clone, Copy)]
pub struct PolySpec {
    pub dim: usize,
    pub degree: i64,
    /// Coefficient of mode `k` is drawn with modulus at most `amplitude / (1+|k|²)^decay`.
    pub amplitude: f64,
    pub decay: f64,
    pub zero_mean: bool,
}

impl PolySpec {
    pub fn new(dim: usize, degree: i64) -> Self {
        PolySpec {
            dim,
            degree,
            amplitude: 1.0,
            decay: 1.0,
            zero_mean: false,
        }
    }
}

fn complex_in_disc<R: Rng>(rng: &mut R, radius: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * (radius / 2f64.sqrt())
}

/// Hermitian random polynomial: one draw per `{k, -k}` pair.
pub fn real_trig_poly<R: Rng>(rng: &mut R, spec: PolySpec) -> TrigPoly {
    let mut terms = Vec::new();
    for k in modes_in_box(spec.dim, spec.degree) {
        let neg = k.neg();
        if k.is_zero() {
            if !spec.zero_mean {
                terms.push((
                    k,
                    Complex64::new(spec.amplitude * rng.gen_range(-1.0..1.0), 0.0),
                ));
            }
            continue;
        }
        if k < neg {
            continue;
        }
        let k2: i64 = k.as_slice().iter().map(|x| x * x).sum();
        let c = complex_in_disc(rng, spec.amplitude / (1.0 + k2 as f64).powf(spec.decay));
        terms.push((neg, c.conj()));
        terms.push((k, c));
    }
    TrigPoly::from_terms(spec.dim, terms).expect("modes share the spec dimension")
}

/// A random real coefficient on mode set `modes` (assumed closed under negation).
pub fn real_on_modes<R: Rng>(rng: &mut R, dim: usize, modes: &[Mode], amplitude: f64) -> TrigPoly {
    let mut terms = Vec::new();
    for k in modes {
        let neg = k.neg();
        if k.is_zero() {
            terms.push((
                k.clone(),
                Complex64::new(amplitude * rng.gen_range(-1.0..1.0), 0.0),
            ));
        } else if *k > neg {
            let c = complex_in_disc(rng, amplitude);
            terms.push((neg, c.conj()));
            terms.push((k.clone(), c));
        }
    }
    TrigPoly::from_terms(dim, terms).expect("modes share the requested dimension")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_poly() {
        let spec = PolySpec::new(3, 2);
        let a = real_trig_poly(&mut rng(7), spec);
        let b = real_trig_poly(&mut rng(7), spec);
        let c = real_trig_poly(&mut rng(8), spec);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn generated_polys_are_real_and_bounded() {
        let spec = PolySpec {
            zero_mean: true,
            ..PolySpec::new(2, 4)
        };
        let f = real_trig_poly(&mut rng(1), spec);
        assert!(f.is_real(0.0));
        assert_eq!(f.mean(), Complex64::new(0.0, 0.0));
        assert!(f.degree() <= 4);
        let x = [0.31, 0.77];
        assert!(f.eval(&x).im.abs() < 1e-14);
    }
}
