//! Continued fractions and small-divisor tables for a slope `α`.
//!
//! Everything here is a statement about a double-precision number at a
//! stated depth: a float is always rational, so "Liouville-like" only means
//! that the expansion shows quotient blow-up before precision runs out.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::Mode;

pub const MAX_DEPTH: usize = 40;

/// Quotients above this mean the remaining fraction is rounding noise.
pub const QUOTIENT_CAP: f64 = 1e12;

/// Expansion stops once `q_n² · ε_mach` exceeds this; beyond that the
/// accumulated rounding in the remainder can change a quotient.
const PRECISION_BUDGET: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    /// The remainder vanished: α is rational to working precision.
    Rational,
    /// Further quotients would not be trustworthy.
    PrecisionExhausted,
    DepthReached,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuedFraction {
    pub quotients: Vec<u64>,
    /// Convergents `p_n / q_n`, one per quotient.
    pub convergents: Vec<(u64, u64)>,
    pub termination: Termination,
}

impl ContinuedFraction {
    pub fn denominators(&self) -> impl Iterator<Item = u64> + '_ {
        self.convergents.iter().map(|&(_, q)| q)
    }
}

pub fn continued_fraction(alpha: f64, depth: usize) -> Result<ContinuedFraction> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "slope must lie in (0,1), got {alpha}"
        )));
    }
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::InvalidConfig(format!(
            "depth must be in 1..={MAX_DEPTH}"
        )));
    }
    let mut quotients = Vec::new();
    let mut convergents = Vec::new();
    // (p_{n-1}, q_{n-1}) and (p_{n-2}, q_{n-2}) seeded with 1/0 and 0/1
    let (mut p1, mut q1, mut p2, mut q2) = (1u64, 0u64, 0u64, 1u64);
    let mut x = alpha;
    let mut termination = Termination::DepthReached;
    for _ in 0..depth {
        let a = x.floor();
        if a > QUOTIENT_CAP {
            termination = Termination::PrecisionExhausted;
            break;
        }
        let ai = a as u64;
        let frac = x - a;
        let (p, q) = (ai * p1 + p2, ai * q1 + q2);
        (p1, q1, p2, q2) = (p, q, p1, q1);
        quotients.push(ai);
        convergents.push((p, q));
        if frac <= 1e-12 * x.max(1.0) {
            termination = Termination::Rational;
            break;
        }
        if (q as f64).powi(2) * f64::EPSILON > PRECISION_BUDGET {
            termination = Termination::PrecisionExhausted;
            break;
        }
        x = 1.0 / frac;
    }
    Ok(ContinuedFraction {
        quotients,
        convergents,
        termination,
    })
}

/// `min |k₁ + α k₂|` over `0 < |k|∞ ≤ n`, with the lexicographically first minimizer.
pub fn min_divisor_with_mode(alpha: f64, n: i64) -> (f64, Mode) {
    let mut best = (f64::INFINITY, Mode::new(vec![0, 0]));
    for k1 in -n..=n {
        for k2 in -n..=n {
            if k1 == 0 && k2 == 0 {
                continue;
            }
            let d = (k1 as f64 + alpha * k2 as f64).abs();
            if d < best.0 {
                best = (d, Mode::new(vec![k1, k2]));
            }
        }
    }
    best
}

pub fn min_divisor(alpha: f64, n: i64) -> f64 {
    min_divisor_with_mode(alpha, n).0
}

/// `(N, min divisor)` for `N = 1..=n_max`; the scan is incremental over shells.
pub fn min_divisor_table(alpha: f64, n_max: i64) -> Vec<(i64, f64)> {
    let mut out = Vec::new();
    let mut best = f64::INFINITY;
    for n in 1..=n_max {
        for k1 in -n..=n {
            for k2 in -n..=n {
                if k1.abs() != n && k2.abs() != n {
                    continue;
                }
                best = best.min((k1 as f64 + alpha * k2 as f64).abs());
            }
        }
        out.push((n, best));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiophantineProfile {
    pub alpha: f64,
    pub expansion: ContinuedFraction,
    pub min_divisor_table: Vec<(i64, f64)>,
}

pub fn profile(alpha: f64, depth: usize, n_max: i64) -> Result<DiophantineProfile> {
    Ok(DiophantineProfile {
        alpha,
        expansion: continued_fraction(alpha, depth)?,
        min_divisor_table: min_divisor_table(alpha, n_max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    DiophantineLike,
    LiouvilleLike,
    Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub regime: Regime,
    /// `1 + slope` of the least-squares fit of `log q_{n+1}` on `log q_n`.
    pub exponent_estimate: Option<f64>,
    /// `max log q_{n+1} / log q_n` over the fitted pairs.
    pub max_growth_ratio: Option<f64>,
    pub insufficient_depth: bool,
    pub caveat: String,
}

/// Denominators below this are excluded from the growth fit.
const FIT_MIN_DENOMINATOR: u64 = 10;
const LIOUVILLE_RATIO: f64 = 1.75;
const LIOUVILLE_QUOTIENT: u64 = 1_000_000;

pub fn classify(profile: &DiophantineProfile) -> Classification {
    let cf = &profile.expansion;
    let depth = cf.quotients.len();
    let caveat = format!(
        "to double precision at depth {depth} ({:?}); no statement about the real number",
        cf.termination
    );
    if cf.termination == Termination::Rational {
        return Classification {
            regime: Regime::Rational,
            exponent_estimate: None,
            max_growth_ratio: None,
            insufficient_depth: false,
            caveat,
        };
    }
    let logs: Vec<f64> = cf
        .denominators()
        .filter(|&q| q >= FIT_MIN_DENOMINATOR)
        .map(|q| (q as f64).ln())
        .collect();
    let pairs: Vec<(f64, f64)> = logs.windows(2).map(|w| (w[0], w[1])).collect();
    let max_ratio = pairs
        .iter()
        .map(|(a, b)| b / a)
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
    let exponent = if pairs.len() >= 2 {
        let n = pairs.len() as f64;
        let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pairs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = pairs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        (sxx > 0.0).then(|| 1.0 + sxy / sxx)
    } else {
        None
    };
    let blowup = cf
        .quotients
        .iter()
        .skip(1)
        .any(|&a| a >= LIOUVILLE_QUOTIENT)
        || max_ratio.is_some_and(|r| r >= LIOUVILLE_RATIO);
    let insufficient_depth = pairs.len() < 3 && !blowup;
    Classification {
        regime: if blowup {
            Regime::LiouvilleLike
        } else {
            Regime::DiophantineLike
        },
        exponent_estimate: exponent,
        max_growth_ratio: max_ratio,
        insufficient_depth,
        caveat,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> f64 {
        (5f64.sqrt() - 1.0) / 2.0
    }

    /// Independent oracle: exact CF of p/q by Euclid.
    fn euclid(mut p: u64, mut q: u64) -> Vec<u64> {
        let mut out = Vec::new();
        while q != 0 {
            out.push(p / q);
            (p, q) = (q, p % q);
        }
        out
    }

    #[test]
    fn golden_quotients_are_ones() {
        let cf = continued_fraction(golden(), 40).unwrap();
        assert_eq!(cf.quotients[0], 0);
        assert!(cf.quotients.len() > 20);
        assert!(cf.quotients[1..].iter().all(|&a| a == 1));
        assert_eq!(cf.termination, Termination::PrecisionExhausted);
    }

    #[test]
    fn sqrt2_quotients_are_twos() {
        let cf = continued_fraction(2f64.sqrt() - 1.0, 40).unwrap();
        assert!(cf.quotients.len() > 10);
        assert!(cf.quotients[1..].iter().all(|&a| a == 2));
    }

    #[test]
    fn rationals_terminate() {
        let cf = continued_fraction(1.0 / 3.0, 40).unwrap();
        assert_eq!(cf.quotients, vec![0, 3]);
        assert_eq!(cf.termination, Termination::Rational);
        let cf = continued_fraction(5.0 / 13.0, 40).unwrap();
        assert_eq!(cf.quotients, euclid(5, 13));
        assert_eq!(cf.termination, Termination::Rational);
    }

    #[test]
    fn bad_inputs_are_rejected() {
        assert!(continued_fraction(1.5, 10).is_err());
        assert!(continued_fraction(0.3, 41).is_err());
        assert!(continued_fraction(f64::NAN, 10).is_err());
    }

    #[test]
    fn convergents_reconstruct_alpha() {
        for alpha in [golden(), 2f64.sqrt() - 1.0, std::f64::consts::PI - 3.0] {
            let cf = continued_fraction(alpha, 40).unwrap();
            let c = &cf.convergents;
            for w in c.windows(2) {
                let (p, q) = w[0];
                let bound = 1.0 / (q as f64 * w[1].1 as f64);
                assert!((alpha - p as f64 / q as f64).abs() <= bound * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn min_divisor_examples() {
        let a = golden();
        let (d, k) = min_divisor_with_mode(a, 8);
        assert!((d - (5.0 - 8.0 * a).abs()).abs() < 1e-15);
        assert!((d - 0.0557).abs() < 1e-4);
        assert_eq!(k, Mode::new(vec![-5, 8]));
        assert!((min_divisor(a, 1) - (1.0 - a)).abs() < 1e-15);
        assert!((min_divisor(a, 1) - 0.3820).abs() < 1e-4);
        let (d, k) = min_divisor_with_mode(0.5, 4);
        assert_eq!(d, 0.0);
        assert_eq!(k, Mode::new(vec![-2, 4]));
        assert_eq!(min_divisor(0.5, 2), 0.0);
    }

    #[test]
    fn table_matches_brute_force() {
        let a = 2f64.sqrt() - 1.0;
        let table = min_divisor_table(a, 20);
        for (n, d) in table {
            assert_eq!(d, min_divisor(a, n));
        }
    }

    #[test]
    fn classification_examples() {
        let g = classify(&profile(golden(), 40, 8).unwrap());
        assert_eq!(g.regime, Regime::DiophantineLike);
        assert!((g.exponent_estimate.unwrap() - 2.0).abs() < 0.05);
        assert!(!g.insufficient_depth);

        let liouville: f64 = (1..=3)
            .map(|n: i32| 10f64.powi(-(1..=n).product::<i32>()))
            .sum();
        let l = classify(&profile(liouville, 40, 8).unwrap());
        assert_eq!(l.regime, Regime::LiouvilleLike);

        let r = classify(&profile(1.0 / 3.0, 40, 8).unwrap());
        assert_eq!(r.regime, Regime::Rational);

        let big = classify(&profile(0.5 + 2.5e-11, 40, 8).unwrap());
        assert_eq!(big.regime, Regime::LiouvilleLike);
    }

    #[test]
    fn shallow_profiles_are_flagged() {
        let c = classify(&profile(golden(), 4, 4).unwrap());
        assert!(c.insufficient_depth);
    }
}
