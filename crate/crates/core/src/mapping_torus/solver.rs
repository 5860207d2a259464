//! Top-degree leafwise primitives on `T³_A`.
//!
//! A leafwise 1-form on the cover is `γ = ã v* + b dt` and a top form is
//! `f v*∧dt`, so `d_F γ = (V b - ∂_t ã) v*∧dt`. Non-zero modes are inverted
//! through `V`; the divisor `2π k·v` is never zero because `v` has
//! irrational slope, and it rescales by `λ⁻¹` along each orbit. The zero
//! mode is integrated in `t` and its constant fixed by the seam.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{cumulative_integral, random_equivariant, EquivariantFunction};
use crate::error::{Error, Result};
use crate::models::MappingTorusModel;
use crate::random::rng;

/// `γ = ã v* + b dt` with `ã` of weight −1 and `b` of weight 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtPrimitive {
    pub v_coeff: EquivariantFunction,
    pub t_coeff: EquivariantFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtSolveReport {
    /// `ã₀(0) = -(∫₀¹ f₀)/(λ-1)`.
    pub seam_constant: Complex64,
    pub zero_mode_integral: Complex64,
    pub smallest_divisor: Option<f64>,
    pub divisor_floor: f64,
    pub modes_solved: usize,
    /// Diagnostic only; the solver does not require equivariant input.
    pub input_seam_mismatch: f64,
    pub output_seam_mismatch: f64,
    pub residual: f64,
    pub tol: f64,
    pub within_tolerance: bool,
}

/// `d_F g = (V g) v* + (∂_t g) dt` on functions.
pub fn mt_d_f_function(model: &MappingTorusModel, g: &EquivariantFunction) -> MtPrimitive {
    MtPrimitive {
        v_coeff: g.leaf_derivative(model.v()),
        t_coeff: g.t_derivative(),
    }
}

/// `d_F γ = V b - ∂_t ã`, with `∂_t` by finite differences.
pub fn mt_d_f(model: &MappingTorusModel, gamma: &MtPrimitive) -> Result<EquivariantFunction> {
    gamma
        .t_coeff
        .leaf_derivative(model.v())
        .sub(&gamma.v_coeff.t_derivative())
}

pub fn solve_mt_top_primitive(
    model: &MappingTorusModel,
    f: &EquivariantFunction,
    divisor_floor: f64,
    tol: f64,
) -> Result<(MtPrimitive, f64, MtSolveReport)> {
    if f.weight() != -1 {
        return Err(Error::InvalidConfig(format!(
            "top-form coefficient must carry weight -1, got {}",
            f.weight()
        )));
    }
    let (n, g) = (f.truncation(), f.grid());
    let mut v_coeff = EquivariantFunction::zero(n, g, -1)?;
    let mut t_coeff = EquivariantFunction::zero(n, g, 0)?;
    let lambda = model.lambda();
    let v = model.v();
    let zero = Complex64::new(0.0, 0.0);
    let (mut seam_constant, mut integral) = (zero, zero);
    let mut smallest: Option<f64> = None;
    let mut solved = 0;
    for (k, c) in f.curves() {
        solved += 1;
        if k.is_zero() {
            let running = cumulative_integral(c, f.step());
            integral = running[g];
            seam_constant = -integral / (lambda - 1.0);
            v_coeff.set(
                k.clone(),
                running.iter().map(|i| seam_constant - i).collect(),
            )?;
            continue;
        }
        let divisor = 2.0 * PI * k.dot(&v);
        smallest = Some(smallest.map_or(divisor.abs(), |s| s.min(divisor.abs())));
        if divisor.abs() < divisor_floor {
            return Err(Error::SolverFailure(format!(
                "divisor 2π k·v = {divisor:e} at k = {k} is below the floor {divisor_floor:e}"
            )));
        }
        let inv = Complex64::new(0.0, divisor).inv();
        t_coeff.set(k.clone(), c.iter().map(|z| z * inv).collect())?;
    }
    let gamma = MtPrimitive { v_coeff, t_coeff };
    let residual = mt_d_f(model, &gamma)?.sub(f)?.sup_norm();
    if !residual.is_finite() {
        return Err(Error::SolverFailure("non-finite residual".into()));
    }
    let report = MtSolveReport {
        seam_constant,
        zero_mode_integral: integral,
        smallest_divisor: smallest,
        divisor_floor,
        modes_solved: solved,
        input_seam_mismatch: f.seam_mismatch(model),
        output_seam_mismatch: gamma
            .v_coeff
            .seam_mismatch(model)
            .max(gamma.t_coeff.seam_mismatch(model)),
        residual,
        tol,
        within_tolerance: residual <= tol,
    };
    Ok((gamma, residual, report))
}

/// Settings for the mapping-torus certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MtSettings {
    pub grid: usize,
    pub trials: usize,
    pub tol: f64,
    pub seam_tol: f64,
    pub seed: u64,
}

impl Default for MtSettings {
    fn default() -> Self {
        MtSettings {
            grid: 64,
            trials: 20,
            tol: 1e-8,
            seam_tol: super::SEAM_TOLERANCE,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MtTrial {
    pub label: String,
    pub residual: f64,
    pub input_seam_mismatch: f64,
    pub output_seam_mismatch: f64,
    pub passed: bool,
}

/// Evidence that every sampled top form is exact at truncation `(N, G)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct H2Certificate {
    pub truncation: i64,
    pub grid: usize,
    pub tol: f64,
    pub seam_tolerance: f64,
    pub divisor_floor: f64,
    pub seed: u64,
    pub trials: Vec<MtTrial>,
    /// `ã₀(0)` for the cover coefficient `f ≡ 1`: `-1/(λ-1)`.
    pub unit_seam_constant: f64,
    /// `ã₀(0)` for the leafwise volume itself: `-1/log λ`.
    pub volume_seam_constant: f64,
    pub max_residual: f64,
    pub smallest_divisor: Option<f64>,
    pub passed: bool,
    pub note: String,
}

pub fn h2_vanishing_certificate(
    model: &MappingTorusModel,
    n: i64,
    settings: &MtSettings,
    divisor_floor: f64,
) -> Result<H2Certificate> {
    let MtSettings {
        grid,
        trials,
        tol,
        seam_tol,
        seed,
    } = *settings;
    let lambda = model.lambda();
    let mut records = Vec::new();
    let mut smallest: Option<f64> = None;
    let mut run = |label: String, f: &EquivariantFunction| -> Result<MtSolveReport> {
        let (_, residual, report) = solve_mt_top_primitive(model, f, divisor_floor, tol)?;
        if let Some(d) = report.smallest_divisor {
            smallest = Some(smallest.map_or(d, |s: f64| s.min(d)));
        }
        records.push(MtTrial {
            label,
            residual,
            input_seam_mismatch: report.input_seam_mismatch,
            output_seam_mismatch: report.output_seam_mismatch,
            passed: residual <= tol && report.output_seam_mismatch <= seam_tol,
        });
        Ok(report)
    };

    let unit = EquivariantFunction::from_profile(n, grid, -1, |_| Complex64::new(1.0, 0.0))?;
    let unit_seam = run("unit cover coefficient".into(), &unit)?
        .seam_constant
        .re;
    // the leafwise volume λ^t v*∧dt, image of the constant function 1
    let volume =
        EquivariantFunction::from_profile(n, grid, -1, |t| Complex64::new(lambda.powf(t), 0.0))?;
    let volume_seam = run("leafwise volume".into(), &volume)?.seam_constant.re;
    let mut r = rng(seed);
    for i in 0..trials {
        let f = random_equivariant(model, n, grid, -1, &mut r)?;
        run(format!("random #{i}"), &f)?;
    }
    let max_residual = records.iter().map(|t| t.residual).fold(0.0, f64::max);
    let passed = records.iter().all(|t| t.passed);
    Ok(H2Certificate {
        truncation: n,
        grid,
        tol,
        seam_tolerance: seam_tol,
        divisor_floor,
        seed,
        trials: records,
        unit_seam_constant: unit_seam,
        volume_seam_constant: volume_seam,
        max_residual,
        smallest_divisor: smallest,
        passed,
        note: format!(
            "every sampled top form is exact at |k| ≤ {n}, G = {grid}, residual ≤ {tol:e}; \
             a truncation statement, not a proof in the smooth category"
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fourier::Mode;
    use crate::leafwise::DEFAULT_DIVISOR_FLOOR;
    use crate::mapping_torus::SEAM_TOLERANCE;

    fn cat() -> MappingTorusModel {
        MappingTorusModel::cat_map()
    }

    #[test]
    fn unit_input_seam_constant() {
        let m = cat();
        let f = EquivariantFunction::from_profile(8, 64, -1, |_| Complex64::new(1.0, 0.0)).unwrap();
        let (gamma, residual, report) =
            solve_mt_top_primitive(&m, &f, DEFAULT_DIVISOR_FLOOR, 1e-8).unwrap();
        let want = -(5f64.sqrt() - 1.0) / 2.0;
        assert!((report.seam_constant.re - want).abs() < 1e-12);
        assert!((report.seam_constant.re + 1.0 / (m.lambda() - 1.0)).abs() < 1e-12);
        assert!(residual < 1e-10);
        // ã(1) = λ ã(0)
        let c = gamma.v_coeff.curve(&Mode::zero(2)).unwrap();
        assert!((c[64] - m.lambda() * c[0]).norm() < 1e-12);
    }

    #[test]
    fn seam_constant_tracks_lambda() {
        for tr in [3, 4, 5, 7] {
            let m = MappingTorusModel::new([[tr - 1, 1], [tr - 2, 1]]).unwrap();
            let prof = |t: f64| 1.0 + 0.3 * t * t;
            let f = EquivariantFunction::from_profile(1, 64, -1, |t| Complex64::new(prof(t), 0.0))
                .unwrap();
            let (_, _, rep) = solve_mt_top_primitive(&m, &f, DEFAULT_DIVISOR_FLOOR, 1e-8).unwrap();
            let integral = 1.0 + 0.1;
            assert!((rep.seam_constant.re + integral / (m.lambda() - 1.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn d_f_squared_vanishes_exactly() {
        let m = cat();
        let g = random_equivariant(&m, 6, 64, 0, &mut rng(3)).unwrap();
        let dd = mt_d_f(&m, &mt_d_f_function(&m, &g)).unwrap();
        // V and ∂_t commute up to rounding, which differencing amplifies by 1/h
        let scale = g.leaf_derivative(m.v()).sup_norm() / g.step();
        assert!(
            dd.sup_norm() <= 1e-14 * scale,
            "{:e} vs {scale:e}",
            dd.sup_norm()
        );
    }

    #[test]
    fn zero_input_gives_zero() {
        let f = EquivariantFunction::zero(4, 32, -1).unwrap();
        let (gamma, residual, _) =
            solve_mt_top_primitive(&cat(), &f, DEFAULT_DIVISOR_FLOOR, 1e-8).unwrap();
        assert!(gamma.v_coeff.is_zero() && gamma.t_coeff.is_zero());
        assert_eq!(residual, 0.0);
    }

    #[test]
    fn wrong_weight_is_rejected() {
        let f = EquivariantFunction::zero(4, 32, 0).unwrap();
        assert!(solve_mt_top_primitive(&cat(), &f, DEFAULT_DIVISOR_FLOOR, 1e-8).is_err());
    }

    #[test]
    fn floor_above_divisors_fails_loudly() {
        let m = cat();
        let f = random_equivariant(&m, 4, 32, -1, &mut rng(1)).unwrap();
        let err = solve_mt_top_primitive(&m, &f, 10.0, 1e-8).unwrap_err();
        assert!(matches!(err, Error::SolverFailure(_)));
    }

    #[test]
    fn random_inputs_are_solved() {
        let m = cat();
        let mut r = rng(42);
        for _ in 0..5 {
            let f = random_equivariant(&m, 8, 64, -1, &mut r).unwrap();
            let (gamma, residual, rep) =
                solve_mt_top_primitive(&m, &f, DEFAULT_DIVISOR_FLOOR, 1e-8).unwrap();
            assert!(residual <= 1e-8, "residual {residual:e}");
            assert!(
                rep.output_seam_mismatch <= SEAM_TOLERANCE,
                "{:e}",
                rep.output_seam_mismatch
            );
            assert!(gamma.t_coeff.realness_defect() < 1e-12);
        }
    }

    #[test]
    fn certificate_passes() {
        let m = cat();
        let cert =
            h2_vanishing_certificate(&m, 8, &MtSettings::default(), DEFAULT_DIVISOR_FLOOR).unwrap();
        assert!(cert.passed, "{cert:#?}");
        assert_eq!(cert.trials.len(), 22);
        assert!((cert.volume_seam_constant + 1.0 / m.log_lambda()).abs() < 1e-9);
        let smoke = h2_vanishing_certificate(
            &m,
            2,
            &MtSettings {
                trials: 3,
                seed: 1,
                ..Default::default()
            },
            DEFAULT_DIVISOR_FLOOR,
        )
        .unwrap();
        assert!(smoke.passed, "{smoke:#?}");
    }
}
