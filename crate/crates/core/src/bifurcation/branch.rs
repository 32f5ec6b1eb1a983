//! Continuation of the periodic-orbit branch `λ ↦ x1(λ)` born at Δ(λ) = 1.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::delta;
use crate::error::{Error, Result};
use crate::fit::fit_power_law;
use crate::model::SwitchedSystem;
use crate::numeric::{integrate, poincare_numeric, return_residual, IntegratorConfig, StopCondition};
use crate::roots::{brent_with_values, BrentFailure, BrentOptions};

use super::expansion::ExpansionFit;

/// Largest accepted |π(x1) - x1| at a branch point.
pub const BRANCH_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub lambda: f64,
    pub x1_fixed: f64,
    pub period: f64,
    pub residual: f64,
    /// Further fixed points found above `x1_fixed` in the scan range.
    pub additional_orbits: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seeding {
    /// Each solve is seeded by the previous branch point (sequential).
    Previous,
    /// Every solve is seeded by the scaling law; λ values run in parallel.
    ScalingLaw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchOptions {
    pub x_min: f64,
    pub x_max: f64,
    /// Number of geometric scan points over `[x_min, x_max]`.
    pub scan_points: usize,
    pub seeding: Seeding,
}

impl Default for BranchOptions {
    fn default() -> Self {
        Self {
            x_min: 1e-6,
            x_max: 10.0,
            scan_points: 57,
            seeding: Seeding::Previous,
        }
    }
}

/// Scaling-law guess `((Δ(λ) - 1) / -δ)^(1/(k-1))` for the orbit amplitude.
pub fn scaling_seed(sys: &SwitchedSystem, lambda: f64, fit: &ExpansionFit) -> Option<f64> {
    let d = delta(&sys.params, lambda).ok()?;
    let base = (d - 1.0) / -fit.delta_coeff;
    if !(base > 0.0) || !(fit.k_exp > 1.0) {
        return None;
    }
    let x = base.powf(1.0 / (fit.k_exp - 1.0));
    x.is_finite().then_some(x)
}

/// Solves for the periodic orbit at each λ in turn.
///
/// Failures (typically [`Error::NoOrbit`]) are reported per λ; the remaining
/// parameter values are still processed.
pub fn continue_branch(
    sys: &SwitchedSystem,
    lambdas: &[f64],
    cfg: &IntegratorConfig,
    opts: &BranchOptions,
    law: Option<&ExpansionFit>,
) -> Vec<Result<BranchPoint>> {
    match opts.seeding {
        Seeding::Previous => {
            let mut prev: Option<f64> = None;
            lambdas
                .iter()
                .map(|&l| {
                    let seed = prev.or_else(|| law.and_then(|f| scaling_seed(sys, l, f)));
                    let out = solve_orbit(sys, l, seed, cfg, opts);
                    if let Ok(p) = &out {
                        prev = Some(p.x1_fixed);
                    }
                    out
                })
                .collect()
        }
        Seeding::ScalingLaw => lambdas
            .par_iter()
            .map(|&l| solve_orbit(sys, l, law.and_then(|f| scaling_seed(sys, l, f)), cfg, opts))
            .collect(),
    }
}

/// Fixed point of the return map at `lambda`: the smallest sign change of the
/// residual over a geometric scan, refined by Brent iteration.
pub fn solve_orbit(
    sys: &SwitchedSystem,
    lambda: f64,
    seed: Option<f64>,
    cfg: &IntegratorConfig,
    opts: &BranchOptions,
) -> Result<BranchPoint> {
    if !(opts.x_min > 0.0 && opts.x_max > opts.x_min && opts.scan_points >= 2) {
        return Err(Error::InvalidArgument("branch scan needs 0 < x_min < x_max and >= 2 points".into()));
    }
    sys.params.check_lambda(lambda)?;
    let n = opts.scan_points;
    let ratio = (opts.x_max / opts.x_min).powf(1.0 / (n - 1) as f64);
    let mut grid: Vec<f64> = (0..n).map(|i| opts.x_min * ratio.powi(i as i32)).collect();
    if let Some(s) = seed.filter(|s| *s > opts.x_min && *s < opts.x_max) {
        grid.extend([s / 1.25, s, s * 1.25].into_iter().filter(|x| *x > opts.x_min && *x < opts.x_max));
        grid.sort_by(f64::total_cmp);
        grid.dedup();
    }

    // Residuals until the first failed integration, which ends the usable range.
    let mut scan: Vec<(f64, f64)> = Vec::with_capacity(grid.len());
    for &x in &grid {
        match return_residual(sys, x, lambda, cfg) {
            Ok(r) => scan.push((x, r)),
            Err(e) if scan.is_empty() => return Err(e),
            Err(_) => break,
        }
    }
    let scanned_hi = scan.last().map_or(opts.x_min, |s| s.0);

    let brackets: Vec<((f64, f64), (f64, f64))> = scan
        .windows(2)
        .filter(|w| w[0].1 == 0.0 || w[0].1.signum() != w[1].1.signum())
        .map(|w| (w[0], w[1]))
        .collect();
    let Some(&first) = brackets.first() else {
        return Err(Error::NoOrbit {
            lambda,
            lo: opts.x_min,
            hi: scanned_hi,
        });
    };

    let x1_fixed = refine(sys, lambda, first, cfg)?;
    let sample = poincare_numeric(sys, x1_fixed, lambda, cfg)?;
    let residual = sample.residual().abs();
    if residual > BRANCH_RESIDUAL_TOL {
        return Err(Error::NoConvergence {
            what: format!("periodic orbit at lambda = {lambda}"),
            estimates: vec![x1_fixed, residual],
        });
    }
    let additional_orbits = brackets[1..]
        .iter()
        .filter_map(|&b| refine(sys, lambda, b, cfg).ok())
        .collect();
    Ok(BranchPoint {
        lambda,
        x1_fixed,
        period: sample.period,
        residual,
        additional_orbits,
    })
}

fn refine(sys: &SwitchedSystem, lambda: f64, bracket: ((f64, f64), (f64, f64)), cfg: &IntegratorConfig) -> Result<f64> {
    let opts = BrentOptions {
        xtol_abs: 0.0,
        xtol_rel: 1e-13,
        ftol: 0.0,
        max_iter: 100,
    };
    match brent_with_values(|x| return_residual(sys, x, lambda, cfg), bracket.0, bracket.1, opts) {
        Ok(r) => Ok(r.x),
        Err(BrentFailure::MaxIter { x, .. }) => Ok(x),
        Err(BrentFailure::Eval(e)) => Err(e),
        Err(BrentFailure::NoBracket { .. }) => Err(Error::NoOrbit {
            lambda,
            lo: bracket.0 .0,
            hi: bracket.1 .0,
        }),
    }
}

/// Re-integrates one period from `(x1_fixed, 0)` with the trajectory integrator.
/// Returns the return point and the number of switching events.
pub fn verify_orbit(sys: &SwitchedSystem, point: &BranchPoint, cfg: &IntegratorConfig) -> Result<(f64, usize)> {
    let tr = integrate(sys, [point.x1_fixed, 0.0], point.lambda, StopCondition::ReturnToSection, cfg)?;
    Ok((tr.final_state()[0], tr.events.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// Prefactor in λ ≈ γ x1^p.
    pub gamma_est: f64,
    /// Exponent p, an estimate of k - 1.
    pub exponent_est: f64,
    pub fit_residual: f64,
}

/// Least-squares fit of `λ = γ · x1^p` over branch points.
pub fn fit_scaling_law(branch: &[BranchPoint]) -> Result<ScalingFit> {
    if branch.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "scaling-law fit needs at least 4 branch points, got {}",
            branch.len()
        )));
    }
    let sign = branch[0].lambda.signum();
    if branch.iter().any(|p| p.lambda.signum() != sign || p.lambda == 0.0) {
        return Err(Error::InvalidArgument("branch points must lie on one side of lambda = 0".into()));
    }
    let xs: Vec<f64> = branch.iter().map(|p| p.x1_fixed).collect();
    let ls: Vec<f64> = branch.iter().map(|p| p.lambda.abs()).collect();
    let (gamma, exponent, rms) = fit_power_law(&xs, &ls)?;
    Ok(ScalingFit {
        gamma_est: sign * gamma,
        exponent_est: exponent,
        fit_residual: rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn point(lambda: f64, x1: f64) -> BranchPoint {
        BranchPoint {
            lambda,
            x1_fixed: x1,
            period: 1.0,
            residual: 0.0,
            additional_orbits: vec![],
        }
    }

    #[test]
    fn exact_square_root_branch() {
        let branch: Vec<BranchPoint> = [0.01, 0.02, 0.05, 0.1, 0.2].iter().map(|&l| point(l, l.sqrt())).collect();
        let fit = fit_scaling_law(&branch).unwrap();
        assert!((fit.exponent_est - 2.0).abs() < 1e-6);
        assert!((fit.gamma_est - 1.0).abs() < 1e-6);
    }

    #[test]
    fn three_points_are_not_enough() {
        let branch: Vec<BranchPoint> = [0.01, 0.02, 0.05].iter().map(|&l| point(l, l.sqrt())).collect();
        assert!(matches!(fit_scaling_law(&branch), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn negative_side_branch_keeps_sign() {
        let branch: Vec<BranchPoint> = [-0.01, -0.02, -0.05, -0.1].iter().map(|&l| point(l, (-l).sqrt())).collect();
        let fit = fit_scaling_law(&branch).unwrap();
        assert!((fit.gamma_est + 1.0).abs() < 1e-6);
    }
}
