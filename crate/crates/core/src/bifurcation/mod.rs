//! Critical parameter detection, local expansion, branch continuation and
//! global-condition sampling.

mod branch;
mod critical;
mod expansion;
mod global;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use branch::{
    continue_branch, fit_scaling_law, scaling_seed, solve_orbit, verify_orbit, BranchOptions, BranchPoint, ScalingFit,
    Seeding, BRANCH_RESIDUAL_TOL,
};
pub use critical::{find_critical_lambda, CriticalPoint, CRITICAL_DELTA_TOL, DEGENERATE_SLOPE};
pub use expansion::{fit_joint, fit_local_expansion, fit_with_known_delta, ExpansionFit, ExpansionOptions};
pub use global::{
    check_global_conditions, lyapunov_samples, rotation_samples, CheckStatus, ConditionResult, GlobalCheckReport,
    Witness, DEFAULT_GLOBAL_SAMPLES, DEFAULT_RADIUS_M, DELTA_ONE_TOL,
};

use crate::analytic::{delta, delta_prime};
use crate::error::{Error, Result};
use crate::model::SwitchedSystem;
use crate::numeric::IntegratorConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    BranchForPositiveLambda,
    BranchForNegativeLambda,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::BranchForPositiveLambda => "BranchForPositiveLambda",
            Direction::BranchForNegativeLambda => "BranchForNegativeLambda",
        })
    }
}

impl Direction {
    /// Sign of λ on which the orbits exist.
    pub fn sign(self) -> f64 {
        match self {
            Direction::BranchForPositiveLambda => 1.0,
            Direction::BranchForNegativeLambda => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionReport {
    pub direction: Direction,
    pub delta_prime: f64,
    pub expansion: ExpansionFit,
    /// Predicted γ in λ ≈ γ x1^(k-1), i.e. -δ / Δ'(0).
    pub gamma_predicted: f64,
}

/// Side of λ = 0 on which periodic orbits bifurcate, for a system centered
/// at its critical parameter (Δ(0) = 1).
pub fn bifurcation_direction(sys: &SwitchedSystem, cfg: &IntegratorConfig) -> Result<Direction> {
    Ok(analyze_direction(sys, cfg, &ExpansionOptions::default())?.direction)
}

pub fn analyze_direction(
    sys: &SwitchedSystem,
    cfg: &IntegratorConfig,
    opts: &ExpansionOptions,
) -> Result<DirectionReport> {
    analyze_direction_at(sys, 0.0, cfg, opts)
}

/// Direction analysis at a critical parameter `lambda_star` other than 0.
/// The verdict then refers to the sign of `λ - lambda_star`.
pub fn analyze_direction_at(
    sys: &SwitchedSystem,
    lambda_star: f64,
    cfg: &IntegratorConfig,
    opts: &ExpansionOptions,
) -> Result<DirectionReport> {
    let d0 = delta(&sys.params, lambda_star)?;
    if (d0 - 1.0).abs() > CRITICAL_DELTA_TOL {
        return Err(Error::InvalidArgument(format!(
            "lambda = {lambda_star} is not a critical parameter: Δ = {d0}"
        )));
    }
    let dp = delta_prime(&sys.params, lambda_star)?;
    if dp.abs() < DEGENERATE_SLOPE {
        return Err(Error::Degenerate {
            lambda: lambda_star,
            derivative: dp,
        });
    }
    let expansion = fit_local_expansion(sys, lambda_star, cfg, opts)?;
    let direction = if expansion.delta_coeff * dp < 0.0 {
        Direction::BranchForPositiveLambda
    } else {
        Direction::BranchForNegativeLambda
    };
    Ok(DirectionReport {
        direction,
        delta_prime: dp,
        gamma_predicted: -expansion.delta_coeff / dp,
        expansion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemParams;

    #[test]
    fn benchmark_branches_for_positive_lambda() {
        let sys = SwitchedSystem::paper_example();
        let cfg = IntegratorConfig::default();
        let rep = analyze_direction(&sys, &cfg, &ExpansionOptions::default()).unwrap();
        assert_eq!(rep.direction, Direction::BranchForPositiveLambda);
        assert!(rep.expansion.delta_coeff < 0.0);
        assert!(rep.expansion.k_exp > 1.0);
    }

    #[test]
    fn flipped_slope_branches_for_negative_lambda() {
        let mut sys = SwitchedSystem::paper_example();
        sys.params.b.coeffs[1] = -1.0;
        let cfg = IntegratorConfig::default();
        assert_eq!(bifurcation_direction(&sys, &cfg).unwrap(), Direction::BranchForNegativeLambda);
    }

    #[test]
    fn linear_system_is_unresolvable() {
        let sys = SwitchedSystem::paper_example().linearized();
        let r = bifurcation_direction(&sys, &IntegratorConfig::default());
        assert!(matches!(r, Err(Error::PerturbationTooSmall { .. })), "{r:?}");
    }

    #[test]
    fn off_critical_system_is_rejected() {
        let sys = SwitchedSystem::linear(SystemParams::constant(0.1, 6.0, 1.0));
        assert!(matches!(
            bifurcation_direction(&sys, &IntegratorConfig::default()),
            Err(Error::InvalidArgument(_))
        ));
    }
}
