use crate::error::{Error, Result};
use crate::model::{Quadrant, SwitchedSystem};

use super::{integrate, IntegratorConfig, PoincareSample, StopCondition};

/// One revolution of the return map from `(x1, 0)`, x1 > 0.
pub fn poincare_numeric(sys: &SwitchedSystem, x1: f64, lambda: f64, cfg: &IntegratorConfig) -> Result<PoincareSample> {
    if !(x1 > 0.0 && x1.is_finite()) {
        return Err(Error::InvalidArgument(format!("return map needs x1 > 0, got {x1}")));
    }
    let tr = integrate(sys, [x1, 0.0], lambda, StopCondition::ReturnToSection, cfg)?;
    let order: Vec<Quadrant> = tr.arcs.iter().map(|a| a.quadrant).collect();
    let expected = [Quadrant::Q4, Quadrant::Q3, Quadrant::Q2, Quadrant::Q1, Quadrant::Q4];
    if tr.events.len() != 4 || order != expected {
        return Err(Error::NoConvergence {
            what: format!("return to the positive x1 axis took {} switches", tr.events.len()),
            estimates: vec![],
        });
    }
    Ok(PoincareSample {
        x1_in: x1,
        x1_out: tr.final_state()[0],
        period: tr.t_final,
    })
}

/// Signed displacement π(x1, λ) - x1 of the return map.
pub fn return_residual(sys: &SwitchedSystem, x1: f64, lambda: f64, cfg: &IntegratorConfig) -> Result<f64> {
    Ok(poincare_numeric(sys, x1, lambda, cfg)?.residual())
}

#[derive(Debug, Clone, Copy)]
pub struct SlopeLimitOptions {
    pub h0: f64,
    /// Relative agreement required between successive estimates.
    pub rel_tol: f64,
    /// Number of consecutive estimates that must agree.
    pub agreeing: usize,
    pub max_halvings: usize,
}

impl Default for SlopeLimitOptions {
    fn default() -> Self {
        Self {
            h0: 1e-2,
            rel_tol: 1e-8,
            agreeing: 3,
            max_halvings: 40,
        }
    }
}

/// Estimates `lim_{h→0+} map(h) / h` along `h_j = h0 · 2^-j`.
///
/// Returns the last slope once `agreeing` successive slopes match to `rel_tol`.
pub fn slope_limit<F>(mut map: F, opts: SlopeLimitOptions) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut slopes: Vec<f64> = Vec::new();
    let mut h = opts.h0;
    for _ in 0..=opts.max_halvings {
        slopes.push(map(h)? / h);
        let n = slopes.len();
        if n >= opts.agreeing.max(2) {
            let tail = &slopes[n - opts.agreeing.max(2)..];
            let settled = tail
                .windows(2)
                .all(|w| (w[1] - w[0]).abs() <= opts.rel_tol * w[1].abs());
            if settled {
                return Ok(slopes[n - 1]);
            }
        }
        h *= 0.5;
    }
    Err(Error::NoConvergence {
        what: "return-map slope at the origin".into(),
        estimates: slopes,
    })
}

/// Linearized return ratio of the nonlinear system, estimated numerically.
pub fn delta_numeric(sys: &SwitchedSystem, lambda: f64, cfg: &IntegratorConfig) -> Result<f64> {
    delta_numeric_with(sys, lambda, cfg, SlopeLimitOptions::default())
}

pub fn delta_numeric_with(
    sys: &SwitchedSystem,
    lambda: f64,
    cfg: &IntegratorConfig,
    opts: SlopeLimitOptions,
) -> Result<f64> {
    slope_limit(|h| Ok(poincare_numeric(sys, h, lambda, cfg)?.x1_out), opts)
}
