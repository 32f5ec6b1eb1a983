use serde::{Deserialize, Serialize};

use crate::analytic::{delta, delta_prime};
use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::roots::{brent, BrentFailure, BrentOptions};

/// Tolerance on |Δ(λ*) - 1| at an accepted critical parameter.
pub const CRITICAL_DELTA_TOL: f64 = 1e-12;
/// Below this |Δ'(λ*)| the crossing is treated as degenerate.
pub const DEGENERATE_SLOPE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub lambda: f64,
    pub delta: f64,
    pub delta_prime: f64,
    pub nondegenerate: bool,
}

/// Parameter value where Δ(λ) = 1 inside `bracket`.
pub fn find_critical_lambda(params: &SystemParams, bracket: (f64, f64)) -> Result<CriticalPoint> {
    let (lo, hi) = bracket;
    params.check_lambda(lo)?;
    params.check_lambda(hi)?;
    let opts = BrentOptions {
        xtol_abs: 0.0,
        xtol_rel: 0.0,
        ftol: 0.0,
        max_iter: 200,
    };
    let root = brent(|l| delta(params, l).map(|d| d - 1.0), lo, hi, opts).map_err(|e| match e {
        BrentFailure::NoBracket { .. } => Error::NoBracket {
            what: "Delta(lambda) - 1".into(),
            lo,
            hi,
        },
        BrentFailure::MaxIter { x, fx } => Error::NoConvergence {
            what: "critical parameter".into(),
            estimates: vec![x, fx],
        },
        BrentFailure::Eval(e) => e,
    })?;
    let d = delta(params, root.x)?;
    if (d - 1.0).abs() > CRITICAL_DELTA_TOL {
        return Err(Error::NoConvergence {
            what: "critical parameter: |Delta - 1| above tolerance".into(),
            estimates: vec![root.x, d],
        });
    }
    let dp = delta_prime(params, root.x)?;
    if dp.abs() < DEGENERATE_SLOPE {
        return Err(Error::Degenerate {
            lambda: root.x,
            derivative: dp,
        });
    }
    Ok(CriticalPoint {
        lambda: root.x,
        delta: d,
        delta_prime: dp,
        nondegenerate: true,
    })
}
