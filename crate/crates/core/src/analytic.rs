//! Closed-form results for the purely linear switched system.
//!
//! Every quarter turn multiplies the distance to the origin along the axes by
//! `sqrt(b/c) · exp(-aπ / (2 sqrt(bc)))` and takes `π / (2 sqrt(bc))` time
//! units, so a full revolution scales the positive x1 semi-axis by
//! `Δ = (b/c)² exp(-2πa / sqrt(bc))`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Point, Quadrant, SystemParams};

/// Default tolerance on |Δ - 1| for the periodic-family verdict.
pub const DEFAULT_DELTA_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectionMapValue {
    pub exit_value: f64,
    pub transit_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OriginClass {
    PeriodicFamily,
    AsymptoticallyStable,
    Unstable,
}

impl fmt::Display for OriginClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OriginClass::PeriodicFamily => "PeriodicFamily",
            OriginClass::AsymptoticallyStable => "AsymptoticallyStable",
            OriginClass::Unstable => "Unstable",
        };
        f.write_str(s)
    }
}

/// Exact solution of `x' = A_q(λ) x` after time `t`, in rotation-scaling form.
pub fn flow_linear(q: Quadrant, x0: Point, t: f64, params: &SystemParams, lambda: f64) -> Result<Point> {
    let (b, c) = params.bc(lambda)?;
    let omega = (b * c).sqrt();
    let s = if q.uses_a() { (b / c).sqrt() } else { (c / b).sqrt() };
    let (sin, cos) = (omega * t).sin_cos();
    let decay = (-params.a * t).exp();
    Ok([
        decay * (x0[0] * cos + s * x0[1] * sin),
        decay * (-x0[0] * sin / s + x0[1] * cos),
    ])
}

/// Time for a linear arc to sweep one quadrant.
pub fn quarter_time(params: &SystemParams, lambda: f64) -> Result<f64> {
    let (b, c) = params.bc(lambda)?;
    Ok(PI / (2.0 * (b * c).sqrt()))
}

/// Time for one full revolution of the linear switched flow.
pub fn revolution_time(params: &SystemParams, lambda: f64) -> Result<f64> {
    Ok(4.0 * quarter_time(params, lambda)?)
}

fn quarter_gain(params: &SystemParams, lambda: f64) -> Result<f64> {
    let (b, c) = params.bc(lambda)?;
    Ok((b / c).sqrt() * (-params.a * PI / (2.0 * (b * c).sqrt())).exp())
}

/// Section map π_i of the linear system.
///
/// π1: x2 > 0 to x1 > 0 (flow of A), π2: x1 > 0 to x2 < 0 (B),
/// π3: x2 < 0 to x1 < 0 (A), π4: x1 < 0 to x2 > 0 (B).
pub fn section_map(map: u8, entry: f64, params: &SystemParams, lambda: f64) -> Result<SectionMapValue> {
    let (expected, entry_sign, exit_sign) = match map {
        1 => ("positive x2", 1.0, 1.0),
        2 => ("positive x1", 1.0, -1.0),
        3 => ("negative x2", -1.0, -1.0),
        4 => ("negative x1", -1.0, 1.0),
        _ => return Err(Error::InvalidArgument(format!("section map index {map} not in 1..=4"))),
    };
    if !(entry * entry_sign > 0.0) {
        return Err(Error::Side {
            map,
            expected,
            entry,
        });
    }
    Ok(SectionMapValue {
        exit_value: exit_sign * entry.abs() * quarter_gain(params, lambda)?,
        transit_time: quarter_time(params, lambda)?,
    })
}

/// Stability index Δ(λ) = (b/c)² exp(-2πa / sqrt(bc)).
pub fn delta(params: &SystemParams, lambda: f64) -> Result<f64> {
    let (b, c) = params.bc(lambda)?;
    let ratio = b / c;
    Ok(ratio * ratio * (-2.0 * PI * params.a / (b * c).sqrt()).exp())
}

/// dΔ/dλ via logarithmic differentiation.
pub fn delta_prime(params: &SystemParams, lambda: f64) -> Result<f64> {
    let (b, c) = params.bc(lambda)?;
    let (db, dc) = (params.b.eval_derivative(lambda), params.c.eval_derivative(lambda));
    let bc = b * c;
    let log_slope = 2.0 * (db / b - dc / c) + PI * params.a * (db * c + b * dc) / (bc * bc.sqrt());
    Ok(delta(params, lambda)? * log_slope)
}

pub fn classify_delta(delta: f64, eps: f64) -> OriginClass {
    if (delta - 1.0).abs() <= eps {
        OriginClass::PeriodicFamily
    } else if delta < 1.0 {
        OriginClass::AsymptoticallyStable
    } else {
        OriginClass::Unstable
    }
}

pub fn classify_origin(params: &SystemParams, lambda: f64) -> Result<OriginClass> {
    classify_origin_with(params, lambda, DEFAULT_DELTA_EPS)
}

pub fn classify_origin_with(params: &SystemParams, lambda: f64, eps: f64) -> Result<OriginClass> {
    Ok(classify_delta(delta(params, lambda)?, eps))
}

/// Return map of the linear system on the x1 axis (valid for either sign of x1).
pub fn poincare_linear(x1: f64, params: &SystemParams, lambda: f64) -> Result<f64> {
    Ok(delta(params, lambda)? * x1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn fig_params() -> SystemParams {
        SystemParams::constant(0.1, 6.0, 1.0)
    }

    fn paper_params() -> SystemParams {
        crate::model::SwitchedSystem::paper_example().params
    }

    #[test]
    fn quarter_turn_lands_on_axis() {
        let p = fig_params();
        let t = PI / (2.0 * 6f64.sqrt());
        let x = flow_linear(Quadrant::Q1, [0.0, 1.0], t, &p, 0.0).unwrap();
        let expected = 6f64.sqrt() * (-0.1 * t).exp();
        assert!((x[0] - expected).abs() < 1e-14);
        assert!(x[1].abs() < 1e-14);
        assert!((x[0] - 2.297_340_714_926_133).abs() < 1e-12);
    }

    #[test]
    fn identity_at_zero_time() {
        let p = fig_params();
        for q in Quadrant::ALL {
            assert_eq!(flow_linear(q, [0.3, -0.7], 0.0, &p, 0.0).unwrap(), [0.3, -0.7]);
        }
    }

    #[test]
    fn section_map_examples() {
        let rot = SystemParams::constant(0.0, 2.0, 2.0);
        let v = section_map(1, 1.0, &rot, 0.0).unwrap();
        assert!((v.exit_value - 1.0).abs() < 1e-15);
        assert!((v.transit_time - PI / 4.0).abs() < 1e-15);

        let v = section_map(2, 1.0, &fig_params(), 0.0).unwrap();
        assert!((v.exit_value + 6f64.sqrt() * (-0.1 * PI / (2.0 * 6f64.sqrt())).exp()).abs() < 1e-14);
        assert!((v.exit_value + 2.297_340_714_926_133).abs() < 1e-12);

        assert!(matches!(section_map(2, -1.0, &fig_params(), 0.0), Err(Error::Side { map: 2, .. })));
        assert!(matches!(section_map(3, 1.0, &fig_params(), 0.0), Err(Error::Side { map: 3, .. })));
        assert!(section_map(5, 1.0, &fig_params(), 0.0).is_err());
    }

    #[test]
    fn delta_examples() {
        assert!((delta(&paper_params(), 0.0).unwrap() - 1.0).abs() < 1e-14);
        let d = delta(&fig_params(), 0.0).unwrap();
        assert!((d - 36.0 * (-0.2 * PI / 6f64.sqrt()).exp()).abs() < 1e-12);
        assert!((d - 27.855).abs() < 1e-3);
        let d = delta(&SystemParams::constant(1.0, 1.0, 1.0), 0.0).unwrap();
        assert!((d - (-2.0 * PI).exp()).abs() < 1e-17);
        assert!((d - 1.8674e-3).abs() < 1e-7);
    }

    #[test]
    fn delta_prime_examples() {
        let dp = delta_prime(&paper_params(), 0.0).unwrap();
        assert!((dp - 4.0 / (E * PI)).abs() < 1e-12);
        assert!((dp - 0.468398).abs() < 1e-6);
        let flat = SystemParams::constant(0.3, 2.0, 5.0);
        assert_eq!(delta_prime(&flat, 0.4).unwrap(), 0.0);
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_origin(&paper_params(), 0.0).unwrap(), OriginClass::PeriodicFamily);
        assert_eq!(classify_origin(&fig_params(), 0.0).unwrap(), OriginClass::Unstable);
        assert_eq!(
            classify_origin(&SystemParams::constant(1.0, 1.0, 1.0), 0.0).unwrap(),
            OriginClass::AsymptoticallyStable
        );
    }

    #[test]
    fn poincare_linear_examples() {
        assert!((poincare_linear(1.0, &paper_params(), 0.0).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(poincare_linear(0.0, &fig_params(), 0.0).unwrap(), 0.0);
        let p = fig_params();
        for &x in &[0.1, -0.4, 3.0] {
            assert_eq!(
                poincare_linear(2.0 * x, &p, 0.0).unwrap(),
                2.0 * poincare_linear(x, &p, 0.0).unwrap()
            );
        }
    }
}
