//! Sampled checks of the global existence conditions.
//!
//! Sampling can only falsify. A passing condition is reported as
//! [`CheckStatus::PassSampled`], never as proven.

use serde::{Deserialize, Serialize};

use crate::analytic::{delta, delta_prime};
use crate::error::{Error, Result};
use crate::model::{Point, Quadrant, SwitchedSystem};
use crate::poly::ScalarPoly;

pub const DEFAULT_RADIUS_M: f64 = 10.0;
pub const DEFAULT_GLOBAL_SAMPLES: usize = 100_000;
/// Tolerance on |Δ(0) - 1| for the parameter condition.
pub const DELTA_ONE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckStatus {
    PassSampled,
    Fail,
    NotApplicable,
}

/// A sample point and the field index at which an inequality was violated.
///
/// `value` is the quantity required to be negative, evaluated at `point`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub field: Quadrant,
    pub point: Point,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub status: CheckStatus,
    pub witness: Option<Witness>,
}

impl ConditionResult {
    fn from_worst(worst: Option<Witness>) -> Self {
        match worst {
            Some(w) => Self {
                status: CheckStatus::Fail,
                witness: Some(w),
            },
            None => Self {
                status: CheckStatus::PassSampled,
                witness: None,
            },
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::PassSampled
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalCheckReport {
    /// `<x, f_i(x)> < 0` for `‖x‖ > M` (candidate V = ‖x‖²). NotApplicable when
    /// only this candidate fails and the perturbation-only form holds; the
    /// witness then shows where the candidate fails.
    pub lyapunov_ok: ConditionResult,
    /// `-<A_i x, Sx> > <f̄_i, Sx>` for `x ≠ 0`: the perturbation never
    /// overturns the clockwise rotation of the linear part.
    pub rotation_ok: ConditionResult,
    /// `|<A_i x, Sx>| > |<f̄_i, Sx>|` for `x ≠ 0`.
    pub rotation_abs_ok: ConditionResult,
    /// Δ(0) = 1 and Δ'(0) > 0.
    pub delta_conditions_ok: bool,
    pub delta_at_zero: f64,
    pub delta_prime_at_zero: f64,
    pub samples_used: usize,
    #[serde(rename = "radius_M")]
    pub radius_m: f64,
    /// Largest |<f̄_i(x), Sx>| seen over the rotation samples.
    pub max_abs_perturbation_rotation: f64,
}

impl GlobalCheckReport {
    pub fn all_passed(&self) -> bool {
        self.lyapunov_ok.passed() && self.rotation_ok.passed() && self.delta_conditions_ok
    }
}

/// Radical inverse of `i` in `base` (van der Corput).
fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let (mut f, mut out) = (inv, 0.0);
    while i > 0 {
        out += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    out
}

/// First `n` points of the 2-D Halton sequence (bases 2 and 3), skipping 0.
fn halton(n: usize) -> impl Iterator<Item = (f64, f64)> {
    (1..=n as u64).map(|i| (radical_inverse(i, 2), radical_inverse(i, 3)))
}

fn polar(r: f64, theta: f64) -> Point {
    let (s, c) = theta.sin_cos();
    [r * c, r * s]
}

/// Sample points for the decay condition: area-uniform in `M < r ≤ 10M`
/// plus equally spaced points (starting on the positive x1 axis) on the
/// circles of radius M, 2M and 10M.
pub fn lyapunov_samples(radius_m: f64, n: usize) -> Vec<Point> {
    let tau = std::f64::consts::TAU;
    let n_annulus = n / 2;
    let rest = n - n_annulus;
    let (r0, r1) = (radius_m * radius_m, 100.0 * radius_m * radius_m);
    let mut pts: Vec<Point> = halton(n_annulus)
        .map(|(u, v)| polar((r0 + u * (r1 - r0)).sqrt(), tau * v))
        .collect();
    for (k, scale) in [1.0, 2.0, 10.0].into_iter().enumerate() {
        let n_circle = (rest + k) / 3;
        pts.extend((0..n_circle).map(|j| polar(scale * radius_m, tau * j as f64 / n_circle as f64)));
    }
    pts
}

/// Nonzero area-uniform sample points in the disk `‖x‖ ≤ 10M`.
pub fn rotation_samples(radius_m: f64, n: usize) -> Vec<Point> {
    let tau = std::f64::consts::TAU;
    halton(n)
        .map(|(u, v)| polar(10.0 * radius_m * u.sqrt(), tau * v))
        .filter(|p| p[0] != 0.0 || p[1] != 0.0)
        .collect()
}

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn keep_worst(worst: &mut Option<Witness>, cand: Witness) {
    if worst.is_none_or(|w| cand.value > w.value) {
        *worst = Some(cand);
    }
}

/// Samples the global conditions at parameter `lambda`.
///
/// `n_samples` is split evenly between the decay samples and the rotation
/// samples.
pub fn check_global_conditions(
    sys: &SwitchedSystem,
    lambda: f64,
    radius_m: f64,
    n_samples: usize,
) -> Result<GlobalCheckReport> {
    if !(radius_m > 0.0 && radius_m.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius M must be positive, got {radius_m}")));
    }
    if n_samples < 8 {
        return Err(Error::InvalidArgument(format!("need at least 8 samples, got {n_samples}")));
    }
    sys.params.check_lambda(lambda)?;

    let mut mats = [[[0.0; 2]; 2]; 4];
    for (m, q) in mats.iter_mut().zip(Quadrant::ALL) {
        *m = sys.params.linear_matrix(q, lambda)?;
    }
    let radial: Vec<ScalarPoly> = Quadrant::ALL.iter().map(|&q| sys.perturbation(q).radial_form()).collect();
    let rot: Vec<ScalarPoly> = Quadrant::ALL.iter().map(|&q| sys.perturbation(q).rotation_form()).collect();
    let lin = |i: usize, x: Point| -> Point {
        let m = &mats[i];
        [m[0][0] * x[0] + m[0][1] * x[1], m[1][0] * x[0] + m[1][1] * x[1]]
    };

    let lyap_pts = lyapunov_samples(radius_m, n_samples / 2);
    let mut lyap_worst = None;
    let mut pert_worst = None;
    for &x in &lyap_pts {
        for (i, q) in Quadrant::ALL.into_iter().enumerate() {
            let pert = radial[i].eval(x, lambda);
            let total = dot(x, lin(i, x)) + pert;
            if !(total < 0.0) {
                keep_worst(&mut lyap_worst, Witness { field: q, point: x, value: total });
            }
            if !(pert < 0.0) {
                keep_worst(&mut pert_worst, Witness { field: q, point: x, value: pert });
            }
        }
    }
    let lyapunov_ok = match lyap_worst {
        None => ConditionResult::from_worst(None),
        Some(w) if pert_worst.is_none() && perturbation_dominates(&radial, lambda, radius_m) => ConditionResult {
            status: CheckStatus::NotApplicable,
            witness: Some(w),
        },
        Some(w) => ConditionResult::from_worst(Some(w)),
    };

    let rot_pts = rotation_samples(radius_m, n_samples - n_samples / 2);
    let (mut rot_worst, mut abs_worst, mut max_pert) = (None, None, 0.0f64);
    for &x in &rot_pts {
        let sx = [-x[1], x[0]];
        for (i, q) in Quadrant::ALL.into_iter().enumerate() {
            let linear = dot(lin(i, x), sx);
            let pert = rot[i].eval(x, lambda);
            max_pert = max_pert.max(pert.abs());
            let oriented = pert + linear;
            if !(oriented < 0.0) {
                keep_worst(&mut rot_worst, Witness { field: q, point: x, value: oriented });
            }
            let absolute = pert.abs() - linear.abs();
            if !(absolute < 0.0) {
                keep_worst(&mut abs_worst, Witness { field: q, point: x, value: absolute });
            }
        }
    }

    let d0 = delta(&sys.params, 0.0)?;
    let dp0 = delta_prime(&sys.params, 0.0)?;
    Ok(GlobalCheckReport {
        lyapunov_ok,
        rotation_ok: ConditionResult::from_worst(rot_worst),
        rotation_abs_ok: ConditionResult::from_worst(abs_worst),
        delta_conditions_ok: (d0 - 1.0).abs() <= DELTA_ONE_TOL && dp0 > 0.0,
        delta_at_zero: d0,
        delta_prime_at_zero: dp0,
        samples_used: lyap_pts.len() + rot_pts.len(),
        radius_m,
        max_abs_perturbation_rotation: max_pert,
    })
}

/// Growth part of the perturbation-only decay form: along each of 64 rays,
/// `‖x‖² / |<x, f̄_i>|` shrinks from radius 2M to 10M to 50M.
fn perturbation_dominates(radial: &[ScalarPoly], lambda: f64, radius_m: f64) -> bool {
    let tau = std::f64::consts::TAU;
    (0..64).all(|j| {
        let theta = tau * j as f64 / 64.0;
        radial.iter().all(|p| {
            let ratio = |r: f64| r * r / p.eval(polar(r, theta), lambda).abs();
            let (r1, r2, r3) = (ratio(2.0 * radius_m), ratio(10.0 * radius_m), ratio(50.0 * radius_m));
            r2 < r1 && r3 < r2
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemParams;
    use crate::poly::{MonomialTerm, PolyField};

    #[test]
    fn halton_is_in_unit_square() {
        for (u, v) in halton(500) {
            assert!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0);
        }
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - 7.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn sample_radii() {
        let pts = lyapunov_samples(10.0, 1200);
        assert_eq!(pts.len(), 1200);
        for p in &pts {
            let r = p[0].hypot(p[1]);
            assert!((10.0 - 1e-9..=100.0 + 1e-9).contains(&r));
        }
        for p in rotation_samples(10.0, 500) {
            let r = p[0].hypot(p[1]);
            assert!(r > 0.0 && r <= 100.0 + 1e-9);
        }
    }

    #[test]
    fn benchmark_passes() {
        let sys = SwitchedSystem::paper_example();
        let rep = check_global_conditions(&sys, 0.5, 10.0, 4000).unwrap();
        assert!(rep.all_passed(), "{rep:?}");
        assert_eq!(rep.max_abs_perturbation_rotation, 0.0);
    }

    #[test]
    fn positive_cubic_fails_on_x1_axis() {
        let mut sys = SwitchedSystem::paper_example();
        sys.perturbations[0].comp1.push(MonomialTerm::new(vec![2.0], 3, 0));
        let rep = check_global_conditions(&sys, 0.5, 10.0, 4000).unwrap();
        assert_eq!(rep.lyapunov_ok.status, CheckStatus::Fail);
        let w = rep.lyapunov_ok.witness.unwrap();
        assert_eq!(w.field, Quadrant::Q1);
        assert!(w.point[0] > 50.0 && w.point[1].abs() < 1e-9 * w.point[0], "{w:?}");
    }

    #[test]
    fn linear_system_is_not_applicable_or_fails() {
        // ‖x‖² decays for a large damping ratio but the perturbation form cannot hold
        let sys = SwitchedSystem::linear(SystemParams::constant(0.1, 6.0, 1.0));
        let rep = check_global_conditions(&sys, 0.0, 10.0, 400).unwrap();
        assert_eq!(rep.lyapunov_ok.status, CheckStatus::Fail);
        assert!(rep.rotation_ok.passed());
        assert!(!rep.delta_conditions_ok);
    }

    #[test]
    fn rotation_reversal_is_caught() {
        let mut sys = SwitchedSystem::linear(SystemParams::constant(1.0, 1.0, 1.0));
        sys.perturbations[1] = PolyField::new(vec![MonomialTerm::new(vec![-5.0], 0, 3)], vec![]);
        let rep = check_global_conditions(&sys, 0.0, 1.0, 2000).unwrap();
        assert_eq!(rep.rotation_ok.status, CheckStatus::Fail);
        let w = rep.rotation_ok.witness.unwrap();
        let x = w.point;
        // -<Ax,Sx> = x1² + x2² must not exceed <f̄,Sx> = 5 x2^4
        assert!(5.0 * x[1].powi(4) >= x[0] * x[0] + x[1] * x[1]);
    }

    #[test]
    fn bad_arguments() {
        let sys = SwitchedSystem::paper_example();
        assert!(check_global_conditions(&sys, 0.5, 0.0, 100).is_err());
        assert!(check_global_conditions(&sys, 0.5, 10.0, 2).is_err());
        assert!(check_global_conditions(&sys, 5.0, 10.0, 100).is_err());
    }
}
