//! Fitting the leading nonlinear term of the return map,
//! `π(x1) = Δ x1 + δ x1^k + o(x1^k)`.

use serde::{Deserialize, Serialize};

use crate::analytic::delta;
use crate::error::{Error, Result};
use crate::fit::fit_line;
use crate::model::SwitchedSystem;
use crate::numeric::{poincare_numeric, IntegratorConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub delta_lin: f64,
    pub delta_coeff: f64,
    pub k_exp: f64,
    /// RMS residual of the fit (log space for the log-log route).
    pub fit_residual: f64,
    pub x1_grid: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionOptions {
    /// Largest entry point of the geometric grid `x_max · 2^-j`.
    pub x_max: f64,
    pub points: usize,
    /// Residuals below `noise_factor · rel_tol · x1` are treated as noise.
    pub noise_factor: f64,
}

impl Default for ExpansionOptions {
    fn default() -> Self {
        Self {
            x_max: 0.1,
            points: 8,
            noise_factor: 1e3,
        }
    }
}

impl ExpansionOptions {
    pub fn grid(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.x_max * 0.5f64.powi(j as i32)).collect()
    }
}

/// Local expansion of the numerical return map at `lambda`, with Δ taken
/// from the closed form.
pub fn fit_local_expansion(
    sys: &SwitchedSystem,
    lambda: f64,
    cfg: &IntegratorConfig,
    opts: &ExpansionOptions,
) -> Result<ExpansionFit> {
    let d = delta(&sys.params, lambda)?;
    let grid = opts.grid();
    let samples = grid
        .iter()
        .map(|&x| Ok((x, poincare_numeric(sys, x, lambda, cfg)?.x1_out)))
        .collect::<Result<Vec<_>>>()?;
    let floor = opts.noise_factor * cfg.rel_tol;
    fit_with_known_delta(&samples, d, |x| floor * x).map_err(|e| match e {
        Error::InsufficientData(_) => Error::PerturbationTooSmall { lambda },
        other => other,
    })
}

/// Log-log fit of `|π(x) - Δ x|` against `x` over samples above `noise_floor(x)`.
pub fn fit_with_known_delta<F>(samples: &[(f64, f64)], delta_lin: f64, noise_floor: F) -> Result<ExpansionFit>
where
    F: Fn(f64) -> f64,
{
    let kept: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(x, p)| (x, p - delta_lin * x))
        .filter(|&(x, r)| r.abs() > noise_floor(x))
        .collect();
    if kept.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} of {} residuals above the noise floor",
            kept.len(),
            samples.len()
        )));
    }
    let lx: Vec<f64> = kept.iter().map(|(x, _)| x.ln()).collect();
    let lr: Vec<f64> = kept.iter().map(|(_, r)| r.abs().ln()).collect();
    let line = fit_line(&lx, &lr)?;
    let sign = kept.iter().map(|(_, r)| r).sum::<f64>().signum();
    Ok(ExpansionFit {
        delta_lin,
        delta_coeff: sign * line.intercept.exp(),
        k_exp: line.slope,
        fit_residual: line.rms,
        x1_grid: kept.iter().map(|(x, _)| *x).collect(),
    })
}

/// Joint fit of Δ, δ and k when Δ is not known independently.
///
/// For fixed k the model `π(x)/x = Δ + δ x^(k-1)` is linear in (Δ, δ); k is
/// found by a coarse scan followed by golden-section refinement of the
/// relative residual sum of squares.
pub fn fit_joint(samples: &[(f64, f64)]) -> Result<ExpansionFit> {
    if samples.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "joint expansion fit needs at least 4 samples, got {}",
            samples.len()
        )));
    }
    let ssr = |k: f64| -> (f64, f64, f64) {
        // normal equations for y = d + c·u with u = x^(k-1), y = π/x
        let (mut n, mut su, mut suu, mut sy, mut suy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(x, p) in samples {
            let u = x.powf(k - 1.0);
            let y = p / x;
            n += 1.0;
            su += u;
            suu += u * u;
            sy += y;
            suy += u * y;
        }
        let det = n * suu - su * su;
        if det.abs() < f64::MIN_POSITIVE {
            return (f64::INFINITY, f64::NAN, f64::NAN);
        }
        let c = (n * suy - su * sy) / det;
        let d = (sy - c * su) / n;
        let s = samples
            .iter()
            .map(|&(x, p)| (p / x - d - c * x.powf(k - 1.0)).powi(2))
            .sum::<f64>();
        (s, d, c)
    };

    let (k_lo, k_hi, steps) = (1.05, 10.0, 180);
    let mut best = (f64::INFINITY, k_lo);
    for i in 0..=steps {
        let k = k_lo + (k_hi - k_lo) * i as f64 / steps as f64;
        let s = ssr(k).0;
        if s < best.0 {
            best = (s, k);
        }
    }
    let h = (k_hi - k_lo) / steps as f64;
    let (mut a, mut b) = ((best.1 - h).max(1.0 + 1e-9), best.1 + h);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (ssr(c).0, ssr(d).0);
    while (b - a).abs() > 1e-12 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = ssr(c).0;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = ssr(d).0;
        }
    }
    let k = 0.5 * (a + b);
    let (s, d, c) = ssr(k);
    Ok(ExpansionFit {
        delta_lin: d,
        delta_coeff: c,
        k_exp: k,
        fit_residual: (s / samples.len() as f64).sqrt(),
        x1_grid: samples.iter().map(|(x, _)| *x).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::SystemParams;

    fn synthetic(delta: f64, coeff: f64, k: f64) -> Vec<(f64, f64)> {
        ExpansionOptions::default()
            .grid()
            .into_iter()
            .map(|x| (x, delta * x + coeff * x.powf(k)))
            .collect()
    }

    #[test]
    fn known_delta_recovers_cubic() {
        let s = synthetic(1.05, -0.8, 3.0);
        let f = fit_with_known_delta(&s, 1.05, |_| 0.0).unwrap();
        assert!((f.k_exp - 3.0).abs() < 1e-6);
        assert!((f.delta_coeff + 0.8).abs() < 1e-6);
    }

    #[test]
    fn joint_fit_recovers_all_three() {
        let s = synthetic(0.97, 0.6, 3.0);
        let f = fit_joint(&s).unwrap();
        assert!((f.delta_lin - 0.97).abs() < 1e-6, "{f:?}");
        assert!((f.delta_coeff - 0.6).abs() < 1e-6, "{f:?}");
        assert!((f.k_exp - 3.0).abs() < 1e-6, "{f:?}");
    }

    #[test]
    fn linear_system_is_unresolvable() {
        let sys = SwitchedSystem::linear(SystemParams::constant(0.5, 3.0, 1.0));
        let r = fit_local_expansion(&sys, 0.0, &IntegratorConfig::default(), &ExpansionOptions::default());
        assert!(matches!(r, Err(Error::PerturbationTooSmall { .. })), "{r:?}");
    }
}
