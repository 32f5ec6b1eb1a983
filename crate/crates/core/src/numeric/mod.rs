//! Event-detecting integration of the nonlinear switched system and the
//! numerically constructed return map on the positive x1 semi-axis.

mod dopri;
mod integrate;
mod poincare;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Point, Quadrant};

pub use integrate::{integrate, StopCondition};
pub use poincare::{delta_numeric, poincare_numeric, return_residual, slope_limit, SlopeLimitOptions};

/// Step-size control, event location and budget settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    /// Absolute tolerance, scaled by min(1, amplitude at the latest switch).
    pub abs_tol: f64,
    pub max_step: f64,
    /// Crossing-location tolerance relative to the state norm.
    pub event_tol: f64,
    /// Maximum number of switching events per integration.
    pub max_arcs: usize,
    pub h0: f64,
    pub max_steps: usize,
    /// Normal speed below this fraction of |f| at a crossing is a tangency.
    pub tangency_threshold: f64,
    /// Escape radius in the max norm.
    pub bounding_box: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            max_step: 0.1,
            event_tol: 1e-12,
            max_arcs: 100_000,
            h0: 1e-3,
            max_steps: 2_000_000,
            tangency_threshold: 1e-10,
            bounding_box: 1e6,
        }
    }
}

impl IntegratorConfig {
    pub fn check(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("event_tol", self.event_tol),
            ("h0", self.h0),
            ("tangency_threshold", self.tangency_threshold),
            ("bounding_box", self.bounding_box),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidArgument(format!("integrator.{name} must be positive, got {v}")));
            }
        }
        if self.max_arcs == 0 || self.max_steps == 0 {
            return Err(Error::InvalidArgument("integrator budgets must be positive".into()));
        }
        Ok(())
    }

    /// Advisory notes about unusual but legal settings.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = vec![];
        if self.event_tol > self.abs_tol {
            out.push(format!(
                "event_tol ({:e}) exceeds abs_tol ({:e}); crossings are located less precisely than steps",
                self.event_tol, self.abs_tol
            ));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchEvent {
    pub time: f64,
    pub state: Point,
    pub from_quadrant: Quadrant,
    pub to_quadrant: Quadrant,
}

/// One smooth piece of a trajectory, governed by a single quadrant field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Arc {
    pub quadrant: Quadrant,
    /// Accepted states `(t, x)`, starting and ending at the arc's junctions.
    pub samples: Vec<(f64, Point)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridTrajectory {
    pub arcs: Vec<Arc>,
    pub events: Vec<SwitchEvent>,
    pub t_final: f64,
}

impl HybridTrajectory {
    pub fn final_state(&self) -> Point {
        self.arcs
            .last()
            .and_then(|a| a.samples.last())
            .map(|s| s.1)
            .expect("trajectory has at least one sample")
    }

    /// All samples in time order; junction points appear once.
    pub fn samples(&self) -> impl Iterator<Item = (Quadrant, f64, Point)> + '_ {
        self.arcs.iter().enumerate().flat_map(|(i, arc)| {
            let skip = usize::from(i > 0);
            arc.samples.iter().skip(skip).map(move |&(t, x)| (arc.quadrant, t, x))
        })
    }
}

/// One revolution of the return map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoincareSample {
    pub x1_in: f64,
    pub x1_out: f64,
    pub period: f64,
}

impl PoincareSample {
    pub fn ratio(&self) -> f64 {
        self.x1_out / self.x1_in
    }

    pub fn residual(&self) -> f64 {
        self.x1_out - self.x1_in
    }
}
