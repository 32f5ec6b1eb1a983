use crate::error::{Error, Result};
use crate::model::{open_quadrant_of, Matrix2, Point, Quadrant, SwitchedSystem};
use crate::roots::{brent_with_values, BrentFailure, BrentOptions};

use super::dopri::{self, Step};
use super::{Arc, HybridTrajectory, IntegratorConfig, SwitchEvent};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopCondition {
    /// Integrate up to this time.
    Time(f64),
    /// Stop at the n-th switching event.
    Events(usize),
    /// Stop on the first arrival on the positive x1 semi-axis.
    ReturnToSection,
}

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const EXPO: f64 = 0.2 - BETA * 0.75;

fn norm(x: Point) -> f64 {
    x[0].hypot(x[1])
}

/// Field of one quadrant with its matrix frozen for the current λ.
struct QuadrantField<'a> {
    sys: &'a SwitchedSystem,
    quadrant: Quadrant,
    matrix: Matrix2,
    lambda: f64,
}

impl<'a> QuadrantField<'a> {
    fn new(sys: &'a SwitchedSystem, quadrant: Quadrant, lambda: f64) -> Result<Self> {
        Ok(Self {
            sys,
            quadrant,
            matrix: sys.linear_matrix(quadrant, lambda)?,
            lambda,
        })
    }

    fn eval(&self, x: Point) -> Point {
        self.sys.eval_field_with(&self.matrix, self.quadrant, x, self.lambda)
    }
}

/// Clockwise quadrant entered from an axis point, and the vanishing coordinate.
fn entered_from_axis(x: Point) -> (Quadrant, usize) {
    match (x[0] > 0.0, x[0] < 0.0, x[1] > 0.0, x[1] < 0.0) {
        (true, _, _, _) => (Quadrant::Q4, 1),
        (_, true, _, _) => (Quadrant::Q2, 1),
        (_, _, true, _) => (Quadrant::Q1, 0),
        _ => (Quadrant::Q3, 0),
    }
}

/// Speed across the axis `axis` into quadrant `q`, and the field magnitude.
fn inward_speed(sys: &SwitchedSystem, q: Quadrant, x: Point, axis: usize, lambda: f64) -> Result<(f64, f64)> {
    let v = sys.eval_field(q, x, lambda)?;
    Ok((v[axis] * q.signs()[axis], norm(v)))
}

/// Quadrant whose field governs the arc starting at `x`.
///
/// Interior points use their own quadrant. On an axis the arc takes the field of
/// the open quadrant the trajectory enters, which must be the clockwise one.
fn starting_quadrant(sys: &SwitchedSystem, x: Point, lambda: f64, cfg: &IntegratorConfig) -> Result<Quadrant> {
    if let Some(q) = open_quadrant_of(x) {
        return Ok(q);
    }
    let (cw, axis) = entered_from_axis(x);
    let (speed, scale) = inward_speed(sys, cw, x, axis, lambda)?;
    if speed > cfg.tangency_threshold * scale {
        return Ok(cw);
    }
    let ccw = cw.counterclockwise_next();
    let (speed_ccw, scale_ccw) = inward_speed(sys, ccw, x, axis, lambda)?;
    if speed_ccw > cfg.tangency_threshold * scale_ccw {
        return Err(Error::CounterRotation {
            time: 0.0,
            x1: x[0],
            x2: x[1],
        });
    }
    Err(Error::Tangency {
        time: 0.0,
        x1: x[0],
        x2: x[1],
        normal_speed: speed,
    })
}

/// Integrates the switched system from `x0` until `stop`.
///
/// Each arc uses the field of the open quadrant it traverses. Switching events
/// are detected as sign changes of the coordinate that vanishes on the
/// clockwise exit boundary and located by Brent iteration on the step length.
pub fn integrate(
    sys: &SwitchedSystem,
    x0: Point,
    lambda: f64,
    stop: StopCondition,
    cfg: &IntegratorConfig,
) -> Result<HybridTrajectory> {
    cfg.check()?;
    sys.params.check_lambda(lambda)?;
    if !(x0[0].is_finite() && x0[1].is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite initial state {x0:?}")));
    }
    if x0 == [0.0, 0.0] {
        return Err(Error::Origin);
    }
    let t_end = match stop {
        StopCondition::Time(t) if !(t >= 0.0 && t.is_finite()) => {
            return Err(Error::InvalidArgument(format!("t_max must be a finite non-negative time, got {t}")));
        }
        StopCondition::Time(t) => t,
        _ => f64::INFINITY,
    };

    let mut quadrant = starting_quadrant(sys, x0, lambda, cfg)?;
    let mut field = QuadrantField::new(sys, quadrant, lambda)?;
    let mut arcs = vec![Arc {
        quadrant,
        samples: vec![(0.0, x0)],
    }];
    let mut events: Vec<SwitchEvent> = Vec::new();

    let mut t = 0.0;
    let mut y = x0;
    let mut dy = field.eval(y);
    let mut h = cfg.h0.min(cfg.max_step);
    let mut fac_old: f64 = 1e-4;
    let mut amplitude = norm(x0);
    let mut steps = 0usize;

    let stop_now = |events: &[SwitchEvent], t: f64| match stop {
        StopCondition::Time(_) => t >= t_end,
        StopCondition::Events(n) => events.len() >= n,
        StopCondition::ReturnToSection => events
            .last()
            .is_some_and(|e| e.from_quadrant == Quadrant::Q1 && e.to_quadrant == Quadrant::Q4),
    };

    while !stop_now(&events, t) {
        steps += 1;
        if steps > cfg.max_steps {
            return Err(Error::Budget {
                what: format!("more than {} steps", cfg.max_steps),
            });
        }
        h = h.min(cfg.max_step).min(t_end - t);
        if h <= 1e-14 * t.abs().max(1.0) && t_end - t > h {
            return Err(Error::Stiffness { time: t, step: h });
        }

        let mut f = |x: Point| field.eval(x);
        let trial = dopri::step(&mut f, y, dy, h);
        let scale = cfg.abs_tol * amplitude.min(1.0) + cfg.rel_tol * norm(y).max(norm(trial.y));
        let err = ((trial.err[0] / scale).powi(2) + (trial.err[1] / scale).powi(2)).sqrt() / std::f64::consts::SQRT_2;
        if !err.is_finite() {
            h *= FAC_MIN;
            continue;
        }
        let fac11 = err.powf(EXPO);
        if err > 1.0 {
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            continue;
        }
        let fac = (fac11 / fac_old.powf(BETA) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
        let h_next = h / fac;
        fac_old = err.max(1e-4);

        let axis = quadrant.clockwise_exit_axis();
        let other = 1 - axis;
        let signs = quadrant.signs();
        let crossed = trial.y[axis] * signs[axis] <= 0.0;

        // The coordinate that was zero at an axis start must keep its sign.
        if !crossed && trial.y[other] * signs[other] < -cfg.event_tol * norm(trial.y) {
            return Err(Error::CounterRotation {
                time: t + h,
                x1: trial.y[0],
                x2: trial.y[1],
            });
        }

        if !crossed {
            t = if h == t_end - t { t_end } else { t + h };
            y = trial.y;
            dy = trial.dy;
            arcs.last_mut().unwrap().samples.push((t, y));
            check_box(cfg, t, y)?;
            h = h_next;
            continue;
        }

        let (theta, mut state) = locate_crossing(&field, y, dy, h, axis, quadrant, cfg, &trial)?;
        state[axis] = 0.0;
        let t_event = t + theta;
        let next = quadrant.clockwise_next();
        check_transversal(sys, quadrant, next, state, axis, lambda, t_event, cfg)?;

        arcs.last_mut().unwrap().samples.push((t_event, state));
        events.push(SwitchEvent {
            time: t_event,
            state,
            from_quadrant: quadrant,
            to_quadrant: next,
        });
        if events.len() > cfg.max_arcs {
            return Err(Error::Budget {
                what: format!("more than {} switching events", cfg.max_arcs),
            });
        }

        quadrant = next;
        field = QuadrantField::new(sys, quadrant, lambda)?;
        arcs.push(Arc {
            quadrant,
            samples: vec![(t_event, state)],
        });
        t = t_event;
        y = state;
        dy = field.eval(y);
        amplitude = norm(y);
        fac_old = 1e-4;
        h = h_next.max(theta);
    }

    Ok(HybridTrajectory {
        arcs,
        events,
        t_final: t,
    })
}

fn check_box(cfg: &IntegratorConfig, t: f64, y: Point) -> Result<()> {
    if y[0].abs().max(y[1].abs()) > cfg.bounding_box || !y[0].is_finite() || !y[1].is_finite() {
        return Err(Error::Escape { time: t, x1: y[0], x2: y[1] });
    }
    Ok(())
}

/// Finds the sub-step `theta` in (0, h] where the exit coordinate vanishes.
#[allow(clippy::too_many_arguments)]
fn locate_crossing(
    field: &QuadrantField<'_>,
    y: Point,
    dy: Point,
    h: f64,
    axis: usize,
    quadrant: Quadrant,
    cfg: &IntegratorConfig,
    full: &Step,
) -> Result<(f64, Point)> {
    let sign = quadrant.signs()[axis];
    let g0 = y[axis] * sign;
    let gh = full.y[axis] * sign;
    if gh == 0.0 {
        return Ok((h, full.y));
    }
    let sub = |theta: f64| {
        let mut f = |x: Point| field.eval(x);
        dopri::step(&mut f, y, dy, theta).y
    };
    let opts = BrentOptions {
        ftol: cfg.event_tol * norm(y),
        xtol_abs: 0.0,
        xtol_rel: 4.0 * f64::EPSILON,
        max_iter: 200,
    };
    // g0 is >= 0 at the start of a step inside the quadrant; an exact zero
    // means the step started on the exit axis, which a clockwise arc never does.
    let g0 = if g0 > 0.0 { g0 } else { f64::MIN_POSITIVE };
    let root = brent_with_values(|th: f64| Ok::<_, ()>(sub(th)[axis] * sign), (0.0, g0), (h, gh), opts);
    match root {
        Ok(r) => Ok((r.x, sub(r.x))),
        Err(BrentFailure::MaxIter { x, .. }) => Ok((x, sub(x))),
        Err(_) => Err(Error::NoConvergence {
            what: "switching-event location".into(),
            estimates: vec![g0, gh],
        }),
    }
}

#[allow(clippy::too_many_arguments)]
fn check_transversal(
    sys: &SwitchedSystem,
    from: Quadrant,
    to: Quadrant,
    x: Point,
    axis: usize,
    lambda: f64,
    time: f64,
    cfg: &IntegratorConfig,
) -> Result<()> {
    let (out_speed, out_scale) = inward_speed(sys, from, x, axis, lambda)?;
    let (in_speed, in_scale) = inward_speed(sys, to, x, axis, lambda)?;
    // leaving `from` means negative inward speed relative to `from`
    let leaving = -out_speed;
    if leaving <= cfg.tangency_threshold * out_scale || in_speed <= cfg.tangency_threshold * in_scale {
        return Err(Error::Tangency {
            time,
            x1: x[0],
            x2: x[1],
            normal_speed: leaving.min(in_speed),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic;
    use crate::model::SystemParams;
    use crate::poly::{MonomialTerm, PolyField};
    use std::f64::consts::PI;

    fn fig_system() -> SwitchedSystem {
        SwitchedSystem::linear(SystemParams::constant(0.1, 6.0, 1.0))
    }

    #[test]
    fn four_events_reproduce_closed_form() {
        let sys = fig_system();
        let tr = integrate(&sys, [1.0, 0.0], 0.0, StopCondition::Events(4), &IntegratorConfig::default()).unwrap();
        assert_eq!(tr.events.len(), 4);
        let quarter = PI / (2.0 * 6f64.sqrt());
        for (k, e) in tr.events.iter().enumerate() {
            assert!((e.time - (k + 1) as f64 * quarter).abs() < 1e-8, "event {k} at {}", e.time);
        }
        let end = tr.final_state();
        let delta = analytic::delta(&sys.params, 0.0).unwrap();
        assert!((end[0] - delta).abs() < 1e-7 * delta);
        assert!((end[0] - 27.855).abs() < 1e-3);
        assert_eq!(end[1], 0.0);
        let seq: Vec<u8> = tr.arcs.iter().map(|a| a.quadrant.index()).collect();
        assert_eq!(seq, vec![4, 3, 2, 1, 4]);
    }

    #[test]
    fn zero_time_gives_single_point() {
        let sys = SwitchedSystem::paper_example();
        let tr = integrate(&sys, [1e-3, 0.0], 0.0, StopCondition::Time(0.0), &IntegratorConfig::default()).unwrap();
        assert_eq!(tr.samples().count(), 1);
        assert!(tr.events.is_empty());
        assert_eq!(tr.t_final, 0.0);
    }

    #[test]
    fn stops_exactly_at_t_max() {
        let sys = fig_system();
        let tr = integrate(&sys, [0.3, 0.2], 0.0, StopCondition::Time(1.7), &IntegratorConfig::default()).unwrap();
        assert_eq!(tr.t_final, 1.7);
        let end = tr.final_state();
        // replay the recorded switches analytically
        let mut x = [0.3, 0.2];
        let mut t0 = 0.0;
        for arc in &tr.arcs {
            let (t1, _) = *arc.samples.last().unwrap();
            x = analytic::flow_linear(arc.quadrant, x, t1 - t0, &sys.params, 0.0).unwrap();
            t0 = t1;
        }
        assert!((x[0] - end[0]).abs() < 1e-8 && (x[1] - end[1]).abs() < 1e-8);
    }

    #[test]
    fn rejects_origin_and_bad_lambda() {
        let sys = fig_system();
        let cfg = IntegratorConfig::default();
        assert_eq!(integrate(&sys, [0.0, 0.0], 0.0, StopCondition::Time(1.0), &cfg), Err(Error::Origin));
        assert!(matches!(
            integrate(&sys, [1.0, 0.0], 9.0, StopCondition::Time(1.0), &cfg),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn event_budget_is_enforced() {
        let sys = fig_system();
        let cfg = IntegratorConfig {
            max_arcs: 3,
            ..Default::default()
        };
        let r = integrate(&sys, [1.0, 0.0], 0.0, StopCondition::Time(100.0), &cfg);
        assert!(matches!(r, Err(Error::Budget { .. })));
    }

    #[test]
    fn escape_is_reported() {
        let sys = fig_system();
        let cfg = IntegratorConfig {
            bounding_box: 10.0,
            ..Default::default()
        };
        let r = integrate(&sys, [1.0, 0.0], 0.0, StopCondition::Time(100.0), &cfg);
        assert!(matches!(r, Err(Error::Escape { .. })));
    }

    #[test]
    fn tangential_contact_is_rejected() {
        // In quadrant 4 the perturbation cancels the B-field's push across x2 = 0
        // at (1, 0): x2' = -b x1 + b x1^2 vanishes there.
        let mut sys = fig_system();
        sys.perturbations[3] = PolyField::new(vec![], vec![MonomialTerm::new(vec![6.0], 2, 0)]);
        let r = integrate(&sys, [1.0, 0.0], 0.0, StopCondition::Time(1.0), &IntegratorConfig::default());
        assert!(matches!(r, Err(Error::Tangency { .. })), "{r:?}");
    }

    #[test]
    fn counter_rotation_is_rejected() {
        // Strong counter-clockwise push in quadrant 4 near the positive x1 axis.
        let mut sys = fig_system();
        sys.perturbations[3] = PolyField::new(vec![], vec![MonomialTerm::new(vec![100.0], 2, 0)]);
        let r = integrate(&sys, [1.0, -0.01], 0.0, StopCondition::Time(1.0), &IntegratorConfig::default());
        assert!(matches!(r, Err(Error::CounterRotation { .. })), "{r:?}");
    }

    #[test]
    fn interior_start_uses_own_quadrant() {
        let sys = fig_system();
        let tr = integrate(&sys, [-0.5, 0.5], 0.0, StopCondition::Events(1), &IntegratorConfig::default()).unwrap();
        assert_eq!(tr.arcs[0].quadrant, Quadrant::Q2);
        assert_eq!(tr.events[0].to_quadrant, Quadrant::Q1);
        assert_eq!(tr.events[0].state[0], 0.0);
    }
}
