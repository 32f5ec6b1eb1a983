//! Python bindings: `switchbif.SwitchedSystem` and a few free functions.
//! Report structures are returned as plain dicts and lists.

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use serde::Serialize;

use switchbif_core::analytic::{classify_origin_with, delta, delta_prime};
use switchbif_core::bifurcation::{
    analyze_direction, check_global_conditions, continue_branch, find_critical_lambda, fit_local_expansion,
    fit_scaling_law, BranchOptions, BranchPoint, ExpansionOptions, Seeding,
};
use switchbif_core::config::{emit_config, parse_config, RunConfig};
use switchbif_core::numeric::{delta_numeric, integrate, poincare_numeric, IntegratorConfig, StopCondition};
use switchbif_core::{region_of, Error, SwitchedSystem, SystemParams};

create_exception!(switchbif, SwitchbifError, PyException, "Raised for every failure reported by the core library.");

fn err(e: Error) -> PyErr {
    SwitchbifError::new_err(format!("{}: {e}", e.kind()))
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| SwitchbifError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// (t, x1, x2, quadrant, is_event)
type TrajectoryRow = (f64, f64, f64, u8, bool);

#[pyclass(name = "SwitchedSystem", module = "switchbif", from_py_object)]
#[derive(Clone)]
struct PySystem {
    sys: SwitchedSystem,
    cfg: IntegratorConfig,
}

#[pymethods]
impl PySystem {
    /// The built-in benchmark system.
    #[staticmethod]
    fn paper_example() -> Self {
        Self {
            sys: SwitchedSystem::paper_example(),
            cfg: IntegratorConfig::default(),
        }
    }

    /// Parses and validates a TOML configuration document.
    #[staticmethod]
    fn from_config(text: &str) -> PyResult<Self> {
        let rc = parse_config(text).map_err(err)?;
        Ok(Self {
            sys: rc.system,
            cfg: rc.integrator,
        })
    }

    /// Linear switched system with λ-polynomials `b` and `c`.
    #[staticmethod]
    #[pyo3(signature = (a, b, c, lambda_domain = (-1.0, 1.0)))]
    fn linear(a: f64, b: Vec<f64>, c: Vec<f64>, lambda_domain: (f64, f64)) -> Self {
        Self {
            sys: SwitchedSystem::linear(SystemParams::new(a, b, c, lambda_domain)),
            cfg: IntegratorConfig::default(),
        }
    }

    /// Canonical TOML document for this system.
    fn to_config(&self) -> String {
        let mut rc = RunConfig::new(self.sys.clone());
        rc.integrator = self.cfg;
        emit_config(&rc)
    }

    /// List of violated model assumptions (empty when valid).
    fn validate(&self) -> Vec<String> {
        self.sys.validate().violations.iter().map(|v| v.to_string()).collect()
    }

    fn delta(&self, lam: f64) -> PyResult<f64> {
        delta(&self.sys.params, lam).map_err(err)
    }

    fn delta_prime(&self, lam: f64) -> PyResult<f64> {
        delta_prime(&self.sys.params, lam).map_err(err)
    }

    #[pyo3(signature = (lam, eps = 1e-12))]
    fn classify(&self, lam: f64, eps: f64) -> PyResult<String> {
        Ok(classify_origin_with(&self.sys.params, lam, eps).map_err(err)?.to_string())
    }

    /// Rows `(t, x1, x2, quadrant, is_event)`. Stops at `t_max` if given,
    /// otherwise after `events` switches (default 4).
    #[pyo3(signature = (x0, lam = 0.0, t_max = None, events = None))]
    fn simulate(
        &self,
        x0: (f64, f64),
        lam: f64,
        t_max: Option<f64>,
        events: Option<usize>,
    ) -> PyResult<Vec<TrajectoryRow>> {
        let stop = match t_max {
            Some(t) => StopCondition::Time(t),
            None => StopCondition::Events(events.unwrap_or(4)),
        };
        let tr = integrate(&self.sys, [x0.0, x0.1], lam, stop, &self.cfg).map_err(err)?;
        let n = tr.arcs.len();
        let mut rows = vec![];
        for (i, arc) in tr.arcs.iter().enumerate() {
            let last = arc.samples.len() - 1;
            for (j, &(t, x)) in arc.samples.iter().enumerate().skip(usize::from(i > 0)) {
                rows.push((t, x[0], x[1], arc.quadrant.index(), i + 1 < n && j == last));
            }
        }
        Ok(rows)
    }

    /// `(x1_out, period)` of one revolution from `(x1, 0)`.
    #[pyo3(signature = (x1, lam = 0.0))]
    fn poincare(&self, x1: f64, lam: f64) -> PyResult<(f64, f64)> {
        let s = poincare_numeric(&self.sys, x1, lam, &self.cfg).map_err(err)?;
        Ok((s.x1_out, s.period))
    }

    #[pyo3(signature = (lam = 0.0))]
    fn delta_numeric(&self, lam: f64) -> PyResult<f64> {
        delta_numeric(&self.sys, lam, &self.cfg).map_err(err)
    }

    fn find_critical_lambda<'py>(&self, py: Python<'py>, lo: f64, hi: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &find_critical_lambda(&self.sys.params, (lo, hi)).map_err(err)?)
    }

    /// Direction report at λ = 0: direction, Δ'(0), expansion fit, predicted γ.
    fn bifurcation_direction<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &analyze_direction(&self.sys, &self.cfg, &ExpansionOptions::default()).map_err(err)?)
    }

    #[pyo3(signature = (lam = 0.0))]
    fn fit_local_expansion<'py>(&self, py: Python<'py>, lam: f64) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &fit_local_expansion(&self.sys, lam, &self.cfg, &ExpansionOptions::default()).map_err(err)?)
    }

    /// One entry per λ: a branch-point dict, or `{"lambda", "error"}`.
    #[pyo3(signature = (lambdas, seeding = "previous"))]
    fn continue_branch<'py>(&self, py: Python<'py>, lambdas: Vec<f64>, seeding: &str) -> PyResult<Bound<'py, PyAny>> {
        let seeding = match seeding {
            "previous" => Seeding::Previous,
            "scaling-law" => Seeding::ScalingLaw,
            other => return Err(SwitchbifError::new_err(format!("unknown seeding {other:?}"))),
        };
        let law = match seeding {
            Seeding::ScalingLaw => analyze_direction(&self.sys, &self.cfg, &ExpansionOptions::default()).ok(),
            Seeding::Previous => None,
        };
        let opts = BranchOptions {
            seeding,
            ..Default::default()
        };
        #[derive(Serialize)]
        #[serde(untagged)]
        enum Entry {
            Point(BranchPoint),
            Failure { lambda: f64, error: String },
        }
        let entries: Vec<Entry> = continue_branch(&self.sys, &lambdas, &self.cfg, &opts, law.as_ref().map(|r| &r.expansion))
            .into_iter()
            .zip(&lambdas)
            .map(|(r, &lambda)| match r {
                Ok(p) => Entry::Point(p),
                Err(e) => Entry::Failure {
                    lambda,
                    error: format!("{}: {e}", e.kind()),
                },
            })
            .collect();
        to_py(py, &entries)
    }

    #[pyo3(signature = (lam, radius_m = 10.0, n_samples = 100_000))]
    fn check_global_conditions<'py>(
        &self,
        py: Python<'py>,
        lam: f64,
        radius_m: f64,
        n_samples: usize,
    ) -> PyResult<Bound<'py, PyAny>> {
        to_py(py, &check_global_conditions(&self.sys, lam, radius_m, n_samples).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        let p = &self.sys.params;
        format!("SwitchedSystem(a={}, b={:?}, c={:?})", p.a, p.b.coeffs, p.c.coeffs)
    }
}

/// Fit `λ = γ x1^p` to branch data; returns gamma_est, exponent_est, fit_residual.
#[pyfunction]
fn scaling_law<'py>(py: Python<'py>, lambdas: Vec<f64>, x1: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    if lambdas.len() != x1.len() {
        return Err(SwitchbifError::new_err("lambdas and x1 differ in length"));
    }
    let points: Vec<BranchPoint> = lambdas
        .iter()
        .zip(&x1)
        .map(|(&lambda, &x1_fixed)| BranchPoint {
            lambda,
            x1_fixed,
            period: f64::NAN,
            residual: 0.0,
            additional_orbits: vec![],
        })
        .collect();
    to_py(py, &fit_scaling_law(&points).map_err(err)?)
}

/// Quadrant index 1..4 of a nonzero point.
#[pyfunction]
fn quadrant(x1: f64, x2: f64) -> PyResult<u8> {
    Ok(region_of([x1, x2]).map_err(err)?.index())
}

#[pymodule]
fn switchbif(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystem>()?;
    m.add_function(wrap_pyfunction!(scaling_law, m)?)?;
    m.add_function(wrap_pyfunction!(quadrant, m)?)?;
    m.add("SwitchbifError", m.py().get_type::<SwitchbifError>())?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
