use serde::Serialize;

use switchbif_core::analytic::{classify_delta, delta, delta_prime, OriginClass, DEFAULT_DELTA_EPS};
use switchbif_core::bifurcation::{
    analyze_direction, analyze_direction_at, check_global_conditions, continue_branch, find_critical_lambda,
    fit_scaling_law, verify_orbit, BranchOptions, BranchPoint, CriticalPoint, Direction, ExpansionFit,
    ExpansionOptions, GlobalCheckReport, ScalingFit, Seeding, DEFAULT_GLOBAL_SAMPLES, DEFAULT_RADIUS_M,
};
use switchbif_core::config::{emit_config, RunConfig};
use switchbif_core::numeric::{integrate, poincare_numeric, StopCondition};
use switchbif_core::{Error, Result};

use crate::args::Command;
use crate::format::{config_digest, json, real, Csv};

/// One output document. `file` is its name under `--out`; without `--out`
/// primary artifacts go to standard output and secondary ones to standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub file: &'static str,
    pub content: String,
    pub primary: bool,
}

impl Artifact {
    fn primary(file: &'static str, content: String) -> Self {
        Self {
            file,
            content,
            primary: true,
        }
    }
}

/// Result of a command: its outputs plus an error that should still set the
/// exit status after the outputs are written (for example a λ without orbit).
#[derive(Debug)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub failure: Option<Error>,
}

impl From<Vec<Artifact>> for Outcome {
    fn from(artifacts: Vec<Artifact>) -> Self {
        Self {
            artifacts,
            failure: None,
        }
    }
}

fn missing(what: &str) -> Error {
    Error::InvalidArgument(format!("{what} is required (flag or [run] option)"))
}

/// Executes `cmd` on an already parsed and validated configuration.
pub fn run_command(cmd: &Command, cfg: &RunConfig) -> Result<Outcome> {
    let digest = config_digest(&emit_config(cfg));
    let sys = &cfg.system;
    let icfg = &cfg.integrator;
    let run = &cfg.run;
    match cmd {
        Command::Validate => validate(cfg, &digest),
        Command::EmitConfig => Ok(vec![Artifact::primary("config.toml", emit_config(cfg))].into()),

        Command::Simulate(_) => {
            let lambda = run.lambda.unwrap_or(0.0);
            let x0 = run.x0.unwrap_or([1.0, 0.0]);
            let stop = match (run.t_max, run.events) {
                (Some(t), _) => StopCondition::Time(t),
                (None, Some(n)) => StopCondition::Events(n),
                (None, None) => StopCondition::Events(4),
            };
            let tr = integrate(sys, x0, lambda, stop, icfg)?;
            let mut csv = Csv::new(&digest, &["t", "x1", "x2", "quadrant", "event"]);
            let n_arcs = tr.arcs.len();
            for (i, arc) in tr.arcs.iter().enumerate() {
                let last = arc.samples.len() - 1;
                for (j, &(t, x)) in arc.samples.iter().enumerate().skip(usize::from(i > 0)) {
                    let event = i + 1 < n_arcs && j == last;
                    csv.row(&[
                        real(t),
                        real(x[0]),
                        real(x[1]),
                        arc.quadrant.index().to_string(),
                        u8::from(event).to_string(),
                    ]);
                }
            }
            Ok(vec![Artifact::primary("trajectory.csv", csv.finish())].into())
        }

        Command::Poincare(_) => {
            let lambda = run.lambda.unwrap_or(0.0);
            let xs = run.x1.as_ref().ok_or_else(|| missing("x1"))?;
            let mut csv = Csv::new(&digest, &["x1_in", "x1_out", "period", "ratio", "residual"]);
            for &x in xs {
                let s = poincare_numeric(sys, x, lambda, icfg)?;
                csv.row(&[real(s.x1_in), real(s.x1_out), real(s.period), real(s.ratio()), real(s.residual())]);
            }
            Ok(vec![Artifact::primary("poincare.csv", csv.finish())].into())
        }

        Command::Classify(_) => {
            #[derive(Serialize)]
            struct Report {
                lambda: f64,
                delta: f64,
                delta_prime: f64,
                delta_eps: f64,
                class: OriginClass,
            }
            let lambda = run.lambda.unwrap_or(0.0);
            let eps = run.delta_eps.unwrap_or(DEFAULT_DELTA_EPS);
            let d = delta(&sys.params, lambda)?;
            let rep = Report {
                lambda,
                delta: d,
                delta_prime: delta_prime(&sys.params, lambda)?,
                delta_eps: eps,
                class: classify_delta(d, eps),
            };
            Ok(vec![Artifact::primary("classify.json", json(&digest, &rep))].into())
        }

        Command::DeltaSweep(_) => {
            let (lo, hi) = sys.params.lambda_domain;
            let [from, to] = run.sweep.unwrap_or([lo, hi]);
            let from = if from.is_nan() { lo } else { from };
            let to = if to.is_nan() { hi } else { to };
            let n = run.sweep_points.unwrap_or(101);
            if n < 2 {
                return Err(Error::InvalidArgument("delta-sweep needs at least 2 points".into()));
            }
            let mut csv = Csv::new(&digest, &["lambda", "delta", "delta_prime"]);
            for i in 0..n {
                let l = if i + 1 == n { to } else { from + (to - from) * i as f64 / (n - 1) as f64 };
                csv.row(&[real(l), real(delta(&sys.params, l)?), real(delta_prime(&sys.params, l)?)]);
            }
            Ok(vec![Artifact::primary("delta_sweep.csv", csv.finish())].into())
        }

        Command::Bifurcate(_) => {
            #[derive(Serialize)]
            struct Report {
                critical: CriticalPoint,
                direction: Direction,
                expansion: ExpansionFit,
                gamma_predicted: f64,
            }
            let (lo, hi) = sys.params.lambda_domain;
            let [a, b] = run.bracket.unwrap_or([lo, hi]);
            let critical = find_critical_lambda(&sys.params, (a, b))?;
            let rep = analyze_direction_at(sys, critical.lambda, icfg, &expansion_options(cfg))?;
            let out = Report {
                critical,
                direction: rep.direction,
                expansion: rep.expansion,
                gamma_predicted: rep.gamma_predicted,
            };
            Ok(vec![Artifact::primary("bifurcate.json", json(&digest, &out))].into())
        }

        Command::Branch(_) => branch(cfg, &digest),

        Command::VerifyGlobal(_) => {
            let lambda = run.lambda.ok_or_else(|| missing("lambda"))?;
            let rep: GlobalCheckReport = check_global_conditions(
                sys,
                lambda,
                run.radius_m.unwrap_or(DEFAULT_RADIUS_M),
                run.n_samples.unwrap_or(DEFAULT_GLOBAL_SAMPLES),
            )?;
            Ok(vec![Artifact::primary("global.json", json(&digest, &rep))].into())
        }
    }
}

fn expansion_options(cfg: &RunConfig) -> ExpansionOptions {
    let d = ExpansionOptions::default();
    ExpansionOptions {
        x_max: cfg.run.expansion_x_max.unwrap_or(d.x_max),
        points: cfg.run.expansion_points.unwrap_or(d.points),
        ..d
    }
}

fn validate(cfg: &RunConfig, digest: &str) -> Result<Outcome> {
    #[derive(Serialize)]
    struct Item {
        field: String,
        message: String,
        witness: String,
    }
    #[derive(Serialize)]
    struct Report {
        valid: bool,
        violations: Vec<Item>,
        warnings: Vec<String>,
    }
    let report = cfg.system.validate();
    let mut violations: Vec<Item> = report
        .violations
        .iter()
        .map(|v| Item {
            field: v.field.clone(),
            message: v.message.clone(),
            witness: v.witness.clone(),
        })
        .collect();
    if let Err(e) = cfg.integrator.check() {
        violations.push(Item {
            field: "integrator".into(),
            message: e.to_string(),
            witness: String::new(),
        });
    }
    let failure = (!violations.is_empty())
        .then(|| Error::Validation(violations.iter().map(|v| format!("{}: {}", v.field, v.message)).collect()));
    let rep = Report {
        valid: violations.is_empty(),
        violations,
        warnings: cfg.integrator.warnings(),
    };
    Ok(Outcome {
        artifacts: vec![Artifact::primary("validate.json", json(digest, &rep))],
        failure,
    })
}

fn branch(cfg: &RunConfig, digest: &str) -> Result<Outcome> {
    #[derive(Serialize)]
    struct FitReport {
        points_used: usize,
        scaling_fit: Option<ScalingFit>,
        scaling_fit_error: Option<String>,
        expansion: Option<ExpansionFit>,
        gamma_predicted: Option<f64>,
    }
    let sys = &cfg.system;
    let run = &cfg.run;
    let lambdas = run.lambdas.as_ref().ok_or_else(|| missing("lambdas"))?;
    let d = BranchOptions::default();
    let opts = BranchOptions {
        x_min: run.scan_x_min.unwrap_or(d.x_min),
        x_max: run.scan_x_max.unwrap_or(d.x_max),
        scan_points: run.scan_points.unwrap_or(d.scan_points),
        seeding: match run.seeding.as_deref() {
            None | Some("previous") => Seeding::Previous,
            Some("scaling-law") => Seeding::ScalingLaw,
            Some(other) => return Err(Error::InvalidArgument(format!("unknown seeding {other:?}"))),
        },
    };
    let direction = match opts.seeding {
        Seeding::ScalingLaw => analyze_direction(sys, &cfg.integrator, &expansion_options(cfg)).ok(),
        Seeding::Previous => None,
    };
    let results = continue_branch(sys, lambdas, &cfg.integrator, &opts, direction.as_ref().map(|r| &r.expansion));

    let mut csv = Csv::new(
        digest,
        &[
            "lambda",
            "x1_fixed",
            "period",
            "residual",
            "verified_x1_out",
            "switch_events",
            "status",
            "additional_orbits",
        ],
    );
    let mut found: Vec<BranchPoint> = vec![];
    let mut failure = None;
    for (&l, r) in lambdas.iter().zip(results) {
        match r.and_then(|p| verify_orbit(sys, &p, &cfg.integrator).map(|v| (p, v))) {
            Ok((p, (x_out, events))) => {
                let extra: Vec<String> = p.additional_orbits.iter().map(|&x| real(x)).collect();
                csv.row(&[
                    real(p.lambda),
                    real(p.x1_fixed),
                    real(p.period),
                    real(p.residual),
                    real(x_out),
                    events.to_string(),
                    "ok".into(),
                    extra.join(";"),
                ]);
                found.push(p);
            }
            Err(e) => {
                let nan = real(f64::NAN);
                csv.row(&[
                    real(l),
                    nan.clone(),
                    nan.clone(),
                    nan.clone(),
                    nan,
                    "0".into(),
                    e.kind().into(),
                    String::new(),
                ]);
                failure.get_or_insert(e);
            }
        }
    }
    let fit = fit_scaling_law(&found);
    let rep = FitReport {
        points_used: found.len(),
        scaling_fit_error: fit.as_ref().err().map(|e| e.to_string()),
        scaling_fit: fit.ok(),
        gamma_predicted: direction.as_ref().map(|r| r.gamma_predicted),
        expansion: direction.map(|r| r.expansion),
    };
    Ok(Outcome {
        artifacts: vec![
            Artifact::primary("branch.csv", csv.finish()),
            Artifact {
                file: "scaling_fit.json",
                content: json(digest, &rep),
                primary: false,
            },
        ],
        failure,
    })
}
