//! TOML run configuration: the system definition, integrator overrides and
//! command options.
//!
//! ```toml
//! [system]
//! a = 2
//! b_poly = ["e*pi", 1, 1]          # b(λ) = eπ + λ + λ²
//! c_poly = ["pi/e", 0, 1]
//! lambda_domain = [-2, 2]
//!
//! [system.perturbation.q1]
//! comp1 = [{ coeff = [-1], pow1 = 3, pow2 = 0 }]
//! comp2 = []
//!
//! [integrator]
//! rel_tol = 1e-10
//!
//! [run]
//! lambda = 0.1
//! ```
//!
//! Any real-valued field may be a TOML number or a string holding a constant
//! expression over `pi`, `e`, `+ - * /` and parentheses. Quadrants without a
//! `perturbation` table have a zero perturbation.

mod expr;

use std::fmt::Write as _;

use toml::{Table, Value};

pub use expr::eval_expr;

use crate::error::{Error, Result};
use crate::model::{SwitchedSystem, SystemParams};
use crate::numeric::IntegratorConfig;
use crate::poly::{LambdaPoly, MonomialTerm, PolyField};

/// Format version written into emitted documents.
pub const CONFIG_VERSION: u32 = 1;

/// The built-in benchmark system as a configuration document.
pub const PAPER_EXAMPLE_CONFIG: &str = r#"# Benchmark: a = 2, b(λ) = eπ + λ + λ², c(λ) = π/e + λ²
version = 1

[system]
a = 2
b_poly = ["e*pi", 1, 1]
c_poly = ["pi/e", 0, 1]
lambda_domain = [-2, 2]

[system.perturbation.q1]
comp1 = [{ coeff = [-1], pow1 = 3, pow2 = 0 }, { coeff = [0, -1], pow1 = 1, pow2 = 2 }]
comp2 = [{ coeff = [0, -1], pow1 = 0, pow2 = 3 }, { coeff = [-1], pow1 = 2, pow2 = 1 }]

[system.perturbation.q2]
comp1 = [{ coeff = [0, -1], pow1 = 5, pow2 = 0 }]
comp2 = [{ coeff = [0, -1], pow1 = 4, pow2 = 1 }]

[system.perturbation.q3]
comp1 = [{ coeff = [-1], pow1 = 3, pow2 = 0 }, { coeff = [0, -1], pow1 = 1, pow2 = 2 }]
comp2 = [{ coeff = [0, -1], pow1 = 0, pow2 = 3 }, { coeff = [-1], pow1 = 2, pow2 = 1 }]

[system.perturbation.q4]
comp1 = [{ coeff = [0, -1], pow1 = 5, pow2 = 0 }]
comp2 = [{ coeff = [0, -1], pow1 = 4, pow2 = 1 }]
"#;

/// Command options; unset fields fall back to per-command defaults.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOptions {
    pub lambda: Option<f64>,
    pub lambdas: Option<Vec<f64>>,
    pub x0: Option<[f64; 2]>,
    pub t_max: Option<f64>,
    pub events: Option<usize>,
    pub x1: Option<Vec<f64>>,
    pub delta_eps: Option<f64>,
    pub bracket: Option<[f64; 2]>,
    pub sweep: Option<[f64; 2]>,
    pub sweep_points: Option<usize>,
    pub expansion_x_max: Option<f64>,
    pub expansion_points: Option<usize>,
    pub scan_x_min: Option<f64>,
    pub scan_x_max: Option<f64>,
    pub scan_points: Option<usize>,
    /// "previous" or "scaling-law".
    pub seeding: Option<String>,
    pub radius_m: Option<f64>,
    pub n_samples: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SwitchedSystem,
    pub integrator: IntegratorConfig,
    pub run: RunOptions,
}

impl RunConfig {
    pub fn new(system: SwitchedSystem) -> Self {
        Self {
            system,
            integrator: IntegratorConfig::default(),
            run: RunOptions::default(),
        }
    }

    pub fn paper_example() -> Self {
        parse_config(PAPER_EXAMPLE_CONFIG).expect("built-in document is valid")
    }
}

fn perr(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

/// Typed access to one TOML table with dotted-path error locations and
/// rejection of unknown keys.
struct Section<'a> {
    path: String,
    table: &'a Table,
}

impl<'a> Section<'a> {
    fn new(path: &str, table: &'a Table, allowed: &[&str]) -> Result<Self> {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                return Err(perr(join(path, key), format!("unknown key (expected one of: {})", allowed.join(", "))));
            }
        }
        Ok(Self {
            path: path.to_string(),
            table,
        })
    }

    fn loc(&self, key: &str) -> String {
        join(&self.path, key)
    }

    fn get(&self, key: &str) -> Option<&'a Value> {
        self.table.get(key)
    }

    fn required(&self, key: &str) -> Result<&'a Value> {
        self.get(key).ok_or_else(|| perr(self.loc(key), "missing required key"))
    }

    fn sub(&self, key: &str, allowed: &[&str]) -> Result<Option<Section<'a>>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::Table(t)) => Section::new(&self.loc(key), t, allowed).map(Some),
            Some(_) => Err(perr(self.loc(key), "expected a table")),
        }
    }

    fn real(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| real(&self.loc(key), v)).transpose()
    }

    fn reals(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key).map(|v| reals(&self.loc(key), v)).transpose()
    }

    fn pair(&self, key: &str) -> Result<Option<[f64; 2]>> {
        match self.reals(key)? {
            None => Ok(None),
            Some(v) if v.len() == 2 => Ok(Some([v[0], v[1]])),
            Some(v) => Err(perr(self.loc(key), format!("expected 2 numbers, got {}", v.len()))),
        }
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        self.get(key).map(|v| count(&self.loc(key), v)).transpose()
    }

    fn string(&self, key: &str) -> Result<Option<String>> {
        match self.get(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => Err(perr(self.loc(key), "expected a string")),
        }
    }
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn real(loc: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Integer(i) => Ok(*i as f64),
        Value::Float(f) => Ok(*f),
        Value::String(s) => eval_expr(s).map_err(|m| perr(loc, m)),
        _ => Err(perr(loc, "expected a number or a constant expression string")),
    }
}

fn reals(loc: &str, v: &Value) -> Result<Vec<f64>> {
    match v {
        Value::Array(items) => items
            .iter()
            .enumerate()
            .map(|(i, x)| real(&format!("{loc}[{i}]"), x))
            .collect(),
        _ => Err(perr(loc, "expected an array of numbers")),
    }
}

fn count(loc: &str, v: &Value) -> Result<usize> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as usize),
        _ => Err(perr(loc, "expected a non-negative integer")),
    }
}

fn parse_terms(loc: &str, v: Option<&Value>) -> Result<Vec<MonomialTerm>> {
    let Some(v) = v else { return Ok(vec![]) };
    let Value::Array(items) = v else {
        return Err(perr(loc, "expected an array of {coeff, pow1, pow2} tables"));
    };
    items
        .iter()
        .enumerate()
        .map(|(i, item)| {
            let here = format!("{loc}[{i}]");
            let Value::Table(t) = item else {
                return Err(perr(&here, "expected a table {coeff, pow1, pow2}"));
            };
            let s = Section::new(&here, t, &["coeff", "pow1", "pow2"])?;
            let coeff = match s.required("coeff")? {
                Value::Array(_) => s.reals("coeff")?.unwrap_or_default(),
                scalar => vec![real(&s.loc("coeff"), scalar)?],
            };
            let pow = |key: &str| -> Result<u32> {
                let n = count(&s.loc(key), s.required(key)?)?;
                u32::try_from(n).map_err(|_| perr(s.loc(key), "exponent too large"))
            };
            Ok(MonomialTerm::new(coeff, pow("pow1")?, pow("pow2")?))
        })
        .collect()
}

fn parse_system(root: &Section) -> Result<SwitchedSystem> {
    let s = root
        .sub("system", &["a", "b_poly", "c_poly", "lambda_domain", "perturbation"])?
        .ok_or_else(|| perr("system", "missing required table"))?;
    let a = real(&s.loc("a"), s.required("a")?)?;
    s.required("b_poly")?;
    s.required("c_poly")?;
    let b = s.reals("b_poly")?.unwrap_or_default();
    let c = s.reals("c_poly")?.unwrap_or_default();
    let domain = s.pair("lambda_domain")?.unwrap_or([-1.0, 1.0]);
    let params = SystemParams::new(a, LambdaPoly::new(b), LambdaPoly::new(c), (domain[0], domain[1]));

    let mut perturbations: [PolyField; 4] = Default::default();
    if let Some(p) = s.sub("perturbation", &["q1", "q2", "q3", "q4"])? {
        for (slot, name) in ["q1", "q2", "q3", "q4"].into_iter().enumerate() {
            if let Some(q) = p.sub(name, &["comp1", "comp2"])? {
                perturbations[slot] = PolyField::new(
                    parse_terms(&q.loc("comp1"), q.get("comp1"))?,
                    parse_terms(&q.loc("comp2"), q.get("comp2"))?,
                );
            }
        }
    }
    Ok(SwitchedSystem::new(params, perturbations))
}

const INTEGRATOR_KEYS: [&str; 9] = [
    "rel_tol",
    "abs_tol",
    "max_step",
    "event_tol",
    "max_arcs",
    "h0",
    "max_steps",
    "tangency_threshold",
    "bounding_box",
];

fn parse_integrator(root: &Section) -> Result<IntegratorConfig> {
    let mut cfg = IntegratorConfig::default();
    let Some(s) = root.sub("integrator", &INTEGRATOR_KEYS)? else {
        return Ok(cfg);
    };
    let reals: [(&str, &mut f64); 7] = [
        ("rel_tol", &mut cfg.rel_tol),
        ("abs_tol", &mut cfg.abs_tol),
        ("max_step", &mut cfg.max_step),
        ("event_tol", &mut cfg.event_tol),
        ("h0", &mut cfg.h0),
        ("tangency_threshold", &mut cfg.tangency_threshold),
        ("bounding_box", &mut cfg.bounding_box),
    ];
    for (key, dst) in reals {
        if let Some(v) = s.real(key)? {
            *dst = v;
        }
    }
    if let Some(v) = s.count("max_arcs")? {
        cfg.max_arcs = v;
    }
    if let Some(v) = s.count("max_steps")? {
        cfg.max_steps = v;
    }
    Ok(cfg)
}

const RUN_KEYS: [&str; 18] = [
    "lambda",
    "lambdas",
    "x0",
    "t_max",
    "events",
    "x1",
    "delta_eps",
    "bracket",
    "sweep",
    "sweep_points",
    "expansion_x_max",
    "expansion_points",
    "scan_x_min",
    "scan_x_max",
    "scan_points",
    "seeding",
    "radius_m",
    "n_samples",
];

fn parse_run(root: &Section) -> Result<RunOptions> {
    let Some(s) = root.sub("run", &RUN_KEYS)? else {
        return Ok(RunOptions::default());
    };
    let run = RunOptions {
        lambda: s.real("lambda")?,
        lambdas: s.reals("lambdas")?,
        x0: s.pair("x0")?,
        t_max: s.real("t_max")?,
        events: s.count("events")?,
        x1: s.reals("x1")?,
        delta_eps: s.real("delta_eps")?,
        bracket: s.pair("bracket")?,
        sweep: s.pair("sweep")?,
        sweep_points: s.count("sweep_points")?,
        expansion_x_max: s.real("expansion_x_max")?,
        expansion_points: s.count("expansion_points")?,
        scan_x_min: s.real("scan_x_min")?,
        scan_x_max: s.real("scan_x_max")?,
        scan_points: s.count("scan_points")?,
        seeding: s.string("seeding")?,
        radius_m: s.real("radius_m")?,
        n_samples: s.count("n_samples")?,
    };
    if let Some(seed) = &run.seeding {
        if seed != "previous" && seed != "scaling-law" {
            return Err(perr(s.loc("seeding"), "expected \"previous\" or \"scaling-law\""));
        }
    }
    Ok(run)
}

/// Parses a document without checking the model assumptions.
pub fn parse_config_unchecked(text: &str) -> Result<RunConfig> {
    let table: Table = toml::from_str(text).map_err(|e| {
        let location = match e.span() {
            Some(span) => {
                let before = &text[..span.start.min(text.len())];
                let line = before.matches('\n').count() + 1;
                let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                format!("line {line}, column {col}")
            }
            None => "document".to_string(),
        };
        perr(location, e.message().trim().to_string())
    })?;
    let root = Section::new("", &table, &["version", "system", "integrator", "run"])?;
    if let Some(v) = root.get("version") {
        let n = count("version", v)?;
        if n != CONFIG_VERSION as usize {
            return Err(perr("version", format!("unsupported config version {n}")));
        }
    }
    Ok(RunConfig {
        system: parse_system(&root)?,
        integrator: parse_integrator(&root)?,
        run: parse_run(&root)?,
    })
}

/// Parses and validates a configuration document.
///
/// Syntax and type problems give [`Error::Parse`] with a line/column or a
/// dotted key path; violated model assumptions give [`Error::Validation`].
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg = parse_config_unchecked(text)?;
    let mut problems: Vec<String> = cfg.system.validate().violations.iter().map(|v| v.to_string()).collect();
    if let Err(e) = cfg.integrator.check() {
        problems.push(e.to_string());
    }
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Validation(problems))
    }
}

/// Shortest round-tripping TOML float literal.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:?}")
    }
}

fn fmt_reals(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|&x| fmt_real(x)).collect();
    format!("[{}]", items.join(", "))
}

fn fmt_terms(terms: &[MonomialTerm]) -> String {
    let items: Vec<String> = terms
        .iter()
        .map(|t| {
            format!(
                "{{ coeff = {}, pow1 = {}, pow2 = {} }}",
                fmt_reals(&t.coeff.coeffs),
                t.pow1,
                t.pow2
            )
        })
        .collect();
    format!("[{}]", items.join(", "))
}

/// Canonical document for `cfg`: every system and integrator field written
/// explicitly, run options only when set, reals in shortest round-trip form.
pub fn emit_config(cfg: &RunConfig) -> String {
    let mut out = String::new();
    let p = &cfg.system.params;
    let _ = writeln!(out, "version = {CONFIG_VERSION}\n");
    let _ = writeln!(out, "[system]");
    let _ = writeln!(out, "a = {}", fmt_real(p.a));
    let _ = writeln!(out, "b_poly = {}", fmt_reals(&p.b.coeffs));
    let _ = writeln!(out, "c_poly = {}", fmt_reals(&p.c.coeffs));
    let _ = writeln!(out, "lambda_domain = {}", fmt_reals(&[p.lambda_domain.0, p.lambda_domain.1]));
    for (i, field) in cfg.system.perturbations.iter().enumerate() {
        let _ = writeln!(out, "\n[system.perturbation.q{}]", i + 1);
        let _ = writeln!(out, "comp1 = {}", fmt_terms(&field.comp1));
        let _ = writeln!(out, "comp2 = {}", fmt_terms(&field.comp2));
    }

    let g = &cfg.integrator;
    let _ = writeln!(out, "\n[integrator]");
    let _ = writeln!(out, "rel_tol = {}", fmt_real(g.rel_tol));
    let _ = writeln!(out, "abs_tol = {}", fmt_real(g.abs_tol));
    let _ = writeln!(out, "max_step = {}", fmt_real(g.max_step));
    let _ = writeln!(out, "event_tol = {}", fmt_real(g.event_tol));
    let _ = writeln!(out, "max_arcs = {}", g.max_arcs);
    let _ = writeln!(out, "h0 = {}", fmt_real(g.h0));
    let _ = writeln!(out, "max_steps = {}", g.max_steps);
    let _ = writeln!(out, "tangency_threshold = {}", fmt_real(g.tangency_threshold));
    let _ = writeln!(out, "bounding_box = {}", fmt_real(g.bounding_box));

    let r = &cfg.run;
    let mut lines: Vec<String> = vec![];
    let mut real = |k: &str, v: Option<f64>| {
        if let Some(v) = v {
            lines.push(format!("{k} = {}", fmt_real(v)));
        }
    };
    real("lambda", r.lambda);
    real("t_max", r.t_max);
    real("delta_eps", r.delta_eps);
    real("expansion_x_max", r.expansion_x_max);
    real("scan_x_min", r.scan_x_min);
    real("scan_x_max", r.scan_x_max);
    real("radius_m", r.radius_m);
    let list = |k: &str, v: Option<&[f64]>, lines: &mut Vec<String>| {
        if let Some(v) = v {
            lines.push(format!("{k} = {}", fmt_reals(v)));
        }
    };
    list("lambdas", r.lambdas.as_deref(), &mut lines);
    list("x0", r.x0.as_ref().map(|v| &v[..]), &mut lines);
    list("x1", r.x1.as_deref(), &mut lines);
    list("bracket", r.bracket.as_ref().map(|v| &v[..]), &mut lines);
    list("sweep", r.sweep.as_ref().map(|v| &v[..]), &mut lines);
    for (k, v) in [
        ("events", r.events),
        ("sweep_points", r.sweep_points),
        ("expansion_points", r.expansion_points),
        ("scan_points", r.scan_points),
        ("n_samples", r.n_samples),
    ] {
        if let Some(v) = v {
            lines.push(format!("{k} = {v}"));
        }
    }
    if let Some(s) = &r.seeding {
        lines.push(format!("seeding = {}", Value::String(s.clone())));
    }
    if !lines.is_empty() {
        let _ = writeln!(out, "\n[run]");
        for l in lines {
            let _ = writeln!(out, "{l}");
        }
    }
    out
}
