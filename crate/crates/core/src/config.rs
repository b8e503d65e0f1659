//! Experiment configuration files.
//!
//! ```text
//! # comment
//! [experiment]
//! name = geodesic
//! seed = 1
//!
//! [geodesic]
//! n = 8
//! tau_end = 1
//! ```
//!
//! Sections are flat, keys are `key = value` on one line and `#` starts a
//! comment anywhere on a line. Numeric values are constant expressions
//! (`2*pi`), lists are comma separated. Every diagnostic
//! carries a 1-based line and column.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::expr::Expression;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

fn err<T>(line: usize, column: usize, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { line, column, message: message.into() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Experiment {
    DualMetric,
    Eigen,
    TransformCheck,
    Embed,
    Geodesic,
    Repro,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::DualMetric,
        Experiment::Eigen,
        Experiment::TransformCheck,
        Experiment::Embed,
        Experiment::Geodesic,
        Experiment::Repro,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::DualMetric => "dual-metric",
            Experiment::Eigen => "eigen",
            Experiment::TransformCheck => "transform-check",
            Experiment::Embed => "embed",
            Experiment::Geodesic => "geodesic",
            Experiment::Repro => "repro",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub periodic: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelSpec {
    pub name: String,
    pub scale: f64,
    pub signature: Vec<i8>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorSpec {
    /// `−i d/dx`
    Momentum,
    /// Multiplication by an expression in `x`.
    Multiplication(Expression),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    /// One expression in `t` per coordinate.
    pub curve: Vec<Expression>,
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialState {
    Random,
    Basis(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicSpec {
    pub n: usize,
    pub tau_end: f64,
    pub steps: usize,
    pub samples: usize,
    pub tau_max: f64,
    pub phi0: InitialState,
    /// Explicit diagonal of `A`; random Hermitian otherwise.
    pub a_diag: Option<Vec<f64>>,
}

/// A fully validated run description. Sections absent from the file keep the
/// defaults of the acceptance setup.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub grid: Option<GridSpec>,
    pub kernel: Option<KernelSpec>,
    pub operator: Option<OperatorSpec>,
    pub path: Option<PathSpec>,
    pub pad: f64,
    pub delta_points: usize,
    pub max_abs: usize,
    pub trials: usize,
    pub n: usize,
    pub strength: f64,
    pub schedule: Vec<f64>,
    pub axis_points: usize,
    pub geodesic: GeodesicSpec,
    pub tolerances: BTreeMap<String, f64>,
}

impl ExperimentConfig {
    pub fn defaults(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            seed: 0,
            grid: None,
            kernel: None,
            operator: None,
            path: None,
            pad: 6.0,
            delta_points: 25,
            max_abs: 10,
            trials: 20,
            n: 16,
            strength: 0.5,
            schedule: vec![4.0, 8.0, 16.0],
            axis_points: 257,
            geodesic: GeodesicSpec {
                n: 8,
                tau_end: 1.0,
                steps: 256,
                samples: 50,
                tau_max: 5.0,
                phi0: InitialState::Random,
                a_diag: None,
            },
            tolerances: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Number,
    Count,
    Seed,
    Bool,
    Ident,
    NumberList,
    IntList,
    /// Expression in `x`.
    ExprX,
    /// Comma-separated expressions in `t`.
    ExprListT,
}

/// Known keys per section. `tolerances` accepts any name and is checked
/// later against the tolerance table.
const SCHEMA: &[(&str, &[(&str, Kind)])] = &[
    ("experiment", &[("name", Kind::Ident), ("seed", Kind::Seed)]),
    (
        "grid",
        &[("lo", Kind::Number), ("hi", Kind::Number), ("points", Kind::Count), ("periodic", Kind::Bool)],
    ),
    ("kernel", &[("name", Kind::Ident), ("scale", Kind::Number), ("signature", Kind::IntList)]),
    ("operator", &[("kind", Kind::Ident), ("expr", Kind::ExprX)]),
    (
        "path",
        &[("curve", Kind::ExprListT), ("t0", Kind::Number), ("t1", Kind::Number), ("steps", Kind::Count)],
    ),
    ("dual-metric", &[("pad", Kind::Number), ("delta_points", Kind::Count)]),
    ("eigen", &[("max_abs", Kind::Count)]),
    ("transform-check", &[("trials", Kind::Count), ("n", Kind::Count), ("strength", Kind::Number)]),
    ("embed", &[("schedule", Kind::NumberList), ("axis_points", Kind::Count)]),
    (
        "geodesic",
        &[
            ("n", Kind::Count),
            ("tau_end", Kind::Number),
            ("steps", Kind::Count),
            ("samples", Kind::Count),
            ("tau_max", Kind::Number),
            ("phi0", Kind::Ident),
            ("a_diag", Kind::NumberList),
        ],
    ),
    ("tolerances", &[]),
];

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Number(f64),
    Count(usize),
    Seed(u64),
    Bool(bool),
    Ident(String),
    Numbers(Vec<f64>),
    Ints(Vec<i64>),
    Expr(Expression),
    Exprs(Vec<Expression>),
}

#[derive(Debug, Clone)]
struct Entry {
    value: Value,
    line: usize,
    column: usize,
}

type Sections = BTreeMap<String, (usize, BTreeMap<String, Entry>)>;

/// Column (1-based, in chars) of byte offset `at` within `line`.
fn col(line: &str, at: usize) -> usize {
    line[..at].chars().count() + 1
}

fn parse_value(kind: Kind, text: &str, line: usize, column: usize) -> Result<Value, ConfigError> {
    let constant = |s: &str, c: usize| -> Result<f64, ConfigError> {
        let e = Expression::parse(s, &[]).map_err(|e| ConfigError {
            line,
            column: c + e.column - 1,
            message: e.kind.to_string(),
        })?;
        let v = e.eval(&[]);
        if !v.is_finite() {
            return err(line, c, format!("`{s}` is not a finite number"));
        }
        Ok(v)
    };
    // pieces of a comma list with their columns
    let pieces = || -> Vec<(&str, usize)> {
        let mut out = Vec::new();
        let mut start = 0;
        for part in text.split(',') {
            let lead = part.len() - part.trim_start().len();
            out.push((part.trim(), column + text[..start + lead].chars().count()));
            start += part.len() + 1;
        }
        out
    };
    Ok(match kind {
        Kind::Number => Value::Number(constant(text, column)?),
        Kind::Count => match text.parse::<usize>() {
            Ok(v) => Value::Count(v),
            Err(_) => return err(line, column, format!("expected a non-negative integer, got `{text}`")),
        },
        Kind::Seed => match text.parse::<u64>() {
            Ok(v) => Value::Seed(v),
            Err(_) => return err(line, column, format!("expected a 64-bit unsigned seed, got `{text}`")),
        },
        Kind::Bool => match text {
            "true" => Value::Bool(true),
            "false" => Value::Bool(false),
            _ => return err(line, column, format!("expected `true` or `false`, got `{text}`")),
        },
        Kind::Ident => {
            if text.is_empty() || text.contains(char::is_whitespace) {
                return err(line, column, format!("expected a single word, got `{text}`"));
            }
            Value::Ident(text.to_string())
        }
        Kind::NumberList => Value::Numbers(
            pieces().into_iter().map(|(p, c)| constant(p, c)).collect::<Result<_, _>>()?,
        ),
        Kind::IntList => Value::Ints(
            pieces()
                .into_iter()
                .map(|(p, c)| {
                    p.parse::<i64>().or_else(|_| err(line, c, format!("expected an integer, got `{p}`")))
                })
                .collect::<Result<_, _>>()?,
        ),
        Kind::ExprX => Value::Expr(Expression::parse(text, &["x"]).map_err(|e| ConfigError {
            line,
            column: column + e.column - 1,
            message: e.kind.to_string(),
        })?),
        Kind::ExprListT => Value::Exprs(
            pieces()
                .into_iter()
                .map(|(p, c)| {
                    Expression::parse(p, &["t"]).map_err(|e| ConfigError {
                        line,
                        column: c + e.column - 1,
                        message: e.kind.to_string(),
                    })
                })
                .collect::<Result<_, _>>()?,
        ),
    })
}

fn lex(text: &str) -> Result<Sections, ConfigError> {
    let mut sections: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = body.len() - body.trim_start().len();
        if let Some(rest) = trimmed.strip_prefix('[') {
            let Some(name) = rest.strip_suffix(']') else {
                return err(line, col(body, indent + trimmed.len()), "section header is missing `]`");
            };
            let name = name.trim();
            if !SCHEMA.iter().any(|(s, _)| *s == name) {
                return err(line, col(body, indent + 1), format!("unknown section `{name}`"));
            }
            if sections.contains_key(name) {
                return err(line, col(body, indent + 1), format!("section `{name}` appears twice"));
            }
            sections.insert(name.to_string(), (line, BTreeMap::new()));
            current = Some(name.to_string());
            continue;
        }
        let Some(eq) = body.find('=') else {
            return err(line, col(body, indent), "expected `key = value`");
        };
        let key = body[..eq].trim();
        if key.is_empty() {
            return err(line, col(body, eq), "missing key before `=`");
        }
        let Some(section) = current.clone() else {
            return err(line, col(body, indent), format!("key `{key}` appears before any section"));
        };
        let after = &body[eq + 1..];
        let value = after.trim();
        let vstart = eq + 1 + (after.len() - after.trim_start().len());
        let vcol = col(body, vstart);
        let kcol = col(body, indent);
        let kind = if section == "tolerances" {
            Kind::Number
        } else {
            let keys = SCHEMA.iter().find(|(s, _)| *s == section).map(|(_, k)| *k).unwrap_or(&[]);
            match keys.iter().find(|(k, _)| *k == key) {
                Some((_, kind)) => *kind,
                None => {
                    return err(line, kcol, format!("unknown key `{key}` in section [{section}]"))
                }
            }
        };
        if value.is_empty() {
            return err(line, vcol, format!("key `{key}` has no value"));
        }
        let parsed = parse_value(kind, value, line, vcol)?;
        let entries = &mut sections.get_mut(&section).expect("section exists").1;
        if entries.contains_key(key) {
            return err(line, kcol, format!("key `{key}` appears twice in [{section}]"));
        }
        entries.insert(key.to_string(), Entry { value: parsed, line, column: vcol });
    }
    Ok(sections)
}

/// Parses a file whose `[experiment]` section names the experiment.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_config_for(text, None)
}

/// Parses a file for `default` when the file does not name an experiment
/// itself; a name that disagrees with `default` is an error.
pub fn parse_config_for(text: &str, default: Option<Experiment>) -> Result<ExperimentConfig, ConfigError> {
    let sections = lex(text)?;
    let get = |s: &str, k: &str| sections.get(s).and_then(|(_, e)| e.get(k));
    let header = |s: &str| sections.get(s).map(|(l, _)| *l).unwrap_or(1);

    let experiment = match get("experiment", "name") {
        Some(Entry { value: Value::Ident(name), line, column }) => {
            let e = name.parse::<Experiment>().or_else(|m| err(*line, *column, m))?;
            if let Some(d) = default {
                if d != e {
                    return err(*line, *column, format!("file is for `{e}`, not `{d}`"));
                }
            }
            e
        }
        _ => match default {
            Some(d) => d,
            None => {
                return err(header("experiment"), 1, "missing required field `name` in [experiment]")
            }
        },
    };
    let mut cfg = ExperimentConfig::defaults(experiment);

    macro_rules! take {
        ($s:expr, $k:expr, $variant:ident) => {
            match get($s, $k) {
                Some(Entry { value: Value::$variant(v), .. }) => Some(v.clone()),
                _ => None,
            }
        };
    }
    let positive = |s: &str, k: &str, v: usize| -> Result<usize, ConfigError> {
        if v == 0 {
            let e = get(s, k).expect("present");
            return err(e.line, e.column, format!("`{k}` must be positive"));
        }
        Ok(v)
    };

    if let Some(v) = take!("experiment", "seed", Seed) {
        cfg.seed = v;
    }
    if sections.contains_key("grid") {
        let need = |k: &str| err::<()>(header("grid"), 1, format!("missing required field `{k}` in [grid]"));
        let lo = take!("grid", "lo", Number);
        let hi = take!("grid", "hi", Number);
        let points = take!("grid", "points", Count);
        if lo.is_none() {
            need("lo")?;
        }
        if hi.is_none() {
            need("hi")?;
        }
        if points.is_none() {
            need("points")?;
        }
        let (lo, hi, points) = (lo.unwrap(), hi.unwrap(), points.unwrap());
        if !(hi > lo) {
            let e = get("grid", "hi").expect("present");
            return err(e.line, e.column, format!("grid needs hi > lo, got [{lo}, {hi}]"));
        }
        if points < 2 {
            let e = get("grid", "points").expect("present");
            return err(e.line, e.column, "grid needs at least 2 points");
        }
        let periodic = take!("grid", "periodic", Bool).unwrap_or(false);
        cfg.grid = Some(GridSpec { lo, hi, points, periodic });
    }
    if sections.contains_key("kernel") {
        let Some(name) = take!("kernel", "name", Ident) else {
            return err(header("kernel"), 1, "missing required field `name` in [kernel]");
        };
        let signature = match get("kernel", "signature") {
            Some(Entry { value: Value::Ints(v), line, column }) => v
                .iter()
                .map(|&s| {
                    if s == 1 || s == -1 {
                        Ok(s as i8)
                    } else {
                        err(*line, *column, format!("signature entries are +1 or -1, got {s}"))
                    }
                })
                .collect::<Result<_, _>>()?,
            _ => Vec::new(),
        };
        let scale = take!("kernel", "scale", Number).unwrap_or(1.0);
        cfg.kernel = Some(KernelSpec { name, scale, signature });
    }
    if sections.contains_key("operator") {
        let kind = get("operator", "kind");
        cfg.operator = Some(match kind {
            Some(Entry { value: Value::Ident(k), line, column }) => match k.as_str() {
                "momentum" | "derivative" => OperatorSpec::Momentum,
                "position" => OperatorSpec::Multiplication(
                    Expression::parse("x", &["x"]).expect("`x` is a valid expression"),
                ),
                "multiplication" | "custom-diagonal" => match take!("operator", "expr", Expr) {
                    Some(e) => OperatorSpec::Multiplication(e),
                    None => {
                        return err(
                            header("operator"),
                            1,
                            format!("missing required field `expr` in [operator] for kind = {k}"),
                        )
                    }
                },
                other => {
                    return err(
                        *line,
                        *column,
                        format!(
                            "unknown operator `{other}` (expected derivative, position or custom-diagonal)"
                        ),
                    )
                }
            },
            _ => return err(header("operator"), 1, "missing required field `kind` in [operator]"),
        });
    }
    if sections.contains_key("path") {
        let Some(curve) = take!("path", "curve", Exprs) else {
            return err(header("path"), 1, "missing required field `curve` in [path]");
        };
        let t0 = take!("path", "t0", Number).unwrap_or(0.0);
        let t1 = take!("path", "t1", Number).unwrap_or(1.0);
        let steps = take!("path", "steps", Count).unwrap_or(11);
        if !(t1 > t0) || steps < 2 {
            return err(header("path"), 1, "path needs t1 > t0 and steps >= 2");
        }
        cfg.path = Some(PathSpec { curve, t0, t1, steps });
    }
    if let Some(v) = take!("dual-metric", "pad", Number) {
        cfg.pad = v;
    }
    if let Some(v) = take!("dual-metric", "delta_points", Count) {
        cfg.delta_points = positive("dual-metric", "delta_points", v)?;
    }
    if let Some(v) = take!("eigen", "max_abs", Count) {
        cfg.max_abs = v;
    }
    if let Some(v) = take!("transform-check", "trials", Count) {
        cfg.trials = positive("transform-check", "trials", v)?;
    }
    if let Some(v) = take!("transform-check", "n", Count) {
        cfg.n = positive("transform-check", "n", v)?;
    }
    if let Some(v) = take!("transform-check", "strength", Number) {
        cfg.strength = v;
    }
    if let Some(v) = take!("embed", "schedule", Numbers) {
        if v.len() < 2 || v.windows(2).any(|w| !(w[1] > w[0])) || v[0] <= 0.0 {
            let e = get("embed", "schedule").expect("present");
            return err(e.line, e.column, "schedule needs two or more increasing positive L values");
        }
        cfg.schedule = v;
    }
    if let Some(v) = take!("embed", "axis_points", Count) {
        cfg.axis_points = positive("embed", "axis_points", v)?;
    }
    let g = &mut cfg.geodesic;
    if let Some(v) = take!("geodesic", "n", Count) {
        g.n = positive("geodesic", "n", v)?;
    }
    if let Some(v) = take!("geodesic", "tau_end", Number) {
        g.tau_end = v;
    }
    if let Some(v) = take!("geodesic", "steps", Count) {
        g.steps = v;
    }
    if let Some(v) = take!("geodesic", "samples", Count) {
        g.samples = positive("geodesic", "samples", v)?;
    }
    if let Some(v) = take!("geodesic", "tau_max", Number) {
        g.tau_max = v;
    }
    if let Some(Entry { value: Value::Ident(s), line, column }) = get("geodesic", "phi0") {
        g.phi0 = if s == "random" {
            InitialState::Random
        } else if let Some(k) = s.strip_prefix("basis:").and_then(|k| k.parse::<usize>().ok()) {
            InitialState::Basis(k)
        } else {
            return err(*line, *column, format!("phi0 is `random` or `basis:K`, got `{s}`"));
        };
    }
    if let Some(v) = take!("geodesic", "a_diag", Numbers) {
        g.n = v.len();
        g.a_diag = Some(v);
    }
    if let InitialState::Basis(k) = g.phi0 {
        if k >= g.n {
            let e = get("geodesic", "phi0").expect("present");
            return err(e.line, e.column, format!("basis index {k} out of range for n = {}", g.n));
        }
    }
    if let Some((_, entries)) = sections.get("tolerances") {
        for (k, e) in entries {
            if let Value::Number(v) = e.value {
                cfg.tolerances.insert(k.clone(), v);
            }
        }
    }
    Ok(cfg)
}

/// Location of a `[tolerances]` key, for diagnostics raised after parsing.
pub fn tolerance_location(text: &str, name: &str) -> Option<(usize, usize)> {
    let sections = lex(text).ok()?;
    sections.get("tolerances")?.1.get(name).map(|e| (e.line, e.column))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_geodesic_config() {
        let cfg = parse_config("[experiment]\nname = geodesic\nseed = 1\n\n[geodesic]\nn = 8\ntau_end = 1\n")
            .unwrap();
        assert_eq!(cfg.experiment, Experiment::Geodesic);
        assert_eq!(cfg.seed, 1);
        assert_eq!(cfg.geodesic.n, 8);
        assert_eq!(cfg.geodesic.tau_end, 1.0);
        assert_eq!(cfg.geodesic.steps, 256);
    }

    #[test]
    fn unknown_key_is_named_with_its_line() {
        let e = parse_config("[experiment]\nname = eigen\nfoo = 3\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 1));
        assert!(e.message.contains("`foo`"), "{e}");
        assert!(e.to_string().starts_with("line 3, column 1"));
    }

    #[test]
    fn expression_errors_carry_columns() {
        let e = parse_config("[experiment]\nname = eigen\n[operator]\nkind = multiplication\nexpr = e^(x\n")
            .unwrap_err();
        assert_eq!(e.line, 5);
        assert!(e.message.contains("unbalanced"), "{e}");
        // `e^(x` starts at column 8; the open parenthesis is at column 10
        assert!(e.column >= 10, "{e:?}");
        let e = parse_config("[experiment]\nname = embed\n[path]\ncurve = cos(t),  sin(q)\n").unwrap_err();
        assert_eq!(e.line, 4);
        assert_eq!(e.column, 22, "{e:?}");
        assert!(e.message.contains("`q`"));
    }

    #[test]
    fn missing_required_fields() {
        let e = parse_config("# nothing here\n[geodesic]\nn = 4\n").unwrap_err();
        assert!(e.message.contains("`name`"), "{e}");
        let e = parse_config("[experiment]\nname = eigen\n\n[grid]\nlo = 0\npoints = 8\n").unwrap_err();
        assert_eq!(e.line, 4);
        assert!(e.message.contains("`hi`"));
        let e = parse_config("[experiment]\nname = eigen\n[operator]\nkind = multiplication\n").unwrap_err();
        assert!(e.message.contains("`expr`"));
        let pos = parse_config("[experiment]\nname = eigen\n[operator]\nkind = position\n").unwrap();
        match pos.operator {
            Some(OperatorSpec::Multiplication(e)) => assert_eq!(e.eval(&[0.25]), 0.25),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn values_and_comments() {
        let text = "\
# eigen run on the circle
[experiment]
name = eigen   # trailing comment
seed = 18446744073709551615

[grid]
lo = 0
hi = 2*pi
points = 64
periodic = true

[kernel]
name = minkowski
signature = 1, -1

[tolerances]
eigen_integer = 1e-9
";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.seed, u64::MAX);
        let g = cfg.grid.unwrap();
        assert!((g.hi - 2.0 * std::f64::consts::PI).abs() < 1e-15);
        assert!(g.periodic);
        assert_eq!(cfg.kernel.unwrap().signature, vec![1, -1]);
        assert_eq!(cfg.tolerances.get("eigen_integer"), Some(&1e-9));
        assert_eq!(tolerance_location(text, "eigen_integer"), Some((17, 17)));
    }

    #[test]
    fn structural_errors() {
        assert_eq!(parse_config("name = eigen\n").unwrap_err().line, 1);
        let e = parse_config("[experiment\n").unwrap_err();
        assert_eq!((e.line, e.column), (1, 12));
        let e = parse_config("[experiment]\nname = eigen\n[bogus]\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 2));
        let e = parse_config("[experiment]\nname = eigen\nseed = -1\n").unwrap_err();
        assert_eq!((e.line, e.column), (3, 8));
        let e = parse_config("[experiment]\nname = eigen\n[grid]\nlo = 1\nhi = 0\npoints = 4\n").unwrap_err();
        assert_eq!(e.line, 5);
        let e = parse_config("[experiment]\nname = nope\n").unwrap_err();
        assert!(e.message.contains("nope"));
        let e = parse_config_for("[experiment]\nname = eigen\n", Some(Experiment::Embed)).unwrap_err();
        assert_eq!(e.line, 2);
        let cfg = parse_config_for("[embed]\nschedule = 2, 4\n", Some(Experiment::Embed)).unwrap();
        assert_eq!(cfg.schedule, vec![2.0, 4.0]);
        let e = parse_config_for("[embed]\nschedule = 4, 2\n", Some(Experiment::Embed)).unwrap_err();
        assert_eq!((e.line, e.column), (2, 12));
    }
}
