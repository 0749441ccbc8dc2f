//! Scenario documents: strict parsing, validation and canonical emission.

use std::cell::RefCell;
use std::collections::BTreeMap;

use mmdegree::galerkin::{Domain, Schedule};
use mmdegree::harness::TheoremId;
use mmdegree::setval::{gallery, MonotoneMap, Param, ParamMap};
use mmdegree::space::{Sequence, SpacePair};
use serde_json::{json, Map, Value};
use thiserror::Error;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Dotted path of the offending field, `$` for the document root.
    pub field: String,
    pub message: String,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("schema error: {}", format_violations(.0))]
    Schema(Vec<Violation>),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| format!("{}: {}", x.field, x.message)).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Degree,
    Homotopy,
    Solve,
    Theorem,
}

impl Mode {
    pub fn key(&self) -> &'static str {
        match self {
            Mode::Degree => "degree",
            Mode::Homotopy => "homotopy",
            Mode::Solve => "solve",
            Mode::Theorem => "theorem",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    JsonCsv,
}

impl Format {
    pub fn key(&self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::JsonCsv => "json+csv",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "json" => Some(Format::Json),
            "json+csv" => Some(Format::JsonCsv),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpaceSpec {
    pub p_x: f64,
    pub p_y: f64,
    pub weights: Sequence<f64>,
}

impl SpaceSpec {
    pub fn build(&self) -> mmdegree::Result<SpacePair<f64>> {
        SpacePair::new(self.p_x, self.p_y, self.weights.clone())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpec {
    pub name: String,
    pub params: ParamMap<f64>,
}

impl OperatorSpec {
    pub fn build(&self, sp: &SpacePair<f64>) -> mmdegree::Result<MonotoneMap<f64>> {
        gallery(&self.name, &self.params, sp)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleSpec {
    pub n_list: Vec<usize>,
    /// `None` is `"auto"`.
    pub eps_reg: Option<f64>,
    /// `None` is `"halving"`.
    pub eps_n: Option<Vec<f64>>,
    pub window: usize,
}

impl ScheduleSpec {
    pub fn build(&self) -> Schedule<f64> {
        Schedule { n_list: self.n_list.clone(), eps_reg: self.eps_reg, eps_n: self.eps_n.clone(), window: self.window }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomotopySpec {
    /// The family is `(1 - t) operator + t to`.
    pub to: OperatorSpec,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremSpec {
    pub id: TheoremId,
    /// `r` of `B_r`; ignored by the surjectivity replay, which searches it.
    pub radius: Option<f64>,
    pub cap: Option<f64>,
    pub targets: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub path: String,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Budgets {
    pub boxes: usize,
    pub grid_nodes: usize,
    pub boundary_grid: Option<usize>,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { boxes: 200_000, grid_nodes: 1_000_000_000_000, boundary_grid: None }
    }
}

/// What a scenario is expected to produce; checked and echoed in the report.
#[derive(Debug, Clone, PartialEq)]
pub enum Expectation {
    Value(i64),
    Error(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: Option<String>,
    pub space: SpaceSpec,
    pub operator: OperatorSpec,
    /// Target `f₀ ∈ X*`: the scenario studies `T - f₀`.
    pub shift: Option<Vec<f64>>,
    pub domain: Domain<f64>,
    pub schedule: ScheduleSpec,
    pub mode: Mode,
    pub homotopy: Option<HomotopySpec>,
    pub theorem: Option<TheoremSpec>,
    pub tol: f64,
    pub output: OutputSpec,
    pub seed: u64,
    pub budgets: Budgets,
    pub expect: Option<Expectation>,
}

impl Scenario {
    /// `T`, shifted by the target when one is given.
    pub fn build_operator(&self, sp: &SpacePair<f64>) -> mmdegree::Result<MonotoneMap<f64>> {
        let t = self.operator.build(sp)?;
        Ok(match &self.shift {
            Some(f0) => mmdegree::setval::gallery::shifted(&t, f0, sp),
            None => t,
        })
    }
}

const TOP_KEYS: &[&str] = &[
    "schema",
    "name",
    "description",
    "space",
    "operator",
    "shift",
    "domain",
    "schedule",
    "mode",
    "homotopy",
    "theorem",
    "tol",
    "output",
    "seed",
    "budgets",
    "expect",
];

struct Walker {
    violations: RefCell<Vec<Violation>>,
}

impl Walker {
    fn fail(&self, field: &str, message: impl Into<String>) {
        self.violations.borrow_mut().push(Violation { field: field.to_string(), message: message.into() });
    }

    fn object<'a>(&self, v: &'a Value, field: &str, allowed: &[&str]) -> Option<&'a Map<String, Value>> {
        let Some(m) = v.as_object() else {
            self.fail(field, "must be an object");
            return None;
        };
        for k in m.keys() {
            if !allowed.contains(&k.as_str()) {
                self.fail(&join(field, k), format!("unknown key `{k}`"));
            }
        }
        Some(m)
    }

    fn number(&self, v: &Value, field: &str) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => {
                self.fail(field, "must be a finite number");
                None
            }
        }
    }

    fn positive(&self, v: &Value, field: &str) -> Option<f64> {
        let x = self.number(v, field)?;
        if x > 0.0 {
            Some(x)
        } else {
            self.fail(field, "must be positive");
            None
        }
    }

    fn count(&self, v: &Value, field: &str) -> Option<usize> {
        match v.as_u64() {
            Some(x) => Some(x as usize),
            None => {
                self.fail(field, "must be a nonnegative integer");
                None
            }
        }
    }

    fn numbers(&self, v: &Value, field: &str) -> Option<Vec<f64>> {
        let Some(a) = v.as_array() else {
            self.fail(field, "must be a list of numbers");
            return None;
        };
        let mut out = Vec::with_capacity(a.len());
        let mut ok = true;
        for (i, x) in a.iter().enumerate() {
            match self.number(x, &format!("{field}[{i}]")) {
                Some(x) => out.push(x),
                None => ok = false,
            }
        }
        ok.then_some(out)
    }

    fn string<'a>(&self, v: &'a Value, field: &str) -> Option<&'a str> {
        let s = v.as_str();
        if s.is_none() {
            self.fail(field, "must be a string");
        }
        s
    }

    fn required<'a>(&self, m: &'a Map<String, Value>, field: &str, key: &str) -> Option<&'a Value> {
        let v = m.get(key);
        if v.is_none() {
            self.fail(&join(field, key), "is required");
        }
        v
    }

    fn weights(&self, v: &Value, field: &str) -> Option<Sequence<f64>> {
        let s = if v.is_number() {
            Sequence::constant(self.number(v, field)?)
        } else if let Some(m) = v.as_object() {
            if m.contains_key("values") || m.contains_key("tail") {
                let m = self.object(v, field, &["values", "tail"])?;
                let values = self.numbers(self.required(m, field, "values")?, &join(field, "values"));
                let tail = self.number(self.required(m, field, "tail")?, &join(field, "tail"));
                Sequence::Explicit { values: values?, tail: tail? }
            } else {
                let m = self.object(v, field, &["a", "b", "c"])?;
                let get = |k: &str| match m.get(k) {
                    Some(x) => self.number(x, &join(field, k)),
                    None => Some(0.0),
                };
                let (a, b, c) = (get("a"), get("b"), get("c"));
                Sequence::Rational { a: a?, b: b?, c: c? }
            }
        } else {
            self.fail(field, "must be a number, {values, tail} or {a, b, c}");
            return None;
        };
        Some(s)
    }

    fn operator(&self, v: &Value, field: &str) -> Option<OperatorSpec> {
        let m = self.object(v, field, &["name", "params"])?;
        let name = self.string(self.required(m, field, "name")?, &join(field, "name"))?.to_string();
        let params = match m.get("params") {
            None => ParamMap::new(),
            Some(p) => self.params(p, &join(field, "params"))?,
        };
        Some(OperatorSpec { name, params })
    }

    fn params(&self, v: &Value, field: &str) -> Option<ParamMap<f64>> {
        let Some(m) = v.as_object() else {
            self.fail(field, "must be an object");
            return None;
        };
        let mut out = ParamMap::new();
        let mut ok = true;
        for (k, x) in m {
            match self.param(x, &join(field, k)) {
                Some(p) => {
                    out.insert(k.clone(), p);
                }
                None => ok = false,
            }
        }
        ok.then_some(out)
    }

    fn param(&self, v: &Value, field: &str) -> Option<Param<f64>> {
        if v.is_number() {
            return self.number(v, field).map(Param::Number);
        }
        if v.is_array() {
            return self.numbers(v, field).map(Param::List);
        }
        if let Some(m) = v.as_object() {
            if m.contains_key("name") {
                return self.operator(v, field).map(|o| Param::Operator { name: o.name, params: o.params });
            }
            let m = self.object(v, field, &["a", "b", "c"])?;
            let get = |k: &str| match m.get(k) {
                Some(x) => self.number(x, &join(field, k)),
                None => Some(0.0),
            };
            let (a, b, c) = (get("a"), get("b"), get("c"));
            return Some(Param::Rule { a: a?, b: b?, c: c? });
        }
        self.fail(field, "must be a number, a list, a rule {a, b, c} or an operator {name, params}");
        None
    }

    fn domain(&self, v: &Value, field: &str, p_default: Option<f64>) -> Option<Domain<f64>> {
        let m = self.object(v, field, &["ball", "box"])?;
        if m.len() != 1 {
            self.fail(field, "must have exactly one of `ball`, `box`");
            return None;
        }
        if let Some(b) = m.get("ball") {
            let f = join(field, "ball");
            let b = self.object(b, &f, &["radius", "p", "center"])?;
            let radius = self.positive(self.required(b, &f, "radius")?, &join(&f, "radius"));
            let p = match b.get("p") {
                Some(x) => self.number(x, &join(&f, "p")),
                None => p_default,
            };
            let center = match b.get("center") {
                Some(c) => self.numbers(c, &join(&f, "center")),
                None => Some(Vec::new()),
            };
            let d = Domain::Ball { center: center?, radius: radius?, p: p? };
            if let Err(e) = d.validate() {
                self.fail(&f, error_detail(&e));
            }
            return Some(d);
        }
        let f = join(field, "box");
        let b = self.object(&m["box"], &f, &["lo", "hi"])?;
        let lo = self.numbers(self.required(b, &f, "lo")?, &join(&f, "lo"));
        let hi = self.numbers(self.required(b, &f, "hi")?, &join(&f, "hi"));
        let d = Domain::Box { lo: lo?, hi: hi? };
        if let Err(e) = d.validate() {
            self.fail(&f, error_detail(&e));
        }
        Some(d)
    }

    fn schedule(&self, v: Option<&Value>, field: &str) -> Option<ScheduleSpec> {
        let Some(v) = v else {
            return Some(ScheduleSpec { n_list: (1..=6).collect(), eps_reg: None, eps_n: None, window: 3 });
        };
        let m = self.object(v, field, &["n_list", "eps_reg", "eps_n", "window"])?;
        let n_list = match m.get("n_list") {
            Some(Value::Array(a)) => {
                let mut out = Vec::new();
                for (i, x) in a.iter().enumerate() {
                    out.push(self.count(x, &format!("{field}.n_list[{i}]"))?);
                }
                out
            }
            Some(_) => {
                self.fail(&join(field, "n_list"), "must be a list of integers");
                return None;
            }
            None => (1..=6).collect(),
        };
        let eps_reg = match m.get("eps_reg") {
            None => None,
            Some(Value::String(s)) if s == "auto" => None,
            Some(x) => Some(self.positive(x, &join(field, "eps_reg"))?),
        };
        let eps_n = match m.get("eps_n") {
            None => None,
            Some(Value::String(s)) if s == "halving" => None,
            Some(x) => Some(self.numbers(x, &join(field, "eps_n"))?),
        };
        let window = match m.get("window") {
            Some(x) => self.count(x, &join(field, "window"))?,
            None => 3,
        };
        let s = ScheduleSpec { n_list, eps_reg, eps_n, window };
        if let Err(e) = s.build().validate() {
            self.fail(field, error_detail(&e));
        }
        Some(s)
    }
}

fn join(field: &str, key: &str) -> String {
    if field == "$" {
        key.to_string()
    } else {
        format!("{field}.{key}")
    }
}

fn error_detail(e: &mmdegree::Error) -> String {
    match e {
        mmdegree::Error::BadParams { detail, .. } => detail.clone(),
        other => other.to_string(),
    }
}

/// Parses and validates a scenario document; all schema violations are
/// collected before returning.
pub fn parse_scenario(text: &[u8]) -> Result<Scenario, ScenarioError> {
    let text = std::str::from_utf8(text).map_err(|e| {
        let line = 1 + bytecount_newlines(&text[..e.valid_up_to()]);
        ScenarioError::Parse { line, column: 0, message: "document is not valid UTF-8".into() }
    })?;
    let doc: Value = serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let w = Walker { violations: RefCell::new(Vec::new()) };
    let result = walk(&w, &doc);
    let mut violations = w.violations.into_inner();
    match result {
        Some(s) if violations.is_empty() => Ok(s),
        _ => {
            if violations.is_empty() {
                violations.push(Violation { field: "$".into(), message: "invalid document".into() });
            }
            Err(ScenarioError::Schema(violations))
        }
    }
}

fn bytecount_newlines(b: &[u8]) -> usize {
    b.iter().filter(|&&c| c == b'\n').count()
}

fn walk(w: &Walker, doc: &Value) -> Option<Scenario> {
    let root = w.object(doc, "$", TOP_KEYS)?;
    match root.get("schema") {
        Some(v) if v.as_u64() == Some(SCHEMA_VERSION) => {}
        Some(_) => w.fail("schema", format!("unsupported schema version (expected {SCHEMA_VERSION})")),
        None => w.fail("schema", "is required"),
    }
    let name = root.get("name").and_then(|v| w.string(v, "name")).map(str::to_string);
    if name.is_none() && !root.contains_key("name") {
        w.fail("name", "is required");
    }
    if let Some(n) = &name {
        if n.is_empty() || !n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
            w.fail("name", "must be a nonempty identifier of letters, digits, `_` or `-`");
        }
    }
    let description = match root.get("description") {
        Some(v) => w.string(v, "description").map(str::to_string),
        None => None,
    };

    let space = root.get("space").and_then(|v| {
        let m = w.object(v, "space", &["p_x", "p_y", "weights"])?;
        let p_x = w.number(w.required(m, "space", "p_x")?, "space.p_x");
        let p_y = w.number(w.required(m, "space", "p_y")?, "space.p_y");
        let weights = match m.get("weights") {
            Some(x) => w.weights(x, "space.weights"),
            None => Some(Sequence::constant(1.0)),
        };
        let spec = SpaceSpec { p_x: p_x?, p_y: p_y?, weights: weights? };
        if let Err(e) = spec.build() {
            w.fail("space", error_detail(&e));
            return None;
        }
        Some(spec)
    });
    if !root.contains_key("space") {
        w.fail("space", "is required");
    }
    let sp = space.as_ref().and_then(|s| s.build().ok());

    let check_operator = |o: &OperatorSpec, field: &str| {
        if let Some(sp) = &sp {
            if let Err(e) = o.build(sp) {
                w.fail(field, format!("{}: {}", e.name(), error_detail(&e)));
            }
        }
    };
    let operator = w.required(root, "$", "operator").and_then(|v| w.operator(v, "operator"));
    if let Some(o) = &operator {
        check_operator(o, "operator");
    }
    let shift = root.get("shift").and_then(|v| w.numbers(v, "shift"));
    let domain = w.required(root, "$", "domain").and_then(|v| w.domain(v, "domain", space.as_ref().map(|s| s.p_y)));
    let schedule = w.schedule(root.get("schedule"), "schedule");

    let mode = match root.get("mode") {
        None => Some(Mode::Degree),
        Some(v) => match v.as_str() {
            Some("degree") => Some(Mode::Degree),
            Some("homotopy") => Some(Mode::Homotopy),
            Some("solve") => Some(Mode::Solve),
            Some("theorem") => Some(Mode::Theorem),
            _ => {
                w.fail("mode", "must be one of degree, homotopy, solve, theorem");
                None
            }
        },
    };

    let homotopy = root.get("homotopy").and_then(|v| {
        let m = w.object(v, "homotopy", &["to", "samples"])?;
        let to = w.operator(w.required(m, "homotopy", "to")?, "homotopy.to")?;
        check_operator(&to, "homotopy.to");
        let samples = match m.get("samples") {
            Some(x) => w.count(x, "homotopy.samples")?,
            None => 11,
        };
        if samples < 2 {
            w.fail("homotopy.samples", "must be at least 2");
        }
        Some(HomotopySpec { to, samples })
    });
    let theorem = root.get("theorem").and_then(|v| {
        let m = w.object(v, "theorem", &["id", "radius", "cap", "targets"])?;
        let id_str = w.string(w.required(m, "theorem", "id")?, "theorem.id")?;
        let Some(id) = TheoremId::parse(id_str) else {
            w.fail("theorem.id", "must be one of defigueiredo_zero, range_Nr, browder_surjectivity");
            return None;
        };
        let radius = match m.get("radius") {
            Some(x) => Some(w.positive(x, "theorem.radius")?),
            None => None,
        };
        let cap = match m.get("cap") {
            Some(x) => Some(w.positive(x, "theorem.cap")?),
            None => None,
        };
        let targets = match m.get("targets") {
            None => Vec::new(),
            Some(Value::Array(a)) => {
                let mut out = Vec::new();
                for (i, t) in a.iter().enumerate() {
                    out.push(w.numbers(t, &format!("theorem.targets[{i}]"))?);
                }
                out
            }
            Some(_) => {
                w.fail("theorem.targets", "must be a list of lists");
                return None;
            }
        };
        match id {
            TheoremId::DefigueiredoZero => {
                if radius.is_none() {
                    w.fail("theorem.radius", "is required for defigueiredo_zero");
                }
                if !targets.is_empty() || cap.is_some() {
                    w.fail("theorem", "defigueiredo_zero takes no targets or cap");
                }
            }
            TheoremId::RangeNr => {
                if radius.is_none() || cap.is_none() {
                    w.fail("theorem", "range_Nr needs radius and cap");
                }
                if targets.is_empty() {
                    w.fail("theorem.targets", "must be nonempty");
                }
            }
            TheoremId::BrowderSurjectivity => {
                if radius.is_some() || cap.is_some() {
                    w.fail("theorem", "browder_surjectivity searches its radius; drop radius and cap");
                }
                if targets.is_empty() {
                    w.fail("theorem.targets", "must be nonempty");
                }
            }
        }
        Some(TheoremSpec { id, radius, cap, targets })
    });
    match mode {
        Some(Mode::Homotopy) if homotopy.is_none() && !root.contains_key("homotopy") => {
            w.fail("homotopy", "is required in homotopy mode")
        }
        Some(Mode::Theorem) if theorem.is_none() && !root.contains_key("theorem") => {
            w.fail("theorem", "is required in theorem mode")
        }
        Some(m) => {
            if m != Mode::Homotopy && root.contains_key("homotopy") {
                w.fail("homotopy", "only allowed in homotopy mode");
            }
            if m != Mode::Theorem && root.contains_key("theorem") {
                w.fail("theorem", "only allowed in theorem mode");
            }
        }
        None => {}
    }
    if mode == Some(Mode::Theorem) {
        if let Some(d) = &domain {
            if !matches!(d, Domain::Ball { center, .. } if center.iter().all(|c| *c == 0.0)) {
                w.fail("domain", "theorem mode uses centered balls");
            }
        }
        if root.contains_key("shift") {
            w.fail("shift", "theorem mode takes its targets from `theorem.targets`");
        }
    }

    let tol = match root.get("tol") {
        Some(v) => w.positive(v, "tol"),
        None => Some(1e-6),
    };
    let output = match root.get("output") {
        None => name.as_ref().map(|n| OutputSpec { path: format!("{n}.report.json"), format: Format::Json }),
        Some(v) => (|| {
            let m = w.object(v, "output", &["path", "format"])?;
            let path = match m.get("path") {
                Some(p) => w.string(p, "output.path")?.to_string(),
                None => format!("{}.report.json", name.as_deref()?),
            };
            let format = match m.get("format") {
                None => Format::Json,
                Some(f) => match f.as_str().and_then(Format::parse) {
                    Some(f) => f,
                    None => {
                        w.fail("output.format", "must be `json` or `json+csv`");
                        return None;
                    }
                },
            };
            Some(OutputSpec { path, format })
        })(),
    };
    let seed = match root.get("seed") {
        Some(v) => v.as_u64().or_else(|| {
            w.fail("seed", "must be a nonnegative integer");
            None
        }),
        None => Some(0),
    };
    let budgets = match root.get("budgets") {
        None => Some(Budgets::default()),
        Some(v) => (|| {
            let m = w.object(v, "budgets", &["boxes", "grid_nodes", "boundary_grid"])?;
            let d = Budgets::default();
            let boxes = m.get("boxes").map_or(Some(d.boxes), |x| w.count(x, "budgets.boxes"));
            let grid_nodes = m.get("grid_nodes").map_or(Some(d.grid_nodes), |x| w.count(x, "budgets.grid_nodes"));
            let boundary_grid = match m.get("boundary_grid") {
                None => Some(None),
                Some(x) => w.count(x, "budgets.boundary_grid").map(Some),
            };
            Some(Budgets { boxes: boxes?, grid_nodes: grid_nodes?, boundary_grid: boundary_grid? })
        })(),
    };
    let expect = root.get("expect").and_then(|v| {
        let m = w.object(v, "expect", &["value", "error"])?;
        match (m.get("value"), m.get("error")) {
            (Some(x), None) => match x.as_i64() {
                Some(d) => Some(Expectation::Value(d)),
                None => {
                    w.fail("expect.value", "must be an integer");
                    None
                }
            },
            (None, Some(e)) => w.string(e, "expect.error").map(|s| Expectation::Error(s.to_string())),
            _ => {
                w.fail("expect", "must have exactly one of `value`, `error`");
                None
            }
        }
    });

    Some(Scenario {
        name: name?,
        description,
        space: space?,
        operator: operator?,
        shift,
        domain: domain?,
        schedule: schedule?,
        mode: mode?,
        homotopy,
        theorem,
        tol: tol?,
        output: output?,
        seed: seed?,
        budgets: budgets?,
        expect,
    })
}

fn weights_value(s: &Sequence<f64>) -> Value {
    match s {
        Sequence::Rational { a, b, c } if *b == 0.0 && *c == 0.0 => json!(a),
        Sequence::Rational { a, b, c } => json!({ "a": a, "b": b, "c": c }),
        Sequence::Explicit { values, tail } => json!({ "values": values, "tail": tail }),
    }
}

fn param_value(p: &Param<f64>) -> Value {
    match p {
        Param::Number(x) => json!(x),
        Param::List(v) => json!(v),
        Param::Rule { a, b, c } => json!({ "a": a, "b": b, "c": c }),
        Param::Operator { name, params } => operator_value(name, params),
    }
}

fn operator_value(name: &str, params: &BTreeMap<String, Param<f64>>) -> Value {
    let mut m = Map::new();
    m.insert("name".into(), json!(name));
    if !params.is_empty() {
        let ps: Map<String, Value> = params.iter().map(|(k, v)| (k.clone(), param_value(v))).collect();
        m.insert("params".into(), Value::Object(ps));
    }
    Value::Object(m)
}

pub fn domain_value(d: &Domain<f64>) -> Value {
    match d {
        Domain::Ball { center, radius, p } => {
            let mut b = Map::new();
            b.insert("radius".into(), json!(radius));
            b.insert("p".into(), json!(p));
            if !center.is_empty() {
                b.insert("center".into(), json!(center));
            }
            json!({ "ball": b })
        }
        Domain::Box { lo, hi } => json!({ "box": { "lo": lo, "hi": hi } }),
    }
}

/// Canonical document for `s`, with every default spelled out.
pub fn scenario_value(s: &Scenario) -> Value {
    let mut m = Map::new();
    m.insert("schema".into(), json!(SCHEMA_VERSION));
    m.insert("name".into(), json!(s.name));
    if let Some(d) = &s.description {
        m.insert("description".into(), json!(d));
    }
    m.insert(
        "space".into(),
        json!({ "p_x": s.space.p_x, "p_y": s.space.p_y, "weights": weights_value(&s.space.weights) }),
    );
    m.insert("operator".into(), operator_value(&s.operator.name, &s.operator.params));
    if let Some(f0) = &s.shift {
        m.insert("shift".into(), json!(f0));
    }
    m.insert("domain".into(), domain_value(&s.domain));
    let sc = &s.schedule;
    m.insert(
        "schedule".into(),
        json!({
            "n_list": sc.n_list,
            "eps_reg": sc.eps_reg.map_or(json!("auto"), |e| json!(e)),
            "eps_n": sc.eps_n.as_ref().map_or(json!("halving"), |e| json!(e)),
            "window": sc.window,
        }),
    );
    m.insert("mode".into(), json!(s.mode.key()));
    if let Some(h) = &s.homotopy {
        m.insert("homotopy".into(), json!({ "to": operator_value(&h.to.name, &h.to.params), "samples": h.samples }));
    }
    if let Some(t) = &s.theorem {
        let mut tm = Map::new();
        tm.insert("id".into(), json!(t.id.key()));
        if let Some(r) = t.radius {
            tm.insert("radius".into(), json!(r));
        }
        if let Some(c) = t.cap {
            tm.insert("cap".into(), json!(c));
        }
        if !t.targets.is_empty() {
            tm.insert("targets".into(), json!(t.targets));
        }
        m.insert("theorem".into(), Value::Object(tm));
    }
    m.insert("tol".into(), json!(s.tol));
    m.insert("output".into(), json!({ "path": s.output.path, "format": s.output.format.key() }));
    m.insert("seed".into(), json!(s.seed));
    let mut b = Map::new();
    b.insert("boxes".into(), json!(s.budgets.boxes));
    b.insert("grid_nodes".into(), json!(s.budgets.grid_nodes));
    if let Some(g) = s.budgets.boundary_grid {
        b.insert("boundary_grid".into(), json!(g));
    }
    m.insert("budgets".into(), Value::Object(b));
    if let Some(e) = &s.expect {
        m.insert(
            "expect".into(),
            match e {
                Expectation::Value(v) => json!({ "value": v }),
                Expectation::Error(n) => json!({ "error": n }),
            },
        );
    }
    Value::Object(m)
}

pub fn emit_scenario(s: &Scenario) -> String {
    let mut out = serde_json::to_string_pretty(&scenario_value(s)).expect("scenario values are finite");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
  "schema": 1,
  "name": "minimal",
  "space": { "p_x": 2, "p_y": 2 },
  "operator": { "name": "duality" },
  "domain": { "ball": { "radius": 1 } }
}"#;

    fn violations(text: &str) -> Vec<Violation> {
        match parse_scenario(text.as_bytes()) {
            Err(ScenarioError::Schema(v)) => v,
            other => panic!("expected a schema error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_document_gets_defaults() {
        let s = parse_scenario(MINIMAL.as_bytes()).unwrap();
        assert_eq!(s.schedule.eps_reg, None);
        assert_eq!(s.schedule.n_list, vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(s.mode, Mode::Degree);
        assert_eq!(s.domain, Domain::ball(1.0, 2.0));
        assert_eq!(s.output.path, "minimal.report.json");
        assert_eq!(parse_scenario(emit_scenario(&s).as_bytes()).unwrap(), s);
    }

    #[test]
    fn exponent_one_is_rejected() {
        let v = violations(&MINIMAL.replace("\"p_x\": 2", "\"p_x\": 1"));
        assert!(v.iter().any(|x| x.field == "space" && x.message.contains("exponent")), "{v:?}");
    }

    #[test]
    fn unknown_keys_are_named() {
        let text = MINIMAL.replace("\"schema\": 1,", "\"schema\": 1, \"epsilonn\": 0.1,");
        let v = violations(&text.replace("{ \"radius\": 1 }", "{ \"radius\": 1, \"radiu\": 2 }"));
        assert!(v.iter().any(|x| x.field == "epsilonn" && x.message.contains("epsilonn")), "{v:?}");
        assert!(v.iter().any(|x| x.field == "domain.ball.radiu"), "{v:?}");
    }

    #[test]
    fn all_violations_are_listed() {
        let text = r#"{"schema": 2, "name": "x", "space": {"p_x": 2, "p_y": 2},
            "operator": {"name": "diag", "params": {"lambda": -1}},
            "domain": {"ball": {"radius": -1}}, "mode": "fly", "tol": 0}"#;
        let v = violations(text);
        let fields: Vec<&str> = v.iter().map(|x| x.field.as_str()).collect();
        for f in ["schema", "operator", "domain.ball.radius", "mode", "tol"] {
            assert!(fields.contains(&f), "{f} missing from {fields:?}");
        }
    }

    #[test]
    fn malformed_json_reports_its_line() {
        match parse_scenario(b"{\n  \"schema\": 1,\n  oops\n}") {
            Err(ScenarioError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nested_operators_round_trip() {
        let text = r#"{"schema": 1, "name": "nested", "space": {"p_x": 2, "p_y": 2, "weights": {"a": 0, "b": 1}},
            "operator": {"name": "sum", "params": {
                "left": {"name": "sign", "params": {"mu": [1, 0.5]}},
                "right": {"name": "diag", "params": {"lambda": {"a": 1, "b": 1, "c": 0}}}}},
            "shift": [0.25],
            "domain": {"box": {"lo": [-1, -1, -1], "hi": [1, 1, 1]}},
            "schedule": {"n_list": [1, 2, 3], "eps_reg": 0.1, "eps_n": [0.1, 0.05, 0.025], "window": 2},
            "mode": "homotopy", "homotopy": {"to": {"name": "duality"}, "samples": 5},
            "output": {"format": "json+csv"}, "seed": 3, "budgets": {"boundary_grid": 9},
            "expect": {"value": 1}}"#;
        let s = parse_scenario(text.as_bytes()).unwrap();
        assert_eq!(s.output.format, Format::JsonCsv);
        assert_eq!(s.budgets.boundary_grid, Some(9));
        assert_eq!(parse_scenario(emit_scenario(&s).as_bytes()).unwrap(), s);
    }

    #[test]
    fn theorem_fields_are_checked() {
        let text = MINIMAL.replace(
            "\"domain\"",
            "\"mode\": \"theorem\", \"theorem\": {\"id\": \"range_Nr\", \"radius\": 1}, \"domain\"",
        );
        let v = violations(&text);
        assert!(v.iter().any(|x| x.field == "theorem" && x.message.contains("cap")), "{v:?}");
        assert!(v.iter().any(|x| x.field == "theorem.targets"), "{v:?}");
    }
}
