//! Scenario dispatch and report emission.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use mmdegree::degree::{degree_trace, extract_zero, homotopy_check, DegreeReport, Homotopy};
use mmdegree::galerkin::PipelineOptions;
use mmdegree::harness::{run_browder_surjectivity, run_defigueiredo, run_range_nr, TheoremId};
use mmdegree::Error;
use serde_json::{json, Map, Value};

use crate::scenario::{scenario_value, Expectation, Format, Mode, Scenario};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_MATH: i32 = 2;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub exit_code: i32,
    pub pass: bool,
    pub value: Option<i64>,
    pub error: Option<String>,
    pub report: Value,
    /// Stabilization table, when the run produced a degree trace.
    pub csv: Option<String>,
}

#[derive(Default)]
struct Parts {
    pass: bool,
    value: Option<i64>,
    sections: Option<DegreeReport>,
    extra: Map<String, Value>,
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

pub fn options_for(s: &Scenario, seed: u64) -> PipelineOptions {
    let mut o = PipelineOptions::default().with_seed(seed);
    o.degree.budget = s.budgets.boxes;
    o.selection.grid_budget = s.budgets.grid_nodes;
    o.boundary_grid = s.budgets.boundary_grid;
    o
}

fn dispatch(s: &Scenario, opts: &PipelineOptions, parts: &mut Parts) -> mmdegree::Result<()> {
    let sp = s.space.build()?;
    let sched = s.schedule.build();
    match s.mode {
        Mode::Degree | Mode::Solve => {
            let t = s.build_operator(&sp)?;
            let rep = degree_trace(&t, &s.domain, &sp, &sched, opts)?;
            parts.sections = Some(rep.clone());
            if !rep.stabilized {
                return Err(Error::NotStabilized { window: rep.window, trace: rep.trace() });
            }
            parts.value = rep.value;
            if s.mode == Mode::Degree {
                parts.pass = true;
                return Ok(());
            }
            if rep.value == Some(0) {
                parts.extra.insert("solution".into(), Value::Null);
                return Ok(());
            }
            let sol = extract_zero(&t, &s.domain, &sp, &rep, s.tol, opts)?;
            parts.pass = sol.residual <= s.tol;
            parts.extra.insert("solution".into(), to_value(&sol));
        }
        Mode::Homotopy => {
            let h = s.homotopy.as_ref().expect("validated");
            let a = s.build_operator(&sp)?;
            let b = h.to.build(&sp)?;
            let hr = homotopy_check(&Homotopy::convex(a, b, h.samples), &s.domain, &sp, &sched, opts)?;
            parts.sections = hr.reports.first().cloned();
            parts.value = hr.value;
            parts.pass = hr.pass;
            parts.extra.insert("homotopy".into(), to_value(&hr));
        }
        Mode::Theorem => {
            let th = s.theorem.as_ref().expect("validated");
            let t = s.operator.build(&sp)?;
            let rep = match th.id {
                TheoremId::DefigueiredoZero => {
                    run_defigueiredo(&t, &sp, th.radius.expect("validated"), &sched, s.tol, opts)?
                }
                TheoremId::RangeNr => run_range_nr(
                    &t,
                    &sp,
                    th.radius.expect("validated"),
                    th.cap.expect("validated"),
                    &th.targets,
                    &sched,
                    s.tol,
                    opts,
                )?,
                TheoremId::BrowderSurjectivity => run_browder_surjectivity(&t, &sp, &th.targets, &sched, s.tol, opts)?,
            };
            parts.sections = rep.degrees.first().cloned();
            parts.value = rep.pass.then_some(1);
            parts.pass = rep.pass;
            parts.extra.insert("theorem".into(), to_value(&rep));
        }
    }
    Ok(())
}

/// Runs the scenario; `seed` overrides the scenario's own seed.
pub fn run(s: &Scenario, seed: Option<u64>) -> Outcome {
    let seed = seed.unwrap_or(s.seed);
    let opts = options_for(s, seed);
    let mut parts = Parts::default();
    let result = dispatch(s, &opts, &mut parts);
    let (error, detail, exit_code) = match &result {
        Ok(()) => (None, None, if parts.pass { EXIT_PASS } else { EXIT_MATH }),
        Err(e) => {
            (Some(e.name().to_string()), Some(e.to_string()), if e.is_configuration() { EXIT_IO } else { EXIT_MATH })
        }
    };
    let pass = result.is_ok() && parts.pass;
    let expectation_met = s.expect.as_ref().map(|e| match e {
        Expectation::Value(v) => pass && parts.value == Some(*v),
        Expectation::Error(name) => error.as_deref() == Some(name.as_str()),
    });

    let mut m = Map::new();
    m.insert("tool".into(), json!({ "name": "degree-tool", "version": env!("CARGO_PKG_VERSION") }));
    m.insert("scenario".into(), scenario_value(s));
    m.insert("seed".into(), json!(seed));
    m.insert("mode".into(), json!(s.mode.key()));
    m.insert("status".into(), json!(if pass { "pass" } else { "fail" }));
    m.insert("value".into(), json!(parts.value));
    m.insert("error".into(), json!(error));
    m.insert("error_detail".into(), json!(detail));
    m.insert("expectation_met".into(), json!(expectation_met));
    m.insert("degree".into(), parts.sections.as_ref().map_or(Value::Null, to_value));
    for (k, v) in std::mem::take(&mut parts.extra) {
        m.insert(k, v);
    }
    Outcome {
        exit_code,
        pass,
        value: parts.value,
        error,
        report: Value::Object(m),
        csv: parts.sections.as_ref().map(csv_table),
    }
}

/// `n,eps_n,degree,boundary_margin`, LF-terminated; an empty degree marks a
/// section whose computation failed.
pub fn csv_table(r: &DegreeReport) -> String {
    let mut out = String::from("n,eps_n,degree,boundary_margin\n");
    for e in &r.per_n {
        let d = e.degree.map(|d| d.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{}\n", e.n, e.eps_n, d, e.boundary_margin));
    }
    out
}

pub fn report_text(o: &Outcome) -> String {
    let mut s = serde_json::to_string_pretty(&o.report).expect("report serializes");
    s.push('\n');
    s
}

/// Writes the report (and CSV when requested) and returns their paths.
pub fn write_outputs(
    o: &Outcome,
    s: &Scenario,
    out_dir: Option<&Path>,
    format: Option<Format>,
) -> io::Result<(PathBuf, Option<PathBuf>)> {
    let configured = PathBuf::from(&s.output.path);
    let report_path = match out_dir {
        Some(dir) => dir.join(configured.file_name().unwrap_or_else(|| "report.json".as_ref())),
        None => configured,
    };
    if let Some(parent) = report_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    fs::write(&report_path, report_text(o))?;
    let csv_path = match (format.unwrap_or(s.output.format), &o.csv) {
        (Format::JsonCsv, Some(csv)) => {
            let p = report_path.with_extension("csv");
            fs::write(&p, csv)?;
            Some(p)
        }
        _ => None,
    };
    Ok((report_path, csv_path))
}
