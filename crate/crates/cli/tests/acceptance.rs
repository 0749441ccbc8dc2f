//! Acceptance suite: one PASS/FAIL line per criterion; exits nonzero on any
//! failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use degree_tool::run::options_for;
use degree_tool::scenario::{Expectation, Mode, Scenario};
use degree_tool::{parse_scenario, run};
use mmdegree::brouwer::{degree, degree_winding_oracle, DegreeOptions, FiniteMap, Region};
use mmdegree::degree::{degree_trace, extract_zero};
use mmdegree::galerkin::{Domain, PipelineOptions, Schedule};
use mmdegree::selection::{audit_selection, build_selection, Selection, SelectionMethod, SelectionOptions};
use mmdegree::setval::gallery::{duality, sign};
use mmdegree::space::{Sequence, SpacePair};
use mmdegree::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}

fn load_all() -> Vec<Scenario> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(scenarios_dir())
        .expect("scenario directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    files.iter().map(|f| parse_scenario(&std::fs::read(f).unwrap()).unwrap()).collect()
}

/// Degree-computing scenarios that are expected to succeed.
fn gallery_suite(all: &[Scenario]) -> Vec<&Scenario> {
    all.iter()
        .filter(|s| matches!(s.mode, Mode::Degree | Mode::Solve))
        .filter(|s| !matches!(s.expect, Some(Expectation::Error(_))))
        .collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn normalization() -> Outcome {
    let cases = [
        ("(2,2,1)", SpacePair::hilbert()),
        ("(1.5,1.5,1)", SpacePair::uniform(1.5).unwrap()),
        ("(3,3,1)", SpacePair::uniform(3.0).unwrap()),
        ("(2,2,1/k)", SpacePair::new(2.0, 2.0, Sequence::harmonic(1.0)).unwrap()),
    ];
    let mut slowest = 0.0f64;
    for (label, sp) in cases {
        let start = Instant::now();
        let r = degree_trace(
            &duality(&sp),
            &Domain::ball(1.0, sp.p_y()),
            &sp,
            &Schedule::up_to(6),
            &PipelineOptions::default(),
        )
        .map_err(|e| format!("{label}: {e}"))?;
        let secs = start.elapsed().as_secs_f64();
        slowest = slowest.max(secs);
        ensure(r.stabilized && r.value == Some(1), || format!("{label}: trace {:?}", r.trace()))?;
        ensure(secs <= 60.0, || format!("{label}: {secs:.1} s"))?;
    }
    Ok(format!("4 spaces stabilize at 1 by n = 6, slowest {slowest:.2} s"))
}

fn planar_power(k: i32) -> FiniteMap<f64> {
    FiniteMap::new(2, move |z: &[f64]| {
        let (x, y) = (z[0], if k < 0 { -z[1] } else { z[1] });
        let (mut re, mut im) = (1.0, 0.0);
        for _ in 0..k.unsigned_abs() {
            (re, im) = (re * x - im * y, re * y + im * x);
        }
        vec![re, im]
    })
}

fn brouwer_oracles() -> Outcome {
    let opts = DegreeOptions::default();
    for n in 1..=4 {
        let ball = Region::unit_ball(n);
        let id = degree(&FiniteMap::identity(n), &ball, &opts).map_err(|e| e.to_string())?;
        let neg = degree(&FiniteMap::new(n, |x: &[f64]| x.iter().map(|v| -v).collect()), &ball, &opts)
            .map_err(|e| e.to_string())?;
        ensure(id == 1 && neg == if n % 2 == 0 { 1 } else { -1 }, || format!("n = {n}: {id}, {neg}"))?;
    }
    let quad = FiniteMap::new(1, |x: &[f64]| vec![x[0] * x[0] - 0.25]);
    let d = degree(&quad, &Region::cube(1, 1.0), &opts).map_err(|e| e.to_string())?;
    ensure(d == 0, || format!("x² - 1/4: {d}"))?;
    let disk = Region::unit_ball(2);
    for k in -2..=2 {
        let g = planar_power(k);
        let d = degree(&g, &disk, &opts).map_err(|e| e.to_string())?;
        let w = degree_winding_oracle(&g, &disk, 4096).map_err(|e| e.to_string())?;
        ensure(d == k as i64 && w == d, || format!("power {k}: engine {d}, oracle {w}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let region = Region::ball(vec![0.0, 0.0], 1.5);
    let (mut compared, mut drawn, mut nonzero) = (0, 0, 0);
    while compared < 20 {
        drawn += 1;
        ensure(drawn < 400, || "too few maps with a clean boundary".into())?;
        let c: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = FiniteMap::new(2, move |z: &[f64]| {
            let (x, y) = (z[0], z[1]);
            let m = [1.0, x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y, y * y * y];
            vec![m.iter().zip(&c[..10]).map(|(u, v)| u * v).sum(), m.iter().zip(&c[10..]).map(|(u, v)| u * v).sum()]
        });
        match degree(&g, &region, &opts) {
            Ok(d) => {
                let w = degree_winding_oracle(&g, &region, 4096).map_err(|e| e.to_string())?;
                ensure(d == w, || format!("random cubic #{drawn}: engine {d}, oracle {w}"))?;
                compared += 1;
                nonzero += (d != 0) as usize;
            }
            Err(Error::BoundaryTooClose { .. }) | Err(Error::DegenerateZero { .. }) => {}
            Err(e) => return Err(format!("random cubic #{drawn}: {e}")),
        }
    }
    Ok(format!("±identity n ≤ 4, x² - 1/4, powers -2..2, 20 random cubics ({nonzero} nonzero)"))
}

fn stability(all: &[Scenario]) -> Outcome {
    let suite = gallery_suite(all);
    for s in &suite {
        let sp = s.space.build().unwrap();
        let t = s.build_operator(&sp).unwrap();
        for seed in 0..10 {
            let r = degree_trace(&t, &s.domain, &sp, &s.schedule.build(), &options_for(s, seed))
                .map_err(|e| format!("{} seed {seed}: {e}", s.name))?;
            let tr = r.trace();
            if let Some(i) =
                (0..tr.len().saturating_sub(2)).find(|&i| tr[i].is_some() && tr[i] == tr[i + 1] && tr[i] == tr[i + 2])
            {
                ensure(tr[i..].iter().all(|d| *d == tr[i]), || format!("{} seed {seed}: {tr:?}", s.name))?;
            }
        }
    }
    Ok(format!("{} scenarios × 10 seeds, no flip-flop", suite.len()))
}

fn eps_robustness(all: &[Scenario]) -> Outcome {
    let suite = gallery_suite(all);
    for s in &suite {
        let sp = s.space.build().unwrap();
        let t = s.build_operator(&sp).unwrap();
        let opts = options_for(s, s.seed);
        let base = degree_trace(&t, &s.domain, &sp, &s.schedule.build(), &opts).map_err(|e| e.to_string())?;
        if !base.stabilized {
            continue;
        }
        let eps = base.eps_reg / 2.0;
        ensure(eps < base.diagnostics.eps_bound, || format!("{}: halved ε above the bound", s.name))?;
        let sched = s.schedule.build().with_eps_reg(eps).with_eps_n(base.per_n.iter().map(|e| e.eps_n / 2.0).collect());
        let half = degree_trace(&t, &s.domain, &sp, &sched, &opts).map_err(|e| format!("{}: {e}", s.name))?;
        ensure(half.stabilized && half.value == base.value, || {
            format!("{}: {:?} became {:?}", s.name, base.trace(), half.trace())
        })?;
    }
    Ok(format!("{} scenarios unchanged under halved ε and εₙ", suite.len()))
}

fn solvability(all: &[Scenario]) -> Outcome {
    let mut solved = 0;
    let mut worst = 0.0f64;
    for s in gallery_suite(all) {
        let sp = s.space.build().unwrap();
        let t = s.build_operator(&sp).unwrap();
        let opts = options_for(s, s.seed);
        let rep = degree_trace(&t, &s.domain, &sp, &s.schedule.build(), &opts).map_err(|e| e.to_string())?;
        if !rep.stabilized || rep.value == Some(0) {
            continue;
        }
        let sol = extract_zero(&t, &s.domain, &sp, &rep, 1e-6, &opts).map_err(|e| format!("{}: {e}", s.name))?;
        ensure(sol.residual <= 1e-6, || format!("{}: residual {:e}", s.name, sol.residual))?;
        worst = worst.max(sol.residual);
        solved += 1;
        if s.name == "shifted_diag_solve" {
            // coefficient λ w_k² y_k = w_k f₀_k with λ = 2, w_k = 1/k
            let f0 = s.shift.as_ref().unwrap();
            let err = sol
                .point
                .iter()
                .enumerate()
                .map(|(k, y)| (y - f0.get(k).copied().unwrap_or(0.0) * (k + 1) as f64 / 2.0).abs())
                .fold(0.0, f64::max);
            ensure(err <= 1e-8, || format!("closed-form error {err:e}"))?;
        }
    }
    ensure(all.iter().any(|s| s.name == "shifted_diag_solve"), || "shifted_diag_solve missing".into())?;
    Ok(format!("{solved} zeros, worst residual {worst:.1e}; shifted diagonal within 1e-8"))
}

fn scenario<'a>(all: &'a [Scenario], name: &str) -> Result<&'a Scenario, String> {
    all.iter().find(|s| s.name == name).ok_or_else(|| format!("{name} missing"))
}

fn homotopy(all: &[Scenario]) -> Outcome {
    let s = scenario(all, "homotopy_duality_to_diag")?;
    let o = run(s, None);
    let h = &o.report["homotopy"];
    let values: Vec<&Value> = h["reports"].as_array().ok_or("no reports")?.iter().map(|r| &r["value"]).collect();
    ensure(o.pass && o.value == Some(1), || format!("value {:?}, error {:?}", o.value, o.error))?;
    ensure(values.len() >= 11 && values.iter().all(|v| v.as_i64() == Some(1)), || format!("{values:?}"))?;
    let bad = run(scenario(all, "homotopy_inadmissible")?, None);
    ensure(bad.error.as_deref() == Some("InadmissibleHomotopy"), || format!("control gave {:?}", bad.error))?;
    Ok(format!("constant degree 1 over {} samples; control aborts with InadmissibleHomotopy", values.len()))
}

fn finite_dimensional(all: &[Scenario]) -> Outcome {
    let s = scenario(all, "finite_dimensional")?;
    let o = run(s, None);
    let direct = FiniteMap::new(3, |x: &[f64]| vec![x[0].powi(3), x[1] + x[1].powi(3), 2.0 * x[2]]);
    let d = degree(&direct, &Region::cube(3, 1.0), &DegreeOptions::default()).map_err(|e| e.to_string())?;
    let n_last = s.schedule.n_list.last().copied().unwrap_or(0);
    ensure(o.value == Some(1) && d == 1 && n_last >= 3, || format!("pipeline {:?}, direct {d}", o.value))?;
    Ok("pipeline and direct Brouwer degree both 1 on R³".into())
}

fn theorems(all: &[Scenario]) -> Outcome {
    let mut passed = 0;
    let mut controls = 0;
    for s in all.iter().filter(|s| s.mode == Mode::Theorem) {
        let o = run(s, None);
        match &s.expect {
            Some(Expectation::Error(name)) => {
                ensure(o.error.as_deref() == Some(name.as_str()), || {
                    format!("{}: {:?} instead of {name}", s.name, o.error)
                })?;
                controls += 1;
            }
            _ => {
                ensure(o.pass, || format!("{}: {:?} {:?}", s.name, o.error, o.report["error_detail"]))?;
                let targets = o.report["theorem"]["targets"].as_array().ok_or("no targets")?;
                ensure(!targets.is_empty(), || format!("{}: no solutions", s.name))?;
                for t in targets {
                    let r = t["residual"].as_f64().unwrap_or(f64::INFINITY);
                    ensure(r <= 1e-6, || format!("{}: residual {r:e}", s.name))?;
                    if let Some(dc) = t["doubled_cap"].as_array() {
                        let (d2, r2) = (dc[0].as_i64(), dc[1].as_f64().unwrap_or(f64::INFINITY));
                        ensure(d2 == Some(1) && r2 <= 1e-6, || format!("{}: doubled cap gives {dc:?}", s.name))?;
                    }
                }
                passed += 1;
            }
        }
    }
    ensure(passed >= 3 && controls >= 3, || format!("{passed} replays, {controls} controls"))?;
    Ok(format!("{passed} replays certified, {controls} controls abort with their named errors"))
}

fn selection_audit() -> Outcome {
    let t = sign(Sequence::constant(1.0));
    let region = Region::unit_ball(2);
    let s = build_selection(&t, 2, 0.1, &region, &SelectionOptions::default()).map_err(|e| e.to_string())?;
    ensure(s.method == SelectionMethod::Resolvent, || format!("method {:?}", s.method))?;
    let a = audit_selection(&s, &t, &region, 10_000, 1);
    ensure(a.pass && a.passed == a.samples && a.samples == 10_000, || format!("{}/{} passed", a.passed, a.samples))?;
    let constant = Selection::custom(2, 0.1, |_: &[f64]| vec![0.5, 0.5]);
    let b = audit_selection(&constant, &t, &region, 10_000, 1);
    ensure(!b.pass, || "constant selection passed".into())?;
    Ok(format!("Yosida 10000/10000; constant selection {}/{}", b.passed, b.samples))
}

fn determinism() -> Outcome {
    let names = ["duality_l3", "sign_diag_solve", "homotopy_duality_to_diag", "browder_diag_cubic"];
    for name in names {
        let path = scenarios_dir().join(format!("{name}.json"));
        let mut first: Option<Vec<u8>> = None;
        for _ in 0..5 {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let status = Command::new(env!("CARGO_BIN_EXE_degree-tool"))
                .args(["run", path.to_str().unwrap(), "--seed", "42", "--out", dir.path().to_str().unwrap()])
                .output()
                .map_err(|e| e.to_string())?;
            ensure(status.status.code() == Some(0), || format!("{name}: exit {:?}", status.status.code()))?;
            let bytes = std::fs::read(dir.path().join(format!("{name}.report.json"))).map_err(|e| e.to_string())?;
            match &first {
                None => first = Some(bytes),
                Some(f) => ensure(*f == bytes, || format!("{name}: reports differ"))?,
            }
        }
    }
    Ok(format!("{} scenarios × 5 runs byte-identical", names.len()))
}

fn main() {
    let all = load_all();
    let criteria: Vec<Criterion> = vec![
        ("normalization", Box::new(normalization)),
        ("brouwer oracles", Box::new(brouwer_oracles)),
        ("stability in n", Box::new(|| stability(&all))),
        ("eps robustness", Box::new(|| eps_robustness(&all))),
        ("solvability", Box::new(|| solvability(&all))),
        ("homotopy invariance", Box::new(|| homotopy(&all))),
        ("finite-dimensional consistency", Box::new(|| finite_dimensional(&all))),
        ("theorem harness", Box::new(|| theorems(&all))),
        ("selection audit", Box::new(selection_audit)),
        ("cli determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({secs:.1} s) {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({secs:.1} s) {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
