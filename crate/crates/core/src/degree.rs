//! The degree as a stabilized limit of regularized Brouwer degrees, the
//! admissible-homotopy check, and degree-driven zero extraction.

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::brouwer::{auto_grid, locate, newton, Region};
use crate::error::{Error, Result};
use crate::galerkin::{
    assemble, boundary_min, choose_epsilon, regularized, Domain, PipelineOptions, Schedule, BOUNDARY_ZERO_TOL,
};
use crate::scalar::{norm2, Real};
use crate::selection::{build_selection, SelectionMethod};
use crate::setval::{monotonicity_audit, AuditReport, MonotoneMap};
use crate::space::SpacePair;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectionEntry {
    pub n: usize,
    pub eps_n: f64,
    pub degree: Option<i64>,
    pub boundary_margin: f64,
    pub boxes: usize,
    pub zeros: usize,
    pub method: SelectionMethod,
    /// Name of the error that left `degree` empty.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub r_hat: f64,
    pub max_boundary_norm: f64,
    /// `r̂ / max ‖z‖`; admissible `eps_reg` lie below it.
    pub eps_bound: f64,
    pub eps_auto: bool,
    pub reference_n: usize,
    pub boxes_used: usize,
    pub box_budget: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeReport {
    pub per_n: Vec<SectionEntry>,
    pub stabilized: bool,
    pub value: Option<i64>,
    pub eps_reg: f64,
    pub window: usize,
    pub diagnostics: Diagnostics,
}

impl DegreeReport {
    pub fn trace(&self) -> Vec<Option<i64>> {
        self.per_n.iter().map(|e| e.degree).collect()
    }
}

fn window_value(trace: &[Option<i64>], k: usize) -> Option<i64> {
    if trace.len() < k || k == 0 {
        return None;
    }
    let tail = &trace[trace.len() - k..];
    let first = tail[0]?;
    tail.iter().all(|d| *d == Some(first)).then_some(first)
}

/// Degrees for every `n` of the schedule; never raises `NotStabilized`.
pub fn degree_trace<S: Real>(
    t: &MonotoneMap<S>,
    domain: &Domain<S>,
    sp: &SpacePair<S>,
    sched: &Schedule<S>,
    opts: &PipelineOptions,
) -> Result<DegreeReport> {
    sched.validate()?;
    let n_ref = sched.n_max();
    let choice = choose_epsilon(t, domain, sp, n_ref, opts.boundary_grid)?;
    let eps_reg = sched.eps_reg.unwrap_or(choice.eps);
    let eps_n = sched.eps_n_for(eps_reg);
    let cells: Vec<(usize, S)> = sched.n_list.iter().copied().zip(eps_n).collect();
    let per_n: Vec<Result<SectionEntry>> = cells
        .par_iter()
        .map(|&(n, en)| {
            let a = assemble(t, domain, sp, n, en, eps_reg, opts)?;
            let mut entry = SectionEntry {
                n,
                eps_n: en.as_f64(),
                degree: None,
                boundary_margin: 0.0,
                boxes: 0,
                zeros: 0,
                method: a.selection.method,
                error: None,
            };
            match locate(&a.map, &a.region, &opts.degree) {
                Ok(r) => {
                    entry.degree = Some(r.degree);
                    entry.boundary_margin = r.margin.sampled_min.as_f64();
                    entry.boxes = r.boxes;
                    entry.zeros = r.zeros.len();
                }
                Err(e) if e.is_configuration() => return Err(e),
                Err(e) => {
                    if let Error::BoundaryTooClose { distance, .. } = e {
                        entry.boundary_margin = distance;
                    }
                    if let Error::BudgetExhausted { budget } = e {
                        entry.boxes = budget;
                    }
                    entry.error = Some(e.name().to_string());
                }
            }
            Ok(entry)
        })
        .collect();
    let per_n = per_n.into_iter().collect::<Result<Vec<_>>>()?;
    let trace: Vec<Option<i64>> = per_n.iter().map(|e| e.degree).collect();
    let value = window_value(&trace, sched.window);
    let boxes_used = per_n.iter().map(|e| e.boxes).sum();
    Ok(DegreeReport {
        stabilized: value.is_some(),
        value,
        eps_reg: eps_reg.as_f64(),
        window: sched.window,
        diagnostics: Diagnostics {
            r_hat: choice.r_hat.as_f64(),
            max_boundary_norm: choice.max_norm.as_f64(),
            eps_bound: (choice.r_hat / choice.max_norm).as_f64(),
            eps_auto: sched.eps_reg.is_none(),
            reference_n: n_ref,
            boxes_used,
            box_budget: opts.degree.budget,
        },
        per_n,
    })
}

/// Stabilized degree: the last `window` entries must agree.
pub fn degree_limit<S: Real>(
    t: &MonotoneMap<S>,
    domain: &Domain<S>,
    sp: &SpacePair<S>,
    sched: &Schedule<S>,
    opts: &PipelineOptions,
) -> Result<DegreeReport> {
    let r = degree_trace(t, domain, sp, sched, opts)?;
    if !r.stabilized {
        return Err(Error::NotStabilized { window: r.window, trace: r.trace() });
    }
    Ok(r)
}

pub type Family<S> = Arc<dyn Fn(S) -> MonotoneMap<S> + Send + Sync>;

/// A `t`-family of maximal monotone maps sampled on `[0, 1]`.
#[derive(Clone)]
pub struct Homotopy<S> {
    pub family: Family<S>,
    pub t_samples: Vec<S>,
}

impl<S: Real> Homotopy<S> {
    pub fn new(family: impl Fn(S) -> MonotoneMap<S> + Send + Sync + 'static, samples: usize) -> Self {
        let k = samples.max(2) - 1;
        Homotopy { family: Arc::new(family), t_samples: (0..=k).map(|j| S::of(j as f64 / k as f64)).collect() }
    }

    /// `(1 - t) A + t B`.
    pub fn convex(a: MonotoneMap<S>, b: MonotoneMap<S>, samples: usize) -> Self {
        Homotopy::new(move |t| a.scaled(S::one() - t).sum(&b.scaled(t)), samples)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomotopyReport {
    pub t: Vec<f64>,
    pub margins: Vec<f64>,
    /// Smallest admissibility margin after refinement between samples.
    pub min_margin: f64,
    pub min_margin_t: f64,
    pub audits: Vec<AuditReport>,
    pub reports: Vec<DegreeReport>,
    pub value: Option<i64>,
    pub pass: bool,
}

const HOMOTOPY_AUDIT_SAMPLES: usize = 200;

pub fn homotopy_check<S: Real>(
    h: &Homotopy<S>,
    domain: &Domain<S>,
    sp: &SpacePair<S>,
    sched: &Schedule<S>,
    opts: &PipelineOptions,
) -> Result<HomotopyReport> {
    sched.validate()?;
    let n_ref = sched.n_max();
    let region = domain.section(n_ref)?;
    let grid = opts.boundary_grid.unwrap_or_else(|| auto_grid(n_ref));
    let margin = |t: S| -> S {
        let m = (h.family)(t);
        let phi = |z: &[S]| m.finite_rank(z, n_ref).map(|v| v.distance_to_origin()).unwrap_or(S::zero());
        boundary_min(&region, grid, &phi).value
    };
    let ts = &h.t_samples;
    let inadmissible = |t: S, reason: String| Error::InadmissibleHomotopy { t: t.as_f64(), reason };
    let margins: Vec<S> = ts.par_iter().map(|&t| margin(t)).collect();
    let mut audits = Vec::with_capacity(ts.len());
    for (i, &t) in ts.iter().enumerate() {
        let a = monotonicity_audit(&(h.family)(t), n_ref, HOMOTOPY_AUDIT_SAMPLES, opts.degree.seed ^ i as u64)?;
        if !a.pass {
            return Err(inadmissible(t, format!("family is not monotone (gap {:e})", a.worst)));
        }
        audits.push(a);
        if !(margins[i].as_f64() > BOUNDARY_ZERO_TOL) {
            return Err(inadmissible(t, format!("0 within {:e} of the boundary image", margins[i].as_f64())));
        }
    }
    // golden-section search around each sampled local minimum
    let (mut min_m, mut min_t) = (margins[0], ts[0]);
    for i in 0..ts.len() {
        let left = if i == 0 { S::infinity() } else { margins[i - 1] };
        let right = if i + 1 == ts.len() { S::infinity() } else { margins[i + 1] };
        if margins[i] < min_m {
            (min_m, min_t) = (margins[i], ts[i]);
        }
        if !(margins[i] <= left && margins[i] <= right) || ts.len() < 2 {
            continue;
        }
        let mut a = if i == 0 { ts[0] } else { ts[i - 1] };
        let mut b = if i + 1 == ts.len() { ts[i] } else { ts[i + 1] };
        let g = S::of(0.618_033_988_749_894_9);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let (mut fc, mut fd) = (margin(c), margin(d));
        for _ in 0..40 {
            if fc < fd {
                b = d;
                (d, fd) = (c, fc);
                c = b - g * (b - a);
                fc = margin(c);
            } else {
                a = c;
                (c, fc) = (d, fd);
                d = a + g * (b - a);
                fd = margin(d);
            }
            if (b - a).as_f64() < 1e-10 {
                break;
            }
        }
        let (tm, fm) = if fc < fd { (c, fc) } else { (d, fd) };
        if fm < min_m {
            (min_m, min_t) = (fm, tm);
        }
        if !(fm.as_f64() > BOUNDARY_ZERO_TOL) {
            return Err(inadmissible(tm, format!("0 within {:e} of the boundary image", fm.as_f64())));
        }
    }
    let reports: Vec<DegreeReport> =
        ts.par_iter().map(|&t| degree_limit(&(h.family)(t), domain, sp, sched, opts)).collect::<Result<_>>()?;
    let first = reports[0].value;
    let pass = reports.iter().all(|r| r.value == first);
    Ok(HomotopyReport {
        t: ts.iter().map(|t| t.as_f64()).collect(),
        margins: margins.iter().map(|m| m.as_f64()).collect(),
        min_margin: min_m.as_f64(),
        min_margin_t: min_t.as_f64(),
        audits,
        reports,
        value: if pass { first } else { None },
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution<S> {
    pub point: Vec<S>,
    /// `dist(0, T_n(point))`.
    pub residual: S,
    pub n: usize,
    /// Regularizations visited by the continuation.
    pub eps_path: Vec<f64>,
}

/// A zero of `T_n` recovered from the regularized maps of a certified report:
/// the located preimages seed Newton on `s + ε J_n` while `ε → 0`.
pub fn extract_zero<S: Real>(
    t: &MonotoneMap<S>,
    domain: &Domain<S>,
    sp: &SpacePair<S>,
    report: &DegreeReport,
    tol: S,
    opts: &PipelineOptions,
) -> Result<Solution<S>> {
    if !report.stabilized || report.value == Some(0) {
        return Err(Error::BadParams {
            operator: "extract_zero".into(),
            detail: "needs a stabilized nonzero degree".into(),
        });
    }
    let entry = report.per_n.iter().rev().find(|e| e.degree.is_some()).expect("stabilized trace");
    let n = entry.n;
    let eps_reg = S::of(report.eps_reg);
    let mut eps_sel = S::of(entry.eps_n);
    let a = assemble(t, domain, sp, n, eps_sel, eps_reg, opts)?;
    let region = a.region.clone();
    let mut starts: Vec<Vec<S>> = match locate(&a.map, &region, &opts.degree) {
        Ok(r) => r.zeros.into_iter().map(|z| z.point).collect(),
        Err(_) => Vec::new(),
    };
    starts.push(region_center(&region));
    let residual = |z: &[S]| t.finite_rank(z, n).map(|v| v.distance_to_origin()).unwrap_or(S::infinity());
    let mut best: (S, Vec<S>) = (S::infinity(), starts[0].clone());
    let path: Vec<f64> = (0..=14).map(|k| if k == 14 { 0.0 } else { report.eps_reg / 10f64.powi(k) }).collect();
    let mut selection = a.selection;
    for _ in 0..8 {
        for s0 in &starts {
            let mut x = s0.clone();
            let mut eps = eps_reg;
            for k in 0..=14 {
                let e = if k == 14 { S::zero() } else { eps };
                let map = regularized(&selection, sp, n, e);
                let f = |y: &[S]| map.eval(y);
                let (xn, r) = newton(&f, &x, S::of(1e-15), 60);
                let r0 = norm2(&map.eval(&x));
                if r <= r0 || !r0.is_finite() {
                    x = xn;
                }
                let mut cands = vec![x.clone()];
                cands.extend(selection.witness(&x));
                for z in cands {
                    let rz = residual(&z);
                    if rz < best.0 {
                        best = (rz, z);
                    }
                }
                eps /= S::of(10.0);
            }
        }
        if best.0 <= tol || selection.method != SelectionMethod::PartitionOfUnity {
            break;
        }
        // the grid selection only converges as its spacing shrinks
        eps_sel /= S::of(8.0);
        selection = build_selection(t, n, eps_sel, &region, &opts.selection)?;
        starts = vec![best.1.clone()];
    }
    if best.0 <= tol {
        Ok(Solution { point: best.1, residual: best.0, n, eps_path: path })
    } else {
        Err(Error::ResidualNotMet { best: best.0.as_f64(), tol: tol.as_f64() })
    }
}

fn region_center<S: Real>(r: &Region<S>) -> Vec<S> {
    match r {
        Region::Ball { center, .. } => center.clone(),
        Region::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| (*a + *b) / S::of(2.0)).collect(),
    }
}
