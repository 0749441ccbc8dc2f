//! End-to-end replays of three solvability theorems through the pipeline.

use serde::Serialize;

use crate::brouwer::auto_grid;
use crate::degree::{degree_limit, extract_zero, homotopy_check, DegreeReport, Homotopy, HomotopyReport, Solution};
use crate::error::{Error, Result};
use crate::galerkin::{boundary_min, Domain, PipelineOptions, Schedule, BOUNDARY_ZERO_TOL};
use crate::scalar::{dot, norm2, resized, Real};
use crate::setval::gallery::{capped_normal_cone, cone_ramp, duality, shifted, CONE_COLLAR};
use crate::setval::{monotonicity_audit, MonotoneMap};
use crate::space::SpacePair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    DefigueiredoZero,
    RangeNr,
    BrowderSurjectivity,
}

impl TheoremId {
    pub fn key(&self) -> &'static str {
        match self {
            TheoremId::DefigueiredoZero => "defigueiredo_zero",
            TheoremId::RangeNr => "range_Nr",
            TheoremId::BrowderSurjectivity => "browder_surjectivity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [TheoremId::DefigueiredoZero, TheoremId::RangeNr, TheoremId::BrowderSurjectivity]
            .into_iter()
            .find(|id| id.key() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub label: String,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetOutcome {
    pub target: Vec<f64>,
    pub degree: i64,
    pub solution: Vec<f64>,
    pub residual: f64,
    /// Radius used (surjectivity) or cone radius (range).
    pub radius: f64,
    /// Active cone multiplier at the solution (range only).
    pub multiplier: Option<f64>,
    /// Degree and residual at the doubled cap (range only).
    pub doubled_cap: Option<(i64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub id: TheoremId,
    pub pass: bool,
    pub hypotheses: Vec<HypothesisCheck>,
    pub homotopies: Vec<HomotopyReport>,
    pub degrees: Vec<DegreeReport>,
    pub targets: Vec<TargetOutcome>,
}

const AUDIT_SAMPLES: usize = 400;

fn audit<S: Real>(t: &MonotoneMap<S>, n: usize, seed: u64) -> Result<HypothesisCheck> {
    let a = monotonicity_audit(t, n, AUDIT_SAMPLES, seed)?;
    if !a.pass {
        return Err(Error::HypothesisViolated(format!("{} is not monotone: gap {:e}", t.label(), a.worst)));
    }
    Ok(HypothesisCheck { label: "monotonicity gap".into(), margin: a.worst })
}

fn boundary_distance_of<S: Real>(
    t: &MonotoneMap<S>,
    domain: &Domain<S>,
    n: usize,
    opts: &PipelineOptions,
) -> Result<S> {
    let region = domain.section(n)?;
    let grid = opts.boundary_grid.unwrap_or_else(|| auto_grid(n));
    let phi = |z: &[S]| t.finite_rank(z, n).map(|v| v.distance_to_origin()).unwrap_or(S::zero());
    Ok(boundary_min(&region, grid, &phi).value)
}

fn f64s<S: Real>(v: &[S]) -> Vec<f64> {
    v.iter().map(|x| x.as_f64()).collect()
}

/// `0 ∉ (T + λJ)(S_r)` for all `λ > 0` ⇒ `0 ∈ T(u)` for some `‖u‖ ≤ r`.
/// Replays `deg(T) = deg((1-t)T + tJ) = deg(J) = 1` on `B_r`, then extracts.
pub fn run_defigueiredo<S: Real>(
    t: &MonotoneMap<S>,
    sp: &SpacePair<S>,
    r: S,
    sched: &Schedule<S>,
    tol: S,
    opts: &PipelineOptions,
) -> Result<TheoremReport> {
    sched.validate()?;
    let n = sched.n_max();
    let domain = Domain::ball(r, sp.p_y());
    let mut hyps = vec![audit(t, n, opts.degree.seed)?];
    let j = duality(sp);
    // λ = 0 stands for the closure of the hypothesis as λ ↓ 0
    for lam in [0.0, 1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0] {
        let m = boundary_distance_of(&t.sum(&j.scaled(S::of(lam))), &domain, n, opts)?;
        if !(m.as_f64() > BOUNDARY_ZERO_TOL) {
            return Err(Error::HypothesisViolated(format!(
                "0 ∈ (T + {lam} J)(S_r) up to {:e} on the section of dimension {n}",
                m.as_f64()
            )));
        }
        hyps.push(HypothesisCheck { label: format!("dist(0, (T + {lam} J)(S_r))"), margin: m.as_f64() });
    }
    let h = Homotopy::convex(t.clone(), j, 11);
    let hr = homotopy_check(&h, &domain, sp, sched, opts)?;
    let report = hr.reports[0].clone();
    let degree = hr.value;
    let mut targets = Vec::new();
    let mut pass = hr.pass && degree == Some(1);
    if pass {
        let s = extract_zero(t, &domain, sp, &report, tol, opts)?;
        pass = s.residual <= tol;
        targets.push(TargetOutcome {
            target: vec![0.0; n],
            degree: 1,
            solution: f64s(&s.point),
            residual: s.residual.as_f64(),
            radius: r.as_f64(),
            multiplier: None,
            doubled_cap: None,
        });
    }
    Ok(TheoremReport {
        id: TheoremId::DefigueiredoZero,
        pass,
        hypotheses: hyps,
        homotopies: vec![hr],
        degrees: vec![report],
        targets,
    })
}

/// `Rang(∂N_r + f) = X*`: for each target, `deg(∂N_r^Λ + f - f₀, B_r) = 1`
/// and an extracted zero, repeated at the doubled cap `2Λ`.
#[allow(clippy::too_many_arguments)]
pub fn run_range_nr<S: Real>(
    f: &MonotoneMap<S>,
    sp: &SpacePair<S>,
    r: S,
    cap: S,
    targets: &[Vec<S>],
    sched: &Schedule<S>,
    tol: S,
    opts: &PipelineOptions,
) -> Result<TheoremReport> {
    sched.validate()?;
    let n = sched.n_max();
    if !f.is_single_valued() {
        return Err(Error::BadParams {
            operator: f.label().into(),
            detail: "range check needs a single-valued f".into(),
        });
    }
    let hyps = vec![audit(f, n, opts.degree.seed)?];
    let domain = Domain::ball(r, sp.p_y());
    let mut outcomes = Vec::new();
    let mut degrees = Vec::new();
    for f0 in targets {
        let solve = |lam: S| -> Result<(DegreeReport, Option<Solution<S>>)> {
            let t = capped_normal_cone(r, lam, sp).sum(&shifted(f, f0, sp));
            let rep = degree_limit(&t, &domain, sp, sched, opts)?;
            if rep.value != Some(1) {
                return Ok((rep, None));
            }
            let s = extract_zero(&t, &domain, sp, &rep, tol, opts)?;
            Ok((rep, Some(s)))
        };
        let (rep1, sol1) = solve(cap)?;
        let (rep2, sol2) = solve(cap * S::of(2.0))?;
        if rep1.value != rep2.value {
            return Err(Error::CapSensitive(format!(
                "degree {:?} at cap {cap} but {:?} at cap {}",
                rep1.value,
                rep2.value,
                cap * S::of(2.0)
            )));
        }
        let (Some(s1), Some(s2)) = (sol1, sol2) else {
            return Err(Error::HypothesisViolated(format!(
                "degree {:?} on B_r at both caps for target {:?}",
                rep1.value,
                f64s(f0)
            )));
        };
        if (s1.residual <= tol) != (s2.residual <= tol) {
            return Err(Error::CapSensitive(format!(
                "residual {:e} at cap {cap} but {:e} at the doubled cap",
                s1.residual.as_f64(),
                s2.residual.as_f64()
            )));
        }
        let u = &s1.point;
        let rho = cone_ramp(sp.norm_x_of(u), r, r * S::of(CONE_COLLAR));
        outcomes.push(TargetOutcome {
            target: f64s(&resized(f0, n)),
            degree: 1,
            solution: f64s(u),
            residual: s1.residual.as_f64(),
            radius: r.as_f64(),
            multiplier: Some((cap * rho).as_f64()),
            doubled_cap: Some((rep2.value.unwrap_or(0), s2.residual.as_f64())),
        });
        degrees.push(rep1);
    }
    let pass = outcomes.iter().all(|o| o.residual <= tol.as_f64() && norm2(&o.solution) <= r.as_f64() * (1.0 + 1e-9));
    Ok(TheoremReport {
        id: TheoremId::RangeNr,
        pass,
        hypotheses: hyps,
        homotopies: Vec::new(),
        degrees,
        targets: outcomes,
    })
}

/// Radius growth factor and cap of the surjectivity radius oracle.
pub const RADIUS_GROWTH: f64 = 1.5;
pub const RADIUS_MAX: f64 = 1e6;

/// Smallest `r = 1.5^k` with `⟨A z - f₀, z⟩ / ‖z‖` and `‖A z - f₀‖` above
/// `0.1 (1 + ‖f₀‖)` on the sampled sphere `S_r`.
pub fn radius_oracle<S: Real>(
    a: &MonotoneMap<S>,
    sp: &SpacePair<S>,
    f0: &[S],
    n: usize,
    opts: &PipelineOptions,
) -> Result<(S, S)> {
    let t = shifted(a, f0, sp);
    let thr = S::of(0.1) * (S::one() + norm2(f0));
    let grid = opts.boundary_grid.unwrap_or_else(|| auto_grid(n));
    let mut r = S::one();
    while r.as_f64() <= RADIUS_MAX {
        let region = Domain::ball(r, sp.p_y()).section(n)?;
        let phi = |z: &[S]| match t.point(z, n) {
            Ok(v) => (dot(&v, z) / norm2(z)).min(norm2(&v)),
            Err(_) => S::neg_infinity(),
        };
        let m = boundary_min(&region, grid, &phi).value;
        if m > thr {
            return Ok((r, m));
        }
        r *= S::of(RADIUS_GROWTH);
    }
    Err(Error::RadiusSearchFailed { max_radius: RADIUS_MAX })
}

/// `A` monotone with locally bounded inverse is onto: for each target, a
/// radius from the oracle, the homotopy `t(A - f₀) + εJ` on `B_r`, and an
/// extracted solution of `A y = f₀`.
pub fn run_browder_surjectivity<S: Real>(
    a: &MonotoneMap<S>,
    sp: &SpacePair<S>,
    targets: &[Vec<S>],
    sched: &Schedule<S>,
    tol: S,
    opts: &PipelineOptions,
) -> Result<TheoremReport> {
    sched.validate()?;
    let n = sched.n_max();
    if !a.is_single_valued() {
        return Err(Error::BadParams {
            operator: a.label().into(),
            detail: "surjectivity check needs a single-valued map".into(),
        });
    }
    let mut hyps = vec![audit(a, n, opts.degree.seed)?];
    let j = duality(sp);
    let eps_h = S::of(0.5);
    let mut homotopies = Vec::new();
    let mut degrees = Vec::new();
    let mut outcomes = Vec::new();
    for f0 in targets {
        let (r, m) = radius_oracle(a, sp, f0, n, opts)?;
        hyps.push(HypothesisCheck { label: format!("radius {r} boundary margin"), margin: m.as_f64() });
        let domain = Domain::ball(r, sp.p_y());
        let t = shifted(a, f0, sp);
        let (tt, jj) = (t.clone(), j.clone());
        let h = Homotopy::new(move |s| tt.scaled(s).sum(&jj.scaled(eps_h)), 11);
        let hr = homotopy_check(&h, &domain, sp, sched, opts)?;
        let rep = degree_limit(&t, &domain, sp, sched, opts)?;
        let ok = hr.pass && hr.value == Some(1) && rep.value == Some(1);
        if !ok {
            return Err(Error::HypothesisViolated(format!(
                "degree {:?} along the homotopy and {:?} at t = 1",
                hr.value, rep.value
            )));
        }
        let s = extract_zero(&t, &domain, sp, &rep, tol, opts)?;
        outcomes.push(TargetOutcome {
            target: f64s(&resized(f0, n)),
            degree: 1,
            solution: f64s(&s.point),
            residual: s.residual.as_f64(),
            radius: r.as_f64(),
            multiplier: None,
            doubled_cap: None,
        });
        homotopies.push(hr);
        degrees.push(rep);
    }
    let pass = outcomes.iter().all(|o| o.residual <= tol.as_f64());
    Ok(TheoremReport {
        id: TheoremId::BrowderSurjectivity,
        pass,
        hypotheses: hyps,
        homotopies,
        degrees,
        targets: outcomes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setval::gallery::{cubic, diag};
    use crate::space::Sequence;

    #[test]
    fn theorem_ids_round_trip() {
        for id in [TheoremId::DefigueiredoZero, TheoremId::RangeNr, TheoremId::BrowderSurjectivity] {
            assert_eq!(TheoremId::parse(id.key()), Some(id));
        }
        assert_eq!(TheoremId::parse("range_nr"), None);
    }

    #[test]
    fn cubic_radius_oracle() {
        let sp = SpacePair::<f64>::hilbert();
        let (r, _) =
            radius_oracle(&cubic(Sequence::constant(1.0), &sp), &sp, &[8.0], 1, &PipelineOptions::default()).unwrap();
        assert!(r > 2.0 && r < 4.0, "{r}");
        let zero = diag(Sequence::constant(0.0), &sp);
        assert!(matches!(
            radius_oracle(&zero, &sp, &[1.0], 1, &PipelineOptions::default()),
            Err(Error::RadiusSearchFailed { .. })
        ));
    }

    #[test]
    fn defigueiredo_on_diagonal() {
        let sp = SpacePair::<f64>::hilbert();
        let t = diag(Sequence::Rational { a: 1.0, b: 1.0, c: 0.0 }, &sp);
        let r = run_defigueiredo(&t, &sp, 1.0, &Schedule::up_to(3), 1e-6, &PipelineOptions::default()).unwrap();
        assert!(r.pass);
        assert!(norm2(&r.targets[0].solution) < 1e-9);
    }

    #[test]
    fn defigueiredo_control_is_rejected() {
        let sp = SpacePair::<f64>::hilbert();
        let t = shifted(&duality(&sp), &[2.0], &sp);
        let e = run_defigueiredo(&t, &sp, 1.0, &Schedule::up_to(3), 1e-6, &PipelineOptions::default()).unwrap_err();
        assert!(matches!(e, Error::HypothesisViolated(_)), "{e:?}");
    }

    #[test]
    fn range_attains_far_target_in_the_collar() {
        let sp = SpacePair::<f64>::hilbert();
        let id = duality(&sp);
        let rep = run_range_nr(
            &id,
            &sp,
            1.0,
            4.0,
            &[vec![1.575, 2.1]],
            &Schedule::up_to(3),
            1e-6,
            &PipelineOptions::default(),
        )
        .unwrap();
        assert!(rep.pass);
        let o = &rep.targets[0];
        // u = s f₀/‖f₀‖ with s (1 + 4 ρ(s)) = 2.625: s = 0.875, ρ = 1/2
        let s = norm2(&o.solution);
        assert!((s - 0.875).abs() < 1e-6, "{:?}", o.solution);
        assert!((o.solution[0] / o.solution[1] - 0.75).abs() < 1e-6);
        assert!((o.multiplier.unwrap() - 2.0).abs() < 1e-5);
    }

    #[test]
    fn range_cap_control() {
        let sp = SpacePair::<f64>::hilbert();
        let e = run_range_nr(
            &duality(&sp),
            &sp,
            1.0,
            1.0,
            &[vec![2.5]],
            &Schedule::up_to(3),
            1e-6,
            &PipelineOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(e, Error::CapSensitive(_)), "{e:?}");
    }

    #[test]
    fn browder_cubic() {
        let sp = SpacePair::<f64>::hilbert();
        let a = cubic(Sequence::constant(1.0), &sp);
        let rep = run_browder_surjectivity(
            &a,
            &sp,
            &[vec![8.0]],
            &Schedule::new(vec![1]).with_window(1),
            1e-6,
            &PipelineOptions::default(),
        )
        .unwrap();
        assert!(rep.pass);
        assert!((rep.targets[0].solution[0] - 2.0).abs() < 1e-7);
    }
}
