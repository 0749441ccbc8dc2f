//! Degree by counting signed preimages of a small generic target.
//!
//! For `|q| < dist(0, g(∂R))` the degree at `q` equals the degree at 0, and
//! a generic `q` only has regular preimages even when `g` has a degenerate
//! zero (odd powers, `|x|^{p-2}x`). Preimages are isolated by subdivision:
//! a box is dropped when a first-order bound excludes a zero, in norm or in
//! a single component, and it is solved when its linearization dominates
//! the remainder.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::linalg::{condition, matvec, Lu};
use super::region::{auto_grid, boundary_distance, BoundaryEstimate, FiniteMap, Region};
use crate::error::{Error, Result};
use crate::scalar::{norm2, sub, Real};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeOptions {
    /// Boundary-margin floor and zero-residual tolerance.
    pub tol: f64,
    /// Maximum number of processed boxes.
    pub budget: usize,
    pub seed: u64,
    /// `|q| = jitter · margin`.
    pub jitter: f64,
    pub condition_limit: f64,
    /// Boundary grid per face direction; `None` picks [`auto_grid`].
    pub grid: Option<usize>,
}

impl Default for DegreeOptions {
    fn default() -> Self {
        DegreeOptions { tol: 1e-9, budget: 200_000, seed: 0, jitter: 0.05, condition_limit: 1e8, grid: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocatedZero<S> {
    pub point: Vec<S>,
    pub sign: i64,
    pub residual: S,
    pub condition: S,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeResult<S> {
    pub degree: i64,
    /// Preimages of `target`.
    pub zeros: Vec<LocatedZero<S>>,
    pub boxes: usize,
    pub margin: BoundaryEstimate<S>,
    pub target: Vec<S>,
}

pub fn degree<S: Real>(g: &FiniteMap<S>, region: &Region<S>, opts: &DegreeOptions) -> Result<i64> {
    locate(g, region, opts).map(|r| r.degree)
}

pub(crate) fn fd_jacobian<S: Real>(h: &dyn Fn(&[S]) -> Vec<S>, x: &[S], steps: &[S]) -> Vec<S> {
    let n = x.len();
    let mut a = vec![S::zero(); n * n];
    let mut xp = x.to_vec();
    for j in 0..n {
        let s = steps[j];
        xp[j] = x[j] + s;
        let fp = h(&xp);
        xp[j] = x[j] - s;
        let fm = h(&xp);
        xp[j] = x[j];
        for i in 0..n {
            a[i * n + j] = (fp[i] - fm[i]) / (s + s);
        }
    }
    a
}

pub(crate) fn point_steps<S: Real>(x: &[S]) -> Vec<S> {
    x.iter().map(|v| S::fd_step() * (S::one() + v.abs())).collect()
}

/// Damped Newton with finite-difference Jacobians.
pub(crate) fn newton<S: Real>(h: &dyn Fn(&[S]) -> Vec<S>, x0: &[S], res_tol: S, max_iter: usize) -> (Vec<S>, S) {
    let mut x = x0.to_vec();
    let mut fx = h(&x);
    let mut r = norm2(&fx);
    let n = x.len();
    for _ in 0..max_iter {
        if !(r > res_tol) {
            break;
        }
        let a = fd_jacobian(h, &x, &point_steps(&x));
        let Some(dx) = Lu::new(a, n).solve(&fx) else { break };
        let mut t = S::one();
        let mut moved = false;
        for _ in 0..30 {
            let cand: Vec<S> = x.iter().zip(&dx).map(|(&xi, &d)| xi - t * d).collect();
            let fc = h(&cand);
            let rc = norm2(&fc);
            if rc < r {
                x = cand;
                fx = fc;
                r = rc;
                moved = true;
                break;
            }
            t /= S::of(2.0);
        }
        if !moved {
            break;
        }
    }
    (x, r)
}

struct Cell<S> {
    lo: Vec<S>,
    hi: Vec<S>,
}

enum Verdict<S> {
    Excluded,
    Zero(Vec<S>),
    Split,
}

pub fn locate<S: Real>(g: &FiniteMap<S>, region: &Region<S>, opts: &DegreeOptions) -> Result<DegreeResult<S>> {
    let n = region.dim();
    if g.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: g.dim() });
    }
    let grid = opts.grid.unwrap_or_else(|| auto_grid(n));
    let margin = boundary_distance(g, region, grid);
    // the guard uses the sampled minimum; the Lipschitz-slackened bound is
    // reported alongside
    if !(margin.sampled_min.as_f64() > opts.tol) {
        return Err(Error::BoundaryTooClose { distance: margin.sampled_min.as_f64(), tol: opts.tol });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut u: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let nu = u.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    u.iter_mut().for_each(|v| *v /= nu);
    let qn = opts.jitter * margin.sampled_min.as_f64();
    let target: Vec<S> = u.iter().map(|&v| S::of(qn * v)).collect();
    let h = |x: &[S]| sub(&g.eval(x), &target);

    let (lo, hi) = region.bounding_box();
    let scale = lo.iter().zip(&hi).map(|(a, b)| (*b - *a).as_f64()).fold(0.0, f64::max).max(1e-300);
    let tiny = 1e-10 * scale;
    let accept = S::of(opts.tol.max(100.0 * S::epsilon().as_f64() * (1.0 + margin.sampled_min.as_f64())));
    let mut stack = vec![Cell { lo, hi }];
    let mut zeros: Vec<Vec<S>> = Vec::new();
    let mut boxes = 0usize;
    while let Some(cell) = stack.pop() {
        boxes += 1;
        if boxes > opts.budget {
            return Err(Error::BudgetExhausted { budget: opts.budget });
        }
        if region.misses_box(&cell.lo, &cell.hi) {
            continue;
        }
        match examine(&h, &cell, tiny, accept)? {
            Verdict::Excluded => {}
            Verdict::Zero(z) => {
                let sep = S::of(1e-7 * scale);
                if region.contains(&z, S::zero()) && zeros.iter().all(|w| norm2(&sub(w, &z)) > sep) {
                    zeros.push(z);
                }
            }
            Verdict::Split => {
                let k = (0..n)
                    .max_by(|&a, &b| (cell.hi[a] - cell.lo[a]).partial_cmp(&(cell.hi[b] - cell.lo[b])).unwrap())
                    .unwrap_or(0);
                let mid = (cell.lo[k] + cell.hi[k]) / S::of(2.0);
                let mut left_hi = cell.hi.clone();
                left_hi[k] = mid;
                let mut right_lo = cell.lo.clone();
                right_lo[k] = mid;
                stack.push(Cell { lo: right_lo, hi: cell.hi });
                stack.push(Cell { lo: cell.lo, hi: left_hi });
            }
        }
    }
    zeros.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut located = Vec::with_capacity(zeros.len());
    let mut total = 0i64;
    for z in zeros {
        let a = fd_jacobian(&h, &z, &point_steps(&z));
        let cond = condition(&a, n);
        if !(cond.as_f64() <= opts.condition_limit) {
            return Err(Error::DegenerateZero {
                point: z.iter().map(|v| v.as_f64()).collect(),
                condition: cond.as_f64(),
            });
        }
        let sign = if Lu::new(a, n).det() > S::zero() { 1 } else { -1 };
        total += sign;
        let residual = norm2(&h(&z));
        located.push(LocatedZero { point: z, sign, residual, condition: cond });
    }
    Ok(DegreeResult { degree: total, zeros: located, boxes, margin, target })
}

/// Corner sign patterns probed per box: all corners up to dimension 5,
/// otherwise the two constant patterns and the dyadic alternations with
/// their negations.
fn corner_patterns(n: usize) -> Vec<Vec<bool>> {
    if n <= 5 {
        return (0..1usize << n).map(|m| (0..n).map(|i| m >> i & 1 == 1).collect()).collect();
    }
    let mut out = vec![vec![true; n], vec![false; n]];
    let mut m = 0;
    while 1usize << m < n {
        let p: Vec<bool> = (0..n).map(|i| i >> m & 1 == 1).collect();
        out.push(p.iter().map(|b| !b).collect());
        out.push(p);
        m += 1;
    }
    out
}

fn examine<S: Real>(h: &dyn Fn(&[S]) -> Vec<S>, cell: &Cell<S>, tiny: f64, accept: S) -> Result<Verdict<S>> {
    let n = cell.lo.len();
    let two = S::of(2.0);
    let c: Vec<S> = cell.lo.iter().zip(&cell.hi).map(|(a, b)| (*a + *b) / two).collect();
    let hw: Vec<S> = cell.lo.iter().zip(&cell.hi).map(|(a, b)| (*b - *a) / two).collect();
    let f0 = h(&c);
    let nf0 = norm2(&f0);
    let mut probes: Vec<(Vec<S>, Vec<S>)> = Vec::with_capacity(2 * n + 2);
    let mut a = vec![S::zero(); n * n];
    for i in 0..n {
        let mut xp = c.clone();
        xp[i] += hw[i];
        let mut xm = c.clone();
        xm[i] -= hw[i];
        let (fp, fm) = (h(&xp), h(&xm));
        for r in 0..n {
            a[r * n + i] = (fp[r] - fm[r]) / (hw[i] + hw[i]);
        }
        probes.push((xp, fp));
        probes.push((xm, fm));
    }
    for signs in corner_patterns(n) {
        let x: Vec<S> = (0..n).map(|i| if signs[i] { c[i] + hw[i] } else { c[i] - hw[i] }).collect();
        let fx = h(&x);
        probes.push((x, fx));
    }
    let var = probes.iter().map(|(_, f)| norm2(&sub(f, &f0))).fold(S::zero(), S::max);
    if nf0.is_finite() && var.is_finite() && nf0 > two * var {
        return Ok(Verdict::Excluded);
    }
    // remainder of the central-difference model at the probes, per component
    let mut dev_i = vec![S::zero(); n];
    for (x, f) in &probes {
        let lin = matvec(&a, n, &sub(x, &c));
        for r in 0..n {
            dev_i[r] = dev_i[r].max((f[r] - f0[r] - lin[r]).abs());
        }
    }
    let finite = a.iter().chain(&dev_i).all(|v| v.is_finite());
    // one component bounded away from 0 on the box rules out a zero
    if finite
        && (0..n).any(|r| {
            let spread: S = (0..n).map(|j| a[r * n + j].abs() * hw[j]).sum();
            f0[r].abs() > spread + two * dev_i[r]
        })
    {
        return Ok(Verdict::Excluded);
    }
    let widest = hw.iter().fold(S::zero(), |m, w| m.max(*w)).as_f64();
    let narrowest = hw.iter().fold(S::infinity(), |m, w| m.min(*w));
    let lu = Lu::new(a.clone(), n);
    let inv = lu.inverse();
    let regular = inv.as_ref().is_some_and(|inv| {
        let ninv = inv.iter().map(|v| *v * *v).sum::<S>().sqrt();
        let dev = dev_i.iter().map(|v| *v * *v).sum::<S>().sqrt();
        ninv * two * dev / narrowest <= S::of(0.5)
    });
    if regular {
        let inv = inv.unwrap();
        // simplified Newton is a contraction on a regular box
        let mut x = c.clone();
        let mut fx = f0.clone();
        for _ in 0..100 {
            let dx = matvec(&inv, n, &fx);
            x = x.iter().zip(&dx).map(|(a, b)| *a - *b).collect();
            let outside = (0..n).any(|i| ((x[i] - c[i]) / hw[i]).abs() > S::of(1.0 + 1e-9));
            if outside || !x.iter().all(|v| v.is_finite()) {
                let far = (0..n).map(|i| ((x[i] - c[i]) / hw[i]).abs().as_f64()).fold(0.0, f64::max);
                return Ok(if far < 3.0 && widest > tiny { Verdict::Split } else { Verdict::Excluded });
            }
            fx = h(&x);
            if norm2(&dx).as_f64() <= 1e-14 * (1.0 + norm2(&x).as_f64()) {
                break;
            }
        }
        let (z, r) = newton(h, &x, accept / S::of(1e3), 40);
        if r <= accept {
            return Ok(Verdict::Zero(z));
        }
        return Ok(if widest > tiny { Verdict::Split } else { Verdict::Excluded });
    }
    if widest > tiny {
        return Ok(Verdict::Split);
    }
    let (z, r) = newton(h, &c, accept / S::of(1e3), 40);
    if r <= accept && (0..n).all(|i| ((z[i] - c[i]) / hw[i]).abs() <= S::of(1.0 + 1e-6)) {
        return Ok(Verdict::Zero(z));
    }
    if nf0 <= accept {
        let jac = fd_jacobian(h, &c, &point_steps(&c));
        return Err(Error::DegenerateZero {
            point: c.iter().map(|v| v.as_f64()).collect(),
            condition: condition(&jac, n).as_f64(),
        });
    }
    Ok(Verdict::Excluded)
}
