//! ε-approximate continuous selections of finite-rank maps.
//!
//! A selection `s` is ε-close to the graph of `T_n` when every `x` admits
//! `z` with `‖x - z‖ < ε` and `ẑ ∈ T_n(z)` with `‖s(x) - ẑ‖ < ε`. Each backend
//! also exposes witnesses, the `z` its construction pairs with `x`.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::brouwer::{EvalFn, FiniteMap, Region};
use crate::error::{Error, Result};
use crate::scalar::{norm2, resized, sub, Real};
use crate::setval::{AuditReport, MonotoneMap};

pub type WitnessFn<S> = Arc<dyn Fn(&[S]) -> Vec<Vec<S>> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMethod {
    /// The map is single-valued and used as is.
    Direct,
    /// Yosida approximation `(x - R_λ x) / λ`.
    Resolvent,
    /// Multilinear blend of minimal-norm values on a grid.
    PartitionOfUnity,
    /// Supplied by the caller; no construction guarantee.
    Custom,
}

#[derive(Clone)]
pub struct Selection<S> {
    eval: EvalFn<S>,
    witness: WitnessFn<S>,
    pub epsilon: S,
    pub method: SelectionMethod,
    pub n: usize,
    /// Recorded for the resolvent backend: `1/λ`.
    pub lipschitz: Option<S>,
    pub lambda: Option<S>,
    /// Sampled sup of `‖T_n⁰‖` on the ε-neighborhood (resolvent backend).
    pub bound: Option<S>,
    /// Grid spacing (partition-of-unity backend).
    pub spacing: Option<S>,
}

impl<S> fmt::Debug for Selection<S>
where
    S: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Selection")
            .field("method", &self.method)
            .field("epsilon", &self.epsilon)
            .field("n", &self.n)
            .field("lambda", &self.lambda)
            .finish_non_exhaustive()
    }
}

impl<S: Real> Selection<S> {
    pub fn custom(n: usize, epsilon: S, eval: impl Fn(&[S]) -> Vec<S> + Send + Sync + 'static) -> Self {
        Selection {
            eval: Arc::new(eval),
            witness: Arc::new(|_| Vec::new()),
            epsilon,
            method: SelectionMethod::Custom,
            n,
            lipschitz: None,
            lambda: None,
            bound: None,
            spacing: None,
        }
    }

    pub fn eval(&self, x: &[S]) -> Vec<S> {
        (self.eval)(x)
    }

    /// Graph points `z` the construction pairs with `x`.
    pub fn witness(&self, x: &[S]) -> Vec<Vec<S>> {
        (self.witness)(x)
    }

    pub fn as_finite_map(&self) -> FiniteMap<S> {
        let m = FiniteMap::from_arc(self.n, self.eval.clone());
        match self.lipschitz {
            Some(l) => m.with_lipschitz(l),
            None => m,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionOptions {
    /// Upper limit on partition-of-unity grid nodes.
    pub grid_budget: usize,
    /// Samples used to bound `‖T_n⁰‖` near the region.
    pub bound_samples: usize,
    pub seed: u64,
}

impl Default for SelectionOptions {
    fn default() -> Self {
        SelectionOptions { grid_budget: 1_000_000_000_000, bound_samples: 256, seed: 0 }
    }
}

fn min_norm_value<S: Real>(t: &MonotoneMap<S>, z: &[S], n: usize) -> Vec<S> {
    match t.finite_rank(z, n) {
        Ok(v) => v.min_norm_point(),
        Err(_) => vec![S::nan(); n],
    }
}

/// Seeded point of the box `[lo, hi]`, a quarter of coordinates snapped to the
/// box midpoint where set-valued gallery members branch.
fn sample_in<S: Real>(rng: &mut ChaCha8Rng, lo: &[S], hi: &[S], mid: &[S]) -> Vec<S> {
    (0..lo.len())
        .map(|i| if rng.gen_bool(0.25) { mid[i] } else { S::of(rng.gen_range(lo[i].as_f64()..=hi[i].as_f64())) })
        .collect()
}

fn center_of<S: Real>(region: &Region<S>) -> Vec<S> {
    match region {
        Region::Ball { center, .. } => center.clone(),
        Region::Box { lo, hi } => lo.iter().zip(hi).map(|(a, b)| (*a + *b) / S::of(2.0)).collect(),
    }
}

pub fn build_selection<S: Real>(
    t: &MonotoneMap<S>,
    n: usize,
    epsilon: S,
    region: &Region<S>,
    opts: &SelectionOptions,
) -> Result<Selection<S>> {
    if !region.is_valid() {
        return Err(Error::RegionUnbounded);
    }
    if region.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: region.dim() });
    }
    if !(epsilon > S::zero() && epsilon.is_finite()) {
        return Err(Error::BadParams {
            operator: "selection".into(),
            detail: format!("epsilon {epsilon} must be positive"),
        });
    }
    let base = Selection {
        eval: Arc::new(|_: &[S]| Vec::new()) as EvalFn<S>,
        witness: Arc::new(|_: &[S]| Vec::new()) as WitnessFn<S>,
        epsilon,
        method: SelectionMethod::Direct,
        n,
        lipschitz: None,
        lambda: None,
        bound: None,
        spacing: None,
    };
    if t.is_single_valued() {
        let tt = t.clone();
        return Ok(Selection {
            eval: Arc::new(move |x| min_norm_value(&tt, x, n)),
            witness: Arc::new(move |x| vec![resized(x, n)]),
            ..base
        });
    }
    let (lo, hi) = region.bounding_box();
    let lo: Vec<S> = lo.iter().map(|&v| v - epsilon).collect();
    let hi: Vec<S> = hi.iter().map(|&v| v + epsilon).collect();
    let mid = center_of(region);
    if t.has_resolvent() {
        yosida(t, n, epsilon, &lo, &hi, &mid, opts, base)
    } else {
        partition_of_unity(t, n, epsilon, &lo, &hi, &mid, opts, base)
    }
}

#[allow(clippy::too_many_arguments)]
fn yosida<S: Real>(
    t: &MonotoneMap<S>,
    n: usize,
    epsilon: S,
    lo: &[S],
    hi: &[S],
    mid: &[S],
    opts: &SelectionOptions,
    base: Selection<S>,
) -> Result<Selection<S>> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x005e_1ec7);
    let mut pts: Vec<Vec<S>> = vec![mid.to_vec(), lo.to_vec(), hi.to_vec()];
    (0..opts.bound_samples.max(1)).for_each(|_| pts.push(sample_in(&mut rng, lo, hi, mid)));
    let bound = pts.iter().map(|z| norm2(&min_norm_value(t, z, n))).fold(S::zero(), S::max);
    if !bound.is_finite() {
        return Err(Error::OperatorDomainError {
            operator: t.label().into(),
            detail: "unbounded values near the region".into(),
        });
    }
    let mut lambda = epsilon / (S::of(2.0) * (S::one() + bound));
    // the resolvent may be an inner fixed point; shrink λ until it is exact
    // to working precision on the probe points and moves x by less than ε/2
    for _ in 0..20 {
        let ok = pts.iter().take(48).all(|x| {
            let z = t.resolvent(x, lambda, n).unwrap();
            let v: Vec<S> = x.iter().zip(&z).map(|(a, b)| (*a - *b) / lambda).collect();
            let gap = t.finite_rank(&z, n).map(|val| val.distance(&v)).unwrap_or(S::infinity());
            gap <= S::of(1e-9) * (S::one() + norm2(&v)) + S::of(1e3) * S::epsilon() / lambda
                && norm2(&sub(x, &z)) < epsilon / S::of(2.0)
        });
        if ok {
            break;
        }
        lambda /= S::of(4.0);
    }
    let (te, tw) = (t.clone(), t.clone());
    Ok(Selection {
        eval: Arc::new(move |x| {
            let x = resized(x, n);
            let z = te.resolvent(&x, lambda, n).unwrap();
            x.iter().zip(&z).map(|(a, b)| (*a - *b) / lambda).collect()
        }),
        witness: Arc::new(move |x| vec![tw.resolvent(&resized(x, n), lambda, n).unwrap()]),
        method: SelectionMethod::Resolvent,
        lipschitz: Some(S::one() / lambda),
        lambda: Some(lambda),
        bound: Some(bound),
        ..base
    })
}

#[allow(clippy::too_many_arguments)]
fn partition_of_unity<S: Real>(
    t: &MonotoneMap<S>,
    n: usize,
    epsilon: S,
    lo: &[S],
    hi: &[S],
    mid: &[S],
    opts: &SelectionOptions,
    base: Selection<S>,
) -> Result<Selection<S>> {
    // cells of diameter ε/2 around a lattice through the region center
    let h = epsilon / (S::of(2.0) * S::of(n as f64).sqrt());
    let nodes: f64 = (0..n).map(|i| ((hi[i] - lo[i]) / h).as_f64().ceil() + 1.0).product();
    if nodes > opts.grid_budget as f64 {
        return Err(Error::GridTooFine { cells: nodes.min(usize::MAX as f64) as usize, budget: opts.grid_budget });
    }
    let origin = mid.to_vec();
    let corners = move |x: &[S]| -> (Vec<Vec<S>>, Vec<S>) {
        let mut base_pt = Vec::with_capacity(n);
        let mut frac = Vec::with_capacity(n);
        for (i, &o) in origin.iter().enumerate() {
            let u = (x.get(i).copied().unwrap_or_else(S::zero) - o) / h;
            let k = u.floor();
            base_pt.push(o + k * h);
            frac.push(u - k);
        }
        let mut pts = Vec::with_capacity(1 << n);
        let mut weights = Vec::with_capacity(1 << n);
        for mask in 0..(1usize << n) {
            let mut p = base_pt.clone();
            let mut w = S::one();
            for i in 0..n {
                if mask >> i & 1 == 1 {
                    p[i] += h;
                    w *= frac[i];
                } else {
                    w *= S::one() - frac[i];
                }
            }
            pts.push(p);
            weights.push(w);
        }
        (pts, weights)
    };
    let te = t.clone();
    let corners_w = corners.clone();
    Ok(Selection {
        eval: Arc::new(move |x| {
            let (pts, weights) = corners(x);
            let mut out = vec![S::zero(); n];
            for (p, w) in pts.iter().zip(weights) {
                if w == S::zero() {
                    continue;
                }
                for (o, v) in out.iter_mut().zip(min_norm_value(&te, p, n)) {
                    *o += w * v;
                }
            }
            out
        }),
        witness: Arc::new(move |x| corners_w(x).0),
        method: SelectionMethod::PartitionOfUnity,
        spacing: Some(h),
        ..base
    })
}

/// Sampled graph-proximity audit: each `x` must admit a candidate `z` with
/// `‖x - z‖ < ε` and `dist(s(x), T_n(z)) < ε(1 + 1e-6)`. Candidates are
/// `x`, the selection's witnesses and a small stencil around `x`.
pub fn audit_selection<S: Real>(
    s: &Selection<S>,
    t: &MonotoneMap<S>,
    region: &Region<S>,
    samples: usize,
    seed: u64,
) -> AuditReport {
    let n = s.n;
    let eps = s.epsilon;
    let limit = eps * S::of(1.0 + 1e-6);
    let (lo, hi) = region.bounding_box();
    let mid = center_of(region);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let stencil: Vec<Vec<S>> = {
        let r = S::of(0.9) * eps / S::of(n.max(1) as f64).sqrt();
        let mut out = Vec::new();
        if n <= 4 {
            for code in 0..3usize.pow(n as u32) {
                let mut c = code;
                out.push(
                    (0..n)
                        .map(|_| {
                            let d = c % 3;
                            c /= 3;
                            S::of(d as f64 - 1.0) * r
                        })
                        .collect(),
                );
            }
        } else {
            for i in 0..n {
                for sgn in [S::one(), -S::one()] {
                    let mut e = vec![S::zero(); n];
                    e[i] = sgn * r;
                    out.push(e);
                }
            }
        }
        out
    };
    let mut passed = 0;
    let mut worst = 0.0f64;
    let total = samples.max(1);
    for _ in 0..total {
        let mut x = sample_in(&mut rng, &lo, &hi, &mid);
        for _ in 0..64 {
            if region.contains(&x, S::zero()) {
                break;
            }
            x = sample_in(&mut rng, &lo, &hi, &mid);
        }
        let v = s.eval(&x);
        let mut cands = vec![x.clone()];
        cands.extend(s.witness(&x));
        cands.extend(stencil.iter().map(|d| x.iter().zip(d).map(|(a, b)| *a + *b).collect()));
        let gap = cands
            .iter()
            .filter(|z| norm2(&sub(&x, z)) < eps)
            .filter_map(|z| t.finite_rank(z, n).ok().map(|val| val.distance(&v)))
            .fold(S::infinity(), S::min);
        if gap < limit {
            passed += 1;
        }
        worst = worst.max(gap.as_f64());
    }
    AuditReport { samples: total, passed, worst, pass: passed == total }
}
