use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::scalar::{norm2, Real};
use crate::space::norm;

pub type EvalFn<S> = Arc<dyn Fn(&[S]) -> Vec<S> + Send + Sync>;

/// A continuous `g : Rⁿ → Rⁿ`, total on the closed region of interest.
#[derive(Clone)]
pub struct FiniteMap<S> {
    eval: EvalFn<S>,
    dim: usize,
    lipschitz_hint: Option<S>,
}

impl<S> fmt::Debug for FiniteMap<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteMap").field("dim", &self.dim).finish_non_exhaustive()
    }
}

impl<S: Real> FiniteMap<S> {
    pub fn new(dim: usize, eval: impl Fn(&[S]) -> Vec<S> + Send + Sync + 'static) -> Self {
        FiniteMap { eval: Arc::new(eval), dim, lipschitz_hint: None }
    }

    pub fn from_arc(dim: usize, eval: EvalFn<S>) -> Self {
        FiniteMap { eval, dim, lipschitz_hint: None }
    }

    pub fn with_lipschitz(mut self, l: S) -> Self {
        self.lipschitz_hint = Some(l);
        self
    }

    pub fn identity(dim: usize) -> Self {
        FiniteMap::new(dim, |x: &[S]| x.to_vec()).with_lipschitz(S::one())
    }

    pub fn eval(&self, x: &[S]) -> Vec<S> {
        (self.eval)(x)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lipschitz_hint(&self) -> Option<S> {
        self.lipschitz_hint
    }
}

/// Bounded open region of `Rⁿ`. Balls are taken in the `ℓ^p` norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Region<S> {
    Ball { center: Vec<S>, radius: S, p: S },
    Box { lo: Vec<S>, hi: Vec<S> },
}

impl<S: Real> Region<S> {
    /// Euclidean ball.
    pub fn ball(center: Vec<S>, radius: S) -> Self {
        Region::Ball { center, radius, p: S::of(2.0) }
    }

    pub fn unit_ball(n: usize) -> Self {
        Region::ball(vec![S::zero(); n], S::one())
    }

    pub fn cube(n: usize, half: S) -> Self {
        Region::Box { lo: vec![-half; n], hi: vec![half; n] }
    }

    pub fn dim(&self) -> usize {
        match self {
            Region::Ball { center, .. } => center.len(),
            Region::Box { lo, .. } => lo.len(),
        }
    }

    pub fn is_valid(&self) -> bool {
        match self {
            Region::Ball { center, radius, p } => {
                *radius > S::zero() && radius.is_finite() && *p > S::one() && center.iter().all(|c| c.is_finite())
            }
            Region::Box { lo, hi } => {
                lo.len() == hi.len() && lo.iter().zip(hi).all(|(a, b)| a < b && a.is_finite() && b.is_finite())
            }
        }
    }

    /// Open-region membership, with `slack` relative to the region size.
    pub fn contains(&self, x: &[S], slack: S) -> bool {
        match self {
            Region::Ball { center, radius, p } => {
                let d: Vec<S> = x.iter().zip(center).map(|(a, c)| *a - *c).collect();
                norm(&d, *p) < *radius * (S::one() + slack)
            }
            Region::Box { lo, hi } => x.iter().zip(lo.iter().zip(hi)).all(|(v, (a, b))| {
                let pad = (*b - *a) * slack;
                *v > *a - pad && *v < *b + pad
            }),
        }
    }

    pub fn bounding_box(&self) -> (Vec<S>, Vec<S>) {
        match self {
            Region::Ball { center, radius, .. } => {
                (center.iter().map(|&c| c - *radius).collect(), center.iter().map(|&c| c + *radius).collect())
            }
            Region::Box { lo, hi } => (lo.clone(), hi.clone()),
        }
    }

    /// Whether the closed box `[lo, hi]` avoids the closed region.
    pub(crate) fn misses_box(&self, lo: &[S], hi: &[S]) -> bool {
        match self {
            Region::Ball { center, radius, p } => {
                let d: Vec<S> =
                    center.iter().zip(lo.iter().zip(hi)).map(|(&c, (&a, &b))| c.max(a).min(b) - c).collect();
                norm(&d, *p) > *radius
            }
            Region::Box { lo: rl, hi: rh } => (0..lo.len()).any(|i| hi[i] < rl[i] || lo[i] > rh[i]),
        }
    }

    /// Largest `‖z‖_q` over the boundary.
    pub fn max_boundary_norm(&self, q: S) -> S {
        match self {
            Region::Ball { center, radius, p } => {
                if (*p - q).abs() <= S::epsilon() {
                    norm(center, q) + *radius
                } else {
                    // corners of the bounding box dominate the sphere
                    let (lo, hi) = self.bounding_box();
                    box_corner_max(&lo, &hi, q)
                }
            }
            Region::Box { lo, hi } => box_corner_max(lo, hi, q),
        }
    }

    /// Grid spacing of [`Region::boundary_samples`] in the Euclidean norm.
    pub fn mesh(&self, grid: usize) -> S {
        let g = S::of(grid.max(2) as f64 - 1.0);
        let n = self.dim();
        if n <= 1 {
            return S::zero();
        }
        match self {
            Region::Ball { radius, .. } => *radius * S::of(2.0) * S::of(((n - 1) as f64).sqrt()) / g,
            Region::Box { lo, hi } => {
                let cells: Vec<S> = lo.iter().zip(hi).map(|(a, b)| (*b - *a) / g).collect();
                let total: S = cells.iter().map(|c| *c * *c).sum();
                let widest = cells.iter().fold(S::zero(), |m, c| m.max(*c));
                (total - widest * widest).max(S::zero()).sqrt()
            }
        }
    }

    /// Deterministic boundary grid with `grid` points per face direction.
    /// Ball samples are cube-face grids projected radially, plus the axis
    /// points `c ± r eₖ`.
    pub fn boundary_samples(&self, grid: usize) -> Vec<Vec<S>> {
        let n = self.dim();
        let g = grid.max(2);
        let mut out = Vec::new();
        if n == 0 {
            return out;
        }
        let ticks =
            |a: S, b: S| -> Vec<S> { (0..g).map(|j| a + (b - a) * S::of(j as f64) / S::of((g - 1) as f64)).collect() };
        let (flo, fhi) = match self {
            Region::Ball { .. } => (vec![-S::one(); n], vec![S::one(); n]),
            Region::Box { lo, hi } => (lo.clone(), hi.clone()),
        };
        for axis in 0..n {
            for side in [flo[axis], fhi[axis]] {
                let others: Vec<usize> = (0..n).filter(|&i| i != axis).collect();
                let axes: Vec<Vec<S>> = others.iter().map(|&i| ticks(flo[i], fhi[i])).collect();
                let total = g.pow(others.len() as u32);
                for idx in 0..total {
                    let mut x = vec![S::zero(); n];
                    x[axis] = side;
                    let mut r = idx;
                    for (slot, &i) in others.iter().enumerate() {
                        x[i] = axes[slot][r % g];
                        r /= g;
                    }
                    out.push(x);
                }
            }
        }
        if let Region::Ball { center, radius, p } = self {
            for k in 0..n {
                for s in [S::one(), -S::one()] {
                    let mut e = vec![S::zero(); n];
                    e[k] = s;
                    out.push(e);
                }
            }
            for x in out.iter_mut() {
                let nx = norm(x, *p);
                for (xi, ci) in x.iter_mut().zip(center) {
                    *xi = *ci + *radius * *xi / nx;
                }
            }
        }
        out
    }

    /// Projection onto the boundary, used by local refinement.
    pub(crate) fn project_boundary(&self, x: &[S]) -> Vec<S> {
        match self {
            Region::Ball { center, radius, p } => {
                let d: Vec<S> = x.iter().zip(center).map(|(a, c)| *a - *c).collect();
                let nd = norm(&d, *p);
                if nd == S::zero() {
                    let mut e = center.clone();
                    e[0] += *radius;
                    return e;
                }
                d.iter().zip(center).map(|(di, ci)| *ci + *radius * *di / nd).collect()
            }
            Region::Box { lo, hi } => {
                let mut y: Vec<S> = x.iter().zip(lo.iter().zip(hi)).map(|(v, (a, b))| v.max(*a).min(*b)).collect();
                let on_face = (0..y.len()).any(|i| y[i] == lo[i] || y[i] == hi[i]);
                if !on_face {
                    // push out through the nearest face
                    let mut best = (0, false, S::infinity());
                    for i in 0..y.len() {
                        let (dl, dh) = (y[i] - lo[i], hi[i] - y[i]);
                        if dl < best.2 {
                            best = (i, false, dl);
                        }
                        if dh < best.2 {
                            best = (i, true, dh);
                        }
                    }
                    let (i, to_hi, _) = best;
                    y[i] = if to_hi { hi[i] } else { lo[i] };
                }
                y
            }
        }
    }
}

fn box_corner_max<S: Real>(lo: &[S], hi: &[S], q: S) -> S {
    let far: Vec<S> = lo.iter().zip(hi).map(|(a, b)| a.abs().max(b.abs())).collect();
    norm(&far, q)
}

/// Sampled lower estimate of `min_{∂R} ‖g‖₂`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryEstimate<S> {
    /// Lower estimate; equals `sampled_min` when not rigorous.
    pub distance: S,
    pub sampled_min: S,
    pub argmin: Vec<S>,
    /// Lipschitz slack was subtracted.
    pub rigorous: bool,
    pub samples: usize,
}

/// Points per face direction keeping the boundary grid near 20k samples.
pub fn auto_grid(n: usize) -> usize {
    if n <= 1 {
        return 2;
    }
    let per_face = 20_000.0 / (2.0 * n as f64);
    let g = per_face.powf(1.0 / (n as f64 - 1.0)).floor() as usize;
    g.clamp(3, 401)
}

pub fn boundary_distance<S: Real>(g: &FiniteMap<S>, region: &Region<S>, grid: usize) -> BoundaryEstimate<S> {
    let pts = region.boundary_samples(grid);
    let mut best = S::infinity();
    let mut arg = Vec::new();
    for z in &pts {
        let v = norm2(&g.eval(z));
        // NaN counts as a hit
        if !(v >= best) {
            best = if v.is_nan() { S::zero() } else { v };
            arg = z.clone();
            if v.is_nan() {
                break;
            }
        }
    }
    let (distance, rigorous) = match g.lipschitz_hint() {
        Some(l) => ((best - l * region.mesh(grid) / S::of(2.0)).max(S::zero()), true),
        None => (best, false),
    };
    BoundaryEstimate { distance, sampled_min: best, argmin: arg, rigorous, samples: pts.len() }
}
