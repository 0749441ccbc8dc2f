use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{add, dot, norm2, scale, sub, Real};

/// A nonempty closed bounded convex subset of `R^n`, stored exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConvexValue<S> {
    Point(Vec<S>),
    Box {
        lo: Vec<S>,
        hi: Vec<S>,
    },
    Ball {
        center: Vec<S>,
        radius: S,
    },
    /// Convex hull of the listed vertices.
    Polytope(Vec<Vec<S>>),
    Segment(Vec<S>, Vec<S>),
    /// Minkowski sum of the parts, kept unexpanded when no closed variant fits.
    Minkowski(Vec<ConvexValue<S>>),
}

impl<S: Real> ConvexValue<S> {
    pub fn dim(&self) -> usize {
        match self {
            ConvexValue::Point(p) => p.len(),
            ConvexValue::Box { lo, .. } => lo.len(),
            ConvexValue::Ball { center, .. } => center.len(),
            ConvexValue::Polytope(v) => v.first().map_or(0, Vec::len),
            ConvexValue::Segment(a, _) => a.len(),
            ConvexValue::Minkowski(parts) => parts.first().map_or(0, ConvexValue::dim),
        }
    }

    /// Checks the structural invariants of the variant.
    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        let finite = |v: &[S]| v.iter().all(|x| x.is_finite());
        let same = |v: &[S]| {
            if v.len() == n {
                Ok(())
            } else {
                Err(Error::DimensionMismatch { expected: n, got: v.len() })
            }
        };
        let bad = |d: &str| Err(Error::BadParams { operator: "ConvexValue".into(), detail: d.into() });
        match self {
            ConvexValue::Point(p) => {
                if !finite(p) {
                    return bad("non-finite point");
                }
            }
            ConvexValue::Box { lo, hi } => {
                same(hi)?;
                if !finite(lo) || !finite(hi) {
                    return bad("non-finite box");
                }
                if lo.iter().zip(hi).any(|(l, h)| l > h) {
                    return bad("box requires lo <= hi");
                }
            }
            ConvexValue::Ball { center, radius } => {
                if !finite(center) || !radius.is_finite() || *radius < S::zero() {
                    return bad("ball requires finite center and radius >= 0");
                }
            }
            ConvexValue::Polytope(vs) => {
                if vs.is_empty() {
                    return bad("polytope vertex list is empty");
                }
                for v in vs {
                    same(v)?;
                    if !finite(v) {
                        return bad("non-finite vertex");
                    }
                }
            }
            ConvexValue::Segment(a, b) => {
                same(b)?;
                if !finite(a) || !finite(b) {
                    return bad("non-finite segment");
                }
            }
            ConvexValue::Minkowski(parts) => {
                if parts.is_empty() {
                    return bad("empty Minkowski sum");
                }
                for p in parts {
                    if p.dim() != n {
                        return Err(Error::DimensionMismatch { expected: n, got: p.dim() });
                    }
                    p.validate()?;
                }
            }
        }
        Ok(())
    }

    /// `max_{s ∈ C} ⟨s, d⟩`.
    pub fn support(&self, d: &[S]) -> Result<S> {
        self.check_dim(d.len())?;
        Ok(self.support_unchecked(d))
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got });
        }
        Ok(())
    }

    fn support_unchecked(&self, d: &[S]) -> S {
        match self {
            ConvexValue::Point(p) => dot(p, d),
            ConvexValue::Box { lo, hi } => lo.iter().zip(hi).zip(d).map(|((&l, &h), &di)| (l * di).max(h * di)).sum(),
            ConvexValue::Ball { center, radius } => dot(center, d) + *radius * norm2(d),
            ConvexValue::Polytope(vs) => vs.iter().map(|v| dot(v, d)).fold(S::neg_infinity(), S::max),
            ConvexValue::Segment(a, b) => dot(a, d).max(dot(b, d)),
            ConvexValue::Minkowski(parts) => parts.iter().map(|p| p.support_unchecked(d)).sum(),
        }
    }

    /// A point of the set attaining [`support`](Self::support) in direction `d`.
    pub fn support_point(&self, d: &[S]) -> Vec<S> {
        match self {
            ConvexValue::Point(p) => p.clone(),
            ConvexValue::Box { lo, hi } => {
                lo.iter().zip(hi).zip(d).map(|((&l, &h), &di)| if di >= S::zero() { h } else { l }).collect()
            }
            ConvexValue::Ball { center, radius } => {
                let nd = norm2(d);
                if nd.is_zero() {
                    center.clone()
                } else {
                    add(center, &scale(d, *radius / nd))
                }
            }
            ConvexValue::Polytope(vs) => {
                let mut best = &vs[0];
                let mut val = dot(best, d);
                for v in &vs[1..] {
                    let x = dot(v, d);
                    if x > val {
                        val = x;
                        best = v;
                    }
                }
                best.clone()
            }
            ConvexValue::Segment(a, b) => {
                if dot(b, d) > dot(a, d) {
                    b.clone()
                } else {
                    a.clone()
                }
            }
            ConvexValue::Minkowski(parts) => {
                let mut acc = vec![S::zero(); self.dim()];
                for p in parts {
                    acc = add(&acc, &p.support_point(d));
                }
                acc
            }
        }
    }

    pub fn translate(&self, t: &[S]) -> Self {
        match self {
            ConvexValue::Point(p) => ConvexValue::Point(add(p, t)),
            ConvexValue::Box { lo, hi } => ConvexValue::Box { lo: add(lo, t), hi: add(hi, t) },
            ConvexValue::Ball { center, radius } => ConvexValue::Ball { center: add(center, t), radius: *radius },
            ConvexValue::Polytope(vs) => ConvexValue::Polytope(vs.iter().map(|v| add(v, t)).collect()),
            ConvexValue::Segment(a, b) => ConvexValue::Segment(add(a, t), add(b, t)),
            ConvexValue::Minkowski(parts) => {
                let mut parts = parts.clone();
                parts[0] = parts[0].translate(t);
                ConvexValue::Minkowski(parts)
            }
        }
    }

    /// The image `{c s : s ∈ C}`.
    pub fn scaled(&self, c: S) -> Self {
        if c.is_zero() {
            return ConvexValue::Point(vec![S::zero(); self.dim()]);
        }
        match self {
            ConvexValue::Point(p) => ConvexValue::Point(scale(p, c)),
            ConvexValue::Box { lo, hi } => {
                let (l, h) = (scale(lo, c), scale(hi, c));
                if c > S::zero() {
                    ConvexValue::Box { lo: l, hi: h }
                } else {
                    ConvexValue::Box { lo: h, hi: l }
                }
            }
            ConvexValue::Ball { center, radius } => {
                ConvexValue::Ball { center: scale(center, c), radius: *radius * c.abs() }
            }
            ConvexValue::Polytope(vs) => ConvexValue::Polytope(vs.iter().map(|v| scale(v, c)).collect()),
            ConvexValue::Segment(a, b) => ConvexValue::Segment(scale(a, c), scale(b, c)),
            ConvexValue::Minkowski(parts) => ConvexValue::Minkowski(parts.iter().map(|p| p.scaled(c)).collect()),
        }
    }

    /// Minkowski sum, collapsed to a closed variant whenever one represents
    /// the sum exactly.
    pub fn minkowski(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        use ConvexValue::*;
        Ok(match (self, other) {
            (Point(p), x) | (x, Point(p)) => x.translate(p),
            (Box { lo: l1, hi: h1 }, Box { lo: l2, hi: h2 }) => Box { lo: add(l1, l2), hi: add(h1, h2) },
            (Ball { center: c1, radius: r1 }, Ball { center: c2, radius: r2 }) => {
                Ball { center: add(c1, c2), radius: *r1 + *r2 }
            }
            _ if self.dim() == 1 => {
                let (lo, hi) = (
                    -(self.support_unchecked(&[-S::one()]) + other.support_unchecked(&[-S::one()])),
                    self.support_unchecked(&[S::one()]) + other.support_unchecked(&[S::one()]),
                );
                Segment(vec![lo], vec![hi])
            }
            (Minkowski(a), Minkowski(b)) => Minkowski(a.iter().chain(b).cloned().collect()),
            (Minkowski(a), x) | (x, Minkowski(a)) => {
                let mut parts = a.clone();
                parts.push(x.clone());
                Minkowski(parts)
            }
            (a, b) => Minkowski(vec![a.clone(), b.clone()]),
        })
    }

    /// Coordinate projection onto the first `n` components (`n ≤ dim`).
    pub fn truncate(&self, n: usize) -> Self {
        let t = |v: &Vec<S>| v[..n].to_vec();
        match self {
            ConvexValue::Point(p) => ConvexValue::Point(t(p)),
            ConvexValue::Box { lo, hi } => ConvexValue::Box { lo: t(lo), hi: t(hi) },
            ConvexValue::Ball { center, radius } => ConvexValue::Ball { center: t(center), radius: *radius },
            ConvexValue::Polytope(vs) => ConvexValue::Polytope(vs.iter().map(t).collect()),
            ConvexValue::Segment(a, b) => ConvexValue::Segment(t(a), t(b)),
            ConvexValue::Minkowski(parts) => ConvexValue::Minkowski(parts.iter().map(|p| p.truncate(n)).collect()),
        }
    }

    pub fn as_point(&self) -> Option<&[S]> {
        match self {
            ConvexValue::Point(p) => Some(p),
            _ => None,
        }
    }

    /// Finitely many points whose convex hull is the set, when such a list is
    /// cheap (Ball and large Minkowski sums return `None`).
    pub fn extreme_points(&self) -> Option<Vec<Vec<S>>> {
        match self {
            ConvexValue::Point(p) => Some(vec![p.clone()]),
            ConvexValue::Segment(a, b) => Some(vec![a.clone(), b.clone()]),
            ConvexValue::Polytope(vs) => Some(vs.clone()),
            ConvexValue::Box { lo, hi } => {
                let free: Vec<usize> = (0..lo.len()).filter(|&i| lo[i] < hi[i]).collect();
                if free.len() > 12 {
                    return None;
                }
                Some(
                    (0..1usize << free.len())
                        .map(|mask| {
                            let mut v = lo.clone();
                            for (bit, &i) in free.iter().enumerate() {
                                if mask >> bit & 1 == 1 {
                                    v[i] = hi[i];
                                }
                            }
                            v
                        })
                        .collect(),
                )
            }
            ConvexValue::Ball { .. } | ConvexValue::Minkowski(_) => None,
        }
    }

    /// Euclidean projection of `q` onto the set.
    pub fn nearest_point(&self, q: &[S]) -> Vec<S> {
        match self {
            ConvexValue::Point(p) => p.clone(),
            ConvexValue::Box { lo, hi } => {
                q.iter().zip(lo.iter().zip(hi)).map(|(&x, (&l, &h))| x.max(l).min(h)).collect()
            }
            ConvexValue::Ball { center, radius } => {
                let d = sub(q, center);
                let nd = norm2(&d);
                if nd <= *radius {
                    q.to_vec()
                } else {
                    add(center, &scale(&d, *radius / nd))
                }
            }
            ConvexValue::Segment(a, b) => {
                let ab = sub(b, a);
                let len2 = dot(&ab, &ab);
                if len2.is_zero() {
                    return a.clone();
                }
                let t = (dot(&sub(q, a), &ab) / len2).max(S::zero()).min(S::one());
                add(a, &scale(&ab, t))
            }
            ConvexValue::Polytope(vs) => polytope_nearest(vs, q),
            ConvexValue::Minkowski(parts) => minkowski_nearest(parts, q),
        }
    }

    /// Euclidean distance from `q` to the set.
    pub fn distance(&self, q: &[S]) -> S {
        norm2(&sub(q, &self.nearest_point(q)))
    }

    /// Distance from the origin, i.e. the norm of the minimal-norm element.
    pub fn distance_to_origin(&self) -> S {
        self.distance(&vec![S::zero(); self.dim()])
    }

    pub fn min_norm_point(&self) -> Vec<S> {
        self.nearest_point(&vec![S::zero(); self.dim()])
    }

    /// `dist(q, C) ≥ ⟨e, q⟩ - h_C(e)` for the unit vector `e` pointing from
    /// the candidate `x` to `q`; used as a certificate on iterative projections.
    fn distance_lower_bound(&self, q: &[S], x: &[S]) -> S {
        let e = sub(q, x);
        let ne = norm2(&e);
        if ne.is_zero() {
            return S::zero();
        }
        let e = scale(&e, ne.recip());
        (dot(&e, q) - self.support_unchecked(&e)).max(S::zero())
    }
}

fn project_simplex<S: Real>(v: &[S]) -> Vec<S> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut css = S::zero();
    let mut theta = S::zero();
    for (j, &uj) in u.iter().enumerate() {
        css += uj;
        let t = (css - S::one()) / S::of((j + 1) as f64);
        if uj - t > S::zero() {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(S::zero())).collect()
}

/// Projection onto a convex hull by accelerated projected gradient on the
/// barycentric weights, stopped by the support-function certificate.
fn polytope_nearest<S: Real>(vs: &[Vec<S>], q: &[S]) -> Vec<S> {
    let m = vs.len();
    if m == 1 {
        return vs[0].clone();
    }
    let combo = |w: &[S]| {
        let mut x = vec![S::zero(); q.len()];
        for (wi, v) in w.iter().zip(vs) {
            for (xk, &vk) in x.iter_mut().zip(v) {
                *xk += *wi * vk;
            }
        }
        x
    };
    let lip: S = vs.iter().map(|v| dot(v, v)).sum::<S>().max(S::epsilon());
    let set = ConvexValue::Polytope(vs.to_vec());
    let scale_ref = S::one() + norm2(q) + vs.iter().map(|v| norm2(v)).fold(S::zero(), S::max);
    let stop = S::epsilon() * S::of(64.0) * scale_ref;
    let mut w = vec![S::one() / S::of(m as f64); m];
    let mut y = w.clone();
    let mut t = S::one();
    for it in 0..20_000 {
        let r = sub(&combo(&y), q);
        let grad: Vec<S> = vs.iter().map(|v| dot(v, &r)).collect();
        let step: Vec<S> = y.iter().zip(&grad).map(|(&yi, &g)| yi - g / lip).collect();
        let w_next = project_simplex(&step);
        let t_next = (S::one() + (S::one() + S::of(4.0) * t * t).sqrt()) / S::of(2.0);
        let mom = (t - S::one()) / t_next;
        y = w_next.iter().zip(&w).map(|(&a, &b)| a + mom * (a - b)).collect();
        w = w_next;
        t = t_next;
        if it % 16 == 0 {
            let best = combo(&w);
            let upper = norm2(&sub(q, &best));
            if upper - set.distance_lower_bound(q, &best) <= stop {
                break;
            }
        }
    }
    combo(&w)
}

/// Block-coordinate projection onto a Minkowski sum: each part is projected
/// exactly against the residual of the others.
fn minkowski_nearest<S: Real>(parts: &[ConvexValue<S>], q: &[S]) -> Vec<S> {
    let n = q.len();
    let mut xs: Vec<Vec<S>> = parts.iter().map(|p| p.support_point(&vec![S::zero(); n])).collect();
    let total = |xs: &[Vec<S>]| xs.iter().fold(vec![S::zero(); n], |acc, x| add(&acc, x));
    let set = ConvexValue::Minkowski(parts.to_vec());
    let scale_ref = S::one() + norm2(q);
    let stop = S::epsilon().sqrt() * S::of(1e-4) * scale_ref;
    for _ in 0..2_000 {
        for j in 0..parts.len() {
            let others =
                xs.iter().enumerate().filter(|&(i, _)| i != j).fold(vec![S::zero(); n], |acc, (_, x)| add(&acc, x));
            xs[j] = parts[j].nearest_point(&sub(q, &others));
        }
        let x = total(&xs);
        if norm2(&sub(q, &x)) - set.distance_lower_bound(q, &x) <= stop {
            break;
        }
    }
    total(&xs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn support_examples() {
        let ball = ConvexValue::Ball { center: vec![0.0, 0.0], radius: 2.0 };
        assert_eq!(ball.support(&[1.0, 0.0]).unwrap(), 2.0);
        let bx = ConvexValue::Box { lo: vec![-1.0, -1.0], hi: vec![1.0, 1.0] };
        assert_eq!(bx.support(&[1.0, 1.0]).unwrap(), 2.0);
        let seg = ConvexValue::Segment(vec![-1.0], vec![1.0]);
        assert_eq!(seg.support(&[-3.0]).unwrap(), 3.0);
    }

    #[test]
    fn support_dimension_mismatch() {
        let seg = ConvexValue::Segment(vec![-1.0], vec![1.0]);
        assert_eq!(seg.support(&[1.0, 0.0]), Err(Error::DimensionMismatch { expected: 1, got: 2 }));
    }

    #[test]
    fn validate_rejects_broken_variants() {
        assert!(ConvexValue::Box { lo: vec![1.0], hi: vec![0.0] }.validate().is_err());
        assert!(ConvexValue::<f64>::Polytope(vec![]).validate().is_err());
        assert!(ConvexValue::Ball { center: vec![0.0], radius: -1.0 }.validate().is_err());
        assert!(ConvexValue::Segment(vec![0.0], vec![1.0, 2.0]).validate().is_err());
        assert!(ConvexValue::Point(vec![f64::NAN]).validate().is_err());
        assert!(ConvexValue::Polytope(vec![vec![0.0, 1.0], vec![2.0, 0.0]]).validate().is_ok());
    }

    #[test]
    fn minkowski_point_plus_segment() {
        let p = ConvexValue::Point(vec![0.0]);
        let s = ConvexValue::Segment(vec![-1.0], vec![1.0]);
        assert_eq!(p.minkowski(&s).unwrap(), ConvexValue::Segment(vec![-1.0], vec![1.0]));
        let s2 = ConvexValue::Segment(vec![0.5], vec![2.0]);
        assert_eq!(s.minkowski(&s2).unwrap(), ConvexValue::Segment(vec![-0.5], vec![3.0]));
    }

    #[test]
    fn nearest_point_closed_forms() {
        let bx = ConvexValue::Box { lo: vec![-1.0, 0.0], hi: vec![1.0, 2.0] };
        assert_eq!(bx.nearest_point(&[3.0, -1.0]), vec![1.0, 0.0]);
        let ball = ConvexValue::Ball { center: vec![1.0, 0.0], radius: 1.0 };
        assert_abs_diff_eq!(ball.distance(&[4.0, 0.0]), 2.0, epsilon = 1e-15);
        let seg = ConvexValue::Segment(vec![0.0, 0.0], vec![2.0, 0.0]);
        assert_eq!(seg.nearest_point(&[1.0, 5.0]), vec![1.0, 0.0]);
        assert_abs_diff_eq!(seg.distance_to_origin(), 0.0);
    }

    #[test]
    fn polytope_projection_matches_hand_value() {
        // triangle (1,0),(0,1),(1,1); nearest to origin is (1/2,1/2)
        let tri = ConvexValue::Polytope(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]);
        let x = tri.min_norm_point();
        assert_abs_diff_eq!(x[0], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(x[1], 0.5, epsilon = 1e-9);
        assert_abs_diff_eq!(tri.distance_to_origin(), 0.5f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn minkowski_projection_ball_plus_box() {
        // (ball r=1 at origin) + (box [2,3]x[0,0]) nearest to origin: distance 1
        let ball = ConvexValue::Ball { center: vec![0.0, 0.0], radius: 1.0 };
        let bx = ConvexValue::Box { lo: vec![2.0, 0.0], hi: vec![3.0, 0.0] };
        let sum = ball.minkowski(&bx).unwrap();
        assert!(matches!(sum, ConvexValue::Minkowski(_)));
        assert_abs_diff_eq!(sum.distance_to_origin(), 1.0, epsilon = 1e-7);
        assert_abs_diff_eq!(sum.support(&[1.0, 0.0]).unwrap(), 4.0);
    }

    #[test]
    fn scaling_by_negative_flips_box() {
        let bx = ConvexValue::Box { lo: vec![-1.0], hi: vec![2.0] };
        assert_eq!(bx.scaled(-1.0), ConvexValue::Box { lo: vec![-2.0], hi: vec![1.0] });
        assert_eq!(bx.scaled(0.0), ConvexValue::Point(vec![0.0]));
    }
}
