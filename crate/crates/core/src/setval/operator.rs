use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ConvexValue;
use crate::error::{Error, Result};
use crate::scalar::{norm2, sub, Real};

/// `(y, n) ↦` coefficient set `{(⟨x*, i(y^1)⟩, …, ⟨x*, i(y^n)⟩) : x* ∈ T(y)}`.
pub type PairingsFn<S> = Arc<dyn Fn(&[S], usize) -> Result<ConvexValue<S>> + Send + Sync>;

/// `(x, λ, n) ↦ (I + λ T_n)^{-1}(x)` in the coefficients of `Y_n`.
pub type ResolventFn<S> = Arc<dyn Fn(&[S], S, usize) -> Vec<S> + Send + Sync>;

/// A maximal monotone `T : Y → 2^{X*}`, seen through its finite-rank
/// coefficient images.
#[derive(Clone)]
pub struct MonotoneMap<S> {
    label: String,
    pairings: PairingsFn<S>,
    single_valued: bool,
    resolvent: Option<ResolventFn<S>>,
    /// `(smooth, proximable)` when the resolvent is a forward-backward one.
    split: Option<Arc<(MonotoneMap<S>, MonotoneMap<S>)>>,
}

impl<S> fmt::Debug for MonotoneMap<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MonotoneMap")
            .field("label", &self.label)
            .field("single_valued", &self.single_valued)
            .field("resolvent", &self.resolvent.is_some())
            .finish()
    }
}

impl<S: Real> MonotoneMap<S> {
    pub fn new(label: impl Into<String>, pairings: PairingsFn<S>) -> Self {
        MonotoneMap { label: label.into(), pairings, single_valued: false, resolvent: None, split: None }
    }

    pub fn single_valued(mut self, yes: bool) -> Self {
        self.single_valued = yes;
        self
    }

    pub fn with_resolvent(mut self, r: ResolventFn<S>) -> Self {
        self.resolvent = Some(r);
        self
    }

    pub fn relabel(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_single_valued(&self) -> bool {
        self.single_valued
    }

    pub fn has_resolvent(&self) -> bool {
        self.resolvent.is_some()
    }

    /// Raw callback output.
    pub fn pairings(&self, y: &[S], n: usize) -> Result<ConvexValue<S>> {
        (self.pairings)(y, n)
    }

    pub fn resolvent(&self, x: &[S], lambda: S, n: usize) -> Option<Vec<S>> {
        self.resolvent.as_ref().map(|r| r(x, lambda, n))
    }

    /// Value of a single-valued map, as coefficients in `Y_n`.
    pub fn point(&self, y: &[S], n: usize) -> Result<Vec<S>> {
        match self.pairings(y, n)? {
            ConvexValue::Point(p) => Ok(p),
            other => Err(Error::BadParams {
                operator: self.label.clone(),
                detail: format!("flagged single-valued but returned {other:?}"),
            }),
        }
    }

    /// The map `T - f₀`, with `f₀` given by its coefficients `⟨f₀, i(y^k)⟩`.
    pub fn shifted_by_coeffs(&self, f0c: Vec<S>) -> Self {
        let base = self.clone();
        let f0c = Arc::new(f0c);
        let shift = f0c.clone();
        let pairings: PairingsFn<S> = Arc::new(move |y, n| {
            let v = base.pairings(y, n)?;
            let t: Vec<S> = (0..n).map(|k| -shift.get(k).copied().unwrap_or_else(S::zero)).collect();
            Ok(v.translate(&t))
        });
        let mut out = MonotoneMap::new(format!("{} - f0", self.label), pairings).single_valued(self.single_valued);
        if let Some(split) = &self.split {
            return out.with_split(split.0.shifted_by_coeffs(f0c.to_vec()), split.1.clone());
        }
        if let Some(r) = self.resolvent.clone() {
            // (I + λ(T - f))^{-1}(x) = (I + λT)^{-1}(x + λ f)
            out = out.with_resolvent(Arc::new(move |x, lambda, n| {
                let xs: Vec<S> = x
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| v + lambda * f0c.get(k).copied().unwrap_or_else(S::zero))
                    .collect();
                r(&xs, lambda, n)
            }));
        }
        out
    }

    /// The map `c T` for `c ≥ 0`.
    pub fn scaled(&self, c: S) -> Self {
        let base = self.clone();
        let pairings: PairingsFn<S> = Arc::new(move |y, n| Ok(base.pairings(y, n)?.scaled(c)));
        let label = format!("{c} * ({})", self.label);
        if c.is_zero() {
            return MonotoneMap::new(label, pairings)
                .single_valued(true)
                .with_resolvent(Arc::new(|x, _, n| crate::scalar::resized(x, n)));
        }
        let mut out = MonotoneMap::new(label, pairings).single_valued(self.single_valued);
        if let Some(split) = &self.split {
            return out.with_split(split.0.scaled(c), split.1.scaled(c));
        }
        if let Some(r) = self.resolvent.clone() {
            out = out.with_resolvent(Arc::new(move |x, lambda, n| r(x, c * lambda, n)));
        }
        out
    }

    /// Pointwise Minkowski sum `A + B`.
    pub fn sum(&self, other: &Self) -> Self {
        let (a, b) = (self.clone(), other.clone());
        let pairings: PairingsFn<S> = Arc::new(move |y, n| {
            let va = a.pairings(y, n)?;
            let vb = b.pairings(y, n)?;
            va.minkowski(&vb)
        });
        let single = self.single_valued && other.single_valued;
        let mut out = MonotoneMap::new(format!("({}) + ({})", self.label, other.label), pairings).single_valued(single);
        if single {
            return out;
        }
        let (smooth, multi) = if self.single_valued { (self, other) } else { (other, self) };
        if !smooth.single_valued {
            return out;
        }
        if let Some(split) = &multi.split {
            out = out.with_split(smooth.sum(&split.0), split.1.clone());
        } else if multi.resolvent.is_some() {
            out = out.with_split(smooth.clone(), multi.clone());
        }
        out
    }

    fn with_split(mut self, smooth: Self, multi: Self) -> Self {
        self.resolvent = Some(forward_backward_resolvent(smooth.clone(), multi.clone()));
        self.split = Some(Arc::new((smooth, multi)));
        self
    }

    /// `T_n(y)`: validated coefficient set of the section map.
    pub fn finite_rank(&self, y: &[S], n: usize) -> Result<ConvexValue<S>> {
        let v = self.pairings(y, n)?;
        if v.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.dim() });
        }
        v.validate()?;
        Ok(v)
    }
}

/// Resolvent of `A + B` with `A` single-valued and `B` resolvent-equipped,
/// as the fixed point of `z ↦ R^B_λ(x - λ A(z))` (a contraction when `λ` is
/// below the inverse local Lipschitz constant of `A`).
fn forward_backward_resolvent<S: Real>(smooth: MonotoneMap<S>, multi: MonotoneMap<S>) -> ResolventFn<S> {
    Arc::new(move |x, lambda, n| {
        let x = crate::scalar::resized(x, n);
        let mut z = multi.resolvent(&x, lambda, n).expect("resolvent present");
        let tol = S::epsilon() * S::of(16.0) * (S::one() + norm2(&x));
        for _ in 0..500 {
            let az = match smooth.point(&z, n) {
                Ok(v) => v,
                Err(_) => return z,
            };
            let arg: Vec<S> = x.iter().zip(&az).map(|(&xi, &ai)| xi - lambda * ai).collect();
            let next = multi.resolvent(&arg, lambda, n).expect("resolvent present");
            let step = norm2(&sub(&next, &z));
            z = next;
            if step <= tol {
                break;
            }
        }
        z
    })
}

/// Outcome of a sampled audit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub samples: usize,
    pub passed: usize,
    /// Worst observed value of the audited quantity (gap or distance).
    pub worst: f64,
    pub pass: bool,
}

impl AuditReport {
    pub fn fraction(&self) -> f64 {
        if self.samples == 0 {
            1.0
        } else {
            self.passed as f64 / self.samples as f64
        }
    }
}

/// Half-width of the reference box `[-R, R]^n` sampled by the audits.
pub const AUDIT_BOX: f64 = 2.0;
pub const MONOTONICITY_TOL: f64 = 1e-9;

pub(crate) fn sample_point<S: Real>(rng: &mut ChaCha8Rng, n: usize, half: f64) -> Vec<S> {
    (0..n)
        .map(|_| {
            // a quarter of coordinates sit exactly on 0, where the gallery's
            // set-valued members branch
            if rng.gen_bool(0.25) {
                S::zero()
            } else {
                S::of(rng.gen_range(-half..half))
            }
        })
        .collect()
}

/// Worst monotonicity gap `min (s1 - s2)·(c1 - c2)` over sampled pairs,
/// computed exactly with support functions:
/// `min_{s1,s2} (s1 - s2)·d = -h_{V1}(-d) - h_{V2}(d)`.
pub fn monotonicity_audit<S: Real>(t: &MonotoneMap<S>, n: usize, samples: usize, seed: u64) -> Result<AuditReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut passed = 0;
    for _ in 0..samples.max(1) {
        let c1: Vec<S> = sample_point(&mut rng, n, AUDIT_BOX);
        let c2: Vec<S> = sample_point(&mut rng, n, AUDIT_BOX);
        let d = sub(&c1, &c2);
        let neg: Vec<S> = d.iter().map(|&x| -x).collect();
        let v1 = t.finite_rank(&c1, n)?;
        let v2 = t.finite_rank(&c2, n)?;
        let gap = (-v1.support(&neg)? - v2.support(&d)?).as_f64();
        if gap >= -MONOTONICITY_TOL {
            passed += 1;
        }
        worst = worst.min(gap);
    }
    Ok(AuditReport { samples: samples.max(1), passed, worst, pass: worst >= -MONOTONICITY_TOL })
}
