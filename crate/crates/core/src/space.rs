//! Weighted ℓ^p model of the space pair `Y ↪ X`, its filtration by coordinate
//! sections and the duality map of `X`.
//!
//! Elements of `Y` are finite coefficient lists relative to the unit basis
//! `y^1, y^2, …`; an element with `m` stored coefficients lies in `Y_m`. The
//! embedding is diagonal, `i(y)_k = w_k y_k`, and functionals on `X` pair with
//! elements of `X` coordinatewise.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A positive real sequence indexed from 0 (entry `i` is the `(i+1)`-th term).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Sequence<S> {
    /// Listed values followed by a constant tail.
    Explicit { values: Vec<S>, tail: S },
    /// `a + b / (k + c)` for the 1-based index `k`.
    Rational { a: S, b: S, c: S },
}

impl<S: Real> Sequence<S> {
    pub fn constant(value: S) -> Self {
        Sequence::Rational { a: value, b: S::zero(), c: S::zero() }
    }

    /// `k ↦ scale / k`.
    pub fn harmonic(scale: S) -> Self {
        Sequence::Rational { a: S::zero(), b: scale, c: S::zero() }
    }

    /// Listed values, zero afterwards.
    pub fn finite(values: Vec<S>) -> Self {
        Sequence::Explicit { values, tail: S::zero() }
    }

    pub fn at(&self, i: usize) -> S {
        match self {
            Sequence::Explicit { values, tail } => values.get(i).copied().unwrap_or(*tail),
            Sequence::Rational { a, b, c } => *a + *b / (S::of((i + 1) as f64) + *c),
        }
    }

    pub fn take(&self, n: usize) -> Vec<S> {
        (0..n).map(|i| self.at(i)).collect()
    }

    /// Supremum over the whole sequence.
    pub fn sup(&self) -> S {
        match self {
            Sequence::Explicit { values, tail } => values.iter().copied().fold(*tail, |m, v| m.max(v)),
            // Monotone in k, so the supremum is the first term or the limit.
            Sequence::Rational { a, .. } => self.at(0).max(*a),
        }
    }

    /// Infimum over the whole sequence.
    pub fn inf(&self) -> S {
        match self {
            Sequence::Explicit { values, tail } => values.iter().copied().fold(*tail, |m, v| m.min(v)),
            Sequence::Rational { a, .. } => self.at(0).min(*a),
        }
    }

    fn check_finite(&self) -> bool {
        match self {
            Sequence::Explicit { values, tail } => values.iter().all(|v| v.is_finite()) && tail.is_finite(),
            Sequence::Rational { a, b, c } => a.is_finite() && b.is_finite() && c.is_finite() && *c > -S::one(),
        }
    }

    /// All terms finite and `≥ 0`.
    pub fn is_nonnegative(&self) -> bool {
        self.check_finite() && self.inf() >= S::zero()
    }

    /// All terms finite and strictly positive (the limit may be zero).
    pub fn is_positive(&self) -> bool {
        if !self.check_finite() {
            return false;
        }
        match self {
            Sequence::Explicit { .. } => self.inf() > S::zero(),
            Sequence::Rational { a, b, .. } => {
                self.at(0) > S::zero() && (*a > S::zero() || (a.is_zero() && *b > S::zero()))
            }
        }
    }
}

/// The pair `(X, Y)` with ℓ^p norms and the diagonal embedding `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpacePair<S> {
    p_x: S,
    p_y: S,
    weights: Sequence<S>,
}

impl<S: Real> SpacePair<S> {
    pub fn new(p_x: S, p_y: S, weights: Sequence<S>) -> Result<Self> {
        check_exponent(p_x, "p_X")?;
        check_exponent(p_y, "p_Y")?;
        if !weights.is_positive() {
            return Err(Error::InvalidSpace("embedding weights must be finite and strictly positive".into()));
        }
        Ok(SpacePair { p_x, p_y, weights })
    }

    /// `X = Y = ℓ^p` with identity embedding.
    pub fn uniform(p: S) -> Result<Self> {
        Self::new(p, p, Sequence::constant(S::one()))
    }

    /// Euclidean `ℓ²` with identity embedding.
    pub fn hilbert() -> Self {
        SpacePair { p_x: S::of(2.0), p_y: S::of(2.0), weights: Sequence::constant(S::one()) }
    }

    pub fn p_x(&self) -> S {
        self.p_x
    }

    pub fn p_y(&self) -> S {
        self.p_y
    }

    pub fn weights(&self) -> &Sequence<S> {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> S {
        self.weights.at(i)
    }

    /// `sup_k w_k`, the operator norm of `i` between coordinate ℓ^p spaces of
    /// equal exponent.
    pub fn embedding_bound(&self) -> S {
        self.weights.sup()
    }

    /// True when `X = Y = ℓ²` and `i` is the identity.
    pub fn is_hilbert_identity(&self) -> bool {
        let two = S::of(2.0);
        self.p_x == two && self.p_y == two && self.weights.inf() == S::one() && self.weights.sup() == S::one()
    }

    /// Norm of `y` in `Y`.
    pub fn norm_y(&self, y: &[S]) -> S {
        norm(y, self.p_y)
    }

    /// Norm of `i(y)` in `X`.
    pub fn norm_x_of(&self, y: &[S]) -> S {
        norm(&embed(y, self), self.p_x)
    }

    /// Coefficients `⟨J(i(y)), i(y^k)⟩`, `k < n`: the section map `J_n`.
    pub fn duality_section(&self, y: &[S], n: usize) -> Vec<S> {
        let jx = duality_map(&embed(y, self), self.p_x);
        (0..n).map(|k| jx.get(k).copied().unwrap_or_else(S::zero) * self.weight(k)).collect()
    }
}

fn check_exponent<S: Real>(p: S, name: &str) -> Result<()> {
    if !(p > S::one()) || !p.is_finite() {
        return Err(Error::InvalidSpace(format!("exponent {name} must exceed 1, got {p}")));
    }
    Ok(())
}

/// An element of some section `Y_n`; `section()` is the number of stored
/// coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Element<S>(Vec<S>);

impl<S: Real> Element<S> {
    pub fn new(coeffs: Vec<S>) -> Self {
        Element(coeffs)
    }

    pub fn zeros(n: usize) -> Self {
        Element(vec![S::zero(); n])
    }

    pub fn section(&self) -> usize {
        self.0.len()
    }

    pub fn coeffs(&self) -> &[S] {
        &self.0
    }

    pub fn into_coeffs(self) -> Vec<S> {
        self.0
    }

    /// Projection onto `Y_n` (truncation, or zero padding when `n` is larger).
    pub fn project(&self, n: usize) -> Self {
        Element(crate::scalar::resized(&self.0, n))
    }
}

impl<S> Deref for Element<S> {
    type Target = [S];
    fn deref(&self) -> &[S] {
        &self.0
    }
}

impl<S> From<Vec<S>> for Element<S> {
    fn from(v: Vec<S>) -> Self {
        Element(v)
    }
}

/// The filtration `Y_1 ⊂ Y_2 ⊂ …` generated by the unit coordinate basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Filtration {
    n_max: usize,
}

impl Filtration {
    pub fn new(n_max: usize) -> Self {
        Filtration { n_max }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `y^k` as an element of `Y_n` (`k` 1-based, `k ≤ n`).
    pub fn basis<S: Real>(&self, k: usize, n: usize) -> Element<S> {
        assert!(k >= 1 && k <= n && n <= self.n_max, "basis index out of range");
        let mut v = vec![S::zero(); n];
        v[k - 1] = S::one();
        Element(v)
    }

    /// The section pairing `(u, v)`, with `(y^i, y^j) = δ_ij`.
    pub fn inner<S: Real>(&self, u: &[S], v: &[S]) -> S {
        u.iter().zip(v).map(|(&a, &b)| a * b).sum()
    }

    /// Projection `Y_n → Y_{n-1}` obtained by zeroing the last coefficient.
    pub fn drop_last<S: Real>(&self, v: &Element<S>) -> Element<S> {
        v.project(v.section().saturating_sub(1))
    }
}

/// Coefficients of `i(v)` in `X`.
pub fn embed<S: Real>(v: &[S], sp: &SpacePair<S>) -> Element<S> {
    Element(v.iter().enumerate().map(|(k, &c)| sp.weight(k) * c).collect())
}

/// ℓ^p norm `(Σ|v_k|^p)^{1/p}`, computed with scaling to avoid overflow.
pub fn norm<S: Real>(v: &[S], p: S) -> S {
    let big = v.iter().fold(S::zero(), |m, x| m.max(x.abs()));
    if big.is_zero() {
        return S::zero();
    }
    let s: S = v.iter().map(|x| (x.abs() / big).powf(p)).sum();
    big * s.powf(p.recip())
}

/// Conjugate exponent `p' = p / (p - 1)`.
pub fn dual_exponent<S: Real>(p: S) -> S {
    p / (p - S::one())
}

/// Duality map of ℓ^p normalized by `⟨J x, x⟩ = ‖x‖²`, `‖J x‖_{p'} = ‖x‖`:
/// `J(x)_k = ‖x‖^{2-p} |x_k|^{p-2} x_k`, with `J(0) = 0`.
pub fn duality_map<S: Real>(x: &[S], p: S) -> Element<S> {
    let nx = norm(x, p);
    if nx.is_zero() {
        return Element(vec![S::zero(); x.len()]);
    }
    // Written as ‖x‖ · sign(x_k) (|x_k|/‖x‖)^{p-1} so large and small
    // coordinates lose no precision.
    Element(
        x.iter()
            .map(|&c| if c.is_zero() { S::zero() } else { nx * c.signum() * (c.abs() / nx).powf(p - S::one()) })
            .collect(),
    )
}

/// `⟨x*, i(y)⟩ = Σ x*_k w_k y_k`.
pub fn pairing<S: Real>(xstar: &[S], y: &[S], sp: &SpacePair<S>) -> S {
    xstar.iter().zip(y).enumerate().map(|(k, (&a, &b))| a * sp.weight(k) * b).sum()
}
