//! Dense LU with partial pivoting for the small Jacobians of the engine.

use crate::scalar::Real;

#[derive(Debug, Clone)]
pub(crate) struct Lu<S> {
    n: usize,
    a: Vec<S>,
    perm: Vec<usize>,
    parity: bool,
    singular: bool,
}

impl<S: Real> Lu<S> {
    /// Factor the row-major `n × n` matrix.
    pub(crate) fn new(mut a: Vec<S>, n: usize) -> Self {
        debug_assert_eq!(a.len(), n * n);
        let mut perm: Vec<usize> = (0..n).collect();
        let mut parity = false;
        let mut singular = false;
        for k in 0..n {
            let (piv, big) =
                (k..n)
                    .map(|i| (i, a[i * n + k].abs()))
                    .fold((k, -S::one()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if !(big > S::zero()) {
                singular = true;
                continue;
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
                perm.swap(k, piv);
                parity = !parity;
            }
            let d = a[k * n + k];
            for i in k + 1..n {
                let f = a[i * n + k] / d;
                a[i * n + k] = f;
                for j in k + 1..n {
                    let akj = a[k * n + j];
                    a[i * n + j] -= f * akj;
                }
            }
        }
        Lu { n, a, perm, parity, singular }
    }

    pub(crate) fn det(&self) -> S {
        if self.singular {
            return S::zero();
        }
        let d = (0..self.n).map(|i| self.a[i * self.n + i]).fold(S::one(), |p, x| p * x);
        if self.parity {
            -d
        } else {
            d
        }
    }

    pub(crate) fn solve(&self, b: &[S]) -> Option<Vec<S>> {
        if self.singular {
            return None;
        }
        let n = self.n;
        let mut x: Vec<S> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for j in 0..i {
                let l = self.a[i * n + j];
                let xj = x[j];
                x[i] -= l * xj;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let u = self.a[i * n + j];
                let xj = x[j];
                x[i] -= u * xj;
            }
            x[i] /= self.a[i * n + i];
        }
        x.iter().all(|v| v.is_finite()).then_some(x)
    }

    /// Row-major inverse, `None` when singular.
    pub(crate) fn inverse(&self) -> Option<Vec<S>> {
        let n = self.n;
        let mut inv = vec![S::zero(); n * n];
        for j in 0..n {
            let mut e = vec![S::zero(); n];
            e[j] = S::one();
            let col = self.solve(&e)?;
            for i in 0..n {
                inv[i * n + j] = col[i];
            }
        }
        Some(inv)
    }
}

/// Induced 1-norm of a row-major square matrix.
pub(crate) fn norm1<S: Real>(a: &[S], n: usize) -> S {
    (0..n).map(|j| (0..n).map(|i| a[i * n + j].abs()).sum::<S>()).fold(S::zero(), S::max)
}

/// `κ₁(A)`, infinite when singular.
pub(crate) fn condition<S: Real>(a: &[S], n: usize) -> S {
    match Lu::new(a.to_vec(), n).inverse() {
        Some(inv) => norm1(a, n) * norm1(&inv, n),
        None => S::infinity(),
    }
}

pub(crate) fn matvec<S: Real>(a: &[S], n: usize, x: &[S]) -> Vec<S> {
    (0..n).map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum()).collect()
}
