//! Concrete maximal monotone operators on the weighted ℓ^p model.
//!
//! Section coefficients are `⟨x*, i(y^k)⟩ = w_k x*_k`. Operators given by a
//! formula in `X*` (duality, diag, cubic, shifts) pick up the weight through
//! that pairing; `sign` and `capped_normal_cone` are subdifferentials of
//! convex functions on `Y` and are specified directly in coefficients.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{ConvexValue, MonotoneMap, PairingsFn};
use crate::error::{Error, Result};
use crate::scalar::{scale, Real};
use crate::space::{Sequence, SpacePair};

#[derive(Debug, Clone, PartialEq)]
pub enum Param<S> {
    Number(S),
    List(Vec<S>),
    /// `a + b / (k + c)`, `k` 1-based.
    Rule {
        a: S,
        b: S,
        c: S,
    },
    Operator {
        name: String,
        params: ParamMap<S>,
    },
}

pub type ParamMap<S> = BTreeMap<String, Param<S>>;

/// Gallery member names with their parameters.
pub const GALLERY: &[(&str, &str)] = &[
    ("duality", "J∘i, the duality map of X composed with the embedding; no parameters"),
    ("diag", "y ↦ (λ_k w_k y_k); lambda: sequence, λ_k ≥ 0"),
    ("sign", "coordinatewise μ_k ∂|y_k|; mu: sequence, μ_k ≥ 0"),
    ("shifted", "base - f0; base: operator, f0: list (element of X*)"),
    ("capped_normal_cone", "capped normal cone of B_r, mollified over an inner collar; radius: r > 0, cap: Λ > 0"),
    ("cubic", "y ↦ (c_k w_k y_k³); scale: sequence (default 1)"),
    ("sum", "pointwise Minkowski sum; left: operator, right: operator"),
];

pub fn gallery<S: Real>(name: &str, params: &ParamMap<S>, sp: &SpacePair<S>) -> Result<MonotoneMap<S>> {
    let allowed: &[&str] = match name {
        "duality" => &[],
        "diag" => &["lambda"],
        "sign" => &["mu"],
        "shifted" => &["base", "f0"],
        "capped_normal_cone" => &["radius", "cap"],
        "cubic" => &["scale"],
        "sum" => &["left", "right"],
        _ => return Err(Error::UnknownOperator(name.to_string())),
    };
    let bad = |detail: String| Error::BadParams { operator: name.to_string(), detail };
    if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(bad(format!("unexpected parameter `{k}`")));
    }
    let seq = |key: &str| -> Result<Option<Sequence<S>>> {
        let Some(p) = params.get(key) else { return Ok(None) };
        let s = match p {
            Param::Number(c) => Sequence::constant(*c),
            Param::List(v) => Sequence::finite(v.clone()),
            Param::Rule { a, b, c } => Sequence::Rational { a: *a, b: *b, c: *c },
            Param::Operator { .. } => return Err(bad(format!("`{key}` must be a sequence"))),
        };
        if !s.is_nonnegative() {
            return Err(bad(format!("`{key}` must be finite and nonnegative")));
        }
        Ok(Some(s))
    };
    let number = |key: &str| -> Result<S> {
        match params.get(key) {
            Some(Param::Number(x)) if x.is_finite() && *x > S::zero() => Ok(*x),
            Some(_) => Err(bad(format!("`{key}` must be a positive number"))),
            None => Err(bad(format!("missing `{key}`"))),
        }
    };
    let operator = |key: &str| -> Result<MonotoneMap<S>> {
        match params.get(key) {
            Some(Param::Operator { name, params }) => gallery(name, params, sp),
            Some(_) => Err(bad(format!("`{key}` must be an operator"))),
            None => Err(bad(format!("missing `{key}`"))),
        }
    };
    Ok(match name {
        "duality" => duality(sp),
        "diag" => diag(seq("lambda")?.ok_or_else(|| bad("missing `lambda`".into()))?, sp),
        "sign" => sign(seq("mu")?.ok_or_else(|| bad("missing `mu`".into()))?),
        "shifted" => {
            let f0 = match params.get("f0") {
                Some(Param::List(v)) if v.iter().all(|x| x.is_finite()) => v.clone(),
                Some(Param::Number(x)) if x.is_finite() => vec![*x],
                _ => return Err(bad("`f0` must be a finite list".into())),
            };
            shifted(&operator("base")?, &f0, sp)
        }
        "capped_normal_cone" => capped_normal_cone(number("radius")?, number("cap")?, sp),
        "cubic" => cubic(seq("scale")?.unwrap_or_else(|| Sequence::constant(S::one())), sp),
        "sum" => operator("left")?.sum(&operator("right")?),
        _ => unreachable!(),
    })
}

pub fn duality<S: Real>(sp: &SpacePair<S>) -> MonotoneMap<S> {
    let sp = sp.clone();
    let pairings: PairingsFn<S> = Arc::new(move |y, n| Ok(ConvexValue::Point(sp.duality_section(y, n))));
    MonotoneMap::new("duality", pairings).single_valued(true)
}

/// `y ↦ (λ_k w_k y_k) ∈ X*`; coefficients `λ_k w_k² y_k`. Negative entries
/// are accepted here (non-monotone controls); [`gallery`] rejects them.
pub fn diag<S: Real>(lambda: Sequence<S>, sp: &SpacePair<S>) -> MonotoneMap<S> {
    let sp = sp.clone();
    let pairings: PairingsFn<S> = Arc::new(move |y, n| {
        Ok(ConvexValue::Point(
            (0..n)
                .map(|k| {
                    let w = sp.weight(k);
                    lambda.at(k) * w * w * y.get(k).copied().unwrap_or_else(S::zero)
                })
                .collect(),
        ))
    });
    MonotoneMap::new("diag", pairings).single_valued(true)
}

/// `y ↦ (c_k w_k y_k³) ∈ X*`.
pub fn cubic<S: Real>(scale_seq: Sequence<S>, sp: &SpacePair<S>) -> MonotoneMap<S> {
    let sp = sp.clone();
    let pairings: PairingsFn<S> = Arc::new(move |y, n| {
        Ok(ConvexValue::Point(
            (0..n)
                .map(|k| {
                    let w = sp.weight(k);
                    let v = y.get(k).copied().unwrap_or_else(S::zero);
                    scale_seq.at(k) * w * w * v * v * v
                })
                .collect(),
        ))
    });
    MonotoneMap::new("cubic", pairings).single_valued(true)
}

/// Subdifferential of `Σ μ_k |y_k|`; the resolvent is soft thresholding.
pub fn sign<S: Real>(mu: Sequence<S>) -> MonotoneMap<S> {
    let m = mu.clone();
    let pairings: PairingsFn<S> = Arc::new(move |y, n| {
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        let mut free = Vec::new();
        for k in 0..n {
            let v = y.get(k).copied().unwrap_or_else(S::zero);
            let mk = m.at(k);
            if v > S::zero() {
                lo.push(mk);
                hi.push(mk);
            } else if v < S::zero() {
                lo.push(-mk);
                hi.push(-mk);
            } else {
                lo.push(-mk);
                hi.push(mk);
                if mk > S::zero() {
                    free.push(k);
                }
            }
        }
        Ok(match free.len() {
            0 => ConvexValue::Point(lo),
            1 => ConvexValue::Segment(lo, hi),
            _ => ConvexValue::Box { lo, hi },
        })
    });
    MonotoneMap::new("sign", pairings).with_resolvent(Arc::new(move |x, lambda, n| {
        (0..n)
            .map(|k| {
                let v = x.get(k).copied().unwrap_or_else(S::zero);
                let t = lambda * mu.at(k);
                v.signum() * (v.abs() - t).max(S::zero())
            })
            .collect()
    }))
}

/// `T - f₀` for `f₀ ∈ X*` given coordinatewise; coefficients `w_k f₀_k`.
pub fn shifted<S: Real>(base: &MonotoneMap<S>, f0: &[S], sp: &SpacePair<S>) -> MonotoneMap<S> {
    let coeffs: Vec<S> = f0.iter().enumerate().map(|(k, &v)| sp.weight(k) * v).collect();
    base.shifted_by_coeffs(coeffs)
}

/// Fraction of the radius over which the capped cone is mollified.
pub const CONE_COLLAR: f64 = 0.25;

/// Capped normal cone of `B_r` mollified over the inner collar
/// `r - δ ≤ ‖i y‖ ≤ r`, `δ = CONE_COLLAR · r`: the value is `Λ ρ J(i y)`
/// with `ρ` rising linearly from 0 to 1 across the collar. It is the
/// gradient of the convex `Λ G(‖i y‖)`, `G'(s) = ρ(s) s`, hence monotone
/// and single-valued, and every value lies in `{λ J(i y) : 0 ≤ λ ≤ Λ}`.
pub fn capped_normal_cone<S: Real>(radius: S, cap: S, sp: &SpacePair<S>) -> MonotoneMap<S> {
    let space = sp.clone();
    let delta = radius * S::of(CONE_COLLAR);
    let pairings: PairingsFn<S> = Arc::new(move |y, n| {
        let rho = cone_ramp(space.norm_x_of(y), radius, delta);
        Ok(ConvexValue::Point(scale(&space.duality_section(y, n), cap * rho)))
    });
    MonotoneMap::new(format!("capped_normal_cone(r={radius}, cap={cap})"), pairings).single_valued(true)
}

/// Cone multiplier fraction `ρ(s) ∈ [0, 1]` at norm `s`.
pub fn cone_ramp<S: Real>(s: S, radius: S, delta: S) -> S {
    ((s - (radius - delta)) / delta).max(S::zero()).min(S::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setval::monotonicity_audit;

    fn p(name: &str, params: Vec<(&str, Param<f64>)>) -> Param<f64> {
        Param::Operator { name: name.into(), params: params.into_iter().map(|(k, v)| (k.to_string(), v)).collect() }
    }

    fn build(param: &Param<f64>, sp: &SpacePair<f64>) -> MonotoneMap<f64> {
        match param {
            Param::Operator { name, params } => gallery(name, params, sp).unwrap(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn finite_rank_examples() {
        let sp = SpacePair::hilbert();
        let j = duality(&sp);
        assert_eq!(j.finite_rank(&[1.0, 2.0], 2).unwrap(), ConvexValue::Point(vec![1.0, 2.0]));
        let s = sign(Sequence::constant(1.0));
        assert_eq!(s.finite_rank(&[0.0], 1).unwrap(), ConvexValue::Segment(vec![-1.0], vec![1.0]));
        let d = diag(Sequence::finite(vec![1.0, 0.5]), &sp);
        assert_eq!(d.finite_rank(&[2.0, 2.0], 2).unwrap(), ConvexValue::Point(vec![2.0, 1.0]));
    }

    #[test]
    fn gallery_examples() {
        let sp = SpacePair::hilbert();
        let d = build(&p("diag", vec![("lambda", Param::List(vec![1.0, 2.0, 3.0]))]), &sp);
        assert_eq!(d.finite_rank(&[1.0, 1.0, 1.0], 3).unwrap(), ConvexValue::Point(vec![1.0, 2.0, 3.0]));
        let s = build(&p("sign", vec![("mu", Param::List(vec![1.0]))]), &sp);
        assert_eq!(s.finite_rank(&[0.5], 1).unwrap(), ConvexValue::Point(vec![1.0]));
        let sum = build(
            &p("sum", vec![("left", p("duality", vec![])), ("right", p("sign", vec![("mu", Param::Number(1.0))]))]),
            &sp,
        );
        assert_eq!(sum.finite_rank(&[0.0], 1).unwrap(), ConvexValue::Segment(vec![-1.0], vec![1.0]));
        assert!(sum.has_resolvent());
    }

    #[test]
    fn gallery_errors() {
        let sp = SpacePair::<f64>::hilbert();
        assert_eq!(gallery("nope", &ParamMap::new(), &sp).unwrap_err(), Error::UnknownOperator("nope".into()));
        let neg: ParamMap<f64> = [("lambda".to_string(), Param::List(vec![1.0, -1.0]))].into();
        assert!(matches!(gallery("diag", &neg, &sp), Err(Error::BadParams { .. })));
        let typo: ParamMap<f64> = [("lamda".to_string(), Param::Number(1.0))].into();
        assert!(matches!(gallery("diag", &typo, &sp), Err(Error::BadParams { .. })));
        let cone: ParamMap<f64> = [("radius".to_string(), Param::Number(-1.0))].into();
        assert!(matches!(gallery("capped_normal_cone", &cone, &sp), Err(Error::BadParams { .. })));
    }

    #[test]
    fn sign_resolvent_is_soft_threshold() {
        let s = sign(Sequence::constant(1.0));
        let r: Vec<f64> = s.resolvent(&[0.5, -0.05, 0.08], 0.1, 3).unwrap();
        assert!((r[0] - 0.4).abs() < 1e-15);
        assert_eq!(&r[1..], &[0.0, 0.0]);
    }

    #[test]
    fn capped_cone_values() {
        let sp = SpacePair::<f64>::hilbert();
        let c = capped_normal_cone(1.0, 3.0, &sp);
        assert!(c.is_single_valued());
        assert_eq!(c.point(&[0.5, 0.0], 2).unwrap(), vec![0.0, 0.0]);
        // ‖y‖ = 0.875 is halfway across the collar
        let v = c.point(&[0.875, 0.0], 2).unwrap();
        assert!((v[0] - 1.5 * 0.875).abs() < 1e-14);
        let v = c.point(&[0.6, 0.8], 2).unwrap();
        assert!((v[0] - 1.8).abs() < 1e-14 && (v[1] - 2.4).abs() < 1e-14);
        assert_eq!(c.point(&[2.0, 0.0], 2).unwrap(), vec![6.0, 0.0]);
        assert!(monotonicity_audit(&c, 3, 500, 1).unwrap().pass);
    }

    #[test]
    fn shifted_uses_embedding_pairing() {
        let sp = SpacePair::new(2.0, 2.0, Sequence::constant(0.5)).unwrap();
        let t = shifted(&diag(Sequence::constant(4.0), &sp), &[2.0], &sp);
        // coefficient λ w² y - w f0 = 4·0.25·y - 0.5·2
        assert_eq!(t.finite_rank(&[1.0], 1).unwrap(), ConvexValue::Point(vec![0.0]));
    }

    #[test]
    fn non_monotone_control_fails_audit() {
        let sp = SpacePair::hilbert();
        let bad = diag(Sequence::finite(vec![1.0, -1.0]), &sp);
        let r = monotonicity_audit(&bad, 2, 500, 7).unwrap();
        assert!(!r.pass);
        assert!(r.worst < -1.0);
        for t in [duality(&sp), sign(Sequence::constant(1.0))] {
            let r = monotonicity_audit(&t, 3, 500, 7).unwrap();
            assert!(r.pass && r.worst >= -1e-12, "{}: {}", t.label(), r.worst);
        }
    }
}
