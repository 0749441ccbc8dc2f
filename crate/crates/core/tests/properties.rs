use mmdegree::brouwer::Region;
use mmdegree::selection::{build_selection, SelectionMethod, SelectionOptions};
use mmdegree::setval::gallery::{cubic, diag, duality, sign};
use mmdegree::space::{dual_exponent, duality_map, embed, norm, pairing, Sequence, SpacePair};
use proptest::prelude::*;

fn vec_in(n: usize, half: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-half..half, n)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn duality_identities(p in 1.1f64..6.0, x in vec_in(5, 10.0)) {
        let j = duality_map(&x, p);
        let nx = norm(&x, p);
        prop_assert!((dot(&j, &x) - nx * nx).abs() <= 1e-9 * (1.0 + nx * nx));
        prop_assert!((norm(&j, dual_exponent(p)) - nx).abs() <= 1e-9 * (1.0 + nx));
    }

    #[test]
    fn duality_is_monotone(p in 1.1f64..6.0, x in vec_in(4, 5.0), y in vec_in(4, 5.0)) {
        let sp = SpacePair::uniform(p).unwrap();
        let jx = sp.duality_section(&x, 4);
        let jy = sp.duality_section(&y, 4);
        let d: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let g: Vec<f64> = jx.iter().zip(&jy).map(|(a, b)| a - b).collect();
        prop_assert!(dot(&g, &d) >= -1e-9 * (1.0 + dot(&d, &d)));
    }

    #[test]
    fn embedding_is_bounded(p in 1.1f64..6.0, a in 0.1f64..3.0, b in 0.0f64..3.0, y in vec_in(6, 10.0)) {
        let sp = SpacePair::new(p, p, Sequence::Rational { a, b, c: 0.0 }).unwrap();
        let lhs = norm(&embed(&y, &sp), p);
        prop_assert!(lhs <= sp.embedding_bound() * sp.norm_y(&y) * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn pairing_matches_weighted_sum(xs in vec_in(4, 3.0), y in vec_in(4, 3.0)) {
        let sp = SpacePair::new(2.0, 2.0, Sequence::harmonic(1.0)).unwrap();
        let expect: f64 = (0..4).map(|k| xs[k] * y[k] / (k + 1) as f64).sum();
        prop_assert!((pairing(&xs, &y, &sp) - expect).abs() < 1e-12);
    }

    #[test]
    fn sections_are_consistent(y in vec_in(3, 4.0), p in 1.5f64..4.0) {
        let sp = SpacePair::new(p, p, Sequence::harmonic(2.0)).unwrap();
        for t in [duality(&sp), diag(Sequence::constant(1.5), &sp), cubic(Sequence::constant(1.0), &sp)] {
            let small = t.point(&y, 3).unwrap();
            let big = t.point(&y, 5).unwrap();
            prop_assert_eq!(big[3], 0.0);
            for k in 0..3 {
                prop_assert!((small[k] - big[k]).abs() <= 1e-12 * (1.0 + small[k].abs()));
            }
        }
    }

    #[test]
    fn coercivity(dir in vec_in(3, 1.0), scale_exp in 0.0f64..6.0) {
        prop_assume!(dir.iter().any(|v| v.abs() > 1e-3));
        let sp = SpacePair::hilbert();
        let r = 10f64.powf(scale_exp);
        let nd = dot(&dir, &dir).sqrt();
        let y: Vec<f64> = dir.iter().map(|v| v * r / nd).collect();
        let jy = duality(&sp).point(&y, 3).unwrap();
        prop_assert!((dot(&jy, &y) / r - r).abs() <= 1e-9 * r);
        // Σ y_k⁴ ≥ ‖y‖⁴ / 3
        let cy = cubic(Sequence::constant(1.0), &sp).point(&y, 3).unwrap();
        prop_assert!(dot(&cy, &y) / r >= r.powi(3) / 3.0 * (1.0 - 1e-12));
    }

    #[test]
    fn yosida_selection_respects_its_lipschitz_bound(x in vec_in(2, 0.9), y in vec_in(2, 0.9), eps in 0.05f64..0.5) {
        let t = sign(Sequence::constant(1.0));
        let s = build_selection(&t, 2, eps, &Region::unit_ball(2), &SelectionOptions::default()).unwrap();
        prop_assert_eq!(s.method, SelectionMethod::Resolvent);
        let l = s.lipschitz.unwrap();
        let (fx, fy) = (s.eval(&x), s.eval(&y));
        let d: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        let g: Vec<f64> = fx.iter().zip(&fy).map(|(a, b)| a - b).collect();
        prop_assert!(dot(&g, &g).sqrt() <= l * dot(&d, &d).sqrt() * (1.0 + 1e-9) + 1e-12);
    }

    /// Minty: every `x` splits as `y + λ v` with `v ∈ sign(y)`.
    #[test]
    fn sign_is_maximal(x in vec_in(3, 5.0), lambda in 0.01f64..3.0) {
        let t = sign(Sequence::constant(0.7));
        let y = t.resolvent(&x, lambda, 3).unwrap();
        let v: Vec<f64> = x.iter().zip(&y).map(|(a, b)| (a - b) / lambda).collect();
        let val = t.finite_rank(&y, 3).unwrap();
        prop_assert!(val.distance(&v) <= 1e-9, "{:?} ∉ {:?}", v, val);
    }
}
