//! Box-subdivision degree against the winding-number oracle on random
//! planar cubic maps.

use mmdegree::brouwer::{degree, degree_winding_oracle, DegreeOptions, FiniteMap, Region};
use mmdegree::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_cubic(rng: &mut ChaCha8Rng) -> FiniteMap<f64> {
    let c: Vec<f64> = (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect();
    FiniteMap::new(2, move |z: &[f64]| {
        let (x, y) = (z[0], z[1]);
        let m = [1.0, x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y, y * y * y];
        let a: f64 = m.iter().zip(&c[..10]).map(|(u, v)| u * v).sum();
        let b: f64 = m.iter().zip(&c[10..]).map(|(u, v)| u * v).sum();
        vec![a, b]
    })
}

#[test]
fn twenty_random_cubics_match_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let region = Region::ball(vec![0.0, 0.0], 1.5);
    let mut compared = 0;
    let mut drawn = 0;
    let mut seen = std::collections::BTreeSet::new();
    while compared < 20 {
        drawn += 1;
        assert!(drawn < 200, "too many maps with near-boundary zeros");
        let g = random_cubic(&mut rng);
        match degree(&g, &region, &DegreeOptions::default()) {
            Ok(d) => {
                let w = degree_winding_oracle(&g, &region, 4096).unwrap();
                assert_eq!(d, w, "map #{drawn}");
                seen.insert(d);
                compared += 1;
            }
            Err(Error::BoundaryTooClose { .. }) | Err(Error::DegenerateZero { .. }) => continue,
            Err(e) => panic!("map #{drawn}: {e:?}"),
        }
    }
    assert!(seen.len() >= 2, "degrees seen: {seen:?}");
}
