use std::f64::consts::PI;

use super::region::{FiniteMap, Region};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::space::norm;

/// Counterclockwise boundary parametrization on `s ∈ [0, 1]`.
fn boundary_point<S: Real>(region: &Region<S>, s: f64) -> Vec<S> {
    match region {
        Region::Ball { center, radius, p } => {
            let th = 2.0 * PI * s;
            let d = [S::of(th.cos()), S::of(th.sin())];
            let nd = norm(&d, *p);
            vec![center[0] + *radius * d[0] / nd, center[1] + *radius * d[1] / nd]
        }
        Region::Box { lo, hi } => {
            let (w, h) = ((hi[0] - lo[0]).as_f64(), (hi[1] - lo[1]).as_f64());
            let t = s.rem_euclid(1.0) * 2.0 * (w + h);
            let (x0, y0) = (lo[0].as_f64(), lo[1].as_f64());
            let pt = if t <= w {
                (x0 + t, y0)
            } else if t <= w + h {
                (x0 + w, y0 + t - w)
            } else if t <= 2.0 * w + h {
                (x0 + w - (t - w - h), y0 + h)
            } else {
                (x0, y0 + h - (t - 2.0 * w - h))
            };
            vec![S::of(pt.0), S::of(pt.1)]
        }
    }
}

fn turn(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] * b[1] - a[1] * b[0]).atan2(a[0] * b[0] + a[1] * b[1])
}

/// Winding number of `g|∂R` around 0 from accumulated angle increments;
/// segments whose increment exceeds π/2 are bisected.
pub fn degree_winding_oracle<S: Real>(g: &FiniteMap<S>, region: &Region<S>, quad_points: usize) -> Result<i64> {
    if region.dim() != 2 || g.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: region.dim().max(g.dim()) });
    }
    let value = |s: f64| -> Result<[f64; 2]> {
        let z = boundary_point(region, s);
        let v = g.eval(&z);
        let out = [v[0].as_f64(), v[1].as_f64()];
        if !(out[0].is_finite() && out[1].is_finite()) || (out[0] == 0.0 && out[1] == 0.0) {
            return Err(Error::ZeroOnBoundarySample { point: z.iter().map(|c| c.as_f64()).collect() });
        }
        Ok(out)
    };
    fn segment(
        value: &dyn Fn(f64) -> Result<[f64; 2]>,
        s0: f64,
        s1: f64,
        v0: [f64; 2],
        v1: [f64; 2],
        depth: u32,
    ) -> Result<f64> {
        let d = turn(v0, v1);
        if d.abs() <= PI / 2.0 || depth >= 48 {
            return Ok(d);
        }
        let sm = 0.5 * (s0 + s1);
        let vm = value(sm)?;
        Ok(segment(value, s0, sm, v0, vm, depth + 1)? + segment(value, sm, s1, vm, v1, depth + 1)?)
    }
    let m = quad_points.max(8);
    let mut total = 0.0;
    let mut prev = value(0.0)?;
    for j in 1..=m {
        let s1 = j as f64 / m as f64;
        let cur = if j == m { value(0.0)? } else { value(s1)? };
        total += segment(&value, (j - 1) as f64 / m as f64, s1, prev, cur, 0)?;
        prev = cur;
    }
    Ok((total / (2.0 * PI)).round() as i64)
}
