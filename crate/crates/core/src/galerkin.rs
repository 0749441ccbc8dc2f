//! Regularized Galerkin sections `T̃_{n,εₙ} = T_{n,εₙ} + ε J_n` and the choice
//! of the regularization `ε`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::brouwer::{auto_grid, DegreeOptions, FiniteMap, Region};
use crate::error::{Error, Result};
use crate::scalar::{dot, norm2, resized, Real};
use crate::selection::{build_selection, Selection, SelectionOptions};
use crate::setval::{AuditReport, MonotoneMap};
use crate::space::{pairing, SpacePair};

/// Below this, a boundary value set is taken to contain 0.
pub const BOUNDARY_ZERO_TOL: f64 = 1e-8;

/// Open bounded `D ⊂ Y` given in coefficients; `D_n` truncates to `Y_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain<S> {
    /// Ball in the `ℓ^p` coefficient norm; the center is zero-padded.
    Ball { center: Vec<S>, radius: S, p: S },
    /// Needs at least `n` coordinate bounds for the section `D_n`.
    Box { lo: Vec<S>, hi: Vec<S> },
}

impl<S: Real> Domain<S> {
    pub fn ball(radius: S, p: S) -> Self {
        Domain::Ball { center: Vec::new(), radius, p }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |d: String| Err(Error::BadParams { operator: "domain".into(), detail: d });
        match self {
            Domain::Ball { center, radius, p } => {
                if !(*radius > S::zero() && radius.is_finite()) {
                    return bad(format!("radius {radius} must be positive and finite"));
                }
                if !(*p > S::one() && p.is_finite()) {
                    return bad(format!("norm exponent {p}: exponent must exceed 1"));
                }
                if !center.iter().all(|c| c.is_finite()) {
                    return bad("center must be finite".into());
                }
            }
            Domain::Box { lo, hi } => {
                if lo.len() != hi.len() || lo.is_empty() {
                    return bad("lo and hi must be nonempty and of equal length".into());
                }
                if !lo.iter().zip(hi).all(|(a, b)| a < b && a.is_finite() && b.is_finite()) {
                    return bad("box needs finite lo < hi in every coordinate".into());
                }
            }
        }
        Ok(())
    }

    pub fn section(&self, n: usize) -> Result<Region<S>> {
        self.validate()?;
        Ok(match self {
            Domain::Ball { center, radius, p } => Region::Ball { center: resized(center, n), radius: *radius, p: *p },
            Domain::Box { lo, hi } => {
                if lo.len() < n {
                    return Err(Error::DimensionMismatch { expected: n, got: lo.len() });
                }
                Region::Box { lo: lo[..n].to_vec(), hi: hi[..n].to_vec() }
            }
        })
    }

    /// Same domain with the radius (or half-widths) scaled by `f`.
    pub fn dilated(&self, f: S) -> Self {
        match self {
            Domain::Ball { center, radius, p } => Domain::Ball { center: center.clone(), radius: *radius * f, p: *p },
            Domain::Box { lo, hi } => {
                let two = S::of(2.0);
                let mid: Vec<S> = lo.iter().zip(hi).map(|(a, b)| (*a + *b) / two).collect();
                Domain::Box {
                    lo: lo.iter().zip(&mid).map(|(a, m)| *m + (*a - *m) * f).collect(),
                    hi: hi.iter().zip(&mid).map(|(b, m)| *m + (*b - *m) * f).collect(),
                }
            }
        }
    }
}

/// Section indices with selection accuracies `εₙ → 0` and a fixed `ε`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule<S> {
    pub n_list: Vec<usize>,
    /// `None`: chosen by [`choose_epsilon`].
    pub eps_reg: Option<S>,
    /// `None`: `eps_reg / 2^j` along `n_list`.
    pub eps_n: Option<Vec<S>>,
    /// Stabilization window.
    pub window: usize,
}

impl<S: Real> Schedule<S> {
    pub fn new(n_list: Vec<usize>) -> Self {
        Schedule { n_list, eps_reg: None, eps_n: None, window: 3 }
    }

    pub fn up_to(n_max: usize) -> Self {
        Schedule::new((1..=n_max).collect())
    }

    pub fn with_eps_reg(mut self, eps: S) -> Self {
        self.eps_reg = Some(eps);
        self
    }

    pub fn with_eps_n(mut self, eps_n: Vec<S>) -> Self {
        self.eps_n = Some(eps_n);
        self
    }

    pub fn with_window(mut self, k: usize) -> Self {
        self.window = k;
        self
    }

    pub fn n_max(&self) -> usize {
        self.n_list.iter().copied().max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |d: &str| Err(Error::BadParams { operator: "schedule".into(), detail: d.into() });
        if self.n_list.is_empty() || self.n_list[0] == 0 || self.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return bad("n_list must be nonempty, positive and strictly increasing");
        }
        if self.window == 0 {
            return bad("window must be positive");
        }
        if let Some(e) = self.eps_reg {
            if !(e > S::zero() && e.is_finite()) {
                return bad("eps_reg must be positive");
            }
        }
        if let Some(v) = &self.eps_n {
            if v.len() != self.n_list.len() {
                return bad("eps_n must have one entry per n");
            }
            if !v.iter().all(|e| *e > S::zero() && e.is_finite()) || v.windows(2).any(|w| w[1] > w[0]) {
                return bad("eps_n must be positive and non-increasing");
            }
        }
        Ok(())
    }

    pub fn eps_n_for(&self, eps_reg: S) -> Vec<S> {
        match &self.eps_n {
            Some(v) => v.clone(),
            None => (0..self.n_list.len()).map(|j| eps_reg / S::of(2f64.powi(j as i32))).collect(),
        }
    }

    /// Every accuracy scaled by `f`.
    pub fn scaled(&self, f: S) -> Self {
        let mut out = self.clone();
        out.eps_reg = self.eps_reg.map(|e| e * f);
        out.eps_n = self.eps_n.as_ref().map(|v| v.iter().map(|e| *e * f).collect());
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct PipelineOptions {
    pub degree: DegreeOptions,
    pub selection: SelectionOptions,
    /// Boundary grid for margins; `None` picks [`auto_grid`].
    pub boundary_grid: Option<usize>,
}

impl PipelineOptions {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.degree.seed = seed;
        self.selection.seed = seed;
        self
    }
}

/// Sampled `min_{z ∈ ∂D_n} φ(z)` refined by pattern search on the boundary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryMin<S> {
    pub value: S,
    pub point: Vec<S>,
    pub samples: usize,
}

pub(crate) fn boundary_min<S: Real>(region: &Region<S>, grid: usize, phi: &dyn Fn(&[S]) -> S) -> BoundaryMin<S> {
    let pts = region.boundary_samples(grid);
    let mut scored: Vec<(S, usize)> = pts.iter().enumerate().map(|(i, z)| (phi(z), i)).collect();
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Less).then(a.1.cmp(&b.1)));
    let n = region.dim();
    let Some(&(v_first, i_first)) = scored.first() else {
        return BoundaryMin { value: S::infinity(), point: Vec::new(), samples: 0 };
    };
    let mut best = (v_first, pts[i_first].clone());
    if !best.0.is_finite() {
        return BoundaryMin { value: best.0, point: best.1, samples: pts.len() };
    }
    let (lo, hi) = region.bounding_box();
    let size = lo.iter().zip(&hi).map(|(a, b)| *b - *a).fold(S::zero(), S::max);
    for &(v0, i0) in scored.iter().take(3) {
        let mut z = pts[i0].clone();
        let mut v = v0;
        let mut step = region.mesh(grid).max(size / S::of(64.0));
        let floor = size * S::of(1e-12);
        while step > floor && v > S::zero() {
            let mut moved = false;
            for i in 0..n {
                for s in [step, -step] {
                    let mut c = z.clone();
                    c[i] += s;
                    let c = region.project_boundary(&c);
                    let vc = phi(&c);
                    if vc < v {
                        z = c;
                        v = vc;
                        moved = true;
                    }
                }
            }
            if !moved {
                step /= S::of(2.0);
            }
        }
        if v < best.0 {
            best = (v, z);
        }
    }
    BoundaryMin { value: best.0, point: best.1, samples: pts.len() }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonChoice<S> {
    pub eps: S,
    /// Estimate of `dist(0, cl T(∂D))` on the reference section.
    pub r_hat: S,
    /// `max(‖z‖_{p_Y}, ‖J_n z‖₂)` over the boundary.
    pub max_norm: S,
    pub argmin: Vec<S>,
    pub n: usize,
}

/// `ε = ½ r̂ / max ‖z‖` on the section `D_n`.
pub fn choose_epsilon<S: Real>(
    t: &MonotoneMap<S>,
    domain: &Domain<S>,
    sp: &SpacePair<S>,
    n: usize,
    grid: Option<usize>,
) -> Result<EpsilonChoice<S>> {
    let region = domain.section(n)?;
    let grid = grid.unwrap_or_else(|| auto_grid(n));
    let dist = |z: &[S]| t.finite_rank(z, n).map(|v| v.distance_to_origin()).unwrap_or(S::zero());
    let m = boundary_min(&region, grid, &dist);
    if !(m.value.as_f64() > BOUNDARY_ZERO_TOL) {
        return Err(Error::BoundaryHitsZero {
            distance: m.value.as_f64(),
            point: m.point.iter().map(|v| v.as_f64()).collect(),
        });
    }
    let pts = region.boundary_samples(grid);
    let jmax = pts.iter().map(|z| norm2(&sp.duality_section(z, n))).fold(S::zero(), S::max);
    let max_norm = region.max_boundary_norm(sp.p_y()).max(jmax);
    Ok(EpsilonChoice { eps: S::of(0.5) * m.value / max_norm, r_hat: m.value, max_norm, argmin: m.point, n })
}

/// Everything [`assemble`] builds for one section.
#[derive(Debug, Clone)]
pub struct Assembled<S> {
    pub map: FiniteMap<S>,
    pub selection: Selection<S>,
    pub region: Region<S>,
}

pub fn assemble<S: Real>(
    t: &MonotoneMap<S>,
    domain: &Domain<S>,
    sp: &SpacePair<S>,
    n: usize,
    eps_n: S,
    eps_reg: S,
    opts: &PipelineOptions,
) -> Result<Assembled<S>> {
    if !(eps_n > S::zero() && eps_reg >= S::zero()) {
        return Err(Error::BadParams { operator: "assemble".into(), detail: "accuracies must be positive".into() });
    }
    let region = domain.section(n)?;
    let selection = build_selection(t, n, eps_n, &region, &opts.selection)?;
    let map = regularized(&selection, sp, n, eps_reg);
    Ok(Assembled { map, selection, region })
}

/// `x ↦ s(x) + ε J_n(x)`.
pub(crate) fn regularized<S: Real>(selection: &Selection<S>, sp: &SpacePair<S>, n: usize, eps_reg: S) -> FiniteMap<S> {
    let sel = selection.clone();
    let sp = sp.clone();
    FiniteMap::new(n, move |x: &[S]| {
        let j = sp.duality_section(x, n);
        sel.eval(x).iter().zip(&j).map(|(s, jv)| *s + eps_reg * *jv).collect()
    })
}

/// Checks `(x̂, y) = ⟨x*, i(y)⟩` for extreme points `x̂` of sampled values,
/// with `x*_k = x̂_k / w_k` the functional behind the coefficients.
pub fn pairing_identity_check<S: Real>(
    t: &MonotoneMap<S>,
    sp: &SpacePair<S>,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<AuditReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut passed = 0;
    let mut total = 0;
    for _ in 0..samples.max(1) {
        let y: Vec<S> =
            (0..n).map(|_| if rng.gen_bool(0.25) { S::zero() } else { S::of(rng.gen_range(-2.0..2.0)) }).collect();
        let v = t.finite_rank(&y, n)?;
        let ext = v.extreme_points().unwrap_or_else(|| vec![v.min_norm_point()]);
        for xh in ext {
            let xstar: Vec<S> = xh.iter().enumerate().map(|(k, c)| *c / sp.weight(k)).collect();
            let lhs = dot(&xh, &y).as_f64();
            let rhs = pairing(&xstar, &y, sp).as_f64();
            let gap = (lhs - rhs).abs() / (1.0 + lhs.abs());
            total += 1;
            if gap <= 1e-10 {
                passed += 1;
            }
            worst = worst.max(gap);
        }
    }
    Ok(AuditReport { samples: total, passed, worst, pass: passed == total })
}
