//! Cloud occlusion: random elliptical cloud fields advected in `x` with
//! periodic wrap, coverage accounting and sentinel encoding.

use rand::Rng;

use crate::error::{Error, Result};
use crate::field::{Field, GridSpec};
use crate::seed::rng_from_seed;

/// Default value written into occluded pixels at the file boundary.
pub const DEFAULT_SENTINEL: f64 = 9999.0;

/// Realized coverage must land within this distance of the requested target.
pub const COVERAGE_TOLERANCE: f64 = 0.02;

/// Targets above this are rejected outright.
pub const MAX_COVERAGE: f64 = 0.98;

/// Time-varying occlusion set.
///
/// The mask at any time is the initial mask shifted right by
/// `floor(nu · elapsed / dx)` whole cells, so transport is exact and the
/// number of occluded cells never changes.
#[derive(Clone, Debug, PartialEq)]
pub struct CloudMask {
    grid: GridSpec,
    base: Vec<bool>,
    mask: Vec<bool>,
    /// Advection speed in space units per unit time.
    pub nu: f64,
    pub sentinel: f64,
    elapsed: f64,
    shift: i64,
}

impl CloudMask {
    pub fn new(grid: GridSpec, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                found: mask.len(),
            });
        }
        Ok(Self {
            grid,
            base: mask.clone(),
            mask,
            nu: 0.0,
            sentinel: DEFAULT_SENTINEL,
            elapsed: 0.0,
            shift: 0,
        })
    }

    /// No occlusion anywhere.
    pub fn clear(grid: GridSpec) -> Self {
        Self::new(grid, vec![false; grid.len()]).expect("shape matches")
    }

    /// Occluded everywhere.
    pub fn full(grid: GridSpec) -> Self {
        Self::new(grid, vec![true; grid.len()]).expect("shape matches")
    }

    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut mask = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                mask.push(f(i, j));
            }
        }
        Self::new(grid, mask).expect("shape matches")
    }

    pub fn with_speed(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    pub fn with_sentinel(mut self, sentinel: f64) -> Self {
        self.sentinel = sentinel;
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// Current occlusion flags, row-major; `true` means hidden.
    pub fn cells(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn is_occluded(&self, i: usize, j: usize) -> bool {
        self.mask[self.grid.index(i, j)]
    }

    pub fn occluded_count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    /// Total whole-cell displacement applied so far.
    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn elapsed(&self) -> f64 {
        self.elapsed
    }
}

fn shift_mask(base: &[bool], g: &GridSpec, cells: i64) -> Vec<bool> {
    let nx = g.nx;
    let s = cells.rem_euclid(nx as i64) as usize;
    let mut out = vec![false; base.len()];
    for j in 0..g.ny {
        let row = &base[j * nx..(j + 1) * nx];
        let dst = &mut out[j * nx..(j + 1) * nx];
        dst[s..].copy_from_slice(&row[..nx - s]);
        dst[..s].copy_from_slice(&row[nx - s..]);
    }
    out
}

/// Advance the clouds by `elapsed` time units.
pub fn advect_mask(c: &CloudMask, elapsed: f64) -> CloudMask {
    let total = c.elapsed + elapsed;
    // Guard against 0.9999…-style accumulation just below an integer.
    let shift = (c.nu * total / c.grid.dx + 1e-9).floor() as i64;
    let mut out = c.clone();
    out.elapsed = total;
    if shift != c.shift {
        out.mask = shift_mask(&c.base, &c.grid, shift);
        out.shift = shift;
    }
    out
}

/// Shift the clouds by a whole number of cells, independent of speed.
pub fn shift_mask_cells(c: &CloudMask, cells: i64) -> CloudMask {
    let mut out = c.clone();
    out.base = shift_mask(&c.base, &c.grid, cells);
    out.mask = shift_mask(&c.mask, &c.grid, cells);
    out
}

/// Fraction of occluded cells.
pub fn coverage(c: &CloudMask) -> f64 {
    c.occluded_count() as f64 / c.mask.len() as f64
}

/// Copy of `p` with occluded cells replaced by the sentinel value.
pub fn apply_sentinel(p: &Field, c: &CloudMask) -> Result<Field> {
    if !p.grid().same_shape(&c.grid) {
        return Err(Error::ShapeMismatch {
            expected: c.grid.len(),
            found: p.grid().len(),
        });
    }
    let mut out = p.clone();
    for (v, &hidden) in out.values_mut().iter_mut().zip(&c.mask) {
        if hidden {
            *v = c.sentinel;
        }
    }
    Ok(out)
}

/// Cells whose value equals `sentinel`.
pub fn detect_sentinel(f: &Field, sentinel: f64) -> Vec<bool> {
    f.values().iter().map(|&v| v == sentinel).collect()
}

/// One elliptical cloud in cell coordinates.
#[derive(Clone, Copy, Debug)]
struct Ellipse {
    cx: f64,
    cy: f64,
    /// Relative size, scaled by the global radius during fitting.
    size: f64,
    aspect: f64,
}

fn rasterize(g: &GridSpec, clouds: &[Ellipse], radius: f64) -> Vec<bool> {
    let nx = g.nx as f64;
    let mut mask = vec![false; g.len()];
    for e in clouds {
        let b = radius * e.size;
        let a = b * e.aspect;
        if b <= 0.0 {
            continue;
        }
        let j0 = ((e.cy - b).floor().max(0.0)) as usize;
        let j1 = ((e.cy + b).ceil().min(g.ny as f64 - 1.0)).max(0.0) as usize;
        for j in j0..=j1.min(g.ny - 1) {
            let yc = j as f64 + 0.5;
            let ry = (yc - e.cy) / b;
            if ry.abs() > 1.0 {
                continue;
            }
            for i in 0..g.nx {
                let xc = i as f64 + 0.5;
                let mut d = (xc - e.cx).abs();
                d = d.min(nx - d);
                let rx = d / a;
                if rx * rx + ry * ry <= 1.0 {
                    mask[j * g.nx + i] = true;
                }
            }
        }
    }
    mask
}

/// `count` randomly placed axis-aligned elliptical clouds, wrapped
/// periodically in `x`, with a common radius scale fitted so the covered
/// fraction is within [`COVERAGE_TOLERANCE`] of `target_coverage`.
///
/// Ellipses have an `x:y` aspect ratio drawn from `[1, 3]` and a relative
/// size drawn from `[0.5, 1.5]`.
pub fn gen_clouds(g: &GridSpec, count: usize, target_coverage: f64, seed: u64) -> Result<CloudMask> {
    if !(0.0..1.0).contains(&target_coverage) {
        return Err(Error::InfeasibleCoverage {
            target: target_coverage,
            reason: "coverage must lie in [0, 1)".into(),
        });
    }
    if target_coverage > MAX_COVERAGE {
        return Err(Error::InfeasibleCoverage {
            target: target_coverage,
            reason: format!("coverage above {MAX_COVERAGE} is not supported"),
        });
    }
    if count == 0 || target_coverage == 0.0 {
        if target_coverage > COVERAGE_TOLERANCE {
            return Err(Error::InfeasibleCoverage {
                target: target_coverage,
                reason: "no clouds requested".into(),
            });
        }
        return Ok(CloudMask::clear(*g));
    }

    let mut rng = rng_from_seed(seed);
    let clouds: Vec<Ellipse> = (0..count)
        .map(|_| Ellipse {
            cx: rng.gen_range(0.0..g.nx as f64),
            cy: rng.gen_range(0.0..g.ny as f64),
            size: rng.gen_range(0.5..1.5),
            aspect: rng.gen_range(1.0..3.0),
        })
        .collect();

    let cov = |r: f64| {
        let m = rasterize(g, &clouds, r);
        m.iter().filter(|&&b| b).count() as f64 / m.len() as f64
    };
    // Coverage is monotone in the radius; bisect for the smallest radius
    // reaching the target, then keep whichever bracket end is closer.
    let (mut lo, mut hi) = (0.0, (g.nx.max(g.ny) as f64) * 2.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if cov(mid) < target_coverage {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (clo, chi) = (cov(lo), cov(hi));
    let radius = if (clo - target_coverage).abs() < (chi - target_coverage).abs() {
        lo
    } else {
        hi
    };
    let mask = rasterize(g, &clouds, radius);
    let realized = mask.iter().filter(|&&b| b).count() as f64 / mask.len() as f64;
    if (realized - target_coverage).abs() > COVERAGE_TOLERANCE {
        return Err(Error::InfeasibleCoverage {
            target: target_coverage,
            reason: format!("closest realizable coverage is {realized:.4}"),
        });
    }
    CloudMask::new(*g, mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> GridSpec {
        GridSpec::with_default_steps(128, 64).unwrap()
    }

    #[test]
    fn no_clouds() {
        let m = gen_clouds(&grid(), 0, 0.0, 1).unwrap();
        assert_eq!(coverage(&m), 0.0);
        assert!(gen_clouds(&grid(), 0, 0.3, 1).is_err());
    }

    #[test]
    fn scenario_coverage_targets() {
        for &target in &[0.658, 0.255, 0.13, 0.40] {
            let m = gen_clouds(&grid(), 30, target, 17).unwrap();
            let c = coverage(&m);
            assert!((c - target).abs() <= COVERAGE_TOLERANCE, "{target} -> {c}");
        }
    }

    #[test]
    fn infeasible_targets() {
        assert!(gen_clouds(&grid(), 30, 0.99, 1).is_err());
        assert!(gen_clouds(&grid(), 30, 1.0, 1).is_err());
        assert!(gen_clouds(&grid(), 30, -0.1, 1).is_err());
    }

    #[test]
    fn clouds_are_deterministic() {
        let a = gen_clouds(&grid(), 30, 0.5, 99).unwrap();
        let b = gen_clouds(&grid(), 30, 0.5, 99).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn advection() {
        let g = grid();
        let m = gen_clouds(&g, 10, 0.3, 5).unwrap();
        let still = advect_mask(&m, 100.0);
        assert_eq!(still.cells(), m.cells());

        let moving = m.clone().with_speed(1.0);
        let count = moving.occluded_count();
        let mut cur = moving.clone();
        for _ in 0..1000 {
            cur = advect_mask(&cur, g.dt);
            assert_eq!(cur.occluded_count(), count);
        }
        // 1000 · 0.2 · 1 / 2 = 100 cells.
        assert_eq!(cur.shift(), 100);

        // nx cells in one go is the identity.
        let wrap = advect_mask(&moving, g.nx as f64 * g.dx);
        assert_eq!(wrap.shift(), g.nx as i64);
        assert_eq!(wrap.cells(), m.cells());
    }

    #[test]
    fn coverage_examples() {
        let g = GridSpec::with_default_steps(8, 4).unwrap();
        assert_eq!(coverage(&CloudMask::clear(g)), 0.0);
        assert_eq!(coverage(&CloudMask::full(g)), 1.0);
        assert_eq!(coverage(&CloudMask::from_fn(g, |i, _| i < 4)), 0.5);
    }

    #[test]
    fn sentinel_round_trip() {
        let g = GridSpec::with_default_steps(6, 5).unwrap();
        let p = Field::from_fn(g, |i, j| 0.1 * (i + j) as f64);
        assert_eq!(apply_sentinel(&p, &CloudMask::clear(g)).unwrap(), p);
        let full = apply_sentinel(&p, &CloudMask::full(g)).unwrap();
        assert!(full.values().iter().all(|&v| v == DEFAULT_SENTINEL));

        let checker = CloudMask::from_fn(g, |i, j| (i + j) % 2 == 0);
        let enc = apply_sentinel(&p, &checker).unwrap();
        assert_eq!(detect_sentinel(&enc, DEFAULT_SENTINEL), checker.cells());
    }
}
