//! Uniform-grid scalar fields and the finite-difference primitives the rest of
//! the crate is built on.
//!
//! Storage is row-major with `y` as the slow index: cell `(i, j)` (column `i`,
//! row `j`) lives at `j * nx + i`.

use crate::error::{Error, Result};

/// Lattice dimensions and step sizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    /// Spatial step.
    pub dx: f64,
    /// Time step.
    pub dt: f64,
}

impl GridSpec {
    pub const DEFAULT_DX: f64 = 2.0;
    pub const DEFAULT_DT: f64 = 0.2;

    pub fn new(nx: usize, ny: usize, dx: f64, dt: f64) -> Result<Self> {
        let g = Self { nx, ny, dx, dt };
        g.validate()?;
        Ok(g)
    }

    /// Grid with the default steps `dx = 2`, `dt = 0.2`.
    pub fn with_default_steps(nx: usize, ny: usize) -> Result<Self> {
        Self::new(nx, ny, Self::DEFAULT_DX, Self::DEFAULT_DT)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::InvalidGrid(format!(
                "grid must be non-empty, got {}x{}",
                self.nx, self.ny
            )));
        }
        if !(self.dx.is_finite() && self.dx > 0.0) {
            return Err(Error::InvalidGrid(format!("dx must be > 0, got {}", self.dx)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidGrid(format!("dt must be > 0, got {}", self.dt)));
        }
        Ok(())
    }

    /// Number of cells.
    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Same lattice shape (steps may differ).
    pub fn same_shape(&self, other: &GridSpec) -> bool {
        self.nx == other.nx && self.ny == other.ny
    }
}

/// A scalar field over a [`GridSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Field {
    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                found: values.len(),
            });
        }
        Ok(Self { grid, values })
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Build a field by evaluating `f(i, j)` at every cell.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(i, j));
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.grid.index(i, j);
        self.values[k] = v;
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Apply `f` cellwise, producing a new field.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Combine two fields cellwise. Shapes must agree.
    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.check_shape(other)?;
        Ok(Field {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn check_shape(&self, other: &Field) -> Result<()> {
        if self.grid.same_shape(&other.grid) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: self.grid.len(),
                found: other.grid.len(),
            })
        }
    }

    /// Maximum absolute cellwise difference.
    pub fn max_abs_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |a, (x, y)| a.max((x - y).abs()))
    }
}

/// Five-point Laplacian with zero-flux boundaries.
///
/// Out-of-domain neighbours take the value of the boundary cell they mirror
/// across the domain face, so the boundary flux vanishes and the stencil sums
/// to zero over the whole grid.
pub fn laplacian_zero_flux(f: &Field) -> Field {
    let g = *f.grid();
    let mut out = vec![0.0; g.len()];
    laplacian_into(f.values(), &g, &mut out);
    Field { grid: g, values: out }
}

/// Slice form of [`laplacian_zero_flux`] writing into `out`.
pub(crate) fn laplacian_into(v: &[f64], g: &GridSpec, out: &mut [f64]) {
    let (nx, ny) = (g.nx, g.ny);
    let inv = 1.0 / (g.dx * g.dx);
    for j in 0..ny {
        let row = j * nx;
        let up = if j + 1 < ny { row + nx } else { row };
        let down = if j > 0 { row - nx } else { row };
        for i in 0..nx {
            let c = v[row + i];
            let e = if i + 1 < nx { v[row + i + 1] } else { c };
            let w = if i > 0 { v[row + i - 1] } else { c };
            let n = v[up + i];
            let s = v[down + i];
            out[row + i] = (e + w + n + s - 4.0 * c) * inv;
        }
    }
}

/// Circularly shift every row by `cells` toward increasing `x`.
pub fn shift_periodic_x(f: &Field, cells: i64) -> Field {
    let g = *f.grid();
    let nx = g.nx;
    let s = cells.rem_euclid(nx as i64) as usize;
    let mut out = vec![0.0; g.len()];
    for j in 0..g.ny {
        let row = &f.values[j * nx..(j + 1) * nx];
        let dst = &mut out[j * nx..(j + 1) * nx];
        dst[s..].copy_from_slice(&row[..nx - s]);
        dst[..s].copy_from_slice(&row[nx - s..]);
    }
    Field { grid: g, values: out }
}

/// Clamp every value into `[lo, hi]`.
pub fn clamp_range(f: &Field, lo: f64, hi: f64) -> Field {
    f.map(|v| clamp(v, lo, hi))
}

#[inline]
pub(crate) fn clamp(v: f64, lo: f64, hi: f64) -> f64 {
    hi.min(lo.max(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nx: usize, ny: usize, dx: f64) -> GridSpec {
        GridSpec::new(nx, ny, dx, 0.2).unwrap()
    }

    #[test]
    fn laplacian_of_constant_is_zero() {
        let f = Field::constant(grid(7, 5, 2.0), 3.25);
        assert!(laplacian_zero_flux(&f).values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn interior_spike() {
        let g = grid(5, 5, 1.0);
        let mut f = Field::zeros(g);
        f.set(2, 2, 1.0);
        let l = laplacian_zero_flux(&f);
        for j in 0..5 {
            for i in 0..5 {
                let expect = match (i, j) {
                    (2, 2) => -4.0,
                    (1, 2) | (3, 2) | (2, 1) | (2, 3) => 1.0,
                    _ => 0.0,
                };
                assert_eq!(l.get(i, j), expect, "cell ({i},{j})");
            }
        }
    }

    #[test]
    fn corner_spike() {
        let g = grid(4, 4, 1.0);
        let mut f = Field::zeros(g);
        f.set(0, 0, 1.0);
        let l = laplacian_zero_flux(&f);
        assert_eq!(l.get(0, 0), -2.0);
        assert_eq!(l.get(1, 0), 1.0);
        assert_eq!(l.get(0, 1), 1.0);
        assert_eq!(l.sum(), 0.0);
    }

    #[test]
    fn degenerate_single_cell() {
        let f = Field::constant(grid(1, 1, 1.0), 0.7);
        assert_eq!(laplacian_zero_flux(&f).get(0, 0), 0.0);
    }

    #[test]
    fn dx_scaling() {
        let g = grid(5, 5, 2.0);
        let mut f = Field::zeros(g);
        f.set(2, 2, 1.0);
        assert_eq!(laplacian_zero_flux(&f).get(2, 2), -1.0);
    }

    #[test]
    fn shift_row() {
        let g = grid(4, 1, 1.0);
        let f = Field::from_values(g, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(shift_periodic_x(&f, 1).values(), &[4.0, 1.0, 2.0, 3.0]);
        assert_eq!(shift_periodic_x(&f, -1).values(), &[2.0, 3.0, 4.0, 1.0]);
        assert_eq!(shift_periodic_x(&f, 4), f);
        assert_eq!(shift_periodic_x(&f, 9), shift_periodic_x(&f, 1));
    }

    #[test]
    fn clamp_examples() {
        let g = grid(3, 1, 1.0);
        let f = Field::from_values(g, vec![2.5, -0.5, 1.0]).unwrap();
        assert_eq!(clamp_range(&f, 0.0, 2.0).values(), &[2.0, 0.0, 1.0]);
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let a = Field::zeros(grid(3, 3, 1.0));
        let b = Field::zeros(grid(4, 3, 1.0));
        assert!(matches!(a.zip_map(&b, |x, y| x + y), Err(Error::ShapeMismatch { .. })));
        assert!(Field::from_values(grid(3, 3, 1.0), vec![0.0; 8]).is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(0, 3, 1.0, 0.1).is_err());
        assert!(GridSpec::new(3, 3, -1.0, 0.1).is_err());
        assert!(GridSpec::new(3, 3, 1.0, 0.0).is_err());
        assert!(GridSpec::new(3, 3, f64::NAN, 0.1).is_err());
    }
}
