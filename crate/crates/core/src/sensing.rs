//! Coarse sensor sampling: rectangular patches on a regular lattice report
//! local averages of the observed field.

use crate::error::{Error, Result};
use crate::field::{Field, GridSpec};

/// Sensor patch geometry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SensorSpec {
    pub patch_w: usize,
    pub patch_h: usize,
    /// Unobserved cells between neighbouring patches (both directions).
    pub gap: usize,
    pub origin_x: usize,
    pub origin_y: usize,
}

impl Default for SensorSpec {
    fn default() -> Self {
        Self {
            patch_w: 2,
            patch_h: 2,
            gap: 1,
            origin_x: 0,
            origin_y: 0,
        }
    }
}

impl SensorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.patch_w == 0 || self.patch_h == 0 {
            return Err(Error::InvalidArgument(format!(
                "sensor patch must be at least 1x1, got {}x{}",
                self.patch_w, self.patch_h
            )));
        }
        Ok(())
    }

    pub fn cells_per_sensor(&self) -> usize {
        self.patch_w * self.patch_h
    }
}

/// How the innovation sum is normalized.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum InnovationNorm {
    /// Divide by the patch cell count, i.e. the mean innovation.
    #[default]
    PatchCells,
    /// Divide by the product of the grid steps in `x` and `y`.
    GridSteps { dx: f64, dy: f64 },
}

/// Sensor placement resolved against a grid. Patches that would cross the
/// domain edge are dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorLayout {
    grid: GridSpec,
    spec: SensorSpec,
    /// Lower-left corner of each retained sensor.
    origins: Vec<(usize, usize)>,
    /// Sensor index per cell, `None` between sensors.
    owner: Vec<Option<usize>>,
}

impl SensorLayout {
    pub fn new(grid: GridSpec, spec: SensorSpec) -> Result<Self> {
        spec.validate()?;
        let step_x = spec.patch_w + spec.gap;
        let step_y = spec.patch_h + spec.gap;
        let mut origins = Vec::new();
        let mut y = spec.origin_y;
        while y + spec.patch_h <= grid.ny {
            let mut x = spec.origin_x;
            while x + spec.patch_w <= grid.nx {
                origins.push((x, y));
                x += step_x;
            }
            y += step_y;
        }
        let mut owner = vec![None; grid.len()];
        for (n, &(x0, y0)) in origins.iter().enumerate() {
            for j in y0..y0 + spec.patch_h {
                for i in x0..x0 + spec.patch_w {
                    owner[grid.index(i, j)] = Some(n);
                }
            }
        }
        Ok(Self {
            grid,
            spec,
            origins,
            owner,
        })
    }

    pub fn spec(&self) -> &SensorSpec {
        &self.spec
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.origins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.origins.is_empty()
    }

    pub fn origins(&self) -> &[(usize, usize)] {
        &self.origins
    }

    /// Sensor covering cell index `c`, if any.
    #[inline]
    pub fn owner(&self, c: usize) -> Option<usize> {
        self.owner[c]
    }

    /// Row-major cell indices of sensor `n`.
    pub fn cells(&self, n: usize) -> impl Iterator<Item = usize> + '_ {
        let (x0, y0) = self.origins[n];
        let (w, h) = (self.spec.patch_w, self.spec.patch_h);
        (y0..y0 + h).flat_map(move |j| (x0..x0 + w).map(move |i| self.grid.index(i, j)))
    }

    fn check(&self, f: &Field) -> Result<()> {
        if f.grid().same_shape(&self.grid) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                expected: self.grid.len(),
                found: f.grid().len(),
            })
        }
    }
}

/// One scalar per sensor, aligned with [`SensorLayout::origins`].
#[derive(Clone, Debug, PartialEq)]
pub struct SensorValues(pub Vec<f64>);

impl SensorValues {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Mean of `p` over each sensor.
pub fn local_averages(p: &Field, layout: &SensorLayout) -> Result<SensorValues> {
    layout.check(p)?;
    let v = p.values();
    let n = layout.spec.cells_per_sensor() as f64;
    Ok(SensorValues(
        (0..layout.len())
            .map(|s| layout.cells(s).map(|c| v[c]).sum::<f64>() / n)
            .collect(),
    ))
}

/// Normalized sum of `p − phat` over each sensor.
pub fn innovation(p: &Field, phat: &Field, layout: &SensorLayout, norm: InnovationNorm) -> Result<SensorValues> {
    layout.check(p)?;
    layout.check(phat)?;
    let (a, b) = (p.values(), phat.values());
    let denom = match norm {
        InnovationNorm::PatchCells => layout.spec.cells_per_sensor() as f64,
        InnovationNorm::GridSteps { dx, dy } => dx * dy,
    };
    Ok(SensorValues(
        (0..layout.len())
            .map(|s| layout.cells(s).map(|c| a[c] - b[c]).sum::<f64>() / denom)
            .collect(),
    ))
}
