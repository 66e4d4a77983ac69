use super::jacobian::{reaction_jacobian, JacobianMode, Mat2};
use super::laplacian::SparseLaplacian;
use crate::ecology::{DriveParams, DriveState};
use crate::error::{Error, Result};
use crate::field::GridSpec;

/// Species coupling matrices and their weights.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingMatrices {
    /// Diffusion couples both species.
    pub b1: Mat2,
    /// Drive-response coupling acts on the first species only.
    pub b2: Mat2,
    /// Diffusion weight, `1 / dx²`.
    pub sigma1: f64,
    /// Drive-response coupling gain.
    pub sigma2: f64,
}

impl CouplingMatrices {
    pub fn new(g: &GridSpec, kappa: f64) -> Self {
        Self {
            b1: [[1.0, 0.0], [0.0, 1.0]],
            b2: [[1.0, 0.0], [0.0, 0.0]],
            sigma1: 1.0 / (g.dx * g.dx),
            sigma2: kappa,
        }
    }
}

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[0.0; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

#[inline]
fn mat2_apply(a: &Mat2, x0: f64, x1: f64) -> (f64, f64) {
    (a[0][0] * x0 + a[0][1] * x1, a[1][0] * x0 + a[1][1] * x1)
}

/// A linear map on `R^dim`.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    /// `y = A x`; `y` is overwritten.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Linearized network `F − σ1 L1⊗B1 + σ2 L2⊗B2` on `2N` two-species nodes.
/// Vectors interleave species per node: entry `2q + s`.
///
/// `L1` is stored as `D − A`, so it enters with a minus sign to reproduce the
/// diffusion stencil; `L2` rows already carry `observation − estimate`.
#[derive(Clone, Debug)]
pub struct NetOperator {
    blocks: Vec<Mat2>,
    l1: SparseLaplacian,
    l2: SparseLaplacian,
    cm: CouplingMatrices,
}

impl NetOperator {
    pub fn new(blocks: Vec<Mat2>, l1: SparseLaplacian, l2: SparseLaplacian, cm: CouplingMatrices) -> Result<Self> {
        for (name, d) in [("L1", l1.dim()), ("L2", l2.dim())] {
            if d != blocks.len() {
                return Err(Error::InvalidArgument(format!(
                    "{name} has dimension {d} but there are {} nodes",
                    blocks.len()
                )));
            }
        }
        Ok(Self { blocks, l1, l2, cm })
    }

    pub fn nodes(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Mat2] {
        &self.blocks
    }

    /// Dense matrix, for small problems and tests.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut out = vec![vec![0.0; d]; d];
        let mut x = vec![0.0; d];
        let mut y = vec![0.0; d];
        for c in 0..d {
            x[c] = 1.0;
            self.apply(&x, &mut y);
            for r in 0..d {
                out[r][c] = y[r];
            }
            x[c] = 0.0;
        }
        out
    }
}

impl LinearOperator for NetOperator {
    fn dim(&self) -> usize {
        2 * self.blocks.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let CouplingMatrices { b1, b2, sigma1, sigma2 } = &self.cm;
        for (q, j) in self.blocks.iter().enumerate() {
            let (mut a0, mut a1) = mat2_apply(j, x[2 * q], x[2 * q + 1]);
            let (mut d0, mut d1) = (0.0, 0.0);
            for (c, v) in self.l1.row(q) {
                let (u0, u1) = mat2_apply(b1, x[2 * c], x[2 * c + 1]);
                d0 += v * u0;
                d1 += v * u1;
            }
            let (mut s0, mut s1) = (0.0, 0.0);
            for (c, v) in self.l2.row(q) {
                let (u0, u1) = mat2_apply(b2, x[2 * c], x[2 * c + 1]);
                s0 += v * u0;
                s1 += v * u1;
            }
            a0 += -sigma1 * d0 + sigma2 * s0;
            a1 += -sigma1 * d1 + sigma2 * s1;
            y[2 * q] = a0;
            y[2 * q + 1] = a1;
        }
    }
}

/// Linearize about the synchronized state: response nodes share the
/// Jacobian of the drive cell they mirror.
pub fn assemble_linearized(
    state: &DriveState,
    params: &DriveParams,
    l1: &SparseLaplacian,
    l2: &SparseLaplacian,
    cm: &CouplingMatrices,
    mode: JacobianMode,
) -> Result<NetOperator> {
    let n = state.p.values().len();
    for len in [state.z.values().len(), params.k.values().len(), params.m.values().len()] {
        if len != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                found: len,
            });
        }
    }
    let (p, z) = (state.p.values(), state.z.values());
    let (k, m) = (params.k.values(), params.m.values());
    let mut blocks = Vec::with_capacity(2 * n);
    for q in 0..n {
        blocks.push(reaction_jacobian(p[q], z[q], k[q], m[q], params.h, mode)?);
    }
    blocks.extend_from_within(..);
    NetOperator::new(blocks, l1.clone(), l2.clone(), *cm)
}
