use rand::Rng;

use super::operator::LinearOperator;
use crate::error::{Error, Result};
use crate::seed::rng_from_seed;

/// Orthonormal basis `W` of the complement of the all-ones direction in
/// `R^n`, kept implicit as the last `n − 1` columns of the Householder
/// reflector that swaps `e1` and `1/√n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransverseBasis {
    n: usize,
}

impl TransverseBasis {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("basis dimension must be positive".into()));
        }
        Ok(Self { n })
    }

    /// Ambient dimension `n`; `W` is `n × (n − 1)`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// `H x` with `H = I − 2 v vᵀ / vᵀv`, `v = e1 − 1/√n`.
    fn reflect(&self, x: &mut [f64]) {
        let n = self.n as f64;
        let u = 1.0 / n.sqrt();
        // v = (1 − u, −u, …, −u), vᵀv = 2 − 2u.
        let vv = 2.0 - 2.0 * u;
        if vv <= 0.0 {
            return;
        }
        let vx = x[0] - u * x.iter().sum::<f64>();
        let f = 2.0 * vx / vv;
        x[0] -= f * (1.0 - u);
        for xi in &mut x[1..] {
            *xi += f * u;
        }
    }

    /// `W ζ` for `ζ ∈ R^{n−1}`.
    pub fn lift(&self, zeta: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.n);
        x.push(0.0);
        x.extend_from_slice(zeta);
        self.reflect(&mut x);
        x
    }

    /// `Wᵀ x`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        self.reflect(&mut y);
        y.remove(0);
        y
    }

    /// Component along the normalized all-ones direction.
    pub fn synchronous(&self, x: &[f64]) -> f64 {
        x.iter().sum::<f64>() / (self.n as f64).sqrt()
    }

    /// `Wᵀ ⊗ I2` on an interleaved two-species vector of length `2n`.
    pub fn project_pairs(&self, x: &[f64]) -> Vec<f64> {
        let a: Vec<f64> = x.iter().step_by(2).copied().collect();
        let b: Vec<f64> = x.iter().skip(1).step_by(2).copied().collect();
        let (pa, pb) = (self.project(&a), self.project(&b));
        pa.into_iter().zip(pb).flat_map(|(u, v)| [u, v]).collect()
    }

    /// Explicit `n × (n − 1)` matrix, row-major.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut w = vec![vec![0.0; self.n - 1]; self.n];
        let mut e = vec![0.0; self.n - 1];
        for c in 0..self.n - 1 {
            e[c] = 1.0;
            for (r, v) in self.lift(&e).into_iter().enumerate() {
                w[r][c] = v;
            }
            e[c] = 0.0;
        }
        w
    }
}

/// Settings for [`transverse_stability`].
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityOptions {
    /// Number of integration steps; at least [`StabilityOptions::MIN_HORIZON`].
    pub horizon: usize,
    pub dt: f64,
    pub renorm_every: usize,
    /// Start with the drive half of the perturbation at zero. The drive rows
    /// never see the response, so this subspace is invariant and measures
    /// response error growth only.
    pub response_only: bool,
    pub seed: u64,
}

impl StabilityOptions {
    pub const MIN_HORIZON: usize = 100;

    pub fn new(horizon: usize, dt: f64) -> Self {
        Self {
            horizon,
            dt,
            renorm_every: 10,
            response_only: true,
            seed: 0x5eed,
        }
    }
}

fn rk4_step(op: &dyn LinearOperator, x: &mut [f64], dt: f64, buf: &mut [Vec<f64>; 4], tmp: &mut [f64]) {
    let n = x.len();
    op.apply(x, &mut buf[0]);
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * dt * buf[0][i];
    }
    op.apply(tmp, &mut buf[1]);
    for i in 0..n {
        tmp[i] = x[i] + 0.5 * dt * buf[1][i];
    }
    op.apply(tmp, &mut buf[2]);
    for i in 0..n {
        tmp[i] = x[i] + dt * buf[2][i];
    }
    op.apply(tmp, &mut buf[3]);
    for i in 0..n {
        x[i] += dt / 6.0 * (buf[0][i] + 2.0 * buf[1][i] + 2.0 * buf[2][i] + buf[3][i]);
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Leading growth rate of the transverse perturbation `ζ = (Wᵀ ⊗ I2) δu`
/// under `dδu/dt = A(t) δu`.
///
/// `op_at(step)` supplies the operator held fixed over step `step`; each
/// step is one classical Runge–Kutta step. `‖ζ‖` is renormalized to one
/// every `renorm_every` steps and the logarithmic growth is averaged over
/// the horizon.
pub fn transverse_stability<O, F>(mut op_at: F, basis: &TransverseBasis, opts: &StabilityOptions) -> Result<f64>
where
    O: LinearOperator,
    F: FnMut(usize) -> Result<O>,
{
    if opts.horizon < StabilityOptions::MIN_HORIZON {
        return Err(Error::HorizonTooShort(opts.horizon, StabilityOptions::MIN_HORIZON));
    }
    if !(opts.dt.is_finite() && opts.dt > 0.0) || opts.renorm_every == 0 {
        return Err(Error::InvalidArgument("dt must be > 0 and renorm_every ≥ 1".into()));
    }
    let dim = 2 * basis.n();
    let mut rng = rng_from_seed(opts.seed);
    let mut x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    if opts.response_only {
        if basis.n() % 2 != 0 {
            return Err(Error::InvalidArgument("response_only needs an even node count".into()));
        }
        x[..basis.n()].fill(0.0);
    }
    let z0 = norm(&basis.project_pairs(&x));
    if z0 == 0.0 {
        return Err(Error::InvalidArgument(
            "initial perturbation has no transverse part".into(),
        ));
    }
    x.iter_mut().for_each(|v| *v /= z0);

    let mut buf = [vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]];
    let mut tmp = vec![0.0; dim];
    let mut log_growth = 0.0;
    for step in 0..opts.horizon {
        let op = op_at(step)?;
        if op.dim() != dim {
            return Err(Error::ShapeMismatch {
                expected: dim,
                found: op.dim(),
            });
        }
        rk4_step(&op, &mut x, opts.dt, &mut buf, &mut tmp);
        if (step + 1) % opts.renorm_every == 0 || step + 1 == opts.horizon {
            let z = norm(&basis.project_pairs(&x));
            if !(z.is_finite() && z > 0.0) {
                return Err(Error::InvalidArgument(format!("transverse norm degenerated to {z}")));
            }
            log_growth += z.ln();
            x.iter_mut().for_each(|v| *v /= z);
        }
    }
    Ok(log_growth / (opts.horizon as f64 * opts.dt))
}
