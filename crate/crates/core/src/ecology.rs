//! Phytoplankton–zooplankton reaction–diffusion drive system.
//!
//! ```text
//! P_t = ΔP + P(1 - P) - P Z / (P + h)
//! Z_t = ΔZ + k P Z / (P + h) - m Z
//! ```
//!
//! with zero-flux boundaries, forward Euler in time and the five-point
//! stencil in space. `k` and `m` may vary over the domain.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::field::{laplacian_into, Field, GridSpec};
use crate::seed::rng_from_seed;

/// Any state magnitude above this is treated as an explicit-scheme blow-up.
pub const BLOW_UP_THRESHOLD: f64 = 1e6;

pub const DEFAULT_K: f64 = 2.0;
pub const DEFAULT_M: f64 = 0.6;
pub const DEFAULT_H: f64 = 0.4;

/// Spatially varying drive parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveParams {
    /// Zooplankton growth efficiency.
    pub k: Field,
    /// Zooplankton mortality.
    pub m: Field,
    /// Half-saturation constant of the Holling type II response.
    pub h: f64,
}

impl DriveParams {
    pub fn new(k: Field, m: Field, h: f64) -> Result<Self> {
        k.check_shape(&m)?;
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidArgument(format!("h must be > 0, got {h}")));
        }
        Ok(Self { k, m, h })
    }

    /// Homogeneous parameters.
    pub fn constant(grid: GridSpec, k: f64, m: f64, h: f64) -> Self {
        Self {
            k: Field::constant(grid, k),
            m: Field::constant(grid, m),
            h,
        }
    }

    /// `k = 2`, `m = 0.6`, `h = 0.4` everywhere.
    pub fn defaults(grid: GridSpec) -> Self {
        Self::constant(grid, DEFAULT_K, DEFAULT_M, DEFAULT_H)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.k.values().iter().chain(self.m.values()).all(|&v| v >= 0.0)
    }
}

/// Drive state at model time `t`.
#[derive(Clone, Debug, PartialEq)]
pub struct DriveState {
    pub p: Field,
    pub z: Field,
    pub t: f64,
}

/// Homogeneous coexistence equilibrium `(P*, Z*)` of the reaction terms.
///
/// `P* = m h / (k - m)`, `Z* = (1 - P*)(P* + h)`.
pub fn coexistence_state(k: f64, m: f64, h: f64) -> (f64, f64) {
    let p = m * h / (k - m);
    (p, (1.0 - p) * (p + h))
}

/// Reaction terms of the drive at one cell.
#[inline]
pub fn reaction(p: f64, z: f64, k: f64, m: f64, h: f64) -> (f64, f64) {
    let graze = p * z / (p + h);
    (p * (1.0 - p) - graze, k * graze - m * z)
}

/// One forward-Euler step of the drive.
pub fn drive_step(s: &DriveState, params: &DriveParams, g: &GridSpec) -> Result<DriveState> {
    for f in [&s.p, &s.z, &params.k, &params.m] {
        if !f.grid().same_shape(g) {
            return Err(Error::ShapeMismatch {
                expected: g.len(),
                found: f.grid().len(),
            });
        }
    }
    let n = g.len();
    let (p, z) = (s.p.values(), s.z.values());
    let (k, m) = (params.k.values(), params.m.values());
    let h = params.h;
    let dt = g.dt;

    let mut lap_p = vec![0.0; n];
    let mut lap_z = vec![0.0; n];
    laplacian_into(p, g, &mut lap_p);
    laplacian_into(z, g, &mut lap_z);

    let mut np = vec![0.0; n];
    let mut nz = vec![0.0; n];
    for c in 0..n {
        let (fp, fz) = reaction(p[c], z[c], k[c], m[c], h);
        np[c] = p[c] + dt * (lap_p[c] + fp);
        nz[c] = z[c] + dt * (lap_z[c] + fz);
    }
    let t = s.t + dt;
    check_blow_up("P", &np, t)?;
    check_blow_up("Z", &nz, t)?;
    Ok(DriveState {
        p: Field::from_values(*g, np)?,
        z: Field::from_values(*g, nz)?,
        t,
    })
}

pub(crate) fn check_blow_up(quantity: &'static str, v: &[f64], t: f64) -> Result<()> {
    for &x in v {
        if !(x.abs() <= BLOW_UP_THRESHOLD) {
            return Err(Error::BlowUp {
                quantity,
                t,
                value: x,
                threshold: BLOW_UP_THRESHOLD,
            });
        }
    }
    Ok(())
}

/// Gaussian bump parameters.
///
/// Coordinates are cell indices; the bump is centred at `(ncenter/2,
/// mcenter/2)` in `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianSpec {
    pub a: f64,
    pub c: f64,
    pub mcenter: f64,
    pub ncenter: f64,
    pub sigma: f64,
}

impl Default for GaussianSpec {
    fn default() -> Self {
        Self {
            a: 2.0,
            c: 0.6,
            mcenter: 300.0,
            ncenter: 900.0,
            sigma: 400.0,
        }
    }
}

/// `k = a·G(x, y)`, `m = c·G(x, y)` with a shared isotropic Gaussian `G`.
pub fn gen_gaussian_params(g: &GridSpec, spec: &GaussianSpec, h: f64) -> Result<DriveParams> {
    if !(spec.sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma must be > 0, got {}", spec.sigma)));
    }
    let two_s2 = 2.0 * spec.sigma * spec.sigma;
    let (xc, yc) = (spec.ncenter / 2.0, spec.mcenter / 2.0);
    let shape = |i: usize, j: usize| {
        let dx = i as f64 - xc;
        let dy = j as f64 - yc;
        (-(dx * dx / two_s2 + dy * dy / two_s2)).exp()
    };
    let k = Field::from_fn(*g, |i, j| spec.a * shape(i, j));
    let m = Field::from_fn(*g, |i, j| spec.c * shape(i, j));
    DriveParams::new(k, m, h)
}

/// Sinusoidal parameters `k = a cos(bx + d) sin(by) + s`,
/// `m = c cos(bx + d) sin(by) + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinusoidalSpec {
    pub a: f64,
    /// Wavenumber; `None` means one full period over the grid height.
    pub b: Option<f64>,
    pub c: f64,
    pub d: f64,
    pub s: f64,
    pub t: f64,
}

impl Default for SinusoidalSpec {
    fn default() -> Self {
        Self {
            a: 0.2,
            b: None,
            c: 0.6,
            d: std::f64::consts::FRAC_PI_2,
            s: 0.5,
            t: 1.5,
        }
    }
}

impl SinusoidalSpec {
    /// `b = π / (ny / 2)` unless set explicitly.
    pub fn wavenumber(&self, g: &GridSpec) -> f64 {
        self.b.unwrap_or(std::f64::consts::PI / (g.ny as f64 / 2.0))
    }
}

pub fn gen_sinusoidal_params(g: &GridSpec, spec: &SinusoidalSpec, h: f64) -> Result<DriveParams> {
    let b = spec.wavenumber(g);
    let wave = |i: usize, j: usize| (b * i as f64 + spec.d).cos() * (b * j as f64).sin();
    let k = Field::from_fn(*g, |i, j| spec.a * wave(i, j) + spec.s);
    let m = Field::from_fn(*g, |i, j| spec.c * wave(i, j) + spec.t);
    DriveParams::new(k, m, h)
}

/// Result of an affine rescale.
#[derive(Clone, Debug, PartialEq)]
pub struct Rescaled {
    pub field: Field,
    /// The input was constant, so the output is the midpoint of the range.
    pub degenerate: bool,
}

/// Affinely map a drive snapshot onto `[lo, hi]` to serve as a swirly
/// parameter field.
pub fn gen_swirl_params(snapshot: &Field, lo: f64, hi: f64) -> Result<Rescaled> {
    if !(lo < hi) {
        return Err(Error::InvalidArgument(format!(
            "swirl range requires lo < hi, got [{lo}, {hi}]"
        )));
    }
    let (min, max) = (snapshot.min(), snapshot.max());
    if !(max > min) {
        log::warn!("swirl snapshot is constant; using the range midpoint");
        return Ok(Rescaled {
            field: Field::constant(*snapshot.grid(), 0.5 * (lo + hi)),
            degenerate: true,
        });
    }
    let scale = (hi - lo) / (max - min);
    let field = snapshot.map(|v| if v == max { hi } else { lo + (v - min) * scale });
    Ok(Rescaled {
        field,
        degenerate: false,
    })
}

/// Add `amplitude·(max f − min f)·η` with i.i.d. standard normal `η` drawn
/// from a generator seeded with `seed`.
pub fn add_field_noise(f: &Field, amplitude: f64, seed: u64) -> Result<Field> {
    let mut rng = rng_from_seed(seed);
    add_field_noise_with(f, amplitude, &mut rng)
}

/// Same as [`add_field_noise`] but drawing from a caller-owned generator.
pub fn add_field_noise_with<R: Rng + ?Sized>(f: &Field, amplitude: f64, rng: &mut R) -> Result<Field> {
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "noise amplitude must be >= 0, got {amplitude}"
        )));
    }
    if amplitude == 0.0 {
        return Ok(f.clone());
    }
    let scale = amplitude * (f.max() - f.min());
    let mut out = f.clone();
    for v in out.values_mut() {
        let eta: f64 = rng.sample(StandardNormal);
        *v += scale * eta;
    }
    Ok(out)
}

/// Initial-condition families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialKind {
    /// Coexistence state with a quadratic cross-gradient in `P` and a linear
    /// gradient in `Z`, each scaled to a peak magnitude of `eps`.
    Planar { eps: f64 },
    /// Coexistence state plus i.i.d. uniform noise in `[-eps, eps]`.
    SeededRandom { eps: f64, seed: u64 },
}

impl InitialKind {
    pub const DEFAULT_EPS: f64 = 1e-2;
}

/// Perturbed coexistence state for the default scalar parameters.
pub fn initial_conditions(g: &GridSpec, kind: InitialKind) -> DriveState {
    let (ps, zs) = coexistence_state(DEFAULT_K, DEFAULT_M, DEFAULT_H);
    let (p, z) = match kind {
        InitialKind::Planar { eps } => {
            let lx = g.nx as f64 * g.dx;
            let ly = g.ny as f64 * g.dx;
            let xy = |i: usize, j: usize| (i as f64 * g.dx, j as f64 * g.dx);
            let qp = Field::from_fn(*g, |i, j| {
                let (x, y) = xy(i, j);
                let u = x - 0.1 * y;
                (u - 0.25 * lx) * (u - 0.75 * lx)
            });
            let qz = Field::from_fn(*g, |i, j| {
                let (x, y) = xy(i, j);
                (x - 0.5 * lx) + 4.0 * (y - 0.5 * ly)
            });
            let np = qp.max_abs();
            let nz = qz.max_abs();
            let unit = |v: f64, n: f64| if n > 0.0 { v / n } else { 0.0 };
            (qp.map(|v| ps - eps * unit(v, np)), qz.map(|v| zs - eps * unit(v, nz)))
        }
        InitialKind::SeededRandom { eps, seed } => {
            let mut rng = rng_from_seed(seed);
            let p = Field::from_fn(*g, |_, _| ps + eps * rng.gen_range(-1.0..=1.0));
            let z = Field::from_fn(*g, |_, _| zs + eps * rng.gen_range(-1.0..=1.0));
            (p, z)
        }
    };
    DriveState { p, z, t: 0.0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(nx: usize, ny: usize) -> GridSpec {
        GridSpec::with_default_steps(nx, ny).unwrap()
    }

    #[test]
    fn extinction_is_fixed() {
        let g = grid(6, 5);
        let s = DriveState {
            p: Field::zeros(g),
            z: Field::zeros(g),
            t: 0.0,
        };
        let next = drive_step(&s, &DriveParams::defaults(g), &g).unwrap();
        assert!(next.p.values().iter().all(|&v| v == 0.0));
        assert!(next.z.values().iter().all(|&v| v == 0.0));
        assert!((next.t - 0.2).abs() < 1e-15);
    }

    #[test]
    fn coexistence_is_fixed() {
        let (ps, zs) = coexistence_state(2.0, 0.6, 0.4);
        assert!((ps - 0.171_428_571_428_571_4).abs() < 1e-15);
        assert!((zs - 0.473_469_387_755_102).abs() < 1e-14);
        let g = grid(8, 8);
        let mut s = DriveState {
            p: Field::constant(g, ps),
            z: Field::constant(g, zs),
            t: 0.0,
        };
        let params = DriveParams::defaults(g);
        for _ in 0..50 {
            let next = drive_step(&s, &params, &g).unwrap();
            assert!(next.p.max_abs_diff(&s.p) <= 1e-14);
            assert!(next.z.max_abs_diff(&s.z) <= 1e-14);
            s = next;
        }
    }

    #[test]
    fn logistic_only_step() {
        let g = grid(4, 4);
        let s = DriveState {
            p: Field::constant(g, 0.5),
            z: Field::zeros(g),
            t: 0.0,
        };
        let next = drive_step(&s, &DriveParams::defaults(g), &g).unwrap();
        for &v in next.p.values() {
            assert!((v - 0.55).abs() < 1e-15);
        }
    }

    #[test]
    fn blow_up_is_reported() {
        let g = grid(3, 3);
        let s = DriveState {
            p: Field::constant(g, 1e7),
            z: Field::zeros(g),
            t: 0.0,
        };
        let err = drive_step(&s, &DriveParams::defaults(g), &g).unwrap_err();
        assert!(matches!(err, Error::BlowUp { quantity: "P", .. }));
    }

    #[test]
    fn gaussian_center_and_ratio() {
        let g = grid(1000, 320);
        let p = gen_gaussian_params(&g, &GaussianSpec::default(), 0.4).unwrap();
        assert!((p.k.get(450, 150) - 2.0).abs() < 1e-15);
        assert!((p.m.get(450, 150) - 0.6).abs() < 1e-15);
        for (k, m) in p.k.values().iter().zip(p.m.values()).step_by(97) {
            assert!((k / m - 2.0 / 0.6).abs() < 1e-12);
        }
        assert!(p.is_nonnegative());
        let bad = GaussianSpec {
            sigma: 0.0,
            ..Default::default()
        };
        assert!(gen_gaussian_params(&g, &bad, 0.4).is_err());
    }

    #[test]
    fn sinusoidal_ranges_by_scan() {
        // ny = 64 → b = 2π/64; peaks of sin(by) at y = 16, 48 and of
        // cos(bx + π/2) = -sin(bx) at x = 16, 48, so the extremes are hit.
        let g = grid(128, 64);
        let p = gen_sinusoidal_params(&g, &SinusoidalSpec::default(), 0.4).unwrap();
        let (kmin, kmax) = (p.k.min(), p.k.max());
        let (mmin, mmax) = (p.m.min(), p.m.max());
        assert!((kmin - 0.3).abs() < 1e-12 && (kmax - 0.7).abs() < 1e-12);
        assert!((mmin - 0.9).abs() < 1e-12 && (mmax - 2.1).abs() < 1e-12);
        for i in 0..g.nx {
            assert_eq!(p.k.get(i, 0), 0.5);
        }
        assert!(p.is_nonnegative());
    }

    #[test]
    fn swirl_rescale() {
        let g = grid(5, 4);
        let snap = Field::from_fn(g, |i, j| ((i * 7 + j * 3) % 11) as f64 * 0.37 - 1.0);
        let r = gen_swirl_params(&snap, 1.8, 2.4).unwrap();
        assert!(!r.degenerate);
        assert!((r.field.min() - 1.8).abs() <= 1e-12);
        assert!((r.field.max() - 2.4).abs() <= 1e-12);

        let flat = gen_swirl_params(&Field::constant(g, 3.0), 1.0, 2.0).unwrap();
        assert!(flat.degenerate);
        assert!(flat.field.values().iter().all(|&v| v == 1.5));
        assert!(gen_swirl_params(&snap, 2.0, 1.0).is_err());
    }

    #[test]
    fn noise_zero_and_determinism() {
        let g = grid(16, 8);
        let f = Field::from_fn(g, |i, j| (i + j) as f64);
        assert_eq!(add_field_noise(&f, 0.0, 3).unwrap(), f);
        let a = add_field_noise(&f, 0.1, 3).unwrap();
        let b = add_field_noise(&f, 0.1, 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, add_field_noise(&f, 0.1, 4).unwrap());
        assert!(add_field_noise(&f, -0.1, 3).is_err());
    }

    #[test]
    fn noise_is_centered() {
        let g = GridSpec::new(400, 250, 1.0, 0.1).unwrap();
        let f = Field::from_fn(g, |i, _| if i == 0 { 1.0 } else { 0.0 });
        let amp = 0.5;
        let out = add_field_noise(&f, amp, 11).unwrap();
        let n = g.len() as f64;
        let diff: Vec<f64> = out.values().iter().zip(f.values()).map(|(a, b)| a - b).collect();
        let mean = diff.iter().sum::<f64>() / n;
        let sd = amp * 1.0;
        assert!(mean.abs() <= 3.0 * sd / n.sqrt(), "mean {mean}");
        let var = diff.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var.sqrt() - sd).abs() < 0.01 * sd);
    }

    #[test]
    fn initial_conditions_families() {
        let g = grid(32, 16);
        let (ps, zs) = coexistence_state(DEFAULT_K, DEFAULT_M, DEFAULT_H);
        for kind in [
            InitialKind::Planar { eps: 0.0 },
            InitialKind::SeededRandom { eps: 0.0, seed: 9 },
        ] {
            let s = initial_conditions(&g, kind);
            assert!(s.p.values().iter().all(|&v| v == ps));
            assert!(s.z.values().iter().all(|&v| v == zs));
        }
        let eps = 1e-2;
        for kind in [InitialKind::Planar { eps }, InitialKind::SeededRandom { eps, seed: 9 }] {
            let s = initial_conditions(&g, kind);
            assert!((s.p.mean() - ps).abs() <= eps);
            assert!(s.p.values().iter().all(|&v| (v - ps).abs() <= eps + 1e-15));
            assert!(s.z.values().iter().all(|&v| (v - zs).abs() <= eps + 1e-15));
        }
        let a = initial_conditions(&g, InitialKind::SeededRandom { eps, seed: 5 });
        let b = initial_conditions(&g, InitialKind::SeededRandom { eps, seed: 5 });
        assert_eq!(a, b);
    }
}
