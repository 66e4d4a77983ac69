//! Response systems that synchronize to observations of `P` and estimate the
//! hidden species `Z` together with the spatial parameters `k`, `m`.
//!
//! All four variants share one Euler kernel. They differ only in what drives
//! the `P̂` coupling, which field sits in the `Ẑ` grazing denominator, and
//! which error (if any) feeds the parameter updates.

use crate::ecology::{check_blow_up, DEFAULT_H};
use crate::error::{Error, Result};
use crate::field::{clamp, laplacian_into, Field, GridSpec};
use crate::occlusion::CloudMask;
use crate::sensing::{innovation, local_averages, InnovationNorm, SensorLayout, SensorValues};

pub const STATE_MIN: f64 = 0.0;
pub const STATE_MAX: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Full observation, direct replacement in the `Ẑ` denominator.
    Full,
    /// State synchronization under clouds with known parameters.
    OccludedSync,
    /// State and parameter estimation under clouds.
    OccludedAutosync,
    /// Estimation from coarse sensor averages.
    Coarse,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Full,
        Variant::OccludedSync,
        Variant::OccludedAutosync,
        Variant::Coarse,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::OccludedSync => "occluded-sync",
            Variant::OccludedAutosync => "occluded-autosync",
            Variant::Coarse => "coarse",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s)
    }

    /// Whether `k̂`, `m̂` evolve.
    pub fn adapts(self) -> bool {
        !matches!(self, Variant::OccludedSync)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Gains and switches for one response system.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObserverConfig {
    pub variant: Variant,
    /// Coupling gain on the `P̂` equation.
    pub kappa: f64,
    /// Shared adaptation gain of the full variant.
    pub s: f64,
    /// `k̂` adaptation gain of the other adaptive variants.
    pub s1: f64,
    /// `m̂` adaptation gain of the other adaptive variants.
    pub s2: f64,
    /// Half-saturation constant, assumed known.
    pub h: f64,
    /// Add `Δk̂`, `Δm̂` to the parameter updates.
    pub param_diffusion: bool,
    /// Multiplies the `k̂` adaptation term (±1).
    pub k_sign: f64,
    /// Multiplies the `m̂` adaptation term (±1).
    pub m_sign: f64,
    pub clamp_lo: f64,
    pub clamp_hi: f64,
    pub innovation_norm: InnovationNorm,
}

impl ObserverConfig {
    /// Defaults for `variant`: its standard gains and the sign of
    /// each variant's update law.
    pub fn for_variant(variant: Variant) -> Self {
        let base = Self {
            variant,
            kappa: 2.4,
            s: 30.0,
            s1: 0.2,
            s2: 0.6,
            h: DEFAULT_H,
            param_diffusion: false,
            k_sign: 1.0,
            m_sign: 1.0,
            clamp_lo: STATE_MIN,
            clamp_hi: STATE_MAX,
            innovation_norm: InnovationNorm::PatchCells,
        };
        match variant {
            Variant::Full => Self {
                k_sign: -1.0,
                m_sign: -1.0,
                ..base
            },
            Variant::OccludedSync => Self { kappa: 2.6, ..base },
            Variant::OccludedAutosync => Self { kappa: 0.625, ..base },
            Variant::Coarse => Self {
                kappa: 0.625,
                param_diffusion: true,
                ..base
            },
        }
    }

    /// `(k gain, m gain)` after signs.
    pub fn adaptation_gains(&self) -> (f64, f64) {
        let (gk, gm) = match self.variant {
            Variant::Full => (self.s, self.s),
            Variant::OccludedSync => (0.0, 0.0),
            _ => (self.s1, self.s2),
        };
        (self.k_sign * gk, self.m_sign * gm)
    }

    pub fn validate(&self) -> Result<()> {
        let gains = [
            ("kappa", self.kappa),
            ("s", self.s),
            ("s1", self.s1),
            ("s2", self.s2),
            ("k_sign", self.k_sign),
            ("m_sign", self.m_sign),
        ];
        for (name, v) in gains {
            if !v.is_finite() {
                return Err(Error::InvalidArgument(format!("{name} must be finite, got {v}")));
            }
        }
        if !(self.h.is_finite() && self.h > 0.0) {
            return Err(Error::InvalidArgument(format!("h must be > 0, got {}", self.h)));
        }
        if !(self.clamp_lo < self.clamp_hi) {
            return Err(Error::InvalidArgument(format!(
                "clamp bounds must satisfy lo < hi, got [{}, {}]",
                self.clamp_lo, self.clamp_hi
            )));
        }
        Ok(())
    }

    fn expect(&self, v: Variant) -> Result<()> {
        if self.variant == v {
            self.validate()
        } else {
            Err(Error::InvalidArgument(format!(
                "step for {v} called with a {} configuration",
                self.variant
            )))
        }
    }
}

/// Response state and parameter estimates.
#[derive(Clone, Debug, PartialEq)]
pub struct ObserverState {
    pub phat: Field,
    pub zhat: Field,
    pub khat: Field,
    pub mhat: Field,
    pub t: f64,
}

impl ObserverState {
    /// Homogeneous start, e.g. `P̂ = Ẑ = 2`, `k̂ = m̂ = 5`.
    pub fn uniform(grid: GridSpec, p: f64, z: f64, k: f64, m: f64) -> Self {
        Self {
            phat: Field::constant(grid, p),
            zhat: Field::constant(grid, z),
            khat: Field::constant(grid, k),
            mhat: Field::constant(grid, m),
            t: 0.0,
        }
    }

    fn check(&self, g: &GridSpec) -> Result<()> {
        for f in [&self.phat, &self.zhat, &self.khat, &self.mhat] {
            check_grid(f, g)?;
        }
        Ok(())
    }
}

fn check_grid(f: &Field, g: &GridSpec) -> Result<()> {
    if f.grid().same_shape(g) {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            expected: g.len(),
            found: f.grid().len(),
        })
    }
}

fn check_mask(mask: &CloudMask, g: &GridSpec) -> Result<()> {
    if mask.grid().same_shape(g) {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            expected: g.len(),
            found: mask.grid().len(),
        })
    }
}

/// Observation where visible, the estimate itself under cloud.
pub fn switch_h(p_obs: &Field, mask: &CloudMask, phat: &Field) -> Result<Field> {
    p_obs.check_shape(phat)?;
    check_mask(mask, p_obs.grid())?;
    let values = p_obs
        .values()
        .iter()
        .zip(phat.values())
        .zip(mask.cells())
        .map(|((&p, &ph), &hidden)| if hidden { ph } else { p })
        .collect();
    Field::from_values(*p_obs.grid(), values)
}

/// Per-cell inputs to the shared kernel.
struct Drive<'a> {
    /// Added to `dP̂/dt`.
    coupling: &'a [f64],
    /// Denominator field of the `Ẑ` grazing term.
    denom: &'a [f64],
    /// Error driving the parameter laws; `None` freezes `k̂`, `m̂`.
    adapt: Option<&'a [f64]>,
}

fn kernel(o: &ObserverState, d: Drive<'_>, cfg: &ObserverConfig, g: &GridSpec) -> Result<ObserverState> {
    let n = g.len();
    let (ph, zh) = (o.phat.values(), o.zhat.values());
    let (kh, mh) = (o.khat.values(), o.mhat.values());
    let (h, dt) = (cfg.h, g.dt);

    let mut lap_p = vec![0.0; n];
    let mut lap_z = vec![0.0; n];
    laplacian_into(ph, g, &mut lap_p);
    laplacian_into(zh, g, &mut lap_z);

    let mut np = vec![0.0; n];
    let mut nz = vec![0.0; n];
    for c in 0..n {
        let (p, z) = (ph[c], zh[c]);
        let dp = lap_p[c] + p * (1.0 - p) - p * z / (p + h) + d.coupling[c];
        let dz = lap_z[c] + kh[c] * p * z / (d.denom[c] + h) - mh[c] * z;
        np[c] = p + dt * dp;
        nz[c] = z + dt * dz;
    }
    let t = o.t + dt;
    check_blow_up("P_hat", &np, t)?;
    check_blow_up("Z_hat", &nz, t)?;
    for v in np.iter_mut().chain(nz.iter_mut()) {
        *v = clamp(*v, cfg.clamp_lo, cfg.clamp_hi);
    }

    let (nk, nm) = match d.adapt {
        None => (o.khat.clone(), o.mhat.clone()),
        Some(err) => {
            let (gk, gm) = cfg.adaptation_gains();
            let mut nk = vec![0.0; n];
            let mut nm = vec![0.0; n];
            if cfg.param_diffusion {
                laplacian_into(kh, g, &mut nk);
                laplacian_into(mh, g, &mut nm);
            }
            for c in 0..n {
                let e = err[c];
                nk[c] = (kh[c] + dt * (nk[c] + gk * e)).max(0.0);
                nm[c] = (mh[c] + dt * (nm[c] + gm * e * ph[c])).max(0.0);
            }
            check_blow_up("k_hat", &nk, t)?;
            check_blow_up("m_hat", &nm, t)?;
            (Field::from_values(*g, nk)?, Field::from_values(*g, nm)?)
        }
    };

    Ok(ObserverState {
        phat: Field::from_values(*g, np)?,
        zhat: Field::from_values(*g, nz)?,
        khat: nk,
        mhat: nm,
        t,
    })
}

/// Fully observed response with adaptive parameters.
pub fn response_step_full(
    o: &ObserverState,
    p_obs: &Field,
    cfg: &ObserverConfig,
    g: &GridSpec,
) -> Result<ObserverState> {
    cfg.expect(Variant::Full)?;
    o.check(g)?;
    check_grid(p_obs, g)?;
    let err: Vec<f64> = p_obs
        .values()
        .iter()
        .zip(o.phat.values())
        .map(|(p, ph)| p - ph)
        .collect();
    let coupling: Vec<f64> = err.iter().map(|e| cfg.kappa * e).collect();
    kernel(
        o,
        Drive {
            coupling: &coupling,
            denom: p_obs.values(),
            adapt: Some(&err),
        },
        cfg,
        g,
    )
}

/// Occluded state synchronization; `k̂`, `m̂` are held at the supplied values.
pub fn response_step_occluded(
    o: &ObserverState,
    p_obs: &Field,
    mask: &CloudMask,
    cfg: &ObserverConfig,
    g: &GridSpec,
) -> Result<ObserverState> {
    cfg.expect(Variant::OccludedSync)?;
    o.check(g)?;
    check_grid(p_obs, g)?;
    let hp = switch_h(p_obs, mask, &o.phat)?;
    let coupling: Vec<f64> = hp
        .values()
        .iter()
        .zip(o.phat.values())
        .map(|(a, b)| cfg.kappa * (a - b))
        .collect();
    kernel(
        o,
        Drive {
            coupling: &coupling,
            denom: o.phat.values(),
            adapt: None,
        },
        cfg,
        g,
    )
}

/// Occluded state and parameter estimation.
pub fn response_step_autosync(
    o: &ObserverState,
    p_obs: &Field,
    mask: &CloudMask,
    cfg: &ObserverConfig,
    g: &GridSpec,
) -> Result<ObserverState> {
    cfg.expect(Variant::OccludedAutosync)?;
    o.check(g)?;
    check_grid(p_obs, g)?;
    let hp = switch_h(p_obs, mask, &o.phat)?;
    let err: Vec<f64> = hp.values().iter().zip(o.phat.values()).map(|(a, b)| a - b).collect();
    let coupling: Vec<f64> = err.iter().map(|e| cfg.kappa * e).collect();
    kernel(
        o,
        Drive {
            coupling: &coupling,
            denom: hp.values(),
            adapt: Some(&err),
        },
        cfg,
        g,
    )
}

/// What the coarse observer sees in one step.
#[derive(Clone, Debug, PartialEq)]
pub struct CoarseInputs {
    /// Sensor averages spread over each active sensor, `P̂` elsewhere.
    pub ptilde: Field,
    /// Innovation per sensor, zero for inactive sensors.
    pub innovations: SensorValues,
    /// Sensors with no occluded cell.
    pub active: Vec<bool>,
}

/// Sample `p_obs` through the sensors. A sensor touching any occluded cell
/// reports nothing.
pub fn coarse_inputs(
    p_obs: &Field,
    phat: &Field,
    mask: &CloudMask,
    layout: &SensorLayout,
    norm: InnovationNorm,
) -> Result<CoarseInputs> {
    check_mask(mask, layout.grid())?;
    let avg = local_averages(p_obs, layout)?;
    let mut innov = innovation(p_obs, phat, layout, norm)?;
    let hidden = mask.cells();
    let active: Vec<bool> = (0..layout.len()).map(|s| layout.cells(s).all(|c| !hidden[c])).collect();
    for (v, &on) in innov.0.iter_mut().zip(&active) {
        if !on {
            *v = 0.0;
        }
    }
    let mut ptilde = phat.clone();
    let pt = ptilde.values_mut();
    for s in 0..layout.len() {
        if active[s] {
            for c in layout.cells(s) {
                pt[c] = avg.0[s];
            }
        }
    }
    Ok(CoarseInputs {
        ptilde,
        innovations: innov,
        active,
    })
}

/// Coarse-sensor response with adaptive, optionally diffusing parameters.
pub fn response_step_coarse(
    o: &ObserverState,
    inputs: &CoarseInputs,
    layout: &SensorLayout,
    cfg: &ObserverConfig,
    g: &GridSpec,
) -> Result<ObserverState> {
    cfg.expect(Variant::Coarse)?;
    o.check(g)?;
    check_grid(&inputs.ptilde, g)?;
    if !layout.grid().same_shape(g) || inputs.innovations.len() != layout.len() {
        return Err(Error::ShapeMismatch {
            expected: layout.len(),
            found: inputs.innovations.len(),
        });
    }
    let mut coupling = vec![0.0; g.len()];
    for (c, slot) in coupling.iter_mut().enumerate() {
        if let Some(s) = layout.owner(c) {
            *slot = cfg.kappa * inputs.innovations.0[s];
        }
    }
    let err: Vec<f64> = inputs
        .ptilde
        .values()
        .iter()
        .zip(o.phat.values())
        .map(|(a, b)| a - b)
        .collect();
    kernel(
        o,
        Drive {
            coupling: &coupling,
            denom: inputs.ptilde.values(),
            adapt: Some(&err),
        },
        cfg,
        g,
    )
}

/// Everything a step may need; unused parts are ignored by the variant.
pub struct Observation<'a> {
    pub p_obs: &'a Field,
    pub mask: &'a CloudMask,
    pub sensors: Option<&'a SensorLayout>,
}

/// Dispatch on `cfg.variant`. The full variant ignores the mask.
pub fn response_step(
    o: &ObserverState,
    obs: &Observation<'_>,
    cfg: &ObserverConfig,
    g: &GridSpec,
) -> Result<ObserverState> {
    match cfg.variant {
        Variant::Full => response_step_full(o, obs.p_obs, cfg, g),
        Variant::OccludedSync => response_step_occluded(o, obs.p_obs, obs.mask, cfg, g),
        Variant::OccludedAutosync => response_step_autosync(o, obs.p_obs, obs.mask, cfg, g),
        Variant::Coarse => {
            let layout = obs
                .sensors
                .ok_or_else(|| Error::InvalidArgument("coarse variant needs a sensor layout".into()))?;
            let inputs = coarse_inputs(obs.p_obs, &o.phat, obs.mask, layout, cfg.innovation_norm)?;
            response_step_coarse(o, &inputs, layout, cfg, g)
        }
    }
}
