//! Co-evolution of drive, clouds and observer, and sweeps over one setting.

use std::borrow::Cow;
use std::path::Path;

use crate::config::{ObserverStart, ParamSource, ScenarioConfig};
use crate::ecology::{
    add_field_noise, add_field_noise_with, drive_step, gen_gaussian_params, gen_sinusoidal_params, gen_swirl_params,
    initial_conditions, DriveParams, DriveState, DEFAULT_K, DEFAULT_M,
};
use crate::error::{Error, Result};
use crate::field::{Field, GridSpec};
use crate::io::{read_snapshot_on, write_snapshot};
use crate::metrics::{relative_error, ErrorSample, ErrorSeries};
use crate::observer::{response_step, Observation, ObserverState, Variant};
use crate::occlusion::{advect_mask, coverage, gen_clouds, CloudMask};
use crate::seed::{derive_seed, rng_from_seed, Stream};
use crate::sensing::SensorLayout;

/// Parameter fields of a scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedParams {
    /// What the drive uses.
    pub params: DriveParams,
    /// Before parameter noise.
    pub clean: DriveParams,
}

fn swirl_snapshot(cfg: &ScenarioConfig, g: &GridSpec) -> Result<Field> {
    let base = DriveParams::constant(*g, DEFAULT_K, DEFAULT_M, cfg.h);
    let mut s = initial_conditions(g, cfg.initial_kind());
    let steps = (cfg.swirl_time / g.dt).round() as usize;
    for _ in 0..steps {
        s = drive_step(&s, &base, g)?;
    }
    Ok(s.p)
}

/// Build `k` and `m` from their configured sources, then add parameter noise.
pub fn build_params(cfg: &ScenarioConfig, g: &GridSpec) -> Result<GeneratedParams> {
    let needs_swirl = cfg.k_source == ParamSource::Swirl || cfg.m_source == ParamSource::Swirl;
    let snapshot = if needs_swirl {
        Some(swirl_snapshot(cfg, g)?)
    } else {
        None
    };
    let gaussian = || gen_gaussian_params(g, &cfg.gaussian, cfg.h);
    let sinusoidal = || gen_sinusoidal_params(g, &cfg.sinusoidal, cfg.h);

    let pick = |src: ParamSource, is_k: bool| -> Result<Field> {
        let choose = |p: DriveParams| if is_k { p.k } else { p.m };
        Ok(match src {
            ParamSource::Constant => Field::constant(*g, if is_k { cfg.k_value } else { cfg.m_value }),
            ParamSource::Gaussian => choose(gaussian()?),
            ParamSource::Sinusoidal => choose(sinusoidal()?),
            ParamSource::Swirl => {
                let (lo, hi) = if is_k { cfg.swirl_k } else { cfg.swirl_m };
                let snap = snapshot.as_ref().expect("swirl snapshot computed above");
                gen_swirl_params(snap, lo, hi)?.field
            }
            ParamSource::File => {
                let path = if is_k { &cfg.k_file } else { &cfg.m_file };
                let path = path.as_ref().ok_or_else(|| Error::ConfigValue {
                    key: if is_k { "k_file" } else { "m_file" }.into(),
                    message: "missing".into(),
                })?;
                read_snapshot_on(path, g)?
            }
        })
    };
    let clean = DriveParams::new(pick(cfg.k_source, true)?, pick(cfg.m_source, false)?, cfg.h)?;
    if !clean.is_nonnegative() {
        return Err(Error::ConfigValue {
            key: "k_source/m_source".into(),
            message: "generated parameters contain negative values".into(),
        });
    }
    let params = if cfg.param_noise > 0.0 {
        let floor = |f: Field| f.map(|v| v.max(0.0));
        let k = floor(add_field_noise(
            &clean.k,
            cfg.param_noise,
            derive_seed(cfg.seed, Stream::ParamNoiseK),
        )?);
        let m = floor(add_field_noise(
            &clean.m,
            cfg.param_noise,
            derive_seed(cfg.seed, Stream::ParamNoiseM),
        )?);
        DriveParams::new(k, m, cfg.h)?
    } else {
        clean.clone()
    };
    Ok(GeneratedParams { params, clean })
}

/// Cloud field at observation start.
pub fn build_clouds(cfg: &ScenarioConfig, g: &GridSpec) -> Result<CloudMask> {
    let mask = if cfg.cloud_coverage > 0.0 {
        gen_clouds(
            g,
            cfg.cloud_count,
            cfg.cloud_coverage,
            derive_seed(cfg.seed, Stream::Clouds),
        )?
    } else {
        CloudMask::clear(*g)
    };
    Ok(mask.with_speed(cfg.cloud_speed).with_sentinel(cfg.sentinel))
}

/// Final state of a scenario run.
#[derive(Clone, Debug)]
pub struct ScenarioOutcome {
    pub series: ErrorSeries,
    pub drive: DriveState,
    pub observer: ObserverState,
    pub params: GeneratedParams,
    pub mask: CloudMask,
    /// Covered fraction of the generated clouds.
    pub coverage: f64,
}

impl ScenarioOutcome {
    pub fn terminal(&self) -> ErrorSample {
        self.series.last().expect("series always holds the initial sample")
    }
}

fn sample(cfg: &ScenarioConfig, drive: &DriveState, obs: &ObserverState, gp: &GeneratedParams) -> Result<ErrorSample> {
    let e = |a: &Field, b: &Field| relative_error(a, b, cfg.error_formula);
    Ok(ErrorSample {
        t: drive.t,
        p: e(&drive.p, &obs.phat)?,
        z: e(&drive.z, &obs.zhat)?,
        k: e(&gp.params.k, &obs.khat)?,
        m: e(&gp.params.m, &obs.mhat)?,
        k_clean: e(&gp.clean.k, &obs.khat)?,
        m_clean: e(&gp.clean.m, &obs.mhat)?,
    })
}

fn dump_diagnostics(dir: &Path, drive: &DriveState, obs: &ObserverState) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [
        ("blowup_p.ordf", &drive.p),
        ("blowup_z.ordf", &drive.z),
        ("blowup_phat.ordf", &obs.phat),
        ("blowup_zhat.ordf", &obs.zhat),
        ("blowup_khat.ordf", &obs.khat),
        ("blowup_mhat.ordf", &obs.mhat),
    ];
    for (name, f) in files {
        write_snapshot(f, &dir.join(name))?;
    }
    Ok(())
}

/// Run one scenario to its epoch.
///
/// Each step the observer sees the drive at the current time level (with
/// fresh observation noise if configured) through the current clouds, then
/// the drive advances. A blow-up aborts the run; with an output directory
/// set, the last finite states are written there first.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutcome> {
    cfg.validate()?;
    let g = cfg.grid()?;
    let gp = build_params(cfg, &g)?;

    let mut drive = initial_conditions(&g, cfg.initial_kind());
    for _ in 0..cfg.warmup_steps() {
        drive = drive_step(&drive, &gp.params, &g)?;
    }
    drive.t = 0.0;

    let base = build_clouds(cfg, &g)?;
    let cov = coverage(&base);
    let ocfg = cfg.observer_config();
    let layout = match cfg.variant {
        Variant::Coarse => Some(SensorLayout::new(g, cfg.sensors)?),
        _ => None,
    };
    let mut obs = match cfg.observer_start {
        ObserverStart::Manifold => ObserverState {
            phat: drive.p.clone(),
            zhat: drive.z.clone(),
            khat: gp.params.k.clone(),
            mhat: gp.params.m.clone(),
            t: 0.0,
        },
        ObserverStart::Uniform if cfg.variant == Variant::OccludedSync => ObserverState {
            khat: gp.params.k.clone(),
            mhat: gp.params.m.clone(),
            ..ObserverState::uniform(g, cfg.phat0, cfg.zhat0, 0.0, 0.0)
        },
        ObserverStart::Uniform => ObserverState::uniform(g, cfg.phat0, cfg.zhat0, cfg.khat0, cfg.mhat0),
    };

    let mut noise_rng = rng_from_seed(derive_seed(cfg.seed, Stream::ObservationNoise));
    let mut series = ErrorSeries::default();
    series.push(sample(cfg, &drive, &obs, &gp)?);
    let record = cfg.record_steps();
    let mut mask = base.clone();

    for n in 0..cfg.total_steps() {
        mask = advect_mask(&base, n as f64 * g.dt);
        let step = (|| -> Result<(ObserverState, DriveState)> {
            let p_obs: Cow<'_, Field> = if cfg.obs_noise > 0.0 {
                Cow::Owned(add_field_noise_with(&drive.p, cfg.obs_noise, &mut noise_rng)?)
            } else {
                Cow::Borrowed(&drive.p)
            };
            let seen = Observation {
                p_obs: &p_obs,
                mask: &mask,
                sensors: layout.as_ref(),
            };
            let next_obs = response_step(&obs, &seen, &ocfg, &g)?;
            let next_drive = drive_step(&drive, &gp.params, &g)?;
            Ok((next_obs, next_drive))
        })();
        match step {
            Ok((o, d)) => {
                obs = o;
                drive = d;
                drive.t = (n + 1) as f64 * g.dt;
                obs.t = drive.t;
            }
            Err(e @ Error::BlowUp { .. }) => {
                if let Some(dir) = &cfg.output_dir {
                    dump_diagnostics(dir, &drive, &obs)?;
                }
                return Err(e);
            }
            Err(e) => return Err(e),
        }
        if (n + 1) % record == 0 {
            series.push(sample(cfg, &drive, &obs, &gp)?);
        }
    }
    Ok(ScenarioOutcome {
        series,
        drive,
        observer: obs,
        params: gp,
        mask,
        coverage: cov,
    })
}

/// Setting varied by [`sweep`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    HiddenFraction,
    NoiseAmplitude,
    CloudSpeed,
    SensorGap,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 4] = [
        SweepAxis::HiddenFraction,
        SweepAxis::NoiseAmplitude,
        SweepAxis::CloudSpeed,
        SweepAxis::SensorGap,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::HiddenFraction => "hidden_fraction",
            SweepAxis::NoiseAmplitude => "noise_amplitude",
            SweepAxis::CloudSpeed => "cloud_speed",
            SweepAxis::SensorGap => "sensor_gap",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == s)
    }

    /// Copy of `cfg` with this setting replaced by `value`.
    pub fn apply(self, cfg: &ScenarioConfig, value: f64) -> Result<ScenarioConfig> {
        let mut c = cfg.clone();
        let bad = |message: &str| Error::ConfigValue {
            key: self.name().into(),
            message: format!("{message}, got {value}"),
        };
        match self {
            SweepAxis::HiddenFraction => {
                if !(0.0..1.0).contains(&value) {
                    return Err(bad("must lie in [0, 1)"));
                }
                c.cloud_coverage = value;
            }
            SweepAxis::NoiseAmplitude => {
                if !(value >= 0.0) {
                    return Err(bad("must be >= 0"));
                }
                c.obs_noise = value;
            }
            SweepAxis::CloudSpeed => {
                if !value.is_finite() {
                    return Err(bad("must be finite"));
                }
                c.cloud_speed = value;
            }
            SweepAxis::SensorGap => {
                if !(value >= 0.0 && value.fract() == 0.0) {
                    return Err(bad("must be a non-negative integer"));
                }
                c.sensors.gap = value as usize;
            }
        }
        Ok(c)
    }
}

/// One sweep point: terminal errors or the reason the run failed.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub result: std::result::Result<ErrorSample, String>,
}

/// Run `cfg` once per value of `axis`, in parallel. All points share the
/// master seed, hence the same initial conditions and parameters. A failing
/// point becomes a failure row; the rest still run.
pub fn sweep(cfg: &ScenarioConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepRow>> {
    let configs: Vec<ScenarioConfig> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let mut c = axis.apply(cfg, v)?;
            if let Some(dir) = &cfg.output_dir {
                c.output_dir = Some(dir.join(format!("point_{i}")));
            }
            Ok(c)
        })
        .collect::<Result<_>>()?;
    let rows = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .map(|c| s.spawn(move || run_scenario(c).map(|o| o.terminal())))
            .collect();
        handles
            .into_iter()
            .zip(values)
            .map(|(h, &value)| {
                let result = match h.join() {
                    Ok(r) => r.map_err(|e| e.to_string()),
                    Err(_) => Err("sweep worker panicked".to_string()),
                };
                SweepRow { value, result }
            })
            .collect()
    });
    Ok(rows)
}

/// Sign pair chosen by [`probe_signs`], with the terminal worst error of
/// every candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct SignProbe {
    pub k_sign: f64,
    pub m_sign: f64,
    pub candidates: Vec<((f64, f64), std::result::Result<f64, String>)>,
}

/// Try all four adaptation sign pairs on a copy of `cfg` and keep the pair
/// with the smallest terminal worst error. Runs that fail count as worst.
pub fn probe_signs(cfg: &ScenarioConfig) -> Result<SignProbe> {
    let pairs = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];
    let results = std::thread::scope(|s| {
        let handles: Vec<_> = pairs
            .iter()
            .map(|&(ks, ms)| {
                let mut c = cfg.clone();
                c.k_sign = Some(ks);
                c.m_sign = Some(ms);
                c.output_dir = None;
                s.spawn(move || run_scenario(&c).map(|o| o.terminal().worst()))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| match h.join() {
                Ok(r) => r.map_err(|e| e.to_string()),
                Err(_) => Err("probe worker panicked".to_string()),
            })
            .collect::<Vec<_>>()
    });
    let score = |r: &std::result::Result<f64, String>| match r {
        Ok(v) if v.is_finite() => *v,
        _ => f64::INFINITY,
    };
    let best = (0..pairs.len())
        .min_by(|&a, &b| score(&results[a]).total_cmp(&score(&results[b])))
        .expect("four candidates");
    Ok(SignProbe {
        k_sign: pairs[best].0,
        m_sign: pairs[best].1,
        candidates: pairs.into_iter().zip(results).collect(),
    })
}
