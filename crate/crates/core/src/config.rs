//! Flat `key = value` scenario configuration and the preset catalogue.
//!
//! Blank lines and anything after `#` are ignored. Unknown keys are errors.
//! Keys whose default depends on the observer variant (`kappa`, gains,
//! signs, `param_diffusion`) stay unset until given explicitly and are
//! resolved by [`ScenarioConfig::observer_config`].

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::ecology::{GaussianSpec, InitialKind, SinusoidalSpec, DEFAULT_H, DEFAULT_K, DEFAULT_M};
use crate::error::{Error, Result};
use crate::field::GridSpec;
use crate::metrics::ErrorFormula;
use crate::observer::{ObserverConfig, Variant};
use crate::occlusion::DEFAULT_SENTINEL;
use crate::seed::{derive_seed, Stream};
use crate::sensing::{InnovationNorm, SensorSpec};

/// Where a parameter field comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamSource {
    Constant,
    Gaussian,
    Sinusoidal,
    Swirl,
    File,
}

impl ParamSource {
    const NAMES: [(ParamSource, &'static str); 5] = [
        (ParamSource::Constant, "constant"),
        (ParamSource::Gaussian, "gaussian"),
        (ParamSource::Sinusoidal, "sinusoidal"),
        (ParamSource::Swirl, "swirl"),
        (ParamSource::File, "file"),
    ];

    pub fn name(self) -> &'static str {
        Self::NAMES
            .iter()
            .find(|e| e.0 == self)
            .map(|e| e.1)
            .unwrap_or("constant")
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::NAMES.iter().find(|e| e.1 == s).map(|e| e.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialChoice {
    Planar,
    Random,
}

/// How the observer starts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObserverStart {
    /// Constant fields `phat0`, `zhat0`, `khat0`, `mhat0`.
    Uniform,
    /// Exactly on the drive: `P̂ = P`, `Ẑ = Z`, `k̂ = k`, `m̂ = m`.
    Manifold,
}

/// Everything a scenario run needs.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dt: f64,
    pub h: f64,

    pub k_source: ParamSource,
    pub m_source: ParamSource,
    pub k_value: f64,
    pub m_value: f64,
    pub gaussian: GaussianSpec,
    pub sinusoidal: SinusoidalSpec,
    pub swirl_k: (f64, f64),
    pub swirl_m: (f64, f64),
    /// Drive run length used to produce the swirl snapshot.
    pub swirl_time: f64,
    pub k_file: Option<PathBuf>,
    pub m_file: Option<PathBuf>,
    /// Relative amplitude of noise added once to `k` and `m`.
    pub param_noise: f64,

    pub initial: InitialChoice,
    pub ic_eps: f64,
    /// Drive time elapsed before observation starts.
    pub warmup: f64,

    pub variant: Variant,
    pub kappa: Option<f64>,
    pub s: Option<f64>,
    pub s1: Option<f64>,
    pub s2: Option<f64>,
    pub k_sign: Option<f64>,
    pub m_sign: Option<f64>,
    pub param_diffusion: Option<bool>,
    pub observer_start: ObserverStart,
    pub phat0: f64,
    pub zhat0: f64,
    pub khat0: f64,
    pub mhat0: f64,

    pub cloud_count: usize,
    pub cloud_coverage: f64,
    /// Cloud speed in space units per time unit.
    pub cloud_speed: f64,
    pub sentinel: f64,
    /// Relative amplitude of fresh observation noise each step.
    pub obs_noise: f64,

    pub sensors: SensorSpec,
    pub innovation_norm: InnovationNorm,

    pub epoch: f64,
    pub record_every: f64,
    pub error_formula: ErrorFormula,
    pub output_dir: Option<PathBuf>,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            nx: 128,
            ny: 64,
            dx: GridSpec::DEFAULT_DX,
            dt: GridSpec::DEFAULT_DT,
            h: DEFAULT_H,
            k_source: ParamSource::Constant,
            m_source: ParamSource::Constant,
            k_value: DEFAULT_K,
            m_value: DEFAULT_M,
            gaussian: GaussianSpec::default(),
            sinusoidal: SinusoidalSpec::default(),
            swirl_k: (1.8, 2.4),
            swirl_m: (0.5, 0.7),
            swirl_time: 600.0,
            k_file: None,
            m_file: None,
            param_noise: 0.0,
            initial: InitialChoice::Planar,
            ic_eps: InitialKind::DEFAULT_EPS,
            warmup: 0.0,
            variant: Variant::OccludedAutosync,
            kappa: None,
            s: None,
            s1: None,
            s2: None,
            k_sign: None,
            m_sign: None,
            param_diffusion: None,
            observer_start: ObserverStart::Uniform,
            phat0: 2.0,
            zhat0: 2.0,
            khat0: 5.0,
            mhat0: 5.0,
            cloud_count: 30,
            cloud_coverage: 0.0,
            cloud_speed: 1.0,
            sentinel: DEFAULT_SENTINEL,
            obs_noise: 0.0,
            sensors: SensorSpec::default(),
            innovation_norm: InnovationNorm::PatchCells,
            epoch: 2400.0,
            record_every: 10.0,
            error_formula: ErrorFormula::L1Relative,
            output_dir: None,
            seed: 1,
        }
    }
}

/// Whole number of `dt` steps in `span`, if it is one.
fn whole_steps(span: f64, dt: f64) -> Option<usize> {
    let r = span / dt;
    let n = r.round();
    ((r - n).abs() <= 1e-9 * n.max(1.0) && n >= 0.0).then_some(n as usize)
}

impl ScenarioConfig {
    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.nx, self.ny, self.dx, self.dt)
    }

    /// Observer gains with variant defaults filled in.
    pub fn observer_config(&self) -> ObserverConfig {
        let d = ObserverConfig::for_variant(self.variant);
        ObserverConfig {
            kappa: self.kappa.unwrap_or(d.kappa),
            s: self.s.unwrap_or(d.s),
            s1: self.s1.unwrap_or(d.s1),
            s2: self.s2.unwrap_or(d.s2),
            k_sign: self.k_sign.unwrap_or(d.k_sign),
            m_sign: self.m_sign.unwrap_or(d.m_sign),
            param_diffusion: self.param_diffusion.unwrap_or(d.param_diffusion),
            h: self.h,
            innovation_norm: match self.innovation_norm {
                InnovationNorm::PatchCells => InnovationNorm::PatchCells,
                InnovationNorm::GridSteps { .. } => InnovationNorm::GridSteps {
                    dx: self.dx,
                    dy: self.dx,
                },
            },
            ..d
        }
    }

    pub fn initial_kind(&self) -> InitialKind {
        match self.initial {
            InitialChoice::Planar => InitialKind::Planar { eps: self.ic_eps },
            InitialChoice::Random => InitialKind::SeededRandom {
                eps: self.ic_eps,
                seed: derive_seed(self.seed, Stream::InitialConditions),
            },
        }
    }

    pub fn total_steps(&self) -> usize {
        whole_steps(self.epoch, self.dt).unwrap_or(0)
    }

    pub fn record_steps(&self) -> usize {
        whole_steps(self.record_every, self.dt).unwrap_or(0)
    }

    pub fn warmup_steps(&self) -> usize {
        whole_steps(self.warmup, self.dt).unwrap_or(0)
    }

    /// Cross-key checks. Single-key range checks happen during parsing.
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, message: String| {
            Err(Error::ConfigValue {
                key: key.into(),
                message,
            })
        };
        if let Err(e) = self.grid() {
            return bad("grid", e.to_string());
        }
        if !(self.epoch > 0.0) {
            return bad("epoch", "must be > 0".into());
        }
        let Some(steps) = whole_steps(self.epoch, self.dt) else {
            return bad(
                "epoch",
                format!("{} is not a whole number of dt = {} steps", self.epoch, self.dt),
            );
        };
        match whole_steps(self.record_every, self.dt) {
            Some(r) if r > 0 && steps % r == 0 => {}
            _ => {
                return bad(
                    "record_every",
                    format!(
                        "{} must be a whole number of steps dividing the epoch",
                        self.record_every
                    ),
                )
            }
        }
        if whole_steps(self.warmup, self.dt).is_none() {
            return bad("warmup", format!("{} is not a whole number of steps", self.warmup));
        }
        if self.k_source == ParamSource::Swirl || self.m_source == ParamSource::Swirl {
            if whole_steps(self.swirl_time, self.dt).is_none() {
                return bad("swirl_time", "not a whole number of steps".into());
            }
        }
        for (key, lo_hi) in [("swirl_k", self.swirl_k), ("swirl_m", self.swirl_m)] {
            if !(lo_hi.0 < lo_hi.1) {
                return bad(key, format!("requires lo < hi, got [{}, {}]", lo_hi.0, lo_hi.1));
            }
        }
        for (key, src, file) in [
            ("k_file", self.k_source, &self.k_file),
            ("m_file", self.m_source, &self.m_file),
        ] {
            if src == ParamSource::File {
                match file {
                    None => return bad(key, "required when the source is `file`".into()),
                    Some(p) if !p.exists() => return bad(key, format!("{} does not exist", p.display())),
                    _ => {}
                }
            }
        }
        if self.cloud_coverage > 0.0 && self.cloud_count == 0 {
            return bad("cloud_count", "clouds requested with zero count".into());
        }
        if (0.0..=2.0).contains(&self.sentinel) {
            return bad("sentinel", "must lie outside [0, 2]".into());
        }
        if let Err(e) = self.observer_config().validate() {
            return bad("observer", e.to_string());
        }
        Ok(())
    }
}

enum Kind {
    Int,
    Float,
    Bool,
}

fn parse_f64(v: &str) -> Option<f64> {
    v.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "true" | "yes" | "on" | "1" => Some(true),
        "false" | "no" | "off" | "0" => Some(false),
        _ => None,
    }
}

/// Apply one `key = value` pair; `Err` carries a message without position.
fn set_key(c: &mut ScenarioConfig, key: &str, v: &str) -> std::result::Result<(), String> {
    let kind_err = |k: Kind| {
        let what = match k {
            Kind::Int => "a non-negative integer",
            Kind::Float => "a finite number",
            Kind::Bool => "true or false",
        };
        format!("`{key}` expects {what}, got `{v}`")
    };
    let int = || v.parse::<usize>().map_err(|_| kind_err(Kind::Int));
    let float = || parse_f64(v).ok_or_else(|| kind_err(Kind::Float));
    let pos = || {
        let x = float()?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(format!("`{key}` must be > 0, got {x}"))
        }
    };
    let nonneg = || {
        let x = float()?;
        if x >= 0.0 {
            Ok(x)
        } else {
            Err(format!("`{key}` must be >= 0, got {x}"))
        }
    };
    let sign = || {
        let x = float()?;
        if x == 1.0 || x == -1.0 {
            Ok(x)
        } else {
            Err(format!("`{key}` must be 1 or -1, got {x}"))
        }
    };
    let boolean = || parse_bool(v).ok_or_else(|| kind_err(Kind::Bool));
    let source = || {
        ParamSource::parse(v)
            .ok_or_else(|| format!("`{key}` expects constant|gaussian|sinusoidal|swirl|file, got `{v}`"))
    };
    match key {
        "nx" | "ny" => {
            let n = int()?;
            if n < 1 {
                return Err(format!("`{key}` must be >= 1"));
            }
            if key == "nx" {
                c.nx = n
            } else {
                c.ny = n
            }
        }
        "dx" => c.dx = pos()?,
        "dt" => c.dt = pos()?,
        "h" => c.h = pos()?,
        "k_source" => c.k_source = source()?,
        "m_source" => c.m_source = source()?,
        "k" => c.k_value = nonneg()?,
        "m" => c.m_value = nonneg()?,
        "gauss_a" => c.gaussian.a = nonneg()?,
        "gauss_c" => c.gaussian.c = nonneg()?,
        "gauss_mcenter" => c.gaussian.mcenter = float()?,
        "gauss_ncenter" => c.gaussian.ncenter = float()?,
        "gauss_sigma" => c.gaussian.sigma = pos()?,
        "sin_a" => c.sinusoidal.a = float()?,
        "sin_b" => {
            c.sinusoidal.b = if v == "auto" { None } else { Some(float()?) };
        }
        "sin_c" => c.sinusoidal.c = float()?,
        "sin_d" => c.sinusoidal.d = float()?,
        "sin_s" => c.sinusoidal.s = float()?,
        "sin_t" => c.sinusoidal.t = float()?,
        "swirl_k_lo" => c.swirl_k.0 = float()?,
        "swirl_k_hi" => c.swirl_k.1 = float()?,
        "swirl_m_lo" => c.swirl_m.0 = float()?,
        "swirl_m_hi" => c.swirl_m.1 = float()?,
        "swirl_time" => c.swirl_time = pos()?,
        "k_file" => c.k_file = Some(PathBuf::from(v)),
        "m_file" => c.m_file = Some(PathBuf::from(v)),
        "param_noise" => c.param_noise = nonneg()?,
        "initial" => {
            c.initial = match v {
                "planar" => InitialChoice::Planar,
                "random" => InitialChoice::Random,
                _ => return Err(format!("`initial` expects planar|random, got `{v}`")),
            }
        }
        "ic_eps" => c.ic_eps = nonneg()?,
        "warmup" => c.warmup = nonneg()?,
        "variant" => {
            c.variant = Variant::parse(v)
                .ok_or_else(|| format!("`variant` expects full|occluded-sync|occluded-autosync|coarse, got `{v}`"))?
        }
        "kappa" => c.kappa = Some(nonneg()?),
        "s" => c.s = Some(nonneg()?),
        "s1" => c.s1 = Some(nonneg()?),
        "s2" => c.s2 = Some(nonneg()?),
        "k_sign" => c.k_sign = Some(sign()?),
        "m_sign" => c.m_sign = Some(sign()?),
        "param_diffusion" => c.param_diffusion = Some(boolean()?),
        "observer_start" => {
            c.observer_start = match v {
                "uniform" => ObserverStart::Uniform,
                "manifold" => ObserverStart::Manifold,
                _ => return Err(format!("`observer_start` expects uniform|manifold, got `{v}`")),
            }
        }
        "phat0" => c.phat0 = float()?,
        "zhat0" => c.zhat0 = float()?,
        "khat0" => c.khat0 = nonneg()?,
        "mhat0" => c.mhat0 = nonneg()?,
        "cloud_count" => c.cloud_count = int()?,
        "cloud_coverage" => {
            let x = nonneg()?;
            if x >= 1.0 {
                return Err(format!("`cloud_coverage` must be < 1, got {x}"));
            }
            c.cloud_coverage = x;
        }
        "cloud_speed" => c.cloud_speed = float()?,
        "sentinel" => c.sentinel = float()?,
        "obs_noise" => c.obs_noise = nonneg()?,
        "patch_w" | "patch_h" => {
            let n = int()?;
            if n < 1 {
                return Err(format!("`{key}` must be >= 1"));
            }
            if key == "patch_w" {
                c.sensors.patch_w = n
            } else {
                c.sensors.patch_h = n
            }
        }
        "sensor_gap" => c.sensors.gap = int()?,
        "sensor_origin_x" => c.sensors.origin_x = int()?,
        "sensor_origin_y" => c.sensors.origin_y = int()?,
        "innovation_norm" => {
            c.innovation_norm = match v {
                "patch" => InnovationNorm::PatchCells,
                "grid" => InnovationNorm::GridSteps { dx: c.dx, dy: c.dx },
                _ => return Err(format!("`innovation_norm` expects patch|grid, got `{v}`")),
            }
        }
        "epoch" => c.epoch = pos()?,
        "record_every" => c.record_every = pos()?,
        "error_formula" => {
            c.error_formula = match v {
                "l1" => ErrorFormula::L1Relative,
                "per-cell" => ErrorFormula::PerCell {
                    eps: match c.error_formula {
                        ErrorFormula::PerCell { eps } => eps,
                        ErrorFormula::L1Relative => 1e-12,
                    },
                },
                _ => return Err(format!("`error_formula` expects l1|per-cell, got `{v}`")),
            }
        }
        "per_cell_eps" => {
            let eps = nonneg()?;
            if let ErrorFormula::PerCell { eps: e } = &mut c.error_formula {
                *e = eps;
            } else {
                return Err("`per_cell_eps` needs `error_formula = per-cell` first".into());
            }
        }
        "output_dir" => c.output_dir = Some(PathBuf::from(v)),
        "seed" => c.seed = v.parse::<u64>().map_err(|_| kind_err(Kind::Int))?,
        _ => return Err(format!("unknown key `{key}`")),
    }
    Ok(())
}

/// Parse and validate a configuration. An empty text gives the defaults.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut c = ScenarioConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            return Err(Error::Config {
                line,
                message: format!("expected `key = value`, got `{body}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        set_key(&mut c, key, value).map_err(|message| Error::Config { line, message })?;
    }
    if let InnovationNorm::GridSteps { .. } = c.innovation_norm {
        c.innovation_norm = InnovationNorm::GridSteps { dx: c.dx, dy: c.dx };
    }
    c.validate()?;
    Ok(c)
}

/// Render a configuration that [`parse_config`] reads back unchanged.
pub fn render_config(c: &ScenarioConfig) -> String {
    let mut out = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    let f = |x: f64| format!("{x:?}");
    kv("nx", c.nx.to_string());
    kv("ny", c.ny.to_string());
    kv("dx", f(c.dx));
    kv("dt", f(c.dt));
    kv("h", f(c.h));
    kv("k_source", c.k_source.name().into());
    kv("m_source", c.m_source.name().into());
    kv("k", f(c.k_value));
    kv("m", f(c.m_value));
    kv("gauss_a", f(c.gaussian.a));
    kv("gauss_c", f(c.gaussian.c));
    kv("gauss_mcenter", f(c.gaussian.mcenter));
    kv("gauss_ncenter", f(c.gaussian.ncenter));
    kv("gauss_sigma", f(c.gaussian.sigma));
    kv("sin_a", f(c.sinusoidal.a));
    kv("sin_b", c.sinusoidal.b.map_or("auto".into(), f));
    kv("sin_c", f(c.sinusoidal.c));
    kv("sin_d", f(c.sinusoidal.d));
    kv("sin_s", f(c.sinusoidal.s));
    kv("sin_t", f(c.sinusoidal.t));
    kv("swirl_k_lo", f(c.swirl_k.0));
    kv("swirl_k_hi", f(c.swirl_k.1));
    kv("swirl_m_lo", f(c.swirl_m.0));
    kv("swirl_m_hi", f(c.swirl_m.1));
    kv("swirl_time", f(c.swirl_time));
    if let Some(p) = &c.k_file {
        kv("k_file", p.display().to_string());
    }
    if let Some(p) = &c.m_file {
        kv("m_file", p.display().to_string());
    }
    kv("param_noise", f(c.param_noise));
    kv(
        "initial",
        match c.initial {
            InitialChoice::Planar => "planar",
            InitialChoice::Random => "random",
        }
        .into(),
    );
    kv("ic_eps", f(c.ic_eps));
    kv("warmup", f(c.warmup));
    kv("variant", c.variant.name().into());
    for (k, v) in [
        ("kappa", c.kappa),
        ("s", c.s),
        ("s1", c.s1),
        ("s2", c.s2),
        ("k_sign", c.k_sign),
        ("m_sign", c.m_sign),
    ] {
        if let Some(v) = v {
            kv(k, f(v));
        }
    }
    if let Some(b) = c.param_diffusion {
        kv("param_diffusion", b.to_string());
    }
    kv(
        "observer_start",
        match c.observer_start {
            ObserverStart::Uniform => "uniform",
            ObserverStart::Manifold => "manifold",
        }
        .into(),
    );
    kv("phat0", f(c.phat0));
    kv("zhat0", f(c.zhat0));
    kv("khat0", f(c.khat0));
    kv("mhat0", f(c.mhat0));
    kv("cloud_count", c.cloud_count.to_string());
    kv("cloud_coverage", f(c.cloud_coverage));
    kv("cloud_speed", f(c.cloud_speed));
    kv("sentinel", f(c.sentinel));
    kv("obs_noise", f(c.obs_noise));
    kv("patch_w", c.sensors.patch_w.to_string());
    kv("patch_h", c.sensors.patch_h.to_string());
    kv("sensor_gap", c.sensors.gap.to_string());
    kv("sensor_origin_x", c.sensors.origin_x.to_string());
    kv("sensor_origin_y", c.sensors.origin_y.to_string());
    kv(
        "innovation_norm",
        match c.innovation_norm {
            InnovationNorm::PatchCells => "patch",
            InnovationNorm::GridSteps { .. } => "grid",
        }
        .into(),
    );
    kv("epoch", f(c.epoch));
    kv("record_every", f(c.record_every));
    match c.error_formula {
        ErrorFormula::L1Relative => kv("error_formula", "l1".into()),
        ErrorFormula::PerCell { eps } => {
            kv("error_formula", "per-cell".into());
            kv("per_cell_eps", f(eps));
        }
    }
    if let Some(p) = &c.output_dir {
        kv("output_dir", p.display().to_string());
    }
    kv("seed", c.seed.to_string());
    out
}

/// A named, ready-to-run scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Preset {
    pub name: &'static str,
    /// Figure number this scenario reproduces.
    pub figure: &'static str,
    /// Grid used here, against the full-size grid.
    pub scale: &'static str,
    pub text: &'static str,
}

const DESK: &str = "128x64 (full size 864x288)";

pub const PRESETS: [Preset; 6] = [
    Preset {
        name: "fig4",
        figure: "4",
        scale: DESK,
        text: "\
# State synchronization under heavy cloud, true parameters.
variant = occluded-sync
kappa = 2.6
cloud_count = 30
cloud_coverage = 0.65
cloud_speed = 1
epoch = 3000
record_every = 50
",
    },
    Preset {
        name: "fig5-7",
        figure: "5-7",
        scale: DESK,
        text: "\
# Joint state and parameter estimation under 25.5% cloud.
variant = occluded-autosync
kappa = 0.625
s1 = 0.2
s2 = 0.6
k_source = swirl
swirl_k_lo = 1.8
swirl_k_hi = 2.4
m_source = sinusoidal
sin_c = 0.1
sin_t = 0.6
param_noise = 0.02
cloud_count = 30
cloud_coverage = 0.255
cloud_speed = 4
epoch = 3000
record_every = 50
",
    },
    Preset {
        name: "fig8",
        figure: "8",
        scale: DESK,
        text: "\
# Error after a fixed epoch against the hidden fraction (sweep hidden_fraction).
variant = occluded-autosync
kappa = 0.625
s1 = 0.2
s2 = 0.6
k_source = swirl
swirl_k_lo = 1.8
swirl_k_hi = 2.4
m_source = sinusoidal
sin_c = 0.1
sin_t = 0.6
param_noise = 0.02
cloud_count = 30
cloud_coverage = 0.255
cloud_speed = 4
epoch = 1200
record_every = 50
",
    },
    Preset {
        name: "fig9",
        figure: "9",
        scale: DESK,
        text: "\
# Error after a fixed epoch against observation noise (sweep noise_amplitude).
variant = occluded-autosync
kappa = 0.625
s1 = 0.2
s2 = 0.6
k_source = swirl
swirl_k_lo = 1.8
swirl_k_hi = 2.4
m_source = sinusoidal
sin_c = 0.1
sin_t = 0.6
param_noise = 0.02
cloud_count = 30
cloud_coverage = 0.255
cloud_speed = 4
obs_noise = 0.01
epoch = 1200
record_every = 50
",
    },
    Preset {
        name: "fig10-12",
        figure: "10-12",
        scale: DESK,
        text: "\
# Coarse 2x2 sensors with one-cell gaps, noisy data, cloud (sweep sensor_gap).
variant = coarse
kappa = 0.625
s1 = 0.2
s2 = 0.6
param_diffusion = true
k_source = swirl
swirl_k_lo = 1.8
swirl_k_hi = 2.4
m_source = sinusoidal
sin_c = 0.1
sin_t = 0.6
param_noise = 0.02
patch_w = 2
patch_h = 2
sensor_gap = 1
cloud_count = 30
cloud_coverage = 0.255
cloud_speed = 4
obs_noise = 0.01
epoch = 4000
record_every = 50
",
    },
    Preset {
        name: "fig13",
        figure: "13",
        scale: DESK,
        text: "\
# State synchronization error against cloud speed (sweep cloud_speed).
variant = occluded-sync
kappa = 2.6
cloud_count = 30
cloud_coverage = 0.65
cloud_speed = 1
epoch = 1200
record_every = 50
",
    },
];

pub fn preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_default() {
        assert_eq!(parse_config("").unwrap(), ScenarioConfig::default());
        assert_eq!(parse_config("# only a comment\n\n").unwrap(), ScenarioConfig::default());
    }

    #[test]
    fn kappa_line() {
        let c = parse_config("kappa = 0.625").unwrap();
        assert_eq!(c.kappa, Some(0.625));
        assert_eq!(c.observer_config().kappa, 0.625);
    }

    #[test]
    fn negative_dx_names_key_and_line() {
        let err = parse_config("nx = 10\ndx = -1\n").unwrap_err();
        match err {
            Error::Config { line, message } => {
                assert_eq!(line, 2);
                assert!(message.contains("dx"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_and_malformed() {
        assert!(matches!(
            parse_config("a = 1\nbogus = 3"),
            Err(Error::Config { line: 1, .. })
        ));
        assert!(matches!(parse_config("nx 3"), Err(Error::Config { line: 1, .. })));
        assert!(matches!(
            parse_config("\nnx = three"),
            Err(Error::Config { line: 2, .. })
        ));
    }

    #[test]
    fn cadence_must_divide_epoch() {
        assert!(matches!(
            parse_config("epoch = 10\nrecord_every = 3"),
            Err(Error::ConfigValue { .. })
        ));
        assert!(parse_config("epoch = 10\nrecord_every = 2").is_ok());
    }

    #[test]
    fn variant_defaults_resolve() {
        let c = parse_config("variant = full").unwrap();
        let o = c.observer_config();
        assert_eq!((o.kappa, o.s, o.k_sign), (2.4, 30.0, -1.0));
        let c = parse_config("variant = occluded-sync").unwrap();
        assert_eq!(c.observer_config().kappa, 2.6);
    }

    #[test]
    fn presets_parse() {
        for p in &PRESETS {
            let c = parse_config(p.text).unwrap_or_else(|e| panic!("{}: {e}", p.name));
            assert_eq!(parse_config(&render_config(&c)).unwrap(), c);
            assert!(!p.figure.is_empty() && !p.scale.is_empty());
        }
        assert!(preset("fig4").is_some());
        assert!(preset("fig99").is_none());
    }

    #[test]
    fn render_round_trip_with_options() {
        let mut c = ScenarioConfig::default();
        c.kappa = Some(1.0 / 3.0);
        c.sinusoidal.b = Some(0.1);
        c.error_formula = ErrorFormula::PerCell { eps: 1e-9 };
        c.output_dir = Some(PathBuf::from("/tmp/x y"));
        c.param_diffusion = Some(true);
        c.seed = u64::MAX;
        assert_eq!(parse_config(&render_config(&c)).unwrap(), c);
    }
}
