use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use log::{info, warn};

use occlusync::config::{parse_config, preset, ScenarioConfig, PRESETS};
use occlusync::ecology::{drive_step, initial_conditions, InitialKind};
use occlusync::io::{read_snapshot, write_csv, write_preview, write_series_csv, write_snapshot};
use occlusync::metrics::ErrorSeries;
use occlusync::netanalysis::{
    expected_laplacian, trajectory_exponent, verify_network_equivalence, JacobianMode, StabilityOptions,
};
use occlusync::occlusion::{advect_mask, detect_sentinel, gen_clouds, CloudMask};
use occlusync::scenario::{build_clouds, build_params, run_scenario, sweep, SweepAxis};
use occlusync::{Error, Field, GridSpec};

#[derive(Parser)]
#[command(
    name = "occlusync",
    version,
    about = "Estimate hidden plankton fields and parameters through clouds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its error series and final fields.
    Run {
        /// Config file, or `preset:<name>`.
        config: String,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the scenario once per value of one setting.
    Sweep {
        config: String,
        /// hidden_fraction, noise_amplitude, cloud_speed or sensor_gap.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Network view of the scenario: transverse exponents, mean coupling
    /// under the clouds, and the network/field equivalence check.
    Analyze {
        config: String,
        /// Drive steps taken before the exponent is measured.
        #[arg(long, default_value_t = 1000)]
        warmup_steps: usize,
        #[arg(long, default_value_t = 1000)]
        horizon: usize,
        /// Drop the Z factor from the grazing derivatives instead of using the exact Jacobian.
        #[arg(long)]
        reduced_jacobian: bool,
    },
    /// Write the parameter fields the scenario would use.
    Genparams {
        config: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a snapshot as a 16-bit PGM.
    Preview {
        snapshot: PathBuf,
        /// Output image; defaults to the snapshot path with a `.pgm` extension.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Cells holding this value are drawn black.
        #[arg(long)]
        sentinel: Option<f64>,
    },
    /// List the built-in scenario presets.
    Presets,
}

fn load_config(source: &str) -> Result<ScenarioConfig, Error> {
    let text = match source.strip_prefix("preset:") {
        Some(name) => preset(name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preset `{name}`")))?
            .text
            .to_string(),
        None => fs::read_to_string(source).map_err(|e| Error::io(source, e))?,
    };
    parse_config(&text)
}

fn output_dir(cfg: &ScenarioConfig, out: Option<PathBuf>) -> Result<Option<PathBuf>, Error> {
    let dir = out.or_else(|| cfg.output_dir.clone());
    if let Some(d) = &dir {
        fs::create_dir_all(d).map_err(|e| Error::io(d, e))?;
    }
    Ok(dir)
}

fn save_field(dir: &Path, name: &str, f: &Field, hidden: Option<&[bool]>) -> Result<(), Error> {
    write_snapshot(f, &dir.join(format!("{name}.ordf")))?;
    write_preview(f, hidden, &dir.join(format!("{name}.pgm")))
}

fn cmd_run(config: &str, out: Option<PathBuf>) -> anyhow::Result<()> {
    let mut cfg = load_config(config)?;
    cfg.output_dir = output_dir(&cfg, out)?;
    let o = run_scenario(&cfg)?;
    let end = o.terminal();
    println!(
        "t = {:.1}  coverage = {:.4}  err P = {:.3e}  Z = {:.3e}  k = {:.3e}  m = {:.3e}",
        end.t, o.coverage, end.p, end.z, end.k, end.m
    );
    if cfg.param_noise > 0.0 {
        println!(
            "against noiseless parameters: k = {:.3e}  m = {:.3e}",
            end.k_clean, end.m_clean
        );
    }
    if let Some(dir) = &cfg.output_dir {
        write_series_csv(&dir.join("series.csv"), &o.series)?;
        let hidden = Some(o.mask.cells());
        save_field(dir, "p", &o.drive.p, hidden)?;
        save_field(dir, "z", &o.drive.z, None)?;
        save_field(dir, "phat", &o.observer.phat, None)?;
        save_field(dir, "zhat", &o.observer.zhat, None)?;
        save_field(dir, "khat", &o.observer.khat, None)?;
        save_field(dir, "mhat", &o.observer.mhat, None)?;
        info!("wrote results to {}", dir.display());
    }
    Ok(())
}

fn cmd_sweep(config: &str, axis: &str, values: &[f64], out: Option<PathBuf>) -> anyhow::Result<()> {
    let Some(axis) = SweepAxis::parse(axis) else {
        let names: Vec<_> = SweepAxis::ALL.iter().map(|a| a.name()).collect();
        return Err(
            Error::InvalidArgument(format!("unknown axis `{axis}`; expected one of {}", names.join(", "))).into(),
        );
    };
    let mut cfg = load_config(config)?;
    cfg.output_dir = output_dir(&cfg, out)?;
    let rows = sweep(&cfg, axis, values)?;
    let mut table = Vec::new();
    println!("{},t,err_p,err_z,err_k,err_m", axis.name());
    for r in &rows {
        match &r.result {
            Ok(s) => {
                println!("{},{},{:.6e},{:.6e},{:.6e},{:.6e}", r.value, s.t, s.p, s.z, s.k, s.m);
                table.push(vec![r.value, s.t, s.p, s.z, s.k, s.m, s.k_clean, s.m_clean]);
            }
            Err(e) => {
                warn!("{} = {}: {e}", axis.name(), r.value);
                println!("{},failed: {e}", r.value);
                table.push(vec![
                    r.value,
                    f64::NAN,
                    f64::NAN,
                    f64::NAN,
                    f64::NAN,
                    f64::NAN,
                    f64::NAN,
                    f64::NAN,
                ]);
            }
        }
    }
    if let Some(dir) = &cfg.output_dir {
        let mut header = vec![axis.name()];
        header.extend_from_slice(&ErrorSeries::COLUMNS);
        write_csv(&dir.join("sweep.csv"), &header, &table)?;
    }
    Ok(())
}

fn cmd_analyze(config: &str, warmup_steps: usize, horizon: usize, reduced: bool) -> anyhow::Result<()> {
    let cfg = load_config(config)?;
    let g = cfg.grid()?;
    let params = build_params(&cfg, &g)?.params;
    let clouds = build_clouds(&cfg, &g)?;
    let ocfg = cfg.observer_config();
    let mode = if reduced {
        JacobianMode::WithoutZFactor
    } else {
        JacobianMode::Analytic
    };

    let mut drive = initial_conditions(&g, cfg.initial_kind());
    for _ in 0..warmup_steps {
        drive = drive_step(&drive, &params, &g)?;
    }
    let opts = StabilityOptions::new(horizon, g.dt);
    let exponent = |mask: &CloudMask, kappa| trajectory_exponent(&g, &params, &drive, mask, kappa, mode, &opts);
    let uncoupled = exponent(&clouds, 0.0)?;
    let clear = exponent(&CloudMask::clear(g), ocfg.kappa)?;
    let cloudy = exponent(&clouds, ocfg.kappa)?;
    println!("transverse exponent, uncoupled:            {uncoupled:+.6}");
    println!("transverse exponent, kappa = {}, clear:  {clear:+.6}", ocfg.kappa);
    println!("transverse exponent, kappa = {}, clouds: {cloudy:+.6}", ocfg.kappa);

    let period = if cfg.cloud_speed != 0.0 {
        (g.nx as f64 * g.dx / cfg.cloud_speed.abs() / g.dt).ceil() as usize
    } else {
        1
    };
    let masks: Vec<CloudMask> = (0..period.max(1))
        .map(|n| advect_mask(&clouds, n as f64 * g.dt))
        .collect();
    let expected = expected_laplacian(&masks)?;
    let never = expected.occlusion_probability.iter().filter(|&&p| p >= 1.0).count();
    println!(
        "mean coupling weight over {} cloud samples: {:.4} ({} cells never observed)",
        expected.samples,
        expected.mean_coupling_weight(),
        never
    );

    let small = GridSpec::new(16, 8, g.dx, g.dt)?;
    let small_mask = if cfg.cloud_coverage > 0.0 {
        gen_clouds(&small, cfg.cloud_count.min(4).max(1), cfg.cloud_coverage, cfg.seed)?
    } else {
        CloudMask::clear(small)
    };
    let small_params = occlusync::ecology::DriveParams::constant(small, cfg.k_value, cfg.m_value, cfg.h);
    let start = initial_conditions(
        &small,
        InitialKind::SeededRandom {
            eps: 0.05,
            seed: cfg.seed,
        },
    );
    let response = (
        Field::constant(small, cfg.phat0.min(2.0)),
        Field::constant(small, cfg.zhat0.min(2.0)),
    );
    let diff = verify_network_equivalence(
        &small,
        &small_params,
        ocfg.kappa,
        &small_mask,
        &start,
        (&response.0, &response.1),
        100,
    )?;
    println!("network vs field solver on 16x8, 100 steps: max difference {diff:.3e}");
    Ok(())
}

fn cmd_genparams(config: &str, out: Option<PathBuf>) -> anyhow::Result<()> {
    let cfg = load_config(config)?;
    let Some(dir) = output_dir(&cfg, out)? else {
        bail!(Error::InvalidArgument("genparams needs --out or output_dir".into()));
    };
    let g = cfg.grid()?;
    let gp = build_params(&cfg, &g)?;
    save_field(&dir, "k", &gp.params.k, None)?;
    save_field(&dir, "m", &gp.params.m, None)?;
    if cfg.param_noise > 0.0 {
        save_field(&dir, "k_clean", &gp.clean.k, None)?;
        save_field(&dir, "m_clean", &gp.clean.m, None)?;
    }
    println!(
        "k in [{:.4}, {:.4}], m in [{:.4}, {:.4}] -> {}",
        gp.params.k.min(),
        gp.params.k.max(),
        gp.params.m.min(),
        gp.params.m.max(),
        dir.display()
    );
    Ok(())
}

fn cmd_preview(snapshot: &Path, out: Option<PathBuf>, sentinel: Option<f64>) -> anyhow::Result<()> {
    let f = read_snapshot(snapshot)?;
    let hidden = sentinel.map(|s| detect_sentinel(&f, s));
    let out = out.unwrap_or_else(|| snapshot.with_extension("pgm"));
    write_preview(&f, hidden.as_deref(), &out)?;
    println!("{}x{} -> {}", f.grid().nx, f.grid().ny, out.display());
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    err.chain()
        .find_map(|e| e.downcast_ref::<Error>())
        .map_or(5, |e| e.exit_code() as u8)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out } => cmd_run(&config, out).with_context(|| format!("run {config}")),
        Command::Sweep {
            config,
            axis,
            values,
            out,
        } => cmd_sweep(&config, &axis, &values, out).with_context(|| format!("sweep {config}")),
        Command::Analyze {
            config,
            warmup_steps,
            horizon,
            reduced_jacobian,
        } => cmd_analyze(&config, warmup_steps, horizon, reduced_jacobian).with_context(|| format!("analyze {config}")),
        Command::Genparams { config, out } => {
            cmd_genparams(&config, out).with_context(|| format!("genparams {config}"))
        }
        Command::Preview {
            snapshot,
            out,
            sentinel,
        } => cmd_preview(&snapshot, out, sentinel).with_context(|| format!("preview {}", snapshot.display())),
        Command::Presets => {
            for p in PRESETS {
                println!("{:10} figure {:6} {}", p.name, p.figure, p.scale);
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
