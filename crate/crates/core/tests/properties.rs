use proptest::prelude::*;

use occlusync::config::{parse_config, render_config, InitialChoice, ObserverStart, ParamSource, ScenarioConfig};
use occlusync::field::{clamp_range, laplacian_zero_flux, shift_periodic_x};
use occlusync::metrics::{global_relative_error, relative_error, ErrorFormula};
use occlusync::netanalysis::{build_l1, build_l2};
use occlusync::observer::{
    coarse_inputs, response_step_autosync, response_step_coarse, response_step_full, response_step_occluded,
    ObserverConfig, ObserverState, Variant, STATE_MAX, STATE_MIN,
};
use occlusync::occlusion::{advect_mask, apply_sentinel, detect_sentinel, shift_mask_cells, CloudMask};
use occlusync::sensing::{innovation, local_averages, InnovationNorm, SensorLayout, SensorSpec};
use occlusync::{Field, GridSpec};

fn grid_and_values(max: usize, lo: f64, hi: f64) -> impl Strategy<Value = Field> {
    (1..=max, 1..=max).prop_flat_map(move |(nx, ny)| {
        prop::collection::vec(lo..hi, nx * ny)
            .prop_map(move |v| Field::from_values(GridSpec::with_default_steps(nx, ny).unwrap(), v).unwrap())
    })
}

fn pair(max: usize) -> impl Strategy<Value = (Field, Field)> {
    (1..=max, 1..=max).prop_flat_map(|(nx, ny)| {
        let g = GridSpec::with_default_steps(nx, ny).unwrap();
        let f = move |v| Field::from_values(g, v).unwrap();
        (
            prop::collection::vec(-10.0..10.0, nx * ny).prop_map(f),
            prop::collection::vec(-10.0..10.0, nx * ny).prop_map(f),
        )
    })
}

fn mask_on(g: GridSpec) -> impl Strategy<Value = CloudMask> {
    prop::collection::vec(any::<bool>(), g.len()).prop_map(move |m| CloudMask::new(g, m).unwrap())
}

proptest! {
    #[test]
    fn laplacian_conserves(f in grid_and_values(24, -1e3, 1e3)) {
        let g = f.grid();
        let total = laplacian_zero_flux(&f).sum().abs();
        prop_assert!(total <= 1e-12 * g.len() as f64 * f.max_abs().max(f64::MIN_POSITIVE));
    }

    #[test]
    fn laplacian_is_linear((f, h) in pair(16), a in -5.0..5.0f64, b in -5.0..5.0f64) {
        let mix = f.zip_map(&h, |x, y| a * x + b * y).unwrap();
        let lhs = laplacian_zero_flux(&mix);
        let rhs = laplacian_zero_flux(&f).zip_map(&laplacian_zero_flux(&h), |x, y| a * x + b * y).unwrap();
        let scale = 1.0 + lhs.max_abs();
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * scale);
    }

    #[test]
    fn shifting_a_full_turn_is_identity(f in grid_and_values(12, -1.0, 1.0), step in -3i64..4) {
        let nx = f.grid().nx as i64;
        let mut s = f.clone();
        for _ in 0..nx {
            s = shift_periodic_x(&s, step);
        }
        let mut t = f.clone();
        for _ in 0..nx {
            t = shift_periodic_x(&t, 1);
        }
        prop_assert_eq!(t.values(), f.values());
        let back = shift_periodic_x(&s, -(step * nx));
        prop_assert_eq!(back.values(), f.values());
    }

    #[test]
    fn clamp_is_idempotent(f in grid_and_values(10, -5.0, 5.0), lo in -1.0..0.5f64, span in 0.0..2.0f64) {
        let once = clamp_range(&f, lo, lo + span);
        let twice = clamp_range(&once, lo, lo + span);
        prop_assert_eq!(twice.values(), once.values());
    }

    #[test]
    fn advection_preserves_cloud_area(
        (g, m) in (1..12usize, 1..6usize).prop_flat_map(|(nx, ny)| {
            let g = GridSpec::with_default_steps(nx, ny).unwrap();
            (Just(g), mask_on(g))
        }),
        speed in -8.0..8.0f64,
        times in prop::collection::vec(0.0..50.0f64, 1..6),
    ) {
        let base = m.with_speed(speed);
        for t in times {
            prop_assert_eq!(advect_mask(&base, t).occluded_count(), base.occluded_count());
        }
        let mut s = base.clone();
        for _ in 0..g.nx {
            s = shift_mask_cells(&s, 1);
        }
        prop_assert_eq!(s.cells(), base.cells());
    }

    #[test]
    fn sentinel_recovers_mask(
        (f, m) in (1..10usize, 1..10usize).prop_flat_map(|(nx, ny)| {
            let g = GridSpec::with_default_steps(nx, ny).unwrap();
            (prop::collection::vec(0.0..2.0f64, nx * ny).prop_map(move |v| Field::from_values(g, v).unwrap()), mask_on(g))
        })
    ) {
        let hidden = apply_sentinel(&f, &m).unwrap();
        prop_assert_eq!(detect_sentinel(&hidden, m.sentinel), m.cells().to_vec());
    }

    #[test]
    fn innovation_is_difference_of_averages(
        (p, q) in pair(14),
        w in 1..4usize, h in 1..4usize, gap in 0..3usize,
    ) {
        let g = *p.grid();
        let spec = SensorSpec { patch_w: w, patch_h: h, gap, ..SensorSpec::default() };
        let layout = SensorLayout::new(g, spec).unwrap();
        for s in 0..layout.len() {
            prop_assert_eq!(layout.cells(s).count(), w * h);
        }
        let inn = innovation(&p, &q, &layout, InnovationNorm::PatchCells).unwrap();
        let (a, b) = (local_averages(&p, &layout).unwrap(), local_averages(&q, &layout).unwrap());
        for ((i, x), y) in inn.as_slice().iter().zip(a.as_slice()).zip(b.as_slice()) {
            prop_assert!((i - (x - y)).abs() <= 1e-12 * (1.0 + x.abs() + y.abs()));
        }
    }

    #[test]
    fn laplacian_rows_sum_to_zero(
        (g, m) in (1..10usize, 1..8usize).prop_flat_map(|(nx, ny)| {
            let g = GridSpec::with_default_steps(nx, ny).unwrap();
            (Just(g), mask_on(g))
        })
    ) {
        prop_assert!(build_l1(&g).row_sums().iter().all(|&s| s == 0.0));
        prop_assert!(build_l2(&m).row_sums().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn relative_error_is_scale_invariant((t, e) in pair(10), c in 1e-3..1e3f64) {
        prop_assume!(t.values().iter().any(|v| *v != 0.0));
        let (ts, es) = (t.map(|v| c * v), e.map(|v| c * v));
        let a = global_relative_error(&t, &e).unwrap();
        let b = global_relative_error(&ts, &es).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
        let f = ErrorFormula::PerCell { eps: 0.0 };
        prop_assume!(t.values().iter().all(|v| *v != 0.0));
        let (a, b) = (relative_error(&t, &e, f).unwrap(), relative_error(&ts, &es, f).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
    }

    #[test]
    fn observer_states_stay_in_range(
        (state, drive, m) in (1..8usize, 1..8usize).prop_flat_map(|(nx, ny)| {
            let g = GridSpec::with_default_steps(nx, ny).unwrap();
            let f = move |lo: f64, hi: f64| prop::collection::vec(lo..hi, nx * ny).prop_map(move |v| Field::from_values(g, v).unwrap());
            (
                (f(-50.0, 50.0), f(-50.0, 50.0), f(0.0, 5.0), f(0.0, 5.0)),
                f(0.0, 2.0),
                mask_on(g),
            )
        }),
    ) {
        let g = *drive.grid();
        let (phat, zhat, khat, mhat) = state;
        let o = ObserverState { phat, zhat, khat, mhat, t: 0.0 };
        let layout = SensorLayout::new(g, SensorSpec { patch_w: 1, patch_h: 1, gap: 0, ..SensorSpec::default() }).unwrap();
        let mut outs = Vec::new();
        for v in Variant::ALL {
            let cfg = ObserverConfig::for_variant(v);
            let out = match v {
                Variant::Full => response_step_full(&o, &drive, &cfg, &g),
                Variant::OccludedSync => response_step_occluded(&o, &drive, &m, &cfg, &g),
                Variant::OccludedAutosync => response_step_autosync(&o, &drive, &m, &cfg, &g),
                Variant::Coarse => {
                    let inputs = coarse_inputs(&drive, &o.phat, &m, &layout, cfg.innovation_norm).unwrap();
                    response_step_coarse(&o, &inputs, &layout, &cfg, &g)
                }
            };
            // Huge unclamped inputs may legitimately trip the blow-up guard.
            if let Ok(out) = out {
                outs.push(out);
            }
        }
        for out in outs {
            for v in out.phat.values().iter().chain(out.zhat.values()) {
                prop_assert!((STATE_MIN..=STATE_MAX).contains(v));
            }
            for v in out.khat.values().iter().chain(out.mhat.values()) {
                prop_assert!(*v >= 0.0);
            }
        }
    }

    #[test]
    fn config_round_trips(c in config_strategy()) {
        let text = render_config(&c);
        prop_assert_eq!(parse_config(&text).unwrap(), c);
    }
}

fn config_strategy() -> impl Strategy<Value = ScenarioConfig> {
    let opt = |s: std::ops::Range<f64>| prop::option::of(s);
    (
        (1..200usize, 1..100usize, 0.1..4.0f64, 0.01..0.5f64),
        (
            prop::sample::select(vec![
                ParamSource::Constant,
                ParamSource::Gaussian,
                ParamSource::Sinusoidal,
                ParamSource::Swirl,
            ]),
            prop::sample::select(vec![
                ParamSource::Constant,
                ParamSource::Gaussian,
                ParamSource::Sinusoidal,
                ParamSource::Swirl,
            ]),
            0.5..3.0f64,
            0.1..1.0f64,
            0.0..0.1f64,
        ),
        (
            prop::sample::select(Variant::ALL.to_vec()),
            opt(0.0..5.0),
            opt(0.0..40.0),
            prop::option::of(any::<bool>()),
            prop::sample::select(vec![ObserverStart::Uniform, ObserverStart::Manifold]),
            any::<bool>(),
        ),
        (
            1..40usize,
            0.0..0.9f64,
            -5.0..5.0f64,
            0.0..0.05f64,
            1..4usize,
            0..3usize,
        ),
        (1..50u32, 1..5u32, any::<u64>()),
    )
        .prop_map(|(grid, params, obs, clouds, run)| {
            let mut c = ScenarioConfig {
                nx: grid.0,
                ny: grid.1,
                dx: grid.2,
                dt: grid.3,
                ..ScenarioConfig::default()
            };
            (c.k_source, c.m_source, c.k_value, c.m_value, c.param_noise) = params;
            (c.variant, c.kappa, c.s, c.param_diffusion, c.observer_start) = (obs.0, obs.1, obs.2, obs.3, obs.4);
            c.initial = if obs.5 {
                InitialChoice::Random
            } else {
                InitialChoice::Planar
            };
            (c.cloud_count, c.cloud_coverage, c.cloud_speed, c.obs_noise) = (clouds.0, clouds.1, clouds.2, clouds.3);
            c.sensors.patch_w = clouds.4;
            c.sensors.gap = clouds.5;
            let (records, per, seed) = run;
            c.record_every = c.dt * per as f64;
            c.epoch = c.record_every * records as f64;
            c.seed = seed;
            c.swirl_time = c.dt * 100.0;
            c
        })
        .prop_filter("valid configs only", |c| c.validate().is_ok())
}
