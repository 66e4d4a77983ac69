use super::laplacian::{build_l1, build_l2, SparseLaplacian};
use super::operator::CouplingMatrices;
use crate::ecology::{drive_step, reaction, DriveParams, DriveState};
use crate::error::{Error, Result};
use crate::field::{clamp, Field, GridSpec};
use crate::observer::{response_step_occluded, ObserverConfig, ObserverState, Variant};
use crate::occlusion::CloudMask;

/// Largest grid the dense-free network check is meant for.
pub const MAX_EQUIVALENCE_NODES: usize = 256;

/// Nonlinear network right-hand side on interleaved node states.
fn network_rhs(
    u: &[f64],
    params: &DriveParams,
    l1: &SparseLaplacian,
    l2: &SparseLaplacian,
    cm: &CouplingMatrices,
    out: &mut [f64],
) {
    let n = params.k.values().len();
    let (k, m) = (params.k.values(), params.m.values());
    for node in 0..2 * n {
        let q = node % n;
        let (p, z) = (u[2 * node], u[2 * node + 1]);
        let (mut fp, mut fz) = reaction(p, z, k[q], m[q], params.h);
        let (mut d0, mut d1) = (0.0, 0.0);
        for (c, v) in l1.row(node) {
            d0 += v * u[2 * c];
            d1 += v * u[2 * c + 1];
        }
        let mut s0 = 0.0;
        for (c, v) in l2.row(node) {
            s0 += v * u[2 * c];
        }
        fp += -cm.sigma1 * d0 + cm.sigma2 * s0;
        fz += -cm.sigma1 * d1;
        out[2 * node] = fp;
        out[2 * node + 1] = fz;
    }
}

/// Step the drive-response pair both as a `2N`-oscillator network and
/// through the field solvers, from the same start, and report the largest
/// absolute state difference seen.
pub fn verify_network_equivalence(
    g: &GridSpec,
    params: &DriveParams,
    kappa: f64,
    mask: &CloudMask,
    drive0: &DriveState,
    response0: (&Field, &Field),
    steps: usize,
) -> Result<f64> {
    let n = g.len();
    if n > MAX_EQUIVALENCE_NODES {
        return Err(Error::InvalidArgument(format!(
            "network check is limited to {MAX_EQUIVALENCE_NODES} cells, got {n}"
        )));
    }
    let cfg = ObserverConfig {
        kappa,
        h: params.h,
        ..ObserverConfig::for_variant(Variant::OccludedSync)
    };
    let l1 = build_l1(g);
    let l2 = build_l2(mask);
    let cm = CouplingMatrices::new(g, kappa);

    let mut u = vec![0.0; 4 * n];
    let fields = [
        drive0.p.values(),
        drive0.z.values(),
        response0.0.values(),
        response0.1.values(),
    ];
    for q in 0..n {
        u[2 * q] = fields[0][q];
        u[2 * q + 1] = fields[1][q];
        u[2 * (n + q)] = fields[2][q];
        u[2 * (n + q) + 1] = fields[3][q];
    }
    let mut drive = drive0.clone();
    let mut resp = ObserverState {
        phat: response0.0.clone(),
        zhat: response0.1.clone(),
        khat: params.k.clone(),
        mhat: params.m.clone(),
        t: drive0.t,
    };

    let mut rhs = vec![0.0; 4 * n];
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        network_rhs(&u, params, &l1, &l2, &cm, &mut rhs);
        for (x, d) in u.iter_mut().zip(&rhs) {
            *x += g.dt * d;
        }
        for x in &mut u[2 * n..] {
            *x = clamp(*x, cfg.clamp_lo, cfg.clamp_hi);
        }
        resp = response_step_occluded(&resp, &drive.p, mask, &cfg, g)?;
        drive = drive_step(&drive, params, g)?;

        let pde = [
            drive.p.values(),
            drive.z.values(),
            resp.phat.values(),
            resp.zhat.values(),
        ];
        for q in 0..n {
            let pairs = [
                (u[2 * q], pde[0][q]),
                (u[2 * q + 1], pde[1][q]),
                (u[2 * (n + q)], pde[2][q]),
                (u[2 * (n + q) + 1], pde[3][q]),
            ];
            for (a, b) in pairs {
                worst = worst.max((a - b).abs());
            }
        }
    }
    Ok(worst)
}
