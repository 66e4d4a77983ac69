use super::jacobian::JacobianMode;
use super::laplacian::{build_l1, build_l2};
use super::operator::{assemble_linearized, CouplingMatrices};
use super::transverse::{transverse_stability, StabilityOptions, TransverseBasis};
use crate::ecology::{drive_step, DriveParams, DriveState};
use crate::error::Result;
use crate::field::GridSpec;
use crate::occlusion::{advect_mask, CloudMask};

/// Transverse exponent along the drive trajectory from `drive0`.
///
/// The linearization is refreshed every step from the current drive state
/// and the clouds advected to the current time. `opts.dt` is replaced by the
/// grid step so the trajectory and the perturbation advance together.
pub fn trajectory_exponent(
    g: &GridSpec,
    params: &DriveParams,
    drive0: &DriveState,
    clouds: &CloudMask,
    kappa: f64,
    mode: JacobianMode,
    opts: &StabilityOptions,
) -> Result<f64> {
    let l1 = build_l1(g);
    let cm = CouplingMatrices::new(g, kappa);
    let basis = TransverseBasis::new(2 * g.len())?;
    let opts = StabilityOptions {
        dt: g.dt,
        ..opts.clone()
    };
    let mut drive = drive0.clone();
    transverse_stability(
        |step| {
            if step > 0 {
                drive = drive_step(&drive, params, g)?;
            }
            let mask = advect_mask(clouds, step as f64 * g.dt);
            assemble_linearized(&drive, params, &l1, &build_l2(&mask), &cm, mode)
        },
        &basis,
        &opts,
    )
}
