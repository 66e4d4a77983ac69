use crate::error::{Error, Result};

/// Row-major 2×2 matrix.
pub type Mat2 = [[f64; 2]; 2];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum JacobianMode {
    /// Drops the `Z` factor from the two grazing derivatives with respect to `P`.
    WithoutZFactor,
    /// Exact derivative of the reaction terms.
    #[default]
    Analytic,
}

/// Jacobian of the reaction terms at `(p, z)`.
pub fn reaction_jacobian(p: f64, z: f64, k: f64, m: f64, h: f64, mode: JacobianMode) -> Result<Mat2> {
    let d = p + h;
    if d == 0.0 || !d.is_finite() {
        return Err(Error::JacobianPole(p));
    }
    let sat = p / d;
    let dsat = h / (d * d);
    let zf = match mode {
        JacobianMode::WithoutZFactor => 1.0,
        JacobianMode::Analytic => z,
    };
    Ok([[1.0 - 2.0 * p - zf * dsat, -sat], [k * zf * dsat, k * sat - m]])
}
