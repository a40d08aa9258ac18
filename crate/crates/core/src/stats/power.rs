use super::dist::normal_quantile;
use super::{Sided, StatsError};

/// Per-arm sample size for a two-sample comparison of means with
/// standardized effect `d`, from the normal approximation
/// `n = 2 (z_alpha + z_beta)^2 / d^2`, rounded up and at least 2.
pub fn power_sample_size(d: f64, alpha: f64, power: f64, sided: Sided) -> Result<u32, StatsError> {
    if !(d.is_finite() && d != 0.0) {
        return Err(StatsError::InvalidParams(format!("effect size {d}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(StatsError::InvalidParams(format!("alpha {alpha}")));
    }
    if !(power > 0.0 && power < 1.0) {
        return Err(StatsError::InvalidParams(format!("power {power}")));
    }
    let tail = match sided {
        Sided::One => alpha,
        Sided::Two => alpha / 2.0,
    };
    let z = normal_quantile(1.0 - tail) + normal_quantile(power);
    let n = 2.0 * z * z / (d * d);
    // guard against 63.0000000001 style rounding from the quantiles
    let n = (n - 1e-9).ceil().max(2.0);
    Ok(n as u32)
}
