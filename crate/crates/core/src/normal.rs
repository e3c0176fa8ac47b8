//! Standard normal distribution helpers.
//!
//! Everything here goes through the complementary error function from
//! `libm` (the fdlibm/musl rational approximation, well under 1e-15
//! absolute error on the real line), so tail probabilities keep their
//! relative accuracy instead of collapsing to `1 - 1`.

use std::f64::consts::FRAC_1_SQRT_2;

/// Standard normal cumulative distribution function, Φ(x).
///
/// `Φ(0)` is exactly `0.5`, and `Φ(x) + Φ(-x) = 1` up to rounding.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `1 - Φ(x)`, computed without cancellation.
pub fn standard_normal_sf(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Two-sided p-value `2·(1 − Φ(|z|))`, clamped into `[0, 1]`.
///
/// The conventional critical values are 1.959964 (α = 0.05) and
/// 2.575829 (α = 0.01); decisions should compare this p-value with α
/// rather than comparing `|z|` with rounded thresholds.
pub fn two_sided_p_value(z: f64) -> f64 {
    libm::erfc(z.abs() * FRAC_1_SQRT_2).clamp(0.0, 1.0)
}
