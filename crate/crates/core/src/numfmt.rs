//! Decimal float text that parses back to the same bits.

/// Seventeen significant digits in scientific notation. Non-finite values
/// print as `NaN`, `inf` and `-inf`.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}
