//! Number formatting shared by the text reports.

/// Decimal (non-scientific) rendering with 10 significant digits.
pub fn sig10(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    let decimals = (9 - exp).max(0) as usize;
    format!("{x:.decimals$}")
}
