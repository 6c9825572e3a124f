//! Decimal formatting used by every CSV writer in the crate.

/// Formats `v` with `digits` significant digits.
///
/// Plain positional notation is used for magnitudes in `[1e-4, 1e15)`;
/// anything else falls back to scientific notation so the digit count is kept.
pub fn sig(v: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-4..15).contains(&exp) {
        return format!("{:.*e}", digits - 1, v);
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let s = format!("{v:.decimals$}");
    // rounding may carry into a new leading digit (9.99.. -> 10.0..)
    let carried = s.parse::<f64>().is_ok_and(|r| r.abs() >= 10f64.powi(exp + 1));
    if carried && decimals > 0 {
        return format!("{:.*}", decimals - 1, v);
    }
    s
}
