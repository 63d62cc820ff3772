//! Fixed float formatting for text outputs.
//!
//! Every text artifact writes floats with 9 significant digits in the style
//! of C's `%.9g`, so files are byte-identical across runs and platforms.

/// Format `x` like `%.9g`: 9 significant digits, trailing zeros trimmed,
/// scientific notation outside `1e-4 <= |x| < 1e9`.
pub fn g9(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    // Rounding to 9 significant digits first fixes the decimal exponent.
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (DIGITS - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `g9` for optional values; `None` becomes an empty field.
pub fn g9_opt(x: Option<f64>) -> String {
    x.map(g9).unwrap_or_default()
}
