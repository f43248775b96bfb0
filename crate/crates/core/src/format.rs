//! Number formatting for CSV outputs: 17 significant digits, `.` separator,
//! trailing zeros trimmed, scientific notation only for very small or very
//! large magnitudes (the same rule as C's `%.17g`).

pub fn sig17(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    // Round to 17 significant digits first, then pick the layout from the
    // exponent of the rounded value.
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("`e` format always has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if !(-5..17).contains(&exp) {
        return format!("{}e{}", trim_zeros(mantissa), exp);
    }
    let decimals = (16 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
