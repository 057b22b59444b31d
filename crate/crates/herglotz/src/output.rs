//! Number formatting shared by the CSV and JSON writers.

/// Significant digits in text output.
pub const SIG_DIGITS: usize = 12;

/// `v` with 12 significant digits, trailing zeros trimmed. Fixed notation for exponents in
/// `[-5, 12)`, scientific otherwise.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    // round first so that the exponent reflects the rounded value (9.9999999999995 -> 10)
    let sci = format!("{:.*e}", SIG_DIGITS - 1, v);
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..SIG_DIGITS as i32).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim(mant.to_string()))
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}
