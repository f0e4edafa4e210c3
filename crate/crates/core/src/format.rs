//! Number formatting shared by reports and CSV writers.

/// `%.12g`-style formatting: 12 significant digits, trailing zeros trimmed,
/// scientific notation outside `[1e-5, 1e12)`.
pub fn fmt_sig12(x: f64) -> String {
    fmt_sig(x, 12)
}

pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    // rounding may bump the exponent; read it back
    let (mant, e) = sci.split_once('e').expect("exponent");
    let e: i32 = e.parse().expect("exponent digits");
    if e < -5 || e >= digits as i32 {
        let mant = trim_zeros(mant);
        let sign = if e < 0 { "-" } else { "+" };
        return format!("{mant}e{sign}{:02}", e.abs());
    }
    let decimals = (digits as i32 - 1 - e).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        assert_eq!(fmt_sig12(0.0), "0");
        assert_eq!(fmt_sig12(0.25), "0.25");
        assert_eq!(fmt_sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig12(0.7416119972858434), "0.741611997286");
        assert_eq!(fmt_sig12(-2.0), "-2");
        assert_eq!(fmt_sig12(1.5e-7), "1.5e-07");
        assert_eq!(fmt_sig12(1e12), "1e+12");
        assert_eq!(fmt_sig12(123456.0), "123456");
        assert_eq!(fmt_sig12(0.9999999999999), "1");
    }
}
