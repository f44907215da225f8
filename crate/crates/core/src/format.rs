//! Fixed, platform-independent number formatting for emitted files.

/// `%g`-style formatting with six significant digits: trailing zeros trimmed,
/// scientific notation only for exponents below -4 or above 5.
pub fn sig6(x: f64) -> String {
    const P: i32 = 6;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (P - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Fraction as an integer percentage, rounded half up.
pub fn percent_half_up(fraction: f64) -> i64 {
    // Scale in two steps so values like 0.285 (stored as 0.28499999...) still
    // land on the intended decimal.
    let scaled = (fraction * 1e6).round() / 1e4;
    (scaled + 0.5).floor() as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_matches_printf_g() {
        assert_eq!(sig6(0.0), "0");
        assert_eq!(sig6(1435.0), "1435");
        assert_eq!(sig6(0.1), "0.1");
        assert_eq!(sig6(2.0 / 3.0), "0.666667");
        assert_eq!(sig6(123456.7), "123457");
        assert_eq!(sig6(1234567.0), "1.23457e+06");
        assert_eq!(sig6(0.0000123), "1.23e-05");
        assert_eq!(sig6(-3.25), "-3.25");
        assert_eq!(sig6(999999.5), "1e+06");
        assert_eq!(sig6(99999.95), "99999.9");
    }

    #[test]
    fn half_up_percentages() {
        assert_eq!(percent_half_up(0.785), 79);
        assert_eq!(percent_half_up(0.784), 78);
        assert_eq!(percent_half_up(1.0), 100);
        assert_eq!(percent_half_up(0.0), 0);
        assert_eq!(percent_half_up(0.685), 69);
    }
}
