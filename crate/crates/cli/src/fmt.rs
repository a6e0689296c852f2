//! Deterministic numeric formatting: 9 significant digits, '.' decimal,
//! trailing zeros trimmed. No locale dependence anywhere.

pub fn fmt9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let mag = x.abs().log10().floor() as i32;
    let decimals = (8 - mag).clamp(0, 17) as usize;
    let s = format!("{:.*}", decimals, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt9).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt9(0.0), "0");
        assert_eq!(fmt9(1.0), "1");
        assert_eq!(fmt9(1.721_928_094_887_362), "1.72192809");
        assert_eq!(fmt9(0.00123456789), "0.00123456789");
        assert_eq!(fmt9(-0.5), "-0.5");
        assert_eq!(fmt9(2.443_856_189_774_724), "2.44385619");
    }
}
