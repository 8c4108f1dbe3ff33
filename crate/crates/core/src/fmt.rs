//! Stable float formatting for CSV artifacts.

/// Formats `x` with 12 significant digits, `%.12g` style.
pub fn g12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa.to_string()), exp.abs())
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::g12;

    #[test]
    fn matches_printf_g() {
        assert_eq!(g12(0.0), "0");
        assert_eq!(g12(2.0), "2");
        assert_eq!(g12(-1.5), "-1.5");
        assert_eq!(g12(0.6180339887498949), "0.61803398875");
        assert_eq!(g12(1.0 / 3.0), "0.333333333333");
        assert_eq!(g12(123456789012.0), "123456789012");
        assert_eq!(g12(1234567890123.0), "1.23456789012e+12");
        assert_eq!(g12(1.25e-7), "1.25e-07");
        assert_eq!(g12(0.0001), "0.0001");
    }
}
