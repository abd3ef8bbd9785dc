//! Number formatting shared by CSV writers and human-readable tables.

/// Lossless text form: the shortest decimal that parses back to the same
/// `f64`. Infinities print as `inf`/`-inf`.
pub fn full(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x}")
    }
}

/// Six significant digits, `%g` style: fixed notation for moderate
/// magnitudes, scientific outside `[1e-4, 1e6)`.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return full(x);
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    // rounding may carry into the next decade
    let rounded: f64 = format!("{x:.5e}").parse().unwrap_or(x);
    let exp = if rounded.abs() >= 10f64.powi(exp + 1) {
        exp + 1
    } else {
        exp
    };
    if !(-4..6).contains(&exp) {
        let s = format!("{x:.5e}");
        let (mant, e) = s.split_once('e').expect("exponent");
        format!("{}e{}", trim_zeros(mant), e)
    } else {
        let decimals = (5 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
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
    use proptest::prelude::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(2.0 / 3.0), "0.666667");
        assert_eq!(sig6(600.0), "600");
        assert_eq!(sig6(271_739.130_434_782_6), "271739");
        assert_eq!(sig6(54_347_826.086_956_52), "5.43478e7");
        assert_eq!(sig6(999_999.7), "1e6");
        assert_eq!(sig6(0.000_012_345_67), "1.23457e-5");
        assert_eq!(sig6(-9.0), "-9");
        assert_eq!(sig6(0.0), "0");
    }

    #[test]
    fn full_precision_markers() {
        assert_eq!(full(f64::INFINITY), "inf");
        assert_eq!(full(600.0), "600");
        assert_eq!(full(0.1), "0.1");
    }

    proptest! {
        #[test]
        fn full_round_trips(x in proptest::num::f64::NORMAL) {
            prop_assert_eq!(full(x).parse::<f64>().unwrap(), x);
        }
    }
}
