//! Number rendering for tables.

/// `%g`-style rendering with `digits` significant digits.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{exp}", trim(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim(&format!("{x:.decimals$}")).to_string()
    }
}

/// Full precision: 17 significant digits.
pub fn full(x: f64) -> String {
    format!("{x:.16e}")
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Markdown table from a header and rows.
pub fn markdown(header: &[String], rows: &[Vec<String>]) -> String {
    let mut s = format!("| {} |\n", header.join(" | "));
    s.push_str(&format!("|{}\n", "---|".repeat(header.len())));
    for r in rows {
        s.push_str(&format!("| {} |\n", r.join(" | ")));
    }
    s
}

pub fn csv(header: &[String], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(sig(-0.02083333333, 6), "-0.0208333");
        assert_eq!(sig(0.994949494949, 6), "0.994949");
        assert_eq!(sig(1.99995000049, 6), "1.99995");
        assert_eq!(sig(1.2494100001e-8, 6), "1.24941e-8");
        assert_eq!(sig(2.0, 6), "2");
        assert_eq!(sig(1234567.0, 6), "1.23457e6");
        assert_eq!(sig(0.0001, 6), "0.0001");
        assert_eq!(sig(0.0, 6), "0");
    }

    #[test]
    fn full_precision_round_trips() {
        for x in [0.1, -2.0208333333333335, 1.2494e-8, std::f64::consts::PI] {
            assert_eq!(full(x).parse::<f64>().unwrap(), x);
        }
    }
}
