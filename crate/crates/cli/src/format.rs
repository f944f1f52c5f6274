//! Number formatting for the CSV outputs.

/// Scientific notation with 6 significant digits and a signed two-digit
/// exponent: `1.23457e-03`.
pub fn sci(x: f64) -> String {
    sci_with(x, 5, 'e')
}

/// Two significant digits, upper-case exponent: `1.7E+00`. This is the
/// layout of published comparison tables.
pub fn sci_paper(x: f64) -> String {
    sci_with(x, 1, 'E')
}

fn sci_with(x: f64, decimals: usize, marker: char) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let raw = format!("{x:.decimals$e}");
    let (mantissa, exp) = raw
        .split_once('e')
        .expect("`e` formatting always has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}{marker}{sign}{:02}", exp.abs())
}

/// Four-decimal p-values for the compact table layout.
pub fn fixed4(p: f64) -> String {
    format!("{p:.4}")
}

/// Parses values produced by [`sci`] / [`sci_paper`] (and anything else
/// `f64::from_str` accepts).
pub fn parse_number(s: &str) -> Option<f64> {
    s.trim().parse().ok()
}
