//! Plain-text serialization helpers shared by reports and the command line.

use std::io::{self, Write};

use crate::evaluator::GraphSample;

/// Formats like C's `%.17g`: 17 significant digits, trailing zeros dropped.
///
/// Parsing the result back yields the identical `f64`.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub const SAMPLE_CSV_HEADER: &str = "t_x,t_y,s_x,s_y,f";

/// Writes samples as CSV with a header row and LF line endings.
pub fn write_samples_csv<'a, W: Write>(
    out: &mut W,
    samples: impl IntoIterator<Item = &'a GraphSample>,
) -> io::Result<usize> {
    writeln!(out, "{SAMPLE_CSV_HEADER}")?;
    let mut rows = 0;
    for p in samples {
        write_sample_row(out, p)?;
        rows += 1;
    }
    Ok(rows)
}

pub fn write_sample_row<W: Write>(out: &mut W, p: &GraphSample) -> io::Result<()> {
    writeln!(
        out,
        "{},{},{},{},{}",
        fmt_g17(p.t.x),
        fmt_g17(p.t.y),
        fmt_g17(p.s.x),
        fmt_g17(p.s.y),
        fmt_g17(p.value)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn matches_printf() {
        assert_eq!(fmt_g17(0.0), "0");
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(0.5), "0.5");
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(-2.75), "-2.75");
        assert_eq!(fmt_g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(fmt_g17(0.0001), "0.0001");
        assert_eq!(fmt_g17(1e17), "1e+17");
        assert_eq!(fmt_g17(123456789012345680.0), "1.2345678901234568e+17");
        assert_eq!(fmt_g17(3.0f64.sqrt() / 2.0), "0.8660254037844386");
    }

    proptest! {
        #[test]
        fn round_trips(x in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let back: f64 = fmt_g17(x).parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
        }
    }

    #[test]
    fn csv_layout() {
        let p = GraphSample {
            t: crate::gasket::Point::new(0.0, 0.0),
            s: crate::gasket::Point::new(1.0, 0.5),
            value: 0.25,
        };
        let mut buf = Vec::new();
        assert_eq!(write_samples_csv(&mut buf, [&p]).unwrap(), 1);
        assert_eq!(String::from_utf8(buf).unwrap(), "t_x,t_y,s_x,s_y,f\n0,0,1,0.5,0.25\n");
    }
}
