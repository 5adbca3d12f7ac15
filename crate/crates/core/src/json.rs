//! Pretty JSON output in which every real carries at least 12 significant
//! digits and parses back to the identical `f64`.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};

pub const MIN_SIGNIFICANT_DIGITS: usize = 12;

/// Shortest round-trip digits, zero-padded to [`MIN_SIGNIFICANT_DIGITS`].
pub fn format_real(x: f64) -> String {
    if x == 0.0 {
        return format!("{:.*}", MIN_SIGNIFICANT_DIGITS - 1, 0.0);
    }
    let sci = format!("{x:e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let digits = mantissa.chars().filter(char::is_ascii_digit).count();
    let sig = digits.max(MIN_SIGNIFICANT_DIGITS) as i32;
    if (-5..=15).contains(&exp) {
        format!("{:.*}", (sig - 1 - exp).max(1) as usize, x)
    } else {
        format!("{:.*e}", (sig - 1) as usize, x)
    }
}

struct PreciseFormatter<'a>(PrettyFormatter<'a>);

impl Formatter for PreciseFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_real(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn end_object_key<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_key(writer)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

/// Serializes `value` as indented JSON with a trailing newline.
pub fn to_string_precise<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, PreciseFormatter(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Consistency(format!("JSON serialization failed: {e}")))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Consistency(format!("JSON output is not UTF-8: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn significant_digits(s: &str) -> usize {
        let mantissa = s.split(['e', 'E']).next().unwrap();
        let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
        digits.trim_start_matches('0').len()
    }

    #[test]
    fn pads_short_values() {
        assert_eq!(format_real(0.925), "0.925000000000");
        assert_eq!(format_real(1.0), "1.00000000000");
        assert_eq!(format_real(-0.5), "-0.500000000000");
        assert_eq!(format_real(0.0), "0.00000000000");
        assert_eq!(format_real(40.0), "40.0000000000");
    }

    #[test]
    fn round_trips_and_keeps_twelve_digits() {
        let samples = [
            0.1,
            1.0 / 3.0,
            std::f64::consts::PI,
            0.90625,
            1e-12,
            -2.5e-7,
            6.02214076e23,
            f64::MIN_POSITIVE,
            f64::MAX,
            0.1 + 0.2,
            123456.789,
        ];
        for &x in &samples {
            let s = format_real(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            assert!(significant_digits(&s) >= MIN_SIGNIFICANT_DIGITS, "{s}");
            let parsed: f64 = serde_json::from_str(&s).unwrap();
            assert_eq!(parsed, x, "{s}");
        }
    }

    #[test]
    fn nested_output_parses_back() {
        let value = serde_json::json!({"a": [0.25, 1, {"b": 1e-20}], "c": "x"});
        let text = to_string_precise(&value).unwrap();
        assert!(text.contains("0.250000000000"));
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back, value);
    }
}
