//! Line-oriented text records: `kind key=value key=value ...`.
//!
//! Values never contain whitespace. Vectors are comma-separated; complex
//! matrices are row-major `re:im` lists, with `;` between direct-sum blocks.

use std::fmt;

use crate::error::{Error, Result};
use crate::matcore::{CMatrix, C64};

/// Formats `v` with `digits` significant digits, like C's `%.{digits}g`.
pub fn fmt_sig(v: f64, digits: usize) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{}e{exp}", strip_zeros(mantissa))
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Float formatting mode for records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Precision {
    /// 17 significant digits, enough to round-trip.
    Full,
    /// 6 significant digits.
    Human,
}

impl Precision {
    pub fn digits(self) -> usize {
        match self {
            Precision::Full => 17,
            Precision::Human => 6,
        }
    }

    pub fn num(self, v: f64) -> String {
        fmt_sig(v, self.digits())
    }

    pub fn vec(self, v: &[f64]) -> String {
        v.iter().map(|x| self.num(*x)).collect::<Vec<_>>().join(",")
    }

    pub fn matrix(self, m: &CMatrix) -> String {
        let mut parts = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                parts.push(format!("{}:{}", self.num(z.re), self.num(z.im)));
            }
        }
        parts.join(",")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub kind: String,
    pub fields: Vec<(String, String)>,
}

impl Record {
    pub fn new(kind: &str) -> Self {
        Self {
            kind: kind.into(),
            fields: Vec::new(),
        }
    }

    pub fn field(mut self, key: &str, value: impl Into<String>) -> Self {
        self.fields.push((key.into(), value.into()));
        self
    }

    pub fn get(&self, key: &str) -> Result<&str> {
        self.fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
            .ok_or_else(|| Error::Parse(format!("{} record lacks {key}", self.kind)))
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        parse_f64(self.get(key)?)
    }

    pub fn get_usize(&self, key: &str) -> Result<usize> {
        let v = self.get(key)?;
        v.parse()
            .map_err(|e| Error::Parse(format!("{key}={v}: {e}")))
    }

    pub fn get_vec(&self, key: &str) -> Result<Vec<f64>> {
        parse_vec(self.get(key)?)
    }

    pub fn parse(line: &str) -> Result<Self> {
        let mut tokens = line.split_whitespace();
        let kind = tokens
            .next()
            .ok_or_else(|| Error::Parse("empty record".into()))?;
        let mut rec = Record::new(kind);
        for t in tokens {
            let (k, v) = t
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("token {t:?} is not key=value")))?;
            rec.fields.push((k.into(), v.into()));
        }
        Ok(rec)
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        for (k, v) in &self.fields {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

pub fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("{s:?}: {e}")))
}

pub fn parse_vec(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_f64).collect()
}

pub fn parse_vec3(s: &str) -> Result<[f64; 3]> {
    let v = parse_vec(s)?;
    <[f64; 3]>::try_from(v).map_err(|v| Error::Parse(format!("expected 3 values, got {}", v.len())))
}

/// Parses a square `re:im` list.
pub fn parse_matrix(s: &str) -> Result<CMatrix> {
    let entries: Vec<C64> = s
        .split(',')
        .map(|e| {
            let (re, im) = e
                .split_once(':')
                .ok_or_else(|| Error::Parse(format!("entry {e:?} is not re:im")))?;
            Ok(C64::new(parse_f64(re)?, parse_f64(im)?))
        })
        .collect::<Result<_>>()?;
    let n = (entries.len() as f64).sqrt().round() as usize;
    if n * n != entries.len() {
        return Err(Error::Parse(format!(
            "{} entries do not form a square matrix",
            entries.len()
        )));
    }
    Ok(CMatrix::from_row_slice(n, n, &entries))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.5, 17), "0.5");
        assert_eq!(fmt_sig(0.0, 6), "0");
        assert_eq!(fmt_sig(1.0 / 3.0, 6), "0.333333");
        assert_eq!(fmt_sig(1.0 / 3.0, 17), "0.33333333333333331");
        assert_eq!(fmt_sig(1e-7, 6), "1e-7");
        assert_eq!(fmt_sig(-2.5e10, 6), "-2.5e10");
        assert_eq!(fmt_sig(123456.0, 6), "123456");
        assert_eq!(fmt_sig(1234567.0, 6), "1.23457e6");
        assert_eq!(fmt_sig(0.000123, 6), "0.000123");
    }

    #[test]
    fn full_precision_round_trips() {
        let mut x = 0.1f64;
        for _ in 0..1000 {
            x = (x * 7.77 + 0.123).fract() * 10f64.powi((x * 40.0) as i32 - 20);
            assert_eq!(parse_f64(&fmt_sig(x, 17)).unwrap(), x);
        }
    }

    #[test]
    fn record_round_trip() {
        let r = Record::new("certificate")
            .field("verdict", "member")
            .field("p", Precision::Full.vec(&[0.25, 0.5, 1.0 / 3.0]));
        let back = Record::parse(&r.to_string()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.get_vec("p").unwrap(), vec![0.25, 0.5, 1.0 / 3.0]);
        assert!(back.get("missing").is_err());
        assert!(Record::parse("kind novalue").is_err());
    }

    #[test]
    fn matrix_round_trip() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(0.5, 0.0), C64::new(0.1, -0.2), C64::new(0.1, 0.2), C64::new(0.5, 0.0)],
        );
        let s = Precision::Full.matrix(&m);
        assert_eq!(parse_matrix(&s).unwrap(), m);
        assert!(parse_matrix("1:0,0:0,0:0").is_err());
    }
}
