//! CSV plumbing shared by the rate reports and the command-line front end.
//!
//! Floats are written like C's `%.17g`: 17 significant digits, so every
//! value parses back to the identical `f64`, and no locale is involved.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// `%.17g`-style formatting.
pub fn fmt_g17(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => ("-", rest.replace('.', "")),
        None => ("", mantissa.replace('.', "")),
    };
    if (-5..17).contains(&exp) {
        let mut out = String::from(sign);
        if exp < 0 {
            out.push_str("0.");
            out.extend(std::iter::repeat_n('0', (-exp - 1) as usize));
            out.push_str(&digits);
        } else {
            let split = exp as usize + 1;
            out.push_str(&digits[..split]);
            out.push('.');
            out.push_str(&digits[split..]);
        }
        let trimmed = out.trim_end_matches('0').trim_end_matches('.');
        trimmed.to_string()
    } else {
        let mut m = String::from(&digits[..1]);
        let rest = digits[1..].trim_end_matches('0');
        if !rest.is_empty() {
            m.push('.');
            m.push_str(rest);
        }
        let esign = if exp < 0 { '-' } else { '+' };
        format!("{sign}{m}e{esign}{:02}", exp.abs())
    }
}

pub fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("not a number: '{}'", s.trim())))
}

/// Comma-separated list of floats.
pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(parse_f64).collect()
}

/// Writes a header line followed by rows of floats, with a leading integer
/// index column when `index` is set.
pub fn write_table(header: &str, rows: impl IntoIterator<Item = Vec<f64>>, index: bool) -> String {
    let mut out = String::with_capacity(1024);
    out.push_str(header);
    out.push('\n');
    for (i, row) in rows.into_iter().enumerate() {
        if index {
            write!(out, "{i}").unwrap();
            if !row.is_empty() {
                out.push(',');
            }
        }
        let cells: Vec<String> = row.iter().map(|v| fmt_g17(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Parses `2^-a..2^-b` (every integer power in between, in that order) or an
/// explicit comma list.
pub fn parse_eta_grid(s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if let Some((lo, hi)) = s.split_once("..") {
        let a = dyadic_exponent(lo)?;
        let b = dyadic_exponent(hi)?;
        let step = if b >= a { 1 } else { -1 };
        let mut k = a;
        let mut grid = vec![2f64.powi(k)];
        while k != b {
            k += step;
            grid.push(2f64.powi(k));
        }
        return Ok(grid);
    }
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| match dyadic_exponent(t) {
            Ok(k) => Ok(2f64.powi(k)),
            Err(_) => parse_f64(t),
        })
        .collect()
}

fn dyadic_exponent(s: &str) -> Result<i32> {
    let t = s.trim();
    let body = t
        .strip_prefix("2^")
        .ok_or_else(|| Error::Parse(format!("expected 2^k, got '{t}'")))?;
    let body = body.trim_start_matches('(').trim_end_matches(')');
    body.parse::<i32>()
        .map_err(|_| Error::Parse(format!("bad dyadic exponent in '{t}'")))
}
