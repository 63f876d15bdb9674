//! Plain-text tensor files.
//!
//! ```text
//! # comment
//! 2              # m
//! 1 1/2          # speeds c_1 .. c_m
//! 1 1 1 0 0 0 1  # i j k alpha beta gamma value   (families 1-based)
//! ```
//!
//! Values are exact: integers, `p/q`, or finite decimals (`0.25`, `-1.5e-2`).

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::{CoeffTensor, Rational, SpeedVector, TensorError};

#[derive(Debug, Clone, PartialEq)]
pub struct TensorFile {
    pub speeds: SpeedVector,
    pub tensor: CoeffTensor,
}

fn perr(line: usize, msg: impl Into<String>) -> TensorError {
    TensorError::Parse { line, msg: msg.into() }
}

/// Parses an exact rational from `p`, `p/q` or a decimal literal.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(Rational::new(p, q));
    }
    if let Ok(n) = s.parse::<BigInt>() {
        return Some(Rational::from_integer(n));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], s[p + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut r = Rational::from_integer(digits);
    if scale >= 0 {
        r *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Some(if neg { -r } else { r })
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(n, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((n + 1, l))
    })
}

/// Parses a tensor file. Speeds may repeat (non-increasing); whether that is
/// acceptable is left to the caller.
pub fn parse_tensor_file(text: &str) -> Result<TensorFile, TensorError> {
    let mut lines = data_lines(text);
    let (ln, first) = lines.next().ok_or_else(|| perr(0, "empty tensor file"))?;
    let m: usize = first.parse().map_err(|_| perr(ln, format!("expected m, found {first:?}")))?;
    let mut tensor = CoeffTensor::zeros(m).map_err(|e| perr(ln, e.to_string()))?;

    let (ln, speed_line) = lines.next().ok_or_else(|| perr(ln, "missing speed line"))?;
    let speeds = speed_line
        .split_whitespace()
        .map(|s| parse_rational(s).ok_or_else(|| perr(ln, format!("bad speed {s:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if speeds.len() != m {
        return Err(perr(ln, format!("expected {m} speeds, found {}", speeds.len())));
    }
    let speeds = SpeedVector::with_repeats(speeds).map_err(|e| perr(ln, e.to_string()))?;

    let mut seen = BTreeSet::new();
    for (ln, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 7 {
            return Err(perr(ln, "entry needs 7 fields: i j k alpha beta gamma value"));
        }
        let mut idx = [0usize; 6];
        for (slot, p) in parts[..6].iter().enumerate() {
            let v: usize = p.parse().map_err(|_| perr(ln, format!("bad index {p:?}")))?;
            if slot < 3 {
                if v == 0 || v > m {
                    return Err(perr(ln, format!("family index {v} not in 1..={m}")));
                }
                idx[slot] = v - 1;
            } else {
                if v > 3 {
                    return Err(perr(ln, format!("derivative index {v} not in 0..=3")));
                }
                idx[slot] = v;
            }
        }
        let value = parse_rational(parts[6]).ok_or_else(|| perr(ln, format!("bad value {:?}", parts[6])))?;
        let key = (idx[0], idx[1], idx[2], idx[3], idx[4], idx[5]);
        if !seen.insert(key) {
            return Err(perr(ln, "duplicate entry"));
        }
        tensor.set(key, value);
    }
    Ok(TensorFile { speeds, tensor })
}

/// `p` or `p/q`, the form [`parse_rational`] reads back exactly.
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// One entry line `i j k alpha beta gamma value` (families 1-based).
pub fn format_entry((i, j, k, a, b, g): super::TensorIndex, v: &Rational) -> String {
    format!("{} {} {} {} {} {} {}", i + 1, j + 1, k + 1, a, b, g, format_rational(v))
}

pub fn write_tensor_file(file: &TensorFile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# m, speeds, then: i j k alpha beta gamma value");
    let _ = writeln!(out, "{}", file.tensor.m());
    let speeds: Vec<String> = file.speeds.exact().iter().map(format_rational).collect();
    let _ = writeln!(out, "{}", speeds.join(" "));
    for (idx, v) in file.tensor.nonzero() {
        let _ = writeln!(out, "{}", format_entry(idx, v));
    }
    out
}
