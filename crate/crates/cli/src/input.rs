//! Exact parsing of command-line and file inputs. There is no float path.

use std::path::Path;
use std::str::FromStr;

use num_bigint::BigInt;
use serde_json::Value;

use kummer_core::exact::{PadicResidue, Rational};

#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub type Parsed<T> = Result<T, UsageError>;

fn usage<T>(msg: impl Into<String>) -> Parsed<T> {
    Err(UsageError(msg.into()))
}

pub fn parse_int(s: &str) -> Parsed<BigInt> {
    BigInt::from_str(s.trim()).map_err(|_| UsageError(format!("not an integer: {s:?}")))
}

/// `"n"` or `"n/d"` with `d != 0`.
pub fn parse_rational(s: &str) -> Parsed<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let (n, d) = (parse_int(n)?, parse_int(d)?);
            if d == BigInt::from(0) {
                return usage(format!("zero denominator in {s:?}"));
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(parse_int(s)?)),
    }
}

/// Comma- or whitespace-separated list.
pub fn split_list(s: &str) -> Vec<&str> {
    s.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).collect()
}

pub fn parse_rational_list(s: &str) -> Parsed<Vec<Rational>> {
    split_list(s).into_iter().map(parse_rational).collect()
}

pub fn parse_int_list(s: &str) -> Parsed<Vec<BigInt>> {
    split_list(s).into_iter().map(parse_int).collect()
}

/// `R:N`, the residue `R mod p^N`.
pub fn parse_residue(p: u64, s: &str) -> Parsed<PadicResidue> {
    let Some((r, n)) = s.split_once(':') else {
        return usage(format!("expected RESIDUE:PRECISION, got {s:?}"));
    };
    let n: u32 = n.trim().parse().map_err(|_| UsageError(format!("bad precision in {s:?}")))?;
    Ok(PadicResidue::new(p, n, parse_int(r)?))
}

fn json_scalar(v: &Value) -> Parsed<Rational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) if n.is_i64() || n.is_u64() => parse_rational(&n.to_string()),
        other => usage(format!("expected an exact number or \"p/q\" string, got {other}")),
    }
}

fn json_list(v: &Value) -> Parsed<Vec<Rational>> {
    match v {
        Value::Array(items) => items.iter().map(json_scalar).collect(),
        Value::Object(map) => match map.get("values") {
            Some(values) => json_list(values),
            None => usage("sequence object lacks \"values\""),
        },
        _ => usage("expected a JSON array of values"),
    }
}

/// Reads a sequence from a file: a JSON array, a JSON object holding one of
/// `keys`, or plain comma/whitespace-separated text.
pub fn read_sequence_file(path: &Path, keys: &[&str]) -> Parsed<Vec<Rational>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(map)) => {
            for key in keys {
                if let Some(v) = map.get(*key) {
                    return json_list(v);
                }
            }
            usage(format!("{} has none of the keys {keys:?}", path.display()))
        }
        Ok(v @ Value::Array(_)) => json_list(&v),
        _ => parse_rational_list(&text),
    }
}

pub fn to_integers(values: &[Rational]) -> Parsed<Vec<BigInt>> {
    values
        .iter()
        .map(|v| {
            if v.is_integer() {
                Ok(v.to_integer())
            } else {
                usage(format!("{v} is not an integer"))
            }
        })
        .collect()
}

/// One `--set` assignment for the `Psi^(0)` parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamSet {
    /// `lK=INT`
    Integer { k: u64, value: BigInt },
    /// `lK@P=R:N`
    Residue { k: u64, residue: PadicResidue },
}

pub fn parse_param(s: &str) -> Parsed<ParamSet> {
    let Some((lhs, rhs)) = s.split_once('=') else {
        return usage(format!("expected lK=INT or lK@P=R:N, got {s:?}"));
    };
    let Some(index) = lhs.trim().strip_prefix('l') else {
        return usage(format!("parameter name must start with 'l': {s:?}"));
    };
    let bad = || UsageError(format!("bad parameter name in {s:?}"));
    match index.split_once('@') {
        Some((k, p)) => {
            let k: u64 = k.parse().map_err(|_| bad())?;
            let p: u64 = p.parse().map_err(|_| bad())?;
            Ok(ParamSet::Residue { k, residue: parse_residue(p, rhs)? })
        }
        None => {
            let k: u64 = index.parse().map_err(|_| bad())?;
            Ok(ParamSet::Integer { k, value: parse_int(rhs)? })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals() {
        assert_eq!(parse_rational(" -3/6 ").unwrap(), Rational::new((-1).into(), 2.into()));
        assert!(parse_rational("1.5").is_err());
        assert!(parse_rational("1/0").is_err());
        assert_eq!(parse_rational_list("1, 7 511").unwrap().len(), 3);
    }

    #[test]
    fn params() {
        assert_eq!(parse_param("l2=1").unwrap(), ParamSet::Integer { k: 2, value: 1.into() });
        assert_eq!(
            parse_param("l1@3=5:4").unwrap(),
            ParamSet::Residue { k: 1, residue: PadicResidue::new(3, 4, 5.into()) }
        );
        assert!(parse_param("x1=3").is_err());
        assert!(parse_param("l1@3=5").is_err());
    }
}
