//! Plain-text coframe fixture files.
//!
//! A fixture holds the full frame table of one boundary coframe:
//!
//! ```text
//! # comments and blank lines are ignored
//! dim 4
//! signature lightlike
//! 1 0 0 0
//! 0 1 0 0
//! 0 0 1 1/2
//! 0 0 1 -1/2
//! ```
//!
//! The table has one row per fiber index and one column per frame element
//! in the order `e_1, ..., e_{N-1}, e_n`; entry `(a, mu)` is the `a`-th
//! fiber component of `e_mu`. Values are integers, fractions `p/q`, or
//! finite decimals, all parsed exactly; float-mode consumers convert after
//! parsing. The `signature` line is optional and, when present, is
//! cross-checked against the classification of the parsed coframe
//! (`lightlike`, or `nondegenerate` optionally followed by `(p,q)`).

use num::bigint::BigInt;
use num::rational::BigRational;
use num::pow::Pow;

use crate::forms::{FormDegree, FormField};
use crate::scalar::Scalar;

use super::{BoundaryCoframe, CoframeError, CoframeResult, SignatureClass};

fn fixture_error(line: usize, message: impl Into<String>) -> CoframeError {
    CoframeError::Fixture {
        line,
        message: message.into(),
    }
}

/// Parses one value: integer, `p/q`, or finite decimal.
pub(crate) fn parse_value(token: &str, line: usize) -> CoframeResult<BigRational> {
    let bad = || fixture_error(line, format!("cannot parse value `{token}`"));
    if let Some((num, den)) = token.split_once('/') {
        let n: BigInt = num.parse().map_err(|_| bad())?;
        let d: BigInt = den.parse().map_err(|_| bad())?;
        if d == BigInt::from(0) {
            return Err(fixture_error(line, format!("zero denominator in `{token}`")));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int_part, frac_part)) = token.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int_part.starts_with('-');
        let int: BigInt = if int_part == "-" || int_part.is_empty() {
            BigInt::from(0)
        } else {
            int_part.parse().map_err(|_| bad())?
        };
        let frac: BigInt = frac_part.parse().map_err(|_| bad())?;
        let scale = BigInt::from(10).pow(frac_part.len() as u32);
        let magnitude = int.magnitude().clone() * scale.magnitude().clone() + frac.magnitude().clone();
        let mut value = BigRational::new(BigInt::from(magnitude), scale);
        if negative {
            value = -value;
        }
        return Ok(value);
    }
    let n: BigInt = token.parse().map_err(|_| bad())?;
    Ok(BigRational::from_integer(n))
}

fn check_declared<S: Scalar>(
    declared: &str,
    line: usize,
    coframe: &BoundaryCoframe<S>,
) -> CoframeResult<()> {
    let detected = coframe.signature_class();
    let mismatch = || CoframeError::FixtureSignatureMismatch {
        declared: declared.to_string(),
        detected: detected.to_string(),
    };
    let mut words = declared.split_whitespace();
    match words.next() {
        Some("lightlike") => {
            if !matches!(detected, SignatureClass::Lightlike) {
                return Err(mismatch());
            }
        }
        Some("nondegenerate") => {
            let SignatureClass::Nondegenerate { positive, negative } = detected else {
                return Err(mismatch());
            };
            if let Some(counts) = words.next() {
                let inner = counts
                    .strip_prefix('(')
                    .and_then(|c| c.strip_suffix(')'))
                    .and_then(|c| c.split_once(','))
                    .ok_or_else(|| {
                        fixture_error(line, format!("cannot parse signature counts `{counts}`"))
                    })?;
                let p: usize = inner.0.trim().parse().map_err(|_| {
                    fixture_error(line, format!("cannot parse signature counts `{counts}`"))
                })?;
                let q: usize = inner.1.trim().parse().map_err(|_| {
                    fixture_error(line, format!("cannot parse signature counts `{counts}`"))
                })?;
                if (p, q) != (positive, negative) {
                    return Err(mismatch());
                }
            }
        }
        _ => {
            return Err(fixture_error(
                line,
                format!("unknown signature class `{declared}`"),
            ))
        }
    }
    Ok(())
}

/// Parses a fixture into a fully built coframe, cross-checking any
/// declared signature against the classification.
pub fn parse_fixture<S: Scalar>(text: &str) -> CoframeResult<BoundaryCoframe<S>> {
    let mut dim: Option<usize> = None;
    let mut declared: Option<(usize, String)> = None;
    let mut table: Vec<(usize, Vec<BigRational>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        if let Some(rest) = content.strip_prefix("dim") {
            if dim.is_some() {
                return Err(fixture_error(line, "duplicate `dim` line"));
            }
            dim = Some(rest.trim().parse().map_err(|_| {
                fixture_error(line, format!("cannot parse dimension `{}`", rest.trim()))
            })?);
        } else if let Some(rest) = content.strip_prefix("signature") {
            if declared.is_some() {
                return Err(fixture_error(line, "duplicate `signature` line"));
            }
            declared = Some((line, rest.trim().to_string()));
        } else {
            let mut row = Vec::new();
            for token in content.split_whitespace() {
                row.push(parse_value(token, line)?);
            }
            table.push((line, row));
        }
    }
    let n = dim.ok_or_else(|| fixture_error(0, "missing `dim` line"))?;
    if n < 4 {
        return Err(fixture_error(0, format!("dimension {n} below the minimum 4")));
    }
    if table.len() != n {
        return Err(fixture_error(
            table.last().map_or(0, |(l, _)| *l),
            format!("expected {n} table rows, found {}", table.len()),
        ));
    }
    for (line, row) in &table {
        if row.len() != n {
            return Err(fixture_error(
                *line,
                format!("expected {n} values per row, found {}", row.len()),
            ));
        }
    }

    // Table columns are frame elements; rebuild the coframe rows.
    let coframe_rows: Vec<Vec<S>> = (0..n - 1)
        .map(|mu| (0..n).map(|a| S::from_exact(table[a].1[mu].clone())).collect())
        .collect();
    let transversal: Vec<S> = (0..n).map(|a| S::from_exact(table[a].1[n - 1].clone())).collect();
    let e = FormField::coframe_from_rows(n - 1, n, &coframe_rows)?;
    let e_n = FormField::from_coeffs(FormDegree::new(n - 1, n, 0, 1), transversal)?;
    let coframe = BoundaryCoframe::new(e, e_n)?;
    if let Some((line, declared)) = declared {
        check_declared(&declared, line, &coframe)?;
    }
    Ok(coframe)
}

pub(crate) fn value_string<S: Scalar>(value: &S) -> String {
    match value.to_exact() {
        Some(exact) => exact.to_string(),
        None => value.to_f64().to_string(),
    }
}

/// Serialises a coframe in the fixture format, including its detected
/// signature.
pub fn write_fixture<S: Scalar>(coframe: &BoundaryCoframe<S>) -> String {
    let n = coframe.bulk_dimension();
    let frame = coframe.frame_rows();
    let mut out = String::new();
    out.push_str("# boundary coframe fixture\n");
    out.push_str(&format!("dim {n}\n"));
    out.push_str(&format!("signature {}\n", coframe.signature_class()));
    out.push_str("# one row per fiber index; columns e_1 .. e_{N-1}, e_n\n");
    for a in 0..n {
        let row: Vec<String> = (0..n).map(|mu| value_string(&frame[mu][a])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
