//! Parsers for the CLI's `--params` and `--grid` mini-languages.
//!
//! `--params`: comma-separated `key=value` pairs, e.g. `n=4,eps=0.0625`.
//! `--grid`:   semicolon-separated axes, each `key=v1,v2,...`; cells are the
//!             cartesian product.
//! Values accept plain floats and the power-of-two shorthand `2^-4`; grid
//! axes additionally accept exponent ranges like `2^-4..2^-10`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Parse one numeric value, including the `2^e` shorthand.
pub fn parse_number(s: &str) -> Result<f64> {
    let s = s.trim();
    if let Some(exp) = s.strip_prefix("2^") {
        let e: i32 = exp
            .parse()
            .map_err(|_| Error::validation(format!("bad exponent in {:?}", s)))?;
        return Ok(2.0f64.powi(e));
    }
    let v: f64 = s
        .parse()
        .map_err(|_| Error::validation(format!("bad number {:?}", s)))?;
    if !v.is_finite() {
        return Err(Error::validation(format!("non-finite value {:?}", s)));
    }
    Ok(v)
}

fn split_pair(item: &str) -> Result<(&str, &str)> {
    let (key, value) = item
        .split_once('=')
        .ok_or_else(|| Error::validation(format!("expected key=value, got {:?}", item)))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(Error::validation(format!("empty key in {:?}", item)));
    }
    Ok((key, value))
}

/// Parse `k1=v1,k2=v2,...` into a map. Duplicate keys are rejected.
pub fn parse_params(s: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    if s.trim().is_empty() {
        return Ok(out);
    }
    for item in s.split(',') {
        let (key, value) = split_pair(item)?;
        if out.insert(key.to_string(), parse_number(value)?).is_some() {
            return Err(Error::validation(format!("duplicate param {:?}", key)));
        }
    }
    Ok(out)
}

/// Expand one grid axis value list, including `2^a..2^b` exponent ranges.
fn parse_axis_values(list: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    for piece in list.split(',') {
        let piece = piece.trim();
        if let Some((lo, hi)) = piece.split_once("..") {
            let (lo, hi) = (
                lo.strip_prefix("2^")
                    .ok_or_else(|| Error::validation(format!("range {:?} needs 2^ bounds", piece)))?,
                hi.strip_prefix("2^")
                    .ok_or_else(|| Error::validation(format!("range {:?} needs 2^ bounds", piece)))?,
            );
            let a: i32 = lo
                .parse()
                .map_err(|_| Error::validation(format!("bad exponent {:?}", lo)))?;
            let b: i32 = hi
                .parse()
                .map_err(|_| Error::validation(format!("bad exponent {:?}", hi)))?;
            let step = if a <= b { 1 } else { -1 };
            let mut e = a;
            loop {
                values.push(2.0f64.powi(e));
                if e == b {
                    break;
                }
                e += step;
            }
        } else {
            values.push(parse_number(piece)?);
        }
    }
    if values.is_empty() {
        return Err(Error::validation("empty axis value list"));
    }
    Ok(values)
}

/// Parse `k1=v1,v2;k2=w1,...` into the cartesian product of cells, in
/// row-major order over the axes as written.
pub fn parse_grid(s: &str) -> Result<Vec<BTreeMap<String, f64>>> {
    let mut axes: Vec<(String, Vec<f64>)> = Vec::new();
    for axis in s.split(';') {
        let (key, list) = split_pair(axis)?;
        if axes.iter().any(|(k, _)| k == key) {
            return Err(Error::validation(format!("duplicate grid axis {:?}", key)));
        }
        axes.push((key.to_string(), parse_axis_values(list)?));
    }
    if axes.is_empty() {
        return Err(Error::validation("empty grid"));
    }
    let mut cells: Vec<BTreeMap<String, f64>> = vec![BTreeMap::new()];
    for (key, values) in &axes {
        let mut next = Vec::with_capacity(cells.len() * values.len());
        for cell in &cells {
            for &v in values {
                let mut c = cell.clone();
                c.insert(key.clone(), v);
                next.push(c);
            }
        }
        cells = next;
    }
    Ok(cells)
}
