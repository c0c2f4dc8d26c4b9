//! Assignments, traces and their file formats (CSV and JSON).

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::formula::{Declarations, Sort};

pub type Assignment = BTreeMap<Arc<str>, BigRational>;
pub type Trace = Vec<Assignment>;

/// Parses `-12`, `3/4` or an exact decimal such as `1.2` (= 6/5).
pub fn parse_value(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d == BigInt::from(0) {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac) = match body.split_once('.') {
        Some((i, f)) => (i, f),
        None => (body, ""),
    };
    if int_part.is_empty() && frac.is_empty() {
        return None;
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac}");
    let num: BigInt = if digits.is_empty() { BigInt::from(0) } else { digits.parse().ok()? };
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let q = BigRational::new(num, den);
    Some(if neg { -q } else { q })
}

fn check_sort(name: &str, sort: Sort, v: &BigRational, row: usize) -> Result<()> {
    if sort == Sort::Int && !v.is_integer() {
        return Err(Error::Trace(format!("row {row}: value for int variable `{name}` is not an integer")));
    }
    Ok(())
}

/// Reads a CSV trace: a header of variable names, then one row per instant.
pub fn read_csv(text: &str, decls: &Declarations) -> Result<Trace> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(text.as_bytes());
    let header: Vec<String> =
        rdr.headers().map_err(|e| Error::Trace(format!("header: {e}")))?.iter().map(str::to_string).collect();
    let mut cols = Vec::new();
    for name in decls.names() {
        match header.iter().position(|h| h == &**name) {
            Some(i) => cols.push((name.clone(), decls.sort_of(name).unwrap(), i)),
            None => return Err(Error::Trace(format!("missing column `{name}`"))),
        }
    }
    let mut trace = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 2;
        let rec = rec.map_err(|e| Error::Trace(format!("row {row}: {e}")))?;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        let mut a = Assignment::new();
        for (name, sort, i) in &cols {
            let cell = rec.get(*i).filter(|c| !c.is_empty());
            let cell = cell.ok_or_else(|| Error::Trace(format!("row {row}: missing value for `{name}`")))?;
            let v = parse_value(cell)
                .ok_or_else(|| Error::Trace(format!("row {row}: cannot parse `{cell}` for `{name}`")))?;
            check_sort(name, *sort, &v, row)?;
            a.insert(name.clone(), v);
        }
        trace.push(a);
    }
    if trace.is_empty() {
        return Err(Error::Trace("trace is empty".into()));
    }
    Ok(trace)
}

/// Reads a JSON trace: an array of objects mapping variable names to numbers
/// or strings in the CSV value syntax.
pub fn read_json(text: &str, decls: &Declarations) -> Result<Trace> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Trace(format!("json: {e}")))?;
    let rows = value.as_array().ok_or_else(|| Error::Trace("json trace must be an array".into()))?;
    let mut trace = Vec::new();
    for (k, row) in rows.iter().enumerate() {
        let obj = row.as_object().ok_or_else(|| Error::Trace(format!("element {k}: expected an object")))?;
        let mut a = Assignment::new();
        for (name, sort) in decls.iter() {
            let cell =
                obj.get(&**name).ok_or_else(|| Error::Trace(format!("element {k}: missing value for `{name}`")))?;
            let text = match cell {
                serde_json::Value::Number(n) => n.to_string(),
                serde_json::Value::String(s) => s.clone(),
                _ => return Err(Error::Trace(format!("element {k}: `{name}` must be a number or string"))),
            };
            let v = parse_value(&text)
                .ok_or_else(|| Error::Trace(format!("element {k}: cannot parse `{text}` for `{name}`")))?;
            check_sort(name, sort, &v, k)?;
            a.insert(name.clone(), v);
        }
        trace.push(a);
    }
    if trace.is_empty() {
        return Err(Error::Trace("trace is empty".into()));
    }
    Ok(trace)
}

/// Loads a trace, choosing the format by extension (`.json`, else CSV).
pub fn load_trace(path: &Path, decls: &Declarations) -> Result<Trace> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        read_json(&text, decls)
    } else {
        read_csv(&text, decls)
    }
}
