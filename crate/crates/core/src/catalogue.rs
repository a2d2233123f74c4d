//! Curve catalogue: built-in curves and a plain-text exchange format.
//!
//! One curve per line, whitespace-separated `key=value` pairs:
//!
//! ```text
//! label=11a1 a1=0 a2=-1 a3=1 a4=-10 a6=-20 conductor=11 root_number=+1
//! ```
//!
//! `root_number` is optional — it is always re-detected from the
//! functional equation; when present it acts as a cross-check.  Lines
//! starting with `#` and blank lines are skipped.  Unknown keys are
//! rejected rather than ignored: a typo in curve data must never load.

use std::path::Path;

use crate::curve::CurveData;
use crate::error::Error;
use crate::Result;

/// Curves shipped with the crate: the three small-conductor workhorses
/// used throughout the tests and docs, plus one odd-sign curve and one
/// even-sign curve whose L-function vanishes at the centre.
const BUILTIN: &str = "\
label=11a1  a1=0 a2=-1 a3=1 a4=-10 a6=-20  conductor=11  root_number=+1
label=14a1  a1=1 a2=0  a3=1 a4=4   a6=-6   conductor=14  root_number=+1
label=15a1  a1=1 a2=1  a3=1 a4=-10 a6=-10  conductor=15  root_number=+1
label=37a1  a1=0 a2=0  a3=1 a4=-1  a6=0    conductor=37  root_number=-1
label=389a1 a1=0 a2=1  a3=1 a4=-2  a6=0    conductor=389 root_number=+1
";

/// Look up one of the built-in curves by label.
pub fn builtin_curve(label: &str) -> Result<CurveData> {
    for curve in parse_catalogue(BUILTIN)? {
        if curve.label == label {
            return Ok(curve);
        }
    }
    Err(Error::Catalogue(format!(
        "no built-in curve {label}; available: {}",
        builtin_labels().join(", ")
    )))
}

pub fn builtin_labels() -> Vec<String> {
    BUILTIN
        .lines()
        .filter_map(|l| l.trim().strip_prefix("label="))
        .filter_map(|l| l.split_whitespace().next())
        .map(String::from)
        .collect()
}

/// Parse catalogue text; every curve is fully validated on the way in
/// (model minimality, root-number detection).
pub fn parse_catalogue(text: &str) -> Result<Vec<CurveData>> {
    let mut curves: Vec<CurveData> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let curve = parse_line(line).map_err(|e| match e {
            Error::Catalogue(msg) => Error::Catalogue(format!("line {}: {msg}", idx + 1)),
            other => other,
        })?;
        if curves.iter().any(|c| c.label == curve.label) {
            return Err(Error::Catalogue(format!(
                "line {}: duplicate label {}",
                idx + 1,
                curve.label
            )));
        }
        curves.push(curve);
    }
    Ok(curves)
}

/// Load a catalogue file from disk.
pub fn load_catalogue(path: &Path) -> Result<Vec<CurveData>> {
    parse_catalogue(&std::fs::read_to_string(path)?)
}

/// Find a curve by label, searching an optional external catalogue first
/// and falling back to the built-ins.
pub fn resolve_curve(label: &str, external: Option<&Path>) -> Result<CurveData> {
    if let Some(path) = external {
        if let Some(curve) = load_catalogue(path)?
            .into_iter()
            .find(|c| c.label == label)
        {
            return Ok(curve);
        }
    }
    builtin_curve(label)
}

fn parse_line(line: &str) -> Result<CurveData> {
    let mut label: Option<String> = None;
    let mut a: [Option<i64>; 5] = [None; 5];
    let mut conductor: Option<u64> = None;
    let mut root_number: Option<i8> = None;

    for token in line.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| Error::Catalogue(format!("expected key=value, got {token:?}")))?;
        match key {
            "label" => label = Some(value.to_string()),
            "a1" | "a2" | "a3" | "a4" | "a6" => {
                let slot = match key {
                    "a1" => 0,
                    "a2" => 1,
                    "a3" => 2,
                    "a4" => 3,
                    _ => 4,
                };
                a[slot] = Some(parse_int(key, value)?);
            }
            "conductor" => {
                conductor = Some(
                    value
                        .parse::<u64>()
                        .map_err(|_| Error::Catalogue(format!("bad conductor {value:?}")))?,
                )
            }
            "root_number" => {
                root_number = Some(match value {
                    "+1" | "1" => 1,
                    "-1" => -1,
                    other => {
                        return Err(Error::Catalogue(format!(
                            "root_number must be +1 or -1, got {other:?}"
                        )))
                    }
                })
            }
            other => return Err(Error::Catalogue(format!("unknown key {other:?}"))),
        }
    }

    let label = label.ok_or_else(|| Error::Catalogue("missing label".into()))?;
    let mut inv = [0i64; 5];
    for (i, (slot, name)) in a.iter().zip(["a1", "a2", "a3", "a4", "a6"]).enumerate() {
        inv[i] = slot.ok_or_else(|| Error::Catalogue(format!("{label}: missing {name}")))?;
    }
    let conductor =
        conductor.ok_or_else(|| Error::Catalogue(format!("{label}: missing conductor")))?;
    CurveData::new(&label, inv, conductor, root_number)
}

fn parse_int(key: &str, value: &str) -> Result<i64> {
    value
        .parse::<i64>()
        .map_err(|_| Error::Catalogue(format!("bad integer for {key}: {value:?}")))
}
