//! Point files and deterministic JSON output.
//!
//! Point files name each matrix by its role: `{"X": …}`, `{"F": …}`,
//! `{"x": …, "Lambda": …}` or `{"x": …, "F": …, "Lambda": …}`. Which keys are
//! required depends on the formulation; missing or extra keys are errors.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::certify::Formulation;
use crate::error::{Error, Result};
use crate::matcore::{
    mat_from_rows, mat_to_rows, vec_from_json, Factor, Multiplier, SymMatrix, Vector,
};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPoint {
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    pub x_mat: Option<Vec<Vec<f64>>>,
    #[serde(rename = "F", default, skip_serializing_if = "Option::is_none")]
    pub f: Option<Vec<Vec<f64>>>,
    #[serde(rename = "x", default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(rename = "Lambda", default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug)]
pub enum Point {
    Bc {
        x: SymMatrix,
    },
    Dss {
        f: Factor,
    },
    DssSym {
        f: SymMatrix,
    },
    Nsdp {
        x: Vector,
        lambda: Multiplier,
    },
    Ssv {
        x: Vector,
        f: Factor,
        lambda: Multiplier,
    },
    SsvSym {
        x: Vector,
        f: SymMatrix,
        lambda: Multiplier,
    },
}

fn expect_keys(raw: &RawPoint, want: [bool; 4], formulation: Formulation) -> Result<()> {
    let have = [
        raw.x_mat.is_some(),
        raw.f.is_some(),
        raw.x.is_some(),
        raw.lambda.is_some(),
    ];
    const NAMES: [&str; 4] = ["X", "F", "x", "Lambda"];
    for i in 0..4 {
        if have[i] != want[i] {
            let what = if want[i] { "missing" } else { "unexpected" };
            return Err(Error::Parse(format!(
                "{what} key \"{}\" for formulation {formulation:?}",
                NAMES[i]
            )));
        }
    }
    Ok(())
}

impl Point {
    pub fn parse(json: &str, formulation: Formulation) -> Result<Point> {
        let raw: RawPoint = serde_json::from_str(json)?;
        Self::from_raw(&raw, formulation)
    }

    pub fn from_raw(raw: &RawPoint, formulation: Formulation) -> Result<Point> {
        use Formulation::*;
        let want = match formulation {
            Bc => [true, false, false, false],
            Dss | DssSym => [false, true, false, false],
            Nsdp => [false, false, true, true],
            Ssv | SsvSym => [false, true, true, true],
        };
        expect_keys(raw, want, formulation)?;
        let sym = |rows: &Option<Vec<Vec<f64>>>| {
            SymMatrix::from_rows(rows.as_deref().unwrap_or_default())
        };
        let vec = || vec_from_json(raw.x.as_deref().unwrap_or_default());
        let factor = || Factor::new(mat_from_rows(raw.f.as_deref().unwrap_or_default())?);
        Ok(match formulation {
            Bc => Point::Bc {
                x: sym(&raw.x_mat)?,
            },
            Dss => Point::Dss { f: factor()? },
            DssSym => Point::DssSym { f: sym(&raw.f)? },
            Nsdp => Point::Nsdp {
                x: vec()?,
                lambda: Multiplier(sym(&raw.lambda)?),
            },
            Ssv => Point::Ssv {
                x: vec()?,
                f: factor()?,
                lambda: Multiplier(sym(&raw.lambda)?),
            },
            SsvSym => Point::SsvSym {
                x: vec()?,
                f: sym(&raw.f)?,
                lambda: Multiplier(sym(&raw.lambda)?),
            },
        })
    }

    pub fn to_raw(&self) -> RawPoint {
        let rows = |m: &crate::Mat| Some(mat_to_rows(m));
        let xs = |v: &Vector| Some(v.iter().copied().collect());
        match self {
            Point::Bc { x } => RawPoint {
                x_mat: rows(x.as_mat()),
                ..Default::default()
            },
            Point::Dss { f } => RawPoint {
                f: rows(f.as_mat()),
                ..Default::default()
            },
            Point::DssSym { f } => RawPoint {
                f: rows(f.as_mat()),
                ..Default::default()
            },
            Point::Nsdp { x, lambda } => RawPoint {
                x: xs(x),
                lambda: rows(lambda.as_mat()),
                ..Default::default()
            },
            Point::Ssv { x, f, lambda } => RawPoint {
                x: xs(x),
                f: rows(f.as_mat()),
                lambda: rows(lambda.as_mat()),
                ..Default::default()
            },
            Point::SsvSym { x, f, lambda } => RawPoint {
                x: xs(x),
                f: rows(f.as_mat()),
                lambda: rows(lambda.as_mat()),
                ..Default::default()
            },
        }
    }
}

fn write_value(v: &Value, indent: usize, out: &mut String) {
    let pad = |n: usize, out: &mut String| out.extend(std::iter::repeat_n(' ', n));
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&format!("{:.16e}", n.as_f64().expect("f64 number")));
            } else {
                out.push_str(&n.to_string());
            }
        }
        Value::String(s) => out.push_str(&Value::String(s.clone()).to_string()),
        Value::Array(items) => {
            // numeric rows stay on one line
            if items.iter().all(|x| !x.is_array() && !x.is_object()) {
                out.push('[');
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write_value(x, indent, out);
                }
                out.push(']');
                return;
            }
            out.push_str("[\n");
            for (i, x) in items.iter().enumerate() {
                pad(indent + 2, out);
                write_value(x, indent + 2, out);
                if i + 1 < items.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push_str("{\n");
            for (i, k) in keys.iter().enumerate() {
                pad(indent + 2, out);
                out.push_str(&Value::String((*k).clone()).to_string());
                out.push_str(": ");
                write_value(&map[*k], indent + 2, out);
                if i + 1 < keys.len() {
                    out.push(',');
                }
                out.push('\n');
            }
            pad(indent, out);
            out.push('}');
        }
    }
}

/// Pretty JSON with sorted keys and every float printed with 17 significant
/// digits, so identical values always produce identical bytes.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&v, 0, &mut out);
    out.push('\n');
    Ok(out)
}
