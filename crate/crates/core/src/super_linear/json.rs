//! JSON form of Grassmann numbers and supermatrices:
//!
//! ```json
//! {"rows":[false,true],"cols":[false,true],"generators":4,
//!  "entries":[[[{"mask":0,"num":1,"den":1}], []],
//!             [[{"mask":1,"re":0.5,"im":0.0}], [{"mask":0,"re":1.0}]]]}
//! ```
//!
//! Each entry is a list of terms; `mask` is the generator bitmask.

use serde_json::{json, Map, Value};

use crate::error::{bail, Error, Result};
use crate::jet::json::JsonCoeff;

use super::{GrassmannNumber, SuperMatrix};

pub fn grassmann_to_json<F: JsonCoeff>(g: &GrassmannNumber<F>) -> Value {
    Value::Array(
        g.terms()
            .map(|(m, c)| {
                let mut o = Map::new();
                o.insert("mask".into(), json!(m));
                c.write_fields(&mut o);
                Value::Object(o)
            })
            .collect(),
    )
}

pub fn grassmann_from_json<F: JsonCoeff>(generators: u8, v: &Value) -> Result<GrassmannNumber<F>> {
    let Value::Array(terms) = v else { bail!(Parse, "Grassmann number must be an array of terms") };
    let mut g = GrassmannNumber::zero(generators);
    for t in terms {
        let o = t.as_object().ok_or_else(|| Error::Parse("Grassmann term must be an object".into()))?;
        let mask = o.get("mask").and_then(Value::as_u64).unwrap_or(0);
        if mask >= 1u64 << generators {
            bail!(Parse, "mask {mask} uses more than {generators} generators");
        }
        g = g.add(&GrassmannNumber::term(generators, mask as u32, F::read_fields(o)?));
    }
    Ok(g)
}

fn parities(v: Option<&Value>, key: &str) -> Result<Vec<bool>> {
    match v {
        Some(Value::Array(a)) => a
            .iter()
            .map(|b| b.as_bool().ok_or_else(|| Error::Parse(format!("`{key}` must hold booleans"))))
            .collect(),
        _ => bail!(Parse, "missing parity array `{key}`"),
    }
}

pub fn supermatrix_to_json<F: JsonCoeff>(m: &SuperMatrix<GrassmannNumber<F>>) -> Value {
    let generators = if m.rows() * m.cols() > 0 { m.get(0, 0).generators() } else { super::DEFAULT_GENERATORS };
    let entries: Vec<Value> =
        (0..m.rows()).map(|i| Value::Array((0..m.cols()).map(|j| grassmann_to_json(m.get(i, j))).collect())).collect();
    json!({"rows": m.row_parities(), "cols": m.col_parities(), "generators": generators, "entries": entries})
}

pub fn supermatrix_from_json<F: JsonCoeff>(v: &Value) -> Result<SuperMatrix<GrassmannNumber<F>>> {
    let o = v.as_object().ok_or_else(|| Error::Parse("supermatrix must be an object".into()))?;
    let rows = parities(o.get("rows"), "rows")?;
    let cols = parities(o.get("cols"), "cols")?;
    let generators = match o.get("generators") {
        None => super::DEFAULT_GENERATORS,
        Some(g) => match g.as_u64() {
            Some(g) if g <= 31 => g as u8,
            _ => bail!(Parse, "`generators` must be an integer ≤ 31"),
        },
    };
    let Some(Value::Array(rs)) = o.get("entries") else { bail!(Parse, "missing `entries`") };
    let grid = rs
        .iter()
        .map(|r| match r {
            Value::Array(es) => es.iter().map(|e| grassmann_from_json(generators, e)).collect::<Result<Vec<_>>>(),
            _ => bail!(Parse, "each row of `entries` must be an array"),
        })
        .collect::<Result<Vec<_>>>()?;
    SuperMatrix::new(rows, cols, grid).map_err(|e| Error::Parse(e.to_string()))
}
