//! JSON form of parameter-free quadratic actions:
//!
//! ```json
//! {"s0":…, "S_a":[…], "S_i":[…], "S_ab":[[…]], "S_a_i":[[…]], "S_ij":[[…]],
//!  "parities":{"source":[…], "target":[…]}, "weight":…}
//! ```
//!
//! Scalars use the coefficient encoding of jets; `weight` is optional.

use serde_json::{json, Value};

use crate::error::{bail, Error, Result};
use crate::jet::json::{scalar_from_json, scalar_to_json, JsonCoeff};
use crate::jet::Jet;

use super::QuadraticAction;

fn vector<F: JsonCoeff>(v: &Value, key: &str, n: usize) -> Result<Vec<F>> {
    let Some(a) = v.get(key) else {
        return Ok(vec![F::zero(); n]);
    };
    let a = a.as_array().ok_or_else(|| Error::Parse(format!("`{key}` must be an array")))?;
    if a.len() != n {
        bail!(Parse, "`{key}` has {} entries, expected {n}", a.len());
    }
    a.iter().map(scalar_from_json).collect()
}

fn matrix<F: JsonCoeff>(v: &Value, key: &str, n: usize, m: usize) -> Result<Vec<Vec<F>>> {
    let Some(a) = v.get(key) else {
        return Ok(vec![vec![F::zero(); m]; n]);
    };
    let a = a.as_array().ok_or_else(|| Error::Parse(format!("`{key}` must be an array of rows")))?;
    if a.len() != n {
        bail!(Parse, "`{key}` has {} rows, expected {n}", a.len());
    }
    a.iter().map(|r| vector(&json!({ "r": r }), "r", m).map_err(|e| Error::Parse(format!("`{key}`: {e}")))).collect()
}

fn parities(v: &Value, key: &str) -> Result<Vec<bool>> {
    let p = v
        .get("parities")
        .and_then(|p| p.get(key))
        .ok_or_else(|| Error::Parse(format!("missing `parities.{key}`")))?;
    serde_json::from_value(p.clone()).map_err(|e| Error::Parse(format!("`parities.{key}`: {e}")))
}

impl<F: JsonCoeff> QuadraticAction<F> {
    pub fn to_json(&self) -> Result<Value> {
        if !self.params().blocks().is_empty() {
            bail!(Shape, "only actions without parameter blocks have a JSON form");
        }
        let c = |j: &Jet<F>| scalar_to_json(&j.constant_term());
        let vec = |v: Vec<Jet<F>>| v.iter().map(c).collect::<Vec<_>>();
        let mat = |m: Vec<Vec<Jet<F>>>| m.into_iter().map(vec).collect::<Vec<_>>();
        let mut out = json!({
            "s0": c(&self.s0()),
            "S_a": vec(self.s_a()),
            "S_i": vec(self.s_i()),
            "S_ab": mat(self.s_ab()),
            "S_a_i": mat(self.s_ai()),
            "S_ij": mat(self.s_ij()),
            "parities": {"source": self.source_parities(), "target": self.target_parities()},
        });
        if !self.weight().constant_term().is_one() {
            out["weight"] = c(self.weight());
        }
        Ok(out)
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let src = parities(v, "source")?;
        let tgt = parities(v, "target")?;
        let (n, m) = (src.len(), tgt.len());
        let s0 = match v.get("s0") {
            Some(s) => scalar_from_json(s)?,
            None => F::zero(),
        };
        let s = Self::from_coefficients(
            &src,
            &tgt,
            s0,
            &vector(v, "S_a", n)?,
            &vector(v, "S_i", m)?,
            &matrix(v, "S_ab", n, n)?,
            &matrix(v, "S_a_i", n, m)?,
            &matrix(v, "S_ij", m, m)?,
        )
        .map_err(|e| Error::Parse(e.to_string()))?;
        match v.get("weight") {
            None => Ok(s),
            Some(w) => {
                let w: F = scalar_from_json(w)?;
                s.with_weight(Jet::constant(s.params(), w)).map_err(|e| Error::Parse(e.to_string()))
            }
        }
    }
}
