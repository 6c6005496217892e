pub mod dynamics;
pub mod quantum;
pub mod spinor;
pub mod thick;
pub mod weyl;

use microformal::jet::json::{jet_from_json, jet_to_json, scalar_from_json, JsonCoeff};
use microformal::{Error, Jet, Result};
use serde_json::Value;

use crate::output::field;

pub fn jet<F: JsonCoeff>(doc: &Value, key: &str) -> Result<Jet<F>> {
    jet_from_json(field(doc, key)?).map_err(|e| Error::Parse(format!("`{key}`: {e}")))
}

pub fn scalars<F: JsonCoeff>(doc: &Value, key: &str) -> Result<Vec<F>> {
    match field(doc, key)? {
        Value::Array(a) => a.iter().map(scalar_from_json).collect(),
        _ => Err(Error::Parse(format!("`{key}` must be an array"))),
    }
}

pub fn jets_json<F: JsonCoeff>(js: &[Jet<F>]) -> Value {
    Value::Array(js.iter().map(jet_to_json).collect())
}

/// Value of a jet with real coefficients.
pub fn to_real<F: JsonCoeff>(j: &Jet<F>) -> Jet<f64> {
    j.map_coeffs(|c| c.to_c64().re)
}
