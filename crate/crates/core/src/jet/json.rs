//! JSON form of jets:
//!
//! ```json
//! {"vars":[{"name":"x","dim":2,"odd":[false,false]}],
//!  "trunc":{"x":3},
//!  "terms":[{"exp":{"x":[1,0]},"re":1.0,"im":0.0}]}
//! ```
//!
//! Exact rationals use `{"num":…,"den":…}` in place of `re`/`im`.

use std::sync::Arc;

use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::ToPrimitive;
use serde_json::{json, Map, Value};

use crate::error::{bail, Error, Result};
use crate::field::{Field, Rational};

use super::{Block, Jet, JetSpace, Var};

/// Coefficients that know their JSON encoding.
pub trait JsonCoeff: Field {
    fn write_fields(&self, obj: &mut Map<String, Value>);
    fn read_fields(obj: &Map<String, Value>) -> Result<Self>;
}

fn float_field(obj: &Map<String, Value>, key: &str) -> Result<f64> {
    match obj.get(key) {
        None => Ok(0.0),
        Some(v) => v.as_f64().ok_or_else(|| Error::Parse(format!("`{key}` must be a number"))),
    }
}

fn bigint_value(v: &BigInt) -> Value {
    match v.to_i64() {
        Some(i) => json!(i),
        None => json!(v.to_string()),
    }
}

fn bigint_field(obj: &Map<String, Value>, key: &str) -> Result<BigInt> {
    match obj.get(key) {
        Some(Value::Number(n)) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| Error::Parse(format!("`{key}` must be an integer"))),
        Some(Value::String(s)) => s.parse().map_err(|_| Error::Parse(format!("`{key}`: bad integer `{s}`"))),
        _ => bail!(Parse, "missing integer field `{key}`"),
    }
}

impl JsonCoeff for f64 {
    fn write_fields(&self, obj: &mut Map<String, Value>) {
        obj.insert("re".into(), json!(self));
        obj.insert("im".into(), json!(0.0));
    }
    fn read_fields(obj: &Map<String, Value>) -> Result<Self> {
        if obj.contains_key("num") {
            let r = Rational::read_fields(obj)?;
            return Ok(r.to_f64().unwrap_or(f64::NAN));
        }
        if float_field(obj, "im")? != 0.0 {
            bail!(Parse, "complex coefficient where a real one is expected");
        }
        float_field(obj, "re")
    }
}

impl JsonCoeff for Complex64 {
    fn write_fields(&self, obj: &mut Map<String, Value>) {
        obj.insert("re".into(), json!(self.re));
        obj.insert("im".into(), json!(self.im));
    }
    fn read_fields(obj: &Map<String, Value>) -> Result<Self> {
        if obj.contains_key("num") {
            return Ok(Rational::read_fields(obj)?.to_c64());
        }
        Ok(Complex64::new(float_field(obj, "re")?, float_field(obj, "im")?))
    }
}

impl JsonCoeff for Rational {
    fn write_fields(&self, obj: &mut Map<String, Value>) {
        obj.insert("num".into(), bigint_value(self.numer()));
        obj.insert("den".into(), bigint_value(self.denom()));
    }
    fn read_fields(obj: &Map<String, Value>) -> Result<Self> {
        if !obj.contains_key("num") {
            if float_field(obj, "im")? != 0.0 {
                bail!(Parse, "complex coefficient where a rational one is expected");
            }
            return Ok(Rational::from_f64(float_field(obj, "re")?));
        }
        let num = bigint_field(obj, "num")?;
        let den = match obj.get("den") {
            None => BigInt::from(1),
            Some(_) => bigint_field(obj, "den")?,
        };
        if den == BigInt::from(0) {
            bail!(Parse, "zero denominator");
        }
        Ok(BigRational::new(num, den))
    }
}

/// Scalar coefficient as a standalone JSON object.
pub fn scalar_to_json<F: JsonCoeff>(c: &F) -> Value {
    let mut obj = Map::new();
    c.write_fields(&mut obj);
    Value::Object(obj)
}

pub fn scalar_from_json<F: JsonCoeff>(v: &Value) -> Result<F> {
    match v {
        Value::Object(o) => F::read_fields(o),
        Value::Number(n) => Ok(F::from_f64(n.as_f64().unwrap_or(f64::NAN))),
        _ => bail!(Parse, "expected a scalar object"),
    }
}

/// True when every coefficient in the document is written as `num`/`den`.
pub fn all_rational(v: &Value) -> bool {
    match v {
        Value::Object(o) => {
            if o.contains_key("re") || o.contains_key("im") {
                return false;
            }
            o.values().all(all_rational)
        }
        Value::Array(a) => a.iter().all(all_rational),
        _ => true,
    }
}

pub fn space_to_json(space: &JetSpace) -> (Value, Value) {
    let vars: Vec<Value> = space.blocks().iter().map(|b| serde_json::to_value(b).unwrap()).collect();
    let mut trunc = Map::new();
    for (b, t) in space.blocks().iter().zip(space.trunc()) {
        trunc.insert(b.name.clone(), json!(t));
    }
    (Value::Array(vars), Value::Object(trunc))
}

pub fn space_from_json(vars: &Value, trunc: &Value) -> Result<Arc<JetSpace>> {
    let blocks: Vec<Block> = match vars {
        Value::Array(a) => a
            .iter()
            .map(|b| {
                let mut b = b.clone();
                // `odd` may be omitted for purely even blocks
                if let Value::Object(o) = &mut b {
                    if !o.contains_key("odd") {
                        let dim = o.get("dim").and_then(Value::as_u64).unwrap_or(0) as usize;
                        o.insert("odd".into(), json!(vec![false; dim]));
                    }
                }
                serde_json::from_value(b).map_err(|e| Error::Parse(format!("bad block: {e}")))
            })
            .collect::<Result<_>>()?,
        _ => bail!(Parse, "`vars` must be an array"),
    };
    let trunc_obj = trunc.as_object().ok_or_else(|| Error::Parse("`trunc` must be an object".into()))?;
    let mut spec = Vec::with_capacity(blocks.len());
    for b in blocks {
        let t = match trunc_obj.get(&b.name) {
            Some(v) => v.as_u64().ok_or_else(|| Error::Parse(format!("trunc of `{}` must be a non-negative integer", b.name)))? as u32,
            None => bail!(Parse, "missing truncation for block `{}`", b.name),
        };
        spec.push((b, t));
    }
    JetSpace::new(spec).map_err(|e| Error::Parse(e.to_string()))
}

pub fn jet_to_json<F: JsonCoeff>(jet: &Jet<F>) -> Value {
    let space = jet.space();
    let (vars, trunc) = space_to_json(space);
    let terms: Vec<Value> = jet
        .terms()
        .map(|(exps, c)| {
            let mut exp = Map::new();
            for (b, blk) in space.blocks().iter().enumerate() {
                let mut e = vec![0u16; blk.dim];
                let mut any = false;
                for (v, k) in &exps {
                    if v.block == b {
                        e[v.index] = *k;
                        any = true;
                    }
                }
                if any {
                    exp.insert(blk.name.clone(), json!(e));
                }
            }
            let mut obj = Map::new();
            obj.insert("exp".into(), Value::Object(exp));
            c.write_fields(&mut obj);
            Value::Object(obj)
        })
        .collect();
    json!({"vars": vars, "trunc": trunc, "terms": terms})
}

pub fn jet_from_json<F: JsonCoeff>(v: &Value) -> Result<Jet<F>> {
    let obj = v.as_object().ok_or_else(|| Error::Parse("jet must be an object".into()))?;
    let space = space_from_json(
        obj.get("vars").ok_or_else(|| Error::Parse("missing `vars`".into()))?,
        obj.get("trunc").ok_or_else(|| Error::Parse("missing `trunc`".into()))?,
    )?;
    let mut jet = Jet::zero(&space);
    let terms = match obj.get("terms") {
        None => return Ok(jet),
        Some(Value::Array(a)) => a,
        Some(_) => bail!(Parse, "`terms` must be an array"),
    };
    for t in terms {
        let t = t.as_object().ok_or_else(|| Error::Parse("term must be an object".into()))?;
        let c = F::read_fields(t)?;
        let mut factors: Vec<(Var, u16)> = Vec::new();
        if let Some(exp) = t.get("exp") {
            let exp = exp.as_object().ok_or_else(|| Error::Parse("`exp` must be an object".into()))?;
            for (name, es) in exp {
                let es = es.as_array().ok_or_else(|| Error::Parse(format!("exponents of `{name}` must be an array")))?;
                let vars = space.vars(name).map_err(|e| Error::Parse(e.to_string()))?;
                if es.len() != vars.len() {
                    bail!(Parse, "block `{name}` has {} variables, got {} exponents", vars.len(), es.len());
                }
                for (v, e) in vars.into_iter().zip(es) {
                    let e = e.as_u64().ok_or_else(|| Error::Parse("exponent must be a non-negative integer".into()))?;
                    if space.is_odd(v) && e > 1 {
                        bail!(Parse, "odd variable {} with exponent {e}", space.var_name(v));
                    }
                    if e > 0 {
                        factors.push((v, e as u16));
                    }
                }
            }
        }
        factors.sort();
        jet = &jet + &Jet::monomial(&space, &factors, c);
    }
    Ok(jet)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_example() {
        let v: Value = serde_json::from_str(
            r#"{"vars":[{"name":"x","dim":2,"odd":[false,false]},{"name":"q","dim":1,"odd":[false]}],
                "trunc":{"x":3,"q":4},
                "terms":[{"exp":{"x":[1,0],"q":[1]},"re":1.0,"im":0.0}]}"#,
        )
        .unwrap();
        let j: Jet<f64> = jet_from_json(&v).unwrap();
        let s = j.space().clone();
        assert_eq!(j.coeff(&[(s.var("x", 0).unwrap(), 1), (s.var("q", 0).unwrap(), 1)]), 1.0);
        assert_eq!(jet_from_json::<f64>(&jet_to_json(&j)).unwrap(), j);
    }

    #[test]
    fn rational_coefficients_round_trip() {
        let v: Value = serde_json::from_str(
            r#"{"vars":[{"name":"x","dim":1}],"trunc":{"x":2},
                "terms":[{"exp":{"x":[2]},"num":-3,"den":4},{"exp":{},"num":"123456789012345678901234567890","den":1}]}"#,
        )
        .unwrap();
        let j: Jet<Rational> = jet_from_json(&v).unwrap();
        assert!(all_rational(&jet_to_json(&j)));
        assert_eq!(jet_from_json::<Rational>(&jet_to_json(&j)).unwrap(), j);
    }

    #[test]
    fn rejects_bad_documents() {
        let v: Value = serde_json::from_str(r#"{"vars":[{"name":"x","dim":1}],"trunc":{}}"#).unwrap();
        assert!(matches!(jet_from_json::<f64>(&v), Err(Error::Parse(_))));
        let v: Value =
            serde_json::from_str(r#"{"vars":[{"name":"t","dim":1,"odd":[true]}],"trunc":{"t":3},"terms":[{"exp":{"t":[2]},"re":1}]}"#)
                .unwrap();
        assert!(matches!(jet_from_json::<f64>(&v), Err(Error::Parse(_))));
    }
}
