use clap::Subcommand;
use microformal::jet::json::{jet_to_json, scalar_to_json, JsonCoeff};
use microformal::weyl::{cocycle_defect, ordering_defect, poisson_bracket, quantum_poisson, supercommutator, weyl_mul, WeylElement};
use microformal::{Error, Result};
use serde_json::{json, Value};

use super::{jet, scalars};
use crate::output::{field, read_json, with_field, Output};
use crate::{Input, Opts};

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// `{"a": weyl element, "b": weyl element}`
    Mul(Input),
    /// `{"a", "b"}`: supercommutator, quantum and classical brackets
    Bracket(Input),
    /// `{"h1": symbol, "h2": symbol, "s"?: [...]}`: ordering defect per s
    Cocycle(Input),
}

fn element<F: JsonCoeff>(doc: &Value, key: &str) -> Result<WeylElement<F>> {
    WeylElement::from_json(field(doc, key)?).map_err(|e| Error::Parse(format!("`{key}`: {e}")))
}

fn do_mul<F: JsonCoeff>(doc: &Value, _: &Opts) -> Result<Value> {
    Ok(json!({ "product": weyl_mul(&element::<F>(doc, "a")?, &element::<F>(doc, "b")?)?.to_json() }))
}

fn do_bracket<F: JsonCoeff>(doc: &Value, _: &Opts) -> Result<Value> {
    let (a, b) = (element::<F>(doc, "a")?, element::<F>(doc, "b")?);
    let classical = poisson_bracket(&a.principal_symbol(), &b.principal_symbol())?;
    Ok(json!({
        "supercommutator": supercommutator(&a, &b)?.to_json(),
        "quantum_poisson": quantum_poisson(&a, &b)?.to_json(),
        "poisson": jet_to_json(&classical),
    }))
}

fn do_cocycle<F: JsonCoeff>(doc: &Value, _: &Opts) -> Result<Value> {
    let (h1, h2) = (jet::<F>(doc, "h1")?, jet::<F>(doc, "h2")?);
    let ss: Vec<F> = match doc.get("s") {
        Some(_) => scalars(doc, "s")?,
        None => [(0, 1), (1, 4), (1, 2), (3, 4), (1, 1)].iter().map(|&(n, d)| F::from_ratio(n, d)).collect(),
    };
    let rows = ss
        .iter()
        .map(|s| {
            Ok(json!({
                "s": scalar_to_json(s),
                "raw": scalar_to_json(&ordering_defect(&h1, &h2, s)?),
                "c": scalar_to_json(&cocycle_defect(&h1, &h2, s)?),
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(json!({ "defects": rows }))
}

pub fn run(cmd: Cmd, o: &Opts) -> Result<Output> {
    let (input, op): (_, fn(&Value, &Opts) -> Result<Value>) = match &cmd {
        Cmd::Mul(i) => (i, |d, o| with_field!(d, F => do_mul::<F>(d, o))),
        Cmd::Bracket(i) => (i, |d, o| with_field!(d, F => do_bracket::<F>(d, o))),
        Cmd::Cocycle(i) => (i, |d, o| with_field!(d, F => do_cocycle::<F>(d, o))),
    };
    let doc = read_json(&input.input)?;
    Ok(Output::Json(op(&doc, o)?))
}
