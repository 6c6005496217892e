use clap::Subcommand;
use microformal::jet::json::JsonCoeff;
use microformal::thick_quantum::{quantum_compose_first_order, quantum_pullback, OscillatoryFunction, QuantumAction};
use microformal::{Error, Result};
use serde_json::{json, Value};

use crate::output::{field, read_json, with_field, Output};
use crate::{Input, Opts};

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// `{"S": quantum action, "w": oscillatory function in y}`
    Pullback(Input),
    /// `{"S32": …, "S21": …}`, composed through hbar¹
    Compose(Input),
}

fn action<F: JsonCoeff>(doc: &Value, key: &str) -> Result<QuantumAction<F>> {
    QuantumAction::from_json(field(doc, key)?).map_err(|e| Error::Parse(format!("`{key}`: {e}")))
}

fn do_pullback<F: JsonCoeff>(doc: &Value, o: &Opts) -> Result<Value> {
    let s = action::<F>(doc, "S")?;
    let w = OscillatoryFunction::<F>::from_json(field(doc, "w")?).map_err(|e| Error::Parse(format!("`w`: {e}")))?;
    Ok(json!({ "w": quantum_pullback(&s, &w, o.trunc_hbar)?.to_json() }))
}

fn do_compose<F: JsonCoeff>(doc: &Value, o: &Opts) -> Result<Value> {
    let c = quantum_compose_first_order(&action::<F>(doc, "S32")?, &action::<F>(doc, "S21")?, o.order)?;
    Ok(json!({ "S31": c.to_json() }))
}

pub fn run(cmd: Cmd, o: &Opts) -> Result<Output> {
    let (input, op): (_, fn(&Value, &Opts) -> Result<Value>) = match &cmd {
        Cmd::Pullback(i) => (i, |d, o| with_field!(d, F => do_pullback::<F>(d, o))),
        Cmd::Compose(i) => (i, |d, o| with_field!(d, F => do_compose::<F>(d, o))),
    };
    let doc = read_json(&input.input)?;
    Ok(Output::Json(op(&doc, o)?))
}
