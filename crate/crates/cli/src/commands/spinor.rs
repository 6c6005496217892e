use clap::Subcommand;
use microformal::jet::json::{jet_to_json, scalar_from_json, scalar_to_json, JsonCoeff};
use microformal::spinor::{cocycle_weight, compose_classical, compose_quantum, intertwine_solve, LinearHamiltonian, QuadraticAction};
use microformal::thick_classical::hamilton_jacobi_residual;
use microformal::{Error, Result};
use serde_json::{json, Value};

use super::{scalars, to_real};
use crate::output::{field, read_json, with_field, Output};
use crate::{Input, Opts};

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// `{"T": quadratic action, "S": quadratic action}`: classical and quantum composites
    Compose(Input),
    /// `{"T", "S"}`: Berezinian weight and c = ½ ln of it
    Cocycle(Input),
    /// `{"S", "B": [...], "C": [...], "K1", "parity"?: bool}`: intertwined linear Hamiltonians
    Intertwine(Input),
}

fn quad<F: JsonCoeff>(doc: &Value, key: &str) -> Result<QuadraticAction<F>> {
    QuadraticAction::from_json(field(doc, key)?).map_err(|e| Error::Parse(format!("`{key}`: {e}")))
}

fn do_compose<F: JsonCoeff>(doc: &Value, _: &Opts) -> Result<Value> {
    let (t, s) = (quad::<F>(doc, "T")?, quad::<F>(doc, "S")?);
    Ok(json!({ "classical": compose_classical(&t, &s)?.to_json()?, "quantum": compose_quantum(&t, &s)?.to_json()? }))
}

fn do_cocycle<F: JsonCoeff>(doc: &Value, _: &Opts) -> Result<Value> {
    let w = cocycle_weight(&quad::<F>(doc, "T")?, &quad::<F>(doc, "S")?)?;
    // ½ ln is taken in floating point: it is transcendental over the rationals
    let c = to_real(&w).log_principal()?.scale(&0.5);
    Ok(json!({ "weight": jet_to_json(&w), "c": jet_to_json(&c) }))
}

fn hamiltonian_json<F: JsonCoeff>(h: &LinearHamiltonian<F>) -> Value {
    let v = |xs: &[F]| Value::Array(xs.iter().map(scalar_to_json).collect());
    json!({"parities": h.parities, "A": v(&h.a), "B": v(&h.b), "K": scalar_to_json(&h.k), "parity": h.parity})
}

fn do_intertwine<F: JsonCoeff>(doc: &Value, _: &Opts) -> Result<Value> {
    let s = quad::<F>(doc, "S")?;
    let k1 = scalar_from_json(field(doc, "K1")?)?;
    let parity = doc.get("parity").map(|p| p.as_bool().ok_or_else(|| Error::Parse("`parity` must be a boolean".into()))).transpose()?;
    let (d1, d2) = intertwine_solve(&s, &scalars::<F>(doc, "B")?, &scalars::<F>(doc, "C")?, k1, parity.unwrap_or(false))?;
    let residual = hamilton_jacobi_residual(&s.to_generating_function()?, &d1.symbol("x", "p")?, &d2.symbol("y", "q")?)?;
    Ok(json!({
        "delta1": hamiltonian_json(&d1),
        "delta2": hamiltonian_json(&d2),
        "hamilton_jacobi_residual": jet_to_json(&residual),
    }))
}

pub fn run(cmd: Cmd, o: &Opts) -> Result<Output> {
    let (input, op): (_, fn(&Value, &Opts) -> Result<Value>) = match &cmd {
        Cmd::Compose(i) => (i, |d, o| with_field!(d, F => do_compose::<F>(d, o))),
        Cmd::Cocycle(i) => (i, |d, o| with_field!(d, F => do_cocycle::<F>(d, o))),
        Cmd::Intertwine(i) => (i, |d, o| with_field!(d, F => do_intertwine::<F>(d, o))),
    };
    let doc = read_json(&input.input)?;
    Ok(Output::Json(op(&doc, o)?))
}
