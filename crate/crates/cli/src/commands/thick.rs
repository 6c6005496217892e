use clap::Subcommand;
use microformal::jet::json::{jet_to_json, JsonCoeff};
use microformal::thick_classical::{compose, pullback, ComposeMode, GeneratingFunction, PullbackMode, EPS, LAMBDA};
use microformal::{Error, Result};
use serde_json::{json, Value};

use super::{jet, jets_json, scalars};
use crate::output::{field, read_json, with_field, Output};
use crate::{Input, Opts};

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// `{"S": generating function, "g": jet over y, "mode"?: "formal"|"numeric", "center"?: [...]}`
    Pullback(Input),
    /// `{"S32": …, "S21": …, "mode"?: "formal"|"quadratic"|"numeric", "center_x"?, "center_r"?}`
    Compose(Input),
}

fn gf<F: JsonCoeff>(doc: &Value, key: &str) -> Result<GeneratingFunction<F>> {
    GeneratingFunction::from_json(field(doc, key)?).map_err(|e| Error::Parse(format!("`{key}`: {e}")))
}

fn mode(doc: &Value) -> Result<&str> {
    match doc.get("mode") {
        None => Ok("formal"),
        Some(Value::String(s)) => Ok(s),
        Some(_) => Err(Error::Parse("`mode` must be a string".into())),
    }
}

fn do_pullback<F: JsonCoeff>(doc: &Value, o: &Opts) -> Result<Value> {
    let s = gf::<F>(doc, "S")?;
    let g = jet::<F>(doc, "g")?;
    match mode(doc)? {
        "formal" => {
            let r = pullback(&s, &g, o.order, PullbackMode::Formal)?;
            let at_one = r.f.evaluate_block(EPS, &[F::one()])?;
            Ok(json!({"f": jet_to_json(&at_one), "series": jet_to_json(&r.f), "y": jets_json(&r.y), "q": jets_json(&r.q)}))
        }
        "numeric" => {
            let center = scalars::<F>(doc, "center")?;
            let r = pullback(&s, &g, o.order, PullbackMode::Numeric { center, tol: o.tol })?;
            Ok(json!({"f": jet_to_json(&r.f), "y": jets_json(&r.y), "q": jets_json(&r.q)}))
        }
        m => Err(Error::Parse(format!("unknown pullback mode `{m}`"))),
    }
}

fn do_compose<F: JsonCoeff>(doc: &Value, o: &Opts) -> Result<Value> {
    let s32 = gf::<F>(doc, "S32")?;
    let s21 = gf::<F>(doc, "S21")?;
    let out = match mode(doc)? {
        "formal" => {
            let c = compose(&s32, &s21, o.order, ComposeMode::Formal)?;
            let at_one = GeneratingFunction::new(c.s().evaluate_block(LAMBDA, &[F::one()])?)?;
            return Ok(json!({"S31": c.to_json(), "S31_lambda_one": at_one.to_json()}));
        }
        "quadratic" => compose(&s32, &s21, o.order, ComposeMode::Quadratic)?,
        "numeric" => {
            let mode = ComposeMode::Numeric { center_x: scalars(doc, "center_x")?, center_r: scalars(doc, "center_r")?, tol: o.tol };
            compose(&s32, &s21, o.order, mode)?
        }
        m => return Err(Error::Parse(format!("unknown compose mode `{m}`"))),
    };
    Ok(json!({ "S31": out.to_json() }))
}

pub fn run(cmd: Cmd, o: &Opts) -> Result<Output> {
    let (input, op): (_, fn(&Value, &Opts) -> Result<Value>) = match &cmd {
        Cmd::Pullback(i) => (i, |d, o| with_field!(d, F => do_pullback::<F>(d, o))),
        Cmd::Compose(i) => (i, |d, o| with_field!(d, F => do_compose::<F>(d, o))),
    };
    let doc = read_json(&input.input)?;
    Ok(Output::Json(op(&doc, o)?))
}
