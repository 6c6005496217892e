use std::path::PathBuf;

use clap::{Args, Subcommand};
use microformal::dynamics::{action_from_flow, evolve_action, evolve_function, schrodinger_evolve, FlowSample};
use microformal::jet::json::jet_from_json;
use microformal::thick_classical::{pullback, PullbackMode, EPS};
use microformal::thick_quantum::{OscillatoryFunction, HBAR};
use microformal::{Block, Error, Jet, JetSpace, Result};
use serde_json::json;

use super::jet;
use crate::output::{read_json, Output};
use crate::Opts;

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Evolve a function (`--in`: jet over x) by ∂f/∂t = H(x, ∂f).
    EvolveF(Run),
    /// Evolve the generating function from S₀ = xq.
    EvolveS(Run),
    /// Sample S_T(x, q) along the Hamiltonian flow (CSV).
    FlowAction(Run),
    /// Evolve an oscillatory wave function (`--in`: {"phase", "amplitude"?} in x).
    Schrodinger(Run),
}

#[derive(Args, Debug)]
pub struct Run {
    /// `halfP2` (½p²), `harmonic` (½(p²+x²)) or a jet JSON file over x, p.
    #[arg(long = "H")]
    h: String,
    /// Evolution time.
    #[arg(long = "T")]
    t: f64,
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Sample grid `lo:hi:n` used for x and q in every dimension.
    #[arg(long, default_value = "-1:1:9")]
    grid: String,
    /// Emit a max-abs-difference table against an independent computation.
    #[arg(long)]
    compare: bool,
}

fn hamiltonian(spec: &str) -> Result<Jet<f64>> {
    let sp = JetSpace::new(vec![(Block::even("x", 1), 2), (Block::even("p", 1), 2)])?;
    let x = Jet::var(&sp, sp.var("x", 0)?);
    let p = Jet::var(&sp, sp.var("p", 0)?);
    match spec {
        "halfP2" => Ok((&p * &p).scale(&0.5)),
        "harmonic" => Ok((&(&p * &p) + &(&x * &x)).scale(&0.5)),
        path => jet_from_json(&read_json(path.as_ref())?),
    }
}

fn grid(spec: &str, n: usize) -> Result<Vec<Vec<f64>>> {
    let bad = || Error::Parse(format!("grid must be `lo:hi:n`, got `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [lo, hi, k] = parts[..] else { return Err(bad()) };
    let (lo, hi): (f64, f64) = (lo.parse().map_err(|_| bad())?, hi.parse().map_err(|_| bad())?);
    let k: usize = k.parse().map_err(|_| bad())?;
    if k < 1 {
        return Err(bad());
    }
    let axis: Vec<f64> = (0..k).map(|i| if k == 1 { lo } else { lo + (hi - lo) * i as f64 / (k - 1) as f64 }).collect();
    let mut pts = vec![vec![]];
    for _ in 0..n {
        pts = pts.into_iter().flat_map(|p: Vec<f64>| axis.iter().map(move |&a| [p.clone(), vec![a]].concat())).collect();
    }
    Ok(pts)
}

fn input(r: &Run) -> Result<serde_json::Value> {
    match &r.input {
        Some(p) => read_json(p),
        None => Err(Error::Parse("this subcommand needs `--in`".into())),
    }
}

fn dim(h: &Jet<f64>) -> Result<usize> {
    h.space().block("x").map(|b| b.dim).ok_or_else(|| Error::Shape("Hamiltonian needs an `x` block".into()))
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn compare_table(rows: Vec<(&str, f64)>) -> Output {
    Output::table(&["comparison", "max_abs_diff"], rows.into_iter().map(|(n, d)| vec![n.to_string(), format!("{d:e}")]).collect())
}

fn max_diff(a: &Jet<f64>, b: &Jet<f64>) -> Result<f64> {
    let u = a.space().union_with(b.space(), &[])?;
    Ok((&a.embed(&u)? - &b.embed(&u)?).max_abs())
}

/// Samples of an evolved generating function compared with the flow.
fn flow_differences(s: &Jet<f64>, samples: &[FlowSample]) -> Result<f64> {
    samples.iter().try_fold(0.0f64, |m, smp| {
        let point: Vec<f64> = smp.x.iter().chain(&smp.q).copied().collect();
        Ok(m.max((s.eval(&point)? - smp.s).abs()))
    })
}

pub fn run(cmd: Cmd, o: &Opts) -> Result<Output> {
    let (Cmd::EvolveF(r) | Cmd::EvolveS(r) | Cmd::FlowAction(r) | Cmd::Schrodinger(r)) = &cmd;
    let h = hamiltonian(&r.h)?;
    let n = dim(&h)?;
    match &cmd {
        Cmd::EvolveF(_) => {
            let f0 = jet::<f64>(&json!({ "f0": input(r)? }), "f0")?;
            let ft = evolve_function(&h, &f0, &r.t, o.steps)?;
            if !r.compare {
                return Ok(Output::Json(microformal::jet::json::jet_to_json(&ft)));
            }
            // formal pullback of f₀ (graded by eps) along the evolved generating function
            let s = evolve_action(&h, &r.t, o.steps, o.trunc_x, o.trunc_q)?;
            let pulled = pullback(&s, &f0.rename_block("x", "y")?, o.order, PullbackMode::Formal)?.f;
            let es = f0.space().with_block(Block::even(EPS, 1), o.order)?;
            let eps = Jet::var(&es, es.var(EPS, 0)?);
            let direct = evolve_function(&h, &(&eps * &f0.embed(&es)?), &r.t, o.steps)?;
            Ok(compare_table(vec![("pullback of evolve_action vs evolve_function", max_diff(&pulled, &direct)?)]))
        }
        Cmd::EvolveS(_) => {
            let s = evolve_action(&h, &r.t, o.steps, o.trunc_x, o.trunc_q)?;
            if !r.compare {
                return Ok(Output::Json(s.to_json()));
            }
            let g = grid(&r.grid, n)?;
            let samples = action_from_flow(&h, r.t, &g, &g, o.steps)?;
            Ok(compare_table(vec![("evolve_action vs action_from_flow", flow_differences(s.s(), &samples)?)]))
        }
        Cmd::FlowAction(_) => {
            let g = grid(&r.grid, n)?;
            let samples = action_from_flow(&h, r.t, &g, &g, o.steps)?;
            if r.compare {
                let s = evolve_action(&h, &r.t, o.steps, o.trunc_x, o.trunc_q)?;
                return Ok(compare_table(vec![("action_from_flow vs evolve_action", flow_differences(s.s(), &samples)?)]));
            }
            let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).chain((1..=n).map(|i| format!("q{i}"))).collect();
            header.push("S".into());
            header.extend((1..=n).map(|i| format!("p0_{i}")));
            let rows = samples
                .iter()
                .map(|s| s.x.iter().chain(&s.q).copied().chain([s.s]).chain(s.p0.iter().copied()).map(fmt).collect())
                .collect();
            Ok(Output::Table { header, rows })
        }
        Cmd::Schrodinger(_) => {
            let w0 = OscillatoryFunction::<f64>::from_json(&input(r)?).map_err(|e| Error::Parse(format!("wave function: {e}")))?;
            let w0 = if w0.var() == "x" { w0 } else { w0.with_var("x")? };
            let wt = schrodinger_evolve(&h, &w0, &r.t, o.steps, o.trunc_hbar)?;
            if !r.compare {
                return Ok(Output::Json(wt.to_json()));
            }
            let h0 = match h.space().var(HBAR, 0) {
                Ok(v) => h.coefficient_of_power(v, 0).evaluate_block(HBAR, &[0.0])?,
                Err(_) => h.clone(),
            };
            let f0 = w0.phase().evaluate_block(HBAR, &[0.0])?;
            let classical = evolve_function(&h0, &f0, &r.t, o.steps)?;
            Ok(compare_table(vec![("hbar^0 phase vs evolve_function", max_diff(wt.phase(), &classical)?)]))
        }
    }
}
