use rayon::prelude::*;

use crate::error::{bail, Result};
use crate::jet::{Jet, Side};

/// A polynomial compiled for fast evaluation: terms `(c, [(slot, exponent)])`.
struct Compiled {
    terms: Vec<(f64, Vec<(usize, u16)>)>,
}

impl Compiled {
    fn new(j: &Jet<f64>) -> Self {
        let vars: Vec<_> = j.space().all_vars().collect();
        let terms = j
            .terms()
            .map(|(f, &c)| (c, f.iter().map(|&(v, e)| (vars.iter().position(|&w| w == v).unwrap(), e)).collect()))
            .collect();
        Compiled { terms }
    }

    fn eval(&self, z: &[f64]) -> f64 {
        self.terms.iter().map(|(c, f)| f.iter().fold(*c, |acc, &(i, e)| acc * z[i].powi(i32::from(e)))).sum()
    }
}

/// Hamilton's equations `ẏ = ∂H/∂p`, `q̇ = −∂H/∂x` plus the action integrand
/// `Σ yᵃq̇ₐ + H`.
struct Flow {
    n: usize,
    h: Compiled,
    dh_dp: Vec<Compiled>,
    dh_dx: Vec<Compiled>,
}

impl Flow {
    fn new(h: &Jet<f64>) -> Result<Self> {
        let space = h.space();
        let (Some(xb), Some(pb)) = (space.block("x"), space.block("p")) else {
            bail!(Shape, "Hamiltonian needs blocks `x` and `p`, got {space}");
        };
        if space.blocks().len() != 2 || xb.dim != pb.dim {
            bail!(Shape, "Hamiltonian for a numeric flow must have exactly blocks `x` and `p` of equal size");
        }
        if xb.odd.iter().chain(&pb.odd).any(|&o| o) {
            bail!(Parity, "numeric flows need even coordinates");
        }
        let xs = space.vars("x")?;
        let ps = space.vars("p")?;
        Ok(Flow {
            n: xb.dim,
            h: Compiled::new(h),
            dh_dp: ps.iter().map(|&p| Ok(Compiled::new(&h.derivative(p, Side::Left)?))).collect::<Result<_>>()?,
            dh_dx: xs.iter().map(|&x| Ok(Compiled::new(&h.derivative(x, Side::Left)?))).collect::<Result<_>>()?,
        })
    }

    /// Derivative of the state `(y, q, W)`.
    fn rhs(&self, z: &[f64]) -> Vec<f64> {
        let n = self.n;
        let pt = &z[..2 * n];
        let mut out = vec![0.0; 2 * n + 1];
        let mut w = self.h.eval(pt);
        for a in 0..n {
            out[a] = self.dh_dp[a].eval(pt);
            let qdot = -self.dh_dx[a].eval(pt);
            out[n + a] = qdot;
            w += z[a] * qdot;
        }
        out[2 * n] = w;
        out
    }

    fn run(&self, x: &[f64], p: &[f64], t: f64, steps: u32) -> Vec<f64> {
        let mut z: Vec<f64> = x.iter().chain(p).copied().chain([0.0]).collect();
        let dt = t / f64::from(steps);
        let axpy = |a: &[f64], k: &[f64], c: f64| -> Vec<f64> { a.iter().zip(k).map(|(x, y)| x + c * y).collect() };
        for _ in 0..steps {
            let k1 = self.rhs(&z);
            let k2 = self.rhs(&axpy(&z, &k1, dt / 2.0));
            let k3 = self.rhs(&axpy(&z, &k2, dt / 2.0));
            let k4 = self.rhs(&axpy(&z, &k3, dt));
            for i in 0..z.len() {
                z[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        z
    }
}

/// A phase-space point `(x, p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

/// Points moved by the Hamiltonian flow, with the accumulated action
/// `∫(Σ yᵃq̇ₐ + H)dt` per point and the largest change of the symplectic
/// area of consecutive point pairs (relative to the first point).
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianFlowState {
    pub t: f64,
    pub points: Vec<PhasePoint>,
    pub actions: Vec<f64>,
    pub area_drift: f64,
}

fn area(o: &PhasePoint, a: &PhasePoint, b: &PhasePoint) -> f64 {
    (0..o.x.len()).map(|i| (a.p[i] - o.p[i]) * (b.x[i] - o.x[i]) - (a.x[i] - o.x[i]) * (b.p[i] - o.p[i])).sum()
}

fn max_area_drift(before: &[PhasePoint], after: &[PhasePoint]) -> f64 {
    if before.len() < 3 {
        return 0.0;
    }
    (1..before.len() - 1)
        .map(|i| (area(&before[0], &before[i], &before[i + 1]) - area(&after[0], &after[i], &after[i + 1])).abs())
        .fold(0.0, f64::max)
}

/// Move `points` along the flow of `h` for time `t` with `steps` RK4 steps.
pub fn hamiltonian_flow(h: &Jet<f64>, points: &[PhasePoint], t: f64, steps: u32) -> Result<HamiltonianFlowState> {
    if steps < 1 {
        bail!(Domain, "at least one integration step is required");
    }
    let flow = Flow::new(h)?;
    let n = flow.n;
    if points.iter().any(|pt| pt.x.len() != n || pt.p.len() != n) {
        bail!(Shape, "phase points must have {n} coordinates and momenta");
    }
    let finals: Vec<Vec<f64>> = points.par_iter().map(|pt| flow.run(&pt.x, &pt.p, t, steps)).collect();
    let moved: Vec<PhasePoint> = finals.iter().map(|z| PhasePoint { x: z[..n].to_vec(), p: z[n..2 * n].to_vec() }).collect();
    Ok(HamiltonianFlowState {
        t,
        area_drift: max_area_drift(points, &moved),
        actions: finals.iter().map(|z| z[2 * n]).collect(),
        points: moved,
    })
}

/// One sample of the generating function: `S_T(x, q)` and the initial
/// momentum `p₀` of the trajectory that reaches momentum `q` at time `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowSample {
    pub x: Vec<f64>,
    pub q: Vec<f64>,
    pub s: f64,
    pub p0: Vec<f64>,
}

const NEWTON_TOL: f64 = 1e-10;
const NEWTON_ITER: usize = 50;

fn norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Gaussian elimination with partial pivoting.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[piv][c].abs() < 1e-300 {
            return None;
        }
        a.swap(c, piv);
        b.swap(c, piv);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        x[r] = (b[r] - (r + 1..n).map(|k| a[r][k] * x[k]).sum::<f64>()) / a[r][r];
    }
    Some(x)
}

fn shoot(flow: &Flow, x: &[f64], q: &[f64], t: f64, steps: u32) -> Result<FlowSample> {
    let n = flow.n;
    let residual = |p: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let z = flow.run(x, p, t, steps);
        ((0..n).map(|a| z[n + a] - q[a]).collect(), z)
    };
    let mut p = q.to_vec();
    let (mut r, mut z) = residual(&p);
    for _ in 0..NEWTON_ITER {
        if norm(&r) <= NEWTON_TOL {
            let s = x.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>() + z[2 * n];
            return Ok(FlowSample { x: x.to_vec(), q: q.to_vec(), s, p0: p });
        }
        let mut jac = vec![vec![0.0; n]; n];
        for c in 0..n {
            let d = 1e-6 * p[c].abs().max(1.0);
            let mut pp = p.clone();
            pp[c] += d;
            let mut pm = p.clone();
            pm[c] -= d;
            let (rp, _) = residual(&pp);
            let (rm, _) = residual(&pm);
            for row in 0..n {
                jac[row][c] = (rp[row] - rm[row]) / (2.0 * d);
            }
        }
        let Some(step) = solve(jac, r.iter().map(|v| -v).collect()) else { break };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial: Vec<f64> = p.iter().zip(&step).map(|(a, s)| a + lambda * s).collect();
            let (rt, zt) = residual(&trial);
            if norm(&rt) < norm(&r) {
                p = trial;
                r = rt;
                z = zt;
                accepted = true;
                break;
            }
            lambda /= 2.0;
        }
        if !accepted {
            break;
        }
    }
    bail!(Singular, "no trajectory from x = {x:?} reaches momentum q = {q:?} at time {t} (residual {:.3e})", norm(&r))
}

/// Samples of `S_T(x, q) = xᵃp₀ₐ + ∫₀ᵀ(Σ yᵃq̇ₐ + H)dt` along the trajectory
/// starting at `(x, p₀)` whose momentum at time `T` is `q`, for every pair of
/// the `x` and `q` grids. The boundary term uses the momentum at `t = 0`. `p₀` is found by damped Newton on the RK4 flow.
pub fn action_from_flow(h: &Jet<f64>, t: f64, x_grid: &[Vec<f64>], q_grid: &[Vec<f64>], steps: u32) -> Result<Vec<FlowSample>> {
    if steps < 1 {
        bail!(Domain, "at least one integration step is required");
    }
    let flow = Flow::new(h)?;
    if x_grid.iter().chain(q_grid).any(|v| v.len() != flow.n) {
        bail!(Shape, "grid points must have {} coordinates", flow.n);
    }
    let pairs: Vec<(&Vec<f64>, &Vec<f64>)> = x_grid.iter().flat_map(|x| q_grid.iter().map(move |q| (x, q))).collect();
    pairs.par_iter().map(|(x, q)| shoot(&flow, x, q, t, steps)).collect()
}
