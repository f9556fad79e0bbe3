//! Finite-alphabet multilevel broadcast channel with two degradation chains.
//!
//! The static chain is `X -> Y'_1 -> ... -> Y'_{m'}` and the dynamic chain is
//! `X -> Y_1 -> ... -> Y_m`; each stage is a row-stochastic matrix from the
//! previous alphabet. [`degraded_message_region`] evaluates the degraded-message-set
//! rate region (common rate `R0` to everyone, private rate `R1` to `Y_1`)
//! by lattice search over `p(u, v)` and `p(x | v)`.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;

const STOCHASTIC_TOL: f64 = 1e-12;
const FACTOR_TOL: f64 = 1e-10;
const DPI_TOL: f64 = 1e-9;
/// Largest number of (p(u,v), p(x|v)) pairs a search may visit.
pub const GRID_LIMIT: u128 = 10_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum DmcError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("row {row} of {chain} stage {stage} is not a distribution")]
    NotStochastic { chain: &'static str, stage: usize, row: usize },
    #[error("invalid search parameter: {0}")]
    Parameter(String),
    #[error("grid has {0} points, over the limit of {GRID_LIMIT}")]
    GridTooLarge(u128),
    #[error("json: {0}")]
    Json(String),
}

pub type Matrix = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DmcSpec {
    pub x_card: usize,
    pub static_chain: Vec<Matrix>,
    pub dynamic_chain: Vec<Matrix>,
}

impl DmcSpec {
    pub fn new(x_card: usize, static_chain: Vec<Matrix>, dynamic_chain: Vec<Matrix>) -> Result<Self, DmcError> {
        let spec = DmcSpec { x_card, static_chain, dynamic_chain };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json(text: &str) -> Result<Self, DmcError> {
        let spec: DmcSpec = serde_json::from_str(text).map_err(|e| DmcError::Json(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), DmcError> {
        if self.x_card == 0 {
            return Err(DmcError::Shape("empty input alphabet".into()));
        }
        for (name, chain) in [("static", &self.static_chain), ("dynamic", &self.dynamic_chain)] {
            if chain.is_empty() {
                return Err(DmcError::Shape(format!("{name} chain has no stages")));
            }
            let mut inputs = self.x_card;
            for (stage, m) in chain.iter().enumerate() {
                if m.len() != inputs {
                    return Err(DmcError::Shape(format!(
                        "{name} stage {stage} has {} rows, expected {inputs}",
                        m.len()
                    )));
                }
                let outputs = m[0].len();
                if outputs == 0 || m.iter().any(|r| r.len() != outputs) {
                    return Err(DmcError::Shape(format!("{name} stage {stage} is ragged or empty")));
                }
                for (row, r) in m.iter().enumerate() {
                    let sum: f64 = r.iter().sum();
                    if r.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > STOCHASTIC_TOL {
                        return Err(DmcError::NotStochastic { chain: name, stage, row });
                    }
                }
                inputs = outputs;
            }
        }
        Ok(())
    }

    /// End-to-end `p(y | x)` for every stage of a chain.
    pub fn end_to_end(chain: &[Matrix]) -> Vec<Matrix> {
        let mut out: Vec<Matrix> = Vec::with_capacity(chain.len());
        for m in chain {
            let next = match out.last() {
                None => m.clone(),
                Some(prev) => compose(prev, m),
            };
            out.push(next);
        }
        out
    }

    pub fn static_end_to_end(&self) -> Vec<Matrix> {
        Self::end_to_end(&self.static_chain)
    }

    pub fn dynamic_end_to_end(&self) -> Vec<Matrix> {
        Self::end_to_end(&self.dynamic_chain)
    }
}

/// Matrix product `a b` of two stochastic maps.
pub fn compose(a: &Matrix, b: &Matrix) -> Matrix {
    a.iter()
        .map(|row| (0..b[0].len()).map(|k| row.iter().zip(b).map(|(p, r)| p * r[k]).sum()).collect())
        .collect()
}

/// Degradedness of one adjacent pair of receivers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegradedCheck {
    pub chain: &'static str,
    pub stage: usize,
    pub degraded: bool,
    pub residual: f64,
}

/// For every adjacent pair in both chains, checks that the end-to-end
/// channel to stage `k+1` equals the channel to stage `k` followed by the
/// given intermediate matrix. The right-hand side is recomputed by summing
/// over every intermediate path so the check does not reuse [`compose`].
pub fn check_degraded(spec: &DmcSpec) -> Result<Vec<DegradedCheck>, DmcError> {
    spec.validate()?;
    let mut out = Vec::new();
    for (name, chain) in [("static", &spec.static_chain), ("dynamic", &spec.dynamic_chain)] {
        let e2e = DmcSpec::end_to_end(chain);
        for stage in 0..chain.len().saturating_sub(1) {
            let upstream = &e2e[stage];
            let link = &chain[stage + 1];
            let target = &e2e[stage + 1];
            let mut residual = 0.0f64;
            for x in 0..spec.x_card {
                for z in 0..link[0].len() {
                    let mut via = 0.0;
                    for y in 0..link.len() {
                        via += upstream[x][y] * link[y][z];
                    }
                    residual = residual.max((via - target[x][z]).abs());
                }
            }
            out.push(DegradedCheck { chain: name, stage, degraded: residual < FACTOR_TOL, residual });
        }
    }
    Ok(out)
}

/// Binary symmetric channel with crossover `p`.
pub fn bsc(p: f64) -> Matrix {
    vec![vec![1.0 - p, p], vec![p, 1.0 - p]]
}

pub fn identity(n: usize) -> Matrix {
    (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
}

/// Common/private rate pair in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePair {
    pub r0: f64,
    pub r1: f64,
}

impl RatePair {
    pub fn dominates(&self, other: &RatePair) -> bool {
        self.r0 >= other.r0 && self.r1 >= other.r1
    }
}

fn entropy(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// `I(A; Y)` from `p(a)`, `p(x | a)` and `p(y | x)`.
fn mutual_information(pa: &[f64], x_given_a: &[Vec<f64>], y_given_x: &Matrix) -> f64 {
    let ny = y_given_x[0].len();
    let mut py = vec![0.0; ny];
    let mut cond = 0.0;
    for (a, &w) in pa.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let mut pya = vec![0.0; ny];
        for (x, &px) in x_given_a[a].iter().enumerate() {
            for y in 0..ny {
                pya[y] += px * y_given_x[x][y];
            }
        }
        cond += w * entropy(&pya);
        for y in 0..ny {
            py[y] += w * pya[y];
        }
    }
    entropy(&py) - cond
}

/// Rate constraints of one auxiliary distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    /// `min(I(U; Y_m), I(V; Y'_{m'}))`
    pub common: f64,
    /// `I(X; Y_1 | U)`
    pub private: f64,
    /// `I(V; Y'_{m'}) + I(X; Y_1 | V)`
    pub sum: f64,
}

impl Bounds {
    /// Corner points of `{R0 <= common, R1 <= private, R0 + R1 <= sum}`.
    pub fn corners(&self) -> [RatePair; 2] {
        let c = self.common.max(0.0);
        let p = self.private.max(0.0);
        let s = self.sum.max(0.0);
        let r0 = c.min(s);
        let r1 = p.min(s);
        [RatePair { r0, r1: p.min(s - r0).max(0.0) }, RatePair { r0: c.min(s - r1).max(0.0), r1 }]
    }
}

/// Auxiliary distribution `p(u, v)` and test channel `p(x | v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Auxiliary {
    /// Row-major `u_card x v_card`.
    pub p_uv: Vec<Vec<f64>>,
    pub x_given_v: Vec<Vec<f64>>,
}

/// Mutual informations of one auxiliary distribution along both chains.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub bounds: Bounds,
    /// `I(U; Y_i)` and `I(V; Y_i)` per dynamic stage.
    pub u_dynamic: Vec<f64>,
    pub v_dynamic: Vec<f64>,
    /// `I(U; Y'_j)` and `I(V; Y'_j)` per static stage.
    pub u_static: Vec<f64>,
    pub v_static: Vec<f64>,
}

impl Evaluation {
    /// Number of data-processing inequalities this evaluation breaks: along
    /// each chain information may only decrease, and `U` never carries more
    /// than `V` about any output.
    pub fn dpi_violations(&self) -> usize {
        let down = |v: &[f64]| v.windows(2).filter(|w| w[1] > w[0] + DPI_TOL).count();
        let uv = |u: &[f64], v: &[f64]| u.iter().zip(v).filter(|(a, b)| **a > **b + DPI_TOL).count();
        down(&self.u_dynamic)
            + down(&self.v_dynamic)
            + down(&self.u_static)
            + down(&self.v_static)
            + uv(&self.u_dynamic, &self.v_dynamic)
            + uv(&self.u_static, &self.v_static)
    }
}

/// Precomputed end-to-end channels.
pub struct Evaluator {
    statics: Vec<Matrix>,
    dynamics: Vec<Matrix>,
}

impl Evaluator {
    pub fn new(spec: &DmcSpec) -> Self {
        Evaluator { statics: spec.static_end_to_end(), dynamics: spec.dynamic_end_to_end() }
    }

    pub fn evaluate(&self, aux: &Auxiliary) -> Evaluation {
        let v_card = aux.x_given_v.len();
        let x_card = aux.x_given_v[0].len();
        let pu: Vec<f64> = aux.p_uv.iter().map(|r| r.iter().sum()).collect();
        let pv: Vec<f64> = (0..v_card).map(|v| aux.p_uv.iter().map(|r| r[v]).sum()).collect();
        // p(x | u)
        let x_given_u: Vec<Vec<f64>> = aux
            .p_uv
            .iter()
            .zip(&pu)
            .map(|(row, &w)| {
                (0..x_card)
                    .map(|x| if w > 0.0 { row.iter().zip(&aux.x_given_v).map(|(p, xv)| p * xv[x]).sum::<f64>() / w } else { 0.0 })
                    .collect()
            })
            .collect();
        let px: Vec<f64> = (0..x_card).map(|x| pv.iter().zip(&aux.x_given_v).map(|(p, xv)| p * xv[x]).sum()).collect();
        let point = |x: usize| -> Vec<f64> { (0..x_card).map(|k| if k == x { 1.0 } else { 0.0 }).collect() };
        let x_given_x: Vec<Vec<f64>> = (0..x_card).map(point).collect();

        let info = |pa: &[f64], xa: &[Vec<f64>], chans: &[Matrix]| -> Vec<f64> {
            chans.iter().map(|c| mutual_information(pa, xa, c)).collect()
        };
        let u_dynamic = info(&pu, &x_given_u, &self.dynamics);
        let v_dynamic = info(&pv, &aux.x_given_v, &self.dynamics);
        let u_static = info(&pu, &x_given_u, &self.statics);
        let v_static = info(&pv, &aux.x_given_v, &self.statics);
        let x_y1 = mutual_information(&px, &x_given_x, &self.dynamics[0]);

        // I(X; Y1 | A) = I(X; Y1) - I(A; Y1) along A -> X -> Y1
        let bounds = Bounds {
            common: u_dynamic[u_dynamic.len() - 1].min(v_static[v_static.len() - 1]),
            private: x_y1 - u_dynamic[0],
            sum: v_static[v_static.len() - 1] + x_y1 - v_dynamic[0],
        };
        Evaluation { bounds, u_dynamic, v_dynamic, u_static, v_static }
    }
}

/// All points of the simplex lattice `{p : sum p = 1, p_i in {0, 1/n, ..}}`
/// over `k` cells, in lexicographic order of the integer numerators.
pub fn simplex_lattice(k: usize, n: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() == k - 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / n as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(k, left - c, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(k, n, n, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Number of lattice points on a `k`-cell simplex with `n` steps.
pub fn lattice_size(k: usize, n: usize) -> u128 {
    // C(n + k - 1, k - 1)
    let mut c: u128 = 1;
    for i in 0..(k as u128 - 1) {
        c = c * (n as u128 + 1 + i) / (i + 1);
    }
    c
}

fn steps_for(grid_step: f64) -> Result<usize, DmcError> {
    if !(grid_step > 0.0 && grid_step <= 0.5) {
        return Err(DmcError::Parameter(format!("grid step {grid_step} outside (0, 1/2]")));
    }
    let n = (1.0 / grid_step).round();
    if (n * grid_step - 1.0).abs() > 1e-9 {
        return Err(DmcError::Parameter(format!("grid step {grid_step} is not 1/n")));
    }
    Ok(n as usize)
}

/// Grid size of a search, checked against [`GRID_LIMIT`].
pub fn grid_points(x_card: usize, u_card: usize, v_card: usize, grid_step: f64) -> Result<u128, DmcError> {
    let n = steps_for(grid_step)?;
    let mut total = lattice_size(u_card * v_card, n);
    let per_v = lattice_size(x_card, n);
    for _ in 0..v_card {
        total = total.saturating_mul(per_v);
        if total > GRID_LIMIT {
            return Err(DmcError::GridTooLarge(total));
        }
    }
    if total > GRID_LIMIT {
        return Err(DmcError::GridTooLarge(total));
    }
    Ok(total)
}

/// Keeps only undominated pairs, sorted by increasing `r0`.
pub fn pareto(mut points: Vec<RatePair>) -> Vec<RatePair> {
    points.sort_by(|a, b| b.r0.total_cmp(&a.r0).then(b.r1.total_cmp(&a.r1)));
    let mut out: Vec<RatePair> = Vec::new();
    let mut best_r1 = f64::NEG_INFINITY;
    for p in points {
        if p.r1 > best_r1 {
            best_r1 = p.r1;
            out.push(p);
        }
    }
    out.reverse();
    out
}

/// Frontier plus bookkeeping from a lattice search.
#[derive(Debug, Clone, Serialize)]
pub struct RegionSearch {
    pub frontier: Vec<RatePair>,
    pub evaluated: u64,
    pub dpi_violations: u64,
}

/// Degraded-message-set rate region by lattice search over auxiliary
/// distributions. The returned frontier is an inner approximation that can
/// only grow as `grid_step` shrinks through divisors.
pub fn degraded_message_region(
    spec: &DmcSpec,
    u_card: usize,
    v_card: usize,
    grid_step: f64,
    exec: Execution,
) -> Result<RegionSearch, DmcError> {
    spec.validate()?;
    if u_card == 0 || v_card == 0 {
        return Err(DmcError::Parameter("auxiliary cardinalities must be at least 1".into()));
    }
    grid_points(spec.x_card, u_card, v_card, grid_step)?;
    let n = steps_for(grid_step)?;
    let evaluator = Evaluator::new(spec);
    let joint = simplex_lattice(u_card * v_card, n);
    let rows = simplex_lattice(spec.x_card, n);
    let channels = v_card as u32;
    let per_joint = (rows.len() as u64).pow(channels);

    let shards = exec.map_slice(&joint, |flat| {
        let p_uv: Vec<Vec<f64>> = flat.chunks(v_card).map(|c| c.to_vec()).collect();
        let mut candidates = Vec::new();
        let mut violations = 0u64;
        for index in 0..per_joint {
            let mut rest = index;
            let x_given_v: Vec<Vec<f64>> = (0..v_card)
                .map(|_| {
                    let r = rows[(rest % rows.len() as u64) as usize].clone();
                    rest /= rows.len() as u64;
                    r
                })
                .collect();
            let eval = evaluator.evaluate(&Auxiliary { p_uv: p_uv.clone(), x_given_v });
            violations += eval.dpi_violations() as u64;
            candidates.extend(eval.bounds.corners());
        }
        (pareto(candidates), violations)
    });
    let mut all = Vec::new();
    let mut dpi_violations = 0;
    for (front, v) in shards {
        all.extend(front);
        dpi_violations += v;
    }
    Ok(RegionSearch { frontier: pareto(all), evaluated: joint.len() as u64 * per_joint, dpi_violations })
}

/// True when every point of `coarse` is weakly dominated by a point of
/// `fine` up to `tol`.
pub fn frontier_dominated(coarse: &[RatePair], fine: &[RatePair], tol: f64) -> bool {
    coarse.iter().all(|c| fine.iter().any(|f| f.r0 + tol >= c.r0 && f.r1 + tol >= c.r1))
}

/// `r0,r1`
pub fn write_frontier_csv<W: Write>(mut w: W, frontier: &[RatePair]) -> io::Result<()> {
    writeln!(w, "r0,r1")?;
    for p in frontier {
        writeln!(w, "{},{}", p.r0, p.r1)?;
    }
    Ok(())
}
