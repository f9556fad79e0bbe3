//! Noiseless symbol-level executors.
//!
//! Each executor builds the transmit signal for a [`ChannelBlockSet`],
//! computes every receiver's observations `y(t) = h(t)^H x(t)`, runs the
//! receiver's estimation, cancellation and solve steps, and compares the
//! decoded symbols with the ground truth. Receivers decode with a map that
//! is linear in their observation row once the equivalent channels are
//! fixed; the transcript keeps that map so the [`crate::sim`] layer can
//! push noise through it.

mod delayed;
mod hybrid;
mod superposition;

pub use delayed::{run_delayed_3phase, run_mat_dynamic, run_mat_static};
pub use hybrid::{run_hybrid_pd_2phase, run_hybrid_pd_multi};
pub use superposition::{run_hybrid_pn, run_product_superposition};

use crate::model::{self, ChannelBlockSet, Csit, ModelError, ScenarioConfig, UserId};
use crate::rational::{rat, Pq, Rational};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

pub(crate) type C = Complex64;

/// Relative tolerance for comparing decoded symbols with ground truth.
pub const DECODE_TOLERANCE: f64 = 1e-9;

/// Condition number above which a zero-forcing system is rejected.
pub const CONDITION_LIMIT: f64 = 1e9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchemeError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("zero-forcing system is ill conditioned (condition number {0:.3e})")]
    IllConditioned(f64),
    #[error("solve ledger for {phase}: {equations} equations cannot determine {unknowns} unknowns")]
    Ledger { phase: String, equations: usize, unknowns: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn precondition<T>(msg: impl Into<String>) -> Result<T, SchemeError> {
    Err(SchemeError::Precondition(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeId {
    #[serde(rename = "ps")]
    ProductSuperposition,
    #[serde(rename = "mat-static")]
    MatStatic,
    #[serde(rename = "mat-dynamic")]
    MatDynamic,
    #[serde(rename = "dd3")]
    Delayed3Phase,
    #[serde(rename = "hpn")]
    HybridPn,
    #[serde(rename = "hpd2")]
    HybridPd2Phase,
    #[serde(rename = "hpd-multi")]
    HybridPdMulti,
}

impl SchemeId {
    pub const ALL: [SchemeId; 7] = [
        SchemeId::ProductSuperposition,
        SchemeId::MatStatic,
        SchemeId::MatDynamic,
        SchemeId::Delayed3Phase,
        SchemeId::HybridPn,
        SchemeId::HybridPd2Phase,
        SchemeId::HybridPdMulti,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeId::ProductSuperposition => "ps",
            SchemeId::MatStatic => "mat-static",
            SchemeId::MatDynamic => "mat-dynamic",
            SchemeId::Delayed3Phase => "dd3",
            SchemeId::HybridPn => "hpn",
            SchemeId::HybridPd2Phase => "hpd2",
            SchemeId::HybridPdMulti => "hpd-multi",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeId {
    type Err = SchemeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = SchemeId::ALL.iter().map(|id| id.name()).collect();
                SchemeError::Precondition(format!("unknown scheme {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

/// Everything needed to set up one scheme run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub scheme: SchemeId,
    #[serde(rename = "T_dynamic")]
    pub t_dynamic: usize,
    #[serde(rename = "T_static")]
    pub t_static: usize,
    pub m_static: usize,
    pub m_dynamic: usize,
    /// Dynamic user served by `hpn`.
    pub dynamic_user: usize,
}

impl SchemeParams {
    /// Fills in the scheme's fixed user counts and default coherence times
    /// and checks its preconditions. `t` is the dynamic coherence time for
    /// every scheme except `mat-static`, where it is the static one unless
    /// `t_static` is given.
    pub fn new(scheme: SchemeId, t: usize, t_static: Option<usize>, m_static: Option<usize>) -> Result<Self, SchemeError> {
        let base = |t_static, m_static, m_dynamic| SchemeParams {
            scheme,
            t_dynamic: t,
            t_static,
            m_static,
            m_dynamic,
            dynamic_user: 0,
        };
        let p = match scheme {
            SchemeId::ProductSuperposition => base(t, 1, 1),
            SchemeId::MatStatic => {
                let ts = t_static.unwrap_or(t);
                SchemeParams { t_dynamic: ts, ..base(ts, 2, 0) }
            }
            SchemeId::MatDynamic => base(t, 0, 2),
            SchemeId::Delayed3Phase => base(t_static.unwrap_or(t), 1, 1),
            SchemeId::HybridPn => base(t, m_static.unwrap_or(1), 1),
            SchemeId::HybridPd2Phase => base(2 * t, 1, 1),
            SchemeId::HybridPdMulti => base(3 * t, m_static.unwrap_or(1), 2),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SchemeError> {
        let (t, ts) = (self.t_dynamic, self.t_static);
        match self.scheme {
            SchemeId::ProductSuperposition | SchemeId::HybridPd2Phase if t < 2 => {
                precondition(format!("T = {t} must be at least 2"))
            }
            SchemeId::MatStatic if ts < 1 => precondition("T' must be at least 1"),
            SchemeId::MatStatic if self.m_static != 2 => {
                precondition(format!("mat-static runs with m' = 2 static users, got {}", self.m_static))
            }
            SchemeId::MatDynamic | SchemeId::HybridPdMulti if self.m_dynamic != 2 => {
                precondition(format!("{} runs with m = 2 dynamic users, got {}", self.scheme, self.m_dynamic))
            }
            SchemeId::MatDynamic | SchemeId::HybridPdMulti if t <= self.m_dynamic => precondition(format!(
                "T = {t} must exceed m = {} so that data slots remain after the pilots",
                self.m_dynamic
            )),
            SchemeId::Delayed3Phase if t < 3 => precondition(format!("T = {t} must be at least 3")),
            SchemeId::Delayed3Phase if ts % t != 0 => {
                precondition(format!("T' = {ts} must be divisible by T = {t}"))
            }
            SchemeId::HybridPn if t < 2 => precondition(format!("T = {t} must be at least 2")),
            SchemeId::HybridPn | SchemeId::HybridPdMulti if self.m_static == 0 => {
                precondition("at least one static user is required")
            }
            SchemeId::HybridPn if self.dynamic_user >= self.m_dynamic => {
                precondition(format!("dynamic user {} does not exist", self.dynamic_user))
            }
            _ => Ok(()),
        }
    }

    /// Channel uses consumed by one run.
    pub fn horizon(&self) -> usize {
        match self.scheme {
            SchemeId::ProductSuperposition | SchemeId::HybridPn => self.t_dynamic,
            SchemeId::MatStatic | SchemeId::Delayed3Phase => 3 * self.t_static,
            SchemeId::MatDynamic | SchemeId::HybridPdMulti => 3 * self.t_dynamic,
            SchemeId::HybridPd2Phase => 2 * self.t_dynamic,
        }
    }

    /// The scenario the scheme is designed for.
    pub fn scenario(&self) -> Result<ScenarioConfig, SchemeError> {
        let (cs, cd) = match self.scheme {
            SchemeId::ProductSuperposition => (Csit::None, Csit::None),
            SchemeId::MatStatic | SchemeId::MatDynamic | SchemeId::Delayed3Phase => (Csit::Delayed, Csit::Delayed),
            SchemeId::HybridPn => (Csit::Perfect, Csit::None),
            SchemeId::HybridPd2Phase | SchemeId::HybridPdMulti => (Csit::Perfect, Csit::Delayed),
        };
        let mut cfg =
            ScenarioConfig::new(self.m_static, self.m_dynamic, self.t_static, self.t_dynamic, cs, cd)?;
        // two antennas are needed even when a single user pair is served
        if cfg.n_tx < 2 {
            cfg = cfg.with_n_tx(2)?;
        }
        Ok(cfg)
    }

    /// The DoF tuple the scheme is designed to reach, in coordinate order.
    pub fn expected_dof(&self) -> Vec<Rational> {
        let t = self.t_dynamic as i64;
        let one = rat(1, 1);
        let mut out = vec![Rational::zero(); self.m_static + self.m_dynamic];
        match self.scheme {
            SchemeId::ProductSuperposition => {
                out[0] = rat(1, t);
                out[1] = one - rat(1, t);
            }
            SchemeId::MatStatic => out.fill(rat(2, 3)),
            SchemeId::MatDynamic => out.fill(rat(2, 3) * (one - rat(2, t))),
            SchemeId::Delayed3Phase => {
                out[0] = rat(2, 3) * (&one + rat(1, t));
                out[1] = rat(2, 3) * (one - rat(2, t));
            }
            SchemeId::HybridPn => {
                out[..self.m_static].fill(rat(1, t));
                out[self.m_static + self.dynamic_user] = one - rat(1, t);
            }
            SchemeId::HybridPd2Phase => {
                out[0] = &one - rat(1, 2 * t);
                out[1] = rat(1, 2) - rat(1, 2 * t);
            }
            SchemeId::HybridPdMulti => {
                out[..self.m_static].fill(rat(2, t));
                out[self.m_static..].fill(rat(2, 3) * (one - rat(2, t)));
            }
        }
        out
    }

    pub fn describe(&self) -> String {
        match self.scheme {
            SchemeId::MatStatic => format!("T'={}", self.t_static),
            SchemeId::Delayed3Phase => format!("T={} T'={}", self.t_dynamic, self.t_static),
            SchemeId::HybridPn | SchemeId::HybridPdMulti => format!("T={} m'={}", self.t_dynamic, self.m_static),
            _ => format!("T={}", self.t_dynamic),
        }
    }
}

/// Draws the scheme's channels from `seed` and runs it.
pub fn run(params: &SchemeParams, seed: u64) -> Result<SchemeTranscript, SchemeError> {
    params.validate()?;
    let cfg = params.scenario()?;
    let ch = model::draw_channels(&cfg, params.horizon(), seed)?;
    run_on(params, &ch)
}

/// Runs a scheme on given channels.
pub fn run_on(params: &SchemeParams, ch: &ChannelBlockSet) -> Result<SchemeTranscript, SchemeError> {
    let t = params.t_dynamic;
    match params.scheme {
        SchemeId::ProductSuperposition => run_product_superposition(ch, t),
        SchemeId::MatStatic => run_mat_static(ch, params.t_static),
        SchemeId::MatDynamic => run_mat_dynamic(ch, t),
        SchemeId::Delayed3Phase => run_delayed_3phase(ch, t, params.t_static),
        SchemeId::HybridPn => run_hybrid_pn(ch, t, params.m_static, params.dynamic_user),
        SchemeId::HybridPd2Phase => run_hybrid_pd_2phase(ch, t),
        SchemeId::HybridPdMulti => run_hybrid_pd_multi(ch, t, params.m_static),
    }
}

/// A named equivalent channel as estimated by a receiver.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalentChannel {
    pub label: String,
    pub value: Vec<C>,
}

/// Shape of one linear solve: the executor refuses to solve with fewer
/// equations than unknowns. `rank` is the smallest numerical rank seen
/// among the per-slot systems of this step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolveStep {
    pub phase: String,
    pub equations: usize,
    pub unknowns: usize,
    pub rank: usize,
}

impl SolveStep {
    pub fn full_rank(&self, per_slot_unknowns: usize) -> bool {
        self.rank >= per_slot_unknowns
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ReceiverRecord {
    pub user: UserId,
    pub observations: Vec<C>,
    pub equivalent_channels: Vec<EquivalentChannel>,
    /// Quantities handed to the receiver beyond its own observations.
    pub side_info: Vec<String>,
    pub decoded: Vec<C>,
    pub truth: Vec<C>,
    pub decode_ok: bool,
    pub max_error: f64,
    pub solves: Vec<SolveStep>,
    /// Linear decoding map, `decoded = decoder * observations`.
    #[serde(skip)]
    pub decoder: DMatrix<C>,
}

/// Decoded symbol count over the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DofCount {
    pub symbols: usize,
    pub horizon: usize,
}

impl DofCount {
    pub fn value(&self) -> Rational {
        rat(self.symbols as i64, self.horizon as i64)
    }
}

impl Serialize for DofCount {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        format!("{}/{}", self.symbols, self.horizon).serialize(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemeTranscript {
    pub params: SchemeParams,
    pub horizon: usize,
    #[serde(serialize_with = "serialize_rows")]
    pub tx_signal: DMatrix<C>,
    pub receivers: Vec<ReceiverRecord>,
    /// One entry per coordinate, statics first; unserved users count zero.
    pub dof_counts: Vec<DofCount>,
    /// Largest leakage of other users' beams into a zero-forced sample.
    pub zf_residual: Option<f64>,
    /// Average `|x(t)|^2` over the horizon with unit-power symbols.
    pub mean_tx_energy: f64,
}

fn serialize_rows<S: Serializer>(m: &DMatrix<C>, s: S) -> Result<S::Ok, S::Error> {
    let rows: Vec<Vec<C>> = (0..m.nrows()).map(|r| m.row(r).iter().copied().collect()).collect();
    rows.serialize(s)
}

impl SchemeTranscript {
    pub fn decode_ok(&self) -> bool {
        self.receivers.iter().all(|r| r.decode_ok)
    }

    pub fn dof(&self) -> Vec<Rational> {
        self.dof_counts.iter().map(DofCount::value).collect()
    }

    pub fn receiver(&self, user: UserId) -> Option<&ReceiverRecord> {
        self.receivers.iter().find(|r| r.user == user)
    }

    /// `scheme params dof=(..) decode_ok=..`
    pub fn summary_line(&self) -> String {
        let dof: Vec<String> = self.dof().iter().map(|d| Pq(d).to_string()).collect();
        format!(
            "{} {} dof=({}) decode_ok={}",
            self.params.scheme,
            self.params.describe(),
            dof.join(", "),
            self.decode_ok()
        )
    }
}

/// Receiver-side description collected by an executor.
pub(crate) struct Receiver<'a> {
    pub user: UserId,
    pub truth: Vec<C>,
    pub equivalent_channels: Vec<EquivalentChannel>,
    pub side_info: Vec<String>,
    pub solves: Vec<SolveStep>,
    pub decode: Box<dyn Fn(&[C]) -> Vec<C> + 'a>,
}

pub(crate) fn equivalent(label: &str, value: &[C]) -> EquivalentChannel {
    EquivalentChannel { label: label.to_string(), value: value.to_vec() }
}

pub(crate) fn ledger(phase: &str, equations: usize, unknowns: usize, rank: usize) -> Result<SolveStep, SchemeError> {
    if equations < unknowns {
        return Err(SchemeError::Ledger { phase: phase.to_string(), equations, unknowns });
    }
    Ok(SolveStep { phase: phase.to_string(), equations, unknowns, rank })
}

/// Noiseless observation row of one receiver.
pub(crate) fn observe(ch: &ChannelBlockSet, tx: &DMatrix<C>, user: UserId) -> Vec<C> {
    (0..tx.ncols()).map(|t| ch.gain(user, t).dotc(&tx.column(t))).collect()
}

/// Information symbols come from their own generator, keyed by the
/// channel seed, so a run is a pure function of the channel set.
pub(crate) fn symbol_rng(ch: &ChannelBlockSet) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(ch.seed ^ 0x9e37_79b9_7f4a_7c15)
}

pub(crate) fn symbols(rng: &mut ChaCha8Rng, n: usize) -> Vec<C> {
    (0..n).map(|_| model::complex_normal(rng)).collect()
}

pub(crate) fn pairs(rng: &mut ChaCha8Rng, n: usize) -> Vec<[C; 2]> {
    (0..n).map(|_| [model::complex_normal(rng), model::complex_normal(rng)]).collect()
}

/// `g^H` restricted to the first two antennas.
pub(crate) fn herm2(g: &DVector<C>) -> [C; 2] {
    [g[0].conj(), g[1].conj()]
}

pub(crate) fn dot2(a: [C; 2], b: [C; 2]) -> C {
    a[0] * b[0] + a[1] * b[1]
}

/// Cramer's rule for a 2x2 system given by its rows.
pub(crate) fn solve2(rows: [[C; 2]; 2], rhs: [C; 2]) -> [C; 2] {
    let det = rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0];
    [(rhs[0] * rows[1][1] - rows[0][1] * rhs[1]) / det, (rows[0][0] * rhs[1] - rhs[0] * rows[1][0]) / det]
}

/// Numerical rank of a 2x2 system.
pub(crate) fn rank2(rows: [[C; 2]; 2]) -> usize {
    let n0 = (rows[0][0].norm_sqr() + rows[0][1].norm_sqr()).sqrt();
    let n1 = (rows[1][0].norm_sqr() + rows[1][1].norm_sqr()).sqrt();
    let det = (rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]).norm();
    if det > 1e-12 * n0 * n1 {
        2
    } else if n0 > 0.0 || n1 > 0.0 {
        1
    } else {
        0
    }
}

pub(crate) struct Layout {
    pub horizon: usize,
    pub m_static: usize,
    pub m_dynamic: usize,
    pub n_tx: usize,
    pub t_dynamic: Option<usize>,
    pub t_static: Option<usize>,
}

/// Checks that a channel set has the block structure an executor needs.
pub(crate) fn require(ch: &ChannelBlockSet, need: Layout) -> Result<(), SchemeError> {
    if ch.horizon != need.horizon {
        return precondition(format!("horizon {} differs from the required {}", ch.horizon, need.horizon));
    }
    if ch.static_gains.len() < need.m_static {
        return precondition(format!("{} static users needed, channel has {}", need.m_static, ch.static_gains.len()));
    }
    if ch.dynamic_gains.len() < need.m_dynamic {
        return precondition(format!("{} dynamic users needed, channel has {}", need.m_dynamic, ch.dynamic_gains.len()));
    }
    if ch.n_tx < need.n_tx {
        return precondition(format!("{} transmit antennas needed, channel has {}", need.n_tx, ch.n_tx));
    }
    if let Some(t) = need.t_dynamic {
        if ch.t_dynamic != t {
            return precondition(format!("dynamic coherence {} differs from T = {t}", ch.t_dynamic));
        }
    }
    if let Some(t) = need.t_static {
        if ch.t_static != t {
            return precondition(format!("static coherence {} differs from T' = {t}", ch.t_static));
        }
    }
    Ok(())
}

/// Runs every receiver's decoder on its observations and assembles the
/// transcript.
pub(crate) fn finish(
    params: SchemeParams,
    ch: &ChannelBlockSet,
    tx: DMatrix<C>,
    receivers: Vec<Receiver<'_>>,
    zf_residual: Option<f64>,
) -> SchemeTranscript {
    let horizon = tx.ncols();
    let records: Vec<ReceiverRecord> = receivers
        .into_iter()
        .map(|r| {
            let observations = observe(ch, &tx, r.user);
            let decoded = (r.decode)(&observations);
            let mut decoder = DMatrix::zeros(decoded.len(), horizon);
            let mut impulse = vec![C::zero(); horizon];
            for t in 0..horizon {
                impulse[t] = C::new(1.0, 0.0);
                for (k, v) in (r.decode)(&impulse).into_iter().enumerate() {
                    decoder[(k, t)] = v;
                }
                impulse[t] = C::zero();
            }
            let mut max_error = 0.0f64;
            let mut ok = decoded.len() == r.truth.len();
            for (d, s) in decoded.iter().zip(&r.truth) {
                let err = (d - s).norm();
                let rel = err / s.norm().max(1.0);
                max_error = max_error.max(err);
                ok &= rel.is_finite() && rel <= DECODE_TOLERANCE;
            }
            ReceiverRecord {
                user: r.user,
                observations,
                equivalent_channels: r.equivalent_channels,
                side_info: r.side_info,
                decoded,
                truth: r.truth,
                decode_ok: ok,
                max_error,
                solves: r.solves,
                decoder,
            }
        })
        .collect();
    let users = (0..params.m_static)
        .map(UserId::Static)
        .chain((0..params.m_dynamic).map(UserId::Dynamic));
    let dof_counts = users
        .map(|u| DofCount {
            symbols: records.iter().find(|r| r.user == u).map_or(0, |r| r.truth.len()),
            horizon,
        })
        .collect();
    let mean_tx_energy = tx.column_iter().map(|c| c.norm_squared()).sum::<f64>() / horizon as f64;
    SchemeTranscript { params, horizon, tx_signal: tx, receivers: records, dof_counts, zf_residual, mean_tx_energy }
}

/// Largest tolerated leakage into a zero-forced sample.
pub const ZF_TOLERANCE: f64 = 1e-9;

/// Outcome of running a scheme over a range of seeds.
#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub params: SchemeParams,
    pub first_seed: u64,
    pub runs: u64,
    #[serde(with = "crate::rational::serde_pq_vec")]
    pub expected: Vec<Rational>,
    #[serde(with = "crate::rational::serde_pq_vec")]
    pub observed: Vec<Rational>,
    pub decode_failures: Vec<u64>,
    pub dof_mismatches: Vec<u64>,
    pub zf_failures: Vec<u64>,
    pub max_error: f64,
    pub max_zf_residual: Option<f64>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.decode_failures.is_empty() && self.dof_mismatches.is_empty() && self.zf_failures.is_empty()
    }

    pub fn summary_line(&self) -> String {
        let dof: Vec<String> = self.observed.iter().map(|d| Pq(d).to_string()).collect();
        let mut line = format!(
            "{} {} {} seeds={} dof=({}) decode_failures={} dof_mismatches={} max_error={:.3e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.params.scheme,
            self.params.describe(),
            self.runs,
            dof.join(", "),
            self.decode_failures.len(),
            self.dof_mismatches.len(),
            self.max_error
        );
        if let Some(r) = self.max_zf_residual {
            line.push_str(&format!(" zf_residual={r:.3e}"));
        }
        line
    }
}

/// Runs `params` for seeds `first_seed..first_seed + runs` and checks
/// decoding, the DoF count against [`SchemeParams::expected_dof`] and any
/// zero-forcing residual.
pub fn verify_seeds(
    params: &SchemeParams,
    first_seed: u64,
    runs: u64,
    exec: crate::exec::Execution,
) -> Result<VerifyReport, SchemeError> {
    params.validate()?;
    let expected = params.expected_dof();
    let results = exec.map_range(first_seed..first_seed + runs, |seed| run(params, seed).map(|t| (seed, t)));
    let mut report = VerifyReport {
        params: params.clone(),
        first_seed,
        runs,
        expected: expected.clone(),
        observed: Vec::new(),
        decode_failures: Vec::new(),
        dof_mismatches: Vec::new(),
        zf_failures: Vec::new(),
        max_error: 0.0,
        max_zf_residual: None,
    };
    for r in results {
        let (seed, tr) = r?;
        let dof = tr.dof();
        if report.observed.is_empty() {
            report.observed = dof.clone();
        }
        if !tr.decode_ok() {
            report.decode_failures.push(seed);
        }
        if dof != expected {
            report.dof_mismatches.push(seed);
        }
        if let Some(z) = tr.zf_residual {
            report.max_zf_residual = Some(report.max_zf_residual.map_or(z, |m: f64| m.max(z)));
            if !(z < ZF_TOLERANCE) {
                report.zf_failures.push(seed);
            }
        }
        for rec in &tr.receivers {
            report.max_error = report.max_error.max(rec.max_error);
        }
    }
    Ok(report)
}
