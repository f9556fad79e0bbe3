//! Scenario description, block-fading channel draws and CSI visibility.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error("horizon {horizon} is not a multiple of the {group} coherence time {coherence}")]
    Structure { horizon: usize, group: &'static str, coherence: usize },
    #[error("static coherence time {t_static} is not divisible by dynamic coherence time {t_dynamic}")]
    Divisibility { t_static: usize, t_dynamic: usize },
    #[error("unknown node {0}")]
    UnknownNode(Node),
    #[error("time {time} is outside the horizon {horizon}")]
    TimeOutOfRange { time: usize, horizon: usize },
    #[error("malformed scenario JSON: {0}")]
    Json(String),
}

/// Channel knowledge available at the transmitter for one user group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Csit {
    Perfect,
    Delayed,
    None,
}

/// Counts, coherence times and CSIT pattern of one broadcast instance.
///
/// Coherence times are in channel uses. The transmitter has at least one
/// antenna per user.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawScenarioConfig")]
pub struct ScenarioConfig {
    pub m_static: usize,
    pub m_dynamic: usize,
    #[serde(rename = "T_static")]
    pub t_static: usize,
    #[serde(rename = "T_dynamic")]
    pub t_dynamic: usize,
    pub n_tx: usize,
    pub csit_static: Csit,
    pub csit_dynamic: Csit,
    pub aligned: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenarioConfig {
    m_static: usize,
    m_dynamic: usize,
    #[serde(rename = "T_static")]
    t_static: usize,
    #[serde(rename = "T_dynamic")]
    t_dynamic: usize,
    #[serde(default)]
    n_tx: Option<usize>,
    csit_static: Csit,
    csit_dynamic: Csit,
    #[serde(default)]
    aligned: bool,
}

impl TryFrom<RawScenarioConfig> for ScenarioConfig {
    type Error = ModelError;

    fn try_from(raw: RawScenarioConfig) -> Result<Self, Self::Error> {
        let cfg = ScenarioConfig {
            m_static: raw.m_static,
            m_dynamic: raw.m_dynamic,
            t_static: raw.t_static,
            t_dynamic: raw.t_dynamic,
            n_tx: raw.n_tx.unwrap_or(raw.m_static + raw.m_dynamic),
            csit_static: raw.csit_static,
            csit_dynamic: raw.csit_dynamic,
            aligned: raw.aligned,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl ScenarioConfig {
    /// Minimal antenna count, unaligned blocks.
    pub fn new(
        m_static: usize,
        m_dynamic: usize,
        t_static: usize,
        t_dynamic: usize,
        csit_static: Csit,
        csit_dynamic: Csit,
    ) -> Result<Self, ModelError> {
        let cfg = Self {
            m_static,
            m_dynamic,
            t_static,
            t_dynamic,
            n_tx: m_static + m_dynamic,
            csit_static,
            csit_dynamic,
            aligned: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_n_tx(mut self, n_tx: usize) -> Result<Self, ModelError> {
        self.n_tx = n_tx;
        self.validate()?;
        Ok(self)
    }

    /// Marks the static and dynamic blocks as aligned (`T' = T`, zero offset).
    pub fn aligned(mut self) -> Result<Self, ModelError> {
        self.aligned = true;
        self.validate()?;
        Ok(self)
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        serde_json::from_str(text).map_err(|e| ModelError::Json(e.to_string()))
    }

    pub fn users(&self) -> usize {
        self.m_static + self.m_dynamic
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::InvalidConfig(m));
        if self.users() == 0 {
            return bad("at least one user is required".into());
        }
        if self.n_tx < self.users() {
            return bad(format!("n_tx = {} is below m_static + m_dynamic = {}", self.n_tx, self.users()));
        }
        if self.t_static == 0 {
            return bad("T_static must be positive".into());
        }
        if self.m_dynamic > 0 {
            if self.t_dynamic < 2 {
                return bad(format!("T_dynamic = {} must be at least 2", self.t_dynamic));
            }
            if self.m_static > 0 && self.t_static < self.t_dynamic {
                return bad(format!(
                    "T_static = {} is below T_dynamic = {}",
                    self.t_static, self.t_dynamic
                ));
            }
        }
        if self.aligned && self.t_static != self.t_dynamic {
            return bad("aligned requires T_static = T_dynamic".into());
        }
        Ok(())
    }

    /// Number of dynamic blocks per static block, `T' / T`.
    pub fn blocks_per_static(&self) -> Result<usize, ModelError> {
        if self.t_dynamic == 0 || self.t_static % self.t_dynamic != 0 {
            return Err(ModelError::Divisibility { t_static: self.t_static, t_dynamic: self.t_dynamic });
        }
        Ok(self.t_static / self.t_dynamic)
    }

    /// True when the static and dynamic blocks coincide.
    pub fn is_aligned(&self) -> bool {
        self.aligned && self.t_static == self.t_dynamic
    }
}

/// A receiver, indexed from zero within its group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum UserId {
    Static(usize),
    Dynamic(usize),
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UserId::Static(j) => write!(f, "static{}", j + 1),
            UserId::Dynamic(i) => write!(f, "dynamic{}", i + 1),
        }
    }
}

/// A node whose channel knowledge is queried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Node {
    Transmitter,
    Receiver(UserId),
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Transmitter => f.write_str("transmitter"),
            Node::Receiver(u) => u.fmt(f),
        }
    }
}

/// Realized block-fading gains over a horizon.
///
/// `static_gains[j][b]` is the `n_tx`-vector `g_j` of static block `b`;
/// `dynamic_gains[i][b]` is `h_i` of dynamic block `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelBlockSet {
    pub horizon: usize,
    pub n_tx: usize,
    pub t_static: usize,
    pub t_dynamic: usize,
    pub static_gains: Vec<Vec<DVector<Complex64>>>,
    pub dynamic_gains: Vec<Vec<DVector<Complex64>>>,
    pub seed: u64,
}

impl ChannelBlockSet {
    pub fn static_block(&self, time: usize) -> usize {
        time / self.t_static
    }

    pub fn dynamic_block(&self, time: usize) -> usize {
        time / self.t_dynamic
    }

    pub fn static_gain(&self, j: usize, time: usize) -> &DVector<Complex64> {
        &self.static_gains[j][self.static_block(time)]
    }

    pub fn dynamic_gain(&self, i: usize, time: usize) -> &DVector<Complex64> {
        &self.dynamic_gains[i][self.dynamic_block(time)]
    }

    pub fn gain(&self, user: UserId, time: usize) -> &DVector<Complex64> {
        match user {
            UserId::Static(j) => self.static_gain(j, time),
            UserId::Dynamic(i) => self.dynamic_gain(i, time),
        }
    }
}

/// Draw of a circularly symmetric standard complex Gaussian.
pub fn complex_normal<R: rand::Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

const GROUP_STATIC: u64 = 0;
const GROUP_DYNAMIC: u64 = 1;

/// Gain vector for one `(group, user, block)` cell. Each cell has its own
/// ChaCha stream, so a gain does not depend on which other cells were drawn.
fn block_gain(seed: u64, group: u64, user: usize, block: usize, n_tx: usize) -> DVector<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((group << 63) | ((user as u64 & 0x7fff) << 48) | (block as u64 & 0xffff_ffff_ffff));
    DVector::from_fn(n_tx, |_, _| complex_normal(&mut rng))
}

/// Independent Rayleigh block-fading gains for every user and block.
pub fn draw_channels(cfg: &ScenarioConfig, horizon: usize, seed: u64) -> Result<ChannelBlockSet, ModelError> {
    cfg.validate()?;
    if horizon == 0 {
        return Err(ModelError::Structure { horizon, group: "static", coherence: cfg.t_static });
    }
    if cfg.m_static > 0 && horizon % cfg.t_static != 0 {
        return Err(ModelError::Structure { horizon, group: "static", coherence: cfg.t_static });
    }
    if cfg.m_dynamic > 0 && horizon % cfg.t_dynamic != 0 {
        return Err(ModelError::Structure { horizon, group: "dynamic", coherence: cfg.t_dynamic });
    }
    let static_blocks = horizon.div_ceil(cfg.t_static);
    let dynamic_blocks = if cfg.m_dynamic > 0 { horizon / cfg.t_dynamic } else { 0 };
    let static_gains = (0..cfg.m_static)
        .map(|j| (0..static_blocks).map(|b| block_gain(seed, GROUP_STATIC, j, b, cfg.n_tx)).collect())
        .collect();
    let dynamic_gains = (0..cfg.m_dynamic)
        .map(|i| (0..dynamic_blocks).map(|b| block_gain(seed, GROUP_DYNAMIC, i, b, cfg.n_tx)).collect())
        .collect();
    Ok(ChannelBlockSet {
        horizon,
        n_tx: cfg.n_tx,
        t_static: cfg.t_static,
        t_dynamic: cfg.t_dynamic.max(1),
        static_gains,
        dynamic_gains,
        seed,
    })
}

/// One gain entry visible to a node.
#[derive(Debug, Clone, PartialEq)]
pub struct KnownGain {
    pub user: UserId,
    pub block: usize,
    pub gain: DVector<Complex64>,
}

/// Everything a node knows about the channel at one channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct CsiView {
    pub node: Node,
    pub time: usize,
    pub known_gains: Vec<KnownGain>,
}

impl CsiView {
    pub fn knows(&self, user: UserId, block: usize) -> bool {
        self.known_gains.iter().any(|k| k.user == user && k.block == block)
    }
}

/// Blocks of length `coherence` visible at `time` under a CSIT mode.
fn visible_blocks(mode: Csit, coherence: usize, time: usize) -> std::ops::Range<usize> {
    let current = time / coherence;
    match mode {
        Csit::Perfect => 0..current + 1,
        // block b ends at (b + 1) * coherence - 1, visible strictly after
        Csit::Delayed => 0..current,
        Csit::None => 0..0,
    }
}

/// Channel knowledge of `node` at `time`.
///
/// The transmitter follows the CSIT mode of each group. A static receiver
/// always knows its own current and past gains and, for each group whose CSIT is
/// delayed, the completed blocks of the other users in that group. Dynamic
/// receivers know no gains a priori.
pub fn csi_at(cfg: &ScenarioConfig, ch: &ChannelBlockSet, node: Node, time: usize) -> Result<CsiView, ModelError> {
    if time >= ch.horizon {
        return Err(ModelError::TimeOutOfRange { time, horizon: ch.horizon });
    }
    let mut known = Vec::new();
    fn push_group(
        known: &mut Vec<KnownGain>,
        user_of: fn(usize) -> UserId,
        gains: &[Vec<DVector<Complex64>>],
        blocks: std::ops::Range<usize>,
    ) {
        for (u, per_block) in gains.iter().enumerate() {
            for b in blocks.clone() {
                known.push(KnownGain { user: user_of(u), block: b, gain: per_block[b].clone() });
            }
        }
    }
    match node {
        Node::Transmitter => {
            push_group(&mut known, UserId::Static, &ch.static_gains, visible_blocks(cfg.csit_static, ch.t_static, time));
            push_group(&mut known, UserId::Dynamic, &ch.dynamic_gains, visible_blocks(cfg.csit_dynamic, ch.t_dynamic, time));
        }
        Node::Receiver(UserId::Static(j)) => {
            if j >= cfg.m_static {
                return Err(ModelError::UnknownNode(node));
            }
            for b in 0..=ch.static_block(time) {
                known.push(KnownGain { user: UserId::Static(j), block: b, gain: ch.static_gains[j][b].clone() });
            }
            if cfg.csit_static == Csit::Delayed {
                let others: Vec<_> = (0..cfg.m_static).filter(|&k| k != j).collect();
                for k in others {
                    for b in visible_blocks(Csit::Delayed, ch.t_static, time) {
                        known.push(KnownGain { user: UserId::Static(k), block: b, gain: ch.static_gains[k][b].clone() });
                    }
                }
            }
            if cfg.csit_dynamic == Csit::Delayed {
                push_group(&mut known, UserId::Dynamic, &ch.dynamic_gains, visible_blocks(Csit::Delayed, ch.t_dynamic, time));
            }
        }
        Node::Receiver(UserId::Dynamic(i)) => {
            if i >= cfg.m_dynamic {
                return Err(ModelError::UnknownNode(node));
            }
        }
    }
    Ok(CsiView { node, time, known_gains: known })
}
