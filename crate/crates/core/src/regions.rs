//! Inner (achievable) and outer DoF regions for each CSIT family.
//!
//! Coordinates are ordered static users first, then dynamic users:
//! `(d'_1, ..., d'_{m'}, d_1, ..., d_m)`.

use crate::geometry::{self, DofRegion, GeometryError, Halfspace};
use crate::model::{Csit, ModelError, ScenarioConfig};
use crate::rational::{self, harmonic, int, rat, Rational};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RegionError {
    #[error("family {tag} does not match the scenario: {reason}")]
    Unsupported { tag: FamilyTag, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FamilyTag {
    NoCsit,
    DelayedAll,
    DelayedStaticOnly,
    DelayedDynamicOnly,
    HybridPerfectNone,
    HybridPerfectDelayed,
}

impl FamilyTag {
    pub const ALL: [FamilyTag; 6] = [
        FamilyTag::NoCsit,
        FamilyTag::DelayedAll,
        FamilyTag::DelayedStaticOnly,
        FamilyTag::DelayedDynamicOnly,
        FamilyTag::HybridPerfectNone,
        FamilyTag::HybridPerfectDelayed,
    ];
}

impl fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A scenario together with the CSIT family whose regions apply to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScenarioFamily {
    pub tag: FamilyTag,
    pub cfg: ScenarioConfig,
}

impl ScenarioFamily {
    pub fn new(tag: FamilyTag, cfg: ScenarioConfig) -> Result<Self, RegionError> {
        cfg.validate()?;
        let unsupported = |reason: &str| Err(RegionError::Unsupported { tag, reason: reason.to_string() });
        let both = cfg.m_static > 0 && cfg.m_dynamic > 0;
        let (cs, cd) = (cfg.csit_static, cfg.csit_dynamic);
        match tag {
            FamilyTag::DelayedStaticOnly => {
                if cfg.m_dynamic != 0 || cs != Csit::Delayed {
                    return unsupported("needs delayed static CSIT and no dynamic users");
                }
            }
            FamilyTag::DelayedDynamicOnly => {
                if cfg.m_static != 0 || cd != Csit::Delayed {
                    return unsupported("needs delayed dynamic CSIT and no static users");
                }
            }
            _ if !both => return unsupported("needs at least one static and one dynamic user"),
            FamilyTag::NoCsit if (cs, cd) != (Csit::None, Csit::None) => {
                return unsupported("needs csit_static = None and csit_dynamic = None")
            }
            FamilyTag::DelayedAll if (cs, cd) != (Csit::Delayed, Csit::Delayed) => {
                return unsupported("needs csit_static = Delayed and csit_dynamic = Delayed")
            }
            FamilyTag::HybridPerfectNone if (cs, cd) != (Csit::Perfect, Csit::None) => {
                return unsupported("needs csit_static = Perfect and csit_dynamic = None")
            }
            FamilyTag::HybridPerfectDelayed if (cs, cd) != (Csit::Perfect, Csit::Delayed) => {
                return unsupported("needs csit_static = Perfect and csit_dynamic = Delayed")
            }
            _ => {}
        }
        Ok(Self { tag, cfg })
    }

    /// Picks the family from the CSIT fields and user counts.
    pub fn from_config(cfg: ScenarioConfig) -> Result<Self, RegionError> {
        let tag = match (cfg.m_static, cfg.m_dynamic, cfg.csit_static, cfg.csit_dynamic) {
            (_, 0, Csit::Delayed, _) => FamilyTag::DelayedStaticOnly,
            (0, _, _, Csit::Delayed) => FamilyTag::DelayedDynamicOnly,
            (_, _, Csit::None, Csit::None) => FamilyTag::NoCsit,
            (_, _, Csit::Delayed, Csit::Delayed) => FamilyTag::DelayedAll,
            (_, _, Csit::Perfect, Csit::None) => FamilyTag::HybridPerfectNone,
            (_, _, Csit::Perfect, Csit::Delayed) => FamilyTag::HybridPerfectDelayed,
            _ => {
                return Err(RegionError::Unsupported {
                    tag: FamilyTag::NoCsit,
                    reason: format!(
                        "no region is known for csit_static = {:?}, csit_dynamic = {:?}",
                        cfg.csit_static, cfg.csit_dynamic
                    ),
                })
            }
        };
        Self::new(tag, cfg)
    }

    pub fn dim(&self) -> usize {
        self.cfg.users()
    }

    /// Axis labels `s1..`, `d1..` in coordinate order.
    pub fn labels(&self) -> Vec<String> {
        (1..=self.cfg.m_static)
            .map(|j| format!("s{j}"))
            .chain((1..=self.cfg.m_dynamic).map(|i| format!("d{i}")))
            .collect()
    }
}

/// Coordinate builder for one scenario.
struct Coords {
    ms: usize,
    md: usize,
}

impl Coords {
    fn new(cfg: &ScenarioConfig) -> Self {
        Self { ms: cfg.m_static, md: cfg.m_dynamic }
    }

    fn dim(&self) -> usize {
        self.ms + self.md
    }

    fn zero(&self) -> Vec<Rational> {
        vec![Rational::zero(); self.dim()]
    }

    fn statics(&self) -> std::ops::Range<usize> {
        0..self.ms
    }

    fn dynamics(&self) -> std::ops::Range<usize> {
        self.ms..self.ms + self.md
    }

    /// `a` on every static axis, `b` on every dynamic axis.
    fn weighted(&self, a: &Rational, b: &Rational) -> Vec<Rational> {
        let mut v = self.zero();
        self.statics().for_each(|k| v[k] = a.clone());
        self.dynamics().for_each(|k| v[k] = b.clone());
        v
    }

    fn halfspace(&self, coeffs: Vec<Rational>, bound: Rational) -> Halfspace {
        Halfspace::new(coeffs, bound).expect("region builders never emit zero rows")
    }

    fn axis_bound(&self, axis: usize, bound: Rational) -> Halfspace {
        let mut c = self.zero();
        c[axis] = Rational::one();
        self.halfspace(c, bound)
    }
}

/// Builds the outer region of a family.
pub fn outer_region(f: &ScenarioFamily) -> Result<DofRegion, RegionError> {
    let cfg = &f.cfg;
    let c = Coords::new(cfg);
    let (ms, md) = (int(cfg.m_static as i64), int(cfg.m_dynamic as i64));
    let one = Rational::one();
    let zero = Rational::zero();
    let single_dynamic = one.clone() - rat(1, cfg.t_dynamic as i64);
    let mut hs = Vec::new();
    match f.tag {
        FamilyTag::NoCsit => {
            hs.push(c.halfspace(c.weighted(&one, &zero), one.clone()));
            hs.push(c.halfspace(c.weighted(&zero, &one), single_dynamic.clone()));
            let sum = if cfg.is_aligned() { one.clone() } else { rat(4, 3) };
            hs.push(c.halfspace(c.weighted(&one, &one), sum));
        }
        FamilyTag::DelayedAll => {
            let total = &ms + &md;
            hs.push(c.halfspace(c.weighted(&(&one / &total), &(&one / &md)), one.clone()));
            hs.push(c.halfspace(c.weighted(&(&one / &ms), &(&one / &total)), one.clone()));
            c.statics().for_each(|k| hs.push(c.axis_bound(k, one.clone())));
            c.dynamics().for_each(|k| hs.push(c.axis_bound(k, single_dynamic.clone())));
        }
        FamilyTag::DelayedStaticOnly => {
            let cap = &one / harmonic(cfg.m_static);
            c.statics().for_each(|k| hs.push(c.axis_bound(k, cap.clone())));
        }
        FamilyTag::DelayedDynamicOnly => {
            c.dynamics().for_each(|k| hs.push(c.axis_bound(k, single_dynamic.clone())));
            hs.push(c.halfspace(c.weighted(&zero, &one), &md / harmonic(cfg.m_dynamic)));
        }
        FamilyTag::HybridPerfectNone => {
            hs.push(c.halfspace(c.weighted(&(&one / (&ms + &one)), &one), one.clone()));
            c.statics().for_each(|k| hs.push(c.axis_bound(k, one.clone())));
            hs.push(c.halfspace(c.weighted(&zero, &one), single_dynamic.clone()));
        }
        FamilyTag::HybridPerfectDelayed => {
            hs.push(c.halfspace(c.weighted(&(&one / (&ms + &md)), &(&one / &md)), one.clone()));
            // with one dynamic user this repeats the single-user bound
            if cfg.m_dynamic > 1 {
                hs.push(c.halfspace(c.weighted(&zero, &one), &md / harmonic(cfg.m_dynamic)));
            }
            c.statics().for_each(|k| hs.push(c.axis_bound(k, one.clone())));
            c.dynamics().for_each(|k| hs.push(c.axis_bound(k, single_dynamic.clone())));
        }
    }
    let dim = c.dim();
    let region = DofRegion { dim, halfspaces: hs, vertices: Vec::new() }.with_nonnegativity();
    Ok(DofRegion::from_halfspaces(dim, region.halfspaces)?)
}

/// An achievable point and the scheme that reaches it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledPoint {
    #[serde(with = "rational::serde_pq_vec")]
    pub point: Vec<Rational>,
    pub scheme: String,
}

fn labeled(point: Vec<Rational>, scheme: &str) -> LabeledPoint {
    LabeledPoint { point, scheme: scheme.to_string() }
}

/// The inner region with the achievable points that generate it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InnerRegion {
    pub region: DofRegion,
    pub generators: Vec<LabeledPoint>,
}

impl InnerRegion {
    /// Scheme attached to a vertex of the region.
    pub fn scheme_of(&self, vertex: &[Rational]) -> Option<&str> {
        self.generators.iter().find(|g| g.point == vertex).map(|g| g.scheme.as_str())
    }

    /// `(vertex, scheme)` for every extreme point.
    pub fn labeled_vertices(&self) -> Vec<LabeledPoint> {
        self.region
            .vertices
            .iter()
            .map(|v| labeled(v.clone(), self.scheme_of(v).unwrap_or("unknown")))
            .collect()
    }
}

/// Origin plus one single-user point per axis.
fn trivial_points(cfg: &ScenarioConfig) -> Vec<LabeledPoint> {
    let c = Coords::new(cfg);
    let mut out = vec![labeled(c.zero(), "silence")];
    for k in c.statics() {
        let mut v = c.zero();
        v[k] = Rational::one();
        out.push(labeled(v, "single-user static"));
    }
    for k in c.dynamics() {
        let mut v = c.zero();
        v[k] = Rational::one() - rat(1, cfg.t_dynamic as i64);
        out.push(labeled(v, "single-user dynamic"));
    }
    out
}

/// `(1/T) e_j + (1 - 1/T) e_i` for every static/dynamic pair.
fn product_superposition_points(cfg: &ScenarioConfig) -> Vec<LabeledPoint> {
    let c = Coords::new(cfg);
    let t = cfg.t_dynamic as i64;
    let mut out = Vec::new();
    for j in c.statics() {
        for i in c.dynamics() {
            let mut v = c.zero();
            v[j] = rat(1, t);
            v[i] = Rational::one() - rat(1, t);
            out.push(labeled(v, "ps"));
        }
    }
    out
}

/// `(1/H_m)(1 - m/T)` per dynamic user, or `None` when no data slot is left.
fn mat_dynamic_share(cfg: &ScenarioConfig) -> Option<Rational> {
    let (m, t) = (cfg.m_dynamic as i64, cfg.t_dynamic as i64);
    (t > m).then(|| (Rational::one() - rat(m, t)) / harmonic(cfg.m_dynamic))
}

/// The three-phase static/dynamic pairs `(2/3)(1+1/T) e_j + (2/3)(1-2/T) e_i`.
fn three_phase_points(cfg: &ScenarioConfig) -> Vec<LabeledPoint> {
    let c = Coords::new(cfg);
    let t = cfg.t_dynamic as i64;
    let a = rat(2, 3) * (Rational::one() + rat(1, t));
    let b = rat(2, 3) * (Rational::one() - rat(2, t));
    let mut out = Vec::new();
    for j in c.statics() {
        for i in c.dynamics() {
            let mut v = c.zero();
            v[j] = a.clone();
            v[i] = b.clone();
            out.push(labeled(v, "dd3"));
        }
    }
    out
}

/// The nontrivial achievable points listed for delayed CSIT at all users:
/// static MAT, the three-phase pairs and MAT with a product-superposition
/// pilot block (one per static user).
pub fn delayed_all_points(cfg: &ScenarioConfig) -> Result<Vec<LabeledPoint>, RegionError> {
    cfg.blocks_per_static()?;
    let c = Coords::new(cfg);
    let mut out = Vec::new();
    let cap = Rational::one() / harmonic(cfg.m_static);
    out.push(labeled(c.weighted(&cap, &Rational::zero()), "mat-static"));
    out.extend(three_phase_points(cfg));
    if let Some(share) = mat_dynamic_share(cfg) {
        for j in c.statics() {
            let mut v = c.weighted(&Rational::zero(), &share);
            v[j] = rat(cfg.m_dynamic as i64, cfg.t_dynamic as i64);
            out.push(labeled(v, "mat-dynamic+ps"));
        }
    }
    Ok(out)
}

/// The nontrivial achievable points with perfect static and no dynamic CSIT.
pub fn hybrid_pn_points(cfg: &ScenarioConfig) -> Vec<LabeledPoint> {
    let c = Coords::new(cfg);
    let mut out = vec![labeled(c.weighted(&Rational::one(), &Rational::zero()), "zf")];
    let t = cfg.t_dynamic as i64;
    for i in c.dynamics() {
        let mut v = c.weighted(&rat(1, t), &Rational::zero());
        v[i] = Rational::one() - rat(1, t);
        out.push(labeled(v, "hpn"));
    }
    out
}

/// The nontrivial achievable points with perfect static and delayed
/// dynamic CSIT.
pub fn hybrid_pd_points(cfg: &ScenarioConfig) -> Vec<LabeledPoint> {
    let c = Coords::new(cfg);
    let t = cfg.t_dynamic as i64;
    let mut out = vec![labeled(c.weighted(&Rational::one(), &Rational::zero()), "zf")];
    for j in c.statics() {
        for i in c.dynamics() {
            let mut v = c.zero();
            v[j] = Rational::one() - rat(1, 2 * t);
            v[i] = rat(1, 2) - rat(1, 2 * t);
            out.push(labeled(v, "hpd2"));
        }
    }
    out.extend(hybrid_pn_points(cfg).into_iter().skip(1));
    if let Some(share) = mat_dynamic_share(cfg) {
        let v = c.weighted(&rat(cfg.m_dynamic as i64, t), &share);
        out.push(labeled(v, "hpd-multi"));
    }
    out
}

fn cube_points(cfg: &ScenarioConfig, axes: std::ops::Range<usize>, cap: &Rational, scheme: &str) -> Vec<LabeledPoint> {
    let c = Coords::new(cfg);
    let n = axes.len();
    (0..1u64 << n)
        .map(|mask| {
            let mut v = c.zero();
            for (bit, k) in axes.clone().enumerate() {
                if mask >> bit & 1 == 1 {
                    v[k] = cap.clone();
                }
            }
            labeled(v, if mask == 0 { "silence" } else { scheme })
        })
        .collect()
}

/// All achievable points whose hull is the inner region, each labeled.
pub fn inner_points(f: &ScenarioFamily) -> Result<Vec<LabeledPoint>, RegionError> {
    let cfg = &f.cfg;
    let mut pts = match f.tag {
        FamilyTag::DelayedStaticOnly => {
            let cap = Rational::one() / harmonic(cfg.m_static);
            return Ok(cube_points(cfg, 0..cfg.m_static, &cap, "mat-static"));
        }
        FamilyTag::DelayedDynamicOnly => {
            let cap = mat_dynamic_share(cfg).unwrap_or_else(Rational::zero);
            return Ok(cube_points(cfg, 0..cfg.m_dynamic, &cap, "mat-dynamic"));
        }
        _ => trivial_points(cfg),
    };
    match f.tag {
        FamilyTag::NoCsit => pts.extend(product_superposition_points(cfg)),
        FamilyTag::DelayedAll => {
            pts.extend(product_superposition_points(cfg));
            pts.extend(delayed_all_points(cfg)?);
        }
        FamilyTag::HybridPerfectNone => {
            pts.extend(hybrid_pn_points(cfg));
            pts.extend(product_superposition_points(cfg));
        }
        FamilyTag::HybridPerfectDelayed => {
            pts.extend(hybrid_pd_points(cfg));
            // delayed-CSIT schemes stay available when static CSIT improves
            if let Ok(delayed) = delayed_all_points(cfg) {
                pts.extend(delayed);
            } else {
                pts.extend(delayed_all_points_without_three_phase(cfg));
            }
            pts.extend(product_superposition_points(cfg));
        }
        FamilyTag::DelayedStaticOnly | FamilyTag::DelayedDynamicOnly => unreachable!(),
    }
    Ok(pts)
}

/// The delayed-CSIT points that do not need `T'` to be a multiple of `T`.
fn delayed_all_points_without_three_phase(cfg: &ScenarioConfig) -> Vec<LabeledPoint> {
    let mut relaxed = cfg.clone();
    relaxed.t_static = cfg.t_dynamic;
    delayed_all_points(&relaxed)
        .map(|pts| pts.into_iter().filter(|p| p.scheme != "dd3").collect())
        .unwrap_or_default()
}

/// Hull of the achievable points of a family.
pub fn inner_region(f: &ScenarioFamily) -> Result<InnerRegion, RegionError> {
    let generators = inner_points(f)?;
    let points: Vec<_> = generators.iter().map(|g| g.point.clone()).collect();
    let region = geometry::hull_region(&points)?;
    Ok(InnerRegion { region, generators })
}

/// Weighted-sum comparison of the inner and outer regions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapReport {
    #[serde(with = "rational::serde_pq")]
    pub inner_max: Rational,
    #[serde(with = "rational::serde_pq")]
    pub outer_max: Rational,
    #[serde(with = "rational::serde_pq")]
    pub gap: Rational,
    #[serde(with = "rational::serde_pq_vec")]
    pub inner_argmax: Vec<Rational>,
    #[serde(with = "rational::serde_pq_vec")]
    pub outer_argmax: Vec<Rational>,
}

pub fn gap_report(f: &ScenarioFamily, weights: &[Rational]) -> Result<GapReport, RegionError> {
    let inner = inner_region(f)?;
    let outer = outer_region(f)?;
    let (inner_max, inner_argmax) = geometry::max_weighted_sum(&inner.region, weights)?;
    let (outer_max, outer_argmax) = geometry::max_weighted_sum(&outer, weights)?;
    let gap = &outer_max - &inner_max;
    Ok(GapReport { inner_max, outer_max, gap, inner_argmax, outer_argmax })
}

/// Built-in two-user scenarios drawn as region figures, with captions.
pub const FIGURES: [&str; 4] = ["fig4", "fig5", "fig6", "fig7"];

/// Scenario behind one of the [`FIGURES`]: one static and one dynamic user
/// with `T' = 2T`.
pub fn figure_family(name: &str) -> Option<(ScenarioFamily, String)> {
    let (tag, cs, t) = match name {
        "fig4" => (FamilyTag::DelayedAll, Csit::Delayed, 15),
        "fig5" => (FamilyTag::DelayedAll, Csit::Delayed, 30),
        "fig6" => (FamilyTag::HybridPerfectDelayed, Csit::Perfect, 15),
        "fig7" => (FamilyTag::HybridPerfectDelayed, Csit::Perfect, 30),
        _ => return None,
    };
    let cfg = ScenarioConfig::new(1, 1, 2 * t, t, cs, Csit::Delayed).ok()?;
    let csit = if cs == Csit::Delayed { "delayed CSIT" } else { "hybrid CSIT" };
    let caption = format!("One static and one dynamic user with {csit} and T = {t}");
    Some((ScenarioFamily::new(tag, cfg).ok()?, caption))
}
