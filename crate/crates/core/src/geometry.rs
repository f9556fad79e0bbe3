//! Exact rational polytopes in DoF space.
//!
//! Regions are carried in dual form: a halfspace list `a . d <= b` and the
//! vertex list of the bounded set it describes. Dimensions here are small
//! (at most a handful of users), so vertex enumeration intersects every
//! `D`-subset of bounding hyperplanes and keeps the feasible points.

use crate::linalg::{self, small, RatMatrix};
use num_bigint::BigInt;
use crate::rational::{self, dot, Rational};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::io::{self, Write};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeometryError {
    #[error("halfspace has all-zero coefficients")]
    ZeroHalfspace,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("halfspace system is unbounded")]
    Unbounded,
    #[error("halfspace system is infeasible")]
    Infeasible,
    #[error("empty point list")]
    Empty,
}

/// `coeffs . d <= bound`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Halfspace {
    #[serde(with = "rational::serde_pq_vec")]
    pub coeffs: Vec<Rational>,
    #[serde(with = "rational::serde_pq")]
    pub bound: Rational,
}

impl Halfspace {
    pub fn new(coeffs: Vec<Rational>, bound: Rational) -> Result<Self, GeometryError> {
        if coeffs.iter().all(Zero::is_zero) {
            return Err(GeometryError::ZeroHalfspace);
        }
        Ok(Self { coeffs, bound })
    }

    /// `-d_axis <= 0`.
    pub fn nonnegative(dim: usize, axis: usize) -> Self {
        let mut coeffs = vec![Rational::zero(); dim];
        coeffs[axis] = -Rational::one();
        Self { coeffs, bound: Rational::zero() }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn slack(&self, point: &[Rational]) -> Rational {
        &self.bound - dot(&self.coeffs, point)
    }

    pub fn contains(&self, point: &[Rational]) -> bool {
        !self.slack(point).is_negative()
    }

    pub fn is_tight(&self, point: &[Rational]) -> bool {
        self.slack(point).is_zero()
    }

    /// Same halfspace scaled so the leading coefficient has magnitude one.
    pub fn normalized(&self) -> Self {
        let lead = self
            .coeffs
            .iter()
            .find(|x| !x.is_zero())
            .map(Signed::abs)
            .unwrap_or_else(Rational::one);
        Self {
            coeffs: self.coeffs.iter().map(|c| c / &lead).collect(),
            bound: &self.bound / &lead,
        }
    }
}

/// A bounded polytope in dual representation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofRegion {
    pub dim: usize,
    pub halfspaces: Vec<Halfspace>,
    #[serde(with = "vertex_list")]
    pub vertices: Vec<Vec<Rational>>,
}

mod vertex_list {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
        v.iter()
            .map(|p| p.iter().map(rational::to_pq).collect::<Vec<_>>())
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rational>>, D::Error> {
        let raw = Vec::<Vec<String>>::deserialize(d)?;
        raw.iter()
            .map(|p| {
                p.iter()
                    .map(|t| rational::parse(t).map_err(serde::de::Error::custom))
                    .collect()
            })
            .collect()
    }
}

impl DofRegion {
    /// Build from halfspaces, enumerating the vertices.
    pub fn from_halfspaces(dim: usize, halfspaces: Vec<Halfspace>) -> Result<Self, GeometryError> {
        let vertices = enumerate_vertices(&halfspaces, dim)?;
        Ok(Self { dim, halfspaces, vertices })
    }

    pub fn contains(&self, point: &[Rational]) -> bool {
        self.halfspaces.iter().all(|h| h.contains(point))
    }

    /// Add `d_k >= 0` for every axis that does not already carry it.
    pub fn with_nonnegativity(mut self) -> Self {
        for axis in 0..self.dim {
            let h = Halfspace::nonnegative(self.dim, axis);
            if !self.halfspaces.iter().any(|g| g.normalized() == h) {
                self.halfspaces.push(h);
            }
        }
        self
    }

    /// Checks the dual-representation invariants and returns a description
    /// of the first violation.
    pub fn check_dual_consistency(&self) -> Result<(), String> {
        for v in &self.vertices {
            if v.len() != self.dim {
                return Err(format!("vertex {v:?} has wrong dimension"));
            }
            if let Some(h) = self.halfspaces.iter().find(|h| !h.contains(v)) {
                return Err(format!("vertex {v:?} violates {h:?}"));
            }
            let tight = self.halfspaces.iter().filter(|h| h.is_tight(v)).count();
            if tight < self.dim {
                return Err(format!("vertex {v:?} is tight on only {tight} halfspaces"));
            }
        }
        let enumerated = enumerate_vertices(&self.halfspaces, self.dim).map_err(|e| e.to_string())?;
        let mut listed = self.vertices.clone();
        listed.sort();
        listed.dedup();
        if enumerated != listed {
            return Err("vertex list differs from halfspace intersection".into());
        }
        // every facet's tight vertices must average to a point of the set
        for h in &self.halfspaces {
            let on_facet: Vec<_> = self.vertices.iter().filter(|v| h.is_tight(v)).collect();
            if on_facet.is_empty() {
                continue;
            }
            let n = Rational::from_integer((on_facet.len() as i64).into());
            let centroid: Vec<Rational> = (0..self.dim)
                .map(|k| on_facet.iter().map(|v| v[k].clone()).sum::<Rational>() / &n)
                .collect();
            if !self.contains(&centroid) || !h.is_tight(&centroid) {
                return Err(format!("facet centroid {centroid:?} escapes the region"));
            }
        }
        Ok(())
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        go(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

fn check_dims(halfspaces: &[Halfspace], dim: usize) -> Result<(), GeometryError> {
    for h in halfspaces {
        if h.dim() != dim {
            return Err(GeometryError::DimensionMismatch { expected: dim, found: h.dim() });
        }
        if h.coeffs.iter().all(Zero::is_zero) {
            return Err(GeometryError::ZeroHalfspace);
        }
    }
    Ok(())
}

/// True when the pointed cone `{y : A y <= 0}` (rank `A` = `dim`) has an
/// extreme ray. Extreme rays of a pointed cone lie on `dim - 1` independent
/// tight constraints.
fn has_recession_ray(a: &RatMatrix, dim: usize) -> bool {
    if let Some(found) = small_rows(a).and_then(|rows| has_recession_ray_small(&rows, dim)) {
        return found;
    }
    for subset in combinations(a.len(), dim - 1) {
        let rows: RatMatrix = subset.iter().map(|&i| a[i].clone()).collect();
        let basis = linalg::nullspace(&rows, dim);
        if basis.len() != 1 {
            continue;
        }
        let ray = &basis[0];
        let neg: Vec<Rational> = ray.iter().map(|x| -x).collect();
        for dir in [ray, &neg] {
            if a.iter().all(|row| !dot(row, dir).is_positive()) {
                return true;
            }
        }
    }
    false
}

/// Each row scaled to integers by its own common denominator.
fn small_rows(rows: &[Vec<Rational>]) -> Option<Vec<Vec<i128>>> {
    rows.iter()
        .map(|r| {
            let l = small::common_denominator(r)?;
            r.iter().map(|x| small::scaled(x, l)).collect()
        })
        .collect()
}

fn has_recession_ray_small(a: &[Vec<i128>], dim: usize) -> Option<bool> {
    for subset in combinations(a.len(), dim - 1) {
        let rows: Vec<Vec<i128>> = subset.iter().map(|&i| a[i].clone()).collect();
        let ray = small::cofactor_normal(&rows)?;
        if ray.iter().all(|&x| x == 0) {
            continue;
        }
        let mut signs = Vec::with_capacity(a.len());
        for row in a {
            signs.push(small::dot(row, &ray)?.signum());
        }
        if signs.iter().all(|&s| s <= 0) || signs.iter().all(|&s| s >= 0) {
            return Some(true);
        }
    }
    Some(false)
}

/// Vertex enumeration on integer-scaled rows via Cramer's rule.
fn vertices_small(halfspaces: &[Halfspace], dim: usize) -> Option<Vec<Vec<Rational>>> {
    let rows: Vec<(Vec<i128>, i128)> = halfspaces
        .iter()
        .map(|h| {
            let l = small::common_denominator(h.coeffs.iter().chain(std::iter::once(&h.bound)))?;
            let a = h.coeffs.iter().map(|x| small::scaled(x, l)).collect::<Option<Vec<_>>>()?;
            Some((a, small::scaled(&h.bound, l)?))
        })
        .collect::<Option<_>>()?;
    let mut out = Vec::new();
    for subset in combinations(rows.len(), dim) {
        let a: Vec<Vec<i128>> = subset.iter().map(|&i| rows[i].0.clone()).collect();
        let det = small::det(&a)?;
        if det == 0 {
            continue;
        }
        let mut nums = Vec::with_capacity(dim);
        for col in 0..dim {
            let mut m = a.clone();
            for (r, &i) in subset.iter().enumerate() {
                m[r][col] = rows[i].1;
            }
            nums.push(small::det(&m)?);
        }
        let mut feasible = true;
        for (coeffs, bound) in &rows {
            let lhs = small::dot(coeffs, &nums)?;
            let rhs = bound.checked_mul(det)?;
            if (det > 0 && lhs > rhs) || (det < 0 && lhs < rhs) {
                feasible = false;
                break;
            }
        }
        if feasible {
            let d = BigInt::from(det);
            out.push(nums.into_iter().map(|n| Rational::new(BigInt::from(n), d.clone())).collect());
        }
    }
    Some(out)
}

/// Exact, deduplicated, lexicographically sorted vertex list of
/// `{d : a_k . d <= b_k for all k}`.
pub fn enumerate_vertices(halfspaces: &[Halfspace], dim: usize) -> Result<Vec<Vec<Rational>>, GeometryError> {
    check_dims(halfspaces, dim)?;
    if dim == 0 {
        return Err(GeometryError::DimensionMismatch { expected: 1, found: 0 });
    }
    let mut vertices = match vertices_small(halfspaces, dim) {
        Some(v) => v,
        None => vertices_exact(halfspaces, dim),
    };
    vertices.sort();
    vertices.dedup();
    let a: RatMatrix = halfspaces.iter().map(|h| h.coeffs.clone()).collect();
    if linalg::rank(&a) < dim {
        // a lineality direction: unbounded whenever feasible
        return Err(GeometryError::Unbounded);
    }
    if vertices.is_empty() {
        return Err(GeometryError::Infeasible);
    }
    if has_recession_ray(&a, dim) {
        return Err(GeometryError::Unbounded);
    }
    Ok(vertices)
}

fn vertices_exact(halfspaces: &[Halfspace], dim: usize) -> Vec<Vec<Rational>> {
    let mut vertices = Vec::new();
    for subset in combinations(halfspaces.len(), dim) {
        let a: RatMatrix = subset.iter().map(|&i| halfspaces[i].coeffs.clone()).collect();
        let b: Vec<Rational> = subset.iter().map(|&i| halfspaces[i].bound.clone()).collect();
        if let Some(x) = linalg::solve_unique(&a, &b) {
            if halfspaces.iter().all(|h| h.contains(&x)) {
                vertices.push(x);
            }
        }
    }
    vertices
}

/// Convex hull of a point list, as a minimal halfspace description plus the
/// extreme points. Lower-dimensional hulls carry their affine hull as
/// pairs of opposite halfspaces.
pub fn hull_region(points: &[Vec<Rational>]) -> Result<DofRegion, GeometryError> {
    let first = points.first().ok_or(GeometryError::Empty)?;
    let dim = first.len();
    for p in points {
        if p.len() != dim {
            return Err(GeometryError::DimensionMismatch { expected: dim, found: p.len() });
        }
    }
    let mut pts = points.to_vec();
    pts.sort();
    pts.dedup();
    let origin = pts[0].clone();
    let diff = |p: &[Rational]| -> Vec<Rational> { p.iter().zip(&origin).map(|(a, b)| a - b).collect() };

    let mut span: RatMatrix = pts.iter().skip(1).map(|p| diff(p)).collect();
    let pivots = linalg::rref(&mut span);
    let basis: RatMatrix = span.into_iter().take(pivots.len()).collect();

    let mut halfspaces = Vec::new();
    for normal in linalg::nullspace(&basis, dim) {
        let n = rational::normalize_leading(&normal);
        let c = dot(&n, &origin);
        halfspaces.push(Halfspace { coeffs: n.clone(), bound: c.clone() });
        halfspaces.push(Halfspace { coeffs: n.iter().map(|x| -x).collect(), bound: -c });
    }

    // The projection onto the pivot coordinates is injective on the affine
    // hull, so facets can be found there and lifted with zero padding.
    if !pivots.is_empty() {
        let projected: Vec<Vec<Rational>> =
            pts.iter().map(|p| pivots.iter().map(|&c| p[c].clone()).collect()).collect();
        let facets = facets_small(&projected).unwrap_or_else(|| facets_exact(&projected));
        let mut lifted: Vec<Halfspace> = facets
            .into_iter()
            .map(|(coeffs, bound)| {
                let mut full = vec![Rational::zero(); dim];
                for (&c, a) in pivots.iter().zip(coeffs) {
                    full[c] = a;
                }
                Halfspace { coeffs: full, bound }.normalized()
            })
            .collect();
        lifted.sort();
        lifted.dedup();
        halfspaces.extend(lifted);
    }

    let vertices: Vec<Vec<Rational>> = pts
        .into_iter()
        .filter(|p| {
            let tight: RatMatrix =
                halfspaces.iter().filter(|h| h.is_tight(p)).map(|h| h.coeffs.clone()).collect();
            linalg::rank(&tight) == dim
        })
        .collect();
    Ok(DofRegion { dim, halfspaces, vertices })
}

/// Facets of a full-dimensional point set on an integer lattice.
fn facets_small(pts: &[Vec<Rational>]) -> Option<Vec<(Vec<Rational>, Rational)>> {
    let k = pts[0].len();
    let l = small::common_denominator(pts.iter().flatten())?;
    let ints: Vec<Vec<i128>> =
        pts.iter().map(|p| p.iter().map(|x| small::scaled(x, l)).collect()).collect::<Option<_>>()?;
    let mut found = std::collections::BTreeSet::new();
    for subset in combinations(ints.len(), k) {
        let anchor = &ints[subset[0]];
        let rows: Vec<Vec<i128>> = subset[1..]
            .iter()
            .map(|&i| ints[i].iter().zip(anchor).map(|(a, b)| a - b).collect())
            .collect();
        let mut normal = small::cofactor_normal(&rows)?;
        if normal.iter().all(|&x| x == 0) {
            continue;
        }
        let b = small::dot(&normal, anchor)?;
        let mut pos = false;
        let mut neg = false;
        for p in &ints {
            let s = small::dot(&normal, p)?.checked_sub(b)?;
            pos |= s > 0;
            neg |= s < 0;
        }
        let mut b = match (pos, neg) {
            (false, _) => b,
            (true, false) => {
                normal.iter_mut().for_each(|x| *x = -*x);
                -b
            }
            (true, true) => continue,
        };
        let mut row = normal;
        row.push(b);
        small::primitive(&mut row);
        b = row.pop()?;
        found.insert((row, b));
    }
    let scale = BigInt::from(l);
    Some(
        found
            .into_iter()
            .map(|(a, b)| {
                let coeffs = a.into_iter().map(|x| Rational::from_integer(BigInt::from(x))).collect();
                (coeffs, Rational::new(BigInt::from(b), scale.clone()))
            })
            .collect(),
    )
}

fn facets_exact(pts: &[Vec<Rational>]) -> Vec<(Vec<Rational>, Rational)> {
    let k = pts[0].len();
    let mut facets: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for subset in combinations(pts.len(), k) {
        let anchor = &pts[subset[0]];
        let m: RatMatrix = subset[1..]
            .iter()
            .map(|&i| pts[i].iter().zip(anchor).map(|(a, b)| a - b).collect())
            .collect();
        let null = linalg::nullspace(&m, k);
        if null.len() != 1 {
            continue;
        }
        let a = null.into_iter().next().unwrap_or_default();
        let b = dot(&a, anchor);
        let slacks: Vec<Rational> = pts.iter().map(|p| dot(&a, p) - &b).collect();
        let candidate = if slacks.iter().all(|s| !s.is_positive()) {
            (a, b)
        } else if slacks.iter().all(|s| !s.is_negative()) {
            (a.iter().map(|x| -x).collect(), -b)
        } else {
            continue;
        };
        if !facets.contains(&candidate) {
            facets.push(candidate);
        }
    }
    facets
}

/// Outcome of a containment test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetCheck {
    pub holds: bool,
    pub witness: Option<(Vec<Rational>, Halfspace)>,
}

/// `inner` is contained in `outer` iff every inner vertex satisfies every
/// outer halfspace.
pub fn region_subset(inner: &DofRegion, outer: &DofRegion) -> Result<SubsetCheck, GeometryError> {
    if inner.dim != outer.dim {
        return Err(GeometryError::DimensionMismatch { expected: outer.dim, found: inner.dim });
    }
    for v in &inner.vertices {
        if let Some(h) = outer.halfspaces.iter().find(|h| !h.contains(v)) {
            return Ok(SubsetCheck { holds: false, witness: Some((v.clone(), h.clone())) });
        }
    }
    Ok(SubsetCheck { holds: true, witness: None })
}

/// Mutual containment.
pub fn regions_equal(a: &DofRegion, b: &DofRegion) -> Result<bool, GeometryError> {
    Ok(region_subset(a, b)?.holds && region_subset(b, a)?.holds)
}

/// Maximum of `weights . d` over the region, with the lexicographically
/// smallest maximizing vertex.
pub fn max_weighted_sum(region: &DofRegion, weights: &[Rational]) -> Result<(Rational, Vec<Rational>), GeometryError> {
    if weights.len() != region.dim {
        return Err(GeometryError::DimensionMismatch { expected: region.dim, found: weights.len() });
    }
    let mut sorted = region.vertices.clone();
    sorted.sort();
    let mut best: Option<(Rational, Vec<Rational>)> = None;
    for v in sorted {
        let value = dot(weights, &v);
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, v));
        }
    }
    best.ok_or(GeometryError::Empty)
}

/// One row per vertex; coordinates as `p/q`.
pub fn write_vertices_csv<W: Write>(mut w: W, labels: &[String], vertices: &[Vec<Rational>]) -> io::Result<()> {
    writeln!(w, "{}", labels.join(","))?;
    for v in vertices {
        let row: Vec<String> = v.iter().map(rational::to_pq).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// One row per halfspace: coefficient columns followed by the bound.
pub fn write_halfspaces_csv<W: Write>(mut w: W, labels: &[String], halfspaces: &[Halfspace]) -> io::Result<()> {
    writeln!(w, "{},bound", labels.join(","))?;
    for h in halfspaces {
        let mut row: Vec<String> = h.coeffs.iter().map(rational::to_pq).collect();
        row.push(rational::to_pq(&h.bound));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Parse a vertex CSV written by [`write_vertices_csv`].
pub fn read_vertices_csv(text: &str) -> Result<Vec<Vec<Rational>>, rational::ParseRationalError> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(rational::parse_list)
        .collect()
}
