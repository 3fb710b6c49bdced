//! Exact finite metric spaces and Euclidean comparison geometry.
//!
//! A [`FiniteMetricSpace`] stores every pairwise distance as an integer
//! numerator over a single positive denominator, so diameters, sublevel
//! memberships and ties are decided exactly. Only comparison-triangle
//! geometry works in floating point.

mod comparison;
mod defect;

pub use comparison::{comparison_distance, ComparisonTriangle, Side, SideLocation, COMPARISON_TOL};
pub use defect::{
    defect_profile, geodesics_between, witness_defect, DefectProfile, DefectSample, DefectSampler, DefectWitness,
    GeodesicTriangle, ScaleMaximum, TrianglePoint,
};

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{Rat, RatInput};
use crate::pointset::PointSet;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("metric violation: {0}")]
    MetricViolation(MetricViolation),
    #[error("graph is disconnected: vertex {unreachable} is not reachable from vertex 0")]
    DisconnectedGraph { unreachable: usize },
    #[error("invalid space description: {0}")]
    InvalidSpec(String),
    #[error("offset {offset} lies outside side {side:?} of length {length}")]
    InvalidOffset { side: Side, offset: String, length: String },
    #[error("side lengths ({a}, {b}, {c}) do not form a triangle")]
    SidesNotATriangle { a: String, b: String, c: String },
    #[error("subset must be nonempty")]
    EmptySubset,
    #[error("rational arithmetic overflowed while normalizing distances")]
    Overflow,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MetricViolation {
    NonZeroDiagonal { i: usize },
    Asymmetric { i: usize, j: usize },
    NonPositive { i: usize, j: usize },
    Triangle { i: usize, j: usize, k: usize },
}

impl std::fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MetricViolation::NonZeroDiagonal { i } => write!(f, "d({i},{i}) != 0"),
            MetricViolation::Asymmetric { i, j } => write!(f, "d({i},{j}) != d({j},{i})"),
            MetricViolation::NonPositive { i, j } => write!(f, "d({i},{j}) <= 0 for distinct points"),
            MetricViolation::Triangle { i, j, k } => {
                write!(f, "d({i},{k}) > d({i},{j}) + d({j},{k})")
            }
        }
    }
}

/// Description of a space as it appears in engine input.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceSpec {
    Graph(GraphSpec),
    Matrix(Vec<Vec<RatInput>>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphSpec {
    pub n: usize,
    pub edges: Vec<EdgeSpec>,
}

/// `[u, v]` for a unit edge or `[u, v, "w"]` for weight `w`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EdgeSpec {
    Weighted(usize, usize, RatInput),
    Unit(usize, usize),
}

impl EdgeSpec {
    fn parts(&self) -> (usize, usize, Rat) {
        match *self {
            EdgeSpec::Unit(u, v) => (u, v, Rat::from_integer(1)),
            EdgeSpec::Weighted(u, v, w) => (u, v, w.0),
        }
    }
}

/// Weighted graph with integer weights over the space's denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<(usize, usize, i64)>,
    adj: Vec<Vec<(usize, i64)>>,
}

impl WeightedGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Edges `(u, v, w)` with `u < v`, sorted, parallel edges merged to the lightest.
    pub fn edges(&self) -> &[(usize, usize, i64)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, i64)] {
        &self.adj[v]
    }

    pub fn max_edge_weight(&self) -> i64 {
        self.edges.iter().map(|e| e.2).max().unwrap_or(0)
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<i64> {
        self.adj[u].iter().find(|(w, _)| *w == v).map(|(_, wt)| *wt)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Matrix,
    Graph(WeightedGraph),
}

/// A validated finite metric space with exact distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteMetricSpace {
    n: usize,
    denom: i64,
    dist: Vec<i64>,
    source: Source,
    orbit: Option<Vec<usize>>,
}

fn common_denominator<'a>(values: impl Iterator<Item = &'a Rat>) -> Result<i64, GeometryError> {
    let mut l: i64 = 1;
    for v in values {
        let d = *v.denom();
        let g = l.gcd(&d);
        l = (l / g).checked_mul(d).ok_or(GeometryError::Overflow)?;
    }
    Ok(l)
}

fn scale_to(v: &Rat, denom: i64) -> Result<i64, GeometryError> {
    v.numer().checked_mul(denom / v.denom()).ok_or(GeometryError::Overflow)
}

impl FiniteMetricSpace {
    /// Builds and validates a space from its input description.
    pub fn from_spec(spec: &SpaceSpec) -> Result<Self, GeometryError> {
        match spec {
            SpaceSpec::Matrix(rows) => {
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(GeometryError::InvalidSpec("distance matrix is not square".into()));
                }
                let values: Vec<Rat> = rows.iter().flatten().map(|r| r.0).collect();
                let denom = common_denominator(values.iter())?;
                let dist = values.iter().map(|v| scale_to(v, denom)).collect::<Result<Vec<_>, _>>()?;
                Self::from_numerators(n, denom, dist)
            }
            SpaceSpec::Graph(g) => {
                let parts: Vec<(usize, usize, Rat)> = g.edges.iter().map(EdgeSpec::parts).collect();
                let denom = common_denominator(parts.iter().map(|p| &p.2))?;
                let mut edges = Vec::with_capacity(parts.len());
                for (u, v, w) in &parts {
                    if *w <= Rat::from_integer(0) {
                        return Err(GeometryError::InvalidSpec(format!("edge ({u},{v}) has non-positive weight")));
                    }
                    edges.push((*u, *v, scale_to(w, denom)?));
                }
                Self::from_graph_numerators(g.n, denom, &edges)
            }
        }
    }

    /// Matrix-sourced space from integer distances (denominator 1).
    pub fn from_integer_matrix(rows: &[Vec<i64>]) -> Result<Self, GeometryError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(GeometryError::InvalidSpec("distance matrix is not square".into()));
        }
        Self::from_numerators(n, 1, rows.iter().flatten().copied().collect())
    }

    /// Graph-sourced space where every edge has length one.
    pub fn from_unit_graph(n: usize, edges: &[(usize, usize)]) -> Result<Self, GeometryError> {
        let e: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1)).collect();
        Self::from_graph_numerators(n, 1, &e)
    }

    /// Graph-sourced space with integer edge weights.
    pub fn from_weighted_graph(n: usize, edges: &[(usize, usize, i64)]) -> Result<Self, GeometryError> {
        Self::from_graph_numerators(n, 1, edges)
    }

    fn from_numerators(n: usize, denom: i64, dist: Vec<i64>) -> Result<Self, GeometryError> {
        if n == 0 {
            return Err(GeometryError::InvalidSpec("space has no points".into()));
        }
        let space = FiniteMetricSpace { n, denom, dist, source: Source::Matrix, orbit: None };
        space.check_metric()?;
        Ok(space)
    }

    fn from_graph_numerators(n: usize, denom: i64, edges: &[(usize, usize, i64)]) -> Result<Self, GeometryError> {
        if n == 0 {
            return Err(GeometryError::InvalidSpec("graph has no vertices".into()));
        }
        let mut merged: std::collections::BTreeMap<(usize, usize), i64> = Default::default();
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(GeometryError::InvalidSpec(format!("edge ({u},{v}) out of range")));
            }
            if u == v {
                return Err(GeometryError::InvalidSpec(format!("self-loop at vertex {u}")));
            }
            if w <= 0 {
                return Err(GeometryError::InvalidSpec(format!("edge ({u},{v}) has non-positive weight")));
            }
            let key = (u.min(v), u.max(v));
            let e = merged.entry(key).or_insert(w);
            *e = (*e).min(w);
        }
        let edges: Vec<(usize, usize, i64)> = merged.into_iter().map(|((u, v), w)| (u, v, w)).collect();
        let mut adj = vec![Vec::new(); n];
        for &(u, v, w) in &edges {
            adj[u].push((v, w));
            adj[v].push((u, w));
        }
        for a in &mut adj {
            a.sort_unstable();
        }

        // Floyd-Warshall; desk-scale graphs only.
        const INF: i64 = i64::MAX / 4;
        let mut dist = vec![INF; n * n];
        for i in 0..n {
            dist[i * n + i] = 0;
        }
        for &(u, v, w) in &edges {
            dist[u * n + v] = w;
            dist[v * n + u] = w;
        }
        for k in 0..n {
            for i in 0..n {
                let dik = dist[i * n + k];
                if dik >= INF {
                    continue;
                }
                for j in 0..n {
                    let via = dik + dist[k * n + j];
                    if via < dist[i * n + j] {
                        dist[i * n + j] = via;
                    }
                }
            }
        }
        if let Some(v) = (0..n).find(|&v| dist[v] >= INF) {
            return Err(GeometryError::DisconnectedGraph { unreachable: v });
        }
        let graph = WeightedGraph { n, edges, adj };
        Ok(FiniteMetricSpace { n, denom, dist, source: Source::Graph(graph), orbit: None })
    }

    fn check_metric(&self) -> Result<(), GeometryError> {
        let n = self.n;
        let violation = |v| Err(GeometryError::MetricViolation(v));
        for i in 0..n {
            if self.dist(i, i) != 0 {
                return violation(MetricViolation::NonZeroDiagonal { i });
            }
            for j in i + 1..n {
                if self.dist(i, j) != self.dist(j, i) {
                    return violation(MetricViolation::Asymmetric { i, j });
                }
                if self.dist(i, j) <= 0 {
                    return violation(MetricViolation::NonPositive { i, j });
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if self.dist(i, k) > self.dist(i, j) + self.dist(j, k) {
                        return violation(MetricViolation::Triangle { i, j, k });
                    }
                }
            }
        }
        Ok(())
    }

    /// Marks a subset of points as the orbit under study.
    pub fn with_orbit(mut self, orbit: Vec<usize>) -> Result<Self, GeometryError> {
        if orbit.is_empty() {
            return Err(GeometryError::EmptySubset);
        }
        if let Some(&p) = orbit.iter().find(|&&p| p >= self.n) {
            return Err(GeometryError::InvalidSpec(format!("orbit point {p} out of range")));
        }
        let mut orbit = orbit;
        orbit.sort_unstable();
        orbit.dedup();
        self.orbit = Some(orbit);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Common denominator of all stored distances.
    pub fn denom(&self) -> i64 {
        self.denom
    }

    /// Distance numerator; the distance is `dist(i, j) / denom()`.
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> i64 {
        self.dist[i * self.n + j]
    }

    pub fn dist_rat(&self, i: usize, j: usize) -> Rat {
        self.to_rat(self.dist(i, j))
    }

    pub fn dist_f64(&self, i: usize, j: usize) -> f64 {
        self.dist(i, j) as f64 / self.denom as f64
    }

    /// Converts a numerator in this space's units to a rational.
    pub fn to_rat(&self, units: i64) -> Rat {
        Rat::new(units, self.denom)
    }

    pub fn to_f64(&self, units: i64) -> f64 {
        units as f64 / self.denom as f64
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn graph(&self) -> Option<&WeightedGraph> {
        match &self.source {
            Source::Graph(g) => Some(g),
            Source::Matrix => None,
        }
    }

    pub fn is_graph(&self) -> bool {
        matches!(self.source, Source::Graph(_))
    }

    pub fn orbit(&self) -> Option<&[usize]> {
        self.orbit.as_deref()
    }

    pub fn all_points(&self) -> PointSet {
        PointSet::full(self.n.min(PointSet::CAPACITY))
    }

    /// Diameter of the whole space, in numerator units.
    pub fn diameter(&self) -> i64 {
        self.dist.iter().copied().max().unwrap_or(0)
    }

    /// Diameter of a subset in numerator units (0 for singletons and the empty set).
    pub fn diam_of(&self, s: PointSet) -> i64 {
        let pts: Vec<usize> = s.iter().collect();
        let mut best = 0;
        for (a, &i) in pts.iter().enumerate() {
            for &j in &pts[a + 1..] {
                best = best.max(self.dist(i, j));
            }
        }
        best
    }

    /// Largest distance from `p` to a point of `s` (0 when `s` is empty).
    pub fn max_dist_to(&self, p: usize, s: PointSet) -> i64 {
        s.iter().map(|q| self.dist(p, q)).max().unwrap_or(0)
    }

    /// Distinct realized pairwise distances, ascending, zero included.
    pub fn realized_distances(&self) -> Vec<i64> {
        let mut v = self.dist.clone();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Induced space on a subset of points, renumbered in increasing order.
    pub fn restrict(&self, points: &[usize]) -> Result<Self, GeometryError> {
        let rows: Vec<i64> =
            points.iter().flat_map(|&i| points.iter().map(move |&j| (i, j))).map(|(i, j)| self.dist(i, j)).collect();
        Self::from_numerators(points.len(), self.denom, rows)
    }
}

/// Maximum over the ambient space of the distance to the nearest point of `subset`.
///
/// Graph sources are treated as geodesic spaces: on an edge `(u, v)` of
/// weight `w` the distance to the subset peaks at `(d_u + d_v + w) / 2`. On
/// unit graphs this is attained at a vertex or at an edge midpoint. Matrix
/// sources only range over their points.
pub fn covering_radius(space: &FiniteMetricSpace, subset: &[usize]) -> Result<Rat, GeometryError> {
    if subset.is_empty() {
        return Err(GeometryError::EmptySubset);
    }
    if let Some(&p) = subset.iter().find(|&&p| p >= space.n()) {
        return Err(GeometryError::InvalidSpec(format!("subset point {p} out of range")));
    }
    let nearest: Vec<i64> = (0..space.n()).map(|v| subset.iter().map(|&x| space.dist(v, x)).min().unwrap()).collect();
    // Twice the radius, in numerator units.
    let mut twice = 2 * nearest.iter().copied().max().unwrap_or(0);
    if let Some(g) = space.graph() {
        for &(u, v, w) in g.edges() {
            twice = twice.max(nearest[u] + nearest[v] + w);
        }
    }
    Ok(Rat::new(twice, 2 * space.denom()))
}
