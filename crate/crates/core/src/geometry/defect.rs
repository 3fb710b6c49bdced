//! Empirical comparison-defect profiles.
//!
//! For geodesic triangles in a graph the defect of a point pair is
//! `d(p, q) - d(p̄, q̄)`. The profile keeps, per examined triangle, the worst
//! pair together with a witness that reproduces it. The maxima bucketed by
//! `d(Δ)` form an empirical upper envelope; a finite sample never bounds the
//! defect on unrealized scales.

use std::collections::{BTreeMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::comparison::{ComparisonTriangle, Side, SideLocation};
use super::{FiniteMetricSpace, GeometryError};
use crate::exact::{rat_string, Rat};

/// Vertices `[x1, x2, x3]` and vertex paths for the sides `x1→x2`, `x1→x3`, `x2→x3`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GeodesicTriangle {
    pub vertices: [usize; 3],
    pub sides: [Vec<usize>; 3],
}

impl GeodesicTriangle {
    pub fn validate(&self, space: &FiniteMetricSpace) -> Result<(), GeometryError> {
        for side in Side::ALL {
            let (i, j) = side.endpoints();
            let (s, e) = (self.vertices[i], self.vertices[j]);
            let path = &self.sides[side.index()];
            if path.iter().any(|&v| v >= space.n()) {
                return Err(GeometryError::InvalidSpec("triangle vertex out of range".into()));
            }
            if path.first() != Some(&s) || path.last() != Some(&e) {
                return Err(GeometryError::InvalidSpec(format!("side {side:?} does not run from {s} to {e}")));
            }
            let mut total = 0;
            for w in path.windows(2) {
                if let Some(g) = space.graph() {
                    if g.weight(w[0], w[1]).is_none() {
                        return Err(GeometryError::InvalidSpec(format!(
                            "side {side:?} uses non-edge ({},{})",
                            w[0], w[1]
                        )));
                    }
                }
                total += space.dist(w[0], w[1]);
            }
            if total != space.dist(s, e) {
                return Err(GeometryError::InvalidSpec(format!("side {side:?} is not a geodesic")));
            }
        }
        Ok(())
    }

    fn d_delta(&self, space: &FiniteMetricSpace) -> i64 {
        let [x1, x2, x3] = self.vertices;
        space.dist(x1, x2).max(space.dist(x1, x3)).max(space.dist(x2, x3))
    }
}

/// A vertex on a triangle side, at exact distance `offset` from the side's start.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrianglePoint {
    pub side: Side,
    pub vertex: usize,
    #[serde(with = "rat_string")]
    pub offset: Rat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectWitness {
    pub triangle: GeodesicTriangle,
    pub p: TrianglePoint,
    pub q: TrianglePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectSample {
    #[serde(with = "rat_string")]
    pub d_delta: Rat,
    pub defect: f64,
    pub witness: DefectWitness,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleMaximum {
    #[serde(with = "rat_string")]
    pub d_delta: Rat,
    pub max_defect: f64,
    pub triangles: usize,
}

/// Triangle and geodesic sampling configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectSampler {
    pub seed: u64,
    /// All unordered vertex triples are used when there are at most this many.
    pub max_triangles: usize,
    pub geodesics_per_side: usize,
    /// Hand-picked triangles evaluated in addition to the sampled ones.
    #[serde(default)]
    pub explicit: Vec<GeodesicTriangle>,
    pub include_sampled: bool,
}

impl Default for DefectSampler {
    fn default() -> Self {
        DefectSampler {
            seed: 0,
            max_triangles: 4096,
            geodesics_per_side: 2,
            explicit: Vec::new(),
            include_sampled: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectProfile {
    pub label: String,
    pub samples: Vec<DefectSample>,
    pub max_by_scale: Vec<ScaleMaximum>,
    pub triangles_examined: usize,
    pub triangle_sampling_capped: bool,
    pub geodesic_cap_hit: bool,
}

impl DefectProfile {
    pub fn max_defect(&self) -> f64 {
        self.samples.iter().map(|s| s.defect).fold(0.0, f64::max)
    }

    /// Cumulative maximum of the bucketed defects: `(d(Δ), sup of defects at scales <= d(Δ))`.
    pub fn envelope(&self) -> Vec<(f64, f64)> {
        let mut running = 0.0f64;
        self.max_by_scale
            .iter()
            .map(|m| {
                running = running.max(m.max_defect);
                (rat_to_f64(&m.d_delta), running)
            })
            .collect()
    }
}

fn rat_to_f64(r: &Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Geodesics from `x` to `y` as vertex paths, enumerated from the
/// shortest-path DAG. When more than `cap` exist, `cap` paths are drawn
/// uniformly with a seeded walk and the flag is set.
pub fn geodesics_between(
    space: &FiniteMetricSpace,
    x: usize,
    y: usize,
    cap: usize,
    seed: u64,
) -> (Vec<Vec<usize>>, bool) {
    if x == y {
        return (vec![vec![x]], false);
    }
    let Some(g) = space.graph() else {
        return (vec![vec![x, y]], false);
    };
    let dxy = space.dist(x, y);
    let on_geo = |v: usize| space.dist(x, v) + space.dist(v, y) == dxy;
    let succ = |u: usize| -> Vec<usize> {
        g.neighbors(u)
            .iter()
            .filter(|&&(w, wt)| space.dist(x, u) + wt == space.dist(x, w) && on_geo(w))
            .map(|&(w, _)| w)
            .collect()
    };
    let mut order: Vec<usize> = (0..space.n()).filter(|&v| on_geo(v)).collect();
    order.sort_by_key(|&v| std::cmp::Reverse(space.dist(x, v)));
    let mut count = vec![0u128; space.n()];
    count[y] = 1;
    for &u in &order {
        if u != y {
            count[u] = succ(u).iter().fold(0u128, |acc, &w| acc.saturating_add(count[w]));
        }
    }
    let cap = cap.max(1);
    if count[x] <= cap as u128 {
        let mut out = Vec::new();
        let mut stack = vec![vec![x]];
        while let Some(path) = stack.pop() {
            let last = *path.last().unwrap();
            if last == y {
                out.push(path);
                continue;
            }
            for w in succ(last).into_iter().rev() {
                let mut p = path.clone();
                p.push(w);
                stack.push(p);
            }
        }
        out.sort();
        return (out, false);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut attempts = 0;
    while seen.len() < cap && attempts < 20 * cap {
        attempts += 1;
        let mut path = vec![x];
        let mut u = x;
        while u != y {
            let next = succ(u);
            let total: f64 = next.iter().map(|&w| count[w] as f64).sum();
            let mut r = rng.gen::<f64>() * total;
            let mut pick = *next.last().unwrap();
            for &w in &next {
                r -= count[w] as f64;
                if r < 0.0 {
                    pick = w;
                    break;
                }
            }
            path.push(pick);
            u = pick;
        }
        seen.insert(path);
    }
    let mut out: Vec<_> = seen.into_iter().collect();
    out.sort();
    (out, true)
}

struct Evaluated {
    defect: f64,
    p: TrianglePoint,
    q: TrianglePoint,
}

fn side_points(space: &FiniteMetricSpace, tri: &GeodesicTriangle) -> Vec<(Side, usize, i64)> {
    let mut pts = Vec::new();
    for side in Side::ALL {
        let path = &tri.sides[side.index()];
        let start = path[0];
        for &v in path {
            pts.push((side, v, space.dist(start, v)));
        }
    }
    pts
}

fn evaluate(space: &FiniteMetricSpace, tri: &GeodesicTriangle) -> Evaluated {
    let [x1, x2, x3] = tri.vertices;
    let cmp = ComparisonTriangle::new(space.dist_f64(x1, x2), space.dist_f64(x1, x3), space.dist_f64(x2, x3))
        .expect("metric sides always form a triangle");
    let pts = side_points(space, tri);
    let mut best: Option<(f64, usize, usize)> = None;
    for a in 0..pts.len() {
        for b in a..pts.len() {
            let (sa, va, oa) = pts[a];
            let (sb, vb, ob) = pts[b];
            let cd = cmp
                .distance(SideLocation::new(sa, space.to_f64(oa)), SideLocation::new(sb, space.to_f64(ob)))
                .expect("offsets lie on their sides");
            let defect = space.dist_f64(va, vb) - cd;
            if best.is_none_or(|(d, _, _)| defect > d) {
                best = Some((defect, a, b));
            }
        }
    }
    let (defect, a, b) = best.expect("a triangle has at least one point");
    let mk = |(side, vertex, off): (Side, usize, i64)| TrianglePoint { side, vertex, offset: space.to_rat(off) };
    Evaluated { defect, p: mk(pts[a]), q: mk(pts[b]) }
}

/// Recomputes the defect recorded in a witness.
pub fn witness_defect(space: &FiniteMetricSpace, w: &DefectWitness) -> Result<f64, GeometryError> {
    w.triangle.validate(space)?;
    let [x1, x2, x3] = w.triangle.vertices;
    let cmp = ComparisonTriangle::new(space.dist_f64(x1, x2), space.dist_f64(x1, x3), space.dist_f64(x2, x3))?;
    let loc = |t: &TrianglePoint| SideLocation::new(t.side, rat_to_f64(&t.offset));
    let cd = cmp.distance(loc(&w.p), loc(&w.q))?;
    Ok(space.dist_f64(w.p.vertex, w.q.vertex) - cd)
}

fn sampled_triples(n: usize, sampler: &DefectSampler) -> (Vec<[usize; 3]>, bool) {
    let total = if n < 3 { 0 } else { n * (n - 1) * (n - 2) / 6 };
    if total <= sampler.max_triangles {
        let mut out = Vec::with_capacity(total);
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    out.push([i, j, k]);
                }
            }
        }
        return (out, false);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed);
    let mut seen = HashSet::new();
    while seen.len() < sampler.max_triangles {
        let mut t = [rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)];
        t.sort_unstable();
        if t[0] != t[1] && t[1] != t[2] {
            seen.insert(t);
        }
    }
    let mut out: Vec<_> = seen.into_iter().collect();
    out.sort_unstable();
    (out, true)
}

/// Samples geodesic triangles and records their worst comparison defects.
///
/// Matrix-sourced spaces only have their triangle vertices as points, so
/// their defects are zero up to rounding.
pub fn defect_profile(space: &FiniteMetricSpace, sampler: &DefectSampler) -> Result<DefectProfile, GeometryError> {
    for t in &sampler.explicit {
        t.validate(space)?;
    }
    let (triples, capped) =
        if sampler.include_sampled { sampled_triples(space.n(), sampler) } else { (Vec::new(), false) };

    let per_triple: Vec<(DefectSample, bool)> = triples
        .par_iter()
        .map(|&[x1, x2, x3]| {
            let seed = splitmix(sampler.seed ^ splitmix((x1 * 1_000_003 + x2 * 1009 + x3) as u64));
            let per_side = sampler.geodesics_per_side;
            let (g0, c0) = geodesics_between(space, x1, x2, per_side, seed);
            let (g1, c1) = geodesics_between(space, x1, x3, per_side, splitmix(seed));
            let (g2, c2) = geodesics_between(space, x2, x3, per_side, splitmix(splitmix(seed)));
            let mut worst: Option<(Evaluated, GeodesicTriangle)> = None;
            for a in &g0 {
                for b in &g1 {
                    for c in &g2 {
                        let tri = GeodesicTriangle { vertices: [x1, x2, x3], sides: [a.clone(), b.clone(), c.clone()] };
                        let ev = evaluate(space, &tri);
                        if worst.as_ref().is_none_or(|(w, _)| ev.defect > w.defect) {
                            worst = Some((ev, tri));
                        }
                    }
                }
            }
            let (ev, tri) = worst.expect("every pair has a geodesic");
            let d_delta = space.to_rat(tri.d_delta(space));
            let sample =
                DefectSample { d_delta, defect: ev.defect, witness: DefectWitness { triangle: tri, p: ev.p, q: ev.q } };
            (sample, c0 || c1 || c2)
        })
        .collect();

    let explicit: Vec<DefectSample> = sampler
        .explicit
        .par_iter()
        .map(|tri| {
            let ev = evaluate(space, tri);
            DefectSample {
                d_delta: space.to_rat(tri.d_delta(space)),
                defect: ev.defect,
                witness: DefectWitness { triangle: tri.clone(), p: ev.p, q: ev.q },
            }
        })
        .collect();

    let geodesic_cap_hit = per_triple.iter().any(|(_, c)| *c);
    let mut samples: Vec<DefectSample> = per_triple.into_iter().map(|(s, _)| s).collect();
    samples.extend(explicit);

    let mut buckets: BTreeMap<Rat, (f64, usize)> = BTreeMap::new();
    for s in &samples {
        let e = buckets.entry(s.d_delta).or_insert((f64::NEG_INFINITY, 0));
        e.0 = e.0.max(s.defect);
        e.1 += 1;
    }
    let max_by_scale = buckets
        .into_iter()
        .map(|(d_delta, (max_defect, triangles))| ScaleMaximum { d_delta, max_defect, triangles })
        .collect();

    Ok(DefectProfile {
        label: "empirical envelope".into(),
        triangles_examined: samples.len(),
        samples,
        max_by_scale,
        triangle_sampling_capped: capped,
        geodesic_cap_hit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tripod(leg: usize) -> FiniteMetricSpace {
        let mut edges = Vec::new();
        let mut next = 1;
        for _ in 0..3 {
            let mut prev = 0;
            for _ in 0..leg {
                edges.push((prev, next));
                prev = next;
                next += 1;
            }
        }
        FiniteMetricSpace::from_unit_graph(next, &edges).unwrap()
    }

    #[test]
    fn tree_defects_vanish() {
        let t = tripod(4);
        let prof = defect_profile(&t, &DefectSampler::default()).unwrap();
        assert!(!prof.triangle_sampling_capped);
        assert!(prof.max_defect() <= 1e-9, "max defect {}", prof.max_defect());
        for s in &prof.samples {
            let again = witness_defect(&t, &s.witness).unwrap();
            assert!((again - s.defect).abs() <= 1e-9);
        }
    }

    #[test]
    fn degenerate_triangle_has_zero_defect() {
        let t = tripod(2);
        let sampler = DefectSampler {
            explicit: vec![GeodesicTriangle { vertices: [3, 3, 3], sides: [vec![3], vec![3], vec![3]] }],
            include_sampled: false,
            ..Default::default()
        };
        let prof = defect_profile(&t, &sampler).unwrap();
        assert_eq!(prof.samples.len(), 1);
        assert_eq!(prof.samples[0].defect, 0.0);
    }

    #[test]
    fn rejects_non_geodesic_sides() {
        let c = FiniteMetricSpace::from_unit_graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let sampler = DefectSampler {
            explicit: vec![GeodesicTriangle {
                vertices: [0, 1, 2],
                sides: [vec![0, 3, 2, 1], vec![0, 1, 2], vec![1, 2]],
            }],
            include_sampled: false,
            ..Default::default()
        };
        assert!(matches!(defect_profile(&c, &sampler), Err(GeometryError::InvalidSpec(_))));
    }

    #[test]
    fn geodesic_enumeration_on_a_square_grid() {
        // 3x3 grid: 6 monotone staircases from corner to corner.
        let idx = |x: usize, y: usize| y * 3 + x;
        let mut e = Vec::new();
        for y in 0..3 {
            for x in 0..3 {
                if x + 1 < 3 {
                    e.push((idx(x, y), idx(x + 1, y)));
                }
                if y + 1 < 3 {
                    e.push((idx(x, y), idx(x, y + 1)));
                }
            }
        }
        let g = FiniteMetricSpace::from_unit_graph(9, &e).unwrap();
        let (all, capped) = geodesics_between(&g, 0, 8, 100, 1);
        assert_eq!(all.len(), 6);
        assert!(!capped);
        let (some, capped) = geodesics_between(&g, 0, 8, 3, 1);
        assert!(capped && some.len() == 3);
        let (again, _) = geodesics_between(&g, 0, 8, 3, 1);
        assert_eq!(some, again);
    }
}
