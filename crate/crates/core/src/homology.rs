//! Simplicial homology ranks, greedy collapses and contractibility evidence.
//!
//! Betti numbers are computed from ranks of sparse boundary matrices, over
//! GF(2) by default and over the rationals as a cross-check. Rational
//! elimination is fraction-free with row contents divided out; it reports
//! overflow instead of guessing.

use std::cmp::Reverse;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{Simplex, SimplicialComplex};
use crate::pointset::PointSet;
use crate::rips::order_complex_bounded;
use crate::zeta::{conical_certificate_check, ConicalCertificate};

/// Highest degree `betti_numbers` accepts.
pub const MAX_SUPPORTED_DIM: usize = 24;
pub const DEFAULT_MAX_DIM: usize = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomologyError {
    #[error("max_dim {requested} exceeds the supported maximum {supported}")]
    DimensionTooHigh { requested: usize, supported: usize },
    #[error("integer overflow in rational elimination")]
    Overflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Field {
    #[default]
    #[serde(rename = "gf2")]
    Gf2,
    #[serde(rename = "q")]
    Rational,
}

impl std::str::FromStr for Field {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "gf2" => Ok(Field::Gf2),
            "q" => Ok(Field::Rational),
            other => Err(format!("unknown field `{other}` (expected gf2 or q)")),
        }
    }
}

/// Unreduced Betti numbers in degrees `0..=max_dim`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiVector {
    pub betti: Vec<usize>,
    pub field: Field,
    /// Set when the complex has simplices above `max_dim`, whose homology was not computed.
    pub truncated: bool,
    pub empty: bool,
}

impl BettiVector {
    /// Compares with `expected`, padding the shorter side with zeros.
    pub fn matches(&self, expected: &[usize]) -> bool {
        let n = self.betti.len().max(expected.len());
        (0..n).all(|k| self.betti.get(k).copied().unwrap_or(0) == expected.get(k).copied().unwrap_or(0))
    }

    /// Same numbers in every degree, irrespective of field or flags.
    pub fn same_numbers(&self, other: &BettiVector) -> bool {
        self.matches(&other.betti)
    }

    /// Nonempty with reduced Betti numbers all zero up to `max_dim`.
    pub fn reduced_trivial(&self) -> bool {
        !self.empty && self.matches(&[1])
    }
}

impl fmt::Display for BettiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.betti.iter().map(|b| b.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

fn face_index(complex: &SimplicialComplex) -> HashMap<&[u32], usize> {
    let mut counters: HashMap<usize, usize> = HashMap::new();
    let mut out = HashMap::with_capacity(complex.len());
    for s in complex.simplices() {
        let c = counters.entry(s.len()).or_insert(0);
        out.insert(s.as_slice(), *c);
        *c += 1;
    }
    out
}

fn boundary_columns(complex: &SimplicialComplex, index: &HashMap<&[u32], usize>, k: usize) -> Vec<Vec<(u32, i64)>> {
    complex
        .simplices_of_dim(k)
        .map(|s| {
            let mut col: Vec<(u32, i64)> = (0..s.len())
                .map(|i| {
                    let face: Simplex = s.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
                    let row = index[face.as_slice()] as u32;
                    (row, if i % 2 == 0 { 1 } else { -1 })
                })
                .collect();
            col.sort_unstable_by_key(|e| e.0);
            col
        })
        .collect()
}

fn rank_gf2(columns: Vec<Vec<(u32, i64)>>) -> usize {
    let mut pivots: HashMap<u32, Vec<u32>> = HashMap::new();
    let mut rank = 0;
    for col in columns {
        let mut col: Vec<u32> = col.into_iter().map(|e| e.0).collect();
        while let Some(&low) = col.last() {
            match pivots.get(&low) {
                Some(p) => col = symmetric_difference(&col, p),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            pivots.insert(low, col);
            rank += 1;
        }
    }
    rank
}

fn symmetric_difference(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i64
}

/// `x * col - y * piv`, content removed.
fn combine(col: &[(u32, i64)], x: i64, piv: &[(u32, i64)], y: i64) -> Result<Vec<(u32, i64)>, HomologyError> {
    let mut out = Vec::with_capacity(col.len() + piv.len());
    let (mut i, mut j) = (0, 0);
    let push = |out: &mut Vec<(u32, i64)>, r: u32, v: i128| -> Result<(), HomologyError> {
        if v != 0 {
            out.push((r, i64::try_from(v).map_err(|_| HomologyError::Overflow)?));
        }
        Ok(())
    };
    while i < col.len() || j < piv.len() {
        let take_col = j >= piv.len() || (i < col.len() && col[i].0 < piv[j].0);
        let take_piv = i >= col.len() || (j < piv.len() && piv[j].0 < col[i].0);
        if take_col {
            push(&mut out, col[i].0, x as i128 * col[i].1 as i128)?;
            i += 1;
        } else if take_piv {
            push(&mut out, piv[j].0, -(y as i128) * piv[j].1 as i128)?;
            j += 1;
        } else {
            push(&mut out, col[i].0, x as i128 * col[i].1 as i128 - y as i128 * piv[j].1 as i128)?;
            i += 1;
            j += 1;
        }
    }
    let g = out.iter().fold(0, |g, e| gcd(g, e.1));
    if g > 1 {
        for e in &mut out {
            e.1 /= g;
        }
    }
    Ok(out)
}

fn rank_rational(columns: Vec<Vec<(u32, i64)>>) -> Result<usize, HomologyError> {
    let mut pivots: HashMap<u32, Vec<(u32, i64)>> = HashMap::new();
    let mut rank = 0;
    for mut col in columns {
        while let Some(&(low, v)) = col.last() {
            match pivots.get(&low) {
                Some(p) => {
                    let pv = p.last().unwrap().1;
                    let g = gcd(pv, v);
                    col = combine(&col, pv / g, p, v / g)?;
                }
                None => break,
            }
        }
        if let Some(&(low, _)) = col.last() {
            pivots.insert(low, col);
            rank += 1;
        }
    }
    Ok(rank)
}

/// Betti numbers `b_0..b_max_dim` of a face-closed complex.
pub fn betti_numbers(complex: &SimplicialComplex, field: Field, max_dim: usize) -> Result<BettiVector, HomologyError> {
    if max_dim > MAX_SUPPORTED_DIM {
        return Err(HomologyError::DimensionTooHigh { requested: max_dim, supported: MAX_SUPPORTED_DIM });
    }
    let f = complex.f_vector();
    let count = |k: usize| f.get(k).copied().unwrap_or(0);
    let index = face_index(complex);
    // ranks[k] = rank of the boundary map from k-chains to (k-1)-chains.
    let mut ranks = vec![0usize; max_dim + 2];
    for (k, rank) in ranks.iter_mut().enumerate().skip(1) {
        if count(k) == 0 {
            continue;
        }
        let cols = boundary_columns(complex, &index, k);
        *rank = match field {
            Field::Gf2 => rank_gf2(cols),
            Field::Rational => rank_rational(cols)?,
        };
    }
    let betti = (0..=max_dim).map(|k| count(k) - ranks[k] - ranks[k + 1]).collect();
    Ok(BettiVector {
        betti,
        field,
        truncated: complex.dimension().is_some_and(|d| d > max_dim),
        empty: complex.is_empty(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CollapseResult {
    pub reduced: SimplicialComplex,
    /// Removed pairs `(free face, its unique coface)` in order.
    pub sequence: Vec<(Simplex, Simplex)>,
}

impl CollapseResult {
    pub fn is_point(&self) -> bool {
        self.reduced.len() == 1
    }
}

/// Removes free-face pairs until none remain.
///
/// The next pair is always the free face of highest dimension, ties broken
/// lexicographically, so the sequence is deterministic.
pub fn greedy_collapse(complex: &SimplicialComplex) -> CollapseResult {
    let simplices = complex.simplices();
    let idx: HashMap<&[u32], usize> = simplices.iter().enumerate().map(|(i, s)| (s.as_slice(), i)).collect();
    let facets: Vec<Vec<usize>> = simplices
        .iter()
        .map(|s| {
            if s.len() == 1 {
                return Vec::new();
            }
            (0..s.len())
                .map(|i| {
                    let f: Simplex = s.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
                    idx[f.as_slice()]
                })
                .collect()
        })
        .collect();
    let mut cofacets: Vec<Vec<usize>> = vec![Vec::new(); simplices.len()];
    for (t, fs) in facets.iter().enumerate() {
        for &f in fs {
            cofacets[f].push(t);
        }
    }
    let mut alive = vec![true; simplices.len()];
    let mut cof_count: Vec<usize> = cofacets.iter().map(Vec::len).collect();
    let key = |i: usize| (Reverse(simplices[i].len()), i);
    let mut queue: BTreeSet<(Reverse<usize>, usize)> =
        (0..simplices.len()).filter(|&i| cof_count[i] == 1).map(key).collect();
    let mut sequence = Vec::new();

    while let Some((_, s)) = queue.pop_first() {
        if !alive[s] || cof_count[s] != 1 {
            continue;
        }
        let t = *cofacets[s].iter().find(|&&t| alive[t]).unwrap();
        if cof_count[t] != 0 {
            continue;
        }
        alive[s] = false;
        alive[t] = false;
        sequence.push((simplices[s].clone(), simplices[t].clone()));
        let mut touched = Vec::new();
        for &f in facets[t].iter().chain(facets[s].iter()) {
            cof_count[f] -= 1;
            touched.push(f);
        }
        for f in touched {
            if alive[f] {
                queue.insert(key(f));
            }
            for &g in &facets[f] {
                if alive[g] {
                    queue.insert(key(g));
                }
            }
        }
    }
    let reduced = SimplicialComplex::from_simplices(
        complex.n_vertices(),
        simplices.iter().enumerate().filter(|&(i, _)| alive[i]).map(|(_, s)| s.clone()),
    );
    CollapseResult { reduced, sequence }
}

/// Which rung of the ladder produced the evidence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "tier", rename_all = "snake_case")]
pub enum EvidenceTier {
    /// A vertex lying in every facet; for posets, an element comparable to all others.
    ConeVertex {
        vertex: usize,
        label: Option<PointSet>,
    },
    /// A verified conical certificate `x <= f(x) >= c`.
    Conical {
        apex: PointSet,
        poset_size: usize,
    },
    /// Greedy collapse reached a single vertex.
    Collapsed {
        steps: usize,
    },
    /// Reduced Betti numbers vanish up to `max_dim`; evidence, not proof.
    BettiTrivial {
        max_dim: usize,
    },
    Inconclusive {
        betti: Option<BettiVector>,
    },
    /// The empty complex, which is not contractible.
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContractibilityEvidence {
    #[serde(flatten)]
    pub tier: EvidenceTier,
    /// Stabilizer-equivariant contractibility is certified as well.
    pub equivariant: bool,
}

impl ContractibilityEvidence {
    fn new(tier: EvidenceTier, equivariant: bool) -> Self {
        ContractibilityEvidence { tier, equivariant }
    }

    /// Cone vertex, conical certificate or collapse.
    pub fn is_certificate(&self) -> bool {
        matches!(
            self.tier,
            EvidenceTier::ConeVertex { .. } | EvidenceTier::Conical { .. } | EvidenceTier::Collapsed { .. }
        )
    }

    /// Certificate tier or trivial reduced Betti numbers.
    pub fn supports_contractible(&self) -> bool {
        self.is_certificate() || matches!(self.tier, EvidenceTier::BettiTrivial { .. })
    }

    pub fn tier_name(&self) -> &'static str {
        match self.tier {
            EvidenceTier::ConeVertex { .. } => "cone_vertex",
            EvidenceTier::Conical { .. } => "conical",
            EvidenceTier::Collapsed { .. } => "collapsed",
            EvidenceTier::BettiTrivial { .. } => "betti_trivial",
            EvidenceTier::Inconclusive { .. } => "inconclusive",
            EvidenceTier::Empty => "empty",
        }
    }
}

fn cone_vertex(complex: &SimplicialComplex) -> Option<u32> {
    let facets = complex.facets();
    let first = facets.first()?;
    first.iter().copied().find(|v| facets.iter().all(|f| f.binary_search(v).is_ok()))
}

fn conical_passes(cert: Option<&ConicalCertificate>) -> Option<&ConicalCertificate> {
    cert.filter(|c| matches!(conical_certificate_check(c), Ok(true)))
}

fn betti_rungs(complex: &SimplicialComplex, max_dim: usize) -> ContractibilityEvidence {
    let collapse = greedy_collapse(complex);
    if collapse.is_point() {
        return ContractibilityEvidence::new(EvidenceTier::Collapsed { steps: collapse.sequence.len() }, false);
    }
    match betti_numbers(complex, Field::Gf2, max_dim) {
        Ok(b) if b.reduced_trivial() => ContractibilityEvidence::new(EvidenceTier::BettiTrivial { max_dim }, false),
        Ok(b) => ContractibilityEvidence::new(EvidenceTier::Inconclusive { betti: Some(b) }, false),
        Err(_) => ContractibilityEvidence::new(EvidenceTier::Inconclusive { betti: None }, false),
    }
}

/// Evidence ladder on an explicit complex: cone vertex, supplied conical
/// certificate, greedy collapse, trivial Betti numbers, inconclusive.
pub fn contractibility_evidence(
    complex: &SimplicialComplex,
    conical: Option<&ConicalCertificate>,
    max_dim: usize,
) -> ContractibilityEvidence {
    if complex.is_empty() {
        return ContractibilityEvidence::new(EvidenceTier::Empty, false);
    }
    if let Some(v) = cone_vertex(complex) {
        return ContractibilityEvidence::new(EvidenceTier::ConeVertex { vertex: v as usize, label: None }, false);
    }
    if let Some(c) = conical_passes(conical) {
        return ContractibilityEvidence::new(
            EvidenceTier::Conical { apex: c.apex, poset_size: c.poset.len() },
            c.stab_invariant,
        );
    }
    betti_rungs(complex, max_dim)
}

/// Element comparable to every other element, if any.
///
/// Such elements form a chain, so any group acting on the poset fixes them.
pub fn poset_cone_element(poset: &[PointSet]) -> Option<usize> {
    if poset.is_empty() {
        return None;
    }
    let comparable = |a: PointSet, b: PointSet| a.is_subset(b) || b.is_subset(a);
    let unique_extreme = |maximal: bool| -> Option<usize> {
        let mut found = None;
        for (i, &x) in poset.iter().enumerate() {
            let dominated = poset.iter().any(|&y| if maximal { x.is_proper_subset(y) } else { y.is_proper_subset(x) });
            if !dominated {
                if found.is_some() {
                    return None;
                }
                found = Some(i);
            }
        }
        found
    };
    if poset.len() <= 4096 {
        if let Some(i) = unique_extreme(true).or_else(|| unique_extreme(false)) {
            return Some(i);
        }
        return (0..poset.len()).find(|&i| poset.iter().all(|&y| comparable(poset[i], y)));
    }
    // Large posets: only the canonical max/min candidates.
    let top = *poset.iter().max_by_key(|p| p.len())?;
    if poset.iter().all(|&y| y.is_subset(top)) {
        return poset.iter().position(|&p| p == top);
    }
    let bottom = *poset.iter().min_by_key(|p| p.len())?;
    if poset.iter().all(|&y| bottom.is_subset(y)) {
        return poset.iter().position(|&p| p == bottom);
    }
    None
}

/// Evidence ladder on a poset of subsets ordered by inclusion.
///
/// The order complex is only built when it has at most `budget` simplices.
pub fn poset_evidence(
    poset: &[PointSet],
    conical: Option<&ConicalCertificate>,
    max_dim: usize,
    budget: usize,
) -> ContractibilityEvidence {
    if poset.is_empty() {
        return ContractibilityEvidence::new(EvidenceTier::Empty, false);
    }
    if let Some(i) = poset_cone_element(poset) {
        return ContractibilityEvidence::new(EvidenceTier::ConeVertex { vertex: i, label: Some(poset[i]) }, true);
    }
    if let Some(c) = conical_passes(conical) {
        return ContractibilityEvidence::new(
            EvidenceTier::Conical { apex: c.apex, poset_size: c.poset.len() },
            c.stab_invariant,
        );
    }
    match order_complex_bounded(poset, budget) {
        Some(oc) => betti_rungs(&oc.complex, max_dim),
        None => ContractibilityEvidence::new(EvidenceTier::Inconclusive { betti: None }, false),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hexagon() -> SimplicialComplex {
        SimplicialComplex::from_facets(6, (0..6u32).map(|i| vec![i, (i + 1) % 6]))
    }

    fn boundary_of_simplex(n: u32) -> SimplicialComplex {
        SimplicialComplex::from_facets(n as usize, (0..n).map(|skip| (0..n).filter(|&v| v != skip).collect()))
    }

    #[test]
    fn circle_and_simplices() {
        for field in [Field::Gf2, Field::Rational] {
            assert!(betti_numbers(&hexagon(), field, 3).unwrap().matches(&[1, 1]));
            assert!(betti_numbers(&boundary_of_simplex(3), field, 3).unwrap().matches(&[1, 1]));
            let solid = SimplicialComplex::from_facets(3, [vec![0, 1, 2]]);
            assert!(betti_numbers(&solid, field, 3).unwrap().matches(&[1, 0]));
            assert!(betti_numbers(&boundary_of_simplex(4), field, 3).unwrap().matches(&[1, 0, 1]));
        }
    }

    #[test]
    fn empty_complex() {
        let b = betti_numbers(&SimplicialComplex::empty(), Field::Gf2, 2).unwrap();
        assert!(b.empty && b.matches(&[0]));
        assert!(!b.reduced_trivial());
    }

    #[test]
    fn projective_plane_separates_fields() {
        // Six-vertex RP^2: H_1 = Z/2, so GF(2) sees b1 = b2 = 1 and Q sees neither.
        let rp2 = SimplicialComplex::from_facets(
            6,
            [
                vec![0, 1, 2],
                vec![0, 2, 3],
                vec![0, 3, 4],
                vec![0, 4, 5],
                vec![0, 5, 1],
                vec![1, 2, 4],
                vec![2, 3, 5],
                vec![3, 4, 1],
                vec![4, 5, 2],
                vec![5, 1, 3],
            ],
        );
        assert_eq!(rp2.euler_characteristic(), 1);
        assert!(betti_numbers(&rp2, Field::Gf2, 3).unwrap().matches(&[1, 1, 1]));
        assert!(betti_numbers(&rp2, Field::Rational, 3).unwrap().matches(&[1, 0, 0]));
    }

    #[test]
    fn dimension_cap() {
        assert!(matches!(betti_numbers(&hexagon(), Field::Gf2, 99), Err(HomologyError::DimensionTooHigh { .. })));
        let b = betti_numbers(&boundary_of_simplex(5), Field::Gf2, 1).unwrap();
        assert!(b.truncated);
    }

    #[test]
    fn collapses() {
        let full = SimplicialComplex::from_facets(5, [vec![0, 1, 2, 3, 4]]);
        let c = greedy_collapse(&full);
        assert!(c.is_point());
        assert_eq!(c.sequence.len(), (full.len() - 1) / 2);
        let h = greedy_collapse(&hexagon());
        assert_eq!(h.reduced, hexagon());
        assert!(h.sequence.is_empty());
        assert!(greedy_collapse(&hexagon().cone()).is_point());
        assert!(greedy_collapse(&boundary_of_simplex(4).cone()).is_point());
    }

    #[test]
    fn evidence_ladder() {
        let apexed = hexagon().cone();
        assert!(matches!(contractibility_evidence(&apexed, None, 3).tier, EvidenceTier::ConeVertex { vertex: 6, .. }));
        match contractibility_evidence(&hexagon(), None, 3).tier {
            EvidenceTier::Inconclusive { betti: Some(b) } => assert!(b.matches(&[1, 1])),
            other => panic!("unexpected {other:?}"),
        }
        // A strip of four triangles has no common vertex but collapses.
        let strip = SimplicialComplex::from_facets(6, [vec![0, 1, 2], vec![1, 2, 3], vec![2, 3, 4], vec![3, 4, 5]]);
        assert!(matches!(contractibility_evidence(&strip, None, 3).tier, EvidenceTier::Collapsed { .. }));
        // The barycentric subdivision of a 2-simplex is coned by its barycenter.
        let sd = crate::rips::order_complex(&PointSet::full(3).subsets().filter(|s| !s.is_empty()).collect::<Vec<_>>());
        assert!(matches!(contractibility_evidence(&sd.complex, None, 3).tier, EvidenceTier::ConeVertex { .. }));
        let without_top = sd.complex.induced(|v| sd.labels[v as usize] != PointSet::full(3));
        assert!(matches!(contractibility_evidence(&without_top, None, 3).tier, EvidenceTier::Inconclusive { .. }));
    }

    #[test]
    fn barycentric_two_sphere() {
        let proper: Vec<PointSet> = PointSet::full(4).subsets().filter(|s| !s.is_empty() && s.len() < 4).collect();
        let oc = crate::rips::order_complex(&proper);
        for field in [Field::Gf2, Field::Rational] {
            assert!(betti_numbers(&oc.complex, field, 3).unwrap().matches(&[1, 0, 1]));
        }
    }

    #[test]
    fn poset_ladder() {
        let chain = vec![PointSet::from_points([0]), PointSet::from_points([0, 1])];
        let ev = poset_evidence(&chain, None, 3, 1000);
        assert!(ev.is_certificate() && ev.equivariant);
        let anti = vec![PointSet::from_points([0]), PointSet::from_points([1])];
        assert!(matches!(poset_evidence(&anti, None, 3, 1000).tier, EvidenceTier::Inconclusive { .. }));
        assert!(matches!(poset_evidence(&[], None, 3, 1000).tier, EvidenceTier::Empty));
    }
}
