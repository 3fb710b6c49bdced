//! Truncated Rips posets, Morse values, order complexes and flag complexes.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

pub use crate::complex::{Simplex, SimplicialComplex};
use crate::exact::{format_rat, Scale};
use crate::geometry::FiniteMetricSpace;
use crate::pointset::PointSet;
use crate::symmetry::GroupAction;

/// Largest point count accepted without a cardinality cap.
pub const UNCAPPED_POINT_LIMIT: usize = 20;
/// Default ceiling on enumerated subsets.
pub const DEFAULT_VERTEX_BUDGET: usize = 1 << 22;
/// Default ceiling on chains in an order complex.
pub const DEFAULT_CHAIN_BUDGET: usize = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RipsError {
    #[error("enumeration too large: {0}")]
    TooLarge(String),
    #[error("the ambient poset was enumerated with cardinality cap {cap}; this check needs all supersets")]
    CapViolation { cap: usize },
}

/// Lexicographically ordered pair `(diam, -card)`.
///
/// The diameter is an integer numerator over the space's denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct MorseValue {
    pub diam: i64,
    pub neg_card: i64,
}

impl MorseValue {
    pub fn new(diam: i64, card: usize) -> Self {
        MorseValue { diam, neg_card: -(card as i64) }
    }

    pub fn card(&self) -> usize {
        (-self.neg_card) as usize
    }

    /// Smallest value with the given diameter (the largest cardinality).
    pub fn floor_of_diam(diam: i64) -> Self {
        MorseValue { diam, neg_card: i64::MIN }
    }

    /// Largest value with the given diameter.
    pub fn ceiling_of_diam(diam: i64) -> Self {
        MorseValue { diam, neg_card: -1 }
    }

    /// Renders as `(d,-k)` with `d` in lowest terms.
    pub fn label(&self, space: &FiniteMetricSpace) -> String {
        format!("({},{})", format_rat(&space.to_rat(self.diam)), self.neg_card)
    }
}

pub fn morse_value(space: &FiniteMetricSpace, s: PointSet) -> MorseValue {
    MorseValue::new(space.diam_of(s), s.len())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SubsetVertex {
    pub set: PointSet,
    /// Diameter numerator over the space's denominator.
    pub diam: i64,
    pub card: usize,
}

impl SubsetVertex {
    pub fn new(space: &FiniteMetricSpace, set: PointSet) -> Self {
        SubsetVertex { set, diam: space.diam_of(set), card: set.len() }
    }

    pub fn morse_value(&self) -> MorseValue {
        MorseValue::new(self.diam, self.card)
    }
}

impl fmt::Display for SubsetVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.set.fmt(f)
    }
}

/// The vertices of `P_fn^{<=t}(X)` in canonical order.
#[derive(Debug, Clone)]
pub struct RipsPoset {
    pub scale: Scale,
    pub card_cap: Option<usize>,
    pub vertices: Vec<SubsetVertex>,
    index: HashMap<PointSet, usize>,
}

impl RipsPoset {
    fn new(scale: Scale, card_cap: Option<usize>, vertices: Vec<SubsetVertex>) -> Self {
        let index = vertices.iter().enumerate().map(|(i, v)| (v.set, i)).collect();
        RipsPoset { scale, card_cap, vertices, index }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index_of(&self, s: PointSet) -> Option<usize> {
        self.index.get(&s).copied()
    }

    pub fn contains(&self, s: PointSet) -> bool {
        self.index.contains_key(&s)
    }

    pub fn sets(&self) -> Vec<PointSet> {
        self.vertices.iter().map(|v| v.set).collect()
    }

    /// Whether a cardinality cap may have hidden vertices.
    pub fn is_capped(&self) -> bool {
        self.card_cap.is_some()
    }

    pub fn require_uncapped(&self) -> Result<(), RipsError> {
        match self.card_cap {
            Some(cap) => Err(RipsError::CapViolation { cap }),
            None => Ok(()),
        }
    }
}

/// Enumerates every nonempty clique of the threshold graph `d <= bound`
/// inside `universe`, extending each one by points of `extend_base`
/// compatible with `base`. Output is `(base ∪ clique, diam)` in canonical order.
struct CliqueSearch<'a> {
    space: &'a FiniteMetricSpace,
    bound: Option<i64>,
    card_cap: Option<usize>,
    budget: usize,
}

impl CliqueSearch<'_> {
    fn neighbor_masks(&self, universe: PointSet) -> Vec<PointSet> {
        (0..self.space.n())
            .map(|i| {
                PointSet::from_points(
                    universe.iter().filter(|&j| j != i && self.bound.is_none_or(|b| self.space.dist(i, j) <= b)),
                )
            })
            .collect()
    }

    fn run(&self, base: PointSet, base_diam: i64, universe: PointSet) -> Result<Vec<(PointSet, i64)>, RipsError> {
        let nb = self.neighbor_masks(universe);
        let counter = AtomicUsize::new(0);
        let starts: Vec<usize> = universe.iter().collect();
        let parts: Result<Vec<Vec<(PointSet, i64)>>, RipsError> = starts
            .par_iter()
            .map(|&i| {
                let mut out = Vec::new();
                let later = PointSet::from_bits(if i + 1 >= 64 { 0 } else { !0u64 << (i + 1) });
                let cand = nb[i].intersection(later);
                let start_diam = base_diam.max(self.space.max_dist_to(i, base));
                self.extend(base.with(i), start_diam, cand, &nb, &counter, &mut out)?;
                Ok(out)
            })
            .collect();
        let mut all: Vec<(PointSet, i64)> = parts?.into_iter().flatten().collect();
        all.sort_unstable_by_key(|e| e.0);
        Ok(all)
    }

    fn extend(
        &self,
        set: PointSet,
        diam: i64,
        cand: PointSet,
        nb: &[PointSet],
        counter: &AtomicUsize,
        out: &mut Vec<(PointSet, i64)>,
    ) -> Result<(), RipsError> {
        if counter.fetch_add(1, Ordering::Relaxed) >= self.budget {
            return Err(RipsError::TooLarge(format!("more than {} subsets", self.budget)));
        }
        out.push((set, diam));
        if self.card_cap.is_some_and(|c| set.len() >= c) {
            return Ok(());
        }
        for j in cand.iter() {
            let later = PointSet::from_bits(if j + 1 >= 64 { 0 } else { !0u64 << (j + 1) });
            let d = diam.max(self.space.max_dist_to(j, set));
            self.extend(set.with(j), d, cand.intersection(nb[j]).intersection(later), nb, counter, out)?;
        }
        Ok(())
    }
}

/// All nonempty subsets of diameter at most `t`, with at most `card_cap` points.
pub fn enumerate_rips_vertices(
    space: &FiniteMetricSpace,
    t: Scale,
    card_cap: Option<usize>,
) -> Result<RipsPoset, RipsError> {
    enumerate_rips_vertices_with_budget(space, t, card_cap, DEFAULT_VERTEX_BUDGET)
}

pub fn enumerate_rips_vertices_with_budget(
    space: &FiniteMetricSpace,
    t: Scale,
    card_cap: Option<usize>,
    budget: usize,
) -> Result<RipsPoset, RipsError> {
    let n = space.n();
    if n > PointSet::CAPACITY {
        return Err(RipsError::TooLarge(format!("{n} points exceed the subset capacity {}", PointSet::CAPACITY)));
    }
    if card_cap.is_none() && n > UNCAPPED_POINT_LIMIT {
        return Err(RipsError::TooLarge(format!(
            "{n} points exceed the uncapped limit {UNCAPPED_POINT_LIMIT}; pass a cardinality cap"
        )));
    }
    let bound = t.numerator_bound(space.denom());
    if bound.is_some_and(|b| b < 0) || card_cap == Some(0) {
        return Ok(RipsPoset::new(t, card_cap, Vec::new()));
    }
    let search = CliqueSearch { space, bound, card_cap, budget };
    let found = search.run(PointSet::empty(), 0, space.all_points())?;
    let vertices = found.into_iter().map(|(set, diam)| SubsetVertex { set, diam, card: set.len() }).collect();
    // A cap at or above n hides nothing.
    let card_cap = card_cap.filter(|&c| c < n);
    Ok(RipsPoset::new(t, card_cap, vertices))
}

/// Subsets of `s` with diameter strictly below `diam(s)`, canonically ordered.
pub fn down_poset(space: &FiniteMetricSpace, s: PointSet) -> Result<Vec<PointSet>, RipsError> {
    let d = space.diam_of(s);
    if d == 0 {
        return Ok(Vec::new());
    }
    let search = CliqueSearch { space, bound: Some(d - 1), card_cap: None, budget: DEFAULT_VERTEX_BUDGET };
    Ok(search.run(PointSet::empty(), 0, s)?.into_iter().map(|e| e.0).collect())
}

/// Strict supersets of `s` inside the space with the same diameter.
pub fn up_poset(space: &FiniteMetricSpace, s: PointSet) -> Result<Vec<PointSet>, RipsError> {
    up_poset_within(space, s, space.all_points())
}

/// Strict supersets of `s` inside `region` with the same diameter.
pub fn up_poset_within(space: &FiniteMetricSpace, s: PointSet, region: PointSet) -> Result<Vec<PointSet>, RipsError> {
    let d = space.diam_of(s);
    let candidates = PointSet::from_points(region.difference(s).iter().filter(|&p| space.max_dist_to(p, s) <= d));
    let search = CliqueSearch { space, bound: Some(d), card_cap: None, budget: DEFAULT_VERTEX_BUDGET };
    Ok(search.run(s, d, candidates)?.into_iter().map(|e| e.0).collect())
}

/// An order complex with the poset element behind each vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderComplex {
    pub complex: SimplicialComplex,
    /// `labels[v]` is the subset represented by vertex `v`.
    pub labels: Vec<PointSet>,
}

impl OrderComplex {
    pub fn vertex_of(&self, s: PointSet) -> Option<u32> {
        self.labels.binary_search(&s).ok().map(|i| i as u32)
    }

    pub fn chain_labels(&self, simplex: &[u32]) -> Vec<PointSet> {
        simplex.iter().map(|&v| self.labels[v as usize]).collect()
    }
}

/// Order complex of a poset of subsets under inclusion.
pub fn order_complex(poset: &[PointSet]) -> OrderComplex {
    order_complex_bounded(poset, usize::MAX).expect("unbounded order complex")
}

/// Order complex, or `None` if it has more than `budget` simplices.
pub fn order_complex_bounded(poset: &[PointSet], budget: usize) -> Option<OrderComplex> {
    let mut labels = poset.to_vec();
    labels.sort_unstable();
    labels.dedup();
    let m = labels.len();
    // Canonical order sorts by cardinality, so strict supersets come later.
    let above: Vec<Vec<u32>> = (0..m)
        .into_par_iter()
        .map(|i| ((i + 1)..m).filter(|&j| labels[i].is_proper_subset(labels[j])).map(|j| j as u32).collect())
        .collect();
    let mut simplices: Vec<Simplex> = Vec::new();
    let mut stack: Vec<u32> = Vec::new();
    fn walk(v: u32, above: &[Vec<u32>], stack: &mut Vec<u32>, out: &mut Vec<Simplex>, budget: usize) -> bool {
        stack.push(v);
        out.push(stack.clone());
        if out.len() > budget {
            return false;
        }
        for &w in &above[v as usize] {
            if !walk(w, above, stack, out, budget) {
                return false;
            }
        }
        stack.pop();
        true
    }
    for v in 0..m as u32 {
        stack.clear();
        if !walk(v, &above, &mut stack, &mut simplices, budget) {
            return None;
        }
    }
    Some(OrderComplex { complex: SimplicialComplex::from_simplices(m, simplices), labels })
}

/// Flag complex of the graph `{x,y : d(x,y) <= t}`, built from its maximal cliques.
pub fn rips_flag_complex(space: &FiniteMetricSpace, t: Scale) -> Result<SimplicialComplex, RipsError> {
    let n = space.n();
    if n > PointSet::CAPACITY {
        return Err(RipsError::TooLarge(format!("{n} points exceed the subset capacity {}", PointSet::CAPACITY)));
    }
    let bound = t.numerator_bound(space.denom());
    if bound.is_some_and(|b| b < 0) {
        return Ok(SimplicialComplex::empty());
    }
    let nb: Vec<u64> = (0..n)
        .map(|i| {
            PointSet::from_points((0..n).filter(|&j| j != i && bound.is_none_or(|b| space.dist(i, j) <= b))).bits()
        })
        .collect();
    let mut maximal = Vec::new();
    bron_kerbosch(0, PointSet::full(n).bits(), 0, &nb, &mut maximal);
    let simplex_total: usize = maximal.iter().map(|c: &u64| (1usize << c.count_ones().min(40)) - 1).sum();
    if simplex_total > DEFAULT_CHAIN_BUDGET {
        return Err(RipsError::TooLarge(format!("flag complex has more than {DEFAULT_CHAIN_BUDGET} simplices")));
    }
    Ok(SimplicialComplex::from_facets(
        n,
        maximal.into_iter().map(|c| PointSet::from_bits(c).iter().map(|v| v as u32).collect()),
    ))
}

fn bron_kerbosch(r: u64, mut p: u64, mut x: u64, nb: &[u64], out: &mut Vec<u64>) {
    if p == 0 {
        if x == 0 {
            out.push(r);
        }
        return;
    }
    let pivot = (p | x).trailing_zeros() as usize;
    let mut cand = p & !nb[pivot];
    while cand != 0 {
        let v = cand.trailing_zeros() as usize;
        cand &= cand - 1;
        bron_kerbosch(r | 1 << v, p & nb[v], x & nb[v], nb, out);
        p &= !(1 << v);
        x |= 1 << v;
    }
}

/// Elements of `poset` invariant under every listed group element.
pub fn fixed_subposet(poset: &[PointSet], action: &GroupAction, subgroup: &[usize]) -> Vec<PointSet> {
    poset.iter().copied().filter(|&s| action.is_invariant(subgroup, s)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::{betti_numbers, Field};
    use crate::symmetry::{rotation, PermutationGroup};

    fn ps(v: &[usize]) -> PointSet {
        PointSet::from_points(v.iter().copied())
    }

    fn path(n: usize) -> FiniteMetricSpace {
        FiniteMetricSpace::from_unit_graph(n, &(0..n - 1).map(|i| (i, i + 1)).collect::<Vec<_>>()).unwrap()
    }

    fn cycle(n: usize) -> FiniteMetricSpace {
        FiniteMetricSpace::from_unit_graph(n, &(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>()).unwrap()
    }

    fn brute(space: &FiniteMetricSpace, t: i64) -> Vec<PointSet> {
        let mut v: Vec<PointSet> =
            space.all_points().subsets().filter(|s| !s.is_empty() && space.diam_of(*s) <= t).collect();
        v.sort();
        v
    }

    #[test]
    fn path_vertices_at_one() {
        let p = enumerate_rips_vertices(&path(3), Scale::finite(1), None).unwrap();
        let expected: Vec<PointSet> =
            [vec![0], vec![1], vec![2], vec![0, 1], vec![1, 2]].into_iter().map(PointSet::from_points).collect();
        assert_eq!(p.sets(), expected);
    }

    #[test]
    fn scale_extremes() {
        let c = cycle(6);
        assert_eq!(enumerate_rips_vertices(&c, Scale::finite(0), None).unwrap().len(), 6);
        assert_eq!(enumerate_rips_vertices(&c, Scale::Infinite, None).unwrap().len(), 63);
        assert!(enumerate_rips_vertices(&c, Scale::Finite(crate::Rat::new(-1, 2)), None).unwrap().is_empty());
    }

    #[test]
    fn matches_brute_force() {
        let c = cycle(7);
        for t in 0..=3 {
            let p = enumerate_rips_vertices(&c, Scale::finite(t), None).unwrap();
            assert_eq!(p.sets(), brute(&c, t));
        }
        let capped = enumerate_rips_vertices(&c, Scale::Infinite, Some(2)).unwrap();
        assert_eq!(capped.len(), 7 + 21);
        assert!(capped.is_capped());
    }

    #[test]
    fn uncapped_limit() {
        let big = path(21);
        assert!(matches!(enumerate_rips_vertices(&big, Scale::finite(1), None), Err(RipsError::TooLarge(_))));
        assert!(enumerate_rips_vertices(&big, Scale::finite(1), Some(3)).is_ok());
    }

    #[test]
    fn morse_order() {
        let p = path(3);
        let c = cycle(6);
        assert!(morse_value(&p, ps(&[0, 1])) < morse_value(&p, ps(&[0, 1, 2])));
        assert!(morse_value(&c, ps(&[0, 1, 2])) < morse_value(&c, ps(&[0, 2])));
        assert_eq!(morse_value(&p, ps(&[1])), MorseValue::new(0, 1));
        assert_eq!(morse_value(&p, ps(&[1])).label(&p), "(0,-1)");
    }

    #[test]
    fn order_complex_examples() {
        let chain = order_complex(&[ps(&[0]), ps(&[0, 1]), ps(&[0, 1, 2])]);
        assert_eq!(chain.complex.f_vector(), vec![3, 3, 1]);
        let anti = order_complex(&[ps(&[0]), ps(&[1])]);
        assert_eq!(anti.complex.f_vector(), vec![2]);
        let proper: Vec<PointSet> = PointSet::full(3).subsets().filter(|x| !x.is_empty() && x.len() < 3).collect();
        let hex = order_complex(&proper);
        assert_eq!(hex.complex.f_vector(), vec![6, 6]);
        assert!(betti_numbers(&hex.complex, Field::Gf2, 2).unwrap().matches(&[1, 1]));
        assert!(order_complex_bounded(&proper, 5).is_none());
    }

    #[test]
    fn flag_complex_examples() {
        let c = cycle(6);
        let flag = rips_flag_complex(&c, Scale::finite(1)).unwrap();
        assert!(betti_numbers(&flag, Field::Gf2, 3).unwrap().matches(&[1, 1]));
        let full = rips_flag_complex(&c, Scale::finite(3)).unwrap();
        assert_eq!(full.len(), 63);
        let p = path(3);
        let flag = rips_flag_complex(&p, Scale::finite(1)).unwrap();
        let oc = order_complex(&enumerate_rips_vertices(&p, Scale::finite(1), None).unwrap().sets());
        assert_eq!(oc.complex.len(), 9);
        assert!(betti_numbers(&flag, Field::Gf2, 2)
            .unwrap()
            .same_numbers(&betti_numbers(&oc.complex, Field::Gf2, 2).unwrap()));
    }

    #[test]
    fn flag_simplices_are_rips_vertices() {
        let c = cycle(8);
        for t in 0..=4 {
            let flag = rips_flag_complex(&c, Scale::finite(t)).unwrap();
            let mut from_flag: Vec<PointSet> =
                flag.simplices().iter().map(|s| PointSet::from_points(s.iter().map(|&v| v as usize))).collect();
            from_flag.sort();
            assert_eq!(from_flag, brute(&c, t));
        }
    }

    #[test]
    fn fixed_subposets() {
        let c = cycle(6);
        let all = enumerate_rips_vertices(&c, Scale::Infinite, None).unwrap().sets();
        let g = PermutationGroup::close(6, &[rotation(6)], 100).unwrap();
        let action = GroupAction::new(g, &c).unwrap();
        assert_eq!(fixed_subposet(&all, &action, &[0]).len(), 63);
        let r3 = action.group().index_of(&[3, 4, 5, 0, 1, 2]).unwrap();
        assert_eq!(fixed_subposet(&all, &action, &[0, r3]).len(), 7);
        let whole: Vec<usize> = (0..6).collect();
        assert_eq!(fixed_subposet(&all, &action, &whole), vec![PointSet::full(6)]);
    }

    #[test]
    fn down_and_up() {
        let p = path(3);
        assert_eq!(down_poset(&p, ps(&[0, 2])).unwrap(), vec![ps(&[0]), ps(&[2])]);
        assert_eq!(up_poset(&p, ps(&[0, 2])).unwrap(), vec![ps(&[0, 1, 2])]);
        assert!(down_poset(&p, ps(&[1])).unwrap().is_empty());
        assert!(up_poset(&p, ps(&[1])).unwrap().is_empty());
        let c = cycle(6);
        let down = down_poset(&c, PointSet::full(6)).unwrap();
        assert_eq!(down, brute(&c, 2));
    }
}
