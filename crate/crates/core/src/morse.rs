//! Descending links, level filtrations, sublevel complexes and homological
//! verification of Morse descent.
//!
//! Sublevel sets are full subcomplexes: the sublevel at `v` is the order
//! complex of the vertices whose Morse value is at most `v`.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exact::Scale;
use crate::geometry::FiniteMetricSpace;
use crate::homology::{betti_numbers, poset_evidence, BettiVector, ContractibilityEvidence, Field, HomologyError};
use crate::pointset::PointSet;
use crate::rips::{
    down_poset, fixed_subposet, order_complex, order_complex_bounded, up_poset, MorseValue, OrderComplex, RipsError,
    RipsPoset, SubsetVertex,
};
use crate::symmetry::{subgroup_lattice, GroupAction, SubgroupRecord, SymmetryError, DEFAULT_LATTICE_CAP};
use crate::zeta::{check_link_conditions, link_certificate, zeta_map};

/// Simplices allowed in any single order complex built for a check.
pub const DEFAULT_COMPLEX_BUDGET: usize = 1 << 21;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorseError {
    #[error(transparent)]
    Rips(#[from] RipsError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error("{0} is not a vertex of the ambient poset")]
    NotInAmbient(PointSet),
    #[error("window start {from:?} is not below its end {to:?}")]
    EmptyWindowOrder { from: MorseValue, to: MorseValue },
    #[error("order complex exceeds {0} simplices")]
    ComplexTooLarge(usize),
}

/// Evidence that the descending link is the join of the down and up parts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct JoinWitness {
    pub down_chains: u128,
    pub up_chains: u128,
    pub link_chains: u128,
    /// Every down element lies strictly below every up element.
    pub separated: bool,
    /// Each link chain split into a (down chain, up chain) pair, checked
    /// explicitly when the link complex was built.
    pub explicit_split: Option<bool>,
    pub holds: bool,
}

#[derive(Debug, Clone)]
pub struct DescendingData {
    pub center: SubsetVertex,
    pub down: Vec<PointSet>,
    pub up: Vec<PointSet>,
    /// Order complex of `down ∪ up`, when within budget.
    pub link: Option<OrderComplex>,
    pub join: JoinWitness,
}

impl DescendingData {
    pub fn poset(&self) -> Vec<PointSet> {
        let mut p = self.down.clone();
        p.extend_from_slice(&self.up);
        p.sort_unstable();
        p
    }
}

/// Number of nonempty chains in a poset of subsets.
pub fn chain_count(poset: &[PointSet]) -> u128 {
    let mut sorted = poset.to_vec();
    sorted.sort_unstable();
    let mut ending: Vec<u128> = Vec::with_capacity(sorted.len());
    for (i, x) in sorted.iter().enumerate() {
        let below: u128 = (0..i).filter(|&j| sorted[j].is_proper_subset(*x)).map(|j| ending[j]).sum();
        ending.push(1 + below);
    }
    ending.iter().sum()
}

fn join_witness(down: &[PointSet], up: &[PointSet], link: Option<&OrderComplex>) -> JoinWitness {
    let down_chains = chain_count(down);
    let up_chains = chain_count(up);
    let mut all = down.to_vec();
    all.extend_from_slice(up);
    let link_chains = chain_count(&all);
    let separated = down.iter().all(|a| up.iter().all(|b| a.is_proper_subset(*b)));
    let explicit_split = link.map(|oc| {
        let down_oc = order_complex(down);
        let up_oc = order_complex(up);
        oc.complex.simplices().iter().all(|simplex| {
            let chain = oc.chain_labels(simplex);
            let (lo, hi): (Vec<PointSet>, Vec<PointSet>) = chain.iter().partition(|s| down.binary_search(s).is_ok());
            let in_part = |part: &[PointSet], sub: &OrderComplex| {
                part.is_empty() || {
                    let verts: Option<Vec<u32>> = part.iter().map(|s| sub.vertex_of(*s)).collect();
                    verts.is_some_and(|mut v| {
                        v.sort_unstable();
                        sub.complex.contains(&v)
                    })
                }
            };
            in_part(&lo, &down_oc) && in_part(&hi, &up_oc)
        })
    });
    let counts_match = (down_chains + 1) * (up_chains + 1) - 1 == link_chains;
    JoinWitness {
        down_chains,
        up_chains,
        link_chains,
        separated,
        explicit_split,
        holds: separated && counts_match && explicit_split.unwrap_or(true),
    }
}

/// Down and up posets of `s` inside an uncapped ambient poset.
pub fn descending_parts(
    space: &FiniteMetricSpace,
    s: PointSet,
    ambient: &RipsPoset,
) -> Result<DescendingData, MorseError> {
    descending_parts_with_budget(space, s, ambient, DEFAULT_COMPLEX_BUDGET)
}

pub fn descending_parts_with_budget(
    space: &FiniteMetricSpace,
    s: PointSet,
    ambient: &RipsPoset,
    budget: usize,
) -> Result<DescendingData, MorseError> {
    ambient.require_uncapped()?;
    let center = ambient.index_of(s).map(|i| ambient.vertices[i]).ok_or(MorseError::NotInAmbient(s))?;
    let down = down_poset(space, s)?;
    let up = up_poset(space, s)?;
    let mut all = down.clone();
    all.extend_from_slice(&up);
    let link = order_complex_bounded(&all, budget);
    let join = join_witness(&down, &up, link.as_ref());
    Ok(DescendingData { center, down, up, link, join })
}

/// Evidence ladder for one descending link, with a ζ certificate when the
/// link condition holds.
pub fn link_evidence(
    space: &FiniteMetricSpace,
    action: Option<&GroupAction>,
    data: &DescendingData,
    max_dim: usize,
) -> ContractibilityEvidence {
    let poset = data.poset();
    let cert = zeta_map(space, data.center.set).ok().and_then(|z| {
        check_link_conditions(space, &z, space.all_points()).holds.then(|| link_certificate(&z, poset.clone(), action))
    });
    poset_evidence(&poset, cert.as_ref(), max_dim, DEFAULT_COMPLEX_BUDGET)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelFiltration {
    pub levels: Vec<MorseValue>,
    /// Canonically ordered vertices of each level.
    pub groups: Vec<Vec<PointSet>>,
}

impl LevelFiltration {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Vertices with value at most `v`.
    pub fn sublevel(&self, v: MorseValue) -> Vec<PointSet> {
        let mut out: Vec<PointSet> = self
            .levels
            .iter()
            .zip(&self.groups)
            .filter(|(l, _)| **l <= v)
            .flat_map(|(_, g)| g.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }

    /// Vertices with value in `(from, to]`.
    pub fn window(&self, from: MorseValue, to: MorseValue) -> Vec<PointSet> {
        self.levels
            .iter()
            .zip(&self.groups)
            .filter(|(l, _)| from < **l && **l <= to)
            .flat_map(|(_, g)| g.iter().copied())
            .collect()
    }
}

pub fn morse_levels(vertices: &[SubsetVertex]) -> LevelFiltration {
    let mut by_level: BTreeMap<MorseValue, Vec<PointSet>> = BTreeMap::new();
    for v in vertices {
        by_level.entry(v.morse_value()).or_default().push(v.set);
    }
    let (levels, mut groups): (Vec<_>, Vec<_>) = by_level.into_iter().unzip();
    for g in &mut groups {
        g.sort_unstable();
    }
    LevelFiltration { levels, groups }
}

/// Where to cut the sublevel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SublevelBound {
    Value(MorseValue),
    Diameter(Scale),
}

impl SublevelBound {
    fn as_value(&self, space: &FiniteMetricSpace) -> Option<MorseValue> {
        match self {
            SublevelBound::Value(v) => Some(*v),
            SublevelBound::Diameter(t) => match t.numerator_bound(space.denom()) {
                None => Some(MorseValue::ceiling_of_diam(i64::MAX)),
                Some(b) if b < 0 => None,
                Some(b) => Some(MorseValue::ceiling_of_diam(b)),
            },
        }
    }
}

/// Vertices of the ambient poset in the sublevel.
pub fn sublevel_vertices(space: &FiniteMetricSpace, ambient: &RipsPoset, bound: &SublevelBound) -> Vec<PointSet> {
    match bound.as_value(space) {
        None => Vec::new(),
        Some(v) => ambient.vertices.iter().filter(|x| x.morse_value() <= v).map(|x| x.set).collect(),
    }
}

pub fn sublevel_complex(space: &FiniteMetricSpace, ambient: &RipsPoset, bound: &SublevelBound) -> OrderComplex {
    order_complex(&sublevel_vertices(space, ambient, bound))
}

/// Betti numbers of a poset's order complex, built under the default budget.
pub fn poset_betti(poset: &[PointSet], field: Field, max_dim: usize) -> Result<BettiVector, MorseError> {
    let oc = order_complex_bounded(poset, DEFAULT_COMPLEX_BUDGET)
        .ok_or(MorseError::ComplexTooLarge(DEFAULT_COMPLEX_BUDGET))?;
    Ok(betti_numbers(&oc.complex, field, max_dim)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BettiComparison {
    pub from: BettiVector,
    pub to: BettiVector,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FixedComparison {
    pub subgroup: usize,
    pub order: usize,
    pub class_id: usize,
    pub from: BettiVector,
    pub to: BettiVector,
    pub equal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinkRecord {
    pub set: PointSet,
    pub value: String,
    pub tier: &'static str,
    pub equivariant: bool,
    pub join_holds: bool,
    /// Betti numbers of the link; filled in for uncertified links.
    pub link_betti: Option<BettiVector>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DescentVerdict {
    /// Every link certified and every asserted Betti equality held.
    Verified,
    /// Every link certified but some Betti equality failed.
    AssertionFailed,
    /// Some link lacks a certificate, so nothing was asserted.
    NoAssertion,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DescentReport {
    pub from: String,
    pub to: String,
    pub window_vertices: usize,
    pub certified: usize,
    pub equivariant_certified: usize,
    pub join_failures: Vec<PointSet>,
    /// Uncertified links with their Betti numbers.
    pub failing: Vec<LinkRecord>,
    /// Endpoint Betti numbers; always reported, asserted only under certification.
    pub plain: BettiComparison,
    pub fixed: Vec<FixedComparison>,
    /// Why the fixed-point assertion was skipped, if it was.
    pub fixed_skipped: Option<String>,
    pub verdict: DescentVerdict,
}

impl DescentReport {
    pub fn passed(&self) -> bool {
        self.verdict != DescentVerdict::AssertionFailed && self.join_failures.is_empty()
    }
}

struct VertexOutcome {
    set: PointSet,
    value: MorseValue,
    evidence: ContractibilityEvidence,
    join_holds: bool,
    link_betti: Option<BettiVector>,
}

fn examine(
    space: &FiniteMetricSpace,
    action: Option<&GroupAction>,
    ambient: &RipsPoset,
    s: PointSet,
    max_dim: usize,
    field: Field,
) -> Result<VertexOutcome, MorseError> {
    let data = descending_parts(space, s, ambient)?;
    let evidence = link_evidence(space, action, &data, max_dim);
    let link_betti = if evidence.is_certificate() {
        None
    } else {
        match &data.link {
            Some(oc) => Some(betti_numbers(&oc.complex, field, max_dim)?),
            None => None,
        }
    };
    Ok(VertexOutcome { set: s, value: data.center.morse_value(), evidence, join_holds: data.join.holds, link_betti })
}

/// Subgroups used for fixed-point checks: every subgroup of the acting group.
fn all_subgroups(action: &GroupAction) -> Result<Vec<SubgroupRecord>, MorseError> {
    Ok(subgroup_lattice(action.group(), DEFAULT_LATTICE_CAP)?.subgroups)
}

/// Betti numbers of sublevels and their fixed subposets, computed once per level.
struct SublevelCache<'a> {
    levels: &'a LevelFiltration,
    field: Field,
    max_dim: usize,
    plain: HashMap<MorseValue, BettiVector>,
    fixed: HashMap<(usize, MorseValue), BettiVector>,
}

impl SublevelCache<'_> {
    fn plain(&mut self, v: MorseValue) -> Result<BettiVector, MorseError> {
        if let Some(b) = self.plain.get(&v) {
            return Ok(b.clone());
        }
        let b = poset_betti(&self.levels.sublevel(v), self.field, self.max_dim)?;
        self.plain.insert(v, b.clone());
        Ok(b)
    }

    fn fixed(&mut self, action: &GroupAction, h: &SubgroupRecord, v: MorseValue) -> Result<BettiVector, MorseError> {
        let key = (h.id.unwrap_or(usize::MAX), v);
        if let Some(b) = self.fixed.get(&key) {
            return Ok(b.clone());
        }
        let poset = fixed_subposet(&self.levels.sublevel(v), action, &h.elements);
        let b = poset_betti(&poset, self.field, self.max_dim)?;
        self.fixed.insert(key, b.clone());
        Ok(b)
    }
}

fn assemble(
    space: &FiniteMetricSpace,
    action: Option<&GroupAction>,
    outcomes: &[&VertexOutcome],
    subgroups: &[SubgroupRecord],
    cache: &mut SublevelCache<'_>,
    from: MorseValue,
    to: MorseValue,
) -> Result<DescentReport, MorseError> {
    let certified = outcomes.iter().filter(|o| o.evidence.is_certificate()).count();
    let equivariant_certified =
        outcomes.iter().filter(|o| o.evidence.is_certificate() && o.evidence.equivariant).count();
    let all_certified = certified == outcomes.len();
    let failing = outcomes
        .iter()
        .filter(|o| !o.evidence.is_certificate())
        .map(|o| LinkRecord {
            set: o.set,
            value: o.value.label(space),
            tier: o.evidence.tier_name(),
            equivariant: o.evidence.equivariant,
            join_holds: o.join_holds,
            link_betti: o.link_betti.clone(),
        })
        .collect();
    let (bf, bt) = (cache.plain(from)?, cache.plain(to)?);
    let plain = BettiComparison { equal: bf.same_numbers(&bt), from: bf, to: bt };
    let mut fixed = Vec::new();
    let fixed_skipped = match action {
        None => Some("no group action".to_string()),
        Some(_) if !all_certified => Some("some descending link lacks a certificate".to_string()),
        Some(_) if equivariant_certified < outcomes.len() => {
            Some("some certificate is not stabilizer-equivariant".to_string())
        }
        Some(a) => {
            for h in subgroups {
                let (f, t) = (cache.fixed(a, h, from)?, cache.fixed(a, h, to)?);
                fixed.push(FixedComparison {
                    subgroup: h.id.unwrap_or(0),
                    order: h.order,
                    class_id: h.class_id.unwrap_or(0),
                    equal: f.same_numbers(&t),
                    from: f,
                    to: t,
                });
            }
            None
        }
    };
    let verdict = if !all_certified {
        DescentVerdict::NoAssertion
    } else if plain.equal && fixed.iter().all(|f| f.equal) {
        DescentVerdict::Verified
    } else {
        DescentVerdict::AssertionFailed
    };
    Ok(DescentReport {
        from: from.label(space),
        to: to.label(space),
        window_vertices: outcomes.len(),
        certified,
        equivariant_certified,
        join_failures: outcomes.iter().filter(|o| !o.join_holds).map(|o| o.set).collect(),
        failing,
        plain,
        fixed,
        fixed_skipped,
        verdict,
    })
}

/// Verifies homological descent across the window `(from, to]`.
pub fn verify_descent(
    space: &FiniteMetricSpace,
    action: Option<&GroupAction>,
    ambient: &RipsPoset,
    from: MorseValue,
    to: MorseValue,
    max_dim: usize,
    field: Field,
) -> Result<DescentReport, MorseError> {
    ambient.require_uncapped()?;
    if from >= to {
        return Err(MorseError::EmptyWindowOrder { from, to });
    }
    let levels = morse_levels(&ambient.vertices);
    let window = levels.window(from, to);
    let outcomes: Vec<VertexOutcome> =
        window.par_iter().map(|&s| examine(space, action, ambient, s, max_dim, field)).collect::<Result<_, _>>()?;
    let subgroups = match action {
        Some(a) => all_subgroups(a)?,
        None => Vec::new(),
    };
    let mut cache = SublevelCache { levels: &levels, field, max_dim, plain: HashMap::new(), fixed: HashMap::new() };
    let refs: Vec<&VertexOutcome> = outcomes.iter().collect();
    assemble(space, action, &refs, &subgroups, &mut cache, from, to)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LevelSweepReport {
    pub levels: usize,
    pub windows: Vec<DescentReport>,
    pub verified: usize,
    pub no_assertion: usize,
    pub assertion_failures: usize,
    pub join_failures: usize,
}

impl LevelSweepReport {
    pub fn passed(&self) -> bool {
        self.assertion_failures == 0 && self.join_failures == 0
    }
}

/// Runs [`verify_descent`] on every pair of consecutive levels, sharing
/// per-vertex evidence and per-level Betti numbers.
pub fn descent_sweep(
    space: &FiniteMetricSpace,
    action: Option<&GroupAction>,
    ambient: &RipsPoset,
    max_dim: usize,
    field: Field,
) -> Result<LevelSweepReport, MorseError> {
    ambient.require_uncapped()?;
    let levels = morse_levels(&ambient.vertices);
    let outcomes: Vec<VertexOutcome> = ambient
        .vertices
        .par_iter()
        .map(|v| examine(space, action, ambient, v.set, max_dim, field))
        .collect::<Result<_, _>>()?;
    let by_set: HashMap<PointSet, &VertexOutcome> = outcomes.iter().map(|o| (o.set, o)).collect();
    let subgroups = match action {
        Some(a) => all_subgroups(a)?,
        None => Vec::new(),
    };
    let mut cache = SublevelCache { levels: &levels, field, max_dim, plain: HashMap::new(), fixed: HashMap::new() };
    let mut windows = Vec::new();
    for i in 1..levels.len() {
        let refs: Vec<&VertexOutcome> = levels.groups[i].iter().map(|s| by_set[s]).collect();
        windows.push(assemble(space, action, &refs, &subgroups, &mut cache, levels.levels[i - 1], levels.levels[i])?);
    }
    let count = |v: DescentVerdict| windows.iter().filter(|w| w.verdict == v).count();
    Ok(LevelSweepReport {
        levels: levels.len(),
        verified: count(DescentVerdict::Verified),
        no_assertion: count(DescentVerdict::NoAssertion),
        assertion_failures: count(DescentVerdict::AssertionFailed),
        join_failures: windows.iter().map(|w| w.join_failures.len()).sum(),
        windows,
    })
}

/// Checks that every chain of the sublevel complex has a unique vertex of
/// maximal Morse value.
pub fn unique_top_vertices(space: &FiniteMetricSpace, oc: &OrderComplex) -> bool {
    oc.complex.simplices().iter().all(|simplex| {
        let values: Vec<MorseValue> =
            oc.chain_labels(simplex).iter().map(|s| crate::rips::morse_value(space, *s)).collect();
        let top = values.iter().max().unwrap();
        values.iter().filter(|v| *v == top).count() == 1
    })
}

/// Checks `sublevel(to) = sublevel(from) ∪ ⋃ (S * dlk S)` over window
/// vertices `S`, as a set identity on chains.
///
/// Every chain of the larger sublevel must either lie in the smaller one or
/// have a window vertex on top with the rest inside that vertex's descending
/// link; chain counts then rule out anything missing.
pub fn star_decomposition_holds(
    space: &FiniteMetricSpace,
    ambient: &RipsPoset,
    from: MorseValue,
    to: MorseValue,
) -> Result<bool, MorseError> {
    let levels = morse_levels(&ambient.vertices);
    let big = order_complex_bounded(&levels.sublevel(to), DEFAULT_COMPLEX_BUDGET)
        .ok_or(MorseError::ComplexTooLarge(DEFAULT_COMPLEX_BUDGET))?;
    let small_count = chain_count(&levels.sublevel(from));
    let window = levels.window(from, to);
    let mut links: HashMap<PointSet, Vec<PointSet>> = HashMap::new();
    let mut expected = small_count;
    for &s in &window {
        let data = descending_parts_with_budget(space, s, ambient, 0)?;
        let poset = data.poset();
        expected += 1 + chain_count(&poset);
        links.insert(s, poset);
    }
    let classified = big.complex.simplices().iter().all(|simplex| {
        let chain = big.chain_labels(simplex);
        let top = *chain.iter().max_by_key(|s| crate::rips::morse_value(space, **s)).unwrap();
        if crate::rips::morse_value(space, top) <= from {
            return true;
        }
        match links.get(&top) {
            Some(link) => chain.iter().filter(|s| **s != top).all(|s| link.binary_search(s).is_ok()),
            None => false,
        }
    });
    Ok(classified && big.complex.len() as u128 == expected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rips::enumerate_rips_vertices;
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

    fn full(space: &FiniteMetricSpace) -> RipsPoset {
        enumerate_rips_vertices(space, Scale::Infinite, None).unwrap()
    }

    #[test]
    fn descending_examples() {
        let p = path(3);
        let amb = full(&p);
        let d = descending_parts(&p, ps(&[0, 2]), &amb).unwrap();
        assert_eq!(d.down, vec![ps(&[0]), ps(&[2])]);
        assert_eq!(d.up, vec![ps(&[0, 1, 2])]);
        assert!(d.join.holds);
        let b = betti_numbers(&d.link.unwrap().complex, Field::Gf2, 2).unwrap();
        assert!(b.reduced_trivial());
        let single = descending_parts(&p, ps(&[1]), &amb).unwrap();
        assert!(single.down.is_empty() && single.up.is_empty());
        assert!(single.link.unwrap().complex.is_empty());

        let c = cycle(6);
        let d = descending_parts(&c, c.all_points(), &full(&c)).unwrap();
        assert!(d.up.is_empty());
        assert!(d.join.holds);
        let b = betti_numbers(&d.link.unwrap().complex, Field::Gf2, 3).unwrap();
        assert!(b.matches(&[1, 0, 1]));
    }

    #[test]
    fn capped_ambient_is_rejected() {
        let p = path(4);
        let capped = enumerate_rips_vertices(&p, Scale::Infinite, Some(2)).unwrap();
        assert!(matches!(
            descending_parts(&p, ps(&[0, 1]), &capped),
            Err(MorseError::Rips(RipsError::CapViolation { cap: 2 }))
        ));
    }

    #[test]
    fn level_examples() {
        let p = path(3);
        let levels = morse_levels(&full(&p).vertices);
        assert_eq!(
            levels.levels,
            vec![MorseValue::new(0, 1), MorseValue::new(1, 2), MorseValue::new(2, 3), MorseValue::new(2, 2)]
        );
        let one = FiniteMetricSpace::from_integer_matrix(&[vec![0]]).unwrap();
        assert_eq!(morse_levels(&full(&one).vertices).levels, vec![MorseValue::new(0, 1)]);
    }

    #[test]
    fn sublevel_examples() {
        let p = path(3);
        let amb = full(&p);
        let sub = sublevel_complex(&p, &amb, &SublevelBound::Diameter(Scale::finite(1)));
        assert!(betti_numbers(&sub.complex, Field::Gf2, 2).unwrap().matches(&[1, 0]));
        let top = sublevel_complex(&p, &amb, &SublevelBound::Value(MorseValue::ceiling_of_diam(10)));
        assert_eq!(top.labels.len(), 7);
        assert!(crate::homology::greedy_collapse(&top.complex).is_point());
        let below = sublevel_complex(&p, &amb, &SublevelBound::Diameter(Scale::Finite(crate::Rat::new(-1, 1))));
        assert!(below.complex.is_empty());
        assert!(unique_top_vertices(&p, &top));
    }

    #[test]
    fn descent_on_path() {
        let p = path(5);
        let amb = full(&p);
        let r = verify_descent(&p, None, &amb, MorseValue::new(2, 2), MorseValue::new(4, 2), 3, Field::Gf2).unwrap();
        assert_eq!(r.verdict, DescentVerdict::Verified);
        assert!(r.failing.is_empty());
        assert!(r.plain.from.matches(&[1, 0]) && r.plain.to.matches(&[1, 0]));
    }

    #[test]
    fn descent_on_hexagon() {
        let c = cycle(6);
        let amb = full(&c);
        let r = verify_descent(&c, None, &amb, MorseValue::new(2, 2), MorseValue::new(3, 2), 3, Field::Gf2).unwrap();
        assert_eq!(r.verdict, DescentVerdict::NoAssertion);
        let x = r.failing.iter().find(|f| f.set == c.all_points()).unwrap();
        assert!(x.link_betti.as_ref().unwrap().matches(&[1, 0, 1]));
        assert!(r.plain.from.matches(&[1, 0, 1]));
        assert!(r.plain.to.matches(&[1, 0, 0]));
    }

    #[test]
    fn empty_window() {
        let p = path(3);
        let amb = full(&p);
        let r = verify_descent(&p, None, &amb, MorseValue::new(1, 2), MorseValue::new(1, 1), 3, Field::Gf2).unwrap();
        assert_eq!(r.window_vertices, 0);
        assert_eq!(r.verdict, DescentVerdict::Verified);
        assert_eq!(r.plain.from, r.plain.to);
    }

    #[test]
    fn sweep_with_action() {
        let c = cycle(6);
        let action = GroupAction::new(PermutationGroup::close(6, &[rotation(6)], 100).unwrap(), &c).unwrap();
        let amb = full(&c);
        let r = descent_sweep(&c, Some(&action), &amb, 3, Field::Gf2).unwrap();
        assert!(r.passed());
        assert_eq!(r.windows.len(), r.levels - 1);
        assert!(r.no_assertion >= 1);
    }

    #[test]
    fn star_decomposition() {
        for space in [path(4), cycle(5)] {
            let amb = full(&space);
            let levels = morse_levels(&amb.vertices);
            for w in levels.levels.windows(2) {
                assert!(star_decomposition_holds(&space, &amb, w[0], w[1]).unwrap());
            }
            let first = levels.levels[0];
            let last = *levels.levels.last().unwrap();
            assert!(star_decomposition_holds(&space, &amb, first, last).unwrap());
        }
    }

    #[test]
    fn chain_counts() {
        assert_eq!(chain_count(&[ps(&[0]), ps(&[0, 1]), ps(&[0, 1, 2])]), 7);
        assert_eq!(chain_count(&[ps(&[0]), ps(&[1])]), 2);
        assert_eq!(chain_count(&[]), 0);
    }
}
