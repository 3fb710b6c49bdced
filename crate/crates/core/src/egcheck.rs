//! Audit of the fixed-point conditions for a universal space for proper
//! actions, run on the Rips poset at one scale.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exact::{format_rat, Scale};
use crate::geometry::FiniteMetricSpace;
use crate::homology::{betti_numbers, poset_evidence, BettiVector, ContractibilityEvidence, Field, HomologyError};
use crate::morse::{poset_betti, MorseError, DEFAULT_COMPLEX_BUDGET};
use crate::pointset::PointSet;
use crate::rips::{enumerate_rips_vertices, fixed_subposet, OrderComplex, RipsError, RipsPoset};
use crate::symmetry::{subgroup_lattice, GroupAction, SubgroupRecord, SymmetryError, DEFAULT_LATTICE_CAP};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EgError {
    #[error(transparent)]
    Rips(#[from] RipsError),
    #[error(transparent)]
    Symmetry(#[from] SymmetryError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
    #[error(transparent)]
    Morse(#[from] MorseError),
}

/// Result of checking whether a finite poset of subsets is directed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Directedness {
    pub directed: bool,
    pub empty: bool,
    /// The maximum element when the poset is directed.
    pub maximum: Option<PointSet>,
    /// Two maximal elements without a common upper bound.
    pub witness: Option<(PointSet, PointSet)>,
}

/// A finite poset is directed exactly when it has a unique maximal element.
pub fn directedness_check(poset: &[PointSet]) -> Directedness {
    if poset.is_empty() {
        return Directedness { directed: false, empty: true, maximum: None, witness: None };
    }
    let mut sorted = poset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let maximal: Vec<PointSet> =
        sorted.iter().copied().filter(|&x| !sorted.iter().any(|&y| x.is_proper_subset(y))).collect();
    match maximal.as_slice() {
        [top] => Directedness { directed: true, empty: false, maximum: Some(*top), witness: None },
        [a, b, ..] => Directedness { directed: false, empty: false, maximum: None, witness: Some((*a, *b)) },
        [] => unreachable!("a finite nonempty poset has a maximal element"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Backed by a certificate-tier contractibility proof.
    Certified,
    /// Homology is trivial but no certificate was found.
    Consistent,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassFailure {
    /// No `H`-invariant subset has diameter at most `t`.
    EmptyFixedSet {
        suggested_scale: String,
    },
    NotContractible,
    /// Conjugate subgroups produced different Betti numbers.
    ConjugatesDisagree {
        subgroup: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassRecord {
    pub class_id: usize,
    pub representative: usize,
    pub order: usize,
    pub members: usize,
    pub fixed_vertices: usize,
    pub betti: Option<BettiVector>,
    pub conjugates_agree: bool,
    pub evidence: ContractibilityEvidence,
    pub directedness: Directedness,
    pub verdict: Verdict,
    pub failure: Option<ClassFailure>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Properness {
    pub max_stabilizer_order: usize,
    pub all_finite: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cocompactness {
    pub vertices: usize,
    pub vertex_orbits: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EgReport {
    pub t: Scale,
    pub group_order: usize,
    pub subgroups: usize,
    pub class_count: usize,
    pub classes: Vec<ClassRecord>,
    pub properness: Properness,
    pub cocompactness: Cocompactness,
    pub verdict: Verdict,
}

impl EgReport {
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

/// Smallest diameter of a nonempty `H`-invariant subset; each one contains an orbit `H·x`.
pub fn smallest_invariant_diameter(space: &FiniteMetricSpace, action: &GroupAction, h: &SubgroupRecord) -> i64 {
    (0..space.n())
        .map(|x| {
            let orbit =
                h.elements.iter().fold(PointSet::empty(), |acc, &g| acc.union(action.act(g, PointSet::singleton(x))));
            space.diam_of(orbit)
        })
        .min()
        .unwrap_or(0)
}

fn class_record(
    space: &FiniteMetricSpace,
    action: &GroupAction,
    sets: &[PointSet],
    members: &[&SubgroupRecord],
    max_dim: usize,
    field: Field,
) -> Result<ClassRecord, EgError> {
    let rep = members[0];
    let fixed = fixed_subposet(sets, action, &rep.elements);
    let evidence = poset_evidence(&fixed, None, max_dim, DEFAULT_COMPLEX_BUDGET);
    let betti = match poset_betti(&fixed, field, max_dim) {
        Ok(b) => Some(b),
        Err(MorseError::ComplexTooLarge(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let mut disagreeing = None;
    if let Some(b) = &betti {
        for h in &members[1..] {
            let other = poset_betti(&fixed_subposet(sets, action, &h.elements), field, max_dim)?;
            if !other.same_numbers(b) || other.empty != b.empty {
                disagreeing = h.id;
                break;
            }
        }
    }
    let (verdict, failure) = if fixed.is_empty() {
        let d = smallest_invariant_diameter(space, action, rep);
        (Verdict::Fail, Some(ClassFailure::EmptyFixedSet { suggested_scale: format_rat(&space.to_rat(d)) }))
    } else if let Some(id) = disagreeing {
        (Verdict::Fail, Some(ClassFailure::ConjugatesDisagree { subgroup: id }))
    } else if evidence.is_certificate() {
        (Verdict::Certified, None)
    } else if evidence.supports_contractible() {
        (Verdict::Consistent, None)
    } else {
        (Verdict::Fail, Some(ClassFailure::NotContractible))
    };
    Ok(ClassRecord {
        class_id: rep.class_id.unwrap_or(0),
        representative: rep.id.unwrap_or(0),
        order: rep.order,
        members: members.len(),
        fixed_vertices: fixed.len(),
        betti,
        conjugates_agree: disagreeing.is_none(),
        evidence,
        directedness: directedness_check(&fixed),
        verdict,
        failure,
    })
}

/// Fixed-point audit of the Rips poset at scale `t` for every conjugacy
/// class of subgroups.
pub fn eg_report(
    space: &FiniteMetricSpace,
    action: &GroupAction,
    t: &Scale,
    max_dim: usize,
    field: Field,
) -> Result<EgReport, EgError> {
    let poset = enumerate_rips_vertices(space, *t, None)?;
    eg_report_on(space, action, &poset, max_dim, field)
}

pub fn eg_report_on(
    space: &FiniteMetricSpace,
    action: &GroupAction,
    poset: &RipsPoset,
    max_dim: usize,
    field: Field,
) -> Result<EgReport, EgError> {
    poset.require_uncapped()?;
    let lattice = subgroup_lattice(action.group(), DEFAULT_LATTICE_CAP)?;
    let sets = poset.sets();
    let classes: Vec<ClassRecord> = (0..lattice.class_count)
        .into_par_iter()
        .map(|c| {
            let members: Vec<&SubgroupRecord> = lattice.class_members(c).collect();
            class_record(space, action, &sets, &members, max_dim, field)
        })
        .collect::<Result<_, _>>()?;
    let max_stabilizer_order =
        sets.par_iter().map(|&s| action.stabilizer_elements(s).len()).max().unwrap_or(action.group().order());
    let vertex_orbits = sets.par_iter().filter(|&&s| action.orbit(s)[0] == s).count();
    let verdict = classes.iter().map(|c| c.verdict).max().unwrap_or(Verdict::Certified);
    Ok(EgReport {
        t: poset.scale,
        group_order: lattice.group_order,
        subgroups: lattice.subgroups.len(),
        class_count: lattice.class_count,
        classes,
        properness: Properness { max_stabilizer_order, all_finite: true },
        cocompactness: Cocompactness { vertices: sets.len(), vertex_orbits },
        verdict,
    })
}

/// Subcomplex of chains whose members are all `H`-invariant.
pub fn fixed_chain_subcomplex(
    full: &OrderComplex,
    action: &GroupAction,
    h: &SubgroupRecord,
) -> crate::complex::SimplicialComplex {
    let invariant: Vec<bool> = full.labels.iter().map(|&s| action.is_invariant(&h.elements, s)).collect();
    full.complex.filter(|simplex| simplex.iter().all(|&v| invariant[v as usize]))
}

/// Betti numbers of the fixed subposet's order complex and of the fixed
/// chain subcomplex of the full order complex.
pub fn fixed_functor_pair(
    full: &OrderComplex,
    action: &GroupAction,
    h: &SubgroupRecord,
    max_dim: usize,
    field: Field,
) -> Result<(BettiVector, BettiVector), EgError> {
    let via_poset = poset_betti(&fixed_subposet(&full.labels, action, &h.elements), field, max_dim)?;
    let via_chains = betti_numbers(&fixed_chain_subcomplex(full, action, h), field, max_dim)?;
    Ok((via_poset, via_chains))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homology::EvidenceTier;
    use crate::rips::order_complex;
    use crate::symmetry::{reflection, rotation, PermutationGroup};

    fn hexagon() -> FiniteMetricSpace {
        FiniteMetricSpace::from_unit_graph(6, &(0..6).map(|i| (i, (i + 1) % 6)).collect::<Vec<_>>()).unwrap()
    }

    fn c6(space: &FiniteMetricSpace) -> GroupAction {
        GroupAction::new(PermutationGroup::close(6, &[rotation(6)], 100).unwrap(), space).unwrap()
    }

    #[test]
    fn c6_at_full_scale() {
        let h = hexagon();
        let r = eg_report(&h, &c6(&h), &Scale::finite(3), 3, Field::Gf2).unwrap();
        assert_eq!(r.class_count, 4);
        assert_eq!(r.verdict, Verdict::Certified);
        assert!(r.classes.iter().all(|c| c.directedness.directed));
        assert_eq!(r.properness.max_stabilizer_order, 6);
    }

    #[test]
    fn c6_at_scale_two_fails_on_antipodal_subgroup() {
        let h = hexagon();
        let r = eg_report(&h, &c6(&h), &Scale::finite(2), 3, Field::Gf2).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        let bad = r.classes.iter().find(|c| c.order == 2).unwrap();
        assert_eq!(bad.fixed_vertices, 0);
        assert_eq!(bad.failure, Some(ClassFailure::EmptyFixedSet { suggested_scale: "3".into() }));
        assert!(bad.directedness.empty);
    }

    #[test]
    fn d12_certified() {
        let h = hexagon();
        let g = PermutationGroup::close(6, &[rotation(6), reflection(6)], 100).unwrap();
        let action = GroupAction::new(g, &h).unwrap();
        let r = eg_report(&h, &action, &Scale::finite(3), 3, Field::Gf2).unwrap();
        assert_eq!(r.subgroups, 16);
        assert_eq!(r.verdict, Verdict::Certified);
        assert!(r.classes.iter().all(|c| c.conjugates_agree && c.fixed_vertices > 0));
    }

    #[test]
    fn trivial_group_cone() {
        let h = hexagon();
        let r = eg_report(&h, &GroupAction::trivial(6), &Scale::finite(3), 3, Field::Gf2).unwrap();
        assert_eq!(r.classes.len(), 1);
        assert!(
            matches!(r.classes[0].evidence.tier, EvidenceTier::ConeVertex { label: Some(l), .. } if l == h.all_points())
        );
        assert_eq!(r.cocompactness.vertex_orbits, 63);
    }

    #[test]
    fn directedness_examples() {
        let h = hexagon();
        let action = c6(&h);
        let all: Vec<PointSet> = h.all_points().subsets().filter(|s| !s.is_empty()).collect();
        let r3 = action.group().index_of(&[3, 4, 5, 0, 1, 2]).unwrap();
        let d = directedness_check(&fixed_subposet(&all, &action, &[0, r3]));
        assert!(d.directed);
        assert_eq!(d.maximum, Some(h.all_points()));
        assert!(directedness_check(&[]).empty);
        let anti = directedness_check(&[PointSet::singleton(0), PointSet::singleton(1)]);
        assert!(!anti.directed && anti.witness.is_some());
    }

    #[test]
    fn fixed_functor_agrees() {
        let h = hexagon();
        let action = c6(&h);
        let lattice = subgroup_lattice(action.group(), 48).unwrap();
        for t in 1..=3 {
            let sets = enumerate_rips_vertices(&h, Scale::finite(t), None).unwrap().sets();
            let full = order_complex(&sets);
            for sg in &lattice.subgroups {
                let (a, b) = fixed_functor_pair(&full, &action, sg, 3, Field::Gf2).unwrap();
                assert!(a.same_numbers(&b), "t={t} H={:?}", sg.elements);
            }
        }
    }
}
