//! Finite permutation groups acting isometrically on point sets.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::exact::format_rat;
use crate::geometry::FiniteMetricSpace;
use crate::pointset::PointSet;

/// Image list of a permutation of `0..degree`.
pub type Perm = Vec<usize>;

/// Default bound on the order of a closed group.
pub const DEFAULT_GROUP_CAP: usize = 10080;
/// Default bound on the group order for exhaustive subgroup enumeration.
pub const DEFAULT_LATTICE_CAP: usize = 48;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymmetryError {
    #[error("generator {index} is not a permutation of 0..{degree}")]
    NotAPermutation { index: usize, degree: usize },
    #[error("group order exceeds the cap of {cap}")]
    GroupTooLarge { cap: usize },
    #[error("group has degree {degree} but the space has {points} points")]
    DegreeMismatch { degree: usize, points: usize },
    #[error("action is not isometric: {0}")]
    NotIsometric(IsometryWitness),
}

fn is_perm(p: &[usize], degree: usize) -> bool {
    if p.len() != degree {
        return false;
    }
    let mut seen = vec![false; degree];
    for &x in p {
        if x >= degree || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

fn compose(a: &[usize], b: &[usize]) -> Perm {
    // (a ∘ b)(x) = a(b(x))
    b.iter().map(|&x| a[x]).collect()
}

fn invert(a: &[usize]) -> Perm {
    let mut inv = vec![0; a.len()];
    for (i, &x) in a.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

/// A finite group of permutations, stored as its full sorted element list.
///
/// Elements are sorted lexicographically, so the identity is always element 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationGroup {
    degree: usize,
    generators: Vec<Perm>,
    elements: Vec<Perm>,
    index: HashMap<Perm, usize>,
}

impl PermutationGroup {
    pub fn trivial(degree: usize) -> Self {
        Self::close(degree, &[], DEFAULT_GROUP_CAP).expect("trivial group always closes")
    }

    /// Closes a generating set under composition.
    pub fn close(degree: usize, generators: &[Perm], cap: usize) -> Result<Self, SymmetryError> {
        for (index, g) in generators.iter().enumerate() {
            if !is_perm(g, degree) {
                return Err(SymmetryError::NotAPermutation { index, degree });
            }
        }
        let identity: Perm = (0..degree).collect();
        let mut seen: HashSet<Perm> = HashSet::from([identity.clone()]);
        let mut queue = VecDeque::from([identity]);
        while let Some(h) = queue.pop_front() {
            for g in generators {
                let next = compose(&h, g);
                if seen.insert(next.clone()) {
                    if seen.len() > cap {
                        return Err(SymmetryError::GroupTooLarge { cap });
                    }
                    queue.push_back(next);
                }
            }
        }
        let mut elements: Vec<Perm> = seen.into_iter().collect();
        elements.sort();
        let index = elements.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
        Ok(PermutationGroup { degree, generators: generators.to_vec(), elements, index })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &[usize] {
        &self.elements[i]
    }

    pub fn index_of(&self, p: &[usize]) -> Option<usize> {
        self.index.get(p).copied()
    }

    /// Index of `g_i ∘ g_j`.
    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.index[&compose(&self.elements[i], &self.elements[j])]
    }

    pub fn inverse(&self, i: usize) -> usize {
        self.index[&invert(&self.elements[i])]
    }

    /// Setwise image `g_i · S`.
    pub fn act(&self, i: usize, s: PointSet) -> PointSet {
        s.permute(&self.elements[i])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsometryWitness {
    pub generator: usize,
    pub x: usize,
    pub y: usize,
    pub d_xy: String,
    pub d_gx_gy: String,
}

impl std::fmt::Display for IsometryWitness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "generator {} maps ({}, {}) at distance {} to a pair at distance {}",
            self.generator, self.x, self.y, self.d_xy, self.d_gx_gy
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsometryReport {
    pub passed: bool,
    pub witness: Option<IsometryWitness>,
}

/// Checks `d(g·x, g·y) = d(x, y)` for every generator; that suffices for the whole group.
pub fn verify_isometric(group: &PermutationGroup, space: &FiniteMetricSpace) -> Result<IsometryReport, SymmetryError> {
    if group.degree() != space.n() {
        return Err(SymmetryError::DegreeMismatch { degree: group.degree(), points: space.n() });
    }
    let gens: Vec<&Perm> = if group.generators().is_empty() {
        group.elements().iter().collect()
    } else {
        group.generators().iter().collect()
    };
    for (gi, g) in gens.iter().enumerate() {
        for x in 0..space.n() {
            for y in x + 1..space.n() {
                if space.dist(g[x], g[y]) != space.dist(x, y) {
                    return Ok(IsometryReport {
                        passed: false,
                        witness: Some(IsometryWitness {
                            generator: gi,
                            x,
                            y,
                            d_xy: format_rat(&space.dist_rat(x, y)),
                            d_gx_gy: format_rat(&space.dist_rat(g[x], g[y])),
                        }),
                    });
                }
            }
        }
    }
    Ok(IsometryReport { passed: true, witness: None })
}

/// A group together with a verified isometric action on a space.
#[derive(Debug, Clone)]
pub struct GroupAction {
    group: PermutationGroup,
}

impl GroupAction {
    pub fn new(group: PermutationGroup, space: &FiniteMetricSpace) -> Result<Self, SymmetryError> {
        let report = verify_isometric(&group, space)?;
        match report.witness {
            Some(w) => Err(SymmetryError::NotIsometric(w)),
            None => Ok(GroupAction { group }),
        }
    }

    pub fn trivial(n: usize) -> Self {
        GroupAction { group: PermutationGroup::trivial(n) }
    }

    pub fn group(&self) -> &PermutationGroup {
        &self.group
    }

    pub fn act(&self, g: usize, s: PointSet) -> PointSet {
        self.group.act(g, s)
    }

    /// Elements fixing `s` setwise.
    pub fn stabilizer_elements(&self, s: PointSet) -> Vec<usize> {
        (0..self.group.order()).filter(|&g| self.act(g, s) == s).collect()
    }

    pub fn is_invariant(&self, elements: &[usize], s: PointSet) -> bool {
        elements.iter().all(|&g| self.act(g, s) == s)
    }

    pub fn orbit(&self, s: PointSet) -> Vec<PointSet> {
        let mut orbit: Vec<PointSet> = (0..self.group.order()).map(|g| self.act(g, s)).collect();
        orbit.sort();
        orbit.dedup();
        orbit
    }
}

/// A subgroup given by element indices into its ambient [`PermutationGroup`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubgroupRecord {
    pub id: Option<usize>,
    pub elements: Vec<usize>,
    pub order: usize,
    pub index: usize,
    pub class_id: Option<usize>,
}

impl SubgroupRecord {
    fn new(group: &PermutationGroup, mut elements: Vec<usize>) -> Self {
        elements.sort_unstable();
        let order = elements.len();
        SubgroupRecord { id: None, elements, order, index: group.order() / order, class_id: None }
    }

    pub fn whole(group: &PermutationGroup) -> Self {
        Self::new(group, (0..group.order()).collect())
    }

    pub fn trivial() -> Self {
        SubgroupRecord { id: None, elements: vec![0], order: 1, index: 1, class_id: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrbitStabilizer {
    pub orbit: Vec<PointSet>,
    pub stabilizer: SubgroupRecord,
}

pub fn orbit_stabilizer(action: &GroupAction, s: PointSet) -> OrbitStabilizer {
    OrbitStabilizer {
        orbit: action.orbit(s),
        stabilizer: SubgroupRecord::new(action.group(), action.stabilizer_elements(s)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubgroupLattice {
    pub group_order: usize,
    pub subgroups: Vec<SubgroupRecord>,
    pub class_count: usize,
    /// Subgroup id of the first member of each conjugacy class.
    pub class_representatives: Vec<usize>,
}

impl SubgroupLattice {
    pub fn representatives(&self) -> impl Iterator<Item = &SubgroupRecord> {
        self.class_representatives.iter().map(|&i| &self.subgroups[i])
    }

    pub fn class_members(&self, class_id: usize) -> impl Iterator<Item = &SubgroupRecord> {
        self.subgroups.iter().filter(move |s| s.class_id == Some(class_id))
    }
}

/// Every subgroup, tagged with its conjugacy class.
///
/// Subgroups are found as iterated joins of cyclic subgroups. They are sorted
/// by order and then element list; class ids follow first appearance.
pub fn subgroup_lattice(group: &PermutationGroup, cap: usize) -> Result<SubgroupLattice, SymmetryError> {
    let m = group.order();
    if m > cap {
        return Err(SymmetryError::GroupTooLarge { cap });
    }
    let table: Vec<Vec<usize>> = (0..m).map(|i| (0..m).map(|j| group.mul(i, j)).collect()).collect();
    let closure = |gens: &[usize]| -> Vec<usize> {
        let mut inside = vec![false; m];
        inside[0] = true;
        let mut queue = VecDeque::from([0usize]);
        while let Some(h) = queue.pop_front() {
            for &g in gens {
                let next = table[h][g];
                if !inside[next] {
                    inside[next] = true;
                    queue.push_back(next);
                }
            }
        }
        (0..m).filter(|&i| inside[i]).collect()
    };

    let mut found: HashSet<Vec<usize>> = HashSet::new();
    let mut cyclic: Vec<Vec<usize>> = Vec::new();
    for g in 0..m {
        let c = closure(&[g]);
        if found.insert(c.clone()) {
            cyclic.push(c);
        }
    }
    let mut frontier = cyclic.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for a in &frontier {
            for c in &cyclic {
                if c.iter().all(|x| a.binary_search(x).is_ok()) {
                    continue;
                }
                let mut gens = a.clone();
                gens.extend_from_slice(c);
                let joined = closure(&gens);
                if found.insert(joined.clone()) {
                    next.push(joined);
                }
            }
        }
        frontier = next;
    }

    let mut subgroups: Vec<Vec<usize>> = found.into_iter().collect();
    subgroups.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));

    let inverses: Vec<usize> = (0..m).map(|g| group.inverse(g)).collect();
    let class_key = |h: &[usize]| -> Vec<usize> {
        (0..m)
            .map(|g| {
                let mut conj: Vec<usize> = h.iter().map(|&x| table[table[g][x]][inverses[g]]).collect();
                conj.sort_unstable();
                conj
            })
            .min()
            .unwrap()
    };
    let mut class_of_key: HashMap<Vec<usize>, usize> = HashMap::new();
    let mut class_representatives = Vec::new();
    let mut records = Vec::with_capacity(subgroups.len());
    for (id, elems) in subgroups.into_iter().enumerate() {
        let key = class_key(&elems);
        let next_id = class_of_key.len();
        let class_id = *class_of_key.entry(key).or_insert_with(|| {
            class_representatives.push(id);
            next_id
        });
        let mut rec = SubgroupRecord::new(group, elems);
        rec.id = Some(id);
        rec.class_id = Some(class_id);
        records.push(rec);
    }
    Ok(SubgroupLattice {
        group_order: m,
        class_count: class_representatives.len(),
        subgroups: records,
        class_representatives,
    })
}

/// Full isometry group of a small space, by backtracking over partial maps.
pub fn isometry_group(space: &FiniteMetricSpace, cap: usize) -> Result<PermutationGroup, SymmetryError> {
    let n = space.n();
    let mut found: Vec<Perm> = Vec::new();
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; n];
    fn extend(
        space: &FiniteMetricSpace,
        k: usize,
        image: &mut Vec<usize>,
        used: &mut Vec<bool>,
        found: &mut Vec<Perm>,
        cap: usize,
    ) -> Result<(), SymmetryError> {
        let n = space.n();
        if k == n {
            found.push(image.clone());
            if found.len() > cap {
                return Err(SymmetryError::GroupTooLarge { cap });
            }
            return Ok(());
        }
        for cand in 0..n {
            if used[cand] || (0..k).any(|j| space.dist(image[j], cand) != space.dist(j, k)) {
                continue;
            }
            image[k] = cand;
            used[cand] = true;
            extend(space, k + 1, image, used, found, cap)?;
            used[cand] = false;
        }
        Ok(())
    }
    extend(space, 0, &mut image, &mut used, &mut found, cap)?;
    PermutationGroup::close(n, &found, cap)
}

/// Rotation `i ↦ i + 1 (mod n)`.
pub fn rotation(n: usize) -> Perm {
    (0..n).map(|i| (i + 1) % n).collect()
}

/// Reflection `i ↦ -i (mod n)`, fixing 0.
pub fn reflection(n: usize) -> Perm {
    (0..n).map(|i| (n - i) % n).collect()
}
