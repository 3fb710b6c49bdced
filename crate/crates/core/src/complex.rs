//! Explicit finite simplicial complexes.

use std::collections::{BTreeSet, HashSet};

use serde::Serialize;

/// A simplex as its sorted vertex list.
pub type Simplex = Vec<u32>;

/// Finite simplicial complex on vertices `0..n_vertices`.
///
/// Simplices are kept sorted by dimension and then lexicographically, without
/// duplicates. Constructors taking facets close under faces; the raw
/// constructor trusts the caller and [`SimplicialComplex::is_face_closed`]
/// checks it.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct SimplicialComplex {
    n_vertices: usize,
    simplices: Vec<Simplex>,
}

fn canonical_cmp(a: &Simplex, b: &Simplex) -> std::cmp::Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl SimplicialComplex {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_simplices<I: IntoIterator<Item = Simplex>>(n_vertices: usize, simplices: I) -> Self {
        let mut s: Vec<Simplex> = simplices
            .into_iter()
            .map(|mut x| {
                x.sort_unstable();
                x.dedup();
                x
            })
            .filter(|x| !x.is_empty())
            .collect();
        s.sort_by(canonical_cmp);
        s.dedup();
        SimplicialComplex { n_vertices, simplices: s }
    }

    /// Closes the given simplices under taking nonempty faces.
    pub fn from_facets<I: IntoIterator<Item = Simplex>>(n_vertices: usize, facets: I) -> Self {
        let mut all: HashSet<Simplex> = HashSet::new();
        for mut f in facets {
            f.sort_unstable();
            f.dedup();
            if f.is_empty() || all.contains(&f) {
                continue;
            }
            let k = f.len();
            assert!(k <= 30, "facet too large to close");
            for mask in 1u32..(1 << k) {
                let face: Simplex = (0..k).filter(|&i| mask >> i & 1 == 1).map(|i| f[i]).collect();
                all.insert(face);
            }
        }
        Self::from_simplices(n_vertices, all)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    /// `None` for the empty complex.
    pub fn dimension(&self) -> Option<usize> {
        self.simplices.last().map(|s| s.len() - 1)
    }

    /// Number of simplices per dimension.
    pub fn f_vector(&self) -> Vec<usize> {
        let mut f = vec![0; self.dimension().map_or(0, |d| d + 1)];
        for s in &self.simplices {
            f[s.len() - 1] += 1;
        }
        f
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.f_vector().iter().enumerate().map(|(k, &c)| if k % 2 == 0 { c as i64 } else { -(c as i64) }).sum()
    }

    pub fn simplices_of_dim(&self, k: usize) -> impl Iterator<Item = &Simplex> {
        self.simplices.iter().filter(move |s| s.len() == k + 1)
    }

    pub fn vertices(&self) -> Vec<u32> {
        self.simplices_of_dim(0).map(|s| s[0]).collect()
    }

    pub fn contains(&self, s: &[u32]) -> bool {
        self.simplices.binary_search_by(|x| x.len().cmp(&s.len()).then_with(|| x.as_slice().cmp(s))).is_ok()
    }

    pub fn is_face_closed(&self) -> bool {
        let set: HashSet<&[u32]> = self.simplices.iter().map(|s| s.as_slice()).collect();
        self.simplices.iter().all(|s| {
            s.len() == 1
                || (0..s.len()).all(|i| {
                    let face: Simplex = s.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &v)| v).collect();
                    set.contains(face.as_slice())
                })
        })
    }

    /// Maximal simplices.
    pub fn facets(&self) -> Vec<&Simplex> {
        let mut covered: HashSet<Simplex> = HashSet::new();
        for s in &self.simplices {
            if s.len() > 1 {
                for i in 0..s.len() {
                    let mut f = s.clone();
                    f.remove(i);
                    covered.insert(f);
                }
            }
        }
        self.simplices.iter().filter(|s| !covered.contains(*s)).collect()
    }

    /// Cone with a new apex vertex `n_vertices`.
    pub fn cone(&self) -> Self {
        let apex = self.n_vertices as u32;
        let mut all = self.simplices.clone();
        all.push(vec![apex]);
        for s in &self.simplices {
            let mut c = s.clone();
            c.push(apex);
            all.push(c);
        }
        Self::from_simplices(self.n_vertices + 1, all)
    }

    /// Full subcomplex on the vertices satisfying `keep`.
    pub fn induced(&self, keep: impl Fn(u32) -> bool) -> Self {
        SimplicialComplex {
            n_vertices: self.n_vertices,
            simplices: self.simplices.iter().filter(|s| s.iter().all(|&v| keep(v))).cloned().collect(),
        }
    }

    /// Subcomplex of the simplices satisfying `keep`; the caller ensures face closure.
    pub fn filter(&self, keep: impl Fn(&Simplex) -> bool) -> Self {
        SimplicialComplex {
            n_vertices: self.n_vertices,
            simplices: self.simplices.iter().filter(|s| keep(s)).cloned().collect(),
        }
    }

    pub fn simplex_set(&self) -> BTreeSet<Simplex> {
        self.simplices.iter().cloned().collect()
    }
}
