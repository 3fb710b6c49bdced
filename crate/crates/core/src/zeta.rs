//! The witness map, set-valued midpoint selection, the link conditions,
//! conical certificates and the scale threshold.
//!
//! `ζ(S)` is the union, over all pairs realizing `diam(S)`, of every geodesic
//! vertex closest to the pair's midpoint. Taking the union instead of one
//! chosen point makes `ζ(g·S) = g·ζ(S)` hold for every isometry `g`.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exact::{format_rat, Rat, Scale};
use crate::geometry::{DefectProfile, FiniteMetricSpace};
use crate::pointset::PointSet;
use crate::rips::{down_poset, enumerate_rips_vertices, up_poset_within, RipsError};
use crate::symmetry::GroupAction;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ZetaError {
    #[error("subset must be nonempty")]
    EmptySet,
    #[error("no point lies strictly between {x} and {y}; best slack {slack}")]
    NoGeodesicVertex { x: usize, y: usize, slack: String },
    #[error("apex {apex} is not an element of the poset")]
    ApexMissing { apex: PointSet },
    #[error("map is not order preserving at {x}: {reason}")]
    MapNotOrderPreserving { x: PointSet, reason: String },
    #[error("self-map table has {got} entries for a poset of {expected}")]
    TableLength { expected: usize, got: usize },
    #[error("no finite threshold: the envelope violates the bound at the largest sampled scale {t}")]
    NoFiniteThreshold { t: f64 },
    #[error("invalid threshold input: {0}")]
    InvalidThresholdInput(String),
    #[error(transparent)]
    Rips(#[from] RipsError),
}

/// Near-midpoint candidates for one witness pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MidpointCandidates {
    pub x: usize,
    pub y: usize,
    pub candidates: PointSet,
    /// `|d(x,v) - d(x,y)/2|` for every candidate `v`.
    #[serde(with = "crate::exact::rat_string")]
    pub slack: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ZetaResult {
    pub center: PointSet,
    /// Ordered pairs realizing the diameter.
    pub witnesses: Vec<(usize, usize)>,
    /// One entry per unordered witness pair; the selection is symmetric.
    pub midpoints: Vec<MidpointCandidates>,
    pub zeta: PointSet,
    pub inside: bool,
    /// Largest slack over the witness pairs.
    #[serde(with = "crate::exact::rat_string")]
    pub slack: Rat,
}

/// Geodesic vertices between `x` and `y` closest to the midpoint.
pub fn midpoint_candidates(space: &FiniteMetricSpace, x: usize, y: usize) -> Result<MidpointCandidates, ZetaError> {
    let dxy = space.dist(x, y);
    let on_geodesic = (0..space.n()).filter(|&v| space.dist(x, v) + space.dist(v, y) == dxy);
    // Work in doubled units so the midpoint is an integer.
    let offset = |v: usize| (2 * space.dist(x, v) - dxy).abs();
    let best = on_geodesic.clone().map(offset).min().expect("x is on its own geodesic");
    let candidates = PointSet::from_points(on_geodesic.filter(|&v| offset(v) == best));
    let slack = space.to_rat(best) / Rat::from_integer(2);
    if dxy > 0 && !space.is_graph() && candidates.iter().all(|v| v == x || v == y) {
        return Err(ZetaError::NoGeodesicVertex { x, y, slack: format_rat(&slack) });
    }
    Ok(MidpointCandidates { x: x.min(y), y: x.max(y), candidates, slack })
}

pub fn zeta_map(space: &FiniteMetricSpace, s: PointSet) -> Result<ZetaResult, ZetaError> {
    if s.is_empty() {
        return Err(ZetaError::EmptySet);
    }
    let d = space.diam_of(s);
    let witnesses: Vec<(usize, usize)> =
        s.iter().flat_map(|x| s.iter().filter(move |&y| space.dist(x, y) == d).map(move |y| (x, y))).collect();
    let midpoints = witnesses
        .iter()
        .filter(|&&(x, y)| x <= y)
        .map(|&(x, y)| midpoint_candidates(space, x, y))
        .collect::<Result<Vec<_>, _>>()?;
    let zeta = midpoints.iter().fold(PointSet::empty(), |acc, m| acc.union(m.candidates));
    let slack = midpoints.iter().map(|m| m.slack).max().unwrap_or_default();
    Ok(ZetaResult { center: s, witnesses, midpoints, zeta, inside: zeta.is_subset(s), slack })
}

/// Checks `ζ(g·S) = g·ζ(S)` for every group element.
pub fn zeta_is_equivariant(space: &FiniteMetricSpace, action: &GroupAction, s: PointSet) -> Result<bool, ZetaError> {
    let z = zeta_map(space, s)?.zeta;
    for g in 0..action.group().order() {
        if zeta_map(space, action.act(g, s))?.zeta != action.act(g, z) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Which condition applies to `S`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkCase {
    /// `ζ(S) ⊆ S`: the down poset must be coned off by `ζ(S)`.
    Down,
    /// `ζ(S) ⊄ S`: the up poset must be coned off by `S ∪ ζ(S)`.
    Up,
}

/// A subset violating the applicable condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinkFailure {
    /// The offending `S∨` or `S∧`; `None` when `ζ(S)` itself is too wide.
    pub subset: Option<PointSet>,
    /// Diameter of the union with `ζ(S)`.
    pub union_diam: String,
    pub diam: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinkCheck {
    pub case: LinkCase,
    pub holds: bool,
    pub failure: Option<LinkFailure>,
}

/// Checks the down or up condition for `S` with points of supersets drawn from `region`.
///
/// Both conditions reduce to pairwise distances. In the down case, singletons
/// of `S` are down elements, so every pair in `S × ζ(S)` must be closer than
/// `diam(S)`. In the up case, `S ∪ {a}` is an up element for every admissible `a`.
pub fn check_link_conditions(space: &FiniteMetricSpace, z: &ZetaResult, region: PointSet) -> LinkCheck {
    let s = z.center;
    let d = space.diam_of(s);
    let fmt = |u: i64| format_rat(&space.to_rat(u));
    let zd = space.diam_of(z.zeta);
    if z.inside {
        let fail = |subset: Option<PointSet>, union: i64| LinkCheck {
            case: LinkCase::Down,
            holds: false,
            failure: Some(LinkFailure { subset, union_diam: fmt(union), diam: fmt(d) }),
        };
        if zd >= d {
            return fail(None, zd);
        }
        for a in s.iter() {
            let reach = space.max_dist_to(a, z.zeta);
            if reach >= d {
                return fail(Some(PointSet::singleton(a)), reach.max(zd));
            }
        }
        LinkCheck { case: LinkCase::Down, holds: true, failure: None }
    } else {
        let fail = |subset: Option<PointSet>, union: i64| LinkCheck {
            case: LinkCase::Up,
            holds: false,
            failure: Some(LinkFailure { subset, union_diam: fmt(union), diam: fmt(d) }),
        };
        let whole = space.diam_of(s.union(z.zeta));
        if whole > d {
            return fail(Some(s), whole);
        }
        let neighbors = region.difference(s).iter().filter(|&p| space.max_dist_to(p, s) <= d);
        for a in neighbors {
            let reach = space.max_dist_to(a, z.zeta);
            if reach > d {
                return fail(Some(s.with(a)), reach);
            }
        }
        LinkCheck { case: LinkCase::Up, holds: true, failure: None }
    }
}

/// Literal form of the conditions, quantifying over every `S∨` or `S∧`.
pub fn check_link_conditions_exhaustive(
    space: &FiniteMetricSpace,
    z: &ZetaResult,
    region: PointSet,
) -> Result<bool, ZetaError> {
    let s = z.center;
    let d = space.diam_of(s);
    if z.inside {
        if space.diam_of(z.zeta) >= d {
            return Ok(false);
        }
        Ok(down_poset(space, s)?.into_iter().all(|x| space.diam_of(x.union(z.zeta)) < d))
    } else {
        let ups = up_poset_within(space, s, region)?;
        Ok(std::iter::once(s).chain(ups).all(|x| space.diam_of(x.union(z.zeta)) == d))
    }
}

/// A self-map of a finite poset of subsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SelfMap {
    /// `x ↦ x ∪ A`.
    JoinWith(PointSet),
    /// `poset[i] ↦ table[i]`.
    Table(Vec<PointSet>),
}

/// Data for the contraction pattern `x ⊆ f(x) ⊇ c`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConicalCertificate {
    /// Canonically sorted poset elements.
    pub poset: Vec<PointSet>,
    pub map: SelfMap,
    pub apex: PointSet,
    /// `f` and `c` commute with the stabilizer of the link's center.
    pub stab_invariant: bool,
}

impl ConicalCertificate {
    pub fn new(mut poset: Vec<PointSet>, map: SelfMap, apex: PointSet, stab_invariant: bool) -> Self {
        if let SelfMap::Table(table) = &map {
            let mut pairs: Vec<(PointSet, PointSet)> = poset.iter().copied().zip(table.iter().copied()).collect();
            pairs.sort_unstable();
            poset = pairs.iter().map(|p| p.0).collect();
            return ConicalCertificate {
                poset,
                map: SelfMap::Table(pairs.iter().map(|p| p.1).collect()),
                apex,
                stab_invariant,
            };
        }
        poset.sort_unstable();
        ConicalCertificate { poset, map, apex, stab_invariant }
    }

    fn image(&self, i: usize) -> PointSet {
        match &self.map {
            SelfMap::JoinWith(a) => self.poset[i].union(*a),
            SelfMap::Table(t) => t[i],
        }
    }
}

/// Verifies a conical certificate.
///
/// Errors flag structurally broken maps: a missing apex, or a map that moves
/// some element off its upper set or reverses an inclusion. `Ok(false)` means
/// the map is well formed but leaves the poset or misses the apex.
pub fn conical_certificate_check(cert: &ConicalCertificate) -> Result<bool, ZetaError> {
    let poset = &cert.poset;
    if let SelfMap::Table(t) = &cert.map {
        if t.len() != poset.len() {
            return Err(ZetaError::TableLength { expected: poset.len(), got: t.len() });
        }
    }
    if poset.binary_search(&cert.apex).is_err() {
        return Err(ZetaError::ApexMissing { apex: cert.apex });
    }
    let images: Vec<PointSet> = (0..poset.len()).map(|i| cert.image(i)).collect();
    for (x, fx) in poset.iter().zip(&images) {
        if !x.is_subset(*fx) {
            return Err(ZetaError::MapNotOrderPreserving { x: *x, reason: format!("f(x) = {fx} does not contain x") });
        }
    }
    if matches!(cert.map, SelfMap::Table(_)) {
        for i in 0..poset.len() {
            for j in (i + 1)..poset.len() {
                if poset[i].is_proper_subset(poset[j]) && !images[i].is_subset(images[j]) {
                    return Err(ZetaError::MapNotOrderPreserving {
                        x: poset[i],
                        reason: format!("x ⊂ {} but f(x) = {} ⊄ {}", poset[j], images[i], images[j]),
                    });
                }
            }
        }
    }
    Ok(images.iter().all(|fx| poset.binary_search(fx).is_ok() && cert.apex.is_subset(*fx)))
}

/// Certificate for the whole descending poset `down ∪ up` of `S`, when the
/// applicable condition holds.
///
/// The down case joins with `ζ(S)` and the up case with `S ∪ ζ(S)`. Up
/// elements already contain `ζ(S)` in the down case, and down elements map
/// onto the apex in the up case.
pub fn link_certificate(z: &ZetaResult, descending: Vec<PointSet>, action: Option<&GroupAction>) -> ConicalCertificate {
    let join = if z.inside { z.zeta } else { z.center.union(z.zeta) };
    let stab_invariant = match action {
        Some(a) => a.stabilizer_elements(z.center).into_iter().all(|g| a.act(g, join) == join),
        None => true,
    };
    ConicalCertificate::new(descending, SelfMap::JoinWith(join), join, stab_invariant)
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions {
    /// Only subsets inside this region are examined; superset points are drawn from it too.
    pub region: Option<PointSet>,
    /// Build and verify a certificate for every descending link when everything passes.
    pub certify: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepEntry {
    pub set: PointSet,
    pub diam: String,
    pub zeta: PointSet,
    pub case: LinkCase,
    pub failure: Option<LinkFailure>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertificateTally {
    pub links: usize,
    pub verified: usize,
    pub stab_invariant: usize,
    /// Subsets whose certificate did not verify.
    pub rejected: Vec<PointSet>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub t: Scale,
    pub examined: usize,
    pub passed: usize,
    pub all_pass: bool,
    /// Maximum midpoint slack seen over the examined subsets.
    pub max_slack: String,
    pub failures: Vec<SweepEntry>,
    pub certificates: Option<CertificateTally>,
    pub region_restricted: bool,
    /// Per-diameter counts `(diam, examined, passed)`.
    pub by_diameter: Vec<(String, usize, usize)>,
}

/// Checks the applicable condition for every `S` with `diam(S) > t`.
pub fn link_criterion_sweep(
    space: &FiniteMetricSpace,
    action: Option<&GroupAction>,
    t: &Scale,
    options: &SweepOptions,
) -> Result<SweepReport, ZetaError> {
    let region = options.region.unwrap_or_else(|| space.all_points());
    let bound = t.numerator_bound(space.denom());
    let subsets: Vec<PointSet> = match bound {
        None => Vec::new(),
        Some(b) => {
            let sub = space
                .restrict(&region.iter().collect::<Vec<_>>())
                .map_err(|e| ZetaError::InvalidThresholdInput(format!("region restriction failed: {e}")))?;
            let points: Vec<usize> = region.iter().collect();
            enumerate_rips_vertices(&sub, Scale::Infinite, None)?
                .vertices
                .into_iter()
                .filter(|v| v.diam > b)
                .map(|v| PointSet::from_points(v.set.iter().map(|i| points[i])))
                .collect()
        }
    };
    let checked: Vec<(PointSet, ZetaResult, LinkCheck)> = subsets
        .par_iter()
        .map(|&s| {
            let z = zeta_map(space, s)?;
            let c = check_link_conditions(space, &z, region);
            Ok((s, z, c))
        })
        .collect::<Result<_, ZetaError>>()?;
    let fmt = |u: i64| format_rat(&space.to_rat(u));
    let mut by_diam: std::collections::BTreeMap<i64, (usize, usize)> = Default::default();
    for (s, _, c) in &checked {
        let e = by_diam.entry(space.diam_of(*s)).or_default();
        e.0 += 1;
        e.1 += usize::from(c.holds);
    }
    let failures: Vec<SweepEntry> = checked
        .iter()
        .filter(|(_, _, c)| !c.holds)
        .map(|(s, z, c)| SweepEntry {
            set: *s,
            diam: fmt(space.diam_of(*s)),
            zeta: z.zeta,
            case: c.case,
            failure: c.failure.clone(),
        })
        .collect();
    let all_pass = failures.is_empty();
    let certificates = if options.certify && all_pass {
        let results: Vec<(PointSet, bool, bool)> = checked
            .par_iter()
            .map(|(s, z, _)| {
                let mut descending = down_poset(space, *s)?;
                descending.extend(up_poset_within(space, *s, region)?);
                let cert = link_certificate(z, descending, action);
                let ok = matches!(conical_certificate_check(&cert), Ok(true));
                Ok((*s, ok, cert.stab_invariant))
            })
            .collect::<Result<_, ZetaError>>()?;
        Some(CertificateTally {
            links: results.len(),
            verified: results.iter().filter(|r| r.1).count(),
            stab_invariant: results.iter().filter(|r| r.1 && r.2).count(),
            rejected: results.iter().filter(|r| !r.1).map(|r| r.0).collect(),
        })
    } else {
        None
    };
    let max_slack = checked.iter().map(|(_, z, _)| z.slack).max().unwrap_or_default();
    Ok(SweepReport {
        t: *t,
        examined: checked.len(),
        passed: checked.len() - failures.len(),
        all_pass,
        max_slack: format_rat(&max_slack),
        failures,
        certificates,
        region_restricted: options.region.is_some(),
        by_diameter: by_diam.into_iter().map(|(d, (e, p))| (fmt(d), e, p)).collect(),
    })
}

/// The error function entering the threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SigmaModel {
    /// Constant `σ ≡ δ`, as for δ-hyperbolic spaces.
    Constant(f64),
    /// Sampled envelope `(t', σ(t'))`, nondecreasing in `σ`.
    Envelope(Vec<(f64, f64)>),
}

impl SigmaModel {
    pub fn from_profile(profile: &DefectProfile) -> Self {
        SigmaModel::Envelope(profile.envelope())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdInput {
    pub r: f64,
    pub sigma: SigmaModel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub t_min: f64,
    /// Valid scales are those strictly above `t_min`.
    pub strict: bool,
    pub mode: &'static str,
    /// Largest sampled scale violating the σ condition, in envelope mode.
    pub binding_sample: Option<f64>,
}

fn margin() -> f64 {
    1.0 - 3f64.sqrt() / 2.0
}

/// Infimum of the scales `t` with `t > 2r/(2-√3)` and
/// `σ(t') + r < (1-√3/2)·t'` for all `t' >= t`.
pub fn threshold_min(input: &ThresholdInput) -> Result<ThresholdResult, ZetaError> {
    if !(input.r >= 0.0 && input.r.is_finite()) {
        return Err(ZetaError::InvalidThresholdInput(format!(
            "r must be a finite nonnegative number, got {}",
            input.r
        )));
    }
    let base = 2.0 * input.r / (2.0 - 3f64.sqrt());
    match &input.sigma {
        SigmaModel::Constant(delta) => {
            if !(*delta >= 0.0 && delta.is_finite()) {
                return Err(ZetaError::InvalidThresholdInput(format!("δ must be finite and nonnegative, got {delta}")));
            }
            Ok(ThresholdResult {
                t_min: (2.0 * delta + 2.0 * input.r) / (2.0 - 3f64.sqrt()),
                strict: true,
                mode: "constant",
                binding_sample: None,
            })
        }
        SigmaModel::Envelope(samples) => {
            if samples.is_empty() {
                return Err(ZetaError::InvalidThresholdInput("empty envelope".into()));
            }
            let bad = |&(t, s): &(f64, f64)| s + input.r >= margin() * t;
            let last = samples.iter().copied().fold(samples[0], |a, b| if b.0 > a.0 { b } else { a });
            if bad(&last) {
                return Err(ZetaError::NoFiniteThreshold { t: last.0 });
            }
            let binding = samples
                .iter()
                .filter(|s| bad(s))
                .map(|s| s.0)
                .fold(None, |m: Option<f64>, t| Some(m.map_or(t, |m| m.max(t))));
            Ok(ThresholdResult {
                t_min: binding.map_or(base, |b| b.max(base)),
                strict: true,
                mode: "envelope",
                binding_sample: binding,
            })
        }
    }
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

    #[test]
    fn zeta_examples() {
        let z = zeta_map(&path(5), ps(&[0, 4])).unwrap();
        assert_eq!(z.witnesses, vec![(0, 4), (4, 0)]);
        assert_eq!(z.zeta, ps(&[2]));
        assert!(!z.inside);
        assert_eq!(zeta_map(&path(4), ps(&[0, 3])).unwrap().zeta, ps(&[1, 2]));
        let c = cycle(6);
        assert_eq!(zeta_map(&c, ps(&[0, 3])).unwrap().zeta, ps(&[1, 2, 4, 5]));
        let g = PermutationGroup::close(6, &[rotation(6)], 100).unwrap();
        let action = GroupAction::new(g, &c).unwrap();
        for s in c.all_points().subsets().filter(|s| !s.is_empty()) {
            assert!(zeta_is_equivariant(&c, &action, s).unwrap());
        }
    }

    #[test]
    fn unit_graph_slack_is_half() {
        let z = zeta_map(&path(4), ps(&[0, 3])).unwrap();
        assert_eq!(z.slack, Rat::new(1, 2));
        assert_eq!(zeta_map(&path(5), ps(&[0, 4])).unwrap().slack, Rat::from_integer(0));
    }

    #[test]
    fn matrix_without_interior_point() {
        let m = FiniteMetricSpace::from_integer_matrix(&[vec![0, 2], vec![2, 0]]).unwrap();
        assert!(matches!(zeta_map(&m, ps(&[0, 1])), Err(ZetaError::NoGeodesicVertex { .. })));
        let m = FiniteMetricSpace::from_integer_matrix(&[vec![0, 1, 2], vec![1, 0, 1], vec![2, 1, 0]]).unwrap();
        assert_eq!(zeta_map(&m, ps(&[0, 2])).unwrap().zeta, ps(&[1]));
    }

    #[test]
    fn link_condition_examples() {
        let p = path(5);
        let all = p.all_points();
        let z = zeta_map(&p, ps(&[0, 4])).unwrap();
        let c = check_link_conditions(&p, &z, all);
        assert_eq!(c.case, LinkCase::Up);
        assert!(c.holds);
        let z = zeta_map(&p, ps(&[0, 2, 4])).unwrap();
        let c = check_link_conditions(&p, &z, all);
        assert_eq!(c.case, LinkCase::Down);
        assert!(c.holds);
        let h = cycle(6);
        let z = zeta_map(&h, h.all_points()).unwrap();
        assert!(z.inside);
        let c = check_link_conditions(&h, &z, h.all_points());
        assert!(!c.holds);
        assert_eq!(c.failure.unwrap().subset, None);
    }

    #[test]
    fn pointwise_matches_exhaustive() {
        for space in [path(6), cycle(6), cycle(7)] {
            let all = space.all_points();
            for s in all.subsets().filter(|s| !s.is_empty()) {
                let z = zeta_map(&space, s).unwrap();
                assert_eq!(
                    check_link_conditions(&space, &z, all).holds,
                    check_link_conditions_exhaustive(&space, &z, all).unwrap(),
                    "{s}"
                );
            }
        }
    }

    #[test]
    fn certificate_examples() {
        let p = path(5);
        let down = down_poset(&p, ps(&[0, 2, 4])).unwrap();
        let cert = ConicalCertificate::new(down.clone(), SelfMap::JoinWith(ps(&[2])), ps(&[2]), true);
        assert_eq!(conical_certificate_check(&cert), Ok(true));
        let min_poset = vec![ps(&[0]), ps(&[0, 1]), ps(&[0, 2])];
        let id = ConicalCertificate::new(min_poset.clone(), SelfMap::Table(min_poset.clone()), ps(&[0]), true);
        assert_eq!(conical_certificate_check(&id), Ok(true));
        let shrink = SelfMap::Table(vec![ps(&[0]), ps(&[0]), ps(&[0, 2])]);
        assert!(matches!(
            conical_certificate_check(&ConicalCertificate::new(min_poset.clone(), shrink, ps(&[0]), true)),
            Err(ZetaError::MapNotOrderPreserving { .. })
        ));
        let missing = ConicalCertificate::new(min_poset.clone(), SelfMap::JoinWith(ps(&[0])), ps(&[1]), true);
        assert!(matches!(conical_certificate_check(&missing), Err(ZetaError::ApexMissing { .. })));
        let leaves = ConicalCertificate::new(min_poset, SelfMap::JoinWith(ps(&[3])), ps(&[0]), true);
        assert_eq!(conical_certificate_check(&leaves), Ok(false));
    }

    #[test]
    fn certified_links_have_trivial_homology() {
        let p = path(6);
        for s in p.all_points().subsets().filter(|s| s.len() >= 2) {
            let z = zeta_map(&p, s).unwrap();
            if !check_link_conditions(&p, &z, p.all_points()).holds {
                continue;
            }
            let mut desc = down_poset(&p, s).unwrap();
            desc.extend(crate::rips::up_poset(&p, s).unwrap());
            let cert = link_certificate(&z, desc.clone(), None);
            assert_eq!(conical_certificate_check(&cert), Ok(true), "{s}");
            let b = betti_numbers(&crate::rips::order_complex(&desc).complex, Field::Gf2, 3).unwrap();
            assert!(b.reduced_trivial(), "{s}: {b}");
        }
    }

    #[test]
    fn sweep_examples() {
        let p = path(9);
        let r =
            link_criterion_sweep(&p, None, &Scale::finite(4), &SweepOptions { certify: true, ..Default::default() })
                .unwrap();
        assert!(r.all_pass && r.examined > 0);
        let tally = r.certificates.unwrap();
        assert_eq!(tally.verified, tally.links);
        let vacuous = link_criterion_sweep(&p, None, &Scale::finite(8), &SweepOptions::default()).unwrap();
        assert_eq!(vacuous.examined, 0);
        assert!(vacuous.all_pass);
        let h = cycle(6);
        let r = link_criterion_sweep(&h, None, &Scale::finite(2), &SweepOptions::default()).unwrap();
        assert!(!r.all_pass);
        assert!(r.failures.iter().any(|f| f.set == h.all_points()));
        assert!(r.failures.iter().all(|f| f.diam == "3"));
    }

    #[test]
    fn thresholds() {
        let t = |delta: f64, r: f64| {
            threshold_min(&ThresholdInput { r, sigma: SigmaModel::Constant(delta) }).unwrap().t_min
        };
        assert!((t(0.0, 0.5) - (2.0 + 3f64.sqrt())).abs() < 1e-9);
        assert!((t(1.0, 0.5) - 11.1962).abs() < 1e-3);
        assert_eq!(t(0.0, 0.0), 0.0);
        assert!(threshold_min(&ThresholdInput { r: -1.0, sigma: SigmaModel::Constant(0.0) }).is_err());
        let linear = SigmaModel::Envelope((1..20).map(|k| (k as f64, k as f64 / 2.0)).collect());
        assert!(matches!(
            threshold_min(&ThresholdInput { r: 0.5, sigma: linear }),
            Err(ZetaError::NoFiniteThreshold { .. })
        ));
        let flat = SigmaModel::Envelope((1..=40).map(|k| (k as f64, 1.0)).collect());
        let res = threshold_min(&ThresholdInput { r: 0.5, sigma: flat }).unwrap();
        // Constant envelope 1 agrees with δ = 1 up to the sampling grid.
        assert_eq!(res.binding_sample, Some(11.0));
        assert!(res.t_min <= t(1.0, 0.5) && t(1.0, 0.5) < 12.0);
    }
}
