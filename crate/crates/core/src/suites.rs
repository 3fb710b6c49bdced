//! Named families of test spaces and actions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{FiniteMetricSpace, GeodesicTriangle};
use crate::symmetry::{isometry_group, reflection, rotation, GroupAction, PermutationGroup, DEFAULT_LATTICE_CAP};

/// A space with an optional verified action and a display name.
#[derive(Debug, Clone)]
pub struct SuiteSpace {
    pub name: String,
    pub space: FiniteMetricSpace,
    pub action: Option<GroupAction>,
}

pub fn path(n: usize) -> FiniteMetricSpace {
    let edges: Vec<(usize, usize)> = (1..n).map(|i| (i - 1, i)).collect();
    FiniteMetricSpace::from_unit_graph(n, &edges).expect("paths are connected")
}

pub fn cycle(n: usize) -> FiniteMetricSpace {
    let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    FiniteMetricSpace::from_unit_graph(n, &edges).expect("cycles are connected")
}

/// Complete binary tree with `depth` levels below the root, in heap order.
pub fn complete_binary_tree(depth: u32) -> FiniteMetricSpace {
    let n = (1usize << (depth + 1)) - 1;
    let edges: Vec<(usize, usize)> = (1..n).map(|v| ((v - 1) / 2, v)).collect();
    FiniteMetricSpace::from_unit_graph(n, &edges).expect("trees are connected")
}

/// Three legs of `leg` unit edges joined at vertex 0. Leg `k` holds
/// vertices `1 + k*leg ..= (k+1)*leg`, ordered outward.
pub fn tripod(leg: usize) -> FiniteMetricSpace {
    let mut edges = Vec::new();
    for k in 0..3 {
        let start = 1 + k * leg;
        edges.push((0, start));
        edges.extend((start..start + leg - 1).map(|v| (v, v + 1)));
    }
    FiniteMetricSpace::from_unit_graph(3 * leg + 1, &edges).expect("tripods are connected")
}

/// Tip of leg `k` of [`tripod`].
pub fn tripod_tip(leg: usize, k: usize) -> usize {
    (k + 1) * leg
}

/// Square grid graph with `side × side` vertices and the ℓ1 path metric.
pub fn l1_grid(side: usize) -> FiniteMetricSpace {
    let mut edges = Vec::new();
    for y in 0..side {
        for x in 0..side {
            if x + 1 < side {
                edges.push((grid_index(side, x, y), grid_index(side, x + 1, y)));
            }
            if y + 1 < side {
                edges.push((grid_index(side, x, y), grid_index(side, x, y + 1)));
            }
        }
    }
    FiniteMetricSpace::from_unit_graph(side * side, &edges).expect("grids are connected")
}

pub fn grid_index(side: usize, x: usize, y: usize) -> usize {
    y * side + x
}

/// Staircase geodesic: alternate unit steps toward the target, x first.
fn staircase(side: usize, from: (usize, usize), to: (usize, usize)) -> Vec<usize> {
    let (mut x, mut y) = from;
    let mut out = vec![grid_index(side, x, y)];
    let mut step_x = true;
    while (x, y) != to {
        let can_x = x != to.0;
        let can_y = y != to.1;
        if (step_x && can_x) || !can_y {
            x = if to.0 > x { x + 1 } else { x - 1 };
        } else {
            y = if to.1 > y { y + 1 } else { y - 1 };
        }
        step_x = !step_x;
        out.push(grid_index(side, x, y));
    }
    out
}

/// Straight-then-turn geodesic through the corner `via`.
fn through(side: usize, from: (usize, usize), via: (usize, usize), to: (usize, usize)) -> Vec<usize> {
    let mut first = staircase(side, from, via);
    first.pop();
    first.extend(staircase(side, via, to));
    first
}

/// The ℓ1 witness triangle of size `n` in a grid of the given side, which
/// must be at least `2n + 1`.
///
/// With `c = (0, n)` the vertices are `x1 = c`, `x2 = c + (n, n)` and
/// `x3 = c + (n, -n)`. The sides from `x1` are staircases; the side
/// `x2 → x3` is vertical. The points `(0, 2n)` and `(0, 0)` lie on the two
/// sides from `x1` via the corner geodesics, and realize defect `n`.
pub fn l1_witness_triangle(side: usize, n: usize) -> GeodesicTriangle {
    assert!(side > 2 * n, "grid side {side} too small for a witness of size {n}");
    let x1 = (0, n);
    let x2 = (n, 2 * n);
    let x3 = (n, 0);
    GeodesicTriangle {
        vertices: [grid_index(side, x1.0, x1.1), grid_index(side, x2.0, x2.1), grid_index(side, x3.0, x3.1)],
        sides: [through(side, x1, (0, 2 * n), x2), through(side, x1, (0, 0), x3), staircase(side, x2, x3)],
    }
}

/// Ball of the given radius in the Cayley graph of the free group on two
/// generators, in breadth-first order from the identity.
pub fn free_group_ball(radius: usize) -> FiniteMetricSpace {
    // Words as letter lists: 0 = a, 1 = A, 2 = b, 3 = B; `l ^ 1` inverts.
    let mut words: Vec<Vec<u8>> = vec![Vec::new()];
    let mut edges = Vec::new();
    let mut frontier = vec![0usize];
    for _ in 0..radius {
        let mut next = Vec::new();
        for &w in &frontier {
            for letter in 0..4u8 {
                if words[w].last().is_some_and(|&l| l == letter ^ 1) {
                    continue;
                }
                let mut word = words[w].clone();
                word.push(letter);
                words.push(word);
                edges.push((w, words.len() - 1));
                next.push(words.len() - 1);
            }
        }
        frontier = next;
    }
    FiniteMetricSpace::from_unit_graph(words.len(), &edges).expect("balls are connected")
}

/// Number of vertices within `radius` of the identity in the free group ball.
pub fn free_group_ball_size(radius: usize) -> usize {
    1 + (0..radius).map(|k| 4 * 3usize.pow(k as u32)).sum::<usize>()
}

pub fn cyclic_action(n: usize) -> GroupAction {
    let group = PermutationGroup::close(n, &[rotation(n)], 4 * n).expect("cyclic group");
    GroupAction::new(group, &cycle(n)).expect("rotations are isometries")
}

pub fn dihedral_action(n: usize) -> GroupAction {
    let group = PermutationGroup::close(n, &[rotation(n), reflection(n)], 4 * n).expect("dihedral group");
    GroupAction::new(group, &cycle(n)).expect("reflections are isometries")
}

/// Random metric on `n` points: integer edge weights in `1..=max_weight` on
/// the complete graph, closed under shortest paths, stored as a matrix.
#[allow(clippy::needless_range_loop)]
pub fn random_metric(n: usize, max_weight: i64, seed: u64) -> FiniteMetricSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let w = rng.gen_range(1..=max_weight);
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                d[i][j] = d[i][j].min(d[i][k] + d[k][j]);
            }
        }
    }
    FiniteMetricSpace::from_integer_matrix(&d).expect("shortest-path closure is a metric")
}

/// `count` random six-point metrics with their full isometry groups.
pub fn random_suite(count: usize, seed: u64) -> Vec<SuiteSpace> {
    (0..count)
        .map(|i| {
            let space = random_metric(6, 3, seed.wrapping_add(i as u64));
            let group = isometry_group(&space, DEFAULT_LATTICE_CAP).expect("six points have at most 720 symmetries");
            let action = GroupAction::new(group, &space).expect("isometries act isometrically");
            SuiteSpace { name: format!("random-{i}"), space, action: Some(action) }
        })
        .collect()
}

/// The hexagon with the cyclic and dihedral actions, and the 5-point path with its flip.
pub fn symmetric_suite() -> Vec<SuiteSpace> {
    let p5 = path(5);
    let flip = PermutationGroup::close(5, &[vec![4, 3, 2, 1, 0]], 2).expect("flip");
    vec![
        SuiteSpace { name: "hexagon/C6".into(), space: cycle(6), action: Some(cyclic_action(6)) },
        SuiteSpace { name: "hexagon/D12".into(), space: cycle(6), action: Some(dihedral_action(6)) },
        SuiteSpace {
            name: "path-5/flip".into(),
            action: Some(GroupAction::new(flip, &p5).expect("flip is an isometry")),
            space: p5,
        },
    ]
}
