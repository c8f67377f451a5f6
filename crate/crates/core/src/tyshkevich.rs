//! Composition and canonical decomposition of bipartite degree sequences
//! and their realizations, alternating-cycle extraction, and the split-graph
//! correspondence.
//!
//! The composition `g ∘ h` places `g`'s vertices before `h`'s on the A side
//! and after `h`'s edge targets on the B side, then joins every A-vertex of
//! `g` with every B-vertex of `h`. A sequence splits at `(p, q)` exactly
//! when, after sorting both sides descending, the `p` largest A-degrees
//! account for a complete block to all but the `q` smallest B-degrees plus
//! every edge at those `q` vertices. Splits are forced: when the arithmetic
//! test holds, every realization exhibits the complete-block structure.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::bigraph::{
    enumerate_realizations_with_limit, BipartiteDegreeSequence, BipartiteRealization, Vertex,
};
use crate::error::{Error, Result};

/// Compose two realizations: disjoint union plus the complete block from
/// `g`'s A side to `h`'s B side.
///
/// Vertex order in the result: A side is `g`'s A-vertices then `h`'s;
/// B side is `g`'s B-vertices then `h`'s.
pub fn compose(g: &BipartiteRealization, h: &BipartiteRealization) -> BipartiteRealization {
    let n_a = g.n_a() + h.n_a();
    let n_b = g.n_b() + h.n_b();
    let mut out = BipartiteRealization::empty(n_a, n_b);
    for (i, j) in g.edges() {
        out.set_edge(i, j, true);
    }
    for (i, j) in h.edges() {
        out.set_edge(g.n_a() + i, g.n_b() + j, true);
    }
    for i in 0..g.n_a() {
        for j in 0..h.n_b() {
            out.set_edge(i, g.n_b() + j, true);
        }
    }
    out
}

/// Degree sequence of the composition, without building a realization.
pub fn compose_sequences(
    g: &BipartiteDegreeSequence,
    h: &BipartiteDegreeSequence,
) -> BipartiteDegreeSequence {
    let mut deg_a: Vec<usize> = g.deg_a.iter().map(|&d| d + h.n_b()).collect();
    deg_a.extend_from_slice(&h.deg_a);
    let mut deg_b = g.deg_b.clone();
    deg_b.extend(h.deg_b.iter().map(|&d| d + g.n_a()));
    BipartiteDegreeSequence::new(deg_a, deg_b)
}

fn sorted_desc(values: &[usize]) -> Vec<usize> {
    let mut v = values.to_vec();
    v.sort_unstable_by(|x, y| y.cmp(x));
    v
}

/// First split point of the sequence in lexicographic `(p, q)` order, or
/// `None` when the sequence is indecomposable.
///
/// Both sides are sorted descending first. A split `(p, q)` means the `p`
/// top A-degrees and `q` bottom B-degrees form the outer factor:
/// `sum(degA[..p]) == p * (nB - q) + sum(degB[nB - q..])`.
pub fn is_decomposable(d: &BipartiteDegreeSequence) -> Option<(usize, usize)> {
    let a = sorted_desc(&d.deg_a);
    let b = sorted_desc(&d.deg_b);
    let (n_a, n_b) = (a.len(), b.len());
    // Suffix sums of the sorted B side: tail[q] = sum of the q smallest.
    let mut tail = vec![0usize; n_b + 1];
    for q in 1..=n_b {
        tail[q] = tail[q - 1] + b[n_b - q];
    }
    let mut prefix = 0usize;
    for p in 0..=n_a {
        if p > 0 {
            prefix += a[p - 1];
        }
        for (q, &tail_q) in tail.iter().enumerate() {
            if p + q == 0 || p + q == n_a + n_b {
                continue;
            }
            if prefix == p * (n_b - q) + tail_q {
                return Some((p, q));
            }
        }
    }
    None
}

/// Canonical decomposition of a degree sequence into indecomposable
/// factors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionReport {
    /// Indecomposable factors, outermost first; each factor is reported
    /// with both sides sorted descending.
    pub components: Vec<BipartiteDegreeSequence>,
    /// Cumulative split points `(p, q)` in the sorted composite: the i-th
    /// entry is the total A/B size of the first i factors.
    #[serde(rename = "splitPoints")]
    pub split_points: Vec<(usize, usize)>,
}

/// Decompose a degree sequence into its indecomposable factors.
///
/// Works on the descending-sorted sequence; the reported split points refer
/// to that order. The zero-vertex sequence has no factors.
pub fn decompose(d: &BipartiteDegreeSequence) -> DecompositionReport {
    let mut remainder = BipartiteDegreeSequence::new(sorted_desc(&d.deg_a), sorted_desc(&d.deg_b));
    let mut components = Vec::new();
    let mut split_points = Vec::new();
    let (mut p_total, mut q_total) = (0usize, 0usize);
    while remainder.n_total() > 0 {
        match is_decomposable(&remainder) {
            Some((p, q)) => {
                let n_b = remainder.n_b();
                let inner_b = n_b - q;
                let outer = BipartiteDegreeSequence::new(
                    remainder.deg_a[..p].iter().map(|&x| x - inner_b).collect(),
                    remainder.deg_b[inner_b..].to_vec(),
                );
                let inner = BipartiteDegreeSequence::new(
                    remainder.deg_a[p..].to_vec(),
                    remainder.deg_b[..inner_b].iter().map(|&x| x - p).collect(),
                );
                p_total += p;
                q_total += q;
                components.push(outer);
                split_points.push((p_total, q_total));
                remainder = inner;
            }
            None => {
                components.push(remainder);
                break;
            }
        }
    }
    DecompositionReport {
        components,
        split_points,
    }
}

/// Whether a realization exhibits the complete-block structure forced by a
/// split at `(p, q)` of its sorted degree sequence: the `p` highest-degree
/// A-vertices are joined to every B-vertex outside the `q` lowest-degree
/// ones, and those `q` B-vertices have no other neighbors.
pub fn realization_splits_at(g: &BipartiteRealization, p: usize, q: usize) -> bool {
    let d = g.degree_sequence();
    let mut a_order: Vec<usize> = (0..g.n_a()).collect();
    a_order.sort_by_key(|&i| (std::cmp::Reverse(d.deg_a[i]), i));
    let mut b_order: Vec<usize> = (0..g.n_b()).collect();
    b_order.sort_by_key(|&j| (std::cmp::Reverse(d.deg_b[j]), j));
    let top_a = &a_order[..p];
    let big_b = &b_order[..g.n_b() - q];
    let small_b = &b_order[g.n_b() - q..];
    for &i in top_a {
        for &j in big_b {
            if !g.has_edge(i, j) {
                return false;
            }
        }
    }
    for &i in &a_order[p..] {
        for &j in small_b {
            if g.has_edge(i, j) {
                return false;
            }
        }
    }
    true
}

/// Count realizations by multiplying exhaustive counts of the
/// indecomposable factors. Splits are forced, so the realization space of
/// a composite is the product of the factor spaces.
pub fn count_via_components(d: &BipartiteDegreeSequence, limit: usize) -> Result<BigUint> {
    let report = decompose(d);
    let mut total = BigUint::one();
    for comp in &report.components {
        let count = enumerate_realizations_with_limit(comp, limit)?.len();
        total *= BigUint::from(count);
    }
    Ok(total)
}

/// An alternating cycle anchored at a vertex pair `(x, y) = (a_1, b_{l+1})`.
///
/// The vertex list interleaves sides: `a_1, b_1, a_2, b_2, ..., a_{l+1},
/// b_{l+1}`. When `edge_parity` is `false` the anchor pair is a non-edge
/// and the pairs `(a_i, b_i)` are edges while `(a_{i+1}, b_i)` are
/// non-edges; when `true` the anchor is an edge and the pattern is
/// complemented.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlternatingCycle {
    pub vertices: Vec<Vertex>,
    #[serde(rename = "edgeParity")]
    pub edge_parity: bool,
}

impl AlternatingCycle {
    /// The A-side vertices `a_1..a_{l+1}` in cycle order.
    pub fn a_side(&self) -> Vec<usize> {
        self.vertices
            .iter()
            .filter_map(|v| match v {
                Vertex::A(i) => Some(*i),
                Vertex::B(_) => None,
            })
            .collect()
    }

    /// The B-side vertices `b_1..b_{l+1}` in cycle order.
    pub fn b_side(&self) -> Vec<usize> {
        self.vertices
            .iter()
            .filter_map(|v| match v {
                Vertex::B(j) => Some(*j),
                Vertex::A(_) => None,
            })
            .collect()
    }

    /// Half the cycle length minus one: the number of internal steps `l`.
    pub fn steps(&self) -> usize {
        self.vertices.len() / 2 - 1
    }
}

/// Find a shortest alternating cycle through the anchor pair
/// `(a_idx, b_idx)` by layered breadth-first search over A-vertices.
///
/// Each search step moves `a -> a'` through some B-vertex `b` where exactly
/// one of `(a, b)`, `(a', b)` is an edge, with the orientation fixed by the
/// anchor's parity. Returns a `DomainError` when no alternating cycle
/// passes through the anchor.
pub fn find_alternating_cycle(
    g: &BipartiteRealization,
    a_idx: usize,
    b_idx: usize,
) -> Result<AlternatingCycle> {
    if a_idx >= g.n_a() || b_idx >= g.n_b() {
        return Err(Error::DomainError(format!(
            "anchor ({a_idx}, {b_idx}) out of range for a {}x{} realization",
            g.n_a(),
            g.n_b()
        )));
    }
    let parity = g.has_edge(a_idx, b_idx);
    // parity=false: pairs (a_i, b_i) are edges, steps (a_{i+1}, b_i) are
    // non-edges, goal is any a* adjacent to b_idx.
    // parity=true: the complemented pattern.
    let step_ok = |a: usize, b: usize, a_next: usize| -> bool {
        if parity {
            !g.has_edge(a, b) && g.has_edge(a_next, b)
        } else {
            g.has_edge(a, b) && !g.has_edge(a_next, b)
        }
    };
    let is_goal = |a: usize| -> bool {
        if parity {
            !g.has_edge(a, b_idx)
        } else {
            g.has_edge(a, b_idx)
        }
    };
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; g.n_a()];
    let mut seen = vec![false; g.n_a()];
    seen[a_idx] = true;
    let mut queue = std::collections::VecDeque::from([a_idx]);
    let mut goal = None;
    // The anchor itself never satisfies the goal test (its parity is fixed
    // the other way), so the search must take at least one step.
    'search: while let Some(a) = queue.pop_front() {
        if is_goal(a) {
            goal = Some(a);
            break 'search;
        }
        for b in 0..g.n_b() {
            if b == b_idx {
                continue;
            }
            for a_next in 0..g.n_a() {
                if !seen[a_next] && step_ok(a, b, a_next) {
                    seen[a_next] = true;
                    parent[a_next] = Some((a, b));
                    queue.push_back(a_next);
                }
            }
        }
    }
    let Some(last) = goal else {
        return Err(Error::DomainError(format!(
            "no alternating cycle passes through anchor ({a_idx}, {b_idx})"
        )));
    };
    let mut a_rev = vec![last];
    let mut b_rev = vec![b_idx];
    let mut cur = last;
    while let Some((a, b)) = parent[cur] {
        a_rev.push(a);
        b_rev.push(b);
        cur = a;
    }
    a_rev.reverse();
    b_rev.reverse();
    let mut vertices = Vec::with_capacity(2 * a_rev.len());
    for (a, b) in a_rev.iter().zip(&b_rev) {
        vertices.push(Vertex::A(*a));
        vertices.push(Vertex::B(*b));
    }
    let cycle = AlternatingCycle {
        vertices,
        edge_parity: parity,
    };
    debug_assert!(verify_cycle(g, &cycle).is_ok());
    Ok(cycle)
}

/// Validate that `cycle` is a genuine alternating cycle of `g`: vertices
/// distinct per side, interleaved, and the edge/non-edge pattern matches
/// the declared parity.
pub fn verify_cycle(g: &BipartiteRealization, cycle: &AlternatingCycle) -> Result<()> {
    let a = cycle.a_side();
    let b = cycle.b_side();
    if a.is_empty() || a.len() != b.len() || 2 * a.len() != cycle.vertices.len() {
        return Err(Error::DomainError(
            "cycle must interleave equally many vertices from both sides".into(),
        ));
    }
    let distinct_a: BTreeSet<_> = a.iter().collect();
    let distinct_b: BTreeSet<_> = b.iter().collect();
    if distinct_a.len() != a.len() || distinct_b.len() != b.len() {
        return Err(Error::DomainError("cycle revisits a vertex".into()));
    }
    let m = a.len();
    for i in 0..m {
        let pair_edge = g.has_edge(a[i], b[i]);
        if pair_edge == cycle.edge_parity {
            return Err(Error::DomainError(format!(
                "pair (a{}, b{}) breaks the alternation pattern",
                a[i], b[i]
            )));
        }
        let step_edge = g.has_edge(a[(i + 1) % m], b[i]);
        if step_edge != cycle.edge_parity {
            return Err(Error::DomainError(format!(
                "step (a{}, b{}) breaks the alternation pattern",
                a[(i + 1) % m],
                b[i]
            )));
        }
    }
    Ok(())
}

/// Extract an induced staircase pattern from a shortest alternating cycle.
///
/// Returns `(a_list, b_list)` such that in the returned order
/// `g.has_edge(a_list[i], b_list[j]) == (i <= j)` — an exact staircase on
/// `ceil(l/3)` vertices per side, where `l` is the cycle's step count.
/// Fails with `CycleNotShortest` when a chord violates the pattern that
/// shortest cycles must satisfy.
pub fn extract_induced_halfgraph(
    g: &BipartiteRealization,
    cycle: &AlternatingCycle,
) -> Result<(Vec<usize>, Vec<usize>)> {
    verify_cycle(g, cycle)?;
    let a = cycle.a_side();
    let b = cycle.b_side();
    let l = a.len() - 1;
    if l == 0 {
        return Err(Error::CycleNotShortest(
            "cycle has no internal steps; a 2-vertex cycle cannot alternate".into(),
        ));
    }
    // Shortest cycles satisfy a rigid chord pattern (1-based positions):
    // anchor non-edge case: (a_i, b_j) is an edge iff j <= i-2 or j == i;
    // anchor edge case: the complement.
    for (ii, &ai) in a.iter().enumerate() {
        let i = ii + 1;
        for (jj, &bj) in b.iter().enumerate() {
            let j = jj + 1;
            let staircase = j + 2 <= i || j == i;
            let expected = if cycle.edge_parity {
                !staircase
            } else {
                staircase
            };
            if g.has_edge(ai, bj) != expected {
                return Err(Error::CycleNotShortest(format!(
                    "chord (a{ai}, b{bj}) at positions ({i}, {j}) breaks the shortest-cycle pattern"
                )));
            }
        }
    }
    let m = l.div_ceil(3);
    let (mut a_out, mut b_out): (Vec<usize>, Vec<usize>) = if cycle.edge_parity {
        // positions 3s-1 on the A side, 3t-2 on the B side, direct order
        (
            (1..=m).map(|s| a[3 * s - 2]).collect(),
            (1..=m).map(|t| b[3 * t - 3]).collect(),
        )
    } else {
        // positions 3s-2 / 3t-2, both reversed
        (
            (1..=m).map(|s| a[3 * s - 3]).collect(),
            (1..=m).map(|t| b[3 * t - 3]).collect(),
        )
    };
    if !cycle.edge_parity {
        a_out.reverse();
        b_out.reverse();
    }
    debug_assert!((0..m).all(|i| (0..m).all(|j| g.has_edge(a_out[i], b_out[j]) == (i <= j))));
    Ok((a_out, b_out))
}

/// A simple graph on `n` labeled vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimpleGraph {
    pub n: usize,
    /// Edges as ordered pairs `(u, v)` with `u < v`.
    pub edges: BTreeSet<(usize, usize)>,
}

impl SimpleGraph {
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.n];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }
}

/// Map a bipartite realization to the corresponding split graph: the A side
/// becomes a clique, the B side stays independent, and the cross edges are
/// the realization's edges. This inverts the usual correspondence that
/// peels a split graph into a bipartite pair.
pub fn psi_inverse(g: &BipartiteRealization) -> SimpleGraph {
    let n = g.n_a() + g.n_b();
    let mut edges = BTreeSet::new();
    for u in 0..g.n_a() {
        for v in u + 1..g.n_a() {
            edges.insert((u, v));
        }
    }
    for (i, j) in g.edges() {
        edges.insert((i, g.n_a() + j));
    }
    SimpleGraph { n, edges }
}
