//! Bipartite degree sequences, bit-matrix realizations, the exhaustive
//! realization oracle, and switch moves.
//!
//! Vertices are indexed 0-based internally: side A holds `a_0 .. a_{nA-1}`,
//! side B holds `b_0 .. b_{nB-1}`. A realization is stored as a row-major
//! bit matrix (one row per A-vertex, one bit per B-vertex), which makes
//! edge tests, switch application, and induced-block comparisons cheap.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cell budget (`nA * nB`) for exhaustive enumeration routines.
pub const DEFAULT_ORACLE_LIMIT: usize = 36;

/// A bipartite degree sequence: prescribed degrees for both sides.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BipartiteDegreeSequence {
    #[serde(rename = "degA")]
    pub deg_a: Vec<usize>,
    #[serde(rename = "degB")]
    pub deg_b: Vec<usize>,
}

impl BipartiteDegreeSequence {
    pub fn new(deg_a: Vec<usize>, deg_b: Vec<usize>) -> Self {
        Self { deg_a, deg_b }
    }

    pub fn n_a(&self) -> usize {
        self.deg_a.len()
    }

    pub fn n_b(&self) -> usize {
        self.deg_b.len()
    }

    /// Total vertex count on both sides.
    pub fn n_total(&self) -> usize {
        self.deg_a.len() + self.deg_b.len()
    }

    pub fn sum_a(&self) -> usize {
        self.deg_a.iter().sum()
    }

    pub fn sum_b(&self) -> usize {
        self.deg_b.iter().sum()
    }
}

/// A vertex on either side of the bipartition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Vertex {
    A(usize),
    B(usize),
}

/// The staircase bipartite graph on `n + n` vertices: `a_i ~ b_j` iff
/// `i <= j` (0-based). It is the unique realization of its own degree
/// sequence and the reference pattern for everything in this crate.
pub fn halfgraph(n: usize) -> BipartiteRealization {
    let mut g = BipartiteRealization::empty(n, n);
    for i in 0..n {
        for j in i..n {
            g.set_edge(i, j, true);
        }
    }
    g
}

/// The degree sequence obtained from the staircase sequence by lowering the
/// top A-degree and the last B-degree by `k`:
/// `degA = (n-k, n-1, ..., 1)`, `degB = (1, 2, ..., n-1, n-k)`.
///
/// Requires `k <= n`. For `0 < k < n` these sequences are indecomposable;
/// `k = 0` gives the rigid staircase sequence itself.
pub fn hk_sequence(n: usize, k: usize) -> BipartiteDegreeSequence {
    assert!(n >= 1, "sequence needs at least one vertex per side");
    assert!(k <= n, "degree defect k must not exceed n");
    let mut deg_a = vec![n - k];
    deg_a.extend((1..n).rev());
    let mut deg_b: Vec<usize> = (1..n).collect();
    deg_b.push(n - k);
    BipartiteDegreeSequence::new(deg_a, deg_b)
}

/// A switch move: replaces edges `(a1,b1),(a2,b2)` by `(a1,b2),(a2,b1)`.
///
/// A move is valid on a realization when the first pair of cells is present
/// and the second absent. Moves are canonicalized with `a1 < a2`; the `b`
/// indices carry the orientation, so each valid switch has exactly one
/// representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SwitchMove {
    pub a1: usize,
    pub a2: usize,
    pub b1: usize,
    pub b2: usize,
}

impl SwitchMove {
    /// 1-indexed quadruple `[a1, a2, b1, b2]` for serialized move lists.
    pub fn to_one_indexed(self) -> [usize; 4] {
        [self.a1 + 1, self.a2 + 1, self.b1 + 1, self.b2 + 1]
    }

    /// Parse a 1-indexed quadruple, validating the canonical form.
    pub fn from_one_indexed(q: [usize; 4]) -> Result<Self> {
        if q.contains(&0) {
            return Err(Error::DomainError(
                "move entries are 1-indexed and must be positive".into(),
            ));
        }
        let mv = SwitchMove {
            a1: q[0] - 1,
            a2: q[1] - 1,
            b1: q[2] - 1,
            b2: q[3] - 1,
        };
        if mv.a1 >= mv.a2 || mv.b1 == mv.b2 {
            return Err(Error::DomainError(format!(
                "move {q:?} is not in canonical form (a1 < a2, b1 != b2)"
            )));
        }
        Ok(mv)
    }
}

/// A bipartite graph on labeled vertices, stored as a row-major bit matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BipartiteRealization {
    n_a: usize,
    n_b: usize,
    words_per_row: usize,
    rows: Vec<u64>,
}

fn col_prefix_mask(word_idx: usize, p: usize) -> u64 {
    let lo = word_idx * 64;
    if p <= lo {
        0
    } else if p >= lo + 64 {
        !0u64
    } else {
        (1u64 << (p - lo)) - 1
    }
}

impl BipartiteRealization {
    pub fn empty(n_a: usize, n_b: usize) -> Self {
        let words_per_row = n_b.div_ceil(64).max(1);
        Self {
            n_a,
            n_b,
            words_per_row,
            rows: vec![0u64; n_a * words_per_row],
        }
    }

    /// Build from 0-based edge pairs `(i, j)`.
    pub fn from_edges(n_a: usize, n_b: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::empty(n_a, n_b);
        for &(i, j) in edges {
            g.set_edge(i, j, true);
        }
        g
    }

    pub fn n_a(&self) -> usize {
        self.n_a
    }

    pub fn n_b(&self) -> usize {
        self.n_b
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.n_a && j < self.n_b);
        let w = self.words_per_row * i + j / 64;
        self.rows[w] >> (j % 64) & 1 == 1
    }

    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        debug_assert!(i < self.n_a && j < self.n_b);
        let w = self.words_per_row * i + j / 64;
        let bit = 1u64 << (j % 64);
        if present {
            self.rows[w] |= bit;
        } else {
            self.rows[w] &= !bit;
        }
    }

    pub fn toggle_edge(&mut self, i: usize, j: usize) {
        debug_assert!(i < self.n_a && j < self.n_b);
        let w = self.words_per_row * i + j / 64;
        self.rows[w] ^= 1u64 << (j % 64);
    }

    pub fn deg_a(&self, i: usize) -> usize {
        let base = self.words_per_row * i;
        self.rows[base..base + self.words_per_row]
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    pub fn deg_b(&self, j: usize) -> usize {
        (0..self.n_a).filter(|&i| self.has_edge(i, j)).count()
    }

    pub fn degree_sequence(&self) -> BipartiteDegreeSequence {
        BipartiteDegreeSequence {
            deg_a: (0..self.n_a).map(|i| self.deg_a(i)).collect(),
            deg_b: (0..self.n_b).map(|j| self.deg_b(j)).collect(),
        }
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n_a).map(|i| self.deg_a(i)).sum()
    }

    /// All edges as 0-based pairs, sorted lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for i in 0..self.n_a {
            out.extend(self.neighbors_a(i).into_iter().map(|j| (i, j)));
        }
        out
    }

    pub fn neighbors_a(&self, i: usize) -> Vec<usize> {
        let base = self.words_per_row * i;
        let mut out = Vec::new();
        for w in 0..self.words_per_row {
            let mut bits = self.rows[base + w];
            while bits != 0 {
                out.push(w * 64 + bits.trailing_zeros() as usize);
                bits &= bits - 1;
            }
        }
        out
    }

    pub fn neighbors_b(&self, j: usize) -> Vec<usize> {
        (0..self.n_a).filter(|&i| self.has_edge(i, j)).collect()
    }

    /// Number of cells where the two realizations disagree.
    pub fn symmetric_difference_size(&self, other: &Self) -> usize {
        debug_assert_eq!((self.n_a, self.n_b), (other.n_a, other.n_b));
        self.rows
            .iter()
            .zip(&other.rows)
            .map(|(x, y)| (x ^ y).count_ones() as usize)
            .sum()
    }

    /// True when the subgraphs induced on `{a_0..a_{p-1}} ∪ {b_0..b_{p-1}}`
    /// coincide, i.e. all cells `(i, j)` with `i < p` and `j < p` agree.
    pub fn agrees_on_prefix_block(&self, other: &Self, p: usize) -> bool {
        debug_assert_eq!((self.n_a, self.n_b), (other.n_a, other.n_b));
        let rows = p.min(self.n_a);
        let cols = p.min(self.n_b);
        for i in 0..rows {
            let base = self.words_per_row * i;
            for w in 0..self.words_per_row {
                let mask = col_prefix_mask(w, cols);
                if (self.rows[base + w] ^ other.rows[base + w]) & mask != 0 {
                    return false;
                }
            }
        }
        true
    }

    /// True when the subgraphs induced on `{a_q..} ∪ {b_q..}` coincide,
    /// i.e. all cells `(i, j)` with `i >= q` and `j >= q` agree.
    pub fn agrees_on_suffix_block(&self, other: &Self, q: usize) -> bool {
        debug_assert_eq!((self.n_a, self.n_b), (other.n_a, other.n_b));
        for i in q..self.n_a {
            let base = self.words_per_row * i;
            for w in 0..self.words_per_row {
                // Trailing bits beyond n_b are zero in both operands, so the
                // unmasked high end of the complement mask is harmless.
                let mask = !col_prefix_mask(w, q.min(self.n_b));
                if (self.rows[base + w] ^ other.rows[base + w]) & mask != 0 {
                    return false;
                }
            }
        }
        true
    }

    /// Whether the four cells of `mv` form the switchable pattern here.
    pub fn can_apply(&self, mv: SwitchMove) -> bool {
        mv.a1 < mv.a2
            && mv.a2 < self.n_a
            && mv.b1 != mv.b2
            && mv.b1 < self.n_b
            && mv.b2 < self.n_b
            && self.has_edge(mv.a1, mv.b1)
            && self.has_edge(mv.a2, mv.b2)
            && !self.has_edge(mv.a1, mv.b2)
            && !self.has_edge(mv.a2, mv.b1)
    }

    /// Apply a switch move, validating the 4-cell pattern first.
    pub fn apply_switch(&mut self, mv: SwitchMove) -> Result<()> {
        if !self.can_apply(mv) {
            return Err(Error::InvalidMove {
                a1: mv.a1,
                a2: mv.a2,
                b1: mv.b1,
                b2: mv.b2,
            });
        }
        self.toggle_edge(mv.a1, mv.b1);
        self.toggle_edge(mv.a1, mv.b2);
        self.toggle_edge(mv.a2, mv.b1);
        self.toggle_edge(mv.a2, mv.b2);
        Ok(())
    }

    /// All valid switch moves in canonical order: ascending `a1`, then `a2`,
    /// then `b1`, then `b2`.
    pub fn valid_switches(&self) -> Vec<SwitchMove> {
        let mut out = Vec::new();
        for a1 in 0..self.n_a {
            for a2 in a1 + 1..self.n_a {
                for b1 in self.neighbors_a(a1) {
                    if self.has_edge(a2, b1) {
                        continue;
                    }
                    for b2 in self.neighbors_a(a2) {
                        if b2 != b1 && !self.has_edge(a1, b2) {
                            out.push(SwitchMove { a1, a2, b1, b2 });
                        }
                    }
                }
            }
        }
        // neighbors_a(a1) is ascending but the inner b2 loop must not break
        // b1-major ordering; restore the canonical (b1, b2) order.
        out.sort_unstable_by_key(|m| (m.a1, m.a2, m.b1, m.b2));
        out
    }
}

/// Gale–Ryser test: does the sequence admit at least one bipartite
/// realization with these exact labeled degrees?
pub fn is_bigraphic(d: &BipartiteDegreeSequence) -> bool {
    let (n_a, n_b) = (d.n_a(), d.n_b());
    if d.deg_a.iter().any(|&x| x > n_b) || d.deg_b.iter().any(|&x| x > n_a) {
        return false;
    }
    if d.sum_a() != d.sum_b() {
        return false;
    }
    let mut a_sorted = d.deg_a.clone();
    a_sorted.sort_unstable_by(|x, y| y.cmp(x));
    let mut prefix = 0usize;
    for k in 1..=n_a {
        prefix += a_sorted[k - 1];
        let cap: usize = d.deg_b.iter().map(|&b| b.min(k)).sum();
        if prefix > cap {
            return false;
        }
    }
    true
}

/// Exhaustively enumerate all realizations of `d`, in a deterministic
/// order, using the default cell budget.
///
/// This is the ground-truth oracle the rest of the library is tested
/// against, so it deliberately uses only cheap necessary-condition pruning
/// (column capacities and hand-off balance) rather than the Gale–Ryser
/// bound it is meant to validate.
pub fn enumerate_realizations(d: &BipartiteDegreeSequence) -> Result<Vec<BipartiteRealization>> {
    enumerate_realizations_with_limit(d, DEFAULT_ORACLE_LIMIT)
}

/// Same as [`enumerate_realizations`] with an explicit cell budget.
pub fn enumerate_realizations_with_limit(
    d: &BipartiteDegreeSequence,
    limit: usize,
) -> Result<Vec<BipartiteRealization>> {
    let (n_a, n_b) = (d.n_a(), d.n_b());
    let cells = n_a * n_b;
    if cells > limit {
        return Err(Error::OracleLimitExceeded { cells, limit });
    }
    if d.sum_a() != d.sum_b() {
        return Ok(Vec::new());
    }
    if d.deg_a.iter().any(|&x| x > n_b) || d.deg_b.iter().any(|&x| x > n_a) {
        return Ok(Vec::new());
    }
    let mut caps = d.deg_b.clone();
    let mut current = BipartiteRealization::empty(n_a, n_b);
    let mut out = Vec::new();
    // Degree still owed by rows i.. (suffix sums).
    let mut need_suffix = vec![0usize; n_a + 1];
    for i in (0..n_a).rev() {
        need_suffix[i] = need_suffix[i + 1] + d.deg_a[i];
    }
    dfs_row(d, 0, &need_suffix, &mut caps, &mut current, &mut out);
    Ok(out)
}

fn dfs_row(
    d: &BipartiteDegreeSequence,
    i: usize,
    need_suffix: &[usize],
    caps: &mut Vec<usize>,
    current: &mut BipartiteRealization,
    out: &mut Vec<BipartiteRealization>,
) {
    let n_a = d.n_a();
    if i == n_a {
        if caps.iter().all(|&c| c == 0) {
            out.push(current.clone());
        }
        return;
    }
    let rows_left = n_a - i - 1;
    if caps.iter().any(|&c| c > rows_left + 1) {
        return;
    }
    choose_cols(d, i, 0, d.deg_a[i], need_suffix, caps, current, out);
}

#[allow(clippy::too_many_arguments)]
fn choose_cols(
    d: &BipartiteDegreeSequence,
    i: usize,
    start: usize,
    remaining: usize,
    need_suffix: &[usize],
    caps: &mut Vec<usize>,
    current: &mut BipartiteRealization,
    out: &mut Vec<BipartiteRealization>,
) {
    let n_b = d.n_b();
    if remaining == 0 {
        let cap_total: usize = caps.iter().sum();
        if cap_total == need_suffix[i + 1] {
            dfs_row(d, i + 1, need_suffix, caps, current, out);
        }
        return;
    }
    if n_b - start < remaining {
        return;
    }
    for j in start..=n_b - remaining {
        if caps[j] > 0 {
            caps[j] -= 1;
            current.set_edge(i, j, true);
            choose_cols(d, i, j + 1, remaining - 1, need_suffix, caps, current, out);
            current.set_edge(i, j, false);
            caps[j] += 1;
        }
    }
}

/// The full realization space of a degree sequence, with the switch
/// adjacency structure. Intended for desk-scale instances; construction
/// honors the supplied oracle budget.
pub struct RealizationSpace {
    pub d: BipartiteDegreeSequence,
    pub states: Vec<BipartiteRealization>,
    index: HashMap<BipartiteRealization, usize>,
    /// `adj[s]` lists the states reachable from `states[s]` by one switch,
    /// one entry per valid move (entries are distinct by construction).
    pub adj: Vec<Vec<usize>>,
}

impl RealizationSpace {
    pub fn build(d: &BipartiteDegreeSequence, limit: usize) -> Result<Self> {
        let states = enumerate_realizations_with_limit(d, limit)?;
        let index: HashMap<_, _> = states
            .iter()
            .enumerate()
            .map(|(s, g)| (g.clone(), s))
            .collect();
        let mut adj = Vec::with_capacity(states.len());
        for g in &states {
            let mut nbrs = Vec::new();
            for mv in g.valid_switches() {
                let mut h = g.clone();
                h.apply_switch(mv).expect("enumerated move must be valid");
                nbrs.push(index[&h]);
            }
            adj.push(nbrs);
        }
        Ok(Self {
            d: d.clone(),
            states,
            index,
            adj,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, g: &BipartiteRealization) -> Option<usize> {
        self.index.get(g).copied()
    }

    /// Maximum over all state pairs of the switch distance (graph diameter
    /// of the realization space). BFS from every state.
    pub fn diameter(&self) -> usize {
        let n = self.states.len();
        let mut best = 0usize;
        let mut dist = vec![usize::MAX; n];
        for s in 0..n {
            dist.iter_mut().for_each(|x| *x = usize::MAX);
            dist[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &v in &self.adj[u] {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        q.push_back(v);
                    }
                }
            }
            let far = dist.iter().copied().max().unwrap_or(0);
            assert_ne!(far, usize::MAX, "realization space is disconnected");
            best = best.max(far);
        }
        best
    }
}

fn switch_delta(
    current: &BipartiteRealization,
    target: &BipartiteRealization,
    mv: SwitchMove,
) -> i64 {
    let mut delta = 0i64;
    for (i, j) in [
        (mv.a1, mv.b1),
        (mv.a1, mv.b2),
        (mv.a2, mv.b1),
        (mv.a2, mv.b2),
    ] {
        if current.has_edge(i, j) == target.has_edge(i, j) {
            delta += 1;
        } else {
            delta -= 1;
        }
    }
    delta
}

/// A sequence of switch moves transforming `x` into `y`.
///
/// Greedy strategy: repeatedly take the valid switch that shrinks the
/// symmetric difference the most (ties broken by canonical move order);
/// every accepted step shrinks it by at least 2, so the result has at most
/// `|x △ y| / 2` moves. If the greedy search stalls, fall back to
/// breadth-first search over the full realization space (subject to the
/// default oracle budget).
pub fn switch_sequence(
    x: &BipartiteRealization,
    y: &BipartiteRealization,
) -> Result<Vec<SwitchMove>> {
    if x.degree_sequence() != y.degree_sequence() {
        return Err(Error::DegreeMismatch {
            context: "switch sequences exist only between realizations of one sequence".into(),
        });
    }
    let mut current = x.clone();
    let mut moves = Vec::new();
    while current != *y {
        let mut best: Option<(i64, SwitchMove)> = None;
        for mv in current.valid_switches() {
            let delta = switch_delta(&current, y, mv);
            if best.is_none_or(|(bd, _)| delta < bd) {
                best = Some((delta, mv));
            }
        }
        match best {
            Some((delta, mv)) if delta <= -2 => {
                current.apply_switch(mv)?;
                moves.push(mv);
            }
            _ => return switch_sequence_bfs(x, y),
        }
    }
    Ok(moves)
}

/// Shortest switch sequence by breadth-first search over the realization
/// space. Only usable at oracle scale.
fn switch_sequence_bfs(
    x: &BipartiteRealization,
    y: &BipartiteRealization,
) -> Result<Vec<SwitchMove>> {
    let space = RealizationSpace::build(&x.degree_sequence(), DEFAULT_ORACLE_LIMIT)?;
    let start = space
        .index_of(x)
        .ok_or_else(|| Error::DomainError("start realization not in its own space".into()))?;
    let goal = space
        .index_of(y)
        .ok_or_else(|| Error::DomainError("target realization not in its own space".into()))?;
    let mut prev: Vec<Option<usize>> = vec![None; space.len()];
    let mut seen = vec![false; space.len()];
    seen[start] = true;
    let mut q = VecDeque::from([start]);
    while let Some(u) = q.pop_front() {
        if u == goal {
            break;
        }
        for &v in &space.adj[u] {
            if !seen[v] {
                seen[v] = true;
                prev[v] = Some(u);
                q.push_back(v);
            }
        }
    }
    if !seen[goal] {
        return Err(Error::DomainError(
            "realizations are not connected by switches".into(),
        ));
    }
    let mut order = vec![goal];
    while let Some(p) = prev[*order.last().unwrap()] {
        order.push(p);
    }
    order.reverse();
    let mut moves = Vec::with_capacity(order.len().saturating_sub(1));
    for win in order.windows(2) {
        moves.push(move_between(&space.states[win[0]], &space.states[win[1]])?);
    }
    Ok(moves)
}

/// The unique switch move between two realizations at symmetric
/// difference exactly 4.
pub fn move_between(from: &BipartiteRealization, to: &BipartiteRealization) -> Result<SwitchMove> {
    let mut diff: Vec<(usize, usize)> = Vec::with_capacity(4);
    for i in 0..from.n_a() {
        for j in 0..from.n_b() {
            if from.has_edge(i, j) != to.has_edge(i, j) {
                diff.push((i, j));
            }
        }
    }
    if diff.len() != 4 {
        return Err(Error::DomainError(format!(
            "realizations differ in {} cells, expected 4",
            diff.len()
        )));
    }
    let a1 = diff[0].0;
    let a2 = diff[3].0;
    let cols_a1: Vec<usize> = diff.iter().filter(|c| c.0 == a1).map(|c| c.1).collect();
    if a1 == a2 || cols_a1.len() != 2 {
        return Err(Error::DomainError(
            "cell difference does not form a switch rectangle".into(),
        ));
    }
    // Orient: b1 is the column where `from` has the edge at row a1.
    let (b1, b2) = if from.has_edge(a1, cols_a1[0]) {
        (cols_a1[0], cols_a1[1])
    } else {
        (cols_a1[1], cols_a1[0])
    };
    let mv = SwitchMove { a1, a2, b1, b2 };
    if from.can_apply(mv) {
        let mut check = from.clone();
        check.apply_switch(mv)?;
        if &check == to {
            return Ok(mv);
        }
    }
    Err(Error::DomainError(
        "cell difference does not form a switch rectangle".into(),
    ))
}
