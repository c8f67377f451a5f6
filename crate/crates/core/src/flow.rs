//! Flow representation of realizations relative to the staircase pattern.
//!
//! For a square instance (`nA == nB == n`) the difference between a
//! realization and the staircase graph is encoded as a 0/1 flow on the
//! network `F_n`: arcs run `a_i -> b_j` for `i <= j` and `b_j -> a_i` for
//! `j < i`. A forward arc carries flow when the staircase edge is missing;
//! a backward arc carries flow when an extra edge is present. Divergence at
//! each vertex then equals the vertex's excess (staircase degree minus
//! prescribed degree on the A side, the reverse on the B side), and the
//! correspondence between realizations and admissible flows is a bijection.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::bigraph::{halfgraph, BipartiteDegreeSequence, BipartiteRealization, Vertex};
use crate::error::{Error, Result};

/// A directed arc of the flow network `F_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlowArc {
    pub from: Vertex,
    pub to: Vertex,
}

impl FlowArc {
    pub fn forward(i: usize, j: usize) -> Self {
        Self {
            from: Vertex::A(i),
            to: Vertex::B(j),
        }
    }

    pub fn backward(j: usize, i: usize) -> Self {
        Self {
            from: Vertex::B(j),
            to: Vertex::A(i),
        }
    }

    /// The cell `(i, j)` of the adjacency matrix this arc toggles.
    pub fn cell(&self) -> (usize, usize) {
        match (self.from, self.to) {
            (Vertex::A(i), Vertex::B(j)) => (i, j),
            (Vertex::B(j), Vertex::A(i)) => (i, j),
            _ => unreachable!("arcs always join opposite sides"),
        }
    }

    /// Index of the tail vertex, ignoring the side.
    pub fn tail_index(&self) -> usize {
        match self.from {
            Vertex::A(i) | Vertex::B(i) => i,
        }
    }

    /// Index of the head vertex, ignoring the side.
    pub fn head_index(&self) -> usize {
        match self.to {
            Vertex::A(i) | Vertex::B(i) => i,
        }
    }

    /// Whether this arc exists in `F_n`: `a_i -> b_j` needs `i <= j`,
    /// `b_j -> a_i` needs `j < i`.
    pub fn is_legal(&self, n: usize) -> bool {
        match (self.from, self.to) {
            (Vertex::A(i), Vertex::B(j)) => i <= j && j < n,
            (Vertex::B(j), Vertex::A(i)) => j < i && i < n,
            _ => false,
        }
    }
}

/// Prescribed divergence per vertex: positive values are sources.
///
/// For a degree sequence `d` on a square instance the excess of `a_i` is
/// `(n - i) - degA[i]` and the excess of `b_j` is `degB[j] - (j + 1)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExcessProfile {
    pub per_a: Vec<i64>,
    pub per_b: Vec<i64>,
}

impl ExcessProfile {
    pub fn n(&self) -> usize {
        self.per_a.len()
    }

    pub fn get(&self, v: Vertex) -> i64 {
        match v {
            Vertex::A(i) => self.per_a[i],
            Vertex::B(j) => self.per_b[j],
        }
    }

    /// Total positive excess; equals half the L1 distance between the
    /// sequence and the staircase sequence.
    pub fn k(&self) -> i64 {
        self.per_a
            .iter()
            .chain(&self.per_b)
            .filter(|&&x| x > 0)
            .sum()
    }

    /// Sum over all vertices; zero whenever A and B degree totals agree.
    pub fn total(&self) -> i64 {
        self.per_a.iter().sum::<i64>() + self.per_b.iter().sum::<i64>()
    }

    /// Vertices with positive excess, A side first.
    pub fn sources(&self) -> Vec<(Vertex, i64)> {
        let mut out = Vec::new();
        for (i, &x) in self.per_a.iter().enumerate() {
            if x > 0 {
                out.push((Vertex::A(i), x));
            }
        }
        for (j, &x) in self.per_b.iter().enumerate() {
            if x > 0 {
                out.push((Vertex::B(j), x));
            }
        }
        out
    }
}

/// Excess profile of a degree sequence relative to the staircase sequence.
/// Requires a square instance.
pub fn excess_profile(d: &BipartiteDegreeSequence) -> Result<ExcessProfile> {
    let n = d.n_a();
    if d.n_b() != n {
        return Err(Error::DomainError(format!(
            "flow representation needs a square instance, got {}x{}",
            d.n_a(),
            d.n_b()
        )));
    }
    let per_a = (0..n).map(|i| (n - i) as i64 - d.deg_a[i] as i64).collect();
    let per_b = (0..n).map(|j| d.deg_b[j] as i64 - (j + 1) as i64).collect();
    Ok(ExcessProfile { per_a, per_b })
}

/// A 0/1 flow on the network `F_n`, tagged with its divergence profile.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowRep {
    pub n: usize,
    pub arcs: BTreeSet<FlowArc>,
    pub excess: ExcessProfile,
}

impl FlowRep {
    /// Divergence (out minus in) of every vertex under `arcs`.
    pub fn divergence(n: usize, arcs: &BTreeSet<FlowArc>) -> ExcessProfile {
        let mut per_a = vec![0i64; n];
        let mut per_b = vec![0i64; n];
        for arc in arcs {
            match arc.from {
                Vertex::A(i) => per_a[i] += 1,
                Vertex::B(j) => per_b[j] += 1,
            }
            match arc.to {
                Vertex::A(i) => per_a[i] -= 1,
                Vertex::B(j) => per_b[j] -= 1,
            }
        }
        ExcessProfile { per_a, per_b }
    }

    /// Build from an arc set, deriving the excess from the divergence.
    pub fn from_arcs(n: usize, arcs: BTreeSet<FlowArc>) -> Result<Self> {
        for arc in &arcs {
            if !arc.is_legal(n) {
                return Err(Error::InadmissibleFlow(format!(
                    "arc {arc:?} does not exist in the network of order {n}"
                )));
            }
        }
        let excess = Self::divergence(n, &arcs);
        Ok(Self { n, arcs, excess })
    }

    /// Check arc legality and that the divergence matches the recorded
    /// excess profile.
    pub fn validate(&self) -> Result<()> {
        if self.excess.per_a.len() != self.n || self.excess.per_b.len() != self.n {
            return Err(Error::InadmissibleFlow(
                "excess profile size differs from the network order".into(),
            ));
        }
        for arc in &self.arcs {
            if !arc.is_legal(self.n) {
                return Err(Error::InadmissibleFlow(format!(
                    "arc {arc:?} does not exist in the network of order {}",
                    self.n
                )));
            }
        }
        let div = Self::divergence(self.n, &self.arcs);
        if div != self.excess {
            return Err(Error::InadmissibleFlow(
                "arc divergence does not match the recorded excess profile".into(),
            ));
        }
        Ok(())
    }
}

/// Flow encoding of a realization relative to the staircase graph:
/// a forward arc per missing staircase edge, a backward arc per extra edge.
pub fn flow_representation(g: &BipartiteRealization) -> Result<FlowRep> {
    let n = g.n_a();
    if g.n_b() != n {
        return Err(Error::DomainError(format!(
            "flow representation needs a square instance, got {}x{}",
            g.n_a(),
            g.n_b()
        )));
    }
    let mut arcs = BTreeSet::new();
    for i in 0..n {
        for j in 0..n {
            if i <= j {
                if !g.has_edge(i, j) {
                    arcs.insert(FlowArc::forward(i, j));
                }
            } else if g.has_edge(i, j) {
                arcs.insert(FlowArc::backward(j, i));
            }
        }
    }
    let rep = FlowRep::from_arcs(n, arcs)?;
    debug_assert_eq!(rep.excess, excess_profile(&g.degree_sequence())?);
    Ok(rep)
}

/// Invert the flow encoding: flip the staircase graph's cells along the
/// arcs. Validates the flow first.
pub fn flow_to_realization(f: &FlowRep) -> Result<BipartiteRealization> {
    f.validate()?;
    let mut g = halfgraph(f.n);
    for arc in &f.arcs {
        let (i, j) = arc.cell();
        match (arc.from, arc.to) {
            (Vertex::A(_), Vertex::B(_)) => g.set_edge(i, j, false),
            (Vertex::B(_), Vertex::A(_)) => g.set_edge(i, j, true),
            _ => unreachable!(),
        }
    }
    Ok(g)
}

/// All arcs of the full network `F_n`, in deterministic order.
pub fn full_network(n: usize) -> Vec<FlowArc> {
    let mut arcs = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in i..n {
            arcs.push(FlowArc::forward(i, j));
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            arcs.push(FlowArc::backward(j, i));
        }
    }
    arcs
}

/// Outcome of a feasibility search on a restricted network.
#[derive(Debug, Clone)]
pub enum FlowSearch {
    Feasible(FlowRep),
    /// No flow meets the demand: `cut` is a vertex set whose departing
    /// capacity falls `deficit` units short of its net demand.
    Infeasible {
        cut: Vec<Vertex>,
        deficit: i64,
    },
}

/// Find a 0/1 flow on the given arcs whose divergence equals `demand`,
/// via augmenting-path maximum flow from a super-source to a super-sink.
///
/// When infeasible, the returned cut is the set of network vertices
/// reachable from the super-source in the final residual graph; the arcs
/// leaving that set cannot carry the demanded supply out.
pub fn feasible_flow(n: usize, demand: &ExcessProfile, network: &[FlowArc]) -> Result<FlowSearch> {
    if demand.per_a.len() != n || demand.per_b.len() != n {
        return Err(Error::DomainError(
            "demand profile size differs from the network order".into(),
        ));
    }
    if demand.total() != 0 {
        return Err(Error::InadmissibleFlow(format!(
            "demand must balance to zero, found {}",
            demand.total()
        )));
    }
    for arc in network {
        if !arc.is_legal(n) {
            return Err(Error::InadmissibleFlow(format!(
                "arc {arc:?} does not exist in the network of order {n}"
            )));
        }
    }
    // Node ids: 0 = source, 1 = sink, 2..2+n = A side, 2+n..2+2n = B side.
    let id = |v: Vertex| -> usize {
        match v {
            Vertex::A(i) => 2 + i,
            Vertex::B(j) => 2 + n + j,
        }
    };
    let mut mf = MaxFlow::new(2 + 2 * n);
    let mut supply = 0i64;
    for i in 0..n {
        for (v, x) in [
            (Vertex::A(i), demand.per_a[i]),
            (Vertex::B(i), demand.per_b[i]),
        ] {
            if x > 0 {
                mf.add_edge(0, id(v), x);
                supply += x;
            } else if x < 0 {
                mf.add_edge(id(v), 1, -x);
            }
        }
    }
    let mut arc_edges = Vec::with_capacity(network.len());
    for arc in network {
        let e = mf.add_edge(id(arc.from), id(arc.to), 1);
        arc_edges.push((e, *arc));
    }
    let pushed = mf.run(0, 1);
    if pushed == supply {
        let mut arcs = BTreeSet::new();
        for &(e, arc) in &arc_edges {
            if mf.edge_flow(e) > 0 {
                arcs.insert(arc);
            }
        }
        let rep = FlowRep {
            n,
            arcs,
            excess: demand.clone(),
        };
        rep.validate()?;
        Ok(FlowSearch::Feasible(rep))
    } else {
        let reachable = mf.residual_reachable(0);
        let mut cut = Vec::new();
        for i in 0..n {
            if reachable[id(Vertex::A(i))] {
                cut.push(Vertex::A(i));
            }
        }
        for j in 0..n {
            if reachable[id(Vertex::B(j))] {
                cut.push(Vertex::B(j));
            }
        }
        Ok(FlowSearch::Infeasible {
            cut,
            deficit: supply - pushed,
        })
    }
}

/// Plain augmenting-path max flow (breadth-first search, unit-ish
/// capacities, desk-scale networks).
struct MaxFlow {
    first: Vec<Option<usize>>,
    to: Vec<usize>,
    next: Vec<Option<usize>>,
    cap: Vec<i64>,
}

impl MaxFlow {
    fn new(nodes: usize) -> Self {
        Self {
            first: vec![None; nodes],
            to: Vec::new(),
            next: Vec::new(),
            cap: Vec::new(),
        }
    }

    /// Add a directed edge and its zero-capacity reverse; returns the edge
    /// index (reverse is at `index ^ 1`).
    fn add_edge(&mut self, u: usize, v: usize, c: i64) -> usize {
        let e = self.to.len();
        self.to.push(v);
        self.cap.push(c);
        self.next.push(self.first[u]);
        self.first[u] = Some(e);
        self.to.push(u);
        self.cap.push(0);
        self.next.push(self.first[v]);
        self.first[v] = Some(e + 1);
        e
    }

    fn edge_flow(&self, e: usize) -> i64 {
        // Flow pushed along e equals the reverse edge's gained capacity.
        self.cap[e ^ 1]
    }

    fn run(&mut self, s: usize, t: usize) -> i64 {
        let mut total = 0;
        loop {
            let mut pred: Vec<Option<usize>> = vec![None; self.first.len()];
            let mut seen = vec![false; self.first.len()];
            seen[s] = true;
            let mut q = std::collections::VecDeque::from([s]);
            'bfs: while let Some(u) = q.pop_front() {
                let mut it = self.first[u];
                while let Some(e) = it {
                    let v = self.to[e];
                    if !seen[v] && self.cap[e] > 0 {
                        seen[v] = true;
                        pred[v] = Some(e);
                        if v == t {
                            break 'bfs;
                        }
                        q.push_back(v);
                    }
                    it = self.next[e];
                }
            }
            if !seen[t] {
                return total;
            }
            let mut bottleneck = i64::MAX;
            let mut v = t;
            while let Some(e) = pred[v] {
                bottleneck = bottleneck.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while let Some(e) = pred[v] {
                self.cap[e] -= bottleneck;
                self.cap[e ^ 1] += bottleneck;
                v = self.to[e ^ 1];
            }
            total += bottleneck;
        }
    }

    fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.first.len()];
        seen[s] = true;
        let mut q = std::collections::VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            let mut it = self.first[u];
            while let Some(e) = it {
                let v = self.to[e];
                if !seen[v] && self.cap[e] > 0 {
                    seen[v] = true;
                    q.push_back(v);
                }
                it = self.next[e];
            }
        }
        seen
    }
}

/// Build a buffer realization between `x` and `y` for the window
/// `[i, i + z)`: the result agrees with `y` on the subgraph induced by the
/// first `i` vertices of each side, and with `x` on the subgraph induced by
/// vertices `i + z` onward.
///
/// The buffer's flow copies `y`'s flow inside the prefix region and `x`'s
/// inside the far region, then solves a feasibility problem for the
/// remaining arcs. Sources sit at prefix vertices whose `y`-flow leaves the
/// prefix; sinks at far vertices whose `x`-flow enters the far region. The
/// first attempt forbids direct prefix-to-far arcs; when that restricted
/// network is infeasible (possible for narrow windows) the direct arcs are
/// allowed as a fallback before reporting failure.
pub fn build_buffer(
    x: &BipartiteRealization,
    y: &BipartiteRealization,
    i: usize,
    z: usize,
) -> Result<BipartiteRealization> {
    let n = x.n_a();
    if x.degree_sequence() != y.degree_sequence() {
        return Err(Error::DegreeMismatch {
            context: "buffer endpoints must realize the same sequence".into(),
        });
    }
    if i > n {
        return Err(Error::DomainError(format!(
            "window start {i} exceeds the instance order {n}"
        )));
    }
    let d = x.degree_sequence();
    let excess = excess_profile(&d)?;
    let fx = flow_representation(x)?;
    let fy = flow_representation(y)?;
    let far_start = (i + z).min(n);

    // Demand: prefix vertices must emit what y's flow sends out of the
    // prefix; far vertices must absorb what x's flow sends in; the middle
    // carries its own excess.
    let mut demand = ExcessProfile {
        per_a: vec![0; n],
        per_b: vec![0; n],
    };
    for idx in i..far_start {
        demand.per_a[idx] = excess.per_a[idx];
        demand.per_b[idx] = excess.per_b[idx];
    }
    for arc in &fy.arcs {
        if arc.tail_index() < i && arc.head_index() >= i {
            match arc.from {
                Vertex::A(t) => demand.per_a[t] += 1,
                Vertex::B(t) => demand.per_b[t] += 1,
            }
        }
    }
    for arc in &fx.arcs {
        if arc.head_index() >= far_start && arc.tail_index() < far_start {
            match arc.to {
                Vertex::A(h) => demand.per_a[h] -= 1,
                Vertex::B(h) => demand.per_b[h] -= 1,
            }
        }
    }

    let middle_arcs: Vec<FlowArc> = full_network(n)
        .into_iter()
        .filter(|arc| {
            let inside_prefix = arc.tail_index() < i && arc.head_index() < i;
            let inside_far = arc.tail_index() >= far_start && arc.head_index() >= far_start;
            !inside_prefix && !inside_far
        })
        .collect();
    let strict: Vec<FlowArc> = middle_arcs
        .iter()
        .copied()
        .filter(|arc| !(arc.tail_index() < i && arc.head_index() >= far_start))
        .collect();

    let solved = match feasible_flow(n, &demand, &strict)? {
        FlowSearch::Feasible(w) => w,
        FlowSearch::Infeasible { .. } => match feasible_flow(n, &demand, &middle_arcs)? {
            FlowSearch::Feasible(w) => w,
            FlowSearch::Infeasible { cut, deficit } => {
                return Err(Error::BufferInfeasible {
                    start: i,
                    width: z,
                    detail: format!(
                        "demand exceeds departing capacity by {deficit} at cut {cut:?}"
                    ),
                });
            }
        },
    };

    let mut arcs = BTreeSet::new();
    for arc in &fy.arcs {
        if arc.tail_index() < i && arc.head_index() < i {
            arcs.insert(*arc);
        }
    }
    for arc in &fx.arcs {
        if arc.tail_index() >= far_start && arc.head_index() >= far_start {
            arcs.insert(*arc);
        }
    }
    arcs.extend(solved.arcs.iter().copied());
    let rep = FlowRep::from_arcs(n, arcs)?;
    let buffer = flow_to_realization(&rep)?;
    debug_assert_eq!(buffer.degree_sequence(), d);
    debug_assert!(buffer.agrees_on_prefix_block(y, i));
    debug_assert!(buffer.agrees_on_suffix_block(x, far_start));
    Ok(buffer)
}

/// Exhaustively enumerate every 0/1 flow on `F_n` with the given
/// divergence, independently of the realization oracle.
///
/// Vertices are processed in the topological order `a_0, b_0, a_1, b_1,
/// ...`; at each vertex the search branches over the subset of earlier
/// vertices that still owe out-flow and have an arc here.
pub fn enumerate_flows(n: usize, demand: &ExcessProfile) -> Result<Vec<FlowRep>> {
    if demand.per_a.len() != n || demand.per_b.len() != n {
        return Err(Error::DomainError(
            "demand profile size differs from the network order".into(),
        ));
    }
    if demand.total() != 0 {
        return Ok(Vec::new());
    }
    // pending[v] = out-arcs still owed by v; defined once v's in-arcs are
    // fixed. Vertex order: even slots a_{s/2}, odd slots b_{(s-1)/2}.
    let slots = 2 * n;
    let vertex_at = |slot: usize| -> Vertex {
        if slot.is_multiple_of(2) {
            Vertex::A(slot / 2)
        } else {
            Vertex::B(slot / 2)
        }
    };
    // Arc from slot u to slot v (u < v) exists iff sides differ and the
    // index pair is legal; legality reduces to "u earlier than v".
    let has_arc = |u: usize, v: usize| -> bool { u < v && (u % 2) != (v % 2) };
    let mut pending = vec![0i64; slots];
    let mut out = Vec::new();
    let mut chosen: Vec<FlowArc> = Vec::new();

    #[allow(clippy::too_many_arguments)]
    fn dfs(
        slot: usize,
        slots: usize,
        n: usize,
        demand: &ExcessProfile,
        pending: &mut Vec<i64>,
        chosen: &mut Vec<FlowArc>,
        out: &mut Vec<FlowRep>,
        vertex_at: &dyn Fn(usize) -> Vertex,
        has_arc: &dyn Fn(usize, usize) -> bool,
    ) {
        if slot == slots {
            if pending.iter().all(|&p| p == 0) {
                let arcs: BTreeSet<FlowArc> = chosen.iter().copied().collect();
                out.push(FlowRep {
                    n,
                    arcs,
                    excess: demand.clone(),
                });
            }
            return;
        }
        let v = vertex_at(slot);
        // Earlier vertices that can still send here.
        let candidates: Vec<usize> = (0..slot)
            .filter(|&u| has_arc(u, slot) && pending[u] > 0)
            .collect();
        // Remaining heads available to a tail u after this slot:
        // used to prune tails that could never discharge.
        let heads_after = |u: usize, from_slot: usize| -> i64 {
            ((from_slot..slots).filter(|&w| has_arc(u, w)).count()) as i64
        };
        let m = candidates.len();
        assert!(m < 60, "flow enumeration only supports desk-scale demands");
        for mask in 0u64..(1u64 << m) {
            let take = mask.count_ones() as i64;
            let div = demand.get(v);
            let new_pending_v = div + take;
            if new_pending_v < 0 {
                continue;
            }
            // Apply
            for (bit, &u) in candidates.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    pending[u] -= 1;
                    chosen.push(FlowArc {
                        from: vertex_at(u),
                        to: v,
                    });
                }
            }
            pending[slot] = new_pending_v;
            // Prune: every earlier vertex must still be dischargeable.
            let ok = (0..=slot).all(|u| pending[u] <= heads_after(u, slot + 1));
            if ok {
                dfs(
                    slot + 1,
                    slots,
                    n,
                    demand,
                    pending,
                    chosen,
                    out,
                    vertex_at,
                    has_arc,
                );
            }
            // Undo
            pending[slot] = 0;
            for (bit, &u) in candidates.iter().enumerate() {
                if mask >> bit & 1 == 1 {
                    pending[u] += 1;
                    chosen.pop();
                }
            }
        }
    }

    dfs(
        0,
        slots,
        n,
        demand,
        &mut pending,
        &mut chosen,
        &mut out,
        &vertex_at,
        &has_arc,
    );
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigraph::{enumerate_realizations, enumerate_realizations_with_limit, hk_sequence};

    #[test]
    fn staircase_realization_has_empty_flow() {
        for n in 1..=5 {
            let f = flow_representation(&halfgraph(n)).unwrap();
            assert!(
                f.arcs.is_empty(),
                "staircase graph is the zero flow at n={n}"
            );
            assert!(f.excess.per_a.iter().all(|&x| x == 0));
        }
    }

    #[test]
    fn perturbed_staircase_excess_is_one_source_one_sink() {
        for n in 2..=6 {
            for k in 1..n {
                let e = excess_profile(&hk_sequence(n, k)).unwrap();
                assert_eq!(e.per_a[0], k as i64, "a_0 is the source");
                assert_eq!(e.per_b[n - 1], -(k as i64), "b_{} is the sink", n - 1);
                assert_eq!(e.k(), k as i64);
                assert_eq!(e.total(), 0);
                assert!(e.per_a[1..].iter().all(|&x| x == 0));
                assert!(e.per_b[..n - 1].iter().all(|&x| x == 0));
            }
        }
    }

    #[test]
    fn flow_round_trip_is_identity() {
        for (n, k) in [(3, 1), (4, 1), (4, 2), (5, 2)] {
            let d = hk_sequence(n, k);
            for g in enumerate_realizations(&d).unwrap() {
                let f = flow_representation(&g).unwrap();
                f.validate().unwrap();
                let back = flow_to_realization(&f).unwrap();
                assert_eq!(back, g, "flow encoding must invert exactly");
            }
        }
    }

    #[test]
    fn network_has_n_squared_arcs_and_is_a_dag() {
        for n in 1..=6 {
            let arcs = full_network(n);
            assert_eq!(arcs.len(), n * n);
            for arc in &arcs {
                assert!(arc.is_legal(n));
                // Tail precedes head in the interleaved order, so the
                // network is acyclic.
                let tail_slot = match arc.from {
                    Vertex::A(i) => 2 * i,
                    Vertex::B(j) => 2 * j + 1,
                };
                let head_slot = match arc.to {
                    Vertex::A(i) => 2 * i,
                    Vertex::B(j) => 2 * j + 1,
                };
                assert!(
                    tail_slot < head_slot,
                    "arc {arc:?} breaks the topological order"
                );
            }
        }
    }

    #[test]
    fn flow_count_matches_realization_count() {
        for (n, k) in [(2, 1), (3, 1), (4, 1), (4, 2), (5, 1)] {
            let d = hk_sequence(n, k);
            let realizations = enumerate_realizations(&d).unwrap();
            let flows = enumerate_flows(n, &excess_profile(&d).unwrap()).unwrap();
            assert_eq!(
                flows.len(),
                realizations.len(),
                "bijection count failed for n={n}, k={k}"
            );
            // The map flow -> realization is injective onto the oracle set.
            let mut images: Vec<BipartiteRealization> = flows
                .iter()
                .map(|f| flow_to_realization(f).unwrap())
                .collect();
            images.sort();
            images.dedup();
            assert_eq!(images.len(), realizations.len());
            let mut expected = realizations.clone();
            expected.sort();
            assert_eq!(images, expected);
        }
    }

    #[test]
    fn feasibility_search_solves_the_standard_demand() {
        for (n, k) in [(3, 1), (5, 2), (6, 3)] {
            let demand = excess_profile(&hk_sequence(n, k)).unwrap();
            match feasible_flow(n, &demand, &full_network(n)).unwrap() {
                FlowSearch::Feasible(f) => {
                    f.validate().unwrap();
                    let g = flow_to_realization(&f).unwrap();
                    assert_eq!(g.degree_sequence(), hk_sequence(n, k));
                }
                FlowSearch::Infeasible { .. } => panic!("demand must be feasible at n={n}, k={k}"),
            }
        }
    }

    #[test]
    fn infeasible_demand_returns_a_violated_cut() {
        // a_1 must emit two units but its only arc is a_1 -> b_1.
        let demand = ExcessProfile {
            per_a: vec![0, 2],
            per_b: vec![0, -2],
        };
        match feasible_flow(2, &demand, &full_network(2)).unwrap() {
            FlowSearch::Infeasible { cut, deficit } => {
                assert!(
                    cut.contains(&Vertex::A(1)),
                    "cut must contain the stuck source"
                );
                assert_eq!(deficit, 1);
            }
            FlowSearch::Feasible(_) => panic!("demand is impossible"),
        }
    }

    #[test]
    fn buffers_agree_with_both_endpoints_on_their_regions() {
        let d = hk_sequence(5, 1);
        let all = enumerate_realizations_with_limit(&d, 25).unwrap();
        assert_eq!(all.len(), 34);
        let z = 5; // comfortably wide window for k = 1
        for x in &all {
            for y in &all {
                for i in 0..=2 {
                    let t =
                        build_buffer(x, y, i, z).expect("wide windows are always feasible for k=1");
                    assert!(
                        t.agrees_on_prefix_block(y, i),
                        "buffer must copy y on the first {i} vertices"
                    );
                    assert!(
                        t.agrees_on_suffix_block(x, (i + z).min(5)),
                        "buffer must copy x beyond the window"
                    );
                    assert_eq!(t.degree_sequence(), d);
                }
            }
        }
    }

    #[test]
    fn narrow_window_buffers_fall_back_but_still_satisfy_contracts() {
        let d = hk_sequence(6, 1);
        let all = enumerate_realizations_with_limit(&d, 36).unwrap();
        assert_eq!(all.len(), 89);
        // z = 4 is below the guaranteed width for k = 1; the fallback
        // network (allowing direct prefix-to-far arcs) must cover it.
        let z = 4;
        for x in all.iter().step_by(7) {
            for y in all.iter().step_by(5) {
                for i in 0..=1 {
                    let t = build_buffer(x, y, i, z).expect("fallback must succeed at z=4, k=1");
                    assert!(t.agrees_on_prefix_block(y, i));
                    assert!(t.agrees_on_suffix_block(x, i + z));
                }
            }
        }
    }
}
