//! Transfer-matrix counting for the single-source perturbed staircase
//! sequences.
//!
//! Restrict an admissible flow to the first `l` columns (vertices
//! `a_0..a_{l-1}`, `b_0..b_{l-1}`). Each prefix vertex still owes some
//! arcs to later vertices: its *pending* count is its excess plus in-arcs
//! minus out-arcs so far (the source `a_0` carries excess `k`). The *type*
//! of the restriction is the pair of multisets of positive pending counts
//! on the two sides; the total pending is always exactly `k`.
//!
//! Extending a flow by one column multiplies type-indicator vectors by a
//! fixed nonnegative matrix. Realization counts follow from
//! `v^T P^(n-1) w`, where `v` covers the two ways the first column can
//! look and `w` selects prefixes completable by the sink column.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::bigraph::Vertex;
use crate::error::{Error, Result};
use crate::flow::{FlowArc, FlowRep};

/// Multiset pair of positive pending counts (A side, B side), each sorted
/// descending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FlowType {
    pub r: Vec<usize>,
    pub q: Vec<usize>,
}

impl FlowType {
    pub fn new(mut r: Vec<usize>, mut q: Vec<usize>) -> Self {
        assert!(
            r.iter().chain(&q).all(|&x| x > 0),
            "pending multisets list positive counts only"
        );
        r.sort_unstable_by(|a, b| b.cmp(a));
        q.sort_unstable_by(|a, b| b.cmp(a));
        Self { r, q }
    }

    pub fn total(&self) -> usize {
        self.r.iter().sum::<usize>() + self.q.iter().sum::<usize>()
    }
}

fn partitions(m: usize) -> Vec<Vec<usize>> {
    fn rec(m: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if m == 0 {
            out.push(cur.clone());
            return;
        }
        for first in (1..=m.min(max)).rev() {
            cur.push(first);
            rec(m - first, first, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, m.max(1), &mut Vec::new(), &mut out);
    out
}

/// All types with total pending `k`, in canonical order: ascending by the
/// A-side total, then by the A-side tuple, then by the B-side tuple.
pub fn types(k: usize) -> Vec<FlowType> {
    assert!(k >= 1, "types are defined for positive defect");
    let mut out = Vec::new();
    for m in 0..=k {
        for r in partitions(m) {
            for q in partitions(k - m) {
                out.push(FlowType::new(r.clone(), q));
            }
        }
    }
    out.sort_by_key(|t| (t.r.iter().sum::<usize>(), t.r.clone(), t.q.clone()));
    out
}

/// Type of a prefix flow: `arcs` must lie inside the first `ell` columns;
/// the source `a_0` carries excess `k`, everything else zero. Errors when
/// an arc leaves the prefix or some pending count goes negative (the arc
/// set is then not the restriction of any admissible flow).
pub fn type_of(arcs: &BTreeSet<FlowArc>, ell: usize, k: usize) -> Result<FlowType> {
    let mut pend_a = vec![0i64; ell];
    let mut pend_b = vec![0i64; ell];
    if ell > 0 {
        pend_a[0] = k as i64;
    }
    for arc in arcs {
        let (t, h) = (arc.tail_index(), arc.head_index());
        if t >= ell || h >= ell {
            return Err(Error::DomainError(format!(
                "arc {arc:?} leaves the first {ell} columns"
            )));
        }
        match arc.from {
            Vertex::A(i) => pend_a[i] -= 1,
            Vertex::B(j) => pend_b[j] -= 1,
        }
        match arc.to {
            Vertex::A(i) => pend_a[i] += 1,
            Vertex::B(j) => pend_b[j] += 1,
        }
    }
    if pend_a.iter().chain(&pend_b).any(|&x| x < 0) {
        return Err(Error::InadmissibleFlow(
            "a prefix vertex emits more than its excess plus inflow".into(),
        ));
    }
    let r: Vec<usize> = pend_a
        .iter()
        .filter(|&&x| x > 0)
        .map(|&x| x as usize)
        .collect();
    let q: Vec<usize> = pend_b
        .iter()
        .filter(|&&x| x > 0)
        .map(|&x| x as usize)
        .collect();
    Ok(FlowType::new(r, q))
}

/// Deterministic prefix flow of the requested type on the first `2k`
/// columns (every type is realizable there).
///
/// Layout: the largest A-side pending stays at the source; every other
/// A-side pending `r` is fed through `r` fresh relay columns; each B-side
/// pending gets one unit straight from the source plus relay pairs for the
/// rest. Columns are consumed left to right so all arcs respect the
/// network's orientation.
pub fn witness_flow(k: usize, tau: &FlowType) -> Result<FlowRep> {
    if k == 0 {
        return Err(Error::DomainError(
            "witness flows are defined for positive defect".into(),
        ));
    }
    if tau.total() != k {
        return Err(Error::DomainError(format!(
            "type has total pending {}, expected {k}",
            tau.total()
        )));
    }
    let n = 2 * k;
    let mut arcs: BTreeSet<FlowArc> = BTreeSet::new();
    // Column 0 hosts the source a_0; fresh columns are handed out from 1.
    let mut cursor = 1usize;
    let fresh = |cursor: &mut usize| -> usize {
        let c = *cursor;
        *cursor += 1;
        assert!(c < n, "witness layout exceeded the 2k column budget");
        c
    };
    // A-side pendings beyond the first stay on dedicated target vertices,
    // each fed through its own relays.
    for &r in tau.r.iter().skip(1) {
        let relays: Vec<usize> = (0..r).map(|_| fresh(&mut cursor)).collect();
        let target = fresh(&mut cursor);
        for w in relays {
            arcs.insert(FlowArc::forward(0, w));
            arcs.insert(FlowArc::backward(w, target));
        }
    }
    // B-side pendings: one unit arrives straight from the source, the rest
    // through relay pairs (source -> b relay -> a relay -> target).
    for &q in &tau.q {
        let mut pairs = Vec::new();
        for _ in 1..q {
            let w = fresh(&mut cursor);
            let r = fresh(&mut cursor);
            pairs.push((w, r));
        }
        let target = fresh(&mut cursor);
        arcs.insert(FlowArc::forward(0, target));
        for (w, r) in pairs {
            arcs.insert(FlowArc::forward(0, w));
            arcs.insert(FlowArc::backward(w, r));
            arcs.insert(FlowArc::forward(r, target));
        }
    }
    let built = type_of(&arcs, n, k)?;
    if &built != tau {
        return Err(Error::DomainError(format!(
            "witness construction produced type {built:?}, wanted {tau:?}"
        )));
    }
    FlowRep::from_arcs(n, arcs)
}

/// Column-extension counts between types.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeMatrix {
    pub k: usize,
    pub order: Vec<FlowType>,
    /// `entries[i][j]` counts the ways a prefix of type `order[i]` extends
    /// by one column into type `order[j]`.
    pub entries: Vec<Vec<u64>>,
}

impl TypeMatrix {
    pub fn dim(&self) -> usize {
        self.order.len()
    }

    pub fn index_of(&self, t: &FlowType) -> Option<usize> {
        self.order.iter().position(|x| x == t)
    }
}

/// Extension row of a concrete prefix flow: enumerate every admissible set
/// of arcs incident to the next column and tally the resulting types.
fn extension_row(
    arcs: &BTreeSet<FlowArc>,
    col: usize,
    k: usize,
    index: &BTreeMap<FlowType, usize>,
) -> Result<Vec<u64>> {
    let mut pend_a = vec![0i64; col];
    let mut pend_b = vec![0i64; col];
    pend_a[0] = k as i64;
    for arc in arcs {
        match arc.from {
            Vertex::A(i) => pend_a[i] -= 1,
            Vertex::B(j) => pend_b[j] -= 1,
        }
        match arc.to {
            Vertex::A(i) => pend_a[i] += 1,
            Vertex::B(j) => pend_b[j] += 1,
        }
    }
    // Only vertices that still owe flow can send into the new column.
    let senders_b: Vec<usize> = (0..col).filter(|&j| pend_b[j] > 0).collect();
    let senders_a: Vec<usize> = (0..col).filter(|&i| pend_a[i] > 0).collect();
    let mut row = vec![0u64; index.len()];
    let nb = senders_b.len();
    let na = senders_a.len();
    assert!(nb + na < 32, "extension enumeration is desk-scale only");
    for mask_b in 0u64..(1u64 << nb) {
        for mask_a in 0u64..(1u64 << na) {
            let received = mask_b.count_ones() as i64;
            for fwd in 0..=1i64 {
                if fwd == 1 && received == 0 {
                    continue; // the new A-vertex cannot emit what it lacks
                }
                let mut ext = arcs.clone();
                for (bit, &j) in senders_b.iter().enumerate() {
                    if mask_b >> bit & 1 == 1 {
                        ext.insert(FlowArc::backward(j, col));
                    }
                }
                for (bit, &i) in senders_a.iter().enumerate() {
                    if mask_a >> bit & 1 == 1 {
                        ext.insert(FlowArc::forward(i, col));
                    }
                }
                if fwd == 1 {
                    ext.insert(FlowArc::forward(col, col));
                }
                let Ok(t) = type_of(&ext, col + 1, k) else {
                    continue;
                };
                let Some(&j) = index.get(&t) else {
                    return Err(Error::DomainError(format!(
                        "extension produced unknown type {t:?}"
                    )));
                };
                row[j] += 1;
            }
        }
    }
    Ok(row)
}

/// The transfer matrix for defect `k`, computed from deterministic witness
/// flows at column `2k`. The extension count depends only on the type, so
/// any witness of the type gives the same row.
pub fn type_matrix(k: usize) -> Result<TypeMatrix> {
    if k == 0 {
        return Err(Error::DomainError(
            "the transfer matrix is defined for positive defect".into(),
        ));
    }
    let order = types(k);
    let index: BTreeMap<FlowType, usize> = order
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, t)| (t, i))
        .collect();
    let mut entries = Vec::with_capacity(order.len());
    for tau in &order {
        let witness = witness_flow(k, tau)?;
        entries.push(extension_row(&witness.arcs, 2 * k, k, &index)?);
    }
    Ok(TypeMatrix { k, order, entries })
}

/// Number of realizations of the single-source perturbed staircase
/// sequence, by transfer-matrix recursion. `k = 0` gives the rigid
/// staircase (exactly one realization); requires `k <= n`.
pub fn count_hk_matrix(n: usize, k: usize) -> Result<BigUint> {
    if n == 0 {
        return Err(Error::DomainError(
            "the instance needs at least one column".into(),
        ));
    }
    if k > n {
        return Err(Error::DomainError(format!(
            "defect {k} exceeds the instance order {n}"
        )));
    }
    if k == 0 {
        return Ok(BigUint::one());
    }
    let tm = type_matrix(k)?;
    let dim = tm.dim();
    // v: the two states the first column can reach; w: prefixes the sink
    // column completes (k units spread over k distinct A-vertices).
    let mut v = vec![BigUint::zero(); dim];
    let full = FlowType::new(vec![k], vec![]);
    v[tm.index_of(&full)
        .expect("type table covers the source state")] += 1u32;
    let released = if k == 1 {
        FlowType::new(vec![], vec![1])
    } else {
        FlowType::new(vec![k - 1], vec![1])
    };
    v[tm.index_of(&released)
        .expect("type table covers the released state")] += 1u32;
    for _ in 1..n {
        let mut next = vec![BigUint::zero(); dim];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (j, next_j) in next.iter_mut().enumerate() {
                let e = tm.entries[i][j];
                if e != 0 {
                    *next_j += vi * BigUint::from(e);
                }
            }
        }
        v = next;
    }
    let target = FlowType::new(vec![1; k], vec![]);
    let idx = tm
        .index_of(&target)
        .expect("type table covers the completable state");
    Ok(v[idx].clone())
}

/// Spectral radius of a nonnegative primitive matrix by power iteration.
///
/// Primitivity is certified first by checking that some power up to the
/// Wielandt exponent `(d-1)^2 + 1` is entrywise positive; otherwise the
/// iteration need not converge and `NotPrimitive` is returned.
pub fn perron_root_raw(matrix: &[Vec<u64>]) -> Result<f64> {
    let d = matrix.len();
    if d == 0 || matrix.iter().any(|row| row.len() != d) {
        return Err(Error::DomainError(
            "matrix must be square and nonempty".into(),
        ));
    }
    let wielandt = (d - 1) * (d - 1) + 1;
    let mut power: Vec<Vec<BigUint>> = matrix
        .iter()
        .map(|row| row.iter().map(|&x| BigUint::from(x)).collect())
        .collect();
    let mut primitive = power.iter().all(|row| row.iter().all(|x| !x.is_zero()));
    let mut steps = 1usize;
    while !primitive && steps < wielandt {
        power = mat_mul(&power, matrix);
        steps += 1;
        primitive = power.iter().all(|row| row.iter().all(|x| !x.is_zero()));
    }
    if !primitive {
        return Err(Error::NotPrimitive(format!(
            "no power up to the Wielandt exponent {wielandt} is positive"
        )));
    }
    let m: Vec<Vec<f64>> = matrix
        .iter()
        .map(|row| row.iter().map(|&x| x as f64).collect())
        .collect();
    let mut x = vec![1.0f64; d];
    let mut lambda = 0.0f64;
    for _ in 0..100_000 {
        let mut y = vec![0.0f64; d];
        for i in 0..d {
            for j in 0..d {
                y[j] += x[i] * m[i][j];
            }
        }
        let norm: f64 = y.iter().sum();
        let next = norm / x.iter().sum::<f64>();
        y.iter_mut().for_each(|v| *v /= norm);
        let done = (next - lambda).abs() <= 1e-12 * next.abs();
        lambda = next;
        x = y;
        if done {
            return Ok(lambda);
        }
    }
    Err(Error::DomainError(
        "power iteration did not converge within the step budget".into(),
    ))
}

fn mat_mul(a: &[Vec<BigUint>], b: &[Vec<u64>]) -> Vec<Vec<BigUint>> {
    let d = a.len();
    let mut out = vec![vec![BigUint::zero(); d]; d];
    for i in 0..d {
        for l in 0..d {
            if a[i][l].is_zero() {
                continue;
            }
            for j in 0..d {
                if b[l][j] != 0 {
                    out[i][j] += &a[i][l] * BigUint::from(b[l][j]);
                }
            }
        }
    }
    out
}

/// Growth rate of the realization counts for defect `k`: the spectral
/// radius of the transfer matrix. `k = 0` returns 1 (the rigid staircase).
///
/// Primitivity of the transfer matrix is certified by checking that its
/// `2k`-th power is entrywise positive before iterating.
pub fn perron_root(k: usize) -> Result<f64> {
    if k == 0 {
        return Ok(1.0);
    }
    let tm = type_matrix(k)?;
    let mut power: Vec<Vec<BigUint>> = tm
        .entries
        .iter()
        .map(|row| row.iter().map(|&x| BigUint::from(x)).collect())
        .collect();
    for _ in 1..(2 * k) {
        power = mat_mul(&power, &tm.entries);
    }
    if !power.iter().all(|row| row.iter().all(|x| !x.is_zero())) {
        return Err(Error::NotPrimitive(format!(
            "transfer matrix power {} is not entrywise positive",
            2 * k
        )));
    }
    perron_root_raw(&tm.entries)
}

/// One row of the stability probe.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityRow {
    pub n: usize,
    pub k: usize,
    /// Realization count for defect `k` at order `n`.
    pub count: BigUint,
    /// Count for defect `k+1` divided by count for defect `k`.
    pub ratio: f64,
    /// This row's ratio divided by the previous row's ratio.
    pub growth: f64,
    /// Predicted limit of `growth`: the defect-(k+1) spectral radius over
    /// the defect-k one.
    pub r_ratio: f64,
}

/// Stability probe rows over a range of orders.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StabilityReport {
    pub rows: Vec<StabilityRow>,
}

impl StabilityReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,k,count,ratio,growth,r_ratio\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                row.n, row.k, row.count, row.ratio, row.growth, row.r_ratio
            ));
        }
        out
    }
}

/// Probe how fast the defect-(k+1) counts outgrow the defect-k counts
/// over `n` in `[n_from, n_to]`. The growth column converges to the ratio
/// of spectral radii.
pub fn stability_probe(k: usize, n_from: usize, n_to: usize) -> Result<StabilityReport> {
    if n_from < k + 2 || n_from > n_to {
        return Err(Error::DomainError(format!(
            "order range [{n_from}, {n_to}] is invalid for defect {k} (need n >= k + 2)"
        )));
    }
    let count = |n: usize, kk: usize| -> Result<BigUint> {
        if kk == 0 {
            Ok(BigUint::one())
        } else {
            count_hk_matrix(n, kk)
        }
    };
    let r_low = perron_root(k)?;
    let r_high = perron_root(k + 1)?;
    let r_ratio = r_high / r_low;
    let mut rows = Vec::new();
    let mut prev_ratio: Option<f64> = None;
    for n in n_from..=n_to {
        let c_low = count(n, k)?;
        let c_high = count(n, k + 1)?;
        let ratio =
            c_high.to_f64().unwrap_or(f64::INFINITY) / c_low.to_f64().unwrap_or(f64::INFINITY);
        let growth = prev_ratio.map_or(f64::NAN, |p| ratio / p);
        prev_ratio = Some(ratio);
        rows.push(StabilityRow {
            n,
            k,
            count: c_low,
            ratio,
            growth,
            r_ratio,
        });
    }
    Ok(StabilityReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigraph::{enumerate_realizations, hk_sequence};
    use crate::flow::full_network;

    #[test]
    fn type_counts_follow_partition_convolutions() {
        assert_eq!(types(1).len(), 2);
        assert_eq!(types(2).len(), 5);
        assert_eq!(types(3).len(), 10);
    }

    #[test]
    fn canonical_order_starts_with_pure_b_types() {
        let t = types(2);
        assert_eq!(t[0], FlowType::new(vec![], vec![1, 1]));
        assert_eq!(t[1], FlowType::new(vec![], vec![2]));
        assert_eq!(t[2], FlowType::new(vec![1], vec![1]));
        assert_eq!(t[3], FlowType::new(vec![1, 1], vec![]));
        assert_eq!(t[4], FlowType::new(vec![2], vec![]));
    }

    #[test]
    fn adding_a_unit_pending_preserves_order() {
        // Embedding a defect-1 type into defect 2 by adding a unit A-side
        // pending must preserve the canonical order.
        let small = types(1);
        let big = types(2);
        let image_index = |t: &FlowType| -> usize {
            let mut r = t.r.clone();
            r.push(1);
            let embedded = FlowType::new(r, t.q.clone());
            big.iter()
                .position(|x| x == &embedded)
                .expect("embedded type exists")
        };
        let positions: Vec<usize> = small.iter().map(image_index).collect();
        for w in positions.windows(2) {
            assert!(w[0] < w[1], "embedding must be order-preserving");
        }
    }

    #[test]
    fn defect_one_matrix_is_the_fibonacci_block() {
        let tm = type_matrix(1).unwrap();
        assert_eq!(tm.order[0], FlowType::new(vec![], vec![1]));
        assert_eq!(tm.order[1], FlowType::new(vec![1], vec![]));
        assert_eq!(tm.entries, vec![vec![2, 1], vec![1, 1]]);
    }

    #[test]
    fn matrix_counts_match_the_oracle() {
        for n in 1..=6 {
            let matrix_count = count_hk_matrix(n, 1).unwrap();
            let oracle = enumerate_realizations(&hk_sequence(n, 1)).unwrap().len();
            assert_eq!(matrix_count, BigUint::from(oracle), "k=1, n={n}");
        }
        for n in 2..=6 {
            let matrix_count = count_hk_matrix(n, 2).unwrap();
            let oracle = enumerate_realizations(&hk_sequence(n, 2)).unwrap().len();
            assert_eq!(matrix_count, BigUint::from(oracle), "k=2, n={n}");
        }
        for n in 3..=6 {
            let matrix_count = count_hk_matrix(n, 3).unwrap();
            let oracle = enumerate_realizations(&hk_sequence(n, 3)).unwrap().len();
            assert_eq!(matrix_count, BigUint::from(oracle), "k=3, n={n}");
        }
    }

    #[test]
    fn defect_one_counts_are_odd_indexed_fibonacci() {
        let expected = [1u64, 2, 5, 13, 34, 89, 233, 610];
        for (i, &want) in expected.iter().enumerate() {
            assert_eq!(count_hk_matrix(i + 1, 1).unwrap(), BigUint::from(want));
        }
    }

    #[test]
    fn every_prefix_flow_of_a_type_gives_the_same_extension_row() {
        for k in 1..=2usize {
            let order = types(k);
            let index: BTreeMap<FlowType, usize> = order
                .iter()
                .cloned()
                .enumerate()
                .map(|(i, t)| (t, i))
                .collect();
            let tm = type_matrix(k).unwrap();
            let ell = 2 * k;
            let net: Vec<FlowArc> = full_network(ell).into_iter().collect();
            let mut seen_types: BTreeSet<FlowType> = BTreeSet::new();
            // Enumerate every 0/1 arc subset of the prefix network.
            assert!(net.len() <= 16);
            for mask in 0u32..(1u32 << net.len()) {
                let arcs: BTreeSet<FlowArc> = net
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask >> b & 1 == 1)
                    .map(|(_, a)| *a)
                    .collect();
                let Ok(t) = type_of(&arcs, ell, k) else {
                    continue;
                };
                seen_types.insert(t.clone());
                let row = extension_row(&arcs, ell, k, &index).unwrap();
                let i = index[&t];
                assert_eq!(
                    row, tm.entries[i],
                    "extension row must depend only on the type (k={k}, type {t:?})"
                );
            }
            assert_eq!(
                seen_types.len(),
                order.len(),
                "every type is realizable at column 2k"
            );
        }
    }

    #[test]
    fn witnesses_exist_for_every_type_up_to_defect_four() {
        for k in 1..=4 {
            for t in types(k) {
                let w = witness_flow(k, &t).unwrap();
                assert_eq!(type_of(&w.arcs, 2 * k, k).unwrap(), t);
            }
        }
    }

    #[test]
    fn perron_root_of_defect_one_is_the_golden_ratio_square() {
        let r = perron_root(1).unwrap();
        let expected = (3.0 + 5.0f64.sqrt()) / 2.0;
        assert!((r - expected).abs() < 1e-9, "expected {expected}, got {r}");
        let raw = perron_root_raw(&[vec![2, 1], vec![1, 1]]).unwrap();
        assert!((raw - expected).abs() < 1e-9);
    }

    #[test]
    fn defect_two_grows_strictly_faster_than_defect_one() {
        let r1 = perron_root(1).unwrap();
        let r2 = perron_root(2).unwrap();
        assert!(r2 > r1 + 1e-6, "r2={r2} must exceed r1={r1}");
    }

    #[test]
    fn permutation_matrix_is_rejected_as_imprimitive() {
        match perron_root_raw(&[vec![0, 1], vec![1, 0]]) {
            Err(Error::NotPrimitive(_)) => {}
            other => panic!("expected NotPrimitive, got {other:?}"),
        }
    }

    #[test]
    fn stability_probe_growth_approaches_the_root_ratio() {
        let report = stability_probe(0, 10, 20).unwrap();
        let last = report.rows.last().unwrap();
        assert!(
            (last.growth - last.r_ratio).abs() / last.r_ratio < 0.05,
            "growth {} should be within 5% of {}",
            last.growth,
            last.r_ratio
        );
        let csv = report.to_csv();
        assert!(csv.starts_with("n,k,count,ratio,growth,r_ratio\n"));
        assert_eq!(csv.lines().count(), 12);
    }
}
