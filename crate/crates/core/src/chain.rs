//! The switch Markov chain on bipartite realizations, plus exact mixing
//! analysis for desk-scale state spaces.
//!
//! One step: pick four distinct vertices of the union uniformly, pick an
//! ordered pair of distinct perfect matchings on them (six pairs), and
//! swap the first matching for the second when the first lies in the
//! graph, the second avoids it, and both respect the bipartition.
//! Every legal switch is selected by exactly one such draw, so each
//! off-diagonal transition has probability `1 / (6 * C(nA + nB, 4))`;
//! the chain is symmetric and therefore uniform in the limit.

use rand::seq::index;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Reverse;

use crate::bigraph::{
    is_bigraphic, BipartiteDegreeSequence, BipartiteRealization, RealizationSpace, SwitchMove,
    Vertex,
};
use crate::error::{Error, Result};

/// Hard cap on the state space size for the dense mixing analysis.
pub const MAX_MIXING_STATES: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub seed: u64,
    pub steps: u64,
}

#[derive(Debug, Clone)]
pub struct SampleOutcome {
    pub realization: BipartiteRealization,
    /// Number of steps that actually changed the graph.
    pub accepted: u64,
}

/// Probability of any single switch move: `1 / (6 * C(n, 4))` over the
/// total number of vertices `n`. Zero moves exist for `n < 4`.
pub fn move_probability(n_total: usize) -> f64 {
    if n_total < 4 {
        return 0.0;
    }
    let c4 = (n_total * (n_total - 1) * (n_total - 2) * (n_total - 3) / 24) as f64;
    1.0 / (6.0 * c4)
}

/// Constructive realization: place each A-vertex's edges on the B-vertices
/// with the most remaining demand. Succeeds exactly when the sequence is
/// bigraphic.
pub fn greedy_realization(d: &BipartiteDegreeSequence) -> Result<BipartiteRealization> {
    if !is_bigraphic(d) {
        return Err(Error::NotGraphic {
            context: format!("degree sequence {:?} / {:?}", d.deg_a, d.deg_b),
        });
    }
    let mut remaining: Vec<usize> = d.deg_b.clone();
    let mut g = BipartiteRealization::empty(d.n_a(), d.n_b());
    let mut rows: Vec<usize> = (0..d.n_a()).collect();
    rows.sort_by_key(|&i| Reverse(d.deg_a[i]));
    for i in rows {
        let mut cols: Vec<usize> = (0..d.n_b()).collect();
        cols.sort_by_key(|&j| (Reverse(remaining[j]), j));
        for &j in cols.iter().take(d.deg_a[i]) {
            assert!(remaining[j] > 0, "greedy fill ran out of demand");
            remaining[j] -= 1;
            g.set_edge(i, j, true);
        }
    }
    debug_assert_eq!(&g.degree_sequence(), d);
    Ok(g)
}

// The three perfect matchings of a sorted 4-set, as index pairs, and the
// six ordered pairs of distinct matchings.
const MATCHINGS: [[(usize, usize); 2]; 3] = [[(0, 1), (2, 3)], [(0, 2), (1, 3)], [(0, 3), (1, 2)]];
const ORDERED_PAIRS: [(usize, usize); 6] = [(0, 1), (1, 0), (0, 2), (2, 0), (1, 2), (2, 1)];

/// One lazy chain step. Returns the applied move, or `None` when the draw
/// fails one of the guards and the graph stays put.
pub fn chain_step<R: Rng>(g: &mut BipartiteRealization, rng: &mut R) -> Option<SwitchMove> {
    let n = g.n_a() + g.n_b();
    if n < 4 {
        return None;
    }
    let mut picks: Vec<usize> = index::sample(rng, n, 4).into_vec();
    picks.sort_unstable();
    let side = |v: usize| -> Vertex {
        if v < g.n_a() {
            Vertex::A(v)
        } else {
            Vertex::B(v - g.n_a())
        }
    };
    let verts: Vec<Vertex> = picks.iter().map(|&v| side(v)).collect();
    let (mi, mj) = ORDERED_PAIRS[rng.gen_range(0..6)];
    // Both matchings must pair an A-vertex with a B-vertex.
    let cell = |p: (usize, usize)| -> Option<(usize, usize)> {
        match (verts[p.0], verts[p.1]) {
            (Vertex::A(a), Vertex::B(b)) | (Vertex::B(b), Vertex::A(a)) => Some((a, b)),
            _ => None,
        }
    };
    let present: Vec<(usize, usize)> = MATCHINGS[mi].iter().filter_map(|&p| cell(p)).collect();
    let absent: Vec<(usize, usize)> = MATCHINGS[mj].iter().filter_map(|&p| cell(p)).collect();
    if present.len() != 2 || absent.len() != 2 {
        return None;
    }
    if !present.iter().all(|&(a, b)| g.has_edge(a, b)) {
        return None;
    }
    if absent.iter().any(|&(a, b)| g.has_edge(a, b)) {
        return None;
    }
    let (a1, b1) = present[0];
    let (a2, b2) = present[1];
    let mv = if a1 < a2 {
        SwitchMove { a1, a2, b1, b2 }
    } else {
        SwitchMove {
            a1: a2,
            a2: a1,
            b1: b2,
            b2: b1,
        }
    };
    g.apply_switch(mv).expect("guards checked the move");
    Some(mv)
}

/// Run the chain from the greedy realization for `cfg.steps` steps with a
/// deterministic generator seeded from `cfg.seed`.
pub fn sample(d: &BipartiteDegreeSequence, cfg: &ChainConfig) -> Result<SampleOutcome> {
    let mut g = greedy_realization(d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut accepted = 0u64;
    for _ in 0..cfg.steps {
        if chain_step(&mut g, &mut rng).is_some() {
            accepted += 1;
        }
    }
    Ok(SampleOutcome {
        realization: g,
        accepted,
    })
}

/// Exact mixing summary over a fully enumerated state space.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixingReport {
    pub state_count: usize,
    pub eps: f64,
    /// Smallest `t` with worst-start total variation at most `eps`.
    pub tau_epsilon: u64,
    /// Diameter of the switch-adjacency graph.
    pub diameter: usize,
    /// One minus the second-largest eigenvalue modulus.
    pub spectral_gap: f64,
    /// Worst-start total variation at the probed step counts.
    pub tv_curve: Vec<(u64, f64)>,
}

impl MixingReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,tv\n");
        for (t, tv) in &self.tv_curve {
            out.push_str(&format!("{t},{tv}\n"));
        }
        out
    }
}

fn transition_matrix(space: &RealizationSpace) -> Vec<f64> {
    let n_states = space.len();
    let p = move_probability(space.d.n_a() + space.d.n_b());
    let mut m = vec![0.0f64; n_states * n_states];
    for (x, nbrs) in space.adj.iter().enumerate() {
        for &y in nbrs {
            m[x * n_states + y] = p;
        }
        m[x * n_states + x] = 1.0 - p * nbrs.len() as f64;
    }
    m
}

fn mat_mul_dense(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; n * n];
    out.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for l in 0..n {
            let ail = a[i * n + l];
            if ail != 0.0 {
                let brow = &b[l * n..(l + 1) * n];
                for (o, &bv) in row.iter_mut().zip(brow) {
                    *o += ail * bv;
                }
            }
        }
    });
    out
}

fn worst_tv(power: &[f64], n: usize) -> f64 {
    let unif = 1.0 / n as f64;
    (0..n)
        .map(|x| {
            0.5 * power[x * n..(x + 1) * n]
                .iter()
                .map(|&v| (v - unif).abs())
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// `base^t` assembled from the doubling ladder `ladder[m] = base^(2^m)`.
fn pow_from_ladder(ladder: &[Vec<f64>], t: u64, n: usize) -> Vec<f64> {
    let mut acc: Option<Vec<f64>> = None;
    for (m, mat) in ladder.iter().enumerate() {
        if t >> m & 1 == 1 {
            acc = Some(match acc {
                None => mat.clone(),
                Some(a) => mat_mul_dense(&a, mat, n),
            });
        }
    }
    acc.unwrap_or_else(|| {
        let mut id = vec![0.0; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        id
    })
}

/// Spectral gap of a symmetric doubly stochastic matrix: deflate the
/// uniform eigenvector and power-iterate for the second-largest modulus.
fn spectral_gap(p: &[f64], n: usize) -> f64 {
    if n == 1 {
        return 1.0;
    }
    let mut x: Vec<f64> = (0..n).map(|i| ((i as f64) + 0.5).sin()).collect();
    let project = |v: &mut Vec<f64>| {
        let mean = v.iter().sum::<f64>() / n as f64;
        v.iter_mut().for_each(|e| *e -= mean);
    };
    project(&mut x);
    let norm = |v: &[f64]| v.iter().map(|e| e * e).sum::<f64>().sqrt();
    let mut slem = 0.0f64;
    for _ in 0..200_000 {
        let nx = norm(&x);
        if nx == 0.0 {
            return 1.0; // x was entirely in the uniform direction
        }
        x.iter_mut().for_each(|e| *e /= nx);
        let mut y = vec![0.0f64; n];
        for i in 0..n {
            let xi = x[i];
            if xi != 0.0 {
                for (j, yj) in y.iter_mut().enumerate() {
                    *yj += xi * p[i * n + j];
                }
            }
        }
        project(&mut y);
        let next = norm(&y);
        let done = (next - slem).abs() <= 1e-12 * next.max(1e-300);
        slem = next;
        x = y;
        if done {
            break;
        }
    }
    1.0 - slem
}

/// Enumerate the realizations of `d`, build the exact transition matrix,
/// and locate the mixing time by doubling then binary search. The worst
/// start total variation is non-increasing in `t`, so the search is sound.
pub fn exact_mixing(d: &BipartiteDegreeSequence, eps: f64, limit: usize) -> Result<MixingReport> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::DomainError(format!(
            "tolerance must lie strictly between 0 and 1, got {eps}"
        )));
    }
    let space = RealizationSpace::build(d, limit)?;
    let n = space.len();
    if n == 0 {
        return Err(Error::NotGraphic {
            context: format!("degree sequence {:?} / {:?}", d.deg_a, d.deg_b),
        });
    }
    if n > MAX_MIXING_STATES {
        return Err(Error::DomainError(format!(
            "{n} states exceed the dense analysis cap of {MAX_MIXING_STATES}"
        )));
    }
    let p = transition_matrix(&space);
    for x in 0..n {
        let row_sum: f64 = p[x * n..(x + 1) * n].iter().sum();
        if (row_sum - 1.0).abs() > 1e-9 {
            return Err(Error::DomainError(format!(
                "transition row {x} sums to {row_sum}"
            )));
        }
        for y in 0..x {
            if (p[x * n + y] - p[y * n + x]).abs() > 1e-15 {
                return Err(Error::DomainError(
                    "transition matrix is not symmetric".into(),
                ));
            }
        }
    }
    let diameter = if n == 1 { 0 } else { space.diameter() };
    let gap = spectral_gap(&p, n);
    let mut curve: Vec<(u64, f64)> = Vec::new();
    let d0 = (n as f64 - 1.0) / n as f64;
    curve.push((0, d0));
    if d0 <= eps {
        return Ok(MixingReport {
            state_count: n,
            eps,
            tau_epsilon: 0,
            diameter,
            spectral_gap: gap,
            tv_curve: curve,
        });
    }
    // Doubling ladder until the TV distance dips under eps.
    let mut ladder: Vec<Vec<f64>> = vec![p];
    let mut m = 0usize;
    loop {
        let t = 1u64 << m;
        let tv = worst_tv(&ladder[m], n);
        curve.push((t, tv));
        if tv <= eps {
            break;
        }
        if m >= 60 {
            return Err(Error::DomainError(
                "mixing time exceeds the search horizon".into(),
            ));
        }
        let next = mat_mul_dense(&ladder[m], &ladder[m], n);
        ladder.push(next);
        m += 1;
    }
    let tau = if m == 0 {
        1
    } else {
        let (mut lo, mut hi) = (1u64 << (m - 1), 1u64 << m);
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            let tv = worst_tv(&pow_from_ladder(&ladder, mid, n), n);
            curve.push((mid, tv));
            if tv <= eps {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    };
    curve.sort_by_key(|&(t, _)| t);
    curve.dedup_by_key(|&mut (t, _)| t);
    Ok(MixingReport {
        state_count: n,
        eps,
        tau_epsilon: tau,
        diameter,
        spectral_gap: gap,
        tv_curve: curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigraph::{enumerate_realizations, hk_sequence, DEFAULT_ORACLE_LIMIT};
    use crate::tyshkevich::compose_sequences;
    use std::collections::HashMap;

    fn matching_pair_power(factors: usize) -> BipartiteDegreeSequence {
        let unit = BipartiteDegreeSequence::new(vec![1, 1], vec![1, 1]);
        let mut d = unit.clone();
        for _ in 1..factors {
            d = compose_sequences(&d, &unit);
        }
        d
    }

    #[test]
    fn greedy_realization_hits_the_requested_degrees() {
        for (n, k) in [(3, 1), (5, 1), (5, 2), (6, 3), (4, 4)] {
            let d = hk_sequence(n, k);
            let g = greedy_realization(&d).unwrap();
            assert_eq!(g.degree_sequence(), d, "h_{k}({n})");
        }
        let d = BipartiteDegreeSequence::new(vec![3, 3, 1, 1], vec![1, 1, 3, 3]);
        assert_eq!(greedy_realization(&d).unwrap().degree_sequence(), d);
    }

    #[test]
    fn greedy_realization_rejects_non_graphic_input() {
        let bad = BipartiteDegreeSequence::new(vec![2, 2], vec![2, 0]);
        match greedy_realization(&bad) {
            Err(Error::NotGraphic { .. }) => {}
            other => panic!("expected NotGraphic, got {other:?}"),
        }
    }

    #[test]
    fn chain_steps_preserve_the_degree_sequence() {
        let d = hk_sequence(5, 2);
        let mut g = greedy_realization(&d).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut applied = 0;
        for _ in 0..2000 {
            if chain_step(&mut g, &mut rng).is_some() {
                applied += 1;
            }
        }
        assert_eq!(g.degree_sequence(), d, "degrees must be invariant");
        assert!(applied > 0, "some moves should be accepted in 2000 steps");
    }

    #[test]
    fn sampling_is_deterministic_in_the_seed() {
        let d = hk_sequence(6, 2);
        let cfg = ChainConfig {
            seed: 42,
            steps: 5000,
        };
        let one = sample(&d, &cfg).unwrap();
        let two = sample(&d, &cfg).unwrap();
        assert_eq!(one.realization, two.realization);
        assert_eq!(one.accepted, two.accepted);
        let other = sample(
            &d,
            &ChainConfig {
                seed: 43,
                steps: 5000,
            },
        )
        .unwrap();
        assert_ne!(
            one.realization, other.realization,
            "different seeds should land on different states here"
        );
    }

    #[test]
    fn single_step_frequencies_match_the_uniform_move_rule() {
        // 5 states on 3+3 vertices: every move fires with probability 1/90.
        let d = hk_sequence(3, 1);
        let start = greedy_realization(&d).unwrap();
        let p = move_probability(6);
        assert!((p - 1.0 / 90.0).abs() < 1e-15);
        let trials = 300_000u64;
        let mut rng = ChaCha8Rng::seed_from_u64(2026);
        let mut hits: HashMap<BipartiteRealization, u64> = HashMap::new();
        for _ in 0..trials {
            let mut g = start.clone();
            chain_step(&mut g, &mut rng);
            *hits.entry(g).or_default() += 1;
        }
        let neighbors = start.valid_switches();
        assert!(!neighbors.is_empty(), "the start state must have moves");
        let sigma = (p * (1.0 - p) / trials as f64).sqrt();
        for &mv in &neighbors {
            let mut g = start.clone();
            g.apply_switch(mv).unwrap();
            let freq = *hits.get(&g).unwrap_or(&0) as f64 / trials as f64;
            assert!(
                (freq - p).abs() < 3.0 * sigma,
                "move frequency {freq} strays from {p} (sigma {sigma})"
            );
        }
        let hold = *hits.get(&start).unwrap() as f64 / trials as f64;
        let expected_hold = 1.0 - p * neighbors.len() as f64;
        let hold_sigma = (expected_hold * (1.0 - expected_hold) / trials as f64).sqrt();
        assert!(
            (hold - expected_hold).abs() < 3.0 * hold_sigma,
            "holding frequency {hold} strays from {expected_hold}"
        );
    }

    #[test]
    fn long_runs_approach_the_uniform_distribution() {
        // Two matching factors: four realizations, uniform target 1/4.
        let d = matching_pair_power(2);
        let mix = exact_mixing(&d, 0.05, DEFAULT_ORACLE_LIMIT).unwrap();
        assert_eq!(mix.state_count, 4);
        let steps = mix.tau_epsilon;
        let samples = 10_000u64;
        let mut counts: HashMap<BipartiteRealization, u64> = HashMap::new();
        for s in 0..samples {
            let out = sample(
                &d,
                &ChainConfig {
                    seed: 90_000 + s,
                    steps,
                },
            )
            .unwrap();
            *counts.entry(out.realization).or_default() += 1;
        }
        assert_eq!(counts.len(), 4, "all four states should be visited");
        let tv: f64 = counts
            .values()
            .map(|&c| (c as f64 / samples as f64 - 0.25).abs())
            .sum::<f64>()
            / 2.0;
        assert!(
            tv < 0.08,
            "empirical total variation {tv} should sit under eps plus noise"
        );
    }

    #[test]
    fn two_state_chain_mixes_in_two_steps() {
        // Two realizations on 2+2 vertices; the worst TV is (2/3)^t / 2.
        let d = hk_sequence(2, 1);
        let mix = exact_mixing(&d, 0.25, DEFAULT_ORACLE_LIMIT).unwrap();
        assert_eq!(mix.state_count, 2);
        assert_eq!(mix.tau_epsilon, 2);
        assert_eq!(mix.diameter, 1);
        assert!(
            (mix.spectral_gap - 1.0 / 3.0).abs() < 1e-9,
            "gap {} should be 1/3",
            mix.spectral_gap
        );
    }

    #[test]
    fn mixing_time_is_monotone_in_the_tolerance() {
        let d = hk_sequence(4, 1);
        let coarse = exact_mixing(&d, 0.25, DEFAULT_ORACLE_LIMIT).unwrap();
        let fine = exact_mixing(&d, 0.01, DEFAULT_ORACLE_LIMIT).unwrap();
        assert!(fine.tau_epsilon >= coarse.tau_epsilon);
        for w in coarse.tv_curve.windows(2) {
            assert!(w[0].1 >= w[1].1 - 1e-12, "worst TV must not increase");
        }
    }

    #[test]
    fn mixing_time_sits_between_the_spectral_bounds() {
        let d = hk_sequence(4, 1);
        let eps = 0.25f64;
        let mix = exact_mixing(&d, eps, DEFAULT_ORACLE_LIMIT).unwrap();
        let n = mix.state_count as f64;
        let gap = mix.spectral_gap;
        let upper = ((n / eps).ln() / gap).ceil() as u64;
        let lower = ((1.0 / gap - 1.0) * (1.0 / (2.0 * eps)).ln()).floor() as u64;
        assert!(
            mix.tau_epsilon <= upper,
            "tau {} exceeds the relaxation upper bound {upper}",
            mix.tau_epsilon
        );
        assert!(
            mix.tau_epsilon >= lower,
            "tau {} undercuts the relaxation lower bound {lower}",
            mix.tau_epsilon
        );
    }

    #[test]
    fn mixing_state_count_matches_the_oracle() {
        let d = hk_sequence(5, 1);
        let mix = exact_mixing(&d, 0.25, DEFAULT_ORACLE_LIMIT).unwrap();
        let oracle = enumerate_realizations(&d).unwrap().len();
        assert_eq!(mix.state_count, oracle);
        assert_eq!(mix.state_count, 34);
    }
}
