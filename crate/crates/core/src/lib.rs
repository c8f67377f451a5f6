//! Workbench for bipartite degree sequences near the staircase pattern:
//! switch-based sampling, exhaustive oracles, graph composition and
//! decomposition, flow representations, canonical path systems, and
//! transfer-matrix counting.

pub mod bigraph;
pub mod chain;
pub mod checks;
pub mod counting;
pub mod error;
pub mod flow;
pub mod paths;
pub mod tyshkevich;

pub use bigraph::{
    enumerate_realizations, enumerate_realizations_with_limit, halfgraph, hk_sequence,
    is_bigraphic, move_between, switch_sequence, BipartiteDegreeSequence, BipartiteRealization,
    RealizationSpace, SwitchMove, Vertex, DEFAULT_ORACLE_LIMIT,
};
pub use chain::{
    chain_step, exact_mixing, greedy_realization, move_probability, sample, ChainConfig,
    MixingReport, SampleOutcome, MAX_MIXING_STATES,
};
pub use checks::{run_suite, CheckOutcome};
pub use counting::{
    count_hk_matrix, perron_root, perron_root_raw, stability_probe, type_matrix, type_of, types,
    witness_flow, FlowType, StabilityReport, StabilityRow, TypeMatrix,
};
pub use error::{Error, Result};
pub use flow::{
    build_buffer, enumerate_flows, excess_profile, feasible_flow, flow_representation,
    flow_to_realization, full_network, ExcessProfile, FlowArc, FlowRep, FlowSearch,
};
pub use paths::{
    left_compress, CanonicalPath, CompressedArc, CompressedBand, CompressedCol, Encoding,
    LoadReport, PathSystem,
};
pub use tyshkevich::{
    compose, compose_sequences, count_via_components, decompose, extract_induced_halfgraph,
    find_alternating_cycle, is_decomposable, psi_inverse, realization_splits_at, verify_cycle,
    AlternatingCycle, DecompositionReport, SimpleGraph,
};
