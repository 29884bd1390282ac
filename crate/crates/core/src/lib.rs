//! Maximal topologies for topological interference management.
//!
//! A topology is a K×K binary matrix where entry (i, j) is 1 iff receiver `i`
//! hears transmitter `j`. The crate builds maximal topologies from alliance
//! specifications, decides maximality from first principles and from the
//! block structure of the matrix, transforms topologies into maximal ones,
//! and checks the achievable degrees of freedom numerically.

mod bits;

pub mod alliance;
pub mod beamforming;
pub mod dot;
pub mod error;
pub mod fixtures;
pub mod generalized;
pub mod graph;
pub mod matrix;
pub mod model;
pub mod oracle;

pub use alliance::{
    count_specs, derive_topology, enumerate_specs, max_alliances, min_messages, recover_spec,
    validate_spec, PartitionCondition, PartitionViolation,
};
pub use error::{Error, Result};
pub use generalized::{
    build_demand_graph, compute_e_max, derive_generalized_topology, dof_report, explain_topology,
    is_maximal_for_dof, is_mtm_for_dof, max_acyclic_subset, mtm_violations_for_dof, validate_generalized_spec, DofReport,
    Strictness, UnitFraction,
};
pub use graph::{
    alignment_sets, build_message_graph, internal_conflicts, is_dof_half_optimal,
    is_maximal_by_definition, AlignmentPartition,
};
pub use matrix::{
    apply_permutation, canonicalize, find_blocks, is_mtm, transform_to_mtm, BlockDecomposition,
    MtmViolation, Permutation, Strategy, Transformation,
};
pub use model::{
    parse_topology, serialize_topology, Alliance, AllianceSpec, GeneralizedAlliance,
    GeneralizedAllianceSpec, MaximalityVerdict, MessageGraph, SpecDocument, TopologyMatrix,
    Witness,
};
