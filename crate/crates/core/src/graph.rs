//! Message graphs of a topology: alignment sets, internal conflicts and the
//! link-by-link maximality check.
//!
//! Everything here works straight from the graph definitions, so it doubles
//! as the brute-force reference the construction and matrix discriminants
//! are checked against.

use serde::Serialize;

use crate::bits::{bit, full, lowest, members};
use crate::model::{MaximalityVerdict, MessageGraph, TopologyMatrix, Witness};

/// Derives alignment and conflict edges.
///
/// Conflict (i, j): receiver `i` hears transmitter `j`, `i ≠ j`.
/// Alignment {i, j}: some receiver outside {i, j} hears both transmitters.
pub fn build_message_graph(t: &TopologyMatrix) -> MessageGraph {
    let k = t.k();
    let mut alignment = vec![0u64; k];
    let conflict: Vec<u64> = (0..k).map(|i| t.interferers(i)).collect();
    for (witness, &heard) in conflict.iter().enumerate() {
        debug_assert_eq!(heard & bit(witness), 0);
        for i in members(heard) {
            alignment[i] |= heard & !bit(i);
        }
    }
    MessageGraph {
        k,
        alignment,
        conflict,
    }
}

/// Connected components of the alignment graph, ordered by smallest member.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlignmentPartition {
    #[serde(skip)]
    k: usize,
    #[serde(serialize_with = "serialize_sets")]
    sets: Vec<u64>,
}

fn serialize_sets<S: serde::Serializer>(sets: &[u64], s: S) -> Result<S::Ok, S::Error> {
    let one_based: Vec<Vec<usize>> = sets
        .iter()
        .map(|&m| members(m).map(|i| i + 1).collect())
        .collect();
    one_based.serialize(s)
}

impl AlignmentPartition {
    /// Builds a partition from member masks; masks must be disjoint and cover 0..k.
    pub(crate) fn from_masks(k: usize, mut sets: Vec<u64>) -> Self {
        sets.sort_by_key(|&m| lowest(m));
        debug_assert_eq!(sets.iter().fold(0, |a, &m| a | m), full(k));
        Self { k, sets }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    /// Member masks; bit `i` is message `i`.
    pub fn masks(&self) -> &[u64] {
        &self.sets
    }

    pub fn set(&self, index: usize) -> Vec<usize> {
        members(self.sets[index]).collect()
    }

    pub fn sets(&self) -> Vec<Vec<usize>> {
        (0..self.sets.len()).map(|s| self.set(s)).collect()
    }

    /// Index of the set containing `message`.
    pub fn set_of(&self, message: usize) -> usize {
        self.sets
            .iter()
            .position(|&m| m & bit(message) != 0)
            .expect("partition covers every message")
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.sets.iter().map(|m| m.count_ones() as usize).collect()
    }
}

/// Alignment sets: connected components under alignment edges.
pub fn alignment_sets(g: &MessageGraph) -> AlignmentPartition {
    let k = g.k();
    let mut remaining = full(k);
    let mut sets = Vec::new();
    while remaining != 0 {
        let start = bit(lowest(remaining));
        let mut comp = start;
        let mut frontier = start;
        while frontier != 0 {
            let reach = members(frontier).fold(0, |acc, v| acc | g.alignment_neighbors(v));
            frontier = reach & !comp;
            comp |= frontier;
        }
        sets.push(comp);
        remaining &= !comp;
    }
    AlignmentPartition::from_masks(k, sets)
}

/// A conflict edge (receiver, source) between two members of one alignment set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct InternalConflict {
    #[serde(serialize_with = "crate::bits::ser_index")]
    pub set: usize,
    #[serde(serialize_with = "crate::bits::ser_index")]
    pub receiver: usize,
    #[serde(serialize_with = "crate::bits::ser_index")]
    pub source: usize,
}

/// Every internal conflict, ordered by set, then receiver, then source.
pub fn internal_conflicts(g: &MessageGraph, p: &AlignmentPartition) -> Vec<InternalConflict> {
    let mut out = Vec::new();
    for (set, &mask) in p.masks().iter().enumerate() {
        for receiver in members(mask) {
            for source in members(g.conflict_sources(receiver) & mask) {
                out.push(InternalConflict {
                    set,
                    receiver,
                    source,
                });
            }
        }
    }
    out
}

fn has_internal_conflict(g: &MessageGraph, p: &AlignmentPartition) -> bool {
    p.masks()
        .iter()
        .any(|&mask| members(mask).any(|i| g.conflict_sources(i) & mask != 0))
}

/// True iff no alignment set contains a conflict edge.
pub fn is_dof_half_optimal(t: &TopologyMatrix) -> bool {
    let g = build_message_graph(t);
    !has_internal_conflict(&g, &alignment_sets(&g))
}

/// Maximality straight from the definition: DoF-optimal, and every absent
/// cross link would create an internal conflict.
pub fn is_maximal_by_definition(t: &TopologyMatrix) -> MaximalityVerdict {
    if t.k() == 1 {
        return MaximalityVerdict {
            is_dof_optimal: true,
            is_maximal: true,
            witness: Some(Witness::Degenerate),
        };
    }
    let g = build_message_graph(t);
    let p = alignment_sets(&g);
    if let Some(c) = internal_conflicts(&g, &p).first() {
        return MaximalityVerdict {
            is_dof_optimal: false,
            is_maximal: false,
            witness: Some(Witness::InternalConflict {
                set: c.set,
                receiver: c.receiver,
                source: c.source,
            }),
        };
    }
    for (receiver, transmitter) in t.missing_links() {
        if is_dof_half_optimal(&t.with_link(receiver, transmitter)) {
            return MaximalityVerdict {
                is_dof_optimal: true,
                is_maximal: false,
                witness: Some(Witness::AddableLink {
                    receiver,
                    transmitter,
                }),
            };
        }
    }
    MaximalityVerdict {
        is_dof_optimal: true,
        is_maximal: true,
        witness: None,
    }
}
