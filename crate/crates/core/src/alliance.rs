//! Alliance construction: validating sub-alliance assignments, deriving the
//! topology they induce, counting bounds, and exhaustive enumeration of
//! labeled specifications.

use std::fmt;

use serde::Serialize;

use crate::bits::{bit, lowest, members};
use crate::error::{Error, Result};
use crate::graph::{alignment_sets, build_message_graph, internal_conflicts};
use crate::model::{Alliance, AllianceSpec, TopologyMatrix};

/// The four counting conditions a valid partition must meet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionCondition {
    /// Nobody is interfered by all of this alliance.
    NoCommonConflict,
    /// No member of this alliance sits in a sub-alliance.
    EmptyAlliance,
    /// Neither alliance of the pair interferes a sub-alliance of the other.
    PairUncovered,
    /// Sub-alliance sizes do not add up to K.
    CoverageMismatch,
}

impl PartitionCondition {
    pub fn name(self) -> &'static str {
        match self {
            Self::NoCommonConflict => "no-common-conflict",
            Self::EmptyAlliance => "empty-alliance",
            Self::PairUncovered => "pair-uncovered",
            Self::CoverageMismatch => "coverage-mismatch",
        }
    }
}

/// A failed condition and the (0-based) alliances it concerns.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartitionViolation {
    pub condition: PartitionCondition,
    pub indices: Vec<usize>,
}

impl fmt::Display for PartitionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.indices.iter().map(|i| format!("A{}", i + 1)).collect();
        write!(f, "{} ({})", self.condition.name(), names.join(", "))
    }
}

/// Checks the counting conditions; an empty list means the spec is valid.
pub fn validate_spec(s: &AllianceSpec) -> Vec<PartitionViolation> {
    if s.is_degenerate() {
        return Vec::new();
    }
    let alliances = s.alliances();
    let n = alliances.len();
    let size = |i: usize, j: usize| alliances[i].sub_len(j);
    let mut out = Vec::new();
    for i in 0..n {
        if (0..n).filter(|&j| j != i).map(|j| size(j, i)).sum::<usize>() == 0 {
            out.push(PartitionViolation {
                condition: PartitionCondition::NoCommonConflict,
                indices: vec![i],
            });
        }
    }
    for i in 0..n {
        if (0..n).filter(|&j| j != i).map(|j| size(i, j)).sum::<usize>() == 0 {
            out.push(PartitionViolation {
                condition: PartitionCondition::EmptyAlliance,
                indices: vec![i],
            });
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if size(i, j) + size(j, i) == 0 {
                out.push(PartitionViolation {
                    condition: PartitionCondition::PairUncovered,
                    indices: vec![i, j],
                });
            }
        }
    }
    let placed: usize = alliances
        .iter()
        .map(|a| a.suballiances.values().map(|sub| sub.len()).sum::<usize>())
        .sum();
    if placed != s.k() {
        let short: Vec<usize> = alliances
            .iter()
            .enumerate()
            .filter(|(_, a)| a.suballiances.values().map(|sub| sub.len()).sum::<usize>() != a.members.len())
            .map(|(i, _)| i)
            .collect();
        out.push(PartitionViolation {
            condition: PartitionCondition::CoverageMismatch,
            indices: short,
        });
    }
    out
}

/// Links every receiver in A[j][i] to every transmitter of alliance i.
/// Rejects specs that fail [`validate_spec`].
pub fn derive_topology(s: &AllianceSpec) -> Result<TopologyMatrix> {
    let violations = validate_spec(s);
    if !violations.is_empty() {
        return Err(Error::InvalidSpec(violations));
    }
    Ok(derive_unchecked(s))
}

pub(crate) fn derive_unchecked(s: &AllianceSpec) -> TopologyMatrix {
    let masks: Vec<u64> = s.alliances().iter().map(Alliance::mask).collect();
    let mut rows: Vec<u64> = (0..s.k()).map(bit).collect();
    for a in s.alliances() {
        for (&partner, sub) in &a.suballiances {
            for &receiver in sub {
                rows[receiver] |= masks[partner];
            }
        }
    }
    TopologyMatrix::from_rows(rows).expect("derived rows keep the diagonal")
}

/// Fewest messages that support `n` pairwise hostile alliances.
pub fn min_messages(n: usize) -> Result<usize> {
    match n {
        0 => Err(Error::InvalidParameter(
            "the number of alliances must be positive".into(),
        )),
        1 | 2 => Ok(n),
        _ => Ok(n * (n - 1) / 2),
    }
}

/// Largest number of alliances `k` messages can support (0 for `k = 0`).
pub fn max_alliances(k: usize) -> usize {
    let mut n = 0;
    while min_messages(n + 1).is_ok_and(|m| m <= k) {
        n += 1;
    }
    n
}

/// Streams every valid labeled spec with `n` alliances over `k` messages.
///
/// Alliances come out normalized (ordered by smallest member), so each
/// distinct topology is produced exactly once.
pub fn enumerate_specs(k: usize, n: usize) -> SpecIter {
    SpecIter::new(k, n)
}

/// Number of valid labeled specs, without keeping them.
pub fn count_specs(k: usize, n: usize) -> usize {
    enumerate_specs(k, n).count()
}

/// Iterator behind [`enumerate_specs`]: set partitions as restricted growth
/// strings, and for each one an odometer over every message's partner.
pub struct SpecIter {
    k: usize,
    n: usize,
    blocks: Vec<usize>,
    choices: Vec<usize>,
    state: IterState,
}

#[derive(PartialEq, Eq)]
enum IterState {
    Fresh,
    Running,
    Done,
}

impl SpecIter {
    fn new(k: usize, n: usize) -> Self {
        let feasible = k >= 1 && n >= 1 && n <= k && k <= crate::model::MAX_USERS;
        Self {
            k,
            n,
            blocks: vec![0; k],
            choices: vec![0; k],
            state: if feasible { IterState::Fresh } else { IterState::Done },
        }
    }

    fn block_count(&self) -> usize {
        self.blocks.iter().max().map_or(0, |m| m + 1)
    }

    /// Next restricted growth string with values below `n`.
    fn advance_blocks(&mut self) -> bool {
        for i in (1..self.k).rev() {
            let prefix_max = self.blocks[..i].iter().copied().max().unwrap_or(0);
            if self.blocks[i] + 1 < self.n && self.blocks[i] <= prefix_max {
                self.blocks[i] += 1;
                for b in &mut self.blocks[i + 1..] {
                    *b = 0;
                }
                return true;
            }
        }
        false
    }

    fn advance_choices(&mut self) -> bool {
        let base = self.n - 1;
        if base == 0 {
            return false;
        }
        for c in &mut self.choices {
            *c += 1;
            if *c < base {
                return true;
            }
            *c = 0;
        }
        false
    }

    fn next_partition(&mut self) -> bool {
        loop {
            if !self.advance_blocks() {
                return false;
            }
            if self.block_count() == self.n {
                return true;
            }
        }
    }

    fn build(&self) -> AllianceSpec {
        let mut alliances = vec![Alliance::default(); self.n];
        for m in 0..self.k {
            let own = self.blocks[m];
            if self.n == 1 {
                alliances[own].members.insert(m);
                continue;
            }
            let c = self.choices[m];
            let partner = if c < own { c } else { c + 1 };
            alliances[own] = std::mem::take(&mut alliances[own]).with_sub(partner, [m]);
        }
        AllianceSpec::new(self.k, alliances).expect("enumerated specs are well formed")
    }
}

impl Iterator for SpecIter {
    type Item = AllianceSpec;

    fn next(&mut self) -> Option<AllianceSpec> {
        loop {
            match self.state {
                IterState::Done => return None,
                IterState::Fresh => {
                    self.state = IterState::Running;
                    if self.block_count() != self.n && !self.next_partition() {
                        self.state = IterState::Done;
                        return None;
                    }
                }
                IterState::Running => {
                    if !self.advance_choices() {
                        if !self.next_partition() {
                            self.state = IterState::Done;
                            return None;
                        }
                        self.choices.iter_mut().for_each(|c| *c = 0);
                    }
                }
            }
            let spec = self.build();
            if validate_spec(&spec).is_empty() {
                return Some(spec);
            }
        }
    }
}

/// Reads the alliance structure off a topology: alliances are the alignment
/// sets and each receiver's sub-alliance is the alignment set it hears.
///
/// Returns `None` when there is an internal conflict or some receiver hears
/// only part of an alignment set. Uninterfered receivers are left outside
/// every sub-alliance, so [`validate_spec`] reports them.
pub fn recover_spec(t: &TopologyMatrix) -> Option<AllianceSpec> {
    let g = build_message_graph(t);
    let p = alignment_sets(&g);
    if !internal_conflicts(&g, &p).is_empty() {
        return None;
    }
    let mut alliances: Vec<Alliance> = p
        .masks()
        .iter()
        .map(|&m| Alliance::new(members(m)))
        .collect();
    for receiver in 0..t.k() {
        let heard = t.interferers(receiver);
        if heard == 0 {
            continue;
        }
        let partner = p.set_of(lowest(heard));
        if heard != p.masks()[partner] {
            return None;
        }
        let own = p.set_of(receiver);
        alliances[own] = std::mem::take(&mut alliances[own]).with_sub(partner, [receiver]);
    }
    Some(AllianceSpec::new(t.k(), alliances).expect("alignment sets partition the messages"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::graph::is_maximal_by_definition;

    #[test]
    fn worked_specs_validate() {
        for s in [paired4_spec(), lopsided4_spec(), ring6_spec(), cyclic3_spec()] {
            assert!(validate_spec(&s).is_empty(), "{s}");
        }
    }

    #[test]
    fn uncovered_pair_is_reported() {
        let s = AllianceSpec::new(2, vec![Alliance::new([0]), Alliance::new([1])]).unwrap();
        let v = validate_spec(&s);
        assert!(v.contains(&PartitionViolation {
            condition: PartitionCondition::PairUncovered,
            indices: vec![0, 1]
        }));
    }

    #[test]
    fn three_alliances_need_three_messages() {
        let s = AllianceSpec::new(
            2,
            vec![
                Alliance::default().with_sub(1, [0]),
                Alliance::default().with_sub(0, [1]),
                Alliance::default(),
            ],
        )
        .unwrap();
        let v = validate_spec(&s);
        assert!(v
            .iter()
            .any(|x| x.condition == PartitionCondition::EmptyAlliance && x.indices == vec![2]));
        assert_eq!(enumerate_specs(2, 3).count(), 0);
    }

    #[test]
    fn derived_worked_examples() {
        assert_eq!(derive_topology(&paired4_spec()).unwrap(), paired4_matrix());
        assert_eq!(derive_topology(&lopsided4_spec()).unwrap(), lopsided4_matrix());
        assert_eq!(derive_topology(&ring6_spec()).unwrap(), ring6_matrix());
        assert_eq!(derive_topology(&cyclic3_spec()).unwrap(), cyclic3_matrix());
    }

    #[test]
    fn derive_rejects_invalid() {
        let s = AllianceSpec::new(2, vec![Alliance::new([0]), Alliance::new([1])]).unwrap();
        assert!(matches!(derive_topology(&s), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn degenerate_spec() {
        let s = AllianceSpec::new(1, vec![Alliance::new([0])]).unwrap();
        assert!(validate_spec(&s).is_empty());
        assert_eq!(derive_topology(&s).unwrap(), TopologyMatrix::identity(1).unwrap());
        assert_eq!(enumerate_specs(1, 1).count(), 1);
    }

    #[test]
    fn counting_values() {
        assert_eq!(min_messages(1).unwrap(), 1);
        assert_eq!(min_messages(2).unwrap(), 2);
        assert_eq!(min_messages(3).unwrap(), 3);
        assert_eq!(min_messages(4).unwrap(), 6);
        assert!(min_messages(0).is_err());
        assert_eq!(max_alliances(3), 3);
        assert_eq!(max_alliances(5), 3);
        assert_eq!(max_alliances(6), 4);
        assert_eq!(max_alliances(1), 1);
        assert_eq!(max_alliances(2), 2);
        for n in 3..12 {
            assert_eq!(min_messages(n + 1).unwrap(), min_messages(n).unwrap() + n);
        }
    }

    #[test]
    fn enumeration_small_cases() {
        let specs: Vec<_> = enumerate_specs(3, 3).collect();
        assert_eq!(specs.len(), 2);
        let topologies: Vec<_> = specs.iter().map(|s| derive_topology(s).unwrap()).collect();
        assert!(topologies.contains(&cyclic3_matrix()));
        let one: Vec<_> = enumerate_specs(2, 2).collect();
        assert_eq!(one.len(), 1);
        assert_eq!(derive_topology(&one[0]).unwrap(), TopologyMatrix::all_ones(2).unwrap());
        assert_eq!(enumerate_specs(2, 3).count(), 0);
        assert_eq!(enumerate_specs(3, 0).count(), 0);
        assert_eq!(enumerate_specs(3, 1).count(), 0);
    }

    /// Brute force over every assignment of messages to alliances and partners,
    /// independent of the iterator's partition walk.
    fn brute_force_count(k: usize, n: usize) -> usize {
        let mut found = std::collections::BTreeSet::new();
        let total = (n * n).pow(k as u32);
        for mut code in 0..total {
            let mut alliances = vec![Alliance::default(); n];
            let mut ok = true;
            for m in 0..k {
                let own = code % n;
                let partner = (code / n) % n;
                code /= n * n;
                if own == partner {
                    ok = false;
                    break;
                }
                alliances[own] = std::mem::take(&mut alliances[own]).with_sub(partner, [m]);
            }
            if !ok || alliances.iter().any(|a| a.members.is_empty()) {
                continue;
            }
            let spec = AllianceSpec::new(k, alliances).unwrap();
            if validate_spec(&spec).is_empty() {
                found.insert(derive_unchecked(&spec).key());
            }
        }
        found.len()
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for k in 2..=4 {
            for n in 2..=max_alliances(k) {
                assert_eq!(count_specs(k, n), brute_force_count(k, n), "k={k} n={n}");
            }
        }
    }

    #[test]
    fn min_messages_matches_enumeration() {
        // smallest k admitting n alliances, found by search
        for n in 1..=4 {
            let smallest = (1..=8).find(|&k| enumerate_specs(k, n).next().is_some());
            assert_eq!(smallest, Some(min_messages(n).unwrap()), "n={n}");
        }
    }

    #[test]
    fn derived_topologies_are_maximal() {
        for k in 2..=5 {
            for n in 2..=max_alliances(k) {
                for s in enumerate_specs(k, n) {
                    let t = derive_topology(&s).unwrap();
                    assert!(is_maximal_by_definition(&t).is_maximal, "{s}");
                }
            }
        }
    }

    #[test]
    fn two_alliances_are_complete_bipartite() {
        for s in enumerate_specs(5, 2) {
            let t = derive_topology(&s).unwrap();
            let of = s.alliance_of();
            for i in 0..5 {
                for j in 0..5 {
                    assert_eq!(t.get(i, j), i == j || of[i] != of[j]);
                }
            }
        }
    }

    #[test]
    fn recover_round_trip() {
        for s in [paired4_spec(), ring6_spec(), cyclic3_spec()] {
            let t = derive_topology(&s).unwrap();
            let r = recover_spec(&t).unwrap();
            assert_eq!(r, s.normalize());
            assert_eq!(derive_topology(&r).unwrap(), t);
        }
        assert!(recover_spec(&conflict6()).is_none());
        let r = recover_spec(&TopologyMatrix::identity(3).unwrap()).unwrap();
        assert!(!validate_spec(&r).is_empty());
    }
}
