//! Shared domain types: topology matrices, message graphs, alliance
//! specifications and maximality verdicts.
//!
//! Indices are 0-based in the API and 1-based in every piece of text the
//! types render (topology grids excepted, which have no indices).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bits::{bit, full, members};
use crate::error::{Error, Result};
use crate::matrix::MtmViolation;

/// Largest supported number of users; rows are stored as `u64` bitmasks.
pub const MAX_USERS: usize = 64;

/// K×K connectivity: `get(i, j)` is true iff receiver `i` hears transmitter `j`.
///
/// The diagonal is always 1; every constructor rejects a missing direct link.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TopologyMatrix {
    k: usize,
    rows: Vec<u64>,
}

impl TopologyMatrix {
    /// Builds a matrix from row bitmasks (bit `j` of `rows[i]` is entry `(i, j)`).
    pub fn from_rows(rows: Vec<u64>) -> Result<Self> {
        let k = rows.len();
        check_size(k)?;
        for (i, &row) in rows.iter().enumerate() {
            if row & !full(k) != 0 {
                return Err(Error::IndexOutOfRange {
                    index: 64 - row.leading_zeros() as usize,
                    k,
                });
            }
            if row & bit(i) == 0 {
                return Err(Error::MissingDirectLink { index: i + 1 });
            }
        }
        Ok(Self { k, rows })
    }

    pub fn from_fn(k: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        check_size(k)?;
        let rows = (0..k)
            .map(|i| (0..k).filter(|&j| f(i, j)).fold(0u64, |acc, j| acc | bit(j)))
            .collect();
        Self::from_rows(rows)
    }

    pub fn identity(k: usize) -> Result<Self> {
        Self::from_fn(k, |i, j| i == j)
    }

    pub fn all_ones(k: usize) -> Result<Self> {
        Self::from_fn(k, |_, _| true)
    }

    /// Number of users K.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, receiver: usize, transmitter: usize) -> bool {
        self.rows[receiver] & bit(transmitter) != 0
    }

    /// Transmitters heard by `receiver`, including its own.
    pub fn row(&self, receiver: usize) -> u64 {
        self.rows[receiver]
    }

    /// Transmitters heard by `receiver`, excluding its own.
    pub fn interferers(&self, receiver: usize) -> u64 {
        self.rows[receiver] & !bit(receiver)
    }

    /// Receivers hearing `transmitter`, including its own.
    pub fn column(&self, transmitter: usize) -> u64 {
        (0..self.k)
            .filter(|&i| self.get(i, transmitter))
            .fold(0, |acc, i| acc | bit(i))
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    /// Returns a copy with the link `transmitter -> receiver` present.
    pub fn with_link(&self, receiver: usize, transmitter: usize) -> Self {
        let mut rows = self.rows.clone();
        rows[receiver] |= bit(transmitter);
        Self { k: self.k, rows }
    }

    /// Off-diagonal links as (receiver, transmitter) pairs in row-major order.
    pub fn links(&self) -> Vec<(usize, usize)> {
        (0..self.k)
            .flat_map(|i| members(self.interferers(i)).map(move |j| (i, j)))
            .collect()
    }

    /// Absent off-diagonal links as (receiver, transmitter) pairs in row-major order.
    pub fn missing_links(&self) -> Vec<(usize, usize)> {
        (0..self.k)
            .flat_map(|i| members(!self.rows[i] & full(self.k)).map(move |j| (i, j)))
            .collect()
    }

    /// True iff every link of `other` is present here.
    pub fn dominates(&self, other: &TopologyMatrix) -> bool {
        self.k == other.k
            && self
                .rows
                .iter()
                .zip(&other.rows)
                .all(|(a, b)| b & !a == 0)
    }

    /// Row-major bit key with entry (0,0) as the most significant bit, so
    /// numeric order equals lexicographic order of the row-major bitstring.
    /// Only defined for K ≤ 8.
    pub fn key(&self) -> u64 {
        debug_assert!(self.k <= 8);
        let mut key = 0u64;
        for i in 0..self.k {
            for j in 0..self.k {
                key = (key << 1) | u64::from(self.get(i, j));
            }
        }
        key
    }

    /// Row-major '0'/'1' string without separators.
    pub fn bitstring(&self) -> String {
        (0..self.k)
            .flat_map(|i| (0..self.k).map(move |j| (i, j)))
            .map(|(i, j)| if self.get(i, j) { '1' } else { '0' })
            .collect()
    }
}

fn check_size(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::NoUsers);
    }
    if k > MAX_USERS {
        return Err(Error::TooManyUsers { k, max: MAX_USERS });
    }
    Ok(())
}

impl fmt::Display for TopologyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.k {
            for j in 0..self.k {
                f.write_str(if self.get(i, j) { "1" } else { "0" })?;
            }
            if i + 1 < self.k {
                f.write_str("\n")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for TopologyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self.to_string().lines().map(str::to_owned).collect();
        write!(f, "TopologyMatrix[{}]", rows.join(" "))
    }
}

/// Parses K lines of K binary characters. A trailing newline is accepted.
pub fn parse_topology(text: &str) -> Result<TopologyMatrix> {
    let lines: Vec<&str> = text.lines().collect();
    let lines: Vec<&str> = match lines.iter().rposition(|l| !l.trim_end().is_empty()) {
        Some(last) => lines[..=last].to_vec(),
        None => return Err(Error::EmptyTopology),
    };
    let k = lines[0].chars().count();
    check_size(k)?;
    if lines.len() != k {
        return Err(Error::WrongLineCount {
            expected: k,
            found: lines.len(),
        });
    }
    let mut rows = Vec::with_capacity(k);
    for (i, line) in lines.iter().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        let found = line.chars().count();
        if found != k {
            return Err(Error::RaggedLine {
                line: i + 1,
                expected: k,
                found,
            });
        }
        let mut row = 0u64;
        for (j, c) in line.chars().enumerate() {
            match c {
                '0' => {}
                '1' => row |= bit(j),
                other => {
                    return Err(Error::NonBinary {
                        line: i + 1,
                        column: j + 1,
                        found: other,
                    })
                }
            }
        }
        rows.push(row);
    }
    TopologyMatrix::from_rows(rows)
}

/// Renders the matrix as newline-terminated grid text.
pub fn serialize_topology(t: &TopologyMatrix) -> String {
    format!("{t}\n")
}

/// Alignment edges (undirected) and conflict edges (directed) between messages.
///
/// `conflict[i]` holds the sources whose transmitters receiver `i` hears, so
/// bit `j` set means the ordered edge (i, j): message `i` is conflicted by
/// source `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MessageGraph {
    pub(crate) k: usize,
    pub(crate) alignment: Vec<u64>,
    pub(crate) conflict: Vec<u64>,
}

impl MessageGraph {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn has_alignment(&self, i: usize, j: usize) -> bool {
        self.alignment[i] & bit(j) != 0
    }

    pub fn has_conflict(&self, i: usize, j: usize) -> bool {
        self.conflict[i] & bit(j) != 0
    }

    /// Alignment edges as pairs `(i, j)` with `i < j`.
    pub fn alignment_edges(&self) -> Vec<(usize, usize)> {
        (0..self.k)
            .flat_map(|i| members(self.alignment[i] & !full(i + 1)).map(move |j| (i, j)))
            .collect()
    }

    /// Conflict edges `(i, j)`: message `i` is conflicted by source `j`.
    pub fn conflict_edges(&self) -> Vec<(usize, usize)> {
        (0..self.k)
            .flat_map(|i| members(self.conflict[i]).map(move |j| (i, j)))
            .collect()
    }

    pub fn alignment_neighbors(&self, i: usize) -> u64 {
        self.alignment[i]
    }

    pub fn conflict_sources(&self, i: usize) -> u64 {
        self.conflict[i]
    }
}

/// One alliance: its members and the sub-alliances keyed by the (0-based)
/// index of the alliance that interferes them. Members not placed in any
/// sub-alliance are uninterfered.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Alliance {
    pub members: BTreeSet<usize>,
    pub suballiances: BTreeMap<usize, BTreeSet<usize>>,
}

impl Alliance {
    pub fn new(members: impl IntoIterator<Item = usize>) -> Self {
        Self {
            members: members.into_iter().collect(),
            suballiances: BTreeMap::new(),
        }
    }

    /// Adds `messages` to the sub-alliance interfered by alliance `partner`.
    pub fn with_sub(mut self, partner: usize, messages: impl IntoIterator<Item = usize>) -> Self {
        let entry = self.suballiances.entry(partner).or_default();
        for m in messages {
            self.members.insert(m);
            entry.insert(m);
        }
        self
    }

    /// |A[i][partner]|
    pub fn sub_len(&self, partner: usize) -> usize {
        self.suballiances.get(&partner).map_or(0, BTreeSet::len)
    }

    pub(crate) fn mask(&self) -> u64 {
        self.members.iter().fold(0, |acc, &m| acc | bit(m))
    }
}

/// Messages partitioned into ordered alliances, each split into sub-alliances.
///
/// Structural invariants are enforced by [`AllianceSpec::new`]; the counting
/// conditions (coverage, hostility, non-emptiness) are data checked by
/// [`crate::alliance::validate_spec`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllianceSpec {
    k: usize,
    alliances: Vec<Alliance>,
}

impl AllianceSpec {
    pub fn new(k: usize, alliances: Vec<Alliance>) -> Result<Self> {
        check_size(k)?;
        let n = alliances.len();
        if n == 0 {
            return Err(Error::MalformedSpec("no alliances".into()));
        }
        let mut seen = 0u64;
        for (i, a) in alliances.iter().enumerate() {
            for &m in &a.members {
                if m >= k {
                    return Err(Error::IndexOutOfRange { index: m + 1, k });
                }
                if seen & bit(m) != 0 {
                    return Err(Error::MalformedSpec(format!(
                        "message W{} appears in more than one alliance",
                        m + 1
                    )));
                }
                seen |= bit(m);
            }
            let mut in_sub = 0u64;
            for (&j, sub) in &a.suballiances {
                if j >= n || j == i {
                    return Err(Error::MalformedSpec(format!(
                        "alliance {} names invalid partner {}",
                        i + 1,
                        j + 1
                    )));
                }
                for &m in sub {
                    if !a.members.contains(&m) {
                        return Err(Error::MalformedSpec(format!(
                            "sub-alliance member W{} is not in alliance {}",
                            m + 1,
                            i + 1
                        )));
                    }
                    if in_sub & bit(m) != 0 {
                        return Err(Error::MalformedSpec(format!(
                            "W{} is in two sub-alliances of alliance {}",
                            m + 1,
                            i + 1
                        )));
                    }
                    in_sub |= bit(m);
                }
            }
        }
        if seen != full(k) {
            return Err(Error::MalformedSpec(
                "alliances do not cover every message".into(),
            ));
        }
        Ok(Self { k, alliances })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alliances(&self) -> &[Alliance] {
        &self.alliances
    }

    pub fn len(&self) -> usize {
        self.alliances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alliances.is_empty()
    }

    /// The single-user, single-alliance case.
    pub fn is_degenerate(&self) -> bool {
        self.k == 1 && self.alliances.len() == 1
    }

    /// Alliance index of every message.
    pub fn alliance_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for (i, a) in self.alliances.iter().enumerate() {
            for &m in &a.members {
                out[m] = i;
            }
        }
        out
    }

    /// Reorders alliances by smallest member, remapping partner indices.
    pub fn normalize(&self) -> AllianceSpec {
        let mut order: Vec<usize> = (0..self.alliances.len()).collect();
        order.sort_by_key(|&i| self.alliances[i].members.iter().next().copied().unwrap_or(usize::MAX));
        let mut new_index = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            new_index[old] = new;
        }
        let alliances = order
            .iter()
            .map(|&old| {
                let a = &self.alliances[old];
                Alliance {
                    members: a.members.clone(),
                    suballiances: a
                        .suballiances
                        .iter()
                        .map(|(&j, s)| (new_index[j], s.clone()))
                        .collect(),
                }
            })
            .collect();
        AllianceSpec {
            k: self.k,
            alliances,
        }
    }

    pub fn from_document(doc: &SpecDocument) -> Result<Self> {
        let n = doc.alliances.len();
        let mut alliances = Vec::with_capacity(n);
        for (i, a) in doc.alliances.iter().enumerate() {
            let mut alliance = Alliance::default();
            for sub in &a.suballiances {
                let msgs = doc.zero_based_messages(&sub.messages)?;
                match sub.interferers.as_slice() {
                    [] => alliance.members.extend(msgs),
                    [j] => {
                        if *j == 0 || *j > n {
                            return Err(Error::MalformedSpec(format!(
                                "alliance {} names interferer {j}, expected 1..={n}",
                                i + 1
                            )));
                        }
                        alliance = alliance.with_sub(j - 1, msgs);
                    }
                    _ => {
                        return Err(Error::MalformedSpec(format!(
                            "alliance {} has a sub-alliance with several interferers; \
                             use the generalized construction",
                            i + 1
                        )))
                    }
                }
            }
            alliances.push(alliance);
        }
        Self::new(doc.k, alliances)
    }

    pub fn to_document(&self) -> SpecDocument {
        let alliances = self
            .alliances
            .iter()
            .map(|a| {
                let mut placed = BTreeSet::new();
                let mut subs: Vec<SubAllianceDocument> = a
                    .suballiances
                    .iter()
                    .filter(|(_, s)| !s.is_empty())
                    .map(|(&j, s)| {
                        placed.extend(s.iter().copied());
                        SubAllianceDocument {
                            messages: s.iter().map(|m| m + 1).collect(),
                            interferers: vec![j + 1],
                        }
                    })
                    .collect();
                let rest: Vec<usize> = a.members.difference(&placed).map(|m| m + 1).collect();
                if !rest.is_empty() {
                    subs.push(SubAllianceDocument {
                        messages: rest,
                        interferers: vec![],
                    });
                }
                AllianceDocument { suballiances: subs }
            })
            .collect();
        SpecDocument {
            k: self.k,
            alliances,
        }
    }
}

impl fmt::Display for AllianceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.alliances.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "A{} = {}", i + 1, crate::bits::show(a.mask()))?;
            for (&j, s) in &a.suballiances {
                if !s.is_empty() {
                    let set = s.iter().fold(0, |acc, &m| acc | bit(m));
                    write!(f, ", A{},{} = {}", i + 1, j + 1, crate::bits::show(set))?;
                }
            }
        }
        Ok(())
    }
}

/// A generalized sub-alliance: messages interfered by every alliance in `interferers`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GeneralizedSubAlliance {
    pub messages: BTreeSet<usize>,
    pub interferers: BTreeSet<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GeneralizedAlliance {
    pub suballiances: Vec<GeneralizedSubAlliance>,
}

impl GeneralizedAlliance {
    pub fn with_sub(
        mut self,
        interferers: impl IntoIterator<Item = usize>,
        messages: impl IntoIterator<Item = usize>,
    ) -> Self {
        self.suballiances.push(GeneralizedSubAlliance {
            messages: messages.into_iter().collect(),
            interferers: interferers.into_iter().collect(),
        });
        self
    }

    pub fn members(&self) -> BTreeSet<usize> {
        self.suballiances
            .iter()
            .flat_map(|s| s.messages.iter().copied())
            .collect()
    }

    pub(crate) fn mask(&self) -> u64 {
        self.suballiances
            .iter()
            .flat_map(|s| s.messages.iter())
            .fold(0, |acc, &m| acc | bit(m))
    }
}

/// Alliances split into generalized sub-alliances, each tagged with a set of
/// interfering alliance indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralizedAllianceSpec {
    k: usize,
    alliances: Vec<GeneralizedAlliance>,
}

impl GeneralizedAllianceSpec {
    /// Checks structure: sub-alliances partition the messages and interferer
    /// indices name other alliances.
    pub fn new(k: usize, alliances: Vec<GeneralizedAlliance>) -> Result<Self> {
        check_size(k)?;
        let n = alliances.len();
        if n == 0 {
            return Err(Error::MalformedSpec("no alliances".into()));
        }
        let mut seen = 0u64;
        for (i, a) in alliances.iter().enumerate() {
            for s in &a.suballiances {
                for &e in &s.interferers {
                    if e >= n || e == i {
                        return Err(Error::MalformedSpec(format!(
                            "alliance {} names invalid interferer {}",
                            i + 1,
                            e + 1
                        )));
                    }
                }
                for &m in &s.messages {
                    if m >= k {
                        return Err(Error::IndexOutOfRange { index: m + 1, k });
                    }
                    if seen & bit(m) != 0 {
                        return Err(Error::MalformedSpec(format!(
                            "message W{} appears twice",
                            m + 1
                        )));
                    }
                    seen |= bit(m);
                }
            }
        }
        if seen != full(k) {
            return Err(Error::MalformedSpec(
                "sub-alliances do not cover every message".into(),
            ));
        }
        Ok(Self { k, alliances })
    }

    /// Lifts a plain specification: each sub-alliance gets a singleton interferer set.
    pub fn from_plain(spec: &AllianceSpec) -> Self {
        let alliances = spec
            .alliances()
            .iter()
            .map(|a| {
                let mut placed = BTreeSet::new();
                let mut subs: Vec<GeneralizedSubAlliance> = a
                    .suballiances
                    .iter()
                    .filter(|(_, s)| !s.is_empty())
                    .map(|(&j, s)| {
                        placed.extend(s.iter().copied());
                        GeneralizedSubAlliance {
                            messages: s.clone(),
                            interferers: BTreeSet::from([j]),
                        }
                    })
                    .collect();
                let rest: BTreeSet<usize> = a.members.difference(&placed).copied().collect();
                if !rest.is_empty() {
                    subs.push(GeneralizedSubAlliance {
                        messages: rest,
                        interferers: BTreeSet::new(),
                    });
                }
                GeneralizedAlliance { suballiances: subs }
            })
            .collect();
        Self {
            k: spec.k(),
            alliances,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alliances(&self) -> &[GeneralizedAlliance] {
        &self.alliances
    }

    pub fn len(&self) -> usize {
        self.alliances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alliances.is_empty()
    }

    pub fn is_degenerate(&self) -> bool {
        self.k == 1 && self.alliances.len() == 1
    }

    pub fn alliance_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for (i, a) in self.alliances.iter().enumerate() {
            for s in &a.suballiances {
                for &m in &s.messages {
                    out[m] = i;
                }
            }
        }
        out
    }

    pub fn from_document(doc: &SpecDocument) -> Result<Self> {
        let n = doc.alliances.len();
        let mut alliances = Vec::with_capacity(n);
        for (i, a) in doc.alliances.iter().enumerate() {
            let mut alliance = GeneralizedAlliance::default();
            for sub in &a.suballiances {
                let msgs = doc.zero_based_messages(&sub.messages)?;
                let mut ints = Vec::with_capacity(sub.interferers.len());
                for &j in &sub.interferers {
                    if j == 0 || j > n {
                        return Err(Error::MalformedSpec(format!(
                            "alliance {} names interferer {j}, expected 1..={n}",
                            i + 1
                        )));
                    }
                    ints.push(j - 1);
                }
                alliance = alliance.with_sub(ints, msgs);
            }
            alliances.push(alliance);
        }
        Self::new(doc.k, alliances)
    }

    pub fn to_document(&self) -> SpecDocument {
        SpecDocument {
            k: self.k,
            alliances: self
                .alliances
                .iter()
                .map(|a| AllianceDocument {
                    suballiances: a
                        .suballiances
                        .iter()
                        .map(|s| SubAllianceDocument {
                            messages: s.messages.iter().map(|m| m + 1).collect(),
                            interferers: s.interferers.iter().map(|j| j + 1).collect(),
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    /// True when every interferer list has at most one element.
    pub fn is_plain(&self) -> bool {
        self.alliances
            .iter()
            .flat_map(|a| &a.suballiances)
            .all(|s| s.interferers.len() <= 1)
    }
}

/// JSON form shared by plain and generalized specifications (1-based indices).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecDocument {
    pub k: usize,
    pub alliances: Vec<AllianceDocument>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AllianceDocument {
    pub suballiances: Vec<SubAllianceDocument>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubAllianceDocument {
    pub messages: Vec<usize>,
    #[serde(default)]
    pub interferers: Vec<usize>,
}

impl SpecDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::MalformedSpec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec documents always serialize")
    }

    fn zero_based_messages(&self, msgs: &[usize]) -> Result<Vec<usize>> {
        msgs.iter()
            .map(|&m| {
                if m == 0 || m > self.k {
                    Err(Error::IndexOutOfRange { index: m, k: self.k })
                } else {
                    Ok(m - 1)
                }
            })
            .collect()
    }

    /// True when any sub-alliance lists more than one interferer.
    pub fn is_generalized(&self) -> bool {
        self.alliances
            .iter()
            .flat_map(|a| &a.suballiances)
            .any(|s| s.interferers.len() > 1)
    }
}

/// Why a topology is or is not maximal. Indices are 0-based; the serialized
/// form uses 1-based numbers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// K = 1: nothing can be added, the verdict holds vacuously.
    Degenerate,
    /// Conflict edge (receiver, source) inside one alignment set.
    InternalConflict {
        #[serde(serialize_with = "crate::bits::ser_index")]
        set: usize,
        #[serde(serialize_with = "crate::bits::ser_index")]
        receiver: usize,
        #[serde(serialize_with = "crate::bits::ser_index")]
        source: usize,
    },
    /// The link transmitter -> receiver can be added without internal conflict.
    AddableLink {
        #[serde(serialize_with = "crate::bits::ser_index")]
        receiver: usize,
        #[serde(serialize_with = "crate::bits::ser_index")]
        transmitter: usize,
    },
    /// A block condition of the matrix discriminant fails.
    Mtm(MtmViolation),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Degenerate => f.write_str("degenerate single-user topology"),
            Witness::InternalConflict {
                set,
                receiver,
                source,
            } => write!(
                f,
                "internal conflict in alignment set {}: receiver {} hears transmitter {} (W{} and W{})",
                set + 1,
                receiver + 1,
                source + 1,
                receiver + 1,
                source + 1
            ),
            Witness::AddableLink {
                receiver,
                transmitter,
            } => write!(
                f,
                "link from transmitter {} to receiver {} can be added without internal conflict",
                transmitter + 1,
                receiver + 1
            ),
            Witness::Mtm(v) => v.fmt(f),
        }
    }
}

/// Outcome of a maximality check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MaximalityVerdict {
    pub is_dof_optimal: bool,
    pub is_maximal: bool,
    pub witness: Option<Witness>,
}

impl MaximalityVerdict {
    pub fn is_degenerate(&self) -> bool {
        matches!(self.witness, Some(Witness::Degenerate))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_small_grids() {
        let t = parse_topology("11\n11").unwrap();
        assert_eq!(t, TopologyMatrix::all_ones(2).unwrap());
        let t = parse_topology("10\n01\n").unwrap();
        assert_eq!(t, TopologyMatrix::identity(2).unwrap());
    }

    #[test]
    fn parse_cyclic_three_user() {
        let t = parse_topology("110\n011\n101").unwrap();
        assert!(t.get(0, 1) && t.get(1, 2) && t.get(2, 0));
        assert!(!t.get(0, 2) && !t.get(1, 0) && !t.get(2, 1));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_topology("11\n1"),
            Err(Error::RaggedLine { line: 2, .. })
        ));
        assert!(matches!(
            parse_topology("1x\n11"),
            Err(Error::NonBinary { found: 'x', .. })
        ));
        assert_eq!(
            parse_topology("11\n10").unwrap_err(),
            Error::MissingDirectLink { index: 2 }
        );
        assert!(parse_topology("110\n011").is_err());
        assert_eq!(parse_topology("").unwrap_err(), Error::EmptyTopology);
        let msg = parse_topology("10\n00").unwrap_err().to_string();
        assert!(msg.contains("(2, 2)"), "{msg}");
    }

    #[test]
    fn serialize_matches_grid() {
        assert_eq!(
            serialize_topology(&TopologyMatrix::identity(2).unwrap()),
            "10\n01\n"
        );
        assert_eq!(
            serialize_topology(&TopologyMatrix::all_ones(2).unwrap()),
            "11\n11\n"
        );
    }

    #[test]
    fn key_orders_lexicographically() {
        let a = parse_topology("10\n01").unwrap();
        let b = parse_topology("10\n11").unwrap();
        assert!(a.key() < b.key());
        assert_eq!(a.bitstring(), "1001");
    }

    #[test]
    fn structural_spec_checks() {
        // overlapping alliances
        let bad = AllianceSpec::new(2, vec![Alliance::new([0, 1]), Alliance::new([1])]);
        assert!(bad.is_err());
        // partner is itself
        let bad = AllianceSpec::new(2, vec![Alliance::new([0]).with_sub(0, [0]), Alliance::new([1])]);
        assert!(bad.is_err());
        // uncovered message
        assert!(AllianceSpec::new(3, vec![Alliance::new([0]), Alliance::new([1])]).is_err());
    }

    #[test]
    fn document_round_trip() {
        let json = r#"{"k":2,"alliances":[
            {"suballiances":[{"messages":[1],"interferers":[2]}]},
            {"suballiances":[{"messages":[2],"interferers":[1]}]}]}"#;
        let doc = SpecDocument::from_json(json).unwrap();
        let spec = AllianceSpec::from_document(&doc).unwrap();
        assert_eq!(spec.alliances()[0].sub_len(1), 1);
        assert_eq!(spec.to_document(), doc);
        assert!(!doc.is_generalized());
    }
}
