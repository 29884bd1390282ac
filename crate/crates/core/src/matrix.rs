//! Matrix-side view of maximality: simultaneous relabeling, block structure,
//! the MTM discriminant and the transformation of non-MTM topologies.
//!
//! Rows are receivers. An interference block is the segment of a receiver's
//! row over another block's columns; it is complete when every entry is 1.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::alliance::{derive_unchecked, validate_spec};
use crate::bits::{bit, from_members, lowest, members, show};
use crate::error::{Error, Result};
use crate::graph::{alignment_sets, build_message_graph, internal_conflicts};
use crate::model::{Alliance, AllianceSpec, MaximalityVerdict, TopologyMatrix, Witness};

/// A relabeling of messages: `get(old)` is the new index of message `old`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Serialize for Permutation {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        crate::bits::ser_indices(&self.map, s)
    }
}

impl Permutation {
    /// Validates that `map` is a bijection on `0..map.len()`.
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let k = map.len();
        let mut seen = vec![false; k];
        for &m in &map {
            if m >= k || std::mem::replace(&mut seen[m], true) {
                return Err(Error::InvalidPermutation { k });
            }
        }
        Ok(Self { map })
    }

    pub fn identity(k: usize) -> Self {
        Self {
            map: (0..k).collect(),
        }
    }

    /// Exchanges messages `i` and `j`.
    pub fn swap(k: usize, i: usize, j: usize) -> Result<Self> {
        if i >= k || j >= k {
            return Err(Error::IndexOutOfRange {
                index: i.max(j) + 1,
                k,
            });
        }
        let mut p = Self::identity(k);
        p.map.swap(i, j);
        Ok(p)
    }

    /// Builds the permutation that moves `order[n]` to position `n`.
    pub fn from_order(order: &[usize]) -> Result<Self> {
        Self::new(order.to_vec())?;
        let mut map = vec![0; order.len()];
        for (new, &old) in order.iter().enumerate() {
            map[old] = new;
        }
        Ok(Self { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, old: usize) -> usize {
        self.map[old]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.map
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &m)| i == m)
    }

    pub fn inverse(&self) -> Self {
        let mut map = vec![0; self.map.len()];
        for (old, &new) in self.map.iter().enumerate() {
            map[new] = old;
        }
        Self { map }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Permutation) -> Self {
        Self {
            map: self.map.iter().map(|&m| next.map[m]).collect(),
        }
    }

    pub(crate) fn apply_mask(&self, set: u64) -> u64 {
        members(set).fold(0, |acc, m| acc | bit(self.map[m]))
    }
}

/// Relabels rows and columns together: entry (i, j) moves to (p(i), p(j)).
pub fn apply_permutation(t: &TopologyMatrix, p: &Permutation) -> Result<TopologyMatrix> {
    if p.len() != t.k() {
        return Err(Error::PermutationSize {
            expected: t.k(),
            found: p.len(),
        });
    }
    let mut rows = vec![0u64; t.k()];
    for (i, &row) in t.rows().iter().enumerate() {
        rows[p.get(i)] = p.apply_mask(row);
    }
    TopologyMatrix::from_rows(rows)
}

pub(crate) fn permute_unchecked(t: &TopologyMatrix, p: &Permutation) -> TopologyMatrix {
    apply_permutation(t, p).expect("permutation sized to the matrix")
}

/// Orders messages so every alignment set is contiguous: sets by smallest
/// member, members ascending.
pub fn canonicalize(t: &TopologyMatrix) -> (TopologyMatrix, Permutation) {
    let p = alignment_sets(&build_message_graph(t));
    let order: Vec<usize> = p.masks().iter().flat_map(|&m| members(m)).collect();
    let perm = Permutation::from_order(&order).expect("alignment sets partition the messages");
    (permute_unchecked(t, &perm), perm)
}

/// Twin classes: messages that never conflict with each other and are heard
/// by exactly the same other receivers. Ordered by smallest member.
pub fn twin_partition(t: &TopologyMatrix) -> Vec<u64> {
    let k = t.k();
    let cols: Vec<u64> = (0..k).map(|j| t.column(j)).collect();
    let mut assigned = 0u64;
    let mut classes = Vec::new();
    for i in 0..k {
        if assigned & bit(i) != 0 {
            continue;
        }
        let mut class = bit(i);
        for j in i + 1..k {
            if assigned & bit(j) != 0 || t.get(i, j) || t.get(j, i) {
                continue;
            }
            let outside = !(bit(i) | bit(j));
            if cols[i] & outside == cols[j] & outside {
                class |= bit(j);
            }
        }
        assigned |= class;
        classes.push(class);
    }
    classes
}

/// A principal submatrix range in canonical order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Block {
    pub start: usize,
    pub len: usize,
}

/// A complete interference block: receiver `receiver` hears every message of
/// block `source`, whose columns span `start..start + len`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct InterferenceBlock {
    #[serde(serialize_with = "crate::bits::ser_index")]
    pub source: usize,
    #[serde(serialize_with = "crate::bits::ser_index")]
    pub receiver: usize,
    pub start: usize,
    pub len: usize,
}

/// A failed block condition. Indices are 0-based; text and serialized forms
/// are 1-based. Block numbers follow the order of the blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MtmViolation {
    /// A receiver hears several twin classes that sit inside one tentative block.
    MultipleInterferenceBlocks {
        #[serde(serialize_with = "crate::bits::ser_index")]
        receiver: usize,
        #[serde(serialize_with = "crate::bits::ser_index_sets")]
        classes: Vec<Vec<usize>>,
    },
    /// The principal submatrix of a block is not an identity.
    NonIdentityBlock {
        #[serde(serialize_with = "crate::bits::ser_index")]
        block: usize,
        #[serde(serialize_with = "crate::bits::ser_index")]
        receiver: usize,
        #[serde(serialize_with = "crate::bits::ser_index")]
        source: usize,
    },
    /// A receiver hears part, but not all, of a block.
    IncompleteInterferenceBlock {
        #[serde(serialize_with = "crate::bits::ser_index")]
        receiver: usize,
        #[serde(serialize_with = "crate::bits::ser_index")]
        block: usize,
        #[serde(serialize_with = "crate::bits::ser_indices")]
        heard: Vec<usize>,
        #[serde(serialize_with = "crate::bits::ser_indices")]
        missing: Vec<usize>,
    },
    /// A receiver hears the wrong number of complete interference blocks.
    BlockCount {
        #[serde(serialize_with = "crate::bits::ser_index")]
        message: usize,
        count: usize,
        expected: usize,
    },
    /// No interference block joins the two blocks in either direction.
    UnlinkedPair {
        #[serde(serialize_with = "crate::bits::ser_index")]
        first: usize,
        #[serde(serialize_with = "crate::bits::ser_index")]
        second: usize,
    },
    /// No receiver hears this block.
    UnheardBlock {
        #[serde(serialize_with = "crate::bits::ser_index")]
        block: usize,
    },
}

fn show_list(v: &[usize]) -> String {
    show(from_members(v.iter().copied()))
}

impl fmt::Display for MtmViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MultipleInterferenceBlocks { receiver, classes } => {
                let sets: Vec<String> = classes.iter().map(|c| show_list(c)).collect();
                write!(
                    f,
                    "receiver {} hears {} interference blocks inside one tentative block: {}",
                    receiver + 1,
                    classes.len(),
                    sets.join(" and ")
                )
            }
            Self::NonIdentityBlock {
                block,
                receiver,
                source,
            } => write!(
                f,
                "block {} is not an identity: receiver {} hears transmitter {}",
                block + 1,
                receiver + 1,
                source + 1
            ),
            Self::IncompleteInterferenceBlock {
                receiver,
                block,
                heard,
                missing,
            } => write!(
                f,
                "incomplete interference block: receiver {} hears {} but not {} of block {}",
                receiver + 1,
                show_list(heard),
                show_list(missing),
                block + 1
            ),
            Self::BlockCount {
                message,
                count,
                expected,
            } => write!(
                f,
                "receiver of W{} hears {count} interference block{}, expected {expected}",
                message + 1,
                if *count == 1 { "" } else { "s" }
            ),
            Self::UnlinkedPair { first, second } => write!(
                f,
                "blocks {} and {} are not linked by any interference block",
                first + 1,
                second + 1
            ),
            Self::UnheardBlock { block } => {
                write!(f, "no receiver hears block {}", block + 1)
            }
        }
    }
}

/// Blocks found on a canonical matrix, with every defect.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BlockDecomposition {
    pub permutation: Permutation,
    pub blocks: Vec<Block>,
    pub interference_blocks: Vec<InterferenceBlock>,
    pub violations: Vec<MtmViolation>,
}

impl BlockDecomposition {
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.len).collect()
    }
}

/// Block conditions over `blocks` (masks in the matrix's own labels).
///
/// Every receiver must hear exactly `expected` complete blocks and nothing
/// else outside its own block; every pair of blocks must be linked. With
/// `twins`, a receiver hearing several twin classes within one block is also
/// reported. Violations come back in witness priority order.
pub(crate) fn block_violations(
    t: &TopologyMatrix,
    blocks: &[u64],
    expected: usize,
    twins: Option<&[u64]>,
) -> Vec<MtmViolation> {
    let k = t.k();
    let block_of: Vec<usize> = (0..k)
        .map(|m| blocks.iter().position(|&b| b & bit(m) != 0).expect("blocks cover messages"))
        .collect();
    let mut multiple = Vec::new();
    let mut non_identity = Vec::new();
    let mut incomplete = Vec::new();
    let mut counts = Vec::new();
    let mut heard_by = vec![0u64; blocks.len()];
    let mut linked = vec![0u64; blocks.len()];

    for r in 0..k {
        let own = block_of[r];
        let heard = t.interferers(r);
        for source in members(heard & blocks[own]) {
            non_identity.push(MtmViolation::NonIdentityBlock {
                block: own,
                receiver: r,
                source,
            });
        }
        let mut full = 0;
        for (b, &mask) in blocks.iter().enumerate() {
            if b == own {
                continue;
            }
            let part = heard & mask;
            if part == 0 {
                continue;
            }
            if part == mask {
                full += 1;
                heard_by[b] |= bit(r);
                linked[own] |= bit(b);
                linked[b] |= bit(own);
            } else {
                incomplete.push(MtmViolation::IncompleteInterferenceBlock {
                    receiver: r,
                    block: b,
                    heard: members(part).collect(),
                    missing: members(mask & !part).collect(),
                });
            }
            if let Some(twins) = twins {
                let classes: Vec<Vec<usize>> = twins
                    .iter()
                    .filter(|&&c| c & part != 0)
                    .map(|&c| members(c).collect())
                    .collect();
                if classes.len() > 1 {
                    multiple.push(MtmViolation::MultipleInterferenceBlocks {
                        receiver: r,
                        classes,
                    });
                }
            }
        }
        if full != expected {
            counts.push(MtmViolation::BlockCount {
                message: r,
                count: full,
                expected,
            });
        }
    }

    let mut unlinked = Vec::new();
    for a in 0..blocks.len() {
        for b in a + 1..blocks.len() {
            if linked[a] & bit(b) == 0 {
                unlinked.push(MtmViolation::UnlinkedPair {
                    first: a,
                    second: b,
                });
            }
        }
    }
    let unheard = (0..blocks.len())
        .filter(|&b| heard_by[b] == 0)
        .map(|block| MtmViolation::UnheardBlock { block });

    let mut out = multiple;
    out.extend(non_identity);
    out.extend(incomplete);
    out.extend(counts);
    out.extend(unlinked);
    out.extend(unheard);
    out
}

/// Classifies the blocks of a matrix already in canonical order.
pub fn find_blocks(t: &TopologyMatrix) -> Result<BlockDecomposition> {
    let (_, perm) = canonicalize(t);
    if !perm.is_identity() {
        return Err(Error::NotCanonical);
    }
    Ok(decompose_canonical(t, perm))
}

/// Canonicalizes, then classifies blocks; indices refer to the canonical order.
pub fn decompose(t: &TopologyMatrix) -> BlockDecomposition {
    let (c, perm) = canonicalize(t);
    decompose_canonical(&c, perm)
}

fn decompose_canonical(t: &TopologyMatrix, permutation: Permutation) -> BlockDecomposition {
    let sets = alignment_sets(&build_message_graph(t));
    let masks = sets.masks();
    let blocks: Vec<Block> = masks
        .iter()
        .map(|&m| Block {
            start: lowest(m),
            len: m.count_ones() as usize,
        })
        .collect();
    let mut interference_blocks = Vec::new();
    for r in 0..t.k() {
        let heard = t.interferers(r);
        for (b, &mask) in masks.iter().enumerate() {
            if mask & bit(r) == 0 && heard & mask == mask {
                interference_blocks.push(InterferenceBlock {
                    source: b,
                    receiver: r,
                    start: blocks[b].start,
                    len: blocks[b].len,
                });
            }
        }
    }
    let twins = twin_partition(t);
    let violations = if t.k() == 1 {
        Vec::new()
    } else {
        block_violations(t, masks, 1, Some(&twins))
    };
    BlockDecomposition {
        permutation,
        blocks,
        interference_blocks,
        violations,
    }
}

/// The MTM discriminant: tentative blocks are the alignment sets; every one
/// must be an alliance block, every receiver must hear exactly one complete
/// interference block, and every pair of blocks must be linked.
pub fn is_mtm(t: &TopologyMatrix) -> MaximalityVerdict {
    if t.k() == 1 {
        return MaximalityVerdict {
            is_dof_optimal: true,
            is_maximal: true,
            witness: Some(Witness::Degenerate),
        };
    }
    let g = build_message_graph(t);
    let sets = alignment_sets(&g);
    let is_dof_optimal = internal_conflicts(&g, &sets).is_empty();
    let twins = twin_partition(t);
    let violations = block_violations(t, sets.masks(), 1, Some(&twins));
    MaximalityVerdict {
        is_dof_optimal,
        is_maximal: violations.is_empty(),
        witness: violations.into_iter().next().map(Witness::Mtm),
    }
}

/// Every violation of the MTM discriminant, in the input's own labels.
pub fn mtm_violations(t: &TopologyMatrix) -> Vec<MtmViolation> {
    if t.k() == 1 {
        return Vec::new();
    }
    let sets = alignment_sets(&build_message_graph(t));
    block_violations(t, sets.masks(), 1, Some(&twin_partition(t)))
}

/// Renders a canonical matrix with `|` and `-` at block boundaries.
pub fn annotated_grid(t: &TopologyMatrix, blocks: &[Block]) -> String {
    let cuts: Vec<usize> = blocks.iter().skip(1).map(|b| b.start).collect();
    let width = t.k() + cuts.len();
    let mut out = String::new();
    for i in 0..t.k() {
        if cuts.contains(&i) {
            let mut rule = String::new();
            for j in 0..t.k() {
                if cuts.contains(&j) {
                    rule.push('+');
                }
                rule.push('-');
            }
            debug_assert_eq!(rule.len(), width);
            out.push_str(&rule);
            out.push('\n');
        }
        for j in 0..t.k() {
            if cuts.contains(&j) {
                out.push('|');
            }
            out.push(if t.get(i, j) { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

/// How unlinked alliance pairs are repaired.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Combine the two alliances into one.
    Merge,
    /// Let an uninterfered member of one alliance hear the other.
    AddLinks,
    /// Add links when an uninterfered member exists, otherwise merge.
    Auto,
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "merge" => Ok(Self::Merge),
            "add-links" => Ok(Self::AddLinks),
            "auto" => Ok(Self::Auto),
            other => Err(Error::InvalidParameter(format!(
                "unknown strategy '{other}', expected merge, add-links or auto"
            ))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Merge => "merge",
            Self::AddLinks => "add-links",
            Self::Auto => "auto",
        })
    }
}

/// Output of [`transform_to_mtm`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Transformation {
    #[serde(serialize_with = "ser_matrix")]
    pub matrix: TopologyMatrix,
    /// Links added, as (receiver, transmitter).
    #[serde(serialize_with = "crate::bits::ser_pairs")]
    pub added_links: Vec<(usize, usize)>,
    /// Member sets of alliances created by merging.
    #[serde(serialize_with = "crate::bits::ser_index_sets")]
    pub merged: Vec<Vec<usize>>,
    /// The alliance specification the result is derived from.
    #[serde(skip)]
    pub spec: AllianceSpec,
}

fn ser_matrix<S: serde::Serializer>(t: &TopologyMatrix, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(t.to_string().lines())
}

/// Working state: alliances and the alliance each message hears.
struct Plan {
    alliances: Vec<u64>,
    partner: Vec<Option<usize>>,
}

impl Plan {
    fn linked(&self, a: usize, b: usize) -> bool {
        let hears = |x: usize, y: usize| {
            members(self.alliances[x]).any(|m| self.partner[m] == Some(y))
        };
        hears(a, b) || hears(b, a)
    }

    fn first_unlinked(&self) -> Option<(usize, usize)> {
        let n = self.alliances.len();
        (0..n)
            .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
            .find(|&(a, b)| !self.linked(a, b))
    }

    fn heard(&self, a: usize) -> bool {
        self.partner.contains(&Some(a))
    }

    /// Lowest free message outside alliance `a`.
    fn free_outside(&self, a: usize) -> Option<usize> {
        (0..self.partner.len())
            .find(|&m| self.partner[m].is_none() && self.alliances[a] & bit(m) == 0)
    }

    /// Lowest heard alliance that `a` can absorb without a member hearing its own alliance.
    fn merge_target(&self, a: usize) -> Option<usize> {
        (0..self.alliances.len()).find(|&z| {
            z != a
                && self.heard(z)
                && !members(self.alliances[a]).any(|m| self.partner[m] == Some(z))
                && !members(self.alliances[z]).any(|m| self.partner[m] == Some(a))
        })
    }

    fn first_free(&self, a: usize) -> Option<usize> {
        members(self.alliances[a]).find(|&m| self.partner[m].is_none())
    }

    /// Merges `b` into `a` (a < b); partners pointing at either now point at the union.
    fn merge(&mut self, a: usize, b: usize) {
        self.alliances[a] |= self.alliances[b];
        self.alliances.remove(b);
        for p in self.partner.iter_mut().flatten() {
            if *p == b {
                *p = a;
            } else if *p > b {
                *p -= 1;
            }
        }
    }

    fn into_spec(self, k: usize) -> AllianceSpec {
        let mut alliances: Vec<Alliance> =
            self.alliances.iter().map(|&m| Alliance::new(members(m))).collect();
        for (a, &mask) in self.alliances.iter().enumerate() {
            for m in members(mask) {
                if let Some(p) = self.partner[m] {
                    alliances[a] = std::mem::take(&mut alliances[a]).with_sub(p, [m]);
                }
            }
        }
        AllianceSpec::new(k, alliances).expect("plan keeps alliances disjoint and covering")
    }
}

/// Adds links until the topology is an MTM.
///
/// Alliances start as the alignment sets and each receiver hears the whole
/// set it partly hears. An alliance nobody hears gets an uninterfered
/// listener or is merged into a heard alliance. Unlinked pairs are then
/// joined per `strategy`, and remaining uninterfered messages hear the
/// lowest-indexed other alliance.
/// Fails when the input has an internal conflict.
pub fn transform_to_mtm(t: &TopologyMatrix, strategy: Strategy) -> Result<Transformation> {
    let k = t.k();
    let g = build_message_graph(t);
    let sets = alignment_sets(&g);
    if let Some(c) = internal_conflicts(&g, &sets).first() {
        return Err(Error::InternalConflict {
            first: c.source.min(c.receiver) + 1,
            second: c.source.max(c.receiver) + 1,
        });
    }
    if k == 1 {
        return Ok(Transformation {
            matrix: t.clone(),
            added_links: Vec::new(),
            merged: Vec::new(),
            spec: AllianceSpec::new(1, vec![Alliance::new([0])])?,
        });
    }
    let mut plan = Plan {
        alliances: sets.masks().to_vec(),
        partner: (0..k)
            .map(|r| {
                let heard = t.interferers(r);
                (heard != 0).then(|| sets.set_of(lowest(heard)))
            })
            .collect(),
    };
    let mut merged_masks = Vec::new();
    let record = |plan: &Plan, a: usize, merged: &mut Vec<u64>| {
        merged.retain(|&m| m & plan.alliances[a] == 0);
        merged.push(plan.alliances[a]);
    };
    // Nobody hears an alliance: give it a listener or fold it into a heard one.
    let mut x = 0;
    while x < plan.alliances.len() {
        if plan.heard(x) {
            x += 1;
            continue;
        }
        let listener = plan.free_outside(x);
        let target = plan.merge_target(x);
        match (strategy, listener, target) {
            (Strategy::Merge, _, Some(z)) | (_, None, Some(z)) => {
                let (a, b) = (x.min(z), x.max(z));
                plan.merge(a, b);
                record(&plan, a, &mut merged_masks);
                x = 0;
            }
            (_, Some(m), _) => plan.partner[m] = Some(x),
            (_, None, None) => {
                return Err(Error::TransformIncomplete(format!(
                    "no receiver can hear {}",
                    show(plan.alliances[x])
                )))
            }
        }
    }
    while let Some((a, b)) = plan.first_unlinked() {
        let can_merge = plan.alliances.len() > 2;
        let free = plan
            .first_free(a)
            .map(|m| (m, b))
            .or_else(|| plan.first_free(b).map(|m| (m, a)));
        let use_links = match strategy {
            Strategy::Merge => !can_merge,
            Strategy::AddLinks | Strategy::Auto => free.is_some() || !can_merge,
        };
        match (use_links, free) {
            (true, Some((m, target))) => plan.partner[m] = Some(target),
            _ if can_merge => {
                plan.merge(a, b);
                record(&plan, a, &mut merged_masks);
            }
            _ => {
                return Err(Error::TransformIncomplete(format!(
                    "alliances {} and {} cannot be linked",
                    show(plan.alliances[a]),
                    show(plan.alliances[b])
                )))
            }
        }
    }
    let alliance_of: Vec<usize> = (0..k)
        .map(|m| plan.alliances.iter().position(|&a| a & bit(m) != 0).unwrap_or(0))
        .collect();
    for m in 0..k {
        if plan.partner[m].is_none() {
            plan.partner[m] = Some(if alliance_of[m] == 0 { 1 } else { 0 });
        }
    }
    let spec = plan.into_spec(k);
    let violations = validate_spec(&spec);
    if !violations.is_empty() {
        let text: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::TransformIncomplete(text.join("; ")));
    }
    let matrix = derive_unchecked(&spec);
    if let Some(v) = mtm_violations(&matrix).first() {
        return Err(Error::TransformIncomplete(v.to_string()));
    }
    debug_assert!(matrix.dominates(t));
    let added_links = (0..k)
        .flat_map(|r| members(matrix.row(r) & !t.row(r)).map(move |c| (r, c)))
        .collect();
    Ok(Transformation {
        matrix,
        added_links,
        merged: merged_masks.iter().map(|&m| members(m).collect()).collect(),
        spec,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::graph::is_maximal_by_definition;
    use crate::model::parse_topology;

    #[test]
    fn permutation_basics() {
        let p = Permutation::new(vec![2, 0, 1]).unwrap();
        assert_eq!(p.inverse().as_slice(), &[1, 2, 0]);
        assert!(p.then(&p.inverse()).is_identity());
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
        let t = paired4_matrix();
        assert_eq!(apply_permutation(&t, &Permutation::identity(4)).unwrap(), t);
        let q = Permutation::new(vec![3, 1, 0, 2]).unwrap();
        let moved = apply_permutation(&t, &q).unwrap();
        assert_eq!(apply_permutation(&moved, &q.inverse()).unwrap(), t);
        assert!(apply_permutation(&t, &Permutation::identity(3)).is_err());
    }

    #[test]
    fn swap_brings_aligned_messages_together() {
        let t = scattered5();
        let g = build_message_graph(&t);
        assert!(g.has_alignment(0, 2));
        let swapped = apply_permutation(&t, &Permutation::swap(5, 1, 2).unwrap()).unwrap();
        let g = build_message_graph(&swapped);
        assert!(g.has_alignment(0, 1));
        let (c, perm) = canonicalize(&t);
        assert_eq!(perm.get(0), 0);
        assert_eq!(perm.get(2), 1);
        assert!(canonicalize(&c).1.is_identity());
        assert_eq!(c, swapped);
    }

    #[test]
    fn conflict6_blocks() {
        let d = find_blocks(&conflict6()).unwrap();
        assert_eq!(d.block_sizes(), vec![3, 2, 1]);
        assert!(d.violations.contains(&MtmViolation::NonIdentityBlock {
            block: 1,
            receiver: 4,
            source: 3
        }));
        assert!(!d
            .violations
            .iter()
            .any(|v| matches!(v, MtmViolation::NonIdentityBlock { block: 0 | 2, .. })));
    }

    #[test]
    fn paired4_blocks() {
        let d = find_blocks(&paired4_matrix()).unwrap();
        assert_eq!(d.block_sizes(), vec![2, 2]);
        assert!(d.violations.is_empty());
        assert_eq!(d.interference_blocks.len(), 4);
    }

    #[test]
    fn identity_blocks() {
        let d = find_blocks(&TopologyMatrix::identity(3).unwrap()).unwrap();
        assert_eq!(d.block_sizes(), vec![1, 1, 1]);
        assert!(d.interference_blocks.is_empty());
        assert!(find_blocks(&scattered5()).is_err());
    }

    #[test]
    fn nine_user_verdicts() {
        let v = is_mtm(&mtm9());
        assert!(v.is_maximal, "{:?}", v.witness);
        let v = is_mtm(&split9());
        assert!(!v.is_maximal);
        match v.witness {
            Some(Witness::Mtm(MtmViolation::MultipleInterferenceBlocks { receiver, classes })) => {
                assert_eq!(receiver, 5);
                assert_eq!(classes, vec![vec![0, 1, 2, 3], vec![7, 8]]);
            }
            other => panic!("unexpected witness {other:?}"),
        }
    }

    #[test]
    fn identity_is_not_mtm() {
        let v = is_mtm(&TopologyMatrix::identity(4).unwrap());
        assert!(!v.is_maximal && v.is_dof_optimal);
        assert!(matches!(
            v.witness,
            Some(Witness::Mtm(MtmViolation::BlockCount { count: 0, .. }))
        ));
    }

    #[test]
    fn twins_are_alliances_of_maximal_topologies() {
        let classes = twin_partition(&ring6_matrix());
        assert_eq!(classes, vec![0b11, 0b1100, 0b110000]);
    }

    #[test]
    fn unlinked8_transformations() {
        let t = unlinked8();
        assert!(!is_mtm(&t).is_maximal);
        let merged = transform_to_mtm(&t, Strategy::Merge).unwrap();
        assert_eq!(merged.matrix, unlinked8_merged());
        assert_eq!(merged.merged, vec![vec![1, 3, 4, 5]]);
        let linked = transform_to_mtm(&t, Strategy::AddLinks).unwrap();
        assert_eq!(linked.matrix, unlinked8_linked());
        assert!(linked.added_links.contains(&(3, 4)) && linked.added_links.contains(&(3, 5)));
        assert_eq!(transform_to_mtm(&t, Strategy::Auto).unwrap().matrix, unlinked8_linked());
        for m in [&merged.matrix, &linked.matrix] {
            assert!(is_mtm(m).is_maximal);
            assert!(is_maximal_by_definition(m).is_maximal);
            assert!(m.dominates(&t));
        }
    }

    #[test]
    fn transform_fixpoint_and_errors() {
        let t = ring6_matrix();
        let out = transform_to_mtm(&t, Strategy::Auto).unwrap();
        assert_eq!(out.matrix, t);
        assert!(out.added_links.is_empty());
        assert_eq!(
            transform_to_mtm(&conflict6(), Strategy::Auto).unwrap_err(),
            Error::InternalConflict {
                first: 4,
                second: 5
            }
        );
        let two = parse_topology("10\n01").unwrap();
        let out = transform_to_mtm(&two, Strategy::Merge).unwrap();
        assert_eq!(out.matrix, TopologyMatrix::all_ones(2).unwrap());
    }

    #[test]
    fn grid_annotation() {
        let d = find_blocks(&paired4_matrix()).unwrap();
        assert_eq!(
            annotated_grid(&paired4_matrix(), &d.blocks),
            "10|11\n01|11\n--+--\n11|10\n11|01\n"
        );
    }
}
