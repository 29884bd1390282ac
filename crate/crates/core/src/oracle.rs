//! Brute-force ground truth over every small topology, canonical labels under
//! relabeling, and the cross-checks between the characterizations.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::alliance::{derive_topology, enumerate_specs, max_alliances, recover_spec, validate_spec};
use crate::bits::bit;
use crate::error::{Error, Result};
use crate::graph::{alignment_sets, build_message_graph, is_maximal_by_definition};
use crate::matrix::{is_mtm, transform_to_mtm, Strategy};
use crate::model::TopologyMatrix;

/// Largest K enumerated exhaustively.
pub const MAX_EXHAUSTIVE_USERS: usize = 5;
/// Largest K for brute-force canonical labels.
pub const MAX_LABEL_USERS: usize = 8;

fn check_exhaustive(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::NoUsers);
    }
    if k > MAX_EXHAUSTIVE_USERS {
        return Err(Error::ExhaustiveLimit {
            what: "exhaustive enumeration",
            k,
            max: MAX_EXHAUSTIVE_USERS,
        });
    }
    Ok(())
}

fn off_diagonal(k: usize) -> Vec<(usize, usize)> {
    (0..k)
        .flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect()
}

/// Every K×K matrix with unit diagonal, each exactly once.
pub fn enumerate_topologies(k: usize) -> Result<impl Iterator<Item = TopologyMatrix>> {
    check_exhaustive(k)?;
    let slots = off_diagonal(k);
    let count = 1u64 << slots.len();
    Ok((0..count).map(move |code| {
        let mut rows: Vec<u64> = (0..k).map(bit).collect();
        for (b, &(i, j)) in slots.iter().enumerate() {
            if code & (1 << b) != 0 {
                rows[i] |= bit(j);
            }
        }
        TopologyMatrix::from_rows(rows).expect("unit diagonal")
    }))
}

/// Uniformly random matrices with unit diagonal, reproducible from `seed`.
pub fn sample_topologies(k: usize, count: usize, seed: u64) -> Result<Vec<TopologyMatrix>> {
    TopologyMatrix::identity(k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let rows = (0..k)
                .map(|i| (0..k).fold(bit(i), |acc, j| if rng.gen_bool(0.5) { acc | bit(j) } else { acc }))
                .collect();
            TopologyMatrix::from_rows(rows).expect("size checked above")
        })
        .collect())
}

/// Row-major key of the matrix relabeled so that new index `a` holds old `inv[a]`.
fn permuted_key(t: &TopologyMatrix, inv: &[usize]) -> u64 {
    let mut key = 0u64;
    for &old_row in inv {
        let row = t.row(old_row);
        for &old_col in inv {
            key = (key << 1) | ((row >> old_col) & 1);
        }
    }
    key
}

fn from_key(k: usize, key: u64) -> TopologyMatrix {
    TopologyMatrix::from_fn(k, |i, j| (key >> (k * k - 1 - (i * k + j))) & 1 == 1)
        .expect("keys of valid matrices keep the diagonal")
}

/// Calls `f` on every permutation of `0..k` (Heap's algorithm).
fn for_each_permutation(k: usize, mut f: impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..k).collect();
    let mut c = vec![0usize; k];
    f(&p);
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            f(&p);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn check_label(k: usize) -> Result<()> {
    if k > MAX_LABEL_USERS {
        return Err(Error::ExhaustiveLimit {
            what: "canonical labeling",
            k,
            max: MAX_LABEL_USERS,
        });
    }
    Ok(())
}

/// Lexicographically least relabeling and the number of distinct relabelings.
pub fn canonical_form_and_orbit(t: &TopologyMatrix) -> Result<(TopologyMatrix, usize)> {
    let k = t.k();
    check_label(k)?;
    let own = t.key();
    let mut best = own;
    let mut automorphisms = 0usize;
    for_each_permutation(k, |inv| {
        let key = permuted_key(t, inv);
        best = best.min(key);
        automorphisms += usize::from(key == own);
    });
    let factorial: usize = (1..=k).product();
    Ok((from_key(k, best), factorial / automorphisms))
}

/// Lexicographically least matrix over all simultaneous row/column relabelings.
pub fn canonical_label(t: &TopologyMatrix) -> Result<TopologyMatrix> {
    canonical_form_and_orbit(t).map(|(c, _)| c)
}

/// Number of distinct matrices obtained by relabeling `t`.
pub fn orbit_size(t: &TopologyMatrix) -> Result<usize> {
    canonical_form_and_orbit(t).map(|(_, n)| n)
}

/// One classified topology.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CatalogEntry {
    pub matrix: TopologyMatrix,
    pub canonical_form: Option<TopologyMatrix>,
    pub dof_optimal: bool,
    pub maximal: bool,
    /// Number of alliances when maximal.
    pub alliance_count: Option<usize>,
    pub orbit_size: Option<usize>,
}

/// Classifies one matrix from the definitions; labels only when asked.
pub fn classify(t: TopologyMatrix, canonical: bool) -> Result<CatalogEntry> {
    let v = is_maximal_by_definition(&t);
    let alliance_count = v
        .is_maximal
        .then(|| alignment_sets(&build_message_graph(&t)).len());
    let (canonical_form, orbit_size) = if canonical {
        let (c, n) = canonical_form_and_orbit(&t)?;
        (Some(c), Some(n))
    } else {
        (None, None)
    };
    Ok(CatalogEntry {
        matrix: t,
        canonical_form,
        dof_optimal: v.is_dof_optimal,
        maximal: v.is_maximal,
        alliance_count,
        orbit_size,
    })
}

/// Streams the classification of every K×K topology.
pub fn classify_iter(
    k: usize,
    canonical: bool,
) -> Result<impl Iterator<Item = CatalogEntry>> {
    if canonical {
        check_label(k)?;
    }
    Ok(enumerate_topologies(k)?.map(move |t| classify(t, canonical).expect("size checked")))
}

pub fn classify_all(k: usize, canonical: bool) -> Result<Vec<CatalogEntry>> {
    Ok(classify_iter(k, canonical)?.collect())
}

/// Counts per class over a catalog.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CatalogSummary {
    pub total: usize,
    pub dof_optimal: usize,
    pub maximal: usize,
    /// Distinct maximal topologies up to relabeling, when labels were computed.
    pub maximal_classes: Option<usize>,
}

pub fn summarize<'a>(entries: impl IntoIterator<Item = &'a CatalogEntry>) -> CatalogSummary {
    let mut s = CatalogSummary::default();
    let mut classes = HashSet::new();
    let mut labeled = false;
    for e in entries {
        s.total += 1;
        s.dof_optimal += usize::from(e.dof_optimal);
        s.maximal += usize::from(e.maximal);
        if let (true, Some(c)) = (e.maximal, &e.canonical_form) {
            labeled = true;
            classes.insert(c.clone());
        } else if e.canonical_form.is_some() {
            labeled = true;
        }
    }
    if labeled {
        s.maximal_classes = Some(classes.len());
    }
    s
}

/// Outcome of the cross-checks; mismatch lists hold row-major bitstrings.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IffReport {
    pub k: usize,
    pub sampled: bool,
    pub total: usize,
    pub dof_optimal: usize,
    pub maximal: usize,
    /// Distinct topologies derived from valid alliance specs (exhaustive mode).
    pub derived: usize,
    /// Maximal by definition but not derivable from any valid spec.
    pub maximal_not_derived: Vec<String>,
    /// Derived from a valid spec but not maximal by definition.
    pub derived_not_maximal: Vec<String>,
    /// Matrix discriminant disagrees with the definition.
    pub mtm_disagreements: Vec<String>,
    /// Maximal matrices changed by the transformation.
    pub fixpoint_failures: Vec<String>,
    /// Optimal non-maximal matrices the transformation failed on.
    pub transform_failures: Vec<String>,
    pub transformed: usize,
    /// Maximal matrices whose recovered alliances fail the partition conditions.
    /// Reported only.
    pub necessity_failures: Vec<String>,
}

impl IffReport {
    pub fn passes(&self) -> bool {
        self.maximal_not_derived.is_empty()
            && self.derived_not_maximal.is_empty()
            && self.mtm_disagreements.is_empty()
            && self.fixpoint_failures.is_empty()
            && self.transform_failures.is_empty()
    }

    /// Runs every per-matrix check; returns the definition's verdict.
    fn check(&mut self, t: &TopologyMatrix) -> bool {
        self.total += 1;
        let def = is_maximal_by_definition(t);
        self.dof_optimal += usize::from(def.is_dof_optimal);
        if is_mtm(t).is_maximal != def.is_maximal {
            self.mtm_disagreements.push(t.bitstring());
        }
        if def.is_maximal {
            self.maximal += 1;
            match transform_to_mtm(t, Strategy::Auto) {
                Ok(out) if out.matrix == *t => {}
                _ => self.fixpoint_failures.push(t.bitstring()),
            }
            let recovered = recover_spec(t).filter(|s| validate_spec(s).is_empty());
            if recovered.is_none() {
                self.necessity_failures.push(t.bitstring());
            }
        } else if def.is_dof_optimal {
            self.transformed += 1;
            if !transform_is_sound(t) {
                self.transform_failures.push(t.bitstring());
            }
        }
        def.is_maximal
    }
}

/// Every strategy succeeds, dominates the input, passes both maximality
/// checks and is a fixpoint.
fn transform_is_sound(t: &TopologyMatrix) -> bool {
    [Strategy::Auto, Strategy::Merge, Strategy::AddLinks]
        .into_iter()
        .all(|s| match transform_to_mtm(t, s) {
            Ok(out) => {
                out.matrix.dominates(t)
                    && is_mtm(&out.matrix).is_maximal
                    && is_maximal_by_definition(&out.matrix).is_maximal
                    && transform_to_mtm(&out.matrix, s).map(|o| o.matrix).as_ref() == Ok(&out.matrix)
            }
            Err(_) => false,
        })
}

/// Exhaustive cross-check over every K×K topology.
pub fn verify_iff_theorems(k: usize) -> Result<IffReport> {
    check_exhaustive(k)?;
    let mut report = IffReport {
        k,
        ..IffReport::default()
    };
    let mut maximal = HashSet::new();
    for t in enumerate_topologies(k)? {
        if report.check(&t) {
            maximal.insert(t.key());
        }
    }
    let mut derived = HashSet::new();
    for n in 1..=max_alliances(k) {
        for s in enumerate_specs(k, n) {
            derived.insert(derive_topology(&s)?.key());
        }
    }
    report.derived = derived.len();
    let mut missing: Vec<u64> = maximal.difference(&derived).copied().collect();
    let mut extra: Vec<u64> = derived.difference(&maximal).copied().collect();
    missing.sort_unstable();
    extra.sort_unstable();
    report.maximal_not_derived = missing.into_iter().map(|key| from_key(k, key).bitstring()).collect();
    report.derived_not_maximal = extra.into_iter().map(|key| from_key(k, key).bitstring()).collect();
    Ok(report)
}

/// Sampled cross-check for K beyond the exhaustive ceiling. A sampled matrix
/// counts as derived when its recovered alliances validate and re-derive it.
pub fn verify_iff_sampled(k: usize, samples: usize, seed: u64) -> Result<IffReport> {
    let mut report = IffReport {
        k,
        sampled: true,
        ..IffReport::default()
    };
    for t in sample_topologies(k, samples, seed)? {
        let is_max = report.check(&t);
        let derivable = recover_spec(&t)
            .filter(|s| validate_spec(s).is_empty())
            .is_some_and(|s| derive_topology(&s).ok().as_ref() == Some(&t));
        report.derived += usize::from(derivable);
        match (is_max, derivable) {
            (true, false) => report.maximal_not_derived.push(t.bitstring()),
            (false, true) => report.derived_not_maximal.push(t.bitstring()),
            _ => {}
        }
    }
    Ok(report)
}

/// Maximal topologies for K users, one per valid labeled spec.
pub fn maximal_topologies(k: usize) -> Vec<TopologyMatrix> {
    let mut out = Vec::new();
    for n in 1..=max_alliances(k) {
        out.extend(enumerate_specs(k, n).map(|s| derive_topology(&s).expect("valid spec")));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::*;
    use crate::matrix::{apply_permutation, Permutation};
    use crate::model::parse_topology;

    #[test]
    fn enumeration_sizes() {
        assert_eq!(enumerate_topologies(1).unwrap().count(), 1);
        assert_eq!(enumerate_topologies(2).unwrap().count(), 4);
        assert_eq!(enumerate_topologies(3).unwrap().count(), 64);
        assert_eq!(enumerate_topologies(4).unwrap().count(), 4096);
        let distinct: HashSet<u64> = enumerate_topologies(3).unwrap().map(|t| t.key()).collect();
        assert_eq!(distinct.len(), 64);
        assert!(enumerate_topologies(6).is_err());
    }

    #[test]
    fn maximal_counts() {
        let s = summarize(&classify_all(2, false).unwrap());
        assert_eq!(s.maximal, 1);
        let entries = classify_all(3, false).unwrap();
        assert_eq!(summarize(&entries).maximal, 5);
        let from_specs: HashSet<u64> = maximal_topologies(3).iter().map(|t| t.key()).collect();
        let from_def: HashSet<u64> =
            entries.iter().filter(|e| e.maximal).map(|e| e.matrix.key()).collect();
        assert_eq!(from_specs, from_def);
    }

    #[test]
    fn labels() {
        let id = TopologyMatrix::identity(3).unwrap();
        assert_eq!(canonical_label(&id).unwrap(), id);
        assert_eq!(orbit_size(&id).unwrap(), 1);
        let a = cyclic3_matrix();
        let b = parse_topology("101\n110\n011").unwrap();
        // the two cyclic orientations are relabelings of one another
        assert_eq!(canonical_label(&a).unwrap(), canonical_label(&b).unwrap());
        assert_eq!(orbit_size(&a).unwrap(), 2);
        assert_ne!(
            canonical_label(&paired4_matrix()).unwrap(),
            canonical_label(&lopsided4_matrix()).unwrap()
        );
        assert!(canonical_label(&TopologyMatrix::identity(9).unwrap()).is_err());
    }

    #[test]
    fn label_is_minimum_over_relabelings() {
        let t = lopsided4_matrix();
        let c = canonical_label(&t).unwrap();
        let mut keys = Vec::new();
        for_each_permutation(4, |inv| {
            let p = Permutation::from_order(inv).unwrap();
            keys.push(apply_permutation(&t, &p).unwrap().key());
        });
        assert_eq!(keys.len(), 24);
        assert_eq!(c.key(), *keys.iter().min().unwrap());
    }

    #[test]
    fn small_cross_checks() {
        for k in 1..=4 {
            let r = verify_iff_theorems(k).unwrap();
            assert!(r.passes(), "{r:?}");
            assert!(r.necessity_failures.is_empty());
        }
        let r = verify_iff_theorems(3).unwrap();
        assert_eq!((r.maximal, r.total), (5, 64));
        let r = verify_iff_theorems(2).unwrap();
        assert_eq!(r.maximal, 1);
    }

    #[test]
    fn sampled_mode() {
        let r = verify_iff_sampled(6, 200, 5).unwrap();
        assert_eq!(r.total, 200);
        assert!(r.passes(), "{r:?}");
        assert_eq!(sample_topologies(6, 3, 9).unwrap(), sample_topologies(6, 3, 9).unwrap());
    }
}
