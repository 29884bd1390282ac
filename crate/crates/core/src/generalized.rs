//! Generalized construction: sub-alliances interfered by several alliances,
//! DoF 1/(E_M + 1), maximality for a target DoF, and the demand-graph bound.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::bits::{bit, full, members, show};
use crate::error::{Error, Result};
use crate::matrix::{block_violations, twin_partition, MtmViolation};
use crate::model::{
    GeneralizedAlliance, GeneralizedAllianceSpec, MaximalityVerdict, TopologyMatrix, Witness,
};

/// Largest K accepted by [`max_acyclic_subset`].
pub const MAX_ACYCLIC_USERS: usize = 20;

/// How the pairwise-intersection clause between sibling interferer sets is treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strictness {
    /// Disjoint sibling interferer sets produce a warning.
    #[default]
    Lenient,
    /// Disjoint sibling interferer sets are a violation.
    Strict,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneralizedCondition {
    /// An interferer set is contained in a sibling's.
    SubsetInterferers,
    /// Neither alliance of the pair interferes the other.
    NotHostile,
    /// The alliance has no messages.
    EmptyAlliance,
    /// Two sibling interferer sets share no alliance.
    DisjointInterferers,
}

impl GeneralizedCondition {
    pub fn name(self) -> &'static str {
        match self {
            Self::SubsetInterferers => "subset-interferers",
            Self::NotHostile => "not-hostile",
            Self::EmptyAlliance => "empty-alliance",
            Self::DisjointInterferers => "disjoint-interferers",
        }
    }
}

/// A failed clause; `indices` are 0-based alliance indices (pairs for hostility).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeneralizedViolation {
    pub condition: GeneralizedCondition,
    #[serde(serialize_with = "crate::bits::ser_indices")]
    pub indices: Vec<usize>,
}

impl fmt::Display for GeneralizedViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.indices.iter().map(|i| format!("A{}", i + 1)).collect();
        write!(f, "{} ({})", self.condition.name(), names.join(", "))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GeneralizedValidation {
    pub violations: Vec<GeneralizedViolation>,
    pub warnings: Vec<GeneralizedViolation>,
}

impl GeneralizedValidation {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

fn interferer_mask(s: &crate::model::GeneralizedSubAlliance) -> u64 {
    s.interferers.iter().fold(0, |acc, &e| acc | bit(e))
}

/// Checks the generalized clauses: no interferer set inside a sibling's,
/// every pair of alliances hostile in at least one direction, and no empty
/// alliance.
pub fn validate_generalized_spec(
    s: &GeneralizedAllianceSpec,
    strictness: Strictness,
) -> GeneralizedValidation {
    let mut out = GeneralizedValidation::default();
    if s.is_degenerate() {
        return out;
    }
    let alliances = s.alliances();
    let n = alliances.len();
    for (i, a) in alliances.iter().enumerate() {
        let subs: Vec<&_> = a.suballiances.iter().filter(|x| !x.messages.is_empty()).collect();
        if subs.is_empty() {
            out.violations.push(GeneralizedViolation {
                condition: GeneralizedCondition::EmptyAlliance,
                indices: vec![i],
            });
            continue;
        }
        let masks: Vec<u64> = subs.iter().map(|x| interferer_mask(x)).collect();
        let mut subset = false;
        let mut disjoint = false;
        for x in 0..masks.len() {
            for y in 0..masks.len() {
                if x == y || masks[x] == 0 || masks[y] == 0 {
                    continue;
                }
                subset |= masks[x] & !masks[y] == 0;
                disjoint |= masks[x] & masks[y] == 0;
            }
        }
        if subset {
            out.violations.push(GeneralizedViolation {
                condition: GeneralizedCondition::SubsetInterferers,
                indices: vec![i],
            });
        }
        if disjoint {
            let v = GeneralizedViolation {
                condition: GeneralizedCondition::DisjointInterferers,
                indices: vec![i],
            };
            match strictness {
                Strictness::Lenient => out.warnings.push(v),
                Strictness::Strict => out.violations.push(v),
            }
        }
    }
    let union: Vec<u64> = alliances
        .iter()
        .map(|a| a.suballiances.iter().fold(0, |acc, x| acc | interferer_mask(x)))
        .collect();
    for i in 0..n {
        for j in i + 1..n {
            if union[i] & bit(j) == 0 && union[j] & bit(i) == 0 {
                out.violations.push(GeneralizedViolation {
                    condition: GeneralizedCondition::NotHostile,
                    indices: vec![i, j],
                });
            }
        }
    }
    out
}

/// Each receiver hears every message of every alliance in its interferer set.
pub fn derive_generalized_topology(s: &GeneralizedAllianceSpec) -> Result<TopologyMatrix> {
    let report = validate_generalized_spec(s, Strictness::Lenient);
    if !report.is_valid() {
        let text: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(Error::InvalidGeneralizedSpec(text.join("; ")));
    }
    Ok(derive_generalized_unchecked(s))
}

pub(crate) fn derive_generalized_unchecked(s: &GeneralizedAllianceSpec) -> TopologyMatrix {
    let masks: Vec<u64> = s.alliances().iter().map(GeneralizedAlliance::mask).collect();
    let mut rows: Vec<u64> = (0..s.k()).map(bit).collect();
    for a in s.alliances() {
        for sub in &a.suballiances {
            let heard = sub.interferers.iter().fold(0, |acc, &e| acc | masks[e]);
            for &m in &sub.messages {
                rows[m] |= heard;
            }
        }
    }
    TopologyMatrix::from_rows(rows).expect("derived rows keep the diagonal")
}

/// E_M: the largest interferer set.
pub fn compute_e_max(s: &GeneralizedAllianceSpec) -> usize {
    s.alliances()
        .iter()
        .flat_map(|a| &a.suballiances)
        .filter(|x| !x.messages.is_empty())
        .map(|x| x.interferers.len())
        .max()
        .unwrap_or(0)
}

/// True iff every non-empty sub-alliance has exactly E_M interferers.
pub fn is_maximal_for_dof(s: &GeneralizedAllianceSpec) -> bool {
    let e = compute_e_max(s);
    s.alliances()
        .iter()
        .flat_map(|a| &a.suballiances)
        .filter(|x| !x.messages.is_empty())
        .all(|x| x.interferers.len() == e)
}

/// A generalized spec read off a topology, with the clauses it fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Explanation {
    pub spec: GeneralizedAllianceSpec,
    pub validation: GeneralizedValidation,
}

impl Explanation {
    /// False when the topology admits no valid generalized explanation.
    pub fn is_classified(&self) -> bool {
        self.validation.is_valid()
    }
}

/// Explains a topology as a generalized spec: alliances are the twin classes
/// (messages heard by the same other receivers and not by each other) and
/// each message's interferer set is the classes its receiver hears.
///
/// Twin classes are never partly heard, so the explanation always derives
/// the input back; whether it is a valid spec is reported separately.
pub fn explain_topology(t: &TopologyMatrix) -> Explanation {
    let classes = twin_partition(t);
    let class_of: Vec<usize> = (0..t.k())
        .map(|m| classes.iter().position(|&c| c & bit(m) != 0).expect("classes cover"))
        .collect();
    let mut alliances = Vec::with_capacity(classes.len());
    for &class in &classes {
        let mut groups: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for m in members(class) {
            let heard = t.interferers(m);
            let mut ints: Vec<usize> = members(heard).map(|j| class_of[j]).collect();
            ints.dedup();
            ints.sort_unstable();
            ints.dedup();
            groups.entry(ints).or_default().push(m);
        }
        let alliance = groups
            .into_iter()
            .fold(GeneralizedAlliance::default(), |a, (ints, msgs)| a.with_sub(ints, msgs));
        alliances.push(alliance);
    }
    let spec = GeneralizedAllianceSpec::new(t.k(), alliances).expect("classes partition messages");
    debug_assert_eq!(derive_generalized_unchecked(&spec), *t);
    let validation = validate_generalized_spec(&spec, Strictness::Lenient);
    Explanation { spec, validation }
}

/// MTM check for DoF 1/(e_m + 1): blocks are the twin classes; every
/// receiver must hear exactly `e_m` complete blocks and every pair of
/// blocks must be linked.
pub fn is_mtm_for_dof(t: &TopologyMatrix, e_m: usize) -> MaximalityVerdict {
    if t.k() == 1 {
        return MaximalityVerdict {
            is_dof_optimal: true,
            is_maximal: true,
            witness: Some(Witness::Degenerate),
        };
    }
    let violations = mtm_violations_for_dof(t, e_m);
    let e_actual = explain_topology(t).spec;
    MaximalityVerdict {
        is_dof_optimal: compute_e_max(&e_actual) <= e_m,
        is_maximal: violations.is_empty(),
        witness: violations.into_iter().next().map(Witness::Mtm),
    }
}

/// Every failed block condition for DoF 1/(e_m + 1), with twin classes as blocks.
pub fn mtm_violations_for_dof(t: &TopologyMatrix, e_m: usize) -> Vec<MtmViolation> {
    if t.k() == 1 {
        return Vec::new();
    }
    block_violations(t, &twin_partition(t), e_m, None)
}

/// Directed graph with an edge (p, q) iff receiver p does not hear transmitter q.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DemandGraph {
    k: usize,
    out: Vec<u64>,
}

impl DemandGraph {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn has_edge(&self, p: usize, q: usize) -> bool {
        self.out[p] & bit(q) != 0
    }

    /// Edges (p, q) in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.k)
            .flat_map(|p| members(self.out[p]).map(move |q| (p, q)))
            .collect()
    }

    pub fn successors(&self, p: usize) -> u64 {
        self.out[p]
    }
}

pub fn build_demand_graph(t: &TopologyMatrix) -> DemandGraph {
    let k = t.k();
    DemandGraph {
        k,
        out: (0..k).map(|p| !t.row(p) & full(k)).collect(),
    }
}

/// Size of the largest vertex set inducing no directed cycle (Ψ).
///
/// A set is acyclic iff it has a vertex with no successor inside it whose
/// removal leaves an acyclic set, which gives a DP over all 2^K subsets.
pub fn max_acyclic_subset(d: &DemandGraph) -> Result<usize> {
    if d.k > MAX_ACYCLIC_USERS {
        return Err(Error::ExhaustiveLimit {
            what: "acyclic subset search",
            k: d.k,
            max: MAX_ACYCLIC_USERS,
        });
    }
    let size = 1usize << d.k;
    let mut acyclic = vec![false; size];
    acyclic[0] = true;
    let mut best = 0;
    for set in 1..size {
        let s = set as u64;
        let ok = members(s).any(|v| d.out[v] & s == 0 && acyclic[set & !(1usize << v)]);
        if ok {
            acyclic[set] = true;
            best = best.max(set.count_ones() as usize);
        }
    }
    Ok(best)
}

/// The symmetric DoF value 1/n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnitFraction(pub usize);

impl UnitFraction {
    pub fn denominator(self) -> usize {
        self.0
    }

    pub fn value(self) -> f64 {
        1.0 / self.0 as f64
    }
}

impl fmt::Display for UnitFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "1/{}", self.0)
    }
}

impl Serialize for UnitFraction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl FromStr for UnitFraction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("'{s}' is not a DoF of the form 1/n"));
        let n = match s.trim().split_once('/') {
            Some((one, n)) if one.trim() == "1" => n.trim().parse::<usize>().map_err(|_| bad())?,
            None if s.trim() == "1" => 1,
            _ => return Err(bad()),
        };
        if n == 0 {
            return Err(bad());
        }
        Ok(Self(n))
    }
}

/// Achievable DoF from the construction against the demand-graph bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DofReport {
    pub e_max: usize,
    pub dof_achievable: UnitFraction,
    pub psi: usize,
    pub dof_upper: UnitFraction,
    pub tight: bool,
    pub degenerate: bool,
}

/// Computes E_M from `s` and Ψ from `t`; `s` must derive `t`.
pub fn dof_report(t: &TopologyMatrix, s: &GeneralizedAllianceSpec) -> Result<DofReport> {
    if s.k() != t.k() || derive_generalized_unchecked(s) != *t {
        return Err(Error::SpecTopologyMismatch);
    }
    let psi = max_acyclic_subset(&build_demand_graph(t))?;
    let e_max = compute_e_max(s);
    Ok(DofReport {
        e_max,
        dof_achievable: UnitFraction(e_max + 1),
        psi,
        dof_upper: UnitFraction(psi),
        tight: psi == e_max + 1,
        degenerate: t.k() == 1,
    })
}

/// Describes an interferer set as alliance names, e.g. `{A1, A3}`.
pub fn show_interferers(set: &std::collections::BTreeSet<usize>) -> String {
    let names: Vec<String> = set.iter().map(|e| format!("A{}", e + 1)).collect();
    format!("{{{}}}", names.join(", "))
}

impl fmt::Display for GeneralizedAllianceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.alliances().iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "A{} = {}", i + 1, show(a.mask()))?;
            for sub in &a.suballiances {
                let set = sub.messages.iter().fold(0, |acc, &m| acc | bit(m));
                write!(f, ", {} <- {}", show(set), show_interferers(&sub.interferers))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alliance::{derive_topology, enumerate_specs};
    use crate::fixtures::*;
    use crate::matrix::{is_mtm, MtmViolation};

    #[test]
    fn lifted_plain_specs_are_valid() {
        for s in [paired4_spec(), ring6_spec(), cyclic3_spec()] {
            let g = GeneralizedAllianceSpec::from_plain(&s);
            assert!(validate_generalized_spec(&g, Strictness::Lenient).is_valid());
            assert_eq!(derive_generalized_topology(&g).unwrap(), derive_topology(&s).unwrap());
            assert_eq!(compute_e_max(&g), 1);
        }
        let strict =
            validate_generalized_spec(&GeneralizedAllianceSpec::from_plain(&ring6_spec()), Strictness::Strict);
        assert!(!strict.is_valid());
    }

    #[test]
    fn subset_interferers_rejected() {
        let s = generalized_spec(
            4,
            &[&[(&[2], &[1]), (&[2, 3], &[2])], &[(&[1], &[3])], &[(&[1], &[4])]],
        );
        let v = validate_generalized_spec(&s, Strictness::Lenient);
        assert!(v.violations.contains(&GeneralizedViolation {
            condition: GeneralizedCondition::SubsetInterferers,
            indices: vec![0]
        }));
    }

    #[test]
    fn thirds7_parameters() {
        let s = thirds7_spec();
        assert!(validate_generalized_spec(&s, Strictness::Lenient).is_valid());
        assert_eq!(derive_generalized_topology(&s).unwrap(), thirds7_matrix());
        assert_eq!(compute_e_max(&s), 2);
        assert!(is_maximal_for_dof(&s));
        let v = is_mtm_for_dof(&thirds7_matrix(), 2);
        assert!(v.is_maximal, "{:?}", v.witness);
        let r = dof_report(&thirds7_matrix(), &s).unwrap();
        assert_eq!(r.dof_achievable, UnitFraction(3));
        assert_eq!(r.psi, 3);
        assert!(r.tight);
    }

    #[test]
    fn sparse7_is_underfilled() {
        let s = sparse7_spec();
        assert_eq!(derive_generalized_topology(&s).unwrap(), sparse7_matrix());
        assert!(!is_maximal_for_dof(&s));
        let v = is_mtm_for_dof(&sparse7_matrix(), 2);
        assert!(!v.is_maximal);
        assert!(matches!(
            v.witness,
            Some(Witness::Mtm(MtmViolation::BlockCount { count: 1, expected: 2, .. }))
        ));
    }

    #[test]
    fn fully_connected_three_users() {
        let s = generalized_spec(3, &[&[(&[2, 3], &[1])], &[(&[1, 3], &[2])], &[(&[1, 2], &[3])]]);
        assert_eq!(derive_generalized_topology(&s).unwrap(), TopologyMatrix::all_ones(3).unwrap());
        assert_eq!(compute_e_max(&s), 2);
    }

    #[test]
    fn uniformity() {
        let s = generalized_spec(3, &[&[(&[2], &[1]), (&[2, 3], &[2])], &[(&[1], &[3])], &[]]);
        assert!(!is_maximal_for_dof(&s));
        let two = GeneralizedAllianceSpec::from_plain(&enumerate_specs(4, 2).next().unwrap());
        assert!(is_maximal_for_dof(&two));
    }

    #[test]
    fn demand_graphs() {
        assert!(build_demand_graph(&TopologyMatrix::all_ones(2).unwrap()).edges().is_empty());
        let d = build_demand_graph(&TopologyMatrix::identity(3).unwrap());
        assert_eq!(d.edges().len(), 6);
        assert_eq!(max_acyclic_subset(&d).unwrap(), 1);
        let d = build_demand_graph(&paired4_matrix());
        assert_eq!(d.edges(), vec![(0, 1), (1, 0), (2, 3), (3, 2)]);
        assert_eq!(max_acyclic_subset(&d).unwrap(), 2);
        assert_eq!(
            max_acyclic_subset(&build_demand_graph(&TopologyMatrix::all_ones(2).unwrap())).unwrap(),
            2
        );
        let big = build_demand_graph(&TopologyMatrix::identity(21).unwrap());
        assert!(matches!(max_acyclic_subset(&big), Err(Error::ExhaustiveLimit { .. })));
    }

    #[test]
    fn reports() {
        let s = GeneralizedAllianceSpec::from_plain(&paired4_spec());
        let r = dof_report(&paired4_matrix(), &s).unwrap();
        assert_eq!((r.dof_achievable, r.dof_upper, r.tight), (UnitFraction(2), UnitFraction(2), true));
        assert_eq!(dof_report(&ring6_matrix(), &s).unwrap_err(), Error::SpecTopologyMismatch);
        let one = generalized_spec(1, &[&[(&[], &[1])]]);
        let r = dof_report(&TopologyMatrix::identity(1).unwrap(), &one).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.dof_achievable.to_string(), "1/1");
    }

    #[test]
    fn unit_fraction_parsing() {
        assert_eq!("1/3".parse::<UnitFraction>().unwrap(), UnitFraction(3));
        assert_eq!("1".parse::<UnitFraction>().unwrap(), UnitFraction(1));
        assert!("2/3".parse::<UnitFraction>().is_err());
        assert!("1/0".parse::<UnitFraction>().is_err());
    }

    #[test]
    fn explanation_of_maximal_topology() {
        let e = explain_topology(&ring6_matrix());
        assert!(e.is_classified());
        assert_eq!(compute_e_max(&e.spec), 1);
        assert!(is_mtm_for_dof(&ring6_matrix(), 1).is_maximal);
        assert!(is_mtm(&ring6_matrix()).is_maximal);
    }
}
