use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};
use tim_core::beamforming::{verify_alignment, verify_generalized, DecodeConfig, DecodeReport};
use tim_core::dot::to_dot;
use tim_core::generalized::explain_topology;
use tim_core::matrix::{annotated_grid, decompose, twin_partition};
use tim_core::oracle::{
    classify, classify_iter, sample_topologies, verify_iff_sampled, verify_iff_theorems, CatalogEntry,
    CatalogSummary, IffReport, MAX_EXHAUSTIVE_USERS, MAX_LABEL_USERS,
};
use tim_core::{
    alignment_sets, apply_permutation, build_message_graph, compute_e_max, count_specs,
    derive_generalized_topology, derive_topology, dof_report, is_maximal_by_definition, is_mtm,
    is_mtm_for_dof, max_alliances, mtm_violations_for_dof, transform_to_mtm, validate_generalized_spec,
    validate_spec, AllianceSpec, Error, GeneralizedAllianceSpec, MtmViolation, Strategy, Strictness,
    TopologyMatrix, UnitFraction, Witness,
};

use crate::io::{read_generalized_spec, read_spec_document, read_topology, write_text};

/// Outcome of one invocation: 0 when the verdict holds or the artifact was
/// produced, 1 for a negative verdict. Input errors surface as `Err`.
#[derive(Clone, Debug, PartialEq)]
pub struct CommandResult {
    pub exit_code: i32,
    pub human_text: String,
    pub machine_payload: Option<Value>,
}

impl CommandResult {
    fn verdict(holds: bool, human_text: String, payload: Value) -> Self {
        Self {
            exit_code: if holds { 0 } else { 1 },
            human_text,
            machine_payload: Some(payload),
        }
    }
}

fn rows(t: &TopologyMatrix) -> Vec<String> {
    t.to_string().lines().map(str::to_owned).collect()
}

fn show_messages(ms: &[usize]) -> String {
    let names: Vec<String> = ms.iter().map(|m| format!("W{}", m + 1)).collect();
    format!("{{{}}}", names.join(", "))
}

fn show_sets(sets: &[Vec<usize>]) -> String {
    sets.iter().map(|s| show_messages(s)).collect::<Vec<_>>().join(", ")
}

fn mask_members(mask: u64) -> Vec<usize> {
    (0..64).filter(|&i| mask >> i & 1 == 1).collect()
}

fn list_violations(out: &mut String, violations: &[MtmViolation]) {
    if violations.is_empty() {
        return;
    }
    out.push_str("block violations:\n");
    for v in violations {
        let _ = writeln!(out, "  - {v}");
    }
}

pub fn analyze(path: &Path, dof: Option<UnitFraction>, dot: Option<&Path>) -> Result<CommandResult> {
    let t = read_topology(path)?;
    if let Some(out) = dot {
        write_text(out, &to_dot(&t))?;
    }
    let n = dof.map_or(2, UnitFraction::denominator);
    if n < 2 {
        bail!("--dof must be 1/n with n >= 2");
    }
    if n == 2 {
        Ok(analyze_half(&t))
    } else {
        Ok(analyze_general(&t, n))
    }
}

fn analyze_half(t: &TopologyMatrix) -> CommandResult {
    let def = is_maximal_by_definition(t);
    let mtm = is_mtm(t);
    let sets = alignment_sets(&build_message_graph(t));
    let d = decompose(t);
    let canonical = apply_permutation(t, &d.permutation).expect("sizes match");
    let order: Vec<usize> = (0..t.k()).map(|p| d.permutation.inverse().get(p)).collect();

    let mut out = String::new();
    let _ = writeln!(out, "users: {}", t.k());
    let _ = writeln!(out, "alignment sets: {}", show_sets(&sets.sets()));
    let verdict = if def.is_degenerate() {
        "maximal (single user, nothing to add)".to_owned()
    } else if def.is_maximal {
        "maximal, DoF 1/2".to_owned()
    } else if def.is_dof_optimal {
        "not maximal, DoF 1/2 optimal".to_owned()
    } else {
        "not maximal, not DoF 1/2 optimal".to_owned()
    };
    let _ = writeln!(out, "verdict: {verdict}");
    if let Some(w) = def.witness.as_ref().filter(|w| !matches!(w, Witness::Degenerate)) {
        let _ = writeln!(out, "witness: {w}");
    }
    let _ = writeln!(
        out,
        "matrix discriminant: {}",
        if mtm.is_maximal { "MTM" } else { "not MTM" }
    );
    let names: Vec<String> = order.iter().map(|m| format!("W{}", m + 1)).collect();
    let _ = writeln!(out, "block order: {}", names.join(" "));
    let sizes: Vec<String> = d.block_sizes().iter().map(ToString::to_string).collect();
    let _ = writeln!(out, "block sizes: {}", sizes.join(", "));
    out.push_str(&annotated_grid(&canonical, &d.blocks));
    list_violations(&mut out, &d.violations);
    if let Some(Witness::AddableLink {
        receiver,
        transmitter,
    }) = def.witness
    {
        let _ = writeln!(
            out,
            "suggestion: add the link from transmitter {} to receiver {}",
            transmitter + 1,
            receiver + 1
        );
    }

    let payload = json!({
        "k": t.k(),
        "matrix": rows(t),
        "dof": "1/2",
        "maximal": def.is_maximal,
        "dof_optimal": def.is_dof_optimal,
        "degenerate": def.is_degenerate(),
        "witness": def.witness,
        "mtm": mtm.is_maximal,
        "alignment_sets": sets,
        "decomposition": d,
        "canonical_matrix": rows(&canonical),
    });
    CommandResult::verdict(def.is_maximal, out, payload)
}

fn analyze_general(t: &TopologyMatrix, n: usize) -> CommandResult {
    let e_m = n - 1;
    let v = is_mtm_for_dof(t, e_m);
    let violations = mtm_violations_for_dof(t, e_m);
    let explanation = explain_topology(t);
    let classes: Vec<Vec<usize>> = twin_partition(t).into_iter().map(mask_members).collect();
    let under: Vec<usize> = violations
        .iter()
        .filter_map(|v| match v {
            MtmViolation::BlockCount {
                message,
                count,
                expected,
            } if count < expected => Some(*message),
            _ => None,
        })
        .collect();

    let mut out = String::new();
    let _ = writeln!(out, "users: {}", t.k());
    let _ = writeln!(out, "blocks: {}", show_sets(&classes));
    if explanation.is_classified() {
        let _ = writeln!(out, "alliances: {}", explanation.spec);
        let _ = writeln!(out, "E_M = {}", compute_e_max(&explanation.spec));
    } else {
        out.push_str("alliances: unclassified\n");
    }
    let verdict = if v.is_degenerate() {
        "maximal (single user, nothing to add)".to_owned()
    } else if v.is_maximal {
        format!("maximal, DoF 1/{n}")
    } else {
        format!("not an MTM for DoF 1/{n}")
    };
    let _ = writeln!(out, "verdict: {verdict}");
    if !under.is_empty() {
        let _ = writeln!(
            out,
            "under-filled receivers (fewer than {e_m} interference blocks): {}",
            show_messages(&under)
        );
    }
    list_violations(&mut out, &violations);

    let payload = json!({
        "k": t.k(),
        "matrix": rows(t),
        "dof": UnitFraction(n),
        "maximal": v.is_maximal,
        "dof_optimal": v.is_dof_optimal,
        "degenerate": v.is_degenerate(),
        "witness": v.witness,
        "blocks": classes.iter().map(|c| c.iter().map(|m| m + 1).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "under_filled": under.iter().map(|m| m + 1).collect::<Vec<_>>(),
        "violations": violations,
        "classified": explanation.is_classified(),
    });
    CommandResult::verdict(v.is_maximal, out, payload)
}

pub fn construct(spec_path: &Path, out: Option<&Path>, strict: bool) -> Result<CommandResult> {
    let doc = read_spec_document(spec_path)?;
    let strictness = if strict {
        Strictness::Strict
    } else {
        Strictness::Lenient
    };
    let (t, description, e_max, warnings, generalized) = if doc.is_generalized() {
        let s = GeneralizedAllianceSpec::from_document(&doc)?;
        let report = validate_generalized_spec(&s, strictness);
        if !report.is_valid() {
            let names: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
            bail!("invalid specification: {}", names.join("; "));
        }
        let warnings: Vec<String> = report.warnings.iter().map(ToString::to_string).collect();
        (derive_generalized_topology(&s)?, s.to_string(), compute_e_max(&s), warnings, true)
    } else {
        let s = AllianceSpec::from_document(&doc)?;
        let violations = validate_spec(&s);
        if !violations.is_empty() {
            let names: Vec<String> = violations.iter().map(ToString::to_string).collect();
            bail!("invalid specification: {}", names.join("; "));
        }
        let t = derive_topology(&s)?;
        if strict {
            let lifted = GeneralizedAllianceSpec::from_plain(&s);
            let report = validate_generalized_spec(&lifted, Strictness::Strict);
            if !report.is_valid() {
                let names: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
                bail!("invalid specification: {}", names.join("; "));
            }
        }
        let e_max = compute_e_max(&GeneralizedAllianceSpec::from_plain(&s));
        (t, s.to_string(), e_max, Vec::new(), false)
    };
    let degenerate = t.k() == 1;

    let mut text = String::new();
    let users = if t.k() == 1 { "user" } else { "users" };
    let _ = writeln!(text, "valid specification for {} {users}: {description}", t.k());
    for w in &warnings {
        let _ = writeln!(text, "warning: {w}");
    }
    if degenerate {
        text.push_str("degenerate single-user topology\n");
    } else {
        let _ = writeln!(text, "E_M = {e_max}, DoF {}", UnitFraction(e_max + 1));
    }
    match out {
        Some(p) => {
            write_text(p, &tim_core::serialize_topology(&t))?;
            let _ = writeln!(text, "wrote {}", p.display());
        }
        None => {
            text.push_str(&tim_core::serialize_topology(&t));
        }
    }
    let payload = json!({
        "k": t.k(),
        "generalized": generalized,
        "matrix": rows(&t),
        "e_max": e_max,
        "dof": UnitFraction(e_max + 1),
        "degenerate": degenerate,
        "warnings": warnings,
    });
    Ok(CommandResult {
        exit_code: 0,
        human_text: text,
        machine_payload: Some(payload),
    })
}

pub fn transform(path: &Path, strategy: Strategy, out: Option<&Path>) -> Result<CommandResult> {
    let t = read_topology(path)?;
    let result = match transform_to_mtm(&t, strategy) {
        Ok(r) => r,
        Err(Error::InternalConflict { first, second }) => {
            let text = format!(
                "internal conflict between W{first} and W{second}: the topology is not DoF 1/2 optimal and no maximal topology contains it\n"
            );
            let payload = json!({
                "transformed": false,
                "strategy": strategy,
                "conflict": [first, second],
            });
            return Ok(CommandResult::verdict(false, text, payload));
        }
        Err(e) => return Err(e).context("transforming topology"),
    };

    let mut text = String::new();
    let _ = writeln!(text, "strategy: {strategy}");
    if result.added_links.is_empty() {
        text.push_str("added links: none\n");
    } else {
        let pairs: Vec<String> = result
            .added_links
            .iter()
            .map(|(r, c)| format!("({}, {})", r + 1, c + 1))
            .collect();
        let _ = writeln!(text, "added links (receiver, transmitter): {}", pairs.join(", "));
    }
    if !result.merged.is_empty() {
        let _ = writeln!(text, "merged alliances: {}", show_sets(&result.merged));
    }
    let _ = writeln!(text, "alliances: {}", result.spec);
    match out {
        Some(p) => {
            write_text(p, &tim_core::serialize_topology(&result.matrix))?;
            let _ = writeln!(text, "wrote {}", p.display());
        }
        None => text.push_str(&tim_core::serialize_topology(&result.matrix)),
    }
    let mut payload = serde_json::to_value(&result)?;
    payload["transformed"] = json!(true);
    payload["strategy"] = json!(strategy);
    Ok(CommandResult {
        exit_code: 0,
        human_text: text,
        machine_payload: Some(payload),
    })
}

fn csv_row(e: &CatalogEntry) -> [String; 5] {
    [
        e.matrix.bitstring(),
        e.dof_optimal.to_string(),
        e.maximal.to_string(),
        e.alliance_count.map(|n| n.to_string()).unwrap_or_default(),
        e.canonical_form.as_ref().map(TopologyMatrix::bitstring).unwrap_or_default(),
    ]
}

pub struct EnumerateArgs<'a> {
    pub k: usize,
    pub canonical: bool,
    pub csv: Option<&'a Path>,
    pub specs: bool,
    pub samples: Option<usize>,
    pub seed: u64,
}

pub fn enumerate(args: &EnumerateArgs<'_>) -> Result<CommandResult> {
    let k = args.k;
    if k == 0 {
        bail!("--k must be positive");
    }
    if args.specs {
        return Ok(enumerate_specs_counts(k));
    }
    if args.canonical && k > MAX_LABEL_USERS {
        bail!("--canonical supports at most {MAX_LABEL_USERS} users");
    }
    let mut writer = match args.csv {
        Some(p) => Some(csv::Writer::from_path(p).with_context(|| format!("creating {}", p.display()))?),
        None => None,
    };
    if let Some(w) = writer.as_mut() {
        w.write_record(["matrix", "dof_optimal", "maximal", "alliance_count", "canonical"])?;
    }
    let sampled = k > MAX_EXHAUSTIVE_USERS;
    let mut summary = CatalogSummary::default();
    let mut classes = HashSet::new();
    let mut record = |e: CatalogEntry, w: &mut Option<csv::Writer<std::fs::File>>| -> Result<()> {
        if let Some(w) = w.as_mut() {
            w.write_record(csv_row(&e))?;
        }
        summary.total += 1;
        summary.dof_optimal += usize::from(e.dof_optimal);
        summary.maximal += usize::from(e.maximal);
        if let (true, Some(c)) = (e.maximal, &e.canonical_form) {
            classes.insert(c.key());
        }
        Ok(())
    };
    if sampled {
        let Some(n) = args.samples else {
            bail!("{k} users exceeds the exhaustive limit of {MAX_EXHAUSTIVE_USERS}; pass --samples");
        };
        for t in sample_topologies(k, n, args.seed)? {
            record(classify(t, args.canonical)?, &mut writer)?;
        }
    } else {
        for e in classify_iter(k, args.canonical)? {
            record(e, &mut writer)?;
        }
    }
    if let Some(mut w) = writer {
        w.flush()?;
    }
    if args.canonical {
        summary.maximal_classes = Some(classes.len());
    }

    let mut text = String::new();
    let _ = writeln!(
        text,
        "{} users{}: {} topologies, {} DoF 1/2 optimal, {} maximal",
        k,
        if sampled { " (sampled)" } else { "" },
        summary.total,
        summary.dof_optimal,
        summary.maximal
    );
    if let Some(c) = summary.maximal_classes {
        let _ = writeln!(text, "maximal classes up to relabeling: {c}");
    }
    if let Some(p) = args.csv {
        let _ = writeln!(text, "wrote {}", p.display());
    }
    let payload = json!({
        "k": k,
        "sampled": sampled,
        "seed": sampled.then_some(args.seed),
        "summary": summary,
    });
    Ok(CommandResult {
        exit_code: 0,
        human_text: text,
        machine_payload: Some(payload),
    })
}

fn enumerate_specs_counts(k: usize) -> CommandResult {
    let mut text = String::new();
    let mut counts = Vec::new();
    let mut total = 0;
    for n in 1..=max_alliances(k) {
        let c = count_specs(k, n);
        total += c;
        counts.push(json!({"alliances": n, "specs": c}));
        let _ = writeln!(text, "{n} alliances: {c} valid specifications");
    }
    let _ = writeln!(text, "total: {total}");
    CommandResult {
        exit_code: 0,
        human_text: text,
        machine_payload: Some(json!({"k": k, "counts": counts, "total": total})),
    }
}

pub fn verify_theorems(k: usize, samples: Option<usize>, seed: u64) -> Result<CommandResult> {
    if k == 0 {
        bail!("--k must be positive");
    }
    let report = if k <= MAX_EXHAUSTIVE_USERS && samples.is_none() {
        verify_iff_theorems(k)?
    } else {
        verify_iff_sampled(k, samples.unwrap_or(10_000), seed)?
    };
    let text = describe_iff(&report);
    let payload = serde_json::to_value(&report)?;
    Ok(CommandResult::verdict(report.passes(), text, payload))
}

fn describe_iff(r: &IffReport) -> String {
    let mut text = String::new();
    let failures = [
        ("maximal but not derived from a valid spec", &r.maximal_not_derived),
        ("derived but not maximal", &r.derived_not_maximal),
        ("matrix discriminant disagrees", &r.mtm_disagreements),
        ("maximal but changed by the transformation", &r.fixpoint_failures),
        ("transformation failed", &r.transform_failures),
    ];
    let failed: usize = failures.iter().map(|(_, v)| v.len()).sum();
    let _ = write!(text, "{} maximal / {} total", r.maximal, r.total);
    if r.sampled {
        text.push_str(" (sampled)");
    }
    if failed == 0 {
        text.push_str(", all iff checks pass\n");
    } else {
        let _ = writeln!(text, ", {failed} iff checks fail");
    }
    let _ = writeln!(
        text,
        "DoF 1/2 optimal: {}, derived: {}, transformed: {}",
        r.dof_optimal, r.derived, r.transformed
    );
    for (label, list) in failures {
        if !list.is_empty() {
            let shown: Vec<&str> = list.iter().take(10).map(String::as_str).collect();
            let _ = writeln!(text, "{label}: {} ({})", list.len(), shown.join(", "));
        }
    }
    if !r.necessity_failures.is_empty() {
        let _ = writeln!(
            text,
            "note: {} maximal matrices recover alliances outside the partition conditions",
            r.necessity_failures.len()
        );
    }
    text
}

pub struct VerifyDofArgs<'a> {
    pub path: &'a Path,
    pub spec: Option<&'a Path>,
    pub trials: usize,
    pub tol: f64,
    pub slots: Option<usize>,
    pub seed: u64,
}

pub fn verify_dof(args: &VerifyDofArgs<'_>) -> Result<CommandResult> {
    let t = read_topology(args.path)?;
    let config = DecodeConfig {
        slots: args.slots,
        trials: args.trials,
        seed: args.seed,
        tol: args.tol,
    };
    let report = match args.spec {
        Some(p) => {
            let s = read_generalized_spec(p)?;
            verify_generalized(&t, &s, &config)?
        }
        None => verify_alignment(&t, &config)?,
    };
    let text = describe_decode(&report);
    let payload = serde_json::to_value(&report)?;
    Ok(CommandResult::verdict(report.all_separable, text, payload))
}

fn describe_decode(r: &DecodeReport) -> String {
    let mut text = String::new();
    let _ = writeln!(
        text,
        "L = {}, {} trials, seed {}, tolerance {:e}",
        r.slots, r.trials, r.seed, r.tol
    );
    if r.all_separable {
        let _ = writeln!(
            text,
            "all receivers separable, DoF {} achieved (worst margin {:.3e})",
            UnitFraction(r.slots),
            r.worst_margin()
        );
    } else {
        for f in r.failing() {
            let _ = writeln!(
                text,
                "receiver {} not separable: margin {:.3e}, interference rank {}",
                f.receiver + 1,
                f.margin,
                f.interference_rank
            );
        }
    }
    text
}

pub fn bound(path: &Path, spec: Option<&Path>) -> Result<CommandResult> {
    let t = read_topology(path)?;
    let (s, classified) = match spec {
        Some(p) => (read_generalized_spec(p)?, true),
        None => {
            let e = explain_topology(&t);
            let ok = e.is_classified();
            (e.spec, ok)
        }
    };
    let r = dof_report(&t, &s)?;
    let mut text = format!(
        "achievable {}, upper {}, {}\n",
        r.dof_achievable,
        r.dof_upper,
        if r.tight { "tight" } else { "gap" }
    );
    let _ = writeln!(text, "E_M = {}, acyclic subset size {}", r.e_max, r.psi);
    if !classified {
        text.push_str("note: no valid alliance explanation; achievable value is not guaranteed\n");
    }
    if r.degenerate {
        text.push_str("degenerate single-user topology\n");
    }
    let mut payload = serde_json::to_value(&r)?;
    payload["classified"] = json!(classified);
    Ok(CommandResult::verdict(r.tight, text, payload))
}

pub fn export_dot(path: &Path, out: Option<&Path>) -> Result<CommandResult> {
    let t = read_topology(path)?;
    let dot = to_dot(&t);
    let text = match out {
        Some(p) => {
            write_text(p, &dot)?;
            format!("wrote {}\n", p.display())
        }
        None => dot.clone(),
    };
    Ok(CommandResult {
        exit_code: 0,
        human_text: text,
        machine_payload: Some(json!({"k": t.k(), "dot": dot})),
    })
}
