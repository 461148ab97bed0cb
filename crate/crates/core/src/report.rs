//! The full verification pipeline and its JSON report.
//!
//! Vertices in check details are reported twice: `vertex` uses the original
//! diagram's level numbering (`w_n` for added vertices, `n:i` otherwise) and
//! `stored` is the `level:index` position inside the completion.

use num_bigint::BigUint;
use serde::Serialize;
use serde_json::{json, Value};

use crate::closure::fullness_check;
use crate::diagram::{BratteliDiagram, ValidationReport, VertexId};
use crate::filtration::{diagram_for_sequence_check, filtration_dims};
use crate::kumjian::{complete, is_unital_case, KumjianCompletion};
use crate::paths::path_counts_from_set;
use crate::rep::{
    build_rep, corner_analysis, rep_dimension, verify_all_embeddings, verify_all_matrix_units, verify_ck, PairBudget,
};

/// Representations above this dimension are not built; truncate with a
/// level cap instead.
pub const MAX_REP_DIMENSION: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyOptions {
    pub level_cap: Option<usize>,
    pub pair_budget: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        let budget = PairBudget::default();
        VerifyOptions {
            level_cap: None,
            pair_budget: budget.limit,
            seed: budget.seed,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InputSummary {
    pub name: String,
    pub levels: usize,
    pub vertices: usize,
    pub marked: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub ok: bool,
    pub details: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub input: InputSummary,
    pub options: VerifyOptions,
    pub checks: Vec<CheckResult>,
    pub summary: Summary,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: &str, ok: bool, details: Value) {
        self.checks.push(CheckResult {
            name: name.into(),
            ok,
            details,
        });
    }

    fn finish(mut self) -> Self {
        self.summary.ok = !self.checks.is_empty() && self.checks.iter().all(|c| c.ok);
        self
    }
}

fn number(n: &BigUint) -> Value {
    match u64::try_from(n) {
        Ok(x) => json!(x),
        Err(_) => json!(n.to_string()),
    }
}

fn report_value(r: &ValidationReport) -> Value {
    serde_json::to_value(r).expect("report serializes")
}

struct Names<'a>(&'a KumjianCompletion);

impl Names<'_> {
    fn of(&self, v: VertexId) -> Value {
        json!({ "vertex": self.0.vertex_name(v), "stored": v.to_string() })
    }
}

/// Runs every check on `d`. An unmarked diagram is completed first; a marked
/// one is read as a completion.
pub fn verify_all(d: &BratteliDiagram, name: &str, options: &VerifyOptions) -> VerifyReport {
    let mut report = VerifyReport {
        input: InputSummary {
            name: name.into(),
            levels: d.num_levels(),
            vertices: d.num_vertices(),
            marked: !d.marks().is_empty(),
        },
        options: options.clone(),
        checks: Vec::new(),
        summary: Summary { ok: false },
    };
    let budget = PairBudget::with_seed(options.pair_budget, options.seed);

    let valid = d.validate(false);
    report.push("validate", valid.ok, report_value(&valid));
    if !valid.ok {
        return report.finish();
    }

    let completion = if d.marks().is_empty() {
        complete(d).map(|c| (c, "computed"))
    } else {
        KumjianCompletion::from_marked(d.clone()).map(|c| (c, "input"))
    };
    let (mut c, source) = match completion {
        Ok(x) => x,
        Err(err) => {
            report.push("sigma", false, json!({ "error": err.to_string() }));
            return report.finish();
        }
    };

    let sigma: Vec<Value> = c
        .sigma()
        .iter()
        .map(|(v, s)| json!({ "vertex": v.to_string(), "sigma": s }))
        .collect();
    report.push("sigma", true, json!({ "sigma": sigma }));

    if let Some(cap) = options.level_cap {
        match c.truncate(cap) {
            Ok(t) => c = t,
            Err(err) => {
                report.push("complete", false, json!({ "error": err.to_string() }));
                return report.finish();
            }
        }
    }
    let names = Names(&c);
    let invariants = c.check_invariants();
    let unital = is_unital_case(c.original()).unwrap_or(false);
    report.push(
        "complete",
        invariants.ok,
        json!({
            "source": source,
            "s_set": c.s_set().iter().map(|&v| names.of(v)).collect::<Vec<_>>(),
            "unital": unital,
            "dangling": c.dangling().iter().map(|&v| names.of(v)).collect::<Vec<_>>(),
            "invariants": report_value(&invariants),
        }),
    );

    let ke = c.ke();
    let counts = path_counts_from_set(ke, c.s_set());
    let mut counts_ok = true;
    let per_vertex: Vec<Value> = ke
        .vertices()
        .map(|v| {
            let paths = &counts[v.level - 1][v.index];
            let ok = *paths == BigUint::from(ke.label(v));
            counts_ok &= ok;
            let mut entry = names.of(v);
            entry["label"] = json!(ke.label(v));
            entry["paths"] = number(paths);
            entry["ok"] = json!(ok);
            entry
        })
        .collect();
    report.push("path_count", counts_ok, json!({ "vertices": per_vertex }));

    let dim = rep_dimension(ke);
    let buildable = u64::try_from(&dim).is_ok_and(|x| x <= MAX_REP_DIMENSION as u64);
    let rep = if buildable { build_rep(ke).ok() } else { None };
    report.push(
        "build_rep",
        rep.is_some(),
        match &rep {
            Some(r) => {
                json!({ "dimension": r.dim(), "generators": r.vertex_projections().len() + r.edge_isometries().len() })
            }
            None => json!({
                "dimension": number(&dim),
                "error": format!("dimension exceeds {MAX_REP_DIMENSION}; rerun with a level cap"),
            }),
        },
    );

    if let Some(rep) = &rep {
        let ck = verify_ck(rep);
        report.push("verify_ck", ck.ok, report_value(&ck));

        let units = verify_all_matrix_units(rep, &budget);
        let ok = units.iter().all(|u| u.report.ok);
        let details: Vec<Value> = units
            .iter()
            .map(|u| {
                let mut entry = names.of(u.vertex);
                entry["paths"] = json!(u.paths);
                entry["rank"] = json!(u.rank);
                entry["pairs_checked"] = json!(u.pairs_checked);
                entry["pairs_total"] = json!(u.pairs_total);
                entry["sampled"] = json!(u.sampled);
                entry["findings"] = json!(u.report.findings);
                entry
            })
            .collect();
        report.push("matrix_units", ok, json!({ "vertices": details }));

        let embeddings = verify_all_embeddings(rep, &budget);
        let ok = embeddings.iter().all(|e| e.report.ok);
        let details: Vec<Value> = embeddings
            .iter()
            .map(|e| {
                let mut entry = names.of(e.vertex);
                entry["targets"] = e
                    .targets
                    .iter()
                    .map(|t| {
                        let mut target = names.of(t.target);
                        target["multiplicity"] = json!(t.multiplicity);
                        target["observed"] = json!(t.observed);
                        target
                    })
                    .collect();
                entry["pairs_checked"] = json!(e.pairs_checked);
                entry["pairs_total"] = json!(e.pairs_total);
                entry["sampled"] = json!(e.sampled);
                entry["findings"] = json!(e.report.findings);
                entry
            })
            .collect();
        report.push("embedding", ok, json!({ "vertices": details }));

        let corners = corner_analysis(rep, &budget);
        report.push(
            "corners",
            corners.identities_ok,
            serde_json::to_value(&corners).expect("corner report serializes"),
        );
    }

    let fullness = fullness_check(&c);
    let closure_names = |vs: &[VertexId]| -> Vec<Value> { vs.iter().map(|&v| names.of(v)).collect() };
    report.push(
        "fullness",
        fullness.s_full && fullness.complement_full,
        json!({
            "s_full": fullness.s_full,
            "complement_full": fullness.complement_full,
            "s_missing": closure_names(&fullness.s_missing),
            "complement_missing": closure_names(&fullness.complement_missing),
            "s_trace": fullness.s_closure.trace,
            "complement_trace": fullness.complement_closure.trace,
        }),
    );

    let sequence = diagram_for_sequence_check(&c);
    report.push(
        "filtration",
        sequence.ok,
        json!({ "dims": filtration_dims(&c), "report": report_value(&sequence) }),
    );

    report.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bd1::{parse_bd1, write_bd1};
    use crate::diagram::fixtures::*;

    #[test]
    fn example_a_passes_with_corner_dims() {
        let r = verify_all(&example_a(), "a.bd1", &VerifyOptions::default());
        assert!(r.summary.ok, "{}", r.to_json());
        let corners = &r.check("corners").unwrap().details;
        let dims: Vec<u64> = ["dim_full", "dim_p_corner", "dim_complement_corner", "dim_off_corner"]
            .iter()
            .map(|k| corners[k].as_u64().unwrap())
            .collect();
        assert_eq!(dims, vec![25, 4, 9, 6]);
        let names: Vec<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "validate",
                "sigma",
                "complete",
                "path_count",
                "build_rep",
                "verify_ck",
                "matrix_units",
                "embedding",
                "corners",
                "fullness",
                "filtration"
            ]
        );
    }

    #[test]
    fn example_b_realizes_label_three() {
        let r = verify_all(&example_b(), "b.bd1", &VerifyOptions::default());
        assert!(r.summary.ok);
        let counts = &r.check("path_count").unwrap().details["vertices"];
        let v = counts
            .as_array()
            .unwrap()
            .iter()
            .find(|e| e["vertex"] == "2:0")
            .unwrap();
        assert_eq!(v["paths"], 3);
        assert_eq!(v["label"], 3);
    }

    #[test]
    fn completed_input_is_accepted() {
        let c = complete(&fibonacci()).unwrap();
        let parsed = parse_bd1(&write_bd1(c.ke())).unwrap();
        let r = verify_all(&parsed, "fib", &VerifyOptions::default());
        assert!(r.summary.ok);
        assert_eq!(r.check("complete").unwrap().details["source"], "input");
    }

    #[test]
    fn corrupted_completion_fails_named_check() {
        let e = BratteliDiagram::from_parts(vec![vec![1], vec![4]], vec![vec![vec![2]]], Default::default());
        let ke = complete(&e).unwrap().into_ke();
        let mut adjacency = ke.matrices().to_vec();
        adjacency[1][1][0] = 1;
        let corrupted = BratteliDiagram::from_parts(ke.all_labels().to_vec(), adjacency, ke.marks().clone());
        let r = verify_all(&corrupted, "bad", &VerifyOptions::default());
        assert!(!r.summary.ok);
        for name in ["complete", "path_count", "filtration", "matrix_units"] {
            assert!(!r.check(name).unwrap().ok, "{name} should fail");
        }
    }

    #[test]
    fn invalid_input_stops_after_validation() {
        let d = BratteliDiagram::from_parts(vec![vec![1], vec![1]], vec![vec![vec![2]]], Default::default());
        let r = verify_all(&d, "x", &VerifyOptions::default());
        assert!(!r.summary.ok);
        assert_eq!(r.checks.len(), 1);
    }

    #[test]
    fn level_cap_truncates() {
        let opts = VerifyOptions {
            level_cap: Some(2),
            ..VerifyOptions::default()
        };
        let r = verify_all(&fibonacci(), "fib", &opts);
        assert!(r.summary.ok, "{}", r.to_json());
        assert_eq!(r.check("build_rep").unwrap().details["dimension"], 8);
        let bad = VerifyOptions {
            level_cap: Some(9),
            ..VerifyOptions::default()
        };
        assert!(!verify_all(&fibonacci(), "fib", &bad).summary.ok);
    }

    #[test]
    fn json_is_deterministic() {
        let opts = VerifyOptions {
            pair_budget: 3,
            seed: 11,
            ..VerifyOptions::default()
        };
        let a = verify_all(&fibonacci(), "fib", &opts).to_json();
        let b = verify_all(&fibonacci(), "fib", &opts).to_json();
        assert_eq!(a, b);
        assert!(a.starts_with("{\n  \"input\""));
    }
}
