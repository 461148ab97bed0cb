//! Block-rank bookkeeping for the filtrations `F_n ⊆ F'_n ⊆ F_{n+1}`.
//!
//! `F_n` is recorded by the labels of `V_n`. `F'_n` gains one rank-1 block,
//! the unit difference `1_{F_{n+1}} − 1_{F_n}`, exactly at the levels where the
//! completion added a vertex.

use serde::Serialize;

use crate::diagram::{Severity, ValidationReport};
use crate::kumjian::{KumjianCompletion, LEVEL_SHIFT};
use crate::paths::multiplicity;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiltrationDims {
    /// Level in `E`'s numbering; level 0 is the added level holding `w_0`.
    pub level: usize,
    pub dims_f: Vec<u64>,
    pub dims_f_prime: Vec<u64>,
    pub has_extra_block: bool,
    /// Last level of a finite truncation: no `F_{N+1}` exists, so `F'_N = F_N`.
    pub final_level: bool,
}

pub fn filtration_dims(c: &KumjianCompletion) -> Vec<FiltrationDims> {
    let e = c.original();
    let n = e.num_levels();
    (0..=n)
        .map(|level| {
            let dims_f = if level == 0 {
                Vec::new()
            } else {
                e.labels(level).to_vec()
            };
            let final_level = level == n;
            let has_extra_block = !final_level && c.w(level).is_some();
            let mut dims_f_prime = dims_f.clone();
            if has_extra_block {
                dims_f_prime.push(1);
            }
            FiltrationDims {
                level,
                dims_f,
                dims_f_prime,
                has_extra_block,
                final_level,
            }
        })
        .collect()
}

/// Checks that `KE` is a Bratteli diagram for the sequence `{F'_n}`: it is
/// valid, every original vertex is filled exactly by its incoming edges, and
/// between original vertices it has the multiplicities of `E`.
pub fn diagram_for_sequence_check(c: &KumjianCompletion) -> ValidationReport {
    let mut report = ValidationReport::default();
    let ke = c.ke();
    let e = c.original();

    let valid = ke.validate(false);
    for f in valid.findings {
        match f.severity {
            Severity::Error => report.error(format!("KE {}", f.location), f.message),
            Severity::Warning => report.warning(format!("KE {}", f.location), f.message),
        }
    }
    if !report.ok {
        return report;
    }

    for v in ke.vertices().filter(|&v| !ke.is_marked(v)) {
        let incoming = ke.incoming_weight(v);
        if incoming != ke.label(v).into() {
            report.error(
                c.vertex_name(v),
                format!(
                    "label {} but incoming weight {} (unital embedding fails)",
                    ke.label(v),
                    incoming
                ),
            );
        }
    }

    for level in 1..e.num_levels() {
        for v in e.level_vertices(level) {
            for w in e.level_vertices(level + 1) {
                let want = multiplicity(e, v, w).expect("adjacent levels");
                let got = multiplicity(ke, c.from_original(v), c.from_original(w)).expect("adjacent levels");
                if want != got {
                    report.error(
                        format!("{v} -> {w}"),
                        format!("KE multiplicity {got} differs from E multiplicity {want}"),
                    );
                }
            }
        }
    }

    for dims in filtration_dims(c) {
        let extra = dims.dims_f_prime.len() as i64 - dims.dims_f.len() as i64;
        let grew: u64 = dims.dims_f_prime.iter().sum::<u64>() - dims.dims_f.iter().sum::<u64>();
        if !(0..=1).contains(&extra) || grew > 1 || dims.dims_f_prime[..dims.dims_f.len()] != dims.dims_f[..] {
            report.error(
                format!("level {}", dims.level),
                "F'_n is not F_n plus at most one rank-1 block",
            );
        }
        if ke.level_size(dims.level + LEVEL_SHIFT) != dims.dims_f_prime.len() && !dims.final_level {
            report.error(
                format!("level {}", dims.level),
                "stored level size differs from the number of F'_n blocks",
            );
        }
        if dims.final_level && c.w(dims.level).is_some() {
            report.warning(
                format!("level {}", dims.level),
                "final truncation level carries an added vertex; F'_N is taken equal to F_N",
            );
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::fixtures::*;
    use crate::diagram::BratteliDiagram;
    use crate::kumjian::complete;
    use std::collections::BTreeSet;

    #[test]
    fn example_b_dims() {
        let c = complete(&example_b()).unwrap();
        let dims = filtration_dims(&c);
        let summary: Vec<_> = dims
            .iter()
            .map(|d| (d.level, d.dims_f.clone(), d.dims_f_prime.clone()))
            .collect();
        assert_eq!(
            summary,
            vec![(0, vec![], vec![1]), (1, vec![1], vec![1, 1]), (2, vec![3], vec![3])]
        );
        assert!(dims[2].final_level);
    }

    #[test]
    fn fibonacci_extra_block_only_at_level_zero() {
        let c = complete(&fibonacci()).unwrap();
        let extra: Vec<bool> = filtration_dims(&c).iter().map(|d| d.has_extra_block).collect();
        assert_eq!(extra, vec![true, false, false, false]);
    }

    #[test]
    fn sequence_check_passes_on_completions() {
        for e in [example_a(), example_b(), fibonacci()] {
            let report = diagram_for_sequence_check(&complete(&e).unwrap());
            assert!(report.ok, "{:?}", report);
        }
    }

    #[test]
    fn deleted_added_edge_fails_equality() {
        let e = BratteliDiagram::from_parts(vec![vec![1], vec![4]], vec![vec![vec![2]]], BTreeSet::new());
        let ke = complete(&e).unwrap().into_ke();
        let mut adjacency = ke.matrices().to_vec();
        adjacency[1][1][0] = 1;
        let corrupted = BratteliDiagram::from_parts(ke.all_labels().to_vec(), adjacency, ke.marks().clone());
        let c = KumjianCompletion::from_marked(corrupted).unwrap();
        let report = diagram_for_sequence_check(&c);
        assert!(!report.ok);
        assert!(report
            .errors()
            .any(|f| f.location == "2:0" && f.message.contains("incoming weight 3")));
    }
}
