//! Hereditary and saturated closures of vertex sets, and the two fullness
//! checks built on them.
//!
//! A set `H` is hereditary when `v ∈ H` and an edge `v → w` force `w ∈ H`. It
//! is saturated when every vertex that emits at least one edge, all of whose
//! ranges lie in `H`, is itself in `H`. Sinks never enter by saturation.

use std::collections::{BTreeSet, VecDeque};

use serde::Serialize;

use crate::diagram::{BratteliDiagram, VertexId};
use crate::error::DiagramError;
use crate::kumjian::KumjianCompletion;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Hereditary,
    Saturated,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub vertex: VertexId,
    pub rule: Rule,
    /// The source of the edge followed (hereditary) or all edge ranges of
    /// the vertex (saturated).
    pub witness: Vec<VertexId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClosureResult {
    pub closure: BTreeSet<VertexId>,
    pub trace: Vec<TraceStep>,
}

pub fn hereditary_saturated_closure(
    g: &BratteliDiagram,
    seed: &BTreeSet<VertexId>,
) -> Result<ClosureResult, DiagramError> {
    seed.iter().try_for_each(|&v| g.check_vertex(v))?;
    let mut closure = seed.clone();
    let mut trace = Vec::new();
    let mut queue: VecDeque<VertexId> = seed.iter().copied().collect();

    loop {
        while let Some(v) = queue.pop_front() {
            let mut targets: Vec<VertexId> = g.out_edges(v).map(|e| e.range()).collect();
            targets.dedup();
            for w in targets {
                if closure.insert(w) {
                    trace.push(TraceStep {
                        vertex: w,
                        rule: Rule::Hereditary,
                        witness: vec![v],
                    });
                    queue.push_back(w);
                }
            }
        }

        let saturated: Vec<(VertexId, Vec<VertexId>)> = g
            .vertices()
            .filter(|v| !closure.contains(v) && g.emits(*v))
            .filter_map(|v| {
                let mut ranges: Vec<VertexId> = g.out_edges(v).map(|e| e.range()).collect();
                ranges.dedup();
                ranges.iter().all(|w| closure.contains(w)).then_some((v, ranges))
            })
            .collect();
        if saturated.is_empty() {
            break;
        }
        for (v, ranges) in saturated {
            closure.insert(v);
            trace.push(TraceStep {
                vertex: v,
                rule: Rule::Saturated,
                witness: ranges,
            });
            queue.push_back(v);
        }
    }

    Ok(ClosureResult { closure, trace })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FullnessReport {
    pub s_full: bool,
    pub complement_full: bool,
    /// Vertices left outside the closure of the marked set.
    pub s_missing: Vec<VertexId>,
    pub complement_missing: Vec<VertexId>,
    pub s_closure: ClosureResult,
    pub complement_closure: ClosureResult,
}

/// Closes both the marked set and its complement; each corner projection is
/// full exactly when its closure is every vertex.
pub fn fullness_check_diagram(g: &BratteliDiagram) -> Result<FullnessReport, DiagramError> {
    let all: BTreeSet<VertexId> = g.vertices().collect();
    let marked = g.marks().clone();
    let unmarked: BTreeSet<VertexId> = all.difference(&marked).copied().collect();
    let s_closure = hereditary_saturated_closure(g, &marked)?;
    let complement_closure = hereditary_saturated_closure(g, &unmarked)?;
    let s_missing: Vec<_> = all.difference(&s_closure.closure).copied().collect();
    let complement_missing: Vec<_> = all.difference(&complement_closure.closure).copied().collect();
    Ok(FullnessReport {
        s_full: s_missing.is_empty(),
        complement_full: complement_missing.is_empty(),
        s_missing,
        complement_missing,
        s_closure,
        complement_closure,
    })
}

pub fn fullness_check(c: &KumjianCompletion) -> FullnessReport {
    fullness_check_diagram(c.ke()).expect("completion marks are in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::fixtures::*;
    use crate::kumjian::complete;

    fn v(l: usize, i: usize) -> VertexId {
        VertexId::new(l, i)
    }

    #[test]
    fn closure_of_s_uses_hereditary_steps() {
        let c = complete(&example_a()).unwrap();
        let r = hereditary_saturated_closure(c.ke(), c.s_set()).unwrap();
        assert_eq!(r.closure, [v(1, 0), v(2, 0), v(3, 0)].into());
        assert!(r.trace.iter().all(|t| t.rule == Rule::Hereditary));
        assert_eq!(r.trace[0].witness, vec![v(1, 0)]);
    }

    #[test]
    fn closure_of_original_vertices_saturates_w0() {
        let c = complete(&example_a()).unwrap();
        let r = hereditary_saturated_closure(c.ke(), &[v(2, 0), v(3, 0)].into()).unwrap();
        assert_eq!(r.closure.len(), 3);
        assert_eq!(
            r.trace,
            vec![TraceStep {
                vertex: v(1, 0),
                rule: Rule::Saturated,
                witness: vec![v(2, 0)],
            }]
        );
    }

    #[test]
    fn full_seed_is_a_fixed_point() {
        let c = complete(&fibonacci()).unwrap();
        let all: BTreeSet<_> = c.ke().vertices().collect();
        let r = hereditary_saturated_closure(c.ke(), &all).unwrap();
        assert_eq!(r.closure, all);
        assert!(r.trace.is_empty());
    }

    #[test]
    fn sinks_never_saturate() {
        // 1:1 is a mid-level sink; seeding the rest must not pull it in
        let g = BratteliDiagram::from_parts(vec![vec![1, 1], vec![1]], vec![vec![vec![1], vec![0]]], BTreeSet::new());
        let r = hereditary_saturated_closure(&g, &[v(2, 0)].into()).unwrap();
        assert_eq!(r.closure, [v(1, 0), v(2, 0)].into());
    }

    #[test]
    fn completions_are_full_on_both_sides() {
        for e in [example_a(), example_b(), fibonacci()] {
            let f = fullness_check(&complete(&e).unwrap());
            assert!(f.s_full && f.complement_full);
        }
    }

    #[test]
    fn unreachable_vertex_breaks_s_fullness() {
        let c = complete(&example_a()).unwrap();
        let ke = c.ke();
        let mut labels = ke.all_labels().to_vec();
        labels[2].push(1);
        let mut adjacency = ke.matrices().to_vec();
        for row in adjacency[1].iter_mut() {
            row.push(0);
        }
        let g = BratteliDiagram::from_parts(labels, adjacency, ke.marks().clone());
        assert!(g.validate(false).ok);
        let f = fullness_check_diagram(&g).unwrap();
        assert!(!f.s_full);
        assert_eq!(f.s_missing, vec![v(3, 1)]);
        assert!(f.complement_full);
    }

    #[test]
    fn closure_is_monotone_and_idempotent() {
        let c = complete(&example_b()).unwrap();
        let g = c.ke();
        let small = hereditary_saturated_closure(g, &[v(2, 1)].into()).unwrap();
        let big = hereditary_saturated_closure(g, &[v(2, 1), v(2, 0)].into()).unwrap();
        assert!(small.closure.is_subset(&big.closure));
        let again = hereditary_saturated_closure(g, &small.closure).unwrap();
        assert_eq!(again.closure, small.closure);
        assert!(again.trace.is_empty());
    }
}
