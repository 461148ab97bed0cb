//! Finite paths, path counting and canonical enumeration.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use num_traits::Zero;
use serde::Serialize;

use crate::diagram::{BratteliDiagram, EdgeSlot, VertexId};
use crate::error::DiagramError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Step {
    pub dst: usize,
    pub copy: u64,
}

/// A path `μ = μ_1 … μ_n`; the empty step list is the vertex `start` itself.
///
/// The derived order is the canonical one: start level, start index, then
/// the steps lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Path {
    pub start: VertexId,
    pub steps: Vec<Step>,
}

impl Path {
    pub fn vertex(v: VertexId) -> Self {
        Path {
            start: v,
            steps: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn source(&self) -> VertexId {
        self.start
    }

    pub fn range(&self) -> VertexId {
        match self.steps.last() {
            Some(step) => VertexId::new(self.start.level + self.steps.len(), step.dst),
            None => self.start,
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeSlot> + '_ {
        let mut src = self.start.index;
        self.steps.iter().enumerate().map(move |(k, step)| {
            let e = EdgeSlot {
                level: self.start.level + k,
                src,
                dst: step.dst,
                copy: step.copy,
            };
            src = step.dst;
            e
        })
    }

    /// `μe`; panics unless `s(e) = r(μ)`.
    pub fn then(&self, e: EdgeSlot) -> Path {
        assert_eq!(e.source(), self.range(), "edge does not continue the path");
        let mut steps = self.steps.clone();
        steps.push(Step {
            dst: e.dst,
            copy: e.copy,
        });
        Path {
            start: self.start,
            steps,
        }
    }

    /// `eμ`; panics unless `r(e) = s(μ)`.
    pub fn prepend(&self, e: EdgeSlot) -> Path {
        assert_eq!(e.range(), self.start, "edge does not lead into the path");
        let mut steps = Vec::with_capacity(self.steps.len() + 1);
        steps.push(Step {
            dst: e.dst,
            copy: e.copy,
        });
        steps.extend_from_slice(&self.steps);
        Path {
            start: e.source(),
            steps,
        }
    }

    /// Whether every step names an existing edge of `g`.
    pub fn is_valid_in(&self, g: &BratteliDiagram) -> bool {
        g.contains(self.start) && self.edges().all(|e| e.copy < g.entry(e.level, e.src, e.dst))
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.start)?;
        for e in self.edges() {
            write!(f, " -{}-> {}", e.copy, e.range())?;
        }
        Ok(())
    }
}

fn check_all(g: &BratteliDiagram, src: &BTreeSet<VertexId>, v: VertexId) -> Result<(), DiagramError> {
    g.check_vertex(v)?;
    src.iter().try_for_each(|&s| g.check_vertex(s))
}

/// Number of paths from `src` to every vertex, as one vector per level.
///
/// Row `n` is `1_src|V_n + c_{n−1} · A_{n−1}`: the length-zero paths plus all
/// paths through the previous level, propagated by the adjacency matrices.
pub fn path_counts_from_set(g: &BratteliDiagram, src: &BTreeSet<VertexId>) -> Vec<Vec<BigUint>> {
    let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(g.num_levels());
    for level in 1..=g.num_levels() {
        let mut row: Vec<BigUint> = g
            .level_vertices(level)
            .map(|v| BigUint::from(u8::from(src.contains(&v))))
            .collect();
        if let Some(prev) = rows.last() {
            for (i, count) in prev.iter().enumerate() {
                if count.is_zero() {
                    continue;
                }
                for (j, slot) in row.iter_mut().enumerate() {
                    let m = g.entry(level - 1, i, j);
                    if m > 0 {
                        *slot += count * m;
                    }
                }
            }
        }
        rows.push(row);
    }
    rows
}

pub fn count_paths_from_set(
    g: &BratteliDiagram,
    src: &BTreeSet<VertexId>,
    v: VertexId,
) -> Result<BigUint, DiagramError> {
    check_all(g, src, v)?;
    let relevant: BTreeSet<VertexId> = src.iter().copied().filter(|s| s.level <= v.level).collect();
    let truncated = g.truncate(v.level)?;
    let counts = path_counts_from_set(&truncated, &relevant);
    Ok(counts[v.level - 1][v.index].clone())
}

/// Vertices from which `v` can be reached (including `v`).
fn ancestors(g: &BratteliDiagram, v: VertexId) -> BTreeSet<VertexId> {
    let mut found = BTreeSet::from([v]);
    let mut frontier = vec![v];
    for level in (1..v.level).rev() {
        let next: Vec<VertexId> = g
            .level_vertices(level)
            .filter(|&u| frontier.iter().any(|t| g.entry(level, u.index, t.index) > 0))
            .collect();
        found.extend(next.iter().copied());
        frontier = next;
    }
    found
}

fn walk(
    g: &BratteliDiagram,
    path: &mut Path,
    keep: &dyn Fn(VertexId) -> bool,
    is_target: &dyn Fn(VertexId) -> bool,
    out: &mut Vec<Path>,
) {
    let here = path.range();
    if is_target(here) {
        out.push(path.clone());
    }
    for e in g.out_edges(here) {
        if !keep(e.range()) {
            continue;
        }
        path.steps.push(Step {
            dst: e.dst,
            copy: e.copy,
        });
        walk(g, path, keep, is_target, out);
        path.steps.pop();
    }
}

/// All paths from `src` to `v` in canonical order.
pub fn enumerate_paths(g: &BratteliDiagram, src: &BTreeSet<VertexId>, v: VertexId) -> Result<Vec<Path>, DiagramError> {
    check_all(g, src, v)?;
    let reach = ancestors(g, v);
    let mut out = Vec::new();
    for &s in src.iter().filter(|s| reach.contains(s)) {
        let mut path = Path::vertex(s);
        walk(g, &mut path, &|u| reach.contains(&u), &|u| u == v, &mut out);
    }
    Ok(out)
}

/// Every path of `g` that ends at a sink, in canonical order. These form the
/// basis of the path-space representation.
pub fn sink_paths(g: &BratteliDiagram) -> Vec<Path> {
    let mut out = Vec::new();
    for s in g.vertices() {
        let mut path = Path::vertex(s);
        walk(g, &mut path, &|_| true, &|u| g.is_sink(u), &mut out);
    }
    out
}

/// `#(s⁻¹(v) ∩ r⁻¹(w))`.
pub fn multiplicity(g: &BratteliDiagram, v: VertexId, w: VertexId) -> Result<u64, DiagramError> {
    g.check_vertex(v)?;
    g.check_vertex(w)?;
    if w.level != v.level + 1 {
        return Err(DiagramError::NonAdjacentLevels(v, w));
    }
    Ok(g.entry(v.level, v.index, w.index))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::fixtures::*;
    use crate::kumjian::complete;

    fn v(l: usize, i: usize) -> VertexId {
        VertexId::new(l, i)
    }

    fn p(start: VertexId, steps: &[(usize, u64)]) -> Path {
        Path {
            start,
            steps: steps.iter().map(|&(dst, copy)| Step { dst, copy }).collect(),
        }
    }

    #[test]
    fn counts_on_example_b_completion() {
        let c = complete(&example_b()).unwrap();
        let n = count_paths_from_set(c.ke(), c.s_set(), v(3, 0)).unwrap();
        assert_eq!(n, BigUint::from(3u8));
    }

    #[test]
    fn singleton_source_counts_one() {
        let f = fibonacci();
        for u in f.vertices() {
            let n = count_paths_from_set(&f, &[u].into(), u).unwrap();
            assert_eq!(n, BigUint::from(1u8));
            assert_eq!(enumerate_paths(&f, &[u].into(), u).unwrap(), vec![Path::vertex(u)]);
        }
    }

    #[test]
    fn fibonacci_completion_realizes_labels() {
        let c = complete(&fibonacci()).unwrap();
        let n = count_paths_from_set(c.ke(), c.s_set(), v(4, 0)).unwrap();
        assert_eq!(n, BigUint::from(3u8));
    }

    #[test]
    fn enumeration_order_example_a() {
        let c = complete(&example_a()).unwrap();
        let paths = enumerate_paths(c.ke(), c.s_set(), v(3, 0)).unwrap();
        assert_eq!(
            paths,
            vec![p(v(1, 0), &[(0, 0), (0, 0)]), p(v(1, 0), &[(0, 0), (0, 1)])]
        );
    }

    #[test]
    fn enumeration_order_example_b() {
        let c = complete(&example_b()).unwrap();
        let paths = enumerate_paths(c.ke(), c.s_set(), v(3, 0)).unwrap();
        assert_eq!(
            paths,
            vec![
                p(v(1, 0), &[(0, 0), (0, 0)]),
                p(v(1, 0), &[(0, 0), (0, 1)]),
                p(v(2, 1), &[(0, 0)]),
            ]
        );
        assert!(paths.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn multiplicity_examples() {
        assert_eq!(multiplicity(&example_a(), v(1, 0), v(2, 0)).unwrap(), 2);
        assert_eq!(multiplicity(&fibonacci(), v(1, 1), v(2, 1)).unwrap(), 0);
        let c = complete(&example_b()).unwrap();
        assert_eq!(multiplicity(c.ke(), v(2, 1), v(3, 0)).unwrap(), 1);
        assert!(matches!(
            multiplicity(&fibonacci(), v(1, 0), v(3, 0)),
            Err(DiagramError::NonAdjacentLevels(..))
        ));
    }

    #[test]
    fn out_of_range_vertex_is_an_error() {
        let f = fibonacci();
        assert!(count_paths_from_set(&f, &BTreeSet::new(), v(2, 5)).is_err());
        assert!(enumerate_paths(&f, &[v(9, 0)].into(), v(1, 0)).is_err());
    }

    #[test]
    fn sink_paths_of_example_a_completion() {
        let c = complete(&example_a()).unwrap();
        let basis = sink_paths(c.ke());
        assert_eq!(basis.len(), 5);
        assert!(basis.windows(2).all(|w| w[0] < w[1]));
        assert!(basis.iter().all(|b| b.range() == v(3, 0) && b.is_valid_in(c.ke())));
    }

    #[test]
    fn path_surgery() {
        let c = complete(&example_b()).unwrap();
        let g = c.ke();
        let mu = p(v(1, 0), &[(0, 0)]);
        let e = g.out_edges(v(2, 0)).nth(1).unwrap();
        let longer = mu.then(e);
        assert_eq!(longer.range(), v(3, 0));
        assert_eq!(longer.edges().collect::<Vec<_>>()[1], e);
        let first = g.out_edges(v(1, 0)).next().unwrap();
        assert_eq!(Path::vertex(v(2, 0)).prepend(first), mu);
        assert_eq!(longer.to_string(), "1:0 -0-> 2:0 -1-> 3:0");
    }
}
