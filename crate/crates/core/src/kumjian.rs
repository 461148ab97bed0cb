//! The completion `E ↦ KE`.
//!
//! Every level `n` of `E` (1-based) is stored at level `n + 1` of `KE`; the new
//! stored level 1 holds the single added vertex `w_0`. An added vertex `w_n`
//! is appended as the last vertex of stored level `n + 1`, carries label 1,
//! and emits `σ_v` parallel edges to every `v` on the following level. Since
//! appended vertices come last, an original vertex keeps its index.

use std::collections::BTreeSet;

use num_bigint::BigUint;

use crate::diagram::{BratteliDiagram, SigmaVector, ValidationReport, VertexId};
use crate::error::DiagramError;

/// Stored level of a `KE` vertex minus its level in `E`.
pub const LEVEL_SHIFT: usize = 1;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KumjianCompletion {
    ke: BratteliDiagram,
    original: BratteliDiagram,
    sigma: SigmaVector,
}

/// Completes `e`, which must be a valid unmarked diagram under the strict
/// emission policy.
pub fn complete(e: &BratteliDiagram) -> Result<KumjianCompletion, DiagramError> {
    e.ensure_valid(false)?;
    if !e.marks().is_empty() {
        return Err(DiagramError::NotACompletion(
            "input diagram already carries marks".into(),
        ));
    }
    let sigma = e.sigma()?;
    let n = e.num_levels();

    // w_n exists for n = 0 always and for 1 ≤ n < N when V_{n+1} is deficient.
    let has_w: Vec<bool> = (0..n)
        .map(|k| k == 0 || sigma.level(k + 1).iter().any(|&s| s > 0))
        .collect();

    let mut labels = Vec::with_capacity(n + 1);
    labels.push(vec![1]);
    for level in 1..=n {
        let mut row = e.labels(level).to_vec();
        if has_w.get(level).copied().unwrap_or(false) {
            row.push(1);
        }
        labels.push(row);
    }

    let mut adjacency = Vec::with_capacity(n);
    // w_0 → V_1
    let first_cols = labels[1].len();
    let mut w0_row = sigma.level(1).to_vec();
    w0_row.resize(first_cols, 0);
    adjacency.push(vec![w0_row]);
    for level in 1..n {
        let cols = labels[level + 1].len();
        let mut m: Vec<Vec<u64>> = e
            .matrix(level)
            .iter()
            .map(|row| {
                let mut r = row.clone();
                r.resize(cols, 0);
                r
            })
            .collect();
        if has_w[level] {
            let mut w_row = sigma.level(level + 1).to_vec();
            w_row.resize(cols, 0);
            m.push(w_row);
        }
        adjacency.push(m);
    }

    let marks: BTreeSet<VertexId> = (0..n)
        .filter(|&k| has_w[k])
        .map(|k| VertexId::new(k + LEVEL_SHIFT, labels[k].len() - 1))
        .collect();

    Ok(KumjianCompletion {
        ke: BratteliDiagram::from_parts(labels, adjacency, marks),
        original: e.clone(),
        sigma,
    })
}

/// True when every vertex outside the first level has zero deficiency, in
/// which case the completion adds exactly one vertex.
pub fn is_unital_case(e: &BratteliDiagram) -> Result<bool, DiagramError> {
    e.ensure_valid(false)?;
    let sigma = e.sigma()?;
    let unital = sigma.iter().all(|(v, s)| v.level == 1 || s == 0);
    Ok(unital)
}

impl KumjianCompletion {
    /// Rebuilds a completion from a marked diagram, such as a parsed `BD1`
    /// file. Only the level layout is checked here; the content invariants are
    /// reported by [`KumjianCompletion::check_invariants`].
    pub fn from_marked(ke: BratteliDiagram) -> Result<Self, DiagramError> {
        if !ke.shapes_consistent() || ke.marks().iter().any(|&m| !ke.contains(m)) {
            return Err(DiagramError::Invalid(ke.validate(true)));
        }
        if ke.marks().is_empty() {
            return Err(DiagramError::NotACompletion("diagram has no marked vertices".into()));
        }
        if ke.num_levels() < 2 {
            return Err(DiagramError::NotACompletion(
                "a completion has at least two stored levels".into(),
            ));
        }
        if ke.level_size(1) != 1 || !ke.is_marked(VertexId::new(1, 0)) {
            return Err(DiagramError::NotACompletion(
                "stored level 1 must consist of the single marked vertex w_0".into(),
            ));
        }
        for level in 2..=ke.num_levels() {
            let size = ke.level_size(level);
            let marked: Vec<_> = ke.level_vertices(level).filter(|&v| ke.is_marked(v)).collect();
            match marked.as_slice() {
                [] => {}
                [w] if w.index + 1 == size && size >= 2 => {}
                _ => {
                    return Err(DiagramError::NotACompletion(format!(
                        "stored level {level} must have at most one marked vertex, placed last after an original vertex"
                    )))
                }
            }
        }

        let keep = |level: usize| -> Vec<usize> {
            ke.level_vertices(level)
                .filter(|&v| !ke.is_marked(v))
                .map(|v| v.index)
                .collect()
        };
        let mut labels = Vec::new();
        let mut adjacency = Vec::new();
        for level in 2..=ke.num_levels() {
            let rows = keep(level);
            labels.push(rows.iter().map(|&i| ke.labels(level)[i]).collect());
            if level < ke.num_levels() {
                let cols = keep(level + 1);
                adjacency.push(
                    rows.iter()
                        .map(|&i| cols.iter().map(|&j| ke.entry(level, i, j)).collect())
                        .collect(),
                );
            }
        }
        let original = BratteliDiagram::from_parts(labels, adjacency, BTreeSet::new());
        let sigma = original.sigma()?;
        Ok(KumjianCompletion { ke, original, sigma })
    }

    pub fn ke(&self) -> &BratteliDiagram {
        &self.ke
    }

    pub fn original(&self) -> &BratteliDiagram {
        &self.original
    }

    pub fn sigma(&self) -> &SigmaVector {
        &self.sigma
    }

    pub fn s_set(&self) -> &BTreeSet<VertexId> {
        self.ke.marks()
    }

    pub fn level_shift(&self) -> usize {
        LEVEL_SHIFT
    }

    pub fn into_ke(self) -> BratteliDiagram {
        self.ke
    }

    /// The added vertex at level `n` of `E`'s numbering (`w_0` sits before `V_1`).
    pub fn w(&self, n: usize) -> Option<VertexId> {
        let level = n + LEVEL_SHIFT;
        let size = self.ke.level_size(level);
        (size > 0)
            .then(|| VertexId::new(level, size - 1))
            .filter(|&v| self.ke.is_marked(v))
    }

    /// Maps a `KE` vertex to the `E` vertex it copies, if any.
    pub fn to_original(&self, v: VertexId) -> Option<VertexId> {
        (!self.ke.is_marked(v) && self.ke.contains(v) && v.level > LEVEL_SHIFT)
            .then(|| VertexId::new(v.level - LEVEL_SHIFT, v.index))
    }

    pub fn from_original(&self, v: VertexId) -> VertexId {
        VertexId::new(v.level + LEVEL_SHIFT, v.index)
    }

    /// Human-readable name using `E`'s level numbering: `w_n` for added
    /// vertices, `n:i` for original ones.
    pub fn vertex_name(&self, v: VertexId) -> String {
        if self.ke.is_marked(v) {
            format!("w_{}", v.level - LEVEL_SHIFT)
        } else {
            match self.to_original(v) {
                Some(o) => o.to_string(),
                None => v.to_string(),
            }
        }
    }

    /// Marked vertices on the final stored level. They only arise from
    /// truncating a longer completion and have no following level to feed.
    pub fn dangling(&self) -> Vec<VertexId> {
        let last = self.ke.num_levels();
        self.s_set().iter().copied().filter(|v| v.level == last).collect()
    }

    /// Keeps levels `0..=n` in `E`'s numbering, i.e. stored levels `1..=n+1`.
    pub fn truncate(&self, n: usize) -> Result<KumjianCompletion, DiagramError> {
        if n == 0 || n > self.original.num_levels() {
            return Err(DiagramError::LevelCap {
                cap: n,
                available: self.original.num_levels(),
            });
        }
        Ok(KumjianCompletion {
            ke: self.ke.truncate(n + LEVEL_SHIFT)?,
            original: self.original.truncate(n)?,
            sigma: self.original.truncate(n)?.sigma()?,
        })
    }

    /// Restriction of `KE` to its unmarked vertices; equals `E` exactly.
    pub fn restrict_to_original(&self) -> BratteliDiagram {
        KumjianCompletion::from_marked(self.ke.clone())
            .map(|c| c.original)
            .unwrap_or_else(|_| self.original.clone())
    }

    /// Checks the content invariants of the construction.
    pub fn check_invariants(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        let ke = &self.ke;
        let n = self.original.num_levels();

        for &w in self.s_set() {
            let name = self.vertex_name(w);
            if ke.label(w) != 1 {
                report.error(&name, format!("added vertex has label {} instead of 1", ke.label(w)));
            }
            if ke.in_edges(w).next().is_some() {
                report.error(&name, "added vertex receives edges");
            }
        }
        if self.w(0).is_none() {
            report.error("w_0", "w_0 is missing");
        }
        for k in 1..=n {
            let deficient = self.sigma.level(k).iter().any(|&s| s > 0);
            let exists = self.w(k - 1).is_some();
            if k == 1 {
                continue;
            }
            if deficient != exists {
                report.error(
                    format!("w_{}", k - 1),
                    if deficient {
                        format!("level {k} is deficient but w_{} is missing", k - 1)
                    } else {
                        format!("w_{} exists but level {k} has no deficiency", k - 1)
                    },
                );
            }
        }
        for w in self.dangling() {
            report.warning(
                self.vertex_name(w),
                "added vertex on the final level has no following level (truncation)",
            );
        }

        for k in 1..=n {
            let Some(w) = self.w(k - 1) else { continue };
            for (j, &s) in self.sigma.level(k).iter().enumerate() {
                let target = VertexId::new(k + LEVEL_SHIFT, j);
                let got = ke.entry(w.level, w.index, j);
                if got != s {
                    report.error(
                        format!("{} -> {}", self.vertex_name(w), self.vertex_name(target)),
                        format!("expected {s} added edges (sigma), found {got}"),
                    );
                }
            }
        }

        for v in ke.vertices().filter(|&v| !ke.is_marked(v)) {
            for e in ke.out_edges(v) {
                if ke.is_marked(e.range()) {
                    report.error(self.vertex_name(v), "original vertex emits into an added vertex");
                    break;
                }
            }
            let incoming = ke.incoming_weight(v);
            if incoming != BigUint::from(ke.label(v)) {
                report.error(
                    self.vertex_name(v),
                    format!("label {} differs from incoming weight {} in KE", ke.label(v), incoming),
                );
            }
        }
        report
    }
}
