//! Labelled Bratteli diagrams stored as per-level label vectors and
//! level-to-level multiplicity matrices.
//!
//! Levels are numbered from 1. The matrix for level `n` has one row per
//! vertex of level `n` and one column per vertex of level `n + 1`; its entry
//! is the number of parallel edges between the two vertices. An individual
//! edge is addressed by an [`EdgeSlot`] carrying its copy number.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::DiagramError;

/// A vertex, addressed by its level (1-based) and its position within the level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VertexId {
    pub level: usize,
    pub index: usize,
}

impl VertexId {
    pub const fn new(level: usize, index: usize) -> Self {
        VertexId { level, index }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.level, self.index)
    }
}

/// Parses `level:index`, the form produced by `Display`.
impl FromStr for VertexId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (level, index) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| format!("expected `level:index`, found `{s}`"))?;
        let level = level.parse().map_err(|_| format!("bad level in `{s}`"))?;
        let index = index.parse().map_err(|_| format!("bad index in `{s}`"))?;
        if level == 0 {
            return Err(format!("levels start at 1, found `{s}`"));
        }
        Ok(VertexId { level, index })
    }
}

/// One of the parallel edges from `(level, src)` to `(level + 1, dst)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EdgeSlot {
    pub level: usize,
    pub src: usize,
    pub dst: usize,
    pub copy: u64,
}

impl EdgeSlot {
    pub fn source(&self) -> VertexId {
        VertexId::new(self.level, self.src)
    }

    pub fn range(&self) -> VertexId {
        VertexId::new(self.level + 1, self.dst)
    }
}

impl fmt::Display for EdgeSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}#{}", self.source(), self.range(), self.copy)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BratteliDiagram {
    labels: Vec<Vec<u64>>,
    adjacency: Vec<Vec<Vec<u64>>>,
    marks: BTreeSet<VertexId>,
}

impl BratteliDiagram {
    /// Assembles a diagram record without checking it; run
    /// [`BratteliDiagram::validate`] before relying on any invariant.
    pub fn from_parts(labels: Vec<Vec<u64>>, adjacency: Vec<Vec<Vec<u64>>>, marks: BTreeSet<VertexId>) -> Self {
        BratteliDiagram {
            labels,
            adjacency,
            marks,
        }
    }

    pub fn num_levels(&self) -> usize {
        self.labels.len()
    }

    pub fn level_size(&self, level: usize) -> usize {
        level
            .checked_sub(1)
            .and_then(|l| self.labels.get(l))
            .map_or(0, Vec::len)
    }

    pub fn labels(&self, level: usize) -> &[u64] {
        &self.labels[level - 1]
    }

    pub fn all_labels(&self) -> &[Vec<u64>] {
        &self.labels
    }

    /// Multiplicity matrix between `level` and `level + 1`.
    pub fn matrix(&self, level: usize) -> &[Vec<u64>] {
        &self.adjacency[level - 1]
    }

    pub fn matrices(&self) -> &[Vec<Vec<u64>>] {
        &self.adjacency
    }

    pub fn marks(&self) -> &BTreeSet<VertexId> {
        &self.marks
    }

    pub fn is_marked(&self, v: VertexId) -> bool {
        self.marks.contains(&v)
    }

    pub fn with_marks(mut self, marks: BTreeSet<VertexId>) -> Self {
        self.marks = marks;
        self
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v.index < self.level_size(v.level)
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<(), DiagramError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(DiagramError::VertexOutOfRange(v))
        }
    }

    pub fn label(&self, v: VertexId) -> u64 {
        self.labels[v.level - 1][v.index]
    }

    /// All vertices in canonical order: by level, then by index.
    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.labels
            .iter()
            .enumerate()
            .flat_map(|(l, row)| (0..row.len()).map(move |i| VertexId::new(l + 1, i)))
    }

    pub fn level_vertices(&self, level: usize) -> impl Iterator<Item = VertexId> {
        (0..self.level_size(level)).map(move |i| VertexId::new(level, i))
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.iter().map(Vec::len).sum()
    }

    /// Number of edges from `(level, src)` to `(level + 1, dst)`; zero when
    /// either endpoint or the matrix is missing.
    pub fn entry(&self, level: usize, src: usize, dst: usize) -> u64 {
        level
            .checked_sub(1)
            .and_then(|l| self.adjacency.get(l))
            .and_then(|m| m.get(src))
            .and_then(|row| row.get(dst))
            .copied()
            .unwrap_or(0)
    }

    pub fn emits(&self, v: VertexId) -> bool {
        self.entry_row(v).iter().any(|&m| m > 0)
    }

    pub fn is_sink(&self, v: VertexId) -> bool {
        !self.emits(v)
    }

    fn entry_row(&self, v: VertexId) -> &[u64] {
        self.adjacency
            .get(v.level - 1)
            .and_then(|m| m.get(v.index))
            .map_or(&[], Vec::as_slice)
    }

    /// Edges leaving `v`, ordered by target index and then copy number.
    pub fn out_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeSlot> + '_ {
        self.entry_row(v).iter().enumerate().flat_map(move |(dst, &m)| {
            (0..m).map(move |copy| EdgeSlot {
                level: v.level,
                src: v.index,
                dst,
                copy,
            })
        })
    }

    /// Edges entering `v`, ordered by source index and then copy number.
    pub fn in_edges(&self, v: VertexId) -> impl Iterator<Item = EdgeSlot> + '_ {
        let level = v.level - 1;
        let sources = if level >= 1 { self.level_size(level) } else { 0 };
        (0..sources).flat_map(move |src| {
            (0..self.entry(level, src, v.index)).map(move |copy| EdgeSlot {
                level,
                src,
                dst: v.index,
                copy,
            })
        })
    }

    /// Every edge of the diagram in canonical order.
    pub fn edges(&self) -> impl Iterator<Item = EdgeSlot> + '_ {
        self.vertices().flat_map(move |v| self.out_edges(v))
    }

    /// `Σ_{e ∈ r⁻¹(v)} d_{s(e)}`, the label mass arriving at `v`.
    pub fn incoming_weight(&self, v: VertexId) -> BigUint {
        if v.level < 2 {
            return BigUint::default();
        }
        let prev = v.level - 1;
        self.labels(prev)
            .iter()
            .enumerate()
            .map(|(i, &d)| BigUint::from(self.entry(prev, i, v.index)) * BigUint::from(d))
            .sum()
    }

    /// Checks every structural and labelling invariant, reporting all
    /// violations rather than stopping at the first.
    pub fn validate(&self, relax_emission: bool) -> ValidationReport {
        let mut report = ValidationReport::default();
        let n = self.num_levels();
        if n == 0 {
            report.error("diagram", "diagram must have at least one level");
            return report;
        }
        for (l, row) in self.labels.iter().enumerate() {
            if row.is_empty() {
                report.error(format!("level {}", l + 1), "level must contain at least one vertex");
            }
            for (i, &d) in row.iter().enumerate() {
                if d == 0 {
                    report.error(VertexId::new(l + 1, i).to_string(), "label must be positive");
                }
            }
        }

        let mut shapes_ok = true;
        if self.adjacency.len() != n - 1 {
            shapes_ok = false;
            report.error(
                "diagram",
                format!(
                    "expected {} matrices for {} levels, found {}",
                    n - 1,
                    n,
                    self.adjacency.len()
                ),
            );
        }
        for (l, m) in self.adjacency.iter().enumerate().take(n.saturating_sub(1)) {
            let rows = self.labels[l].len();
            let cols = self.labels[l + 1].len();
            if m.len() != rows {
                shapes_ok = false;
                report.error(
                    format!("matrix {}", l + 1),
                    format!("expected {} rows, found {}", rows, m.len()),
                );
            }
            for (i, row) in m.iter().enumerate() {
                if row.len() != cols {
                    shapes_ok = false;
                    report.error(
                        format!("matrix {} row {}", l + 1, i),
                        format!("expected {} columns, found {}", cols, row.len()),
                    );
                }
            }
        }

        for &v in &self.marks {
            if !self.contains(v) {
                report.error(v.to_string(), "marked vertex is out of range");
            }
        }

        if !shapes_ok {
            return report;
        }

        for v in self.vertices() {
            let incoming = self.incoming_weight(v);
            if BigUint::from(self.label(v)) < incoming {
                report.error(
                    v.to_string(),
                    format!("label {} is smaller than incoming weight {}", self.label(v), incoming),
                );
            }
            if v.level < n && !self.emits(v) {
                let msg = "vertex below the last level emits no edges";
                if relax_emission {
                    report.warning(v.to_string(), msg);
                } else {
                    report.error(v.to_string(), msg);
                }
            }
        }
        report
    }

    /// Matrix count and dimensions agree with the level sizes.
    pub fn shapes_consistent(&self) -> bool {
        self.adjacency.len() + 1 == self.labels.len()
            && self.adjacency.iter().enumerate().all(|(l, m)| {
                m.len() == self.labels[l].len() && m.iter().all(|row| row.len() == self.labels[l + 1].len())
            })
    }

    pub fn ensure_valid(&self, relax_emission: bool) -> Result<(), DiagramError> {
        let report = self.validate(relax_emission);
        if report.ok {
            Ok(())
        } else {
            Err(DiagramError::Invalid(report))
        }
    }

    /// Deficiencies `σ_v = d_v − Σ_{e ∈ r⁻¹(v)} d_{s(e)}`.
    pub fn sigma(&self) -> Result<SigmaVector, DiagramError> {
        self.ensure_valid(true)?;
        let values = self
            .labels
            .iter()
            .enumerate()
            .map(|(l, row)| {
                row.iter()
                    .enumerate()
                    .map(|(i, &d)| {
                        let incoming = self.incoming_weight(VertexId::new(l + 1, i));
                        // incoming ≤ d ≤ u64::MAX after validation
                        d - u64::try_from(incoming).expect("bounded by label")
                    })
                    .collect()
            })
            .collect();
        Ok(SigmaVector { values })
    }

    /// The first `levels` levels, keeping marks that survive.
    pub fn truncate(&self, levels: usize) -> Result<BratteliDiagram, DiagramError> {
        if levels == 0 || levels > self.num_levels() {
            return Err(DiagramError::LevelCap {
                cap: levels,
                available: self.num_levels(),
            });
        }
        Ok(BratteliDiagram {
            labels: self.labels[..levels].to_vec(),
            adjacency: self.adjacency[..levels - 1].to_vec(),
            marks: self.marks.iter().copied().filter(|v| v.level <= levels).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SigmaVector {
    values: Vec<Vec<u64>>,
}

impl SigmaVector {
    pub fn get(&self, v: VertexId) -> u64 {
        self.values[v.level - 1][v.index]
    }

    pub fn level(&self, level: usize) -> &[u64] {
        &self.values[level - 1]
    }

    pub fn num_levels(&self) -> usize {
        self.values.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexId, u64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .flat_map(|(l, row)| row.iter().enumerate().map(move |(i, &s)| (VertexId::new(l + 1, i), s)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub location: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag} at {}: {}", self.location, self.message)
    }
}

/// Outcome of a check: `ok` holds exactly when no finding is an error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub ok: bool,
    pub findings: Vec<Finding>,
}

impl Default for ValidationReport {
    fn default() -> Self {
        ValidationReport {
            ok: true,
            findings: Vec::new(),
        }
    }
}

impl ValidationReport {
    pub fn error(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.ok = false;
        self.findings.push(Finding {
            severity: Severity::Error,
            location: location.into(),
            message: message.into(),
        });
    }

    pub fn warning(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.findings.push(Finding {
            severity: Severity::Warning,
            location: location.into(),
            message: message.into(),
        });
    }

    pub fn merge(&mut self, other: ValidationReport) {
        self.ok &= other.ok;
        self.findings.extend(other.findings);
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn first_error(&self) -> Option<&str> {
        self.errors().next().map(|f| f.message.as_str())
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn example_a() -> BratteliDiagram {
        BratteliDiagram::from_parts(vec![vec![1], vec![2]], vec![vec![vec![2]]], BTreeSet::new())
    }

    pub fn example_b() -> BratteliDiagram {
        BratteliDiagram::from_parts(vec![vec![1], vec![3]], vec![vec![vec![2]]], BTreeSet::new())
    }

    pub fn fibonacci() -> BratteliDiagram {
        let m = vec![vec![1, 1], vec![1, 0]];
        BratteliDiagram::from_parts(
            vec![vec![1, 1], vec![2, 1], vec![3, 2]],
            vec![m.clone(), m],
            BTreeSet::new(),
        )
    }
}
