//! The path-space Cuntz-Krieger family of a finite leveled graph.
//!
//! The basis is every path ending at a sink, in canonical order. The
//! projection `p_v` is diagonal with a 1 at each basis path starting at `v`,
//! and `s_e` sends a basis path `α` with `s(α) = r(e)` to `eα`. All generators
//! are 0/1 matrices and every identity below is checked by exact integer
//! matrix equality.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_bigint::BigUint;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::diagram::{BratteliDiagram, EdgeSlot, ValidationReport, VertexId};
use crate::error::DiagramError;
use crate::linalg::{RowEchelon, SparseMatrix};
use crate::paths::{enumerate_paths, path_counts_from_set, sink_paths, Path};

/// How many pairs an exhaustive identity check may visit before it falls
/// back to a seeded sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairBudget {
    pub limit: usize,
    pub seed: u64,
}

impl Default for PairBudget {
    fn default() -> Self {
        PairBudget { limit: 10_000, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub indices: Vec<usize>,
    pub total: usize,
    pub sampled: bool,
}

impl PairBudget {
    pub fn unlimited() -> Self {
        PairBudget {
            limit: usize::MAX,
            seed: 0,
        }
    }

    pub fn with_seed(limit: usize, seed: u64) -> Self {
        PairBudget { limit, seed }
    }

    /// Picks which of `total` items to check. `salt` separates the samples
    /// drawn by different checks under one seed.
    pub fn select(&self, total: usize, salt: u64) -> Selection {
        if total <= self.limit {
            return Selection {
                indices: (0..total).collect(),
                total,
                sampled: false,
            };
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut indices = index::sample(&mut rng, total, self.limit).into_vec();
        indices.sort_unstable();
        Selection {
            indices,
            total,
            sampled: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PathSpaceRep {
    graph: BratteliDiagram,
    basis: Vec<Path>,
    index: HashMap<Path, usize>,
    vertex_projections: BTreeMap<VertexId, SparseMatrix>,
    edge_isometries: BTreeMap<EdgeSlot, SparseMatrix>,
}

/// Dimension of the path-space representation: the number of sink-ending
/// paths, computed without enumerating them.
pub fn rep_dimension(g: &BratteliDiagram) -> BigUint {
    let all: BTreeSet<VertexId> = g.vertices().collect();
    let counts = path_counts_from_set(g, &all);
    g.vertices()
        .filter(|&v| g.is_sink(v))
        .map(|v| counts[v.level - 1][v.index].clone())
        .sum()
}

pub fn build_rep(g: &BratteliDiagram) -> Result<PathSpaceRep, DiagramError> {
    g.ensure_valid(true)?;
    let basis = sink_paths(g);
    let n = basis.len();
    let index: HashMap<Path, usize> = basis.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();

    let mut starting_at: BTreeMap<VertexId, Vec<usize>> = BTreeMap::new();
    for (i, p) in basis.iter().enumerate() {
        starting_at.entry(p.source()).or_default().push(i);
    }
    let vertex_projections = g
        .vertices()
        .map(|v| {
            let diag = starting_at.get(&v).map_or(&[][..], Vec::as_slice);
            (v, SparseMatrix::from_triplets(n, diag.iter().map(|&i| (i, i, 1))))
        })
        .collect();
    let edge_isometries = g
        .edges()
        .map(|e| {
            let sources = starting_at.get(&e.range()).map_or(&[][..], Vec::as_slice);
            let entries = sources.iter().map(|&j| {
                let extended = basis[j].prepend(e);
                (index[&extended], j, 1)
            });
            (e, SparseMatrix::from_triplets(n, entries))
        })
        .collect();

    Ok(PathSpaceRep {
        graph: g.clone(),
        basis,
        index,
        vertex_projections,
        edge_isometries,
    })
}

impl PathSpaceRep {
    pub fn graph(&self) -> &BratteliDiagram {
        &self.graph
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Path] {
        &self.basis
    }

    pub fn basis_index(&self, p: &Path) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn s_index(&self) -> &BTreeSet<VertexId> {
        self.graph.marks()
    }

    pub fn projection(&self, v: VertexId) -> &SparseMatrix {
        &self.vertex_projections[&v]
    }

    pub fn isometry(&self, e: EdgeSlot) -> &SparseMatrix {
        &self.edge_isometries[&e]
    }

    pub fn vertex_projections(&self) -> &BTreeMap<VertexId, SparseMatrix> {
        &self.vertex_projections
    }

    pub fn edge_isometries(&self) -> &BTreeMap<EdgeSlot, SparseMatrix> {
        &self.edge_isometries
    }

    /// Replaces one generator, for fault-injection tests.
    pub fn with_edge_isometry(mut self, e: EdgeSlot, m: SparseMatrix) -> Self {
        self.edge_isometries.insert(e, m);
        self
    }

    /// `p = Σ_{w ∈ S} p_w`, a finite sum in the truncation.
    pub fn corner_projection(&self) -> SparseMatrix {
        self.s_index()
            .iter()
            .fold(SparseMatrix::zero(self.dim()), |acc, &w| &acc + self.projection(w))
    }

    /// `s_μ = s_{μ_1} ⋯ s_{μ_n}`, or `p_v` for the length-zero path at `v`.
    pub fn path_operator(&self, mu: &Path) -> SparseMatrix {
        let mut edges = mu.edges();
        match edges.next() {
            None => self.projection(mu.source()).clone(),
            Some(first) => edges.fold(self.isometry(first).clone(), |acc, e| &acc * self.isometry(e)),
        }
    }

    /// `s_μ s_ν*`; the paths must share their range.
    pub fn matrix_unit(&self, mu: &Path, nu: &Path) -> Result<SparseMatrix, DiagramError> {
        if mu.range() != nu.range() {
            return Err(DiagramError::RangeMismatch(mu.range(), nu.range()));
        }
        Ok(&self.path_operator(mu) * &self.path_operator(nu).transpose())
    }
}

/// Checks both Cuntz-Krieger relations and that the `p_v` are mutually
/// orthogonal projections summing to the identity.
pub fn verify_ck(rep: &PathSpaceRep) -> ValidationReport {
    let mut report = ValidationReport::default();
    let g = rep.graph();
    let n = rep.dim();

    let mut total = SparseMatrix::zero(n);
    let projections: Vec<(VertexId, &SparseMatrix)> = rep.vertex_projections().iter().map(|(v, p)| (*v, p)).collect();
    for (k, &(v, p)) in projections.iter().enumerate() {
        if !(p.is_diagonal() && p.is_partial_permutation()) {
            report.error(format!("p_{v}"), "projection is not a diagonal 0/1 matrix");
        }
        if &(p * p) != p || &p.transpose() != p {
            report.error(format!("p_{v}"), "not a self-adjoint idempotent");
        }
        for &(w, q) in &projections[k + 1..] {
            if !(p * q).is_zero() {
                report.error(format!("p_{v} p_{w}"), "projections are not orthogonal");
            }
        }
        total = &total + p;
    }
    if total != SparseMatrix::identity(n) {
        report.error("projections", "projections do not sum to the identity");
    }

    for (&e, s) in rep.edge_isometries() {
        if !s.is_partial_permutation() {
            report.error(format!("s_{e}"), "edge operator is not a 0/1 partial permutation");
        }
        if &(&s.transpose() * s) != rep.projection(e.range()) {
            report.error(format!("s_{e} at range {}", e.range()), "s_e* s_e differs from p_r(e)");
        }
    }

    for v in g.vertices().filter(|&v| g.emits(v)) {
        let sum = g.out_edges(v).fold(SparseMatrix::zero(n), |acc, e| {
            let s = rep.isometry(e);
            &acc + &(s * &s.transpose())
        });
        if &sum != rep.projection(v) {
            report.error(format!("p_{v}"), "p_v differs from the sum of s_e s_e* over s⁻¹(v)");
        }
    }
    report
}

/// The matrix units `s_μ s_ν*` for `μ, ν` running over the paths from the
/// marked set to one vertex.
#[derive(Debug, Clone)]
pub struct UnitFamily {
    pub vertex: VertexId,
    pub paths: Vec<Path>,
    operators: Vec<SparseMatrix>,
    units: Vec<SparseMatrix>,
    /// The units as `(row, col)` lists, when every unit is a partial
    /// permutation; products are then compositions.
    perms: Option<Vec<Vec<(usize, usize)>>>,
}

/// Product of two partial permutations given as row-sorted `(row, col)` lists.
fn compose(a: &[(usize, usize)], b: &[(usize, usize)]) -> Vec<(usize, usize)> {
    a.iter()
        .filter_map(|&(r, c)| b.binary_search_by_key(&c, |&(row, _)| row).ok().map(|k| (r, b[k].1)))
        .collect()
}

impl UnitFamily {
    pub fn new(rep: &PathSpaceRep, v: VertexId) -> Result<Self, DiagramError> {
        let paths = enumerate_paths(rep.graph(), rep.s_index(), v)?;
        let operators: Vec<SparseMatrix> = paths.iter().map(|p| rep.path_operator(p)).collect();
        let adjoints: Vec<SparseMatrix> = operators.iter().map(SparseMatrix::transpose).collect();
        let units = operators
            .iter()
            .flat_map(|a| adjoints.iter().map(move |b| a * b))
            .collect::<Vec<SparseMatrix>>();
        let perms = units.iter().all(SparseMatrix::is_partial_permutation).then(|| {
            units
                .iter()
                .map(|u| u.entries().map(|(i, j, _)| (i, j)).collect())
                .collect()
        });
        Ok(UnitFamily {
            vertex: v,
            paths,
            operators,
            units,
            perms,
        })
    }

    pub fn size(&self) -> usize {
        self.paths.len()
    }

    /// `s_{μ_i} s_{μ_j}*`.
    pub fn unit(&self, i: usize, j: usize) -> &SparseMatrix {
        &self.units[i * self.size() + j]
    }

    pub fn units(&self) -> &[SparseMatrix] {
        &self.units
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MatrixUnitCheck {
    pub vertex: VertexId,
    pub paths: usize,
    pub label: u64,
    pub rank: usize,
    pub pairs_checked: usize,
    pub pairs_total: usize,
    pub sampled: bool,
    pub report: ValidationReport,
}

fn check_unit_family(
    rep: &PathSpaceRep,
    fam: &UnitFamily,
    same_level: &[&UnitFamily],
    budget: &PairBudget,
) -> MatrixUnitCheck {
    let mut report = ValidationReport::default();
    let v = fam.vertex;
    let d = fam.size();
    let label = rep.graph().label(v);
    if rep.s_index().is_empty() {
        report.error(v.to_string(), "no marked vertices, so the family is empty");
    }
    if d as u64 != label {
        report.error(v.to_string(), format!("{d} paths from S but label is {label}"));
    }

    for i in 0..d {
        for j in 0..d {
            let u = fam.unit(i, j);
            if u.is_zero() || !u.is_partial_permutation() {
                report.error(
                    format!("{v} unit ({i},{j})"),
                    "matrix unit is not a nonzero 0/1 partial permutation",
                );
            }
            if &u.transpose() != fam.unit(j, i) {
                report.error(format!("{v} unit ({i},{j})"), "adjoint is not the transposed unit");
            }
        }
    }

    let quads = d.pow(4);
    let selection = budget.select(quads, 1 + v.level as u64 * 1000 + v.index as u64);
    for &t in &selection.indices {
        let (i, j, k, l) = (t / d.pow(3), (t / (d * d)) % d, (t / d) % d, t % d);
        let ok = match &fam.perms {
            Some(p) => {
                let product = compose(&p[i * d + j], &p[k * d + l]);
                if j == k {
                    product == p[i * d + l]
                } else {
                    product.is_empty()
                }
            }
            None => {
                let product = fam.unit(i, j) * fam.unit(k, l);
                if j == k {
                    &product == fam.unit(i, l)
                } else {
                    product.is_zero()
                }
            }
        };
        if !ok {
            report.error(format!("{v} units ({i},{j})·({k},{l})"), "product rule fails");
        }
    }
    let mut pairs_checked = selection.indices.len();
    let mut pairs_total = selection.total;
    let mut sampled = selection.sampled;

    let mut echelon = RowEchelon::new();
    for u in fam.units() {
        echelon.insert(&u.flatten());
    }
    let rank = echelon.rank();
    if rank != d * d {
        report.error(
            v.to_string(),
            format!("matrix units span dimension {rank}, expected {}", d * d),
        );
    }

    for other in same_level.iter().filter(|o| o.vertex != v) {
        let m = other.size();
        let pairs = d * d * m * m;
        let selection = budget.select(
            pairs,
            2 + v.level as u64 * 1000 + v.index as u64 * 31 + other.vertex.index as u64,
        );
        for &t in &selection.indices {
            let (a, b) = (t / (m * m), t % (m * m));
            let vanishes = match (&fam.perms, &other.perms) {
                (Some(p), Some(q)) => compose(&p[a], &q[b]).is_empty(),
                _ => (&fam.units()[a] * &other.units()[b]).is_zero(),
            };
            if !vanishes {
                report.error(
                    format!("{v} · {}", other.vertex),
                    "families at distinct vertices of one level do not annihilate",
                );
                break;
            }
        }
        pairs_checked += selection.indices.len();
        pairs_total += selection.total;
        sampled |= selection.sampled;
    }

    MatrixUnitCheck {
        vertex: v,
        paths: d,
        label,
        rank,
        pairs_checked,
        pairs_total,
        sampled,
        report,
    }
}

/// Checks that the marked-source units at `v` form a system of `d_v × d_v`
/// matrix units spanning `M_{d_v}`, annihilated by the families at the other
/// vertices of the same level.
pub fn verify_matrix_units(
    rep: &PathSpaceRep,
    v: VertexId,
    budget: &PairBudget,
) -> Result<MatrixUnitCheck, DiagramError> {
    rep.graph().check_vertex(v)?;
    let families = rep
        .graph()
        .level_vertices(v.level)
        .map(|u| UnitFamily::new(rep, u))
        .collect::<Result<Vec<_>, _>>()?;
    let refs: Vec<&UnitFamily> = families.iter().collect();
    Ok(check_unit_family(rep, &families[v.index], &refs, budget))
}

/// [`verify_matrix_units`] at every vertex, building each family once.
pub fn verify_all_matrix_units(rep: &PathSpaceRep, budget: &PairBudget) -> Vec<MatrixUnitCheck> {
    let g = rep.graph();
    let mut out = Vec::with_capacity(g.num_vertices());
    for level in 1..=g.num_levels() {
        let families: Vec<UnitFamily> = g
            .level_vertices(level)
            .map(|u| UnitFamily::new(rep, u).expect("vertex in range"))
            .collect();
        let refs: Vec<&UnitFamily> = families.iter().collect();
        out.extend(families.iter().map(|f| check_unit_family(rep, f, &refs, budget)));
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetCount {
    pub target: VertexId,
    pub multiplicity: u64,
    pub observed: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EmbeddingCheck {
    pub vertex: VertexId,
    pub targets: Vec<TargetCount>,
    pub pairs_checked: usize,
    pub pairs_total: usize,
    pub sampled: bool,
    pub report: ValidationReport,
}

fn check_embedding(rep: &PathSpaceRep, fam: &UnitFamily, next: &[UnitFamily], budget: &PairBudget) -> EmbeddingCheck {
    let g = rep.graph();
    let v = fam.vertex;
    let mut report = ValidationReport::default();
    let mut lookup: HashMap<&SparseMatrix, (VertexId, usize, usize)> = HashMap::new();
    for f in next {
        for i in 0..f.size() {
            for j in 0..f.size() {
                lookup.insert(f.unit(i, j), (f.vertex, i, j));
            }
        }
    }

    let mut observed: BTreeMap<VertexId, u64> = next.iter().map(|f| (f.vertex, 0)).collect();
    let d = fam.size();
    let selection = budget.select(d * d, 3 + v.level as u64 * 1000 + v.index as u64);
    if g.is_sink(v) {
        report.error(v.to_string(), "sink vertices have no embedding to check");
    }
    let edges: Vec<EdgeSlot> = g.out_edges(v).collect();
    let edge_ops: Vec<(&SparseMatrix, SparseMatrix)> = edges
        .iter()
        .map(|&e| {
            let s = rep.isometry(e);
            (s, s.transpose())
        })
        .collect();
    let p_v = rep.projection(v);

    for (n_pair, &t) in selection.indices.iter().enumerate() {
        let (i, j) = (t / d, t % d);
        let unit = fam.unit(i, j);
        let nu_adj = fam.operators[j].transpose();
        let through_p = &(&fam.operators[i] * p_v) * &nu_adj;
        if &through_p != unit {
            report.error(format!("{v} unit ({i},{j})"), "s_μ p_v s_ν* differs from s_μ s_ν*");
        }

        let mut counts: BTreeMap<VertexId, u64> = BTreeMap::new();
        let mut sum = SparseMatrix::zero(rep.dim());
        for (&e, (s, s_adj)) in edges.iter().zip(&edge_ops) {
            let summand = &(&(&fam.operators[i] * s) * s_adj) * &nu_adj;
            match lookup.get(&summand) {
                Some(&(w, a, b)) => {
                    let targets = &next[w.index].paths;
                    if targets[a] != fam.paths[i].then(e) || targets[b] != fam.paths[j].then(e) {
                        report.error(
                            format!("{v} unit ({i},{j}) via {e}"),
                            "summand matches the wrong unit of the next level",
                        );
                    }
                    *counts.entry(w).or_default() += 1;
                }
                None => report.error(
                    format!("{v} unit ({i},{j}) via {e}"),
                    "summand is not a matrix unit of the next level",
                ),
            }
            sum = &sum + &summand;
        }
        if &sum != unit {
            report.error(
                format!("{v} unit ({i},{j})"),
                "unit differs from the sum of its one-edge extensions",
            );
        }
        for f in next {
            let got = counts.get(&f.vertex).copied().unwrap_or(0);
            let want = g.entry(v.level, v.index, f.vertex.index);
            if got != want {
                report.error(
                    format!("{v} -> {}", f.vertex),
                    format!("unit lands {got} times in the target family, multiplicity is {want}"),
                );
            }
            if n_pair == 0 {
                observed.insert(f.vertex, got);
            }
        }
    }

    let targets = next
        .iter()
        .map(|f| TargetCount {
            target: f.vertex,
            multiplicity: g.entry(v.level, v.index, f.vertex.index),
            observed: observed[&f.vertex],
        })
        .collect();
    EmbeddingCheck {
        vertex: v,
        targets,
        pairs_checked: selection.indices.len(),
        pairs_total: selection.total,
        sampled: selection.sampled,
        report,
    }
}

/// Decomposes every unit `s_μ s_ν*` at `v` into `Σ_{e ∈ s⁻¹(v)} s_{μe} s_{νe}*`
/// and counts how many summands land in each next-level family.
pub fn verify_embedding(rep: &PathSpaceRep, v: VertexId, budget: &PairBudget) -> Result<EmbeddingCheck, DiagramError> {
    let g = rep.graph();
    g.check_vertex(v)?;
    let fam = UnitFamily::new(rep, v)?;
    let next = g
        .level_vertices(v.level + 1)
        .map(|w| UnitFamily::new(rep, w))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(check_embedding(rep, &fam, &next, budget))
}

/// [`verify_embedding`] at every vertex that emits an edge.
pub fn verify_all_embeddings(rep: &PathSpaceRep, budget: &PairBudget) -> Vec<EmbeddingCheck> {
    let g = rep.graph();
    let families: Vec<Vec<UnitFamily>> = (1..=g.num_levels())
        .map(|level| {
            g.level_vertices(level)
                .map(|u| UnitFamily::new(rep, u).expect("vertex in range"))
                .collect()
        })
        .collect();
    g.vertices()
        .filter(|&v| g.emits(v))
        .map(|v| check_embedding(rep, &families[v.level - 1][v.index], &families[v.level], budget))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SinkBreakdown {
    pub sink: VertexId,
    /// All paths ending at the sink.
    pub paths: u64,
    /// Paths starting in the marked set.
    pub from_marked: u64,
    /// Paths starting outside the marked set.
    pub from_unmarked: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CornerRanks {
    pub full: usize,
    pub p_corner: usize,
    pub complement_corner: usize,
    pub off_corner: usize,
}

/// Dimensions of the algebra and of its corners cut by `p` and `1 − p`.
/// The off-diagonal dimension counts one of the two off corners.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CornerReport {
    pub dim_full: u64,
    pub dim_p_corner: u64,
    pub dim_complement_corner: u64,
    pub dim_off_corner: u64,
    pub sinks: Vec<SinkBreakdown>,
    pub ranks: Option<CornerRanks>,
    pub case_formula_checked: usize,
    pub identities_ok: bool,
    pub failures: Vec<String>,
    pub notes: Vec<String>,
}

impl CornerReport {
    pub fn dims(&self) -> (u64, u64, u64, u64) {
        (
            self.dim_full,
            self.dim_p_corner,
            self.dim_complement_corner,
            self.dim_off_corner,
        )
    }

    fn fail(&mut self, msg: impl Into<String>) {
        self.identities_ok = false;
        self.failures.push(msg.into());
    }
}

fn checked_square_sum(mut values: impl Iterator<Item = (u64, u64)>) -> Option<u64> {
    values.try_fold(0u64, |acc, (a, b)| acc.checked_add(a.checked_mul(b)?))
}

/// Combinatorial corner dimensions from path counts alone.
pub fn corner_ledger(g: &BratteliDiagram) -> CornerReport {
    let all: BTreeSet<VertexId> = g.vertices().collect();
    let marked = g.marks().clone();
    let unmarked: BTreeSet<VertexId> = all.difference(&marked).copied().collect();
    let total = path_counts_from_set(g, &all);
    let from_s = path_counts_from_set(g, &marked);
    let from_e = path_counts_from_set(g, &unmarked);

    let mut report = CornerReport {
        dim_full: 0,
        dim_p_corner: 0,
        dim_complement_corner: 0,
        dim_off_corner: 0,
        sinks: Vec::new(),
        ranks: None,
        case_formula_checked: 0,
        identities_ok: true,
        failures: Vec::new(),
        notes: Vec::new(),
    };
    let small = |x: &BigUint| u64::try_from(x).ok();
    for v in g.vertices().filter(|&v| g.is_sink(v)) {
        let (l, i) = (v.level - 1, v.index);
        match (small(&total[l][i]), small(&from_s[l][i]), small(&from_e[l][i])) {
            (Some(paths), Some(from_marked), Some(from_unmarked)) => report.sinks.push(SinkBreakdown {
                sink: v,
                paths,
                from_marked,
                from_unmarked,
            }),
            _ => {
                report.fail(format!("path counts at sink {v} exceed 64 bits"));
                return report;
            }
        }
    }

    let sums = (
        checked_square_sum(report.sinks.iter().map(|s| (s.paths, s.paths))),
        checked_square_sum(report.sinks.iter().map(|s| (s.from_marked, s.from_marked))),
        checked_square_sum(report.sinks.iter().map(|s| (s.from_unmarked, s.from_unmarked))),
        checked_square_sum(report.sinks.iter().map(|s| (s.from_marked, s.from_unmarked))),
    );
    let (Some(full), Some(pc), Some(cc), Some(oc)) = sums else {
        report.fail("corner dimensions exceed 64 bits");
        return report;
    };
    report.dim_full = full;
    report.dim_p_corner = pc;
    report.dim_complement_corner = cc;
    report.dim_off_corner = oc;

    let failures: Vec<String> = report
        .sinks
        .iter()
        .filter(|s| Some(s.paths) != s.from_marked.checked_add(s.from_unmarked))
        .map(|s| {
            format!(
                "at sink {}: {} paths but {} from S plus {} from E0",
                s.sink, s.paths, s.from_marked, s.from_unmarked
            )
        })
        .collect();
    for f in failures {
        report.fail(f);
    }
    let split = u128::from(pc) + u128::from(cc) + 2 * u128::from(oc);
    if u128::from(full) != split {
        report.fail(format!("dim {full} differs from {pc} + {cc} + 2·{oc}"));
    }
    report
}

/// Corner dimensions from the representation: the combinatorial ledger,
/// exact ranks of the sink-range matrix units grouped by whether `s(μ)` and
/// `s(ν)` are marked, the action of `p` on units, and the Cuntz-Krieger
/// relations of the unmarked subfamily.
pub fn corner_analysis(rep: &PathSpaceRep, budget: &PairBudget) -> CornerReport {
    let g = rep.graph();
    let mut report = corner_ledger(g);
    let n = rep.dim();
    let marked = |p: &Path| g.is_marked(p.source());

    // The ledger must match a direct count of the basis.
    let mut by_sink: BTreeMap<VertexId, Vec<usize>> = BTreeMap::new();
    for (i, b) in rep.basis().iter().enumerate() {
        by_sink.entry(b.range()).or_default().push(i);
    }
    for s in report.sinks.clone() {
        let idx = by_sink.get(&s.sink).map_or(&[][..], Vec::as_slice);
        let from_s = idx.iter().filter(|&&i| marked(&rep.basis()[i])).count() as u64;
        if idx.len() as u64 != s.paths || from_s != s.from_marked {
            report.fail(format!("basis count at sink {} disagrees with the path count", s.sink));
        }
    }

    let p = rep.corner_projection();
    let q = &SparseMatrix::identity(n) - &p;
    if &p * &p != p || p.transpose() != p {
        report.fail("p is not a projection");
    }

    let operators: Vec<SparseMatrix> = rep.basis().iter().map(|b| rep.path_operator(b)).collect();
    let adjoints: Vec<SparseMatrix> = operators.iter().map(SparseMatrix::transpose).collect();
    let pairs: Vec<(usize, usize)> = by_sink
        .values()
        .flat_map(|idx| idx.iter().flat_map(move |&i| idx.iter().map(move |&j| (i, j))))
        .collect();

    let selection = budget.select(pairs.len(), 4);
    for &t in &selection.indices {
        let (i, j) = pairs[t];
        let unit = &operators[i] * &adjoints[j];
        let (in_p, in_q) = if marked(&rep.basis()[i]) {
            (unit.clone(), SparseMatrix::zero(n))
        } else {
            (SparseMatrix::zero(n), unit.clone())
        };
        if &p * &unit != in_p || &q * &unit != in_q {
            report.fail(format!(
                "p·s_μ s_ν* has the wrong form for μ = {}, ν = {}",
                rep.basis()[i],
                rep.basis()[j]
            ));
        }
    }
    report.case_formula_checked = selection.indices.len();
    if selection.sampled {
        report.notes.push(format!(
            "p-action checked on {} of {} units",
            selection.indices.len(),
            selection.total
        ));
    }

    if pairs.len() <= budget.limit {
        let mut full = RowEchelon::new();
        let mut pc = RowEchelon::new();
        let mut cc = RowEchelon::new();
        let mut oc = RowEchelon::new();
        for &(i, j) in &pairs {
            let flat = (&operators[i] * &adjoints[j]).flatten();
            full.insert(&flat);
            match (marked(&rep.basis()[i]), marked(&rep.basis()[j])) {
                (true, true) => pc.insert(&flat),
                (false, false) => cc.insert(&flat),
                (true, false) => oc.insert(&flat),
                (false, true) => false,
            };
        }
        let ranks = CornerRanks {
            full: full.rank(),
            p_corner: pc.rank(),
            complement_corner: cc.rank(),
            off_corner: oc.rank(),
        };
        let got = [ranks.full, ranks.p_corner, ranks.complement_corner, ranks.off_corner];
        let want = [
            report.dim_full,
            report.dim_p_corner,
            report.dim_complement_corner,
            report.dim_off_corner,
        ];
        if got.iter().zip(want).any(|(&r, d)| r as u64 != d) {
            report.fail(format!("corner ranks {got:?} differ from path counts {want:?}"));
        }
        report.ranks = Some(ranks);
    } else {
        report.notes.push(format!(
            "ranks skipped: {} units exceed the pair budget {}",
            pairs.len(),
            budget.limit
        ));
    }

    // The unmarked family {s_e, p_v : e ∈ E¹, v ∈ E⁰} on its own.
    for v in g.vertices().filter(|&v| !g.is_marked(v)) {
        let mut sum = SparseMatrix::zero(n);
        for e in g.out_edges(v) {
            if g.is_marked(e.range()) {
                report.fail(format!("edge {e} leaves the unmarked vertices"));
            }
            let s = rep.isometry(e);
            if &(&q * s) != s || &(s * &q) != s {
                report.fail(format!("s_{e} is not inside the complementary corner"));
            }
            if &(&s.transpose() * s) != rep.projection(e.range()) {
                report.fail(format!("s_{e}* s_{e} differs from p_r(e) in the unmarked family"));
            }
            sum = &sum + &(s * &s.transpose());
        }
        if g.emits(v) && &sum != rep.projection(v) {
            report.fail(format!("unmarked family violates the sum relation at {v}"));
        }
    }
    report
}
