//! Shared test support: a seeded generator of valid diagrams and a
//! brute-force path enumerator used as an oracle for the path counts.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use bratteli::{BratteliDiagram, VertexId};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_LEVELS: usize = 6;
pub const MAX_WIDTH: usize = 5;
pub const MAX_LABEL: u64 = 20;
pub const MAX_MULTIPLICITY: u64 = 4;

pub fn example_a() -> BratteliDiagram {
    BratteliDiagram::from_parts(vec![vec![1], vec![2]], vec![vec![vec![2]]], BTreeSet::new())
}

pub fn example_b() -> BratteliDiagram {
    BratteliDiagram::from_parts(vec![vec![1], vec![3]], vec![vec![vec![2]]], BTreeSet::new())
}

/// Three levels of the Fibonacci diagram with `A = [[1, 1], [1, 0]]`.
pub fn fibonacci() -> BratteliDiagram {
    let m = vec![vec![1, 1], vec![1, 0]];
    BratteliDiagram::from_parts(
        vec![vec![1, 1], vec![2, 1], vec![3, 2]],
        vec![m.clone(), m],
        BTreeSet::new(),
    )
}

/// A random valid unmarked diagram within the corpus bounds.
///
/// Every non-final vertex emits at least one edge, every label is at least
/// its incoming weight, and labels never exceed [`MAX_LABEL`]. About a third
/// of the diagrams are unital (no label exceeds its incoming weight after
/// the first level).
pub fn random_diagram(rng: &mut ChaCha8Rng) -> BratteliDiagram {
    let levels = rng.random_range(1..=MAX_LEVELS);
    let unital = rng.random_bool(0.35);
    let first_width = rng.random_range(1..=MAX_WIDTH);
    let mut labels: Vec<Vec<u64>> = vec![(0..first_width).map(|_| small_label(rng, 1)).collect()];
    let mut adjacency: Vec<Vec<Vec<u64>>> = Vec::new();

    while labels.len() < levels {
        let prev = labels.last().unwrap().clone();
        let Some((matrix, incoming)) = random_level(rng, &prev) else {
            break;
        };
        let next: Vec<u64> = incoming
            .iter()
            .map(|&w| {
                if w == 0 {
                    small_label(rng, 1)
                } else if unital || rng.random_bool(0.5) {
                    w
                } else {
                    small_label(rng, w)
                }
            })
            .collect();
        adjacency.push(matrix);
        labels.push(next);
    }
    BratteliDiagram::from_parts(labels, adjacency, BTreeSet::new())
}

/// A label in `lo..=MAX_LABEL`, usually close to `lo`.
fn small_label(rng: &mut ChaCha8Rng, lo: u64) -> u64 {
    if rng.random_bool(0.7) {
        rng.random_range(lo..=(lo + 3).min(MAX_LABEL))
    } else {
        rng.random_range(lo..=MAX_LABEL)
    }
}

fn multiplicity(rng: &mut ChaCha8Rng) -> u64 {
    match rng.random_range(0..20) {
        0..=11 => 1,
        12..=16 => 2,
        _ => rng.random_range(3..=MAX_MULTIPLICITY),
    }
}

/// Draws a multiplicity matrix out of a level with labels `prev` in which
/// every source emits and no target receives more than [`MAX_LABEL`].
/// Later attempts are sparser, so a level fits whenever one does.
fn random_level(rng: &mut ChaCha8Rng, prev: &[u64]) -> Option<(Vec<Vec<u64>>, Vec<u64>)> {
    const ATTEMPTS: usize = 100;
    for attempt in 0..ATTEMPTS {
        let density = 0.5 * (1.0 - attempt as f64 / ATTEMPTS as f64);
        let min_width = if attempt > ATTEMPTS / 2 {
            prev.len().min(MAX_WIDTH)
        } else {
            1
        };
        let width = rng.random_range(min_width..=MAX_WIDTH);
        let mut matrix = vec![vec![0u64; width]; prev.len()];
        for row in matrix.iter_mut() {
            for m in row.iter_mut() {
                if rng.random_bool(density) {
                    *m = multiplicity(rng);
                }
            }
            if row.iter().all(|&m| m == 0) {
                let j = rng.random_range(0..width);
                row[j] = 1;
            }
        }
        let incoming: Vec<u64> = (0..width)
            .map(|j| prev.iter().zip(&matrix).map(|(&d, row)| d * row[j]).sum())
            .collect();
        if incoming.iter().all(|&w| w <= MAX_LABEL) {
            return Some((matrix, incoming));
        }
    }
    None
}

pub fn corpus(seed: u64, size: usize) -> Vec<BratteliDiagram> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size).map(|_| random_diagram(&mut rng)).collect()
}

/// Counts paths ending at each vertex whose source lies in `from`, by
/// walking every path explicitly, one parallel edge at a time.
pub fn dfs_path_counts(g: &BratteliDiagram, from: &BTreeSet<VertexId>) -> BTreeMap<VertexId, u64> {
    let labels = g.all_labels();
    let adjacency = g.matrices();
    let mut counts: BTreeMap<VertexId, u64> = BTreeMap::new();
    for (l, level) in labels.iter().enumerate() {
        for i in 0..level.len() {
            counts.insert(VertexId::new(l + 1, i), 0);
        }
    }

    let mut stack: Vec<(usize, usize)> = from.iter().map(|v| (v.level - 1, v.index)).collect();
    while let Some((l, i)) = stack.pop() {
        *counts.get_mut(&VertexId::new(l + 1, i)).unwrap() += 1;
        if l < adjacency.len() {
            for (j, &m) in adjacency[l][i].iter().enumerate() {
                for _copy in 0..m {
                    stack.push((l + 1, j));
                }
            }
        }
    }
    counts
}

/// Labels indexed by vertex, read straight from the label table.
pub fn label_map(g: &BratteliDiagram) -> BTreeMap<VertexId, u64> {
    g.all_labels()
        .iter()
        .enumerate()
        .flat_map(|(l, row)| row.iter().enumerate().map(move |(i, &d)| (VertexId::new(l + 1, i), d)))
        .collect()
}

/// `σ_v` computed directly from the tables; level-one vertices have no
/// incoming edges.
pub fn sigma_oracle(g: &BratteliDiagram) -> BTreeMap<VertexId, u64> {
    let labels = g.all_labels();
    let adjacency = g.matrices();
    let mut out = BTreeMap::new();
    for (l, row) in labels.iter().enumerate() {
        for (j, &d) in row.iter().enumerate() {
            let incoming: u64 = if l == 0 {
                0
            } else {
                labels[l - 1]
                    .iter()
                    .zip(&adjacency[l - 1])
                    .map(|(&s, r)| s * r[j])
                    .sum()
            };
            out.insert(VertexId::new(l + 1, j), d - incoming);
        }
    }
    out
}

/// Rank over the rationals of dense integer rows, by cross-multiplying
/// Gaussian elimination in i128 with gcd reduction after every update.
pub fn dense_rank(mut rows: Vec<Vec<i128>>) -> usize {
    fn gcd(a: i128, b: i128) -> i128 {
        if b == 0 {
            a.abs()
        } else {
            gcd(b, a % b)
        }
    }
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][c] != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            let b = row[c];
            if b == 0 {
                continue;
            }
            let a = pivot[c];
            for (x, &y) in row.iter_mut().zip(&pivot) {
                *x = a * *x - b * y;
            }
            let g = row.iter().fold(0, |g, &x| gcd(g, x));
            if g > 1 {
                row.iter_mut().for_each(|x| *x /= g);
            }
        }
        rank += 1;
    }
    rank
}
