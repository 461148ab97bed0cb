//! Exact sparse integer matrices and fraction-free rank computation.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Square integer matrix in compressed-row form. Entries within a row are
/// sorted by column and never zero, so structural equality is matrix
/// equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<i64>,
}

impl SparseMatrix {
    pub fn zero(n: usize) -> Self {
        SparseMatrix {
            n,
            row_ptr: vec![0; n + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, (0..n).map(|i| (i, i, 1)))
    }

    /// Builds from `(row, col, value)` entries; duplicates are summed and
    /// zeros dropped.
    pub fn from_triplets(n: usize, entries: impl IntoIterator<Item = (usize, usize, i64)>) -> Self {
        let mut entries: Vec<(usize, usize, i64)> = entries.into_iter().collect();
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0; n + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<i64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows_of = Vec::with_capacity(entries.len());
        for (r, c, v) in entries {
            assert!(r < n && c < n, "entry ({r}, {c}) outside {n}x{n} matrix");
            if last == Some((r, c)) {
                let slot = vals.last_mut().expect("previous entry");
                *slot = slot.checked_add(v).expect("integer overflow in matrix entry");
            } else {
                cols.push(c);
                vals.push(v);
                rows_of.push(r);
                last = Some((r, c));
            }
        }
        let mut kept_cols = Vec::with_capacity(cols.len());
        let mut kept_vals = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows_of.into_iter().zip(cols).zip(vals) {
            if v != 0 {
                row_ptr[r + 1] += 1;
                kept_cols.push(c);
                kept_vals.push(v);
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix {
            n,
            row_ptr,
            cols: kept_cols,
            vals: kept_vals,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn is_zero(&self) -> bool {
        self.vals.is_empty()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, i64)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()]
            .iter()
            .copied()
            .zip(self.vals[range].iter().copied())
    }

    /// Nonzero entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0, |(_, v)| v)
    }

    pub fn transpose(&self) -> Self {
        Self::from_triplets(self.n, self.entries().map(|(i, j, v)| (j, i, v)))
    }

    /// True for a 0/1 matrix with at most one 1 in each row and column.
    pub fn is_partial_permutation(&self) -> bool {
        let mut seen = vec![false; self.n];
        self.vals.iter().all(|&v| v == 1)
            && (0..self.n).all(|i| self.row_ptr[i + 1] - self.row_ptr[i] <= 1)
            && self.cols.iter().all(|&c| !std::mem::replace(&mut seen[c], true))
    }

    pub fn is_diagonal(&self) -> bool {
        self.entries().all(|(i, j, _)| i == j)
    }

    /// Entries keyed by `row * n + col`, the vectorisation used for ranks.
    pub fn flatten(&self) -> Vec<(usize, i64)> {
        self.entries().map(|(i, j, v)| (i * self.n + j, v)).collect()
    }

    fn assert_same_dim(&self, other: &SparseMatrix) {
        assert_eq!(self.n, other.n, "matrix dimensions differ");
    }
}

impl Mul for &SparseMatrix {
    type Output = SparseMatrix;

    fn mul(self, rhs: &SparseMatrix) -> SparseMatrix {
        self.assert_same_dim(rhs);
        let mut triplets = Vec::new();
        for i in 0..self.n {
            for (k, a) in self.row(i) {
                for (j, b) in rhs.row(k) {
                    triplets.push((i, j, a.checked_mul(b).expect("integer overflow in product")));
                }
            }
        }
        SparseMatrix::from_triplets(self.n, triplets)
    }
}

impl Add for &SparseMatrix {
    type Output = SparseMatrix;

    fn add(self, rhs: &SparseMatrix) -> SparseMatrix {
        self.assert_same_dim(rhs);
        SparseMatrix::from_triplets(self.n, self.entries().chain(rhs.entries()))
    }
}

impl Sub for &SparseMatrix {
    type Output = SparseMatrix;

    fn sub(self, rhs: &SparseMatrix) -> SparseMatrix {
        self.assert_same_dim(rhs);
        SparseMatrix::from_triplets(self.n, self.entries().chain(rhs.entries().map(|(i, j, v)| (i, j, -v))))
    }
}

impl fmt::Debug for SparseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SparseMatrix({}x{}", self.n, self.n)?;
        for (i, j, v) in self.entries() {
            write!(f, " [{i},{j}]={v}")?;
        }
        write!(f, ")")
    }
}

type SparseRow = Vec<(usize, BigInt)>;

/// Incremental row echelon form over the integers.
///
/// Rows are reduced against stored pivots with the fraction-free update
/// `row ← p·row − r·pivot` (where `p` and `r` are the leading entries) and
/// then divided by the gcd of their entries, so every quantity stays an
/// exact integer.
#[derive(Debug, Default)]
pub struct RowEchelon {
    pivots: BTreeMap<usize, SparseRow>,
}

impl RowEchelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Inserts a sparse vector; returns whether it was independent of the
    /// vectors inserted so far.
    pub fn insert(&mut self, entries: &[(usize, i64)]) -> bool {
        let mut row: SparseRow = entries
            .iter()
            .filter(|(_, v)| *v != 0)
            .map(|&(c, v)| (c, BigInt::from(v)))
            .collect();
        row.sort_by_key(|(c, _)| *c);
        row.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 += &b.1;
                true
            } else {
                false
            }
        });
        row.retain(|(_, v)| !v.is_zero());

        loop {
            let Some(lead) = row.first().map(|(c, _)| *c) else {
                return false;
            };
            let Some(pivot) = self.pivots.get(&lead) else {
                normalize(&mut row);
                self.pivots.insert(lead, row);
                return true;
            };
            row = eliminate(&row, pivot);
        }
    }
}

fn eliminate(row: &SparseRow, pivot: &SparseRow) -> SparseRow {
    let r = &row[0].1;
    let p = &pivot[0].1;
    let g = r.gcd(p);
    let (rs, ps) = (r / &g, p / &g);
    let mut out = Vec::with_capacity(row.len() + pivot.len());
    let (mut a, mut b) = (row.iter().peekable(), pivot.iter().peekable());
    loop {
        let next = match (a.peek(), b.peek()) {
            (None, None) => break,
            (Some(&(ca, va)), Some(&(cb, vb))) if ca == cb => {
                a.next();
                b.next();
                (*ca, &ps * va - &rs * vb)
            }
            (Some(&(ca, va)), Some(&(cb, _))) if ca < cb => {
                a.next();
                (*ca, &ps * va)
            }
            (Some(&(ca, va)), None) => {
                a.next();
                (*ca, &ps * va)
            }
            (_, Some(&(cb, vb))) => {
                b.next();
                (*cb, -(&rs * vb))
            }
        };
        if !next.1.is_zero() {
            out.push(next);
        }
    }
    normalize(&mut out);
    out
}

fn normalize(row: &mut SparseRow) {
    let g = row.iter().fold(BigInt::zero(), |acc, (_, v)| acc.gcd(v));
    if !g.is_zero() && !g.is_one() {
        for (_, v) in row.iter_mut() {
            *v /= &g;
        }
    }
    if row.first().is_some_and(|(_, v)| v.is_negative()) {
        for (_, v) in row.iter_mut() {
            *v = -&*v;
        }
    }
}

/// Rank of a family of sparse vectors.
pub fn rank<'a>(vectors: impl IntoIterator<Item = &'a [(usize, i64)]>) -> usize {
    let mut echelon = RowEchelon::new();
    for v in vectors {
        echelon.insert(v);
    }
    echelon.rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dense(rows: &[&[i64]]) -> SparseMatrix {
        let n = rows.len();
        SparseMatrix::from_triplets(
            n,
            rows.iter()
                .enumerate()
                .flat_map(|(i, r)| r.iter().enumerate().map(move |(j, &v)| (i, j, v))),
        )
    }

    fn to_dense(m: &SparseMatrix) -> Vec<Vec<i64>> {
        let mut out = vec![vec![0; m.dim()]; m.dim()];
        for (i, j, v) in m.entries() {
            out[i][j] = v;
        }
        out
    }

    #[test]
    fn product_and_transpose() {
        let a = dense(&[&[0, 1], &[0, 0]]);
        let b = a.transpose();
        assert_eq!(to_dense(&(&a * &b)), vec![vec![1, 0], vec![0, 0]]);
        assert_eq!(to_dense(&(&b * &a)), vec![vec![0, 0], vec![0, 1]]);
        assert!((&a * &a).is_zero());
        assert_eq!(&(&a * &b) + &(&b * &a), SparseMatrix::identity(2));
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn duplicates_merge_and_zeros_drop() {
        let m = SparseMatrix::from_triplets(2, [(0, 1, 1), (0, 1, -1), (1, 0, 2), (1, 0, 3)]);
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(1, 0), 5);
        assert_eq!(m, dense(&[&[0, 0], &[5, 0]]));
    }

    #[test]
    fn partial_permutation_shape() {
        assert!(dense(&[&[0, 1], &[0, 0]]).is_partial_permutation());
        assert!(!dense(&[&[1, 1], &[0, 0]]).is_partial_permutation());
        assert!(!dense(&[&[1, 0], &[1, 0]]).is_partial_permutation());
        assert!(!dense(&[&[2, 0], &[0, 0]]).is_partial_permutation());
    }

    #[test]
    fn rank_small_cases() {
        let v1: Vec<(usize, i64)> = vec![(0, 2), (1, 4)];
        let v2: Vec<(usize, i64)> = vec![(0, 1), (1, 2)];
        let v3: Vec<(usize, i64)> = vec![(1, 3), (2, 1)];
        assert_eq!(rank([v1.as_slice(), v2.as_slice()]), 1);
        assert_eq!(rank([v1.as_slice(), v2.as_slice(), v3.as_slice()]), 2);
        assert_eq!(rank(std::iter::empty()), 0);
        let zero: Vec<(usize, i64)> = vec![(3, 0)];
        assert_eq!(rank([zero.as_slice()]), 0);
    }

    // Reference rank: dense Gauss-Jordan over i128 with cross multiplication.
    fn dense_rank(rows: &[Vec<i64>]) -> usize {
        let mut m: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
        let cols = m.first().map_or(0, Vec::len);
        let mut rank = 0;
        for c in 0..cols {
            let Some(p) = (rank..m.len()).find(|&r| m[r][c] != 0) else {
                continue;
            };
            m.swap(rank, p);
            for r in 0..m.len() {
                if r != rank && m[r][c] != 0 {
                    let (a, b) = (m[rank][c], m[r][c]);
                    let pivot = m[rank].clone();
                    for (x, &y) in m[r].iter_mut().zip(&pivot) {
                        *x = a * *x - b * y;
                    }
                    let g = m[r].iter().fold(0i128, |g, &x| num_integer::gcd(g, x));
                    if g > 1 {
                        m[r].iter_mut().for_each(|x| *x /= g);
                    }
                }
            }
            rank += 1;
        }
        rank
    }

    proptest! {
        #[test]
        fn rank_matches_dense_elimination(rows in prop::collection::vec(prop::collection::vec(-3i64..=3, 5), 0..7)) {
            let sparse: Vec<Vec<(usize, i64)>> = rows
                .iter()
                .map(|r| r.iter().enumerate().filter(|(_, v)| **v != 0).map(|(c, &v)| (c, v)).collect())
                .collect();
            prop_assert_eq!(rank(sparse.iter().map(Vec::as_slice)), dense_rank(&rows));
        }

        #[test]
        fn transpose_reverses_products(a in prop::collection::vec((0usize..4, 0usize..4, -2i64..=2), 0..10),
                                       b in prop::collection::vec((0usize..4, 0usize..4, -2i64..=2), 0..10)) {
            let a = SparseMatrix::from_triplets(4, a);
            let b = SparseMatrix::from_triplets(4, b);
            prop_assert_eq!((&a * &b).transpose(), &b.transpose() * &a.transpose());
        }
    }
}
