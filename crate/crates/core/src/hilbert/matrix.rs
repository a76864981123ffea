use std::collections::{BTreeMap, BTreeSet};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::HilbertError;

/// Sparse square matrix over node ids; stored entries are never zero, so
/// the stored index set is exactly the support relation.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TreeMatrix {
    dim: usize,
    entries: BTreeMap<(usize, usize), Complex64>,
}

pub type Relation = BTreeSet<(usize, usize)>;

impl TreeMatrix {
    pub fn zero(dim: usize) -> Self {
        TreeMatrix { dim, entries: BTreeMap::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![Complex64::new(1.0, 0.0); dim])
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let mut m = Self::zero(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn from_entries(dim: usize, entries: impl IntoIterator<Item = ((usize, usize), Complex64)>) -> Self {
        let mut m = Self::zero(dim);
        for ((i, j), v) in entries {
            m.set(i, j, v);
        }
        m
    }

    pub fn from_dense(rows: &[Vec<Complex64>]) -> Self {
        let mut m = Self::zero(rows.len());
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries.get(&(i, j)).copied().unwrap_or_default()
    }

    /// Stores `v` at `(i, j)`, or removes the entry when `v == 0`.
    ///
    /// # Panics
    /// If an index is out of range.
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(i < self.dim && j < self.dim, "index ({i}, {j}) out of range for dimension {}", self.dim);
        if v == Complex64::new(0.0, 0.0) {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), v);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), Complex64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.entries.range((i, 0)..(i + 1, 0)).map(|(&(_, j), &v)| (j, v))
    }

    pub fn add(&self, other: &TreeMatrix) -> TreeMatrix {
        let mut out = self.clone();
        for ((i, j), v) in other.entries() {
            let sum = out.get(i, j) + v;
            out.set(i, j, sum);
        }
        out
    }

    pub fn sub(&self, other: &TreeMatrix) -> TreeMatrix {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> TreeMatrix {
        TreeMatrix::from_entries(self.dim, self.entries().map(|(k, v)| (k, v * c)))
    }

    pub fn mul(&self, other: &TreeMatrix) -> TreeMatrix {
        let mut acc: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
        for ((i, k), a) in self.entries() {
            for (j, b) in other.row(k) {
                *acc.entry((i, j)).or_default() += a * b;
            }
        }
        TreeMatrix::from_entries(self.dim, acc)
    }

    pub fn adjoint(&self) -> TreeMatrix {
        TreeMatrix::from_entries(self.dim, self.entries().map(|((i, j), v)| ((j, i), v.conj())))
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut d = DMatrix::zeros(self.dim, self.dim);
        for ((i, j), v) in self.entries() {
            d[(i, j)] = v;
        }
        d
    }

    pub fn max_entry(&self) -> f64 {
        self.entries.values().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest `|a_ij - b_ij|` over the union of supports.
    pub fn max_abs_diff(&self, other: &TreeMatrix) -> f64 {
        self.sub(other).max_entry()
    }

    /// Spectral norm, computed block by block over the connected
    /// components of the bipartite support graph.
    pub fn operator_norm(&self) -> f64 {
        let mut parent: BTreeMap<(bool, usize), (bool, usize)> = BTreeMap::new();
        fn find(p: &mut BTreeMap<(bool, usize), (bool, usize)>, x: (bool, usize)) -> (bool, usize) {
            let mut r = x;
            while let Some(&q) = p.get(&r) {
                if q == r {
                    break;
                }
                r = q;
            }
            let mut c = x;
            while c != r {
                let next = p[&c];
                p.insert(c, r);
                c = next;
            }
            r
        }
        for &(i, j) in self.entries.keys() {
            let (a, b) = ((false, i), (true, j));
            parent.entry(a).or_insert(a);
            parent.entry(b).or_insert(b);
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent.insert(rb, ra);
            }
        }
        let mut blocks: BTreeMap<(bool, usize), (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        let keys: Vec<_> = parent.keys().copied().collect();
        for k in keys {
            let r = find(&mut parent, k);
            let block = blocks.entry(r).or_default();
            if k.0 {
                block.1.push(k.1)
            } else {
                block.0.push(k.1)
            }
        }
        blocks
            .values()
            .map(|(rows, cols)| {
                let mut m = DMatrix::<Complex64>::zeros(rows.len(), cols.len());
                for (a, &i) in rows.iter().enumerate() {
                    for (b, &j) in cols.iter().enumerate() {
                        m[(a, b)] = self.get(i, j);
                    }
                }
                if rows.len() == 1 || cols.len() == 1 {
                    m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
                } else {
                    m.singular_values().max()
                }
            })
            .fold(0.0, f64::max)
    }
}

/// The support relation: index pairs with a stored entry.
pub fn rel(mat: &TreeMatrix) -> Relation {
    mat.entries.keys().copied().collect()
}

pub fn is_diagonal(mat: &TreeMatrix) -> bool {
    mat.entries.keys().all(|&(i, j)| i == j)
}

/// True when the support relation is one-to-one: no row and no column
/// holds two entries.
pub fn is_quasi_monomial(mat: &TreeMatrix) -> bool {
    let mut rows = BTreeSet::new();
    let mut cols = BTreeSet::new();
    mat.entries.keys().all(|&(i, j)| rows.insert(i) && cols.insert(j))
}

/// Conditional expectation onto the diagonal.
pub fn delta(mat: &TreeMatrix) -> TreeMatrix {
    TreeMatrix::from_entries(mat.dim, mat.entries().filter(|((i, j), _)| i == j))
}

pub fn compose(a: &Relation, b: &Relation) -> Relation {
    let mut out = Relation::new();
    for &(x, y) in a {
        for &(_, z) in b.range((y, 0)..(y + 1, 0)) {
            out.insert((x, z));
        }
    }
    out
}

pub fn inverse(a: &Relation) -> Relation {
    a.iter().map(|&(x, y)| (y, x)).collect()
}

/// Which conjugation exposes a non-diagonal entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    /// `alpha* diag(h) alpha`
    AdjointFirst,
    /// `alpha diag(h) alpha*`
    AdjointLast,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum NormalizerOutcome {
    ConjugationStaysDiagonal,
    Witness {
        /// Node whose indicator is conjugated.
        node: usize,
        side: Side,
        /// Off-diagonal position of the conjugate that is non-zero.
        entry: (usize, usize),
    },
}

/// `alpha* diag(h) alpha` or `alpha diag(h) alpha*`.
pub fn conjugate(alpha: &TreeMatrix, h: &[Complex64], side: Side) -> TreeMatrix {
    let d = TreeMatrix::diagonal(h);
    match side {
        Side::AdjointFirst => alpha.adjoint().mul(&d).mul(alpha),
        Side::AdjointLast => alpha.mul(&d).mul(&alpha.adjoint()),
    }
}

fn indicator(dim: usize, node: usize) -> Vec<Complex64> {
    let mut h = vec![Complex64::new(0.0, 0.0); dim];
    h[node] = Complex64::new(1.0, 0.0);
    h
}

/// Decides whether `alpha` conjugates diagonals to diagonals.
///
/// Quasi-monomial input is checked against every indicator touching its
/// support, on both sides. Otherwise a row `u` with entries at `v != w`
/// gives `h = 1_u` with `(alpha* h alpha)_{vw} = conj(a_uv) a_uw`, or a column
/// `w` with entries at `u != v` gives `h = 1_w` with
/// `(alpha h alpha*)_{uv} = a_uw conj(a_vw)`.
pub fn normalizer_witness(alpha: &TreeMatrix) -> Result<NormalizerOutcome, HilbertError> {
    let dim = alpha.dim;
    if is_quasi_monomial(alpha) {
        let nodes: BTreeSet<usize> = alpha.entries.keys().flat_map(|&(i, j)| [i, j]).collect();
        for &node in &nodes {
            let h = indicator(dim, node);
            for side in [Side::AdjointFirst, Side::AdjointLast] {
                if !is_diagonal(&conjugate(alpha, &h, side)) {
                    return Err(HilbertError::InternalInvariantBroken(format!(
                        "quasi-monomial matrix conjugates the indicator of node {node} off the diagonal"
                    )));
                }
            }
        }
        return Ok(NormalizerOutcome::ConjugationStaysDiagonal);
    }
    let mut by_row: BTreeMap<usize, usize> = BTreeMap::new();
    let mut by_col: BTreeMap<usize, usize> = BTreeMap::new();
    let mut candidate = None;
    for &(i, j) in alpha.entries.keys() {
        if let Some(&other) = by_row.get(&i) {
            candidate = Some((i, Side::AdjointFirst, (other, j)));
            break;
        }
        if let Some(&other) = by_col.get(&j) {
            candidate = Some((j, Side::AdjointLast, (other, i)));
            break;
        }
        by_row.insert(i, j);
        by_col.insert(j, i);
    }
    let (node, side, entry) = candidate.expect("a matrix that is not quasi-monomial repeats a row or a column");
    let conj = conjugate(alpha, &indicator(dim, node), side);
    if conj.get(entry.0, entry.1) == Complex64::new(0.0, 0.0) {
        return Err(HilbertError::InternalInvariantBroken(format!(
            "indicator of node {node} failed to expose entry {entry:?}"
        )));
    }
    Ok(NormalizerOutcome::Witness { node, side, entry })
}

/// For non-diagonal `alpha` with an entry at `(x, z)`, `x != z`, the
/// indicator of `x` as a diagonal matrix fails to commute with `alpha`.
pub fn commutant_witness(alpha: &TreeMatrix) -> Option<(usize, TreeMatrix)> {
    let &(x, _) = alpha.entries.keys().find(|&&(i, j)| i != j)?;
    let beta = TreeMatrix::diagonal(&indicator(alpha.dim, x));
    Some((x, beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn relations() {
        assert_eq!(rel(&TreeMatrix::identity(3)), [(0, 0), (1, 1), (2, 2)].into_iter().collect());
        assert!(rel(&TreeMatrix::zero(3)).is_empty());
        let m = TreeMatrix::from_entries(4, [((1, 2), c(1.0)), ((1, 3), c(-2.0))]);
        assert_eq!(rel(&m), [(1, 2), (1, 3)].into_iter().collect());
    }

    #[test]
    fn diagonal_and_quasi_monomial() {
        let perm = TreeMatrix::from_entries(3, [((0, 1), c(1.0)), ((1, 2), c(1.0)), ((2, 0), c(1.0))]);
        assert!(is_quasi_monomial(&perm) && !is_diagonal(&perm));
        let d = TreeMatrix::diagonal(&[c(1.0), c(0.0), c(4.0)]);
        assert!(is_quasi_monomial(&d) && is_diagonal(&d));
        let m = TreeMatrix::from_dense(&[vec![c(1.0), c(1.0)], vec![c(0.0), c(0.0)]]);
        assert!(!is_quasi_monomial(&m));
    }

    #[test]
    fn expectation_examples() {
        let m = TreeMatrix::from_dense(&[vec![c(1.0), c(2.0)], vec![c(3.0), c(4.0)]]);
        assert_eq!(delta(&m), TreeMatrix::diagonal(&[c(1.0), c(4.0)]));
        let d = TreeMatrix::diagonal(&[c(5.0), c(-1.0)]);
        assert_eq!(delta(&d), d);
    }

    #[test]
    fn normalizer_examples() {
        let perm = TreeMatrix::from_entries(3, [((0, 1), c(1.0)), ((1, 2), c(1.0)), ((2, 0), c(1.0))]);
        assert_eq!(normalizer_witness(&perm), Ok(NormalizerOutcome::ConjugationStaysDiagonal));
        assert_eq!(normalizer_witness(&TreeMatrix::zero(2)), Ok(NormalizerOutcome::ConjugationStaysDiagonal));
        let m = TreeMatrix::from_dense(&[vec![c(1.0), c(1.0)], vec![c(0.0), c(0.0)]]);
        let out = normalizer_witness(&m).unwrap();
        assert_eq!(out, NormalizerOutcome::Witness { node: 0, side: Side::AdjointFirst, entry: (0, 1) });
        let conj = conjugate(&m, &[c(1.0), c(0.0)], Side::AdjointFirst);
        assert_eq!(conj, TreeMatrix::from_dense(&[vec![c(1.0), c(1.0)], vec![c(1.0), c(1.0)]]));
    }

    #[test]
    fn block_norm_matches_dense_svd() {
        let m = TreeMatrix::from_entries(
            5,
            [((0, 1), c(3.0)), ((0, 2), c(4.0)), ((3, 4), Complex64::new(0.0, 2.0)), ((4, 3), c(1.0))],
        );
        let dense = m.to_dense().singular_values().max();
        assert!((m.operator_norm() - dense).abs() < 1e-12);
        assert!((m.operator_norm() - 5.0).abs() < 1e-12);
        assert_eq!(TreeMatrix::zero(3).operator_norm(), 0.0);
    }

    #[test]
    fn commutant_witness_breaks_commutation() {
        let m = TreeMatrix::from_entries(3, [((2, 0), c(1.5))]);
        let (x, beta) = commutant_witness(&m).unwrap();
        assert_eq!(x, 2);
        assert_ne!(m.mul(&beta), beta.mul(&m));
        assert!(commutant_witness(&TreeMatrix::identity(3)).is_none());
    }
}
