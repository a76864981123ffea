//! Randomized checks of the algebraic identities satisfied by the tree
//! operators. Every check is exact up to floating-point rounding of single
//! products, hence the tight tolerance.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::matrix::{
    commutant_witness, compose, conjugate, delta, inverse, is_diagonal, is_quasi_monomial, normalizer_witness, rel,
    NormalizerOutcome, Relation, TreeMatrix,
};
use super::rho::{kw_inner_product_at, rho_mn, rho_n, support_mn, SampledFunction};
use super::tree::OrbitTree;
use super::HilbertError;

/// Entrywise tolerance for identities between tree operators.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Tolerance for the norm of quasi-monomial matrices.
pub const NORM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub cases: usize,
    pub max_error: f64,
    pub detail: String,
}

struct Check {
    name: &'static str,
    cases: usize,
    max_error: f64,
    failure: Option<String>,
}

impl Check {
    fn new(name: &'static str) -> Self {
        Check { name, cases: 0, max_error: 0.0, failure: None }
    }

    fn expect(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok && self.failure.is_none() {
            self.failure = Some(what());
        }
    }

    fn close(&mut self, err: f64, tol: f64, what: impl FnOnce() -> String) {
        self.max_error = self.max_error.max(err);
        self.expect(err <= tol, what);
    }

    fn finish(self) -> CheckResult {
        let passed = self.failure.is_none();
        CheckResult {
            name: self.name,
            passed,
            cases: self.cases,
            max_error: self.max_error,
            detail: self.failure.unwrap_or_else(|| format!("{} cases", self.cases)),
        }
    }
}

fn random_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// A matrix with about `nnz` random entries at random positions.
pub fn random_sparse(dim: usize, nnz: usize, rng: &mut ChaCha8Rng) -> TreeMatrix {
    TreeMatrix::from_entries(
        dim,
        (0..nnz).map(|_| ((rng.random_range(0..dim), rng.random_range(0..dim)), random_complex(rng))),
    )
}

/// A partial permutation with random non-zero weights.
pub fn random_quasi_monomial(dim: usize, rng: &mut ChaCha8Rng) -> TreeMatrix {
    let mut cols: Vec<usize> = (0..dim).collect();
    for i in (1..dim).rev() {
        cols.swap(i, rng.random_range(0..=i));
    }
    let mut m = TreeMatrix::zero(dim);
    for (row, &col) in cols.iter().enumerate() {
        if rng.random_bool(0.7) {
            let mut v = random_complex(rng);
            if v == Complex64::new(0.0, 0.0) {
                v = Complex64::new(1.0, 0.0);
            }
            m.set(row, col, v);
        }
    }
    m
}

/// Runs every identity check on `tree` with `samples` random function
/// draws per check.
pub fn run_identity_suite(tree: &OrbitTree, samples: usize, seed: u64) -> Result<Vec<CheckResult>, HilbertError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = samples.max(1);
    Ok(vec![
        relation_calculus(tree, samples, &mut rng),
        conditional_expectation(tree, samples, &mut rng),
        rho_composition(tree, samples, &mut rng)?,
        rho_adjoint_product(tree, samples, &mut rng)?,
        support_disjointness(tree)?,
        support_nesting(tree)?,
        fiber_inner_product(tree, samples, &mut rng)?,
        diagonal_words(tree, samples, &mut rng)?,
        commutant(tree, samples, &mut rng)?,
        normalizer(tree, samples, &mut rng)?,
        quasi_monomial_norm(tree, samples, &mut rng)?,
    ])
}

fn relation_calculus(tree: &OrbitTree, samples: usize, rng: &mut ChaCha8Rng) -> CheckResult {
    let mut check = Check::new("relation calculus");
    let dim = tree.len();
    for s in 0..samples {
        let a = random_sparse(dim, 2 * dim, rng);
        // partial cancellation against a makes the sum's support shrink
        let b = if s % 3 == 0 {
            a.scale(Complex64::new(-1.0, 0.0)).add(&random_sparse(dim, dim / 2, rng))
        } else {
            random_sparse(dim, 2 * dim, rng)
        };
        let c = random_complex(rng);
        let (ra, rb) = (rel(&a), rel(&b));
        let union: BTreeSet<_> = ra.union(&rb).copied().collect();
        check.expect(rel(&a.add(&b)).is_subset(&union), || format!("sample {s}: support of a sum"));
        check.expect(rel(&a.scale(c)).is_subset(&ra), || format!("sample {s}: support of a scalar multiple"));
        check.expect(rel(&a.mul(&b)).is_subset(&compose(&ra, &rb)), || format!("sample {s}: support of a product"));
        check.expect(rel(&a.adjoint()) == inverse(&ra), || format!("sample {s}: support of the adjoint"));
    }
    check.finish()
}

fn conditional_expectation(tree: &OrbitTree, samples: usize, rng: &mut ChaCha8Rng) -> CheckResult {
    let mut check = Check::new("conditional expectation");
    let dim = tree.len();
    for s in 0..samples {
        let a = random_sparse(dim, 2 * dim, rng);
        let b = random_sparse(dim, 2 * dim, rng);
        let d = TreeMatrix::diagonal(SampledFunction::random(tree, rng).values());
        let (x, y) = (random_complex(rng), random_complex(rng));
        let da = delta(&a);
        check.close(delta(&da).max_abs_diff(&da), 0.0, || format!("sample {s}: idempotence"));
        let lin = delta(&a.scale(x).add(&b.scale(y))).max_abs_diff(&da.scale(x).add(&delta(&b).scale(y)));
        check.close(lin, IDENTITY_TOL, || format!("sample {s}: linearity"));
        check.close(delta(&a.mul(&d)).max_abs_diff(&da.mul(&d)), IDENTITY_TOL, || format!("sample {s}: right module"));
        check.close(delta(&d.mul(&a)).max_abs_diff(&d.mul(&da)), IDENTITY_TOL, || format!("sample {s}: left module"));
        let positive = a.adjoint().mul(&a);
        let dp = delta(&positive);
        let min_diag = (0..dim).map(|i| dp.get(i, i)).fold(f64::INFINITY, |m, v| m.min(v.re));
        let max_im = (0..dim).map(|i| dp.get(i, i).im.abs()).fold(0.0, f64::max);
        check.expect(min_diag >= 0.0 && max_im <= IDENTITY_TOL, || format!("sample {s}: positivity"));
        check.expect(positive.nnz() == 0 || dp.nnz() > 0, || format!("sample {s}: faithfulness on a*a"));
        // A Hermitian matrix with zero diagonal and an entry c at (x, y) is
        // not positive: v = c e_x - |c| e_y gives <v, a v> = -2|c|^3.
        let off = random_sparse(dim, dim, rng);
        let off = off.sub(&delta(&off));
        let herm = off.add(&off.adjoint());
        let first = herm.entries().next();
        if let Some(((i, j), c)) = first {
            let mut v = vec![Complex64::new(0.0, 0.0); dim];
            v[i] += c;
            v[j] -= Complex64::new(c.norm(), 0.0);
            let av: Vec<Complex64> = (0..dim).map(|r| (0..dim).map(|k| herm.get(r, k) * v[k]).sum()).collect();
            let q: Complex64 = v.iter().zip(&av).map(|(vi, ai)| vi.conj() * ai).sum();
            let expected = c.norm_sqr() * (herm.get(i, i) + herm.get(j, j)).re - 2.0 * c.norm().powi(3);
            check.close((q.re - expected).abs() + q.im.abs(), 1e-12, || format!("sample {s}: faithfulness vector"));
            check.expect(q.re < 0.0 && delta(&herm).nnz() == 0, || format!("sample {s}: zero-diagonal witness"));
        }
    }
    check.finish()
}

fn rho_composition(tree: &OrbitTree, samples: usize, rng: &mut ChaCha8Rng) -> Result<CheckResult, HilbertError> {
    let mut check = Check::new("rho composition");
    let depth = tree.max_depth();
    let pairs: Vec<(usize, usize)> = (0..=depth).flat_map(|m| (0..=depth - m).map(move |n| (m, n))).collect();
    for s in 0..samples {
        let (m, n) = pairs[s % pairs.len()];
        let f = SampledFunction::random(tree, rng);
        let g = SampledFunction::random(tree, rng);
        let lhs = rho_n(tree, &f, m)?.mul(&rho_n(tree, &g, n)?);
        let fg = SampledFunction::new(
            (0..tree.len()).map(|x| tree.walk(x, m).map_or(Complex64::new(0.0, 0.0), |y| f.at(x) * g.at(y))).collect(),
        );
        let rhs = rho_n(tree, &fg, m + n)?;
        check.close(lhs.max_abs_diff(&rhs), IDENTITY_TOL, || format!("m = {m}, n = {n}"));
    }
    Ok(check.finish())
}

fn rho_adjoint_product(tree: &OrbitTree, samples: usize, rng: &mut ChaCha8Rng) -> Result<CheckResult, HilbertError> {
    let mut check = Check::new("rho adjoint product");
    let depth = tree.max_depth();
    for s in 0..samples {
        let (m, n) = (s % (depth + 1), (s / (depth + 1)) % (depth + 1));
        let f = SampledFunction::random(tree, rng);
        let g = SampledFunction::random(tree, rng);
        let lhs = rho_n(tree, &f, m)?.mul(&rho_n(tree, &g, n)?.adjoint());
        let rhs = rho_mn(tree, |x, y| f.at(x) * g.at(y).conj(), m, n)?;
        check.close(lhs.max_abs_diff(&rhs), IDENTITY_TOL, || format!("m = {m}, n = {n}"));
    }
    Ok(check.finish())
}

fn support_disjointness(tree: &OrbitTree) -> Result<CheckResult, HilbertError> {
    let mut check = Check::new("support disjointness");
    let depth = tree.max_depth();
    let supports: Vec<((usize, usize), Relation)> = (0..=depth)
        .flat_map(|m| (0..=depth).map(move |n| (m, n)))
        .map(|(m, n)| support_mn(tree, m, n).map(|s| ((m, n), s.into_iter().collect())))
        .collect::<Result<_, _>>()?;
    for (i, ((m, n), a)) in supports.iter().enumerate() {
        for ((j, k), b) in &supports[i + 1..] {
            if *m as i64 - *n as i64 != *j as i64 - *k as i64 {
                check.expect(a.is_disjoint(b), || format!("({m}, {n}) and ({j}, {k}) overlap"));
            }
        }
    }
    Ok(check.finish())
}

/// `(x, y)` with `R^m x = R^n y` also has `R^j x = R^k y` when
/// `j - k = m - n`, `m <= j`, wherever the tree carries `R^j x`.
fn support_nesting(tree: &OrbitTree) -> Result<CheckResult, HilbertError> {
    let mut check = Check::new("support nesting");
    let depth = tree.max_depth();
    for m in 0..=depth {
        for n in 0..=depth {
            let small = support_mn(tree, m, n)?;
            for j in m..=depth {
                let Some(k) = (j + n).checked_sub(m).filter(|&k| k <= depth) else { continue };
                let big: BTreeSet<_> = support_mn(tree, j, k)?.into_iter().collect();
                for &(x, y) in &small {
                    if tree.walk(x, j).is_some() {
                        check.expect(big.contains(&(x, y)), || format!("({x}, {y}) in ({m}, {n}) but not ({j}, {k})"));
                    }
                }
            }
        }
    }
    Ok(check.finish())
}

/// `rho_1(f)* rho_1(g)` is the diagonal operator of the fiber inner
/// product `<f, g>(y)`.
fn fiber_inner_product(tree: &OrbitTree, samples: usize, rng: &mut ChaCha8Rng) -> Result<CheckResult, HilbertError> {
    let mut check = Check::new("fiber inner product");
    if tree.max_depth() == 0 {
        return Ok(check.finish());
    }
    for _ in 0..samples {
        let f = SampledFunction::random(tree, rng);
        let g = SampledFunction::random(tree, rng);
        let product = rho_n(tree, &f, 1)?.adjoint().mul(&rho_n(tree, &g, 1)?);
        check.expect(is_diagonal(&product), || "product is not diagonal".into());
        let inner = SampledFunction::new((0..tree.len()).map(|y| kw_inner_product_at(tree, y, &f, &g)).collect());
        check.close(product.max_abs_diff(&rho_n(tree, &inner, 0)?), IDENTITY_TOL, || "inner product mismatch".into());
        let full = (0..tree.len()).filter(|&y| tree.has_full_fiber(y)).count();
        check.expect(full > 0, || "no node with a full fiber".into());
    }
    Ok(check.finish())
}

fn random_word(tree: &OrbitTree, rng: &mut ChaCha8Rng, balanced: bool) -> Result<TreeMatrix, HilbertError> {
    let max_n = tree.max_depth().min(2);
    let len = rng.random_range(1..=4usize);
    let mut word = TreeMatrix::identity(tree.len());
    if balanced {
        // W* W' with W, W' of the same shape is always diagonal
        let n = rng.random_range(0..=max_n);
        let a = rho_n(tree, &SampledFunction::random(tree, rng), n)?;
        let b = rho_n(tree, &SampledFunction::random(tree, rng), n)?;
        return Ok(a.adjoint().mul(&b));
    }
    for _ in 0..len {
        let n = rng.random_range(0..=max_n);
        let letter = rho_n(tree, &SampledFunction::random(tree, rng), n)?;
        word = word.mul(&if rng.random_bool(0.5) { letter.adjoint() } else { letter });
    }
    Ok(word)
}

fn diagonal_words(tree: &OrbitTree, samples: usize, rng: &mut ChaCha8Rng) -> Result<CheckResult, HilbertError> {
    let mut check = Check::new("diagonal words");
    let mut diagonal_seen = 0;
    for s in 0..samples {
        let word = random_word(tree, rng, s % 2 == 0)?;
        if is_diagonal(&word) {
            diagonal_seen += 1;
            let h = SampledFunction::new((0..tree.len()).map(|x| word.get(x, x)).collect());
            check.close(word.max_abs_diff(&rho_n(tree, &h, 0)?), 0.0, || format!("sample {s}"));
            check.expect(delta(&word) == word, || format!("sample {s}: expectation moves a diagonal word"));
        }
    }
    check.expect(diagonal_seen > 0, || "no diagonal word generated".into());
    Ok(check.finish())
}

fn commutant(tree: &OrbitTree, samples: usize, rng: &mut ChaCha8Rng) -> Result<CheckResult, HilbertError> {
    let mut check = Check::new("commutant witness");
    for s in 0..samples {
        let alpha =
            if s % 2 == 0 { random_word(tree, rng, false)? } else { random_sparse(tree.len(), tree.len(), rng) };
        match commutant_witness(&alpha) {
            Some((x, beta)) => {
                check.expect(is_diagonal(&beta), || format!("sample {s}: partner is not diagonal"));
                check.expect(alpha.mul(&beta) != beta.mul(&alpha), || {
                    format!("sample {s}: partner of node {x} commutes")
                });
            }
            None => {
                check.expect(is_diagonal(&alpha), || format!("sample {s}: no witness for a non-diagonal matrix"));
                let d = TreeMatrix::diagonal(SampledFunction::random(tree, rng).values());
                check.close(alpha.mul(&d).max_abs_diff(&d.mul(&alpha)), IDENTITY_TOL, || {
                    format!("sample {s}: diagonals commute")
                });
            }
        }
    }
    Ok(check.finish())
}

fn normalizer(tree: &OrbitTree, samples: usize, rng: &mut ChaCha8Rng) -> Result<CheckResult, HilbertError> {
    let mut check = Check::new("normalizer witness");
    let dim = tree.len();
    for s in 0..samples {
        let alpha = match s % 3 {
            0 => random_quasi_monomial(dim, rng),
            1 => rho_n(tree, &SampledFunction::random(tree, rng), rng.random_range(0..=tree.max_depth().min(2)))?,
            _ => random_sparse(dim, dim, rng),
        };
        let qm = is_quasi_monomial(&alpha);
        match normalizer_witness(&alpha)? {
            NormalizerOutcome::ConjugationStaysDiagonal => {
                check.expect(qm, || format!("sample {s}: non-quasi-monomial matrix reported as normalizing"));
                let h = SampledFunction::random(tree, rng);
                for side in [super::matrix::Side::AdjointFirst, super::matrix::Side::AdjointLast] {
                    check.expect(is_diagonal(&conjugate(&alpha, h.values(), side)), || {
                        format!("sample {s}: conjugate of a random diagonal")
                    });
                }
            }
            NormalizerOutcome::Witness { node, side, entry } => {
                check.expect(!qm, || format!("sample {s}: witness for a quasi-monomial matrix"));
                let h = SampledFunction::indicator(tree, node);
                let conj = conjugate(&alpha, h.values(), side);
                check.expect(entry.0 != entry.1 && conj.get(entry.0, entry.1) != Complex64::new(0.0, 0.0), || {
                    format!("sample {s}: witness entry {entry:?} vanishes")
                });
            }
        }
    }
    Ok(check.finish())
}

fn quasi_monomial_norm(tree: &OrbitTree, samples: usize, rng: &mut ChaCha8Rng) -> Result<CheckResult, HilbertError> {
    let mut check = Check::new("quasi-monomial norm");
    for s in 0..samples {
        let q = random_quasi_monomial(tree.len(), rng);
        check.close((q.operator_norm() - q.max_entry()).abs(), NORM_TOL, || format!("sample {s}: quasi-monomial"));
        let n = rng.random_range(0..=tree.max_depth());
        let f = SampledFunction::random(tree, rng);
        let block = rho_n(tree, &f, n)?;
        let width = max_line_count(&block);
        let bound = width as f64 * block.max_entry();
        check.expect(block.operator_norm() <= bound * (1.0 + NORM_TOL), || {
            format!("sample {s}: fiber block with n = {n}")
        });
    }
    Ok(check.finish())
}

/// Largest number of stored entries in any row or column.
pub fn max_line_count(m: &TreeMatrix) -> usize {
    let mut rows = vec![0usize; m.dim()];
    let mut cols = vec![0usize; m.dim()];
    for ((i, j), _) in m.entries() {
        rows[i] += 1;
        cols[j] += 1;
    }
    rows.into_iter().chain(cols).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{build_orbit_tree, TreeConfig};
    use crate::parse::parse_map;
    use crate::rational::SpherePoint;

    #[test]
    fn suite_passes_on_small_trees() {
        for src in ["z^2", "z^2 - 2", "(z^2 + 1)/(2z)"] {
            let m = parse_map(src).unwrap();
            let cfg = TreeConfig { backward_depth: 3, ..TreeConfig::default() };
            let tree = build_orbit_tree(&m, SpherePoint::finite(Complex64::new(0.3, 0.4)), cfg).unwrap();
            for r in run_identity_suite(&tree, 30, 11).unwrap() {
                assert!(r.passed, "{src}: {} failed: {}", r.name, r.detail);
                assert!(r.cases > 0, "{src}: {} ran no cases", r.name);
            }
        }
    }
}
