use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matrix::TreeMatrix;
use super::tree::OrbitTree;
use super::HilbertError;
use crate::dynamics::{branch_index, preimages};
use crate::rational::{RationalMap, SpherePoint};

/// A function on the nodes of a tree.
#[derive(Clone, Debug, PartialEq)]
pub struct SampledFunction {
    values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(values: Vec<Complex64>) -> Self {
        SampledFunction { values }
    }

    pub fn constant(tree: &OrbitTree, c: Complex64) -> Self {
        SampledFunction { values: vec![c; tree.len()] }
    }

    pub fn indicator(tree: &OrbitTree, node: usize) -> Self {
        let mut values = vec![Complex64::new(0.0, 0.0); tree.len()];
        values[node] = Complex64::new(1.0, 0.0);
        SampledFunction { values }
    }

    /// Samples `f` at every node.
    pub fn from_points(tree: &OrbitTree, f: impl Fn(&SpherePoint) -> Complex64) -> Self {
        SampledFunction { values: tree.nodes().iter().map(|n| f(&n.point)).collect() }
    }

    /// Independent values with real and imaginary parts uniform in `[-1, 1)`.
    pub fn random(tree: &OrbitTree, rng: &mut ChaCha8Rng) -> Self {
        SampledFunction {
            values: (0..tree.len())
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        }
    }

    pub fn seeded(tree: &OrbitTree, seed: u64) -> Self {
        Self::random(tree, &mut ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn at(&self, node: usize) -> Complex64 {
        self.values[node]
    }
}

fn check_depth(tree: &OrbitTree, n: usize) -> Result<(), HilbertError> {
    if n > tree.max_depth() {
        Err(HilbertError::DepthExceeded { depth: n, max: tree.max_depth() })
    } else {
        Ok(())
    }
}

/// `rho_n(f)`: entry `(x, y)` is `f(x)` when the tree realizes `R^n(x) = y`.
/// `rho_0` is the diagonal action.
pub fn rho_n(tree: &OrbitTree, f: &SampledFunction, n: usize) -> Result<TreeMatrix, HilbertError> {
    check_depth(tree, n)?;
    Ok(TreeMatrix::from_entries(tree.len(), (0..tree.len()).filter_map(|x| tree.walk(x, n).map(|y| ((x, y), f.at(x))))))
}

/// Pairs `(x, y)` of nodes with `R^m(x) = R^n(y)` on the tree.
pub fn support_mn(tree: &OrbitTree, m: usize, n: usize) -> Result<Vec<(usize, usize)>, HilbertError> {
    check_depth(tree, m)?;
    check_depth(tree, n)?;
    let mut by_image: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for y in 0..tree.len() {
        if let Some(z) = tree.walk(y, n) {
            by_image.entry(z).or_default().push(y);
        }
    }
    let mut out = Vec::new();
    for x in 0..tree.len() {
        if let Some(ys) = tree.walk(x, m).and_then(|z| by_image.get(&z)) {
            out.extend(ys.iter().map(|&y| (x, y)));
        }
    }
    Ok(out)
}

/// `rho_{m,n}(h)`: entry `(x, y)` is `h(x, y)` when `R^m(x) = R^n(y)` on the tree.
pub fn rho_mn(
    tree: &OrbitTree,
    h: impl Fn(usize, usize) -> Complex64,
    m: usize,
    n: usize,
) -> Result<TreeMatrix, HilbertError> {
    let support = support_mn(tree, m, n)?;
    Ok(TreeMatrix::from_entries(tree.len(), support.into_iter().map(|(x, y)| ((x, y), h(x, y)))))
}

/// Distinct preimages of `y` with their local degrees.
pub fn fiber_of(map: &RationalMap, y: &SpherePoint) -> Result<Vec<(SpherePoint, usize)>, HilbertError> {
    let mut out: Vec<(SpherePoint, usize)> = Vec::new();
    for p in preimages(map, y)? {
        if !out.iter().any(|(q, _)| q.distance(&p) <= 1e-7) {
            out.push((p, branch_index(map, &p)));
        }
    }
    Ok(out)
}

/// `sum_x e(x) conj(f(x)) g(x)` over a fiber given with local degrees.
pub fn kw_inner_product(
    fiber: &[(SpherePoint, usize)],
    f: impl Fn(&SpherePoint) -> Complex64,
    g: impl Fn(&SpherePoint) -> Complex64,
) -> Complex64 {
    fiber.iter().map(|(x, e)| f(x).conj() * g(x) * *e as f64).sum()
}

/// The fiber inner product of node functions at tree node `y`, over its
/// tree preimages (all of local degree 1 on a screened tree).
pub fn kw_inner_product_at(tree: &OrbitTree, y: usize, f: &SampledFunction, g: &SampledFunction) -> Complex64 {
    tree.fiber(y).iter().map(|&x| f.at(x).conj() * g.at(x)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{build_orbit_tree, TreeConfig};
    use crate::parse::parse_map;

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    fn z2_tree() -> OrbitTree {
        let m = parse_map("z^2").unwrap();
        build_orbit_tree(&m, SpherePoint::finite(Complex64::new(0.7, 0.3)), TreeConfig::default()).unwrap()
    }

    #[test]
    fn rho_zero_of_one_is_identity() {
        let t = z2_tree();
        let m = rho_n(&t, &SampledFunction::constant(&t, one()), 0).unwrap();
        assert_eq!(m, TreeMatrix::identity(t.len()));
    }

    #[test]
    fn rho_one_pairs_nodes_with_their_squares() {
        let t = z2_tree();
        let f = SampledFunction::seeded(&t, 3);
        let m = rho_n(&t, &f, 1).unwrap();
        for ((x, y), v) in m.entries() {
            assert_eq!(v, f.at(x));
            let sq = t.point(x).to_complex().unwrap().powi(2);
            assert!((sq - t.point(y).to_complex().unwrap()).norm() < 1e-8);
        }
        assert_eq!(m.nnz(), t.len() - 1);
    }

    #[test]
    fn depth_is_bounded() {
        let t = z2_tree();
        let f = SampledFunction::constant(&t, one());
        assert!(matches!(rho_n(&t, &f, t.max_depth() + 1), Err(HilbertError::DepthExceeded { .. })));
    }

    #[test]
    fn rho_mn_examples() {
        let t = z2_tree();
        let diag = rho_mn(&t, |x, y| if x == y { Complex64::new(x as f64 + 1.0, 0.0) } else { one() }, 0, 0).unwrap();
        assert!(crate::hilbert::is_diagonal(&diag));
        let (x0, y0) = (t.fiber(0)[0], t.fiber(0)[1]);
        let single =
            rho_mn(&t, |x, y| if (x, y) == (x0, y0) { one() } else { Complex64::new(0.0, 0.0) }, 1, 1).unwrap();
        assert_eq!(single.nnz(), 1);
    }

    #[test]
    fn fiber_inner_products() {
        let z2 = parse_map("z^2").unwrap();
        let generic = fiber_of(&z2, &SpherePoint::real(0.49)).unwrap();
        assert_eq!(kw_inner_product(&generic, |_| one(), |_| one()), Complex64::new(2.0, 0.0));
        let branched = fiber_of(&z2, &SpherePoint::real(0.0)).unwrap();
        assert_eq!(branched.len(), 1);
        assert_eq!(kw_inner_product(&branched, |_| one(), |_| one()), Complex64::new(2.0, 0.0));
        let left = generic[0].0;
        let f = |p: &SpherePoint| if p.distance(&left) < 1e-9 { one() } else { Complex64::new(0.0, 0.0) };
        let g = |p: &SpherePoint| if p.distance(&left) < 1e-9 { Complex64::new(0.0, 0.0) } else { one() };
        assert_eq!(kw_inner_product(&generic, f, g), Complex64::new(0.0, 0.0));
    }
}
