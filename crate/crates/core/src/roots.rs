//! Simultaneous polynomial root finding (Aberth–Ehrlich) with multiplicity
//! recovery.
//!
//! Multiplicities come from an exact square-free split when the coefficients
//! are small dyadic rationals, and from clustering the converged
//! approximations otherwise.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::rational::exact::ExactPoly;
use crate::rational::Polynomial;

/// Relative tolerance used by [`multiplicity_at`].
pub const MULTIPLICITY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RootError {
    #[error("cannot find roots of the zero polynomial")]
    ZeroPolynomial,
    #[error("polynomial degree {degree} exceeds nominal degree {nominal}")]
    DegreeAboveNominal { degree: usize, nominal: usize },
    #[error("root iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct RootConfig {
    pub max_iterations: usize,
    /// Cluster radius is `cluster_rel * (1 + max |root|)`.
    pub cluster_rel: f64,
    /// Bound on `|p(x)| / sum |a_k| |x|^k` for every reported root.
    pub residual_bound: f64,
    pub seed: u64,
}

impl Default for RootConfig {
    fn default() -> Self {
        RootConfig { max_iterations: 2000, cluster_rel: 1e-7, residual_bound: 1e-8, seed: 0x5EED }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub location: Complex64,
    pub multiplicity: usize,
    pub residual: f64,
}

/// Root multiset of a polynomial read as a form of some nominal degree.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    roots: Vec<Root>,
    degree_at_infinity: usize,
}

impl RootSet {
    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    /// Multiplicity of the root at infinity (nominal degree minus actual degree).
    pub fn degree_at_infinity(&self) -> usize {
        self.degree_at_infinity
    }

    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum::<usize>() + self.degree_at_infinity
    }

    /// Every root repeated by multiplicity; infinity excluded.
    pub fn expanded(&self) -> Vec<Complex64> {
        self.roots.iter().flat_map(|r| std::iter::repeat_n(r.location, r.multiplicity)).collect()
    }
}

/// All roots of `p` with the default configuration; nominal degree = `deg p`.
pub fn find_roots(p: &Polynomial) -> Result<RootSet, RootError> {
    find_roots_with(p, p.degree(), &RootConfig::default())
}

/// Roots of `p` viewed as a homogeneous form of degree `nominal`.
pub fn find_roots_nominal(p: &Polynomial, nominal: usize) -> Result<RootSet, RootError> {
    find_roots_with(p, nominal, &RootConfig::default())
}

pub fn find_roots_with(p: &Polynomial, nominal: usize, config: &RootConfig) -> Result<RootSet, RootError> {
    if p.is_zero() {
        return Err(RootError::ZeroPolynomial);
    }
    let degree = p.degree();
    if degree > nominal {
        return Err(RootError::DegreeAboveNominal { degree, nominal });
    }
    let zero = Complex64::new(0.0, 0.0);
    let low_zeros = p.coeffs().iter().take_while(|c| **c == zero).count();
    let rest = Polynomial::new(p.coeffs()[low_zeros..].to_vec());

    let mut found: Vec<(Complex64, usize)> = Vec::with_capacity(degree);
    if low_zeros > 0 {
        found.push((zero, low_zeros));
    }
    if rest.degree() > 0 {
        match ExactPoly::from_polynomial(&rest) {
            Some(exact) => {
                for (k, factor) in exact.squarefree_decomposition().iter().enumerate() {
                    if factor.degree() == 0 {
                        continue;
                    }
                    let simple = aberth(&factor.to_polynomial(), config)?;
                    found.extend(simple.into_iter().map(|z| (z, k + 1)));
                }
            }
            None => {
                let approx = aberth(&rest, config)?;
                found.extend(cluster(&approx, config.cluster_rel));
            }
        }
    }

    let mut roots: Vec<Root> = found
        .into_iter()
        .map(|(location, multiplicity)| {
            let location = flush_rounding_noise(location);
            Root { location, multiplicity, residual: relative_residual(p, location) }
        })
        .collect();
    if roots.iter().any(|r| r.residual.is_nan() || r.residual > config.residual_bound) {
        return Err(RootError::NoConvergence { iterations: config.max_iterations });
    }
    roots.sort_by(|a, b| a.location.re.total_cmp(&b.location.re).then_with(|| a.location.im.total_cmp(&b.location.im)));
    Ok(RootSet { roots, degree_at_infinity: nominal - degree })
}

/// Zeroes a component below the rounding level of the other.
fn flush_rounding_noise(z: Complex64) -> Complex64 {
    let level = 8.0 * f64::EPSILON * z.norm();
    Complex64::new(if z.re.abs() <= level { 0.0 } else { z.re }, if z.im.abs() <= level { 0.0 } else { z.im })
}

fn relative_residual(p: &Polynomial, x: Complex64) -> f64 {
    let scale = p.eval_abs(x);
    if scale == 0.0 {
        0.0
    } else {
        p.eval(x).norm() / scale
    }
}

/// `p(z) / p'(z)`, evaluated on the reversed polynomial outside the unit
/// disk to avoid overflow.
fn newton_ratio(coeffs: &[Complex64], z: Complex64) -> Option<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let n = coeffs.len() - 1;
    if z.norm() <= 1.0 {
        let (mut p, mut dp) = (zero, zero);
        for &a in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + a;
        }
        if p == zero {
            return Some(zero);
        }
        (dp != zero).then(|| p / dp)
    } else {
        let y = z.inv();
        let (mut q, mut dq) = (zero, zero);
        for &a in coeffs.iter() {
            dq = dq * y + q;
            q = q * y + a;
        }
        if q == zero {
            return Some(zero);
        }
        let denom = q * n as f64 - y * dq;
        (denom != zero).then(|| z * q / denom)
    }
}

/// Converged approximations to all `deg p` roots; `p(0) != 0` is not required.
fn aberth(p: &Polynomial, config: &RootConfig) -> Result<Vec<Complex64>, RootError> {
    let n = p.degree();
    let coeffs = p.coeffs();
    match n {
        0 => return Ok(Vec::new()),
        1 => return Ok(vec![-coeffs[0] / coeffs[1]]),
        _ => {}
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let lead = coeffs[n].norm();
    let tail = coeffs[0].norm();
    let radius = if tail > 0.0 {
        (tail / lead).powf(1.0 / n as f64)
    } else {
        // geometric mean from the lowest non-zero coefficient
        let (k, c) = coeffs.iter().enumerate().find(|(_, c)| c.norm() > 0.0).unwrap();
        (c.norm() / lead).powf(1.0 / (n - k) as f64)
    };
    let radius = if radius.is_finite() && radius > 0.0 { radius } else { 1.0 };
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let jitter: f64 = rng.random_range(-0.25..0.25);
            let stretch: f64 = rng.random_range(0.9..1.1);
            let theta = TAU * (k as f64 + 0.5 + jitter) / n as f64 + 0.4;
            Complex64::from_polar(radius * stretch, theta)
        })
        .collect();

    let abs_coeffs = Polynomial::new(coeffs.iter().map(|c| Complex64::new(c.norm(), 0.0)).collect());
    let mut done = vec![false; n];
    for _ in 0..config.max_iterations {
        let mut all_done = true;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let zi = z[i];
            let value = p.eval(zi).norm();
            let noise = 8.0 * f64::EPSILON * abs_coeffs.eval(Complex64::new(zi.norm(), 0.0)).re;
            if value <= noise {
                done[i] = true;
                continue;
            }
            all_done = false;
            let Some(ratio) = newton_ratio(coeffs, zi) else {
                let kick: f64 = rng.random_range(0.0..TAU);
                z[i] = zi + Complex64::from_polar(1e-6 * (1.0 + zi.norm()), kick);
                continue;
            };
            let repulsion: Complex64 =
                z.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &zj)| (zi - zj).inv()).sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                z[i] = zi - step;
                if step.norm() <= 4.0 * f64::EPSILON * zi.norm() {
                    done[i] = true;
                }
            }
        }
        if all_done {
            return Ok(z);
        }
    }
    // Multiple roots stall at the noise floor without meeting either
    // stopping rule; the residual check downstream decides.
    if z.iter().all(|c| c.is_finite()) {
        Ok(z)
    } else {
        Err(RootError::NoConvergence { iterations: config.max_iterations })
    }
}

/// Merges approximations closer than `cluster_rel * (1 + max |z|)`.
fn cluster(approx: &[Complex64], cluster_rel: f64) -> Vec<(Complex64, usize)> {
    let max_mod = approx.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let radius = cluster_rel * (1.0 + max_mod);
    let n = approx.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (approx[i] - approx[j]).norm() <= radius {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b] = a;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Complex64, usize)> = Vec::new();
    for (i, &z) in approx.iter().enumerate().take(n) {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|g| g.0 == r) {
            Some(g) => {
                g.1 += z;
                g.2 += 1;
            }
            None => groups.push((r, z, 1)),
        }
    }
    groups.into_iter().map(|(_, sum, m)| (sum / m as f64, m)).collect()
}

/// Order of vanishing of `p` at `x`: the first Taylor coefficient at `x`
/// that is not negligible against its own rounding scale.
pub fn multiplicity_at(p: &Polynomial, x: Complex64) -> usize {
    multiplicity_at_tol(p, x, MULTIPLICITY_TOL)
}

pub fn multiplicity_at_tol(p: &Polynomial, x: Complex64, tol: f64) -> usize {
    if p.is_zero() {
        return 0;
    }
    let taylor = p.shift(x);
    let magnitudes = Polynomial::new(p.coeffs().iter().map(|c| Complex64::new(c.norm(), 0.0)).collect())
        .shift(Complex64::new(x.norm(), 0.0));
    (0..=p.degree()).find(|&k| taylor.coeff(k).norm() > tol * magnitudes.coeff(k).re).unwrap_or(p.degree())
}
