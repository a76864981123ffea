use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::exact::ExactPoly;
use super::{Polynomial, RationalError, SpherePoint};
use crate::roots;

/// Default cap on the degree of composed maps (coefficient count minus one).
pub const DEFAULT_DEGREE_CAP: usize = 4096;

/// Relative size under which both homogeneous forms count as vanishing.
const DEGENERATE_REL: f64 = 1e-14;

/// Quotient `P / Q` of coprime polynomials, viewed as a self-map of the sphere.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RationalMap {
    numerator: Polynomial,
    denominator: Polynomial,
    degree: usize,
}

impl RationalMap {
    /// Builds `P / Q`, cancelling any common factor.
    ///
    /// The cancellation is exact when all coefficients are small dyadic
    /// rationals and numeric (shared roots within clustering tolerance)
    /// otherwise.
    pub fn new(numerator: Polynomial, denominator: Polynomial) -> Result<Self, RationalError> {
        if denominator.is_zero() {
            return Err(RationalError::ZeroDenominator);
        }
        let finite = |p: &Polynomial| p.coeffs().iter().all(|c| c.is_finite());
        if !finite(&numerator) || !finite(&denominator) {
            return Err(RationalError::NonFiniteCoefficient);
        }
        let (p, q) = reduce(numerator, denominator);
        Ok(Self::from_coprime(p, q))
    }

    /// Builds a map from parts the caller knows to be coprime.
    pub(crate) fn from_coprime(numerator: Polynomial, denominator: Polynomial) -> Self {
        let degree =
            if numerator.is_zero() { denominator.degree() } else { numerator.degree().max(denominator.degree()) };
        RationalMap { numerator, denominator, degree }
    }

    pub fn polynomial(p: Polynomial) -> Self {
        Self::from_coprime(p, Polynomial::one())
    }

    /// The identity map `z`.
    pub fn identity() -> Self {
        Self::polynomial(Polynomial::identity())
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.numerator
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.denominator
    }

    /// `max(deg P, deg Q)`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_polynomial(&self) -> bool {
        self.denominator.degree() == 0
    }

    /// Homogeneous evaluation `[P^(z, w) : Q^(z, w)]`.
    pub fn eval(&self, p: &SpherePoint) -> Result<SpherePoint, RationalError> {
        let (a, b) = self.eval_forms(p.z(), p.w());
        let scale = self.numerator.l1_norm() + self.denominator.l1_norm();
        if a.norm().max(b.norm()) <= DEGENERATE_REL * scale {
            return Err(RationalError::DegenerateEvaluation { point: *p });
        }
        SpherePoint::new(a, b).ok_or(RationalError::DegenerateEvaluation { point: *p })
    }

    /// The raw homogeneous pair `(P^(z, w), Q^(z, w))`.
    pub fn eval_forms(&self, z: Complex64, w: Complex64) -> (Complex64, Complex64) {
        let d = self.degree;
        (self.numerator.eval_homogeneous(d, z, w), self.denominator.eval_homogeneous(d, z, w))
    }

    /// Affine evaluation; `None` at poles.
    pub fn eval_finite(&self, z: Complex64) -> Option<Complex64> {
        let q = self.denominator.eval(z);
        if q == Complex64::new(0.0, 0.0) {
            None
        } else {
            Some(self.numerator.eval(z) / q)
        }
    }

    /// `(P'Q - PQ') / Q^2` in lowest terms.
    pub fn derivative(&self) -> RationalMap {
        let num =
            &(&self.numerator.derivative() * &self.denominator) - &(&self.numerator * &self.denominator.derivative());
        let den = &self.denominator * &self.denominator;
        if num.is_zero() {
            return Self::from_coprime(Polynomial::zero(), Polynomial::one());
        }
        RationalMap::new(num, den).expect("Q^2 is non-zero")
    }

    /// The unreduced critical polynomial `P'Q - PQ'`.
    ///
    /// Its roots (with multiplicity) together with its degree deficiency
    /// below `2d - 2` account for `e_R(x) - 1` at every point, poles and
    /// infinity included.
    pub fn wronskian(&self) -> Polynomial {
        &(&self.numerator.derivative() * &self.denominator) - &(&self.numerator * &self.denominator.derivative())
    }

    /// `self ∘ inner` with the default degree cap.
    pub fn compose(&self, inner: &RationalMap) -> Result<RationalMap, RationalError> {
        self.compose_capped(inner, DEFAULT_DEGREE_CAP)
    }

    /// `self ∘ inner` via homogeneous substitution. The homogeneous pair of a
    /// composition of coprime pairs is again coprime, so no reduction is needed.
    pub fn compose_capped(&self, inner: &RationalMap, cap: usize) -> Result<RationalMap, RationalError> {
        let d = self.degree;
        let degree = d.saturating_mul(inner.degree);
        if degree > cap {
            return Err(RationalError::SizeCapExceeded { degree, cap });
        }
        let (gp, gq) = (&inner.numerator, &inner.denominator);
        let mut p_pows = vec![Polynomial::one()];
        let mut q_pows = vec![Polynomial::one()];
        for k in 1..=d {
            p_pows.push(&p_pows[k - 1] * gp);
            q_pows.push(&q_pows[k - 1] * gq);
        }
        let mut num = Polynomial::zero();
        let mut den = Polynomial::zero();
        for i in 0..=d {
            let (a, b) = (self.numerator.coeff(i), self.denominator.coeff(i));
            if a == Complex64::new(0.0, 0.0) && b == Complex64::new(0.0, 0.0) {
                continue;
            }
            let term = &p_pows[i] * &q_pows[d - i];
            if a != Complex64::new(0.0, 0.0) {
                num = &num + &term.scale(a);
            }
            if b != Complex64::new(0.0, 0.0) {
                den = &den + &term.scale(b);
            }
        }
        Ok(Self::from_coprime(num, den))
    }

    /// `n`-fold iterate with the default cap; `R^0` is the identity.
    pub fn iterate(&self, n: u32) -> Result<RationalMap, RationalError> {
        self.iterate_capped(n, DEFAULT_DEGREE_CAP)
    }

    pub fn iterate_capped(&self, n: u32, cap: usize) -> Result<RationalMap, RationalError> {
        let degree = (self.degree as u128).saturating_pow(n);
        if degree > cap as u128 {
            return Err(RationalError::SizeCapExceeded { degree: usize::try_from(degree).unwrap_or(usize::MAX), cap });
        }
        let mut acc = RationalMap::identity();
        for _ in 0..n {
            acc = self.compose_capped(&acc, cap)?;
        }
        Ok(acc)
    }

    /// Projective equality of maps: `P1 Q2 = P2 Q1` coefficient-wise within
    /// `rel` of the larger coefficient.
    pub fn approx_eq(&self, other: &RationalMap, rel: f64) -> bool {
        let lhs = &self.numerator * &other.denominator;
        let rhs = &other.numerator * &self.denominator;
        lhs.approx_eq(&rhs, rel)
    }

    /// `|Res(P^, Q^)| / (|P|_2^d |Q|_2^d)`, in `[0, 1]` by Hadamard's bound;
    /// zero exactly when the pair shares a root on the sphere.
    pub fn normalized_resultant(&self) -> f64 {
        let d = self.degree;
        if d == 0 {
            return 1.0;
        }
        let n = 2 * d;
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for row in 0..d {
            for k in 0..=d {
                // descending powers
                m[(row, row + k)] = self.numerator.coeff(d - k);
                m[(row + d, row + k)] = self.denominator.coeff(d - k);
            }
        }
        let l2 = |p: &Polynomial| p.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let norm = l2(&self.numerator).powi(d as i32) * l2(&self.denominator).powi(d as i32);
        m.determinant().norm() / norm
    }
}

/// Cancels the common factor of `p` and `q`.
fn reduce(p: Polynomial, q: Polynomial) -> (Polynomial, Polynomial) {
    if p.is_zero() {
        return (p, Polynomial::one());
    }
    if q.degree() == 0 || p.degree() == 0 {
        return (p, q);
    }
    if let (Some(ep), Some(eq)) = (ExactPoly::from_polynomial(&p), ExactPoly::from_polynomial(&q)) {
        let g = ep.gcd(&eq);
        if g.degree() == 0 {
            return (p, q);
        }
        let (np, _) = ep.div_rem(&g).expect("gcd is non-zero");
        let (nq, _) = eq.div_rem(&g).expect("gcd is non-zero");
        return (np.to_polynomial(), nq.to_polynomial());
    }
    reduce_numeric(p, q)
}

fn reduce_numeric(mut p: Polynomial, mut q: Polynomial) -> (Polynomial, Polynomial) {
    let Ok(den_roots) = roots::find_roots(&q) else {
        return (p, q);
    };
    for root in den_roots.roots() {
        let shared = root.multiplicity.min(roots::multiplicity_at(&p, root.location));
        for _ in 0..shared {
            p = p.deflate(root.location);
            q = q.deflate(root.location);
        }
    }
    (p, q)
}

impl fmt::Display for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denominator == Polynomial::one() {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "({}) / ({})", self.numerator, self.denominator)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[f64]) -> Polynomial {
        Polynomial::from_real(c)
    }

    fn z2() -> RationalMap {
        RationalMap::polynomial(poly(&[0.0, 0.0, 1.0]))
    }

    fn z2m2() -> RationalMap {
        RationalMap::polynomial(poly(&[-2.0, 0.0, 1.0]))
    }

    fn inv() -> RationalMap {
        RationalMap::new(poly(&[1.0]), poly(&[0.0, 1.0])).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(z2().eval(&SpherePoint::real(2.0)).unwrap(), SpherePoint::real(4.0));
        assert!(z2().eval(&SpherePoint::infinity()).unwrap().is_infinity());
        assert_eq!(z2m2().eval(&SpherePoint::real(0.0)).unwrap(), SpherePoint::real(-2.0));
        assert!(inv().eval(&SpherePoint::real(0.0)).unwrap().is_infinity());
    }

    #[test]
    fn derivative_examples() {
        let two_z = RationalMap::polynomial(poly(&[0.0, 2.0]));
        assert!(z2().derivative().approx_eq(&two_z, 1e-15));
        assert!(z2m2().derivative().approx_eq(&two_z, 1e-15));
        let expected = RationalMap::new(poly(&[-1.0]), poly(&[0.0, 0.0, 1.0])).unwrap();
        let d = inv().derivative();
        assert!(d.approx_eq(&expected, 1e-15));
        assert_eq!(d.denominator().degree(), 2);
    }

    #[test]
    fn derivative_cancels_repeated_pole() {
        // 1/z^2 -> -2/z^3; unreduced it would be -2z/z^4
        let r = RationalMap::new(poly(&[1.0]), poly(&[0.0, 0.0, 1.0])).unwrap();
        let d = r.derivative();
        assert_eq!(d.denominator().degree(), 3);
        assert_eq!(d.numerator().degree(), 0);
    }

    #[test]
    fn iterate_examples() {
        let z8 = RationalMap::polynomial(Polynomial::monomial(Complex64::new(1.0, 0.0), 8));
        assert!(z2().iterate(3).unwrap().approx_eq(&z8, 0.0));
        assert!(z2m2().iterate(0).unwrap().approx_eq(&RationalMap::identity(), 0.0));
        let expected = RationalMap::polynomial(poly(&[2.0, 0.0, -4.0, 0.0, 1.0]));
        let it = z2m2().iterate(2).unwrap();
        assert!(it.approx_eq(&expected, 0.0));
        assert_eq!(it.degree(), 4);
    }

    #[test]
    fn iterate_respects_cap() {
        assert!(matches!(
            z2().iterate_capped(13, 4096),
            Err(RationalError::SizeCapExceeded { degree: 8192, cap: 4096 })
        ));
    }

    #[test]
    fn compose_examples() {
        let zp1 = RationalMap::polynomial(poly(&[1.0, 1.0]));
        let expected = RationalMap::polynomial(poly(&[1.0, 2.0, 1.0]));
        assert!(z2().compose(&zp1).unwrap().approx_eq(&expected, 0.0));
        assert!(RationalMap::identity().compose(&z2m2()).unwrap().approx_eq(&z2m2(), 0.0));
        let invol = inv().compose(&inv()).unwrap();
        assert!(invol.approx_eq(&RationalMap::identity(), 0.0));
        assert_eq!(invol.degree(), 1);
    }

    #[test]
    fn new_cancels_common_factor_exactly() {
        // (z^2 - 1)/(z - 1) = z + 1
        let r = RationalMap::new(poly(&[-1.0, 0.0, 1.0]), poly(&[-1.0, 1.0])).unwrap();
        assert_eq!(r.numerator(), &poly(&[1.0, 1.0]));
        assert_eq!(r.denominator(), &poly(&[1.0]));
    }

    #[test]
    fn new_cancels_common_factor_numerically() {
        let a = 0.1;
        let p = &poly(&[-a, 1.0]) * &poly(&[0.3, 1.0]);
        let q = &poly(&[-a, 1.0]) * &poly(&[0.7, 0.0, 1.0]);
        let r = RationalMap::new(p, q).unwrap();
        assert_eq!(r.degree(), 2);
        assert_eq!(r.numerator().degree(), 1);
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(matches!(RationalMap::new(poly(&[1.0]), Polynomial::zero()), Err(RationalError::ZeroDenominator)));
    }

    #[test]
    fn resultant_detects_shared_roots() {
        assert!(z2().normalized_resultant() > 0.1);
        let shared = RationalMap::from_coprime(poly(&[-1.0, 0.0, 1.0]), poly(&[-1.0, 1.0]));
        assert!(shared.normalized_resultant() < 1e-12);
    }
}
