//! Exact arithmetic over the Gaussian rationals `Q(i)`.
//!
//! Used for gcd, coprimality and square-free splitting whenever every
//! coefficient is a short dyadic rational (integers, literals such as
//! `0.5`, and exact products of those), and by the parser, which evaluates
//! literals exactly.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::Polynomial;

/// Largest degree handled by the exact path; beyond it coefficient growth
/// in Euclid's algorithm is not worth the cost.
pub const EXACT_DEGREE_LIMIT: usize = 64;

/// Floats with more significant bits than this are taken to carry rounding
/// error and are left to the numeric path.
const DYADIC_SIGNIFICANT_BITS: u32 = 40;
const DYADIC_MAX: f64 = (1u64 << 40) as f64;
/// 2^-64
const DYADIC_MIN: f64 = 5.421010862427522e-20;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GaussRat {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRat {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRat { re, im }
    }

    pub fn zero() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        GaussRat::new(BigRational::one(), BigRational::zero())
    }

    pub fn i() -> Self {
        GaussRat::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_integer(n: i64) -> Self {
        GaussRat::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    pub fn real(r: BigRational) -> Self {
        GaussRat::new(r, BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// Exact value of an `f64` pair whose parts have at most 40 significant
    /// bits and moderate magnitude, `None` otherwise.
    pub fn from_dyadic(c: Complex64) -> Option<Self> {
        fn part(x: f64) -> Option<BigRational> {
            if x == 0.0 {
                return Some(BigRational::zero());
            }
            if !x.is_normal() || x.abs() > DYADIC_MAX || x.abs() < DYADIC_MIN {
                return None;
            }
            let significand = (x.to_bits() & ((1u64 << 52) - 1)) | (1u64 << 52);
            if 53 - significand.trailing_zeros() > DYADIC_SIGNIFICANT_BITS {
                return None;
            }
            BigRational::from_float(x)
        }
        Some(GaussRat::new(part(c.re)?, part(c.im)?))
    }

    pub fn to_complex(&self) -> Complex64 {
        Complex64::new(self.re.to_f64().unwrap_or(f64::NAN), self.im.to_f64().unwrap_or(f64::NAN))
    }

    pub fn conj(&self) -> Self {
        GaussRat::new(self.re.clone(), -self.im.clone())
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let n = &self.re * &self.re + &self.im * &self.im;
        Some(GaussRat::new(&self.re / &n, -(&self.im / &n)))
    }

    pub fn magnitude_hint(&self) -> f64 {
        self.re.abs().to_f64().unwrap_or(f64::INFINITY) + self.im.abs().to_f64().unwrap_or(f64::INFINITY)
    }
}

impl Add for &GaussRat {
    type Output = GaussRat;
    fn add(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re + &o.re, &self.im + &o.im)
    }
}

impl Sub for &GaussRat {
    type Output = GaussRat;
    fn sub(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re - &o.re, &self.im - &o.im)
    }
}

impl Mul for &GaussRat {
    type Output = GaussRat;
    fn mul(self, o: &GaussRat) -> GaussRat {
        GaussRat::new(&self.re * &o.re - &self.im * &o.im, &self.re * &o.im + &self.im * &o.re)
    }
}

impl Neg for &GaussRat {
    type Output = GaussRat;
    fn neg(self) -> GaussRat {
        GaussRat::new(-self.re.clone(), -self.im.clone())
    }
}

/// Polynomial over `Q(i)`, ascending, without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ExactPoly {
    coeffs: Vec<GaussRat>,
}

impl ExactPoly {
    pub fn new(mut coeffs: Vec<GaussRat>) -> Self {
        while coeffs.last().is_some_and(GaussRat::is_zero) {
            coeffs.pop();
        }
        ExactPoly { coeffs }
    }

    pub fn zero() -> Self {
        ExactPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: GaussRat) -> Self {
        ExactPoly::new(vec![c])
    }

    pub fn one() -> Self {
        ExactPoly::constant(GaussRat::one())
    }

    pub fn var() -> Self {
        ExactPoly::new(vec![GaussRat::zero(), GaussRat::one()])
    }

    /// Exact image of a float polynomial when every coefficient is small dyadic
    /// and the degree is within [`EXACT_DEGREE_LIMIT`].
    pub fn from_polynomial(p: &Polynomial) -> Option<Self> {
        if p.degree() > EXACT_DEGREE_LIMIT {
            return None;
        }
        p.coeffs().iter().map(|&c| GaussRat::from_dyadic(c)).collect::<Option<Vec<_>>>().map(ExactPoly::new)
    }

    pub fn to_polynomial(&self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(GaussRat::to_complex).collect())
    }

    pub fn coeffs(&self) -> &[GaussRat] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> GaussRat {
        self.coeffs.last().cloned().unwrap_or_else(GaussRat::zero)
    }

    pub fn scale(&self, c: &GaussRat) -> Self {
        ExactPoly::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    pub fn monic(&self) -> Self {
        match self.leading().inv() {
            Some(inv) => self.scale(&inv),
            None => ExactPoly::zero(),
        }
    }

    pub fn derivative(&self) -> Self {
        ExactPoly::new(
            self.coeffs.iter().enumerate().skip(1).map(|(k, c)| c * &GaussRat::from_integer(k as i64)).collect(),
        )
    }

    pub fn mul(&self, o: &ExactPoly) -> ExactPoly {
        if self.is_zero() || o.is_zero() {
            return ExactPoly::zero();
        }
        let mut out = vec![GaussRat::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        ExactPoly::new(out)
    }

    pub fn add(&self, o: &ExactPoly) -> ExactPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        let z = GaussRat::zero();
        ExactPoly::new((0..n).map(|k| self.coeffs.get(k).unwrap_or(&z) + o.coeffs.get(k).unwrap_or(&z)).collect())
    }

    pub fn sub(&self, o: &ExactPoly) -> ExactPoly {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> ExactPoly {
        ExactPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn pow(&self, mut e: u32) -> ExactPoly {
        let mut base = self.clone();
        let mut acc = ExactPoly::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Euclidean division; `None` on a zero divisor.
    pub fn div_rem(&self, d: &ExactPoly) -> Option<(ExactPoly, ExactPoly)> {
        let inv_lead = d.leading().inv()?;
        if self.coeffs.len() < d.coeffs.len() {
            return Some((ExactPoly::zero(), self.clone()));
        }
        let dn = d.degree();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![GaussRat::zero(); rem.len() - dn];
        for k in (0..quot.len()).rev() {
            let q = &rem[k + dn] * &inv_lead;
            if !q.is_zero() {
                for (j, dc) in d.coeffs.iter().enumerate() {
                    rem[k + j] = &rem[k + j] - &(&q * dc);
                }
            }
            quot[k] = q;
        }
        rem.truncate(dn);
        Some((ExactPoly::new(quot), ExactPoly::new(rem)))
    }

    /// Monic greatest common divisor (zero only when both inputs are zero).
    pub fn gcd(&self, o: &ExactPoly) -> ExactPoly {
        let (mut a, mut b) = (self.clone(), o.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b).expect("non-zero divisor");
            a = b;
            // keep remainders monic to slow coefficient growth
            b = r.monic();
        }
        a.monic()
    }

    /// Yun's square-free decomposition: `self = c * prod_k factors[k-1]^k`.
    /// Entry `k-1` is the (monic, possibly constant) factor of multiplicity `k`.
    pub fn squarefree_decomposition(&self) -> Vec<ExactPoly> {
        if self.degree() == 0 {
            return Vec::new();
        }
        let d = self.derivative();
        let a0 = self.gcd(&d);
        let mut b = self.div_rem(&a0).expect("gcd is non-zero").0;
        let mut c = d.div_rem(&a0).expect("gcd is non-zero").0;
        let mut out = Vec::new();
        loop {
            let dd = c.sub(&b.derivative());
            let a = b.gcd(&dd);
            out.push(a.clone());
            b = b.div_rem(&a).expect("gcd is non-zero").0;
            if b.degree() == 0 {
                break;
            }
            c = dd.div_rem(&a).expect("gcd is non-zero").0;
        }
        while out.last().is_some_and(|f| f.degree() == 0) {
            out.pop();
        }
        out
    }

    pub fn eval(&self, z: &GaussRat) -> GaussRat {
        self.coeffs.iter().rev().fold(GaussRat::zero(), |acc, c| &(&acc * z) + c)
    }
}
