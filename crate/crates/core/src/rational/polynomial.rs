use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Operand length (shorter side) at which multiplication switches from
/// schoolbook convolution to FFT convolution.
pub const FFT_THRESHOLD: usize = 64;

/// Dense univariate polynomial with complex coefficients, ascending by power.
///
/// The coefficient vector never ends in an exact zero; the zero polynomial
/// is the empty vector.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<Complex64>) -> Self {
        while coeffs.last().is_some_and(|c| *c == Complex64::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `z`.
    pub fn identity() -> Self {
        Self::from_real(&[0.0, 1.0])
    }

    /// `c * z^k`
    pub fn monomial(c: Complex64, k: usize) -> Self {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Self::new(coeffs)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0 (check [`Polynomial::is_zero`]).
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or_default()
    }

    /// Coefficient of `z^k`, zero beyond the degree.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Largest coefficient modulus.
    pub fn max_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Sum of coefficient moduli.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.fract() == 0.0 && c.im.fract() == 0.0)
    }

    /// Drops leading coefficients whose modulus is at most `rel * max_norm`.
    pub fn trim_relative(&self, rel: f64) -> Self {
        let cutoff = rel * self.max_norm();
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.norm() <= cutoff) {
            coeffs.pop();
        }
        Polynomial::new(coeffs)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value of `sum |a_k| |z|^k`, the natural scale for rounding error in
    /// [`Polynomial::eval`].
    pub fn eval_abs(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    /// Homogeneous evaluation of the degree-`d` form `sum a_i z^i w^(d-i)`.
    ///
    /// `d` must be at least the degree. Scaled so neither branch overflows
    /// when `max(|z|, |w|) = 1`.
    pub fn eval_homogeneous(&self, d: usize, z: Complex64, w: Complex64) -> Complex64 {
        debug_assert!(self.is_zero() || self.degree() <= d);
        if z.norm() <= w.norm() {
            let t = z / w;
            self.eval(t) * w.powu(d as u32)
        } else {
            let t = w / z;
            // sum a_i z^i w^(d-i) = z^d sum a_i t^(d-i)
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..=d {
                acc = acc * t + self.coeff(i);
            }
            // `acc` now holds sum_i a_i t^(d-i) via Horner on reversed order
            acc * z.powu(d as u32)
        }
    }

    /// Partial derivatives of the degree-`d` homogeneous form at `(z, w)`.
    pub fn homogeneous_gradient(&self, d: usize, z: Complex64, w: Complex64) -> (Complex64, Complex64) {
        let mut dz = Complex64::new(0.0, 0.0);
        let mut dw = Complex64::new(0.0, 0.0);
        for (i, &a) in self.coeffs.iter().enumerate() {
            if i > 0 {
                dz += a * (i as f64) * z.powu(i as u32 - 1) * w.powu((d - i) as u32);
            }
            if i < d {
                dw += a * ((d - i) as f64) * z.powu(i as u32) * w.powu((d - i - 1) as u32);
            }
        }
        (dz, dw)
    }

    pub fn derivative(&self) -> Self {
        Polynomial::new(self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| c * k as f64).collect())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Polynomial::new(self.coeffs.iter().map(|&a| a * c).collect())
    }

    /// Taylor coefficients at `x`: the polynomial `q(t) = p(x + t)`.
    pub fn shift(&self, x: Complex64) -> Self {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let upper = c[j + 1];
                c[j] += x * upper;
            }
        }
        Polynomial::new(c)
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &Polynomial) -> (Polynomial, Polynomial) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        if self.coeffs.len() < divisor.coeffs.len() {
            return (Polynomial::zero(), self.clone());
        }
        let dl = divisor.leading();
        let dn = divisor.degree();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![Complex64::new(0.0, 0.0); rem.len() - dn];
        for k in (0..quot.len()).rev() {
            let q = rem[k + dn] / dl;
            quot[k] = q;
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= q * dc;
            }
            rem[k + dn] = Complex64::new(0.0, 0.0);
        }
        rem.truncate(dn);
        (Polynomial::new(quot), Polynomial::new(rem))
    }

    /// Divides out `(z - r)` once, discarding the remainder.
    pub fn deflate(&self, r: Complex64) -> Polynomial {
        if self.coeffs.len() <= 1 {
            return Polynomial::zero();
        }
        let n = self.coeffs.len();
        let mut out = vec![Complex64::new(0.0, 0.0); n - 1];
        let mut carry = Complex64::new(0.0, 0.0);
        for k in (1..n).rev() {
            carry = self.coeffs[k] + carry * r;
            out[k - 1] = carry;
        }
        Polynomial::new(out)
    }

    pub fn pow(&self, mut e: u32) -> Polynomial {
        let mut base = self.clone();
        let mut acc = Polynomial::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Coefficient-wise closeness relative to the larger max-norm.
    pub fn approx_eq(&self, other: &Polynomial, rel: f64) -> bool {
        let scale = self.max_norm().max(other.max_norm()).max(f64::MIN_POSITIVE);
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n).all(|k| (self.coeff(k) - other.coeff(k)).norm() <= rel * scale)
    }
}

fn schoolbook(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn fft_convolve(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let len = a.len() + b.len() - 1;
    let size = len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);

    let mut fa = a.to_vec();
    fa.resize(size, Complex64::new(0.0, 0.0));
    let mut fb = b.to_vec();
    fb.resize(size, Complex64::new(0.0, 0.0));
    forward.process(&mut fa);
    forward.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    inverse.process(&mut fa);
    let inv = 1.0 / size as f64;
    fa.truncate(len);
    for x in fa.iter_mut() {
        *x *= inv;
    }
    fa
}

/// Exact integer products stay below this bound, so rounding FFT output
/// recovers them.
const EXACT_INTEGER_BOUND: f64 = (1u64 << 50) as f64;

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let (a, b) = (&self.coeffs, &rhs.coeffs);
        if a.len().min(b.len()) < FFT_THRESHOLD {
            return Polynomial::new(schoolbook(a, b));
        }
        let mut out = fft_convolve(a, b);
        if self.is_integral() && rhs.is_integral() && self.l1_norm() * rhs.l1_norm() < EXACT_INTEGER_BOUND {
            for c in out.iter_mut() {
                *c = Complex64::new(c.re.round(), c.im.round());
            }
        }
        Polynomial::new(out)
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: Polynomial) -> Polynomial {
        &self + &rhs
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: Polynomial) -> Polynomial {
        &self - &rhs
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

pub(crate) fn fmt_complex(c: Complex64) -> String {
    match (c.re == 0.0, c.im == 0.0) {
        (_, true) => format!("{}", c.re),
        (true, false) => format!("{}i", c.im),
        (false, false) => {
            let sign = if c.im < 0.0 { "-" } else { "+" };
            format!("({}{}{}i)", c.re, sign, c.im.abs())
        }
    }
}

/// Re-parseable text form, e.g. `1*z^2 + -2`.
impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, &c) in self.coeffs.iter().enumerate().rev() {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let coeff = fmt_complex(c);
            let coeff = if coeff.starts_with('-') { format!("({coeff})") } else { coeff };
            match k {
                0 => write!(f, "{coeff}")?,
                1 => write!(f, "{coeff}*z")?,
                _ => write!(f, "{coeff}*z^{k}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[f64; 2]> = self.coeffs.iter().map(|c| [c.re, c.im]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(Polynomial::new(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect()))
    }
}
