use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use serde::{Serialize, Serializer};

/// Default absolute tolerance on the projective cross product.
pub const DEFAULT_PROJECTIVE_TOL: f64 = 1e-9;

static PROJECTIVE_TOL_BITS: AtomicU64 = AtomicU64::new(0x3E11_2E0B_E826_D695); // 1e-9

/// Process-wide tolerance used by [`SpherePoint`] equality.
pub fn projective_tolerance() -> f64 {
    f64::from_bits(PROJECTIVE_TOL_BITS.load(Ordering::Relaxed))
}

/// Overrides the process-wide projective tolerance. Non-positive or
/// non-finite values are ignored.
pub fn set_projective_tolerance(tol: f64) {
    if tol.is_finite() && tol > 0.0 {
        PROJECTIVE_TOL_BITS.store(tol.to_bits(), Ordering::Relaxed);
    }
}

/// Point of the Riemann sphere as a homogeneous pair `[z : w]`.
///
/// Stored normalized: the larger-modulus coordinate is exactly `1`, so
/// finite points with `|a| <= 1` read `[a : 1]`, the rest `[1 : 1/a]`, and
/// infinity is `[1 : 0]`.
#[derive(Clone, Copy, Debug)]
pub struct SpherePoint {
    z: Complex64,
    w: Complex64,
}

impl SpherePoint {
    /// Normalizes `[z : w]`; `None` when both vanish or either is not finite.
    pub fn new(z: Complex64, w: Complex64) -> Option<Self> {
        if !(z.is_finite() && w.is_finite()) {
            return None;
        }
        let (nz, nw) = (z.norm(), w.norm());
        if nz == 0.0 && nw == 0.0 {
            return None;
        }
        Some(if nz <= nw {
            SpherePoint { z: z / w, w: Complex64::new(1.0, 0.0) }
        } else {
            SpherePoint { z: Complex64::new(1.0, 0.0), w: w / z }
        })
    }

    pub fn finite(a: Complex64) -> Self {
        SpherePoint::new(a, Complex64::new(1.0, 0.0)).unwrap_or_else(SpherePoint::infinity)
    }

    pub fn real(x: f64) -> Self {
        SpherePoint::finite(Complex64::new(x, 0.0))
    }

    pub fn infinity() -> Self {
        SpherePoint { z: Complex64::new(1.0, 0.0), w: Complex64::new(0.0, 0.0) }
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    pub fn w(&self) -> Complex64 {
        self.w
    }

    pub fn is_infinity(&self) -> bool {
        self.w == Complex64::new(0.0, 0.0)
    }

    /// Affine coordinate `z / w`, `None` at infinity.
    pub fn to_complex(&self) -> Option<Complex64> {
        if self.is_infinity() {
            None
        } else {
            Some(self.z / self.w)
        }
    }

    /// True when the point lies in the closed unit disk chart (`|z| <= |w|`).
    pub fn in_finite_chart(&self) -> bool {
        self.z.norm() <= self.w.norm()
    }

    /// Modulus of the cross product `z1 w2 - z2 w1` of normalized
    /// representatives; zero exactly for projectively equal points.
    pub fn distance(&self, other: &SpherePoint) -> f64 {
        (self.z * other.w - other.z * self.w).norm()
    }

    pub fn approx_eq(&self, other: &SpherePoint, tol: f64) -> bool {
        self.distance(other) <= tol
    }

    /// Chordal distance on the unit sphere, for diagnostics.
    pub fn chordal(&self, other: &SpherePoint) -> f64 {
        let n1 = (self.z.norm_sqr() + self.w.norm_sqr()).sqrt();
        let n2 = (other.z.norm_sqr() + other.w.norm_sqr()).sqrt();
        2.0 * self.distance(other) / (n1 * n2)
    }

    /// Deterministic total order: finite points by `(re, im)`, infinity last.
    pub fn canonical_cmp(&self, other: &SpherePoint) -> std::cmp::Ordering {
        match (self.to_complex(), other.to_complex()) {
            (None, None) => std::cmp::Ordering::Equal,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (Some(_), None) => std::cmp::Ordering::Less,
            (Some(a), Some(b)) => a.re.total_cmp(&b.re).then_with(|| a.im.total_cmp(&b.im)),
        }
    }
}

impl PartialEq for SpherePoint {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, projective_tolerance())
    }
}

impl fmt::Display for SpherePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.to_complex() {
            None => write!(f, "inf"),
            Some(c) => write!(f, "{}", super::polynomial::fmt_complex(c)),
        }
    }
}

/// `"inf"` or `[re, im]`.
impl Serialize for SpherePoint {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.to_complex() {
            None => s.serialize_str("inf"),
            Some(c) => [c.re, c.im].serialize(s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_tolerance_bits() {
        assert_eq!(f64::from_bits(0x3E11_2E0B_E826_D695), 1e-9);
    }

    #[test]
    fn normalization_and_equality() {
        let p = SpherePoint::new(Complex64::new(4.0, 0.0), Complex64::new(2.0, 0.0)).unwrap();
        assert_eq!(p.to_complex(), Some(Complex64::new(2.0, 0.0)));
        assert_eq!(p.z(), Complex64::new(1.0, 0.0));
        let q = SpherePoint::new(Complex64::new(-6.0, 0.0), Complex64::new(-3.0, 0.0)).unwrap();
        assert_eq!(p, q);
        assert!(SpherePoint::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)).is_none());
        assert!(SpherePoint::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)).unwrap().is_infinity());
    }

    #[test]
    fn serializes_infinity_as_string() {
        assert_eq!(serde_json::to_string(&SpherePoint::infinity()).unwrap(), "\"inf\"");
        assert_eq!(serde_json::to_string(&SpherePoint::real(2.0)).unwrap(), "[2.0,0.0]");
    }
}
