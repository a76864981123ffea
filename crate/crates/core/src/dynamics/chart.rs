//! Local computations on the sphere that need no choice of affine chart at
//! the source point: local degree and cycle derivatives.

use num_complex::Complex64;

use crate::rational::{Polynomial, RationalMap, SpherePoint};

/// Relative tolerance for deciding that a Taylor coefficient vanishes.
pub const BRANCH_TOL: f64 = 1e-8;

/// Local degree `e_R(p)`: the order of vanishing of `R(q) - R(p)` at `q = p`.
///
/// Works on the line `p + t u` in `C^2` with `u` orthogonal to `p`, which is
/// a chart around `p` for every `p`, including poles and infinity. With
/// `A(t), B(t)` the homogeneous forms along the line,
/// `D(t) = B(0) A(t) - A(0) B(t)` vanishes at `0` to order exactly `e_R(p)`.
pub fn branch_index(map: &RationalMap, p: &SpherePoint) -> usize {
    branch_index_tol(map, p, BRANCH_TOL)
}

pub fn branch_index_tol(map: &RationalMap, p: &SpherePoint, tol: f64) -> usize {
    let d = map.degree();
    let u = (-p.w().conj(), p.z().conj());
    let a = along_line(map.numerator(), d, (p.z(), p.w()), u);
    let b = along_line(map.denominator(), d, (p.z(), p.w()), u);
    let abs = |c: Complex64| Complex64::new(c.norm(), 0.0);
    let a_bar = along_line(&abs_poly(map.numerator()), d, (abs(p.z()), abs(p.w())), (abs(u.0), abs(u.1)));
    let b_bar = along_line(&abs_poly(map.denominator()), d, (abs(p.z()), abs(p.w())), (abs(u.0), abs(u.1)));
    let (a0, b0) = (a.coeff(0), b.coeff(0));
    (1..=d)
        .find(|&k| {
            let dk = b0 * a.coeff(k) - a0 * b.coeff(k);
            let scale = b0.norm() * a_bar.coeff(k).re + a0.norm() * b_bar.coeff(k).re;
            dk.norm() > tol * scale
        })
        .unwrap_or(d)
}

fn abs_poly(p: &Polynomial) -> Polynomial {
    Polynomial::new(p.coeffs().iter().map(|c| Complex64::new(c.norm(), 0.0)).collect())
}

/// Coefficients in `t` of `F(p + t u)`, where `F` is `f` homogenized to degree `d`.
fn along_line(f: &Polynomial, d: usize, p: (Complex64, Complex64), u: (Complex64, Complex64)) -> Polynomial {
    let lz = Polynomial::new(vec![p.0, u.0]);
    let lw = Polynomial::new(vec![p.1, u.1]);
    let mut z_pows = vec![Polynomial::one()];
    let mut w_pows = vec![Polynomial::one()];
    for _ in 0..d {
        z_pows.push(z_pows.last().unwrap() * &lz);
        w_pows.push(w_pows.last().unwrap() * &lw);
    }
    let mut acc = Polynomial::zero();
    for (i, &c) in f.coeffs().iter().enumerate() {
        if c != Complex64::new(0.0, 0.0) {
            acc = &acc + &(&z_pows[i] * &w_pows[d - i]).scale(c);
        }
    }
    acc
}

/// Derivative of `R` at `p` read in the standard chart at `p` (`t -> [t:1]`
/// when `|z| <= |w|`, else `t -> [1:t]`) and the standard chart at
/// `target`, which must be (close to) `R(p)`.
///
/// Products of these along a cycle are chart independent.
pub fn chart_derivative(map: &RationalMap, p: &SpherePoint, target: &SpherePoint) -> Complex64 {
    let d = map.degree();
    let (z, w) = (p.z(), p.w());
    let (a, b) = map.eval_forms(z, w);
    let (pz, pw) = map.numerator().homogeneous_gradient(d, z, w);
    let (qz, qw) = map.denominator().homogeneous_gradient(d, z, w);
    let (da, db) = if p.in_finite_chart() { (pz, qz) } else { (pw, qw) };
    if target.in_finite_chart() {
        (da * b - a * db) / (b * b)
    } else {
        (db * a - b * da) / (a * a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_map;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn branch_index_examples() {
        let z3 = parse_map("z^3").unwrap();
        assert_eq!(branch_index(&z3, &SpherePoint::real(0.0)), 3);
        let z2 = parse_map("z^2").unwrap();
        assert_eq!(branch_index(&z2, &SpherePoint::real(1.0)), 1);
        assert_eq!(branch_index(&z2, &SpherePoint::infinity()), 2);
        assert_eq!(branch_index(&z3, &SpherePoint::infinity()), 3);
    }

    #[test]
    fn branch_index_at_poles() {
        // double pole at 0, simple pole at 1
        let m = parse_map("(z^3 + 1)/(z^2 (z - 1))").unwrap();
        assert_eq!(branch_index(&m, &SpherePoint::real(0.0)), 2);
        assert_eq!(branch_index(&m, &SpherePoint::real(1.0)), 1);
        let inv = parse_map("1/z^2").unwrap();
        assert_eq!(branch_index(&inv, &SpherePoint::real(0.0)), 2);
        assert_eq!(branch_index(&inv, &SpherePoint::infinity()), 2);
    }

    #[test]
    fn chart_derivative_in_both_charts() {
        let m = parse_map("z^2 - 2").unwrap();
        let two = SpherePoint::real(2.0);
        assert!((chart_derivative(&m, &two, &two) - c(4.0, 0.0)).norm() < 1e-12);
        let z2 = parse_map("z^2").unwrap();
        let inf = SpherePoint::infinity();
        assert_eq!(chart_derivative(&z2, &inf, &inf), c(0.0, 0.0));
        // 1/z swaps 0 and infinity; the 2-cycle has multiplier 1
        let inv = parse_map("1/z").unwrap();
        let zero = SpherePoint::real(0.0);
        let product = chart_derivative(&inv, &zero, &inf) * chart_derivative(&inv, &inf, &zero);
        assert!((product - c(1.0, 0.0)).norm() < 1e-12);
    }
}
