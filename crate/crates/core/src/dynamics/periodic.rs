use num_complex::Complex64;
use serde::Serialize;

use super::chart::chart_derivative;
use super::DynamicsError;
use crate::rational::{Polynomial, RationalMap, SpherePoint, DEFAULT_DEGREE_CAP};
use crate::roots;

/// Distance under which two computed periodic points are the same point.
pub const CYCLE_MATCH_TOL: f64 = 1e-7;

/// Largest distance from an image to the root it is re-anchored at.
const ORBIT_SNAP_TOL: f64 = 1e-6;

/// Largest relative move allowed while refining a periodic point.
const POLISH_MAX_MOVE: f64 = 1e-4;

const SUPERATTRACTING_TOL: f64 = 1e-9;
const INDIFFERENT_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Character {
    Superattracting,
    Attracting,
    Indifferent,
    Repelling,
}

impl Character {
    pub fn from_multiplier(lambda: Complex64) -> Self {
        let m = lambda.norm();
        if m < SUPERATTRACTING_TOL {
            Character::Superattracting
        } else if m < 1.0 - INDIFFERENT_TOL {
            Character::Attracting
        } else if m > 1.0 + INDIFFERENT_TOL {
            Character::Repelling
        } else {
            Character::Indifferent
        }
    }

    pub fn is_attracting(self) -> bool {
        matches!(self, Character::Attracting | Character::Superattracting)
    }
}

/// A periodic cycle: `points[k+1] = R(points[k])`, `points[0]` the
/// canonically smallest point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleDatum {
    pub period: usize,
    pub representative: SpherePoint,
    pub points: Vec<SpherePoint>,
    #[serde(serialize_with = "crate::serialize_complex")]
    pub multiplier: Complex64,
    pub character: Character,
}

impl CycleDatum {
    pub fn contains(&self, p: &SpherePoint, tol: f64) -> Option<usize> {
        self.points.iter().position(|q| q.distance(p) <= tol)
    }
}

/// Multiplier of `R^period` along the orbit of `start`, as a product of
/// chart derivatives.
pub fn cycle_multiplier(map: &RationalMap, start: &SpherePoint, period: usize) -> Result<Complex64, DynamicsError> {
    let mut lambda = Complex64::new(1.0, 0.0);
    let mut x = *start;
    for _ in 0..period {
        let next = map.eval(&x)?;
        lambda *= chart_derivative(map, &x, &next);
        x = next;
    }
    Ok(lambda)
}

/// All cycles whose period divides `n`, from the fixed points of `R^n`.
///
/// Fixed points are the roots of the degree `d^n + 1` form
/// `z Q_n - w P_n`; a degree deficiency puts a fixed point at infinity.
/// Sorted by period, then representative.
pub fn periodic_points(map: &RationalMap, n: usize) -> Result<Vec<CycleDatum>, DynamicsError> {
    periodic_points_capped(map, n, DEFAULT_DEGREE_CAP)
}

pub fn periodic_points_capped(map: &RationalMap, n: usize, cap: usize) -> Result<Vec<CycleDatum>, DynamicsError> {
    let d = map.degree();
    if d < 1 || n < 1 {
        return Err(DynamicsError::DegreeTooLow { degree: d });
    }
    let iterate = map.iterate_capped(u32::try_from(n).unwrap_or(u32::MAX), cap)?;
    let nominal = iterate.degree() + 1;
    let fixed_form = &(&Polynomial::identity() * iterate.denominator()) - iterate.numerator();
    let mut candidates: Vec<SpherePoint> = Vec::new();
    if fixed_form.is_zero() {
        return Err(DynamicsError::DegreeTooLow { degree: d });
    }
    let found = roots::find_roots_nominal(&fixed_form, nominal)?;
    let polisher = Polisher::new(map);
    for r in found.roots() {
        let p = SpherePoint::finite(polisher.polish(r.location, n));
        if !candidates.iter().any(|c| c.distance(&p) <= CYCLE_MATCH_TOL) {
            candidates.push(p);
        }
    }
    if found.degree_at_infinity() > 0 {
        candidates.push(SpherePoint::infinity());
    }

    // Follow each candidate forward, re-anchoring every image at the
    // nearest candidate so that errors do not grow along repelling cycles.
    let nearest = |y: &SpherePoint| {
        candidates
            .iter()
            .enumerate()
            .map(|(j, c)| (j, c.distance(y)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .filter(|&(_, dist)| dist <= ORBIT_SNAP_TOL)
            .map(|(j, _)| j)
    };
    let mut used = vec![false; candidates.len()];
    let mut cycles = Vec::new();
    for i in 0..candidates.len() {
        if used[i] {
            continue;
        }
        let mut indices = vec![i];
        let mut closed = false;
        for _ in 0..n {
            let Some(j) = nearest(&map.eval(&candidates[*indices.last().unwrap_or(&i)])?) else { break };
            if j == i {
                closed = true;
                break;
            }
            if indices.contains(&j) {
                break;
            }
            indices.push(j);
        }
        let period = indices.len();
        if !closed || !n.is_multiple_of(period) {
            // no consistent cycle through this root; keep it as a point of
            // period n so that nothing is silently dropped
            used[i] = true;
            let orbit = forward_orbit(map, candidates[i], n)?;
            cycles.push(cycle_from_orbit(map, orbit));
            continue;
        }
        for &j in &indices {
            used[j] = true;
        }
        cycles.push(cycle_from_orbit(map, indices.iter().map(|&j| candidates[j]).collect()));
    }
    cycles.sort_by(|a, b| a.period.cmp(&b.period).then_with(|| a.representative.canonical_cmp(&b.representative)));
    Ok(cycles)
}

/// Newton refinement of roots of `R^n(z) = z`, evaluated along the orbit.
/// Roots of the expanded form of `R^n` lose accuracy as `n` grows; the
/// orbit formulation does not.
struct Polisher {
    p: Polynomial,
    q: Polynomial,
    dp: Polynomial,
    dq: Polynomial,
}

impl Polisher {
    fn new(map: &RationalMap) -> Self {
        let p = map.numerator().clone();
        let q = map.denominator().clone();
        Polisher { dp: p.derivative(), dq: q.derivative(), p, q }
    }

    /// `(R^n(z) - z, (R^n)'(z) - 1)`, or `None` if the orbit meets a pole.
    fn residual(&self, z: Complex64, n: usize) -> Option<(Complex64, Complex64)> {
        let (mut x, mut deriv) = (z, Complex64::new(1.0, 0.0));
        for _ in 0..n {
            let q = self.q.eval(x);
            if q.norm() <= f64::MIN_POSITIVE {
                return None;
            }
            let p = self.p.eval(x);
            deriv *= (self.dp.eval(x) * q - p * self.dq.eval(x)) / (q * q);
            x = p / q;
        }
        (x.is_finite() && deriv.is_finite()).then(|| (x - z, deriv - Complex64::new(1.0, 0.0)))
    }

    /// A refined root near `z0`, or `z0` when Newton does not improve it.
    fn polish(&self, z0: Complex64, n: usize) -> Complex64 {
        let Some((g0, _)) = self.residual(z0, n) else { return z0 };
        let mut z = z0;
        for _ in 0..8 {
            let Some((g, dg)) = self.residual(z, n) else { return z0 };
            if dg == Complex64::new(0.0, 0.0) {
                break;
            }
            let step = g / dg;
            z -= step;
            if step.norm() <= 4.0 * f64::EPSILON * (1.0 + z.norm()) {
                break;
            }
        }
        match self.residual(z, n) {
            Some((g, _)) if g.norm() < g0.norm() && (z - z0).norm() <= POLISH_MAX_MOVE * (1.0 + z0.norm()) => z,
            _ => z0,
        }
    }
}

fn forward_orbit(map: &RationalMap, start: SpherePoint, n: usize) -> Result<Vec<SpherePoint>, DynamicsError> {
    let mut orbit = vec![start];
    for _ in 1..n {
        let next = map.eval(orbit.last().unwrap_or(&start))?;
        orbit.push(next);
    }
    Ok(orbit)
}

fn cycle_from_orbit(map: &RationalMap, mut orbit: Vec<SpherePoint>) -> CycleDatum {
    let period = orbit.len();
    let rot = (0..period).min_by(|&a, &b| orbit[a].canonical_cmp(&orbit[b])).unwrap_or(0);
    orbit.rotate_left(rot);
    let multiplier = multiplier_along(map, &orbit);
    CycleDatum {
        period,
        representative: orbit[0],
        points: orbit,
        multiplier,
        character: Character::from_multiplier(multiplier),
    }
}

fn multiplier_along(map: &RationalMap, orbit: &[SpherePoint]) -> Complex64 {
    let k = orbit.len();
    (0..k).map(|i| chart_derivative(map, &orbit[i], &orbit[(i + 1) % k])).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_map;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn fixed_points_of_z_squared() {
        let cycles = periodic_points(&parse_map("z^2").unwrap(), 1).unwrap();
        assert_eq!(cycles.len(), 3);
        assert_eq!(cycles[0].representative, SpherePoint::real(0.0));
        assert_eq!(cycles[0].character, Character::Superattracting);
        assert_eq!(cycles[1].representative, SpherePoint::real(1.0));
        assert!((cycles[1].multiplier - c(2.0, 0.0)).norm() < 1e-12);
        assert_eq!(cycles[1].character, Character::Repelling);
        assert!(cycles[2].representative.is_infinity());
        assert_eq!(cycles[2].character, Character::Superattracting);
    }

    #[test]
    fn cycle_counts_of_a_cubic() {
        // 3 finite fixed points and infinity, then 3, 8 and 18 cycles of
        // exact period 2, 3 and 4; periods dividing 4 exclude 3
        let cycles = periodic_points(&parse_map("z^3 - 0.75z").unwrap(), 4).unwrap();
        let count = |p| cycles.iter().filter(|c| c.period == p).count();
        assert_eq!([count(1), count(2), count(3), count(4)], [4, 3, 0, 18]);
        let cycles = periodic_points(&parse_map("z^3 - 0.75z").unwrap(), 3).unwrap();
        assert_eq!(cycles.iter().filter(|c| c.period == 3).count(), 8);
        for c in &cycles {
            for (k, p) in c.points.iter().enumerate() {
                let next = c.points[(k + 1) % c.period];
                assert!(parse_map("z^3 - 0.75z").unwrap().eval(p).unwrap().distance(&next) < 1e-9);
            }
        }
    }

    #[test]
    fn fixed_points_of_chebyshev() {
        let cycles = periodic_points(&parse_map("z^2 - 2").unwrap(), 1).unwrap();
        assert_eq!(cycles.len(), 3);
        assert_eq!(cycles[0].representative, SpherePoint::real(-1.0));
        assert!((cycles[0].multiplier - c(-2.0, 0.0)).norm() < 1e-12);
        assert_eq!(cycles[1].representative, SpherePoint::real(2.0));
        assert!((cycles[1].multiplier - c(4.0, 0.0)).norm() < 1e-12);
        assert!(cycles[2].representative.is_infinity());
    }

    #[test]
    fn two_cycle_of_z_squared() {
        let cycles = periodic_points(&parse_map("z^2").unwrap(), 2).unwrap();
        let two: Vec<_> = cycles.iter().filter(|c| c.period == 2).collect();
        assert_eq!(two.len(), 1);
        let w = Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0);
        assert!(two[0].contains(&SpherePoint::finite(w), 1e-12).is_some());
        assert!(two[0].contains(&SpherePoint::finite(w.conj()), 1e-12).is_some());
        assert!((two[0].multiplier - c(4.0, 0.0)).norm() < 1e-10);
        // the three fixed points reappear with period 1
        assert_eq!(cycles.iter().filter(|c| c.period == 1).count(), 3);
    }

    #[test]
    fn cycle_through_infinity() {
        let cycles = periodic_points(&parse_map("1/z^2").unwrap(), 2).unwrap();
        let two: Vec<_> = cycles.iter().filter(|c| c.period == 2).collect();
        assert!(two
            .iter()
            .any(|c| c.points.iter().any(|p| p.is_infinity()) && c.character == Character::Superattracting));
    }

    #[test]
    fn multiplier_from_any_point_of_the_cycle() {
        let m = parse_map("z^2 - 1.3 + 0.2i").unwrap();
        for cycle in periodic_points(&m, 3).unwrap() {
            for p in &cycle.points {
                let lambda = cycle_multiplier(&m, p, cycle.period).unwrap();
                assert!((lambda - cycle.multiplier).norm() <= 1e-7 * (1.0 + cycle.multiplier.norm()));
            }
        }
    }
}
