use serde::Serialize;

use super::chart::branch_index_tol;
use super::classify::{Classifier, MembershipVerdict};
use super::DynamicsError;
use crate::rational::{RationalMap, SpherePoint};
use crate::roots;

/// Looser tolerance for the chart-side recount of local degrees at
/// numerically located critical points.
pub const RECOUNT_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriticalDatum {
    pub point: SpherePoint,
    pub branch_index: usize,
    pub membership: MembershipVerdict,
    pub orbit_prefix: Vec<SpherePoint>,
}

/// Critical points with local degrees; membership is left unclassified.
///
/// Candidates are the zeros of `W = P'Q - PQ'` read as a form of degree
/// `2d - 2`: a zero of order `m` at a finite point (pole or not) means
/// local degree `m + 1`, and the degree deficiency of `W` is `e(inf) - 1`.
/// Each local degree is recomputed independently in a chart; the recount
/// must agree point by point and total `2d - 2`.
pub fn critical_points(map: &RationalMap) -> Result<Vec<CriticalDatum>, DynamicsError> {
    let d = map.degree();
    if d < 2 {
        return Err(DynamicsError::DegreeTooLow { degree: d });
    }
    let expected = 2 * d - 2;
    let w = map.wronskian();
    let mut located: Vec<(SpherePoint, usize)> = Vec::new();
    if w.is_zero() {
        return Err(DynamicsError::RiemannHurwitzMismatch { found: 0, expected });
    }
    let found = roots::find_roots_nominal(&w, expected)?;
    located.extend(found.roots().iter().map(|r| (SpherePoint::finite(r.location), r.multiplicity + 1)));
    if found.degree_at_infinity() > 0 {
        located.push((SpherePoint::infinity(), found.degree_at_infinity() + 1));
    }
    let mut recount = 0;
    let mut consistent = true;
    for (p, e) in &located {
        let chart_e = branch_index_tol(map, p, RECOUNT_TOL);
        recount += chart_e - 1;
        consistent &= chart_e == *e;
    }
    if !consistent || recount != expected {
        return Err(DynamicsError::RiemannHurwitzMismatch { found: recount, expected });
    }
    located.sort_by(|a, b| a.0.canonical_cmp(&b.0));
    Ok(located
        .into_iter()
        .map(|(point, branch_index)| CriticalDatum {
            point,
            branch_index,
            membership: MembershipVerdict::undetermined("not classified"),
            orbit_prefix: Vec::new(),
        })
        .collect())
}

/// Critical points with their orbits classified.
pub fn classify_critical_points(classifier: &Classifier<'_>) -> Result<Vec<CriticalDatum>, DynamicsError> {
    let mut data = critical_points(classifier.map())?;
    for datum in &mut data {
        let out = classifier.classify_orbit(&datum.point);
        datum.membership = out.membership;
        datum.orbit_prefix = out.orbit_prefix;
    }
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Budget, Verdict};
    use crate::parse::parse_map;

    fn points(src: &str) -> Vec<(SpherePoint, usize)> {
        critical_points(&parse_map(src).unwrap()).unwrap().into_iter().map(|c| (c.point, c.branch_index)).collect()
    }

    #[test]
    fn quadratic_polynomials() {
        let expected = vec![(SpherePoint::real(0.0), 2), (SpherePoint::infinity(), 2)];
        assert_eq!(points("z^2"), expected);
        assert_eq!(points("z^2 - 2"), expected);
    }

    #[test]
    fn newton_map_of_z2_plus_1_has_critical_points_at_plus_minus_one() {
        // W = 2z * 2z - (z^2 + 1) * 2 = 2z^2 - 2
        assert_eq!(points("(z^2+1)/(2z)"), vec![(SpherePoint::real(-1.0), 2), (SpherePoint::real(1.0), 2)]);
    }

    #[test]
    fn poles_and_higher_order_points() {
        // 1/z^3: e = 3 at 0 and at infinity
        assert_eq!(points("1/z^3"), vec![(SpherePoint::real(0.0), 3), (SpherePoint::infinity(), 3)]);
        // z^3 (z - 1)^2 has a triple point, a double point and e(inf) = 5
        let pts = points("z^3 (z-1)^2");
        assert!(pts.contains(&(SpherePoint::real(0.0), 3)));
        assert!(pts.contains(&(SpherePoint::real(1.0), 2)));
        assert!(pts.contains(&(SpherePoint::infinity(), 5)));
        let total: usize = pts.iter().map(|(_, e)| e - 1).sum();
        assert_eq!(total, 8);
    }

    #[test]
    fn classified_critical_orbits() {
        let m = parse_map("z^2 - 2").unwrap();
        let c = Classifier::new(&m, Budget::default()).unwrap();
        let data = classify_critical_points(&c).unwrap();
        assert_eq!(data[0].membership.verdict, Verdict::InJulia);
        assert_eq!(data[1].membership.verdict, Verdict::InFatou);
    }
}
