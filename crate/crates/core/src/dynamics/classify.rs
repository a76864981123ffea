use num_complex::Complex64;
use serde::Serialize;

use super::periodic::{periodic_points, CycleDatum};
use super::DynamicsError;
use crate::rational::{RationalMap, SpherePoint};

/// Longest orbit prefix kept in a [`Classification`].
pub const ORBIT_PREFIX_CAP: usize = 64;

/// Iteration and tolerance settings for point classification.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Budget {
    pub max_iter: usize,
    /// Distance to an attracting cycle point that counts as captured.
    pub attract_tol: f64,
    /// Distance to a repelling cycle point that counts as landed.
    pub snap_tol: f64,
    /// Cycles of period up to this are precomputed...
    pub max_cycle_period: usize,
    /// ...as long as `d^period` stays below this.
    pub max_cycle_degree: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_iter: 10_000, attract_tol: 1e-12, snap_tol: 1e-9, max_cycle_period: 4, max_cycle_degree: 256 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    InJulia,
    InFatou,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Certificate {
    PreperiodicToRepelling {
        cycle: CycleDatum,
        #[serde(serialize_with = "crate::serialize_complex")]
        multiplier: Complex64,
        landing_iteration: usize,
    },
    ConvergesToAttracting {
        cycle: CycleDatum,
        #[serde(serialize_with = "crate::serialize_complex")]
        multiplier: Complex64,
        iterations: usize,
    },
    ConvergesToSuperattracting {
        cycle: CycleDatum,
        iterations: usize,
    },
    EscapeToInfinity {
        iterations: usize,
        escape_radius: f64,
    },
    None,
}

/// Three-valued Julia/Fatou membership with the evidence behind it.
///
/// `InJulia` is only issued with `PreperiodicToRepelling`; `InFatou` only
/// with a convergence or escape certificate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MembershipVerdict {
    pub verdict: Verdict,
    pub certificate: Certificate,
    pub confidence_note: String,
}

impl MembershipVerdict {
    pub fn undetermined(note: impl Into<String>) -> Self {
        MembershipVerdict {
            verdict: Verdict::Undetermined,
            certificate: Certificate::None,
            confidence_note: note.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub membership: MembershipVerdict,
    /// Forward orbit from the start point up to the deciding iterate,
    /// truncated to [`ORBIT_PREFIX_CAP`] points.
    pub orbit_prefix: Vec<SpherePoint>,
    pub iterations: usize,
}

/// Classifies points of the sphere against precomputed cycles.
#[derive(Clone, Debug)]
pub struct Classifier<'a> {
    map: &'a RationalMap,
    budget: Budget,
    cycles: Vec<CycleDatum>,
    escape_radius: Option<f64>,
}

impl<'a> Classifier<'a> {
    pub fn new(map: &'a RationalMap, budget: Budget) -> Result<Self, DynamicsError> {
        let d = map.degree();
        if d < 2 {
            return Err(DynamicsError::DegreeTooLow { degree: d });
        }
        let mut cycles: Vec<CycleDatum> = Vec::new();
        let mut size = 1usize;
        for n in 1..=budget.max_cycle_period.max(1) {
            size = size.saturating_mul(d);
            if n > 1 && size > budget.max_cycle_degree {
                break;
            }
            for cycle in periodic_points(map, n)? {
                if cycle.period == n {
                    cycles.push(cycle);
                }
            }
        }
        Ok(Classifier { map, budget, cycles, escape_radius: escape_radius(map) })
    }

    pub fn map(&self) -> &RationalMap {
        self.map
    }

    pub fn budget(&self) -> &Budget {
        &self.budget
    }

    /// All cycles found, by period then representative.
    pub fn cycles(&self) -> &[CycleDatum] {
        &self.cycles
    }

    pub fn attracting_cycles(&self) -> impl Iterator<Item = &CycleDatum> {
        self.cycles.iter().filter(|c| c.character.is_attracting())
    }

    pub fn repelling_cycles(&self) -> impl Iterator<Item = &CycleDatum> {
        self.cycles.iter().filter(|c| c.character == super::Character::Repelling)
    }

    pub fn escape_radius(&self) -> Option<f64> {
        self.escape_radius
    }

    pub fn classify(&self, p: &SpherePoint) -> MembershipVerdict {
        self.classify_orbit(p).membership
    }

    /// Follows the forward orbit of `p`. At each iterate, in order: capture
    /// by an attracting cycle, escape (polynomial maps), landing on a
    /// repelling cycle confirmed over `3 * period` further steps.
    pub fn classify_orbit(&self, p: &SpherePoint) -> Classification {
        let mut prefix = Vec::new();
        let mut x = *p;
        let mut closest: Option<(f64, usize, usize)> = None;
        for k in 0..=self.budget.max_iter {
            if prefix.len() < ORBIT_PREFIX_CAP {
                prefix.push(x);
            }
            if let Some(membership) = self.attracted(&x, k) {
                return Classification { membership, orbit_prefix: prefix, iterations: k };
            }
            if let Some(radius) = self.escape_radius {
                if x.to_complex().is_none_or(|c| c.norm() > radius) {
                    let membership = MembershipVerdict {
                        verdict: Verdict::InFatou,
                        certificate: Certificate::EscapeToInfinity { iterations: k, escape_radius: radius },
                        confidence_note: format!("orbit left the disk of radius {radius} after {k} iterations"),
                    };
                    return Classification { membership, orbit_prefix: prefix, iterations: k };
                }
            }
            for (ci, cycle) in self.repelling_cycles().enumerate() {
                for (j, q) in cycle.points.iter().enumerate() {
                    let dist = q.distance(&x);
                    if closest.is_none_or(|(best, _, _)| dist < best) {
                        closest = Some((dist, ci, k));
                    }
                    if dist <= self.budget.snap_tol && self.confirms_landing(&x, cycle, j) {
                        let membership = MembershipVerdict {
                            verdict: Verdict::InJulia,
                            certificate: Certificate::PreperiodicToRepelling {
                                cycle: cycle.clone(),
                                multiplier: cycle.multiplier,
                                landing_iteration: k,
                            },
                            confidence_note: format!(
                                "orbit lands on a repelling cycle of period {} after {k} iterations and follows it for {} more",
                                cycle.period,
                                3 * cycle.period
                            ),
                        };
                        return Classification { membership, orbit_prefix: prefix, iterations: k };
                    }
                }
            }
            if k == self.budget.max_iter {
                break;
            }
            x = match self.map.eval(&x) {
                Ok(next) => next,
                Err(e) => {
                    let membership =
                        MembershipVerdict::undetermined(format!("evaluation failed after {k} iterations: {e}"));
                    return Classification { membership, orbit_prefix: prefix, iterations: k };
                }
            };
        }
        let mut note = format!("no certificate within {} iterations", self.budget.max_iter);
        if let Some((dist, ci, k)) = closest {
            let cycle = self.repelling_cycles().nth(ci).expect("index from enumeration");
            note.push_str(&format!(
                "; closest approach {dist:.3e} to the repelling cycle through {} at iteration {k}",
                cycle.representative
            ));
        }
        Classification {
            membership: MembershipVerdict::undetermined(note),
            orbit_prefix: prefix,
            iterations: self.budget.max_iter,
        }
    }

    fn attracted(&self, x: &SpherePoint, k: usize) -> Option<MembershipVerdict> {
        let cycle = self.attracting_cycles().find(|c| c.contains(x, self.budget.attract_tol).is_some())?;
        let certificate = if cycle.character == super::Character::Superattracting {
            Certificate::ConvergesToSuperattracting { cycle: cycle.clone(), iterations: k }
        } else {
            Certificate::ConvergesToAttracting { cycle: cycle.clone(), multiplier: cycle.multiplier, iterations: k }
        };
        Some(MembershipVerdict {
            verdict: Verdict::InFatou,
            certificate,
            confidence_note: format!(
                "orbit within {:e} of an attracting cycle of period {} after {k} iterations",
                self.budget.attract_tol, cycle.period
            ),
        })
    }

    fn confirms_landing(&self, x: &SpherePoint, cycle: &CycleDatum, j: usize) -> bool {
        let mut y = *x;
        for s in 1..=3 * cycle.period {
            y = match self.map.eval(&y) {
                Ok(next) => next,
                Err(_) => return false,
            };
            if y.distance(&cycle.points[(j + s) % cycle.period]) > self.budget.snap_tol {
                return false;
            }
        }
        true
    }
}

/// `max(2, 1 + sum_{i<d} |a_i| / |a_d|)` for polynomial maps; beyond it
/// orbits escape monotonically.
pub fn escape_radius(map: &RationalMap) -> Option<f64> {
    if !map.is_polynomial() {
        return None;
    }
    let q0 = map.denominator().coeff(0);
    let p = map.numerator();
    let lead = (p.leading() / q0).norm();
    let rest: f64 = p.coeffs()[..p.degree()].iter().map(|a| (a / q0).norm()).sum();
    Some((1.0 + rest / lead).max(2.0))
}

/// One-shot classification with a fresh [`Classifier`].
pub fn classify_point(map: &RationalMap, p: &SpherePoint, budget: Budget) -> Result<MembershipVerdict, DynamicsError> {
    Ok(Classifier::new(map, budget)?.classify(p))
}
