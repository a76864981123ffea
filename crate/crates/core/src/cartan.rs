//! The decision: `C_0(X)` is a Cartan subalgebra of the algebra of `R`
//! over `X` exactly when `X` contains no critical point of `R`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{
    classify_critical_points, critical_points, Budget, Classifier, CriticalDatum, CycleDatum, DynamicsError, Verdict,
};
use crate::rational::RationalMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceSelector {
    Julia,
    Fatou,
    Sphere,
}

impl FromStr for SpaceSelector {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "julia" => Ok(SpaceSelector::Julia),
            "fatou" => Ok(SpaceSelector::Fatou),
            "sphere" => Ok(SpaceSelector::Sphere),
            other => Err(format!("unknown space '{other}'; expected julia, fatou or sphere")),
        }
    }
}

impl fmt::Display for SpaceSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpaceSelector::Julia => "julia",
            SpaceSelector::Fatou => "fatou",
            SpaceSelector::Sphere => "sphere",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CartanVerdict {
    Cartan,
    NotCartan,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Nonempty {
    Yes,
    Unverified,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CartanReport {
    pub map: RationalMap,
    pub space: SpaceSelector,
    pub verdict: CartanVerdict,
    /// `NotCartan`: critical points in the space. `Cartan`: every critical
    /// point with the certificate keeping it out. `Undetermined`: the
    /// critical points that could not be placed.
    pub witnesses: Vec<CriticalDatum>,
    pub space_nonempty: Nonempty,
    pub notes: String,
    /// Attracting and superattracting cycles found by the classifier.
    pub attracting_cycles: Vec<CycleDatum>,
    pub critical_point_count: usize,
    pub budget: Budget,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum CartanError {
    #[error("map degree {degree} is too low; at least 2 is required")]
    DegreeTooLow { degree: usize },
    #[error(transparent)]
    Dynamics(DynamicsError),
}

impl From<DynamicsError> for CartanError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::DegreeTooLow { degree } => CartanError::DegreeTooLow { degree },
            other => CartanError::Dynamics(other),
        }
    }
}

pub fn decide_cartan(map: &RationalMap, space: SpaceSelector, budget: Budget) -> Result<CartanReport, CartanError> {
    let degree = map.degree();
    if degree < 2 {
        return Err(CartanError::DegreeTooLow { degree });
    }
    if space == SpaceSelector::Sphere {
        let witnesses = critical_points(map)?;
        return Ok(CartanReport {
            map: map.clone(),
            space,
            verdict: CartanVerdict::NotCartan,
            critical_point_count: witnesses.len(),
            witnesses,
            space_nonempty: Nonempty::Yes,
            notes: format!(
                "the sphere contains all {} critical points of a degree {degree} map; orbits are not classified",
                2 * degree - 2
            ),
            attracting_cycles: Vec::new(),
            budget,
        });
    }

    let classifier = Classifier::new(map, budget)?;
    let data = classify_critical_points(&classifier)?;
    let attracting_cycles: Vec<CycleDatum> = classifier.attracting_cycles().cloned().collect();
    let inside = match space {
        SpaceSelector::Julia => Verdict::InJulia,
        _ => Verdict::InFatou,
    };
    let count = data.len();
    let in_space: Vec<CriticalDatum> = data.iter().filter(|c| c.membership.verdict == inside).cloned().collect();
    let unknown: Vec<CriticalDatum> =
        data.iter().filter(|c| c.membership.verdict == Verdict::Undetermined).cloned().collect();

    let (verdict, witnesses, notes) = if !in_space.is_empty() {
        let note = format!("{} of {count} critical points certified in the {space} set", in_space.len());
        (CartanVerdict::NotCartan, in_space, note)
    } else if !unknown.is_empty() {
        let note = format!(
            "{} of {count} critical points could not be placed within {} iterations; none certified in the {space} set",
            unknown.len(),
            budget.max_iter
        );
        (CartanVerdict::Undetermined, unknown, note)
    } else {
        let note = format!("all {count} critical points certified outside the {space} set");
        (CartanVerdict::Cartan, data, note)
    };
    let space_nonempty = match space {
        SpaceSelector::Fatou if attracting_cycles.is_empty() => Nonempty::Unverified,
        _ => Nonempty::Yes,
    };
    Ok(CartanReport {
        map: map.clone(),
        space,
        verdict,
        witnesses,
        space_nonempty,
        notes,
        attracting_cycles,
        critical_point_count: count,
        budget,
    })
}
