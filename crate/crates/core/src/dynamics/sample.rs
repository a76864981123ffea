use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::classify::{escape_radius, Classifier};
use super::periodic::{periodic_points, Character};
use super::DynamicsError;
use crate::rational::{RationalMap, SpherePoint};
use crate::roots;

/// Default iteration budget for [`escape_grid`] renders.
pub const RENDER_MAX_ITER: usize = 1000;
/// Capture distance to an attracting cycle in [`escape_grid`].
pub const GRID_ATTRACT_TOL: f64 = 1e-6;

/// A repelling periodic point of period 1 or 2, canonically first.
pub fn repelling_seed(map: &RationalMap) -> Result<SpherePoint, DynamicsError> {
    for n in 1..=2 {
        let cycles = periodic_points(map, n)?;
        if let Some(c) = cycles.iter().find(|c| c.character == Character::Repelling) {
            return Ok(c.representative);
        }
    }
    Err(DynamicsError::NoRepellingSeedFound)
}

/// Preimages of `target`, with multiplicity; infinity included.
pub fn preimages(map: &RationalMap, target: &SpherePoint) -> Result<Vec<SpherePoint>, DynamicsError> {
    let d = map.degree();
    let (a, b) = (target.z(), target.w());
    let form = &map.numerator().scale(b) - &map.denominator().scale(a);
    let found = roots::find_roots_nominal(&form, d)?;
    let mut out: Vec<SpherePoint> = found.expanded().into_iter().map(SpherePoint::finite).collect();
    out.extend(std::iter::repeat_n(SpherePoint::infinity(), found.degree_at_infinity()));
    Ok(out)
}

/// `count` points of the Julia set by random inverse iteration of depth
/// `depth` from a repelling periodic point.
///
/// Path `i` draws from its own ChaCha stream (seed `seed`, stream `i`), so
/// the output does not depend on thread scheduling.
pub fn julia_sample(
    map: &RationalMap,
    count: usize,
    depth: usize,
    seed: u64,
) -> Result<Vec<SpherePoint>, DynamicsError> {
    if map.degree() < 2 {
        return Err(DynamicsError::DegreeTooLow { degree: map.degree() });
    }
    let start = repelling_seed(map)?;
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut x = start;
            for _ in 0..depth {
                let pre = preimages(map, &x)?;
                x = pre[rng.random_range(0..pre.len())];
            }
            Ok(x)
        })
        .collect()
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]` of the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Viewport {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Viewport {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Viewport { x0, y0, x1, y1 }
    }

    /// Center of pixel `(col, row)`; row 0 is the top edge `y1`.
    pub fn pixel_center(&self, col: usize, row: usize, width: usize, height: usize) -> Complex64 {
        Complex64::new(
            self.x0 + (col as f64 + 0.5) * (self.x1 - self.x0) / width as f64,
            self.y1 - (row as f64 + 0.5) * (self.y1 - self.y0) / height as f64,
        )
    }
}

/// Per-pixel outcome of [`escape_grid`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GridCode {
    /// Left the escape disk of a polynomial map after this many iterations.
    Escaped(usize),
    /// Came within [`GRID_ATTRACT_TOL`] of attracting cycle `attractor`.
    Attracted {
        attractor: usize,
        iterations: usize,
    },
    /// Unresolved within budget and judged to be near the Julia set.
    NearJulia,
    Unresolved,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EscapeGrid {
    pub width: usize,
    pub height: usize,
    /// Row-major, top row first.
    pub codes: Vec<GridCode>,
    pub attractor_count: usize,
}

impl EscapeGrid {
    pub fn get(&self, col: usize, row: usize) -> GridCode {
        self.codes[row * self.width + col]
    }
}

/// Escape-time grid over `viewport`.
///
/// Polynomial maps: pixels that neither escape nor get captured within
/// `max_iter` are `NearJulia`. Other maps: such pixels are `NearJulia` when
/// an inverse-iteration Julia sample (seeded by `seed`) lies within one
/// pixel diagonal, else `Unresolved`. Attracting cycles at infinity are
/// left to the escape test for polynomial maps.
pub fn escape_grid(
    map: &RationalMap,
    viewport: Viewport,
    resolution: (usize, usize),
    max_iter: usize,
    seed: u64,
) -> Result<EscapeGrid, DynamicsError> {
    let (width, height) = resolution;
    if width == 0 || height == 0 {
        return Ok(EscapeGrid { width, height, codes: Vec::new(), attractor_count: 0 });
    }
    let classifier = Classifier::new(map, super::Budget::default())?;
    let radius = escape_radius(map);
    let attractors: Vec<Vec<SpherePoint>> = classifier
        .attracting_cycles()
        .filter(|c| radius.is_none() || !c.points.iter().any(SpherePoint::is_infinity))
        .map(|c| c.points.clone())
        .collect();
    let samples: Vec<Complex64> = if radius.is_some() {
        Vec::new()
    } else {
        match julia_sample(map, 4096, 24, seed) {
            Ok(s) => s.iter().filter_map(SpherePoint::to_complex).collect(),
            Err(DynamicsError::NoRepellingSeedFound) => Vec::new(),
            Err(e) => return Err(e),
        }
    };
    let diag = ((viewport.x1 - viewport.x0) / width as f64).hypot((viewport.y1 - viewport.y0) / height as f64).abs();

    let codes = (0..width * height)
        .into_par_iter()
        .map(|idx| {
            let c = viewport.pixel_center(idx % width, idx / width, width, height);
            let mut x = SpherePoint::finite(c);
            for k in 0..=max_iter {
                if let Some(r) = radius {
                    if x.to_complex().is_none_or(|v| v.norm() > r) {
                        return GridCode::Escaped(k);
                    }
                }
                if let Some(id) =
                    attractors.iter().position(|pts| pts.iter().any(|q| q.distance(&x) <= GRID_ATTRACT_TOL))
                {
                    return GridCode::Attracted { attractor: id, iterations: k };
                }
                if k < max_iter {
                    x = match map.eval(&x) {
                        Ok(next) => next,
                        Err(_) => return GridCode::Unresolved,
                    };
                }
            }
            if radius.is_some() || samples.iter().any(|s| (s - c).norm() <= diag) {
                GridCode::NearJulia
            } else {
                GridCode::Unresolved
            }
        })
        .collect();
    Ok(EscapeGrid { width, height, codes, attractor_count: attractors.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_map;

    #[test]
    fn samples_of_z_squared_lie_on_the_unit_circle() {
        let m = parse_map("z^2").unwrap();
        let s = julia_sample(&m, 200, 20, 7).unwrap();
        assert_eq!(s.len(), 200);
        for p in s {
            assert!((p.to_complex().unwrap().norm() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn samples_of_chebyshev_lie_on_the_interval() {
        let m = parse_map("z^2 - 2").unwrap();
        for p in julia_sample(&m, 200, 20, 7).unwrap() {
            let z = p.to_complex().unwrap();
            assert!(z.im.abs() < 1e-6 && z.re.abs() <= 2.0 + 1e-9, "{z}");
        }
    }

    #[test]
    fn depth_zero_returns_the_seed() {
        let m = parse_map("z^2").unwrap();
        let s = julia_sample(&m, 3, 0, 1).unwrap();
        assert!(s.iter().all(|p| *p == SpherePoint::real(1.0)));
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = parse_map("z^2 - 0.12 + 0.74i").unwrap();
        let a = julia_sample(&m, 64, 15, 99).unwrap();
        let b = julia_sample(&m, 64, 15, 99).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.z().to_bits_pair(), q.z().to_bits_pair());
        }
    }

    trait Bits {
        fn to_bits_pair(&self) -> (u64, u64);
    }
    impl Bits for Complex64 {
        fn to_bits_pair(&self) -> (u64, u64) {
            (self.re.to_bits(), self.im.to_bits())
        }
    }

    #[test]
    fn escape_grid_for_z_squared() {
        let m = parse_map("z^2").unwrap();
        let vp = Viewport::new(-2.0, -2.0, 2.0, 2.0);
        let g = escape_grid(&m, vp, (8, 8), RENDER_MAX_ITER, 0).unwrap();
        for row in 0..8 {
            for col in 0..8 {
                let c = vp.pixel_center(col, row, 8, 8);
                match g.get(col, row) {
                    GridCode::Escaped(_) => assert!(c.norm() > 1.0),
                    GridCode::Attracted { attractor: 0, .. } => assert!(c.norm() < 1.0),
                    other => panic!("{c}: {other:?}"),
                }
            }
        }
    }

    #[test]
    fn near_julia_pixels_of_chebyshev_hug_the_interval() {
        let m = parse_map("z^2 - 2").unwrap();
        let vp = Viewport::new(-3.0, -3.0, 3.0, 3.0);
        let g = escape_grid(&m, vp, (61, 61), RENDER_MAX_ITER, 0).unwrap();
        let mut near = 0;
        for row in 0..61 {
            for col in 0..61 {
                if g.get(col, row) == GridCode::NearJulia {
                    near += 1;
                    let c = vp.pixel_center(col, row, 61, 61);
                    assert!(c.im.abs() < 0.1 && c.re.abs() <= 2.0 + 0.1, "{c}");
                }
            }
        }
        assert!(near > 0);
    }

    #[test]
    fn empty_grid() {
        let m = parse_map("z^2").unwrap();
        let g = escape_grid(&m, Viewport::new(0.0, 0.0, 1.0, 1.0), (0, 0), 10, 0).unwrap();
        assert!(g.codes.is_empty());
    }

    #[test]
    fn rational_grid_uses_sample_fallback() {
        let m = parse_map("(z^2+1)/(2z)").unwrap();
        let vp = Viewport::new(-2.0, -2.0, 2.0, 2.0);
        let g = escape_grid(&m, vp, (16, 16), 200, 0).unwrap();
        assert_eq!(g.attractor_count, 2);
        assert!(g.codes.iter().any(|c| matches!(c, GridCode::Attracted { .. })));
    }
}
