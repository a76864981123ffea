use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::HilbertError;
use crate::dynamics::{critical_points, preimages};
use crate::rational::{RationalMap, SpherePoint};

/// Default cap on the node count of a tree.
pub const NODE_CAP: usize = 10_000;
/// Distance under which a node counts as critical, periodic or duplicated.
pub const GENERIC_TOL: f64 = 1e-6;
/// Largest allowed `|R(child) - parent|` in the projective metric.
pub const EDGE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TreeConfig {
    /// Forward chain length above the base.
    pub forward_depth: usize,
    /// Number of backward levels below the base.
    pub backward_depth: usize,
    /// Nodes must not be periodic with period up to this.
    pub max_screen_period: usize,
    pub seed: u64,
    pub retry_cap: usize,
    pub node_cap: usize,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            forward_depth: 2,
            backward_depth: 4,
            max_screen_period: 4,
            seed: 0xC0FFEE,
            retry_cap: 64,
            node_cap: NODE_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TreeNode {
    pub id: usize,
    pub point: SpherePoint,
    /// `-k` on backward level `k`, `+i` for the `i`-th forward image.
    pub height: i64,
    /// Node realizing `R(point)`; `None` for the top of the forward chain.
    pub image: Option<usize>,
}

/// A base point, its forward chain and its full backward fan.
///
/// Ids: base `0`, then backward levels in breadth-first order, then the
/// forward chain. Backward nodes below the last level have exactly
/// `deg R` tree preimages.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitTree {
    nodes: Vec<TreeNode>,
    #[serde(skip)]
    preimages: Vec<Vec<usize>>,
    forward_depth: usize,
    backward_depth: usize,
    degree: usize,
    attempts: usize,
}

impl OrbitTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn base(&self) -> usize {
        0
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn point(&self, id: usize) -> SpherePoint {
        self.nodes[id].point
    }

    pub fn forward_depth(&self) -> usize {
        self.forward_depth
    }

    pub fn backward_depth(&self) -> usize {
        self.backward_depth
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Longest walk the tree supports (leaf to top).
    pub fn max_depth(&self) -> usize {
        self.forward_depth + self.backward_depth
    }

    /// Base candidates tried before one passed the screen.
    pub fn attempts(&self) -> usize {
        self.attempts
    }

    /// Tree preimages of `id`.
    pub fn fiber(&self, id: usize) -> &[usize] {
        &self.preimages[id]
    }

    /// True when `id` carries all `deg R` of its preimages in the tree.
    pub fn has_full_fiber(&self, id: usize) -> bool {
        self.preimages[id].len() == self.degree
    }

    /// The node reached from `id` by `n` applications of `R`, if the tree
    /// extends that far.
    pub fn walk(&self, id: usize, n: usize) -> Option<usize> {
        let mut x = id;
        for _ in 0..n {
            x = self.nodes[x].image?;
        }
        Some(x)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let edges: Vec<(usize, usize)> = self.nodes.iter().filter_map(|n| n.image.map(|m| (n.id, m))).collect();
        serde_json::json!({
            "base": 0,
            "degree": self.degree,
            "forward_depth": self.forward_depth,
            "backward_depth": self.backward_depth,
            "nodes": self.nodes.iter().map(|n| serde_json::json!({
                "id": n.id,
                "point": n.point,
                "height": n.height,
            })).collect::<Vec<_>>(),
            "edges": edges,
        })
    }
}

/// Node count of a tree: `1 + d + ... + d^k` backward plus `m` forward.
pub fn tree_size(degree: usize, config: &TreeConfig) -> Option<usize> {
    let mut total: usize = 0;
    let mut level: usize = 1;
    for _ in 0..=config.backward_depth {
        total = total.checked_add(level)?;
        level = level.checked_mul(degree)?;
    }
    total.checked_add(config.forward_depth)
}

/// Builds a tree around a base near `base_hint` that passes the
/// genericity screen: no node within [`GENERIC_TOL`] of a critical point,
/// of a periodic point of period up to `max_screen_period`, or of another
/// node. The hint itself is tried first, then random perturbations of it.
pub fn build_orbit_tree(
    map: &RationalMap,
    base_hint: SpherePoint,
    config: TreeConfig,
) -> Result<OrbitTree, HilbertError> {
    let degree = map.degree();
    if degree < 2 {
        return Err(HilbertError::DegreeTooLow { degree });
    }
    let size = tree_size(degree, &config).unwrap_or(usize::MAX);
    if size > config.node_cap {
        return Err(HilbertError::SizeCapExceeded { nodes: size, cap: config.node_cap });
    }
    let critical: Vec<SpherePoint> = critical_points(map)?.into_iter().map(|c| c.point).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    for attempt in 0..config.retry_cap.max(1) {
        let base = if attempt == 0 {
            base_hint
        } else {
            let spread = 0.05 * attempt as f64;
            let dz = Complex64::new(rng.random_range(-spread..spread), rng.random_range(-spread..spread));
            let dw = Complex64::new(rng.random_range(-spread..spread), rng.random_range(-spread..spread));
            match SpherePoint::new(base_hint.z() + dz, base_hint.w() + dw) {
                Some(p) => p,
                None => continue,
            }
        };
        if let Some(mut tree) = try_build(map, base, &config, &critical)? {
            tree.attempts = attempt + 1;
            return Ok(tree);
        }
    }
    Err(HilbertError::GenericBaseNotFound { attempts: config.retry_cap.max(1) })
}

fn try_build(
    map: &RationalMap,
    base: SpherePoint,
    config: &TreeConfig,
    critical: &[SpherePoint],
) -> Result<Option<OrbitTree>, HilbertError> {
    let degree = map.degree();
    let mut nodes = vec![TreeNode { id: 0, point: base, height: 0, image: None }];
    let mut fibers: Vec<Vec<usize>> = vec![Vec::new()];
    let mut frontier = vec![0usize];
    for level in 1..=config.backward_depth {
        let mut next = Vec::with_capacity(frontier.len() * degree);
        for &parent in &frontier {
            let pre = match preimages(map, &nodes[parent].point) {
                Ok(p) => p,
                Err(_) => return Ok(None),
            };
            for point in pre {
                match map.eval(&point) {
                    Ok(img) if img.distance(&nodes[parent].point) <= EDGE_TOL => {}
                    _ => return Ok(None),
                }
                let id = nodes.len();
                nodes.push(TreeNode { id, point, height: -(level as i64), image: Some(parent) });
                fibers.push(Vec::new());
                fibers[parent].push(id);
                next.push(id);
            }
        }
        frontier = next;
    }
    let mut below = 0usize;
    let mut x = base;
    for i in 1..=config.forward_depth {
        x = match map.eval(&x) {
            Ok(y) => y,
            Err(_) => return Ok(None),
        };
        let id = nodes.len();
        nodes[below].image = Some(id);
        nodes.push(TreeNode { id, point: x, height: i as i64, image: None });
        fibers.push(vec![below]);
        below = id;
    }
    if !passes_screen(map, &nodes, critical, config.max_screen_period) {
        return Ok(None);
    }
    Ok(Some(OrbitTree {
        nodes,
        preimages: fibers,
        forward_depth: config.forward_depth,
        backward_depth: config.backward_depth,
        degree,
        attempts: 0,
    }))
}

fn passes_screen(map: &RationalMap, nodes: &[TreeNode], critical: &[SpherePoint], p_max: usize) -> bool {
    for node in nodes {
        let p = node.point;
        if critical.iter().any(|c| c.distance(&p) <= GENERIC_TOL) {
            return false;
        }
        let mut y = p;
        for _ in 0..p_max {
            y = match map.eval(&y) {
                Ok(v) => v,
                Err(_) => return false,
            };
            if y.distance(&p) <= GENERIC_TOL {
                return false;
            }
        }
    }
    // Pairwise separation: sweep along one coordinate of the unit sphere,
    // which moves by at most the chordal distance, itself at most twice
    // the projective distance.
    let sphere_x = |p: &SpherePoint| 2.0 * (p.z() * p.w().conj()).re / (p.z().norm_sqr() + p.w().norm_sqr());
    let mut keyed: Vec<(f64, SpherePoint)> = nodes.iter().map(|n| (sphere_x(&n.point), n.point)).collect();
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    for i in 0..keyed.len() {
        for j in (i + 1)..keyed.len() {
            if keyed[j].0 - keyed[i].0 > 2.0 * GENERIC_TOL {
                break;
            }
            if keyed[i].1.distance(&keyed[j].1) <= GENERIC_TOL {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_map;

    #[test]
    fn node_counts() {
        let z2 = parse_map("z^2").unwrap();
        let cfg = TreeConfig { forward_depth: 2, backward_depth: 3, ..TreeConfig::default() };
        let t = build_orbit_tree(&z2, SpherePoint::finite(Complex64::new(0.7, 0.3)), cfg).unwrap();
        assert_eq!(t.len(), 17);
        assert_eq!(t.nodes().iter().filter(|n| n.height <= 0).count(), 15);
        let cheb = parse_map("z^2 - 2").unwrap();
        let cfg = TreeConfig { forward_depth: 1, backward_depth: 2, ..TreeConfig::default() };
        let t = build_orbit_tree(&cheb, SpherePoint::finite(Complex64::new(0.3, 0.4)), cfg).unwrap();
        assert_eq!(t.len(), 8);
    }

    #[test]
    fn critical_hint_is_rejected_and_resampled() {
        let z2 = parse_map("z^2").unwrap();
        let t = build_orbit_tree(&z2, SpherePoint::real(0.0), TreeConfig::default()).unwrap();
        assert!(t.attempts() > 1);
        assert!(t.point(0).distance(&SpherePoint::real(0.0)) > GENERIC_TOL);
    }

    #[test]
    fn edges_realize_the_map_and_fibers_are_full() {
        let m = parse_map("z^2 - 2").unwrap();
        let t = build_orbit_tree(&m, SpherePoint::finite(Complex64::new(0.3, 0.4)), TreeConfig::default()).unwrap();
        for n in t.nodes() {
            if let Some(img) = n.image {
                assert!(m.eval(&n.point).unwrap().distance(&t.point(img)) <= EDGE_TOL);
            }
            if n.height <= 0 && -n.height < t.backward_depth() as i64 {
                assert!(t.has_full_fiber(n.id));
            }
        }
        assert_eq!(t.walk(t.len() - 1, 1), None);
        assert_eq!(t.walk(0, t.forward_depth()), Some(t.len() - 1));
    }

    #[test]
    fn size_cap_is_checked_up_front() {
        let z2 = parse_map("z^2").unwrap();
        let cfg = TreeConfig { backward_depth: 99, ..TreeConfig::default() };
        assert!(matches!(
            build_orbit_tree(&z2, SpherePoint::real(0.5), cfg),
            Err(HilbertError::SizeCapExceeded { .. })
        ));
    }
}
