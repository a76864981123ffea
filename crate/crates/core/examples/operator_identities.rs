use cartan_dynamics::hilbert::{
    build_orbit_tree, commutant_witness, is_diagonal, normalizer_witness, rho_n, run_identity_suite, SampledFunction,
    TreeConfig,
};
use cartan_dynamics::parse::parse_map;
use cartan_dynamics::rational::SpherePoint;
use num_complex::Complex64;

fn main() {
    let map = parse_map("z^2 - 2").unwrap();
    let tree = build_orbit_tree(&map, SpherePoint::finite(Complex64::new(0.3, 0.4)), TreeConfig::default()).unwrap();
    println!("tree: {} nodes, walks up to length {}", tree.len(), tree.max_depth());

    for check in run_identity_suite(&tree, 200, 7).unwrap() {
        println!("  {:<24} {} ({} cases)", check.name, if check.passed { "ok" } else { "FAILED" }, check.cases);
    }

    // One step of the map as an operator, and what the diagonal says about it.
    let f = SampledFunction::seeded(&tree, 1);
    let step = rho_n(&tree, &f, 1).unwrap();
    println!("rho_1(f): {} entries, diagonal: {}", step.nnz(), is_diagonal(&step));
    if let Some((node, _)) = commutant_witness(&step) {
        println!("  does not commute with the indicator of node {node}");
    }
    println!("  normalizer test: {:?}", normalizer_witness(&step).unwrap());
}
