use cartan_dynamics::rational::Polynomial;
use cartan_dynamics::roots::find_roots;

fn main() {
    // (z - 1)^3 (z + 2) (z^2 + 1), expanded
    let p = Polynomial::from_real(&[-2.0, 5.0, -5.0, 4.0, -2.0, -1.0, 1.0]);
    let roots = find_roots(&p).unwrap();
    for r in roots.roots() {
        println!("{:>22} multiplicity {} residual {:.1e}", format!("{:.6}", r.location), r.multiplicity, r.residual);
    }
    println!("total multiplicity {}", roots.total_multiplicity());
}
