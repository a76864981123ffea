use cartan_dynamics::dynamics::{classify_critical_points, Budget, Classifier};
use cartan_dynamics::parse::parse_map;

fn main() {
    let src = std::env::args().nth(1).unwrap_or_else(|| "z^3 - 3z/4".into());
    let map = parse_map(&src).unwrap_or_else(|e| panic!("{}", e.caret_diagnostic(&src)));
    let classifier = Classifier::new(&map, Budget::default()).expect("degree is at least 2");

    println!("{map}");
    for c in classify_critical_points(&classifier).expect("critical points") {
        println!("  {} (local degree {}): {:?}", c.point, c.branch_index, c.membership.verdict);
        println!("    {}", c.membership.confidence_note);
    }
    for cycle in classifier.cycles() {
        println!("  cycle of period {} through {}: {:?}", cycle.period, cycle.representative, cycle.character);
    }
}
