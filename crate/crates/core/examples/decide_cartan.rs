use cartan_dynamics::cartan::{decide_cartan, SpaceSelector};
use cartan_dynamics::dynamics::Budget;
use cartan_dynamics::parse::parse_map;

fn main() {
    let maps = ["z^2", "z^2 - 2", "z^2 - 1", "(z^2 + 1)/(2z)"];
    for src in maps {
        let map = parse_map(src).expect("example maps parse");
        for space in [SpaceSelector::Julia, SpaceSelector::Fatou, SpaceSelector::Sphere] {
            let report = decide_cartan(&map, space, Budget::default()).expect("degree is at least 2");
            println!("{src:>16}  {space:<6}  {:?}", report.verdict);
            for w in &report.witnesses {
                println!("{:>26}{} e={} {:?}", "", w.point, w.branch_index, w.membership.verdict);
            }
        }
    }
}
