use cartan_dynamics::parse::parse_map;

fn main() {
    let inputs = ["z^2 - 2", "(z^2 + 1)/(2z)", "2z(z - 1)/(z - 1)", "(1 + 2i) z^3 / (z - 0.5)", "z^^2", "1/(z - z)"];
    for src in inputs {
        match parse_map(src) {
            Ok(map) => println!("{src:<26} -> {map}   (degree {})", map.degree()),
            Err(e) => println!("{src:<26} -> error: {}", e.caret_diagnostic(src).replace('\n', "\n    ")),
        }
    }
}
