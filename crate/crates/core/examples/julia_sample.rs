use cartan_dynamics::dynamics::julia_sample;
use cartan_dynamics::parse::parse_map;

fn main() {
    // The Julia set of z^2 is the unit circle, that of z^2 - 2 is [-2, 2].
    for src in ["z^2", "z^2 - 2", "z^2 + 0.25i"] {
        let map = parse_map(src).unwrap();
        let points = julia_sample(&map, 1000, 20, 0xC0FFEE).unwrap();
        let finite: Vec<_> = points.iter().filter_map(|p| p.to_complex()).collect();
        let (rmin, rmax) =
            finite.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), z| (lo.min(z.norm()), hi.max(z.norm())));
        let max_im = finite.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
        println!("{src:>12}: {} points, |z| in [{rmin:.6}, {rmax:.6}], max |Im z| = {max_im:.3e}", finite.len());
    }
}
