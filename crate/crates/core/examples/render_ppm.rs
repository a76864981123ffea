use cartan_dynamics::cli::ppm;
use cartan_dynamics::dynamics::{escape_grid, Viewport, RENDER_MAX_ITER};
use cartan_dynamics::parse::parse_map;

fn main() -> std::io::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "basilica.ppm".into());
    let map = parse_map("z^2 - 1").unwrap();
    let grid = escape_grid(&map, Viewport::new(-2.0, -1.25, 2.0, 1.25), (320, 200), RENDER_MAX_ITER, 0xC0FFEE).unwrap();
    std::fs::write(&out, ppm::encode(&grid))?;
    println!("wrote {out}: {}x{}, {} attracting cycles", grid.width, grid.height, grid.attractor_count);
    Ok(())
}
