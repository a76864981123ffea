use crate::dynamics::{EscapeGrid, GridCode};

/// Base colors of attracting basins, indexed by attractor modulo length.
pub const BASIN_COLORS: [[u8; 3]; 4] = [[230, 160, 40], [60, 200, 90], [200, 60, 160], [90, 180, 220]];

/// Color of one grid cell.
///
/// | code                      | color                                              |
/// |---------------------------|----------------------------------------------------|
/// | `Escaped(k)`              | `(s/4, s/2, s)` with `s = 255 - 4 min(k, 63)`      |
/// | `Attracted { a, k }`      | `BASIN_COLORS[a % 4]` scaled by `1 - min(k, 48)/64` |
/// | `NearJulia`               | white                                              |
/// | `Unresolved`              | black                                              |
pub fn color(code: GridCode) -> [u8; 3] {
    match code {
        GridCode::Escaped(k) => {
            let s = 255 - 4 * k.min(63) as u32;
            [(s / 4) as u8, (s / 2) as u8, s as u8]
        }
        GridCode::Attracted { attractor, iterations } => {
            let base = BASIN_COLORS[attractor % BASIN_COLORS.len()];
            let keep = 64 - iterations.min(48) as u32;
            base.map(|c| (c as u32 * keep / 64) as u8)
        }
        GridCode::NearJulia => [255, 255, 255],
        GridCode::Unresolved => [0, 0, 0],
    }
}

/// Binary PPM (P6, maxval 255), rows top to bottom.
pub fn encode(grid: &EscapeGrid) -> Vec<u8> {
    let header = format!("P6\n{} {}\n255\n", grid.width, grid.height);
    let mut out = Vec::with_capacity(header.len() + 3 * grid.codes.len());
    out.extend_from_slice(header.as_bytes());
    for &code in &grid.codes {
        out.extend_from_slice(&color(code));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_size() {
        let grid =
            EscapeGrid { width: 256, height: 256, codes: vec![GridCode::NearJulia; 256 * 256], attractor_count: 0 };
        let bytes = encode(&grid);
        assert_eq!(bytes.len(), 15 + 3 * 256 * 256);
        assert!(bytes.starts_with(b"P6\n256 256\n255\n"));
    }

    #[test]
    fn palette_entries() {
        assert_eq!(color(GridCode::Escaped(0)), [63, 127, 255]);
        assert_eq!(color(GridCode::Escaped(1000)), [0, 1, 3]);
        assert_eq!(color(GridCode::Attracted { attractor: 0, iterations: 0 }), [230, 160, 40]);
        assert_eq!(color(GridCode::Attracted { attractor: 5, iterations: 100 }), [15, 50, 22]);
        assert_eq!(color(GridCode::Unresolved), [0, 0, 0]);
    }
}
