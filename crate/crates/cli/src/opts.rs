//! Parsers for compound flag values.

/// Tile grid written as `COLSxROWS`, e.g. `8x8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tiles {
    pub x: usize,
    pub y: usize,
}

pub fn parse_tiles(s: &str) -> Result<Tiles, String> {
    let (x, y) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected COLSxROWS, e.g. 8x8, got {s:?}"))?;
    let parse = |part: &str, axis: &str| {
        part.trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| format!("{axis} tile count must be a positive integer, got {part:?}"))
    };
    Ok(Tiles {
        x: parse(x, "column")?,
        y: parse(y, "row")?,
    })
}

/// Airlight color written as `R,G,B` with each channel in (0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Airlight(pub [f32; 3]);

pub fn parse_airlight(s: &str) -> Result<Airlight, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected R,G,B, e.g. 0.9,0.8,0.6, got {s:?}"));
    }
    let mut rgb = [0.0f32; 3];
    for (slot, part) in rgb.iter_mut().zip(&parts) {
        let v: f32 = part
            .trim()
            .parse()
            .map_err(|_| format!("channel {part:?} is not a number"))?;
        if !(v > 0.0 && v <= 1.0) {
            return Err(format!("channel {v} is outside (0, 1]"));
        }
        *slot = v;
    }
    Ok(Airlight(rgb))
}
