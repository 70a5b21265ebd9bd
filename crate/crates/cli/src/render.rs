//! ASCII and SVG drawings of assemblies and shapes.

use std::collections::BTreeMap;
use std::fmt::Write;

use tas_core::{Assembly, Dir, Pos, Shape, TileSet};

const SYMBOLS: &str = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";

/// One character per cell, top row first, followed by a legend. Empty cells
/// are `.`. With more distinct tiles than symbols every tile is drawn `#`.
pub fn ascii(a: &Assembly, ts: &TileSet) -> String {
    let mut ids: Vec<u32> = a.tile_ids().collect();
    ids.sort();
    ids.dedup();
    let many = ids.len() > SYMBOLS.len();
    let sym: BTreeMap<u32, char> =
        ids.iter().zip(SYMBOLS.chars()).map(|(&t, c)| (t, if many { '#' } else { c })).collect();
    let mut out = grid(a.cells().iter().map(|&(p, t)| (p, sym[&t])));
    out.push('\n');
    if many {
        let _ = writeln!(out, "# any of {} tile types", ids.len());
    } else {
        for (t, c) in &sym {
            let _ = writeln!(out, "{c} {}", ts.tile(*t).name);
        }
    }
    out
}

/// `#` per occupied cell.
pub fn ascii_shape(s: &Shape) -> String {
    grid(s.cells().iter().map(|&p| (p, '#')))
}

fn grid(cells: impl Iterator<Item = (Pos, char)>) -> String {
    let cells: BTreeMap<Pos, char> = cells.collect();
    let (x0, x1) = (cells.keys().map(|p| p.x).min().unwrap_or(0), cells.keys().map(|p| p.x).max().unwrap_or(0));
    let (y0, y1) = (cells.keys().map(|p| p.y).min().unwrap_or(0), cells.keys().map(|p| p.y).max().unwrap_or(0));
    let mut out = String::new();
    for y in (y0..=y1).rev() {
        for x in x0..=x1 {
            out.push(*cells.get(&Pos::new(x, y)).unwrap_or(&'.'));
        }
        out.push('\n');
    }
    out
}

const UNIT: i64 = 20;
const PALETTE: [&str; 8] = ["#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5"];

/// Unit squares, y up, with one tick per unit of glue strength on each side.
/// Every square carries its lattice position as `data-x` / `data-y`.
pub fn svg(a: &Assembly, ts: &TileSet) -> String {
    let cells: Vec<(Pos, Option<u32>)> = a.cells().iter().map(|&(p, t)| (p, Some(t))).collect();
    draw(&cells, Some(ts))
}

pub fn svg_shape(s: &Shape) -> String {
    let cells: Vec<(Pos, Option<u32>)> = s.cells().iter().map(|&p| (p, None)).collect();
    draw(&cells, None)
}

fn draw(cells: &[(Pos, Option<u32>)], ts: Option<&TileSet>) -> String {
    let x0 = cells.iter().map(|c| c.0.x).min().unwrap_or(0) as i64;
    let y1 = cells.iter().map(|c| c.0.y).max().unwrap_or(0) as i64;
    let w = cells.iter().map(|c| c.0.x as i64 - x0 + 1).max().unwrap_or(1);
    let h = cells.iter().map(|c| y1 - c.0.y as i64 + 1).max().unwrap_or(1);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{}" viewBox="0 0 {} {}">"#,
        w * UNIT + 2,
        h * UNIT + 2,
        w * UNIT + 2,
        h * UNIT + 2
    );
    for &(p, t) in cells {
        let (sx, sy) = ((p.x as i64 - x0) * UNIT + 1, (y1 - p.y as i64) * UNIT + 1);
        let fill = t.map_or("#cccccc", |t| PALETTE[t as usize % PALETTE.len()]);
        let title = match (t, ts) {
            (Some(t), Some(ts)) => format!("<title>{}</title>", escape(&ts.tile(t).name)),
            _ => String::new(),
        };
        let _ = writeln!(
            out,
            r##"<rect x="{sx}" y="{sy}" width="{UNIT}" height="{UNIT}" fill="{fill}" stroke="#333333" data-x="{}" data-y="{}">{title}</rect>"##,
            p.x, p.y
        );
        let (Some(t), Some(ts)) = (t, ts) else { continue };
        for d in Dir::ALL {
            let g = ts.tile(t).glue(d);
            let s = ts.glues.self_strength(g) as i64;
            for k in 0..s {
                let off = UNIT / 2 + (2 * k - (s - 1)) * 3;
                let (ax, ay, bx, by) = match d {
                    Dir::N => (sx + off, sy, sx + off, sy + 4),
                    Dir::S => (sx + off, sy + UNIT - 4, sx + off, sy + UNIT),
                    Dir::E => (sx + UNIT - 4, sy + off, sx + UNIT, sy + off),
                    Dir::W => (sx, sy + off, sx + 4, sy + off),
                };
                let _ = writeln!(out, r##"<line x1="{ax}" y1="{ay}" x2="{bx}" y2="{by}" stroke="#000000"/>"##);
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use tas_core::{canonicalize, Glue, GlueFunction};

    fn tiles() -> TileSet {
        let mut gf = GlueFunction::new();
        let g = gf.add("g", 2);
        let mut ts = TileSet::new(gf);
        ts.add_tile("l", [Glue::NULL, g, Glue::NULL, Glue::NULL]).unwrap();
        ts.add_tile("r", [Glue::NULL, Glue::NULL, Glue::NULL, g]).unwrap();
        ts
    }

    #[test]
    fn single_tile() {
        assert_eq!(ascii(&Assembly::single(0), &tiles()), "A\n\nA l\n");
    }

    #[test]
    fn line_of_two() {
        let a = canonicalize([(Pos::new(0, 0), 0), (Pos::new(1, 0), 1)]).unwrap();
        assert_eq!(ascii(&a, &tiles()), "AB\n\nA l\nB r\n");
        let s = svg(&a, &tiles());
        assert_eq!(s.matches("<rect").count(), 2);
        assert_eq!(s.matches("<line").count(), 4);
    }
}
