//! Plain-text reports: `key: value` lines, then indented blocks, then an
//! optional timing line.

use std::fmt::Write;
use std::time::Duration;

use tas_core::{Assembly, TileSet};

#[derive(Clone, Debug, Default)]
pub struct Report {
    fields: Vec<(String, String)>,
    blocks: Vec<(String, Vec<String>)>,
    pub elapsed: Option<Duration>,
}

impl Report {
    pub fn new(command: &str) -> Report {
        let mut r = Report::default();
        r.field("command", command);
        r
    }

    pub fn field(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    pub fn block(&mut self, title: &str, lines: Vec<String>) -> &mut Self {
        self.blocks.push((title.to_string(), lines));
        self
    }

    pub fn assembly(&mut self, title: &str, a: &Assembly, ts: &TileSet) -> &mut Self {
        self.block(title, assembly_lines(a, ts))
    }

    pub fn render(&self, timing: bool) -> String {
        let mut out = String::new();
        for (k, v) in &self.fields {
            let _ = writeln!(out, "{k}: {v}");
        }
        for (title, lines) in &self.blocks {
            let _ = writeln!(out, "{title}:");
            for l in lines {
                let _ = writeln!(out, "  {l}");
            }
        }
        if let (true, Some(d)) = (timing, self.elapsed) {
            let _ = writeln!(out, "time: {:.3} ms", d.as_secs_f64() * 1e3);
        }
        out
    }
}

/// `x y id name` per cell, in canonical order.
pub fn assembly_lines(a: &Assembly, ts: &TileSet) -> Vec<String> {
    a.cells().iter().map(|&(p, t)| format!("{} {} {} {}", p.x, p.y, t, ts.tile(t).name)).collect()
}
