//! Row gadgets shared by the staged compilers.
//!
//! Block i of row j owns the body cells (2i, 4j) and (2i+1, 4j). Gap g sits
//! between rows g-1 and g and holds three cells per column at heights
//! h = 1..3 above row g-1. Gap 0 lies below row 0 and exists only for the
//! first `zone` blocks.
//!
//! Row j with value v for variable i owns:
//! - its two body cells;
//! - a down part in gap j: column 1-v, heights 2 and 3;
//! - an up part in gap j+1: column v, heights 1 and 2, plus the tip at
//!   height 3 when the literal satisfies clause j+1.
//!
//! Rows holding different values for one variable collide at height 2.

use crate::geometry::{Dir, Pos};

use super::{CellLayout, Formula};

pub(crate) struct Rows<'a> {
    pub f: &'a Formula,
    pub n: usize,
    pub m: usize,
    /// Blocks that own a gap-0 down part.
    pub zone: usize,
}

impl<'a> Rows<'a> {
    pub fn new(f: &'a Formula, zone: usize) -> Rows<'a> {
        Rows { f, n: f.num_vars, m: f.num_clauses(), zone }
    }

    pub fn body(&self, i: usize, j: usize, c: usize) -> Pos {
        Pos::new((2 * i + c) as i32, 4 * j as i32)
    }

    pub fn gap(&self, i: usize, g: usize, c: usize, h: usize) -> Pos {
        Pos::new((2 * i + c) as i32, 4 * g as i32 - 4 + h as i32)
    }

    pub fn gap_exists(&self, i: usize, g: usize) -> bool {
        g >= 1 && g <= self.m || g == 0 && i < self.zone
    }

    /// Does row j with value v for variable i carry a tip into gap j+1?
    pub fn has_tip(&self, i: usize, j: usize, v: usize) -> bool {
        j < self.m && self.f.sat_by(j, i, v == 1)
    }

    /// Places all row and gap cells, with every body edge and every column
    /// edge joined.
    pub fn draw(&self, lay: &mut CellLayout) {
        for j in 0..=self.m {
            for i in 0..self.n {
                for c in 0..2 {
                    lay.add(self.body(i, j, c), format!("b{i}_{j}_{c}"));
                }
            }
        }
        for g in 0..=self.m {
            for i in 0..self.n {
                if !self.gap_exists(i, g) {
                    continue;
                }
                for c in 0..2 {
                    for h in 1..=3 {
                        lay.add(self.gap(i, g, c, h), format!("g{i}_{g}_{c}_{h}"));
                    }
                }
            }
        }
        for j in 0..=self.m {
            for x in 0..2 * self.n - 1 {
                lay.link(Pos::new(x as i32, 4 * j as i32), Dir::E);
            }
        }
        for g in 0..=self.m {
            for i in 0..self.n {
                if !self.gap_exists(i, g) {
                    continue;
                }
                for c in 0..2 {
                    let p = self.gap(i, g, c, 1);
                    if lay.contains(p.step(Dir::S)) {
                        lay.link(p, Dir::S);
                    }
                    lay.link(p, Dir::N);
                    lay.link(p.step(Dir::N), Dir::N);
                    lay.link(p.step(Dir::N).step(Dir::N), Dir::N);
                }
            }
        }
    }

    pub fn block(&self, i: usize, j: usize, v: usize) -> Vec<Pos> {
        let mut out = vec![self.body(i, j, 0), self.body(i, j, 1)];
        if self.gap_exists(i, j) {
            out.push(self.gap(i, j, 1 - v, 2));
            out.push(self.gap(i, j, 1 - v, 3));
        }
        if j < self.m {
            out.push(self.gap(i, j + 1, v, 1));
            out.push(self.gap(i, j + 1, v, 2));
            if self.has_tip(i, j, v) {
                out.push(self.gap(i, j + 1, v, 3));
            }
        }
        out
    }

    pub fn row(&self, j: usize, alpha: &[bool]) -> Vec<Pos> {
        (0..self.n).flat_map(|i| self.block(i, j, alpha[i] as usize)).collect()
    }

    /// Gap cells that no row supplies in some completed stack: height 1 of
    /// every column, and height 3 of a column whose literal misses the clause.
    /// Gap 0 is excluded.
    pub fn fillers(&self) -> Vec<(usize, usize, Pos)> {
        let mut out = Vec::new();
        for g in 1..=self.m {
            for i in 0..self.n {
                for c in 0..2 {
                    out.push((i, g, self.gap(i, g, c, 1)));
                    if !self.f.sat_by(g - 1, i, c == 1) {
                        out.push((i, g, self.gap(i, g, c, 3)));
                    }
                }
            }
        }
        out
    }
}
