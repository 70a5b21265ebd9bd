//! 3-SAT to a 4-stage UAV instance.
//!
//! Rows encode one assignment per variable block and stack only when the
//! shared assignment satisfies the clause between them. A grey foot on row 0
//! takes a green bar of 4m tiles at a spare site. A second bar fits beside
//! it only on a stack holding every row, which overshoots the target.

use std::collections::BTreeSet;

use crate::geometry::{is_tau_stable, Dir, Pos, TileId};
use crate::staged::{MixGraph, StagedSystem};

use super::rows::Rows;
use super::{
    bits, assignments, check_budget, CellLayout, Formula, Metadata, ReducedSystem, ReductionError,
    ReductionOptions, ReductionOutput, Target,
};

pub const GADGET_BINS: usize = 16;
const GREEN_BIN: usize = 16;
const GREY_BIN: usize = 17;
const SINGLE_BINS: usize = 18;

pub fn sat_to_staged_uav(f: &Formula) -> Result<ReductionOutput, ReductionError> {
    sat_to_staged_uav_with(f, &ReductionOptions::default())
}

pub fn sat_to_staged_uav_with(f: &Formula, opts: &ReductionOptions) -> Result<ReductionOutput, ReductionError> {
    f.validate()?;
    if f.forall_prefix != 0 {
        return Err(ReductionError::MalformedFormula("expected a plain 3-SAT formula (k = 0)".into()));
    }
    if f.num_vars == 0 || f.clauses.is_empty() {
        return Err(ReductionError::MalformedFormula("need at least one variable and one clause".into()));
    }
    let rows = Rows::new(f, 0);
    let (n, m) = (rows.n, rows.m);
    let needed = 2 * n * (m + 1) + 6 * n * m + 4 + 4 * m;
    check_budget(needed, opts)?;

    let mut lay = CellLayout::default();
    rows.draw(&mut lay);
    let p = Pos::new;
    let grey = [p(-1, 0), p(-2, 0), p(-3, 0), p(-3, 1)];
    for (k, &g) in grey.iter().enumerate() {
        lay.add(g, format!("grey{k}"));
    }
    lay.link(p(0, 0), Dir::W);
    lay.link(p(-1, 0), Dir::W);
    lay.link(p(-2, 0), Dir::W);
    lay.link(p(-3, 0), Dir::N);
    lay.coop(p(-1, 0), Dir::N, "gb");
    lay.coop(p(-2, 0), Dir::N, "gb");
    lay.coop(p(-3, 1), Dir::E, "gs");
    let top = 4 * m as i32;
    let bar: Vec<Pos> = (1..=top).map(|y| p(-2, y)).collect();
    for (k, &b) in bar.iter().enumerate() {
        lay.add(b, format!("green{k}"));
        if k > 0 {
            lay.link(b, Dir::S);
        }
    }
    lay.coop(bar[0], Dir::S, "gb");
    lay.coop(bar[0], Dir::W, "gs");
    lay.coop(bar[bar.len() - 1], Dir::E, "gt");
    lay.coop(p(0, top), Dir::W, "gt");
    let built = lay.build()?;

    let target = built.assembly(lay.cells())?;
    debug_assert!(is_tau_stable(&target, &built.tiles, 2)?);

    let mut meta = Metadata::default();
    let mut stage1: Vec<BTreeSet<TileId>> = vec![BTreeSet::new(); 22];
    for j in 0..=m {
        for i in 0..n {
            for v in 0..2 {
                let cells = rows.block(i, j, v);
                let key = v * 8 + rows.has_tip(i, j, v) as usize * 4 + (i % 2) * 2 + j % 2;
                stage1[key].extend(built.tile_ids(cells));
                meta.blocks.push((format!("block i={i} j={j} v={v}"), rows.body(i, j, 0)));
            }
        }
    }
    stage1[GREEN_BIN].extend(built.tile_ids(bar.iter().copied()));
    stage1[GREY_BIN].extend(built.tile_ids(grey));
    for (i, g, cell) in rows.fillers() {
        stage1[SINGLE_BINS + (i % 2) * 2 + g % 2].extend(built.tile_ids([cell]));
    }

    // Stage 2: 0 even rows, 1 odd rows, 2 green, 3 grey, 4 singles.
    // Stage 3: 0 main, 1 singles. Stage 4: 0 final.
    let mut mix = MixGraph::new(vec![22, 5, 2, 1]);
    for b in 0..GADGET_BINS {
        mix.add_edge((1, b), (2, b % 2));
    }
    mix.add_edge((1, GREEN_BIN), (2, 2));
    mix.add_edge((1, GREY_BIN), (2, 3));
    for b in SINGLE_BINS..22 {
        mix.add_edge((1, b), (2, 4));
    }
    for b in 0..4 {
        mix.add_edge((2, b), (3, 0));
    }
    mix.add_edge((2, 4), (3, 1));
    mix.add_edge((3, 0), (4, 0));
    mix.add_edge((3, 1), (4, 0));

    for key in 0..GADGET_BINS {
        meta.bin_roles.insert(
            (1, key),
            format!("gadget v={} tip={} i%2={} j%2={}", key / 8, key / 4 % 2, key / 2 % 2, key % 2),
        );
    }
    meta.bin_roles.insert((1, GREEN_BIN), "green bar".into());
    meta.bin_roles.insert((1, GREY_BIN), "grey foot".into());
    for b in 0..4 {
        meta.bin_roles.insert((1, SINGLE_BINS + b), format!("fillers i%2={} gap%2={}", b / 2, b % 2));
    }
    for (b, r) in ["even rows", "odd rows", "green pass", "grey pass", "filler pass"].iter().enumerate() {
        meta.bin_roles.insert((2, b), r.to_string());
    }
    meta.bin_roles.insert((3, 0), "row stacking".into());
    meta.bin_roles.insert((3, 1), "filler pass".into());
    meta.bin_roles.insert((4, 0), "merge".into());
    meta.stage_roles = vec![
        "build blocks".into(),
        "join blocks into rows".into(),
        "stack rows, attach grey and green".into(),
        "fill gaps".into(),
    ];
    meta.pieces.insert("green bar".into(), built.assembly(bar.iter().copied())?);
    meta.pieces.insert("grey foot".into(), built.assembly(grey)?);
    if n <= 4 {
        for j in 0..=m {
            for a in assignments(n) {
                meta.pieces.insert(format!("row {j} {}", bits(&a)), built.assembly(rows.row(j, &a))?);
            }
        }
    }
    meta.notes.push(format!("blocks: 2 columns, gaps of 3 cells; target {} tiles", target.size()));

    let stage1 = stage1.into_iter().map(|s| s.into_iter().collect()).collect();
    let sys = StagedSystem::new(mix, stage1, built.tiles.clone(), 2)?;
    Ok(ReductionOutput { system: ReducedSystem::Staged(sys), target: Target::Assembly(target), meta })
}
