//! ∀∃SAT to a 7-stage UAV instance.
//!
//! Rows are the 3-SAT rows with one extra gap below row 0 for the universal
//! blocks. A test for universal values b is a grey and green frame holding a
//! body row under that gap, with teeth that clash with any row 0 whose
//! universal values differ from b. A test binds only to a full stack, through
//! the ears on rows 0 and m.
//!
//! Stacks that did not get a test are tagged with a duple and then receive the
//! frame in two halves, so every assembly that holds row 0 ends up carrying
//! the frame. The last stage fills every remaining cell. A test left without a
//! stack is stuck and stays terminal.

use std::collections::BTreeSet;

use crate::geometry::{is_tau_stable, Dir, Pos, TileId};
use crate::staged::{MixGraph, StagedSystem};

use super::rows::Rows;
use super::{
    assignments, bits, check_budget, CellLayout, Formula, Metadata, ReducedSystem, ReductionError, ReductionOptions,
    ReductionOutput, Target,
};

// Stage-1 bins.
const ROW0_BINS: usize = 16;
const TEST_BINS: usize = 20;
const FRAME_BIN: usize = 24;
const DUPLE_BIN: usize = 25;
const TOP_BIN: usize = 26;
const BOTTOM_BIN: usize = 27;
const BOTTOM_BLOCK_BINS: usize = 28;
const SINGLE_BIN: usize = 32;
const STAGE1_BINS: usize = 33;

pub fn aesat_to_staged_uav(f: &Formula) -> Result<ReductionOutput, ReductionError> {
    aesat_to_staged_uav_with(f, &ReductionOptions::default())
}

pub fn aesat_to_staged_uav_with(f: &Formula, opts: &ReductionOptions) -> Result<ReductionOutput, ReductionError> {
    f.validate()?;
    let k = f.forall_prefix;
    if k == 0 || k > f.num_vars {
        return Err(ReductionError::MalformedFormula("expected 1 <= k <= n universal variables".into()));
    }
    if f.clauses.is_empty() {
        return Err(ReductionError::MalformedFormula("need at least one clause".into()));
    }
    let rows = Rows::new(f, k);
    let (n, m) = (rows.n, rows.m);
    let needed = 2 * n * (m + 1) + 6 * n * m + 8 * k + 4 * m + 10;
    check_budget(needed, opts)?;

    let p = Pos::new;
    let top = 4 * m as i32;
    let mut lay = CellLayout::default();
    let test_body: Vec<Pos> = (0..2 * k as i32).map(|x| p(x, -4)).collect();
    for &c in &test_body {
        lay.add(c, format!("tb{}", c.x));
    }
    rows.draw(&mut lay);
    for x in 0..2 * k as i32 - 1 {
        lay.link(p(x, -4), Dir::E);
    }

    let grey: Vec<Pos> = (-4..=0).map(|y| p(-2, y)).collect();
    let green: Vec<Pos> = (1..=top).map(|y| p(-2, y)).collect();
    for &c in &grey {
        lay.add(c, format!("grey{}", -c.y));
    }
    for &c in &green {
        lay.add(c, format!("green{}", c.y));
    }
    for &c in grey.iter().chain(&green).skip(1) {
        lay.link(c, Dir::S);
    }
    let (ear0, earm, ear_test, d1, d2) = (p(-1, 0), p(-1, top), p(-1, -4), p(-2, -1), p(-1, -1));
    lay.add(ear0, "ear0".into());
    lay.add(earm, "earm".into());
    lay.add(ear_test, "ear_test".into());
    lay.add(d2, "duple".into());
    lay.link(ear0, Dir::E);
    lay.link(earm, Dir::E);
    lay.link(ear_test, Dir::E);
    lay.link(ear_test, Dir::W);
    lay.link(d2, Dir::N);
    lay.link(d2, Dir::W);
    lay.coop(p(-2, 0), Dir::E, "g0");
    lay.coop(ear0, Dir::W, "g0");
    lay.coop(p(-2, top), Dir::E, "gt");
    lay.coop(earm, Dir::W, "gt");
    let built = lay.build()?;

    let target = built.assembly(lay.cells())?;
    debug_assert!(is_tau_stable(&target, &built.tiles, 2)?);

    let mut meta = Metadata::default();
    let mut stage1: Vec<BTreeSet<TileId>> = vec![BTreeSet::new(); STAGE1_BINS];
    for j in 0..=m {
        for i in 0..n {
            for v in 0..2 {
                let mut cells = rows.block(i, j, v);
                if i == 0 && j == m {
                    cells.push(earm);
                }
                if i == 0 && j == 0 {
                    cells.push(ear0);
                }
                let key = if j == 0 {
                    ROW0_BINS + v * 2 + i % 2
                } else {
                    v * 8 + rows.has_tip(i, j, v) as usize * 4 + (i % 2) * 2 + j % 2
                };
                stage1[key].extend(built.tile_ids(cells));
                meta.blocks.push((format!("block i={i} j={j} v={v}"), rows.body(i, j, 0)));
            }
        }
    }
    for i in 0..k {
        for b in 0..2 {
            let cells = [p(2 * i as i32, -4), p(2 * i as i32 + 1, -4), rows.gap(i, 0, b, 1), rows.gap(i, 0, b, 2)];
            stage1[TEST_BINS + b * 2 + i % 2].extend(built.tile_ids(cells));
        }
    }
    let frame: Vec<Pos> = grey.iter().chain(&green).copied().chain([ear_test]).collect();
    stage1[FRAME_BIN].extend(built.tile_ids(frame.iter().copied()));
    stage1[DUPLE_BIN].extend(built.tile_ids([d1, d2]));
    let g_top: Vec<Pos> = green.iter().copied().chain([p(-2, 0)]).collect();
    let g_bottom_frame = [p(-2, -2), p(-2, -3), p(-2, -4), ear_test];
    stage1[TOP_BIN].extend(built.tile_ids(g_top.iter().copied()));
    stage1[BOTTOM_BIN].extend(built.tile_ids(g_bottom_frame));
    // A bottom half for universal values b fills the whole zone of a row 0
    // holding b, so tagged assemblies need no zone singles later.
    let bottom_block = |i: usize, b: usize| {
        let mut cells = vec![p(2 * i as i32, -4), p(2 * i as i32 + 1, -4), rows.gap(i, 0, 1 - b, 1)];
        cells.extend((1..=3).map(|h| rows.gap(i, 0, b, h)));
        cells
    };
    for i in 0..k {
        for b in 0..2 {
            stage1[BOTTOM_BLOCK_BINS + b * 2 + i % 2].extend(built.tile_ids(bottom_block(i, b)));
        }
    }
    // The zone singles only complete tested stacks: height 3 above the test
    // teeth and height 1 under the row-0 parts.
    let singles = &mut stage1[SINGLE_BIN];
    singles.extend(built.tile_ids(rows.fillers().into_iter().map(|(_, _, c)| c)));
    for i in 0..k {
        for c in 0..2 {
            singles.extend(built.tile_ids([rows.gap(i, 0, c, 1), rows.gap(i, 0, c, 3)]));
        }
    }
    singles.extend(built.tile_ids([d2]));

    let mut mix = MixGraph::new(vec![STAGE1_BINS, 8, 8, 7, 5, 3, 1]);
    // Stage 2: 0 row 0, 1 odd rows, 2 even rows, 3 tests, 4 duples,
    // 5 top halves, 6 bottom halves, 7 singles.
    for b in 0..16 {
        mix.add_edge((1, b), (2, 1 + (b + 1) % 2));
    }
    for b in ROW0_BINS..TEST_BINS {
        mix.add_edge((1, b), (2, 0));
    }
    for b in TEST_BINS..=FRAME_BIN {
        mix.add_edge((1, b), (2, 3));
    }
    mix.add_edge((1, DUPLE_BIN), (2, 4));
    mix.add_edge((1, TOP_BIN), (2, 5));
    for b in [BOTTOM_BIN, BOTTOM_BLOCK_BINS, BOTTOM_BLOCK_BINS + 1, BOTTOM_BLOCK_BINS + 2, BOTTOM_BLOCK_BINS + 3] {
        mix.add_edge((1, b), (2, 6));
    }
    mix.add_edge((1, SINGLE_BIN), (2, 7));
    // Stage 3: 0 stacks, 1 upper stacks, 2 absorbers, 3.. as stage 2.
    for b in 0..3 {
        mix.add_edge((2, b), (3, 0));
    }
    mix.add_edge((2, 1), (3, 1));
    mix.add_edge((2, 2), (3, 1));
    mix.add_edge((2, 0), (3, 2));
    for b in 3..8 {
        mix.add_edge((2, b), (3, b));
    }
    // Stage 4: 0 tested stacks, 1 upper, 2 absorbers, 3 duples, 4 top,
    // 5 bottom, 6 singles.
    mix.add_edge((3, 0), (4, 0));
    mix.add_edge((3, 3), (4, 0));
    mix.add_edge((3, 1), (4, 1));
    mix.add_edge((3, 2), (4, 2));
    for b in 4..8 {
        mix.add_edge((3, b), (4, b - 1));
    }
    // Stage 5: 0 tagging, 1 upper, 2 top, 3 bottom, 4 singles.
    for b in [0, 2, 3] {
        mix.add_edge((4, b), (5, 0));
    }
    mix.add_edge((4, 1), (5, 1));
    for b in 4..7 {
        mix.add_edge((4, b), (5, b - 2));
    }
    // Stage 6: 0 frame halves, 1 upper, 2 singles.
    for b in [0, 2, 3] {
        mix.add_edge((5, b), (6, 0));
    }
    mix.add_edge((5, 1), (6, 1));
    mix.add_edge((5, 4), (6, 2));
    for b in 0..3 {
        mix.add_edge((6, b), (7, 0));
    }

    for key in 0..16 {
        meta.bin_roles.insert(
            (1, key),
            format!("gadget v={} tip={} i%2={} j%2={}", key / 8, key / 4 % 2, key / 2 % 2, key % 2),
        );
    }
    for b in 0..4 {
        meta.bin_roles.insert((1, ROW0_BINS + b), format!("row 0 v={} i%2={}", b / 2, b % 2));
        meta.bin_roles.insert((1, TEST_BINS + b), format!("test block b={} i%2={}", b / 2, b % 2));
        meta.bin_roles.insert((1, BOTTOM_BLOCK_BINS + b), format!("bottom block b={} i%2={}", b / 2, b % 2));
    }
    meta.bin_roles.insert((1, FRAME_BIN), "test frame".into());
    meta.bin_roles.insert((1, DUPLE_BIN), "duple".into());
    meta.bin_roles.insert((1, TOP_BIN), "top half".into());
    meta.bin_roles.insert((1, BOTTOM_BIN), "bottom frame".into());
    meta.bin_roles.insert((1, SINGLE_BIN), "singles".into());
    let tail = ["duples", "top halves", "bottom halves", "singles"];
    for (b, r) in ["row 0", "odd rows", "even rows", "tests"].iter().chain(&tail).enumerate() {
        meta.bin_roles.insert((2, b), r.to_string());
    }
    for (b, r) in ["stacks", "upper stacks", "absorbers", "tests"].iter().chain(&tail).enumerate() {
        meta.bin_roles.insert((3, b), r.to_string());
    }
    for (b, r) in ["test attachment", "upper stacks", "absorbers"].iter().chain(&tail).enumerate() {
        meta.bin_roles.insert((4, b), r.to_string());
    }
    for (b, r) in ["duple tagging", "upper stacks"].iter().chain(&tail[1..]).enumerate() {
        meta.bin_roles.insert((5, b), r.to_string());
    }
    for (b, r) in ["frame halves", "upper stacks", "singles"].iter().enumerate() {
        meta.bin_roles.insert((6, b), r.to_string());
    }
    meta.bin_roles.insert((7, 0), "merge".into());
    meta.stage_roles = vec![
        "build blocks, test parts, duples and frame halves".into(),
        "join rows and tests".into(),
        "stack rows".into(),
        "attach tests to full stacks".into(),
        "tag untested stacks with duples".into(),
        "attach frame halves to duples".into(),
        "fill remaining cells".into(),
    ];

    let test_cells = |b: &[bool]| -> Vec<Pos> {
        let mut cells = frame.clone();
        cells.extend(&test_body);
        for (i, &v) in b.iter().enumerate() {
            cells.push(rows.gap(i, 0, v as usize, 1));
            cells.push(rows.gap(i, 0, v as usize, 2));
        }
        cells
    };
    for b in assignments(k) {
        meta.pieces.insert(format!("test {}", bits(&b)), built.assembly(test_cells(&b))?);
    }
    meta.pieces.insert("duple".into(), built.assembly([d1, d2])?);
    meta.pieces.insert("top half".into(), built.assembly(g_top)?);
    meta.pieces.insert("green bar".into(), built.assembly(green.iter().copied())?);
    for b in assignments(k) {
        let cells = g_bottom_frame.iter().copied().chain(b.iter().enumerate().flat_map(|(i, &v)| bottom_block(i, v as usize)));
        meta.pieces.insert(format!("bottom half {}", bits(&b)), built.assembly(cells)?);
    }
    if n <= 4 {
        for a in assignments(n) {
            let mut stack: Vec<Pos> = (0..=m).flat_map(|j| rows.row(j, &a)).collect();
            stack.extend([ear0, earm]);
            meta.pieces.insert(format!("row 0 {}", bits(&a)), built.assembly(rows.row(0, &a).into_iter().chain([ear0]))?);
            if (0..m).all(|j| (0..n).any(|i| rows.has_tip(i, j, a[i] as usize))) {
                meta.pieces.insert(format!("stack {}", bits(&a)), built.assembly(stack)?);
            }
        }
    }
    meta.notes.push(format!("zone under row 0 for {k} universal blocks; target {} tiles", target.size()));

    let stage1 = stage1.into_iter().map(|s| s.into_iter().collect()).collect();
    let sys = StagedSystem::new(mix, stage1, built.tiles.clone(), 2)?;
    Ok(ReductionOutput { system: ReducedSystem::Staged(sys), target: Target::Assembly(target), meta })
}
