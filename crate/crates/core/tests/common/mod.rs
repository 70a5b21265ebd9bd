//! Random systems and brute-force oracles shared by the property suites.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use tas_core::staged::run_staged;
use tas_core::twohanded::producibles;
use tas_core::verifiers::{pibv, staged_uav, staged_usv, tibv, uibv};
use tas_core::{
    canonicalize, shape_of, Answer, Assembly, Bin, Dir, Glue, GlueFunction, MixGraph, Pos, StagedRunResult, StagedSystem, TileSet,
};

/// A random connected polyomino of `n` cells.
pub fn polyomino<R: Rng>(rng: &mut R, n: usize) -> Vec<Pos> {
    let mut cells = vec![Pos::ORIGIN];
    while cells.len() < n {
        let from = *cells.choose(rng).unwrap();
        let to = from.step(Dir::ALL[rng.gen_range(0..4)]);
        if !cells.contains(&to) {
            cells.push(to);
        }
    }
    cells
}

/// An assembly with one tile type per cell, where each adjacent pair bonds
/// with a random strength in {0, 1, 2}. Returns the tiles, the assembly and
/// the weighted edges between cell indices.
pub fn weighted_assembly<R: Rng>(rng: &mut R, n: usize) -> (TileSet, Assembly, Vec<(usize, usize, u32)>) {
    let cells = polyomino(rng, n);
    let mut gf = GlueFunction::new();
    let mut glues = vec![[Glue::NULL; 4]; n];
    let mut edges = Vec::new();
    for (i, &p) in cells.iter().enumerate() {
        for d in [Dir::E, Dir::N] {
            let Some(j) = cells.iter().position(|&q| q == p.step(d)) else { continue };
            let s = rng.gen_range(0..=2u32);
            if s > 0 {
                let g = gf.add(&format!("e{i}_{j}"), s);
                glues[i][d.index()] = g;
                glues[j][d.opposite().index()] = g;
            }
            edges.push((i, j, s));
        }
    }
    let mut ts = TileSet::new(gf);
    for (i, g) in glues.iter().enumerate() {
        ts.add_tile(&format!("t{i}"), *g).unwrap();
    }
    let a = canonicalize(cells.iter().enumerate().map(|(i, &p)| (p, i as u32))).unwrap();
    (ts, a, edges)
}

/// Minimum cut over every bipartition of `n` vertices; None for one vertex.
pub fn brute_min_cut(n: usize, edges: &[(usize, usize, u32)]) -> Option<u32> {
    if n < 2 {
        return None;
    }
    (1u32..1 << (n - 1))
        .map(|mask| {
            let side = |v: usize| v < n - 1 && mask >> v & 1 == 1;
            edges.iter().filter(|&&(u, v, _)| side(u) != side(v)).map(|e| e.2).sum()
        })
        .min()
}

/// A random tile set of `types` tiles over three glues of strength 1 or 2.
/// Each side is null with probability one half.
pub fn random_tiles<R: Rng>(rng: &mut R, types: usize) -> TileSet {
    let mut gf = GlueFunction::new();
    let gs: Vec<Glue> = (0..3).map(|i| gf.add(&format!("g{i}"), rng.gen_range(1..=2))).collect();
    let mut ts = TileSet::new(gf);
    for t in 0..types {
        let mut sides = [Glue::NULL; 4];
        for s in &mut sides {
            if rng.gen_bool(0.5) {
                *s = *gs.choose(rng).unwrap();
            }
        }
        ts.add_tile(&format!("t{t}"), sides).unwrap();
    }
    ts
}

/// Producible count at bound 6 above which a system is too prolific to
/// enumerate at bound 8.
const TAME: usize = 120;

/// A random bin of one to four tile types whose growth stays small enough
/// to enumerate.
pub fn random_bin<R: Rng>(rng: &mut R) -> Bin {
    loop {
        let types = rng.gen_range(1..=4);
        let bin = Bin::of_tiles(Arc::new(random_tiles(rng, types)), 2).unwrap();
        if producibles(&bin, 6).unwrap().producibles.len() <= TAME {
            return bin;
        }
    }
}

/// Every placement of tiles on every polyomino of at most `max` cells, in a
/// fixed order.
pub fn all_assemblies(tiles: usize, max: usize) -> Vec<Assembly> {
    let mut shapes: BTreeSet<Vec<Pos>> = BTreeSet::new();
    shapes.insert(vec![Pos::ORIGIN]);
    let mut layer = shapes.clone();
    for _ in 1..max {
        let mut next = BTreeSet::new();
        for s in &layer {
            for p in s {
                for q in p.neighbors() {
                    if s.contains(&q) {
                        continue;
                    }
                    let mut t = s.clone();
                    t.push(q);
                    next.insert(normalize(t));
                }
            }
        }
        shapes.extend(next.iter().cloned());
        layer = next;
    }
    let mut out = Vec::new();
    for s in &shapes {
        let total = (tiles as u64).pow(s.len() as u32);
        for code in 0..total {
            let mut c = code;
            let cells = s.iter().map(|&p| {
                let t = (c % tiles as u64) as u32;
                c /= tiles as u64;
                (p, t)
            });
            out.push(canonicalize(cells).unwrap());
        }
    }
    out
}

fn normalize(mut cells: Vec<Pos>) -> Vec<Pos> {
    cells.sort_by_key(|p| (p.y, p.x));
    let o = cells[0];
    let mut v: Vec<Pos> = cells.iter().map(|p| p.offset(-o.x, -o.y)).collect();
    v.sort();
    v
}

/// A random staged system with at most two stages and two bins per stage
/// over at most four tile types.
pub fn random_staged<R: Rng>(rng: &mut R) -> StagedSystem {
    let types = rng.gen_range(1..=4);
    let ts = Arc::new(random_tiles(rng, types));
    let stages = rng.gen_range(1..=2);
    let bins: Vec<usize> = (0..stages).map(|_| rng.gen_range(1..=2)).collect();
    let stage1: Vec<Vec<u32>> = (0..bins[0])
        .map(|_| {
            let mut set: Vec<u32> = (0..types as u32).filter(|_| rng.gen_bool(0.7)).collect();
            if set.is_empty() {
                set.push(rng.gen_range(0..types as u32));
            }
            set
        })
        .collect();
    let mut mix = MixGraph::new(bins.clone());
    if stages == 2 {
        for b in 0..bins[1] {
            mix.add_edge((1, rng.gen_range(0..bins[0])), (2, b));
            for a in 0..bins[0] {
                if rng.gen_bool(0.4) {
                    mix.add_edge((1, a), (2, b));
                }
            }
        }
    }
    StagedSystem::new(mix, stage1, ts, 2).unwrap()
}

/// A random staged system whose every bin stays within `bound` tiles, and
/// its full run.
pub fn small_staged<R: Rng>(rng: &mut R, bound: usize) -> (StagedSystem, StagedRunResult) {
    loop {
        let sys = random_staged(rng);
        let probe = run_staged(&sys, 6).unwrap();
        if probe.bins.iter().flatten().map(|r| r.producibles.len()).sum::<usize>() > TAME {
            continue;
        }
        let run = run_staged(&sys, bound).unwrap();
        if !run.overflow {
            return (sys, run);
        }
    }
}

/// Largest producible over the given stages of a full run.
pub fn largest(run: &StagedRunResult, stages: std::ops::RangeInclusive<usize>) -> usize {
    stages
        .flat_map(|s| run.bins[s - 1].iter())
        .flat_map(|r| r.producibles.iter().map(Assembly::size))
        .max()
        .unwrap_or(0)
}

/// Compares every decider with the answer read off the full run, for up to
/// `limit` candidate assemblies. Returns the number of comparisons.
pub fn check_deciders(sys: &StagedSystem, run: &StagedRunResult, limit: usize) -> Result<usize, String> {
    let last = sys.mix.stages();
    let mut candidates: Vec<Assembly> = run.bins.iter().flatten().flat_map(|r| r.producibles.iter().cloned()).collect();
    candidates.sort();
    candidates.dedup();
    let mut checks = 0;
    let mut expect = |what: String, got: Answer, want: bool| {
        checks += 1;
        if got == Answer::from_bool(want) {
            Ok(())
        } else {
            Err(format!("{what}: got {got}, enumeration says {want}"))
        }
    };
    for a in candidates.iter().take(limit) {
        let n = a.size();
        let fits = largest(run, 1..=last) <= n;
        let uav = staged_uav(sys, a).map_err(|e| e.to_string())?;
        expect(format!("uav {a:?}"), uav.answer, fits && run.output == vec![a.clone()])?;
        let usv = staged_usv(sys, &shape_of(a)).map_err(|e| e.to_string())?;
        let shapes_ok = run.output.iter().all(|t| shape_of(t) == shape_of(a));
        expect(format!("usv {a:?}"), usv.answer, fits && shapes_ok)?;
        for s in 1..=last {
            let before = largest(run, 1..=s - 1) <= n;
            for b in 0..sys.mix.bins[s - 1] {
                let r = run.bin((s, b));
                let here = r.producibles.iter().all(|p| p.size() <= n);
                let p = pibv(sys, s, b, a, n).map_err(|e| e.to_string())?;
                expect(format!("pibv ({s},{b}) {a:?}"), p.answer, before && r.is_producible(a))?;
                let u = uibv(sys, s, b, n).map_err(|e| e.to_string())?;
                expect(format!("uibv ({s},{b}) n={n}"), u.answer, before && here)?;
                let t = tibv(sys, s, b, a, n).map_err(|e| e.to_string())?;
                expect(format!("tibv ({s},{b}) {a:?}"), t.answer, before && here && r.is_terminal(a))?;
            }
        }
    }
    Ok(checks)
}
