//! Bounded two-handed dynamics of a single bin.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{
    exposed_sites, is_tau_stable, Assembly, Dir, GeomError, Glue, Pos, TileSet,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BinError {
    #[error("BoundTooSmall: bound {bound} is below the largest input assembly ({needed} tiles)")]
    BoundTooSmall { bound: usize, needed: usize },
    #[error("UnstableInitial: initial assembly {0} is not tau-stable")]
    UnstableInitial(usize),
    #[error("ZeroTemperature: tau must be positive")]
    ZeroTemperature,
    #[error(transparent)]
    Geometry(#[from] GeomError),
}

/// Three-valued answer used wherever a size bound may hide the truth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Answer {
    Yes,
    No,
    Undecided,
}

impl Answer {
    pub fn from_bool(b: bool) -> Answer {
        if b {
            Answer::Yes
        } else {
            Answer::No
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::Yes => "yes",
            Answer::No => "no",
            Answer::Undecided => "undecided",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bin {
    initials: Vec<Assembly>,
    tiles: Arc<TileSet>,
    tau: u32,
}

impl Bin {
    pub fn new(initials: Vec<Assembly>, tiles: Arc<TileSet>, tau: u32) -> Result<Bin, BinError> {
        if tau == 0 {
            return Err(BinError::ZeroTemperature);
        }
        let mut initials = initials;
        initials.sort();
        initials.dedup();
        for (i, a) in initials.iter().enumerate() {
            if !is_tau_stable(a, &tiles, tau)? {
                return Err(BinError::UnstableInitial(i));
            }
        }
        Ok(Bin { initials, tiles, tau })
    }

    /// Skips the stability check; for inputs that are terminals of other bins.
    pub(crate) fn trusted(mut initials: Vec<Assembly>, tiles: Arc<TileSet>, tau: u32) -> Bin {
        initials.sort();
        initials.dedup();
        Bin { initials, tiles, tau }
    }

    /// Bin whose initials are the single tiles of the whole tile set.
    pub fn of_tiles(tiles: Arc<TileSet>, tau: u32) -> Result<Bin, BinError> {
        let init = (0..tiles.len() as u32).map(Assembly::single).collect();
        Bin::new(init, tiles, tau)
    }

    pub fn initials(&self) -> &[Assembly] {
        &self.initials
    }

    pub fn tiles(&self) -> &Arc<TileSet> {
        &self.tiles
    }

    pub fn tau(&self) -> u32 {
        self.tau
    }

    fn max_initial(&self) -> usize {
        self.initials.iter().map(Assembly::size).max().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductionResult {
    /// Sorted by (size, canonical form).
    pub producibles: Vec<Assembly>,
    /// Sorted; a subset of `producibles`.
    pub terminals: Vec<Assembly>,
    pub overflow: bool,
    pub bound: usize,
    /// Least oversize combination of two in-bound producibles, if any.
    pub oversize: Option<Assembly>,
}

impl ProductionResult {
    pub fn is_producible(&self, a: &Assembly) -> bool {
        self.producibles.binary_search(a).is_ok()
    }

    pub fn is_terminal(&self, a: &Assembly) -> bool {
        self.terminals.binary_search(a).is_ok()
    }
}

struct Entry {
    asm: Assembly,
    sites: Vec<(Pos, Dir, Glue)>,
}

/// Interface strength of `x` with `y` translated by (dx, dy); None on overlap.
fn interface(x: &Assembly, y: &Assembly, dx: i32, dy: i32, ts: &TileSet) -> Option<u32> {
    if y.size() <= x.size() {
        crate::geometry::interface_strength(x, y, dx, dy, ts)
    } else {
        crate::geometry::interface_strength(y, x, -dx, -dy, ts)
    }
}

/// Shared closure state. The index maps (glue, side) to the retained
/// assemblies exposing it and the exposing cell.
struct Closure<'a> {
    ts: &'a TileSet,
    tau: u32,
    entries: Vec<Entry>,
    ids: HashMap<Assembly, u32>,
    index: HashMap<(Glue, Dir), Vec<(u32, Pos)>>,
    combines: Vec<bool>,
}

impl<'a> Closure<'a> {
    fn insert(&mut self, a: Assembly) -> Option<u32> {
        if self.ids.contains_key(&a) {
            return None;
        }
        let id = self.entries.len() as u32;
        let sites = exposed_sites(&a, self.ts);
        for &(p, d, g) in &sites {
            self.index.entry((g, d)).or_default().push((id, p));
        }
        self.ids.insert(a.clone(), id);
        self.entries.push(Entry { asm: a, sites });
        self.combines.push(false);
        Some(id)
    }

    /// Combinations of `x` with the retained set: the partners it binds
    /// to, the in-bound unions, and the least union over `bound`.
    fn expand(&self, x: u32, bound: usize) -> Expansion {
        let ex = &self.entries[x as usize];
        let mut seen: HashSet<(u32, i32, i32)> = HashSet::new();
        let mut partners: HashSet<u32> = HashSet::new();
        let mut out = Expansion::default();
        for &(p, d, g) in &ex.sites {
            let Some(list) = self.index.get(&(g, d.opposite())) else { continue };
            let t = p.step(d);
            for &(y, q) in list {
                let (dx, dy) = (t.x - q.x, t.y - q.y);
                if !seen.insert((y, dx, dy)) {
                    continue;
                }
                let ey = &self.entries[y as usize];
                let size = ex.asm.size() + ey.asm.size();
                let over = size > bound;
                if over && out.least_over.as_ref().is_some_and(|o| o.size() < size) {
                    // Cannot beat the current least; only the bond matters.
                    if !partners.contains(&y)
                        && interface(&ex.asm, &ey.asm, dx, dy, self.ts).is_some_and(|s| s >= self.tau)
                    {
                        partners.insert(y);
                    }
                    continue;
                }
                if let Some(s) = interface(&ex.asm, &ey.asm, dx, dy, self.ts) {
                    if s >= self.tau {
                        partners.insert(y);
                        let u = ex.asm.union_at(&ey.asm, dx, dy).expect("disjoint");
                        if !over {
                            out.made.push(u);
                        } else if out.least_over.as_ref().map_or(true, |o| u < *o) {
                            out.least_over = Some(u);
                        }
                    }
                }
            }
        }
        out.partners = partners.into_iter().collect();
        out
    }
}

#[derive(Default)]
struct Expansion {
    partners: Vec<u32>,
    made: Vec<Assembly>,
    least_over: Option<Assembly>,
}

/// Least fixed point of pairwise combination, restricted to assemblies of
/// at most `bound` tiles.
pub fn producibles(b: &Bin, bound: usize) -> Result<ProductionResult, BinError> {
    let needed = b.max_initial();
    if bound < needed {
        return Err(BinError::BoundTooSmall { bound, needed });
    }
    let mut cl = Closure {
        ts: &b.tiles,
        tau: b.tau,
        entries: Vec::new(),
        ids: HashMap::new(),
        index: HashMap::new(),
        combines: Vec::new(),
    };
    let mut frontier: Vec<u32> = Vec::new();
    for a in &b.initials {
        if let Some(id) = cl.insert(a.clone()) {
            frontier.push(id);
        }
    }
    let mut overflow = false;
    let mut oversize: Option<Assembly> = None;
    while !frontier.is_empty() {
        let found: Vec<Expansion> = {
            let cl = &cl;
            frontier.par_iter().map(|&x| cl.expand(x, bound)).collect()
        };
        let mut next = Vec::new();
        for (&x, e) in frontier.iter().zip(found) {
            if !e.partners.is_empty() {
                cl.combines[x as usize] = true;
            }
            for y in e.partners {
                cl.combines[y as usize] = true;
            }
            if let Some(c) = e.least_over {
                overflow = true;
                if oversize.as_ref().map_or(true, |o| c < *o) {
                    oversize = Some(c);
                }
            }
            for c in e.made {
                if let Some(id) = cl.insert(c) {
                    next.push(id);
                }
            }
        }
        frontier = next;
    }
    let mut prods = Vec::with_capacity(cl.entries.len());
    let mut terms = Vec::new();
    for (e, &c) in cl.entries.into_iter().zip(cl.combines.iter()) {
        if !c {
            terms.push(e.asm.clone());
        }
        prods.push(e.asm);
    }
    prods.sort();
    terms.sort();
    Ok(ProductionResult { producibles: prods, terminals: terms, overflow, bound, oversize })
}

/// Same computation as `producibles`; the terminal set is the part of
/// interest. Unreliable when `overflow` is set.
pub fn terminals(b: &Bin, bound: usize) -> Result<ProductionResult, BinError> {
    producibles(b, bound)
}

/// Decomposition search: `a` is producible iff it is initial or splits into
/// two connected, stable, producible parts.
pub fn is_producible(b: &Bin, a: &Assembly) -> bool {
    let mut memo = HashMap::new();
    producible_rec(b, a, &mut memo)
}

fn producible_rec(b: &Bin, a: &Assembly, memo: &mut HashMap<Assembly, bool>) -> bool {
    if let Some(&r) = memo.get(a) {
        return r;
    }
    let r = if b.initials.binary_search(a).is_ok() {
        true
    } else if a.size() < 2 || !is_tau_stable(a, &b.tiles, b.tau).unwrap_or(false) {
        false
    } else {
        let mut found = false;
        for_each_split(a, &mut |left, right| {
            let ok = is_tau_stable(&left, &b.tiles, b.tau).unwrap_or(false)
                && is_tau_stable(&right, &b.tiles, b.tau).unwrap_or(false)
                && producible_rec(b, &left, memo)
                && producible_rec(b, &right, memo);
            found = ok;
            ok
        });
        found
    };
    memo.insert(a.clone(), r);
    r
}

/// Calls `f(left, right)` for every split of `a` into two edge-connected
/// parts, left holding the first cell. Stops when `f` returns true.
pub(crate) fn for_each_split(a: &Assembly, f: &mut dyn FnMut(Assembly, Assembly) -> bool) {
    let cells = a.cells();
    let n = cells.len();
    assert!(n <= 128, "decomposition search is limited to 128 tiles");
    let nb: Vec<u128> = cells
        .iter()
        .map(|&(p, _)| {
            p.neighbors()
                .iter()
                .filter_map(|q| cells.binary_search_by(|c| c.0.cmp(q)).ok())
                .fold(0u128, |m, j| m | (1u128 << j))
        })
        .collect();
    let full: u128 = if n == 128 { u128::MAX } else { (1u128 << n) - 1 };
    let connected = |m: u128| -> bool {
        if m == 0 {
            return false;
        }
        let mut seen = m & m.wrapping_neg();
        loop {
            let mut grow = seen;
            let mut s = seen;
            while s != 0 {
                let i = s.trailing_zeros() as usize;
                s &= s - 1;
                grow |= nb[i] & m;
            }
            if grow == seen {
                return seen == m;
            }
            seen = grow;
        }
    };
    let part = |m: u128| -> Assembly {
        let keep: Vec<Pos> = (0..n).filter(|&i| m >> i & 1 == 1).map(|i| cells[i].0).collect();
        a.restrict(&keep).expect("connected part")
    };
    let mut stop = false;
    let mut visit = |s: u128| -> bool {
        if s != full && connected(full & !s) {
            return f(part(s), part(full & !s));
        }
        false
    };
    fn rec(
        s: u128,
        x: u128,
        banned: u128,
        nb: &[u128],
        visit: &mut dyn FnMut(u128) -> bool,
        stop: &mut bool,
    ) {
        if *stop {
            return;
        }
        if visit(s) {
            *stop = true;
            return;
        }
        let mut x = x;
        let mut banned = banned;
        while x != 0 {
            let v = x & x.wrapping_neg();
            x &= !v;
            let i = v.trailing_zeros() as usize;
            let nx = (x | nb[i]) & !s & !v & !banned;
            rec(s | v, nx, banned, nb, visit, stop);
            if *stop {
                return;
            }
            banned |= v;
        }
    }
    rec(1, nb[0] & !1, 1, &nb, &mut visit, &mut stop);
}

/// No if `a` is not producible or some in-bound producible attaches to it;
/// yes if nothing attaches and the closure did not overflow.
pub fn is_terminal_in_bin(b: &Bin, a: &Assembly, bound: usize) -> Result<Answer, BinError> {
    if bound < a.size() {
        return Err(BinError::BoundTooSmall { bound, needed: a.size() });
    }
    let res = producibles(b, bound)?;
    Ok(terminal_answer(b, &res, a))
}

pub(crate) fn terminal_answer(b: &Bin, res: &ProductionResult, a: &Assembly) -> Answer {
    // Sizes only grow under combination, so every in-bound producible is listed.
    if !res.is_producible(a) {
        return Answer::No;
    }
    if attaches_to_any(a, &res.producibles, &b.tiles, b.tau).is_some() {
        return Answer::No;
    }
    if res.overflow {
        Answer::Undecided
    } else {
        Answer::Yes
    }
}

/// First assembly in `pool` (in its order) that combines with `a`.
pub fn attaches_to_any<'p>(
    a: &Assembly,
    pool: &'p [Assembly],
    ts: &TileSet,
    tau: u32,
) -> Option<&'p Assembly> {
    let sa = exposed_sites(a, ts);
    pool.iter().find(|p| {
        let sp = exposed_sites(p, ts);
        crate::geometry::candidate_offsets(&sa, &sp)
            .into_iter()
            .any(|(dx, dy)| interface(a, p, dx, dy, ts).is_some_and(|s| s >= tau))
    })
}

/// Every in-bound producible embeds in some in-bound terminal.
pub fn uniquely_produces(b: &Bin, bound: usize) -> Result<Answer, BinError> {
    let res = producibles(b, bound)?;
    Ok(unique_answer(&res))
}

pub(crate) fn unique_answer(res: &ProductionResult) -> Answer {
    if res.overflow {
        return Answer::Undecided;
    }
    let ok = res
        .producibles
        .iter()
        .all(|p| res.terminals.iter().any(|t| p.is_subassembly_of(t)));
    Answer::from_bool(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{canonicalize, GlueFunction, TileId};

    fn line_bin() -> (Bin, TileId) {
        let mut gf = GlueFunction::new();
        let g = gf.add("g", 2);
        let mut ts = TileSet::new(gf);
        let t = ts.add_tile("t", [Glue::NULL, g, Glue::NULL, g]).unwrap();
        (Bin::of_tiles(Arc::new(ts), 2).unwrap(), t)
    }

    fn line(t: TileId, k: i32) -> Assembly {
        canonicalize((0..k).map(|x| (Pos::new(x, 0), t))).unwrap()
    }

    fn pair_bin() -> (Bin, TileId, TileId) {
        let mut gf = GlueFunction::new();
        let g = gf.add("g", 2);
        let mut ts = TileSet::new(gf);
        let a = ts.add_tile("t1", [Glue::NULL, g, Glue::NULL, Glue::NULL]).unwrap();
        let b = ts.add_tile("t2", [Glue::NULL, Glue::NULL, Glue::NULL, g]).unwrap();
        (Bin::of_tiles(Arc::new(ts), 2).unwrap(), a, b)
    }

    #[test]
    fn null_tile_bin() {
        let mut ts = TileSet::new(GlueFunction::new());
        ts.add_tile("t", [Glue::NULL; 4]).unwrap();
        let b = Bin::of_tiles(Arc::new(ts), 2).unwrap();
        let r = producibles(&b, 4).unwrap();
        assert_eq!(r.producibles, vec![Assembly::single(0)]);
        assert_eq!(r.terminals, vec![Assembly::single(0)]);
        assert!(!r.overflow);
        assert_eq!(uniquely_produces(&b, 4).unwrap(), Answer::Yes);
        assert_eq!(is_terminal_in_bin(&b, &Assembly::single(0), 2).unwrap(), Answer::Yes);
    }

    #[test]
    fn infinite_line() {
        let (b, t) = line_bin();
        let r = producibles(&b, 3).unwrap();
        assert_eq!(r.producibles, vec![line(t, 1), line(t, 2), line(t, 3)]);
        assert!(r.overflow);
        assert!(r.terminals.is_empty());
        assert_eq!(r.oversize, Some(line(t, 4)));
        assert_eq!(is_terminal_in_bin(&b, &line(t, 2), 3).unwrap(), Answer::No);
        assert_eq!(uniquely_produces(&b, 3).unwrap(), Answer::Undecided);
    }

    #[test]
    fn pair_terminals() {
        let (b, x, y) = pair_bin();
        let r = terminals(&b, 4).unwrap();
        let xy = canonicalize([(Pos::new(0, 0), x), (Pos::new(1, 0), y)]).unwrap();
        assert_eq!(r.terminals, vec![xy.clone()]);
        assert_eq!(r.producibles.len(), 3);
        assert_eq!(is_terminal_in_bin(&b, &Assembly::single(x), 4).unwrap(), Answer::No);
        assert!(is_producible(&b, &xy));
        assert_eq!(uniquely_produces(&b, 4).unwrap(), Answer::Yes);
    }

    #[test]
    fn bound_too_small() {
        let (b, t) = line_bin();
        let b2 = Bin::new(vec![line(t, 3)], b.tiles().clone(), 2).unwrap();
        assert!(matches!(producibles(&b2, 2), Err(BinError::BoundTooSmall { .. })));
    }

    #[test]
    fn producible_rejects_unstable() {
        let (b, x, y) = pair_bin();
        let yx = canonicalize([(Pos::new(0, 0), y), (Pos::new(1, 0), x)]).unwrap();
        assert!(!is_producible(&b, &yx));
        assert!(is_producible(&b, &Assembly::single(x)));
    }

    #[test]
    fn split_enumeration_counts() {
        let sq = canonicalize([(Pos::new(0, 0), 0), (Pos::new(1, 0), 0), (Pos::new(0, 1), 0), (Pos::new(1, 1), 0)])
            .unwrap();
        let mut n = 0;
        for_each_split(&sq, &mut |_, _| {
            n += 1;
            false
        });
        assert_eq!(n, 6);
    }
}
