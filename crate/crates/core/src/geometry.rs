//! Tiles, glues, assemblies, shapes, bond graphs and pairwise combination.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeomError {
    #[error("EmptyPlacement: a configuration needs at least one tile")]
    EmptyPlacement,
    #[error("DisconnectedPlacement: occupied cells are not edge-connected")]
    DisconnectedPlacement,
    #[error("OverlappingPlacement: cell ({0}, {1}) is occupied twice")]
    OverlappingPlacement(i32, i32),
    #[error("UnknownGlue: glue id {0} is not declared")]
    UnknownGlue(u32),
    #[error("UnknownTile: tile id {0} is not declared")]
    UnknownTile(u32),
    #[error("FlexibleGlue: glues `{0}` and `{1}` have nonzero cross strength")]
    FlexibleGlue(String, String),
    #[error("NullGlueStrength: the null glue must have strength 0")]
    NullGlueStrength,
    #[error("DuplicateName: `{0}` is declared twice")]
    DuplicateName(String),
    #[error("InstableInput: combination inputs must be tau-stable")]
    InstableInput,
}

/// Glue label. Id 0 is the null glue.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Glue(pub u32);

impl Glue {
    pub const NULL: Glue = Glue(0);

    pub fn is_null(self) -> bool {
        self.0 == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Dir {
    N,
    E,
    S,
    W,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::N, Dir::E, Dir::S, Dir::W];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn opposite(self) -> Dir {
        match self {
            Dir::N => Dir::S,
            Dir::E => Dir::W,
            Dir::S => Dir::N,
            Dir::W => Dir::E,
        }
    }

    /// North is +y.
    pub fn delta(self) -> (i32, i32) {
        match self {
            Dir::N => (0, 1),
            Dir::E => (1, 0),
            Dir::S => (0, -1),
            Dir::W => (-1, 0),
        }
    }
}

/// Lattice point. Ordered by row first (y, then x).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pos {
    pub y: i32,
    pub x: i32,
}

impl Pos {
    pub const ORIGIN: Pos = Pos { y: 0, x: 0 };

    pub fn new(x: i32, y: i32) -> Pos {
        Pos { y, x }
    }

    pub fn step(self, d: Dir) -> Pos {
        let (dx, dy) = d.delta();
        Pos::new(self.x + dx, self.y + dy)
    }

    pub fn offset(self, dx: i32, dy: i32) -> Pos {
        Pos::new(self.x + dx, self.y + dy)
    }

    pub fn neighbors(self) -> [Pos; 4] {
        Dir::ALL.map(|d| self.step(d))
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Diagonal glue strength table with names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlueFunction {
    names: Vec<String>,
    strength: Vec<u32>,
    by_name: HashMap<String, u32>,
}

impl Default for GlueFunction {
    fn default() -> Self {
        Self::new()
    }
}

impl GlueFunction {
    pub fn new() -> Self {
        let mut by_name = HashMap::new();
        by_name.insert("null".to_string(), 0);
        GlueFunction { names: vec!["null".into()], strength: vec![0], by_name }
    }

    /// Builds a table from `(g1, g2, strength)` entries. Off-diagonal
    /// nonzero entries are rejected.
    pub fn from_entries<S: AsRef<str>>(entries: &[(S, S, u32)]) -> Result<Self, GeomError> {
        let mut gf = GlueFunction::new();
        for (a, b, s) in entries {
            let (a, b) = (a.as_ref(), b.as_ref());
            if a != b {
                if *s != 0 {
                    return Err(GeomError::FlexibleGlue(a.into(), b.into()));
                }
                gf.intern(a, 0)?;
                gf.intern(b, 0)?;
                continue;
            }
            if a == "null" {
                if *s != 0 {
                    return Err(GeomError::NullGlueStrength);
                }
                continue;
            }
            gf.intern(a, *s)?;
        }
        Ok(gf)
    }

    fn intern(&mut self, name: &str, s: u32) -> Result<Glue, GeomError> {
        if let Some(&id) = self.by_name.get(name) {
            if s != 0 {
                if id == 0 {
                    return Err(GeomError::NullGlueStrength);
                }
                self.strength[id as usize] = self.strength[id as usize].max(s);
            }
            return Ok(Glue(id));
        }
        Ok(self.add(name, s))
    }

    /// Declares a new glue. Redeclaring a name returns the existing id and
    /// keeps its strength.
    pub fn add(&mut self, name: &str, strength: u32) -> Glue {
        if let Some(&id) = self.by_name.get(name) {
            return Glue(id);
        }
        let id = self.names.len() as u32;
        self.names.push(name.to_string());
        self.strength.push(strength);
        self.by_name.insert(name.to_string(), id);
        Glue(id)
    }

    pub fn get(&self, name: &str) -> Option<Glue> {
        self.by_name.get(name).map(|&id| Glue(id))
    }

    pub fn name(&self, g: Glue) -> &str {
        &self.names[g.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, g: Glue) -> bool {
        (g.0 as usize) < self.names.len()
    }

    pub fn self_strength(&self, g: Glue) -> u32 {
        self.strength[g.0 as usize]
    }

    pub fn str(&self, a: Glue, b: Glue) -> u32 {
        if a == b {
            self.strength[a.0 as usize]
        } else {
            0
        }
    }

    /// Non-null glues in id order.
    pub fn glues(&self) -> impl Iterator<Item = (Glue, &str, u32)> {
        (1..self.names.len()).map(move |i| (Glue(i as u32), self.names[i].as_str(), self.strength[i]))
    }
}

/// A non-rotatable tile type. Glues indexed N, E, S, W.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TileType {
    pub name: String,
    pub glues: [Glue; 4],
}

impl TileType {
    pub fn glue(&self, d: Dir) -> Glue {
        self.glues[d.index()]
    }
}

pub type TileId = u32;

/// Tile types plus the glue function they refer to.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TileSet {
    pub glues: GlueFunction,
    tiles: Vec<TileType>,
    by_name: HashMap<String, TileId>,
}

impl TileSet {
    pub fn new(glues: GlueFunction) -> Self {
        TileSet { glues, tiles: Vec::new(), by_name: HashMap::new() }
    }

    pub fn add_tile(&mut self, name: &str, glues: [Glue; 4]) -> Result<TileId, GeomError> {
        if self.by_name.contains_key(name) {
            return Err(GeomError::DuplicateName(name.to_string()));
        }
        for g in glues {
            if !self.glues.contains(g) {
                return Err(GeomError::UnknownGlue(g.0));
            }
        }
        let id = self.tiles.len() as TileId;
        self.tiles.push(TileType { name: name.to_string(), glues });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn tile(&self, id: TileId) -> &TileType {
        &self.tiles[id as usize]
    }

    pub fn tiles(&self) -> &[TileType] {
        &self.tiles
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<TileId> {
        self.by_name.get(name).copied()
    }

    /// Strength of the bond between tile `a` and tile `b` placed on its `d` side.
    pub fn bond(&self, a: TileId, d: Dir, b: TileId) -> u32 {
        self.glues.str(self.tile(a).glue(d), self.tile(b).glue(d.opposite()))
    }

    fn check(&self, a: &Assembly) -> Result<(), GeomError> {
        for &(_, t) in a.cells() {
            if t as usize >= self.tiles.len() {
                return Err(GeomError::UnknownTile(t));
            }
        }
        Ok(())
    }
}

/// A tile placement normalized so its least cell (by y, then x) is the origin.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Assembly {
    cells: Arc<[(Pos, TileId)]>,
}

impl fmt::Debug for Assembly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Assembly[")?;
        for (i, (p, t)) in self.cells.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{},{}:{}", p.x, p.y, t)?;
        }
        f.write_str("]")
    }
}

impl Ord for Assembly {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.cells.len().cmp(&other.cells.len()).then_with(|| self.cells.cmp(&other.cells))
    }
}

impl PartialOrd for Assembly {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

fn is_edge_connected(cells: &[Pos]) -> bool {
    if cells.is_empty() {
        return false;
    }
    let set: HashSet<Pos> = cells.iter().copied().collect();
    let mut seen = HashSet::with_capacity(set.len());
    let mut queue = VecDeque::new();
    seen.insert(cells[0]);
    queue.push_back(cells[0]);
    while let Some(p) = queue.pop_front() {
        for q in p.neighbors() {
            if set.contains(&q) && seen.insert(q) {
                queue.push_back(q);
            }
        }
    }
    seen.len() == set.len()
}

/// Normalizes a placement into its translation class representative.
pub fn canonicalize<I>(placements: I) -> Result<Assembly, GeomError>
where
    I: IntoIterator<Item = (Pos, TileId)>,
{
    let mut cells: Vec<(Pos, TileId)> = placements.into_iter().collect();
    if cells.is_empty() {
        return Err(GeomError::EmptyPlacement);
    }
    cells.sort();
    for w in cells.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(GeomError::OverlappingPlacement(w[0].0.x, w[0].0.y));
        }
    }
    let pos: Vec<Pos> = cells.iter().map(|c| c.0).collect();
    if !is_edge_connected(&pos) {
        return Err(GeomError::DisconnectedPlacement);
    }
    Ok(Assembly::from_sorted(cells))
}

impl Assembly {
    /// Cells must be sorted, distinct and connected.
    fn from_sorted(mut cells: Vec<(Pos, TileId)>) -> Assembly {
        let o = cells[0].0;
        if o != Pos::ORIGIN {
            for c in cells.iter_mut() {
                c.0 = c.0.offset(-o.x, -o.y);
            }
        }
        Assembly { cells: cells.into() }
    }

    pub fn single(t: TileId) -> Assembly {
        Assembly { cells: vec![(Pos::ORIGIN, t)].into() }
    }

    pub fn from_map(m: &BTreeMap<Pos, TileId>) -> Result<Assembly, GeomError> {
        canonicalize(m.iter().map(|(p, t)| (*p, *t)))
    }

    pub fn size(&self) -> usize {
        self.cells.len()
    }

    /// Sorted by position.
    pub fn cells(&self) -> &[(Pos, TileId)] {
        &self.cells
    }

    pub fn tile_at(&self, p: Pos) -> Option<TileId> {
        self.cells.binary_search_by(|c| c.0.cmp(&p)).ok().map(|i| self.cells[i].1)
    }

    pub fn contains_pos(&self, p: Pos) -> bool {
        self.tile_at(p).is_some()
    }

    pub fn tile_ids(&self) -> impl Iterator<Item = TileId> + '_ {
        self.cells.iter().map(|c| c.1)
    }

    /// Bounding box as (min_x, min_y, max_x, max_y).
    pub fn bbox(&self) -> (i32, i32, i32, i32) {
        bbox(self.cells.iter().map(|c| c.0))
    }

    /// Union of `self` with `other` translated by `(dx, dy)`; None on overlap.
    pub fn union_at(&self, other: &Assembly, dx: i32, dy: i32) -> Option<Assembly> {
        let mut cells: Vec<(Pos, TileId)> = Vec::with_capacity(self.size() + other.size());
        cells.extend_from_slice(&self.cells);
        for &(p, t) in other.cells.iter() {
            let q = p.offset(dx, dy);
            if self.contains_pos(q) {
                return None;
            }
            cells.push((q, t));
        }
        cells.sort();
        Some(Assembly::from_sorted(cells))
    }

    /// True iff `self` embeds in `other` under some translation.
    pub fn is_subassembly_of(&self, other: &Assembly) -> bool {
        if self.size() > other.size() {
            return false;
        }
        let (p0, t0) = self.cells[0];
        other.cells.iter().any(|&(q, t)| {
            t == t0 && {
                let (dx, dy) = (q.x - p0.x, q.y - p0.y);
                self.cells.iter().all(|&(p, s)| other.tile_at(p.offset(dx, dy)) == Some(s))
            }
        })
    }

    /// Connected sub-placement on the given cells, canonicalized.
    pub fn restrict(&self, keep: &[Pos]) -> Result<Assembly, GeomError> {
        canonicalize(keep.iter().map(|&p| (p, self.tile_at(p).expect("cell not in assembly"))))
    }
}

pub(crate) fn bbox(it: impl Iterator<Item = Pos>) -> (i32, i32, i32, i32) {
    let mut b = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
    for p in it {
        b.0 = b.0.min(p.x);
        b.1 = b.1.min(p.y);
        b.2 = b.2.max(p.x);
        b.3 = b.3.max(p.y);
    }
    b
}

/// Translation-normalized cell set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shape {
    cells: Arc<[Pos]>,
}

impl Shape {
    pub fn from_cells<I: IntoIterator<Item = Pos>>(cells: I) -> Result<Shape, GeomError> {
        let mut v: Vec<Pos> = cells.into_iter().collect();
        if v.is_empty() {
            return Err(GeomError::EmptyPlacement);
        }
        v.sort();
        v.dedup();
        if !is_edge_connected(&v) {
            return Err(GeomError::DisconnectedPlacement);
        }
        let o = v[0];
        for p in v.iter_mut() {
            *p = p.offset(-o.x, -o.y);
        }
        Ok(Shape { cells: v.into() })
    }

    pub fn cells(&self) -> &[Pos] {
        &self.cells
    }

    pub fn size(&self) -> usize {
        self.cells.len()
    }
}

pub fn shape_of(a: &Assembly) -> Shape {
    Shape { cells: a.cells.iter().map(|c| c.0).collect::<Vec<_>>().into() }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BondGraph {
    pub vertices: Vec<Pos>,
    /// (u, v, weight) with u < v, indices into `vertices`.
    pub edges: Vec<(usize, usize, u32)>,
}

pub fn bond_graph(a: &Assembly, ts: &TileSet) -> Result<BondGraph, GeomError> {
    ts.check(a)?;
    let cells = a.cells();
    let mut edges = Vec::new();
    for (i, &(p, t)) in cells.iter().enumerate() {
        for d in [Dir::E, Dir::N] {
            let q = p.step(d);
            if let Ok(j) = cells.binary_search_by(|c| c.0.cmp(&q)) {
                let w = ts.bond(t, d, cells[j].1);
                edges.push((i.min(j), i.max(j), w));
            }
        }
    }
    Ok(BondGraph { vertices: cells.iter().map(|c| c.0).collect(), edges })
}

/// Global minimum cut weight (Stoer-Wagner). Zero-weight edges are ignored,
/// so a graph that is disconnected through positive edges has cut 0.
/// Returns None for a single vertex.
pub fn min_cut_weight(n: usize, edges: &[(usize, usize, u32)]) -> Option<u64> {
    if n < 2 {
        return None;
    }
    let mut w = vec![vec![0u64; n]; n];
    for &(u, v, s) in edges {
        if s > 0 && u != v {
            w[u][v] += s as u64;
            w[v][u] += s as u64;
        }
    }
    let mut active: Vec<usize> = (0..n).collect();
    let mut best = u64::MAX;
    while active.len() > 1 {
        let k = active.len();
        let mut added = vec![false; k];
        let mut conn = vec![0u64; k];
        let mut prev = 0;
        for step in 0..k {
            let mut sel = usize::MAX;
            for i in 0..k {
                if !added[i] && (sel == usize::MAX || conn[i] > conn[sel]) {
                    sel = i;
                }
            }
            added[sel] = true;
            if step == k - 1 {
                best = best.min(conn[sel]);
                let (s, t) = (active[prev], active[sel]);
                for i in 0..n {
                    w[s][i] += w[t][i];
                    w[i][s] = w[s][i];
                }
                w[s][s] = 0;
                active.remove(sel);
                break;
            }
            prev = sel;
            for i in 0..k {
                if !added[i] {
                    conn[i] += w[active[sel]][active[i]];
                }
            }
        }
    }
    Some(best)
}

pub fn is_tau_stable(a: &Assembly, ts: &TileSet, tau: u32) -> Result<bool, GeomError> {
    let g = bond_graph(a, ts)?;
    Ok(match min_cut_weight(g.vertices.len(), &g.edges) {
        None => true,
        Some(c) => c >= tau as u64,
    })
}

/// Exposed bonding sites of an assembly: (cell, side, glue) with positive
/// self-strength and an empty neighbor cell.
pub fn exposed_sites(a: &Assembly, ts: &TileSet) -> Vec<(Pos, Dir, Glue)> {
    let mut out = Vec::new();
    for &(p, t) in a.cells() {
        for d in Dir::ALL {
            let g = ts.tile(t).glue(d);
            if ts.glues.self_strength(g) > 0 && !a.contains_pos(p.step(d)) {
                out.push((p, d, g));
            }
        }
    }
    out
}

/// Total strength between `a` and `b` translated by (dx, dy), or None if
/// they overlap.
pub fn interface_strength(a: &Assembly, b: &Assembly, dx: i32, dy: i32, ts: &TileSet) -> Option<u32> {
    let mut s = 0;
    for &(p, t) in b.cells() {
        let q = p.offset(dx, dy);
        if a.contains_pos(q) {
            return None;
        }
        for d in Dir::ALL {
            if let Some(u) = a.tile_at(q.step(d)) {
                s += ts.bond(t, d, u);
            }
        }
    }
    Some(s)
}

/// Offsets (dx, dy) that bring some exposed site of `b` against a matching
/// exposed site of `a`. Sorted, deduplicated.
pub fn candidate_offsets(
    a_sites: &[(Pos, Dir, Glue)],
    b_sites: &[(Pos, Dir, Glue)],
) -> Vec<(i32, i32)> {
    let mut by_key: HashMap<(Glue, Dir), Vec<Pos>> = HashMap::new();
    for &(q, d, g) in b_sites {
        by_key.entry((g, d)).or_default().push(q);
    }
    let mut out = Vec::new();
    for &(p, d, g) in a_sites {
        if let Some(qs) = by_key.get(&(g, d.opposite())) {
            let target = p.step(d);
            for q in qs {
                out.push((target.x - q.x, target.y - q.y));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// All combinations of `a` and `b` without checking input stability.
pub fn combine_unchecked(a: &Assembly, b: &Assembly, ts: &TileSet, tau: u32) -> Vec<Assembly> {
    let offs = candidate_offsets(&exposed_sites(a, ts), &exposed_sites(b, ts));
    let mut out: Vec<Assembly> = offs
        .into_iter()
        .filter(|&(dx, dy)| interface_strength(a, b, dx, dy, ts).is_some_and(|s| s >= tau))
        .map(|(dx, dy)| a.union_at(b, dx, dy).expect("checked disjoint"))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Every distinct tau-stable assembly formed by translating `b` against `a`.
pub fn combine(a: &Assembly, b: &Assembly, ts: &TileSet, tau: u32) -> Result<Vec<Assembly>, GeomError> {
    if !is_tau_stable(a, ts, tau)? || !is_tau_stable(b, ts, tau)? {
        return Err(GeomError::InstableInput);
    }
    Ok(combine_unchecked(a, b, ts, tau))
}
