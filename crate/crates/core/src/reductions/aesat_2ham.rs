//! Forall-exists SAT to a single-bin 2HAM USV instance.
//!
//! Layout, for n variables, k of them universal, m clauses, W = 4n:
//! - the assignment bar on y = 0, four tiles per variable, x = 0..W;
//! - a frame column at x = W from y = 0 to m;
//! - evaluation rows y = 1..m, filled right to left, each carrying a
//!   "clause satisfied so far" flag;
//! - a spine at x = -1 folding the clause flags into a verdict tag;
//! - a descent at x = -2 chosen by the tag.
//!
//! A false verdict grows three rows below the first 4k columns and one row
//! below the rest, which is the target shape. A true verdict grows one row
//! with a tooth per universal variable; a test assembly with the matching
//! dents fills the remaining two rows.
//!
//! Only tile types that some assignment actually uses are emitted: in a
//! single bin an unused tile type would be a terminal on its own.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::geometry::{canonicalize, shape_of, Assembly, Dir, Glue, GlueFunction, Pos, TileSet};
use crate::twohanded::Bin;

use super::{
    assignments, bits, check_budget, eval_3sat, Formula, Metadata, ReducedSystem, ReductionError, ReductionOptions,
    ReductionOutput, Target,
};

type GlueSpec = Option<(String, u32)>;

#[derive(Clone, Debug, PartialEq, Eq)]
struct Spec {
    name: String,
    glues: [GlueSpec; 4],
}

fn g(name: impl Into<String>, s: u32) -> GlueSpec {
    Some((name.into(), s))
}

fn spec(name: impl Into<String>, n: GlueSpec, e: GlueSpec, s: GlueSpec, w: GlueSpec) -> Spec {
    Spec { name: name.into(), glues: [n, e, s, w] }
}

/// Placed tiles of one assembly, by position.
type Draft = BTreeMap<Pos, Spec>;

struct Layout<'a> {
    f: &'a Formula,
    n: usize,
    k: usize,
    m: usize,
    w: i32,
}

impl<'a> Layout<'a> {
    fn value_col(&self, x: i32) -> Option<usize> {
        (x >= 0 && x < self.w && x % 4 == 1).then_some(x as usize / 4)
    }

    /// Bar, frame column, evaluation rows and spine for one assignment.
    /// Returns the verdict.
    fn frame(&self, a: &[bool], d: &mut Draft) -> bool {
        let (n, k, m, w) = (self.n, self.k, self.m, self.w);
        for i in 0..n {
            let v = a[i] as usize;
            for p in 0..4 {
                let x = (4 * i + p) as i32;
                let west = match p {
                    0 if i == 0 => g("bw", 2),
                    0 => g(format!("bl{i}"), 2),
                    _ => g(format!("b{i}_{v}_{p}"), 2),
                };
                let east = match p {
                    3 if i == n - 1 => g("be", 2),
                    3 => g(format!("bl{}", i + 1), 2),
                    _ => g(format!("b{i}_{v}_{}", p + 1), 2),
                };
                let north = if p == 1 { g(format!("u{x}_1_{v}"), 1) } else { g(format!("u{x}_1"), 1) };
                let south = if p == 1 && i < k { g(format!("vs{i}_{v}"), 1) } else { g(format!("xs{x}"), 1) };
                d.insert(Pos::new(x, 0), spec(format!("bar{i}_{v}_{p}"), north, east, south, west));
            }
        }
        for j in 0..=m {
            let north = (j < m).then(|| (format!("col{}", j + 1), 2));
            let south = (j > 0).then(|| (format!("col{j}"), 2));
            let (south, west) =
                if j == 0 { (g(format!("xs{w}"), 1), g("be", 2)) } else { (south, g(format!("e{j}_{w}_0"), 1)) };
            d.insert(Pos::new(w, j as i32), spec(format!("col{j}"), north, None, south, west));
        }
        d.insert(Pos::new(-1, 0), spec("start", g("acc0_1", 1), g("bw", 2), g("xs-1", 1), None));
        let mut acc = true;
        for j in 1..=m {
            let mut flag = false;
            for x in (0..w).rev() {
                let val = self.value_col(x);
                let (south, north, name_v) = match val {
                    Some(i) => {
                        let v = a[i] as usize;
                        (
                            format!("u{x}_{j}_{v}"),
                            (j < m).then(|| (format!("u{x}_{}_{v}", j + 1), 1)),
                            format!("_{v}"),
                        )
                    }
                    None => (format!("u{x}_{j}"), (j < m).then(|| (format!("u{x}_{}", j + 1), 1)), String::new()),
                };
                let fin = flag as usize;
                if let Some(i) = val {
                    flag |= self.f.sat_by(j - 1, i, a[i]);
                }
                let fout = flag as usize;
                d.insert(
                    Pos::new(x, j as i32),
                    spec(
                        format!("ev{j}_{x}{name_v}_f{fin}"),
                        north,
                        g(format!("e{j}_{}_{fin}", x + 1), 1),
                        g(south, 1),
                        g(format!("e{j}_{x}_{fout}"), 1),
                    ),
                );
            }
            let (ai, ci) = (acc as usize, flag as usize);
            acc &= flag;
            let ao = acc as usize;
            let (north, west) =
                if j < m { (g(format!("acc{j}_{ao}"), 1), None) } else { (None, g(format!("tag{ao}"), 2)) };
            d.insert(
                Pos::new(-1, j as i32),
                spec(format!("sp{j}_a{ai}_c{ci}"), north, g(format!("e{j}_0_{ci}"), 1), g(format!("acc{}_{ai}", j - 1), 1), west),
            );
        }
        debug_assert_eq!(acc, eval_3sat(self.f, a));
        acc
    }

    fn bar_south(&self, a: &[bool], x: i32) -> GlueSpec {
        match self.value_col(x) {
            Some(i) if i < self.k => g(format!("vs{i}_{}", a[i] as usize), 1),
            _ => g(format!("xs{x}"), 1),
        }
    }

    fn descent(&self, t: usize, low: i32, d: &mut Draft) {
        let m = self.m as i32;
        for y in (low..=m).rev() {
            let north = (y < m).then(|| (format!("d{t}_{}", y + 1), 2));
            let south = (y > low).then(|| (format!("d{t}_{y}"), 2));
            let east = if y == m { g(format!("tag{t}"), 2) } else { None };
            d.insert(Pos::new(-2, y), spec(format!("down{t}_{y}"), north, east, south, None));
        }
    }

    fn grow_false(&self, a: &[bool], d: &mut Draft) {
        let (k, w) = (self.k as i32, self.w);
        self.descent(0, -3, d);
        for (y, r) in [(-1, "fa"), (-2, "fb"), (-3, "fc")] {
            d.get_mut(&Pos::new(-2, y)).unwrap().glues[Dir::E.index()] = g(format!("{r}-1"), 1);
        }
        for x in -1..=w {
            let below = x <= 4 * k;
            let vname = match self.value_col(x) {
                Some(i) if i < self.k => format!("_{}", a[i] as usize),
                _ => String::new(),
            };
            d.insert(
                Pos::new(x, -1),
                spec(
                    format!("fa{x}{vname}"),
                    self.bar_south(a, x),
                    (x < w).then(|| (format!("fa{}", x + 1), 1)),
                    below.then(|| (format!("fbs{x}"), 1)),
                    g(format!("fa{x}"), 1),
                ),
            );
            if !below {
                continue;
            }
            let last = x == 4 * k;
            d.insert(
                Pos::new(x, -2),
                spec(
                    format!("fb{x}"),
                    g(format!("fbs{x}"), 1),
                    (!last).then(|| (format!("fb{}", x + 1), 1)),
                    g(format!("fcs{x}"), 1),
                    g(format!("fb{x}"), 1),
                ),
            );
            d.insert(
                Pos::new(x, -3),
                spec(format!("fc{x}"), g(format!("fcs{x}"), 1), (!last).then(|| (format!("fc{}", x + 1), 1)), None, g(format!("fc{x}"), 1)),
            );
        }
    }

    /// Cells of the two-tile tooth that value `v` of universal variable `i`
    /// hangs below the true row.
    fn tooth(&self, i: usize, v: bool) -> [Pos; 2] {
        let x = 4 * i as i32 + 1 + v as i32;
        [Pos::new(x, -2), Pos::new(x + 1, -2)]
    }

    fn grow_true(&self, a: &[bool], d: &mut Draft) {
        let (k, w) = (self.k, self.w);
        self.descent(1, -1, d);
        let bottom = d.get_mut(&Pos::new(-2, -1)).unwrap();
        bottom.glues[Dir::E.index()] = g("tr-1", 1);
        bottom.glues[Dir::S.index()] = g("tt1", 1);
        let tt2 = 4 * k as i32;
        for x in -1..=w {
            let north = self.bar_south(a, x);
            let plain = |d: &mut Draft| {
                let south = if x == tt2 { g("tt2", 1) } else { None };
                let east = (x < w).then(|| (format!("tr{}", x + 1), 1));
                d.insert(Pos::new(x, -1), spec(format!("tr{x}"), north.clone(), east, south, g(format!("tr{x}"), 1)));
            };
            if x < 0 || x >= tt2 || x % 4 == 0 {
                plain(d);
                continue;
            }
            let i = x as usize / 4;
            let v = a[i] as usize;
            // The tile after a tooth attaches through the tooth, so the row
            // cannot pass a tooth that is not there.
            let (west, south, east) = match (x % 4, v) {
                (1, 0) => (g(format!("tr{x}"), 1), g(format!("th{i}_0"), 2), None),
                (1, _) => (g(format!("tr{x}"), 1), None, g(format!("tr{}_1", x + 1), 1)),
                (2, 0) => (None, g(format!("tq{i}_0"), 1), g(format!("tr{}", x + 1), 1)),
                (2, _) => (g(format!("tr{x}_1"), 1), g(format!("th{i}_1"), 2), None),
                (3, 0) => {
                    plain(d);
                    continue;
                }
                _ => (None, g(format!("tq{i}_1"), 1), g(format!("tr{}", x + 1), 1)),
            };
            d.insert(Pos::new(x, -1), spec(format!("tr{x}_{v}"), north, east, south, west));
        }
        for i in 0..k {
            let v = a[i] as usize;
            let [t0, t1] = self.tooth(i, a[i]);
            d.insert(t0, spec(format!("tooth{i}_{v}a"), g(format!("th{i}_{v}"), 2), g(format!("tk{i}_{v}"), 2), None, None));
            d.insert(t1, spec(format!("tooth{i}_{v}b"), g(format!("tq{i}_{v}"), 1), None, None, g(format!("tk{i}_{v}"), 2)));
        }
    }

    /// Test assembly for universal values `b`: rows -2 and -3 from x = -2 to
    /// 4k, minus the teeth of `b`. Its strong bonds form a path from the west
    /// glue cell to the east glue cell through every cell that a mismatched
    /// tooth would hit; the other cells hang off the path.
    fn test(&self, b: &[bool]) -> Draft {
        let k = self.k as i32;
        let name = bits(b);
        let top = |x: i32| Pos::new(x, -2);
        let bot = |x: i32| Pos::new(x, -3);
        let mut path = vec![top(-2), top(-1)];
        let mut leaves = vec![bot(-2), bot(-1)];
        let mut at_top = true;
        for i in 0..self.k {
            let x = 4 * i as i32;
            if !b[i] {
                if at_top {
                    path.extend([top(x), bot(x)]);
                } else {
                    path.push(bot(x));
                    leaves.push(top(x));
                }
                path.extend([bot(x + 1), bot(x + 2), bot(x + 3), top(x + 3)]);
                at_top = true;
            } else {
                if at_top {
                    path.extend([top(x), top(x + 1)]);
                    leaves.push(bot(x));
                } else {
                    path.extend([bot(x), top(x), top(x + 1)]);
                }
                path.extend([bot(x + 1), bot(x + 2), bot(x + 3)]);
                at_top = false;
            }
        }
        if at_top {
            path.push(top(4 * k));
            leaves.push(bot(4 * k));
        } else {
            path.extend([bot(4 * k), top(4 * k)]);
        }
        let mut glues: BTreeMap<Pos, [GlueSpec; 4]> =
            path.iter().chain(&leaves).map(|&c| (c, Default::default())).collect();
        debug_assert_eq!(glues.len(), path.len() + leaves.len());
        let join = |a: Pos, b: Pos, glues: &mut BTreeMap<Pos, [GlueSpec; 4]>| {
            let d = Dir::ALL.into_iter().find(|&d| a.step(d) == b).expect("adjacent");
            let gname = format!("t{name}_{}_{}{}", a.x.min(b.x), a.y.min(b.y), if a.x == b.x { 'v' } else { 'h' });
            glues.get_mut(&a).unwrap()[d.index()] = g(gname.clone(), 2);
            glues.get_mut(&b).unwrap()[d.opposite().index()] = g(gname, 2);
        };
        for win in path.windows(2) {
            join(win[0], win[1], &mut glues);
        }
        for &l in &leaves {
            let anchor = if l.y == -3 { l.step(Dir::N) } else { l.step(Dir::S) };
            join(l, anchor, &mut glues);
        }
        glues.get_mut(&top(-2)).unwrap()[Dir::N.index()] = g("tt1", 1);
        glues.get_mut(&top(4 * k)).unwrap()[Dir::N.index()] = g("tt2", 1);
        glues
            .into_iter()
            .map(|(p, gl)| (p, Spec { name: format!("test{name}_{}_{}", p.x, p.y), glues: gl }))
            .collect()
    }
}

struct Catalog {
    specs: BTreeMap<String, Spec>,
}

impl Catalog {
    fn absorb(&mut self, d: &Draft) {
        for s in d.values() {
            let old = self.specs.insert(s.name.clone(), s.clone());
            debug_assert!(old.as_ref().map_or(true, |o| o == s), "tile {} redefined", s.name);
        }
    }

    fn tile_set(&self) -> TileSet {
        let mut gf = GlueFunction::new();
        for s in self.specs.values() {
            for (name, st) in s.glues.iter().flatten() {
                gf.add(name, *st);
            }
        }
        let mut ts = TileSet::new(gf);
        for s in self.specs.values() {
            let glues = s.glues.clone().map(|o| o.map_or(Glue::NULL, |(n, _)| ts.glues.get(&n).expect("declared")));
            ts.add_tile(&s.name, glues).expect("unique names");
        }
        ts
    }
}

fn assemble(ts: &TileSet, d: &Draft) -> Result<Assembly, ReductionError> {
    Ok(canonicalize(d.iter().map(|(&p, s)| (p, ts.id(&s.name).expect("cataloged"))))?)
}

pub fn aesat_to_2ham_usv(f: &Formula) -> Result<ReductionOutput, ReductionError> {
    aesat_to_2ham_usv_with(f, &ReductionOptions::default())
}

pub fn aesat_to_2ham_usv_with(f: &Formula, opts: &ReductionOptions) -> Result<ReductionOutput, ReductionError> {
    f.validate()?;
    let (n, k, m) = (f.num_vars, f.forall_prefix, f.num_clauses());
    if k == 0 {
        return Err(ReductionError::MalformedFormula("need at least one universal variable".into()));
    }
    if m == 0 {
        return Err(ReductionError::MalformedFormula("need at least one clause".into()));
    }
    let lay = Layout { f, n, k, m, w: 4 * n as i32 };
    let target_size = (4 * n + 1) * (m + 1) + m + (m + 4) + (4 * n + 2) + 2 * (4 * k + 2);
    check_budget(target_size, opts)?;
    if n > 16 {
        return Err(ReductionError::TileBudget { needed: usize::MAX, budget: opts.tile_budget });
    }

    let mut cat = Catalog { specs: BTreeMap::new() };
    let mut finals = Vec::new();
    for a in assignments(n) {
        let mut d = Draft::new();
        let t = lay.frame(&a, &mut d);
        if t {
            lay.grow_true(&a, &mut d);
        } else {
            lay.grow_false(&a, &mut d);
        }
        cat.absorb(&d);
        finals.push((a, t, d));
    }
    let tests: Vec<(Vec<bool>, Draft)> = assignments(k).map(|b| {
        let d = lay.test(&b);
        (b, d)
    }).collect();
    for (_, d) in &tests {
        cat.absorb(d);
    }
    let ts = Arc::new(cat.tile_set());

    // The shape is read off a false completion of any assignment.
    let mut probe = Draft::new();
    let zeros = vec![false; n];
    lay.frame(&zeros, &mut probe);
    lay.grow_false(&zeros, &mut probe);
    let s = shape_of(&canonicalize(probe.keys().map(|&p| (p, 0)))?);

    let mut meta = Metadata::default();
    meta.stage_roles.push("single bin".into());
    let bar: Draft = finals[0].2.iter().filter(|(p, _)| p.y == 0 && p.x >= 0 && p.x < lay.w).map(|(p, s)| (*p, s.clone())).collect();
    meta.pieces.insert("assignment bar".into(), assemble(&ts, &bar)?);
    for (a, t, d) in &finals {
        let role = if *t { "true" } else { "false" };
        meta.pieces.insert(format!("{role} {}", bits(a)), assemble(&ts, d)?);
    }
    for (b, d) in &tests {
        meta.pieces.insert(format!("test {}", bits(b)), assemble(&ts, d)?);
    }
    for i in 0..n {
        meta.blocks.push((format!("variable {}", i + 1), Pos::new(4 * i as i32, 0)));
    }
    meta.notes.push(format!("shape has {} cells; {} tile types", s.size(), ts.len()));

    let bin = Bin::of_tiles(ts, 2)?;
    Ok(ReductionOutput { system: ReducedSystem::TwoHanded(bin), target: Target::Shape(s), meta })
}
