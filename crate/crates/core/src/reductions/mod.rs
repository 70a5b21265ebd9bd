//! Compilers from 3-SAT and forall-exists SAT formulas to tile systems, plus
//! brute-force truth oracles.
//!
//! Each compiler builds its target assembly directly from the gadget layout;
//! it never runs the system it emits.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::geometry::{canonicalize, Assembly, Dir, GeomError, Glue, GlueFunction, Pos, Shape, TileId, TileSet};
use crate::staged::{BinRef, StagedError, StagedSystem};
use crate::twohanded::{Bin, BinError};

mod aesat_2ham;
mod aesat_staged;
mod rows;
mod sat_staged;

pub use aesat_2ham::{aesat_to_2ham_usv, aesat_to_2ham_usv_with};
pub use aesat_staged::{aesat_to_staged_uav, aesat_to_staged_uav_with};
pub use sat_staged::{sat_to_staged_uav, sat_to_staged_uav_with};

pub const DEFAULT_TILE_BUDGET: usize = 5000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("MalformedFormula: {0}")]
    MalformedFormula(String),
    #[error("TileBudget: target needs {needed} tiles, budget is {budget}")]
    TileBudget { needed: usize, budget: usize },
    #[error(transparent)]
    Geometry(#[from] GeomError),
    #[error(transparent)]
    Staged(#[from] StagedError),
    #[error(transparent)]
    Bin(#[from] BinError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    /// Variable index, from 1.
    pub var: usize,
    pub positive: bool,
}

impl Literal {
    pub fn new(var: usize, positive: bool) -> Literal {
        Literal { var, positive }
    }

    /// Parses the signed-integer form used by DIMACS: 3 is x3, -3 is not x3.
    pub fn from_int(v: i64) -> Option<Literal> {
        if v == 0 {
            return None;
        }
        Some(Literal { var: v.unsigned_abs() as usize, positive: v > 0 })
    }

    pub fn to_int(self) -> i64 {
        if self.positive {
            self.var as i64
        } else {
            -(self.var as i64)
        }
    }

    pub fn holds(self, assignment: &[bool]) -> bool {
        assignment[self.var - 1] == self.positive
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "x{}", self.var)
        } else {
            write!(f, "!x{}", self.var)
        }
    }
}

/// A 3-CNF formula whose first `k` variables are universally quantified.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Formula {
    pub num_vars: usize,
    pub clauses: Vec<[Literal; 3]>,
    pub forall_prefix: usize,
}

impl Formula {
    pub fn new(num_vars: usize, clauses: Vec<[Literal; 3]>, forall_prefix: usize) -> Result<Formula, ReductionError> {
        let f = Formula { num_vars, clauses, forall_prefix };
        f.validate()?;
        Ok(f)
    }

    /// Builds from signed-integer clauses.
    pub fn from_ints(num_vars: usize, clauses: &[[i64; 3]], forall_prefix: usize) -> Result<Formula, ReductionError> {
        let mut cs = Vec::with_capacity(clauses.len());
        for c in clauses {
            let mut lits = [Literal::new(1, true); 3];
            for (l, &v) in lits.iter_mut().zip(c) {
                *l = Literal::from_int(v).ok_or_else(|| ReductionError::MalformedFormula("literal 0".into()))?;
            }
            cs.push(lits);
        }
        Formula::new(num_vars, cs, forall_prefix)
    }

    pub fn validate(&self) -> Result<(), ReductionError> {
        if self.forall_prefix > self.num_vars {
            return Err(ReductionError::MalformedFormula(format!(
                "forall prefix {} exceeds {} variables",
                self.forall_prefix, self.num_vars
            )));
        }
        for (ci, c) in self.clauses.iter().enumerate() {
            for l in c {
                if l.var == 0 || l.var > self.num_vars {
                    return Err(ReductionError::MalformedFormula(format!(
                        "clause {} uses variable {} outside 1..={}",
                        ci + 1,
                        l.var,
                        self.num_vars
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    /// Does `value` for variable `var` (from 0) satisfy clause `clause` (from 0)?
    pub(crate) fn sat_by(&self, clause: usize, var: usize, value: bool) -> bool {
        self.clauses[clause].iter().any(|l| l.var == var + 1 && l.positive == value)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.clauses.is_empty() {
            return f.write_str("T");
        }
        let parts: Vec<String> =
            self.clauses.iter().map(|c| format!("({} | {} | {})", c[0], c[1], c[2])).collect();
        f.write_str(&parts.join(" & "))
    }
}

pub fn eval_3sat(f: &Formula, assignment: &[bool]) -> bool {
    assert_eq!(assignment.len(), f.num_vars, "assignment length");
    f.clauses.iter().all(|c| c.iter().any(|l| l.holds(assignment)))
}

/// All assignments of `n` variables, variable 1 first, in counting order.
pub fn assignments(n: usize) -> impl Iterator<Item = Vec<bool>> {
    (0u64..1 << n).map(move |bits| (0..n).map(|i| bits >> i & 1 == 1).collect())
}

/// Every formula over variables 1..=n (n from 1 to `max_vars`) with 1 to
/// `max_clauses` clauses, where a clause is a multiset of three literals and
/// a formula is a multiset of clauses. Each formula uses exactly n variables
/// in its header even when some go unused.
pub fn small_family(max_vars: usize, max_clauses: usize, forall_prefix: usize) -> Vec<Formula> {
    let mut out = Vec::new();
    for n in forall_prefix.max(1)..=max_vars {
        let lits: Vec<Literal> =
            (1..=n).flat_map(|v| [Literal::new(v, true), Literal::new(v, false)]).collect();
        let mut clauses = Vec::new();
        for a in 0..lits.len() {
            for b in a..lits.len() {
                for c in b..lits.len() {
                    clauses.push([lits[a], lits[b], lits[c]]);
                }
            }
        }
        for m in 1..=max_clauses {
            multisets(clauses.len(), m, &mut |idx| {
                let cs = idx.iter().map(|&i| clauses[i]).collect();
                out.push(Formula { num_vars: n, clauses: cs, forall_prefix });
            });
        }
    }
    out
}

fn multisets(len: usize, m: usize, emit: &mut dyn FnMut(&[usize])) {
    fn go(len: usize, m: usize, start: usize, cur: &mut Vec<usize>, emit: &mut dyn FnMut(&[usize])) {
        if cur.len() == m {
            emit(cur);
            return;
        }
        for i in start..len {
            cur.push(i);
            go(len, m, i, cur, emit);
            cur.pop();
        }
    }
    go(len, m, 0, &mut Vec::new(), emit)
}

pub fn is_satisfiable(f: &Formula) -> bool {
    assignments(f.num_vars).any(|a| eval_3sat(f, &a))
}

/// For every assignment of the first k variables, is there an assignment of
/// the rest satisfying the formula?
pub fn eval_aesat(f: &Formula) -> bool {
    let k = f.forall_prefix;
    let rest = f.num_vars - k;
    assignments(k).all(|pre| {
        assignments(rest).any(|post| {
            let mut a = pre.clone();
            a.extend(post);
            eval_3sat(f, &a)
        })
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReducedSystem {
    TwoHanded(Bin),
    Staged(StagedSystem),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Target {
    Assembly(Assembly),
    Shape(Shape),
}

/// Layout facts kept for diagnostics and rendering.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Metadata {
    pub stage_roles: Vec<String>,
    pub bin_roles: BTreeMap<BinRef, String>,
    /// Named sub-assemblies of the construction.
    pub pieces: BTreeMap<String, Assembly>,
    /// Block name and the position of its lower-left cell in the target.
    pub blocks: Vec<(String, Pos)>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionOutput {
    pub system: ReducedSystem,
    pub target: Target,
    pub meta: Metadata,
}

impl ReductionOutput {
    pub fn staged(&self) -> Option<&StagedSystem> {
        match &self.system {
            ReducedSystem::Staged(s) => Some(s),
            ReducedSystem::TwoHanded(_) => None,
        }
    }

    pub fn bin(&self) -> Option<&Bin> {
        match &self.system {
            ReducedSystem::TwoHanded(b) => Some(b),
            ReducedSystem::Staged(_) => None,
        }
    }

    pub fn target_assembly(&self) -> Option<&Assembly> {
        match &self.target {
            Target::Assembly(a) => Some(a),
            Target::Shape(_) => None,
        }
    }

    pub fn target_shape(&self) -> Option<&Shape> {
        match &self.target {
            Target::Shape(s) => Some(s),
            Target::Assembly(_) => None,
        }
    }

    pub fn tiles(&self) -> &Arc<TileSet> {
        match &self.system {
            ReducedSystem::TwoHanded(b) => b.tiles(),
            ReducedSystem::Staged(s) => &s.tiles,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReductionOptions {
    pub tile_budget: usize,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        ReductionOptions { tile_budget: DEFAULT_TILE_BUDGET }
    }
}

fn check_budget(needed: usize, opts: &ReductionOptions) -> Result<(), ReductionError> {
    if needed > opts.tile_budget {
        return Err(ReductionError::TileBudget { needed, budget: opts.tile_budget });
    }
    Ok(())
}

fn bits(a: &[bool]) -> String {
    a.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// A target drawn cell by cell. Every cell gets its own tile type; adjacent
/// cells joined by `link` share a unique strength-2 glue, and `coop` puts a
/// named strength-1 glue on one side of a cell.
#[derive(Default)]
pub(crate) struct CellLayout {
    names: BTreeMap<Pos, String>,
    strong: BTreeSet<(Pos, Dir)>,
    coop: BTreeMap<(Pos, Dir), String>,
}

pub(crate) struct BuiltLayout {
    pub tiles: Arc<TileSet>,
    pub ids: BTreeMap<Pos, TileId>,
}

impl CellLayout {
    pub fn add(&mut self, p: Pos, name: String) {
        let old = self.names.insert(p, name);
        debug_assert!(old.is_none(), "cell {p} placed twice");
    }

    pub fn contains(&self, p: Pos) -> bool {
        self.names.contains_key(&p)
    }

    pub fn cells(&self) -> impl Iterator<Item = Pos> + '_ {
        self.names.keys().copied()
    }

    /// Joins `p` with its neighbor on side `d`.
    pub fn link(&mut self, p: Pos, d: Dir) {
        let q = p.step(d);
        self.strong.insert((p, d));
        self.strong.insert((q, d.opposite()));
    }

    pub fn coop(&mut self, p: Pos, d: Dir, glue: &str) {
        self.coop.insert((p, d), glue.to_string());
    }

    pub fn build(&self) -> Result<BuiltLayout, ReductionError> {
        let mut gf = GlueFunction::new();
        for g in self.coop.values() {
            gf.add(g, 1);
        }
        let mut ts = TileSet::new(gf);
        let mut ids = BTreeMap::new();
        for (&p, name) in &self.names {
            let mut glues = [Glue::NULL; 4];
            for d in Dir::ALL {
                if self.strong.contains(&(p, d)) {
                    let (a, dd) = if matches!(d, Dir::N | Dir::E) { (p, d) } else { (p.step(d), d.opposite()) };
                    glues[d.index()] = ts.glues.add(&format!("s{}_{}{}", a.x, a.y, dir_char(dd)), 2);
                } else if let Some(g) = self.coop.get(&(p, d)) {
                    glues[d.index()] = ts.glues.get(g).expect("declared");
                }
            }
            ids.insert(p, ts.add_tile(name, glues)?);
        }
        Ok(BuiltLayout { tiles: Arc::new(ts), ids })
    }
}

fn dir_char(d: Dir) -> char {
    match d {
        Dir::N => 'n',
        Dir::E => 'e',
        Dir::S => 's',
        Dir::W => 'w',
    }
}

impl BuiltLayout {
    pub fn assembly<I: IntoIterator<Item = Pos>>(&self, cells: I) -> Result<Assembly, ReductionError> {
        Ok(canonicalize(cells.into_iter().map(|p| (p, self.ids[&p])))?)
    }

    pub fn tile_ids<I: IntoIterator<Item = Pos>>(&self, cells: I) -> Vec<TileId> {
        let set: BTreeSet<TileId> = cells.into_iter().map(|p| self.ids[&p]).collect();
        set.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eval_examples() {
        let f = Formula::from_ints(3, &[[1, 2, 3]], 0).unwrap();
        assert!(eval_3sat(&f, &[true, false, false]));
        let g = Formula::from_ints(1, &[[1, 1, 1], [-1, -1, -1]], 0).unwrap();
        assert!(!eval_3sat(&g, &[true]));
        assert!(!eval_3sat(&g, &[false]));
        assert!(!is_satisfiable(&g));
    }

    #[test]
    fn aesat_examples() {
        let f = Formula::from_ints(2, &[[1, 2, 2]], 1).unwrap();
        assert!(eval_aesat(&f));
        let g = Formula::from_ints(1, &[[1, 1, 1]], 1).unwrap();
        assert!(!eval_aesat(&g));
        let h = Formula::from_ints(1, &[[1, 1, 1]], 0).unwrap();
        assert!(eval_aesat(&h));
        let taut = Formula::from_ints(1, &[[1, -1, 1]], 1).unwrap();
        assert!(eval_aesat(&taut));
    }

    #[test]
    fn family_sizes() {
        assert_eq!(small_family(2, 2, 0).len(), 4 + 10 + 20 + 210);
        assert_eq!(small_family(2, 2, 2).len(), 230);
    }

    #[test]
    fn malformed() {
        assert!(Formula::from_ints(1, &[[1, 2, 1]], 0).is_err());
        assert!(Formula::from_ints(1, &[[1, 1, 1]], 2).is_err());
        assert!(Formula::from_ints(1, &[[0, 1, 1]], 0).is_err());
    }
}
