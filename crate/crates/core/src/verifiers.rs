//! Bounded deciders for unique assembly / unique shape verification and the
//! per-bin subproblems of staged systems.
//!
//! Every "select an assembly" step is replaced by a scan over the bounded
//! producible sets. A closure capped at `n` tiles finds every producible of
//! size in `(n, 2n]` that matters: the smallest oversize producible always
//! splits into two parts of at most `n` tiles.

use std::fmt;

use thiserror::Error;

use crate::geometry::{is_tau_stable, GeomError, shape_of, Assembly, Shape};
use crate::staged::{bin_inputs, BinRef, StagedError, StagedSystem};
use crate::twohanded::{
    self, attaches_to_any, is_producible, Answer, Bin, BinError, ProductionResult,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifyError {
    #[error("BoundTooSmall: bound {bound} is below the assembly size {needed}")]
    BoundTooSmall { bound: usize, needed: usize },
    #[error("NoSuchBin: stage {0} bin {1}")]
    NoSuchBin(usize, usize),
    #[error(transparent)]
    Staged(#[from] StagedError),
    #[error(transparent)]
    Bin(#[from] BinError),
    #[error(transparent)]
    Geometry(#[from] GeomError),
}

/// Why a verdict is what it is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Finding {
    Holds,
    /// Witness is a producible larger than the size bound.
    Oversize,
    /// Witness is a terminal assembly other than the target (or of the wrong shape).
    OtherTerminal,
    /// Witness is the target, which is not producible.
    NotProducible,
    /// Witness is the target, which is not tau-stable.
    Unstable,
    /// Witness is a producible that attaches to the target.
    Attaches,
    /// Producibles exist beyond the examined window.
    BeyondWindow,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Finding::Holds => "holds",
            Finding::Oversize => "oversize producible",
            Finding::OtherTerminal => "unexpected terminal",
            Finding::NotProducible => "target not producible",
            Finding::Unstable => "target not tau-stable",
            Finding::Attaches => "producible attaches to target",
            Finding::BeyondWindow => "producibles exceed the examined window",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub answer: Answer,
    pub witness: Option<Assembly>,
    /// Largest assembly size examined.
    pub bound: usize,
    pub finding: Finding,
}

impl Verdict {
    fn yes(bound: usize) -> Verdict {
        Verdict { answer: Answer::Yes, witness: None, bound, finding: Finding::Holds }
    }

    fn no(bound: usize, finding: Finding, w: Assembly) -> Verdict {
        Verdict { answer: Answer::No, witness: Some(w), bound, finding }
    }

    fn undecided(bound: usize) -> Verdict {
        Verdict { answer: Answer::Undecided, witness: None, bound, finding: Finding::BeyondWindow }
    }
}

/// Oversize check for results capped at `n`, examined up to `window`.
fn oversize_verdict<'a>(
    results: impl IntoIterator<Item = &'a ProductionResult>,
    window: usize,
) -> Option<Verdict> {
    let least = results.into_iter().filter_map(|r| r.oversize.as_ref()).min()?;
    Some(if least.size() <= window {
        Verdict::no(window, Finding::Oversize, least.clone())
    } else {
        Verdict::undecided(window)
    })
}

/// Does every terminal of the bin have shape `s`?
pub fn usv_2ham(b: &Bin, s: &Shape) -> Result<Verdict, VerifyError> {
    usv_2ham_window(b, s, 2 * s.size())
}

pub fn usv_2ham_window(b: &Bin, s: &Shape, window: usize) -> Result<Verdict, VerifyError> {
    let n = s.size();
    let res = twohanded::producibles(b, n)?;
    if let Some(v) = oversize_verdict([&res], window) {
        return Ok(v);
    }
    for t in &res.terminals {
        if shape_of(t) != *s {
            return Ok(Verdict::no(window, Finding::OtherTerminal, t.clone()));
        }
    }
    Ok(Verdict::yes(window))
}

/// Is `a` the unique terminal assembly of the bin?
pub fn uav_2ham(b: &Bin, a: &Assembly) -> Result<Verdict, VerifyError> {
    uav_2ham_window(b, a, 2 * a.size())
}

pub fn uav_2ham_window(b: &Bin, a: &Assembly, window: usize) -> Result<Verdict, VerifyError> {
    let n = a.size();
    if b.initials().iter().any(|i| i.size() > n) {
        let w = b.initials().iter().filter(|i| i.size() > n).min().expect("nonempty").clone();
        return Ok(Verdict::no(window, Finding::Oversize, w));
    }
    let res = twohanded::producibles(b, n)?;
    if let Some(v) = oversize_verdict([&res], window) {
        return Ok(v);
    }
    target_verdict(b, &[&res], a, window)
}

fn target_verdict(
    b: &Bin,
    finals: &[&ProductionResult],
    a: &Assembly,
    window: usize,
) -> Result<Verdict, VerifyError> {
    let mut others: Vec<&Assembly> = finals.iter().flat_map(|r| r.terminals.iter()).filter(|t| *t != a).collect();
    others.sort();
    if let Some(t) = others.first() {
        return Ok(Verdict::no(window, Finding::OtherTerminal, (*t).clone()));
    }
    if !is_tau_stable(a, b.tiles(), b.tau())? {
        return Ok(Verdict::no(window, Finding::Unstable, a.clone()));
    }
    if !finals.iter().any(|r| r.is_producible(a)) {
        return Ok(Verdict::no(window, Finding::NotProducible, a.clone()));
    }
    if !finals.iter().any(|r| r.is_terminal(a)) {
        let w = finals
            .iter()
            .filter_map(|r| attaches_to_any(a, &r.producibles, b.tiles(), b.tau()))
            .min()
            .expect("a non-terminal producible has a partner");
        return Ok(Verdict::no(window, Finding::Attaches, w.clone()));
    }
    Ok(Verdict::yes(window))
}

/// Results of stages `1..=upto` capped at `n`. Stops after the first stage
/// that overflows, since later inputs would be unreliable.
fn run_prefix(sys: &StagedSystem, upto: usize, n: usize) -> Result<Vec<Vec<ProductionResult>>, VerifyError> {
    use rayon::prelude::*;
    let mut done: Vec<Vec<ProductionResult>> = Vec::new();
    for s in 1..=upto {
        let row: Result<Vec<_>, VerifyError> = (0..sys.mix.bins[s - 1])
            .into_par_iter()
            .map(|b| {
                let inputs = bin_inputs(sys, &done, s, b)?;
                if let Some(big) = inputs.iter().filter(|i| i.size() > n).min() {
                    // Only possible for stage-1 bins with a bound of 0.
                    return Err(VerifyError::BoundTooSmall { bound: n, needed: big.size() });
                }
                let bin = Bin::new(inputs, sys.tiles.clone(), sys.tau)?;
                Ok(twohanded::producibles(&bin, n)?)
            })
            .collect();
        let row = row?;
        let stop = row.iter().any(|r| r.overflow);
        done.push(row);
        if stop {
            break;
        }
    }
    Ok(done)
}

fn check_bin(sys: &StagedSystem, (s, b): BinRef) -> Result<(), VerifyError> {
    if s == 0 || s > sys.mix.stages() || b >= sys.mix.bins[s - 1] {
        return Err(VerifyError::NoSuchBin(s, b));
    }
    Ok(())
}

fn bin_of(sys: &StagedSystem, done: &[Vec<ProductionResult>], s: usize, b: usize) -> Result<Bin, VerifyError> {
    Ok(Bin::new(bin_inputs(sys, done, s, b)?, sys.tiles.clone(), sys.tau)?)
}

/// Is `a` producible in bin (s, b), with every earlier-stage producible of
/// size at most `n`?
pub fn pibv(sys: &StagedSystem, s: usize, b: usize, a: &Assembly, n: usize) -> Result<Verdict, VerifyError> {
    check_bin(sys, (s, b))?;
    if n < a.size() {
        return Err(VerifyError::BoundTooSmall { bound: n, needed: a.size() });
    }
    let done = run_prefix(sys, s - 1, n)?;
    if let Some(v) = oversize_verdict(done.iter().flatten(), 2 * n) {
        return Ok(v);
    }
    if !is_tau_stable(a, &sys.tiles, sys.tau)? {
        return Ok(Verdict::no(2 * n, Finding::Unstable, a.clone()));
    }
    let bin = bin_of(sys, &done, s, b)?;
    let ok = if a.size() <= 12 {
        is_producible(&bin, a)
    } else {
        twohanded::producibles(&bin, a.size())?.is_producible(a)
    };
    Ok(if ok { Verdict::yes(2 * n) } else { Verdict::no(2 * n, Finding::NotProducible, a.clone()) })
}

/// Does every producible of bin (s, b) and of every earlier bin have size
/// at most `n`?
pub fn uibv(sys: &StagedSystem, s: usize, b: usize, n: usize) -> Result<Verdict, VerifyError> {
    check_bin(sys, (s, b))?;
    let done = run_prefix(sys, s - 1, n)?;
    if let Some(v) = oversize_verdict(done.iter().flatten(), 2 * n) {
        return Ok(v);
    }
    let bin = bin_of(sys, &done, s, b)?;
    if bin.initials().iter().any(|i| i.size() > n) {
        let w = bin.initials().iter().filter(|i| i.size() > n).min().expect("nonempty").clone();
        return Ok(Verdict::no(2 * n, Finding::Oversize, w));
    }
    let res = twohanded::producibles(&bin, n)?;
    Ok(oversize_verdict([&res], 2 * n).unwrap_or_else(|| Verdict::yes(2 * n)))
}

/// Is `a` a terminal assembly of bin (s, b), under the size bound `n`?
pub fn tibv(sys: &StagedSystem, s: usize, b: usize, a: &Assembly, n: usize) -> Result<Verdict, VerifyError> {
    let p = pibv(sys, s, b, a, n)?;
    if p.answer != Answer::Yes {
        return Ok(p);
    }
    let done = run_prefix(sys, s - 1, n)?;
    let bin = bin_of(sys, &done, s, b)?;
    let res = twohanded::producibles(&bin, n)?;
    if let Some(w) = attaches_to_any(a, &res.producibles, &sys.tiles, sys.tau) {
        return Ok(Verdict::no(2 * n, Finding::Attaches, w.clone()));
    }
    Ok(oversize_verdict([&res], 2 * n).unwrap_or_else(|| Verdict::yes(2 * n)))
}

fn staged_common(
    sys: &StagedSystem,
    n: usize,
    window: usize,
) -> Result<Result<Vec<Vec<ProductionResult>>, Verdict>, VerifyError> {
    let done = run_prefix(sys, sys.mix.stages(), n)?;
    if let Some(v) = oversize_verdict(done.last().expect("one stage"), window) {
        return Ok(Err(v));
    }
    Ok(Ok(done))
}

/// Is `a` the unique terminal assembly of the system's final stage, with no
/// producible anywhere larger than `a`?
pub fn staged_uav(sys: &StagedSystem, a: &Assembly) -> Result<Verdict, VerifyError> {
    staged_uav_window(sys, a, 2 * a.size())
}

pub fn staged_uav_window(sys: &StagedSystem, a: &Assembly, window: usize) -> Result<Verdict, VerifyError> {
    let done = match staged_common(sys, a.size(), window)? {
        Ok(d) => d,
        Err(v) => return Ok(v),
    };
    let last = done.last().expect("one stage");
    let finals: Vec<&ProductionResult> = last.iter().collect();
    let b = Bin::trusted(Vec::new(), sys.tiles.clone(), sys.tau);
    target_verdict(&b, &finals, a, window)
}

/// Does every final-stage terminal have shape `s`, with no producible
/// anywhere larger than `s`?
pub fn staged_usv(sys: &StagedSystem, s: &Shape) -> Result<Verdict, VerifyError> {
    staged_usv_window(sys, s, 2 * s.size())
}

pub fn staged_usv_window(sys: &StagedSystem, s: &Shape, window: usize) -> Result<Verdict, VerifyError> {
    let done = match staged_common(sys, s.size(), window)? {
        Ok(d) => d,
        Err(v) => return Ok(v),
    };
    let mut bad: Vec<&Assembly> =
        done.last().expect("one stage").iter().flat_map(|r| r.terminals.iter()).filter(|t| shape_of(t) != *s).collect();
    bad.sort();
    Ok(match bad.first() {
        Some(t) => Verdict::no(window, Finding::OtherTerminal, (*t).clone()),
        None => Verdict::yes(window),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{canonicalize, Glue, GlueFunction, Pos, TileSet};
    use crate::staged::MixGraph;
    use std::sync::Arc;

    fn pair() -> (Arc<TileSet>, Assembly) {
        let mut gf = GlueFunction::new();
        let g = gf.add("g", 2);
        let mut ts = TileSet::new(gf);
        let a = ts.add_tile("t1", [Glue::NULL, g, Glue::NULL, Glue::NULL]).unwrap();
        let b = ts.add_tile("t2", [Glue::NULL, Glue::NULL, Glue::NULL, g]).unwrap();
        let ab = canonicalize([(Pos::new(0, 0), a), (Pos::new(1, 0), b)]).unwrap();
        (Arc::new(ts), ab)
    }

    fn one_tile() -> Arc<TileSet> {
        let mut ts = TileSet::new(GlueFunction::new());
        ts.add_tile("t", [Glue::NULL; 4]).unwrap();
        ts.add_tile("u", [Glue::NULL; 4]).unwrap();
        Arc::new(ts)
    }

    #[test]
    fn two_handed_examples() {
        let ts = one_tile();
        let b = Bin::new(vec![Assembly::single(0)], ts.clone(), 2).unwrap();
        let cell = Shape::from_cells([Pos::ORIGIN]).unwrap();
        assert_eq!(usv_2ham(&b, &cell).unwrap().answer, Answer::Yes);
        assert_eq!(uav_2ham(&b, &Assembly::single(0)).unwrap().answer, Answer::Yes);
        let v = uav_2ham(&b, &Assembly::single(1)).unwrap();
        assert_eq!(v.answer, Answer::No);
        assert_eq!(v.witness, Some(Assembly::single(0)));

        let (ts, ab) = pair();
        let b = Bin::of_tiles(ts, 2).unwrap();
        assert_eq!(usv_2ham(&b, &shape_of(&ab)).unwrap().answer, Answer::Yes);
        assert_eq!(uav_2ham(&b, &ab).unwrap().answer, Answer::Yes);
    }

    #[test]
    fn line_bin_oversize() {
        let mut gf = GlueFunction::new();
        let g = gf.add("g", 2);
        let mut ts = TileSet::new(gf);
        ts.add_tile("t", [Glue::NULL, g, Glue::NULL, g]).unwrap();
        let sys = StagedSystem::single_bin(Arc::new(ts), 2).unwrap();
        let v = uibv(&sys, 1, 0, 3).unwrap();
        assert_eq!(v.answer, Answer::No);
        assert_eq!(v.witness.unwrap().size(), 4);
        let v = uibv(&sys, 1, 0, 1);
        assert_eq!(v.unwrap().answer, Answer::No);
    }

    #[test]
    fn staged_examples() {
        let ts = one_tile();
        let sys = StagedSystem::new(MixGraph::new(vec![1]), vec![vec![0]], ts, 2).unwrap();
        let t = Assembly::single(0);
        assert_eq!(staged_uav(&sys, &t).unwrap().answer, Answer::Yes);
        assert_eq!(staged_usv(&sys, &shape_of(&t)).unwrap().answer, Answer::Yes);
        assert_eq!(pibv(&sys, 1, 0, &t, 1).unwrap().answer, Answer::Yes);
        assert_eq!(uibv(&sys, 1, 0, 1).unwrap().answer, Answer::Yes);
        assert_eq!(tibv(&sys, 1, 0, &t, 1).unwrap().answer, Answer::Yes);
    }

    #[test]
    fn same_shape_different_types() {
        let ts = one_tile();
        let sys = StagedSystem::new(MixGraph::new(vec![1]), vec![vec![0, 1]], ts, 2).unwrap();
        let t = Assembly::single(0);
        let v = staged_uav(&sys, &t).unwrap();
        assert_eq!(v.answer, Answer::No);
        assert_eq!(v.witness, Some(Assembly::single(1)));
        assert_eq!(staged_usv(&sys, &shape_of(&t)).unwrap().answer, Answer::Yes);
    }

    #[test]
    fn proper_subassembly_not_terminal() {
        let (ts, _) = pair();
        let sys = StagedSystem::single_bin(ts, 2).unwrap();
        let v = tibv(&sys, 1, 0, &Assembly::single(0), 2).unwrap();
        assert_eq!(v.answer, Answer::No);
        assert_eq!(v.finding, Finding::Attaches);
        assert_eq!(v.witness, Some(Assembly::single(1)));
    }
}
