//! Staged assembly: mix graphs, bin inputs and stage-by-stage execution.
//!
//! Stages are numbered from 1; bins within a stage from 0.

use std::collections::BTreeSet;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{Assembly, TileId, TileSet};
use crate::twohanded::{self, unique_answer, Answer, Bin, BinError, ProductionResult};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StagedError {
    #[error("InvalidMixGraph: {0}")]
    InvalidMixGraph(String),
    #[error("StageOrderViolation: stage {stage} needs every bin of stage {} computed first", stage - 1)]
    StageOrderViolation { stage: usize },
    #[error("NoSuchBin: stage {stage} bin {bin}")]
    NoSuchBin { stage: usize, bin: usize },
    #[error("UnknownTile: stage-1 bin {bin} lists tile id {tile}")]
    UnknownTile { bin: usize, tile: TileId },
    #[error(transparent)]
    Bin(#[from] BinError),
}

/// Bin address: stage (from 1) and bin index (from 0).
pub type BinRef = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixGraph {
    /// Number of bins in each stage; `bins.len()` is the stage count.
    pub bins: Vec<usize>,
    pub edges: BTreeSet<(BinRef, BinRef)>,
}

impl MixGraph {
    pub fn new(bins: Vec<usize>) -> MixGraph {
        MixGraph { bins, edges: BTreeSet::new() }
    }

    pub fn stages(&self) -> usize {
        self.bins.len()
    }

    /// Largest bin count over all stages.
    pub fn bins_per_stage(&self) -> usize {
        self.bins.iter().copied().max().unwrap_or(0)
    }

    pub fn add_edge(&mut self, from: BinRef, to: BinRef) {
        self.edges.insert((from, to));
    }

    fn in_range(&self, (s, b): BinRef) -> bool {
        s >= 1 && s <= self.bins.len() && b < self.bins[s - 1]
    }

    /// Problems found; empty means valid.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.bins.is_empty() {
            out.push("mix graph has no stages".to_string());
        }
        for &(from, to) in &self.edges {
            if !self.in_range(from) || !self.in_range(to) {
                out.push(format!(
                    "edge ({},{}) -> ({},{}) names a bin out of range",
                    from.0, from.1, to.0, to.1
                ));
            } else if to.0 != from.0 + 1 {
                out.push(format!(
                    "edge ({},{}) -> ({},{}) does not go from stage i to stage i+1",
                    from.0, from.1, to.0, to.1
                ));
            }
        }
        for (si, &n) in self.bins.iter().enumerate().skip(1) {
            let s = si + 1;
            for b in 0..n {
                let has_out = self.edges.iter().any(|&(f, _)| f == (s, b));
                let has_in = self.edges.iter().any(|&(_, t)| t == (s, b));
                if has_out && !has_in {
                    out.push(format!("bin ({s},{b}) feeds later stages but has no incoming edge"));
                }
            }
        }
        out
    }

    pub fn validate(&self) -> bool {
        self.diagnostics().is_empty()
    }

    pub fn parents(&self, to: BinRef) -> impl Iterator<Item = BinRef> + '_ {
        self.edges.iter().filter(move |e| e.1 == to).map(|e| e.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StagedSystem {
    pub mix: MixGraph,
    /// Tile sets of the stage-1 bins.
    pub stage1: Vec<Vec<TileId>>,
    pub tiles: Arc<TileSet>,
    pub tau: u32,
}

impl StagedSystem {
    pub fn new(
        mix: MixGraph,
        stage1: Vec<Vec<TileId>>,
        tiles: Arc<TileSet>,
        tau: u32,
    ) -> Result<StagedSystem, StagedError> {
        let diag = mix.diagnostics();
        if !diag.is_empty() {
            return Err(StagedError::InvalidMixGraph(diag.join("; ")));
        }
        if stage1.len() != mix.bins[0] {
            return Err(StagedError::InvalidMixGraph(format!(
                "{} stage-1 tile sets for {} stage-1 bins",
                stage1.len(),
                mix.bins[0]
            )));
        }
        for (b, set) in stage1.iter().enumerate() {
            if let Some(&t) = set.iter().find(|&&t| t as usize >= tiles.len()) {
                return Err(StagedError::UnknownTile { bin: b, tile: t });
            }
        }
        if tau == 0 {
            return Err(BinError::ZeroTemperature.into());
        }
        let mut stage1 = stage1;
        for s in stage1.iter_mut() {
            s.sort();
            s.dedup();
        }
        Ok(StagedSystem { mix, stage1, tiles, tau })
    }

    /// A one-stage system with a single bin holding `tiles`.
    pub fn single_bin(tiles: Arc<TileSet>, tau: u32) -> Result<StagedSystem, StagedError> {
        let all = (0..tiles.len() as TileId).collect();
        StagedSystem::new(MixGraph::new(vec![1]), vec![all], tiles, tau)
    }

    pub fn final_stage(&self) -> usize {
        self.mix.stages()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StagedRunResult {
    /// `bins[s-1][b]` is the result of bin (s, b).
    pub bins: Vec<Vec<ProductionResult>>,
    /// Union of final-stage terminals, sorted.
    pub output: Vec<Assembly>,
    pub overflow: bool,
    pub uniquely_produced: Answer,
}

impl StagedRunResult {
    pub fn bin(&self, (s, b): BinRef) -> &ProductionResult {
        &self.bins[s - 1][b]
    }
}

/// Input assemblies of bin (i, j), given the results of all earlier stages.
pub fn bin_inputs(
    sys: &StagedSystem,
    run: &[Vec<ProductionResult>],
    stage: usize,
    bin: usize,
) -> Result<Vec<Assembly>, StagedError> {
    if !sys.mix.in_range((stage, bin)) {
        return Err(StagedError::NoSuchBin { stage, bin });
    }
    if stage == 1 {
        return Ok(sys.stage1[bin].iter().map(|&t| Assembly::single(t)).collect());
    }
    if run.len() < stage - 1 || run[stage - 2].len() != sys.mix.bins[stage - 2] {
        return Err(StagedError::StageOrderViolation { stage });
    }
    let mut set = BTreeSet::new();
    for (ps, pb) in sys.mix.parents((stage, bin)) {
        set.extend(run[ps - 1][pb].terminals.iter().cloned());
    }
    Ok(set.into_iter().collect())
}

fn run_bin(
    sys: &StagedSystem,
    done: &[Vec<ProductionResult>],
    stage: usize,
    bin: usize,
    bound: usize,
) -> Result<ProductionResult, StagedError> {
    let inputs = bin_inputs(sys, done, stage, bin)?;
    let b = Bin::trusted(inputs, sys.tiles.clone(), sys.tau);
    Ok(twohanded::terminals(&b, bound)?)
}

/// Evaluates every bin, stage by stage. Bins of one stage run in parallel.
pub fn run_staged(sys: &StagedSystem, bound: usize) -> Result<StagedRunResult, StagedError> {
    let mut done: Vec<Vec<ProductionResult>> = Vec::with_capacity(sys.mix.stages());
    for s in 1..=sys.mix.stages() {
        let row: Result<Vec<_>, _> =
            (0..sys.mix.bins[s - 1]).into_par_iter().map(|b| run_bin(sys, &done, s, b, bound)).collect();
        done.push(row?);
    }
    let last = done.last().expect("at least one stage");
    let output: BTreeSet<Assembly> = last.iter().flat_map(|r| r.terminals.iter().cloned()).collect();
    let overflow = done.iter().flatten().any(|r| r.overflow);
    let mut uniquely_produced = Answer::Yes;
    for r in last {
        match unique_answer(r) {
            Answer::No => {
                uniquely_produced = Answer::No;
                break;
            }
            Answer::Undecided => uniquely_produced = Answer::Undecided,
            Answer::Yes => {}
        }
    }
    Ok(StagedRunResult { bins: done, output: output.into_iter().collect(), overflow, uniquely_produced })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{GlueFunction, Glue};

    #[test]
    fn validate_examples() {
        assert!(MixGraph::new(vec![1]).validate());
        let mut m = MixGraph::new(vec![1, 1, 1]);
        m.add_edge((1, 0), (3, 0));
        assert!(!m.validate());
        let mut m = MixGraph::new(vec![1, 1]);
        m.add_edge((2, 0), (1, 0));
        assert!(!m.validate());
        let mut m = MixGraph::new(vec![1, 1]);
        m.add_edge((1, 0), (2, 1));
        assert!(!m.validate());
    }

    #[test]
    fn one_stage_single_tile() {
        let mut ts = TileSet::new(GlueFunction::new());
        ts.add_tile("t", [Glue::NULL; 4]).unwrap();
        let sys = StagedSystem::single_bin(Arc::new(ts), 2).unwrap();
        let r = run_staged(&sys, 4).unwrap();
        assert_eq!(r.output, vec![Assembly::single(0)]);
        assert_eq!(r.uniquely_produced, Answer::Yes);
    }

    #[test]
    fn second_stage_unions_parents() {
        let mut ts = TileSet::new(GlueFunction::new());
        ts.add_tile("a", [Glue::NULL; 4]).unwrap();
        ts.add_tile("b", [Glue::NULL; 4]).unwrap();
        let mut m = MixGraph::new(vec![2, 1]);
        m.add_edge((1, 0), (2, 0));
        m.add_edge((1, 1), (2, 0));
        let sys = StagedSystem::new(m, vec![vec![0], vec![1]], Arc::new(ts), 2).unwrap();
        let r = run_staged(&sys, 2).unwrap();
        let inputs = bin_inputs(&sys, &r.bins[..1], 2, 0).unwrap();
        assert_eq!(inputs, vec![Assembly::single(0), Assembly::single(1)]);
        assert_eq!(r.output.len(), 2);
        assert!(matches!(bin_inputs(&sys, &[], 2, 0), Err(StagedError::StageOrderViolation { .. })));
    }
}
