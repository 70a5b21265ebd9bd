//! Command dispatch. `run` never exits the process; `main` does that.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use tas_core::reductions::{
    aesat_to_2ham_usv, aesat_to_staged_uav, sat_to_staged_uav, Formula, ReducedSystem, ReductionError,
    ReductionOutput, Target,
};
use tas_core::staged::run_staged;
use tas_core::twohanded::{is_producible, producibles};
use tas_core::verifiers::{
    pibv, staged_uav_window, staged_usv_window, tibv, uav_2ham_window, uibv, usv_2ham_window, Finding, Verdict,
};
use tas_core::{shape_of, Answer, Assembly, BinError, Shape, StagedError, TileSet, VerifyError};

use crate::dimacs::{parse_formula, FormulaError};
use crate::doc::{parse_document, parse_target_document, serialize_document, DocError, Document, System};
use crate::render;
use crate::report::{assembly_lines, Report};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_UNDECIDED: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

/// Default size bound for `simulate` and `producible` when no target fixes one.
pub const DEFAULT_BOUND: usize = 32;

#[derive(Parser, Debug)]
#[command(name = "tas", version, about = "Simulate and verify two-handed and staged tile systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads for the closure computations.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutFormat>,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Leave the timing line out of reports.
    #[arg(long, global = true)]
    pub no_timing: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a bin or staged system and list its terminal assemblies.
    Simulate {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        bound: Option<usize>,
    },
    /// Decide producibility of a target, or list producibles up to the bound.
    Producible {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long)]
        bound: Option<usize>,
        #[arg(long)]
        stage: Option<usize>,
        #[arg(long)]
        bin: Option<usize>,
    },
    /// Run one of the deciders.
    Verify {
        #[arg(value_enum)]
        kind: VerifyKind,
        #[arg(long)]
        system: PathBuf,
        /// Target document; defaults to the target embedded in the system document.
        #[arg(long)]
        target: Option<PathBuf>,
        /// Window for uav/usv (default twice the target size); size bound n for pibv/uibv/tibv.
        #[arg(long)]
        bound: Option<usize>,
        #[arg(long)]
        stage: Option<usize>,
        #[arg(long)]
        bin: Option<usize>,
    },
    /// Compile a DIMACS formula into a system document with its target.
    Reduce {
        #[arg(value_enum)]
        kind: ReduceKind,
        formula: PathBuf,
        /// Number of leading universal variables, overriding the file's `a` line.
        #[arg(long)]
        forall: Option<usize>,
    },
    /// Draw the target of a document.
    Render { file: PathBuf },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyKind {
    Uav,
    Usv,
    Pibv,
    Uibv,
    Tibv,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReduceKind {
    SatStaged,
    #[value(name = "aesat-2ham")]
    Aesat2ham,
    AesatStaged,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutFormat {
    Ascii,
    Svg,
    Report,
}

#[derive(Debug, Error)]
pub enum AppError {
    #[error("UsageError: {0}")]
    Usage(String),
    #[error("IoError: {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Document(#[from] DocError),
    #[error("{0}")]
    Formula(#[from] FormulaError),
    #[error("{0}")]
    Verify(#[from] VerifyError),
    #[error("{0}")]
    Reduction(#[from] ReductionError),
    #[error("{0}")]
    Staged(#[from] StagedError),
    #[error("{0}")]
    Bin(#[from] BinError),
}

fn usage(msg: impl Into<String>) -> AppError {
    AppError::Usage(msg.into())
}

/// What a command produced.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn read(path: &Path) -> Result<String, AppError> {
    fs::read_to_string(path).map_err(|e| AppError::Io { path: path.display().to_string(), message: e.to_string() })
}

/// Parses the command line and runs it.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    run_cli(&cli)
}

pub fn run_cli(cli: &Cli) -> Outcome {
    let result = match cli.workers {
        Some(0) => Err(usage("--workers must be positive")),
        Some(w) => match rayon::ThreadPoolBuilder::new().num_threads(w).build() {
            Ok(pool) => pool.install(|| dispatch(cli)),
            Err(e) => Err(usage(format!("cannot start {w} workers: {e}"))),
        },
        None => dispatch(cli),
    };
    let (code, text) = match result {
        Ok(r) => r,
        Err(e) => return Outcome { code: EXIT_USAGE, stdout: String::new(), stderr: format!("error: {e}\n") },
    };
    match &cli.out {
        Some(path) => match fs::write(path, &text) {
            Ok(()) => Outcome { code, stdout: String::new(), stderr: String::new() },
            Err(e) => Outcome {
                code: EXIT_USAGE,
                stdout: String::new(),
                stderr: format!("error: IoError: {}: {e}\n", path.display()),
            },
        },
        None => Outcome { code, stdout: text, stderr: String::new() },
    }
}

fn dispatch(cli: &Cli) -> Result<(i32, String), AppError> {
    let start = Instant::now();
    let (code, mut report, drawing) = match &cli.command {
        Command::Simulate { system, bound } => simulate(system, *bound)?,
        Command::Producible { system, target, bound, stage, bin } => {
            producible(system, target.as_deref(), *bound, *stage, *bin)?
        }
        Command::Verify { kind, system, target, bound, stage, bin } => {
            verify(*kind, system, target.as_deref(), *bound, *stage, *bin)?
        }
        Command::Reduce { kind, formula, forall } => return reduce(cli, *kind, formula, *forall),
        Command::Render { file } => return render_file(cli, file),
    };
    report.elapsed = Some(start.elapsed());
    let timing = !cli.no_timing;
    let text = match (cli.format.unwrap_or(OutFormat::Report), drawing) {
        (OutFormat::Report, _) | (_, None) => report.render(timing),
        (OutFormat::Ascii, Some((a, ts))) => format!("{}\n{}", report.render(timing), render::ascii(&a, &ts)),
        (OutFormat::Svg, Some((a, ts))) => render::svg(&a, &ts),
    };
    Ok((code, text))
}

type Drawing = Option<(Assembly, TileSet)>;

fn exit_for(a: Answer) -> i32 {
    match a {
        Answer::Yes => EXIT_YES,
        Answer::No => EXIT_NO,
        Answer::Undecided => EXIT_UNDECIDED,
    }
}

fn load(path: &Path) -> Result<Document, AppError> {
    Ok(parse_document(&read(path)?)?)
}

fn load_target(doc: &Document, path: Option<&Path>) -> Result<Option<Target>, AppError> {
    let t = match path {
        Some(p) => Some(parse_target_document(&read(p)?)?),
        None => doc.target.clone(),
    };
    if let Some(Target::Assembly(a)) = &t {
        let n = doc.system.tiles().len();
        if let Some(id) = a.tile_ids().find(|&id| id as usize >= n) {
            return Err(DocError::Validation(format!("UnknownTile: target uses tile id {id}, which is not declared")).into());
        }
    }
    Ok(t)
}

fn target_size(t: &Option<Target>) -> Option<usize> {
    t.as_ref().map(|t| match t {
        Target::Assembly(a) => a.size(),
        Target::Shape(s) => s.size(),
    })
}

fn model_name(s: &System) -> &'static str {
    match s {
        System::TwoHanded(_) => "twohanded",
        System::Staged(_) => "staged",
    }
}

fn simulate(path: &Path, bound: Option<usize>) -> Result<(i32, Report, Drawing), AppError> {
    let doc = load(path)?;
    let bound = bound.or(target_size(&doc.target).map(|n| 2 * n)).unwrap_or(DEFAULT_BOUND);
    let ts = doc.system.tiles().clone();
    let mut r = Report::new("simulate");
    r.field("model", model_name(&doc.system)).field("bound", bound);
    let (terminals, overflow) = match &doc.system {
        System::TwoHanded(b) => {
            let res = producibles(b, bound)?;
            r.field("producibles", res.producibles.len());
            (res.terminals, res.overflow)
        }
        System::Staged(s) => {
            let run = run_staged(s, bound)?;
            let mut lines = Vec::new();
            for (i, stage) in run.bins.iter().enumerate() {
                for (b, res) in stage.iter().enumerate() {
                    lines.push(format!(
                        "{} {}: {} producibles, {} terminals{}",
                        i + 1,
                        b,
                        res.producibles.len(),
                        res.terminals.len(),
                        if res.overflow { ", overflow" } else { "" }
                    ));
                }
            }
            r.block("bins", lines);
            (run.output, run.overflow)
        }
    };
    r.field("overflow", overflow).field("terminals", terminals.len());
    for (i, t) in terminals.iter().enumerate() {
        r.assembly(&format!("terminal {} (size {})", i + 1, t.size()), t, &ts);
    }
    let drawing = terminals.first().map(|t| (t.clone(), (*ts).clone()));
    Ok((if overflow { EXIT_UNDECIDED } else { EXIT_YES }, r, drawing))
}

fn pick_bin(s: &tas_core::StagedSystem, stage: Option<usize>, bin: Option<usize>) -> Result<(usize, usize), AppError> {
    let stage = stage.unwrap_or(s.mix.stages());
    let bin = match bin {
        Some(b) => b,
        None if stage >= 1 && stage <= s.mix.stages() && s.mix.bins[stage - 1] == 1 => 0,
        None => return Err(usage(format!("stage {stage} has several bins; pass --bin"))),
    };
    Ok((stage, bin))
}

fn producible(
    path: &Path,
    target: Option<&Path>,
    bound: Option<usize>,
    stage: Option<usize>,
    bin: Option<usize>,
) -> Result<(i32, Report, Drawing), AppError> {
    let doc = load(path)?;
    let ts = doc.system.tiles().clone();
    let target = match load_target(&doc, target)? {
        Some(Target::Assembly(a)) => Some(a),
        Some(Target::Shape(_)) => return Err(usage("producible needs an assembly target, not a shape")),
        None => None,
    };
    let mut r = Report::new("producible");
    r.field("model", model_name(&doc.system));
    if let Some(a) = target {
        let (answer, bound) = match &doc.system {
            System::TwoHanded(b) => {
                if stage.is_some() || bin.is_some() {
                    return Err(usage("--stage and --bin apply to staged systems"));
                }
                (Answer::from_bool(is_producible(b, &a)), a.size())
            }
            System::Staged(s) => {
                let (st, b) = pick_bin(s, stage, bin)?;
                let n = bound.unwrap_or(a.size());
                let v = pibv(s, st, b, &a, n)?;
                r.field("bin", format!("{st} {b}")).field("finding", v.finding);
                if let Some(w) = &v.witness {
                    r.assembly("witness", w, &ts);
                }
                (v.answer, n)
            }
        };
        r.field("verdict", answer).field("bound", bound);
        r.assembly("target", &a, &ts);
        return Ok((exit_for(answer), r, Some((a, (*ts).clone()))));
    }
    let bound = bound.unwrap_or(DEFAULT_BOUND);
    let res = match &doc.system {
        System::TwoHanded(b) => producibles(b, bound)?,
        System::Staged(s) => {
            let (st, b) = pick_bin(s, stage, bin)?;
            r.field("bin", format!("{st} {b}"));
            let run = run_staged(s, bound)?;
            if st == 0 || st > s.mix.stages() || b >= s.mix.bins[st - 1] {
                return Err(StagedError::NoSuchBin { stage: st, bin: b }.into());
            }
            run.bin((st, b)).clone()
        }
    };
    r.field("bound", bound).field("overflow", res.overflow).field("producibles", res.producibles.len());
    for (i, p) in res.producibles.iter().enumerate() {
        r.assembly(&format!("producible {} (size {})", i + 1, p.size()), p, &ts);
    }
    let drawing = res.producibles.last().map(|p| (p.clone(), (*ts).clone()));
    Ok((if res.overflow { EXIT_UNDECIDED } else { EXIT_YES }, r, drawing))
}

fn verify(
    kind: VerifyKind,
    path: &Path,
    target: Option<&Path>,
    bound: Option<usize>,
    stage: Option<usize>,
    bin: Option<usize>,
) -> Result<(i32, Report, Drawing), AppError> {
    let doc = load(path)?;
    let ts = doc.system.tiles().clone();
    let target = load_target(&doc, target)?;
    let name = format!("verify {}", kind.to_possible_value().expect("named").get_name());
    let mut r = Report::new(&name);
    r.field("model", model_name(&doc.system));
    let need_assembly = |t: &Option<Target>| match t {
        Some(Target::Assembly(a)) => Ok(a.clone()),
        Some(Target::Shape(_)) => Err(usage(format!("{name} needs an assembly target, not a shape"))),
        None => Err(usage(format!("{name} needs a target: pass --target or embed one"))),
    };
    let staged = |what: &str| match &doc.system {
        System::Staged(s) => Ok(s),
        System::TwoHanded(_) => Err(usage(format!("{what} applies to staged systems"))),
    };
    let v: Verdict = match kind {
        VerifyKind::Uav => {
            let a = need_assembly(&target)?;
            let window = bound.unwrap_or(2 * a.size());
            match &doc.system {
                System::TwoHanded(b) => uav_2ham_window(b, &a, window)?,
                System::Staged(s) => staged_uav_window(s, &a, window)?,
            }
        }
        VerifyKind::Usv => {
            let shape: Shape = match &target {
                Some(Target::Assembly(a)) => shape_of(a),
                Some(Target::Shape(s)) => s.clone(),
                None => return Err(usage(format!("{name} needs a target: pass --target or embed one"))),
            };
            let window = bound.unwrap_or(2 * shape.size());
            match &doc.system {
                System::TwoHanded(b) => usv_2ham_window(b, &shape, window)?,
                System::Staged(s) => staged_usv_window(s, &shape, window)?,
            }
        }
        VerifyKind::Pibv | VerifyKind::Tibv => {
            let s = staged("pibv and tibv")?;
            let a = need_assembly(&target)?;
            let (st, b) = pick_bin(s, stage, bin)?;
            r.field("bin", format!("{st} {b}"));
            let n = bound.unwrap_or(a.size());
            if kind == VerifyKind::Pibv {
                pibv(s, st, b, &a, n)?
            } else {
                tibv(s, st, b, &a, n)?
            }
        }
        VerifyKind::Uibv => {
            let s = staged("uibv")?;
            let (st, b) = pick_bin(s, stage, bin)?;
            r.field("bin", format!("{st} {b}"));
            let n = bound
                .or(target_size(&target))
                .ok_or_else(|| usage("uibv needs --bound or a target to size the bound"))?;
            uibv(s, st, b, n)?
        }
    };
    let overflow = matches!(v.finding, Finding::Oversize | Finding::BeyondWindow);
    r.field("verdict", v.answer)
        .field("finding", v.finding)
        .field("bound", v.bound)
        .field("overflow", overflow);
    match &v.witness {
        Some(w) => {
            r.field("witness size", w.size());
            r.block("witness", assembly_lines(w, &ts));
        }
        None => {
            r.field("witness", "none");
        }
    }
    let drawing = v.witness.clone().map(|w| (w, (*ts).clone()));
    Ok((exit_for(v.answer), r, drawing))
}

fn reduce(cli: &Cli, kind: ReduceKind, path: &Path, forall: Option<usize>) -> Result<(i32, String), AppError> {
    let start = Instant::now();
    let mut f: Formula = parse_formula(&read(path)?)?;
    if let Some(k) = forall {
        f = Formula::new(f.num_vars, f.clauses.clone(), k)?;
    }
    let out: ReductionOutput = match kind {
        ReduceKind::SatStaged => sat_to_staged_uav(&f)?,
        ReduceKind::Aesat2ham => aesat_to_2ham_usv(&f)?,
        ReduceKind::AesatStaged => aesat_to_staged_uav(&f)?,
    };
    let system = match &out.system {
        ReducedSystem::TwoHanded(b) => System::TwoHanded(b.clone()),
        ReducedSystem::Staged(s) => System::Staged(s.clone()),
    };
    let doc = Document { system, target: Some(out.target.clone()) };
    match cli.format {
        Some(OutFormat::Report) => {
            let mut r = Report::new(&format!("reduce {}", kind.to_possible_value().expect("named").get_name()));
            r.field("formula", &f).field("tiles", out.tiles().len());
            if let Some(s) = out.staged() {
                r.field("stages", s.mix.stages()).field("bins", format!("{:?}", s.mix.bins));
            }
            r.field("target size", target_size(&doc.target).unwrap_or(0));
            r.block("stage roles", out.meta.stage_roles.clone());
            r.block("bin roles", out.meta.bin_roles.iter().map(|((s, b), role)| format!("{s} {b}: {role}")).collect());
            r.elapsed = Some(start.elapsed());
            Ok((EXIT_YES, r.render(!cli.no_timing)))
        }
        Some(OutFormat::Ascii) | Some(OutFormat::Svg) => render_doc(cli, &doc),
        None => Ok((EXIT_YES, serialize_document(&doc))),
    }
}

fn render_doc(cli: &Cli, doc: &Document) -> Result<(i32, String), AppError> {
    let ts = doc.system.tiles();
    let svg = cli.format == Some(OutFormat::Svg);
    let text = match &doc.target {
        Some(Target::Assembly(a)) if svg => render::svg(a, ts),
        Some(Target::Assembly(a)) => render::ascii(a, ts),
        Some(Target::Shape(s)) if svg => render::svg_shape(s),
        Some(Target::Shape(s)) => render::ascii_shape(s),
        None => return Err(usage("the document has no target to draw")),
    };
    Ok((EXIT_YES, text))
}

fn render_file(cli: &Cli, path: &Path) -> Result<(i32, String), AppError> {
    let text = read(path)?;
    let doc = match parse_document(&text) {
        Ok(d) => d,
        Err(e @ DocError::Validation(_)) => return Err(e.into()),
        Err(_) => {
            // Target-only documents carry no tile set; draw the bare shape.
            let t = parse_target_document(&text)?;
            let shape = match &t {
                Target::Assembly(a) => shape_of(a),
                Target::Shape(s) => s.clone(),
            };
            let out = if cli.format == Some(OutFormat::Svg) {
                render::svg_shape(&shape)
            } else {
                render::ascii_shape(&shape)
            };
            return Ok((EXIT_YES, out));
        }
    };
    render_doc(cli, &doc)
}
