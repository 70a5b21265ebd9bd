//! The system document: a versioned TOML file holding a two-handed bin or a
//! staged system, and optionally a target assembly or shape.
//!
//! ```toml
//! tas = 1
//! model = "twohanded"
//! temperature = 2
//!
//! [[glues]]
//! name = "a"
//! strength = 2
//!
//! [[tiles]]
//! name = "left"
//! glues = ["null", "a", "null", "null"]   # N, E, S, W
//!
//! [[tiles]]
//! name = "right"
//! glues = ["null", "null", "null", "a"]
//!
//! initials = [[[0, 0, 0]], [[0, 0, 1]]]   # assemblies as [x, y, tile id] lists
//! ```
//!
//! A staged document replaces `initials` with `stages` (bins per stage),
//! `stage1` (tile names per stage-1 bin) and `edges`
//! (`[from stage, from bin, to stage, to bin]`).

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use tas_core::reductions::Target;
use tas_core::{canonicalize, Assembly, Bin, Glue, GlueFunction, MixGraph, Pos, Shape, StagedSystem, TileSet};

pub const VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DocError {
    #[error("SyntaxError at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("ValidationError: {0}")]
    Validation(String),
}

fn invalid(msg: impl Into<String>) -> DocError {
    DocError::Validation(msg.into())
}

/// A parsed system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum System {
    TwoHanded(Bin),
    Staged(StagedSystem),
}

impl System {
    pub fn tiles(&self) -> &Arc<TileSet> {
        match self {
            System::TwoHanded(b) => b.tiles(),
            System::Staged(s) => &s.tiles,
        }
    }

    pub fn tau(&self) -> u32 {
        match self {
            System::TwoHanded(b) => b.tau(),
            System::Staged(s) => s.tau,
        }
    }
}

/// A whole document: a system and an optional target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub system: System,
    pub target: Option<Target>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDoc {
    tas: u32,
    model: String,
    temperature: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    glues: Vec<RawGlue>,
    #[serde(default)]
    tiles: Vec<RawTile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initials: Option<Vec<Vec<Vec<i64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stages: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stage1: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<[usize; 4]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target: Option<RawTarget>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGlue {
    name: String,
    strength: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTile {
    name: String,
    glues: [String; 4],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTarget {
    kind: String,
    cells: Vec<Vec<i64>>,
}

/// A document holding only a target.
#[derive(Deserialize)]
struct RawTargetDoc {
    tas: u32,
    target: Option<RawTarget>,
}

fn syntax(text: &str, e: toml::de::Error) -> DocError {
    let (line, column) = match e.span() {
        Some(span) => line_col(text, span.start),
        None => (1, 1),
    };
    DocError::Syntax { line, column, message: e.message().trim().to_string() }
}

/// One-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, column)
}

fn check_version(v: u32) -> Result<(), DocError> {
    if v != VERSION {
        return Err(invalid(format!("UnsupportedVersion: document version {v}, expected {VERSION}")));
    }
    Ok(())
}

fn to_i32(v: i64, what: &str) -> Result<i32, DocError> {
    i32::try_from(v).map_err(|_| invalid(format!("CoordinateRange: {what} coordinate {v} out of range")))
}

fn parse_assembly(cells: &[Vec<i64>], tiles: Option<usize>, what: &str) -> Result<Assembly, DocError> {
    let mut placed = Vec::with_capacity(cells.len());
    for c in cells {
        let [x, y, t] = c[..] else {
            return Err(invalid(format!("MalformedCell: {what} cells are [x, y, tile id] triples")));
        };
        let t = u32::try_from(t).map_err(|_| invalid(format!("UnknownTile: {what} uses tile id {t}")))?;
        if tiles.is_some_and(|n| t as usize >= n) {
            return Err(invalid(format!("UnknownTile: {what} uses tile id {t}, which is not declared")));
        }
        placed.push((Pos::new(to_i32(x, what)?, to_i32(y, what)?), t));
    }
    canonicalize(placed).map_err(|e| invalid(format!("{what}: {e}")))
}

fn parse_target(raw: &RawTarget, tiles: Option<usize>) -> Result<Target, DocError> {
    match raw.kind.as_str() {
        "assembly" => Ok(Target::Assembly(parse_assembly(&raw.cells, tiles, "target")?)),
        "shape" => {
            let mut ps = Vec::with_capacity(raw.cells.len());
            for c in &raw.cells {
                let [x, y] = c[..] else {
                    return Err(invalid("MalformedCell: shape cells are [x, y] pairs"));
                };
                ps.push(Pos::new(to_i32(x, "target")?, to_i32(y, "target")?));
            }
            Shape::from_cells(ps).map(Target::Shape).map_err(|e| invalid(format!("target: {e}")))
        }
        k => Err(invalid(format!("UnknownTargetKind: `{k}` is neither assembly nor shape"))),
    }
}

fn parse_tiles(raw: &RawDoc) -> Result<TileSet, DocError> {
    let mut gf = GlueFunction::new();
    for g in &raw.glues {
        if g.name == "null" {
            return Err(invalid("NullGlueStrength: `null` is reserved for the strength-0 glue"));
        }
        if gf.get(&g.name).is_some() {
            return Err(invalid(format!("DuplicateName: glue `{}` is declared twice", g.name)));
        }
        gf.add(&g.name, g.strength);
    }
    let mut ts = TileSet::new(gf);
    for t in &raw.tiles {
        let mut sides = [Glue::NULL; 4];
        for (side, name) in sides.iter_mut().zip(&t.glues) {
            *side = ts.glues.get(name).ok_or_else(|| {
                invalid(format!("UndeclaredGlue: tile `{}` uses glue `{name}`, which is not declared", t.name))
            })?;
        }
        ts.add_tile(&t.name, sides).map_err(|e| invalid(e.to_string()))?;
    }
    Ok(ts)
}

fn build(raw: RawDoc) -> Result<Document, DocError> {
    check_version(raw.tas)?;
    let ts = Arc::new(parse_tiles(&raw)?);
    let n = ts.len();
    let system = match raw.model.as_str() {
        "twohanded" => {
            if raw.stages.is_some() || raw.stage1.is_some() || raw.edges.is_some() {
                return Err(invalid("ModelMismatch: twohanded documents take `initials`, not a mix graph"));
            }
            let initials = match &raw.initials {
                Some(list) => list
                    .iter()
                    .enumerate()
                    .map(|(i, cells)| parse_assembly(cells, Some(n), &format!("initial {i}")))
                    .collect::<Result<Vec<_>, _>>()?,
                None => (0..n as u32).map(Assembly::single).collect(),
            };
            System::TwoHanded(Bin::new(initials, ts, raw.temperature).map_err(|e| invalid(e.to_string()))?)
        }
        "staged" => {
            if raw.initials.is_some() {
                return Err(invalid("ModelMismatch: staged documents take a mix graph, not `initials`"));
            }
            let bins = raw.stages.clone().ok_or_else(|| invalid("MissingField: staged documents need `stages`"))?;
            if bins.is_empty() {
                return Err(invalid("InvalidMixGraph: at least one stage is required"));
            }
            let mut mix = MixGraph::new(bins);
            for &[s1, b1, s2, b2] in raw.edges.iter().flatten() {
                mix.add_edge((s1, b1), (s2, b2));
            }
            let by_name: BTreeMap<&str, u32> =
                ts.tiles().iter().enumerate().map(|(i, t)| (t.name.as_str(), i as u32)).collect();
            let mut stage1 = Vec::new();
            for (b, names) in raw.stage1.iter().flatten().enumerate() {
                let mut set = Vec::with_capacity(names.len());
                for name in names {
                    let id = by_name.get(name.as_str()).ok_or_else(|| {
                        invalid(format!("UnknownTile: stage-1 bin {b} lists `{name}`, which is not declared"))
                    })?;
                    set.push(*id);
                }
                stage1.push(set);
            }
            System::Staged(
                StagedSystem::new(mix, stage1, ts, raw.temperature).map_err(|e| invalid(e.to_string()))?,
            )
        }
        m => return Err(invalid(format!("UnknownModel: `{m}` is neither twohanded nor staged"))),
    };
    let target = raw.target.as_ref().map(|t| parse_target(t, Some(n))).transpose()?;
    if let Some(Target::Assembly(a)) = &target {
        let stable = tas_core::is_tau_stable(a, system.tiles(), system.tau()).unwrap_or(false);
        if !stable {
            return Err(invalid("UnstableTarget: the target assembly is not tau-stable"));
        }
    }
    Ok(Document { system, target })
}

/// Parses and validates a system document.
pub fn parse_document(text: &str) -> Result<Document, DocError> {
    let raw: RawDoc = toml::from_str(text).map_err(|e| syntax(text, e))?;
    build(raw)
}

pub fn parse_system(text: &str) -> Result<System, DocError> {
    parse_document(text).map(|d| d.system)
}

/// Reads the target of a document. Target-only documents (`tas` plus a
/// `[target]` table) are accepted; tile ids are checked later against the
/// system.
pub fn parse_target_document(text: &str) -> Result<Target, DocError> {
    let raw: RawTargetDoc = toml::from_str(text).map_err(|e| syntax(text, e))?;
    check_version(raw.tas)?;
    let t = raw.target.ok_or_else(|| invalid("MissingField: the document has no `[target]` table"))?;
    parse_target(&t, None)
}

fn cells_of(a: &Assembly) -> Vec<Vec<i64>> {
    a.cells().iter().map(|&(p, t)| vec![p.x as i64, p.y as i64, t as i64]).collect()
}

fn raw_target(t: &Target) -> RawTarget {
    match t {
        Target::Assembly(a) => RawTarget { kind: "assembly".into(), cells: cells_of(a) },
        Target::Shape(s) => RawTarget {
            kind: "shape".into(),
            cells: s.cells().iter().map(|p| vec![p.x as i64, p.y as i64]).collect(),
        },
    }
}

pub fn serialize_document(doc: &Document) -> String {
    let ts = doc.system.tiles();
    let gf = &ts.glues;
    let glues = gf.glues().map(|(_, name, strength)| RawGlue { name: name.to_string(), strength }).collect();
    let tiles = ts
        .tiles()
        .iter()
        .map(|t| RawTile { name: t.name.clone(), glues: t.glues.map(|g| gf.name(g).to_string()) })
        .collect();
    let mut raw = RawDoc {
        tas: VERSION,
        model: String::new(),
        temperature: doc.system.tau(),
        glues,
        tiles,
        initials: None,
        stages: None,
        stage1: None,
        edges: None,
        target: doc.target.as_ref().map(raw_target),
    };
    match &doc.system {
        System::TwoHanded(b) => {
            raw.model = "twohanded".into();
            raw.initials = Some(b.initials().iter().map(cells_of).collect());
        }
        System::Staged(s) => {
            raw.model = "staged".into();
            raw.stages = Some(s.mix.bins.clone());
            raw.stage1 =
                Some(s.stage1.iter().map(|set| set.iter().map(|&t| ts.tile(t).name.clone()).collect()).collect());
            raw.edges = Some(s.mix.edges.iter().map(|&((s1, b1), (s2, b2))| [s1, b1, s2, b2]).collect());
        }
    }
    toml::to_string(&raw).expect("documents serialize")
}

pub fn serialize_system(sys: &System) -> String {
    serialize_document(&Document { system: sys.clone(), target: None })
}

/// A target-only document.
pub fn serialize_target(t: &Target) -> String {
    #[derive(Serialize)]
    struct Out {
        tas: u32,
        target: RawTarget,
    }
    toml::to_string(&Out { tas: VERSION, target: raw_target(t) }).expect("targets serialize")
}
