//! Experiment configuration: a flat `key=value` file overlaid by command-line
//! flags.

use anyhow::{anyhow, bail, Context, Result};
use apdb::{CostScheme, Orientation, Puzzle, Reference, StartMode, TilePartition};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Raw settings keyed by long flag name (`node-budget`, `partition`, ...).
pub type Settings = BTreeMap<String, String>;

pub fn parse_settings(text: &str) -> Result<Settings> {
    let mut out = Settings::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected key=value", i + 1))?;
        out.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(out)
}

pub fn load_settings(path: &Path) -> Result<Settings> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_settings(&text)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeuristicKind {
    Max,
    Add,
    AddInfeasible,
}

impl HeuristicKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "h_max" | "max" | "hmax" => Ok(HeuristicKind::Max),
            "h_add" | "add" | "hadd" => Ok(HeuristicKind::Add),
            "h_add+infeasible" | "add+infeasible" | "infeasible" => {
                Ok(HeuristicKind::AddInfeasible)
            }
            other => bail!("unknown heuristic `{other}` (h_max, h_add, h_add+infeasible)"),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            HeuristicKind::Max => "h_max",
            HeuristicKind::Add => "h_add",
            HeuristicKind::AddInfeasible => "h_add+infeasible",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Fully resolved experiment setup.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub puzzle: Puzzle,
    pub partition: TilePartition,
    pub scheme: CostScheme,
    pub untracked_blank: bool,
    pub heuristics: Vec<HeuristicKind>,
    pub start: StartMode,
    pub instances: usize,
    pub seed: u64,
    pub node_budget: u64,
    pub jobs: usize,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub pdb_dir: Option<PathBuf>,
    pub shared: bool,
    pub store_residual: bool,
    pub move_pruning: bool,
    pub samples: usize,
}

fn get<'a>(s: &'a Settings, key: &str) -> Option<&'a str> {
    s.get(key).map(|v| v.as_str())
}

fn num<T: std::str::FromStr>(s: &Settings, key: &str, default: T) -> Result<T> {
    match get(s, key) {
        None => Ok(default),
        Some(v) => v
            .parse()
            .map_err(|_| anyhow!("`{key}`: `{v}` is not a number")),
    }
}

fn flag(s: &Settings, key: &str, default: bool) -> Result<bool> {
    match get(s, key) {
        None => Ok(default),
        Some("true" | "1" | "yes" | "") => Ok(true),
        Some("false" | "0" | "no") => Ok(false),
        Some(v) => bail!("`{key}`: `{v}` is not a boolean"),
    }
}

pub fn parse_puzzle(s: &Settings) -> Result<Puzzle> {
    let domain = get(s, "domain").ok_or_else(|| anyhow!("missing `domain`"))?;
    let p = match domain {
        "pancake" => Puzzle::pancake(num(s, "n", 0)?)?,
        "topspin" => Puzzle::topspin(num(s, "n", 0)?, num(s, "k", 4)?)?,
        "sliding" | "sliding-tile" | "tile" => {
            let w = num(s, "width", 3)?;
            Puzzle::sliding_tile(w, num(s, "height", w)?)?
        }
        other => bail!("unknown domain `{other}` (pancake, topspin, sliding)"),
    };
    Ok(p)
}

pub fn parse_scheme(s: &Settings, puzzle: Puzzle) -> Result<CostScheme> {
    let name = get(s, "scheme").unwrap_or("cost-split");
    Ok(match name {
        "full" | "fullcost" | "full-cost" => CostScheme::FullCost,
        "cost-split" | "costsplit" | "split" => CostScheme::CostSplit,
        "zero-one" | "zeroone" | "01" => CostScheme::ZeroOne,
        "location-based" | "location" => {
            let orientation = match get(s, "orientation").unwrap_or("into") {
                "into" => Orientation::Into,
                "out-of" | "outof" => Orientation::OutOf,
                other => bail!("unknown orientation `{other}` (into, out-of)"),
            };
            let reference = match get(s, "ref") {
                None => match CostScheme::location_based_for(puzzle) {
                    CostScheme::LocationBased { reference, .. } => reference,
                    _ => unreachable!(),
                },
                Some("start") => Reference::OperatorStart,
                Some(list) => Reference::Locations(
                    list.split(',')
                        .map(|x| {
                            x.trim()
                                .parse::<u8>()
                                .map_err(|_| anyhow!("bad reference `{x}`"))
                        })
                        .collect::<Result<_>>()?,
                ),
            };
            CostScheme::LocationBased {
                reference,
                orientation,
            }
        }
        other => {
            bail!("unknown scheme `{other}` (full-cost, cost-split, location-based, zero-one)")
        }
    })
}

pub fn parse_start(s: &Settings) -> Result<StartMode> {
    match get(s, "start").unwrap_or("walk:150") {
        "permutation" | "random" => Ok(StartMode::Permutation),
        w => {
            let len = w
                .strip_prefix("walk:")
                .and_then(|x| x.parse().ok())
                .ok_or_else(|| {
                    anyhow!("`start`: expected walk:<moves> or permutation, got `{w}`")
                })?;
            Ok(StartMode::Walk(len))
        }
    }
}

impl ExperimentConfig {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let puzzle = parse_puzzle(s)?;
        let partition = TilePartition::parse(
            get(s, "partition").ok_or_else(|| anyhow!("missing `partition`"))?,
        )?;
        let scheme = parse_scheme(s, puzzle)?;
        let heuristics = get(s, "heuristics")
            .unwrap_or("h_max,h_add")
            .split(',')
            .map(HeuristicKind::parse)
            .collect::<Result<Vec<_>>>()?;
        let format = match get(s, "format").unwrap_or("csv") {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => bail!("unknown format `{other}` (csv, json)"),
        };
        let untracked_blank = match get(s, "blank").unwrap_or("tracked") {
            "tracked" => false,
            "untracked" => true,
            other => bail!("unknown blank mode `{other}` (tracked, untracked)"),
        };
        Ok(ExperimentConfig {
            puzzle,
            partition,
            scheme,
            untracked_blank,
            heuristics,
            start: parse_start(s)?,
            instances: num(s, "instances", 100)?,
            seed: num(s, "seed", 1)?,
            node_budget: num(s, "node-budget", u64::MAX)?,
            jobs: num(s, "jobs", 0)?,
            format,
            output: get(s, "output").map(PathBuf::from),
            pdb_dir: get(s, "pdb-dir").map(PathBuf::from),
            shared: flag(s, "shared", false)?,
            store_residual: flag(s, "store-residual", true)?,
            move_pruning: flag(s, "move-pruning", false)?,
            samples: num(s, "samples", 10_000)?,
        })
    }

    /// Every setting after defaults, as `(key, value)` in a fixed order.
    pub fn resolved(&self) -> Vec<(&'static str, String)> {
        let mut v = vec![("domain", self.puzzle.label())];
        v.push(("partition", self.partition.notation()));
        v.push(("scheme", self.scheme.label().to_string()));
        if let CostScheme::LocationBased {
            reference,
            orientation,
        } = &self.scheme
        {
            let r = match reference {
                Reference::OperatorStart => "start".to_string(),
                Reference::Locations(l) => l
                    .iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
            };
            v.push(("ref", r));
            let o = match orientation {
                Orientation::Into => "into",
                Orientation::OutOf => "out-of",
            };
            v.push(("orientation", o.to_string()));
        }
        let blank = if self.untracked_blank {
            "untracked"
        } else {
            "tracked"
        };
        v.push(("blank", blank.to_string()));
        let hs: Vec<&str> = self.heuristics.iter().map(|h| h.label()).collect();
        v.push(("heuristics", hs.join(",")));
        let start = match self.start {
            StartMode::Walk(l) => format!("walk:{l}"),
            StartMode::Permutation => "permutation".to_string(),
        };
        v.push(("start", start));
        v.push(("instances", self.instances.to_string()));
        v.push(("samples", self.samples.to_string()));
        v.push(("seed", self.seed.to_string()));
        v.push(("node-budget", self.node_budget.to_string()));
        v.push(("jobs", self.jobs.to_string()));
        v.push(("shared", self.shared.to_string()));
        v.push(("store-residual", self.store_residual.to_string()));
        v.push(("move-pruning", self.move_pruning.to_string()));
        v
    }

    /// `# key=value` lines describing the run, starting with the version.
    pub fn header(&self) -> String {
        let mut out = format!("# apdb {}\n", env!("CARGO_PKG_VERSION"));
        for (k, v) in self.resolved() {
            out.push_str(&format!("# {k}={v}\n"));
        }
        out
    }
}
