//! Command-line front end for the `apdb` library: table building, single
//! solves with per-state explanations, batch benchmarks, lemma checks and
//! the add-better measurement.

pub mod config;
pub mod tables;

use anyhow::{bail, Context, Result};
use apdb::heuristics::{addbetter_fraction_sampled, Combine, PdbHeuristic};
use apdb::search::{batch_solve, ida_star, Aggregate, SearchOptions};
use apdb::verify::{verify_conditions, Check, LemmaReport, Mode, Suite};
use apdb::{CostScheme, Error, ExplicitGraph};
use clap::{Args, Parser, Subcommand};
use config::{ExperimentConfig, Format, HeuristicKind, Settings};
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "apdb", version, about = "Additive two-cost pattern databases")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build (or load from --pdb-dir) the tables for a partition.
    BuildPdb(Common),
    /// Solve one instance with IDA*.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Start state, comma separated (`_` or the blank's id for the blank).
        #[arg(long)]
        state: String,
        /// h_max, h_add or h_add+infeasible.
        #[arg(long, default_value = "h_add")]
        heuristic: String,
        /// Print one JSON line per state on the solution path.
        #[arg(long)]
        explain: bool,
    },
    /// Solve a batch of seeded instances with each heuristic.
    Bench(Common),
    /// Check the admissibility lemmas on a puzzle, or P1-P3 on a graph file.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Checks to run: `all` or a list such as `1,4,P2`.
        #[arg(long, default_value = "all")]
        lemma: String,
        /// `exhaustive` or `sampled`.
        #[arg(long, default_value = "exhaustive")]
        mode: String,
        /// State limit for exhaustive enumeration and the search oracle.
        #[arg(long, default_value_t = 2_000_000)]
        max_states: usize,
        /// Explicit graph file; checks P1, P2 and P3 only.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Fraction of random states where the additive estimate is guaranteed
    /// to be at least the maximum.
    MeasureAddbetter(Common),
}

/// Settings shared by every subcommand. Each flag overrides the same key
/// in `--config`.
#[derive(Args, Debug, Default)]
pub struct Common {
    /// Flat `key=value` file; keys are the long flag names.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// pancake, topspin or sliding.
    #[arg(long)]
    pub domain: Option<String>,
    #[arg(long)]
    pub n: Option<String>,
    /// TopSpin turnstile width.
    #[arg(long)]
    pub k: Option<String>,
    #[arg(long)]
    pub width: Option<String>,
    #[arg(long)]
    pub height: Option<String>,
    /// `3-3-4` or explicit groups `0,2,4/1,3,5`.
    #[arg(long)]
    pub partition: Option<String>,
    /// full-cost, cost-split, location-based or zero-one.
    #[arg(long)]
    pub scheme: Option<String>,
    /// Location-based reference: comma separated locations, or `start`.
    #[arg(long = "ref")]
    pub reference: Option<String>,
    /// into or out-of.
    #[arg(long)]
    pub orientation: Option<String>,
    /// tracked or untracked (sliding tile zero-one only).
    #[arg(long)]
    pub blank: Option<String>,
    /// Comma separated: h_max, h_add, h_add+infeasible.
    #[arg(long)]
    pub heuristics: Option<String>,
    /// `walk:<moves>` or `permutation`.
    #[arg(long)]
    pub start: Option<String>,
    #[arg(long)]
    pub instances: Option<String>,
    #[arg(long)]
    pub samples: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub jobs: Option<String>,
    #[arg(long)]
    pub node_budget: Option<String>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    pub output: Option<String>,
    /// Directory for cached tables.
    #[arg(long)]
    pub pdb_dir: Option<String>,
    /// One table looked up once per group, with tile renaming.
    #[arg(long)]
    pub shared: bool,
    /// Do not store residual costs.
    #[arg(long)]
    pub no_residual: bool,
    /// Skip redundant orderings of commuting TopSpin moves.
    #[arg(long)]
    pub move_pruning: bool,
}

impl Common {
    pub fn settings(&self) -> Result<Settings> {
        let mut s = match &self.config {
            Some(p) => config::load_settings(p)?,
            None => Settings::new(),
        };
        let flags = [
            ("domain", &self.domain),
            ("n", &self.n),
            ("k", &self.k),
            ("width", &self.width),
            ("height", &self.height),
            ("partition", &self.partition),
            ("scheme", &self.scheme),
            ("ref", &self.reference),
            ("orientation", &self.orientation),
            ("blank", &self.blank),
            ("heuristics", &self.heuristics),
            ("start", &self.start),
            ("instances", &self.instances),
            ("samples", &self.samples),
            ("seed", &self.seed),
            ("jobs", &self.jobs),
            ("node-budget", &self.node_budget),
            ("format", &self.format),
            ("output", &self.output),
            ("pdb-dir", &self.pdb_dir),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                s.insert(k.to_string(), v.clone());
            }
        }
        if self.shared {
            s.insert("shared".into(), "true".into());
        }
        if self.move_pruning {
            s.insert("move-pruning".into(), "true".into());
        }
        if self.no_residual {
            s.insert("store-residual".into(), "false".into());
        }
        Ok(s)
    }

    pub fn resolve(&self) -> Result<ExperimentConfig> {
        ExperimentConfig::from_settings(&self.settings()?)
    }
}

/// Parses `args` (including the program name) and runs the command,
/// writing its report to `out` unless `--output` is set. Returns the exit
/// code.
pub fn run_args<I, T>(args: I, out: &mut dyn Write) -> Result<i32>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run(Cli::try_parse_from(args)?, out)
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let common = match &cli.command {
        Command::BuildPdb(c) | Command::Bench(c) | Command::MeasureAddbetter(c) => c,
        Command::Solve { common, .. } | Command::Verify { common, .. } => common,
    };
    if let Command::Verify {
        graph: Some(path), ..
    } = &cli.command
    {
        return verify_graph(path, out);
    }
    let cfg = common.resolve()?;
    let mut file;
    let out: &mut dyn Write = match &cfg.output {
        Some(p) => {
            file = std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
            &mut file
        }
        None => out,
    };
    if cfg.jobs > 0 {
        // Only the first request in a process takes effect.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build_global();
    }
    match &cli.command {
        Command::BuildPdb(_) => build_pdb(&cfg, out),
        Command::Solve {
            state,
            heuristic,
            explain,
            ..
        } => solve(&cfg, state, HeuristicKind::parse(heuristic)?, *explain, out),
        Command::Bench(_) => bench(&cfg, out),
        Command::Verify {
            lemma,
            mode,
            max_states,
            ..
        } => verify(&cfg, lemma, mode, *max_states, out),
        Command::MeasureAddbetter(_) => measure_addbetter(&cfg, out),
    }
}

fn build_pdb(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<i32> {
    let (_, infos) = tables::heuristic(cfg, &cfg.scheme)?;
    write!(out, "{}", cfg.header())?;
    for i in infos {
        writeln!(
            out,
            "group={} entries={} scale={} max_primary={} {}={:.3}s{}",
            i.group,
            i.entries,
            i.scale,
            i.max_primary,
            if i.loaded { "loaded" } else { "built" },
            i.seconds,
            i.path
                .map(|p| format!(" path={}", p.display()))
                .unwrap_or_default()
        )?;
    }
    Ok(EXIT_OK)
}

/// `num/den` in original cost units.
fn rational(x: u64, scale: u64) -> String {
    let r = num_rational::Ratio::new(x, scale);
    format!("{}/{}", r.numer(), r.denom())
}

fn combine_for(kind: HeuristicKind) -> Combine {
    match kind {
        HeuristicKind::Max => Combine::Max,
        HeuristicKind::Add => Combine::Add,
        HeuristicKind::AddInfeasible => Combine::AddInfeasible,
    }
}

/// Max uses full-cost tables of the same partition; the additive rules use
/// the configured scheme.
fn heuristic_for(cfg: &ExperimentConfig, kind: HeuristicKind) -> Result<PdbHeuristic<u32>> {
    if kind == HeuristicKind::Max {
        return Ok(tables::heuristic(cfg, &CostScheme::FullCost)?.0);
    }
    if !cfg.scheme.is_additive() {
        bail!(
            "{} needs an additive scheme, not {}",
            kind.label(),
            cfg.scheme
        );
    }
    Ok(tables::heuristic(cfg, &cfg.scheme)?.0)
}

fn budget_exit(e: &anyhow::Error) -> Option<i32> {
    matches!(
        e.downcast_ref::<Error>(),
        Some(Error::BudgetExceeded { .. })
    )
    .then_some(EXIT_BUDGET)
}

fn solve(
    cfg: &ExperimentConfig,
    state: &str,
    kind: HeuristicKind,
    explain: bool,
    out: &mut dyn Write,
) -> Result<i32> {
    let start = cfg.puzzle.parse_state(state)?;
    let h = heuristic_for(cfg, kind)?;
    let opts = SearchOptions {
        node_budget: cfg.node_budget,
        move_pruning: cfg.move_pruning,
        ..SearchOptions::default()
    };
    let result = match ida_star(&cfg.puzzle, &h.combine(combine_for(kind))?, &start, opts) {
        Ok(r) => r,
        Err(e) => {
            let e = anyhow::Error::from(e);
            writeln!(out, "error: {e}")?;
            return budget_exit(&e).ok_or(e);
        }
    };
    write!(out, "{}", cfg.header())?;
    writeln!(
        out,
        "heuristic={} cost={} nodes_generated={} nodes_expanded={} iterations={} time_s={:.6}",
        kind.label(),
        result.cost,
        result.nodes_generated,
        result.nodes_expanded,
        result.iterations,
        result.elapsed.as_secs_f64()
    )?;
    if !explain {
        return Ok(EXIT_OK);
    }
    let path = result.path.context("search kept no path")?;
    let additive = if cfg.scheme.is_additive() {
        Some(heuristic_for(cfg, HeuristicKind::Add)?)
    } else {
        None
    };
    let full = heuristic_for(cfg, HeuristicKind::Max)?;
    let mut g = 0;
    let states = std::iter::once((path.start, 0)).chain(path.edges.iter().map(|t| (t.to, t.cost)));
    for (s, step) in states {
        g += step;
        let mut line = json!({
            "state": cfg.puzzle.format_state(&s),
            "g": g,
            "h_max": full.h_max(&s),
        });
        if let Some(h) = &additive {
            let e = h.evaluate(&s);
            line["per_abstraction"] = e
                .per_abstraction
                .iter()
                .map(|x| {
                    json!({
                        "c_star": rational(x.primary, e.scale),
                        "r_star": x.residual.map(|r| rational(r, e.scale)),
                    })
                })
                .collect();
            line["h_add_exact"] = json!(rational(e.h_add_exact, e.scale));
            line["h_add"] = json!(e.h_add);
            line["infeasible"] = json!(e.infeasible);
            line["bumped"] = json!(e.bumped);
        }
        writeln!(out, "{line}")?;
    }
    Ok(EXIT_OK)
}

fn ratio_f(r: num_rational::Ratio<u64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn bench(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<i32> {
    if cfg.heuristics.is_empty() {
        bail!("no heuristics to benchmark");
    }
    let starts = cfg
        .puzzle
        .random_starts(cfg.start, cfg.instances, cfg.seed)?;
    let opts = SearchOptions {
        node_budget: cfg.node_budget,
        move_pruning: cfg.move_pruning,
        keep_path: false,
        ..SearchOptions::default()
    };
    let mut rows: Vec<(HeuristicKind, Aggregate)> = Vec::new();
    for &kind in &cfg.heuristics {
        let h = heuristic_for(cfg, kind)?;
        let report = batch_solve(&cfg.puzzle, &h.combine(combine_for(kind))?, &starts, opts);
        rows.push((kind, report.aggregate));
    }
    let domain = cfg.puzzle.label();
    let abs = format!("{} {}", cfg.partition.notation(), cfg.scheme);
    let baseline = rows[0].1.clone();
    let records: Vec<serde_json::Value> = rows
        .iter()
        .map(|(kind, a)| {
            json!({
                "domain": domain,
                "abs": abs,
                "heuristic": kind.label(),
                "n_instances": starts.len(),
                "solved": a.solved,
                "failed": a.failed,
                "status": if a.failed == 0 { "ok" } else { "budget_exceeded" },
                "mean_solution_length": a.mean_cost().map(ratio_f),
                "mean_nodes": a.mean_nodes().map(ratio_f),
                "mean_time_s": a.mean_time_secs(),
                "nodes_ratio_vs_baseline": a.nodes_ratio(&baseline).map(|r| *r.numer() as f64 / *r.denom() as f64),
            })
        })
        .collect();
    match cfg.format {
        Format::Json => {
            let resolved: serde_json::Map<_, _> = cfg
                .resolved()
                .into_iter()
                .map(|(k, v)| (k.to_string(), json!(v)))
                .collect();
            writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&json!({
                    "version": env!("CARGO_PKG_VERSION"),
                    "config": resolved,
                    "rows": records,
                }))?
            )?;
        }
        Format::Csv => {
            write!(out, "{}", cfg.header())?;
            writeln!(
                out,
                "domain,abs,heuristic,n_instances,solved,failed,status,mean_solution_length,mean_nodes,mean_time_s,nodes_ratio_vs_baseline"
            )?;
            let cell = |v: &serde_json::Value| match v {
                serde_json::Value::Null => String::new(),
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Number(n) => match n.as_f64() {
                    Some(f) if !n.is_u64() => format!("{f:.6}"),
                    _ => n.to_string(),
                },
                other => other.to_string(),
            };
            let cols = [
                "domain",
                "abs",
                "heuristic",
                "n_instances",
                "solved",
                "failed",
                "status",
                "mean_solution_length",
                "mean_nodes",
                "mean_time_s",
                "nodes_ratio_vs_baseline",
            ];
            for r in &records {
                let line: Vec<String> = cols.iter().map(|c| cell(&r[c])).collect();
                writeln!(out, "{}", line.join(","))?;
            }
        }
    }
    let failed = rows.iter().any(|(_, a)| a.failed > 0);
    Ok(if failed { EXIT_BUDGET } else { EXIT_OK })
}

fn print_reports(reports: &[LemmaReport], out: &mut dyn Write) -> Result<i32> {
    let mut ok = true;
    for r in reports {
        writeln!(out, "{}", r.line())?;
        for v in &r.violations {
            writeln!(out, "  violation: {v}")?;
        }
        for n in &r.notes {
            writeln!(out, "  note: {n}")?;
        }
        ok &= r.passed();
    }
    Ok(if ok { EXIT_OK } else { EXIT_VIOLATION })
}

fn verify_graph(path: &std::path::Path, out: &mut dyn Write) -> Result<i32> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let g = ExplicitGraph::parse(&text)?;
    print_reports(&verify_conditions(&g)?, out)
}

fn verify(
    cfg: &ExperimentConfig,
    lemma: &str,
    mode: &str,
    max_states: usize,
    out: &mut dyn Write,
) -> Result<i32> {
    let mode = match mode {
        "exhaustive" => Mode::Exhaustive,
        "sampled" => Mode::Sampled {
            count: cfg.samples,
            seed: cfg.seed,
        },
        other => bail!("unknown mode `{other}` (exhaustive, sampled)"),
    };
    let suite = Suite::new(cfg.puzzle, &cfg.partition, &cfg.scheme, mode, max_states)?;
    let checks = if lemma == "all" {
        suite.applicable()
    } else {
        lemma
            .split(',')
            .map(Check::parse)
            .collect::<apdb::Result<Vec<_>>>()?
    };
    let reports = checks
        .into_iter()
        .map(|c| suite.check(c))
        .collect::<apdb::Result<Vec<_>>>()?;
    write!(out, "{}", cfg.header())?;
    print_reports(&reports, out)
}

fn measure_addbetter(cfg: &ExperimentConfig, out: &mut dyn Write) -> Result<i32> {
    let h = heuristic_for(cfg, HeuristicKind::Add)?;
    let f = addbetter_fraction_sampled(&h, cfg.puzzle, cfg.start, cfg.samples, cfg.seed)?;
    let r = f.ratio();
    write!(out, "{}", cfg.header())?;
    writeln!(
        out,
        "{} {} {} addbetter={}/{} fraction={:.4} ci95=[{:.4},{:.4}] ratio={}/{}",
        cfg.puzzle.label(),
        cfg.partition.notation(),
        cfg.scheme,
        f.satisfied,
        f.total,
        f.value(),
        f.low,
        f.high,
        r.numer(),
        r.denom()
    )?;
    Ok(EXIT_OK)
}
