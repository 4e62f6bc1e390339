//! Building tables, optionally cached in a directory.

use crate::config::ExperimentConfig;
use anyhow::{Context, Result};
use apdb::heuristics::PdbHeuristic;
use apdb::{AbstractionSpec, BlankMode, BuildOptions, CostScheme, Error, Pdb};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

/// What happened to one table.
#[derive(Clone, Debug)]
pub struct TableInfo {
    pub group: usize,
    pub entries: usize,
    pub scale: u64,
    pub max_primary: u64,
    pub loaded: bool,
    pub seconds: f64,
    pub path: Option<PathBuf>,
}

fn file_name(spec: &AbstractionSpec) -> String {
    let partition = spec.partition().notation().replace(['/', ','], "_");
    let blank = if spec.blank_mode() == BlankMode::Untracked {
        "-noblank"
    } else {
        ""
    };
    format!(
        "{}-{}-{}-g{}{}.apdb",
        spec.puzzle().label(),
        partition,
        spec.scheme().label(),
        spec.group(),
        blank
    )
}

fn load_or_build(
    spec: &AbstractionSpec,
    opts: BuildOptions,
    dir: Option<&Path>,
) -> Result<(Pdb, TableInfo)> {
    let t = Instant::now();
    let path = dir.map(|d| d.join(file_name(spec)));
    if let Some(p) = path.as_ref().filter(|p| p.exists()) {
        match Pdb::load(p, Some(spec)) {
            Ok(pdb) if pdb.has_residuals() || !opts.store_residual => {
                let info = info(spec.group(), &pdb, true, t, path.clone());
                return Ok((pdb, info));
            }
            Ok(_) | Err(Error::WrongPdb) => {}
            Err(e) => return Err(e).with_context(|| format!("loading {}", p.display())),
        }
    }
    let pdb = Pdb::build(spec, opts)?;
    if let Some(p) = &path {
        if let Some(d) = p.parent() {
            std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
        }
        pdb.save(p)
            .with_context(|| format!("writing {}", p.display()))?;
    }
    let info = info(spec.group(), &pdb, false, t, path);
    Ok((pdb, info))
}

fn info(group: usize, pdb: &Pdb, loaded: bool, t: Instant, path: Option<PathBuf>) -> TableInfo {
    TableInfo {
        group,
        entries: pdb.len(),
        scale: pdb.scale(),
        max_primary: pdb.max_primary(),
        loaded,
        seconds: t.elapsed().as_secs_f64(),
        path,
    }
}

/// The heuristic for `scheme` over the configured partition.
pub fn heuristic(
    cfg: &ExperimentConfig,
    scheme: &CostScheme,
) -> Result<(PdbHeuristic<u32>, Vec<TableInfo>)> {
    let blank = if cfg.untracked_blank {
        BlankMode::Untracked
    } else {
        BlankMode::Tracked
    };
    let opts = BuildOptions {
        store_residual: cfg.store_residual,
        ..BuildOptions::default()
    };
    let dir = cfg.pdb_dir.as_deref();
    let spec =
        |g| AbstractionSpec::new(cfg.puzzle, cfg.partition.clone(), g, scheme.clone(), blank);
    if cfg.shared {
        let (pdb, info) = load_or_build(&spec(0)?, opts, dir)?;
        return Ok((PdbHeuristic::shared(Arc::new(pdb))?, vec![info]));
    }
    let mut pdbs = Vec::new();
    let mut infos = Vec::new();
    for g in 0..cfg.partition.len() {
        let (pdb, info) = load_or_build(&spec(g)?, opts, dir)?;
        pdbs.push(Arc::new(pdb));
        infos.push(info);
    }
    Ok((PdbHeuristic::new(pdbs)?, infos))
}
