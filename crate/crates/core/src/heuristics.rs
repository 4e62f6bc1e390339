//! Heuristics composed from pattern database lookups: the maximum over
//! full-cost tables, the ceiling of the sum of primary costs over additive
//! tables, and the residual-based infeasibility check that can raise the
//! additive value.

use crate::abstraction::{AbstractionSpec, CostScheme, TilePartition};
use crate::domains::{Puzzle, StartMode};
use crate::error::{Error, Result};
use crate::pdb::{positions, BuildOptions, Entry, TwoCostPdb};
use crate::space::{Cost, State, INFINITE_COST};
use crate::word::PdbWord;
use num_rational::Ratio;
use std::sync::Arc;

#[derive(Clone, Debug)]
struct Source<W: PdbWord> {
    pdb: Arc<TwoCostPdb<W>>,
    /// Tile renaming for shared (symmetric) lookups; 0 for a dedicated table.
    shift: u8,
}

/// One lookup per abstraction of a partition.
#[derive(Clone, Debug)]
pub struct PdbHeuristic<W: PdbWord> {
    sources: Vec<Source<W>>,
    scale: Cost,
    step: Cost,
}

/// Per-state breakdown of an additive evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HeuristicEval {
    pub scale: Cost,
    /// `(C*_i, R*_i)` in scaled units.
    pub per_abstraction: Vec<Entry>,
    /// `sum_i C*_i` in scaled units.
    pub h_add_exact: Cost,
    /// `ceil(h_add_exact / scale)`.
    pub h_add: Cost,
    /// Maximum over full-cost tables, when the caller supplied them.
    pub h_max: Option<Cost>,
    pub infeasible: bool,
    pub bumped: Cost,
}

impl HeuristicEval {
    /// `sum_i C*_i` in original units, exactly.
    pub fn h_add_ratio(&self) -> Ratio<u64> {
        Ratio::new(self.h_add_exact, self.scale)
    }

    /// The additive condition under which `h_add >= h_max` is guaranteed:
    /// `sum_i C*_i >= C*_j + R*_j` for every `j`.
    pub fn addbetter_check(&self) -> Result<bool> {
        let bound = max_primary_plus_residual(&self.per_abstraction)?;
        Ok(self.h_add_exact >= bound)
    }
}

#[inline]
fn ceil_div(x: Cost, scale: Cost) -> Cost {
    if x == INFINITE_COST || scale == 1 {
        x
    } else {
        x.div_ceil(scale)
    }
}

fn max_primary_plus_residual(entries: &[Entry]) -> Result<Cost> {
    entries.iter().try_fold(0, |m: Cost, e| {
        let r = e.residual.ok_or(Error::ResidualsUnavailable)?;
        Ok(m.max(e.primary.saturating_add(r)))
    })
}

/// `(infeasible, bumped)` for an evaluation.
///
/// The sum of primary costs cannot equal the optimal cost when it falls
/// short of `C*_j + R*_j` for some `j`. If the sum is a whole number it is
/// raised by `step` (2 when every solution cost has the parity of the sum,
/// else 1); a fractional sum is already exceeded by its ceiling.
pub fn infeasibility_check(eval: &HeuristicEval, step: Cost) -> Result<(bool, Cost)> {
    if eval.h_add_exact == INFINITE_COST {
        return Ok((false, INFINITE_COST));
    }
    let bound = max_primary_plus_residual(&eval.per_abstraction)?;
    let infeasible = eval.h_add_exact < bound;
    let bumped = if infeasible && eval.h_add_exact % eval.scale == 0 {
        eval.h_add + step
    } else {
        eval.h_add
    };
    Ok((infeasible, bumped))
}

/// How a [`PdbHeuristic`] combines its lookups.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Combine {
    Max,
    Add,
    /// `Add` with the infeasibility bump.
    AddInfeasible,
}

impl Combine {
    pub fn label(self) -> &'static str {
        match self {
            Combine::Max => "h_max",
            Combine::Add => "h_add",
            Combine::AddInfeasible => "h_add+infeasible",
        }
    }
}

impl<W: PdbWord> PdbHeuristic<W> {
    /// One dedicated table per abstraction, all with the same scale.
    pub fn new(pdbs: Vec<Arc<TwoCostPdb<W>>>) -> Result<Self> {
        let first = pdbs.first().ok_or(Error::MissingPdb)?;
        let scale = first.scale();
        if let Some(p) = pdbs.iter().find(|p| p.scale() != scale) {
            return Err(Error::ScaleMismatch(scale, p.scale()));
        }
        let step = parity_step(pdbs.iter().map(|p| p.spec()));
        Ok(PdbHeuristic {
            sources: pdbs
                .into_iter()
                .map(|pdb| Source { pdb, shift: 0 })
                .collect(),
            scale,
            step,
        })
    }

    /// One shared table looked up once per group of its partition, with tile
    /// renaming.
    pub fn shared(pdb: Arc<TwoCostPdb<W>>) -> Result<Self> {
        let groups = pdb.spec().partition().len();
        let sources = (0..groups)
            .map(|g| {
                Ok(Source {
                    shift: pdb.symmetry_shift(g)?,
                    pdb: Arc::clone(&pdb),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let specs = (0..groups)
            .map(|g| pdb.spec().with_group(g))
            .collect::<Result<Vec<_>>>()?;
        Ok(PdbHeuristic {
            scale: pdb.scale(),
            step: parity_step(specs.iter()),
            sources,
        })
    }

    /// Builds the tables for every group of `partition` (one shared table
    /// when `shared`).
    pub fn build(
        puzzle: Puzzle,
        partition: &TilePartition,
        scheme: &CostScheme,
        opts: BuildOptions,
        shared: bool,
    ) -> Result<Self> {
        let specs = AbstractionSpec::for_partition(puzzle, partition, scheme)?;
        if shared {
            let pdb = Arc::new(TwoCostPdb::build(&specs[0], opts)?);
            return Self::shared(pdb);
        }
        let pdbs = specs
            .iter()
            .map(|s| TwoCostPdb::build(s, opts).map(Arc::new))
            .collect::<Result<Vec<_>>>()?;
        Self::new(pdbs)
    }

    pub fn scale(&self) -> Cost {
        self.scale
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    /// Distinct tables backing the lookups.
    pub fn tables(&self) -> Vec<&TwoCostPdb<W>> {
        let mut out: Vec<&TwoCostPdb<W>> = Vec::new();
        for s in &self.sources {
            if !out.iter().any(|p| std::ptr::eq(*p, &*s.pdb)) {
                out.push(&s.pdb);
            }
        }
        out
    }

    /// Bump applied to whole-number infeasible sums.
    pub fn parity_step(&self) -> Cost {
        self.step
    }

    pub fn has_residuals(&self) -> bool {
        self.sources.iter().all(|s| s.pdb.has_residuals())
    }

    pub fn is_additive(&self) -> bool {
        self.sources
            .iter()
            .all(|s| s.pdb.spec().scheme().is_additive())
    }

    pub fn entries(&self, s: &State) -> Vec<Entry> {
        let pos = positions(s);
        self.sources
            .iter()
            .map(|src| src.pdb.get_positions(&pos, src.shift))
            .collect()
    }

    /// Maximum over the lookups, in original units.
    pub fn h_max(&self, s: &State) -> Cost {
        let pos = positions(s);
        let max = self
            .sources
            .iter()
            .map(|src| src.pdb.primary_positions(&pos, src.shift))
            .max()
            .unwrap_or(0);
        ceil_div(max, self.scale)
    }

    /// `sum_i C*_i` in scaled units.
    pub fn h_add_exact(&self, s: &State) -> Cost {
        let pos = positions(s);
        self.sources.iter().fold(0, |acc: Cost, src| {
            acc.saturating_add(src.pdb.primary_positions(&pos, src.shift))
        })
    }

    pub fn h_add(&self, s: &State) -> Cost {
        ceil_div(self.h_add_exact(s), self.scale)
    }

    pub fn evaluate(&self, s: &State) -> HeuristicEval {
        let per_abstraction = self.entries(s);
        let h_add_exact = per_abstraction
            .iter()
            .fold(0, |acc: Cost, e| acc.saturating_add(e.primary));
        let mut eval = HeuristicEval {
            scale: self.scale,
            per_abstraction,
            h_add_exact,
            h_add: ceil_div(h_add_exact, self.scale),
            h_max: None,
            infeasible: false,
            bumped: 0,
        };
        eval.bumped = eval.h_add;
        if let Ok((infeasible, bumped)) = infeasibility_check(&eval, self.step) {
            eval.infeasible = infeasible;
            eval.bumped = bumped;
        }
        eval
    }

    pub fn bumped(&self, s: &State) -> Result<Cost> {
        infeasibility_check(&self.evaluate(s), self.step).map(|(_, b)| b)
    }

    /// Estimate under `how`; infeasibility needs residuals.
    pub fn combine(&self, how: Combine) -> Result<Combined<'_, W>> {
        if how == Combine::AddInfeasible && !self.has_residuals() {
            return Err(Error::ResidualsUnavailable);
        }
        Ok(Combined { h: self, how })
    }
}

/// 2 when every solution cost has the same parity as any whole-number sum
/// of primary costs, else 1. This holds for sliding-tile puzzles whose
/// groups cover every tile and charge exactly the moves of their own tiles:
/// each tile's move count has the parity of its grid distance to its goal.
fn parity_step<'a>(specs: impl Iterator<Item = &'a AbstractionSpec>) -> Cost {
    let specs: Vec<&AbstractionSpec> = specs.collect();
    let Some(first) = specs.first() else {
        return 1;
    };
    let puzzle = first.puzzle();
    let per_tile = specs
        .iter()
        .all(|s| matches!(s.scheme(), CostScheme::ZeroOne | CostScheme::CostSplit));
    let mut covered = 0u64;
    for s in &specs {
        for &t in s.tiles() {
            covered |= 1 << t;
        }
    }
    let covers = puzzle.tiles().all(|t| covered & (1 << t) != 0);
    if puzzle.has_parity_property() && per_tile && covers {
        2
    } else {
        1
    }
}

/// A [`PdbHeuristic`] fixed to one combination rule.
#[derive(Clone, Copy, Debug)]
pub struct Combined<'a, W: PdbWord> {
    h: &'a PdbHeuristic<W>,
    how: Combine,
}

impl<W: PdbWord> Combined<'_, W> {
    #[inline]
    pub fn estimate(&self, s: &State) -> Cost {
        match self.how {
            Combine::Max => self.h.h_max(s),
            Combine::Add => self.h.h_add(s),
            Combine::AddInfeasible => self.h.evaluate(s).bumped,
        }
    }
}

/// Share of states satisfying the additive condition, with a 95% Wilson
/// score interval.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AddBetterFraction {
    pub satisfied: u64,
    pub total: u64,
    pub low: f64,
    pub high: f64,
}

impl AddBetterFraction {
    pub fn ratio(&self) -> Ratio<u64> {
        Ratio::new(self.satisfied, self.total.max(1))
    }

    pub fn value(&self) -> f64 {
        self.satisfied as f64 / self.total.max(1) as f64
    }
}

fn wilson(hits: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let (n, p) = (n as f64, hits as f64 / n as f64);
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Fraction of `states` for which the additive condition holds.
pub fn addbetter_fraction<W: PdbWord>(
    h: &PdbHeuristic<W>,
    states: &[State],
) -> Result<AddBetterFraction> {
    if !h.is_additive() {
        return Err(Error::UnsupportedScheme(
            "full-cost tables have no residual to test; use an additive scheme".into(),
        ));
    }
    if !h.has_residuals() {
        return Err(Error::ResidualsUnavailable);
    }
    let mut satisfied = 0;
    for s in states {
        if h.evaluate(s).addbetter_check()? {
            satisfied += 1;
        }
    }
    let total = states.len() as u64;
    let (low, high) = wilson(satisfied, total);
    Ok(AddBetterFraction {
        satisfied,
        total,
        low,
        high,
    })
}

/// [`addbetter_fraction`] over `count` seeded random states.
pub fn addbetter_fraction_sampled<W: PdbWord>(
    h: &PdbHeuristic<W>,
    puzzle: Puzzle,
    mode: StartMode,
    count: usize,
    seed: u64,
) -> Result<AddBetterFraction> {
    addbetter_fraction(h, &puzzle.random_starts(mode, count, seed)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::TilePartition;

    fn heuristic(p: Puzzle, part: &str, scheme: CostScheme) -> PdbHeuristic<u32> {
        PdbHeuristic::build(
            p,
            &TilePartition::parse(part).unwrap(),
            &scheme,
            BuildOptions::default(),
            false,
        )
        .unwrap()
    }

    fn eval(scale: Cost, pairs: &[(Cost, Cost)]) -> HeuristicEval {
        let per_abstraction: Vec<Entry> = pairs
            .iter()
            .map(|&(c, r)| Entry {
                primary: c,
                residual: Some(r),
            })
            .collect();
        let h_add_exact = pairs.iter().map(|p| p.0).sum();
        HeuristicEval {
            scale,
            per_abstraction,
            h_add_exact,
            h_add: ceil_div(h_add_exact, scale),
            h_max: None,
            infeasible: false,
            bumped: 0,
        }
    }

    #[test]
    fn goal_is_zero() {
        let p = Puzzle::pancake(6).unwrap();
        let h = heuristic(p, "3-3", CostScheme::CostSplit);
        let e = h.evaluate(&p.goal());
        assert_eq!((e.h_add, e.bumped, e.infeasible), (0, 0, false));
        assert_eq!(h.h_max(&p.goal()), 0);
    }

    #[test]
    fn worked_infeasibility_numbers() {
        let e = eval(1, &[(9, 9), (5, 7)]);
        assert_eq!(e.h_add, 14);
        assert_eq!(infeasibility_check(&e, 2).unwrap(), (true, 16));
        assert!(!e.addbetter_check().unwrap());
    }

    #[test]
    fn boundary_is_feasible() {
        let e = eval(1, &[(9, 0), (5, 4)]);
        assert_eq!(infeasibility_check(&e, 2).unwrap(), (false, 14));
    }

    #[test]
    fn fractional_sums_are_not_bumped() {
        let e = eval(12, &[(7, 20), (8, 0)]);
        assert_eq!(e.h_add, 2);
        assert_eq!(infeasibility_check(&e, 1).unwrap(), (true, 2));
    }

    #[test]
    fn residuals_required() {
        let mut e = eval(1, &[(3, 1)]);
        e.per_abstraction[0].residual = None;
        assert_eq!(infeasibility_check(&e, 1), Err(Error::ResidualsUnavailable));
    }

    #[test]
    fn scales_must_agree() {
        let p = Puzzle::pancake(5).unwrap();
        let part = TilePartition::parse("2-3").unwrap();
        let a = AbstractionSpec::new(
            p,
            part.clone(),
            0,
            CostScheme::CostSplit,
            crate::BlankMode::Tracked,
        )
        .unwrap();
        let b = AbstractionSpec::new(p, part, 1, CostScheme::FullCost, crate::BlankMode::Tracked)
            .unwrap();
        let pdbs = vec![
            Arc::new(TwoCostPdb::<u32>::build(&a, BuildOptions::default()).unwrap()),
            Arc::new(TwoCostPdb::<u32>::build(&b, BuildOptions::default()).unwrap()),
        ];
        assert_eq!(
            PdbHeuristic::new(pdbs).unwrap_err(),
            Error::ScaleMismatch(60, 1)
        );
        assert_eq!(
            PdbHeuristic::<u32>::new(vec![]).unwrap_err(),
            Error::MissingPdb
        );
    }

    #[test]
    fn parity_step_needs_full_cover() {
        let p = Puzzle::sliding_tile(2, 3).unwrap();
        assert_eq!(heuristic(p, "2-3", CostScheme::ZeroOne).parity_step(), 2);
        assert_eq!(heuristic(p, "2-2", CostScheme::ZeroOne).parity_step(), 1);
        let q = Puzzle::pancake(5).unwrap();
        assert_eq!(heuristic(q, "2-3", CostScheme::CostSplit).parity_step(), 1);
    }

    #[test]
    fn shared_table_matches_dedicated() {
        let p = Puzzle::topspin(8, 4).unwrap();
        let part = TilePartition::parse("4-4").unwrap();
        let opts = BuildOptions::default();
        let shared =
            PdbHeuristic::<u32>::build(p, &part, &CostScheme::CostSplit, opts, true).unwrap();
        let dedicated =
            PdbHeuristic::<u32>::build(p, &part, &CostScheme::CostSplit, opts, false).unwrap();
        assert_eq!(shared.tables().len(), 1);
        for s in p.random_starts(StartMode::Walk(40), 100, 5).unwrap() {
            assert_eq!(shared.evaluate(&s), dedicated.evaluate(&s));
        }
    }

    #[test]
    fn single_abstraction_always_satisfies_condition() {
        let p = Puzzle::pancake(6).unwrap();
        let h = heuristic(p, "6", CostScheme::CostSplit);
        let f = addbetter_fraction_sampled(&h, p, StartMode::Permutation, 200, 1).unwrap();
        assert_eq!(f.satisfied, 200);
        assert!(f.low > 0.95 && f.high == 1.0);
    }

    #[test]
    fn full_cost_fraction_refused() {
        let p = Puzzle::pancake(6).unwrap();
        let h = heuristic(p, "3-3", CostScheme::FullCost);
        assert!(matches!(
            addbetter_fraction(&h, &[p.goal()]),
            Err(Error::UnsupportedScheme(_))
        ));
    }
}
