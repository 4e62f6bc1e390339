//! Two-cost pattern databases: for every abstract state the minimum primary
//! cost to the abstract goal (`C*`) and, optionally, the minimum residual
//! cost among primary-optimal paths (`R*`).

mod io;
mod rank;

pub(crate) use rank::positions;
pub use rank::Ranker;

use crate::abstraction::AbstractionSpec;
use crate::domains::Puzzle;
use crate::error::{Error, Result};
use crate::space::{Cost, State, INFINITE_COST, MAX_TILES};
use crate::word::PdbWord;
use sha2::{Digest, Sha256};
use std::cmp::Reverse;
use std::collections::BinaryHeap;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BuildOptions {
    /// Keep `R*` next to `C*` (doubles the table size).
    pub store_residual: bool,
    /// Refuse to build tables with more entries than this.
    pub max_entries: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            store_residual: true,
            max_entries: 1 << 28,
        }
    }
}

/// `(C*, R*)` of one abstract state in scaled units. `INFINITE_COST` marks
/// an abstract state from which the goal is unreachable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Entry {
    pub primary: Cost,
    /// `None` when the table was built without residuals.
    pub residual: Option<Cost>,
}

impl Entry {
    pub fn is_infinite(&self) -> bool {
        self.primary == INFINITE_COST
    }
}

#[derive(Clone, Debug)]
pub struct TwoCostPdb<W: PdbWord> {
    spec: AbstractionSpec,
    ranker: Ranker,
    primary: Vec<W>,
    residual: Option<Vec<W>>,
    digest: [u8; 32],
}

pub(crate) fn spec_digest(spec: &AbstractionSpec) -> [u8; 32] {
    Sha256::digest(spec.encode()).into()
}

impl<W: PdbWord> TwoCostPdb<W> {
    /// Backward Dijkstra from the abstract goal ordered by `(C, R)`
    /// lexicographically. Every abstract edge is relaxed with its own cost,
    /// so parallel edges between two abstract states contribute their
    /// cheapest member.
    pub fn build(spec: &AbstractionSpec, opts: BuildOptions) -> Result<Self> {
        let ranker = Ranker::new(spec)?;
        let size = ranker.size();
        if size > opts.max_entries {
            return Err(Error::BudgetExceeded {
                what: format!("table of {size} entries exceeds {}", opts.max_entries),
                generated: 0,
                expanded: 0,
            });
        }
        let size = size as usize;
        let mut c = vec![INFINITE_COST; size];
        let mut r = vec![INFINITE_COST; size];
        let mut done = vec![false; size];
        let goal = ranker.rank_unchecked(&spec.abstract_goal()) as usize;
        c[goal] = 0;
        r[goal] = 0;
        let mut heap = BinaryHeap::new();
        heap.push(Reverse((0u64, 0u64, goal as u64)));
        while let Some(Reverse((dc, dr, x))) = heap.pop() {
            let x = x as usize;
            if done[x] {
                continue;
            }
            done[x] = true;
            let a = ranker.unrank_unchecked(x as u64);
            spec.for_each_abstract_predecessor(&a, |_, p, ec, er| {
                let y = ranker.rank_unchecked(&p) as usize;
                if done[y] {
                    return;
                }
                let cand = (dc + ec, dr + er);
                if cand < (c[y], r[y]) {
                    c[y] = cand.0;
                    r[y] = cand.1;
                    heap.push(Reverse((cand.0, cand.1, y as u64)));
                }
            });
        }
        let narrow = |v: Vec<Cost>| -> Result<Vec<W>> {
            v.into_iter()
                .map(|x| {
                    if x == INFINITE_COST {
                        Ok(W::infinity())
                    } else {
                        W::from_cost(x).ok_or(Error::WordOverflow(x))
                    }
                })
                .collect()
        };
        let primary = narrow(c)?;
        let residual = if opts.store_residual {
            Some(narrow(r)?)
        } else {
            None
        };
        Ok(TwoCostPdb {
            spec: spec.clone(),
            ranker,
            primary,
            residual,
            digest: spec_digest(spec),
        })
    }

    pub fn spec(&self) -> &AbstractionSpec {
        &self.spec
    }

    pub fn scale(&self) -> Cost {
        self.spec.scale()
    }

    pub fn len(&self) -> usize {
        self.primary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primary.is_empty()
    }

    pub fn has_residuals(&self) -> bool {
        self.residual.is_some()
    }

    pub fn digest(&self) -> &[u8; 32] {
        &self.digest
    }

    pub fn ranker(&self) -> &Ranker {
        &self.ranker
    }

    #[inline]
    fn entry_at(&self, i: usize) -> Entry {
        Entry {
            primary: self.primary[i].to_cost(),
            residual: self.residual.as_ref().map(|r| r[i].to_cost()),
        }
    }

    /// Entry by rank.
    pub fn entry(&self, rank: u64) -> Result<Entry> {
        if rank >= self.primary.len() as u64 {
            return Err(Error::InvalidAbstractState(format!(
                "rank {rank} out of range"
            )));
        }
        Ok(self.entry_at(rank as usize))
    }

    /// Entry of a valid abstract state.
    pub fn entry_abstract(&self, a: &State) -> Result<Entry> {
        self.entry(self.ranker.rank(a)?)
    }

    /// Entry for the image of concrete state `s`.
    #[inline]
    pub fn get(&self, s: &State) -> Entry {
        self.entry_at(self.ranker.rank_concrete(s, 0) as usize)
    }

    /// `C*` for the image of `s`, without residual.
    #[inline]
    pub fn primary(&self, s: &State) -> Cost {
        self.primary[self.ranker.rank_concrete(s, 0) as usize].to_cost()
    }

    /// Like [`get`](Self::get), after checking the table belongs to `spec`.
    pub fn lookup(&self, spec: &AbstractionSpec, s: &State) -> Result<Entry> {
        if spec_digest(spec) != self.digest {
            return Err(Error::WrongPdb);
        }
        spec.puzzle().check_state(s)?;
        Ok(self.get(s))
    }

    /// Tile renaming offset that maps group `group` onto this table's group,
    /// for TopSpin partitions of equal-sized contiguous groups.
    pub fn symmetry_shift(&self, group: usize) -> Result<u8> {
        let Puzzle::TopSpin { n, .. } = self.spec.puzzle() else {
            return Err(Error::UnsupportedSymmetry(
                "tile renaming needs a rotation-symmetric goal (TopSpin)".into(),
            ));
        };
        let groups = self.spec.partition().groups();
        let size = groups[0].len();
        let run_start = |g: &[u8]| -> Option<u8> {
            let start = *g.iter().min()?;
            let mut sorted = g.to_vec();
            sorted.sort_unstable();
            sorted
                .iter()
                .enumerate()
                .all(|(i, &t)| t as usize == start as usize + i)
                .then_some(start)
        };
        let mut starts = Vec::new();
        for g in groups {
            match run_start(g) {
                Some(s) if g.len() == size => starts.push(s),
                _ => {
                    return Err(Error::UnsupportedSymmetry(
                        "groups must be equal-sized runs of consecutive tiles".into(),
                    ))
                }
            }
        }
        let target = *starts
            .get(group)
            .ok_or_else(|| Error::InvalidPartition(format!("no group {group}")))?;
        let own = starts[self.spec.group()];
        Ok(((target as usize + n as usize - own as usize) % n as usize) as u8)
    }

    /// Entry for group `group`'s image of `s` using this table, by renaming
    /// tiles so that the group lands on the table's own group.
    pub fn symmetric_lookup(&self, group: usize, s: &State) -> Result<Entry> {
        let shift = self.symmetry_shift(group)?;
        self.spec.puzzle().check_state(s)?;
        Ok(self.get_shifted(s, shift))
    }

    #[inline]
    pub(crate) fn get_shifted(&self, s: &State, shift: u8) -> Entry {
        self.entry_at(self.ranker.rank_concrete(s, shift) as usize)
    }

    /// Entry from a precomputed inverse permutation of the concrete state.
    #[inline]
    pub(crate) fn get_positions(&self, pos: &[u8; MAX_TILES], shift: u8) -> Entry {
        self.entry_at(self.ranker.rank_positions(pos, shift) as usize)
    }

    #[inline]
    pub(crate) fn primary_positions(&self, pos: &[u8; MAX_TILES], shift: u8) -> Cost {
        self.primary[self.ranker.rank_positions(pos, shift) as usize].to_cost()
    }

    /// Largest finite `C*` in the table.
    pub fn max_primary(&self) -> Cost {
        self.primary
            .iter()
            .filter(|w| !w.is_infinite())
            .map(|w| w.to_cost())
            .max()
            .unwrap_or(0)
    }

    /// Iterates `(rank, entry)` over the whole table.
    pub fn entries(&self) -> impl Iterator<Item = (u64, Entry)> + '_ {
        (0..self.primary.len()).map(|i| (i as u64, self.entry_at(i)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::{BlankMode, CostScheme, TilePartition, DONT_CARE};
    use crate::domains::StartMode;
    use crate::space::StateSpace;

    fn build(p: Puzzle, part: &str, group: usize, scheme: CostScheme) -> TwoCostPdb<u32> {
        let spec = AbstractionSpec::new(
            p,
            TilePartition::parse(part).unwrap(),
            group,
            scheme,
            BlankMode::Tracked,
        )
        .unwrap();
        TwoCostPdb::build(&spec, BuildOptions::default()).unwrap()
    }

    #[test]
    fn goal_entry_is_zero() {
        let p = Puzzle::pancake(5).unwrap();
        let pdb = build(p, "2-3", 1, CostScheme::CostSplit);
        let e = pdb.get(&p.goal());
        assert_eq!((e.primary, e.residual), (0, Some(0)));
    }

    #[test]
    fn pancake5_single_tile_cost_split() {
        let p = Puzzle::pancake(5).unwrap();
        let pdb = build(p, "1", 0, CostScheme::CostSplit);
        let d = DONT_CARE;
        let a = State::from_slice(&[d, 0, d, d, d]).unwrap();
        assert_eq!(pdb.scale(), 60);
        assert_eq!(pdb.entry_abstract(&a).unwrap().primary, 27);
    }

    #[test]
    fn blank_only_distances() {
        let p = Puzzle::sliding_tile(3, 3).unwrap();
        let pdb = build(p, "0-8", 0, CostScheme::FullCost);
        assert_eq!(pdb.len(), 9);
        let center = p.parse_state("0,1,2,3,_,4,5,6,7").unwrap();
        assert_eq!(pdb.get(&center).primary, 2);
        assert_eq!(pdb.max_primary(), 4);
    }

    #[test]
    fn full_cost_is_monotone_on_edges() {
        let p = Puzzle::topspin(7, 4).unwrap();
        let pdb = build(p, "4-3", 0, CostScheme::FullCost);
        for s in p.random_starts(StartMode::Walk(40), 200, 3).unwrap() {
            p.for_each_successor(&s, |_, t, c| {
                assert!(pdb.primary(&s) <= c + pdb.primary(&t));
            });
        }
    }

    #[test]
    fn symmetric_lookup_matches_dedicated_tables() {
        let p = Puzzle::topspin(8, 4).unwrap();
        let shared = build(p, "4-4", 0, CostScheme::CostSplit);
        let second = build(p, "4-4", 1, CostScheme::CostSplit);
        for s in p.random_starts(StartMode::Walk(50), 300, 11).unwrap() {
            assert_eq!(shared.symmetric_lookup(0, &s).unwrap(), shared.get(&s));
            assert_eq!(shared.symmetric_lookup(1, &s).unwrap(), second.get(&s));
        }
    }

    #[test]
    fn symmetry_rejected_for_uneven_groups() {
        let p = Puzzle::topspin(7, 4).unwrap();
        let pdb = build(p, "4-3", 0, CostScheme::CostSplit);
        assert!(matches!(
            pdb.symmetry_shift(1),
            Err(Error::UnsupportedSymmetry(_))
        ));
        let q = Puzzle::pancake(6).unwrap();
        let pdb = build(q, "3-3", 0, CostScheme::CostSplit);
        assert!(matches!(
            pdb.symmetry_shift(1),
            Err(Error::UnsupportedSymmetry(_))
        ));
    }

    #[test]
    fn wrong_spec_is_rejected() {
        let p = Puzzle::pancake(5).unwrap();
        let pdb = build(p, "2-3", 0, CostScheme::CostSplit);
        let other = pdb.spec().with_group(1).unwrap();
        assert_eq!(pdb.lookup(&other, &p.goal()), Err(Error::WrongPdb));
        assert!(pdb.lookup(pdb.spec(), &p.goal()).is_ok());
    }

    #[test]
    fn budget_is_enforced() {
        let p = Puzzle::pancake(8).unwrap();
        let spec = AbstractionSpec::new(
            p,
            TilePartition::parse("4-4").unwrap(),
            0,
            CostScheme::FullCost,
            BlankMode::Tracked,
        )
        .unwrap();
        let opts = BuildOptions {
            store_residual: false,
            max_entries: 100,
        };
        assert!(matches!(
            TwoCostPdb::<u32>::build(&spec, opts),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
