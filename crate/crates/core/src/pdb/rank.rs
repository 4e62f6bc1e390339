//! Dense indices for abstract states.
//!
//! The tracked values of an abstraction (its distinguished tiles, plus the
//! blank when tracked) occupy distinct locations. Their locations, listed in
//! value order, form a partial permutation which is ranked in a mixed radix:
//! the `j`-th digit is the location's index among the locations not used by
//! earlier values. For rotation-anchored (TopSpin) abstractions the anchor
//! always sits at location 0 and only locations `1..n` are ranked.

use crate::abstraction::{AbstractionSpec, DONT_CARE};
use crate::error::{Error, Result};
use crate::space::{State, MAX_TILES};

const NONE: u8 = u8::MAX;

/// Inverse of a concrete state: the location of each value.
#[inline]
pub(crate) fn positions(s: &[u8]) -> [u8; MAX_TILES] {
    let mut pos = [0u8; MAX_TILES];
    for (p, &v) in s.iter().enumerate() {
        pos[v as usize] = p as u8;
    }
    pos
}

#[derive(Clone, Debug)]
pub struct Ranker {
    n: usize,
    offset: usize,
    anchor: Option<u8>,
    tracked: Vec<u8>,
    index_of: [u8; MAX_TILES],
    multipliers: Vec<u64>,
    size: u64,
}

impl Ranker {
    pub fn new(spec: &AbstractionSpec) -> Result<Self> {
        let n = spec.puzzle().num_locations();
        let anchor = spec.anchor();
        let offset = usize::from(anchor.is_some());
        let mut tracked: Vec<u8> = spec
            .tiles()
            .iter()
            .copied()
            .filter(|&t| Some(t) != anchor)
            .collect();
        tracked.sort_unstable();
        if spec.tracks_blank() {
            tracked.extend(spec.puzzle().blank());
        }
        let places = n - offset;
        if tracked.len() > places {
            return Err(Error::InvalidPartition(
                "more tracked values than locations".into(),
            ));
        }
        let mut index_of = [NONE; MAX_TILES];
        for (j, &v) in tracked.iter().enumerate() {
            index_of[v as usize] = j as u8;
        }
        let mut multipliers = vec![1u64; tracked.len()];
        let mut size: u64 = 1;
        for j in (0..tracked.len()).rev() {
            multipliers[j] = size;
            size = size.checked_mul((places - j) as u64).ok_or_else(|| {
                Error::InvalidParameter("abstract space too large to rank".into())
            })?;
        }
        Ok(Ranker {
            n,
            offset,
            anchor,
            tracked,
            index_of,
            multipliers,
            size,
        })
    }

    /// Number of ranks, i.e. the table size.
    pub fn size(&self) -> u64 {
        self.size
    }

    #[inline]
    fn rank_locations(&self, loc: &[u8]) -> u64 {
        let mut used = 0u64;
        let mut r = 0u64;
        for (j, &p) in loc.iter().enumerate() {
            let p = p as u32 - self.offset as u32;
            let below = (used & ((1u64 << p) - 1)).count_ones();
            r += (p - below) as u64 * self.multipliers[j];
            used |= 1 << p;
        }
        r
    }

    /// Rank of a valid abstract state.
    pub fn rank(&self, a: &State) -> Result<u64> {
        let bad = |m: String| Error::InvalidAbstractState(m);
        if a.len() != self.n {
            return Err(bad(format!(
                "expected {} locations, got {}",
                self.n,
                a.len()
            )));
        }
        if let Some(anchor) = self.anchor {
            if a[0] != anchor {
                return Err(bad(format!("anchor {anchor} must be at location 0")));
            }
        }
        let mut loc = [NONE; MAX_TILES];
        for (p, &v) in a.iter().enumerate().skip(self.offset) {
            if v == DONT_CARE {
                continue;
            }
            let j = *self.index_of.get(v as usize).unwrap_or(&NONE);
            if j == NONE {
                return Err(bad(format!("value {v} is not tracked")));
            }
            if loc[j as usize] != NONE {
                return Err(bad(format!("duplicate value {v}")));
            }
            loc[j as usize] = p as u8;
        }
        let m = self.tracked.len();
        if let Some(j) = loc[..m].iter().position(|&p| p == NONE) {
            return Err(bad(format!("value {} missing", self.tracked[j])));
        }
        Ok(self.rank_locations(&loc[..m]))
    }

    /// Rank of an abstract state produced by the abstraction itself.
    #[inline]
    pub(crate) fn rank_unchecked(&self, a: &[u8]) -> u64 {
        let mut loc = [0u8; MAX_TILES];
        for (p, &v) in a.iter().enumerate().skip(self.offset) {
            if v != DONT_CARE {
                loc[self.index_of[v as usize] as usize] = p as u8;
            }
        }
        self.rank_locations(&loc[..self.tracked.len()])
    }

    /// Rank of the image of a concrete state, with tile values renamed by
    /// `v -> (v + n - shift) mod n` first (`shift = 0` is no renaming).
    #[inline]
    pub(crate) fn rank_concrete(&self, s: &[u8], shift: u8) -> u64 {
        self.rank_positions(&positions(s), shift)
    }

    /// [`rank_concrete`](Self::rank_concrete) from the inverse permutation
    /// (`pos[v]` is the location of value `v`). Touches only the tracked
    /// values.
    #[inline]
    pub(crate) fn rank_positions(&self, pos: &[u8; MAX_TILES], shift: u8) -> u64 {
        let n = self.n;
        let location = |t: u8| {
            let v = t as usize + shift as usize;
            pos[if v >= n { v - n } else { v }] as u32
        };
        let base = self.anchor.map_or(0, location);
        let (n, offset) = (n as u32, self.offset as u32);
        let mut used = 0u64;
        let mut r = 0u64;
        for (&t, &m) in self.tracked.iter().zip(&self.multipliers) {
            let p = location(t);
            let p = if p >= base { p - base } else { p + n - base } - offset;
            let below = (used & ((1u64 << p) - 1)).count_ones();
            r += (p - below) as u64 * m;
            used |= 1 << p;
        }
        r
    }

    pub fn unrank(&self, r: u64) -> Result<State> {
        if r >= self.size {
            return Err(Error::InvalidAbstractState(format!(
                "rank {r} out of range"
            )));
        }
        Ok(self.unrank_unchecked(r))
    }

    pub(crate) fn unrank_unchecked(&self, r: u64) -> State {
        let mut a = State::filled(self.n, DONT_CARE);
        if let Some(anchor) = self.anchor {
            a[0] = anchor;
        }
        let mut used = 0u64;
        let places = self.n - self.offset;
        for (j, &v) in self.tracked.iter().enumerate() {
            let digit = (r / self.multipliers[j]) % (places - j) as u64;
            // the digit-th location not yet used
            let mut free = !used & ((1u64 << places) - 1);
            for _ in 0..digit {
                free &= free - 1;
            }
            let p = free.trailing_zeros() as usize;
            used |= 1 << p;
            a[p + self.offset] = v;
        }
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::{BlankMode, CostScheme, TilePartition};
    use crate::domains::Puzzle;
    use std::collections::HashSet;

    fn ranker(p: Puzzle, part: &str, group: usize) -> (AbstractionSpec, Ranker) {
        let spec = AbstractionSpec::new(
            p,
            TilePartition::parse(part).unwrap(),
            group,
            CostScheme::CostSplit,
            BlankMode::Tracked,
        )
        .unwrap();
        let r = Ranker::new(&spec).unwrap();
        (spec, r)
    }

    #[test]
    fn pancake5_two_tiles() {
        let (spec, r) = ranker(Puzzle::pancake(5).unwrap(), "2-3", 0);
        assert_eq!(r.size(), 20);
        let mut seen = HashSet::new();
        for i in 0..20 {
            let a = r.unrank(i).unwrap();
            assert_eq!(r.rank(&a).unwrap(), i);
            seen.insert(a);
        }
        assert_eq!(seen.len(), 20);
        let g = spec.abstract_goal();
        assert_eq!(r.unrank(r.rank(&g).unwrap()).unwrap(), g);
    }

    #[test]
    fn topspin_table_is_n_times_smaller() {
        let (_, r) = ranker(Puzzle::topspin(18, 4).unwrap(), "6-6-6", 1);
        assert_eq!(r.size(), 17 * 16 * 15 * 14 * 13);
        assert_eq!(r.size(), 742_560);
    }

    #[test]
    fn sliding_counts_blank() {
        let (_, r) = ranker(Puzzle::sliding_tile(3, 3).unwrap(), "4-4", 0);
        assert_eq!(r.size(), 9 * 8 * 7 * 6 * 5);
    }

    #[test]
    fn concrete_rank_matches_abstract_rank() {
        for (p, part) in [
            (Puzzle::topspin(8, 4).unwrap(), "3-5"),
            (Puzzle::pancake(6).unwrap(), "2-4"),
            (Puzzle::sliding_tile(2, 3).unwrap(), "2-3"),
        ] {
            for g in 0..2 {
                let (spec, r) = ranker(p, part, g);
                for s in p
                    .random_starts(crate::domains::StartMode::Walk(30), 50, 7)
                    .unwrap()
                {
                    let a = spec.abstract_state(&s);
                    assert_eq!(r.rank_concrete(&s, 0), r.rank(&a).unwrap());
                    assert_eq!(r.rank_unchecked(&a), r.rank(&a).unwrap());
                }
            }
        }
    }

    #[test]
    fn invalid_states_are_rejected() {
        let (_, r) = ranker(Puzzle::pancake(5).unwrap(), "2-3", 0);
        let d = DONT_CARE;
        let dup = State::from_slice(&[0, 0, d, d, d]).unwrap();
        assert!(matches!(r.rank(&dup), Err(Error::InvalidAbstractState(_))));
        let missing = State::from_slice(&[0, d, d, d, d]).unwrap();
        assert!(r.rank(&missing).is_err());
        assert!(r.unrank(20).is_err());
    }
}
