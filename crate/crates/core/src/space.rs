//! States, transitions, paths and the [`StateSpace`] interface every other
//! module consumes.

use crate::error::{Error, Result};
use std::fmt;
use std::hash::Hash;
use std::ops::{Deref, DerefMut};

/// Original-space edge and path costs.
pub type Cost = u64;

/// Operator index within a state space.
pub type OpId = u32;

/// Marker for an unreachable goal.
pub const INFINITE_COST: Cost = Cost::MAX;

/// Largest number of locations a puzzle state may have.
pub const MAX_TILES: usize = 32;

/// A fixed-capacity array of tile ids, one per location.
///
/// Unused trailing slots are always zero so derived equality and hashing
/// only depend on the live prefix.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State {
    len: u8,
    tiles: [u8; MAX_TILES],
}

impl State {
    pub fn from_slice(tiles: &[u8]) -> Result<Self> {
        if tiles.len() > MAX_TILES {
            return Err(Error::InvalidState(format!(
                "{} locations exceeds the maximum of {MAX_TILES}",
                tiles.len()
            )));
        }
        let mut s = State {
            len: tiles.len() as u8,
            tiles: [0; MAX_TILES],
        };
        s.tiles[..tiles.len()].copy_from_slice(tiles);
        Ok(s)
    }

    pub(crate) fn filled(len: usize, value: u8) -> Self {
        debug_assert!(len <= MAX_TILES);
        let mut s = State {
            len: len as u8,
            tiles: [0; MAX_TILES],
        };
        s.tiles[..len].fill(value);
        s
    }

    pub fn identity(len: usize) -> Self {
        let mut s = Self::filled(len, 0);
        for (i, t) in s.iter_mut().enumerate() {
            *t = i as u8;
        }
        s
    }
}

impl Deref for State {
    type Target = [u8];

    #[inline]
    fn deref(&self) -> &[u8] {
        &self.tiles[..self.len as usize]
    }
}

impl DerefMut for State {
    #[inline]
    fn deref_mut(&mut self) -> &mut [u8] {
        &mut self.tiles[..self.len as usize]
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.iter()).finish()
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition<S> {
    pub op: OpId,
    pub from: S,
    pub to: S,
    pub cost: Cost,
}

/// A sequence of chained transitions beginning at `start`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path<S> {
    pub start: S,
    pub edges: Vec<Transition<S>>,
}

impl<S: Clone + Eq> Path<S> {
    pub fn new(start: S) -> Self {
        Path {
            start,
            edges: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn end(&self) -> &S {
        self.edges.last().map_or(&self.start, |t| &t.to)
    }
}

/// Sum of edge costs, after checking that consecutive edges chain.
pub fn path_cost<S: Eq + fmt::Debug>(p: &Path<S>) -> Result<Cost> {
    let mut at = &p.start;
    let mut total: Cost = 0;
    for (j, t) in p.edges.iter().enumerate() {
        if &t.from != at {
            return Err(Error::MalformedPath(format!(
                "edge {j} starts at {:?}, expected {:?}",
                t.from, at
            )));
        }
        total = total
            .checked_add(t.cost)
            .ok_or_else(|| Error::MalformedPath("cost overflow".into()))?;
        at = &t.to;
    }
    Ok(total)
}

/// A weighted directed graph with a distinguished goal, exposed through
/// operator-indexed successor and predecessor enumeration.
pub trait StateSpace: Sync {
    type State: Clone + Eq + Hash + fmt::Debug + Send + Sync;

    fn goal(&self) -> Self::State;

    fn check_state(&self, s: &Self::State) -> Result<()>;

    /// Calls `f(op, successor, cost)` for every outgoing edge of a valid `s`,
    /// in ascending operator order.
    fn for_each_successor<F: FnMut(OpId, Self::State, Cost)>(&self, s: &Self::State, f: F);

    /// Calls `f(op, predecessor, cost)` for every incoming edge of a valid
    /// `s`, where `op` is the operator that leads from the predecessor to `s`.
    fn for_each_predecessor<F: FnMut(OpId, Self::State, Cost)>(&self, s: &Self::State, f: F);

    /// Move pruning: `false` when applying `op` right after `prev` is
    /// redundant because the two commute and the opposite order is kept.
    /// Must leave at least one optimal path to every state.
    fn may_follow(&self, _prev: OpId, _op: OpId) -> bool {
        true
    }

    fn successors(&self, s: &Self::State) -> Result<Vec<Transition<Self::State>>> {
        self.check_state(s)?;
        let mut out = Vec::new();
        self.for_each_successor(s, |op, to, cost| {
            out.push(Transition {
                op,
                from: s.clone(),
                to,
                cost,
            })
        });
        Ok(out)
    }

    fn predecessors(&self, s: &Self::State) -> Result<Vec<Transition<Self::State>>> {
        self.check_state(s)?;
        let mut out = Vec::new();
        self.for_each_predecessor(s, |op, from, cost| {
            out.push(Transition {
                op,
                from,
                to: s.clone(),
                cost,
            })
        });
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(from: u8, to: u8, cost: Cost) -> Transition<u8> {
        Transition {
            op: 0,
            from,
            to,
            cost,
        }
    }

    #[test]
    fn empty_path_costs_nothing() {
        assert_eq!(path_cost(&Path::new(3u8)).unwrap(), 0);
    }

    #[test]
    fn unit_edges_sum() {
        let p = Path {
            start: 0u8,
            edges: vec![t(0, 1, 1), t(1, 2, 1), t(2, 3, 1)],
        };
        assert_eq!(path_cost(&p).unwrap(), 3);
        assert_eq!(*p.end(), 3);
    }

    #[test]
    fn broken_chain_is_rejected() {
        let p = Path {
            start: 0u8,
            edges: vec![t(0, 1, 1), t(2, 3, 1)],
        };
        assert!(matches!(path_cost(&p), Err(Error::MalformedPath(_))));
    }

    #[test]
    fn state_padding_does_not_leak() {
        let a = State::from_slice(&[1, 2, 3]).unwrap();
        let mut b = State::from_slice(&[1, 2, 3, 4]).unwrap();
        assert_ne!(a, b);
        b = State::from_slice(&b[..3]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_string(), "1,2,3");
    }
}
