//! Sliding-tile, N-Pancake and (N,K)-TopSpin puzzles.
//!
//! All three encode a state as the tile id held by each location.
//!
//! * Sliding tile (w×h): tiles `0..w·h-1`, the blank is id `w·h-1`. The goal
//!   has the blank in the top-left corner followed by the tiles in row-major
//!   order. Operators move the blank up, down, left or right (ids 0..4).
//! * Pancake(n): operator `l` (0-based) reverses the first `l+2` locations.
//! * TopSpin(n,k): states are kept with tile 0 at location 0. Operator `a`
//!   reverses the `k` locations starting at `a` (cyclically), after which the
//!   state is rotated so tile 0 is back at location 0.

use crate::error::{Error, Result};
use crate::space::{Cost, OpId, State, StateSpace, MAX_TILES};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Puzzle {
    SlidingTile { width: u8, height: u8 },
    Pancake { n: u8 },
    TopSpin { n: u8, k: u8 },
}

/// Locations touched by one operator application.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Footprint {
    /// Locations `0..len`.
    Prefix(u8),
    /// `k` locations starting at `start`, wrapping modulo `n`.
    Window { start: u8, k: u8, n: u8 },
    /// The location of the single tile moved.
    Single(u8),
}

impl Footprint {
    /// Number of tiles the operator moves.
    pub fn len(self) -> usize {
        match self {
            Footprint::Prefix(l) => l as usize,
            Footprint::Window { k, .. } => k as usize,
            Footprint::Single(_) => 1,
        }
    }

    pub fn is_empty(self) -> bool {
        self.len() == 0
    }

    /// The leftmost location the operator changes.
    pub fn first(self) -> usize {
        match self {
            Footprint::Prefix(_) => 0,
            Footprint::Window { start, .. } => start as usize,
            Footprint::Single(loc) => loc as usize,
        }
    }

    pub fn locations(self) -> impl Iterator<Item = usize> {
        let (start, len, n) = match self {
            Footprint::Prefix(l) => (0usize, l as usize, usize::MAX),
            Footprint::Window { start, k, n } => (start as usize, k as usize, n as usize),
            Footprint::Single(loc) => (loc as usize, 1, usize::MAX),
        };
        (0..len).map(move |j| {
            if n == usize::MAX {
                start + j
            } else {
                (start + j) % n
            }
        })
    }
}

/// How a start state is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StartMode {
    /// Uniformly random operator sequence of the given length from the goal.
    Walk(usize),
    /// Uniformly random permutation in the goal's component.
    Permutation,
}

const UP: OpId = 0;
const DOWN: OpId = 1;
const LEFT: OpId = 2;
const RIGHT: OpId = 3;

impl Puzzle {
    pub fn sliding_tile(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 || width * height < 2 || width * height > MAX_TILES {
            return Err(Error::InvalidParameter(format!(
                "sliding tile {width}x{height}: need 2 <= w*h <= {MAX_TILES}"
            )));
        }
        Ok(Puzzle::SlidingTile {
            width: width as u8,
            height: height as u8,
        })
    }

    pub fn pancake(n: usize) -> Result<Self> {
        if !(2..=MAX_TILES).contains(&n) {
            return Err(Error::InvalidParameter(format!(
                "pancake n={n}: need 2 <= n <= {MAX_TILES}"
            )));
        }
        Ok(Puzzle::Pancake { n: n as u8 })
    }

    pub fn topspin(n: usize, k: usize) -> Result<Self> {
        if k < 2 || k > n || n > MAX_TILES {
            return Err(Error::InvalidParameter(format!(
                "topspin ({n},{k}): need 2 <= k <= n <= {MAX_TILES}"
            )));
        }
        Ok(Puzzle::TopSpin {
            n: n as u8,
            k: k as u8,
        })
    }

    pub fn num_locations(&self) -> usize {
        match *self {
            Puzzle::SlidingTile { width, height } => width as usize * height as usize,
            Puzzle::Pancake { n } | Puzzle::TopSpin { n, .. } => n as usize,
        }
    }

    /// Tile id of the blank, for sliding-tile puzzles.
    pub fn blank(&self) -> Option<u8> {
        match self {
            Puzzle::SlidingTile { .. } => Some(self.num_locations() as u8 - 1),
            _ => None,
        }
    }

    /// Ids of the real (non-blank) tiles.
    pub fn tiles(&self) -> impl Iterator<Item = u8> {
        let n = self.num_locations() as u8 - u8::from(self.blank().is_some());
        0..n
    }

    pub fn num_ops(&self) -> usize {
        match *self {
            Puzzle::SlidingTile { .. } => 4,
            Puzzle::Pancake { n } => n as usize - 1,
            Puzzle::TopSpin { n, .. } => n as usize,
        }
    }

    /// Whether optimal solution cost has the same parity as every additive
    /// heuristic that counts single-tile moves over a full tile partition.
    pub fn has_parity_property(&self) -> bool {
        matches!(self, Puzzle::SlidingTile { .. })
    }

    pub fn label(&self) -> String {
        match *self {
            Puzzle::SlidingTile { width, height } => format!("tile{width}x{height}"),
            Puzzle::Pancake { n } => format!("pancake{n}"),
            Puzzle::TopSpin { n, k } => format!("topspin{n}-{k}"),
        }
    }

    pub fn goal(&self) -> State {
        let n = self.num_locations();
        match self {
            Puzzle::SlidingTile { .. } => {
                let mut s = State::identity(n);
                s[0] = n as u8 - 1;
                for loc in 1..n {
                    s[loc] = loc as u8 - 1;
                }
                s
            }
            _ => State::identity(n),
        }
    }

    pub fn check_state(&self, s: &State) -> Result<()> {
        let n = self.num_locations();
        if s.len() != n {
            return Err(Error::InvalidState(format!(
                "expected {n} tiles, got {}",
                s.len()
            )));
        }
        let mut seen = 0u64;
        for &t in s.iter() {
            if t as usize >= n || seen & (1 << t) != 0 {
                return Err(Error::InvalidState(format!(
                    "{s} is not a permutation of 0..{n}"
                )));
            }
            seen |= 1 << t;
        }
        if matches!(self, Puzzle::TopSpin { .. }) && s[0] != 0 {
            return Err(Error::InvalidState(format!(
                "topspin state {s} is not canonical (tile 0 must be first)"
            )));
        }
        Ok(())
    }

    /// Applies `op` in place without re-canonicalizing TopSpin states.
    /// Returns the operator's footprint, or `None` if it is not applicable.
    /// `blank` is the value treated as the blank for sliding-tile moves.
    pub(crate) fn permute(&self, s: &mut [u8], op: OpId, blank: u8) -> Option<Footprint> {
        match *self {
            Puzzle::SlidingTile { width, height } => {
                let (w, h) = (width as usize, height as usize);
                let b = s.iter().position(|&t| t == blank)?;
                let (r, c) = (b / w, b % w);
                let target = match op {
                    UP if r > 0 => b - w,
                    DOWN if r + 1 < h => b + w,
                    LEFT if c > 0 => b - 1,
                    RIGHT if c + 1 < w => b + 1,
                    _ => return None,
                };
                s.swap(b, target);
                Some(Footprint::Single(target as u8))
            }
            Puzzle::Pancake { n } => {
                let len = op as usize + 2;
                if len > n as usize {
                    return None;
                }
                s[..len].reverse();
                Some(Footprint::Prefix(len as u8))
            }
            Puzzle::TopSpin { n, k } => {
                if op as usize >= n as usize {
                    return None;
                }
                reverse_window(s, op as usize, k as usize);
                Some(Footprint::Window {
                    start: op as u8,
                    k,
                    n,
                })
            }
        }
    }

    /// Operator leading back to `s` from the state reached by applying `op`
    /// to `s`. `s` must be canonical (reference tile at location 0).
    pub(crate) fn reverse_op(&self, op: OpId) -> OpId {
        match *self {
            Puzzle::SlidingTile { .. } => op ^ 1,
            Puzzle::Pancake { .. } => op,
            Puzzle::TopSpin { n, k } => {
                let (n, k, a) = (n as u32, k as u32, op);
                if a == 0 || a + k > n {
                    (2 * n - a - k + 1) % n
                } else {
                    a
                }
            }
        }
    }

    pub fn apply(&self, s: &State, op: OpId) -> Result<State> {
        let mut t = *s;
        let blank = self.blank().unwrap_or(u8::MAX);
        self.permute(&mut t, op, blank)
            .ok_or(Error::InvalidOperator { op: op as usize })?;
        if matches!(self, Puzzle::TopSpin { .. }) {
            rotate_to_front(&mut t, 0);
        }
        Ok(t)
    }

    /// Whether the goal is reachable from `s`, when cheaply decidable.
    pub fn is_solvable(&self, s: &State) -> Option<bool> {
        match *self {
            Puzzle::SlidingTile { width, .. } => {
                let w = width as usize;
                let goal = self.goal();
                let mut goal_pos = [0usize; MAX_TILES];
                for (loc, &t) in goal.iter().enumerate() {
                    goal_pos[t as usize] = loc;
                }
                let perm: Vec<usize> = s.iter().map(|&t| goal_pos[t as usize]).collect();
                let blank = self.blank().unwrap();
                let b = s.iter().position(|&t| t == blank)?;
                let g = goal_pos[blank as usize];
                let dist = (b / w).abs_diff(g / w) + (b % w).abs_diff(g % w);
                Some(permutation_parity(&perm) == dist % 2)
            }
            Puzzle::Pancake { .. } => Some(true),
            Puzzle::TopSpin { .. } => None,
        }
    }

    pub fn random_start<R: Rng>(&self, mode: StartMode, rng: &mut R) -> Result<State> {
        match mode {
            StartMode::Walk(len) => {
                let mut s = self.goal();
                let mut ops = Vec::with_capacity(4);
                for _ in 0..len {
                    ops.clear();
                    self.for_each_successor(&s, |op, _, _| ops.push(op));
                    let op = *ops.choose(rng).expect("every puzzle state has a successor");
                    s = self.apply(&s, op)?;
                }
                Ok(s)
            }
            StartMode::Permutation => match self {
                Puzzle::TopSpin { .. } => Err(Error::UnsupportedMode(
                    "permutation starts are not all reachable in TopSpin; use a random walk".into(),
                )),
                _ => loop {
                    let mut s = self.goal();
                    s.shuffle(rng);
                    if self.is_solvable(&s) == Some(true) {
                        return Ok(s);
                    }
                },
            },
        }
    }

    /// `count` starts drawn from a single seeded stream.
    pub fn random_starts(&self, mode: StartMode, count: usize, seed: u64) -> Result<Vec<State>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| self.random_start(mode, &mut rng))
            .collect()
    }

    /// Parses a comma-separated literal; `_` names the sliding-tile blank.
    /// TopSpin literals may be given in any rotation.
    pub fn parse_state(&self, literal: &str) -> Result<State> {
        let mut tiles = Vec::new();
        for part in literal.split(',') {
            let part = part.trim();
            let t = if part == "_" {
                self.blank().ok_or_else(|| {
                    Error::InvalidState("`_` is only valid for sliding tile".into())
                })?
            } else {
                part.parse::<u8>()
                    .map_err(|_| Error::InvalidState(format!("`{part}` is not a tile id")))?
            };
            tiles.push(t);
        }
        let mut s = State::from_slice(&tiles)?;
        if matches!(self, Puzzle::TopSpin { .. }) && s.contains(&0) {
            rotate_to_front(&mut s, 0);
        }
        self.check_state(&s)?;
        Ok(s)
    }

    pub fn format_state(&self, s: &State) -> String {
        let blank = self.blank();
        s.iter()
            .map(|&t| {
                if Some(t) == blank {
                    "_".to_string()
                } else {
                    t.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join(",")
    }
}

impl fmt::Display for Puzzle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl StateSpace for Puzzle {
    type State = State;

    fn goal(&self) -> State {
        Puzzle::goal(self)
    }

    fn check_state(&self, s: &State) -> Result<()> {
        Puzzle::check_state(self, s)
    }

    #[inline]
    fn for_each_successor<F: FnMut(OpId, State, Cost)>(&self, s: &State, mut f: F) {
        let blank = self.blank().unwrap_or(u8::MAX);
        let topspin = matches!(self, Puzzle::TopSpin { .. });
        for op in 0..self.num_ops() as OpId {
            let mut t = *s;
            if self.permute(&mut t, op, blank).is_some() {
                if topspin {
                    rotate_to_front(&mut t, 0);
                }
                f(op, t, 1);
            }
        }
    }

    /// TopSpin windows that are disjoint and avoid location 0 commute
    /// without moving the reference tile, so only ascending order is kept.
    /// Between two moves of the reference tile the frame is fixed, and
    /// sorting such runs turns any path into a kept one of equal cost.
    #[inline]
    fn may_follow(&self, prev: OpId, op: OpId) -> bool {
        match *self {
            Puzzle::TopSpin { n, k } => {
                let last = (n - k) as OpId;
                let fixed = |a: OpId| (1..=last).contains(&a);
                !(fixed(prev) && fixed(op) && op + k as OpId <= prev)
            }
            _ => true,
        }
    }

    fn for_each_predecessor<F: FnMut(OpId, State, Cost)>(&self, s: &State, mut f: F) {
        // Every operator has an inverse operator, so predecessors are the
        // successors reached through the reverse operator.
        self.for_each_successor(s, |op, t, c| f(self.reverse_op(op), t, c));
    }
}

pub(crate) fn reverse_window(s: &mut [u8], start: usize, k: usize) {
    let n = s.len();
    let (mut i, mut j) = (start, start + k - 1);
    while i < j {
        s.swap(i % n, j % n);
        i += 1;
        j -= 1;
    }
}

/// Rotates `s` left so that `value` sits at location 0.
#[inline]
pub(crate) fn rotate_to_front(s: &mut [u8], value: u8) {
    if let Some(p) = s.iter().position(|&t| t == value) {
        s.rotate_left(p);
    }
}

/// 0 for even permutations, 1 for odd.
fn permutation_parity(perm: &[usize]) -> usize {
    let mut seen = vec![false; perm.len()];
    let mut cycles = 0;
    for i in 0..perm.len() {
        if !seen[i] {
            cycles += 1;
            let mut j = i;
            while !seen[j] {
                seen[j] = true;
                j = perm[j];
            }
        }
    }
    (perm.len() - cycles) % 2
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::{HashSet, VecDeque};

    fn st(t: &[u8]) -> State {
        State::from_slice(t).unwrap()
    }

    fn reachable(p: &Puzzle) -> HashSet<State> {
        let mut seen = HashSet::from([p.goal()]);
        let mut q = VecDeque::from([p.goal()]);
        while let Some(s) = q.pop_front() {
            p.for_each_successor(&s, |_, t, _| {
                if seen.insert(t) {
                    q.push_back(t);
                }
            });
        }
        seen
    }

    #[test]
    fn pancake4_successors() {
        let p = Puzzle::pancake(4).unwrap();
        let succ = p.successors(&st(&[0, 1, 2, 3])).unwrap();
        let to: Vec<State> = succ.iter().map(|t| t.to).collect();
        assert_eq!(
            to,
            vec![st(&[1, 0, 2, 3]), st(&[2, 1, 0, 3]), st(&[3, 2, 1, 0])]
        );
        assert!(succ.iter().all(|t| t.cost == 1));
    }

    #[test]
    fn pancake_predecessor_via_two_prefix() {
        let p = Puzzle::pancake(4).unwrap();
        let pred = p.predecessors(&st(&[1, 0, 2, 3])).unwrap();
        assert!(pred
            .iter()
            .any(|t| t.from == st(&[0, 1, 2, 3]) && t.op == 0 && t.cost == 1));
    }

    #[test]
    fn pancake_full_reversal_sorts_reversed_stack() {
        let p = Puzzle::pancake(5).unwrap();
        assert_eq!(p.apply(&st(&[4, 3, 2, 1, 0]), 3).unwrap(), p.goal());
    }

    #[test]
    fn pancake_operators_are_involutions() {
        let p = Puzzle::pancake(6).unwrap();
        for s in reachable(&p) {
            for op in 0..5 {
                assert_eq!(p.apply(&p.apply(&s, op).unwrap(), op).unwrap(), s);
            }
        }
    }

    #[test]
    fn topspin_single_move_instance() {
        let p = Puzzle::topspin(7, 4).unwrap();
        let s = st(&[0, 4, 5, 6, 3, 2, 1]);
        // the window holding 3,2,1 and then 0
        assert_eq!(p.apply(&s, 4).unwrap(), p.goal());
        assert!(p.successors(&s).unwrap().iter().any(|t| t.to == p.goal()));
    }

    #[test]
    fn topspin_goal_has_seven_predecessors() {
        let p = Puzzle::topspin(7, 4).unwrap();
        let preds: HashSet<State> = p
            .predecessors(&p.goal())
            .unwrap()
            .into_iter()
            .map(|t| t.from)
            .collect();
        assert_eq!(preds.len(), 7);
    }

    #[test]
    fn reverse_op_undoes_each_operator() {
        for p in [
            Puzzle::topspin(7, 4).unwrap(),
            Puzzle::topspin(8, 4).unwrap(),
            Puzzle::topspin(6, 3).unwrap(),
            Puzzle::pancake(5).unwrap(),
            Puzzle::sliding_tile(2, 3).unwrap(),
        ] {
            for s in reachable(&p) {
                p.for_each_successor(&s, |op, t, _| {
                    assert_eq!(p.apply(&t, p.reverse_op(op)).unwrap(), s, "{p} op {op}");
                });
            }
        }
    }

    #[test]
    fn duality_holds_exhaustively() {
        for p in [
            Puzzle::pancake(5).unwrap(),
            Puzzle::pancake(6).unwrap(),
            Puzzle::topspin(7, 4).unwrap(),
            Puzzle::sliding_tile(2, 3).unwrap(),
        ] {
            let states = reachable(&p);
            if let Puzzle::Pancake { n } = p {
                assert_eq!(states.len(), (1..=n as usize).product::<usize>());
            }
            for s in &states {
                for t in p.successors(s).unwrap() {
                    let back = p.predecessors(&t.to).unwrap();
                    assert!(back
                        .iter()
                        .any(|b| b.from == *s && b.op == t.op && b.cost == t.cost));
                }
                for t in p.predecessors(s).unwrap() {
                    let fwd = p.successors(&t.from).unwrap();
                    assert!(fwd.iter().any(|f| f.to == *s && f.op == t.op));
                }
            }
        }
    }

    #[test]
    fn sliding_goal_has_two_moves_and_moves_are_reversible() {
        let p = Puzzle::sliding_tile(3, 3).unwrap();
        let g = p.goal();
        assert_eq!(p.format_state(&g), "_,0,1,2,3,4,5,6,7");
        let succ = p.successors(&g).unwrap();
        assert_eq!(succ.len(), 2);
        for t in succ {
            assert_eq!(p.apply(&t.to, t.op ^ 1).unwrap(), g);
        }
    }

    #[test]
    fn sliding_solvability_matches_bfs() {
        let p = Puzzle::sliding_tile(2, 3).unwrap();
        let reach = reachable(&p);
        assert_eq!(reach.len(), 360);
        let mut all = vec![p.goal()];
        // enumerate all 720 arrangements
        fn perms(prefix: &mut Vec<u8>, rest: &mut Vec<u8>, out: &mut Vec<State>) {
            if rest.is_empty() {
                out.push(State::from_slice(prefix).unwrap());
                return;
            }
            for i in 0..rest.len() {
                let t = rest.remove(i);
                prefix.push(t);
                perms(prefix, rest, out);
                prefix.pop();
                rest.insert(i, t);
            }
        }
        all.clear();
        perms(&mut Vec::new(), &mut (0..6).collect(), &mut all);
        assert_eq!(all.len(), 720);
        for s in all {
            assert_eq!(p.is_solvable(&s), Some(reach.contains(&s)), "{s}");
        }
    }

    #[test]
    fn random_starts() {
        let p = Puzzle::pancake(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        assert_eq!(
            p.random_start(StartMode::Walk(0), &mut rng).unwrap(),
            p.goal()
        );
        let one = p.random_start(StartMode::Walk(1), &mut rng).unwrap();
        assert!(p.successors(&p.goal()).unwrap().iter().any(|t| t.to == one));

        let a = p.random_starts(StartMode::Permutation, 20, 3).unwrap();
        assert_eq!(a, p.random_starts(StartMode::Permutation, 20, 3).unwrap());

        let ts = Puzzle::topspin(7, 4).unwrap();
        assert!(matches!(
            ts.random_start(StartMode::Permutation, &mut rng),
            Err(Error::UnsupportedMode(_))
        ));

        let tile = Puzzle::sliding_tile(3, 3).unwrap();
        for s in tile.random_starts(StartMode::Permutation, 50, 1).unwrap() {
            assert_eq!(tile.is_solvable(&s), Some(true));
        }
    }

    #[test]
    fn state_literals() {
        let ts = Puzzle::topspin(7, 4).unwrap();
        assert_eq!(ts.parse_state("3,4,5,6,0,1,2").unwrap(), ts.goal());
        let tile = Puzzle::sliding_tile(3, 3).unwrap();
        assert_eq!(tile.parse_state("_,0,1,2,3,4,5,6,7").unwrap(), tile.goal());
        assert!(tile.parse_state("0,0,1,2,3,4,5,6,7").is_err());
        assert!(Puzzle::pancake(4).unwrap().parse_state("0,1,_,2").is_err());
    }

    #[test]
    fn parameter_bounds() {
        assert!(Puzzle::pancake(1).is_err());
        assert!(Puzzle::topspin(4, 5).is_err());
        assert!(Puzzle::topspin(7, 1).is_err());
        assert!(Puzzle::sliding_tile(1, 1).is_err());
        assert!(Puzzle::sliding_tile(6, 6).is_err());
    }

    #[test]
    fn out_of_range_operator() {
        let p = Puzzle::pancake(4).unwrap();
        assert_eq!(p.apply(&p.goal(), 3), Err(Error::InvalidOperator { op: 3 }));
        let t = Puzzle::sliding_tile(3, 3).unwrap();
        assert!(t.apply(&t.goal(), UP).is_err());
    }
}
