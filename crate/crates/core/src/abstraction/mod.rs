//! Domain abstractions over tile values and the primary/residual cost
//! schemes attached to their transitions.
//!
//! An abstraction keeps the tiles of one partition group (its distinguished
//! tiles) and replaces every other tile by [`DONT_CARE`]. Abstract states are
//! arrays over locations, like concrete states. All costs are integers in
//! scaled units: an original edge of cost 1 costs `scale` in the abstract
//! space, so fractional splits stay exact.
//!
//! TopSpin abstractions are rotation invariant: an abstract state is rotated
//! so that the smallest distinguished tile (the anchor) sits at location 0.
//! For the group holding tile 0 this is exactly the concrete canonical form.

mod conditions;

pub use conditions::{check_conditions, ConditionReport, Witness};

use crate::domains::{rotate_to_front, Footprint, Puzzle};
use crate::error::{Error, Result};
use crate::space::{Cost, OpId, State, MAX_TILES};
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Abstract value of every non-distinguished tile.
pub const DONT_CARE: u8 = u8::MAX;

/// Disjoint groups of tile ids. An empty group distinguishes no tile.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TilePartition {
    groups: Vec<Vec<u8>>,
}

impl TilePartition {
    pub fn new(groups: Vec<Vec<u8>>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::InvalidPartition("no groups".into()));
        }
        let mut seen = 0u64;
        for g in &groups {
            for &t in g {
                if t as usize >= MAX_TILES {
                    return Err(Error::InvalidPartition(format!("tile {t} out of range")));
                }
                if seen & (1 << t) != 0 {
                    return Err(Error::InvalidPartition(format!(
                        "tile {t} appears in more than one group"
                    )));
                }
                seen |= 1 << t;
            }
        }
        Ok(TilePartition { groups })
    }

    /// Parses `a1-a2-...-aM` (tiles `0..a1` in the first group, the next
    /// `a2` tiles in the second, ...) or explicit groups `0,2,4/1,3,5`.
    pub fn parse(notation: &str) -> Result<Self> {
        let notation = notation.trim();
        if notation.contains('/') || notation.contains(',') {
            let groups = notation
                .split('/')
                .map(|g| {
                    g.split(',')
                        .map(|t| {
                            t.trim().parse::<u8>().map_err(|_| {
                                Error::InvalidPartition(format!("`{t}` is not a tile id"))
                            })
                        })
                        .collect::<Result<Vec<u8>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            return Self::new(groups);
        }
        let mut groups = Vec::new();
        let mut next = 0usize;
        for part in notation.split('-') {
            let size: usize = part
                .trim()
                .parse()
                .map_err(|_| Error::InvalidPartition(format!("`{part}` is not a group size")))?;
            if next + size > MAX_TILES {
                return Err(Error::InvalidPartition(format!(
                    "{notation} has too many tiles"
                )));
            }
            groups.push((next..next + size).map(|t| t as u8).collect());
            next += size;
        }
        Self::new(groups)
    }

    pub fn groups(&self) -> &[Vec<u8>] {
        &self.groups
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Whether every group is a run of consecutive ids and together they
    /// cover `0..total` in order.
    pub fn is_contiguous(&self) -> bool {
        let mut next = 0u8;
        for g in &self.groups {
            for &t in g {
                if t != next {
                    return false;
                }
                next += 1;
            }
        }
        true
    }

    pub fn covers(&self, tiles: impl IntoIterator<Item = u8>) -> bool {
        let mask: u64 = self.groups.iter().flatten().fold(0, |m, &t| m | 1 << t);
        tiles.into_iter().all(|t| mask & (1 << t) != 0)
    }

    pub fn notation(&self) -> String {
        if self.is_contiguous() {
            self.groups
                .iter()
                .map(|g| g.len().to_string())
                .collect::<Vec<_>>()
                .join("-")
        } else {
            self.groups
                .iter()
                .map(|g| {
                    g.iter()
                        .map(|t| t.to_string())
                        .collect::<Vec<_>>()
                        .join(",")
                })
                .collect::<Vec<_>>()
                .join("/")
        }
    }
}

impl fmt::Display for TilePartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.notation())
    }
}

/// Which tile a location-based cost looks at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    /// The tile moved into the reference location.
    Into,
    /// The tile moved out of the reference location.
    OutOf,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Reference {
    /// Fixed locations.
    Locations(Vec<u8>),
    /// The leftmost location changed by each operator (location 0 for the
    /// pancake, the window start for TopSpin).
    OperatorStart,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CostScheme {
    /// Every abstract edge costs the full original edge cost; no residual.
    FullCost,
    /// Cost divided in proportion to the distinguished tiles moved.
    CostSplit,
    /// Full cost when a distinguished tile enters (or leaves) a reference
    /// location, zero otherwise.
    LocationBased {
        reference: Reference,
        orientation: Orientation,
    },
    /// Full cost when the single tile moved is distinguished.
    ZeroOne,
}

impl CostScheme {
    /// Location-based costs with the leftmost location as the only reference.
    pub fn leftmost() -> Self {
        CostScheme::LocationBased {
            reference: Reference::Locations(vec![0]),
            orientation: Orientation::Into,
        }
    }

    /// Location-based costs with the reference the domain supports: the
    /// leftmost location, or the operator's first location for TopSpin.
    pub fn location_based_for(puzzle: Puzzle) -> Self {
        match puzzle {
            Puzzle::TopSpin { .. } => CostScheme::LocationBased {
                reference: Reference::OperatorStart,
                orientation: Orientation::Into,
            },
            _ => Self::leftmost(),
        }
    }

    pub fn is_additive(&self) -> bool {
        !matches!(self, CostScheme::FullCost)
    }

    pub fn label(&self) -> &'static str {
        match self {
            CostScheme::FullCost => "fullcost",
            CostScheme::CostSplit => "costsplit",
            CostScheme::LocationBased { .. } => "location-based",
            CostScheme::ZeroOne => "zero-one",
        }
    }
}

impl fmt::Display for CostScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Whether sliding-tile abstract states keep the blank's location.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlankMode {
    Tracked,
    /// Only the distinguished tiles are kept; a distinguished tile may move
    /// into any adjacent location not holding another distinguished tile.
    Untracked,
}

/// One abstraction: a puzzle, the partition group it distinguishes and the
/// cost scheme on its transitions.
#[derive(Clone, Debug)]
pub struct AbstractionSpec {
    puzzle: Puzzle,
    partition: TilePartition,
    group: usize,
    scheme: CostScheme,
    blank: BlankMode,
    value_map: [u8; MAX_TILES],
    distinguished: u32,
    anchor: Option<u8>,
    scale: Cost,
}

impl PartialEq for AbstractionSpec {
    fn eq(&self, other: &Self) -> bool {
        self.puzzle == other.puzzle
            && self.partition == other.partition
            && self.group == other.group
            && self.scheme == other.scheme
            && self.blank == other.blank
    }
}

impl Eq for AbstractionSpec {}

impl AbstractionSpec {
    pub fn new(
        puzzle: Puzzle,
        partition: TilePartition,
        group: usize,
        scheme: CostScheme,
        blank: BlankMode,
    ) -> Result<Self> {
        let tiles: Vec<u8> = partition
            .groups()
            .get(group)
            .ok_or_else(|| Error::InvalidPartition(format!("no group {group}")))?
            .clone();
        let real_tiles = puzzle.tiles().count();
        for g in partition.groups() {
            if let Some(&t) = g.iter().find(|&&t| t as usize >= real_tiles) {
                return Err(Error::InvalidPartition(format!(
                    "tile {t} is not a tile of {puzzle}"
                )));
            }
        }
        let is_sliding = matches!(puzzle, Puzzle::SlidingTile { .. });
        match (&scheme, &puzzle) {
            (CostScheme::ZeroOne, p) if !matches!(p, Puzzle::SlidingTile { .. }) => {
                return Err(Error::UnsupportedScheme(format!(
                    "zero-one costs need single-tile operators; {p} operators move several tiles"
                )))
            }
            (CostScheme::LocationBased { reference, .. }, p) => match reference {
                Reference::Locations(locs) => {
                    if locs.is_empty() {
                        return Err(Error::UnsupportedScheme("no reference locations".into()));
                    }
                    if let Some(&l) = locs.iter().find(|&&l| l as usize >= p.num_locations()) {
                        return Err(Error::UnsupportedScheme(format!(
                            "reference location {l} out of range"
                        )));
                    }
                    if matches!(p, Puzzle::TopSpin { .. }) {
                        return Err(Error::UnsupportedScheme(
                            "fixed reference locations are not rotation invariant; use the operator start"
                                .into(),
                        ));
                    }
                }
                Reference::OperatorStart => {}
            },
            _ => {}
        }
        if blank == BlankMode::Untracked && !(is_sliding && scheme == CostScheme::ZeroOne) {
            return Err(Error::UnsupportedScheme(
                "an untracked blank is only supported for sliding-tile zero-one abstractions"
                    .into(),
            ));
        }

        let mut value_map = [DONT_CARE; MAX_TILES];
        let mut distinguished = 0u32;
        for &t in &tiles {
            value_map[t as usize] = t;
            distinguished |= 1 << t;
        }
        if let (Some(b), BlankMode::Tracked) = (puzzle.blank(), blank) {
            value_map[b as usize] = b;
        }
        let anchor = match puzzle {
            Puzzle::TopSpin { .. } => tiles.iter().copied().min(),
            _ => None,
        };
        let scale = match scheme {
            CostScheme::CostSplit => match puzzle {
                Puzzle::Pancake { n } => (2..=n as u64).fold(1, |acc, b| acc.lcm(&b)),
                Puzzle::TopSpin { k, .. } => k as u64,
                Puzzle::SlidingTile { .. } => 1,
            },
            _ => 1,
        };
        Ok(AbstractionSpec {
            puzzle,
            partition,
            group,
            scheme,
            blank,
            value_map,
            distinguished,
            anchor,
            scale,
        })
    }

    /// One spec per group, blank tracked.
    pub fn for_partition(
        puzzle: Puzzle,
        partition: &TilePartition,
        scheme: &CostScheme,
    ) -> Result<Vec<Self>> {
        (0..partition.len())
            .map(|g| {
                Self::new(
                    puzzle,
                    partition.clone(),
                    g,
                    scheme.clone(),
                    BlankMode::Tracked,
                )
            })
            .collect()
    }

    pub fn puzzle(&self) -> Puzzle {
        self.puzzle
    }

    pub fn partition(&self) -> &TilePartition {
        &self.partition
    }

    pub fn group(&self) -> usize {
        self.group
    }

    pub fn tiles(&self) -> &[u8] {
        &self.partition.groups()[self.group]
    }

    pub fn scheme(&self) -> &CostScheme {
        &self.scheme
    }

    pub fn blank_mode(&self) -> BlankMode {
        self.blank
    }

    /// Whether the abstract state keeps the blank (sliding tile only).
    pub fn tracks_blank(&self) -> bool {
        self.puzzle.blank().is_some() && self.blank == BlankMode::Tracked
    }

    /// Anchor tile for rotation-invariant (TopSpin) abstractions.
    pub fn anchor(&self) -> Option<u8> {
        self.anchor
    }

    /// Abstract cost of an original unit-cost edge.
    pub fn scale(&self) -> Cost {
        self.scale
    }

    /// Same abstraction with a different group of the same partition.
    pub fn with_group(&self, group: usize) -> Result<Self> {
        Self::new(
            self.puzzle,
            self.partition.clone(),
            group,
            self.scheme.clone(),
            self.blank,
        )
    }

    pub fn label(&self) -> String {
        format!(
            "{} {} #{} {}",
            self.puzzle,
            self.partition,
            self.group + 1,
            self.scheme
        )
    }

    #[inline]
    pub fn is_distinguished(&self, v: u8) -> bool {
        (v as usize) < MAX_TILES && self.distinguished & (1 << v) != 0
    }

    fn map_values(&self, s: &State) -> State {
        let mut a = *s;
        for t in a.iter_mut() {
            *t = self.value_map[*t as usize];
        }
        a
    }

    fn normalize(&self, a: &mut State) {
        if let Some(anchor) = self.anchor {
            rotate_to_front(a, anchor);
        }
    }

    /// Image of a concrete state.
    pub fn abstract_state(&self, s: &State) -> State {
        let mut a = self.map_values(s);
        self.normalize(&mut a);
        a
    }

    pub fn abstract_goal(&self) -> State {
        self.abstract_state(&self.puzzle.goal())
    }

    pub fn num_abstract_ops(&self) -> usize {
        match self.blank {
            BlankMode::Untracked => self.puzzle.num_locations() * 4,
            BlankMode::Tracked => self.puzzle.num_ops(),
        }
    }

    /// `(C, R)` of an original transition given the abstract values before
    /// and after it (both unrotated) and the operator footprint.
    fn costs(&self, before: &[u8], after: &[u8], fp: Footprint) -> (Cost, Cost) {
        let scale = self.scale;
        let primary = match &self.scheme {
            CostScheme::FullCost => return (scale, 0),
            CostScheme::CostSplit => {
                let moved = fp.len() as Cost;
                let mine = fp
                    .locations()
                    .filter(|&p| self.is_distinguished(before[p]))
                    .count() as Cost;
                scale * mine / moved
            }
            CostScheme::LocationBased {
                reference,
                orientation,
            } => {
                let mut c = 0;
                let mut charge = |r: usize| {
                    let (b, a) = (before[r], after[r]);
                    let tile = match orientation {
                        Orientation::Into => a,
                        Orientation::OutOf => b,
                    };
                    if b != a && self.is_distinguished(tile) {
                        c += scale;
                    }
                };
                match reference {
                    Reference::Locations(locs) => locs.iter().for_each(|&r| charge(r as usize)),
                    Reference::OperatorStart => charge(fp.first()),
                }
                c.min(scale)
            }
            CostScheme::ZeroOne => {
                if self.is_distinguished(before[fp.first()]) {
                    scale
                } else {
                    0
                }
            }
        };
        (primary, scale - primary)
    }

    /// Applies abstract operator `op`; `None` if it is not applicable.
    /// Returns the successor and the `(C, R)` of the transition.
    #[inline]
    pub fn abstract_step(&self, a: &State, op: OpId) -> Option<(State, Cost, Cost)> {
        let mut next = *a;
        let fp = match self.blank {
            BlankMode::Tracked => {
                let blank = self.puzzle.blank().unwrap_or(DONT_CARE);
                self.puzzle.permute(&mut next, op, blank)?
            }
            BlankMode::Untracked => self.move_distinguished(&mut next, op)?,
        };
        let (c, r) = self.costs(a, &next, fp);
        self.normalize(&mut next);
        Some((next, c, r))
    }

    fn move_distinguished(&self, a: &mut State, op: OpId) -> Option<Footprint> {
        let Puzzle::SlidingTile { width, height } = self.puzzle else {
            return None;
        };
        let (w, h) = (width as usize, height as usize);
        let (loc, dir) = (op as usize / 4, op % 4);
        if loc >= w * h || !self.is_distinguished(a[loc]) {
            return None;
        }
        let (r, c) = (loc / w, loc % w);
        let target = match dir {
            0 if r > 0 => loc - w,
            1 if r + 1 < h => loc + w,
            2 if c > 0 => loc - 1,
            3 if c + 1 < w => loc + 1,
            _ => return None,
        };
        if a[target] != DONT_CARE {
            return None;
        }
        a.swap(loc, target);
        Some(Footprint::Single(loc as u8))
    }

    fn reverse_abstract_op(&self, a: &State, op: OpId, next: &State) -> OpId {
        match self.blank {
            BlankMode::Tracked => self.puzzle.reverse_op(op),
            BlankMode::Untracked => {
                // the moved tile now sits where `a` had a don't-care
                let loc = op as usize / 4;
                let target = (0..next.len())
                    .find(|&p| next[p] == a[loc] && p != loc)
                    .expect("moved tile present");
                (target * 4) as OpId + ((op % 4) ^ 1)
            }
        }
    }

    /// `(C, R)` of abstract operator `op` applied to abstract state `a`.
    pub fn abstract_transition_costs(&self, a: &State, op: OpId) -> Result<(Cost, Cost)> {
        self.abstract_step(a, op)
            .map(|(_, c, r)| (c, r))
            .ok_or(Error::InvalidOperator { op: op as usize })
    }

    pub fn for_each_abstract_successor<F: FnMut(OpId, State, Cost, Cost)>(
        &self,
        a: &State,
        mut f: F,
    ) {
        for op in 0..self.num_abstract_ops() as OpId {
            if let Some((next, c, r)) = self.abstract_step(a, op) {
                f(op, next, c, r);
            }
        }
    }

    /// Calls `f(op, pred, C, R)` for every abstract edge `pred -> a`, where
    /// `op` is applied to `pred`. Parallel edges are reported separately.
    pub fn for_each_abstract_predecessor<F: FnMut(OpId, State, Cost, Cost)>(
        &self,
        a: &State,
        mut f: F,
    ) {
        for op in 0..self.num_abstract_ops() as OpId {
            if let Some((pred, _, _)) = self.abstract_step(a, op) {
                let back = self.reverse_abstract_op(a, op, &pred);
                let (to, c, r) = self
                    .abstract_step(&pred, back)
                    .expect("abstract operators are reversible");
                debug_assert_eq!(&to, a);
                f(back, pred, c, r);
            }
        }
    }

    /// `(C, R)` of the image of the original edge `(s, apply(s, op))`.
    /// Edges whose image is a self-loop in an untracked-blank abstraction
    /// (a don't-care tile moved) cost `(0, scale)`.
    pub fn edge_image_costs(&self, s: &State, op: OpId) -> Result<(Cost, Cost)> {
        let mut after = *s;
        let blank = self.puzzle.blank().unwrap_or(DONT_CARE);
        let fp = self
            .puzzle
            .permute(&mut after, op, blank)
            .ok_or(Error::InvalidOperator { op: op as usize })?;
        let (before, after) = (self.map_values(s), self.map_values(&after));
        if self.blank == BlankMode::Untracked {
            // the moved tile's location before the move is the blank's target
            let c = if self.is_distinguished(before[fp.first()]) {
                self.scale
            } else {
                0
            };
            return Ok((c, self.scale - c));
        }
        Ok(self.costs(&before, &after, fp))
    }

    /// Canonical byte encoding used for table headers and digests.
    pub(crate) fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        match self.puzzle {
            Puzzle::SlidingTile { width, height } => out.extend([0, width, height]),
            Puzzle::Pancake { n } => out.extend([1, n, 0]),
            Puzzle::TopSpin { n, k } => out.extend([2, n, k]),
        }
        out.push(self.partition.len() as u8);
        for g in self.partition.groups() {
            out.push(g.len() as u8);
            out.extend_from_slice(g);
        }
        out.push(self.group as u8);
        match &self.scheme {
            CostScheme::FullCost => out.push(0),
            CostScheme::CostSplit => out.push(1),
            CostScheme::LocationBased {
                reference,
                orientation,
            } => {
                out.push(2);
                out.push(match orientation {
                    Orientation::Into => 0,
                    Orientation::OutOf => 1,
                });
                match reference {
                    Reference::Locations(locs) => {
                        out.push(0);
                        out.push(locs.len() as u8);
                        out.extend_from_slice(locs);
                    }
                    Reference::OperatorStart => out.extend([1, 0]),
                }
            }
            CostScheme::ZeroOne => out.push(3),
        }
        out.push(match self.blank {
            BlankMode::Tracked => 0,
            BlankMode::Untracked => 1,
        });
        out
    }

    /// Inverse of [`encode`](Self::encode); returns the spec and the number
    /// of bytes consumed.
    pub(crate) fn decode(bytes: &[u8]) -> Result<(Self, usize)> {
        let bad = || Error::CorruptPdb("truncated abstraction header".into());
        let mut pos = 0usize;
        let mut next = || -> Result<u8> {
            let b = *bytes.get(pos).ok_or_else(bad)?;
            pos += 1;
            Ok(b)
        };
        let (tag, a, b) = (next()?, next()?, next()?);
        let puzzle = match tag {
            0 => Puzzle::sliding_tile(a as usize, b as usize)?,
            1 => Puzzle::pancake(a as usize)?,
            2 => Puzzle::topspin(a as usize, b as usize)?,
            t => return Err(Error::CorruptPdb(format!("unknown domain tag {t}"))),
        };
        let ngroups = next()?;
        let mut groups = Vec::new();
        for _ in 0..ngroups {
            let len = next()?;
            groups.push((0..len).map(|_| next()).collect::<Result<Vec<u8>>>()?);
        }
        let group = next()? as usize;
        let scheme = match next()? {
            0 => CostScheme::FullCost,
            1 => CostScheme::CostSplit,
            2 => {
                let orientation = match next()? {
                    0 => Orientation::Into,
                    _ => Orientation::OutOf,
                };
                let kind = next()?;
                let len = next()?;
                let locs = (0..len).map(|_| next()).collect::<Result<Vec<u8>>>()?;
                let reference = if kind == 0 {
                    Reference::Locations(locs)
                } else {
                    Reference::OperatorStart
                };
                CostScheme::LocationBased {
                    reference,
                    orientation,
                }
            }
            3 => CostScheme::ZeroOne,
            t => return Err(Error::CorruptPdb(format!("unknown scheme tag {t}"))),
        };
        let blank = match next()? {
            0 => BlankMode::Tracked,
            _ => BlankMode::Untracked,
        };
        let spec = Self::new(puzzle, TilePartition::new(groups)?, group, scheme, blank)?;
        Ok((spec, pos))
    }
}

impl fmt::Display for AbstractionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}
