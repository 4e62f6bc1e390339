//! Additive state-space abstractions and two-cost pattern databases for
//! permutation puzzles (sliding tile, pancake, TopSpin), with IDA* search
//! and executable checks of the admissibility results behind them.
//!
//! Costs are exact integers throughout. Additive abstractions split each
//! original edge cost between a primary and a residual part; tables store
//! both in units of `1/scale` so fractional splits never round.

pub mod abstraction;
pub mod domains;
pub mod error;
pub mod graph;
pub mod heuristics;
pub mod pdb;
pub mod search;
pub mod space;
pub mod verify;
pub mod word;

pub use abstraction::{
    check_conditions, AbstractionSpec, BlankMode, ConditionReport, CostScheme, Orientation,
    Reference, TilePartition, DONT_CARE,
};
pub use domains::{Puzzle, StartMode};
pub use error::{Error, Result};
pub use graph::ExplicitGraph;
pub use pdb::{BuildOptions, Entry, Ranker, TwoCostPdb};
pub use space::{path_cost, Cost, OpId, Path, State, StateSpace, Transition, INFINITE_COST};
pub use word::PdbWord;

/// Table with 32-bit entries, the default width.
pub type Pdb = TwoCostPdb<u32>;
pub type Pdb16 = TwoCostPdb<u16>;
pub type Pdb64 = TwoCostPdb<u64>;
