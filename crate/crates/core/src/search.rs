//! IDA* over any [`StateSpace`], batch solving, and uniform-cost oracles
//! used as ground truth.

use crate::error::{Error, Result};
use crate::heuristics::Combined;
use crate::space::{Cost, OpId, Path, State, StateSpace, Transition, INFINITE_COST};
use crate::word::PdbWord;
use num_rational::Ratio;
use rayon::prelude::*;
use std::cmp::Reverse;
use std::collections::hash_map::Entry as MapEntry;
use std::collections::{BinaryHeap, HashMap};
use std::time::{Duration, Instant};

/// Lower bound on the cost to the goal.
pub trait Heuristic<S>: Sync {
    fn estimate(&self, s: &S) -> Cost;
}

impl<S, F: Fn(&S) -> Cost + Sync> Heuristic<S> for F {
    fn estimate(&self, s: &S) -> Cost {
        self(s)
    }
}

impl<W: PdbWord> Heuristic<State> for Combined<'_, W> {
    #[inline]
    fn estimate(&self, s: &State) -> Cost {
        Combined::estimate(self, s)
    }
}

/// The trivial heuristic.
#[derive(Clone, Copy, Debug, Default)]
pub struct Zero;

impl<S> Heuristic<S> for Zero {
    fn estimate(&self, _: &S) -> Cost {
        0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    /// Maximum number of generated nodes.
    pub node_budget: u64,
    /// Skip successors equal to the parent. Pruned nodes still count as
    /// generated.
    pub parent_pruning: bool,
    /// Skip operator pairs the space reports as redundant
    /// ([`StateSpace::may_follow`]). Pruned nodes still count as generated.
    pub move_pruning: bool,
    pub keep_path: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            node_budget: u64::MAX,
            parent_pruning: true,
            move_pruning: false,
            keep_path: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult<S> {
    pub cost: Cost,
    pub nodes_generated: u64,
    pub nodes_expanded: u64,
    pub iterations: u32,
    pub elapsed: Duration,
    pub path: Option<Path<S>>,
}

struct Ida<'a, P: StateSpace, H> {
    space: &'a P,
    h: &'a H,
    goal: P::State,
    opts: SearchOptions,
    threshold: Cost,
    next: Cost,
    generated: u64,
    expanded: u64,
    edges: Vec<Transition<P::State>>,
    buffers: Vec<Vec<(OpId, P::State, Cost)>>,
}

enum Step {
    Found(Cost),
    Continue,
}

impl<P: StateSpace, H: Heuristic<P::State>> Ida<'_, P, H> {
    /// Whether `s` at depth `g` fits under the threshold; otherwise records
    /// its f-value for the next iteration.
    #[inline]
    fn within(&mut self, s: &P::State, g: Cost) -> bool {
        let f = g.saturating_add(self.h.estimate(s));
        if f > self.threshold {
            self.next = self.next.min(f);
            return false;
        }
        true
    }

    /// Searches below `s`, which is already known to fit the threshold.
    fn dfs(
        &mut self,
        s: &P::State,
        g: Cost,
        parent: Option<(&P::State, OpId)>,
        depth: usize,
    ) -> Result<Step> {
        if *s == self.goal {
            return Ok(Step::Found(g));
        }
        self.expanded += 1;
        if self.buffers.len() <= depth {
            self.buffers.push(Vec::new());
        }
        let mut children = std::mem::take(&mut self.buffers[depth]);
        children.clear();
        self.space
            .for_each_successor(s, |op, t, c| children.push((op, t, c)));
        self.generated += children.len() as u64;
        if self.generated > self.opts.node_budget {
            return Err(Error::BudgetExceeded {
                what: format!("node budget {}", self.opts.node_budget),
                generated: self.generated,
                expanded: self.expanded,
            });
        }
        let mut out = Step::Continue;
        for (op, t, c) in children.iter() {
            if let Some((p, prev)) = parent {
                if self.opts.parent_pruning && p == t {
                    continue;
                }
                if self.opts.move_pruning && !self.space.may_follow(prev, *op) {
                    continue;
                }
            }
            if !self.within(t, g + c) {
                continue;
            }
            if self.opts.keep_path {
                self.edges.push(Transition {
                    op: *op,
                    from: s.clone(),
                    to: t.clone(),
                    cost: *c,
                });
            }
            let step = self.dfs(t, g + c, Some((s, *op)), depth + 1)?;
            if let Step::Found(cost) = step {
                out = Step::Found(cost);
                break;
            }
            if self.opts.keep_path {
                self.edges.pop();
            }
        }
        self.buffers[depth] = children;
        Ok(out)
    }
}

/// Iterative-deepening A*. Each iteration's threshold is the smallest
/// f-value that exceeded the previous one; with an admissible heuristic the
/// returned cost is optimal. Successors are tried in ascending operator
/// order, so counters are deterministic.
pub fn ida_star<P: StateSpace, H: Heuristic<P::State>>(
    space: &P,
    h: &H,
    start: &P::State,
    opts: SearchOptions,
) -> Result<SearchResult<P::State>> {
    space.check_state(start)?;
    let began = Instant::now();
    let mut ida = Ida {
        space,
        h,
        goal: space.goal(),
        opts,
        threshold: h.estimate(start),
        next: INFINITE_COST,
        generated: 0,
        expanded: 0,
        edges: Vec::new(),
        buffers: Vec::new(),
    };
    let mut iterations = 0;
    loop {
        iterations += 1;
        ida.next = INFINITE_COST;
        ida.edges.clear();
        let step = if ida.within(start, 0) {
            ida.dfs(start, 0, None, 0)?
        } else {
            Step::Continue
        };
        match step {
            Step::Found(cost) => {
                let path = opts.keep_path.then(|| Path {
                    start: start.clone(),
                    edges: std::mem::take(&mut ida.edges),
                });
                return Ok(SearchResult {
                    cost,
                    nodes_generated: ida.generated,
                    nodes_expanded: ida.expanded,
                    iterations,
                    elapsed: began.elapsed(),
                    path,
                });
            }
            Step::Continue if ida.next == INFINITE_COST => return Err(Error::Unsolvable),
            Step::Continue => ida.threshold = ida.next,
        }
    }
}

/// Totals over a batch; means are exact ratios over solved instances.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Aggregate {
    pub solved: u64,
    pub failed: u64,
    pub total_cost: u64,
    pub total_generated: u64,
    pub total_expanded: u64,
    pub total_time: Duration,
}

impl Aggregate {
    pub fn mean_cost(&self) -> Option<Ratio<u64>> {
        (self.solved > 0).then(|| Ratio::new(self.total_cost, self.solved))
    }

    pub fn mean_nodes(&self) -> Option<Ratio<u64>> {
        (self.solved > 0).then(|| Ratio::new(self.total_generated, self.solved))
    }

    pub fn mean_time_secs(&self) -> Option<f64> {
        (self.solved > 0).then(|| self.total_time.as_secs_f64() / self.solved as f64)
    }

    /// Mean nodes relative to `baseline`'s mean nodes.
    pub fn nodes_ratio(&self, baseline: &Aggregate) -> Option<Ratio<u128>> {
        let den = baseline.total_generated as u128 * self.solved as u128;
        (den > 0 && self.solved > 0)
            .then(|| Ratio::new(self.total_generated as u128 * baseline.solved as u128, den))
    }
}

#[derive(Clone, Debug)]
pub struct BatchReport<S> {
    /// In input order.
    pub results: Vec<Result<SearchResult<S>>>,
    pub aggregate: Aggregate,
}

/// Solves every start with [`ida_star`], in parallel on the current rayon
/// pool. Failures are kept per instance and counted, not propagated.
pub fn batch_solve<P, H>(
    space: &P,
    h: &H,
    starts: &[P::State],
    opts: SearchOptions,
) -> BatchReport<P::State>
where
    P: StateSpace,
    H: Heuristic<P::State>,
{
    let results: Vec<_> = starts
        .par_iter()
        .map(|s| ida_star(space, h, s, opts))
        .collect();
    let mut aggregate = Aggregate::default();
    for r in &results {
        match r {
            Ok(r) => {
                aggregate.solved += 1;
                aggregate.total_cost += r.cost;
                aggregate.total_generated += r.nodes_generated;
                aggregate.total_expanded += r.nodes_expanded;
                aggregate.total_time += r.elapsed;
            }
            Err(_) => aggregate.failed += 1,
        }
    }
    BatchReport { results, aggregate }
}

/// Optimal cost from `start` to `goal` (the space's goal when `None`) by
/// uniform-cost search, or [`INFINITE_COST`] when unreachable.
pub fn oracle_opt<P: StateSpace>(
    space: &P,
    start: &P::State,
    goal: Option<&P::State>,
    max_states: usize,
) -> Result<Cost> {
    space.check_state(start)?;
    let goal = goal.cloned().unwrap_or_else(|| space.goal());
    let mut dist: HashMap<P::State, Cost> = HashMap::from([(start.clone(), 0)]);
    let mut heap = BinaryHeap::new();
    let mut ids: Vec<P::State> = vec![start.clone()];
    heap.push(Reverse((0 as Cost, 0usize)));
    while let Some(Reverse((d, i))) = heap.pop() {
        let s = ids[i].clone();
        if dist[&s] < d {
            continue;
        }
        if s == goal {
            return Ok(d);
        }
        let mut overflow = false;
        space.for_each_successor(&s, |_, t, c| {
            let nd = d + c;
            match dist.entry(t.clone()) {
                MapEntry::Occupied(mut e) if nd < *e.get() => {
                    e.insert(nd);
                }
                MapEntry::Occupied(_) => return,
                MapEntry::Vacant(e) => {
                    e.insert(nd);
                }
            }
            ids.push(t);
            heap.push(Reverse((nd, ids.len() - 1)));
            overflow |= dist.len() > max_states;
        });
        if overflow {
            return Err(Error::BudgetExceeded {
                what: format!("oracle state budget {max_states}"),
                generated: ids.len() as u64,
                expanded: 0,
            });
        }
    }
    Ok(INFINITE_COST)
}

/// Optimal cost to the goal of every state that can reach it, by
/// uniform-cost search backwards from the goal.
pub fn distances_to_goal<P: StateSpace>(
    space: &P,
    max_states: usize,
) -> Result<HashMap<P::State, Cost>> {
    let goal = space.goal();
    let mut dist: HashMap<P::State, Cost> = HashMap::from([(goal.clone(), 0)]);
    let mut heap = BinaryHeap::new();
    let mut ids = vec![goal];
    heap.push(Reverse((0 as Cost, 0usize)));
    while let Some(Reverse((d, i))) = heap.pop() {
        let s = ids[i].clone();
        if dist[&s] < d {
            continue;
        }
        let mut overflow = false;
        space.for_each_predecessor(&s, |_, t, c| {
            let nd = d + c;
            match dist.entry(t.clone()) {
                MapEntry::Occupied(mut e) if nd < *e.get() => {
                    e.insert(nd);
                }
                MapEntry::Occupied(_) => return,
                MapEntry::Vacant(e) => {
                    e.insert(nd);
                }
            }
            ids.push(t);
            heap.push(Reverse((nd, ids.len() - 1)));
            overflow |= dist.len() > max_states;
        });
        if overflow {
            return Err(Error::BudgetExceeded {
                what: format!("oracle state budget {max_states}"),
                generated: ids.len() as u64,
                expanded: 0,
            });
        }
    }
    Ok(dist)
}
