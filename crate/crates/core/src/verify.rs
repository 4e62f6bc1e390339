//! Executable checks of the admissibility and consistency results for
//! abstraction heuristics, run exhaustively or on sampled states against
//! the uniform-cost oracle.
//!
//! | check    | property                                                         |
//! |----------|------------------------------------------------------------------|
//! | LEMMA-1  | every edge image is an abstract edge with `C_i + R_i <= C`       |
//! | LEMMA-2  | `h_max <= OPT`                                                   |
//! | LEMMA-3  | `h_max(u) <= c(u,v) + h_max(v)` on every edge                    |
//! | LEMMA-4  | `h_add <= OPT`                                                   |
//! | LEMMA-5  | `sum C*(u) <= c(u,v) + sum C*(v)` on every edge                  |
//! | LEMMA-6  | `sum C* >= C*_j + R*_j` for all `j` implies `h_add >= h_max`     |
//! | LEMMA-7  | flagged infeasible implies `sum C* != OPT` and `bumped <= OPT`   |
//! | P1/P2/P3 | edge homomorphism, per-abstraction and summed cost bounds        |
//!
//! Costs in the additive checks are compared in scaled units.

use crate::abstraction::{check_conditions, AbstractionSpec, CostScheme, TilePartition};
use crate::domains::{Puzzle, StartMode};
use crate::error::{Error, Result};
use crate::graph::ExplicitGraph;
use crate::heuristics::PdbHeuristic;
use crate::pdb::{BuildOptions, Ranker, TwoCostPdb};
use crate::search::{distances_to_goal, oracle_opt};
use crate::space::{Cost, State, StateSpace, INFINITE_COST};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

/// Largest number of witnesses kept per report.
const MAX_WITNESSES: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Check {
    Lemma(u8),
    P1,
    P2,
    P3,
}

impl Check {
    pub const ALL: [Check; 10] = [
        Check::Lemma(1),
        Check::Lemma(2),
        Check::Lemma(3),
        Check::Lemma(4),
        Check::Lemma(5),
        Check::Lemma(6),
        Check::Lemma(7),
        Check::P1,
        Check::P2,
        Check::P3,
    ];

    /// Accepts `1`..`7`, `lemma-4`, `P2`, ...
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_uppercase();
        let t = t.strip_prefix("LEMMA-").unwrap_or(&t);
        match t {
            "P1" => Ok(Check::P1),
            "P2" => Ok(Check::P2),
            "P3" => Ok(Check::P3),
            _ => match t.parse::<u8>() {
                Ok(n @ 1..=7) => Ok(Check::Lemma(n)),
                _ => Err(Error::InvalidParameter(format!("unknown check `{s}`"))),
            },
        }
    }

    /// Whether the check is about the sum over abstractions.
    fn needs_additive(self) -> bool {
        matches!(self, Check::Lemma(4..=7) | Check::P3)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Check::Lemma(n) => write!(f, "LEMMA-{n}"),
            Check::P1 => f.write_str("P1"),
            Check::P2 => f.write_str("P2"),
            Check::P3 => f.write_str("P3"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    /// `count` states reached by seeded random walks from the goal.
    Sampled {
        count: usize,
        seed: u64,
    },
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exhaustive => f.write_str("exhaustive"),
            Mode::Sampled { .. } => f.write_str("sampled"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LemmaReport {
    pub check: String,
    pub domain: String,
    pub partition: String,
    pub scheme: String,
    pub mode: String,
    /// States, edges or paths examined.
    pub checked: u64,
    pub violation_count: u64,
    /// Up to twenty witnesses.
    pub violations: Vec<String>,
    /// Observations that are not violations.
    pub notes: Vec<String>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }

    /// `LEMMA-4 pancake6 3-3 costsplit exhaustive 720 OK`
    pub fn line(&self) -> String {
        let verdict = if self.passed() {
            "OK".to_string()
        } else {
            format!("FAIL {}", self.violation_count)
        };
        format!(
            "{} {} {} {} {} {} {verdict}",
            self.check, self.domain, self.partition, self.scheme, self.mode, self.checked
        )
    }
}

impl fmt::Display for LemmaReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.line())
    }
}

#[derive(Default)]
struct Tally {
    checked: u64,
    count: u64,
    witnesses: Vec<String>,
}

impl Tally {
    fn fail(&mut self, w: impl FnOnce() -> String) {
        self.count += 1;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(w());
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.checked += other.checked;
        self.count += other.count;
        let room = MAX_WITNESSES.saturating_sub(self.witnesses.len());
        self.witnesses
            .extend(other.witnesses.into_iter().take(room));
        self
    }
}

/// Tables and states for one domain, partition and scheme.
pub struct Suite {
    puzzle: Puzzle,
    partition: TilePartition,
    scheme: CostScheme,
    mode: Mode,
    specs: Vec<AbstractionSpec>,
    additive: PdbHeuristic<u32>,
    full: PdbHeuristic<u32>,
    /// Checked states with their optimal cost, or `INFINITE_COST` when the
    /// oracle was not consulted.
    states: Vec<(State, Cost)>,
    max_states: usize,
}

impl Suite {
    pub fn new(
        puzzle: Puzzle,
        partition: &TilePartition,
        scheme: &CostScheme,
        mode: Mode,
        max_states: usize,
    ) -> Result<Self> {
        let opts = BuildOptions::default();
        let specs = AbstractionSpec::for_partition(puzzle, partition, scheme)?;
        let additive = PdbHeuristic::new(
            specs
                .iter()
                .map(|s| TwoCostPdb::build(s, opts).map(std::sync::Arc::new))
                .collect::<Result<Vec<_>>>()?,
        )?;
        let full = if *scheme == CostScheme::FullCost {
            additive.clone()
        } else {
            PdbHeuristic::build(puzzle, partition, &CostScheme::FullCost, opts, false)?
        };
        let states = match mode {
            Mode::Exhaustive => {
                let mut v: Vec<(State, Cost)> = distances_to_goal(&puzzle, max_states)?
                    .into_iter()
                    .collect();
                v.sort_unstable();
                v
            }
            Mode::Sampled { count, seed } => {
                let l = puzzle.num_locations();
                let walk = 10 * l * l;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..count)
                    .map(|_| {
                        let s = puzzle.random_start(StartMode::Walk(walk), &mut rng)?;
                        let opt = oracle_opt(&puzzle, &s, None, max_states)?;
                        Ok((s, opt))
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(Suite {
            puzzle,
            partition: partition.clone(),
            scheme: scheme.clone(),
            mode,
            specs,
            additive,
            full,
            states,
            max_states,
        })
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn specs(&self) -> &[AbstractionSpec] {
        &self.specs
    }

    /// Checks that make sense for the scheme: the sum-based ones need an
    /// additive scheme.
    pub fn applicable(&self) -> Vec<Check> {
        Check::ALL
            .into_iter()
            .filter(|c| !c.needs_additive() || self.scheme.is_additive())
            .collect()
    }

    pub fn run_all(&self) -> Result<Vec<LemmaReport>> {
        self.applicable()
            .into_iter()
            .map(|c| self.check(c))
            .collect()
    }

    fn report(&self, check: Check, t: Tally, notes: Vec<String>) -> LemmaReport {
        LemmaReport {
            check: check.to_string(),
            domain: self.puzzle.label(),
            partition: self.partition.notation(),
            scheme: self.scheme.label().to_string(),
            mode: self.mode.to_string(),
            checked: t.checked,
            violation_count: t.count,
            violations: t.witnesses,
            notes,
        }
    }

    fn scan<F>(&self, f: F) -> Tally
    where
        F: Fn(&State, Cost, &mut Tally) + Sync,
    {
        // per-state tallies merged in state order keep witnesses stable
        self.states
            .par_iter()
            .map(|(s, opt)| {
                let mut t = Tally::default();
                f(s, *opt, &mut t);
                t
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(Tally::default(), Tally::merge)
    }

    pub fn check(&self, check: Check) -> Result<LemmaReport> {
        if check.needs_additive() && !self.scheme.is_additive() {
            return Err(Error::UnsupportedScheme(format!(
                "{check} concerns additive abstractions; {} is not additive",
                self.scheme
            )));
        }
        let scale = self.additive.scale();
        let p = &self.puzzle;
        let mut notes = Vec::new();
        let tally = match check {
            Check::Lemma(1) => match self.mode {
                Mode::Exhaustive => self.scan(|s, _, t| self.edge_images(s, t, true)),
                Mode::Sampled { count, seed } => self.sampled_paths(count, seed),
            },
            Check::P1 => self.scan(|s, _, t| self.edge_images(s, t, false)),
            Check::Lemma(2) => self.scan(|s, opt, t| {
                t.checked += 1;
                let h = self.full.h_max(s);
                if h > opt {
                    t.fail(|| format!("{}: h_max {h} > OPT {opt}", p.format_state(s)));
                }
            }),
            Check::Lemma(3) => self.scan(|s, _, t| {
                let hu = self.full.h_max(s);
                p.for_each_successor(s, |_, v, c| {
                    t.checked += 1;
                    let hv = self.full.h_max(&v);
                    if hu > c.saturating_add(hv) {
                        t.fail(|| {
                            format!(
                                "{} -> {}: {hu} > {c} + {hv}",
                                p.format_state(s),
                                p.format_state(&v)
                            )
                        });
                    }
                });
            }),
            Check::Lemma(4) => self.scan(|s, opt, t| {
                t.checked += 1;
                let h = self.additive.h_add(s);
                if h > opt {
                    t.fail(|| format!("{}: h_add {h} > OPT {opt}", p.format_state(s)));
                }
            }),
            Check::Lemma(5) => self.scan(|s, _, t| {
                let hu = self.additive.h_add_exact(s);
                p.for_each_successor(s, |_, v, c| {
                    t.checked += 1;
                    let hv = self.additive.h_add_exact(&v);
                    if hu > (c * scale).saturating_add(hv) {
                        t.fail(|| {
                            format!(
                                "{} -> {}: {hu} > {c}*{scale} + {hv}",
                                p.format_state(s),
                                p.format_state(&v)
                            )
                        });
                    }
                });
            }),
            Check::Lemma(6) => {
                let t = self.scan(|s, _, t| {
                    let e = self.additive.evaluate(s);
                    if e.addbetter_check().unwrap_or(false) {
                        t.checked += 1;
                        let hm = self.full.h_max(s);
                        if e.h_add < hm {
                            t.fail(|| {
                                format!("{}: h_add {} < h_max {hm}", p.format_state(s), e.h_add)
                            });
                        }
                    }
                });
                notes.push(format!(
                    "{} of {} states satisfy the additive condition",
                    t.checked,
                    self.states.len()
                ));
                t
            }
            Check::Lemma(7) => {
                if !self.additive.has_residuals() {
                    return Err(Error::ResidualsUnavailable);
                }
                let missed = std::sync::atomic::AtomicU64::new(0);
                let t = self.scan(|s, opt, t| {
                    let e = self.additive.evaluate(s);
                    if e.infeasible {
                        t.checked += 1;
                        if opt != INFINITE_COST && e.h_add_exact == opt * scale {
                            t.fail(|| {
                                format!("{}: flagged but sum equals OPT {opt}", p.format_state(s))
                            });
                        }
                        if e.bumped > opt {
                            t.fail(|| {
                                format!("{}: bumped {} > OPT {opt}", p.format_state(s), e.bumped)
                            });
                        }
                    } else if opt != INFINITE_COST && e.h_add_exact < opt * scale {
                        missed.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    }
                });
                notes.push(format!(
                    "{} states flagged; {} states below OPT not flagged",
                    t.checked,
                    missed.into_inner()
                ));
                t
            }
            Check::P2 => self.scan(|s, _, t| {
                p.for_each_successor(s, |op, _, c| {
                    for spec in &self.specs {
                        t.checked += 1;
                        if let Ok((ci, ri)) = spec.edge_image_costs(s, op) {
                            if ci + ri > c * scale {
                                t.fail(|| {
                                    format!(
                                        "{} op {op} in {spec}: {ci} + {ri} > {}",
                                        p.format_state(s),
                                        c * scale
                                    )
                                });
                            }
                        }
                    }
                });
            }),
            Check::P3 => self.scan(|s, _, t| {
                p.for_each_successor(s, |op, _, c| {
                    t.checked += 1;
                    let sum: Cost = self
                        .specs
                        .iter()
                        .map(|spec| spec.edge_image_costs(s, op).map_or(0, |x| x.0))
                        .sum();
                    if sum > c * scale {
                        t.fail(|| {
                            format!("{} op {op}: sum {sum} > {}", p.format_state(s), c * scale)
                        });
                    }
                });
            }),
            Check::Lemma(n) => return Err(Error::InvalidParameter(format!("no lemma {n}"))),
        };
        Ok(self.report(check, tally, notes))
    }

    /// Each outgoing edge of `s` maps to an abstract edge with the same
    /// costs (or to a self-image); with `bound`, also `C_i + R_i <= C`.
    fn edge_images(&self, s: &State, t: &mut Tally, bound: bool) {
        let p = &self.puzzle;
        let scale = self.additive.scale();
        p.for_each_successor(s, |op, v, c| {
            for spec in &self.specs {
                t.checked += 1;
                let Ok(img) = spec.edge_image_costs(s, op) else {
                    t.fail(|| format!("{} op {op}: no image costs in {spec}", p.format_state(s)));
                    continue;
                };
                let (a, b) = (spec.abstract_state(s), spec.abstract_state(&v));
                let mut found = a == b;
                spec.for_each_abstract_successor(&a, |_, to, ci, ri| {
                    found |= to == b && (ci, ri) == img;
                });
                if !found {
                    t.fail(|| {
                        format!("{} op {op}: image not an edge of {spec}", p.format_state(s))
                    });
                }
                if bound && img.0 + img.1 > c * scale {
                    t.fail(|| {
                        format!(
                            "{} op {op}: image costs {img:?} exceed {}",
                            p.format_state(s),
                            c * scale
                        )
                    });
                }
            }
        });
    }

    /// Random concrete paths: the summed image costs of each path stay
    /// within its cost, and the images chain in every abstract space.
    fn sampled_paths(&self, count: usize, seed: u64) -> Tally {
        let p = &self.puzzle;
        let scale = self.additive.scale();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
        let mut t = Tally::default();
        for (s0, _) in self.states.iter().cycle().take(count) {
            let len = rng.gen_range(1..=30);
            let mut s = *s0;
            let mut cost = 0;
            let mut sums = vec![0 as Cost; self.specs.len()];
            let mut chained = true;
            for _ in 0..len {
                let succ = p.successors(&s).unwrap_or_default();
                let e = &succ[rng.gen_range(0..succ.len())];
                cost += e.cost;
                for (i, spec) in self.specs.iter().enumerate() {
                    let (a, b) = (spec.abstract_state(&s), spec.abstract_state(&e.to));
                    let img = spec
                        .edge_image_costs(&s, e.op)
                        .unwrap_or((INFINITE_COST, 0));
                    sums[i] = sums[i].saturating_add(img.0 + img.1);
                    let mut found = a == b;
                    spec.for_each_abstract_successor(&a, |_, to, _, _| found |= to == b);
                    chained &= found;
                }
                s = e.to;
            }
            t.checked += 1;
            if !chained || sums.iter().any(|&x| x > cost * scale) {
                t.fail(|| format!("path of {len} edges from {}", p.format_state(s0)));
            }
        }
        t
    }

    /// The oracle state budget this suite was built with.
    pub fn max_states(&self) -> usize {
        self.max_states
    }
}

/// Runs one check on a freshly built suite.
pub fn verify_lemma(
    check: Check,
    puzzle: Puzzle,
    partition: &TilePartition,
    scheme: &CostScheme,
    mode: Mode,
    max_states: usize,
) -> Result<LemmaReport> {
    Suite::new(puzzle, partition, scheme, mode, max_states)?.check(check)
}

/// P1/P2/P3 on an explicit graph.
pub fn verify_conditions(g: &ExplicitGraph) -> Result<Vec<LemmaReport>> {
    let r = check_conditions(g)?;
    let edges = g.edges().len() as u64;
    let mk = |check: &str, ok: bool, checked: u64| {
        let violations: Vec<String> = r
            .witnesses
            .iter()
            .filter(|w| w.condition == check)
            .map(|w| w.to_string())
            .collect();
        LemmaReport {
            check: check.to_string(),
            domain: "graph".into(),
            partition: format!("k={}", g.abstractions()),
            scheme: "explicit".into(),
            mode: "exhaustive".into(),
            checked,
            violation_count: if ok {
                0
            } else {
                violations.len().max(1) as u64
            },
            violations: violations.into_iter().take(MAX_WITNESSES).collect(),
            notes: Vec::new(),
        }
    };
    let k = g.abstractions() as u64;
    Ok(vec![
        mk("P1", r.p1, edges * k),
        mk("P2", r.p2.iter().all(|&b| b), edges * k),
        mk("P3", r.p3, edges),
    ])
}

/// Abstract space of one spec as explicit forward edges, built from
/// successor enumeration over every rank.
struct AbstractGraph {
    states: Vec<State>,
    /// `(from, to, C, R)`.
    edges: Vec<(usize, usize, Cost, Cost)>,
    goal: usize,
}

impl AbstractGraph {
    fn new(spec: &AbstractionSpec, ranker: &Ranker) -> Result<Self> {
        let n = ranker.size() as usize;
        let states: Vec<State> = (0..n as u64)
            .map(|r| ranker.unrank(r))
            .collect::<Result<_>>()?;
        let index: HashMap<State, usize> =
            states.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let mut edges = Vec::new();
        for (i, a) in states.iter().enumerate() {
            spec.for_each_abstract_successor(a, |_, b, c, r| edges.push((i, index[&b], c, r)));
        }
        let goal = index[&spec.abstract_goal()];
        Ok(AbstractGraph {
            states,
            edges,
            goal,
        })
    }

    fn backward_dijkstra(
        &self,
        allowed: impl Fn(usize) -> bool,
        weight: impl Fn(usize) -> Cost,
    ) -> Vec<Cost> {
        let mut incoming = vec![Vec::new(); self.states.len()];
        for (j, e) in self.edges.iter().enumerate() {
            if allowed(j) {
                incoming[e.1].push(j);
            }
        }
        let mut dist = vec![INFINITE_COST; self.states.len()];
        dist[self.goal] = 0;
        let mut heap = BinaryHeap::from([Reverse((0 as Cost, self.goal))]);
        while let Some(Reverse((d, v))) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &j in &incoming[v] {
                let u = self.edges[j].0;
                let nd = d + weight(j);
                if nd < dist[u] {
                    dist[u] = nd;
                    heap.push(Reverse((nd, u)));
                }
            }
        }
        dist
    }
}

/// Compares a table's `(C*, R*)` with an independent computation on the
/// explicit abstract space: `C*` by Dijkstra on primary costs alone, `R*`
/// by Dijkstra on residual costs restricted to edges lying on some
/// primary-optimal path; full-cost tables against Dijkstra on `C + R`.
/// Also checks `C*(u) <= C(u,v) + C*(v)` on every abstract edge.
pub fn verify_residuals(spec: &AbstractionSpec, max_states: usize) -> Result<LemmaReport> {
    let pdb = TwoCostPdb::<u64>::build(spec, BuildOptions::default())?;
    let size = pdb.ranker().size();
    if size as usize > max_states {
        return Err(Error::BudgetExceeded {
            what: format!("abstract space of {size} states exceeds {max_states}"),
            generated: 0,
            expanded: 0,
        });
    }
    let g = AbstractGraph::new(spec, pdb.ranker())?;
    let c_star = g.backward_dijkstra(|_| true, |j| g.edges[j].2);
    let tight = |j: usize| {
        let (u, v, c, _) = g.edges[j];
        c_star[v] != INFINITE_COST && c_star[u] == c + c_star[v]
    };
    let r_star = g.backward_dijkstra(tight, |j| g.edges[j].3);
    let total = g.backward_dijkstra(|_| true, |j| g.edges[j].2 + g.edges[j].3);
    let full = *spec.scheme() == CostScheme::FullCost;

    let mut t = Tally::default();
    for (i, a) in g.states.iter().enumerate() {
        t.checked += 1;
        let e = pdb.entry_abstract(a)?;
        let expect_r = if c_star[i] == INFINITE_COST {
            INFINITE_COST
        } else {
            r_star[i]
        };
        if e.primary != c_star[i] || e.residual != Some(expect_r) {
            t.fail(|| {
                format!(
                    "{a:?}: table ({}, {:?}) oracle ({}, {})",
                    e.primary, e.residual, c_star[i], expect_r
                )
            });
        }
        if full && e.primary != total[i] {
            t.fail(|| format!("{a:?}: full cost {} oracle {}", e.primary, total[i]));
        }
    }
    for &(u, v, c, _) in &g.edges {
        if c_star[u] > c.saturating_add(c_star[v]) {
            t.fail(|| {
                format!(
                    "{:?} -> {:?}: triangle inequality",
                    g.states[u], g.states[v]
                )
            });
        }
    }
    Ok(LemmaReport {
        check: "RESIDUAL".into(),
        domain: spec.puzzle().label(),
        partition: spec.partition().notation(),
        scheme: format!("{} #{}", spec.scheme().label(), spec.group() + 1),
        mode: "exhaustive".into(),
        checked: t.checked,
        violation_count: t.count,
        violations: t.witnesses,
        notes: Vec::new(),
    })
}
