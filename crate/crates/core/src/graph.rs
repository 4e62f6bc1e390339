//! Explicit weighted graphs with optional abstraction data, read from a
//! small line-oriented text format:
//!
//! ```text
//! # comment
//! abstractions <k>
//! state <name>          # optional; edges declare their endpoints
//! goal <name>
//! edge <u> <v> <cost> [<C_1> <R_1> ... <C_k> <R_k>]
//! map <state> <abs_1> ... <abs_k>
//! absedge <i> <a> <b>
//! ```
//!
//! `map` gives the image of a state under each abstraction (identity when
//! absent). `absedge` declares an edge of abstract space `i` (1-based); when
//! a space has no declared edges its edge set is the image of the original
//! edges. Parallel edges are allowed and keep independent costs.

use crate::error::{Error, Result};
use crate::space::{Cost, OpId, StateSpace};
use std::collections::{BTreeSet, HashMap};
use std::fmt::Write;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphEdge {
    pub from: usize,
    pub to: usize,
    pub cost: Cost,
    /// `(C_i, R_i)` for each abstraction, or empty.
    pub abstract_costs: Vec<(Cost, Cost)>,
}

#[derive(Clone, Debug, Default)]
pub struct ExplicitGraph {
    names: Vec<String>,
    index: HashMap<String, usize>,
    goal: Option<usize>,
    edges: Vec<GraphEdge>,
    outgoing: Vec<Vec<usize>>,
    incoming: Vec<Vec<usize>>,
    abstractions: usize,
    images: Vec<Option<Vec<String>>>,
    abstract_edges: Vec<BTreeSet<(String, String)>>,
}

impl ExplicitGraph {
    pub fn new(abstractions: usize) -> Self {
        ExplicitGraph {
            abstractions,
            abstract_edges: vec![BTreeSet::new(); abstractions],
            ..Default::default()
        }
    }

    pub fn abstractions(&self) -> usize {
        self.abstractions
    }

    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, s: usize) -> &str {
        &self.names[s]
    }

    pub fn state(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn add_state(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        self.outgoing.push(Vec::new());
        self.incoming.push(Vec::new());
        self.images.push(None);
        i
    }

    pub fn set_goal(&mut self, s: usize) {
        self.goal = Some(s);
    }

    pub fn add_edge(
        &mut self,
        from: usize,
        to: usize,
        cost: Cost,
        abstract_costs: Vec<(Cost, Cost)>,
    ) -> Result<usize> {
        if from >= self.names.len() || to >= self.names.len() {
            return Err(Error::InvalidState(format!(
                "edge {from}->{to} has an unknown endpoint"
            )));
        }
        if !abstract_costs.is_empty() && abstract_costs.len() != self.abstractions {
            return Err(Error::InvalidParameter(format!(
                "edge carries {} cost pairs, expected {}",
                abstract_costs.len(),
                self.abstractions
            )));
        }
        let id = self.edges.len();
        self.edges.push(GraphEdge {
            from,
            to,
            cost,
            abstract_costs,
        });
        self.outgoing[from].push(id);
        self.incoming[to].push(id);
        Ok(id)
    }

    pub fn set_image(&mut self, s: usize, images: Vec<String>) -> Result<()> {
        if images.len() != self.abstractions {
            return Err(Error::InvalidParameter(format!(
                "state has {} images, expected {}",
                images.len(),
                self.abstractions
            )));
        }
        self.images[s] = Some(images);
        Ok(())
    }

    /// Declare an abstract edge of space `i` (0-based).
    pub fn add_abstract_edge(&mut self, i: usize, a: &str, b: &str) -> Result<()> {
        let set = self
            .abstract_edges
            .get_mut(i)
            .ok_or_else(|| Error::InvalidParameter(format!("abstraction {} undeclared", i + 1)))?;
        set.insert((a.to_string(), b.to_string()));
        Ok(())
    }

    /// Image of state `s` under abstraction `i`.
    pub fn image(&self, i: usize, s: usize) -> &str {
        match &self.images[s] {
            Some(v) => &v[i],
            None => &self.names[s],
        }
    }

    /// The declared abstract edges of space `i`, or `None` when the space
    /// is implicitly the image of the original edges.
    pub fn declared_abstract_edges(&self, i: usize) -> Option<&BTreeSet<(String, String)>> {
        self.abstract_edges.get(i).filter(|s| !s.is_empty())
    }

    /// All abstract state names that appear anywhere for abstraction `i`.
    pub fn abstract_states(&self, i: usize) -> BTreeSet<&str> {
        let mut out: BTreeSet<&str> = (0..self.num_states()).map(|s| self.image(i, s)).collect();
        for (a, b) in &self.abstract_edges[i] {
            out.insert(a);
            out.insert(b);
        }
        out
    }

    pub fn has_abstract_costs(&self) -> bool {
        !self.edges.is_empty() && self.edges.iter().all(|e| !e.abstract_costs.is_empty())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut g: Option<ExplicitGraph> = None;
        let mut pending_goal: Option<(usize, String)> = None;
        let mut declared_k: Option<usize> = None;
        // The number of abstractions may only be inferred before the first
        // use, so collect lines first.
        let lines: Vec<(usize, Vec<&str>)> = text
            .lines()
            .enumerate()
            .map(|(i, l)| {
                (
                    i + 1,
                    l.split('#')
                        .next()
                        .unwrap_or("")
                        .split_whitespace()
                        .collect(),
                )
            })
            .filter(|(_, w): &(usize, Vec<&str>)| !w.is_empty())
            .collect();

        for (line, words) in &lines {
            match words[0] {
                "abstractions" => {
                    let k = parse_num(words.get(1), *line)? as usize;
                    declared_k = Some(k);
                }
                "edge" if declared_k.is_none() && words.len() > 4 => {
                    declared_k = Some((words.len() - 4) / 2);
                }
                "map" if declared_k.is_none() => declared_k = Some(words.len() - 2),
                _ => {}
            }
        }
        let k = declared_k.unwrap_or(0);

        for (line, words) in lines {
            let g = g.get_or_insert_with(|| ExplicitGraph::new(k));
            let err = |msg: String| Error::Parse { line, msg };
            let lookup = |g: &ExplicitGraph, name: &str| {
                g.state(name).ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("unknown state `{name}`"),
                })
            };
            match words[0] {
                "abstractions" => {}
                "state" => {
                    if words.len() != 2 {
                        return Err(err("expected `state <name>`".into()));
                    }
                    g.add_state(words[1]);
                }
                "goal" => {
                    if words.len() != 2 {
                        return Err(err("expected `goal <name>`".into()));
                    }
                    pending_goal = Some((line, words[1].to_string()));
                }
                "edge" => {
                    if words.len() < 4 || (words.len() - 4) % 2 != 0 {
                        return Err(err("expected `edge <u> <v> <cost> [<C> <R>]...`".into()));
                    }
                    let u = g.add_state(words[1]);
                    let v = g.add_state(words[2]);
                    let cost = parse_num(words.get(3), line)?;
                    let mut pairs = Vec::new();
                    for c in words[4..].chunks(2) {
                        pairs.push((parse_num(c.first(), line)?, parse_num(c.get(1), line)?));
                    }
                    g.add_edge(u, v, cost, pairs)
                        .map_err(|e| err(e.to_string()))?;
                }
                "map" => {
                    if words.len() < 2 {
                        return Err(err("expected `map <state> <abs>...`".into()));
                    }
                    let s = lookup(g, words[1])?;
                    g.set_image(s, words[2..].iter().map(|w| w.to_string()).collect())
                        .map_err(|e| err(e.to_string()))?;
                }
                "absedge" => {
                    if words.len() != 4 {
                        return Err(err("expected `absedge <i> <a> <b>`".into()));
                    }
                    let i = parse_num(words.get(1), line)? as usize;
                    if i == 0 {
                        return Err(err("abstraction indices are 1-based".into()));
                    }
                    g.add_abstract_edge(i - 1, words[2], words[3])
                        .map_err(|e| err(e.to_string()))?;
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }

        let mut g = g.unwrap_or_else(|| ExplicitGraph::new(k));
        match pending_goal {
            Some((line, name)) => {
                let s = g.state(&name).ok_or_else(|| Error::Parse {
                    line,
                    msg: format!("unknown goal `{name}`"),
                })?;
                g.set_goal(s);
            }
            None => {
                return Err(Error::Parse {
                    line: 0,
                    msg: "no goal declared".into(),
                })
            }
        }
        Ok(g)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if self.abstractions > 0 {
            let _ = writeln!(out, "abstractions {}", self.abstractions);
        }
        for n in &self.names {
            let _ = writeln!(out, "state {n}");
        }
        if let Some(g) = self.goal {
            let _ = writeln!(out, "goal {}", self.names[g]);
        }
        for (s, img) in self.images.iter().enumerate() {
            if let Some(img) = img {
                let _ = writeln!(out, "map {} {}", self.names[s], img.join(" "));
            }
        }
        for (i, set) in self.abstract_edges.iter().enumerate() {
            for (a, b) in set {
                let _ = writeln!(out, "absedge {} {a} {b}", i + 1);
            }
        }
        for e in &self.edges {
            let _ = write!(
                out,
                "edge {} {} {}",
                self.names[e.from], self.names[e.to], e.cost
            );
            for (c, r) in &e.abstract_costs {
                let _ = write!(out, " {c} {r}");
            }
            out.push('\n');
        }
        out
    }
}

fn parse_num(w: Option<&&str>, line: usize) -> Result<u64> {
    let w = w.ok_or(Error::Parse {
        line,
        msg: "missing number".into(),
    })?;
    w.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("`{w}` is not a non-negative integer"),
    })
}

impl StateSpace for ExplicitGraph {
    type State = usize;

    fn goal(&self) -> usize {
        self.goal.expect("explicit graph has no goal")
    }

    fn check_state(&self, s: &usize) -> Result<()> {
        if *s < self.names.len() {
            Ok(())
        } else {
            Err(Error::InvalidState(format!("no state with index {s}")))
        }
    }

    fn for_each_successor<F: FnMut(OpId, usize, Cost)>(&self, s: &usize, mut f: F) {
        for &e in &self.outgoing[*s] {
            f(e as OpId, self.edges[e].to, self.edges[e].cost);
        }
    }

    fn for_each_predecessor<F: FnMut(OpId, usize, Cost)>(&self, s: &usize, mut f: F) {
        for &e in &self.incoming[*s] {
            f(e as OpId, self.edges[e].from, self.edges[e].cost);
        }
    }
}
