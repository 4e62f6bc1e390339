//! Edge-level conditions on explicit graphs carrying per-abstraction costs.

use crate::error::{Error, Result};
use crate::graph::ExplicitGraph;
use crate::space::Cost;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    /// `"P1"`, `"P2"` or `"P3"`.
    pub condition: &'static str,
    /// 0-based abstraction index, when the failure concerns one abstraction.
    pub abstraction: Option<usize>,
    /// Index into [`ExplicitGraph::edges`].
    pub edge: usize,
    pub detail: String,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} edge {}", self.condition, self.edge)?;
        if let Some(i) = self.abstraction {
            write!(f, " abstraction {}", i + 1)?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionReport {
    /// Every edge maps to an edge of every abstract space.
    pub p1: bool,
    /// Per abstraction: `C(e) >= C_i(e) + R_i(e)` on every edge.
    pub p2: Vec<bool>,
    /// `C(e) >= sum_i C_i(e)` on every edge.
    pub p3: bool,
    pub witnesses: Vec<Witness>,
}

impl ConditionReport {
    pub fn all_hold(&self) -> bool {
        self.p1 && self.p3 && self.p2.iter().all(|&b| b)
    }
}

/// Checks the three edge conditions. An edge whose two endpoints share an
/// image counts as mapping to that abstract state's trivial self-loop.
pub fn check_conditions(g: &ExplicitGraph) -> Result<ConditionReport> {
    let k = g.abstractions();
    if k > 0 && !g.edges().is_empty() && !g.has_abstract_costs() {
        return Err(Error::InvalidParameter(
            "every edge needs (C, R) pairs for each abstraction".into(),
        ));
    }
    for i in 0..k {
        if let Some(declared) = g.declared_abstract_edges(i) {
            let known: BTreeSet<&str> = declared
                .iter()
                .flat_map(|(a, b)| [a.as_str(), b.as_str()])
                .collect();
            for e in g.edges() {
                for s in [e.from, e.to] {
                    let img = g.image(i, s);
                    if !known.contains(img) {
                        return Err(Error::UnknownAbstractState(img.to_string()));
                    }
                }
            }
        }
    }

    let mut report = ConditionReport {
        p1: true,
        p2: vec![true; k],
        p3: true,
        witnesses: Vec::new(),
    };
    for (j, e) in g.edges().iter().enumerate() {
        for i in 0..k {
            let (a, b) = (g.image(i, e.from), g.image(i, e.to));
            if let Some(declared) = g.declared_abstract_edges(i) {
                if a != b && !declared.contains(&(a.to_string(), b.to_string())) {
                    report.p1 = false;
                    report.witnesses.push(Witness {
                        condition: "P1",
                        abstraction: Some(i),
                        edge: j,
                        detail: format!(
                            "{} -> {} maps to {a} -> {b}, not an abstract edge",
                            g.name(e.from),
                            g.name(e.to)
                        ),
                    });
                }
            }
        }
        if k == 0 {
            continue;
        }
        for (i, &(c, r)) in e.abstract_costs.iter().enumerate() {
            if c.saturating_add(r) > e.cost {
                report.p2[i] = false;
                report.witnesses.push(Witness {
                    condition: "P2",
                    abstraction: Some(i),
                    edge: j,
                    detail: format!(
                        "{} -> {}: cost {} < {c} + {r}",
                        g.name(e.from),
                        g.name(e.to),
                        e.cost
                    ),
                });
            }
        }
        let total = e
            .abstract_costs
            .iter()
            .fold(0 as Cost, |acc, &(c, _)| acc.saturating_add(c));
        if total > e.cost {
            report.p3 = false;
            report.witnesses.push(Witness {
                condition: "P3",
                abstraction: None,
                edge: j,
                detail: format!(
                    "{} -> {}: cost {} < sum of primary costs {total}",
                    g.name(e.from),
                    g.name(e.to),
                    e.cost
                ),
            });
        }
    }
    Ok(report)
}
