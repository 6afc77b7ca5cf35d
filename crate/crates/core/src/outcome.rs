//! Outcome sets and exploration bounds shared by both semantics.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::graph::{parse_host_graph, HostGraph};
use crate::smallstep::EngineError;

/// Evidence for a divergent (or, in the old semantics, stuck) execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Bottom {
    Absent,
    /// Certain: a reachable cycle of non-terminal configurations, or a
    /// configuration proven to have no successors.
    CycleDefinite,
    /// Not ruled out: the search was cut off by a bound.
    FuelPossible,
}

/// Whether a non-terminal configuration without successors was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stuck {
    None,
    /// Undetermined cases are premises that did not settle within fuel.
    Undetermined,
    Definite,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OutcomeSet {
    /// Canonical host-graph texts, one per isomorphism class.
    pub graphs: BTreeSet<String>,
    pub fail: bool,
    pub bottom: Bottom,
    pub stuck: Stuck,
    /// The search stopped before the state space closed.
    pub exhausted: bool,
}

impl OutcomeSet {
    pub fn empty() -> Self {
        OutcomeSet {
            graphs: BTreeSet::new(),
            fail: false,
            bottom: Bottom::Absent,
            stuck: Stuck::None,
            exhausted: false,
        }
    }

    pub fn has_bottom(&self) -> bool {
        self.bottom != Bottom::Absent
    }

    /// Graph and fail outcomes agree.
    pub fn same_excluding_bottom(&self, other: &OutcomeSet) -> bool {
        self.graphs == other.graphs && self.fail == other.fail
    }

    /// Every outcome of `self`, bottom included, is an outcome of `other`.
    pub fn contained_in(&self, other: &OutcomeSet) -> bool {
        self.graphs.is_subset(&other.graphs)
            && (!self.fail || other.fail)
            && (!self.has_bottom() || other.has_bottom())
    }

    pub fn graph_values(&self) -> Vec<HostGraph> {
        self.graphs
            .iter()
            .map(|t| parse_host_graph(t).expect("canonical texts parse"))
            .collect()
    }
}

/// Limits for exhaustive search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub max_states: usize,
    pub max_depth: usize,
    /// Steps available to the premises of one old-semantics transition.
    pub old_fuel: usize,
    pub parallel: bool,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_states: 100_000,
            max_depth: 10_000,
            old_fuel: 2_000,
            parallel: false,
        }
    }
}

impl Bounds {
    pub fn validate(&self) -> Result<(), EngineError> {
        for (name, v) in [
            ("max_states", self.max_states),
            ("max_depth", self.max_depth),
            ("old_fuel", self.old_fuel),
        ] {
            if v == 0 {
                return Err(EngineError::NonPositive(name));
            }
        }
        Ok(())
    }
}
