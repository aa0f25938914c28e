//! Search budgets shared by the solver and the heuristic transforms.

use std::time::{Duration, Instant};

/// A node-count and wall-clock cap. Whichever limit is hit first stops the
/// search; `unlimited()` never stops it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: Option<u64>,
    pub max_time: Option<Duration>,
}

impl Budget {
    pub fn unlimited() -> Self {
        Budget { max_nodes: None, max_time: None }
    }

    pub fn nodes(max_nodes: u64) -> Self {
        Budget { max_nodes: Some(max_nodes), max_time: None }
    }

    pub fn seconds(secs: u64) -> Self {
        Budget { max_nodes: None, max_time: Some(Duration::from_secs(secs)) }
    }

    pub fn with_nodes(mut self, max_nodes: u64) -> Self {
        self.max_nodes = Some(max_nodes);
        self
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::unlimited()
    }
}

/// Running tally checked inside search loops.
#[derive(Debug)]
pub struct BudgetClock {
    budget: Budget,
    start: Instant,
    nodes: u64,
}

impl BudgetClock {
    pub fn start(budget: Budget) -> Self {
        BudgetClock { budget, start: Instant::now(), nodes: 0 }
    }

    /// Counts one search node and reports whether the budget still holds.
    pub fn tick(&mut self) -> bool {
        self.nodes += 1;
        if let Some(cap) = self.budget.max_nodes {
            if self.nodes > cap {
                return false;
            }
        }
        if let Some(cap) = self.budget.max_time {
            // Checking the clock on every node would dominate small searches.
            if self.nodes % 1024 == 0 && self.start.elapsed() > cap {
                return false;
            }
        }
        true
    }

    pub fn exhausted(&self) -> bool {
        if let Some(cap) = self.budget.max_nodes {
            if self.nodes > cap {
                return true;
            }
        }
        if let Some(cap) = self.budget.max_time {
            if self.start.elapsed() > cap {
                return true;
            }
        }
        false
    }

    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    pub fn elapsed(&self) -> Duration {
        self.start.elapsed()
    }
}
