//! Resource reports: empirical counters mirroring each engine's cost model.
//! Cells are "padding tokens", rounds are "looping layers".

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    General,
    Unambiguous,
    Linear,
    Bfvp,
    Cyk,
}

impl std::fmt::Display for Engine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Engine::General => "general",
            Engine::Unambiguous => "unambiguous",
            Engine::Linear => "linear",
            Engine::Bfvp => "bfvp",
            Engine::Cyk => "cyk",
        })
    }
}

/// Counters are populated only where the producing engine has the matching
/// ledger; absent counters serialize as null and are never invented.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub engine: Engine,
    pub accepted: bool,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds_used: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub item_cells: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slashed_cells: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition_pairs: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edge_cells: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pebble_rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer_iterations: Option<usize>,
    /// Cells still ⊥ when the general engine hit its round cutoff.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub undetermined_cells: Option<usize>,
    /// Largest formula graph handed to the pebble game (for round-bound
    /// certification against the graph size actually evaluated).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub largest_graph: Option<usize>,
    /// Seconds; measured, so excluded from equality-style assertions.
    pub wall_time: f64,
}

impl ResourceReport {
    pub fn new(engine: Engine, accepted: bool, n: usize) -> ResourceReport {
        ResourceReport {
            engine,
            accepted,
            n,
            rounds_used: None,
            item_cells: None,
            slashed_cells: None,
            decomposition_pairs: None,
            edge_cells: None,
            pebble_rounds: None,
            outer_iterations: None,
            undetermined_cells: None,
            largest_graph: None,
            wall_time: 0.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn serialization_round_trips() {
        let mut r = ResourceReport::new(Engine::General, true, 6);
        r.rounds_used = Some(3);
        r.decomposition_pairs = Some(1234);
        let json = serde_json::to_string(&r).unwrap();
        assert!(!json.contains("edge_cells"), "absent counters stay absent");
        let back: ResourceReport = serde_json::from_str(&json).unwrap();
        assert_eq!(back, r);
    }
}
