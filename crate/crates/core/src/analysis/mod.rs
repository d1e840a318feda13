//! Aggregation of simulation records into rank, critical-difference,
//! category and generalization summaries.
//!
//! Only complete records enter any aggregate. Records are grouped by
//! scenario, nominal training size and anomaly setting.

pub mod category;
pub mod cd;
pub mod generalization;
pub mod ranks;
pub mod report;
pub mod significance;

use serde::{Deserialize, Serialize};

use crate::config::AnomalySetting;
use crate::error::{Error, Result};
use crate::pipeline::SimulationRecord;

pub use category::{category_max, CategoryGroup, CategorySummary};
pub use cd::{critical_difference, nemenyi_q, CdResult};
pub use generalization::{generalization_bounds, BoundsRow, Generalization, SelectionRow, Selector};
pub use report::{write_reports, Report};
pub use ranks::{average_ranks, rank_detectors, RankGroup};
pub use significance::{mann_whitney, MannWhitney};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupKey {
    pub scenario: String,
    pub n_train_nominal: usize,
    pub anomaly: AnomalySetting,
}

impl GroupKey {
    fn of(r: &SimulationRecord) -> Self {
        Self { scenario: r.scenario.clone(), n_train_nominal: r.n_train_nominal, anomaly: r.anomaly }
    }

    fn order(&self) -> (String, usize, &'static str, u64) {
        let v = match self.anomaly {
            AnomalySetting::Rate(x) => x.to_bits(),
            AnomalySetting::Count(c) => c as u64,
        };
        (self.scenario.clone(), self.n_train_nominal, self.anomaly.mode(), v)
    }
}

/// Complete records grouped by sweep cell, in coordinate order. Every record
/// of a group must carry the same detectors in the same order.
pub fn complete_groups(records: &[SimulationRecord]) -> Result<Vec<(GroupKey, Vec<&SimulationRecord>)>> {
    let mut groups: Vec<(GroupKey, Vec<&SimulationRecord>)> = Vec::new();
    for r in records.iter().filter(|r| r.status.is_complete()) {
        let key = GroupKey::of(r);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups.sort_by(|a, b| a.0.order().cmp(&b.0.order()));
    for (key, rs) in &mut groups {
        rs.sort_by_key(|r| r.simulation_index);
        let names = detector_names(rs[0]);
        if rs.iter().any(|r| detector_names(r) != names) {
            return Err(Error::InvalidConfig(format!(
                "records of {}/{}/{} do not share one detector suite",
                key.scenario, key.n_train_nominal, key.anomaly
            )));
        }
    }
    if groups.is_empty() {
        return Err(Error::EmptySample("complete simulation records"));
    }
    Ok(groups)
}

pub(crate) fn detector_names(r: &SimulationRecord) -> Vec<&str> {
    r.detectors.iter().map(|d| d.detector.as_str()).collect()
}
