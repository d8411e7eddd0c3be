use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::Topology;
use crate::scalar::Scalar;

/// Partition of the wireless-fronthaul stations into capacity groups.
///
/// The pooled policy has a single group holding every wireless station and
/// the total capacity R_F^max. The static baseline gives each wireless
/// station a group of its own with its private cap. Every group carries one
/// multiplier υ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FronthaulGroups<T> {
    pub caps_bps: Vec<T>,
    /// Group of each station; `None` for wired fronthaul.
    pub group_of: Vec<Option<usize>>,
}

impl<T: Scalar> FronthaulGroups<T> {
    /// One shared constraint over all wireless stations.
    pub fn pooled(topo: &Topology<T>, cap_bps: T) -> Self {
        Self {
            caps_bps: vec![cap_bps],
            group_of: topo
                .stations
                .iter()
                .map(|s| s.wireless_fronthaul.then_some(0))
                .collect(),
        }
    }

    /// One constraint per wireless station. With `per_dbs_cap_bps = None`
    /// the total is split equally.
    pub fn per_dbs(topo: &Topology<T>, total_cap_bps: T, per_dbs_cap_bps: Option<T>) -> Self {
        let wireless = topo.wireless_indices();
        let share = match per_dbs_cap_bps {
            Some(c) => c,
            None if wireless.is_empty() => total_cap_bps,
            None => total_cap_bps / T::from_count(wireless.len()),
        };
        let mut group_of = vec![None; topo.num_dbs()];
        for (g, &m) in wireless.iter().enumerate() {
            group_of[m] = Some(g);
        }
        Self {
            caps_bps: vec![share; wireless.len()],
            group_of,
        }
    }

    pub fn num_groups(&self) -> usize {
        self.caps_bps.len()
    }

    /// Stations belonging to each group.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.caps_bps.len()];
        for (m, g) in self.group_of.iter().enumerate() {
            if let Some(g) = g {
                out[*g].push(m);
            }
        }
        out
    }

    pub fn validate(&self, num_dbs: usize) -> Result<()> {
        if self.group_of.len() != num_dbs {
            return Err(invalid("group_of", "must have one entry per station"));
        }
        if self
            .group_of
            .iter()
            .flatten()
            .any(|&g| g >= self.caps_bps.len())
        {
            return Err(invalid("group_of", "group index out of range"));
        }
        for &c in &self.caps_bps {
            if !(c.is_finite() && c > T::zero()) {
                return Err(invalid("caps_bps", format!("must be finite and > 0, got {c}")));
            }
        }
        Ok(())
    }
}
