use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::model::config::positive;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StationKind {
    Lpn,
    Hpn,
}

/// One data base station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Station<T> {
    pub kind: StationKind,
    pub position_m: [T; 2],
    pub max_power_w: T,
    /// `w_m`: true when the station hangs off the shared wireless fronthaul.
    pub wireless_fronthaul: bool,
}

/// Station and UE layout of one drop.
///
/// Stations are ordered LPNs first; the single HPN is always the last entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology<T> {
    pub stations: Vec<Station<T>>,
    pub ues_m: Vec<[T; 2]>,
    pub cell_radius_m: T,
    /// Optional UE → serving-station map. When present a UE may only be
    /// scheduled on its serving station.
    #[serde(default)]
    pub association: Option<Vec<usize>>,
}

impl<T: Scalar> Topology<T> {
    pub fn num_dbs(&self) -> usize {
        self.stations.len()
    }

    pub fn num_ues(&self) -> usize {
        self.ues_m.len()
    }

    pub fn hpn_index(&self) -> usize {
        self.stations.len() - 1
    }

    pub fn num_wireless(&self) -> usize {
        self.stations.iter().filter(|s| s.wireless_fronthaul).count()
    }

    pub fn wireless_indices(&self) -> Vec<usize> {
        (0..self.stations.len())
            .filter(|&m| self.stations[m].wireless_fronthaul)
            .collect()
    }

    /// Whether UE `ue` may be scheduled on station `dbs`.
    #[inline]
    pub fn eligible(&self, ue: usize, dbs: usize) -> bool {
        match &self.association {
            Some(a) => a[ue] == dbs,
            None => true,
        }
    }

    pub fn distance_m(&self, ue: usize, dbs: usize) -> T {
        let [ux, uy] = self.ues_m[ue];
        let [sx, sy] = self.stations[dbs].position_m;
        (ux - sx).hypot(uy - sy)
    }

    pub fn validate(&self) -> Result<()> {
        if self.stations.is_empty() {
            return Err(invalid("stations", "at least the HPN is required"));
        }
        let hpns: Vec<usize> = (0..self.stations.len())
            .filter(|&m| self.stations[m].kind == StationKind::Hpn)
            .collect();
        if hpns != [self.stations.len() - 1] {
            return Err(invalid(
                "stations",
                "exactly one HPN is required and it must be the last station",
            ));
        }
        for s in &self.stations {
            positive("max_power_w", s.max_power_w)?;
            if !(s.position_m[0].is_finite() && s.position_m[1].is_finite()) {
                return Err(invalid("position_m", "station position must be finite"));
            }
        }
        if self.ues_m.is_empty() {
            return Err(invalid("ues_m", "at least one UE is required"));
        }
        for u in &self.ues_m {
            if !(u[0].is_finite() && u[1].is_finite()) {
                return Err(invalid("ues_m", "UE position must be finite"));
            }
        }
        positive("cell_radius_m", self.cell_radius_m)?;
        if let Some(a) = &self.association {
            if a.len() != self.ues_m.len() {
                return Err(invalid("association", "must have one entry per UE"));
            }
            if a.iter().any(|&m| m >= self.stations.len()) {
                return Err(invalid("association", "station index out of range"));
            }
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> Topology<U> {
        let c = |x: T| U::lit(x.as_f64());
        Topology {
            stations: self
                .stations
                .iter()
                .map(|s| Station {
                    kind: s.kind,
                    position_m: [c(s.position_m[0]), c(s.position_m[1])],
                    max_power_w: c(s.max_power_w),
                    wireless_fronthaul: s.wireless_fronthaul,
                })
                .collect(),
            ues_m: self.ues_m.iter().map(|u| [c(u[0]), c(u[1])]).collect(),
            cell_radius_m: c(self.cell_radius_m),
            association: self.association.clone(),
        }
    }

    /// Builds a minimal layout with the given station powers (last one is
    /// the HPN) and `num_ues` UEs at the origin. Used for synthetic
    /// instances whose gains are specified directly.
    pub fn synthetic(max_powers_w: &[T], wireless: &[bool], num_ues: usize) -> Self {
        assert_eq!(max_powers_w.len(), wireless.len());
        let last = max_powers_w.len() - 1;
        Topology {
            stations: max_powers_w
                .iter()
                .zip(wireless)
                .enumerate()
                .map(|(m, (&p, &w))| Station {
                    kind: if m == last {
                        StationKind::Hpn
                    } else {
                        StationKind::Lpn
                    },
                    position_m: [T::zero(), T::zero()],
                    max_power_w: p,
                    wireless_fronthaul: w,
                })
                .collect(),
            ues_m: vec![[T::zero(), T::zero()]; num_ues],
            cell_radius_m: T::one(),
            association: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hpn_must_be_last_and_unique() {
        let mut t = Topology::<f64>::synthetic(&[0.13, 20.0], &[true, false], 2);
        assert!(t.validate().is_ok());
        t.stations[0].kind = StationKind::Hpn;
        assert!(t.validate().is_err());
        t.stations[0].kind = StationKind::Lpn;
        t.stations[1].kind = StationKind::Lpn;
        assert!(t.validate().is_err());
    }

    #[test]
    fn association_restricts_eligibility() {
        let mut t = Topology::<f64>::synthetic(&[0.13, 0.13, 20.0], &[false; 3], 2);
        assert!(t.eligible(1, 0));
        t.association = Some(vec![2, 0]);
        assert!(t.eligible(0, 2) && !t.eligible(0, 0));
        assert!(t.eligible(1, 0) && !t.eligible(1, 2));
        t.association = Some(vec![3, 0]);
        assert!(t.validate().is_err());
    }
}
