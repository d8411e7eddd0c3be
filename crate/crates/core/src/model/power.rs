use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::config::{non_negative, positive};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Architecture {
    Cdsa,
    Conventional,
}

impl Architecture {
    pub fn as_str(self) -> &'static str {
        match self {
            Architecture::Cdsa => "cdsa",
            Architecture::Conventional => "conventional",
        }
    }
}

/// Components whose sum is the static power term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBreakdown<T> {
    /// Cloud baseband platform, P_S.
    pub platform_w: T,
    /// All fronthaul links, P_F.
    pub fronthaul_w: T,
    /// Sum of per-station static consumption, Σ P_BS.
    pub base_stations_w: T,
}

impl<T: Scalar> PowerBreakdown<T> {
    pub fn total_w(&self) -> T {
        self.platform_w + self.fronthaul_w + self.base_stations_w
    }
}

/// Affine network power model `P_T = φ_E · Σ α·p + P_Static`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerModel<T> {
    pub architecture: Architecture,
    pub phi_e: T,
    pub p_static_w: T,
    #[serde(default)]
    pub breakdown: Option<PowerBreakdown<T>>,
}

impl<T: Scalar> PowerModel<T> {
    /// Rejects φ_E ≤ 0 and P_Static ≤ 0; the water level divides by
    /// `γ_m + q·φ_E` and the efficiency divides by the total power.
    pub fn new(architecture: Architecture, phi_e: T, p_static_w: T) -> Result<Self> {
        let pm = Self {
            architecture,
            phi_e,
            p_static_w,
            breakdown: None,
        };
        pm.validate()?;
        Ok(pm)
    }

    pub fn with_breakdown(mut self, breakdown: PowerBreakdown<T>) -> Result<Self> {
        non_negative("breakdown.platform_w", breakdown.platform_w)?;
        non_negative("breakdown.fronthaul_w", breakdown.fronthaul_w)?;
        non_negative("breakdown.base_stations_w", breakdown.base_stations_w)?;
        self.breakdown = Some(breakdown);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        positive("phi_e", self.phi_e)?;
        positive("p_static_w", self.p_static_w)
    }

    /// Total consumption for a given sum of transmit powers.
    #[inline]
    pub fn total_for(&self, transmit_w: T) -> T {
        self.phi_e * transmit_w + self.p_static_w
    }

    pub fn cast<U: Scalar>(&self) -> PowerModel<U> {
        let c = |x: T| U::lit(x.as_f64());
        PowerModel {
            architecture: self.architecture,
            phi_e: c(self.phi_e),
            p_static_w: c(self.p_static_w),
            breakdown: self.breakdown.map(|b| PowerBreakdown {
                platform_w: c(b.platform_w),
                fronthaul_w: c(b.fronthaul_w),
                base_stations_w: c(b.base_stations_w),
            }),
        }
    }
}
