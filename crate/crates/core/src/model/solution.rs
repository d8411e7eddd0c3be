use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::channel::ChannelState;
use crate::scalar::Scalar;
use crate::solver::duals::DualState;
use crate::solver::feasibility::FeasibilityReport;

/// Convergence bookkeeping attached to a solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics<T> {
    pub dinkelbach_iters: usize,
    /// Inner dual iterations spent in each Dinkelbach round.
    pub dual_iters: Vec<usize>,
    /// F(q) = R_T − q·P_T at the last inner solve.
    pub final_f: T,
    pub residuals: Option<FeasibilityReport<T>>,
}

impl<T: Scalar> Default for Diagnostics<T> {
    fn default() -> Self {
        Self {
            dinkelbach_iters: 0,
            dual_iters: Vec::new(),
            final_f: T::zero(),
            residuals: None,
        }
    }
}

/// RB assignment `α[k][m][n]` and power `p[k][m][n]` plus solver output.
///
/// Tensors are row-major UE × station × RB, the layout of
/// [`ChannelState`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationSolution<T> {
    pub num_ues: usize,
    pub num_dbs: usize,
    pub num_rbs: usize,
    pub assignment: Vec<bool>,
    pub power_w: Vec<T>,
    pub ee_bits_per_joule: T,
    pub duals: DualState<T>,
    pub diagnostics: Diagnostics<T>,
}

impl<T: Scalar> AllocationSolution<T> {
    pub fn empty(num_ues: usize, num_dbs: usize, num_rbs: usize) -> Self {
        let len = num_ues * num_dbs * num_rbs;
        Self {
            num_ues,
            num_dbs,
            num_rbs,
            assignment: vec![false; len],
            power_w: vec![T::zero(); len],
            ee_bits_per_joule: T::zero(),
            duals: DualState::zeros(num_ues, num_dbs, 1),
            diagnostics: Diagnostics::default(),
        }
    }

    /// Dense tensors from a per-(station, RB) owner list and power list.
    pub fn from_owners(
        num_ues: usize,
        num_dbs: usize,
        num_rbs: usize,
        owner: &[Option<usize>],
        power_w: &[T],
    ) -> Self {
        let mut sol = Self::empty(num_ues, num_dbs, num_rbs);
        for m in 0..num_dbs {
            for n in 0..num_rbs {
                let slot = m * num_rbs + n;
                if let Some(k) = owner[slot] {
                    let i = sol.index(k, m, n);
                    sol.assignment[i] = true;
                    sol.power_w[i] = power_w[slot];
                }
            }
        }
        sol
    }

    #[inline]
    pub fn index(&self, k: usize, m: usize, n: usize) -> usize {
        (k * self.num_dbs + m) * self.num_rbs + n
    }

    #[inline]
    pub fn alpha(&self, k: usize, m: usize, n: usize) -> bool {
        self.assignment[self.index(k, m, n)]
    }

    #[inline]
    pub fn power(&self, k: usize, m: usize, n: usize) -> T {
        self.power_w[self.index(k, m, n)]
    }

    /// Lowest-index UE assigned on `(m, n)`, if any.
    pub fn owner(&self, m: usize, n: usize) -> Option<usize> {
        (0..self.num_ues).find(|&k| self.alpha(k, m, n))
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.num_ues, self.num_dbs, self.num_rbs]
    }

    pub fn check_shape(&self, ch: &ChannelState<T>) -> Result<()> {
        let len = self.num_ues * self.num_dbs * self.num_rbs;
        if self.shape() != ch.shape() || self.assignment.len() != len || self.power_w.len() != len
        {
            return Err(Error::ShapeMismatch(format!(
                "solution {:?} vs channel {:?}",
                self.shape(),
                ch.shape()
            )));
        }
        Ok(())
    }

    pub fn validate_powers(&self) -> Result<()> {
        if let Some(p) = self.power_w.iter().find(|p| !(p.is_finite() && **p >= T::zero())) {
            return Err(invalid("power_w", format!("must be finite and >= 0, got {p}")));
        }
        Ok(())
    }

    /// Σ α·p per station.
    pub fn dbs_power_w(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.num_dbs];
        for k in 0..self.num_ues {
            for (m, slot) in out.iter_mut().enumerate() {
                for n in 0..self.num_rbs {
                    let i = self.index(k, m, n);
                    if self.assignment[i] {
                        *slot = *slot + self.power_w[i];
                    }
                }
            }
        }
        out
    }

    /// Σ α·p over the whole network.
    pub fn transmit_power_w(&self) -> T {
        self.assignment
            .iter()
            .zip(&self.power_w)
            .filter(|(a, _)| **a)
            .fold(T::zero(), |acc, (_, &p)| acc + p)
    }
}
