use serde::{Deserialize, Serialize};

use crate::model::SystemConfig;
use crate::scalar::Scalar;

/// Lagrange multipliers: μ per UE (rate floor), γ per station (power
/// budget), υ per fronthaul group (wireless capacity).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualState<T> {
    pub mu: Vec<T>,
    pub gamma: Vec<T>,
    pub upsilon: Vec<T>,
    pub iter: usize,
}

impl<T: Scalar> DualState<T> {
    pub fn zeros(num_ues: usize, num_dbs: usize, num_groups: usize) -> Self {
        Self {
            mu: vec![T::zero(); num_ues],
            gamma: vec![T::zero(); num_dbs],
            upsilon: vec![T::zero(); num_groups],
            iter: 0,
        }
    }

    /// Rate weight `1 + μ_k − υ·w_m` of UE `k` on a station in `group`.
    #[inline]
    pub fn weight(&self, k: usize, group: Option<usize>) -> T {
        let base = T::one() + self.mu[k];
        match group {
            Some(g) => base - self.upsilon[g],
            None => base,
        }
    }

    /// Power price `γ_m + q·φ_E` of station `m`.
    #[inline]
    pub fn price(&self, m: usize, q: T, phi_e: T) -> T {
        self.gamma[m] + q * phi_e
    }

    pub fn is_non_negative(&self) -> bool {
        self.mu
            .iter()
            .chain(&self.gamma)
            .chain(&self.upsilon)
            .all(|&x| x >= T::zero())
    }
}

/// Subgradient of the dual function at the current primal iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgradient<T> {
    /// achieved_rate_k − r_k^min
    pub mu: Vec<T>,
    /// P_m^max − spent_m
    pub gamma: Vec<T>,
    /// cap_g − carried wireless rate_g
    pub upsilon: Vec<T>,
}

/// Per-coordinate step sizes δ.
#[derive(Debug, Clone, PartialEq)]
pub struct StepSizes<T> {
    pub mu: Vec<T>,
    pub gamma: Vec<T>,
    pub upsilon: Vec<T>,
}

/// Natural magnitudes used to normalise the step rule.
#[derive(Debug, Clone, PartialEq)]
pub struct DualScales<T> {
    /// Rate reference per UE, max(r_k^min, B0).
    pub rate_ref: Vec<T>,
    /// P_m^max per station.
    pub power_ref: Vec<T>,
    /// γ magnitude per station at which a unit-weight station spreads
    /// P_m^max over all N RBs: N·B0 / (ln2 · P_m^max).
    pub gamma_ref: Vec<T>,
    /// Cap per fronthaul group.
    pub cap_ref: Vec<T>,
}

impl<T: Scalar> StepSizes<T> {
    pub fn uniform(delta: T, num_ues: usize, num_dbs: usize, num_groups: usize) -> Self {
        Self {
            mu: vec![delta; num_ues],
            gamma: vec![delta; num_dbs],
            upsilon: vec![delta; num_groups],
        }
    }

    /// Diminishing rule δ(n) = c/√n, normalised per multiplier so that one
    /// step moves a multiplier by at most `c/√n` times its natural scale.
    pub fn schedule(
        cfg: &SystemConfig<T>,
        iter: usize,
        grad: &Subgradient<T>,
        scales: &DualScales<T>,
    ) -> Self {
        let root = T::from_count(iter.max(1)).sqrt();
        // δ such that |δ·∇| = c/√n · scale · min(1, |∇|/ref)
        let rule = |c: T, scale: T, reference: T, g: T| -> T {
            let base = c / root * scale / reference;
            let ag = g.abs();
            if ag > reference {
                base * reference / ag
            } else {
                base
            }
        };
        let sch = &cfg.step_schedule;
        Self {
            mu: grad
                .mu
                .iter()
                .zip(&scales.rate_ref)
                .map(|(&g, &r)| rule(sch.mu, T::one(), r, g))
                .collect(),
            gamma: grad
                .gamma
                .iter()
                .zip(scales.power_ref.iter().zip(&scales.gamma_ref))
                .map(|(&g, (&p, &s))| rule(sch.gamma, s, p, g))
                .collect(),
            upsilon: grad
                .upsilon
                .iter()
                .zip(&scales.cap_ref)
                .map(|(&g, &c)| rule(sch.upsilon, T::one(), c, g))
                .collect(),
        }
    }
}

/// Projected subgradient update `x ← [x − δ·∇x]⁺` for every multiplier.
pub fn subgradient_step<T: Scalar>(
    duals: &DualState<T>,
    grad: &Subgradient<T>,
    steps: &StepSizes<T>,
) -> DualState<T> {
    let upd = |x: &[T], g: &[T], d: &[T]| -> Vec<T> {
        x.iter()
            .zip(g)
            .zip(d)
            .map(|((&x, &g), &d)| (x - d * g).max(T::zero()))
            .collect()
    };
    DualState {
        mu: upd(&duals.mu, &grad.mu, &steps.mu),
        gamma: upd(&duals.gamma, &grad.gamma, &steps.gamma),
        upsilon: upd(&duals.upsilon, &grad.upsilon, &steps.upsilon),
        iter: duals.iter + 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grad(mu: Vec<f64>, gamma: Vec<f64>, upsilon: Vec<f64>) -> Subgradient<f64> {
        Subgradient { mu, gamma, upsilon }
    }

    #[test]
    fn tight_constraints_leave_duals_unchanged() {
        let d = DualState {
            mu: vec![0.3, 0.0],
            gamma: vec![2.0],
            upsilon: vec![0.5],
            iter: 4,
        };
        let s = StepSizes::uniform(0.01, 2, 1, 1);
        let next = subgradient_step(&d, &grad(vec![0.0, 0.0], vec![0.0], vec![0.0]), &s);
        assert_eq!(next.mu, d.mu);
        assert_eq!(next.gamma, d.gamma);
        assert_eq!(next.upsilon, d.upsilon);
        assert_eq!(next.iter, 5);
    }

    #[test]
    fn rate_shortfall_raises_mu() {
        let d = DualState::<f64>::zeros(2, 1, 1);
        let s = StepSizes::uniform(0.01, 2, 1, 1);
        let next = subgradient_step(&d, &grad(vec![-1e6, 2e6], vec![1.0], vec![1e6]), &s);
        assert!(next.mu[0] > 0.0);
        assert_eq!(next.mu[1], 0.0);
        assert_eq!(next.gamma[0], 0.0);
        assert_eq!(next.upsilon[0], 0.0);
    }

    #[test]
    fn hand_computed_update() {
        let d = DualState {
            mu: vec![0.2, 0.05],
            gamma: vec![1.5, 0.0],
            upsilon: vec![0.4],
            iter: 0,
        };
        // rates 3 and 7 against floors 5: ∇μ = (-2, 2)
        // powers 1.2 and 0.1 against caps 1.0 and 0.13: ∇γ = (-0.2, 0.03)
        // wireless 12 against cap 10: ∇υ = -2
        let g = grad(vec![-2.0, 2.0], vec![-0.2, 0.03], vec![-2.0]);
        let next = subgradient_step(&d, &g, &StepSizes::uniform(0.01, 2, 2, 1));
        let close = |a: f64, b: f64| (a - b).abs() < 1e-15;
        assert!(close(next.mu[0], 0.22));
        assert!(close(next.mu[1], 0.03));
        assert!(close(next.gamma[0], 1.502));
        assert!(close(next.gamma[1], 0.0)); // 0 - 0.0003 projected
        assert!(close(next.upsilon[0], 0.42));
    }

    #[test]
    fn schedule_caps_first_move_at_constant() {
        let cfg = SystemConfig::<f64>::default();
        let scales = DualScales {
            rate_ref: vec![5e6],
            power_ref: vec![0.13],
            gamma_ref: vec![1e8],
            cap_ref: vec![0.8e9],
        };
        let g = grad(vec![-5e9], vec![-1e3], vec![-1e12]);
        let s = StepSizes::schedule(&cfg, 1, &g, &scales);
        let d = subgradient_step(&DualState::zeros(1, 1, 1), &g, &s);
        assert!((d.mu[0] - 0.1).abs() < 1e-12);
        assert!((d.gamma[0] - 0.1 * 1e8).abs() < 1e-3);
        assert!((d.upsilon[0] - 0.1).abs() < 1e-12);
        // small gradients move proportionally
        let g = grad(vec![-2.5e6], vec![0.0], vec![0.0]);
        let s = StepSizes::schedule(&cfg, 4, &g, &scales);
        let d = subgradient_step(&DualState::zeros(1, 1, 1), &g, &s);
        assert!((d.mu[0] - 0.1 / 2.0 * 0.5).abs() < 1e-12);
    }
}
