use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::scalar::Scalar;

/// Multi-level water-filling power of one (UE, station, RB) triple:
/// `[B0/ln2 · weight/price − B0·N0/g]⁺`, with `weight = 1 + μ_k − υ·w_m`
/// and `price = γ_m + q·φ_E`.
pub fn waterfill_power<T: Scalar>(gain: T, weight: T, price: T, cfg: &SystemConfig<T>) -> Result<T> {
    if !(price.is_finite() && price > T::zero()) {
        return Err(Error::SolverState(format!(
            "water level undefined for power price {price}"
        )));
    }
    if !(gain.is_finite() && gain > T::zero()) {
        return Err(Error::SolverState(format!("non-positive gain {gain}")));
    }
    if weight <= T::zero() {
        return Ok(T::zero());
    }
    let b0 = cfg.rb_bandwidth_hz();
    let level = b0 / T::LN_2() * weight / price;
    Ok((level - cfg.rb_noise_w() / gain).max(T::zero()))
}

/// Per-RB Lagrangian contribution `weight·R(p) − price·p`.
#[inline]
pub fn h_metric<T: Scalar>(weight: T, price: T, rate: T, power: T) -> T {
    weight * rate - price * power
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> SystemConfig<f64> {
        SystemConfig::default()
    }

    #[test]
    fn clamps_below_noise_floor() {
        assert_eq!(waterfill_power(1e-30, 1.0, 1e6, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn non_positive_weight_gives_zero() {
        assert_eq!(waterfill_power(1e-9, 0.0, 1.0, &cfg()).unwrap(), 0.0);
        assert_eq!(waterfill_power(1e-9, -0.5, 1.0, &cfg()).unwrap(), 0.0);
    }

    #[test]
    fn unit_level_in_the_strong_channel_limit() {
        // weight 1, price = B0/ln2 per watt: level is exactly 1 W and the
        // noise term vanishes as g grows.
        let c = cfg();
        let price = c.rb_bandwidth_hz() / std::f64::consts::LN_2;
        let mut prev = 0.0;
        for e in [-14, -12, -10, -8] {
            let g = 10f64.powi(e);
            let p = waterfill_power(g, 1.0, price, &c).unwrap();
            assert!(p > prev && p < 1.0);
            assert!((1.0 - p - c.rb_noise_w() / g).abs() < 1e-12);
            prev = p;
        }
        assert!(1.0 - prev < 1e-6);
    }

    #[test]
    fn zero_price_is_a_state_error() {
        assert!(matches!(
            waterfill_power(1e-9, 1.0, 0.0, &cfg()),
            Err(Error::SolverState(_))
        ));
    }

    #[test]
    fn higher_mu_raises_positive_power() {
        let c = cfg();
        let price = 1e6;
        let p1 = waterfill_power(1e-10, 1.0 + 0.3, price, &c).unwrap();
        let p2 = waterfill_power(1e-10, 1.0 + 0.6, price, &c).unwrap();
        assert!(p1 > 0.0 && p2 > p1);
    }
}
