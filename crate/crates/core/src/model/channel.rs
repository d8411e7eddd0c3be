use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Linear channel power gains `g[k][m][n]`, stored row-major as
/// UE × station × resource block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelState<T> {
    pub num_ues: usize,
    pub num_dbs: usize,
    pub num_rbs: usize,
    pub gains: Vec<T>,
}

impl<T: Scalar> ChannelState<T> {
    pub fn new(num_ues: usize, num_dbs: usize, num_rbs: usize, gains: Vec<T>) -> Result<Self> {
        let ch = Self {
            num_ues,
            num_dbs,
            num_rbs,
            gains,
        };
        ch.validate()?;
        Ok(ch)
    }

    /// Builds a state by evaluating `f(k, m, n)` for every entry.
    pub fn from_fn(
        num_ues: usize,
        num_dbs: usize,
        num_rbs: usize,
        mut f: impl FnMut(usize, usize, usize) -> T,
    ) -> Result<Self> {
        let mut gains = Vec::with_capacity(num_ues * num_dbs * num_rbs);
        for k in 0..num_ues {
            for m in 0..num_dbs {
                for n in 0..num_rbs {
                    gains.push(f(k, m, n));
                }
            }
        }
        Self::new(num_ues, num_dbs, num_rbs, gains)
    }

    #[inline]
    pub fn index(&self, k: usize, m: usize, n: usize) -> usize {
        (k * self.num_dbs + m) * self.num_rbs + n
    }

    #[inline]
    pub fn gain(&self, k: usize, m: usize, n: usize) -> T {
        self.gains[self.index(k, m, n)]
    }

    pub fn shape(&self) -> [usize; 3] {
        [self.num_ues, self.num_dbs, self.num_rbs]
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_ues == 0 || self.num_dbs == 0 || self.num_rbs == 0 {
            return Err(invalid("gains", "every dimension must be at least 1"));
        }
        if self.gains.len() != self.num_ues * self.num_dbs * self.num_rbs {
            return Err(Error::ShapeMismatch(format!(
                "{} gains for shape {}x{}x{}",
                self.gains.len(),
                self.num_ues,
                self.num_dbs,
                self.num_rbs
            )));
        }
        if let Some(g) = self.gains.iter().find(|g| !(g.is_finite() && **g > T::zero())) {
            return Err(invalid("gains", format!("every gain must be finite and > 0, got {g}")));
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> ChannelState<U> {
        ChannelState {
            num_ues: self.num_ues,
            num_dbs: self.num_dbs,
            num_rbs: self.num_rbs,
            gains: self.gains.iter().map(|&g| U::lit(g.as_f64())).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_gains() {
        assert!(ChannelState::<f64>::new(1, 1, 2, vec![1e-10, 0.0]).is_err());
        assert!(ChannelState::<f64>::new(1, 1, 2, vec![1e-10, f64::NAN]).is_err());
        assert!(matches!(
            ChannelState::<f64>::new(1, 1, 2, vec![1e-10]),
            Err(Error::ShapeMismatch(_))
        ));
    }

    #[test]
    fn indexing_is_row_major() {
        let ch = ChannelState::<f64>::from_fn(2, 3, 4, |k, m, n| 1.0 + (100 * k + 10 * m + n) as f64)
            .unwrap();
        assert_eq!(ch.gain(1, 2, 3), 124.0);
        assert_eq!(ch.gains[ch.index(0, 1, 2)], 13.0);
    }
}
