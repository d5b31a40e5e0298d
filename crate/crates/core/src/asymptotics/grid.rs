use crate::error::{Error, Result};
use crate::Scalar;

/// Smallest admissible grid length.
pub const MIN_GRID_LEN: usize = 8;
/// Consecutive values must satisfy `eps[i+1] <= MAX_RATIO * eps[i]`.
pub const MAX_RATIO: f64 = 0.95;
pub const DEFAULT_TAIL_FRACTION: f64 = 0.5;

/// Finite descending sample of the index set `(0, 1]`.
///
/// "For sufficiently small eps" is read as "on the tail of the grid": the smallest
/// `tail_fraction` of its values.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsGrid<T> {
    values: Vec<T>,
    tail_fraction: f64,
}

impl<T: Scalar> EpsGrid<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.len() < MIN_GRID_LEN {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_GRID_LEN} values, got {}",
                values.len()
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            if !(v > T::zero() && v <= T::one()) {
                return Err(Error::InvalidGrid(format!(
                    "value #{i} = {v} outside (0,1]"
                )));
            }
        }
        let max_ratio = T::lit(MAX_RATIO);
        for (i, w) in values.windows(2).enumerate() {
            if !(w[1] <= w[0] * max_ratio) {
                return Err(Error::InvalidGrid(format!(
                    "values #{i} and #{} are not decreasing with ratio <= {MAX_RATIO}",
                    i + 1
                )));
            }
        }
        Ok(EpsGrid {
            values,
            tail_fraction: DEFAULT_TAIL_FRACTION,
        })
    }

    /// `eps_k = 2^-k` for `k = k_min..=k_max`.
    pub fn dyadic(k_min: u32, k_max: u32) -> Result<Self> {
        if k_max < k_min {
            return Err(Error::InvalidGrid(format!("k_max {k_max} < k_min {k_min}")));
        }
        let two = T::lit(2.0);
        Self::new((k_min..=k_max).map(|k| two.powi(-(k as i32))).collect())
    }

    /// `count` dyadic values ending at `2^-k_max` (the CLI grid spec).
    pub fn dyadic_ending_at(k_max: u32, count: u32) -> Result<Self> {
        if count == 0 || count > k_max + 1 {
            return Err(Error::InvalidGrid(format!(
                "cannot place {count} dyadic points ending at 2^-{k_max}"
            )));
        }
        Self::dyadic(k_max + 1 - count, k_max)
    }

    pub fn with_tail_fraction(mut self, fraction: f64) -> Result<Self> {
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(Error::InvalidGrid(format!(
                "tail fraction {fraction} outside (0,1]"
            )));
        }
        self.tail_fraction = fraction;
        Ok(self)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn tail_fraction(&self) -> f64 {
        self.tail_fraction
    }

    /// The smallest `ceil(len * tail_fraction)` values, still in descending order.
    pub fn tail(&self) -> &[T] {
        let n = ((self.values.len() as f64) * self.tail_fraction).ceil() as usize;
        let n = n.clamp(1, self.values.len());
        &self.values[self.values.len() - n..]
    }

    pub fn smallest(&self) -> T {
        *self.values.last().expect("grid is never empty")
    }
}

impl<T: Scalar> Default for EpsGrid<T> {
    /// `2^-k`, `k = 4..=40`.
    fn default() -> Self {
        Self::dyadic(4, 40).expect("default grid is valid")
    }
}
