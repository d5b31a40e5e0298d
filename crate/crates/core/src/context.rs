use crate::asymptotics::{EpsGrid, Thresholds};
use crate::Scalar;

/// Grid plus thresholds: everything a finite certification needs.
#[derive(Clone, Debug, PartialEq)]
pub struct Context<T> {
    pub grid: EpsGrid<T>,
    pub thresholds: Thresholds,
}

impl<T: Scalar> Context<T> {
    pub fn new(grid: EpsGrid<T>, thresholds: Thresholds) -> Self {
        Context { grid, thresholds }
    }

    pub fn slack(&self) -> T {
        T::lit(self.thresholds.slack)
    }

    pub fn estimate_slack(&self) -> T {
        T::lit(self.thresholds.estimate_slack)
    }

    pub fn with_thresholds(&self, thresholds: Thresholds) -> Self {
        Context {
            grid: self.grid.clone(),
            thresholds,
        }
    }
}

impl<T: Scalar> Default for Context<T> {
    fn default() -> Self {
        Context {
            grid: EpsGrid::default(),
            thresholds: Thresholds::default(),
        }
    }
}
