//! Wall-clock budget for long-running solves.

use std::time::{Duration, Instant};

use crate::error::{Error, Result};

/// Deadline that numeric kernels poll at coarse intervals.
///
/// A budget of zero seconds expires immediately, which is handy for testing
/// the abort paths without waiting.
#[derive(Debug, Clone)]
pub struct Budget {
    deadline: Instant,
    limit: Duration,
}

impl Budget {
    /// Starts a budget of `seconds` from now.
    pub fn from_seconds(seconds: f64) -> Self {
        let limit = Duration::from_secs_f64(seconds.max(0.0));
        Budget {
            deadline: Instant::now() + limit,
            limit,
        }
    }

    /// True once the deadline has passed.
    pub fn exceeded(&self) -> bool {
        Instant::now() > self.deadline
    }

    /// Errors with [`Error::BudgetExceeded`] once the deadline has passed.
    pub fn check(&self) -> Result<()> {
        if self.exceeded() {
            Err(Error::BudgetExceeded(format!(
                "budget of {:.3}s expired",
                self.limit.as_secs_f64()
            )))
        } else {
            Ok(())
        }
    }
}

/// Checks an optional budget, treating `None` as unlimited.
pub(crate) fn check_opt(budget: Option<&Budget>) -> Result<()> {
    match budget {
        Some(b) => b.check(),
        None => Ok(()),
    }
}
