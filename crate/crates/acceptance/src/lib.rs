//! Runs acceptance checks under time limits and reports one line each.

use std::fmt;
use std::panic::{catch_unwind, UnwindSafe};
use std::time::{Duration, Instant};

#[derive(Debug, Clone)]
pub struct Verdict {
    pub number: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} criterion {:>2} {}: {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.number,
            self.title,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

/// Run `check`; it passes when it returns `Ok` within `limit`. Panics count
/// as failures.
pub fn run<F>(number: u32, title: &'static str, limit: Option<Duration>, check: F) -> Verdict
where
    F: FnOnce() -> Result<String, String> + UnwindSafe,
{
    let start = Instant::now();
    let result = catch_unwind(check).unwrap_or_else(|panic| {
        let message = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into());
        Err(message)
    });
    let elapsed = start.elapsed();
    let (passed, detail) = match result {
        Ok(detail) => match limit {
            Some(limit) if elapsed > limit => (false, format!("{detail}; over the {} s limit", limit.as_secs())),
            _ => (true, detail),
        },
        Err(detail) => (false, detail),
    };
    Verdict { number, title, passed, detail, elapsed }
}

/// `Err(message)` unless `condition` holds.
pub fn ensure(condition: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if condition {
        Ok(())
    } else {
        Err(message())
    }
}
