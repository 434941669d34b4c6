//! Time sources. Pipelines measure every generation and verification through
//! a [`Clock`] so that mock runs can use simulated time and stay byte-identical.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

pub trait Clock: Send + Sync {
    /// Monotonic time since an arbitrary origin.
    fn now(&self) -> Duration;
}

#[derive(Debug)]
pub struct SystemClock {
    origin: Instant,
}

impl SystemClock {
    pub fn new() -> Self {
        Self { origin: Instant::now() }
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }
}

/// Simulated clock that advances by a fixed step on every reading.
#[derive(Debug)]
pub struct TickClock {
    step_micros: u64,
    ticks: AtomicU64,
}

impl TickClock {
    pub fn new(step: Duration) -> Self {
        Self { step_micros: step.as_micros() as u64, ticks: AtomicU64::new(0) }
    }
}

impl Clock for TickClock {
    fn now(&self) -> Duration {
        let t = self.ticks.fetch_add(1, Ordering::Relaxed);
        Duration::from_micros(t * self.step_micros)
    }
}

/// Seconds elapsed while running `f`, as measured by `clock`.
pub fn timed<T>(clock: &dyn Clock, f: impl FnOnce() -> T) -> (T, f64) {
    let start = clock.now();
    let out = f();
    let secs = clock.now().saturating_sub(start).as_secs_f64();
    (out, secs)
}
