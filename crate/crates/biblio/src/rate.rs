use std::collections::VecDeque;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use crate::clock::Clock;

const WINDOW: Duration = Duration::from_secs(1);

/// Sliding-window limiter: at most `max_per_second` grants in any window of
/// one second. Clones share the same window.
#[derive(Clone)]
pub struct RateLimiter {
    max_per_second: usize,
    issued: Arc<Mutex<VecDeque<Duration>>>,
    clock: Arc<dyn Clock>,
}

impl std::fmt::Debug for RateLimiter {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RateLimiter").field("max_per_second", &self.max_per_second).finish()
    }
}

impl RateLimiter {
    pub fn new(max_per_second: usize, clock: Arc<dyn Clock>) -> Self {
        assert!(max_per_second > 0, "rate must be positive");
        RateLimiter {
            max_per_second,
            issued: Arc::new(Mutex::new(VecDeque::new())),
            clock,
        }
    }

    pub fn max_per_second(&self) -> usize {
        self.max_per_second
    }

    /// Blocks until a request may be issued and records it. Returns the grant time.
    pub fn acquire(&self) -> Duration {
        let mut issued = self.issued.lock().expect("rate limiter lock");
        loop {
            let now = self.clock.now();
            while issued.front().is_some_and(|&t| t + WINDOW <= now) {
                issued.pop_front();
            }
            if issued.len() < self.max_per_second {
                issued.push_back(now);
                return now;
            }
            let oldest = *issued.front().expect("window is full");
            self.clock.sleep(oldest + WINDOW - now);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clock::MockClock;

    #[test]
    fn burst_is_spread_over_windows() {
        let clock = MockClock::new();
        let limiter = RateLimiter::new(3, Arc::new(clock.clone()));
        let grants: Vec<Duration> = (0..7).map(|_| limiter.acquire()).collect();
        assert_eq!(grants[..3], [Duration::ZERO; 3]);
        assert_eq!(grants[3], Duration::from_secs(1));
        assert_eq!(grants[6], Duration::from_secs(2));
    }
}
