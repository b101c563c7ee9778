use std::sync::Arc;
use std::time::Duration;

use atlas_biblio::{Clock, MockClock, RateLimiter};
use proptest::prelude::*;

proptest! {
    #[test]
    fn no_window_exceeds_rate(rate in 1usize..12, gaps in prop::collection::vec(0u64..700, 1..80)) {
        let clock = MockClock::new();
        let limiter = RateLimiter::new(rate, Arc::new(clock.clone()));
        let mut grants = Vec::new();
        for g in gaps {
            clock.advance(Duration::from_millis(g));
            grants.push(limiter.acquire());
        }
        for (i, &start) in grants.iter().enumerate() {
            let in_window = grants[i..].iter().take_while(|&&t| t < start + Duration::from_secs(1)).count();
            prop_assert!(in_window <= rate, "{} grants within 1 s of {:?}", in_window, start);
        }
        prop_assert!(grants.windows(2).all(|w| w[0] <= w[1]));
        let _ = clock.now();
    }
}

#[test]
fn shared_limiter_across_threads() {
    let clock = MockClock::new();
    let limiter = RateLimiter::new(4, Arc::new(clock.clone()));
    let grants: Vec<Duration> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..4)
            .map(|_| {
                let l = limiter.clone();
                s.spawn(move || (0..5).map(|_| l.acquire()).collect::<Vec<_>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().unwrap()).collect()
    });
    let mut sorted = grants;
    sorted.sort();
    for (i, &start) in sorted.iter().enumerate() {
        let n = sorted[i..].iter().take_while(|&&t| t < start + Duration::from_secs(1)).count();
        assert!(n <= 4);
    }
}
