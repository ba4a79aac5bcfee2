use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

/// Deadline plus an external stop flag. Cheap to clone; all clones share the
/// flag. Once it reports `true` it keeps doing so.
#[derive(Debug, Clone)]
pub struct TerminationCondition {
    deadline: Instant,
    stop: Arc<AtomicBool>,
}

impl TerminationCondition {
    pub fn new(deadline: Instant) -> Self {
        TerminationCondition {
            deadline,
            stop: Arc::new(AtomicBool::new(false)),
        }
    }

    pub fn after(budget: Duration) -> Self {
        Self::new(Instant::now() + budget)
    }

    pub fn deadline(&self) -> Instant {
        self.deadline
    }

    pub fn signal(&self) {
        self.stop.store(true, Ordering::Release);
    }

    pub fn is_signaled(&self) -> bool {
        self.stop.load(Ordering::Acquire)
    }

    pub fn should_stop(&self) -> bool {
        if self.stop.load(Ordering::Acquire) {
            return true;
        }
        if Instant::now() >= self.deadline {
            self.stop.store(true, Ordering::Release);
            return true;
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signal_is_sticky_and_shared() {
        let tc = TerminationCondition::after(Duration::from_secs(60));
        let other = tc.clone();
        assert!(!tc.should_stop());
        other.signal();
        assert!(tc.should_stop());
        assert!(tc.should_stop());
    }

    #[test]
    fn deadline_latches() {
        let tc = TerminationCondition::new(Instant::now());
        assert!(tc.should_stop());
        assert!(tc.is_signaled());
    }
}
