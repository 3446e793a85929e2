//! Time and id sources, swappable so tests get fixed values.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub trait Clock: Send + Sync {
    /// Unix seconds.
    fn now(&self) -> u64;
}

#[derive(Debug, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> u64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
    }
}

/// A clock that only moves when told to.
#[derive(Debug)]
pub struct ManualClock(AtomicU64);

impl ManualClock {
    pub fn new(now: u64) -> Self {
        Self(AtomicU64::new(now))
    }

    pub fn set(&self, now: u64) {
        self.0.store(now, Ordering::SeqCst);
    }

    pub fn advance(&self, secs: u64) {
        self.0.fetch_add(secs, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }
}

/// Seeded query ids plus a running sequence number.
#[derive(Debug)]
pub struct IdGenerator {
    inner: Mutex<(ChaCha8Rng, u64)>,
}

impl IdGenerator {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Mutex::new((ChaCha8Rng::seed_from_u64(seed), 0)),
        }
    }

    /// Returns `(id, sequence)`; ids are 16 lowercase hex digits.
    pub fn next(&self) -> (String, u64) {
        let mut guard = self.inner.lock().expect("id generator poisoned");
        let (rng, seq) = &mut *guard;
        let id = format!("{:016x}", rng.random::<u64>());
        let n = *seq;
        *seq += 1;
        (id, n)
    }
}
