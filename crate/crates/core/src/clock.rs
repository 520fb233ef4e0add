//! Virtual/wall clock behind one interface. Tests and simulated
//! campaigns run under the virtual clock so boot delays and benchmark
//! durations cost no real time; a real device uses the wall clock on
//! the identical code path.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

#[derive(Debug)]
enum Inner {
    Virtual(AtomicU64),
    Wall(Instant),
}

#[derive(Debug)]
pub struct Clock {
    inner: Inner,
}

impl Clock {
    pub fn virtual_clock() -> Self {
        Clock {
            inner: Inner::Virtual(AtomicU64::new(0)),
        }
    }

    pub fn wall_clock() -> Self {
        Clock {
            inner: Inner::Wall(Instant::now()),
        }
    }

    pub fn is_virtual(&self) -> bool {
        matches!(self.inner, Inner::Virtual(_))
    }

    /// Milliseconds since this clock's epoch.
    pub fn now_ms(&self) -> u64 {
        match &self.inner {
            Inner::Virtual(ms) => ms.load(Ordering::SeqCst),
            Inner::Wall(epoch) => epoch.elapsed().as_millis() as u64,
        }
    }

    /// Let `ms` milliseconds pass: instantly on the virtual clock, by
    /// sleeping on the wall clock.
    pub fn advance_ms(&self, ms: u64) {
        match &self.inner {
            Inner::Virtual(v) => {
                v.fetch_add(ms, Ordering::SeqCst);
            }
            Inner::Wall(_) => std::thread::sleep(Duration::from_millis(ms)),
        }
    }
}
