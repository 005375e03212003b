//! Per-run random streams derived from a master seed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Master seed and stream index of a run; enough to replay it in isolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedRecord {
    pub master: u64,
    pub stream: u64,
}

/// ChaCha stream `stream` of the generator keyed by `master`. Streams never
/// overlap, so run `k` of an estimator draws the same numbers however the
/// runs are scheduled.
#[derive(Debug, Clone)]
pub struct RunRng {
    inner: ChaCha8Rng,
    record: SeedRecord,
}

impl RunRng {
    pub fn new(master: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master);
        inner.set_stream(stream);
        RunRng {
            inner,
            record: SeedRecord { master, stream },
        }
    }

    pub fn record(&self) -> SeedRecord {
        self.record
    }
}

impl RngCore for RunRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}
