//! Deterministic per-path random streams.
//!
//! Monte Carlo paths are independent work units that may be scheduled on any
//! number of workers, so the stream for path `i` must depend only on
//! `(seed, i)`, never on execution order. Each key is hashed into an initial
//! state and a per-stream odd Weyl increment; draws then apply the splitmix64
//! output mix to the advancing counter. Distinct keys get distinct increments
//! (up to hash collisions), hence unrelated counter orbits.

use rand::rand_core::{self, RngCore};

/// Identifies one path's stream: same pair, same stream, always.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomStreamKey {
    pub seed: u64,
    pub path_index: u64,
}

impl RandomStreamKey {
    pub fn new(seed: u64, path_index: u64) -> Self {
        RandomStreamKey { seed, path_index }
    }
}

/// splitmix64 finalizer: a bijective scramble of the counter.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Counter-mode generator: `state` advances by a per-stream odd increment,
/// output is the mixed state. Cheap enough for inner Euler loops (one add,
/// three xor-multiply rounds per draw).
#[derive(Debug, Clone)]
pub struct CounterRng {
    state: u64,
    inc: u64,
}

impl CounterRng {
    pub fn from_key(key: RandomStreamKey) -> Self {
        let h = mix(key.path_index.wrapping_mul(GOLDEN).wrapping_add(!key.seed));
        let state = mix(key.seed ^ h);
        // Odd increments generate full 2^64 orbits; different increments give
        // streams that are not shifts of each other.
        let inc = mix(h.wrapping_add(GOLDEN) ^ key.seed.rotate_left(17)) | 1;
        CounterRng { state, inc }
    }

    pub fn new(seed: u64, path_index: u64) -> Self {
        Self::from_key(RandomStreamKey::new(seed, path_index))
    }
}

impl RngCore for CounterRng {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(self.inc);
        mix(self.state)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        rand_core::impls::fill_bytes_via_next(self, dst)
    }
}
