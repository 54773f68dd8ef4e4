//! Seeded, splittable randomness.
//!
//! Every stream is a ChaCha8 keystream addressed by `(seed, purpose,
//! stream_id)`: the seed and purpose form the key, the stream id selects the
//! 64-bit nonce. Particle `k` of replica `j` draws from stream
//! `j * 2^32 + k`, so results do not depend on thread scheduling.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent key spaces so that, e.g., edge weights never reuse walk bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Walk = 0,
    Acceptance = 1,
    EdgeWeights = 2,
    Yule = 3,
    Sampling = 4,
    Killing = 5,
    Richardson = 6,
}

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self::for_purpose(seed, Purpose::Walk, stream_id)
    }

    pub fn for_purpose(seed: u64, purpose: Purpose, stream_id: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&(purpose as u64).to_le_bytes());
        key[16..24].copy_from_slice(b"uidla-rs");
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(stream_id);
        RngStream { seed, stream_id, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    #[inline]
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    #[inline]
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// `replica * 2^32 + index`.
#[inline]
pub fn stream_id(replica: u32, index: u64) -> u64 {
    debug_assert!(index < 1 << 32);
    ((replica as u64) << 32) | (index & 0xffff_ffff)
}

/// Stream factory for one replica of one run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Streams {
    pub seed: u64,
    pub replica: u32,
}

impl Streams {
    pub fn new(seed: u64, replica: u32) -> Self {
        Streams { seed, replica }
    }

    /// Stream for the `k`-th particle's walk (and its start choice).
    #[inline]
    pub fn particle(&self, k: u64) -> RngStream {
        RngStream::new(self.seed, stream_id(self.replica, k))
    }

    #[inline]
    pub fn aux(&self, purpose: Purpose, k: u64) -> RngStream {
        RngStream::for_purpose(self.seed, purpose, stream_id(self.replica, k))
    }

    /// An independent family for secondary experiments on the same replica.
    pub fn fork(&self, tag: u64) -> Streams {
        // splitmix64 finaliser
        let mut z = self.seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        Streams {
            seed: z ^ (z >> 31),
            replica: self.replica,
        }
    }
}
