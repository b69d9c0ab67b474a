//! Counter-based random streams.
//!
//! Every draw is a pure function of `(key, stream, position)`, computed with
//! the Philox4x64-10 block function. A replicate's stream is therefore fixed
//! by `(master_seed, replicate_index)` alone, without reference to any other
//! replicate, which is what lets the ensemble engine run replicates in any
//! order or on any number of threads.

use serde::{Deserialize, Serialize};

const PHILOX_M0: u64 = 0xD2E7_470E_E14C_6C93;
const PHILOX_M1: u64 = 0xCA5A_8263_9512_1157;
const PHILOX_W0: u64 = 0x9E37_79B9_7F4A_7C15;
const PHILOX_W1: u64 = 0xBB67_AE85_84CA_A73B;
const ROUNDS: usize = 10;

#[inline(always)]
fn mulhilo(a: u64, b: u64) -> (u64, u64) {
    let p = (a as u128) * (b as u128);
    ((p >> 64) as u64, p as u64)
}

/// Philox4x64 with 10 rounds (Salmon et al., Random123).
#[inline]
pub fn philox4x64_10(mut ctr: [u64; 4], mut key: [u64; 2]) -> [u64; 4] {
    for round in 0..ROUNDS {
        if round > 0 {
            key[0] = key[0].wrapping_add(PHILOX_W0);
            key[1] = key[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, ctr[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, ctr[2]);
        ctr = [hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0];
    }
    ctr
}

/// Size of the serialized generator state in bytes.
pub const RNG_STATE_BYTES: usize = 32;

/// Deterministic generator state.
///
/// The state is `(key, stream, block, lane)`: output number `4 * block + lane`
/// of the stream `(key, stream)`. The current Philox block is cached, but the
/// cache is derived data and never serialized.
#[derive(Clone, Debug)]
pub struct RngState {
    key: u64,
    stream: u64,
    block: u64,
    lane: u64,
    cache: [u64; 4],
}

impl PartialEq for RngState {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
            && self.stream == other.stream
            && self.block == other.block
            && self.lane == other.lane
    }
}

impl Eq for RngState {}

impl RngState {
    /// Position zero of stream `stream` under `key`.
    pub fn new(key: u64, stream: u64) -> Self {
        Self::at(key, stream, 0, 0)
    }

    fn at(key: u64, stream: u64, block: u64, lane: u64) -> Self {
        let cache = philox4x64_10([block, stream, 0, 0], [key, 0]);
        Self {
            key,
            stream,
            block,
            lane,
            cache,
        }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Number of 64-bit words drawn from this stream so far (mod 2^66).
    pub fn position(&self) -> u128 {
        (self.block as u128) * 4 + self.lane as u128
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        if self.lane == 4 {
            self.block = self.block.wrapping_add(1);
            self.cache = philox4x64_10([self.block, self.stream, 0, 0], [self.key, 0]);
            self.lane = 0;
        }
        let out = self.cache[self.lane as usize];
        self.lane += 1;
        out
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn to_bytes(&self) -> [u8; RNG_STATE_BYTES] {
        let mut out = [0u8; RNG_STATE_BYTES];
        for (i, word) in [self.key, self.stream, self.block, self.lane]
            .iter()
            .enumerate()
        {
            out[8 * i..8 * i + 8].copy_from_slice(&word.to_le_bytes());
        }
        out
    }

    /// Inverse of [`RngState::to_bytes`]. Returns `None` for an out-of-range lane.
    pub fn from_bytes(bytes: &[u8; RNG_STATE_BYTES]) -> Option<Self> {
        let word = |i: usize| {
            let mut w = [0u8; 8];
            w.copy_from_slice(&bytes[8 * i..8 * i + 8]);
            u64::from_le_bytes(w)
        };
        let lane = word(3);
        if lane > 4 {
            return None;
        }
        Some(Self::at(word(0), word(1), word(2), lane))
    }
}

impl Serialize for RngState {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_bytes(&self.to_bytes())
    }
}

impl<'de> Deserialize<'de> for RngState {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let bytes: Vec<u8> = Deserialize::deserialize(deserializer)?;
        let arr: [u8; RNG_STATE_BYTES] = bytes
            .as_slice()
            .try_into()
            .map_err(|_| serde::de::Error::invalid_length(bytes.len(), &"32 bytes"))?;
        RngState::from_bytes(&arr).ok_or_else(|| serde::de::Error::custom("lane out of range"))
    }
}

/// Stream for replicate `replicate_index` of an ensemble seeded by `master_seed`.
///
/// The map is injective: the seed becomes the Philox key and the index the
/// stream word of the counter, so distinct pairs never share a counter/key.
pub fn derive_stream(master_seed: u64, replicate_index: u64) -> RngState {
    RngState::new(master_seed, replicate_index)
}
