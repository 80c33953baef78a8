//! Seed derivation and a small deterministic generator.
//!
//! Every random stream in a run hangs off one root seed:
//! `derive_seed(parent, label)` names a child stream, and children can be
//! derived again (`derive_seed(derive_seed(root, ROUND), round_index)`).
//! `SplitMix64` is only used for non-secret choices such as shuffled
//! evaluation points; noise for shares should come from a cryptographic
//! generator seeded through the same tree.

use rand_core::RngCore;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for `label` under `parent`.
pub fn derive_seed(parent: u64, label: u64) -> u64 {
    mix(mix(parent.wrapping_add(GOLDEN)) ^ label.wrapping_mul(GOLDEN).wrapping_add(0x632B_E59B_D9B4_E019))
}

/// Hashes a short ASCII tag into a label for [`derive_seed`].
pub const fn label(tag: &str) -> u64 {
    // FNV-1a
    let bytes = tag.as_bytes();
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut i = 0;
    while i < bytes.len() {
        h ^= bytes[i] as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
        i += 1;
    }
    h
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }
}

impl RngCore for SplitMix64 {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix(self.state)
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        for chunk in dst.chunks_mut(8) {
            let v = self.next_u64().to_le_bytes();
            chunk.copy_from_slice(&v[..chunk.len()]);
        }
    }
}
