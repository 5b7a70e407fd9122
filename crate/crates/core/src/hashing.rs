//! Stable 64-bit FNV-1a hashing.
//!
//! Used wherever a hash must be reproducible across processes, platforms and
//! releases: feature hashing, dataset fingerprints, derived per-example seeds.
//! `std::hash` makes no stability promise, so it is not used for any value
//! that ends up in an artifact.

pub const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
pub const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[derive(Debug, Clone, Copy)]
pub struct Fnv64(u64);

impl Fnv64 {
    pub fn new() -> Self {
        Fnv64(FNV_OFFSET)
    }

    pub fn write(mut self, bytes: &[u8]) -> Self {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
        self
    }

    pub fn write_u64(self, v: u64) -> Self {
        self.write(&v.to_le_bytes())
    }

    pub fn finish(self) -> u64 {
        self.0
    }
}

impl Default for Fnv64 {
    fn default() -> Self {
        Self::new()
    }
}

/// Hash a single byte string.
pub fn hash_bytes(bytes: &[u8]) -> u64 {
    Fnv64::new().write(bytes).finish()
}

/// Derive a child seed from a base seed and a sequence of branch labels.
///
/// Distinct label paths give independent-looking streams while the whole
/// derivation stays a pure function of the run seed.
pub fn derive_seed(base: u64, labels: &[u64]) -> u64 {
    let mut h = Fnv64::new().write_u64(base);
    for &l in labels {
        h = h.write_u64(l);
    }
    h.finish()
}
