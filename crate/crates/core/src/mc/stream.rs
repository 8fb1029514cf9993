//! Counter-based uniforms keyed by `(master seed, replica, element)`.
//!
//! The uniform attached to an element is a pure function of those three
//! values, so lazily sampled lattices give the same configuration whatever
//! order the exploration queries them in, on any number of threads.

use crate::lattice::Element;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;
const ODD: u64 = 0xD6E8_FEB8_6659_FD93;

/// SplitMix64 finalizer; a bijection on `u64`.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
fn absorb(h: u64, word: u64) -> u64 {
    mix(h.wrapping_add(GOLDEN) ^ word.wrapping_mul(ODD))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Stream {
    seed: u64,
    replica: u64,
    key: u64,
}

impl Stream {
    pub fn new(seed: u64, replica: u64) -> Stream {
        Stream {
            seed,
            replica,
            key: absorb(absorb(mix(seed ^ GOLDEN), replica), 0),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn replica(&self) -> u64 {
        self.replica
    }

    /// An independent stream for a different purpose under the same seed.
    pub fn derive(seed: u64, purpose: u64, replica: u64) -> Stream {
        Stream::new(absorb(mix(seed), purpose), replica)
    }

    pub fn bits(&self, item: &Element) -> u64 {
        let (tag, extra) = match item {
            Element::Site(_) => (1u64, 0u64),
            Element::Edge(e) => (2, e.axis as u64),
            Element::SplitEdge(e) => (3, e.label as u64),
            Element::SplitSite(s) => (4, s.index as u64),
        };
        let base = item.base();
        let mut h = absorb(self.key, tag);
        h = absorb(h, base.dim() as u64);
        for &c in base.coords() {
            h = absorb(h, c as i64 as u64);
        }
        absorb(h, extra)
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&self, item: &Element) -> f64 {
        (self.bits(item) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
