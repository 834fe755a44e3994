use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// A reproducible random stream keyed by `(seed, stream)`.
///
/// The stream id selects a ChaCha stream, so trial `i` draws the same numbers
/// no matter which worker runs it or in what order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream: u64,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        RngStream { seed, stream }
    }

    /// An independent stream for a sub-purpose of the same trial.
    pub fn fork(&self, tag: u64) -> RngStream {
        RngStream {
            seed: splitmix64(self.seed ^ splitmix64(tag.wrapping_add(0x5851_f42d_4c95_7f2d))),
            stream: self.stream,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn head(s: RngStream) -> Vec<u64> {
        let mut r = s.rng();
        (0..4).map(|_| r.random()).collect()
    }

    #[test]
    fn reproducible_and_distinct() {
        let s = RngStream::new(7, 3);
        assert_eq!(head(s), head(s));
        assert_ne!(head(s), head(RngStream::new(7, 4)));
        assert_ne!(head(s), head(RngStream::new(8, 3)));
        assert_ne!(head(s.fork(1)), head(s.fork(2)));
        assert_eq!(head(s.fork(1)), head(RngStream::new(7, 3).fork(1)));
    }
}
