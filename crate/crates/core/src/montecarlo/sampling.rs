use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::equidist::{lcm_denominators, EntryDistribution};
use crate::error::{Error, Result};
use crate::matrix::MatrixOverR;
use crate::ring::Ring;

/// Identity of the generator behind every stream. Bump when the derivation changes.
pub const STREAM_VERSION: &str = "chacha8-splitmix-v1";

/// Samples per substream; parallel work is split on these boundaries.
pub const BLOCK: u64 = 1024;

/// Purpose of a substream, mixed into its key.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StreamTag {
    Iid,
    Haar,
    Bootstrap,
    Swap,
    Sweep,
}

impl StreamTag {
    fn code(self) -> u64 {
        match self {
            StreamTag::Iid => 1,
            StreamTag::Haar => 2,
            StreamTag::Bootstrap => 3,
            StreamTag::Swap => 4,
            StreamTag::Sweep => 5,
        }
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent generator for `(seed, n, tag, block)`. The key depends on nothing else,
/// so results do not change with the number of worker threads.
pub fn substream(seed: u64, n: u32, tag: StreamTag, block: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    let mut h = splitmix(seed);
    for (i, word) in [n as u64, tag.code(), block, 0].into_iter().enumerate() {
        h = splitmix(h ^ word);
        key[i * 8..(i + 1) * 8].copy_from_slice(&h.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Draws ring elements from an entry distribution, or uniformly for Haar.
#[derive(Clone, Debug)]
pub enum EntrySampler {
    Haar { size: u32 },
    Weighted { codes: Vec<u32>, index: WeightedIndex<u128> },
}

impl EntrySampler {
    pub fn new(xi: &EntryDistribution) -> Result<Self> {
        if xi.is_haar() {
            return Ok(EntrySampler::Haar { size: xi.ring().size() });
        }
        let den = lcm_denominators(xi);
        let weights: Vec<u128> = xi.support().iter().map(|(_, w)| (w.numer() * (den / w.denom())) as u128).collect();
        let index = WeightedIndex::new(weights).map_err(|e| Error::usage(e.to_string()))?;
        Ok(EntrySampler::Weighted { codes: xi.support().iter().map(|(x, _)| *x).collect(), index })
    }

    pub fn haar(ring: &Ring) -> Self {
        EntrySampler::Haar { size: ring.size() }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        match self {
            EntrySampler::Haar { size } => rng.random_range(0..*size),
            EntrySampler::Weighted { codes, index } => codes[index.sample(rng)],
        }
    }
}

/// `n x (n + u)` matrix with independent entries drawn by `sampler`, filled row by row.
pub fn sample_matrix<R: Rng + ?Sized>(ring: &Ring, n: u32, u: i32, sampler: &EntrySampler, rng: &mut R) -> Result<MatrixOverR> {
    let cols = columns(n, u)?;
    let data = (0..n as usize * cols).map(|_| sampler.draw(rng)).collect();
    MatrixOverR::new(ring, n as usize, cols, data)
}

pub(crate) fn columns(n: u32, u: i32) -> Result<usize> {
    if n < 1 {
        return Err(Error::usage("n must be at least 1"));
    }
    let cols = n as i64 + u as i64;
    if cols < 0 {
        return Err(Error::usage(format!("n + u = {cols} is negative")));
    }
    Ok(cols as usize)
}
