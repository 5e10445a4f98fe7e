use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::equidist::EntryDistribution;
use crate::error::{Error, Result};
use crate::matrix::{howell_form, MatrixOverR};
use crate::measures::{checked_add, checked_mul, Rational};
use crate::montecarlo::sampling::{sample_matrix, substream, EntrySampler, StreamTag, BLOCK};

/// Largest `|supp xi|^n` summed over per matrix.
pub const SWAP_BUDGET: u64 = 1 << 20;

/// `d_TV(v + im M, u + im M)` for a random vector `v` with i.i.d. entries and a uniform `u`,
/// as laws on `R^n / im M`.
pub fn swap_distance(m: &MatrixOverR, xi: &EntryDistribution) -> Result<Rational> {
    let ring = m.ring();
    let n = m.rows();
    let support = xi.support();
    let vectors = (support.len() as u64)
        .checked_pow(n as u32)
        .filter(|&v| v <= SWAP_BUDGET)
        .ok_or_else(|| Error::resource(format!("|supp xi|^{n} exceeds the budget {SWAP_BUDGET}")))?;
    let hf = howell_form(m);
    let quotient_len = ring.e() * n as u32 - hf.span_length(ring);
    let quotient = (ring.q() as i128)
        .checked_pow(quotient_len)
        .ok_or(Error::Overflow)?;
    let mut mass: HashMap<Vec<u32>, Rational> = HashMap::new();
    let mut digits = vec![0usize; n];
    for _ in 0..vectors {
        let mut x: Vec<u32> = digits.iter().map(|&d| support[d].0).collect();
        let w = digits.iter().try_fold(Rational::from(1), |acc, &d| {
            let p = support[d].1;
            let num = checked_mul(*acc.numer(), *p.numer())?;
            let den = checked_mul(*acc.denom(), *p.denom())?;
            Ok::<_, Error>(Rational::new(num, den))
        })?;
        hf.reduce(ring, &mut x);
        let slot = mass.entry(x).or_insert_with(Rational::zero);
        *slot = checked_rational_add(*slot, w)?;
        for d in digits.iter_mut() {
            *d += 1;
            if *d < support.len() {
                break;
            }
            *d = 0;
        }
    }
    let uniform = Rational::new(1, quotient);
    let mut total = Rational::new(quotient - mass.len() as i128, quotient);
    for w in mass.values() {
        total = checked_rational_add(total, (w - uniform).abs())?;
    }
    Ok(total / 2)
}

fn checked_rational_add(a: Rational, b: Rational) -> Result<Rational> {
    let g = num_integer::Integer::gcd(a.denom(), b.denom());
    let den = checked_mul(*a.denom(), b.denom() / g)?;
    let num = checked_add(checked_mul(*a.numer(), den / a.denom())?, checked_mul(*b.numer(), den / b.denom())?)?;
    Ok(Rational::new(num, den))
}

#[derive(Clone, Debug, Serialize)]
pub struct SwapReport {
    pub n: u32,
    pub u: i32,
    pub samples: usize,
    /// Exact average of the per-matrix distances.
    pub mean_exact: String,
    pub mean: f64,
    pub std_error: f64,
    pub per_matrix: Vec<String>,
}

/// Averages the exact per-matrix distance over `samples` i.i.d. `n x (n + u)` matrices.
pub fn column_swap_exact(
    xi: &EntryDistribution,
    n: u32,
    u: i32,
    samples: usize,
    seed: u64,
) -> Result<SwapReport> {
    if samples == 0 {
        return Err(Error::usage("at least one matrix sample is required"));
    }
    let ring = xi.ring();
    let sampler = EntrySampler::new(xi)?;
    let blocks = (samples as u64).div_ceil(BLOCK);
    let per_block: Vec<Vec<Rational>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = substream(seed, n, StreamTag::Swap, b);
            let count = (samples as u64 - b * BLOCK).min(BLOCK);
            (0..count).map(|_| swap_distance(&sample_matrix(ring, n, u, &sampler, &mut rng)?, xi)).collect()
        })
        .collect::<Result<_>>()?;
    let values: Vec<Rational> = per_block.into_iter().flatten().collect();
    let mut sum = BigRational::zero();
    for v in &values {
        sum += BigRational::new(BigInt::from(*v.numer()), BigInt::from(*v.denom()));
    }
    let mean_exact = sum / BigInt::from(values.len());
    let mean = mean_exact.to_f64().unwrap_or(f64::NAN);
    let floats: Vec<f64> = values.iter().map(|v| *v.numer() as f64 / *v.denom() as f64).collect();
    let var = if floats.len() > 1 {
        floats.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (floats.len() - 1) as f64
    } else {
        0.0
    };
    Ok(SwapReport {
        n,
        u,
        samples,
        mean_exact: mean_exact.to_string(),
        mean,
        std_error: (var / floats.len() as f64).sqrt(),
        per_matrix: values.iter().map(|v| v.to_string()).collect(),
    })
}
