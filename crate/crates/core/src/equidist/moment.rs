use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::equidist::classify::{classify_with, tuple_spans, TupleType};
use crate::equidist::fourier::{convolve, scaled_law, CyclicDecomposition};
use crate::equidist::{ConvergenceParams, EntryDistribution};
use crate::error::{Error, Result};
use crate::measures::{Rational, SignedMeasure};
use crate::modules::{ConcreteModule, ModuleType};
use crate::montecarlo::{substream, StreamTag};
use crate::ring::Ring;

/// Largest `|M|^l` enumerated by the moment sums.
pub const MOMENT_BUDGET: u64 = 1_000_000;

fn ser_big<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn ser_big3<S: serde::Serializer>(r: &[BigRational; 3], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(3))?;
    for x in r {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

pub(crate) fn big_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn big(r: &Rational) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// `sum_{f in Sur(R^l, M)} max(P(f(X) = 0) - ((1 + eps0)/|M|)^k, 0)` for an `l x k` matrix
/// `X` of independent entries, together with its split by tuple type.
#[derive(Clone, Debug, Serialize)]
pub struct MomentTail {
    pub l: u32,
    pub k: u32,
    #[serde(serialize_with = "ser_big")]
    pub value: BigRational,
    pub decimal: f64,
    /// Contributions of Type 1, 2 and 3 tuples.
    #[serde(serialize_with = "ser_big3")]
    pub by_type: [BigRational; 3],
    /// Number of surjections of each type.
    pub type_counts: [u64; 3],
}

struct Setup {
    module: Arc<ConcreteModule>,
    dec: CyclicDecomposition,
    threshold: BigRational,
    xi_laws: Vec<SignedMeasure>,
}

fn setup(module_type: &ModuleType, xi: &EntryDistribution, l: u32, k: u32, params: &ConvergenceParams) -> Result<Setup> {
    if xi.spec() != module_type.spec() {
        return Err(Error::usage("entry distribution and module over different rings"));
    }
    let size = module_type
        .cardinality_u64()
        .ok_or_else(|| Error::resource("module too large"))?;
    let work = (size as u128).checked_pow(l).filter(|&w| w <= MOMENT_BUDGET as u128);
    if work.is_none() {
        return Err(Error::resource(format!("|M|^l = {size}^{l} exceeds the enumeration budget {MOMENT_BUDGET}")));
    }
    let ring = Ring::new(module_type.spec());
    let module = Arc::new(ConcreteModule::new(&ring, module_type.clone())?);
    let base = big(&((Rational::from(1) + params.epsilon0) / size as i128));
    let threshold = base.pow(k as i32);
    let xi_laws = (0..module.size()).map(|m| scaled_law(&module, xi, m)).collect::<Result<Vec<_>>>()?;
    Ok(Setup { dec: CyclicDecomposition::new(&module), module, threshold, xi_laws })
}

fn decode_tuple(mut index: u64, size: u64, l: u32) -> Vec<u32> {
    let mut t = vec![0u32; l as usize];
    for slot in t.iter_mut().rev() {
        *slot = (index % size) as u32;
        index /= size;
    }
    t
}

fn law_of(module: &Arc<ConcreteModule>, laws: &[SignedMeasure], tuple: &[u32]) -> Result<SignedMeasure> {
    let mut law = SignedMeasure::delta(module.clone(), 0)?;
    for &m in tuple {
        law = convolve(&law, &laws[m as usize])?;
    }
    Ok(law)
}

/// Exact moment-tail sum. `P(f(X) = 0)` factors over columns as `P(sum m_i xi_i = 0)^k`.
pub fn moment_tail_sum(
    module: &ModuleType,
    xi: &EntryDistribution,
    l: u32,
    k: u32,
    params: &ConvergenceParams,
) -> Result<MomentTail> {
    let s = setup(module, xi, l, k, params)?;
    let size = s.module.size() as u64;
    let total = size.pow(l);
    let zero = || ([BigRational::zero(), BigRational::zero(), BigRational::zero()], [0u64; 3]);
    let (by_type, type_counts) = (0..total)
        .into_par_iter()
        .map(|index| -> Result<Option<(TupleType, BigRational)>> {
            let tuple = decode_tuple(index, size, l);
            if !tuple_spans(&s.module, &tuple) {
                return Ok(None);
            }
            let law = law_of(&s.module, &s.xi_laws, &tuple)?;
            let class = classify_with(&s.dec, &s.module, &law, params.epsilon)?;
            let p = big(&law.weight(0)).pow(k as i32);
            let excess = p - &s.threshold;
            let contribution = if excess.is_positive() { excess } else { BigRational::zero() };
            Ok(Some((class.type_tag, contribution)))
        })
        .try_fold(zero, |mut acc, item| {
            if let Some((t, c)) = item? {
                acc.0[t.index()] += c;
                acc.1[t.index()] += 1;
            }
            Ok::<_, Error>(acc)
        })
        .try_reduce(zero, |mut a, b| {
            for i in 0..3 {
                a.0[i] += &b.0[i];
                a.1[i] += b.1[i];
            }
            Ok(a)
        })?;
    let value: BigRational = by_type.iter().sum();
    Ok(MomentTail { l, k, decimal: big_f64(&value), value, by_type, type_counts })
}

#[derive(Clone, Debug, Serialize)]
pub struct ReplacementReport {
    /// One string per row of the `l x k` grid, `1` marking a replaced entry.
    pub pattern: Vec<String>,
    #[serde(serialize_with = "ser_big")]
    pub replaced: BigRational,
    #[serde(serialize_with = "ser_big")]
    pub unreplaced: BigRational,
    /// `replaced <= unreplaced`.
    pub holds: bool,
}

/// The moment-tail sum with the entries marked in `pattern` (an `l x k` grid) replaced by
/// independent uniform ring elements, next to the unreplaced sum.
pub fn uniform_replacement_check(
    module: &ModuleType,
    xi: &EntryDistribution,
    pattern: &[Vec<bool>],
    l: u32,
    k: u32,
    params: &ConvergenceParams,
) -> Result<ReplacementReport> {
    if pattern.len() != l as usize || pattern.iter().any(|row| row.len() != k as usize) {
        return Err(Error::usage(format!("replacement pattern must be {l} x {k}")));
    }
    let s = setup(module, xi, l, k, params)?;
    let haar = EntryDistribution::haar(xi.ring());
    let haar_laws = (0..s.module.size()).map(|m| scaled_law(&s.module, &haar, m)).collect::<Result<Vec<_>>>()?;
    let mut columns: HashMap<Vec<bool>, i32> = HashMap::new();
    for j in 0..k as usize {
        *columns.entry(pattern.iter().map(|row| row[j]).collect()).or_insert(0) += 1;
    }
    let columns: Vec<(Vec<bool>, i32)> = columns.into_iter().collect();
    let size = s.module.size() as u64;
    let zero = || (BigRational::zero(), BigRational::zero());
    let (replaced, unreplaced) = (0..size.pow(l))
        .into_par_iter()
        .map(|index| -> Result<(BigRational, BigRational)> {
            let tuple = decode_tuple(index, size, l);
            if !tuple_spans(&s.module, &tuple) {
                return Ok(zero());
            }
            let plain = big(&law_of(&s.module, &s.xi_laws, &tuple)?.weight(0)).pow(k as i32);
            let mut mixed = BigRational::from_integer(1.into());
            for (col, count) in &columns {
                let mut law = SignedMeasure::delta(s.module.clone(), 0)?;
                for (i, &m) in tuple.iter().enumerate() {
                    let factor = if col[i] { &haar_laws[m as usize] } else { &s.xi_laws[m as usize] };
                    law = convolve(&law, factor)?;
                }
                mixed *= big(&law.weight(0)).pow(*count);
            }
            let clip = |x: BigRational| if x.is_positive() { x } else { BigRational::zero() };
            Ok((clip(mixed - &s.threshold), clip(plain - &s.threshold)))
        })
        .try_reduce(zero, |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    let pattern = pattern.iter().map(|row| row.iter().map(|&b| if b { '1' } else { '0' }).collect()).collect();
    Ok(ReplacementReport { pattern, holds: replaced <= unreplaced, replaced, unreplaced })
}

/// Runs [`uniform_replacement_check`] on `count` random patterns, each entry replaced with
/// probability 1/2. Pattern `i` is drawn from its own substream of `seed`.
pub fn replacement_sweep(
    module: &ModuleType,
    xi: &EntryDistribution,
    l: u32,
    k: u32,
    count: usize,
    seed: u64,
    params: &ConvergenceParams,
) -> Result<Vec<ReplacementReport>> {
    use rand::Rng;
    (0..count as u64)
        .map(|i| {
            let mut rng = substream(seed, l, StreamTag::Sweep, i);
            let pattern: Vec<Vec<bool>> = (0..l).map(|_| (0..k).map(|_| rng.random_bool(0.5)).collect()).collect();
            uniform_replacement_check(module, xi, &pattern, l, k, params)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup_z2(law: &str) -> (ModuleType, EntryDistribution) {
        let ring = Ring::parse("Z/2").unwrap();
        (ModuleType::new(ring.spec(), vec![1]).unwrap(), EntryDistribution::parse(&ring, law).unwrap())
    }

    #[test]
    fn worked_example() {
        let (m, xi) = setup_z2("0:3/5,1:2/5");
        let r = moment_tail_sum(&m, &xi, 2, 2, &ConvergenceParams::default()).unwrap();
        assert_eq!(r.value, BigRational::new(23.into(), 200.into()));
        assert_eq!(r.type_counts.iter().sum::<u64>(), 3);
        assert!(r.by_type[0].is_zero());
    }

    /// With `k = l` only the three singleton-like tuples contribute: `l (0.6^l - 0.55^l)`.
    #[test]
    fn closed_form_sweep() {
        let (m, xi) = setup_z2("0:3/5,1:2/5");
        for l in 2..=6u32 {
            let r = moment_tail_sum(&m, &xi, l, l, &ConvergenceParams::default()).unwrap();
            let expected = BigRational::from_integer(l.into())
                * (BigRational::new(3.into(), 5.into()).pow(l as i32) - BigRational::new(11.into(), 20.into()).pow(l as i32));
            assert_eq!(r.value, expected, "l={l}");
        }
    }

    #[test]
    fn haar_gives_zero() {
        for (ring, lambda) in [("Z/2", vec![1]), ("Z/4", vec![2]), ("Z/4", vec![1, 1]), ("F4[t]/t", vec![1])] {
            let r = Ring::parse(ring).unwrap();
            let m = ModuleType::new(r.spec(), lambda).unwrap();
            for l in m.rank() as u32..=3 {
                let t = moment_tail_sum(&m, &EntryDistribution::haar(&r), l, l + 1, &ConvergenceParams::default()).unwrap();
                assert!(t.value.is_zero(), "{ring} l={l}");
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let r = Ring::parse("Z/4").unwrap();
        let m = ModuleType::new(r.spec(), vec![2, 2]).unwrap();
        let xi = EntryDistribution::parse(&r, "0:1/2,1:1/2").unwrap();
        assert!(matches!(moment_tail_sum(&m, &xi, 6, 6, &ConvergenceParams::default()), Err(Error::Resource(_))));
    }

    #[test]
    fn replacement_extremes() {
        let (m, xi) = setup_z2("0:3/5,1:2/5");
        let params = ConvergenceParams::default();
        let none = vec![vec![false; 3]; 3];
        let r = uniform_replacement_check(&m, &xi, &none, 3, 3, &params).unwrap();
        assert_eq!(r.replaced, moment_tail_sum(&m, &xi, 3, 3, &params).unwrap().value);
        let all = vec![vec![true; 3]; 3];
        let r = uniform_replacement_check(&m, &xi, &all, 3, 3, &params).unwrap();
        assert!(r.replaced.is_zero() && r.holds);
        assert!(uniform_replacement_check(&m, &xi, &all, 3, 2, &params).is_err());
        assert_eq!(r.pattern, ["111"; 3]);
    }

    #[test]
    fn sweep_is_seeded() {
        let (m, xi) = setup_z2("0:3/5,1:2/5");
        let params = ConvergenceParams::default();
        let a = replacement_sweep(&m, &xi, 3, 3, 6, 8, &params).unwrap();
        let b = replacement_sweep(&m, &xi, 3, 3, 6, 8, &params).unwrap();
        assert_eq!(a.iter().map(|r| &r.pattern).collect::<Vec<_>>(), b.iter().map(|r| &r.pattern).collect::<Vec<_>>());
        assert!(a.iter().all(|r| r.holds));
    }
}
