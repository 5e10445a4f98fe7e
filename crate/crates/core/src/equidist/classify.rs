use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::equidist::fourier::{coefficient_with, convolve, scaled_law, CyclicDecomposition};
use crate::equidist::{ratio_f64, EntryDistribution};
use crate::error::{Error, Result};
use crate::measures::{Rational, SignedMeasure};
use crate::modules::ConcreteModule;

use super::fourier::Coefficient;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum TupleType {
    /// Every nontrivial coefficient is at most `eps / |M|`.
    Type1,
    /// Every nontrivial coefficient is small or has modulus 1.
    Type2,
    /// Some coefficient is neither.
    Type3,
}

impl TupleType {
    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TupleClassification {
    pub tuple: Vec<u32>,
    pub type_tag: TupleType,
    /// Whether the tuple generates `M`.
    pub spans: bool,
    /// For Type 2, a nontrivial character with coefficient of modulus 1; for Type 3,
    /// the character with the largest intermediate coefficient.
    pub witness: Option<Coefficient>,
    pub threshold: f64,
    /// `max_x P(sum m_i xi_i = x)`.
    #[serde(serialize_with = "super::ser_rational")]
    pub linf: Rational,
    /// `linf <= (1 + eps) / |M|`; always true for Type 1.
    pub equidistribution_bound: bool,
    /// Set when a float comparison landed within the slack of a threshold.
    pub ambiguous: bool,
}

/// Whether the tuple generates `M`, tested modulo `pi M` by Gaussian elimination over the residue field.
pub fn tuple_spans(module: &ConcreteModule, tuple: &[u32]) -> bool {
    let ring = module.ring();
    let q = ring.q();
    let rank = module.rank();
    let mut rows: Vec<Vec<u32>> = tuple.iter().map(|&m| module.decode(m).iter().map(|c| c % q).collect()).collect();
    let mut r = 0;
    for col in 0..rank {
        let Some(pivot) = (r..rows.len()).find(|&i| rows[i][col] != 0) else { continue };
        rows.swap(r, pivot);
        let inv = ring.field_inv(rows[r][col]).expect("nonzero residue");
        for i in 0..rows.len() {
            if i != r && rows[i][col] != 0 {
                let factor = ring.field_mul(rows[i][col], inv);
                for c in col..rank {
                    let sub = ring.field_mul(factor, rows[r][c]);
                    rows[i][c] = ring.field_add(rows[i][c], ring.field_neg(sub));
                }
            }
        }
        r += 1;
    }
    r == rank
}

/// Law of `sum_i m_i xi_i` for independent copies of `xi`.
pub fn tuple_law(module: &Arc<ConcreteModule>, xi: &EntryDistribution, tuple: &[u32]) -> Result<SignedMeasure> {
    let mut law = SignedMeasure::delta(module.clone(), 0)?;
    for &m in tuple {
        if m >= module.size() {
            return Err(Error::usage(format!("{m} is not an element of the module")));
        }
        law = convolve(&law, &scaled_law(module, xi, m)?)?;
    }
    Ok(law)
}

/// Classifies a tuple by the Fourier coefficients of `sum_i m_i xi_i`.
///
/// Types depend only on coefficient moduli, which the affine normalization of `xi`
/// leaves unchanged up to relabelling the tuple, so `xi` is used as given.
pub fn classify_tuple(
    module: &Arc<ConcreteModule>,
    tuple: &[u32],
    xi: &EntryDistribution,
    epsilon: Rational,
) -> Result<TupleClassification> {
    let law = tuple_law(module, xi, tuple)?;
    let mut c = classify_law(module, &law, epsilon)?;
    c.tuple = tuple.to_vec();
    c.spans = tuple_spans(module, tuple);
    Ok(c)
}

pub(crate) fn classify_law(
    module: &Arc<ConcreteModule>,
    law: &SignedMeasure,
    epsilon: Rational,
) -> Result<TupleClassification> {
    let dec = CyclicDecomposition::new(module);
    classify_with(&dec, module, law, epsilon)
}

pub(crate) fn classify_with(
    dec: &CyclicDecomposition,
    module: &Arc<ConcreteModule>,
    law: &SignedMeasure,
    epsilon: Rational,
) -> Result<TupleClassification> {
    if module.size() > super::FOURIER_CAP {
        return Err(Error::resource("module too large for Fourier classification"));
    }
    let size = module.size() as i128;
    let threshold = epsilon / size;
    let mut ambiguous = false;
    let mut unit_witness: Option<Coefficient> = None;
    let mut large_witness: Option<Coefficient> = None;
    for a in 1..module.size() {
        let c = coefficient_with(dec, law, a);
        let (small, amb) = c.at_most(threshold);
        ambiguous |= amb;
        if small {
            continue;
        }
        let (one, amb) = c.has_unit_modulus();
        ambiguous |= amb;
        if one {
            unit_witness.get_or_insert(c);
        } else if large_witness.as_ref().is_none_or(|w| c.modulus > w.modulus) {
            large_witness = Some(c);
        }
    }
    let (type_tag, witness) = match (large_witness, unit_witness) {
        (Some(w), _) => (TupleType::Type3, Some(w)),
        (None, Some(w)) => (TupleType::Type2, Some(w)),
        (None, None) => (TupleType::Type1, None),
    };
    let linf = law.linf_norm();
    Ok(TupleClassification {
        tuple: Vec::new(),
        type_tag,
        spans: true,
        witness,
        threshold: ratio_f64(&threshold),
        linf,
        equidistribution_bound: linf <= (Rational::one() + epsilon) / size,
        ambiguous,
    })
}

/// Largest modulus below 1 among the coefficients of all `m * xi`, with its exact square when known.
fn coefficient_bound(module: &Arc<ConcreteModule>, xi: &EntryDistribution) -> Result<Option<Coefficient>> {
    if module.size() > super::FOURIER_CAP {
        return Err(Error::resource("module too large for Fourier analysis"));
    }
    let dec = CyclicDecomposition::new(module);
    let mut best: Option<Coefficient> = None;
    for m in 0..module.size() {
        let law = scaled_law(module, xi, m)?;
        for a in 1..module.size() {
            let c = coefficient_with(&dec, &law, a);
            if c.has_unit_modulus().0 {
                continue;
            }
            if best.as_ref().is_none_or(|b| c.modulus > b.modulus) {
                best = Some(c);
            }
        }
    }
    Ok(best)
}

/// Smallest `T >= 1` with `C^T <= eps / |M|`, where `C` is the largest coefficient modulus
/// below 1 over all `m * xi`.
pub fn t_constant(module: &Arc<ConcreteModule>, xi: &EntryDistribution, epsilon: Rational) -> Result<u32> {
    if epsilon <= Rational::zero() {
        return Err(Error::usage("epsilon must be positive"));
    }
    let target = epsilon / module.size() as i128;
    let Some(c) = coefficient_bound(module, xi)? else { return Ok(1) };
    if c.modulus == 0.0 || target >= Rational::one() {
        return Ok(1);
    }
    let estimate = (ratio_f64(&target).ln() / c.modulus.ln()).ceil();
    let mut t = (estimate as i64 - 2).max(1) as u32;
    loop {
        let ok = match c.modulus_squared {
            Some(sq) => {
                let lhs = big(&sq).pow(t as i32);
                let rhs = big(&target).pow(2);
                lhs <= rhs
            }
            None => c.modulus.powi(t as i32) <= ratio_f64(&target),
        };
        if ok {
            return Ok(t);
        }
        t += 1;
    }
}

fn big(r: &Rational) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modules::ModuleType;
    use crate::ring::Ring;

    fn module(ring: &str, lambda: &[u32]) -> Arc<ConcreteModule> {
        let r = Ring::parse(ring).unwrap();
        Arc::new(ConcreteModule::new(&r, ModuleType::new(r.spec(), lambda.to_vec()).unwrap()).unwrap())
    }

    fn xi(m: &ConcreteModule, s: &str) -> EntryDistribution {
        EntryDistribution::parse(m.ring(), s).unwrap()
    }

    #[test]
    fn classification_examples() {
        let z2 = module("Z/2", &[1]);
        let c = classify_tuple(&z2, &[1], &xi(&z2, "0:1/2,1:1/2"), Rational::new(1, 100)).unwrap();
        assert_eq!(c.type_tag, TupleType::Type1);
        assert!(c.spans && c.equidistribution_bound);

        let z4 = module("Z/4", &[2]);
        let x = xi(&z4, "0:1/2,1:1/2");
        let c = classify_tuple(&z4, &[2, 2], &x, Rational::new(1, 20)).unwrap();
        assert_eq!(c.type_tag, TupleType::Type2);
        assert!(!c.spans);
        assert_eq!(c.witness.unwrap().character, 2);

        let c = classify_tuple(&z4, &[1], &x, Rational::new(1, 20)).unwrap();
        assert_eq!(c.type_tag, TupleType::Type3);
        assert_eq!(c.witness.as_ref().unwrap().modulus_squared, Some(Rational::new(1, 2)));
        assert_eq!(c.linf, Rational::new(1, 2));
        // eps / 4 >= 1 / sqrt 2 once eps >= 2 sqrt 2
        let c = classify_tuple(&z4, &[1], &x, Rational::from(3)).unwrap();
        assert_eq!(c.type_tag, TupleType::Type1);
    }

    #[test]
    fn span_detection() {
        let m = module("Z/4", &[2, 1]);
        assert!(tuple_spans(&m, &m.generators()));
        assert!(!tuple_spans(&m, &[m.generators()[0]]));
        let two_g = m.times(2, m.generators()[0]);
        assert!(!tuple_spans(&m, &[two_g, m.generators()[1]]));
        let f4 = module("F4[t]/t", &[1, 1]);
        let g = f4.generators();
        let alpha_g0 = f4.scale(2, g[0]);
        assert!(!tuple_spans(&f4, &[g[0], alpha_g0]));
        assert!(tuple_spans(&f4, &[f4.add(g[0], g[1]), alpha_g0]));
    }

    /// Type 1 laws obey the inverse-transform bound on the whole sweep.
    #[test]
    fn type_one_obeys_linf_bound() {
        let m = module("Z/4", &[2]);
        let x = xi(&m, "0:1/3,1:1/3,2:1/3");
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    let cl = classify_tuple(&m, &[a, b, c], &x, Rational::new(1, 2)).unwrap();
                    if cl.type_tag == TupleType::Type1 {
                        assert!(cl.equidistribution_bound);
                    }
                }
            }
        }
    }

    #[test]
    fn t_constant_examples() {
        let z4 = module("Z/4", &[2]);
        let x = xi(&z4, "0:1/2,1:1/2");
        assert_eq!(t_constant(&z4, &x, Rational::new(1, 2)).unwrap(), 6);
        assert_eq!(t_constant(&z4, &EntryDistribution::haar(z4.ring()), Rational::new(1, 2)).unwrap(), 1);
        let ts: Vec<u32> = [1, 2, 4, 8, 16].iter().map(|&d| t_constant(&z4, &x, Rational::new(1, d)).unwrap()).collect();
        assert!(ts.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(ts[0], 4);
        // float path: (2/3 + 1/3 w) over Z/3 has modulus sqrt(1/3)
        let z3 = module("Z/3", &[1]);
        let y = xi(&z3, "0:2/3,1:1/3");
        let t = t_constant(&z3, &y, Rational::new(1, 10)).unwrap();
        assert_eq!(t, 7);
    }
}
