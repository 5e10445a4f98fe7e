use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::decompose::{DecompositionComponent, Decomposer};
use crate::measures::dual::unit_count_mod;
use crate::measures::{Rational, SignedMeasure};
use crate::modules::{ModuleType, Subset};
use crate::ring::Ideal;

fn big(r: &Rational) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Outcome of `(1/|M/IM|) sum_{M/N = omega_I} |nu_N|_1 <= |nu mod I|_2 / sqrt|(R/I)^*|`.
#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    pub ideal_exponent: u32,
    pub lhs: f64,
    pub rhs: f64,
    /// Exact comparison of `lhs^2 * |(R/I)^*|` against `|nu mod I|_2^2`.
    pub holds: bool,
    /// Number of `N` with `M/N` isomorphic to `omega_I`.
    pub kernels: usize,
}

/// Checks the main inequality for one ideal, given an existing decomposition of `nu`.
pub fn main_inequality_from_components(
    dec: &Decomposer,
    nu: &SignedMeasure,
    components: &[DecompositionComponent],
    ideal: Ideal,
) -> Result<InequalityReport> {
    let module = dec.module();
    let spec = module.ring().spec();
    let j = ideal.exponent;
    if j > spec.e() {
        return Err(Error::usage(format!("ideal (pi^{j}) is not an ideal of {spec}")));
    }
    let target = ModuleType::cyclic(spec, j)?;
    let mut lhs = BigRational::zero();
    let mut kernels = 0;
    for c in components.iter().filter(|c| c.quotient == target) {
        lhs += big(&c.component.l1_norm()?);
        kernels += 1;
    }
    // |M / pi^j M| = q^(sum min(lambda_i, j))
    let quotient_len: u32 = module.module_type().lambda().iter().map(|&l| l.min(j)).sum();
    let quotient_size = BigInt::from(spec.q()).pow(quotient_len);
    lhs /= BigRational::from_integer(quotient_size);
    let mut l2 = BigRational::zero();
    for (_, w) in nu.reduce_mod_ideal(j) {
        let w = big(&w);
        l2 += &w * &w;
    }
    let units = BigRational::from_integer(BigInt::from(unit_count_mod(spec, j)));
    let holds = &lhs * &lhs * &units <= l2;
    Ok(InequalityReport {
        ideal_exponent: j,
        lhs: to_f64(&lhs),
        rhs: (to_f64(&l2) / to_f64(&units)).sqrt(),
        holds,
        kernels,
    })
}

pub fn verify_main_inequality(dec: &Decomposer, nu: &SignedMeasure, ideal: Ideal) -> Result<InequalityReport> {
    let components = dec.decompose(nu)?;
    main_inequality_from_components(dec, nu, &components, ideal)
}

/// The main inequality for every ideal of the ring, from one decomposition.
pub fn verify_main_inequality_all(dec: &Decomposer, nu: &SignedMeasure) -> Result<Vec<InequalityReport>> {
    let components = dec.decompose(nu)?;
    dec.module()
        .ring()
        .enumerate_ideals()
        .into_iter()
        .map(|i| main_inequality_from_components(dec, nu, &components, i))
        .collect()
}

/// `|nu_chi|_1^2 <= |M/N|` for a probability measure, one entry per Fourier kernel.
#[derive(Clone, Debug, Serialize)]
pub struct L1BoundReport {
    pub kernel: usize,
    pub l1_squared: f64,
    pub quotient_size: u64,
    pub holds: bool,
}

pub fn verify_l1_bound(dec: &Decomposer, nu: &SignedMeasure) -> Result<Vec<L1BoundReport>> {
    nu.require_probability()?;
    let size = dec.module().size() as u64;
    dec.decompose(nu)?
        .into_iter()
        .filter(|c| c.chi_class.is_some())
        .map(|c| {
            let l1 = big(&c.component.l1_norm()?);
            let quotient_size = size / dec.lattice().member(c.kernel).size() as u64;
            let sq = &l1 * &l1;
            Ok(L1BoundReport {
                kernel: c.kernel,
                l1_squared: to_f64(&sq),
                quotient_size,
                holds: sq <= BigRational::from_integer(BigInt::from(quotient_size)),
            })
        })
        .collect()
}

/// `sum_{M/N = omega_I} nu_N`, summed from the decomposition.
pub fn isotypic_projection(dec: &Decomposer, nu: &SignedMeasure, ideal: Ideal) -> Result<SignedMeasure> {
    let target = ModuleType::cyclic(dec.module().ring().spec(), ideal.exponent)?;
    let mut acc = SignedMeasure::zero(dec.module().clone());
    for c in dec.decompose(nu)?.into_iter().filter(|c| c.quotient == target) {
        acc = acc.add(&c.component)?;
    }
    Ok(acc)
}

/// The same projection without the lattice: `proj_{pi^j M} nu - proj_{pi^(j-1) M} nu`,
/// or `proj_M nu` for `I = R`.
pub fn isotypic_projection_direct(nu: &SignedMeasure, ideal: Ideal) -> Result<SignedMeasure> {
    let module = nu.module();
    let power = |k: u32| -> Result<Subset> {
        let elems: Vec<u32> = module
            .pi_power_image(k)
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(x, _)| x as u32)
            .collect();
        Subset::from_elements(module, &elems)
    };
    let upper = nu.proj(&power(ideal.exponent)?)?;
    if ideal.exponent == 0 {
        return Ok(upper);
    }
    upper.sub(&nu.proj(&power(ideal.exponent - 1)?)?)
}
