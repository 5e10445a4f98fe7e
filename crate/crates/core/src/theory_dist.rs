//! Limit distributions for cokernels of large random matrices.
//!
//! All evaluators return a value together with a certified bound on its absolute
//! error, covering both truncation of the infinite product and float rounding.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::modules::ModuleType;
use crate::ring::RingSpec;

/// Default number of product factors.
pub const DEFAULT_TERMS: u32 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Certified {
    pub value: f64,
    /// The true value lies in `[value - tail_bound, value + tail_bound]`.
    pub tail_bound: f64,
}

impl Certified {
    fn scaled(self, denom: &BigUint) -> Certified {
        let d = denom.to_f64().unwrap_or(f64::INFINITY);
        Certified { value: self.value / d, tail_bound: self.tail_bound / d + self.value / d * f64::EPSILON }
    }

    pub fn contains(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.tail_bound
    }
}

/// `c_u(q) = prod_{i > u} (1 - q^-i)`, truncated after `terms` factors.
///
/// The omitted tail `T` satisfies `exp(-s) <= T <= 1` with
/// `s = sum_{i > N} q^-i / (1 - q^-i) <= q^-N / ((q - 1)(1 - q^-(N+1)))`,
/// so the truncated product `P` is within `P * s` of the true value.
pub fn c_constant(q: u64, u: u32, terms: u32) -> Result<Certified> {
    if q < 2 {
        return Err(Error::usage("residue field size must be at least 2"));
    }
    if terms < 1 {
        return Err(Error::usage("at least one product term is required"));
    }
    let qf = q as f64;
    let mut product = 1.0f64;
    for i in (u + 1)..=(u + terms) {
        product *= 1.0 - qf.powi(-(i as i32));
    }
    let last = (u + terms) as i32;
    let tail = qf.powi(-last) / ((qf - 1.0) * (1.0 - qf.powi(-(last + 1))));
    let rounding = 4.0 * (terms as f64 + 1.0) * f64::EPSILON * product;
    Ok(Certified { value: product, tail_bound: product * tail + rounding })
}

fn denominator(a: &ModuleType, u: u32) -> BigUint {
    a.cardinality().pow(u) * a.aut_count()
}

/// `c_0(q) / |Aut A|`, the square Haar limit law.
pub fn friedman_washington_prob(a: &ModuleType, terms: u32) -> Result<Certified> {
    let c = c_constant(a.spec().q() as u64, 0, terms)?;
    Ok(c.scaled(&a.aut_count()))
}

/// `c_u(q) / (|A|^u |Aut A|)`, the limit law for `n x (n + u)` Haar matrices over `Z_p`.
pub fn rectangular_prob(a: &ModuleType, u: u32, terms: u32) -> Result<Certified> {
    let c = c_constant(a.spec().q() as u64, u, terms)?;
    Ok(c.scaled(&denominator(a, u)))
}

/// `(1 / (|A|^u |Aut A|)) prod_{i > d(A) + u} (1 - q^-i)` for `u > 0`.
pub fn sawin_wood_prob(a: &ModuleType, u: u32, terms: u32) -> Result<Certified> {
    if u == 0 {
        return Err(Error::usage("the finite-ring formula is only available for u > 0"));
    }
    let c = c_constant(a.spec().q() as u64, a.d_invariant() as u32 + u, terms)?;
    Ok(c.scaled(&denominator(a, u)))
}

/// Limit law for `n x (n + u)` matrices over a fixed ring.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitLaw {
    #[serde(serialize_with = "serialize_spec")]
    pub ring: RingSpec,
    pub u: u32,
    pub truncation_terms: u32,
}

fn serialize_spec<S: serde::Serializer>(spec: &RingSpec, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&spec.to_string())
}

impl LimitLaw {
    pub fn new(ring: RingSpec, u: u32, truncation_terms: u32) -> Result<Self> {
        if truncation_terms < 1 {
            return Err(Error::usage("at least one product term is required"));
        }
        Ok(Self { ring, u, truncation_terms })
    }

    /// `u = 0` uses `c_0 / |Aut A|`; `u > 0` uses the finite-ring formula.
    pub fn prob(&self, a: &ModuleType) -> Result<Certified> {
        if a.spec() != self.ring {
            return Err(Error::usage("module type over a different ring"));
        }
        if self.u == 0 {
            friedman_washington_prob(a, self.truncation_terms)
        } else {
            sawin_wood_prob(a, self.u, self.truncation_terms)
        }
    }

    /// Probabilities of every type with `log_q |A| <= max_length`, most likely first.
    pub fn table(&self, max_length: u32) -> Result<Vec<(ModuleType, Certified)>> {
        let mut rows = ModuleType::enumerate(self.ring, max_length)
            .into_iter()
            .map(|a| self.prob(&a).map(|p| (a, p)))
            .collect::<Result<Vec<_>>>()?;
        rows.sort_by(|x, y| {
            y.1.value
                .partial_cmp(&x.1.value)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then_with(|| x.0.length().cmp(&y.0.length()))
                .then_with(|| x.0.cmp(&y.0))
        });
        Ok(rows)
    }
}
