//! Exact signed measures on finite modules and their orthogonal decomposition.
//!
//! A measure is stored as integer numerators over one positive common
//! denominator, always reduced. Arithmetic is checked; overflow surfaces as
//! [`Error::Overflow`] rather than a wrong answer.

mod decompose;
mod dual;
mod inequalities;
mod sweep;

use std::sync::Arc;

use num_integer::Integer;
use num_rational::Ratio;

pub use decompose::{
    constructed_dimension, decompose, fourier_by_construction, fourier_module_test, space_dimension_formula,
    DecompositionComponent, Decomposer,
};
pub use dual::{all_chi_classes, chi_classes, unit_count_mod, ChiClass, DualizingData};
pub use inequalities::{
    isotypic_projection, isotypic_projection_direct, main_inequality_from_components, verify_l1_bound,
    verify_main_inequality, verify_main_inequality_all, InequalityReport, L1BoundReport,
};
pub use sweep::{sweep_measures, sweep_modules, MeasureSweep, ModuleSweep};

use crate::error::{Error, Result};
use crate::modules::{coset_labels, ConcreteModule, Subset};

pub type Rational = Ratio<i128>;

#[derive(Clone, Debug)]
pub struct SignedMeasure {
    module: Arc<ConcreteModule>,
    den: i128,
    num: Vec<i128>,
}

impl PartialEq for SignedMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.module.module_type() == other.module.module_type() && self.den == other.den && self.num == other.num
    }
}
impl Eq for SignedMeasure {}

pub(crate) fn checked_add(a: i128, b: i128) -> Result<i128> {
    a.checked_add(b).ok_or(Error::Overflow)
}
pub(crate) fn checked_mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

impl SignedMeasure {
    /// Measure with weights `num[x] / den`.
    pub fn from_integers(module: Arc<ConcreteModule>, num: Vec<i128>, den: i128) -> Result<Self> {
        if num.len() != module.size() as usize {
            return Err(Error::usage(format!("expected {} weights, got {}", module.size(), num.len())));
        }
        if den == 0 {
            return Err(Error::usage("zero denominator"));
        }
        let mut m = Self { module, den, num };
        m.normalize();
        Ok(m)
    }

    pub fn from_rationals(module: Arc<ConcreteModule>, weights: &[Rational]) -> Result<Self> {
        let den = weights.iter().try_fold(1i128, |acc, w| {
            let g = acc.gcd(w.denom());
            checked_mul(acc / g, *w.denom())
        })?;
        let num = weights
            .iter()
            .map(|w| checked_mul(*w.numer(), den / w.denom()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_integers(module, num, den)
    }

    pub fn zero(module: Arc<ConcreteModule>) -> Self {
        let n = module.size() as usize;
        Self { module, den: 1, num: vec![0; n] }
    }

    pub fn delta(module: Arc<ConcreteModule>, x: u32) -> Result<Self> {
        if x >= module.size() {
            return Err(Error::usage(format!("{x} is not an element of the module")));
        }
        let mut m = Self::zero(module);
        m.num[x as usize] = 1;
        Ok(m)
    }

    pub fn uniform(module: Arc<ConcreteModule>) -> Self {
        let n = module.size() as usize;
        Self { den: n as i128, num: vec![1; n], module }
    }

    fn normalize(&mut self) {
        if self.den < 0 {
            self.den = -self.den;
            for x in &mut self.num {
                *x = -*x;
            }
        }
        let g = self.num.iter().fold(self.den, |acc, x| acc.gcd(x));
        if g > 1 {
            self.den /= g;
            for x in &mut self.num {
                *x /= g;
            }
        }
    }

    pub fn module(&self) -> &Arc<ConcreteModule> {
        &self.module
    }
    pub fn denominator(&self) -> i128 {
        self.den
    }
    pub fn numerators(&self) -> &[i128] {
        &self.num
    }
    pub fn weight(&self, x: u32) -> Rational {
        Rational::new(self.num[x as usize], self.den)
    }
    pub fn weights(&self) -> Vec<Rational> {
        self.num.iter().map(|&x| Rational::new(x, self.den)).collect()
    }
    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|&x| x == 0)
    }
    pub fn is_probability(&self) -> bool {
        self.num.iter().all(|&x| x >= 0) && self.num.iter().sum::<i128>() == self.den
    }

    pub fn total_mass(&self) -> Result<Rational> {
        let s = self.num.iter().try_fold(0i128, |acc, &x| checked_add(acc, x))?;
        Ok(Rational::new(s, self.den))
    }

    fn same_module(&self, other: &Self) -> Result<()> {
        if !Arc::ptr_eq(&self.module, &other.module) && self.module.module_type() != other.module.module_type() {
            return Err(Error::usage("measures live on different modules"));
        }
        Ok(())
    }

    fn combine(&self, other: &Self, sign: i128) -> Result<Self> {
        self.same_module(other)?;
        let g = self.den.gcd(&other.den);
        let (fa, fb) = (other.den / g, self.den / g);
        let den = checked_mul(self.den, fa)?;
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(&a, &b)| checked_add(checked_mul(a, fa)?, checked_mul(sign * b, fb)?))
            .collect::<Result<Vec<_>>>()?;
        Self::from_integers(self.module.clone(), num, den)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1)
    }
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1)
    }

    pub fn scale(&self, r: Rational) -> Result<Self> {
        let num = self.num.iter().map(|&x| checked_mul(x, *r.numer())).collect::<Result<Vec<_>>>()?;
        Self::from_integers(self.module.clone(), num, checked_mul(self.den, *r.denom())?)
    }

    /// Euclidean inner product `sum_x mu(x) nu(x)`.
    pub fn inner_product(&self, other: &Self) -> Result<Rational> {
        self.same_module(other)?;
        let s = self
            .num
            .iter()
            .zip(&other.num)
            .try_fold(0i128, |acc, (&a, &b)| checked_add(acc, checked_mul(a, b)?))?;
        Ok(Rational::new(s, checked_mul(self.den, other.den)?))
    }

    pub fn l1_norm(&self) -> Result<Rational> {
        let s = self.num.iter().try_fold(0i128, |acc, &x| checked_add(acc, x.abs()))?;
        Ok(Rational::new(s, self.den))
    }

    pub fn l2_norm_squared(&self) -> Result<Rational> {
        self.inner_product(self)
    }

    pub fn l2_norm(&self) -> Result<f64> {
        let r = self.l2_norm_squared()?;
        Ok((*r.numer() as f64 / *r.denom() as f64).sqrt())
    }

    pub fn linf_norm(&self) -> Rational {
        let m = self.num.iter().map(|x| x.abs()).max().unwrap_or(0);
        Rational::new(m, self.den)
    }

    pub fn tv_distance(&self, other: &Self) -> Result<Rational> {
        Ok(self.sub(other)?.l1_norm()? / 2)
    }

    /// Average over cosets of the submodule `n`.
    pub fn proj(&self, n: &Subset) -> Result<Self> {
        if !n.is_submodule() {
            return Err(Error::usage("averaging requires an R-submodule"));
        }
        if n.bits().len() != self.module.size() as usize {
            return Err(Error::usage("submodule of a different module"));
        }
        let labels = coset_labels(&self.module, n);
        self.proj_by_labels(&labels, n.size())
    }

    pub(crate) fn proj_by_labels(&self, labels: &[u32], coset_size: u32) -> Result<Self> {
        let sums = coset_sums(&self.num, labels)?;
        let num = labels.iter().map(|&l| sums[l as usize]).collect();
        Self::from_integers(self.module.clone(), num, checked_mul(self.den, coset_size as i128)?)
    }

    /// Pushforward along `M -> M / pi^j M`, returned as weights per coset representative.
    pub fn reduce_mod_ideal(&self, j: u32) -> Vec<(u32, Rational)> {
        let mut sums = std::collections::BTreeMap::new();
        for x in 0..self.module.size() {
            *sums.entry(self.module.reduce_mod_pi(x, j)).or_insert(0i128) += self.num[x as usize];
        }
        sums.into_iter().map(|(k, v)| (k, Rational::new(v, self.den))).collect()
    }

    /// Checks nonnegativity and unit mass.
    pub fn require_probability(&self) -> Result<()> {
        if !self.is_probability() {
            return Err(Error::usage("a probability measure is required"));
        }
        Ok(())
    }

    /// `sum |nu(x)|` as a float, for reporting.
    pub fn l1_f64(&self) -> f64 {
        self.num.iter().map(|x| x.abs() as f64).sum::<f64>() / self.den as f64
    }
}

pub(crate) fn coset_sums(num: &[i128], labels: &[u32]) -> Result<Vec<i128>> {
    let mut sums = vec![0i128; labels.len()];
    for (x, &l) in labels.iter().enumerate() {
        sums[l as usize] = checked_add(sums[l as usize], num[x])?;
    }
    Ok(sums)
}

/// Exact `Ratio<i128>` to float, for reporting.
pub fn rational_to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
