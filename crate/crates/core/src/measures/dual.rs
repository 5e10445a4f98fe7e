use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use crate::error::Result;
use crate::modules::{ConcreteModule, Subset};
use crate::ring::{Ideal, Ring, RingSpec};

/// `|(R / pi^j)^*|`: `q^j - q^(j-1)` for `j >= 1` and `1` for the zero ring.
pub fn unit_count_mod(spec: RingSpec, j: u32) -> u64 {
    if j == 0 {
        1
    } else {
        let q = spec.q() as u64;
        q.pow(j) - q.pow(j - 1)
    }
}

/// Concrete dualizing module of a chain ring: `omega = R`, and for `I = (pi^j)` the
/// submodule `omega_I = Hom(R/I, omega)` is the annihilator of `I`, namely `pi^(e-j) R`.
#[derive(Clone, Debug)]
pub struct DualizingData {
    ring: Ring,
}

impl DualizingData {
    pub fn new(ring: &Ring) -> Self {
        Self { ring: ring.clone() }
    }

    pub fn omega_size(&self) -> u32 {
        self.ring.size()
    }

    /// Elements of `omega_I`, ascending.
    pub fn omega_ideal(&self, ideal: Ideal) -> Vec<u32> {
        let step = self.ring.q_pow(self.ring.e() - ideal.exponent.min(self.ring.e()));
        (0..self.ring.size()).step_by(step as usize).collect()
    }

    /// The ideal `I` with `omega_I` equal to `pi^v R`.
    pub fn ideal_for_image_valuation(&self, v: u32) -> Ideal {
        Ideal { exponent: self.ring.e() - v.min(self.ring.e()) }
    }
}

/// A class of homomorphisms `M -> omega` up to multiplication by units, identified by
/// its kernel. The representative is the lexicographically least tuple of generator images.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChiClass {
    /// Images of the standard generators of `M`, as ring codes.
    pub images: Vec<u32>,
    /// `im chi = omega_I`.
    pub ideal: Ideal,
    pub kernel: Subset,
    /// Number of homomorphisms in the class.
    pub class_size: u64,
}

impl ChiClass {
    pub fn image_size(&self, ring: &Ring) -> u64 {
        ring.q_pow(self.ideal.exponent) as u64
    }
}

/// Every class of `Hom(M, omega) / R^*`, ordered by ideal then representative.
///
/// A homomorphism sends generator `i` (of order `q^lambda_i`) to an element killed by
/// `pi^lambda_i`, i.e. a multiple of `pi^(e - lambda_i)`, so there are exactly `|M|` of them.
pub fn all_chi_classes(module: &ConcreteModule) -> Result<Vec<ChiClass>> {
    let ring = module.ring();
    let e = ring.e();
    let lambda = module.module_type().lambda().to_vec();
    let steps: Vec<u32> = lambda.iter().map(|&l| ring.q_pow(e - l)).collect();
    let coords: Vec<Vec<u32>> = (0..module.size()).map(|x| module.decode(x)).collect();
    let dual = DualizingData::new(ring);
    let mut groups: HashMap<FixedBitSet, (Vec<u32>, Ideal, u64)> = HashMap::new();
    let mut order = Vec::new();
    for h in 0..module.size() {
        let images: Vec<u32> = module.decode(h).iter().zip(&steps).map(|(&c, &s)| c * s).collect();
        let v = images.iter().map(|&b| ring.valuation_code(b)).min().unwrap_or(e);
        let mut kernel = FixedBitSet::with_capacity(module.size() as usize);
        for (x, xs) in coords.iter().enumerate() {
            let value = xs
                .iter()
                .zip(&images)
                .fold(0, |acc, (&a, &b)| ring.add_codes(acc, ring.mul_codes(a, b)));
            if value == 0 {
                kernel.insert(x);
            }
        }
        match groups.get_mut(&kernel) {
            Some(entry) => entry.2 += 1,
            None => {
                order.push(kernel.clone());
                groups.insert(kernel, (images, dual.ideal_for_image_valuation(v), 1));
            }
        }
    }
    let mut classes: Vec<ChiClass> = order
        .into_iter()
        .map(|k| {
            let (images, ideal, count) = groups.remove(&k).expect("grouped kernel");
            let elems: Vec<u32> = k.ones().map(|x| x as u32).collect();
            let kernel = Subset::from_elements(module, &elems).expect("kernels are subgroups");
            ChiClass { images, ideal, kernel, class_size: count }
        })
        .collect();
    classes.sort_by(|a, b| a.ideal.cmp(&b.ideal).then_with(|| a.images.cmp(&b.images)));
    Ok(classes)
}

/// Classes of surjections `M -> omega_I` modulo units.
pub fn chi_classes(module: &ConcreteModule, ideal: Ideal) -> Result<Vec<ChiClass>> {
    Ok(all_chi_classes(module)?.into_iter().filter(|c| c.ideal == ideal).collect())
}
