use std::sync::Arc;

use crate::error::{Error, Result};
use crate::modules::ModuleType;
use crate::ring::Ring;

/// Largest module given an explicit element representation.
pub const CONCRETE_CAP: u64 = 1 << 16;
const ADD_TABLE_LIMIT: u32 = 256;

/// `R/pi^l1 + ... + R/pi^lk` with elements indexed by `0..|M|`.
///
/// Coordinate `i` holds a ring code below `q^li`; the index is the mixed-radix
/// number with the first coordinate most significant, so index order is the
/// lexicographic order on coordinate tuples.
#[derive(Clone)]
pub struct ConcreteModule {
    ring: Ring,
    mtype: ModuleType,
    radix: Vec<u32>,
    stride: Vec<u32>,
    size: u32,
    add_table: Option<Arc<Vec<u16>>>,
}

impl std::fmt::Debug for ConcreteModule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ConcreteModule({} over {})", self.mtype.shorthand(), self.ring.spec())
    }
}

impl ConcreteModule {
    pub fn new(ring: &Ring, mtype: ModuleType) -> Result<Self> {
        if mtype.spec() != ring.spec() {
            return Err(Error::usage("module type and ring disagree"));
        }
        let size = mtype
            .cardinality_u64()
            .filter(|&s| s <= CONCRETE_CAP)
            .ok_or_else(|| Error::resource(format!("module {} exceeds {CONCRETE_CAP} elements", mtype.shorthand())))?
            as u32;
        let radix: Vec<u32> = mtype.lambda().iter().map(|&a| ring.q_pow(a)).collect();
        let mut stride = vec![1u32; radix.len()];
        for i in (0..radix.len().saturating_sub(1)).rev() {
            stride[i] = stride[i + 1] * radix[i + 1];
        }
        let mut module = Self { ring: ring.clone(), mtype, radix, stride, size, add_table: None };
        if size <= ADD_TABLE_LIMIT {
            let n = size as usize;
            let mut table = vec![0u16; n * n];
            for a in 0..size {
                for b in 0..size {
                    table[a as usize * n + b as usize] = module.add_direct(a, b) as u16;
                }
            }
            module.add_table = Some(Arc::new(table));
        }
        Ok(module)
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }
    pub fn module_type(&self) -> &ModuleType {
        &self.mtype
    }
    pub fn size(&self) -> u32 {
        self.size
    }
    pub fn rank(&self) -> usize {
        self.radix.len()
    }

    pub fn decode(&self, x: u32) -> Vec<u32> {
        self.stride.iter().zip(&self.radix).map(|(&s, &r)| (x / s) % r).collect()
    }

    /// Index of a coordinate tuple; coordinates are reduced modulo their cyclic factor.
    pub fn encode(&self, coords: &[u32]) -> Result<u32> {
        if coords.len() != self.rank() {
            return Err(Error::usage(format!("expected {} coordinates", self.rank())));
        }
        if let Some(c) = coords.iter().find(|&&c| c >= self.ring.size()) {
            return Err(Error::usage(format!("{c} is not a ring element")));
        }
        Ok(self.encode_unchecked(coords))
    }

    fn encode_unchecked(&self, coords: &[u32]) -> u32 {
        coords
            .iter()
            .zip(&self.radix)
            .zip(&self.stride)
            .map(|((&c, &r), &s)| (c % r) * s)
            .sum()
    }

    /// Standard generators `e_i`.
    pub fn generators(&self) -> Vec<u32> {
        self.stride.clone()
    }

    /// Size `q^lambda_i` of each cyclic factor.
    pub fn radix(&self) -> &[u32] {
        &self.radix
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        match &self.add_table {
            Some(t) => t[(a * self.size + b) as usize] as u32,
            None => self.add_direct(a, b),
        }
    }

    fn add_direct(&self, a: u32, b: u32) -> u32 {
        let mut out = 0;
        for (&s, &r) in self.stride.iter().zip(&self.radix) {
            let x = (a / s) % r;
            let y = (b / s) % r;
            out += (self.ring.add_codes(x, y) % r) * s;
        }
        out
    }

    pub fn neg(&self, a: u32) -> u32 {
        let mut out = 0;
        for (&s, &r) in self.stride.iter().zip(&self.radix) {
            let x = (a / s) % r;
            out += (self.ring.neg_code(x) % r) * s;
        }
        out
    }

    pub fn sub(&self, a: u32, b: u32) -> u32 {
        self.add(a, self.neg(b))
    }

    /// `r * a` for a ring code `r`.
    pub fn scale(&self, r: u32, a: u32) -> u32 {
        let mut out = 0;
        for (&s, &rad) in self.stride.iter().zip(&self.radix) {
            let x = (a / s) % rad;
            out += (self.ring.mul_codes(r, x) % rad) * s;
        }
        out
    }

    /// `pi^k * a`.
    pub fn mul_pi_pow(&self, a: u32, k: u32) -> u32 {
        self.scale(self.ring.pi_pow(k), a)
    }

    /// `k * a` for an integer `k`, repeated addition in the additive group.
    pub fn times(&self, k: u32, a: u32) -> u32 {
        let mut acc = 0;
        let mut base = a;
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.add(acc, base);
            }
            base = self.add(base, base);
            k >>= 1;
        }
        acc
    }

    /// Set of `pi^k M` as a membership vector.
    pub fn pi_power_image(&self, k: u32) -> Vec<bool> {
        let mut member = vec![false; self.size as usize];
        for x in 0..self.size {
            member[self.mul_pi_pow(x, k) as usize] = true;
        }
        member
    }

    /// Reduction `M -> M / pi^j M` expressed as canonical indices: coordinate `i`
    /// is reduced modulo `q^min(lambda_i, j)`.
    pub fn reduce_mod_pi(&self, a: u32, j: u32) -> u32 {
        let mut out = 0;
        for ((&s, &r), &lam) in self.stride.iter().zip(&self.radix).zip(self.mtype.lambda()) {
            let x = (a / s) % r;
            out += self.ring.reduce_mod_pi(x, j.min(lam)) * s;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_matches_coordinates() {
        let ring = Ring::parse("Z/8").unwrap();
        let m = ConcreteModule::new(&ring, ModuleType::new(ring.spec(), vec![3, 1]).unwrap()).unwrap();
        assert_eq!(m.size(), 16);
        let a = m.encode(&[5, 1]).unwrap();
        let b = m.encode(&[6, 1]).unwrap();
        assert_eq!(m.decode(m.add(a, b)), vec![3, 0]);
        assert_eq!(m.decode(m.scale(2, a)), vec![2, 0]);
        assert_eq!(m.decode(m.neg(a)), vec![3, 1]);
        assert_eq!(m.add(a, m.neg(a)), 0);
        assert_eq!(m.decode(m.times(3, a)), vec![7, 1]);
    }

    #[test]
    fn index_order_is_lexicographic() {
        let ring = Ring::parse("Z/4").unwrap();
        let m = ConcreteModule::new(&ring, ModuleType::new(ring.spec(), vec![2, 1]).unwrap()).unwrap();
        let tuples: Vec<Vec<u32>> = (0..m.size()).map(|x| m.decode(x)).collect();
        let mut sorted = tuples.clone();
        sorted.sort();
        assert_eq!(tuples, sorted);
    }

    #[test]
    fn polynomial_module() {
        let ring = Ring::parse("F4[t]/t^2").unwrap();
        let m = ConcreteModule::new(&ring, ModuleType::new(ring.spec(), vec![2, 1]).unwrap()).unwrap();
        assert_eq!(m.size(), 64);
        for a in 0..m.size() {
            assert_eq!(m.add(a, m.neg(a)), 0);
            assert_eq!(m.mul_pi_pow(a, 2), 0);
        }
    }
}
