//! Isomorphism types of finite modules over a chain ring and their counting invariants.
//!
//! Every finite module over a chain ring is `R/pi^l1 + ... + R/pi^lk`, so a type
//! is a partition with parts in `[1, e]`.

mod concrete;
mod lattice;

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

pub use concrete::ConcreteModule;
pub use lattice::{coset_labels, enumerate_subgroups, enumerate_submodules, Subset, SubmoduleLattice, LATTICE_CAP};

use crate::error::{Error, Result};
use crate::ring::{Ring, RingSpec};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModuleType {
    spec: RingSpec,
    lambda: Vec<u32>,
}

impl ModuleType {
    /// Builds a type from exponents in any order; zero parts are dropped.
    pub fn new(spec: RingSpec, mut lambda: Vec<u32>) -> Result<Self> {
        lambda.retain(|&x| x != 0);
        if let Some(&bad) = lambda.iter().find(|&&x| x > spec.e()) {
            return Err(Error::usage(format!("exponent {bad} exceeds ring length {}", spec.e())));
        }
        lambda.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Self { spec, lambda })
    }

    pub fn trivial(spec: RingSpec) -> Self {
        Self { spec, lambda: Vec::new() }
    }

    pub fn free(spec: RingSpec, rank: usize) -> Self {
        Self { spec, lambda: vec![spec.e(); rank] }
    }

    pub fn cyclic(spec: RingSpec, a: u32) -> Result<Self> {
        Self::new(spec, vec![a])
    }

    pub fn spec(&self) -> RingSpec {
        self.spec
    }

    /// Exponents, non-increasing.
    pub fn lambda(&self) -> &[u32] {
        &self.lambda
    }

    pub fn rank(&self) -> usize {
        self.lambda.len()
    }

    /// `log_q |A|`.
    pub fn length(&self) -> u32 {
        self.lambda.iter().sum()
    }

    pub fn cardinality(&self) -> BigUint {
        BigUint::from(self.spec.q()).pow(self.length())
    }

    /// `|A|` when it fits in a `u64`.
    pub fn cardinality_u64(&self) -> Option<u64> {
        (self.spec.q() as u64).checked_pow(self.length())
    }

    pub fn is_trivial(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn is_cyclic(&self) -> bool {
        self.lambda.len() <= 1
    }

    /// Generators minus relations of a minimal presentation, which over a chain
    /// ring is the number of free summands.
    pub fn d_invariant(&self) -> usize {
        self.lambda.iter().filter(|&&x| x == self.spec.e()).count()
    }

    /// Conjugate partition: entry `k-1` counts parts `>= k`, for `k = 1..=e`.
    pub fn conjugate(&self) -> Vec<u32> {
        (1..=self.spec.e())
            .map(|k| self.lambda.iter().filter(|&&x| x >= k).count() as u32)
            .collect()
    }

    /// Builds a type from `|pi^k A| = q^s[k]` for `k = 0..=e`.
    pub(crate) fn from_socle_profile(spec: RingSpec, s: &[u32]) -> Self {
        let conj: Vec<u32> = s.windows(2).map(|w| w[0] - w[1]).collect();
        let parts = conj.first().copied().unwrap_or(0);
        let lambda = (1..=parts)
            .map(|i| conj.iter().filter(|&&c| c >= i).count() as u32)
            .collect();
        Self { spec, lambda }
    }

    /// `|Aut A| = q^(sum l'_k^2 - sum_i m_i(m_i+1)/2) * prod_i prod_{j=1..m_i} (q^j - 1)`
    /// with `l'` the conjugate partition and `m_i` the multiplicity of part `i`.
    pub fn aut_count(&self) -> BigUint {
        let q = BigUint::from(self.spec.q());
        let conj = self.conjugate();
        let sq: u64 = conj.iter().map(|&c| (c as u64) * (c as u64)).sum();
        let mut tri = 0u64;
        let mut product = BigUint::one();
        for part in 1..=self.spec.e() {
            let m = self.lambda.iter().filter(|&&x| x == part).count() as u64;
            tri += m * (m + 1) / 2;
            for j in 1..=m {
                product *= q.pow(j as u32) - BigUint::one();
            }
        }
        q.pow((sq - tri) as u32) * product
    }

    /// Shorthand partition form `[a,b,...]`.
    pub fn shorthand(&self) -> String {
        let parts: Vec<String> = self.lambda.iter().map(|x| x.to_string()).collect();
        format!("[{}]", parts.join(","))
    }

    /// Parses `[a,b,...]`, `R/pi^a + R/pi^b + ...`, `R^k`, or `0` / `trivial`.
    pub fn parse(spec: RingSpec, s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::parse(format!("unrecognised module type '{s}'"));
        if compact == "0" || compact == "[]" || compact == "trivial" {
            return Ok(Self::trivial(spec));
        }
        if let Some(inner) = compact.strip_prefix('[').and_then(|x| x.strip_suffix(']')) {
            let lambda = inner
                .split(',')
                .map(|x| x.parse::<u32>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?;
            if lambda.contains(&0) {
                return Err(bad());
            }
            return Self::new(spec, lambda);
        }
        let mut lambda = Vec::new();
        for term in compact.split('+') {
            if let Some(exp) = term.strip_prefix("R/pi") {
                let a = match exp.strip_prefix('^') {
                    Some(x) => x.parse().map_err(|_| bad())?,
                    None if exp.is_empty() => 1,
                    None => return Err(bad()),
                };
                if a == 0 {
                    return Err(bad());
                }
                lambda.push(a);
            } else if let Some(k) = term.strip_prefix("R^") {
                let k: usize = k.parse().map_err(|_| bad())?;
                lambda.extend(std::iter::repeat(spec.e()).take(k));
            } else if term == "R" {
                lambda.push(spec.e());
            } else {
                return Err(bad());
            }
        }
        Self::new(spec, lambda)
    }

    /// All types with `log_q |A| <= max_length`, ordered by length then partition.
    pub fn enumerate(spec: RingSpec, max_length: u32) -> Vec<ModuleType> {
        let mut out = Vec::new();
        for total in 0..=max_length {
            let mut parts = Vec::new();
            partitions(total, spec.e().min(total.max(1)), &mut parts, &mut |lambda| {
                out.push(ModuleType { spec, lambda: lambda.to_vec() });
            });
        }
        out
    }
}

fn partitions(rest: u32, max_part: u32, current: &mut Vec<u32>, emit: &mut impl FnMut(&[u32])) {
    if rest == 0 {
        emit(current);
        return;
    }
    for part in (1..=max_part.min(rest)).rev() {
        current.push(part);
        partitions(rest - part, part, current, emit);
        current.pop();
    }
}

impl fmt::Display for ModuleType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.lambda.is_empty() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self.lambda.iter().map(|a| format!("R/pi^{a}")).collect();
        write!(f, "{}", terms.join(" + "))
    }
}

fn same_ring(a: &ModuleType, b: &ModuleType) -> Result<()> {
    if a.spec != b.spec {
        return Err(Error::usage(format!("modules over {} and {}", a.spec, b.spec)));
    }
    Ok(())
}

/// `#Hom(A, B) = prod_{i,j} q^min(a_i, b_j)`.
pub fn hom_count(a: &ModuleType, b: &ModuleType) -> Result<BigUint> {
    same_ring(a, b)?;
    let exp: u32 = a
        .lambda
        .iter()
        .flat_map(|&x| b.lambda.iter().map(move |&y| x.min(y)))
        .sum();
    Ok(BigUint::from(a.spec.q()).pow(exp))
}

/// `#Sur(A, B)` by Moebius inversion over the submodule lattice of `B`:
/// `#Sur(A, B) = sum_C mu(C, B) #Hom(A, C)`.
pub fn sur_count(a: &ModuleType, b: &ModuleType) -> Result<BigUint> {
    same_ring(a, b)?;
    if b.is_trivial() {
        return Ok(BigUint::one());
    }
    let ring = Ring::new(b.spec);
    let module = ConcreteModule::new(&ring, b.clone())?;
    let lattice = SubmoduleLattice::new(module.into())?;
    let top_mu = lattice.mobius_to_top();
    let mut pos = BigUint::zero();
    let mut neg = BigUint::zero();
    for (idx, &mu) in top_mu.iter().enumerate() {
        if mu == 0 {
            continue;
        }
        let c = lattice.submodule_type(idx);
        let term = hom_count(a, &c)? * BigUint::from(mu.unsigned_abs());
        if mu > 0 {
            pos += term;
        } else {
            neg += term;
        }
    }
    Ok(pos - neg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(s: &str) -> RingSpec {
        s.parse().unwrap()
    }

    fn ty(s: &str, l: &[u32]) -> ModuleType {
        ModuleType::new(spec(s), l.to_vec()).unwrap()
    }

    #[test]
    fn d_invariant_examples() {
        assert_eq!(ModuleType::free(spec("Z/4"), 3).d_invariant(), 3);
        assert_eq!(ty("Z/4", &[1]).d_invariant(), 0);
        assert_eq!(ModuleType::trivial(spec("Z/4")).d_invariant(), 0);
    }

    #[test]
    fn aut_count_examples() {
        assert_eq!(ty("Z/2", &[1]).aut_count(), BigUint::from(1u32));
        assert_eq!(ty("Z/2", &[1, 1]).aut_count(), BigUint::from(6u32));
        assert_eq!(ty("Z/4", &[2]).aut_count(), BigUint::from(2u32));
        // Z/4 + Z/2: 8 automorphisms (dihedral group of order 8)
        assert_eq!(ty("Z/4", &[2, 1]).aut_count(), BigUint::from(8u32));
    }

    #[test]
    fn hom_and_sur_examples() {
        assert_eq!(hom_count(&ty("Z/4", &[1]), &ty("Z/4", &[2])).unwrap(), BigUint::from(2u32));
        assert_eq!(sur_count(&ty("Z/2", &[1, 1]), &ty("Z/2", &[1])).unwrap(), BigUint::from(3u32));
        let zero = ModuleType::trivial(spec("Z/4"));
        assert_eq!(sur_count(&ty("Z/4", &[2, 1]), &zero).unwrap(), BigUint::one());
        assert!(hom_count(&ty("Z/4", &[1]), &ty("Z/8", &[1])).is_err());
    }

    #[test]
    fn text_forms_round_trip() {
        let s = spec("Z/8");
        let t = ModuleType::parse(s, "R/pi^3 + R/pi^1").unwrap();
        assert_eq!(t.lambda(), &[3, 1]);
        assert_eq!(t.to_string(), "R/pi^3 + R/pi^1");
        assert_eq!(ModuleType::parse(s, &t.to_string()).unwrap(), t);
        assert_eq!(ModuleType::parse(s, &t.shorthand()).unwrap(), t);
        assert_eq!(ModuleType::parse(s, "[1,3]").unwrap(), t);
        assert_eq!(ModuleType::parse(s, "R^2").unwrap().lambda(), &[3, 3]);
        assert!(ModuleType::parse(s, "[4]").is_err());
        assert!(ModuleType::parse(s, "[0]").is_err());
        assert!(ModuleType::parse(s, "banana").is_err());
        assert_eq!(ModuleType::parse(s, "0").unwrap(), ModuleType::trivial(s));
    }

    #[test]
    fn enumeration_counts_partitions() {
        // partitions of 0..=4 with parts <= 2: 1,1,2,2,3
        assert_eq!(ModuleType::enumerate(spec("Z/4"), 4).len(), 9);
        let all = ModuleType::enumerate(spec("Z/8"), 3);
        assert_eq!(all.len(), 1 + 1 + 2 + 3);
    }

    #[test]
    fn socle_profile_inverts_conjugate() {
        for t in ModuleType::enumerate(spec("Z/8"), 6) {
            let s: Vec<u32> = (0..=3).map(|k| t.lambda().iter().map(|&x| x.saturating_sub(k)).sum()).collect();
            assert_eq!(ModuleType::from_socle_profile(t.spec(), &s), t);
        }
    }
}
