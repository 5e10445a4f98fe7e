use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::{Arc, OnceLock};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::modules::{ConcreteModule, ModuleType};

/// Default cap on `|M|` for subgroup and submodule enumeration.
pub const LATTICE_CAP: u32 = 256;

/// A subgroup of a concrete module, stored as a membership set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subset {
    bits: FixedBitSet,
    size: u32,
    is_submodule: bool,
}

impl Subset {
    pub fn contains(&self, x: u32) -> bool {
        self.bits.contains(x as usize)
    }
    pub fn size(&self) -> u32 {
        self.size
    }
    pub fn is_submodule(&self) -> bool {
        self.is_submodule
    }
    pub fn bits(&self) -> &FixedBitSet {
        &self.bits
    }
    pub fn elements(&self) -> impl Iterator<Item = u32> + '_ {
        self.bits.ones().map(|x| x as u32)
    }
    pub fn is_subset(&self, other: &Subset) -> bool {
        self.bits.is_subset(&other.bits)
    }

    /// Builds a subset from explicit elements after checking closure under addition.
    pub fn from_elements(module: &ConcreteModule, elems: &[u32]) -> Result<Self> {
        let mut bits = FixedBitSet::with_capacity(module.size() as usize);
        for &x in elems {
            if x >= module.size() {
                return Err(Error::usage(format!("{x} is not an element of the module")));
            }
            bits.insert(x as usize);
        }
        let set = Self::from_bits(module, bits);
        if !set.contains(0) || !set.elements().all(|a| set.elements().all(|b| set.contains(module.add(a, b)))) {
            return Err(Error::usage("subset is not an additive subgroup"));
        }
        Ok(set)
    }

    fn from_bits(module: &ConcreteModule, bits: FixedBitSet) -> Self {
        let size = bits.count_ones(..) as u32;
        let ring_size = module.ring().size();
        let is_submodule = bits
            .ones()
            .all(|x| (0..ring_size).all(|r| bits.contains(module.scale(r, x as u32) as usize)));
        Self { bits, size, is_submodule }
    }
}

fn cyclic(module: &ConcreteModule, x: u32, as_module: bool) -> Vec<u32> {
    let mut out: Vec<u32> = if as_module {
        (0..module.ring().size()).map(|r| module.scale(r, x)).collect()
    } else {
        let mut v = vec![0];
        let mut y = x;
        while y != 0 {
            v.push(y);
            y = module.add(y, x);
        }
        v
    };
    out.sort_unstable();
    out.dedup();
    out
}

fn sum_with(module: &ConcreteModule, s: &FixedBitSet, c: &[u32]) -> FixedBitSet {
    let mut out = FixedBitSet::with_capacity(module.size() as usize);
    for a in s.ones() {
        for &b in c {
            out.insert(module.add(a as u32, b) as usize);
        }
    }
    out
}

fn enumerate(module: &ConcreteModule, as_module: bool, cap: u32) -> Result<Vec<Subset>> {
    if module.size() > cap {
        return Err(Error::resource(format!("module of order {} exceeds enumeration cap {cap}", module.size())));
    }
    let n = module.size() as usize;
    let cyclics: Vec<Vec<u32>> = (0..module.size()).map(|x| cyclic(module, x, as_module)).collect();
    let mut zero = FixedBitSet::with_capacity(n);
    zero.insert(0);
    let mut seen: HashSet<FixedBitSet> = HashSet::new();
    seen.insert(zero.clone());
    let mut queue = VecDeque::from([zero]);
    let mut found = Vec::new();
    while let Some(s) = queue.pop_front() {
        for x in 0..n {
            if s.contains(x) {
                continue;
            }
            let t = sum_with(module, &s, &cyclics[x]);
            if seen.insert(t.clone()) {
                queue.push_back(t);
            }
        }
        found.push(s);
    }
    let mut out: Vec<Subset> = found.into_iter().map(|b| Subset::from_bits(module, b)).collect();
    out.sort_by_cached_key(|s| (s.size, s.elements().collect::<Vec<_>>()));
    Ok(out)
}

/// All submodules, ordered by size then element list.
pub fn enumerate_submodules(module: &ConcreteModule, cap: u32) -> Result<Vec<Subset>> {
    enumerate(module, true, cap)
}

/// All additive subgroups, each flagged with whether it is an `R`-submodule.
pub fn enumerate_subgroups(module: &ConcreteModule, cap: u32) -> Result<Vec<Subset>> {
    enumerate(module, false, cap)
}

/// The submodule lattice of a concrete module with cached Moebius data.
pub struct SubmoduleLattice {
    module: Arc<ConcreteModule>,
    members: Vec<Subset>,
    index: HashMap<FixedBitSet, usize>,
    supersets: Vec<Vec<usize>>,
    pi_images: Vec<FixedBitSet>,
    mobius: OnceLock<Vec<Vec<(usize, i64)>>>,
}

impl std::fmt::Debug for SubmoduleLattice {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SubmoduleLattice({:?}, {} members)", self.module, self.members.len())
    }
}

impl SubmoduleLattice {
    pub fn new(module: Arc<ConcreteModule>) -> Result<Self> {
        Self::with_cap(module, LATTICE_CAP)
    }

    pub fn with_cap(module: Arc<ConcreteModule>, cap: u32) -> Result<Self> {
        let members = enumerate_submodules(&module, cap)?;
        let index = members.iter().enumerate().map(|(i, s)| (s.bits.clone(), i)).collect();
        let supersets = (0..members.len())
            .map(|i| {
                (i..members.len())
                    .filter(|&j| members[i].is_subset(&members[j]))
                    .collect()
            })
            .collect();
        let pi_images = (0..=module.ring().e())
            .map(|k| {
                let mut bits = FixedBitSet::with_capacity(module.size() as usize);
                for (x, m) in module.pi_power_image(k).into_iter().enumerate() {
                    bits.set(x, m);
                }
                bits
            })
            .collect();
        Ok(Self { module, members, index, supersets, pi_images, mobius: OnceLock::new() })
    }

    pub fn module(&self) -> &Arc<ConcreteModule> {
        &self.module
    }
    pub fn len(&self) -> usize {
        self.members.len()
    }
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
    pub fn members(&self) -> &[Subset] {
        &self.members
    }
    pub fn member(&self, i: usize) -> &Subset {
        &self.members[i]
    }
    pub fn bottom(&self) -> usize {
        0
    }
    pub fn top(&self) -> usize {
        self.members.len() - 1
    }
    pub fn find(&self, set: &Subset) -> Option<usize> {
        self.index.get(&set.bits).copied()
    }
    /// Indices of submodules containing member `i`, including `i`, by increasing size.
    pub fn supersets(&self, i: usize) -> &[usize] {
        &self.supersets[i]
    }

    /// Index of `pi^k M`.
    pub fn pi_power_submodule(&self, k: u32) -> usize {
        let bits = &self.pi_images[k.min(self.module.ring().e()) as usize];
        self.index[bits]
    }

    /// `mu(i, j)` for every `j` containing `i` with nonzero value, from the defining recurrence.
    pub fn mobius_from(&self, i: usize) -> &[(usize, i64)] {
        &self.mobius_table()[i]
    }

    fn mobius_table(&self) -> &Vec<Vec<(usize, i64)>> {
        self.mobius.get_or_init(|| {
            (0..self.members.len())
                .map(|i| {
                    let ups = &self.supersets[i];
                    let mut mu = vec![0i64; ups.len()];
                    mu[0] = 1;
                    for b in 1..ups.len() {
                        let y = &self.members[ups[b]];
                        let s: i64 = (0..b)
                            .filter(|&a| mu[a] != 0 && self.members[ups[a]].is_subset(y))
                            .map(|a| mu[a])
                            .sum();
                        mu[b] = -s;
                    }
                    ups.iter().zip(mu).filter(|(_, m)| *m != 0).map(|(&j, m)| (j, m)).collect()
                })
                .collect()
        })
    }

    /// `mu(i, M)` for every member `i`.
    pub fn mobius_to_top(&self) -> Vec<i64> {
        let n = self.members.len();
        let mut mu = vec![0i64; n];
        mu[n - 1] = 1;
        for i in (0..n - 1).rev() {
            mu[i] = -self.supersets[i][1..].iter().map(|&j| mu[j]).sum::<i64>();
        }
        mu
    }

    fn log_q(&self, mut x: u64) -> u32 {
        let q = self.module.ring().q() as u64;
        let mut k = 0;
        while x > 1 {
            x /= q;
            k += 1;
        }
        k
    }

    /// Isomorphism type of `M / N_i`, from the sizes `|pi^k (M/N)| = |pi^k M + N| / |N|`.
    pub fn quotient_type(&self, i: usize) -> ModuleType {
        let n = &self.members[i];
        let profile: Vec<u32> = self
            .pi_images
            .iter()
            .map(|img| {
                let inter = img.intersection(&n.bits).count() as u64;
                let sum = img.count_ones(..) as u64 * n.size as u64 / inter;
                self.log_q(sum / n.size as u64)
            })
            .collect();
        ModuleType::from_socle_profile(self.module.ring().spec(), &profile)
    }

    /// Isomorphism type of `N_i` itself.
    pub fn submodule_type(&self, i: usize) -> ModuleType {
        let n = &self.members[i];
        let profile: Vec<u32> = (0..=self.module.ring().e())
            .map(|k| {
                let mut img = FixedBitSet::with_capacity(self.module.size() as usize);
                for x in n.elements() {
                    img.insert(self.module.mul_pi_pow(x, k) as usize);
                }
                self.log_q(img.count_ones(..) as u64)
            })
            .collect();
        ModuleType::from_socle_profile(self.module.ring().spec(), &profile)
    }

    /// `M / N_i` is cyclic exactly when `|(M/N) / pi (M/N)| <= q`.
    pub fn quotient_is_cyclic(&self, i: usize) -> bool {
        self.quotient_type(i).is_cyclic()
    }

    /// A short generating list for member `i`, preferring elements with large cyclic span.
    pub fn generators(&self, i: usize) -> Vec<u32> {
        let m = &self.module;
        let n = &self.members[i];
        let mut candidates: Vec<(u32, u32)> = n
            .elements()
            .map(|x| (cyclic(m, x, true).len() as u32, x))
            .collect();
        candidates.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut span = FixedBitSet::with_capacity(m.size() as usize);
        span.insert(0);
        let mut gens = Vec::new();
        for (_, x) in candidates {
            if span.count_ones(..) as u32 == n.size {
                break;
            }
            if !span.contains(x as usize) {
                span = sum_with(m, &span, &cyclic(m, x, true));
                gens.push(x);
            }
        }
        gens
    }

    /// Canonical coset labels for `M / N_i`: each element maps to the least element of its coset.
    pub fn coset_labels(&self, i: usize) -> Vec<u32> {
        coset_labels(&self.module, &self.members[i])
    }

    /// Minimal nonzero submodules.
    pub fn atoms(&self) -> Vec<usize> {
        self.supersets[0][1..]
            .iter()
            .copied()
            .filter(|&j| (1..j).all(|k| !(self.members[k].is_subset(&self.members[j]))))
            .collect()
    }

    /// Submodules covering member `i`.
    pub fn covers(&self, i: usize) -> Vec<usize> {
        let ups = &self.supersets[i][1..];
        ups.iter()
            .copied()
            .filter(|&j| {
                !ups.iter().any(|&k| k != j && self.members[k].is_subset(&self.members[j]))
            })
            .collect()
    }
}

/// Maps each element to the least element of its coset modulo the subgroup `n`.
pub fn coset_labels(module: &ConcreteModule, n: &Subset) -> Vec<u32> {
    let size = module.size() as usize;
    let mut label = vec![u32::MAX; size];
    let elems: Vec<u32> = n.elements().collect();
    for x in 0..module.size() {
        if label[x as usize] != u32::MAX {
            continue;
        }
        for &y in &elems {
            label[module.add(x, y) as usize] = x;
        }
    }
    label
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Ring;

    fn module(ring: &str, lambda: &[u32]) -> ConcreteModule {
        let r = Ring::parse(ring).unwrap();
        ConcreteModule::new(&r, ModuleType::new(r.spec(), lambda.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn cyclic_module_has_ideal_chain() {
        let m = module("Z/4", &[2]);
        let subs = enumerate_submodules(&m, LATTICE_CAP).unwrap();
        let sets: Vec<Vec<u32>> = subs.iter().map(|s| s.elements().collect()).collect();
        assert_eq!(sets, vec![vec![0], vec![0, 2], vec![0, 1, 2, 3]]);
    }

    #[test]
    fn klein_four_has_five_subgroups() {
        let m = module("Z/2", &[1, 1]);
        assert_eq!(enumerate_subgroups(&m, LATTICE_CAP).unwrap().len(), 5);
    }

    #[test]
    fn diagonal_subgroup_is_submodule() {
        let m = module("Z/4", &[2, 1]);
        let diag = m.encode(&[2, 1]).unwrap();
        let set = Subset::from_elements(&m, &[0, diag]).unwrap();
        assert!(set.is_submodule());
        let subs = enumerate_subgroups(&m, LATTICE_CAP).unwrap();
        assert!(subs.contains(&set));
    }

    #[test]
    fn polynomial_subgroups_need_not_be_submodules() {
        let m = module("F4[t]/t", &[1]);
        let subs = enumerate_subgroups(&m, LATTICE_CAP).unwrap();
        assert_eq!(subs.len(), 5);
        assert_eq!(subs.iter().filter(|s| s.is_submodule()).count(), 2);
    }

    #[test]
    fn cap_is_enforced() {
        let m = module("Z/2", &[1; 9]);
        assert!(matches!(enumerate_submodules(&m, LATTICE_CAP), Err(Error::Resource(_))));
    }

    #[test]
    fn quotient_and_submodule_types() {
        let m = Arc::new(module("Z/4", &[2, 1]));
        let lat = SubmoduleLattice::new(m.clone()).unwrap();
        for i in 0..lat.len() {
            let q = lat.quotient_type(i);
            let s = lat.submodule_type(i);
            assert_eq!(q.length() + s.length(), 3);
        }
        assert_eq!(lat.quotient_type(lat.bottom()).lambda(), &[2, 1]);
        assert!(lat.quotient_type(lat.top()).is_trivial());
        let diag = Subset::from_elements(&m, &[0, m.encode(&[2, 1]).unwrap()]).unwrap();
        let idx = lat.find(&diag).unwrap();
        assert_eq!(lat.quotient_type(idx).lambda(), &[2]);
    }

    #[test]
    fn mobius_of_boolean_like_lattice() {
        // subspaces of F_2^2: mu(0, V) = q^(1) = 2, mu(0, line) = -1
        let lat = SubmoduleLattice::new(Arc::new(module("Z/2", &[1, 1]))).unwrap();
        let mu: HashMap<usize, i64> = lat.mobius_from(0).iter().copied().collect();
        assert_eq!(mu[&0], 1);
        assert_eq!(mu[&lat.top()], 2);
        assert_eq!(lat.mobius_to_top()[0], 2);
        assert_eq!(lat.atoms().len(), 3);
        assert_eq!(lat.covers(0).len(), 3);
    }

    #[test]
    fn generators_span() {
        let m = Arc::new(module("Z/4", &[2, 2]));
        let lat = SubmoduleLattice::new(m.clone()).unwrap();
        for i in 0..lat.len() {
            let gens = lat.generators(i);
            let mut span = FixedBitSet::with_capacity(m.size() as usize);
            span.insert(0);
            for g in &gens {
                span = sum_with(&m, &span, &cyclic(&m, *g, true));
            }
            assert_eq!(&span, lat.member(i).bits());
            assert!(gens.len() <= 2);
        }
    }
}
