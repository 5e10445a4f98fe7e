//! Entry distributions, Fourier analysis of module-valued sums and the
//! moment-tail quantity that controls universality.

mod classify;
mod fourier;
mod moment;

use std::collections::BTreeMap;
use std::fmt;

use fixedbitset::FixedBitSet;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

pub use classify::{classify_tuple, t_constant, TupleClassification, TupleType};
pub use fourier::{convolve, fourier_coefficients, scaled_law, Coefficient, FOURIER_CAP, FLOAT_SLACK};
pub use moment::{
    moment_tail_sum, replacement_sweep, uniform_replacement_check, MomentTail, ReplacementReport, MOMENT_BUDGET,
};

use crate::error::{Error, Result};
use crate::measures::Rational;
use crate::modules::ModuleType;
use crate::ring::{Ring, RingSpec};

/// Law of a single matrix entry: finitely many ring elements with positive rational weights.
#[derive(Clone, Debug)]
pub struct EntryDistribution {
    ring: Ring,
    support: Vec<(u32, Rational)>,
}

impl PartialEq for EntryDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.ring.spec() == other.ring.spec() && self.support == other.support
    }
}

impl EntryDistribution {
    /// Merges repeated elements; rejects nonpositive weights and total mass other than 1.
    pub fn new(ring: &Ring, support: Vec<(u32, Rational)>) -> Result<Self> {
        let mut merged: BTreeMap<u32, Rational> = BTreeMap::new();
        for (x, w) in support {
            if x >= ring.size() {
                return Err(Error::usage(format!("{x} is not an element of {}", ring.spec())));
            }
            if w <= Rational::zero() {
                return Err(Error::usage("entry probabilities must be positive"));
            }
            *merged.entry(x).or_insert_with(Rational::zero) += w;
        }
        let total: Rational = merged.values().copied().sum();
        if total != Rational::one() {
            return Err(Error::usage(format!("entry probabilities sum to {total}, not 1")));
        }
        Ok(Self { ring: ring.clone(), support: merged.into_iter().collect() })
    }

    /// Uniform distribution on the whole ring.
    pub fn haar(ring: &Ring) -> Self {
        let w = Rational::new(1, ring.size() as i128);
        Self { ring: ring.clone(), support: (0..ring.size()).map(|x| (x, w)).collect() }
    }

    /// Parses `"0:1/2,1:1/2"`; weights may be integers, fractions or decimals.
    pub fn parse(ring: &Ring, s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("haar") {
            return Ok(Self::haar(ring));
        }
        let mut support = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (x, w) = part
                .split_once(':')
                .ok_or_else(|| Error::parse(format!("expected element:weight, got {part:?}")))?;
            let x: u32 = x.trim().parse().map_err(|_| Error::parse(format!("bad element {x:?}")))?;
            support.push((x, parse_rational(w.trim())?));
        }
        if support.is_empty() {
            return Err(Error::parse("empty entry distribution"));
        }
        Self::new(ring, support)
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }
    pub fn spec(&self) -> RingSpec {
        self.ring.spec()
    }
    pub fn support(&self) -> &[(u32, Rational)] {
        &self.support
    }

    pub fn prob(&self, x: u32) -> Rational {
        self.support.iter().find(|(y, _)| *y == x).map(|(_, w)| *w).unwrap_or_else(Rational::zero)
    }

    pub fn is_haar(&self) -> bool {
        self.support.len() == self.ring.size() as usize
            && self.support.iter().all(|(_, w)| *w == Rational::new(1, self.ring.size() as i128))
    }

    /// Pushforward to `R / pi^j`, indexed by residue code.
    pub fn mod_ideal(&self, j: u32) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.ring.q_pow(j) as usize];
        for &(x, w) in &self.support {
            out[self.ring.reduce_mod_pi(x, j) as usize] += w;
        }
        out
    }

    /// Smallest nonzero `P(xi = r mod ann M)`.
    pub fn alpha(&self, module: &ModuleType) -> Rational {
        let exponent = module.lambda().first().copied().unwrap_or(0);
        self.mod_ideal(exponent).into_iter().filter(|w| !w.is_zero()).min().unwrap_or_else(Rational::one)
    }

    /// `1 - max(|xi mod m|_inf, 1 / char(R/m))`.
    pub fn beta(&self) -> Rational {
        Rational::one() - self.linf_mod_maximal().max(Rational::new(1, self.ring.p() as i128))
    }

    fn linf_mod_maximal(&self) -> Rational {
        self.mod_ideal(1).into_iter().max().unwrap_or_else(Rational::zero)
    }

    /// Affine change `x -> (x - s0) / (s1 - s0)` making the support contain 0 and 1.
    ///
    /// Picks `s0` as the least support element and `s1` as the least one with `s1 - s0` a unit.
    /// Returns the transformed law with `(s0, s1 - s0)`.
    pub fn normalize_zero_one(&self) -> Result<(Self, u32, u32)> {
        let s0 = self.support[0].0;
        let unit = self
            .support
            .iter()
            .map(|&(x, _)| self.ring.sub_codes(x, s0))
            .find(|&d| self.ring.is_unit_code(d))
            .ok_or_else(|| Error::Domain("support lies in a translate of the maximal ideal".into()))?;
        let inv = self.ring.inv_code(unit).expect("unit");
        let support =
            self.support.iter().map(|&(x, w)| (self.ring.mul_codes(self.ring.sub_codes(x, s0), inv), w)).collect();
        Ok((Self::new(&self.ring, support)?, s0, unit))
    }
}

impl fmt::Display for EntryDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.support.iter().map(|(x, w)| format!("{x}:{w}")).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Parses `3`, `-2/5` or `0.125` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::parse(format!("bad rational {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| bad())?;
        let d: i128 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.len() > 30 || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int.trim_start().starts_with('-');
        let int: i128 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
        let scale = 10i128.checked_pow(frac.len() as u32).ok_or_else(bad)?;
        let frac: i128 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
        let magnitude = int.abs().checked_mul(scale).and_then(|v| v.checked_add(frac)).ok_or_else(bad)?;
        return Ok(Rational::new(if negative { -magnitude } else { magnitude }, scale));
    }
    Ok(Rational::from_integer(s.parse().map_err(|_| bad())?))
}

/// Norms of `xi mod m` that bound the convergence rate.
#[derive(Clone, Debug, Serialize)]
pub struct NormsReport {
    /// `|xi mod m|_2^2`, exact.
    #[serde(serialize_with = "ser_rational")]
    pub l2_squared: Rational,
    pub l2: f64,
    #[serde(serialize_with = "ser_rational")]
    pub linf: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub inv_char: Rational,
    /// `max(|xi mod m|_2, |xi mod m|_inf, 1/char)`; any admissible theta exceeds it.
    pub theta_lower: f64,
    #[serde(serialize_with = "ser_rational")]
    pub beta: Rational,
    #[serde(serialize_with = "ser_opt_rational")]
    pub alpha: Option<Rational>,
}

pub fn norms_and_theta(xi: &EntryDistribution, module: Option<&ModuleType>) -> NormsReport {
    let residues = xi.mod_ideal(1);
    let l2_squared: Rational = residues.iter().map(|w| w * w).sum();
    let l2 = ratio_f64(&l2_squared).sqrt();
    let linf = xi.linf_mod_maximal();
    let inv_char = Rational::new(1, xi.ring.p() as i128);
    NormsReport {
        l2_squared,
        l2,
        linf,
        inv_char,
        theta_lower: l2.max(ratio_f64(&linf)).max(ratio_f64(&inv_char)),
        beta: xi.beta(),
        alpha: module.map(|m| xi.alpha(m)),
    }
}

pub(crate) fn ratio_f64(r: &Rational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

/// Tolerances for the equidistribution argument.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceParams {
    #[serde(serialize_with = "ser_rational")]
    pub epsilon: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub epsilon0: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub epsilon_prime: Rational,
    pub theta: Option<f64>,
}

pub(crate) fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

fn ser_opt_rational<S: serde::Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

impl Default for ConvergenceParams {
    fn default() -> Self {
        Self { epsilon: Rational::new(1, 20), epsilon0: Rational::new(1, 10), epsilon_prime: Rational::new(1, 5), theta: None }
    }
}

impl ConvergenceParams {
    pub fn new(epsilon: Rational, epsilon0: Rational, epsilon_prime: Rational) -> Result<Self> {
        if !(Rational::zero() < epsilon && epsilon < epsilon0) {
            return Err(Error::usage("need 0 < epsilon < epsilon0"));
        }
        if epsilon_prime <= Rational::zero() {
            return Err(Error::usage("epsilon' must be positive"));
        }
        Ok(Self { epsilon, epsilon0, epsilon_prime, theta: None })
    }

    /// Attaches a rate `theta`, which must lie strictly between the norm bound of `xi` and 1.
    pub fn with_theta(mut self, theta: f64, xi: &EntryDistribution) -> Result<Self> {
        let lower = norms_and_theta(xi, None).theta_lower;
        if !(lower < theta && theta < 1.0) {
            return Err(Error::usage(format!("theta must lie in ({lower}, 1)")));
        }
        self.theta = Some(theta);
        Ok(self)
    }
}

/// Result of checking that the support is not trapped in a translate of a proper ideal or sub-rng.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum HypothesisOutcome {
    Ok,
    /// Support inside `translate + (pi^ideal)`.
    TranslateOfIdeal { translate: u32, ideal: u32 },
    /// Support inside `translate + subring`, where `subring` is the smallest sub-rng
    /// (not necessarily unital) containing the differences. `unital` reports whether a
    /// proper unital subring also contains them.
    TranslateOfSubring { translate: u32, subring: Vec<u32>, unital: bool },
}

impl HypothesisOutcome {
    pub fn is_ok(&self) -> bool {
        matches!(self, HypothesisOutcome::Ok)
    }
}

/// Support `S` lies in a translate of a proper ideal iff `S - s0` lies in the maximal
/// ideal, and in a translate of a proper sub-rng iff the sub-rng generated by `S - s0`
/// is proper. Ideals are checked first.
pub fn hypothesis_check(xi: &EntryDistribution) -> HypothesisOutcome {
    let ring = &xi.ring;
    let s0 = xi.support[0].0;
    let diffs: Vec<u32> = xi.support.iter().map(|&(x, _)| ring.sub_codes(x, s0)).collect();
    let v = diffs.iter().map(|&d| ring.valuation_code(d)).min().unwrap_or(ring.e());
    if v >= 1 {
        return HypothesisOutcome::TranslateOfIdeal { translate: s0, ideal: v };
    }
    let generated = subrng_closure(ring, &diffs);
    if generated.count_ones(..) < ring.size() as usize {
        let mut with_one = diffs.clone();
        with_one.push(ring.one().code());
        let unital = subrng_closure(ring, &with_one).count_ones(..) < ring.size() as usize;
        return HypothesisOutcome::TranslateOfSubring {
            translate: s0,
            subring: generated.ones().map(|x| x as u32).collect(),
            unital,
        };
    }
    HypothesisOutcome::Ok
}

/// Smallest subset containing `seeds` and 0, closed under `+`, `-` and `*`.
pub fn subrng_closure(ring: &Ring, seeds: &[u32]) -> FixedBitSet {
    let mut set = FixedBitSet::with_capacity(ring.size() as usize);
    set.insert(0);
    let mut frontier: Vec<u32> = Vec::new();
    for &s in seeds {
        if !set.put(s as usize) {
            frontier.push(s);
        }
    }
    while let Some(x) = frontier.pop() {
        let current: Vec<u32> = set.ones().map(|y| y as u32).collect();
        for y in current {
            for z in [ring.add_codes(x, y), ring.sub_codes(x, y), ring.sub_codes(y, x), ring.mul_codes(x, y), ring.mul_codes(y, x)] {
                if !set.put(z as usize) {
                    frontier.push(z);
                }
            }
        }
        let sq = ring.mul_codes(x, x);
        if !set.put(sq as usize) {
            frontier.push(sq);
        }
    }
    set
}

/// Every sub-rng of the ring, as sorted element lists, with a flag for unital ones.
pub fn enumerate_subrngs(ring: &Ring) -> Result<Vec<(Vec<u32>, bool)>> {
    if ring.size() > 256 {
        return Err(Error::resource("sub-rng enumeration is limited to rings of size 256"));
    }
    let mut seen = std::collections::HashSet::new();
    let start = subrng_closure(ring, &[]);
    seen.insert(start.clone());
    let mut queue = vec![start];
    let mut out = Vec::new();
    while let Some(t) = queue.pop() {
        let elems: Vec<u32> = t.ones().map(|x| x as u32).collect();
        for x in 0..ring.size() {
            if t.contains(x as usize) {
                continue;
            }
            let mut seeds = elems.clone();
            seeds.push(x);
            let next = subrng_closure(ring, &seeds);
            if seen.insert(next.clone()) {
                queue.push(next);
            }
        }
        let unital = t.contains(ring.one().code() as usize);
        out.push((elems, unital));
    }
    out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

/// `#{m in M : m * support(xi) is inside the subgroup}`.
pub fn support_stabilizer_count(
    module: &crate::modules::ConcreteModule,
    subgroup: &crate::modules::Subset,
    xi: &EntryDistribution,
) -> u32 {
    (0..module.size())
        .filter(|&m| xi.support.iter().all(|&(r, _)| subgroup.contains(module.scale(r, m))))
        .count() as u32
}

pub(crate) fn lcm_denominators(xi: &EntryDistribution) -> i128 {
    xi.support.iter().fold(1i128, |acc, (_, w)| acc.lcm(w.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modules::{enumerate_subgroups, ConcreteModule};

    fn xi(ring: &str, s: &str) -> EntryDistribution {
        EntryDistribution::parse(&Ring::parse(ring).unwrap(), s).unwrap()
    }

    #[test]
    fn parsing() {
        let x = xi("Z/4", "0:1/2, 1:0.5");
        assert_eq!(x.support(), &[(0, Rational::new(1, 2)), (1, Rational::new(1, 2))]);
        assert_eq!(xi("Z/2", "0:0.6,1:0.4").prob(1), Rational::new(2, 5));
        assert!(xi("Z/4", "haar").is_haar());
        let z4 = Ring::parse("Z/4").unwrap();
        assert!(EntryDistribution::parse(&z4, "0:1/2").is_err());
        assert!(EntryDistribution::parse(&z4, "0:3/2,1:-1/2").is_err());
        assert!(EntryDistribution::parse(&z4, "7:1").is_err());
        assert!(EntryDistribution::parse(&z4, "0-1").is_err());
        assert_eq!(parse_rational("-0.25").unwrap(), Rational::new(-1, 4));
        assert_eq!(x.to_string(), "0:1/2,1:1/2");
    }

    #[test]
    fn hypothesis_examples() {
        assert!(hypothesis_check(&xi("Z/4", "0:1/2,1:1/2")).is_ok());
        assert_eq!(
            hypothesis_check(&xi("Z/4", "1:1/2,3:1/2")),
            HypothesisOutcome::TranslateOfIdeal { translate: 1, ideal: 1 }
        );
        assert!(matches!(hypothesis_check(&xi("Z/2", "0:1")), HypothesisOutcome::TranslateOfIdeal { .. }));
        match hypothesis_check(&xi("F4[t]/t", "0:1/2,1:1/2")) {
            HypothesisOutcome::TranslateOfSubring { subring, unital, .. } => {
                assert_eq!(subring, vec![0, 1]);
                assert!(unital);
            }
            other => panic!("{other:?}"),
        }
        assert!(hypothesis_check(&xi("F4[t]/t", "0:1/3,1:1/3,2:1/3")).is_ok());
    }

    #[test]
    fn subrngs_of_small_rings() {
        let z4 = Ring::parse("Z/4").unwrap();
        let subs = enumerate_subrngs(&z4).unwrap();
        assert_eq!(subs, vec![(vec![0], false), (vec![0, 2], false), (vec![0, 1, 2, 3], true)]);
        let f4 = Ring::parse("F4[t]/t").unwrap();
        let subs = enumerate_subrngs(&f4).unwrap();
        assert_eq!(subs.iter().map(|s| s.0.len()).collect::<Vec<_>>(), vec![1, 2, 4]);
    }

    /// The closure test agrees with checking every sub-rng and every translate.
    #[test]
    fn hypothesis_matches_brute_force() {
        for name in ["Z/4", "Z/8", "F4[t]/t", "F2[t]/t^2", "Z/9"] {
            let ring = Ring::parse(name).unwrap();
            let subrngs = enumerate_subrngs(&ring).unwrap();
            let n = ring.size();
            for mask in 1u32..(1 << n.min(9)) {
                let support: Vec<u32> = (0..n).filter(|x| mask >> x & 1 == 1).collect();
                let w = Rational::new(1, support.len() as i128);
                let x = EntryDistribution::new(&ring, support.iter().map(|&s| (s, w)).collect()).unwrap();
                let trapped = (0..n).any(|a| {
                    let in_ideal = support.iter().all(|&s| ring.valuation_code(ring.sub_codes(s, a)) >= 1);
                    let in_subrng = subrngs
                        .iter()
                        .filter(|(t, _)| t.len() < n as usize)
                        .any(|(t, _)| support.iter().all(|&s| t.contains(&ring.sub_codes(s, a))));
                    in_ideal || in_subrng
                });
                assert_eq!(!hypothesis_check(&x).is_ok(), trapped, "{name} {support:?}");
            }
        }
    }

    #[test]
    fn norm_examples() {
        let r = norms_and_theta(&xi("Z/4", "0:1/2,1:1/2"), None);
        let half = Rational::new(1, 2);
        assert_eq!((r.l2_squared, r.linf, r.inv_char, r.beta), (half, half, half, half));
        assert!((r.theta_lower - 0.5f64.sqrt()).abs() < 1e-15);
        let haar = norms_and_theta(&xi("F4[t]/t^2", "haar"), None);
        assert_eq!((haar.l2_squared, haar.linf), (Rational::new(1, 4), Rational::new(1, 4)));
        let z9 = xi("Z/9", "0:1/3,1:1/3,3:1/3");
        let m = ModuleType::new(z9.spec(), vec![2]).unwrap();
        let r = norms_and_theta(&z9, Some(&m));
        assert_eq!((r.linf, r.beta), (Rational::new(2, 3), Rational::new(1, 3)));
        assert_eq!(r.alpha, Some(Rational::new(1, 3)));
        assert_eq!(z9.alpha(&ModuleType::new(z9.spec(), vec![1]).unwrap()), Rational::new(1, 3));
        assert_eq!(z9.alpha(&ModuleType::trivial(z9.spec())), Rational::one());
    }

    #[test]
    fn params_validation() {
        let d = ConvergenceParams::default();
        assert_eq!(d.epsilon, Rational::new(1, 20));
        assert!(ConvergenceParams::new(Rational::new(1, 5), Rational::new(1, 10), Rational::new(1, 5)).is_err());
        let x = xi("Z/4", "0:1/2,1:1/2");
        assert!(d.clone().with_theta(0.7, &x).is_err());
        assert_eq!(d.with_theta(0.75, &x).unwrap().theta, Some(0.75));
    }

    #[test]
    fn normalization() {
        let x = xi("Z/9", "2:1/2,4:1/4,5:1/4");
        let (y, s0, u) = x.normalize_zero_one().unwrap();
        assert_eq!((s0, u), (2, 2));
        assert!(y.prob(0) == Rational::new(1, 2) && y.prob(1) == Rational::new(1, 4));
        assert!(xi("Z/4", "1:1/2,3:1/2").normalize_zero_one().is_err());
    }

    /// A non-submodule subgroup is stabilized by few module elements when `{0, 1}` lies in the support.
    #[test]
    fn subgroup_lemma() {
        for (ring, lambda, law) in [
            ("F4[t]/t", vec![1, 1], "0:1/3,1:1/3,2:1/3"),
            ("F4[t]/t", vec![1], "0:1/3,1:1/3,3:1/3"),
            ("Z/4", vec![2, 1], "0:1/2,1:1/2"),
            ("F2[t]/t^2", vec![2, 1], "0:1/3,1:1/3,2:1/3"),
        ] {
            let r = Ring::parse(ring).unwrap();
            let m = ConcreteModule::new(&r, ModuleType::new(r.spec(), lambda).unwrap()).unwrap();
            let x = EntryDistribution::parse(&r, law).unwrap();
            assert!(hypothesis_check(&x).is_ok());
            for pi in enumerate_subgroups(&m, 1 << 12).unwrap().iter().filter(|s| !s.is_submodule()) {
                let count = support_stabilizer_count(&m, pi, &x);
                assert!(count * r.p() <= pi.size(), "{ring} |pi|={} count={count}", pi.size());
            }
        }
    }
}
