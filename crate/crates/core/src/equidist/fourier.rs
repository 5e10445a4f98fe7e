use std::sync::Arc;

use serde::Serialize;

use crate::equidist::{lcm_denominators, EntryDistribution};
use crate::error::{Error, Result};
use crate::measures::{checked_add, checked_mul, Rational, SignedMeasure};
use crate::modules::ConcreteModule;
use crate::ring::RingKind;

/// Largest group on which every Fourier coefficient is computed.
pub const FOURIER_CAP: u32 = 4096;

/// Bound on the absolute error of a coefficient evaluated in floating point.
pub const FLOAT_SLACK: f64 = 1e-12;

/// `sum_x P(x) chi(x)` for one character `chi`.
#[derive(Clone, Debug, Serialize)]
pub struct Coefficient {
    /// The character, indexed by the module element pairing with it.
    pub character: u32,
    pub re: f64,
    pub im: f64,
    pub modulus: f64,
    /// Exact `|c|^2` when every character value is a fourth root of unity.
    #[serde(skip)]
    pub modulus_squared: Option<Rational>,
    /// Error bound on `modulus`; zero when exact.
    pub slack: f64,
}

impl Coefficient {
    /// Decides `|c| <= t`. The flag is set when a float comparison lies within the slack.
    pub fn at_most(&self, t: Rational) -> (bool, bool) {
        match self.modulus_squared {
            Some(sq) => (sq <= t * t, false),
            None => {
                let t = super::ratio_f64(&t);
                (self.modulus <= t, (self.modulus - t).abs() <= self.slack)
            }
        }
    }

    /// Decides `|c| = 1`, with the same ambiguity flag.
    pub fn has_unit_modulus(&self) -> (bool, bool) {
        match self.modulus_squared {
            Some(sq) => (sq == Rational::from(1), false),
            None => {
                let gap = (self.modulus - 1.0).abs();
                (gap <= self.slack, gap > 0.0 && gap <= self.slack)
            }
        }
    }
}

/// The additive group of a module as a product of cyclic `p`-groups.
///
/// Over `Z/p^e` each coordinate is cyclic of order `q^lambda_i`; over `F_q[t]/(t^e)` each
/// coordinate splits into `f * lambda_i` copies of `Z/p` given by the base-`p` digits of its code.
pub(crate) struct CyclicDecomposition {
    /// Additive coordinates of every element, row-major.
    coords: Vec<u32>,
    /// `N / n_j` for each cyclic factor of order `n_j`.
    weights: Vec<u64>,
    width: usize,
    exponent: u64,
}

impl CyclicDecomposition {
    pub(crate) fn new(module: &ConcreteModule) -> Self {
        let ring = module.ring();
        let p = ring.p();
        let lambda = module.module_type().lambda();
        let orders: Vec<u64> = match ring.kind() {
            RingKind::Integers => lambda.iter().map(|&l| (p as u64).pow(l)).collect(),
            RingKind::Polynomial => {
                let digits: u32 = lambda.iter().map(|&l| l * ring.spec().f()).sum();
                vec![p as u64; digits as usize]
            }
        };
        let exponent = orders.iter().copied().max().unwrap_or(1);
        let width = orders.len();
        let mut coords = Vec::with_capacity(width * module.size() as usize);
        for x in 0..module.size() {
            let c = module.decode(x);
            match ring.kind() {
                RingKind::Integers => coords.extend(c),
                RingKind::Polynomial => {
                    for (&code, &l) in c.iter().zip(lambda) {
                        let mut v = code;
                        for _ in 0..l * ring.spec().f() {
                            coords.push(v % p);
                            v /= p;
                        }
                    }
                }
            }
        }
        Self { coords, weights: orders.iter().map(|&n| exponent / n).collect(), width, exponent }
    }

    pub(crate) fn exponent(&self) -> u64 {
        self.exponent
    }

    /// `chi_a(x) = zeta_N^pairing(a, x)`.
    pub(crate) fn pairing(&self, a: u32, x: u32) -> u64 {
        let ca = &self.coords[a as usize * self.width..][..self.width];
        let cx = &self.coords[x as usize * self.width..][..self.width];
        ca.iter().zip(cx).zip(&self.weights).map(|((&u, &v), &w)| u as u64 * v as u64 % self.exponent * w).sum::<u64>()
            % self.exponent
    }
}

fn check_size(module: &ConcreteModule) -> Result<()> {
    if module.size() > FOURIER_CAP {
        return Err(Error::resource(format!("Fourier transform limited to groups of order {FOURIER_CAP}")));
    }
    Ok(())
}

/// Every Fourier coefficient of a measure, indexed by character. Index 0 is the trivial
/// character, whose coefficient is the total mass.
pub fn fourier_coefficients(law: &SignedMeasure) -> Result<Vec<Coefficient>> {
    let module = law.module();
    check_size(module)?;
    let dec = CyclicDecomposition::new(module);
    Ok((0..module.size()).map(|a| coefficient_with(&dec, law, a)).collect())
}

pub(crate) fn coefficient_with(dec: &CyclicDecomposition, law: &SignedMeasure, a: u32) -> Coefficient {
    let n = dec.exponent();
    let support: Vec<(u32, i128)> =
        law.numerators().iter().enumerate().filter(|(_, &w)| w != 0).map(|(x, &w)| (x as u32, w)).collect();
    if 4 % n == 0 {
        if let Some(c) = exact_coefficient(dec, law, &support, a) {
            return c;
        }
    }
    let den = law.denominator() as f64;
    let (mut re, mut im) = (0.0f64, 0.0f64);
    for &(x, w) in &support {
        let angle = std::f64::consts::TAU * dec.pairing(a, x) as f64 / n as f64;
        let w = w as f64 / den;
        re += w * angle.cos();
        im += w * angle.sin();
    }
    Coefficient { character: a, re, im, modulus: re.hypot(im), modulus_squared: None, slack: FLOAT_SLACK }
}

fn exact_coefficient(
    dec: &CyclicDecomposition,
    law: &SignedMeasure,
    support: &[(u32, i128)],
    a: u32,
) -> Option<Coefficient> {
    let scale = 4 / dec.exponent();
    let mut parts = [0i128; 4];
    for &(x, w) in support {
        let k = (dec.pairing(a, x) * scale) as usize;
        parts[k] = checked_add(parts[k], w).ok()?;
    }
    let re = parts[0].checked_sub(parts[2])?;
    let im = parts[1].checked_sub(parts[3])?;
    let num = checked_add(checked_mul(re, re).ok()?, checked_mul(im, im).ok()?).ok()?;
    let den = law.denominator();
    let sq = Rational::new(num, checked_mul(den, den).ok()?);
    Some(Coefficient {
        character: a,
        re: re as f64 / den as f64,
        im: im as f64 / den as f64,
        modulus: super::ratio_f64(&sq).sqrt(),
        modulus_squared: Some(sq),
        slack: 0.0,
    })
}

/// Law of `X + Y` for independent `X`, `Y`.
pub fn convolve(a: &SignedMeasure, b: &SignedMeasure) -> Result<SignedMeasure> {
    let module = a.module();
    if module.module_type() != b.module().module_type() {
        return Err(Error::usage("convolution of measures on different modules"));
    }
    let mut num = vec![0i128; module.size() as usize];
    let bs: Vec<(u32, i128)> =
        b.numerators().iter().enumerate().filter(|(_, &w)| w != 0).map(|(y, &w)| (y as u32, w)).collect();
    for (x, &wa) in a.numerators().iter().enumerate().filter(|(_, &w)| w != 0) {
        for &(y, wb) in &bs {
            let z = module.add(x as u32, y) as usize;
            num[z] = checked_add(num[z], checked_mul(wa, wb)?)?;
        }
    }
    SignedMeasure::from_integers(module.clone(), num, checked_mul(a.denominator(), b.denominator())?)
}

/// Law of `m * xi` on the module.
pub fn scaled_law(module: &Arc<ConcreteModule>, xi: &EntryDistribution, m: u32) -> Result<SignedMeasure> {
    if xi.spec() != module.ring().spec() {
        return Err(Error::usage("entry distribution over a different ring"));
    }
    let den = lcm_denominators(xi);
    let mut num = vec![0i128; module.size() as usize];
    for &(r, w) in xi.support() {
        let x = module.scale(r, m) as usize;
        num[x] += w.numer() * (den / w.denom());
    }
    SignedMeasure::from_integers(module.clone(), num, den)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::modules::ModuleType;
    use crate::ring::Ring;
    use num_traits::Zero;

    fn module(ring: &str, lambda: &[u32]) -> Arc<ConcreteModule> {
        let r = Ring::parse(ring).unwrap();
        Arc::new(ConcreteModule::new(&r, ModuleType::new(r.spec(), lambda.to_vec()).unwrap()).unwrap())
    }

    #[test]
    fn uniform_and_delta() {
        for (ring, lambda) in [("Z/5", vec![1]), ("Z/4", vec![2, 1]), ("F4[t]/t", vec![1]), ("Z/9", vec![2])] {
            let m = module(ring, &lambda);
            let u = fourier_coefficients(&SignedMeasure::uniform(m.clone())).unwrap();
            assert!((u[0].modulus - 1.0).abs() < 1e-15);
            assert!(u[1..].iter().all(|c| c.at_most(Rational::zero()).0 || c.modulus < 1e-13));
            let d = fourier_coefficients(&SignedMeasure::delta(m.clone(), 0).unwrap()).unwrap();
            assert!(d.iter().all(|c| c.has_unit_modulus().0 && (c.re - 1.0).abs() < 1e-15));
        }
    }

    #[test]
    fn order_four_character() {
        let m = module("Z/4", &[2]);
        let xi = EntryDistribution::parse(m.ring(), "0:1/2,1:1/2").unwrap();
        let law = scaled_law(&m, &xi, 1).unwrap();
        let c = fourier_coefficients(&law).unwrap();
        assert_eq!(c[1].modulus_squared, Some(Rational::new(1, 2)));
        assert!((c[1].modulus - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(c[2].modulus_squared, Some(Rational::zero()));
    }

    /// Plancherel: `sum_a |c_a|^2 = |G| * sum_x P(x)^2`.
    #[test]
    fn plancherel() {
        for (ring, lambda) in [("Z/8", vec![3, 1]), ("Z/3", vec![1, 1]), ("F2[t]/t^2", vec![2, 1]), ("Z/4", vec![2, 2])] {
            let m = module(ring, &lambda);
            let num: Vec<i128> = (0..m.size() as i128).map(|x| (x * x + 3) % 7).collect();
            let law = SignedMeasure::from_integers(m.clone(), num, 11).unwrap();
            let lhs: f64 = fourier_coefficients(&law).unwrap().iter().map(|c| c.modulus * c.modulus).sum();
            let rhs = m.size() as f64 * crate::measures::rational_to_f64(&law.l2_norm_squared().unwrap());
            assert!((lhs - rhs).abs() < 1e-9, "{ring} {lhs} {rhs}");
        }
    }

    /// Convolution multiplies coefficients.
    #[test]
    fn convolution_theorem() {
        let m = module("Z/9", &[2, 1]);
        let a = SignedMeasure::from_integers(m.clone(), (0..27).map(|x| (x % 4) as i128).collect(), 40).unwrap();
        let b = SignedMeasure::from_integers(m.clone(), (0..27).map(|x| ((x * 5) % 3) as i128).collect(), 27).unwrap();
        let (ca, cb) = (fourier_coefficients(&a).unwrap(), fourier_coefficients(&b).unwrap());
        let cc = fourier_coefficients(&convolve(&a, &b).unwrap()).unwrap();
        for i in 0..27 {
            let re = ca[i].re * cb[i].re - ca[i].im * cb[i].im;
            let im = ca[i].re * cb[i].im + ca[i].im * cb[i].re;
            assert!((cc[i].re - re).abs() < 1e-12 && (cc[i].im - im).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_and_float_paths_agree() {
        let m = module("F2[t]/t^2", &[2, 1]);
        let law = SignedMeasure::from_integers(m.clone(), (0..8).map(|x| x as i128).collect(), 28).unwrap();
        let dec = CyclicDecomposition::new(&m);
        for a in 0..8 {
            let exact = coefficient_with(&dec, &law, a);
            assert!(exact.modulus_squared.is_some());
            let mut re = 0.0;
            let mut im = 0.0;
            for x in 0..8 {
                let angle = std::f64::consts::TAU * dec.pairing(a, x) as f64 / dec.exponent() as f64;
                re += x as f64 / 28.0 * angle.cos();
                im += x as f64 / 28.0 * angle.sin();
            }
            assert!((exact.modulus - re.hypot(im)).abs() < 1e-14);
        }
    }
}
