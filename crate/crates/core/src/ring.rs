//! Finite chain rings `Z/p^e` and `F_q[t]/(t^e)`.
//!
//! Elements are stored as integer codes. For `Z/p^e` the code is the residue in
//! `[0, p^e)`. For `F_q[t]/(t^e)` the code is `sum c_i q^i` where each coefficient
//! `c_i` of `t^i` is itself an `F_q` code, written in base `p` over the fixed
//! irreducible modulus. With this encoding the ideal `(pi^v)` is exactly the set
//! of codes divisible by `q^v` in both kinds, which keeps valuation, reduction
//! modulo `pi^v` and division by `pi^v` uniform.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest ring handled, in elements.
pub const MAX_RING_SIZE: u64 = 1 << 20;
/// Largest residue field for the polynomial kind (arithmetic is table driven).
pub const MAX_POLY_FIELD: u32 = 1024;
const FULL_TABLE_LIMIT: u32 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RingKind {
    /// `Z/p^e`, residue field `F_p`.
    Integers,
    /// `F_q[t]/(t^e)` with `q = p^f`.
    Polynomial,
}

/// Identity of a finite chain ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingSpec {
    kind: RingKind,
    p: u32,
    e: u32,
    f: u32,
}

impl RingSpec {
    pub fn integers(p: u32, e: u32) -> Result<Self> {
        Self::validate(RingKind::Integers, p, e, 1)
    }

    pub fn polynomial(p: u32, f: u32, e: u32) -> Result<Self> {
        Self::validate(RingKind::Polynomial, p, e, f)
    }

    fn validate(kind: RingKind, p: u32, e: u32, f: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::usage(format!("{p} is not prime")));
        }
        if e == 0 || f == 0 {
            return Err(Error::usage("ring length and residue degree must be at least 1"));
        }
        let size = (p as u64).checked_pow(e * f);
        match size {
            Some(s) if s <= MAX_RING_SIZE => {}
            _ => return Err(Error::resource(format!("ring of order {p}^{} exceeds {MAX_RING_SIZE}", e * f))),
        }
        if kind == RingKind::Polynomial && (p as u64).pow(f) > MAX_POLY_FIELD as u64 {
            return Err(Error::resource(format!("residue field larger than {MAX_POLY_FIELD}")));
        }
        Ok(Self { kind, p, e, f })
    }

    pub fn kind(&self) -> RingKind {
        self.kind
    }
    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn e(&self) -> u32 {
        self.e
    }
    pub fn f(&self) -> u32 {
        self.f
    }
    /// Residue field size.
    pub fn q(&self) -> u32 {
        self.p.pow(self.f)
    }
    pub fn size(&self) -> u32 {
        self.q().pow(self.e)
    }
    /// Characteristic of the residue field.
    pub fn residue_characteristic(&self) -> u32 {
        self.p
    }

    /// The monic irreducible defining `F_q` (low-order coefficient first), polynomial kind only.
    pub fn irreducible(&self) -> Option<Vec<u32>> {
        match self.kind {
            RingKind::Integers => None,
            RingKind::Polynomial => Some(least_irreducible(self.p, self.f)),
        }
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            RingKind::Integers => write!(f, "Z/{}", self.size()),
            RingKind::Polynomial if self.e == 1 => write!(f, "F{}[t]/t", self.q()),
            RingKind::Polynomial => write!(f, "F{}[t]/t^{}", self.q(), self.e),
        }
    }
}

impl FromStr for RingSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::parse(format!("unrecognised ring '{s}'"));
        if let Some(rest) = compact.strip_prefix("Z/") {
            let rest = strip_parens(rest);
            let rest = rest.strip_suffix('Z').unwrap_or(rest);
            let n = parse_power(rest).ok_or_else(bad)?;
            let (p, e) = prime_power(n).ok_or_else(|| Error::usage(format!("{n} is not a prime power")))?;
            return RingSpec::integers(p, e);
        }
        let rest = compact
            .strip_prefix("F_")
            .or_else(|| compact.strip_prefix('F'))
            .ok_or_else(bad)?;
        let (field, tail) = match rest.find('[') {
            Some(i) => (&rest[..i], &rest[i..]),
            None => (rest, ""),
        };
        let q = parse_power(strip_parens(field)).ok_or_else(bad)?;
        let (p, f) = prime_power(q).ok_or_else(|| Error::usage(format!("{q} is not a prime power")))?;
        let e = if tail.is_empty() {
            1
        } else {
            let t = tail.strip_prefix("[t]").ok_or_else(bad)?;
            let t = t.strip_prefix('/').ok_or_else(bad)?;
            let t = strip_parens(t);
            let t = t.strip_prefix('t').ok_or_else(bad)?;
            if t.is_empty() {
                1
            } else {
                t.strip_prefix('^').and_then(|x| x.parse().ok()).ok_or_else(bad)?
            }
        };
        RingSpec::polynomial(p, f, e)
    }
}

fn strip_parens(s: &str) -> &str {
    s.strip_prefix('(').and_then(|x| x.strip_suffix(')')).unwrap_or(s)
}

fn parse_power(s: &str) -> Option<u64> {
    match s.split_once('^') {
        Some((b, x)) => b.parse::<u64>().ok()?.checked_pow(x.parse().ok()?),
        None => s.parse().ok(),
    }
}

pub(crate) fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= n as u64 {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn prime_power(n: u64) -> Option<(u32, u32)> {
    if n < 2 || n > u32::MAX as u64 {
        return None;
    }
    let n = n as u32;
    let p = (2..=n).find(|d| n % d == 0)?;
    let mut m = n;
    let mut e = 0;
    while m % p == 0 {
        m /= p;
        e += 1;
    }
    (m == 1).then_some((p, e))
}

/// Least monic irreducible of degree `f` over `F_p`, ordering candidates by
/// `sum c_i p^i` over the non-leading coefficients.
fn least_irreducible(p: u32, f: u32) -> Vec<u32> {
    let count = p.pow(f);
    for code in 0..count {
        let mut poly = digits(code, p, f as usize);
        poly.push(1);
        if f == 1 || is_irreducible(&poly, p) {
            return poly;
        }
    }
    unreachable!("an irreducible of every degree exists")
}

fn digits(mut code: u32, base: u32, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push(code % base);
        code /= base;
    }
    out
}

fn is_irreducible(poly: &[u32], p: u32) -> bool {
    let deg = poly.len() - 1;
    for d in 1..=deg / 2 {
        for code in 0..p.pow(d as u32) {
            let mut g = digits(code, p, d);
            g.push(1);
            if poly_rem(poly, &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// Remainder of `a` by monic `m` over `F_p`.
fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r: Vec<u32> = a.to_vec();
    let dm = m.len() - 1;
    while r.len() > dm {
        let lead = r.pop().unwrap();
        if lead != 0 {
            let shift = r.len() - dm;
            for (i, &c) in m[..dm].iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - (lead * c) % p) % p;
            }
        }
    }
    r
}

/// Ideal `(pi^exponent)` of a chain ring; `exponent = e` is the zero ideal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Ideal {
    pub exponent: u32,
}

impl fmt::Display for Ideal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(pi^{})", self.exponent)
    }
}

/// An element of a specific ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RingElem {
    spec: RingSpec,
    code: u32,
}

impl RingElem {
    pub fn code(&self) -> u32 {
        self.code
    }
    pub fn spec(&self) -> RingSpec {
        self.spec
    }
}

impl fmt::Display for RingElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.code)
    }
}

struct FieldTables {
    add: Vec<u16>,
    mul: Vec<u16>,
    neg: Vec<u16>,
    inv: Vec<u16>,
}

struct Inner {
    spec: RingSpec,
    q: u32,
    size: u32,
    q_pow: Vec<u32>,
    field: Option<FieldTables>,
    full: Option<(Vec<u16>, Vec<u16>)>,
}

/// Arithmetic context for a chain ring. Cheap to clone.
#[derive(Clone)]
pub struct Ring {
    inner: Arc<Inner>,
}

impl fmt::Debug for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Ring({})", self.inner.spec)
    }
}

impl PartialEq for Ring {
    fn eq(&self, other: &Self) -> bool {
        self.inner.spec == other.inner.spec
    }
}
impl Eq for Ring {}

impl Ring {
    pub fn new(spec: RingSpec) -> Self {
        let q = spec.q();
        let size = spec.size();
        let q_pow = (0..=spec.e).map(|i| q.pow(i)).collect();
        let field = (spec.kind == RingKind::Polynomial).then(|| build_field(spec.p, spec.f));
        let mut ring = Ring {
            inner: Arc::new(Inner { spec, q, size, q_pow, field, full: None }),
        };
        if spec.kind == RingKind::Polynomial && size <= FULL_TABLE_LIMIT {
            let n = size as usize;
            let mut add = vec![0u16; n * n];
            let mut mul = vec![0u16; n * n];
            for a in 0..size {
                for b in 0..size {
                    add[a as usize * n + b as usize] = ring.poly_add(a, b) as u16;
                    mul[a as usize * n + b as usize] = ring.poly_mul(a, b) as u16;
                }
            }
            let inner = Arc::get_mut(&mut ring.inner).expect("fresh ring");
            inner.full = Some((add, mul));
        }
        ring
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(Ring::new(s.parse()?))
    }

    pub fn spec(&self) -> RingSpec {
        self.inner.spec
    }
    pub fn size(&self) -> u32 {
        self.inner.size
    }
    pub fn q(&self) -> u32 {
        self.inner.q
    }
    pub fn p(&self) -> u32 {
        self.inner.spec.p
    }
    pub fn e(&self) -> u32 {
        self.inner.spec.e
    }
    pub fn kind(&self) -> RingKind {
        self.inner.spec.kind
    }

    /// `q^v`, saturating at `q^e`.
    pub fn q_pow(&self, v: u32) -> u32 {
        self.inner.q_pow[v.min(self.e()) as usize]
    }

    /// Number of units, `q^(e-1) (q-1)`.
    pub fn unit_count(&self) -> u64 {
        self.q_pow(self.e() - 1) as u64 * (self.q() as u64 - 1)
    }

    pub fn elem(&self, code: u32) -> Result<RingElem> {
        if code >= self.size() {
            return Err(Error::usage(format!("{code} is not a canonical element of {}", self.spec())));
        }
        Ok(RingElem { spec: self.spec(), code })
    }

    pub fn zero(&self) -> RingElem {
        RingElem { spec: self.spec(), code: 0 }
    }
    pub fn one(&self) -> RingElem {
        RingElem { spec: self.spec(), code: 1 % self.size() }
    }
    pub fn uniformizer(&self) -> RingElem {
        RingElem { spec: self.spec(), code: self.pi_pow(1) }
    }

    fn check(&self, a: RingElem) -> Result<u32> {
        if a.spec != self.spec() {
            return Err(Error::usage(format!("element of {} used in {}", a.spec, self.spec())));
        }
        Ok(a.code)
    }

    fn wrap(&self, code: u32) -> RingElem {
        RingElem { spec: self.spec(), code }
    }

    pub fn add(&self, a: RingElem, b: RingElem) -> Result<RingElem> {
        Ok(self.wrap(self.add_codes(self.check(a)?, self.check(b)?)))
    }
    pub fn sub(&self, a: RingElem, b: RingElem) -> Result<RingElem> {
        Ok(self.wrap(self.sub_codes(self.check(a)?, self.check(b)?)))
    }
    pub fn neg(&self, a: RingElem) -> Result<RingElem> {
        Ok(self.wrap(self.neg_code(self.check(a)?)))
    }
    pub fn mul(&self, a: RingElem, b: RingElem) -> Result<RingElem> {
        Ok(self.wrap(self.mul_codes(self.check(a)?, self.check(b)?)))
    }
    pub fn valuation(&self, a: RingElem) -> Result<u32> {
        Ok(self.valuation_code(self.check(a)?))
    }
    pub fn is_unit(&self, a: RingElem) -> Result<bool> {
        Ok(self.is_unit_code(self.check(a)?))
    }
    pub fn inv(&self, a: RingElem) -> Result<RingElem> {
        let code = self.check(a)?;
        self.inv_code(code)
            .map(|c| self.wrap(c))
            .ok_or_else(|| Error::Domain(format!("{code} is not a unit in {}", self.spec())))
    }
    /// Image in the residue field, as an `F_q` code.
    pub fn residue(&self, a: RingElem) -> Result<u32> {
        Ok(self.check(a)? % self.q())
    }

    pub fn enumerate_elements(&self) -> Vec<RingElem> {
        (0..self.size()).map(|c| self.wrap(c)).collect()
    }
    pub fn enumerate_units(&self) -> Vec<RingElem> {
        (0..self.size()).filter(|&c| self.is_unit_code(c)).map(|c| self.wrap(c)).collect()
    }
    /// The `e + 1` ideals, largest first.
    pub fn enumerate_ideals(&self) -> Vec<Ideal> {
        (0..=self.e()).map(|exponent| Ideal { exponent }).collect()
    }
    /// Generator `pi^j` of an ideal.
    pub fn ideal_generator(&self, ideal: Ideal) -> RingElem {
        self.wrap(self.pi_pow(ideal.exponent))
    }

    // Code-level arithmetic. Inputs must be canonical codes of this ring.

    #[inline]
    pub fn add_codes(&self, a: u32, b: u32) -> u32 {
        match self.kind() {
            RingKind::Integers => {
                let s = a + b;
                if s >= self.size() {
                    s - self.size()
                } else {
                    s
                }
            }
            RingKind::Polynomial => match &self.inner.full {
                Some((add, _)) => add[(a * self.size() + b) as usize] as u32,
                None => self.poly_add(a, b),
            },
        }
    }

    #[inline]
    pub fn neg_code(&self, a: u32) -> u32 {
        match self.kind() {
            RingKind::Integers => {
                if a == 0 {
                    0
                } else {
                    self.size() - a
                }
            }
            RingKind::Polynomial => {
                let field = self.field();
                let q = self.q();
                let mut out = 0;
                let mut rest = a;
                let mut scale = 1;
                while rest > 0 {
                    out += field.neg[(rest % q) as usize] as u32 * scale;
                    rest /= q;
                    scale *= q;
                }
                out
            }
        }
    }

    #[inline]
    pub fn sub_codes(&self, a: u32, b: u32) -> u32 {
        self.add_codes(a, self.neg_code(b))
    }

    #[inline]
    pub fn mul_codes(&self, a: u32, b: u32) -> u32 {
        match self.kind() {
            RingKind::Integers => ((a as u64 * b as u64) % self.size() as u64) as u32,
            RingKind::Polynomial => match &self.inner.full {
                Some((_, mul)) => mul[(a * self.size() + b) as usize] as u32,
                None => self.poly_mul(a, b),
            },
        }
    }

    /// Code of `pi^v` (zero once `v >= e`).
    pub fn pi_pow(&self, v: u32) -> u32 {
        if v >= self.e() {
            0
        } else {
            self.q_pow(v)
        }
    }

    /// Largest `v` with `a` in `(pi^v)`; `e` for zero.
    pub fn valuation_code(&self, a: u32) -> u32 {
        if a == 0 {
            return self.e();
        }
        let q = self.q();
        let mut v = 0;
        let mut x = a;
        while x % q == 0 {
            x /= q;
            v += 1;
        }
        v
    }

    #[inline]
    pub fn is_unit_code(&self, a: u32) -> bool {
        a % self.q() != 0
    }

    /// `a * pi^v`.
    pub fn mul_pi_pow(&self, a: u32, v: u32) -> u32 {
        if v >= self.e() {
            return 0;
        }
        ((a as u64 * self.q_pow(v) as u64) % self.size() as u64) as u32
    }

    /// A unit `u` with `a = u * pi^v`, where `v` is the valuation of nonzero `a`.
    pub fn unit_part(&self, a: u32) -> u32 {
        a / self.q_pow(self.valuation_code(a))
    }

    /// Canonical representative of the class of `a` modulo `(pi^v)`.
    #[inline]
    pub fn reduce_mod_pi(&self, a: u32, v: u32) -> u32 {
        a % self.q_pow(v)
    }

    /// `a / pi^v` for `a` in `(pi^v)`, choosing the representative below `q^(e-v)`.
    pub fn div_pi_pow(&self, a: u32, v: u32) -> u32 {
        a / self.q_pow(v)
    }

    pub fn inv_code(&self, a: u32) -> Option<u32> {
        if !self.is_unit_code(a) {
            return None;
        }
        match self.kind() {
            RingKind::Integers => {
                let n = self.size() as i64;
                let (mut r0, mut r1) = (a as i64, n);
                let (mut s0, mut s1) = (1i64, 0i64);
                while r1 != 0 {
                    let t = r0 / r1;
                    (r0, r1) = (r1, r0 - t * r1);
                    (s0, s1) = (s1, s0 - t * s1);
                }
                Some(s0.rem_euclid(n) as u32)
            }
            RingKind::Polynomial => Some(self.pow_code(a, self.unit_count() - 1)),
        }
    }

    pub fn pow_code(&self, a: u32, mut k: u64) -> u32 {
        let mut base = a;
        let mut acc = self.one().code;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul_codes(acc, base);
            }
            base = self.mul_codes(base, base);
            k >>= 1;
        }
        acc
    }

    // Residue field arithmetic on `F_q` codes.

    fn field(&self) -> &FieldTables {
        self.inner.field.as_ref().expect("polynomial kind has field tables")
    }

    pub fn field_add(&self, a: u32, b: u32) -> u32 {
        match self.kind() {
            RingKind::Integers => (a + b) % self.p(),
            RingKind::Polynomial => self.field().add[(a * self.q() + b) as usize] as u32,
        }
    }
    pub fn field_neg(&self, a: u32) -> u32 {
        match self.kind() {
            RingKind::Integers => (self.p() - a) % self.p(),
            RingKind::Polynomial => self.field().neg[a as usize] as u32,
        }
    }
    pub fn field_mul(&self, a: u32, b: u32) -> u32 {
        match self.kind() {
            RingKind::Integers => ((a as u64 * b as u64) % self.p() as u64) as u32,
            RingKind::Polynomial => self.field().mul[(a * self.q() + b) as usize] as u32,
        }
    }
    pub fn field_inv(&self, a: u32) -> Option<u32> {
        if a == 0 {
            return None;
        }
        match self.kind() {
            RingKind::Integers => {
                let p = self.p() as u64;
                let (mut base, mut k, mut acc) = (a as u64 % p, p - 2, 1u64);
                while k > 0 {
                    if k & 1 == 1 {
                        acc = acc * base % p;
                    }
                    base = base * base % p;
                    k >>= 1;
                }
                Some(acc as u32)
            }
            RingKind::Polynomial => Some(self.field().inv[a as usize] as u32),
        }
    }

    fn poly_add(&self, a: u32, b: u32) -> u32 {
        let field = self.field();
        let q = self.q();
        let (mut x, mut y) = (a, b);
        let mut out = 0;
        let mut scale = 1;
        while x > 0 || y > 0 {
            out += field.add[((x % q) * q + y % q) as usize] as u32 * scale;
            x /= q;
            y /= q;
            scale *= q;
        }
        out
    }

    fn poly_mul(&self, a: u32, b: u32) -> u32 {
        let field = self.field();
        let q = self.q();
        let e = self.e() as usize;
        let da = digits(a, q, e);
        let db = digits(b, q, e);
        let mut out = vec![0u32; e];
        for (i, &x) in da.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in db.iter().enumerate().take(e - i) {
                let prod = field.mul[(x * q + y) as usize] as u32;
                out[i + j] = field.add[(out[i + j] * q + prod) as usize] as u32;
            }
        }
        out.iter().rev().fold(0, |acc, &c| acc * q + c)
    }
}

fn build_field(p: u32, f: u32) -> FieldTables {
    let q = p.pow(f);
    let modulus = least_irreducible(p, f);
    let n = q as usize;
    let mut add = vec![0u16; n * n];
    let mut mul = vec![0u16; n * n];
    let encode = |v: &[u32]| v.iter().rev().fold(0u32, |acc, &c| acc * p + c);
    for a in 0..q {
        let da = digits(a, p, f as usize);
        for b in 0..q {
            let db = digits(b, p, f as usize);
            let sum: Vec<u32> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
            add[a as usize * n + b as usize] = encode(&sum) as u16;
            let mut prod = vec![0u32; 2 * f as usize - 1];
            for (i, x) in da.iter().enumerate() {
                for (j, y) in db.iter().enumerate() {
                    prod[i + j] = (prod[i + j] + x * y) % p;
                }
            }
            let mut r = poly_rem(&prod, &modulus, p);
            r.resize(f as usize, 0);
            mul[a as usize * n + b as usize] = encode(&r) as u16;
        }
    }
    let neg = (0..q)
        .map(|a| encode(&digits(a, p, f as usize).iter().map(|x| (p - x) % p).collect::<Vec<_>>()) as u16)
        .collect();
    let mut inv = vec![0u16; n];
    for a in 1..q {
        for b in 1..q {
            if mul[a as usize * n + b as usize] == 1 {
                inv[a as usize] = b as u16;
                break;
            }
        }
    }
    FieldTables { add, mul, neg, inv }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: &str) -> Ring {
        Ring::parse(n).unwrap()
    }

    #[test]
    fn integer_arithmetic_examples() {
        let r = z("Z/4");
        let three = r.elem(3).unwrap();
        let two = r.elem(2).unwrap();
        assert_eq!(r.add(three, three).unwrap().code(), 2);
        assert_eq!(r.mul(two, two).unwrap().code(), 0);
        assert!(r.is_unit(three).unwrap());
        assert_eq!(r.inv(three).unwrap().code(), 3);
        assert!(!r.is_unit(two).unwrap());
        assert!(matches!(r.inv(two), Err(Error::Domain(_))));
        assert_eq!(r.residue(three).unwrap(), 1);
        let r9 = z("Z/9");
        assert_eq!(r9.inv(r9.elem(2).unwrap()).unwrap().code(), 5);
    }

    #[test]
    fn valuation_examples() {
        let r = z("Z/8");
        let v: Vec<u32> = [6, 4, 0, 5].iter().map(|&c| r.valuation(r.elem(c).unwrap()).unwrap()).collect();
        assert_eq!(v, vec![1, 2, 3, 0]);
    }

    #[test]
    fn truncated_polynomial_nilpotent() {
        let r = z("F2[t]/t^2");
        let t = r.uniformizer();
        assert_eq!(t.code(), 2);
        assert_eq!(r.mul(t, t).unwrap().code(), 0);
    }

    #[test]
    fn ideals_and_units() {
        let r = z("Z/4");
        let gens: Vec<u32> = r.enumerate_ideals().iter().map(|&i| r.ideal_generator(i).code()).collect();
        assert_eq!(gens, vec![1, 2, 0]);
        assert_eq!(z("F4[t]/t").enumerate_units().len(), 3);
    }

    #[test]
    fn mismatched_rings_rejected() {
        let a = z("Z/4");
        let b = z("Z/8");
        assert!(matches!(a.add(a.one(), b.one()), Err(Error::Usage(_))));
    }

    #[test]
    fn parse_round_trip() {
        for s in ["Z/4", "Z/9", "F2[t]/t^2", "F4[t]/t", "F9[t]/t^3", "Z/2"] {
            let spec: RingSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        let alt: RingSpec = "F_2[t]/(t^2)".parse().unwrap();
        assert_eq!(alt.to_string(), "F2[t]/t^2");
        let alt: RingSpec = "Z/2^3".parse().unwrap();
        assert_eq!(alt.size(), 8);
        assert_eq!("F4".parse::<RingSpec>().unwrap().to_string(), "F4[t]/t");
        assert!("Z/6".parse::<RingSpec>().is_err());
        assert!("Q".parse::<RingSpec>().is_err());
    }

    #[test]
    fn field_is_a_field() {
        for s in ["F4[t]/t", "F8[t]/t", "F9[t]/t", "F27[t]/t^1"] {
            let r = z(s);
            let q = r.q();
            for a in 1..q {
                let inv = r.field_inv(a).unwrap();
                assert_eq!(r.field_mul(a, inv), 1, "{s}: {a}");
            }
            // multiplicative group is cyclic of order q-1: some element has full order
            let has_generator = (1..q).any(|g| {
                let mut x = g;
                let mut ord = 1;
                while x != 1 {
                    x = r.field_mul(x, g);
                    ord += 1;
                }
                ord == q - 1
            });
            assert!(has_generator);
        }
    }

    #[test]
    fn irreducible_is_least() {
        let spec: RingSpec = "F4[t]/t".parse().unwrap();
        assert_eq!(spec.irreducible().unwrap(), vec![1, 1, 1]);
        let spec: RingSpec = "F8[t]/t".parse().unwrap();
        assert_eq!(spec.irreducible().unwrap(), vec![1, 1, 0, 1]);
        let spec: RingSpec = "F9[t]/t".parse().unwrap();
        assert_eq!(spec.irreducible().unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn table_and_direct_paths_agree() {
        let r = z("F4[t]/t^2");
        assert!(r.inner.full.is_some());
        for a in 0..r.size() {
            for b in 0..r.size() {
                assert_eq!(r.add_codes(a, b), r.poly_add(a, b));
                assert_eq!(r.mul_codes(a, b), r.poly_mul(a, b));
            }
        }
    }

    #[test]
    fn ideal_is_divisibility_by_q_power() {
        for s in ["Z/27", "F4[t]/t^3", "F3[t]/t^2"] {
            let r = z(s);
            for v in 0..=r.e() {
                let gen = r.pi_pow(v);
                let ideal: std::collections::BTreeSet<u32> = (0..r.size()).map(|x| r.mul_codes(x, gen)).collect();
                let expected: std::collections::BTreeSet<u32> =
                    (0..r.size()).filter(|c| c % r.q_pow(v) == 0).collect();
                assert_eq!(ideal, expected, "{s} v={v}");
            }
        }
    }
}
