use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::matrix::MatrixOverR;
use crate::ring::{Ring, RingElem, RingKind};

/// Determinant of a square matrix.
///
/// Entries are lifted to `Z` or `F_q[t]`, the determinant of the lift is computed by
/// fraction-free Bareiss elimination, and the result is reduced back into `R`. Lifting
/// sidesteps the zero-divisor pivots that break elimination inside `R` itself.
pub fn determinant(m: &MatrixOverR) -> Result<RingElem> {
    if !m.is_square() {
        return Err(Error::usage(format!("determinant of a {}x{} matrix", m.rows(), m.cols())));
    }
    let ring = m.ring();
    let code = match ring.kind() {
        RingKind::Integers => {
            let modulus = ring.size() as i128;
            let det = match bareiss_i128(m) {
                Some(d) => d.rem_euclid(modulus),
                None => bareiss_bigint(m)
                    .mod_floor(&BigInt::from(modulus))
                    .to_i128()
                    .expect("reduced value fits"),
            };
            det as u32
        }
        RingKind::Polynomial => {
            let det = bareiss_poly(m);
            let q = ring.q();
            det.iter().take(ring.e() as usize).rev().fold(0, |acc, &c| acc * q + c)
        }
    };
    ring.elem(code)
}

fn bareiss_i128(m: &MatrixOverR) -> Option<i128> {
    let n = m.rows();
    if n == 0 {
        return Some(1);
    }
    let mut a: Vec<i128> = m.data().iter().map(|&x| x as i128).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n - 1 {
        if a[k * n + k] == 0 {
            match (k + 1..n).find(|&i| a[i * n + k] != 0) {
                Some(i) => {
                    for j in 0..n {
                        a.swap(k * n + j, i * n + j);
                    }
                    sign = -sign;
                }
                None => return Some(0),
            }
        }
        let pivot = a[k * n + k];
        for i in k + 1..n {
            for j in k + 1..n {
                let x = pivot.checked_mul(a[i * n + j])?;
                let y = a[i * n + k].checked_mul(a[k * n + j])?;
                a[i * n + j] = x.checked_sub(y)? / prev;
            }
        }
        prev = pivot;
    }
    Some(sign * a[n * n - 1])
}

fn bareiss_bigint(m: &MatrixOverR) -> BigInt {
    let n = m.rows();
    let mut a: Vec<BigInt> = m.data().iter().map(|&x| BigInt::from(x)).collect();
    let mut negate = false;
    let mut prev = BigInt::from(1);
    for k in 0..n.saturating_sub(1) {
        if a[k * n + k].is_zero() {
            match (k + 1..n).find(|&i| !a[i * n + k].is_zero()) {
                Some(i) => {
                    for j in 0..n {
                        a.swap(k * n + j, i * n + j);
                    }
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        let pivot = a[k * n + k].clone();
        for i in k + 1..n {
            for j in k + 1..n {
                let x = &pivot * &a[i * n + j] - &a[i * n + k] * &a[k * n + j];
                a[i * n + j] = x / &prev;
            }
        }
        prev = pivot;
    }
    let d = a.pop().unwrap_or_else(|| BigInt::from(1));
    if negate {
        -d
    } else {
        d
    }
}

/// Polynomials over `F_q` as coefficient vectors, low degree first, without trailing zeros.
type Poly = Vec<u32>;

fn trim(mut p: Poly) -> Poly {
    while p.last() == Some(&0) {
        p.pop();
    }
    p
}

fn lift(ring: &Ring, code: u32) -> Poly {
    let q = ring.q();
    let mut out = Vec::new();
    let mut x = code;
    while x > 0 {
        out.push(x % q);
        x /= q;
    }
    out
}

fn poly_mul(ring: &Ring, a: &Poly, b: &Poly) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] = ring.field_add(out[i + j], ring.field_mul(x, y));
        }
    }
    trim(out)
}

fn poly_sub(ring: &Ring, a: &Poly, b: &Poly) -> Poly {
    let len = a.len().max(b.len());
    let out = (0..len)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            ring.field_add(x, ring.field_neg(y))
        })
        .collect();
    trim(out)
}

/// Exact quotient `a / b`; Bareiss guarantees divisibility.
fn poly_div_exact(ring: &Ring, a: &Poly, b: &Poly) -> Poly {
    let mut rem = a.clone();
    if rem.is_empty() {
        return rem;
    }
    let db = b.len() - 1;
    let lead_inv = ring.field_inv(*b.last().expect("nonzero divisor")).expect("field element");
    let mut quot = vec![0; rem.len().saturating_sub(db).max(1)];
    while rem.len() > db && !rem.is_empty() {
        let shift = rem.len() - 1 - db;
        let c = ring.field_mul(*rem.last().unwrap(), lead_inv);
        quot[shift] = c;
        for (i, &y) in b.iter().enumerate() {
            rem[shift + i] = ring.field_add(rem[shift + i], ring.field_neg(ring.field_mul(c, y)));
        }
        rem = trim(rem);
    }
    debug_assert!(rem.is_empty(), "Bareiss division must be exact");
    trim(quot)
}

fn bareiss_poly(m: &MatrixOverR) -> Poly {
    let ring = m.ring();
    let n = m.rows();
    if n == 0 {
        return vec![1];
    }
    let mut a: Vec<Poly> = m.data().iter().map(|&x| lift(ring, x)).collect();
    let mut negate = false;
    let mut prev: Poly = vec![1];
    for k in 0..n - 1 {
        if a[k * n + k].is_empty() {
            match (k + 1..n).find(|&i| !a[i * n + k].is_empty()) {
                Some(i) => {
                    for j in 0..n {
                        a.swap(k * n + j, i * n + j);
                    }
                    negate = !negate;
                }
                None => return Vec::new(),
            }
        }
        let pivot = a[k * n + k].clone();
        for i in k + 1..n {
            for j in k + 1..n {
                let x = poly_sub(ring, &poly_mul(ring, &pivot, &a[i * n + j]), &poly_mul(ring, &a[i * n + k], &a[k * n + j]));
                a[i * n + j] = poly_div_exact(ring, &x, &prev);
            }
        }
        prev = pivot;
    }
    let d = a.pop().unwrap();
    if negate {
        d.into_iter().map(|c| ring.field_neg(c)).collect()
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::cokernel;
    use proptest::prelude::*;

    /// Leibniz expansion computed entirely inside `R`.
    fn leibniz(m: &MatrixOverR) -> u32 {
        let ring = m.ring();
        let n = m.rows();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut total = 0;
        permute(&mut perm, 0, &mut |p| {
            let inversions = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| p[i] > p[j]).count();
            let mut term = ring.one().code();
            for (i, &j) in p.iter().enumerate() {
                term = ring.mul_codes(term, m.get(i, j));
            }
            if inversions % 2 == 1 {
                term = ring.neg_code(term);
            }
            total = ring.add_codes(total, term);
        });
        total
    }

    fn permute(p: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
        if k == p.len() {
            f(p);
            return;
        }
        for i in k..p.len() {
            p.swap(k, i);
            permute(p, k + 1, f);
            p.swap(k, i);
        }
    }

    #[test]
    fn examples() {
        let r = Ring::parse("Z/8").unwrap();
        assert_eq!(determinant(&MatrixOverR::identity(&r, 4)).unwrap().code(), 1);
        assert_eq!(determinant(&MatrixOverR::parse(&r, "2,3;0,2").unwrap()).unwrap().code(), 4);
        assert_eq!(determinant(&MatrixOverR::parse(&r, "1,2,3;0,0,0;5,6,7").unwrap()).unwrap().code(), 0);
        assert!(determinant(&MatrixOverR::parse(&r, "1,2").unwrap()).is_err());
        // a zero leading pivot forces a row swap
        assert_eq!(determinant(&MatrixOverR::parse(&r, "0,1;1,0").unwrap()).unwrap().code(), 7);
    }

    #[test]
    fn big_entries_take_the_bigint_path() {
        let r = Ring::parse("Z/1048576").unwrap();
        let n = 7;
        let data: Vec<u32> = (0..n * n).map(|i| ((i as u64 * 2654435761) % 1048576) as u32).collect();
        let m = MatrixOverR::new(&r, n, n, data).unwrap();
        assert!(bareiss_i128(&m).is_none());
        assert_eq!(determinant(&m).unwrap().code(), leibniz(&m));
    }

    fn arb_square(ring: &'static str, max_n: usize) -> impl Strategy<Value = MatrixOverR> {
        let r = Ring::parse(ring).unwrap();
        let size = r.size();
        (1..=max_n).prop_flat_map(move |n| {
            let r = r.clone();
            prop::collection::vec(0..size, n * n).prop_map(move |d| MatrixOverR::new(&r, n, n, d).unwrap())
        })
    }

    proptest! {
        #[test]
        fn matches_leibniz_integers(m in arb_square("Z/27", 5)) {
            prop_assert_eq!(determinant(&m).unwrap().code(), leibniz(&m));
        }

        #[test]
        fn matches_leibniz_polynomial(m in arb_square("F4[t]/t^3", 4)) {
            prop_assert_eq!(determinant(&m).unwrap().code(), leibniz(&m));
        }

        #[test]
        fn matches_leibniz_sparse(m in arb_square("F3[t]/t^2", 5).prop_map(|mut m| {
            for i in 0..m.rows() { m.set(i, 0, 0); }
            m
        })) {
            prop_assert_eq!(determinant(&m).unwrap().code(), 0);
        }

        #[test]
        fn unit_iff_trivial_cokernel(m in arb_square("Z/8", 4)) {
            let d = determinant(&m).unwrap();
            prop_assert_eq!(m.ring().is_unit(d).unwrap(), cokernel(&m).is_trivial());
        }

        #[test]
        fn unit_iff_trivial_cokernel_poly(m in arb_square("F2[t]/t^2", 4)) {
            let d = determinant(&m).unwrap();
            prop_assert_eq!(m.ring().is_unit(d).unwrap(), cokernel(&m).is_trivial());
        }
    }
}
