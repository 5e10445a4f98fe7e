use crate::matrix::MatrixOverR;
use crate::modules::ModuleType;

/// Smith form `U * M * V = diag(pi^a_1, ..., pi^a_k)` with `a_1 <= ... <= a_k`, `k = min(n, m)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    pub exponents: Vec<u32>,
    pub transforms: Option<(MatrixOverR, MatrixOverR)>,
}

/// Minimal-valuation pivoting: in a chain ring any entry of least valuation divides
/// every other entry, so each step clears a full row and column. Ties go to the
/// leftmost column, then the topmost row.
pub fn smith_normal_form(m: &MatrixOverR, with_transforms: bool) -> SmithForm {
    let ring = m.ring().clone();
    let (n, c) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut transforms = with_transforms.then(|| (MatrixOverR::identity(&ring, n), MatrixOverR::identity(&ring, c)));
    let k = n.min(c);
    let mut exponents = Vec::with_capacity(k);
    for step in 0..k {
        let mut best: Option<(u32, usize, usize)> = None;
        for j in step..c {
            for i in step..n {
                let v = ring.valuation_code(a.get(i, j));
                if best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                }
            }
        }
        let (v, pi, pj) = best.expect("nonempty block");
        if v >= ring.e() {
            exponents.extend(std::iter::repeat(ring.e()).take(k - step));
            break;
        }
        a.swap_rows(step, pi);
        a.swap_cols(step, pj);
        if let Some((u, w)) = transforms.as_mut() {
            u.swap_rows(step, pi);
            w.swap_cols(step, pj);
        }
        let unit = ring.unit_part(a.get(step, step));
        let inv = ring.inv_code(unit).expect("unit part is a unit");
        a.scale_row(step, inv);
        if let Some((u, _)) = transforms.as_mut() {
            u.scale_row(step, inv);
        }
        for i in step + 1..n {
            let x = a.get(i, step);
            if x != 0 {
                let factor = ring.neg_code(ring.div_pi_pow(x, v));
                a.add_row_multiple(i, step, factor);
                if let Some((u, _)) = transforms.as_mut() {
                    u.add_row_multiple(i, step, factor);
                }
            }
        }
        for j in step + 1..c {
            let x = a.get(step, j);
            if x != 0 {
                let factor = ring.neg_code(ring.div_pi_pow(x, v));
                a.add_col_multiple(j, step, factor);
                if let Some((_, w)) = transforms.as_mut() {
                    w.add_col_multiple(j, step, factor);
                }
            }
        }
        exponents.push(v);
    }
    SmithForm { exponents, transforms }
}

/// `R^n / colspan(M)`: one `R/pi^a` per Smith exponent plus a free summand for each
/// row beyond the number of columns.
pub fn cokernel(m: &MatrixOverR) -> ModuleType {
    let spec = m.ring().spec();
    let snf = smith_normal_form(m, false);
    let mut lambda = snf.exponents;
    lambda.extend(std::iter::repeat(spec.e()).take(m.rows().saturating_sub(m.cols())));
    ModuleType::new(spec, lambda).expect("exponents lie in [0, e]")
}
