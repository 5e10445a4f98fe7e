use crate::matrix::MatrixOverR;
use crate::ring::Ring;

/// Canonical generators of a column span in `R^n`.
///
/// Generator `k` has zeros above its pivot row `rows[k]`, the entry `pi^vals[k]`
/// at the pivot row, and every other generator's entry in that row reduced below
/// `q^vals[k]`. Two matrices have equal forms exactly when their column spans agree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HowellForm {
    pub n: usize,
    pub pivots: Vec<Vec<u32>>,
    pub rows: Vec<usize>,
    pub vals: Vec<u32>,
}

impl HowellForm {
    pub fn as_matrix(&self, ring: &Ring) -> MatrixOverR {
        MatrixOverR::from_columns(ring, self.n, &self.pivots).expect("canonical entries")
    }

    /// Stable text encoding of the span: pivot columns separated by `|`, `0` for the zero span.
    pub fn encoding(&self) -> String {
        if self.pivots.is_empty() {
            return "0".to_string();
        }
        self.pivots
            .iter()
            .map(|c| c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
            .join("|")
    }

    /// `log_q` of the span's size.
    pub fn span_length(&self, ring: &Ring) -> u32 {
        self.vals.iter().map(|&v| ring.e() - v).sum()
    }

    /// Canonical representative of `x + span`.
    pub fn reduce(&self, ring: &Ring, x: &mut [u32]) {
        for (k, h) in self.pivots.iter().enumerate() {
            let (i, v) = (self.rows[k], self.vals[k]);
            let c = x[i];
            let r = ring.reduce_mod_pi(c, v);
            if c != r {
                let factor = ring.neg_code(ring.div_pi_pow(ring.sub_codes(c, r), v));
                axpy(ring, x, factor, h);
            }
        }
    }

    pub fn contains(&self, ring: &Ring, x: &[u32]) -> bool {
        let mut y = x.to_vec();
        self.reduce(ring, &mut y);
        y.iter().all(|&c| c == 0)
    }
}

fn axpy(ring: &Ring, x: &mut [u32], c: u32, h: &[u32]) {
    if c == 0 {
        return;
    }
    for (xi, &hi) in x.iter_mut().zip(h) {
        *xi = ring.add_codes(*xi, ring.mul_codes(c, hi));
    }
}

/// Howell form of the column span of `m`.
pub fn howell_form(m: &MatrixOverR) -> HowellForm {
    let ring = m.ring();
    let n = m.rows();
    let mut active: Vec<Vec<u32>> = m.columns().into_iter().filter(|c| c.iter().any(|&x| x != 0)).collect();
    let mut pivots = Vec::new();
    let mut rows = Vec::new();
    let mut vals = Vec::new();
    for i in 0..n {
        let best = active
            .iter()
            .enumerate()
            .map(|(k, c)| (ring.valuation_code(c[i]), k))
            .min();
        let Some((v, k)) = best else { break };
        if v >= ring.e() {
            continue;
        }
        let g = active.swap_remove(k);
        let inv = ring.inv_code(ring.unit_part(g[i])).expect("unit part is a unit");
        let h: Vec<u32> = g.iter().map(|&x| ring.mul_codes(inv, x)).collect();
        for w in active.iter_mut() {
            if w[i] != 0 {
                let factor = ring.neg_code(ring.div_pi_pow(w[i], v));
                axpy(ring, w, factor, &h);
            }
        }
        // pi^(e-v) h vanishes at row i but may carry information further down
        let tail: Vec<u32> = h.iter().map(|&x| ring.mul_pi_pow(x, ring.e() - v)).collect();
        active.push(tail);
        active.retain(|c| c.iter().any(|&x| x != 0));
        pivots.push(h);
        rows.push(i);
        vals.push(v);
    }
    let mut form = HowellForm { n, pivots, rows, vals };
    for k in 1..form.pivots.len() {
        let (i, v) = (form.rows[k], form.vals[k]);
        let h = form.pivots[k].clone();
        for j in 0..k {
            let c = form.pivots[j][i];
            let r = ring.reduce_mod_pi(c, v);
            if c != r {
                let factor = ring.neg_code(ring.div_pi_pow(ring.sub_codes(c, r), v));
                axpy(ring, &mut form.pivots[j], factor, &h);
            }
        }
    }
    form
}
