//! Dense matrices over a chain ring: Smith form, cokernels, determinants and
//! canonical column spans.

mod det;
mod howell;
mod snf;

use std::fmt;

pub use det::determinant;
pub use howell::{howell_form, HowellForm};
pub use snf::{cokernel, smith_normal_form, SmithForm};

use crate::error::{Error, Result};
use crate::ring::{Ring, RingElem};

/// Row-major dense matrix of ring codes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixOverR {
    ring: Ring,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl MatrixOverR {
    pub fn new(ring: &Ring, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::usage(format!("expected {} entries, got {}", rows * cols, data.len())));
        }
        if let Some(x) = data.iter().find(|&&x| x >= ring.size()) {
            return Err(Error::usage(format!("{x} is not an element of {}", ring.spec())));
        }
        Ok(Self { ring: ring.clone(), rows, cols, data })
    }

    pub fn zeros(ring: &Ring, rows: usize, cols: usize) -> Self {
        Self { ring: ring.clone(), rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(ring: &Ring, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m.data[i * n + i] = ring.one().code();
        }
        m
    }

    pub fn from_columns(ring: &Ring, rows: usize, columns: &[Vec<u32>]) -> Result<Self> {
        let mut m = Self::zeros(ring, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::usage("column length mismatch"));
            }
            for (i, &x) in col.iter().enumerate() {
                if x >= ring.size() {
                    return Err(Error::usage(format!("{x} is not an element of {}", ring.spec())));
                }
                m.data[i * m.cols + j] = x;
            }
        }
        Ok(m)
    }

    /// Parses `"a,b;c,d"`: rows separated by `;`, entries by `,`, entries as canonical codes.
    pub fn parse(ring: &Ring, text: &str) -> Result<Self> {
        let rows: Vec<Vec<u32>> = text
            .split(';')
            .map(|row| {
                row.split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<u32>()
                            .map_err(|_| Error::parse(format!("bad matrix entry '{}'", x.trim())))
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::parse("ragged matrix rows"));
        }
        let n = rows.len();
        Self::new(ring, n, cols, rows.into_iter().flatten().collect())
    }

    /// Inverse of [`parse`](Self::parse). A matrix without entries prints as the empty string.
    pub fn to_text(&self) -> String {
        (0..self.rows)
            .map(|i| {
                self.row(i).iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
            })
            .collect::<Vec<_>>()
            .join(";")
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn data(&self) -> &[u32] {
        &self.data
    }
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.data[i * self.cols + j]
    }
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, x: u32) {
        self.data[i * self.cols + j] = x;
    }

    pub fn entry(&self, i: usize, j: usize) -> RingElem {
        self.ring.elem(self.get(i, j)).expect("entries are canonical")
    }

    pub fn row(&self, i: usize) -> &[u32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<u32> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<u32>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn mul(&self, other: &MatrixOverR) -> Result<MatrixOverR> {
        if self.ring != other.ring {
            return Err(Error::usage("matrices over different rings"));
        }
        if self.cols != other.rows {
            return Err(Error::usage(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let r = &self.ring;
        let mut out = MatrixOverR::zeros(r, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0 {
                    continue;
                }
                for j in 0..other.cols {
                    let cur = out.get(i, j);
                    out.set(i, j, r.add_codes(cur, r.mul_codes(a, other.get(k, j))));
                }
            }
        }
        Ok(out)
    }

    pub fn transpose(&self) -> MatrixOverR {
        let mut out = MatrixOverR::zeros(&self.ring, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub(crate) fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// `row_dst += c * row_src`.
    pub(crate) fn add_row_multiple(&mut self, dst: usize, src: usize, c: u32) {
        if c == 0 {
            return;
        }
        for j in 0..self.cols {
            let x = self.ring.mul_codes(c, self.get(src, j));
            let y = self.ring.add_codes(self.get(dst, j), x);
            self.set(dst, j, y);
        }
    }

    /// `col_dst += c * col_src`.
    pub(crate) fn add_col_multiple(&mut self, dst: usize, src: usize, c: u32) {
        if c == 0 {
            return;
        }
        for i in 0..self.rows {
            let x = self.ring.mul_codes(c, self.get(i, src));
            let y = self.ring.add_codes(self.get(i, dst), x);
            self.set(i, dst, y);
        }
    }

    pub(crate) fn scale_row(&mut self, i: usize, c: u32) {
        for j in 0..self.cols {
            let x = self.ring.mul_codes(c, self.get(i, j));
            self.set(i, j, x);
        }
    }
}

impl fmt::Display for MatrixOverR {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}
