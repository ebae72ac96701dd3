use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;


use super::{PolyError, UnivariatePoly};

/// Which variable of a [`BivariatePoly`] to eliminate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    U,
    V,
}

/// Polynomial in `u, v`; `coeffs[i][j]` multiplies `u^i v^j`.
#[derive(Debug, Clone, PartialEq)]
pub struct BivariatePoly {
    pub coeffs: Vec<Vec<f64>>,
}

impl BivariatePoly {
    pub fn zeros(deg_u: usize, deg_v: usize) -> Self {
        Self { coeffs: vec![vec![0.0; deg_v + 1]; deg_u + 1] }
    }

    /// `Σ a_i u^i · Σ b_j v^j`.
    pub fn outer(a: &[f64], b: &[f64]) -> Self {
        Self { coeffs: a.iter().map(|x| b.iter().map(|y| x * y).collect()).collect() }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.coeffs.get(i).and_then(|row| row.get(j)).copied().unwrap_or(0.0)
    }

    fn dims(&self) -> (usize, usize) {
        let rows = self.coeffs.len();
        let cols = self.coeffs.iter().map(Vec::len).max().unwrap_or(0);
        (rows, cols)
    }

    pub fn add(&self, other: &Self) -> Self {
        let (r1, c1) = self.dims();
        let (r2, c2) = other.dims();
        let mut out = Self { coeffs: vec![vec![0.0; c1.max(c2)]; r1.max(r2)] };
        for (i, row) in out.coeffs.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.get(i, j) + other.get(i, j);
            }
        }
        out
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|row| row.iter().map(|v| v * k).collect()).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (r1, c1) = self.dims();
        let (r2, c2) = other.dims();
        if r1 == 0 || r2 == 0 || c1 == 0 || c2 == 0 {
            return Self { coeffs: Vec::new() };
        }
        let mut out = Self::zeros(r1 + r2 - 2, c1 + c2 - 2);
        for i in 0..r1 {
            for j in 0..c1 {
                let a = self.get(i, j);
                if a == 0.0 {
                    continue;
                }
                for k in 0..r2 {
                    for l in 0..c2 {
                        out.coeffs[i + k][j + l] += a * other.get(k, l);
                    }
                }
            }
        }
        out
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().flatten().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn normalized(&self) -> Self {
        let m = self.max_abs_coeff();
        if m == 0.0 { self.clone() } else { self.scale(1.0 / m) }
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, row| acc * u + row.iter().rev().fold(0.0, |a, &c| a * v + c))
    }

    /// Formal degree in `var`: the largest exponent carrying a nonzero
    /// coefficient anywhere.
    pub fn degree_in(&self, var: Var) -> Option<usize> {
        let mut best = None;
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                if *c != 0.0 {
                    let e = if var == Var::U { i } else { j };
                    best = Some(best.map_or(e, |b: usize| b.max(e)));
                }
            }
        }
        best
    }

    /// Coefficients in the eliminated variable once the other one is fixed.
    pub fn slice(&self, eliminate: Var, value: f64) -> Vec<f64> {
        let deg = self.degree_in(eliminate).unwrap_or(0);
        let mut out = vec![0.0; deg + 1];
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                match eliminate {
                    Var::U if i <= deg => out[i] += c * value.powi(j as i32),
                    Var::V if j <= deg => out[j] += c * value.powi(i as i32),
                    _ => {}
                }
            }
        }
        out
    }
}

/// Sylvester matrix of two univariate coefficient lists (ascending).
fn sylvester_matrix(p: &[f64], q: &[f64]) -> DMatrix<f64> {
    let m = p.len() - 1;
    let n = q.len() - 1;
    let size = m + n;
    let mut s = DMatrix::zeros(size, size);
    for row in 0..n {
        for (k, c) in p.iter().rev().enumerate() {
            s[(row, row + k)] = *c;
        }
    }
    for row in 0..m {
        for (k, c) in q.iter().rev().enumerate() {
            s[(n + row, row + k)] = *c;
        }
    }
    s
}

/// Resultant of `p` and `q` with respect to `eliminate`, as a polynomial in
/// the surviving variable.
///
/// The determinant of the Sylvester matrix is sampled at Chebyshev nodes of
/// the surviving variable on [-1, 1] and interpolated exactly in the
/// Chebyshev basis, then converted to ascending monomial coefficients. The
/// number of nodes is one more than the degree bound
/// `deg_e(p)·deg_s(q) + deg_e(q)·deg_s(p)`.
pub fn sylvester_resultant(
    p: &BivariatePoly,
    q: &BivariatePoly,
    eliminate: Var,
) -> Result<UnivariatePoly, PolyError> {
    let survive = if eliminate == Var::U { Var::V } else { Var::U };
    let dp = p.degree_in(eliminate).ok_or(PolyError::ZeroDegree)?;
    let dq = q.degree_in(eliminate).ok_or(PolyError::ZeroDegree)?;
    if dp == 0 || dq == 0 {
        return Err(PolyError::ZeroDegree);
    }
    let sp = p.degree_in(survive).unwrap_or(0);
    let sq = q.degree_in(survive).unwrap_or(0);
    let bound = dp * sq + dq * sp;
    let nodes = bound + 1;

    let mut values = Vec::with_capacity(nodes);
    let mut any_regular = false;
    for k in 0..nodes {
        let x = (PI * (k as f64 + 0.5) / nodes as f64).cos();
        let mut pc = p.slice(eliminate, x);
        let mut qc = q.slice(eliminate, x);
        pc.resize(dp + 1, 0.0);
        qc.resize(dq + 1, 0.0);
        let s = sylvester_matrix(&pc, &qc);
        let det = s.clone().lu().determinant();
        // Hadamard bound on |det| from the row norms
        let hadamard: f64 = s.row_iter().map(|r| r.norm()).product();
        if hadamard > 0.0 && det.abs() > 1e-13 * hadamard {
            any_regular = true;
        }
        values.push(det);
    }
    if !any_regular {
        return Err(PolyError::RankDeficient);
    }
    Ok(chebyshev_to_monomial(&chebyshev_coefficients(&values)))
}

/// Chebyshev coefficients of the interpolant through values at the
/// first-kind nodes `cos(π (k + ½) / N)`.
fn chebyshev_coefficients(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut a = vec![0.0; n];
    for (m, am) in a.iter_mut().enumerate() {
        let mut sum = 0.0;
        for (k, v) in values.iter().enumerate() {
            sum += v * (PI * m as f64 * (k as f64 + 0.5) / n as f64).cos();
        }
        *am = 2.0 * sum / n as f64;
    }
    a[0] *= 0.5;
    a
}

fn chebyshev_to_monomial(cheb: &[f64]) -> UnivariatePoly {
    let n = cheb.len();
    let mut out = vec![0.0; n];
    let mut t_prev = vec![0.0; n];
    let mut t_cur = vec![0.0; n];
    t_prev[0] = 1.0; // T0
    if n > 1 {
        t_cur[1] = 1.0; // T1
    }
    for (m, c) in cheb.iter().enumerate() {
        let t = if m == 0 { &t_prev } else { &t_cur };
        for (o, v) in out.iter_mut().zip(t.iter()) {
            *o += c * v;
        }
        if m >= 1 && m + 1 < n {
            let mut next = vec![0.0; n];
            for i in 0..n {
                if i + 1 < n {
                    next[i + 1] += 2.0 * t_cur[i];
                }
                next[i] -= t_prev[i];
            }
            t_prev = core::mem::replace(&mut t_cur, next);
        }
    }
    UnivariatePoly::new(out)
}
