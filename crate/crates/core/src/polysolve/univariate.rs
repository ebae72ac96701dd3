use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;


use super::PolyError;

/// Real polynomial with coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariatePoly {
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootOptions {
    /// Coefficients below this fraction of the largest one are dropped from
    /// the top before forming the companion matrix.
    pub trim_tol: f64,
    /// A root is real when `|Im| < imag_tol · (1 + |Re|)`.
    pub imag_tol: f64,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self { trim_tol: 1e-12, imag_tol: 1e-6 }
    }
}

impl UnivariatePoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    pub fn from_roots(roots: &[f64]) -> Self {
        let mut p = Self::new(vec![1.0]);
        for &r in roots {
            p = p.mul(&Self::new(vec![-r, 1.0]));
        }
        p
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Degree after trimming leading coefficients below `rel_tol` of the
    /// largest coefficient. `None` for the zero polynomial.
    pub fn degree(&self, rel_tol: f64) -> Option<usize> {
        let m = self.max_abs_coeff();
        if m == 0.0 {
            return None;
        }
        self.coeffs.iter().rposition(|c| c.abs() > rel_tol * m)
    }

    pub fn trimmed(&self, rel_tol: f64) -> Self {
        match self.degree(rel_tol) {
            Some(d) => Self::new(self.coeffs[..=d].to_vec()),
            None => Self::new(Vec::new()),
        }
    }

    pub fn normalized(&self) -> Self {
        let m = self.max_abs_coeff();
        if m == 0.0 {
            return self.clone();
        }
        Self::new(self.coeffs.iter().map(|c| c / m).collect())
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * i as f64)
                .collect(),
        )
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return Self::new(Vec::new());
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn real_roots(&self) -> Result<Vec<f64>, PolyError> {
        univariate_real_roots(self, &RootOptions::default())
    }
}

/// Real roots via eigenvalues of the (balanced) companion matrix of the
/// monic normalization, each followed by Newton polishing on `p`.
pub fn univariate_real_roots(p: &UnivariatePoly, opts: &RootOptions) -> Result<Vec<f64>, PolyError> {
    roots_where(p, opts, |re, im| im.abs() < opts.imag_tol * (1.0 + re.abs()))
}

/// Real parts of the roots `t` whose angle `2·atan(t)` lies within
/// `max_imag` radians of the real line. Clustered real roots of a
/// polynomial in `tan(θ/2)` can split into complex pairs far from the real
/// axis in `t` while staying close to it in `θ`; the result is meant for
/// seeding a local solver, not as a root set.
pub fn half_angle_seeds(p: &UnivariatePoly, opts: &RootOptions, max_imag: f64) -> Result<Vec<f64>, PolyError> {
    roots_where(p, opts, |re, im| {
        let q = 2.0 * im.abs() / (1.0 + re * re + im * im);
        im.abs() < opts.imag_tol * (1.0 + re.abs()) || (q < 1.0 && q.atanh() < max_imag)
    })
}

fn roots_where(p: &UnivariatePoly, opts: &RootOptions, keep: impl Fn(f64, f64) -> bool) -> Result<Vec<f64>, PolyError> {
    let p = p.trimmed(opts.trim_tol);
    let Some(mut deg) = p.degree(opts.trim_tol) else {
        return Err(PolyError::DegeneratePolynomial);
    };
    let mut roots = Vec::new();
    // exact zero roots first; they only cost accuracy in the companion matrix
    let zeros = p.coeffs.iter().position(|c| c.abs() > 0.0).unwrap_or(0);
    if zeros > 0 {
        roots.push(0.0);
    }
    let c: Vec<f64> = p.coeffs[zeros..].to_vec();
    deg -= zeros;
    match deg {
        0 => {}
        1 => roots.push(-c[0] / c[1]),
        2 => {
            let (a, b, cc) = (c[2], c[1], c[0]);
            let disc = b * b - 4.0 * a * cc;
            if disc >= 0.0 {
                let q = -0.5 * (b + b.signum() * disc.sqrt());
                if q != 0.0 {
                    roots.push(cc / q);
                }
                roots.push(q / a);
            } else if disc.abs() <= opts.imag_tol * (b * b + (4.0 * a * cc).abs())
                || keep(-b / (2.0 * a), (-disc).sqrt() / (2.0 * a.abs()))
            {
                roots.push(-b / (2.0 * a));
            }
        }
        _ => {
            let lead = c[deg];
            let mut m = DMatrix::<f64>::zeros(deg, deg);
            for i in 1..deg {
                m[(i, i - 1)] = 1.0;
            }
            for i in 0..deg {
                m[(i, deg - 1)] = -c[i] / lead;
            }
            balance(&mut m);
            for z in m.complex_eigenvalues().iter() {
                if keep(z.re, z.im) {
                    roots.push(z.re);
                }
            }
        }
    }
    let dp = p.derivative();
    for r in roots.iter_mut() {
        *r = newton_polish(&p, &dp, *r);
    }
    roots.sort_by(|a, b| a.total_cmp(b));
    Ok(roots)
}

fn newton_polish(p: &UnivariatePoly, dp: &UnivariatePoly, x0: f64) -> f64 {
    let mut x = x0;
    let mut fx = p.eval(x).abs();
    for _ in 0..3 {
        let d = dp.eval(x);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let cand = x - p.eval(x) / d;
        let fc = p.eval(cand).abs();
        if !(fc < fx) {
            break;
        }
        x = cand;
        fx = fc;
    }
    x
}

/// Parlett–Reinsch diagonal balancing with radix-2 scale factors.
fn balance(m: &mut DMatrix<f64>) {
    const RADIX: f64 = 2.0;
    let n = m.nrows();
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].abs();
                    r += m[(i, j)].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            while c < r / RADIX {
                f *= RADIX;
                c *= RADIX * RADIX;
            }
            while c > r * RADIX {
                f /= RADIX;
                c /= RADIX * RADIX;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn simple_cases() {
        let r = UnivariatePoly::new(vec![-1.0, 0.0, 1.0]).real_roots().unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0] + 1.0).abs() < 1e-15 && (r[1] - 1.0).abs() < 1e-15);
        assert!(UnivariatePoly::new(vec![1.0, 0.0, 1.0]).real_roots().unwrap().is_empty());
        let r = UnivariatePoly::from_roots(&[0.3, -2.0, 5.0]).real_roots().unwrap();
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([-2.0, 0.3, 5.0]) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_polynomial_is_degenerate() {
        assert_eq!(
            UnivariatePoly::new(vec![0.0, 0.0]).real_roots(),
            Err(PolyError::DegeneratePolynomial)
        );
    }

    #[test]
    fn trims_negligible_leading_terms() {
        let p = UnivariatePoly::new(vec![-2.0, 1.0, 1e-20]);
        assert_eq!(p.degree(1e-12), Some(1));
        let r = p.real_roots().unwrap();
        assert_eq!(r.len(), 1);
        assert!((r[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn evenly_spaced_degree_twenty() {
        let roots: Vec<f64> = (1..=10).flat_map(|k| [k as f64 / 10.0, -(k as f64) / 10.0]).collect();
        let p = UnivariatePoly::from_roots(&roots);
        let found = p.real_roots().unwrap();
        assert_eq!(found.len(), 20);
        let mut sorted = roots.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        for (a, b) in found.iter().zip(sorted) {
            assert!((a - b).abs() <= 1e-6 * b.abs());
        }
    }

    #[test]
    fn residual_bound_after_polish() {
        let p = UnivariatePoly::from_roots(&[1e-3, 7.0, -40.0, 3.5, 0.25]);
        let scale = p.max_abs_coeff();
        for r in p.real_roots().unwrap() {
            assert!(p.eval(r).abs() <= 1e-6 * scale);
        }
    }

    proptest! {
        #[test]
        fn separated_random_roots(seeds in proptest::collection::vec(0.0..1.0f64, 2..12)) {
            // well separated roots: spacing at least 0.2
            let mut roots = Vec::new();
            let mut x = -3.0;
            for s in seeds {
                x += 0.2 + s;
                roots.push(x);
            }
            let p = UnivariatePoly::from_roots(&roots);
            let found = p.real_roots().unwrap();
            prop_assert_eq!(found.len(), roots.len());
            for (a, b) in found.iter().zip(&roots) {
                prop_assert!((a - b).abs() <= 1e-6 * (1.0 + b.abs()));
            }
        }
    }
}
