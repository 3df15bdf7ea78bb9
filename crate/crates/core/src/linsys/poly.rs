use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real-coefficient polynomial in the Laplace variable `s`.
///
/// Coefficients are stored in ascending powers: `coeffs[i]` multiplies `s^i`.
/// The highest stored coefficient is always nonzero; the zero polynomial has
/// no coefficients at all.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", from = "Vec<f64>")]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    /// Builds from descending powers, the order polynomials are usually written in.
    pub fn from_descending(coeffs: &[f64]) -> Self {
        Polynomial::new(coeffs.iter().rev().copied().collect())
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::new(vec![c])
    }

    /// The monomial `s`.
    pub fn s() -> Self {
        Polynomial::new(vec![0.0, 1.0])
    }

    /// Monic polynomial `(s - r_1)(s - r_2)...` from a conjugate-closed root
    /// set. Imaginary residue left by floating point is discarded.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut acc = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
            for (i, &c) in acc.iter().enumerate() {
                next[i + 1] += c;
                next[i] -= c * r;
            }
            acc = next;
        }
        Polynomial::new(acc.into_iter().map(|c| c.re).collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `s^i`, zero beyond the degree.
    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    pub fn eval_complex(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn scale(&self, k: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Coefficient convolution.
    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    /// Drops high-order coefficients whose magnitude is at most `rel_tol`
    /// times the largest coefficient.
    pub fn trimmed(&self, rel_tol: f64) -> Polynomial {
        let threshold = rel_tol * self.max_abs_coeff();
        let mut coeffs = self.coeffs.clone();
        while coeffs.last().is_some_and(|c| c.abs() <= threshold) {
            coeffs.pop();
        }
        Polynomial::new(coeffs)
    }

    /// All `degree` complex roots, computed as eigenvalues of the companion
    /// matrix and polished by Newton iteration on the original polynomial.
    ///
    /// Complex roots come back as exact conjugate pairs; the output is sorted
    /// by real part, then imaginary part.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        if self.is_zero() {
            return Err(Error::invalid("roots of the zero polynomial are undefined"));
        }
        let n = self.degree();
        if n == 0 {
            return Err(Error::invalid("a nonzero constant has no roots"));
        }
        let lead = self.leading();
        let monic: Vec<f64> = self.coeffs.iter().map(|c| c / lead).collect();

        let raw: Vec<Complex64> = if n == 1 {
            vec![Complex64::new(-monic[0], 0.0)]
        } else {
            let mut companion = DMatrix::<f64>::zeros(n, n);
            for i in 1..n {
                companion[(i, i - 1)] = 1.0;
            }
            for i in 0..n {
                companion[(i, n - 1)] = -monic[i];
            }
            companion.complex_eigenvalues().iter().copied().collect()
        };

        let dp = self.derivative();
        let polished: Vec<Complex64> = raw.into_iter().map(|r| self.polish(&dp, r)).collect();
        Ok(pair_conjugates(polished))
    }

    fn polish(&self, dp: &Polynomial, mut r: Complex64) -> Complex64 {
        let mut best = (self.eval_complex(r).norm(), r);
        for _ in 0..8 {
            let d = dp.eval_complex(r);
            if d.norm() == 0.0 {
                break;
            }
            r -= self.eval_complex(r) / d;
            let residual = self.eval_complex(r).norm();
            if !residual.is_finite() {
                break;
            }
            if residual < best.0 {
                best = (residual, r);
            }
        }
        best.1
    }
}

/// Snaps near-real roots onto the real axis and makes complex roots exact
/// conjugate pairs.
fn pair_conjugates(mut roots: Vec<Complex64>) -> Vec<Complex64> {
    let scale = roots.iter().fold(1.0_f64, |m, r| m.max(r.norm()));
    let tol = 1e-9 * scale;
    for r in roots.iter_mut() {
        if r.im.abs() <= tol {
            r.im = 0.0;
        }
    }
    let mut out = Vec::with_capacity(roots.len());
    let mut used = vec![false; roots.len()];
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let r = roots[i];
        if r.im == 0.0 {
            out.push(r);
            continue;
        }
        let partner = (0..roots.len())
            .filter(|&j| !used[j] && roots[j].im.signum() == -r.im.signum())
            .min_by(|&a, &b| {
                let da = (roots[a] - r.conj()).norm();
                let db = (roots[b] - r.conj()).norm();
                da.total_cmp(&db)
            });
        match partner {
            Some(j) => {
                used[j] = true;
                let re = 0.5 * (r.re + roots[j].re);
                let im = 0.5 * (r.im.abs() + roots[j].im.abs());
                out.push(Complex64::new(re, im));
                out.push(Complex64::new(re, -im));
            }
            None => out.push(r),
        }
    }
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    out
}

impl From<Vec<f64>> for Polynomial {
    fn from(coeffs: Vec<f64>) -> Self {
        Polynomial::new(coeffs)
    }
}

impl From<Polynomial> for Vec<f64> {
    fn from(p: Polynomial) -> Self {
        p.coeffs
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::mul(self, rhs)
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        Polynomial::add(self, rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate().rev() {
            if c == 0.0 {
                continue;
            }
            let sign = if c < 0.0 { "-" } else { "+" };
            if first {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{}", c.abs())?,
                1 => write!(f, "{}*s", c.abs())?,
                _ => write!(f, "{}*s^{}", c.abs(), i)?,
            }
        }
        Ok(())
    }
}

/// Convolution of two coefficient sequences.
pub fn poly_mul(p: &Polynomial, q: &Polynomial) -> Polynomial {
    p.mul(q)
}

pub fn poly_roots(p: &Polynomial) -> Result<Vec<Complex64>> {
    p.roots()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_coeffs(p: &Polynomial, expected: &[f64], tol: f64) {
        assert_eq!(p.coeffs().len(), expected.len(), "{p} vs {expected:?}");
        for (a, b) in p.coeffs().iter().zip(expected) {
            assert!((a - b).abs() <= tol, "{p} vs {expected:?}");
        }
    }

    #[test]
    fn mul_identity_and_difference_of_squares() {
        let one = Polynomial::constant(1.0);
        let sp1 = Polynomial::new(vec![1.0, 1.0]);
        assert_eq!(poly_mul(&one, &sp1), sp1);
        let sm1 = Polynomial::new(vec![-1.0, 1.0]);
        assert_eq!(poly_mul(&sm1, &sp1), Polynomial::new(vec![-1.0, 0.0, 1.0]));
    }

    #[test]
    fn mul_altitude_and_motor_factors() {
        // (s^2 + 0.015598 s)(0.110 s + 0.140), hand-convolved.
        let plant = Polynomial::new(vec![0.0, 0.015598, 1.0]);
        let motor = Polynomial::new(vec![0.140, 0.110]);
        let prod = poly_mul(&plant, &motor);
        assert_coeffs(&prod, &[0.0, 0.00218372, 0.14171578, 0.110], 1e-12);
    }

    #[test]
    fn zero_polynomial_has_no_roots() {
        assert!(matches!(Polynomial::zero().roots(), Err(Error::InvalidInput(_))));
        assert!(Polynomial::new(vec![0.0, 0.0]).is_zero());
    }

    #[test]
    fn roots_of_factored_quadratic() {
        let r = Polynomial::new(vec![-1.0, 0.0, 1.0]).roots().unwrap();
        assert_eq!(r.len(), 2);
        assert!((r[0].re + 1.0).abs() < 1e-12 && r[0].im == 0.0);
        assert!((r[1].re - 1.0).abs() < 1e-12 && r[1].im == 0.0);
    }

    #[test]
    fn roots_match_quadratic_formula() {
        let (b, c) = (5.0156_f64, 0.65_f64);
        let disc = (b * b - 4.0 * c).sqrt();
        let oracle = [(-b - disc) / 2.0, (-b + disc) / 2.0];
        let r = Polynomial::new(vec![c, b, 1.0]).roots().unwrap();
        for (got, want) in r.iter().zip(oracle) {
            assert!((got.re - want).abs() < 1e-12);
        }
        assert!((oracle[0] + 4.88245).abs() < 1e-4);
        assert!((oracle[1] + 0.13315).abs() < 1e-4);
    }

    #[test]
    fn complex_roots_are_conjugate_pairs() {
        // s^2 + 1
        let r = Polynomial::new(vec![1.0, 0.0, 1.0]).roots().unwrap();
        assert_eq!(r[0], r[1].conj());
        assert!((r[0].im.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn display_is_readable() {
        let p = Polynomial::from_descending(&[1.0, -2.0, 0.0, 3.5]);
        assert_eq!(p.to_string(), "1*s^3 - 2*s^2 + 3.5");
    }
}
