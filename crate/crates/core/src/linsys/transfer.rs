use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::Polynomial;
use crate::error::{Error, Result};

/// Relative threshold below which high-order coefficients are dropped when
/// canonicalizing.
pub const CANONICAL_TRIM: f64 = 1e-12;

/// Ratio of two real polynomials in `s`.
///
/// Equality compares canonical forms (monic denominator, trimmed
/// coefficients); use [`RationalTransfer::approx_eq`] for tolerance-based
/// comparison.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RationalTransfer {
    numerator: Polynomial,
    denominator: Polynomial,
}

impl RationalTransfer {
    pub fn new(numerator: Polynomial, denominator: Polynomial) -> Result<Self> {
        if denominator.is_zero() {
            return Err(Error::invalid("transfer function denominator is identically zero"));
        }
        Ok(RationalTransfer { numerator, denominator })
    }

    pub fn gain(k: f64) -> Self {
        RationalTransfer {
            numerator: Polynomial::constant(k),
            denominator: Polynomial::constant(1.0),
        }
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.numerator
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.denominator
    }

    /// Monic-denominator form with negligible high-order terms trimmed.
    pub fn canonical(&self) -> RationalTransfer {
        let den = self.denominator.trimmed(CANONICAL_TRIM);
        let lead = den.leading();
        RationalTransfer {
            numerator: self.numerator.trimmed(CANONICAL_TRIM).scale(1.0 / lead),
            denominator: den.scale(1.0 / lead),
        }
    }

    pub fn is_proper(&self) -> bool {
        self.numerator.is_zero() || self.numerator.degree() <= self.denominator.degree()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.numerator.eval_complex(s) / self.denominator.eval_complex(s)
    }

    /// Value at `s = 0`; infinite when the denominator has a free integrator.
    pub fn dc_gain(&self) -> f64 {
        self.numerator.eval(0.0) / self.denominator.eval(0.0)
    }

    pub fn poles(&self) -> Result<Vec<Complex64>> {
        self.denominator.roots()
    }

    pub fn series(&self, other: &RationalTransfer) -> RationalTransfer {
        RationalTransfer {
            numerator: &self.numerator * &other.numerator,
            denominator: &self.denominator * &other.denominator,
        }
        .canonical()
    }

    pub fn scale(&self, k: f64) -> RationalTransfer {
        RationalTransfer {
            numerator: self.numerator.scale(k),
            denominator: self.denominator.clone(),
        }
    }

    /// `self / (1 + self)`.
    pub fn feedback_unity(&self) -> Result<RationalTransfer> {
        let den = &self.denominator + &self.numerator;
        if den.trimmed(CANONICAL_TRIM).is_zero() {
            return Err(Error::invalid("closed-loop denominator is identically zero"));
        }
        Ok(RationalTransfer { numerator: self.numerator.clone(), denominator: den }.canonical())
    }

    /// `forward / (1 + open_loop)`, for signals entering inside a loop
    /// (e.g. a disturbance at the plant input).
    pub fn feedback(forward: &RationalTransfer, open_loop: &RationalTransfer) -> Result<RationalTransfer> {
        let closed = &open_loop.denominator + &open_loop.numerator;
        if closed.trimmed(CANONICAL_TRIM).is_zero() {
            return Err(Error::invalid("closed-loop denominator is identically zero"));
        }
        Ok(RationalTransfer {
            numerator: &forward.numerator * &open_loop.denominator,
            denominator: &forward.denominator * &closed,
        }
        .canonical())
    }

    /// Coefficient-wise comparison of canonical forms, relative to the
    /// largest coefficient of each polynomial.
    pub fn approx_eq(&self, other: &RationalTransfer, rel_tol: f64) -> bool {
        let a = self.canonical();
        let b = other.canonical();
        poly_close(&a.numerator, &b.numerator, rel_tol) && poly_close(&a.denominator, &b.denominator, rel_tol)
    }
}

fn poly_close(a: &Polynomial, b: &Polynomial, rel_tol: f64) -> bool {
    let n = a.coeffs().len().max(b.coeffs().len());
    let scale = a.max_abs_coeff().max(b.max_abs_coeff()).max(f64::MIN_POSITIVE);
    (0..n).all(|i| (a.coeff(i) - b.coeff(i)).abs() <= rel_tol * scale)
}

impl PartialEq for RationalTransfer {
    fn eq(&self, other: &Self) -> bool {
        let a = self.canonical();
        let b = other.canonical();
        a.numerator == b.numerator && a.denominator == b.denominator
    }
}

impl fmt::Display for RationalTransfer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.numerator, self.denominator)
    }
}

pub fn tf_series(g1: &RationalTransfer, g2: &RationalTransfer) -> RationalTransfer {
    g1.series(g2)
}

pub fn tf_feedback_unity(g: &RationalTransfer) -> Result<RationalTransfer> {
    g.feedback_unity()
}
