use nalgebra::{DMatrix, DVector, RowDVector};

use super::integrate::{integrate_fixed_step, Trajectory};
use super::poly::Polynomial;
use super::transfer::RationalTransfer;
use crate::error::{Error, Result};

/// Single-input single-output realization `x' = A x + B u`, `y = C x + D u`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpaceModel {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: RowDVector<f64>,
    pub d: f64,
}

impl StateSpaceModel {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    /// Controllable canonical realization of a proper transfer function.
    pub fn from_transfer(g: &RationalTransfer) -> Result<Self> {
        if !g.is_proper() {
            return Err(Error::invalid(format!("cannot realize improper transfer function {g}")));
        }
        let g = g.canonical();
        let den = g.denominator();
        let n = den.degree();
        let d = g.numerator().coeff(n);
        // Strictly proper remainder: num - d * den.
        let rem = g.numerator() - &den.scale(d);

        let mut a = DMatrix::zeros(n, n);
        for i in 0..n.saturating_sub(1) {
            a[(i, i + 1)] = 1.0;
        }
        if n > 0 {
            for j in 0..n {
                a[(n - 1, j)] = -den.coeff(j);
            }
        }
        let mut b = DVector::zeros(n);
        if n > 0 {
            b[n - 1] = 1.0;
        }
        let c = RowDVector::from_fn(n, |_, j| rem.coeff(j));
        Ok(StateSpaceModel { a, b, c, d })
    }

    pub fn derivative(&self, x: &[f64], u: f64, dx: &mut [f64]) {
        for (i, d) in dx.iter_mut().enumerate().take(self.order()) {
            *d = self.b[i] * u + x.iter().enumerate().map(|(j, xj)| self.a[(i, j)] * xj).sum::<f64>();
        }
    }

    pub fn output(&self, x: &[f64], u: f64) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum::<f64>() + self.d * u
    }

    /// Transfer function `C (sI - A)^-1 B + D` recovered through the
    /// Faddeev–LeVerrier recursion.
    pub fn to_transfer(&self) -> RationalTransfer {
        let n = self.order();
        let identity = DMatrix::<f64>::identity(n, n);
        // charpoly coefficients, ascending; leading 1.
        let mut charpoly = vec![0.0; n + 1];
        charpoly[n] = 1.0;
        // numerator coefficients of C adj(sI - A) B, ascending.
        let mut num = vec![0.0; n.max(1)];
        let mut m = identity.clone();
        for k in 1..=n {
            // m is the coefficient matrix of s^(n-k) in adj(sI - A).
            num[n - k] = (&self.c * &m * &self.b)[(0, 0)];
            let am = &self.a * &m;
            let ck = -am.trace() / k as f64;
            charpoly[n - k] = ck;
            m = am + &identity * ck;
        }
        let den = Polynomial::new(charpoly);
        let numerator = &Polynomial::new(num) + &den.scale(self.d);
        RationalTransfer::new(numerator, den).expect("characteristic polynomial is monic")
    }

    /// Response to `input(t)` from the zero state.
    pub fn simulate<U>(&self, mut input: U, dt: f64, t_end: f64) -> Result<(Trajectory, Vec<f64>)>
    where
        U: FnMut(f64) -> f64,
    {
        let n = self.order();
        let traj = integrate_fixed_step(|_, x, u, dx| self.derivative(x, u, dx), &vec![0.0; n], &mut input, dt, t_end)?;
        let y = traj
            .times
            .iter()
            .zip(&traj.states)
            .map(|(&t, x)| self.output(x, input(t)))
            .collect();
        Ok((traj, y))
    }

    pub fn step_response(&self, dt: f64, t_end: f64) -> Result<Vec<f64>> {
        Ok(self.simulate(|_| 1.0, dt, t_end)?.1)
    }
}

pub fn tf_to_ss(g: &RationalTransfer) -> Result<StateSpaceModel> {
    StateSpaceModel::from_transfer(g)
}
