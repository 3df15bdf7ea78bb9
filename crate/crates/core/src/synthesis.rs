//! PID controllers, closed-loop characteristic polynomials, pole placement
//! and stability verdicts.
//!
//! Every loop here closes a PID controller `(kd s^2 + kp s + ki)/s` around a
//! plant with constant numerator `b0` and a monic cubic denominator
//! `s^3 + a2 s^2 + a1 s + a0`. The closed-loop characteristic polynomial is
//! then the monic quartic
//!
//! ```text
//! s^4 + a2 s^3 + (a1 + b0 kd) s^2 + (a0 + b0 kp) s + b0 ki
//! ```
//!
//! so the `s^3` coefficient is fixed by the plant and the three gains set the
//! remaining coefficients one-for-one.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linsys::{Polynomial, RationalTransfer};
use crate::vehicle::{combined_plant_tf, motor_simplified_tf, roll_plant_tf, AirframeParams, MotorParams};

/// Relative tolerance on the pole-sum constraint.
pub const POLE_SUM_TOL: f64 = 1e-6;
/// Zero-pivot substitute in the Routh table.
pub const ROUTH_EPSILON: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl PidGains {
    pub fn new(kp: f64, ki: f64, kd: f64) -> Self {
        PidGains { kp, ki, kd }
    }

    pub fn pd(kp: f64, kd: f64) -> Self {
        PidGains { kp, ki: 0.0, kd }
    }

    pub fn is_finite(&self) -> bool {
        self.kp.is_finite() && self.ki.is_finite() && self.kd.is_finite()
    }
}

/// `(kd s^2 + kp s + ki) / s`.
pub fn pid_tf(g: &PidGains) -> Result<RationalTransfer> {
    if g.kp == 0.0 && g.ki == 0.0 && g.kd == 0.0 {
        return Err(Error::invalid("PID gains are all zero"));
    }
    RationalTransfer::new(Polynomial::new(vec![g.ki, g.kp, g.kd]), Polynomial::s())
}

/// Monic characteristic polynomial of a PID closed around `plant`:
/// `s * den + (kd s^2 + kp s + ki) * num`, divided by its leading coefficient.
pub fn closed_loop_characteristic(plant: &RationalTransfer, g: &PidGains) -> Polynomial {
    let controller = Polynomial::new(vec![g.ki, g.kp, g.kd]);
    let p = &(&Polynomial::s() * plant.denominator()) + &(&controller * plant.numerator());
    p.scale(1.0 / p.leading())
}

/// The altitude loop quartic for the voltage-driven plant.
pub fn characteristic_poly(motor: &MotorParams, mass: f64, lambda_up: f64, g: &PidGains) -> Result<Polynomial> {
    Ok(closed_loop_characteristic(&combined_plant_tf(motor, mass, lambda_up)?, g))
}

/// Voltage to roll angle: motor stage (with its torque arm) into the roll plant.
pub fn roll_loop_plant(motor: &MotorParams, airframe: &AirframeParams) -> Result<RationalTransfer> {
    Ok(motor_simplified_tf(motor).series(&roll_plant_tf(airframe)?))
}

/// Cubic plant `b0 / (s^3 + a2 s^2 + a1 s + a0)` in canonical form.
#[derive(Debug, Clone, Copy, PartialEq)]
struct CubicPlant {
    b0: f64,
    a: [f64; 3],
}

impl CubicPlant {
    fn from_transfer(plant: &RationalTransfer) -> Result<Self> {
        let c = plant.canonical();
        if c.denominator().degree() != 3 || c.numerator().degree() != 0 || c.numerator().is_zero() {
            return Err(Error::invalid(format!(
                "pole placement needs a constant-numerator cubic plant, got {plant}"
            )));
        }
        let d = c.denominator();
        Ok(CubicPlant { b0: c.numerator().coeff(0), a: [d.coeff(0), d.coeff(1), d.coeff(2)] })
    }
}

/// Desired closed-loop poles and the plant-fixed `s^3` coefficient they must
/// honor (`sum of poles = -kb`).
#[derive(Debug, Clone, PartialEq)]
pub struct PolePlacementSpec {
    pub poles: [Complex64; 4],
    pub kb: f64,
}

impl PolePlacementSpec {
    pub fn validate(&self) -> Result<()> {
        if !is_conjugate_closed(&self.poles) {
            return Err(Error::invalid("pole set is not closed under complex conjugation"));
        }
        let actual: f64 = self.poles.iter().map(|p| p.re).sum();
        let required = -self.kb;
        if (actual - required).abs() > POLE_SUM_TOL * self.kb.abs() {
            return Err(Error::PoleSumConstraint { required, actual });
        }
        Ok(())
    }
}

fn is_conjugate_closed(poles: &[Complex64]) -> bool {
    let scale = poles.iter().fold(1.0_f64, |m, p| m.max(p.norm()));
    let tol = 1e-9 * scale;
    let mut used = vec![false; poles.len()];
    for i in 0..poles.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        if poles[i].im.abs() <= tol {
            continue;
        }
        let target = poles[i].conj();
        match (0..poles.len()).find(|&j| !used[j] && (poles[j] - target).norm() <= tol) {
            Some(j) => used[j] = true,
            None => return false,
        }
    }
    true
}

/// Gains that place the closed-loop poles of a PID around `plant` at
/// `poles`. The plant must be a constant-numerator cubic and the poles must
/// sum to minus its `s^2` coefficient.
pub fn place_poles_for_plant(plant: &RationalTransfer, poles: &[Complex64; 4]) -> Result<PidGains> {
    let cubic = CubicPlant::from_transfer(plant)?;
    PolePlacementSpec { poles: *poles, kb: cubic.a[2] }.validate()?;
    let target = Polynomial::from_roots(poles);
    let [a0, a1, _] = cubic.a;
    Ok(PidGains {
        kd: (target.coeff(2) - a1) / cubic.b0,
        kp: (target.coeff(1) - a0) / cubic.b0,
        ki: target.coeff(0) / cubic.b0,
    })
}

/// Altitude-loop pole placement.
pub fn place_poles(motor: &MotorParams, mass: f64, lambda_up: f64, poles: &[Complex64; 4]) -> Result<PidGains> {
    place_poles_for_plant(&combined_plant_tf(motor, mass, lambda_up)?, poles)
}

/// The plant-fixed `s^3` coefficient of the altitude quartic.
pub fn altitude_kb(motor: &MotorParams, mass: f64, lambda_up: f64) -> f64 {
    motor.resistance / motor.inductance + lambda_up / mass
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub stable: bool,
    pub roots: Vec<Complex64>,
    /// Largest real part among the roots; exactly 0 for roots on the axis.
    pub margin: f64,
    /// Independent verdict from the Routh table.
    pub routh_stable: bool,
}

/// Asymptotic stability from the roots, cross-checked by Routh–Hurwitz.
pub fn stability_check(p: &Polynomial) -> Result<StabilityVerdict> {
    let roots = p.roots()?;
    let scale = roots.iter().fold(1.0_f64, |m, r| m.max(r.norm()));
    let mut margin = roots.iter().map(|r| r.re).fold(f64::NEG_INFINITY, f64::max);
    if margin.abs() <= 1e-10 * scale {
        margin = 0.0;
    }
    let routh = routh_hurwitz(p)?;
    Ok(StabilityVerdict { stable: margin < 0.0, roots, margin, routh_stable: routh.stable })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouthTable {
    pub first_column: Vec<f64>,
    /// Number of first-column sign changes (roots in the right half plane).
    pub sign_changes: usize,
    /// A zero pivot or an all-zero row was met; some root lies on or right of
    /// the imaginary axis.
    pub degenerate: bool,
    pub stable: bool,
}

/// Routh–Hurwitz table. Zero pivots are replaced by [`ROUTH_EPSILON`] and
/// all-zero rows by the derivative of the auxiliary polynomial; either event
/// rules out asymptotic stability.
pub fn routh_hurwitz(p: &Polynomial) -> Result<RouthTable> {
    if p.is_zero() || p.degree() == 0 {
        return Err(Error::invalid("Routh table needs a polynomial of degree at least 1"));
    }
    let sign = p.leading().signum();
    let desc: Vec<f64> = p.coeffs().iter().rev().map(|c| c * sign).collect();
    let n = p.degree();
    let zero_tol = 1e-12 * p.max_abs_coeff();
    let width = n / 2 + 1;

    let row_from = |start: usize| -> Vec<f64> {
        (0..width).map(|j| desc.get(start + 2 * j).copied().unwrap_or(0.0)).collect()
    };
    let mut rows = vec![row_from(0), row_from(1)];
    let mut degenerate = false;

    for i in 2..=n {
        let (upper, lower) = (&rows[i - 2], &rows[i - 1]);
        let mut lower = lower.clone();
        if lower.iter().all(|x| x.abs() <= zero_tol) {
            // Auxiliary polynomial from the row above, of degree n - i + 2.
            degenerate = true;
            let deg = n + 2 - i;
            for (j, v) in lower.iter_mut().enumerate() {
                let power = deg as i64 - 2 * j as i64;
                *v = if power > 0 { upper[j] * power as f64 } else { 0.0 };
            }
            rows[i - 1] = lower.clone();
        }
        if lower[0].abs() <= zero_tol {
            degenerate = true;
            lower[0] = ROUTH_EPSILON;
            rows[i - 1][0] = ROUTH_EPSILON;
        }
        let upper = &rows[i - 2];
        let next: Vec<f64> = (0..width)
            .map(|j| {
                let u1 = upper.get(j + 1).copied().unwrap_or(0.0);
                let l1 = lower.get(j + 1).copied().unwrap_or(0.0);
                (lower[0] * u1 - upper[0] * l1) / lower[0]
            })
            .collect();
        rows.push(next);
    }
    if rows[n][0].abs() <= zero_tol {
        degenerate = true;
    }

    let first_column: Vec<f64> = rows.iter().take(n + 1).map(|r| r[0]).collect();
    let sign_changes = first_column.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    let stable = !degenerate && first_column.iter().all(|&x| x > 0.0);
    Ok(RouthTable { first_column, sign_changes, degenerate, stable })
}
