//! Shipped parameter sets.

use num_complex::Complex64;

use crate::error::Result;
use crate::scenario::{default_voltage_limit, Reference, Scenario, ScenarioKind};
use crate::synthesis::{characteristic_poly, place_poles_for_plant, roll_loop_plant, PidGains};
use crate::vehicle::{AirframeParams, MotorParams};

/// Force-to-torque arm of the roll loop, m.
pub const ROLL_KT: f64 = 1.2;
/// Commanded altitude step, m.
pub const ALTITUDE_STEP: f64 = 50.0;
/// Initial roll error, rad.
pub const ROLL_INITIAL_ERROR: f64 = 1.0;
/// Constant roll disturbance standing in for a 9 m/s crosswind, N m.
pub const ROLL_DISTURBANCE: f64 = 50.0;
pub const DEFAULT_DURATION: f64 = 60.0;

/// PD gains of the basic altitude loop.
pub fn altitude_basic_gains() -> PidGains {
    PidGains::pd(0.65, 5.0)
}

/// PID gains of the motor-included altitude loop.
pub fn altitude_motor_gains() -> PidGains {
    PidGains::new(4.142, 0.004, 30.48)
}

/// Roll gains frozen from [`roll_design_poles`] through pole placement.
pub fn roll_motor_gains() -> PidGains {
    PidGains::new(3.129138173586006, 0.464933718324696, 6.216459554163291)
}

pub fn roll_motor() -> MotorParams {
    MotorParams::default().with_kt(ROLL_KT)
}

/// Damping ratio of the oscillatory pole pair of the altitude loop.
pub fn altitude_damping_ratio() -> Result<f64> {
    let m = AirframeParams::default();
    let quartic = characteristic_poly(&MotorParams::default(), m.mass, m.lambda_up, &altitude_motor_gains())?;
    let roots = quartic.roots()?;
    let pair = roots
        .iter()
        .find(|r| r.im > 0.0)
        .expect("altitude loop has an oscillatory pair");
    Ok(-pair.re / pair.norm())
}

/// Roll-loop poles: a pair with the altitude loop's damping ratio and two
/// real poles, all four sharing one real part so they sum to `-kb`.
pub fn roll_design_poles(motor: &MotorParams, airframe: &AirframeParams) -> Result<[Complex64; 4]> {
    let plant = roll_loop_plant(motor, airframe)?.canonical();
    let kb = plant.denominator().coeff(2);
    let zeta = altitude_damping_ratio()?;
    let sigma = kb / 4.0;
    let wd = sigma * (1.0 - zeta * zeta).sqrt() / zeta;
    Ok([
        Complex64::new(-sigma, wd),
        Complex64::new(-sigma, -wd),
        Complex64::new(-sigma, 0.0),
        Complex64::new(-sigma, 0.0),
    ])
}

/// Gains placing the roll loop at [`roll_design_poles`].
pub fn design_roll_gains(motor: &MotorParams, airframe: &AirframeParams) -> Result<PidGains> {
    let poles = roll_design_poles(motor, airframe)?;
    place_poles_for_plant(&roll_loop_plant(motor, airframe)?, &poles)
}

pub fn scenario(kind: ScenarioKind) -> Scenario {
    match kind {
        ScenarioKind::AltitudeBasic => Scenario::new(kind, altitude_basic_gains(), Reference::step(ALTITUDE_STEP)),
        ScenarioKind::AltitudeMotor => Scenario::new(kind, altitude_motor_gains(), Reference::step(ALTITUDE_STEP)),
        ScenarioKind::RollMotor => {
            let mut sc = Scenario::new(kind, roll_motor_gains(), Reference::initial_error(ROLL_INITIAL_ERROR));
            sc.motor = roll_motor();
            sc.voltage_limit = default_voltage_limit(&sc.airframe, &MotorParams::default());
            sc.disturbance = ROLL_DISTURBANCE;
            sc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_roll_gains_match_design() {
        let designed = design_roll_gains(&roll_motor(), &AirframeParams::default()).unwrap();
        let frozen = roll_motor_gains();
        for (a, b) in [(designed.kp, frozen.kp), (designed.ki, frozen.ki), (designed.kd, frozen.kd)] {
            assert!((a - b).abs() <= 1e-9 * b.abs(), "{a} vs {b}");
        }
    }

    #[test]
    fn altitude_damping_ratio_value() {
        let zeta = altitude_damping_ratio().unwrap();
        assert!((zeta - 0.265947).abs() < 1e-5, "{zeta}");
    }

    #[test]
    fn default_voltage_limit_value() {
        let v = default_voltage_limit(&AirframeParams::default(), &MotorParams::default());
        assert!((v - 99.4).abs() < 1e-9);
    }
}
