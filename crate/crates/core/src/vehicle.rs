//! Motor, altitude and roll plants and the per-motor thrust allocator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linsys::{Polynomial, RationalTransfer};

/// Simplified voltage-to-force motor: `K_m K_T / (L s + R)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MotorParams {
    /// Voltage-to-force gain, N/V through the simplified chain.
    pub km: f64,
    /// Winding inductance, H.
    pub inductance: f64,
    /// Winding resistance, ohm.
    pub resistance: f64,
    /// Force-to-torque arm; 1.0 for pure-force loops.
    pub kt: f64,
}

impl MotorParams {
    pub fn new(km: f64, inductance: f64, resistance: f64, kt: f64) -> Result<Self> {
        let p = MotorParams { km, inductance, resistance, kt };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("km", self.km), ("inductance", self.inductance), ("resistance", self.resistance), ("kt", self.kt)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("motor {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Same motor with a different output arm.
    pub fn with_kt(self, kt: f64) -> Self {
        MotorParams { kt, ..self }
    }

    /// Static output per volt, `K_m K_T / R`.
    pub fn dc_gain(&self) -> f64 {
        self.km * self.kt / self.resistance
    }

    /// Electrical time constant `L / R`.
    pub fn time_constant(&self) -> f64 {
        self.inductance / self.resistance
    }

    /// Rate of the first-order stage: `dF/dt = (K_m K_T V - R F) / L`.
    pub fn output_rate(&self, output: f64, voltage: f64) -> f64 {
        (self.km * self.kt * voltage - self.resistance * output) / self.inductance
    }
}

impl Default for MotorParams {
    fn default() -> Self {
        MotorParams { km: 10.0, inductance: 0.110, resistance: 0.140, kt: 1.0 }
    }
}

/// Motor, rotor and propeller chain: electrical lag, mechanical lag, then
/// the square-law thrust.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullMotorParams {
    pub km: f64,
    pub inductance: f64,
    pub resistance: f64,
    /// Rotor assembly inertia, kg m^2.
    pub inertia: f64,
    /// Viscous friction, N m s/rad.
    pub friction: f64,
    /// Propeller thrust constant, N s^2/rad^2.
    pub thrust_coeff: f64,
}

impl Default for FullMotorParams {
    fn default() -> Self {
        FullMotorParams {
            km: 10.0,
            inductance: 0.110,
            resistance: 0.140,
            inertia: 0.05,
            friction: 0.05,
            thrust_coeff: 1e-4,
        }
    }
}

impl FullMotorParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("km", self.km),
            ("inductance", self.inductance),
            ("resistance", self.resistance),
            ("inertia", self.inertia),
            ("friction", self.friction),
            ("thrust_coeff", self.thrust_coeff),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("full motor {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Steady rotor speed at constant voltage, rad/s.
    pub fn steady_state_speed(&self, voltage: f64) -> f64 {
        self.km * voltage / (self.resistance * self.friction)
    }

    /// Steady thrust at constant voltage, N.
    pub fn steady_state_force(&self, voltage: f64) -> Result<f64> {
        if voltage < 0.0 || !voltage.is_finite() {
            return Err(Error::invalid(format!("voltage must be non-negative, got {voltage}")));
        }
        let w = self.steady_state_speed(voltage);
        Ok(self.thrust_coeff * w * w)
    }

    /// `dF/dV` of the steady-state map at `voltage`.
    pub fn small_signal_gain(&self, voltage: f64) -> f64 {
        2.0 * self.thrust_coeff * self.steady_state_speed(voltage) * self.km / (self.resistance * self.friction)
    }

    /// Dynamic block over the state `[torque, speed]`.
    pub fn derivative(&self, state: &[f64], voltage: f64, dx: &mut [f64]) {
        let (torque, speed) = (state[0], state[1]);
        dx[0] = (self.km * voltage - self.resistance * torque) / self.inductance;
        dx[1] = (torque - self.friction * speed) / self.inertia;
    }

    pub fn force(&self, state: &[f64]) -> f64 {
        self.thrust_coeff * state[1] * state[1]
    }
}

pub fn motor_full_chain_steady_state(p: &FullMotorParams, voltage: f64) -> Result<f64> {
    p.steady_state_force(voltage)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AirframeParams {
    /// Total mass, kg.
    pub mass: f64,
    /// Vertical aerodynamic resistance, N s/m.
    pub lambda_up: f64,
    /// Maximum total thrust with every motor healthy, N.
    pub f_max_total: f64,
    /// Transient per-motor overload ratio available to a surviving twin.
    pub peak_factor: f64,
    /// Roll inertia, kg m^2.
    pub j_roll: f64,
    /// Rotational roll damping, N m s/rad.
    pub c_roll: f64,
    pub n_ducts: usize,
    pub motors_per_duct: usize,
}

impl Default for AirframeParams {
    fn default() -> Self {
        AirframeParams {
            mass: 577.0,
            lambda_up: 9.0,
            f_max_total: 7100.0,
            peak_factor: 2.0,
            j_roll: 350.0,
            c_roll: 0.0,
            n_ducts: 4,
            motors_per_duct: 2,
        }
    }
}

impl AirframeParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [("mass", self.mass), ("f_max_total", self.f_max_total), ("j_roll", self.j_roll)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("airframe {name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("lambda_up", self.lambda_up), ("c_roll", self.c_roll)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("airframe {name} must be non-negative, got {v}")));
            }
        }
        if !(self.peak_factor >= 1.0) {
            return Err(Error::invalid(format!("peak_factor must be at least 1, got {}", self.peak_factor)));
        }
        if self.n_ducts == 0 || self.motors_per_duct == 0 {
            return Err(Error::invalid("airframe needs at least one duct and one motor per duct"));
        }
        Ok(())
    }

    pub fn motor_count(&self) -> usize {
        self.n_ducts * self.motors_per_duct
    }

    /// Continuous per-motor force cap, N.
    pub fn f_motor_cont(&self) -> f64 {
        self.f_max_total / self.motor_count() as f64
    }

    pub fn weight(&self, g: f64) -> f64 {
        self.mass * g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MotorHealth {
    Healthy,
    Failed,
}

/// Health of every motor, grouped by duct.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DuctState {
    ducts: Vec<Vec<MotorHealth>>,
}

impl DuctState {
    pub fn healthy(airframe: &AirframeParams) -> Self {
        DuctState { ducts: vec![vec![MotorHealth::Healthy; airframe.motors_per_duct]; airframe.n_ducts] }
    }

    pub fn from_ducts(ducts: Vec<Vec<MotorHealth>>) -> Result<Self> {
        let width = ducts.first().map(Vec::len).unwrap_or(0);
        if width == 0 || ducts.iter().any(|d| d.len() != width) {
            return Err(Error::invalid("every duct must list the same, nonzero number of motors"));
        }
        Ok(DuctState { ducts })
    }

    pub fn ducts(&self) -> &[Vec<MotorHealth>] {
        &self.ducts
    }

    pub fn matches(&self, airframe: &AirframeParams) -> bool {
        self.ducts.len() == airframe.n_ducts && self.ducts.iter().all(|d| d.len() == airframe.motors_per_duct)
    }

    pub fn check_index(&self, duct: usize, motor: usize) -> Result<()> {
        match self.ducts.get(duct) {
            Some(d) if motor < d.len() => Ok(()),
            _ => Err(Error::invalid(format!(
                "motor index (duct {duct}, motor {motor}) out of range for {} ducts of {} motors",
                self.ducts.len(),
                self.ducts.first().map(Vec::len).unwrap_or(0)
            ))),
        }
    }

    pub fn set(&mut self, duct: usize, motor: usize, health: MotorHealth) -> Result<()> {
        self.check_index(duct, motor)?;
        self.ducts[duct][motor] = health;
        Ok(())
    }

    pub fn healthy_count(&self, duct: usize) -> usize {
        self.ducts[duct].iter().filter(|h| **h == MotorHealth::Healthy).count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationResult {
    /// Per-motor forces, duct-major (duct 0 motor 0, duct 0 motor 1, ...).
    pub motor_forces: Vec<f64>,
    pub total: f64,
    pub saturated: bool,
}

/// Largest force a duct can deliver given its healthy motors.
fn duct_capacity(airframe: &AirframeParams, healthy: usize) -> f64 {
    let cont = airframe.f_motor_cont();
    if healthy == airframe.motors_per_duct {
        healthy as f64 * cont
    } else {
        healthy as f64 * cont * airframe.peak_factor
    }
}

/// Total thrust the vehicle can deliver while keeping every duct at the
/// same force.
pub fn balanced_capacity(airframe: &AirframeParams, states: &DuctState) -> f64 {
    let weakest = (0..airframe.n_ducts)
        .map(|d| duct_capacity(airframe, states.healthy_count(d)))
        .fold(f64::INFINITY, f64::min);
    weakest * airframe.n_ducts as f64
}

/// Splits a total force demand equally across ducts and, within a duct,
/// equally across its healthy motors. A motor whose twin has failed may run
/// up to `peak_factor` times the continuous cap. Demand beyond the balanced
/// capacity is clipped and flagged.
pub fn allocate_thrust(f_cmd: f64, airframe: &AirframeParams, states: &DuctState) -> Result<AllocationResult> {
    if !(f_cmd >= 0.0) {
        return Err(Error::invalid(format!("commanded force must be non-negative, got {f_cmd}")));
    }
    if !states.matches(airframe) {
        return Err(Error::invalid("duct state does not match the airframe layout"));
    }
    let capacity = balanced_capacity(airframe, states);
    let total = f_cmd.min(capacity);
    let saturated = f_cmd > capacity;
    let per_duct = total / airframe.n_ducts as f64;

    let mut motor_forces = Vec::with_capacity(airframe.motor_count());
    for (d, duct) in states.ducts().iter().enumerate() {
        let healthy = states.healthy_count(d);
        for health in duct {
            motor_forces.push(match health {
                MotorHealth::Healthy => per_duct / healthy as f64,
                MotorHealth::Failed => 0.0,
            });
        }
    }
    Ok(AllocationResult { motor_forces, total, saturated })
}

/// `K_m K_T / (L s + R)`.
pub fn motor_simplified_tf(p: &MotorParams) -> RationalTransfer {
    RationalTransfer::new(
        Polynomial::constant(p.km * p.kt),
        Polynomial::new(vec![p.resistance, p.inductance]),
    )
    .expect("inductance is positive")
}

/// Force to altitude, `(1/m) / (s^2 + (lambda/m) s)`.
pub fn altitude_plant_tf(mass: f64, lambda_up: f64) -> Result<RationalTransfer> {
    if !(mass > 0.0) {
        return Err(Error::invalid(format!("mass must be positive, got {mass}")));
    }
    RationalTransfer::new(
        Polynomial::constant(1.0 / mass),
        Polynomial::new(vec![0.0, lambda_up / mass, 1.0]),
    )
}

/// Voltage to altitude: the motor stage in series with the altitude plant.
pub fn combined_plant_tf(motor: &MotorParams, mass: f64, lambda_up: f64) -> Result<RationalTransfer> {
    Ok(motor_simplified_tf(motor).series(&altitude_plant_tf(mass, lambda_up)?))
}

/// Torque to roll angle, `1 / (J s^2 + c s)`.
pub fn roll_plant_tf(airframe: &AirframeParams) -> Result<RationalTransfer> {
    if !(airframe.j_roll > 0.0) {
        return Err(Error::invalid(format!("roll inertia must be positive, got {}", airframe.j_roll)));
    }
    RationalTransfer::new(
        Polynomial::constant(1.0),
        Polynomial::new(vec![0.0, airframe.c_roll, airframe.j_roll]),
    )
}
