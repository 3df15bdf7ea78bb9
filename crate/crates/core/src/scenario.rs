//! Nonlinear closed-loop simulations of the altitude and roll loops.
//!
//! All three loops use a PID (PD for the basic loop) acting on the error
//! `r - y`. For `t > 0` the reference is constant, so the derivative term is
//! `-kd * y'`. A reference step at `t = 0` additionally feeds a Dirac impulse
//! `kd * (r - y0) * delta(t)` into the actuator chain. With saturation
//! enabled the clamp absorbs it; with saturation disabled it passes through
//! the linear blocks and is applied as an exact jump of the first state it
//! reaches (velocity for the basic loop, motor output for the motor loops).
//! That keeps the unsaturated runs identical to `C G / (1 + C G)`.
//!
//! The linear plants are deviation models about hover. The altitude loops
//! carry the trim thrust `m g` explicitly so that thrust saturation and
//! allocation act on total force.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linsys::{integrate_fixed_step, Polynomial, RationalTransfer, StateSpaceModel, TimeSeries, Trajectory};
use crate::synthesis::{pid_tf, PidGains};
use crate::vehicle::{
    allocate_thrust, altitude_plant_tf, balanced_capacity, motor_simplified_tf, roll_plant_tf, AirframeParams,
    DuctState, MotorHealth, MotorParams,
};

/// Band used for settling time, as a fraction of the step.
pub const SETTLING_BAND: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    AltitudeBasic,
    AltitudeMotor,
    RollMotor,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 3] = [ScenarioKind::AltitudeBasic, ScenarioKind::AltitudeMotor, ScenarioKind::RollMotor];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::AltitudeBasic => "altitude-basic",
            ScenarioKind::AltitudeMotor => "altitude-motor",
            ScenarioKind::RollMotor => "roll-motor",
        }
    }

    pub fn has_motor(self) -> bool {
        !matches!(self, ScenarioKind::AltitudeBasic)
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ScenarioKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown scenario kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceShape {
    /// The reference jumps from the initial output to the target at `t = 0`.
    Step,
    /// The reference has always been the target; the output starts displaced.
    InitialError,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub target: f64,
    pub initial_output: f64,
    pub shape: ReferenceShape,
}

impl Reference {
    pub fn step(target: f64) -> Self {
        Reference { target, initial_output: 0.0, shape: ReferenceShape::Step }
    }

    /// Output starts `error` away from a target of zero.
    pub fn initial_error(error: f64) -> Self {
        Reference { target: 0.0, initial_output: error, shape: ReferenceShape::InitialError }
    }

    fn kick(&self) -> f64 {
        match self.shape {
            ReferenceShape::Step => self.target - self.initial_output,
            ReferenceShape::InitialError => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotorFailure {
    pub duct: usize,
    pub motor: usize,
    /// Failure time, s.
    pub at: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub airframe: AirframeParams,
    /// Motor stage; `kt` is the force-to-torque arm for the roll loop.
    pub motor: MotorParams,
    pub gains: PidGains,
    pub reference: Reference,
    /// Constant exogenous force (N) or torque (N m) at the plant input.
    pub disturbance: f64,
    pub duct_states: DuctState,
    pub failures: Vec<MotorFailure>,
    pub dt: f64,
    pub duration: f64,
    pub gravity: f64,
    /// Symmetric limit on the controller voltage about trim, V.
    pub voltage_limit: f64,
    /// When false, voltage and thrust clamps and the allocator are bypassed.
    pub saturation: bool,
}

impl Scenario {
    /// Scenario of `kind` with the default airframe and motor.
    pub fn new(kind: ScenarioKind, gains: PidGains, reference: Reference) -> Self {
        let airframe = AirframeParams::default();
        let motor = MotorParams::default();
        Scenario {
            kind,
            duct_states: DuctState::healthy(&airframe),
            voltage_limit: default_voltage_limit(&airframe, &motor),
            airframe,
            motor,
            gains,
            reference,
            disturbance: 0.0,
            failures: Vec::new(),
            dt: crate::linsys::DEFAULT_DT,
            duration: 60.0,
            gravity: 9.81,
            saturation: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.airframe.validate()?;
        self.motor.validate()?;
        if !self.gains.is_finite() {
            return Err(Error::invalid("controller gains must be finite"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.duration >= self.dt && self.duration.is_finite()) {
            return Err(Error::invalid(format!("duration {} must be at least dt", self.duration)));
        }
        if !(self.voltage_limit >= 0.0) {
            return Err(Error::invalid("voltage limit must be non-negative"));
        }
        if !(self.gravity > 0.0) {
            return Err(Error::invalid("gravity must be positive"));
        }
        if !self.duct_states.matches(&self.airframe) {
            return Err(Error::invalid("duct state does not match the airframe layout"));
        }
        for f in &self.failures {
            self.duct_states.check_index(f.duct, f.motor)?;
        }
        let r = &self.reference;
        if !(r.target.is_finite() && r.initial_output.is_finite() && self.disturbance.is_finite()) {
            return Err(Error::invalid("reference and disturbance must be finite"));
        }
        Ok(())
    }

    /// Trim voltage holding hover; zero for the roll loop.
    pub fn trim_voltage(&self) -> f64 {
        match self.kind {
            ScenarioKind::AltitudeMotor => self.airframe.weight(self.gravity) / self.motor.dc_gain(),
            _ => 0.0,
        }
    }
}

/// Voltage swing that maps the total thrust cap through the motor's DC gain.
pub fn default_voltage_limit(airframe: &AirframeParams, motor: &MotorParams) -> f64 {
    airframe.f_max_total / motor.dc_gain()
}

/// Marks `motor` of `duct` failed from `t_fail` on. A failure time beyond the
/// duration is accepted and has no effect.
pub fn inject_failure(sc: &Scenario, duct: usize, motor: usize, t_fail: f64) -> Result<Scenario> {
    sc.duct_states.check_index(duct, motor)?;
    if !(t_fail >= 0.0 && t_fail.is_finite()) {
        return Err(Error::invalid(format!("failure time must be non-negative, got {t_fail}")));
    }
    let mut out = sc.clone();
    out.failures.push(MotorFailure { duct, motor, at: t_fail });
    Ok(out)
}

/// Duct health over time: `(start time, state, balanced capacity)`.
struct HealthSchedule {
    phases: Vec<(f64, DuctState, f64)>,
}

impl HealthSchedule {
    fn new(sc: &Scenario) -> Result<Self> {
        let mut failures = sc.failures.clone();
        failures.sort_by(|a, b| a.at.total_cmp(&b.at));
        let mut state = sc.duct_states.clone();
        let mut phases = vec![(0.0, state.clone(), balanced_capacity(&sc.airframe, &state))];
        for f in failures {
            state.set(f.duct, f.motor, MotorHealth::Failed)?;
            let cap = balanced_capacity(&sc.airframe, &state);
            match phases.last_mut() {
                Some(last) if last.0 == f.at => *last = (f.at, state.clone(), cap),
                _ => phases.push((f.at, state.clone(), cap)),
            }
        }
        Ok(HealthSchedule { phases })
    }

    fn at(&self, t: f64) -> &(f64, DuctState, f64) {
        self.phases.iter().rev().find(|p| p.0 <= t).unwrap_or(&self.phases[0])
    }
}

/// Thrust stage shared by both altitude loops: clamp to the total cap, then
/// to what the current motor health can deliver.
fn delivered_thrust(sc: &Scenario, schedule: &HealthSchedule, t: f64, commanded: f64) -> f64 {
    if !sc.saturation {
        return commanded;
    }
    let clamped = commanded.clamp(0.0, sc.airframe.f_max_total);
    clamped.min(schedule.at(t).2)
}

fn clamp_voltage(sc: &Scenario, u: f64) -> f64 {
    if sc.saturation {
        u.clamp(-sc.voltage_limit, sc.voltage_limit)
    } else {
        u
    }
}

/// Time series plus metrics of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRun {
    pub series: TimeSeries,
    pub metrics: SimMetrics,
}

pub fn run_altitude_basic(sc: &Scenario) -> Result<SimRun> {
    expect_kind(sc, ScenarioKind::AltitudeBasic)?;
    if sc.gains.ki != 0.0 {
        return Err(Error::invalid("the basic altitude loop is PD only (ki must be 0)"));
    }
    run(sc)
}

pub fn run_altitude_motor(sc: &Scenario) -> Result<SimRun> {
    expect_kind(sc, ScenarioKind::AltitudeMotor)?;
    run(sc)
}

pub fn run_roll_motor(sc: &Scenario) -> Result<SimRun> {
    expect_kind(sc, ScenarioKind::RollMotor)?;
    run(sc)
}

/// Dispatches on `sc.kind`.
pub fn run_scenario(sc: &Scenario) -> Result<SimRun> {
    match sc.kind {
        ScenarioKind::AltitudeBasic => run_altitude_basic(sc),
        ScenarioKind::AltitudeMotor => run_altitude_motor(sc),
        ScenarioKind::RollMotor => run_roll_motor(sc),
    }
}

fn expect_kind(sc: &Scenario, kind: ScenarioKind) -> Result<()> {
    if sc.kind != kind {
        return Err(Error::invalid(format!("expected a {} scenario, got {}", kind.name(), sc.kind.name())));
    }
    Ok(())
}

fn run(sc: &Scenario) -> Result<SimRun> {
    sc.validate()?;
    let schedule = HealthSchedule::new(sc)?;
    let traj = integrate(sc, &schedule)?;
    let series = build_series(sc, &schedule, &traj)?;
    let metrics = compute_metrics(&series, sc.reference.target)?;
    Ok(SimRun { series, metrics })
}

// State layouts:
//   altitude-basic: [x, v]
//   altitude-motor: [x, v, integral of error, thrust deviation]
//   roll-motor:     [roll, roll rate, integral of error, torque]
fn integrate(sc: &Scenario, schedule: &HealthSchedule) -> Result<Trajectory> {
    let r = sc.reference.target;
    let g = sc.gains;
    let af = &sc.airframe;
    let m = af.mass;
    let weight = af.weight(sc.gravity);
    let kick = if sc.saturation { 0.0 } else { g.kd * sc.reference.kick() };
    let y0 = sc.reference.initial_output;

    match sc.kind {
        ScenarioKind::AltitudeBasic => integrate_fixed_step(
            |t, x, _, dx| {
                let accel_cmd = g.kp * (r - x[0]) - g.kd * x[1];
                let thrust = delivered_thrust(sc, schedule, t, m * (accel_cmd + sc.gravity));
                dx[0] = x[1];
                dx[1] = (thrust + sc.disturbance - weight - af.lambda_up * x[1]) / m;
            },
            &[y0, kick],
            |_| 0.0,
            sc.dt,
            sc.duration,
        ),
        ScenarioKind::AltitudeMotor => {
            let motor = sc.motor.with_kt(1.0);
            let jump = motor.km * motor.kt * kick / motor.inductance;
            integrate_fixed_step(
                |t, x, _, dx| {
                    let e = r - x[0];
                    let u = clamp_voltage(sc, g.kp * e + g.ki * x[2] - g.kd * x[1]);
                    let thrust = delivered_thrust(sc, schedule, t, weight + x[3]);
                    dx[0] = x[1];
                    dx[1] = (thrust + sc.disturbance - weight - af.lambda_up * x[1]) / m;
                    dx[2] = e;
                    dx[3] = motor.output_rate(x[3], u);
                },
                &[y0, 0.0, 0.0, jump],
                |_| 0.0,
                sc.dt,
                sc.duration,
            )
        }
        ScenarioKind::RollMotor => {
            let motor = sc.motor;
            let jump = motor.km * motor.kt * kick / motor.inductance;
            integrate_fixed_step(
                |_, x, _, dx| {
                    let e = r - x[0];
                    let u = clamp_voltage(sc, g.kp * e + g.ki * x[2] - g.kd * x[1]);
                    dx[0] = x[1];
                    dx[1] = (x[3] + sc.disturbance - af.c_roll * x[1]) / af.j_roll;
                    dx[2] = e;
                    dx[3] = motor.output_rate(x[3], u);
                },
                &[y0, 0.0, 0.0, jump],
                |_| 0.0,
                sc.dt,
                sc.duration,
            )
        }
    }
}

fn build_series(sc: &Scenario, schedule: &HealthSchedule, traj: &Trajectory) -> Result<TimeSeries> {
    let r = sc.reference.target;
    let g = sc.gains;
    let weight = sc.airframe.weight(sc.gravity);
    let output = traj.component(0);
    let n = output.len();

    let mut ts = TimeSeries::new(traj.dt, traj.times.clone())?
        .with_channel("reference", vec![r; n])?
        .with_channel("output", output.clone())?
        .with_channel("error", output.iter().map(|y| r - y).collect())?
        .with_channel("rate", traj.component(1))?;

    match sc.kind {
        ScenarioKind::AltitudeBasic | ScenarioKind::AltitudeMotor => {
            let mut total = Vec::with_capacity(n);
            let mut per_motor = vec![Vec::with_capacity(n); sc.airframe.motor_count()];
            let mut voltage = Vec::with_capacity(n);
            for (&t, x) in traj.times.iter().zip(&traj.states) {
                let commanded = match sc.kind {
                    ScenarioKind::AltitudeBasic => sc.airframe.mass * (g.kp * (r - x[0]) - g.kd * x[1] + sc.gravity),
                    _ => {
                        let u = clamp_voltage(sc, g.kp * (r - x[0]) + g.ki * x[2] - g.kd * x[1]);
                        voltage.push(sc.trim_voltage() + u);
                        weight + x[3]
                    }
                };
                let delivered = delivered_thrust(sc, schedule, t, commanded);
                total.push(delivered);
                let alloc = if sc.saturation {
                    allocate_thrust(delivered, &sc.airframe, &schedule.at(t).1)?.motor_forces
                } else {
                    let share = delivered / sc.airframe.motor_count() as f64;
                    vec![share; sc.airframe.motor_count()]
                };
                for (ch, f) in per_motor.iter_mut().zip(alloc) {
                    ch.push(f);
                }
            }
            if sc.kind == ScenarioKind::AltitudeMotor {
                ts.push_channel("voltage", voltage)?;
            }
            ts.push_channel("force_total", total)?;
            for (i, ch) in per_motor.into_iter().enumerate() {
                ts.push_channel(&format!("force_motor_{}", i + 1), ch)?;
            }
        }
        ScenarioKind::RollMotor => {
            let torque = traj.component(3);
            let voltage = traj
                .states
                .iter()
                .map(|x| clamp_voltage(sc, g.kp * (r - x[0]) + g.ki * x[2] - g.kd * x[1]))
                .collect();
            ts.push_channel("voltage", voltage)?;
            ts.push_channel("force_total", torque.iter().map(|q| q / sc.motor.kt).collect())?;
            ts.push_channel("torque", torque)?;
        }
    }
    Ok(ts)
}

/// Linear pieces of a scenario's loop, all in deviation coordinates.
#[derive(Debug, Clone)]
pub struct LinearLoop {
    /// Controller times actuator times plant.
    pub open_loop: RationalTransfer,
    /// Reference to output with the derivative acting on the error.
    pub reference_path: RationalTransfer,
    /// Reference to output with the derivative acting on the output only.
    pub reference_path_measured: RationalTransfer,
    /// Plant-input disturbance to output.
    pub disturbance_path: RationalTransfer,
}

/// Strips common factors of `s` from numerator and denominator.
fn cancel_origin(g: &RationalTransfer) -> RationalTransfer {
    let mut num = g.numerator().coeffs().to_vec();
    let mut den = g.denominator().coeffs().to_vec();
    while num.len() > 1 && den.len() > 1 && num[0] == 0.0 && den[0] == 0.0 {
        num.remove(0);
        den.remove(0);
    }
    RationalTransfer::new(Polynomial::new(num), Polynomial::new(den)).expect("denominator stays nonzero")
}

pub fn linear_loop(sc: &Scenario) -> Result<LinearLoop> {
    let (actuator, plant) = match sc.kind {
        // Acceleration command times mass is the thrust deviation.
        ScenarioKind::AltitudeBasic => (
            RationalTransfer::gain(sc.airframe.mass),
            altitude_plant_tf(sc.airframe.mass, sc.airframe.lambda_up)?,
        ),
        ScenarioKind::AltitudeMotor => (
            motor_simplified_tf(&sc.motor.with_kt(1.0)),
            altitude_plant_tf(sc.airframe.mass, sc.airframe.lambda_up)?,
        ),
        ScenarioKind::RollMotor => (motor_simplified_tf(&sc.motor), roll_plant_tf(&sc.airframe)?),
    };
    let g = sc.gains;
    let forward = actuator.series(&plant);
    let open_loop = cancel_origin(&pid_tf(&g)?.series(&forward));
    let reference_path = cancel_origin(&open_loop.feedback_unity()?);
    let measured = if g.kp == 0.0 && g.ki == 0.0 {
        RationalTransfer::gain(0.0)
    } else {
        pid_tf(&PidGains { kd: 0.0, ..g })?.series(&forward)
    };
    let reference_path_measured = cancel_origin(&RationalTransfer::feedback(&measured, &open_loop)?);
    let disturbance_path = cancel_origin(&RationalTransfer::feedback(&plant, &open_loop)?);
    Ok(LinearLoop { open_loop, reference_path, reference_path_measured, disturbance_path })
}

/// Closed-loop characteristic polynomial of the linearized loop.
pub fn linearized_characteristic(sc: &Scenario) -> Result<Polynomial> {
    Ok(linear_loop(sc)?.reference_path.canonical().denominator().clone())
}

/// Output of the unsaturated loop computed from transfer functions alone:
/// each path is realized in controllable canonical form and stepped.
pub fn linear_response(sc: &Scenario) -> Result<Vec<f64>> {
    let lin = linear_loop(sc)?;
    let r = &sc.reference;
    let delta = r.target - r.initial_output;
    let path = match r.shape {
        ReferenceShape::Step => &lin.reference_path,
        // A translation-invariant plant displaced from a fixed reference
        // behaves as a step seen only through the output derivative.
        ReferenceShape::InitialError => &lin.reference_path_measured,
    };
    let y_ref = StateSpaceModel::from_transfer(path)?.step_response(sc.dt, sc.duration)?;
    let y_dist = StateSpaceModel::from_transfer(&lin.disturbance_path)?.step_response(sc.dt, sc.duration)?;
    Ok(y_ref
        .iter()
        .zip(&y_dist)
        .map(|(a, b)| r.initial_output + delta * a + sc.disturbance * b)
        .collect())
}

/// Step-response figures of merit.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SimMetrics {
    /// 10% to 90% of the step, s.
    pub rise_time: Option<f64>,
    /// Largest excursion past the target in the step direction.
    pub overshoot_abs: Option<f64>,
    /// Overshoot as a percentage of the step; undefined for a zero step.
    pub overshoot_pct: Option<f64>,
    /// Last exit from the settling band, s.
    pub settling_time: Option<f64>,
    /// Magnitude of the mean offset over the final 10% of samples.
    pub steady_state_error: Option<f64>,
    pub diverged: bool,
}

impl SimMetrics {
    pub fn diverged() -> Self {
        SimMetrics { diverged: true, ..Default::default() }
    }
}

/// Metrics of the `output` channel against `target`, measured from the
/// channel's first sample.
pub fn compute_metrics(ts: &TimeSeries, target: f64) -> Result<SimMetrics> {
    let y = ts.channel("output").ok_or_else(|| Error::invalid("time series has no `output` channel"))?;
    metrics_of(ts.time(), y, target)
}

pub fn metrics_of(time: &[f64], y: &[f64], target: f64) -> Result<SimMetrics> {
    if y.is_empty() || time.len() != y.len() {
        return Err(Error::invalid("metrics need a non-empty series with matching timestamps"));
    }
    let y0 = y[0];
    let step = target - y0;
    let dir = if step < 0.0 { -1.0 } else { 1.0 };

    let rise_time = if step != 0.0 {
        let lo = crossing(time, y, y0 + 0.1 * step, dir);
        let hi = crossing(time, y, y0 + 0.9 * step, dir);
        match (lo, hi) {
            (Some(a), Some(b)) => Some(b - a),
            _ => None,
        }
    } else {
        None
    };

    let overshoot_abs = y.iter().map(|v| dir * (v - target)).fold(0.0_f64, f64::max);
    let overshoot_pct = (step != 0.0).then(|| 100.0 * overshoot_abs / step.abs());

    let scale = step.abs().max(target.abs());
    let band = if scale > 0.0 { SETTLING_BAND * scale } else { 1e-12 };
    let outside = |v: f64| (v - target).abs() > band;
    let settling_time = match y.iter().rposition(|&v| outside(v)) {
        None => Some(0.0),
        Some(i) if i + 1 == y.len() => None,
        Some(i) => {
            // Interpolate where the trace re-enters the band.
            let (e0, e1) = ((y[i] - target).abs(), (y[i + 1] - target).abs());
            let frac = if e0 == e1 { 1.0 } else { ((e0 - band) / (e0 - e1)).clamp(0.0, 1.0) };
            Some(time[i] + frac * (time[i + 1] - time[i]))
        }
    };

    let tail = (y.len() / 10).max(1);
    let mean_tail = y[y.len() - tail..].iter().sum::<f64>() / tail as f64;
    Ok(SimMetrics {
        rise_time,
        overshoot_abs: Some(overshoot_abs),
        overshoot_pct,
        settling_time,
        steady_state_error: Some((mean_tail - target).abs()),
        diverged: false,
    })
}

/// First time `y` reaches `level` moving in direction `dir`, interpolated.
fn crossing(time: &[f64], y: &[f64], level: f64, dir: f64) -> Option<f64> {
    if dir * (y[0] - level) >= 0.0 {
        return Some(time[0]);
    }
    y.windows(2).enumerate().find_map(|(i, w)| {
        if dir * (w[1] - level) >= 0.0 {
            let frac = (level - w[0]) / (w[1] - w[0]);
            Some(time[i] + frac * (time[i + 1] - time[i]))
        } else {
            None
        }
    })
}
