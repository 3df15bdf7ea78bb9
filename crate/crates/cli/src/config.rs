//! Run configuration: a single JSON document with a versioned schema.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use tiltrotor::perf::{Environment, MassLedger, PerfConfig};
use tiltrotor::presets;
use tiltrotor::scenario::{default_voltage_limit, Reference, Scenario, ScenarioKind};
use tiltrotor::synthesis::PidGains;
use tiltrotor::vehicle::{AirframeParams, MotorParams};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("config error at `{path}`: {message}")]
    Invalid { path: String, message: String },
}

impl ConfigError {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid { path: path.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub environment: Environment,
    #[serde(default)]
    pub airframe: AirframeParams,
    #[serde(default)]
    pub motor: MotorParams,
    #[serde(default)]
    pub scenarios: ScenarioBlocks,
    #[serde(default)]
    pub perf: PerfConfig,
    #[serde(default)]
    pub mass_ledger: MassLedger,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

fn default_output_dir() -> String {
    "out".into()
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            environment: Environment::default(),
            airframe: AirframeParams::default(),
            motor: MotorParams::default(),
            scenarios: ScenarioBlocks::default(),
            perf: PerfConfig::default(),
            mass_ledger: MassLedger::default(),
            output_dir: default_output_dir(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioBlocks {
    pub altitude_basic: AltitudeBlock,
    pub altitude_motor: AltitudeBlock,
    pub roll_motor: RollBlock,
}

impl Default for ScenarioBlocks {
    fn default() -> Self {
        ScenarioBlocks {
            altitude_basic: AltitudeBlock::with_gains(presets::altitude_basic_gains()),
            altitude_motor: AltitudeBlock::with_gains(presets::altitude_motor_gains()),
            roll_motor: RollBlock::default(),
        }
    }
}

/// Altitude step about hover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AltitudeBlock {
    pub gains: PidGains,
    /// Commanded altitude, m.
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default)]
    pub initial_altitude: f64,
    /// Constant force at the plant input, N.
    #[serde(default)]
    pub disturbance: f64,
    #[serde(default = "default_duration")]
    pub duration: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "yes")]
    pub saturation: bool,
    /// Voltage swing about trim, V. Defaults to the thrust cap over the
    /// motor DC gain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub voltage_limit: Option<f64>,
}

impl AltitudeBlock {
    fn with_gains(gains: PidGains) -> Self {
        AltitudeBlock {
            gains,
            step: default_step(),
            initial_altitude: 0.0,
            disturbance: 0.0,
            duration: default_duration(),
            dt: default_dt(),
            saturation: true,
            voltage_limit: None,
        }
    }
}

impl Default for AltitudeBlock {
    fn default() -> Self {
        AltitudeBlock::with_gains(presets::altitude_motor_gains())
    }
}

/// Roll recovery from an initial attitude error under a constant torque.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RollBlock {
    pub gains: PidGains,
    /// rad.
    pub initial_error: f64,
    /// N m.
    pub disturbance: f64,
    /// Torque constant of the roll actuator.
    pub kt: f64,
    pub duration: f64,
    pub dt: f64,
    pub saturation: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub voltage_limit: Option<f64>,
}

impl Default for RollBlock {
    fn default() -> Self {
        RollBlock {
            gains: presets::roll_motor_gains(),
            initial_error: presets::ROLL_INITIAL_ERROR,
            disturbance: presets::ROLL_DISTURBANCE,
            kt: presets::ROLL_KT,
            duration: default_duration(),
            dt: default_dt(),
            saturation: true,
            voltage_limit: None,
        }
    }
}

fn default_step() -> f64 {
    presets::ALTITUDE_STEP
}

fn default_duration() -> f64 {
    presets::DEFAULT_DURATION
}

fn default_dt() -> f64 {
    tiltrotor::linsys::DEFAULT_DT
}

fn yes() -> bool {
    true
}

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        ConfigError::at(if path == "." { "<root>".to_string() } else { path }, e.into_inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

struct Checker(Vec<ConfigError>);

impl Checker {
    fn positive(&mut self, path: &str, v: f64) {
        if !(v > 0.0 && v.is_finite()) {
            self.0.push(ConfigError::at(path, format!("must be positive, got {v}")));
        }
    }

    fn non_negative(&mut self, path: &str, v: f64) {
        if !(v >= 0.0 && v.is_finite()) {
            self.0.push(ConfigError::at(path, format!("must be non-negative, got {v}")));
        }
    }

    fn finite(&mut self, path: &str, v: f64) {
        if !v.is_finite() {
            self.0.push(ConfigError::at(path, format!("must be finite, got {v}")));
        }
    }

    fn rule(&mut self, ok: bool, path: &str, msg: &str) {
        if !ok {
            self.0.push(ConfigError::at(path, msg));
        }
    }

    fn gains(&mut self, path: &str, g: &PidGains) {
        self.finite(&format!("{path}.kp"), g.kp);
        self.finite(&format!("{path}.ki"), g.ki);
        self.finite(&format!("{path}.kd"), g.kd);
    }

    fn timing(&mut self, path: &str, dt: f64, duration: f64, limit: Option<f64>) {
        self.positive(&format!("{path}.dt"), dt);
        self.positive(&format!("{path}.duration"), duration);
        self.rule(duration >= dt, &format!("{path}.duration"), "must be at least one step");
        if let Some(v) = limit {
            self.non_negative(&format!("{path}.voltage_limit"), v);
        }
    }
}

impl RunConfig {
    /// Checks every block; the first problem is reported with its key path.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut c = Checker(Vec::new());
        c.rule(
            self.schema_version == SCHEMA_VERSION,
            "schema_version",
            &format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
        );
        c.positive("environment.rho", self.environment.rho);
        c.positive("environment.g", self.environment.g);

        let a = &self.airframe;
        c.positive("airframe.mass", a.mass);
        c.non_negative("airframe.lambda_up", a.lambda_up);
        c.positive("airframe.f_max_total", a.f_max_total);
        c.rule(a.peak_factor >= 1.0, "airframe.peak_factor", "must be at least 1");
        c.positive("airframe.j_roll", a.j_roll);
        c.non_negative("airframe.c_roll", a.c_roll);
        c.rule(a.n_ducts > 0, "airframe.n_ducts", "must be at least 1");
        c.rule(a.motors_per_duct > 0, "airframe.motors_per_duct", "must be at least 1");

        c.positive("motor.km", self.motor.km);
        c.positive("motor.inductance", self.motor.inductance);
        c.non_negative("motor.resistance", self.motor.resistance);
        c.positive("motor.kt", self.motor.kt);

        for (name, b) in [("altitude_basic", &self.scenarios.altitude_basic), ("altitude_motor", &self.scenarios.altitude_motor)] {
            let p = format!("scenarios.{name}");
            c.gains(&format!("{p}.gains"), &b.gains);
            c.finite(&format!("{p}.step"), b.step);
            c.finite(&format!("{p}.initial_altitude"), b.initial_altitude);
            c.finite(&format!("{p}.disturbance"), b.disturbance);
            c.timing(&p, b.dt, b.duration, b.voltage_limit);
        }
        c.rule(
            self.scenarios.altitude_basic.gains.ki == 0.0,
            "scenarios.altitude_basic.gains.ki",
            "the basic loop is proportional-derivative only; ki must be 0",
        );
        let r = &self.scenarios.roll_motor;
        c.gains("scenarios.roll_motor.gains", &r.gains);
        c.finite("scenarios.roll_motor.initial_error", r.initial_error);
        c.finite("scenarios.roll_motor.disturbance", r.disturbance);
        c.positive("scenarios.roll_motor.kt", r.kt);
        c.timing("scenarios.roll_motor", r.dt, r.duration, r.voltage_limit);

        let p = &self.perf;
        for (name, v) in [
            ("mass", p.mass),
            ("rotor_area_each", p.rotor_area_each),
            ("fuel_mass", p.fuel_mass),
            ("p_max_gen", p.p_max_gen),
            ("p_nameplate", p.p_nameplate),
            ("sfc", p.sfc),
            ("motor_peak", p.motor_peak),
            ("takeoff_load_factor", p.takeoff_load_factor),
            ("drag_polar.a_par", p.drag_polar.a_par),
            ("drag_polar.b_ind", p.drag_polar.b_ind),
        ] {
            c.positive(&format!("perf.{name}"), v);
        }
        c.rule(p.eta > 0.0 && p.eta < 1.0, "perf.eta", &format!("must lie in (0, 1), got {}", p.eta));
        c.rule(p.n_rotors > 0, "perf.n_rotors", "must be at least 1");

        for (i, (name, m)) in self.mass_ledger.entries.iter().enumerate() {
            c.non_negative(&format!("mass_ledger.entries[{i}]"), *m);
            c.rule(!name.is_empty(), &format!("mass_ledger.entries[{i}]"), "needs a name");
        }
        c.non_negative("mass_ledger.declared_total", self.mass_ledger.declared_total);
        c.rule(!self.output_dir.is_empty(), "output_dir", "must not be empty");

        match c.0.into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// The scenario a `sim` run executes.
    pub fn scenario(&self, kind: ScenarioKind) -> Scenario {
        let mut sc = match kind {
            ScenarioKind::AltitudeBasic | ScenarioKind::AltitudeMotor => {
                let b = match kind {
                    ScenarioKind::AltitudeBasic => &self.scenarios.altitude_basic,
                    _ => &self.scenarios.altitude_motor,
                };
                let reference = Reference { initial_output: b.initial_altitude, ..Reference::step(b.step) };
                let mut sc = Scenario::new(kind, b.gains, reference);
                sc.disturbance = b.disturbance;
                sc.duration = b.duration;
                sc.dt = b.dt;
                sc.saturation = b.saturation;
                sc.motor = self.motor;
                sc.voltage_limit = b.voltage_limit.unwrap_or_else(|| default_voltage_limit(&self.airframe, &self.motor));
                sc
            }
            ScenarioKind::RollMotor => {
                let r = &self.scenarios.roll_motor;
                let mut sc = Scenario::new(kind, r.gains, Reference::initial_error(r.initial_error));
                sc.disturbance = r.disturbance;
                sc.duration = r.duration;
                sc.dt = r.dt;
                sc.saturation = r.saturation;
                sc.motor = self.motor.with_kt(r.kt);
                sc.voltage_limit = r.voltage_limit.unwrap_or_else(|| default_voltage_limit(&self.airframe, &self.motor));
                sc
            }
        };
        sc.airframe = self.airframe;
        sc.duct_states = tiltrotor::vehicle::DuctState::healthy(&self.airframe);
        sc.gravity = self.environment.g;
        sc
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document_takes_defaults() {
        let cfg = parse_config_str(r#"{"schema_version": 1}"#).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.airframe.mass, 577.0);
        assert_eq!(cfg.scenarios.altitude_basic.gains, PidGains::pd(0.65, 5.0));
        assert_eq!(cfg.perf.eta, 0.627);
    }

    #[test]
    fn schema_version_is_required() {
        let err = parse_config_str("{}").unwrap_err().to_string();
        assert!(err.contains("schema_version"), "{err}");
        let err = parse_config_str(r#"{"schema_version": 7}"#).unwrap_err().to_string();
        assert!(err.contains("schema_version"), "{err}");
    }

    #[test]
    fn unknown_key_reports_its_path() {
        let err = parse_config_str(r#"{"schema_version": 1, "airframe": {"mas": 5}}"#).unwrap_err().to_string();
        assert!(err.contains("airframe") && err.contains("mas"), "{err}");
        let err = parse_config_str(r#"{"schema_version": 1, "scenarios": {"roll_motor": {"gains": {"kp": 1, "ki": 0, "kd": 1, "kx": 2}}}}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("scenarios.roll_motor.gains"), "{err}");
    }

    #[test]
    fn type_mismatch_reports_its_path() {
        let err = parse_config_str(r#"{"schema_version": 1, "motor": {"km": "ten"}}"#).unwrap_err().to_string();
        assert!(err.contains("motor.km"), "{err}");
    }

    #[test]
    fn negative_mass_names_the_key() {
        let err = parse_config_str(r#"{"schema_version": 1, "airframe": {"mass": -1}}"#).unwrap_err().to_string();
        assert!(err.contains("airframe.mass"), "{err}");
    }

    #[test]
    fn omitted_eta_gets_the_default() {
        let cfg = parse_config_str(r#"{"schema_version": 1, "perf": {"mass": 600}}"#).unwrap();
        assert_eq!(cfg.perf.eta, 0.627);
        assert_eq!(cfg.perf.mass, 600.0);
    }

    #[test]
    fn dump_round_trips() {
        let cfg = RunConfig::default();
        assert_eq!(parse_config_str(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn scenarios_match_presets() {
        let cfg = RunConfig::default();
        for kind in ScenarioKind::ALL {
            assert_eq!(cfg.scenario(kind), presets::scenario(kind), "{kind:?}");
        }
    }
}
