mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};
use tiltrotor::perf::{self, Environment, FlightModeRow, PerfConfig};
use tiltrotor::scenario::{inject_failure, run_scenario, ScenarioKind};
use tiltrotor::synthesis::{closed_loop_characteristic, place_poles_for_plant, roll_loop_plant, stability_check};
use tiltrotor::vehicle::combined_plant_tf;
use tiltrotor::Error;

use config::{parse_config, ConfigError, RunConfig};
use report::{round_json, write_json, Cell, Table};

const BUNDLED_TABLE: &str = include_str!("../data/table8.csv");

#[derive(Debug, Parser)]
#[command(name = "tiltrotor", version, about = "Tilt-rotor control simulation and performance sizing")]
struct Cli {
    /// JSON run configuration; built-in defaults when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's output_dir.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Print the effective configuration as JSON and exit.
    #[arg(long)]
    dump_config: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a closed-loop scenario and write `<kind>.csv` plus metrics.json.
    Sim {
        #[arg(value_parser = parse_kind)]
        kind: ScenarioKind,
        /// Duct of the failed motor, counted from 1.
        #[arg(long, requires = "fail_motor")]
        fail_duct: Option<usize>,
        /// Motor within the duct, counted from 1.
        #[arg(long, requires = "fail_duct")]
        fail_motor: Option<usize>,
        /// Failure time, s.
        #[arg(long, default_value_t = 0.0, requires = "fail_duct")]
        fail_at: f64,
        /// Disable actuator saturation.
        #[arg(long)]
        no_saturation: bool,
    },
    /// Solve PID gains placing the closed-loop poles.
    Tune {
        /// Four poles in `a+bi` notation, comma separated.
        #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_complex)]
        poles: Vec<Complex64>,
        #[arg(long = "loop", value_enum, default_value_t = Loop::Altitude)]
        target: Loop,
    },
    /// Sizing and performance analyses.
    Perf {
        #[command(subcommand)]
        what: PerfCommand,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Loop {
    Altitude,
    Roll,
}

#[derive(Debug, Subcommand)]
enum PerfCommand {
    /// Regenerate the flight-mode table from the calibrated model.
    Table,
    /// Hover power against disk loading.
    SweepDl {
        #[arg(long, default_value_t = 40.0)]
        min: f64,
        #[arg(long, default_value_t = 140.0)]
        max: f64,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
    },
    /// Rate of climb against airspeed.
    Roc {
        #[arg(long, default_value_t = 20.0)]
        v_min: f64,
        #[arg(long, default_value_t = 130.0)]
        v_max: f64,
        #[arg(long, default_value_t = 1.0)]
        v_step: f64,
    },
    /// Efficiency, fuel consumption and drag polar from a flight-mode table.
    Calibrate {
        /// CSV with columns mode,v_ms,drag_n,p_gen_kw,ff_kg_s,endurance_h,range_km.
        #[arg(long, value_name = "PATH")]
        table: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::Divergence { .. }) => 1,
            _ => 2,
        }
    }
}

fn parse_kind(s: &str) -> Result<ScenarioKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses `a`, `bi`, `a+bi` or `a-bi` (`j` also accepted).
fn parse_complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("cannot read `{s}` as a complex number like -0.5+0.2i");
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| bad());
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len()).rev().find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (&body[..k], &body[k..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    let re: f64 = re.parse().map_err(|_| bad())?;
    let im: f64 = im.parse().map_err(|_| bad())?;
    Ok(Complex64::new(re, im))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => parse_config(path)?,
        None => RunConfig::default(),
    };
    if cli.dump_config {
        print_out(&cfg.to_json());
        return Ok(());
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from(&cfg.output_dir));
    let Some(command) = cli.command else {
        return Err(CliError::Usage("no command given; try --help".into()));
    };
    match command {
        Command::Sim { kind, fail_duct, fail_motor, fail_at, no_saturation } => {
            let failure = fail_duct.zip(fail_motor).map(|(d, m)| (d, m, fail_at));
            cmd_sim(&cfg, kind, failure, no_saturation, &out)
        }
        Command::Tune { poles, target } => cmd_tune(&cfg, &poles, target),
        Command::Perf { what } => cmd_perf(&cfg, what, &out),
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn print_out(text: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn emit(v: &Value) {
    print_out(&serde_json::to_string_pretty(v).expect("summary serializes"));
}

/// Fixed CSV layout shared by every scenario kind; channels a kind does not
/// produce are left empty.
fn sim_columns() -> Vec<String> {
    let mut cols: Vec<String> = ["t", "reference", "output", "error", "voltage", "force_total"].map(String::from).to_vec();
    cols.extend((1..=8).map(|i| format!("force_motor_{i}")));
    cols
}

fn cmd_sim(cfg: &RunConfig, kind: ScenarioKind, failure: Option<(usize, usize, f64)>, no_saturation: bool, out: &Path) -> Result<(), CliError> {
    let mut sc = cfg.scenario(kind);
    if no_saturation {
        sc.saturation = false;
    }
    if let Some((duct, motor, at)) = failure {
        if duct == 0 || motor == 0 {
            return Err(CliError::Usage("--fail-duct and --fail-motor count from 1".into()));
        }
        sc = inject_failure(&sc, duct - 1, motor - 1, at)?;
    }
    sc.validate()?;
    let run = run_scenario(&sc)?;

    let cols = sim_columns();
    let mut table = Table::new(cols.iter().cloned());
    let series = &run.series;
    let channels: Vec<Option<&[f64]>> = cols[1..].iter().map(|c| series.channel(c)).collect();
    for (k, t) in series.time().iter().enumerate() {
        let mut row = vec![Cell::Num(*t)];
        row.extend(channels.iter().map(|ch| Cell::from(ch.map(|v| v[k]))));
        table.push(row);
    }
    let (csv_path, _) = table.write(out, kind.name())?;
    let summary = round_json(json!({
        "kind": kind.name(),
        "gains": sc.gains,
        "failures": sc.failures,
        "saturation": sc.saturation,
        "metrics": run.metrics,
        "final_output": series.channel("output").and_then(|y| y.last().copied()),
        "csv": csv_path.display().to_string(),
    }));
    write_json(out, "metrics.json", &summary)?;
    emit(&summary);
    Ok(())
}

fn cmd_tune(cfg: &RunConfig, poles: &[Complex64], target: Loop) -> Result<(), CliError> {
    let poles: [Complex64; 4] = poles
        .try_into()
        .map_err(|_| CliError::Usage(format!("--poles needs exactly four values, got {}", poles.len())))?;
    let plant = match target {
        Loop::Altitude => combined_plant_tf(&cfg.motor, cfg.airframe.mass, cfg.airframe.lambda_up)?,
        Loop::Roll => roll_loop_plant(&cfg.motor.with_kt(cfg.scenarios.roll_motor.kt), &cfg.airframe)?,
    };
    let gains = match place_poles_for_plant(&plant, &poles) {
        Err(Error::PoleSumConstraint { required, actual }) => {
            return Err(CliError::Usage(format!(
                "poles must sum to {required:.6} for this plant (they sum to {actual:.6})"
            )))
        }
        other => other?,
    };
    let charpoly = closed_loop_characteristic(&plant, &gains);
    let verdict = stability_check(&charpoly)?;
    let desc: Vec<f64> = charpoly.coeffs().iter().rev().copied().collect();
    let summary = round_json(json!({
        "loop": format!("{target:?}").to_lowercase(),
        "gains": gains,
        "characteristic_polynomial_descending": desc,
        "stable": verdict.stable,
        "routh_stable": verdict.routh_stable,
        "stability_margin": verdict.margin,
        "roots": verdict.roots.iter().map(|r| json!({"re": r.re, "im": r.im})).collect::<Vec<_>>(),
    }));
    emit(&summary);
    Ok(())
}

fn read_flight_table(path: Option<&Path>) -> Result<Vec<FlightModeRow>, CliError> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)?,
        None => BUNDLED_TABLE.to_string(),
    };
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Usage(format!("flight table: {e}")))?;
        if rec.len() != 7 {
            return Err(CliError::Usage(format!("flight table row {}: expected 7 columns, got {}", i + 1, rec.len())));
        }
        let num = |j: usize| -> Result<f64, CliError> {
            rec[j].trim().parse().map_err(|_| CliError::Usage(format!("flight table row {}: bad number `{}`", i + 1, &rec[j])))
        };
        rows.push(FlightModeRow {
            name: rec[0].trim().to_string(),
            v: num(1)?,
            drag: num(2)?,
            p_gen: num(3)? * 1e3,
            ff_rate: num(4)?,
            endurance_h: num(5)?,
            range_km: num(6)?,
        });
    }
    Ok(rows)
}

fn cmd_perf(cfg: &RunConfig, what: PerfCommand, out: &Path) -> Result<(), CliError> {
    let pc: &PerfConfig = &cfg.perf;
    let env: &Environment = &cfg.environment;
    pc.validate()?;
    let summary: Value = match what {
        PerfCommand::Table => {
            let rows = perf::flight_mode_table(pc, env, &perf::reference_speeds())?;
            let mut t = Table::new(["mode", "v", "drag", "p_gen", "ff_rate", "endurance_h", "range_km"]);
            for r in &rows {
                t.push(vec![
                    r.name.as_str().into(),
                    r.v.into(),
                    r.drag.into(),
                    r.p_gen.into(),
                    r.ff_rate.into(),
                    r.endurance_h.into(),
                    r.range_km.into(),
                ]);
            }
            let (csv_path, _) = t.write(out, "flight_modes")?;
            let ledger = perf::mass_ledger_check(&cfg.mass_ledger)?;
            json!({
                "csv": csv_path.display().to_string(),
                "flight_modes": t.to_json(),
                "v_max": perf::solve_v_max(pc)?,
                "mass_ledger": ledger,
                "known_discrepancies": perf::KNOWN_DISCREPANCIES,
            })
        }
        PerfCommand::SweepDl { min, max, step } => {
            let pts = perf::disk_loading_sweep(pc, env, min, max, step)?;
            let mut t = Table::new(["dl", "generator_power", "motor_power_healthy", "motor_power_failed"]);
            for p in &pts {
                t.push(vec![p.dl.into(), p.generator_power.into(), p.motor_power_healthy.into(), p.motor_power_failed.into()]);
            }
            let (csv_path, _) = t.write(out, "sweep_dl")?;
            json!({
                "csv": csv_path.display().to_string(),
                "points": pts.len(),
                "load_factor": pc.takeoff_load_factor,
                "motor_peak": pc.motor_peak,
                "failed_motor_within_peak": pts.iter().all(|p| p.motor_power_failed <= pc.motor_peak),
            })
        }
        PerfCommand::Roc { v_min, v_max, v_step } => {
            if !(v_min > 0.0 && v_max >= v_min && v_step > 0.0) {
                return Err(CliError::Usage(format!("bad speed range: min {v_min}, max {v_max}, step {v_step}")));
            }
            let n = ((v_max - v_min) / v_step + 1e-9).floor() as usize;
            let speeds: Vec<f64> = (0..=n).map(|i| v_min + i as f64 * v_step).collect();
            let curve = perf::roc_curve(pc, env, &speeds)?;
            let mut t = Table::new(["v", "rate_of_climb"]);
            for (v, r) in &curve {
                t.push(vec![(*v).into(), (*r).into()]);
            }
            let (csv_path, _) = t.write(out, "roc")?;
            let (v_best, roc_max) = perf::max_rate_of_climb(pc, env)?;
            json!({
                "csv": csv_path.display().to_string(),
                "roc_max": roc_max,
                "v_at_roc_max": v_best,
                "v_max": perf::solve_v_max(pc)?,
                "known_discrepancies": perf::KNOWN_DISCREPANCIES,
            })
        }
        PerfCommand::Calibrate { table } => {
            let rows = read_flight_table(table.as_deref())?;
            let cal = perf::calibrate_from_table(&rows, pc.fuel_mass)?;
            let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.is_forward()).map(|r| (r.v, r.drag)).collect();
            let polar = perf::fit_drag_polar(&pts)?;
            json!({
                "eta": cal.eta,
                "sfc": cal.sfc,
                "a_par": polar.a_par,
                "b_ind": polar.b_ind,
                "eta_per_row": cal.eta_per_row,
                "sfc_per_row": cal.sfc_per_row,
                "sfc_excluded": cal.sfc_excluded,
                "endurance_checks": cal.endurance,
            })
        }
    };
    let summary = round_json(summary);
    write_json(out, "summary.json", &summary)?;
    emit(&summary);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_notation() {
        assert_eq!(parse_complex("-0.5+0.2i").unwrap(), Complex64::new(-0.5, 0.2));
        assert_eq!(parse_complex("-0.5-0.2i").unwrap(), Complex64::new(-0.5, -0.2));
        assert_eq!(parse_complex("-1").unwrap(), Complex64::new(-1.0, 0.0));
        assert_eq!(parse_complex("2j").unwrap(), Complex64::new(0.0, 2.0));
        assert_eq!(parse_complex("-i").unwrap(), Complex64::new(0.0, -1.0));
        assert_eq!(parse_complex("1e-3-2e-1i").unwrap(), Complex64::new(1e-3, -0.2));
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("1+2").is_err());
    }

    #[test]
    fn bundled_table_parses() {
        let rows = read_flight_table(None).unwrap();
        assert_eq!(rows, perf::reference_flight_modes());
    }
}
