use std::io::Write;
use std::path::PathBuf;

use biphoton::bell::{angle_eq, chsh_s, visibility, BellRecord, ChshAngles};
use biphoton::calibration::{chi2_effective, power_fit, pump_params, Crystal};
use biphoton::measures::{compute_measures, report_with_uncertainty, Measures, MeasuresReport};
use biphoton::mle::{mle_fit, MleOptions};
use biphoton::polarization::standard_settings;
use biphoton::qmatrix::{ComplexMatrix, DensityMatrix};
use biphoton::simulator::{
    bell_records, chsh_angle_grid, expected_records, poisson, sample_counts, spdc_state, BellModel,
    DetectorModel, PumpState,
};
use biphoton::tomography::{linear_reconstruct, TomographyInput};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::error::CliError;
use crate::io;

#[derive(Debug, Parser)]
#[command(
    name = "biphoton",
    version,
    about = "Two-photon polarization tomography and Bell analysis"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Linear and maximum-likelihood reconstruction from a 16-row tomography CSV.
    Tomo(TomoArgs),
    /// Entanglement measures and entropies with Monte-Carlo uncertainties.
    Measures(MeasuresArgs),
    /// CHSH parameter or fringe visibilities from a Bell-scan CSV.
    Bell(BellArgs),
    /// Synthetic tomography, Bell-scan or power-scan tables.
    Simulate(SimulateArgs),
    /// Pump parameters from a four-setting scan and/or a power-scan fit.
    Calibrate(CalibrateArgs),
}

#[derive(Debug, Args)]
pub struct TomoArgs {
    /// Tomography CSV.
    pub input: PathBuf,
    /// Keep accidental coincidences in the rates.
    #[arg(long)]
    pub no_subtract_accidentals: bool,
    #[arg(long, default_value_t = 50_000)]
    pub max_iter: usize,
    /// Also write the maximum-likelihood ρ in matrix text form.
    #[arg(long)]
    pub rho_out: Option<PathBuf>,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MeasuresArgs {
    /// Tomography CSV.
    #[arg(long, conflicts_with = "rho", required_unless_present = "rho")]
    pub input: Option<PathBuf>,
    /// Density matrix in matrix text form.
    #[arg(long)]
    pub rho: Option<PathBuf>,
    /// Resampled fits for uncertainties; 0 disables them.
    #[arg(long, default_value_t = 200)]
    pub mc_trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub no_subtract_accidentals: bool,
    #[arg(long, default_value_t = 50_000)]
    pub max_iter: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BellArgs {
    /// Bell-scan CSV.
    pub input: PathBuf,
    /// Treat consecutive groups of four rows as visibility measurements.
    #[arg(long)]
    pub visibility: bool,
    /// File angles playing the roles a,a',b,b' (degrees).
    #[arg(long, default_value = "-45,0,-22.5,22.5", allow_hyphen_values = true)]
    pub layout: String,
    #[arg(long)]
    pub no_subtract_accidentals: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Table {
    Tomo,
    Bell,
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NamedState {
    PhiPlus,
    PhiMinus,
    Hh,
    Vv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Quantum,
    Hvt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Noise {
    None,
    Poisson,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "tomo")]
    pub table: Table,
    /// Named pump state; overridden by --theta-p/--phi.
    #[arg(long, value_enum, default_value = "phi-plus")]
    pub state: NamedState,
    /// Pump polarization angle, degrees.
    #[arg(long, requires = "phi", allow_hyphen_values = true)]
    pub theta_p: Option<f64>,
    /// Pump phase, degrees.
    #[arg(long, requires = "theta_p", allow_hyphen_values = true)]
    pub phi: Option<f64>,
    /// Coincidence model for Bell scans.
    #[arg(long, value_enum, default_value = "quantum")]
    pub model: Model,
    /// Pair flux 𝒩 in detections per second.
    #[arg(long, default_value_t = 1e6)]
    pub n_flux: f64,
    #[arg(long, value_enum, default_value = "none")]
    pub noise: Noise,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Integration time per setting, s.
    #[arg(long, default_value_t = 1.0)]
    pub t_s: f64,
    /// Coincidence window, s.
    #[arg(long, default_value_t = 0.0)]
    pub tau_s: f64,
    #[arg(long, default_value_t = 0.0)]
    pub singles_a: f64,
    #[arg(long, default_value_t = 0.0)]
    pub singles_b: f64,
    /// Angles a,a',b,b' for Bell scans.
    #[arg(long, default_value = "-45,0,-22.5,22.5", allow_hyphen_values = true)]
    pub layout: String,
    /// Power-scan slope, cps per mW.
    #[arg(long, default_value_t = 1.0)]
    pub slope: f64,
    /// Power-scan intercept, cps.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub intercept: f64,
    /// Comma-separated pump powers for power scans, mW.
    #[arg(long, default_value = "10,20,30,40,50,60,70,80,90,100")]
    pub powers: String,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Bell-scan CSV containing (0,0), (90,90), (45,45), (0,90) and (90,0).
    #[arg(long, required_unless_present = "power")]
    pub pump: Option<PathBuf>,
    /// Power-scan CSV with columns power_mw,cc_rate_cps.
    #[arg(long)]
    pub power: Option<PathBuf>,
    /// Crystal length, m; with the other crystal flags enables χ_eff.
    #[arg(long, requires_all = ["mode_area", "n_pump", "n_spdc", "pump_wavelength_nm"])]
    pub crystal_length: Option<f64>,
    /// Down-converted mode area, m².
    #[arg(long)]
    pub mode_area: Option<f64>,
    #[arg(long)]
    pub n_pump: Option<f64>,
    #[arg(long)]
    pub n_spdc: Option<f64>,
    #[arg(long)]
    pub pump_wavelength_nm: Option<f64>,
    /// Pulse duration over repetition period.
    #[arg(long, default_value_t = 1.0)]
    pub duty: f64,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Runs one subcommand, writing its report to `--output` or to `stdout`.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Tomo(a) => {
            let report = cmd_tomo(&a)?;
            emit_json(&report, a.output.as_ref(), stdout)
        }
        Command::Measures(a) => {
            let report = cmd_measures(&a)?;
            emit_json(&report, a.output.as_ref(), stdout)
        }
        Command::Bell(a) => {
            let report = cmd_bell(&a)?;
            emit_json(&report, a.output.as_ref(), stdout)
        }
        Command::Simulate(a) => {
            let csv = cmd_simulate(&a)?;
            emit_bytes(&csv, a.output.as_ref(), stdout)
        }
        Command::Calibrate(a) => {
            let report = cmd_calibrate(&a)?;
            emit_json(&report, a.output.as_ref(), stdout)
        }
    }
}

fn emit_bytes(
    bytes: &[u8],
    path: Option<&PathBuf>,
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    match path {
        Some(p) => {
            std::fs::write(p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        None => stdout
            .write_all(bytes)
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn emit_json(v: &Value, path: Option<&PathBuf>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
    text.push('\n');
    emit_bytes(text.as_bytes(), path, stdout)
}

/// `{"re": [[…]], "im": [[…]]}`.
pub fn matrix_json(m: &ComplexMatrix) -> Value {
    let block = |f: fn(&num_complex::Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..m.dim())
            .map(|i| (0..m.dim()).map(|j| f(&m[(i, j)])).collect())
            .collect()
    };
    json!({ "re": block(|z| z.re), "im": block(|z| z.im) })
}

pub fn cmd_tomo(a: &TomoArgs) -> Result<Value, CliError> {
    let subtract = !a.no_subtract_accidentals;
    let input = TomographyInput::new(io::read_tomography(&a.input)?, subtract)?;
    let lin = linear_reconstruct(&input)?;
    let options = MleOptions {
        max_iter: a.max_iter,
        ..MleOptions::default()
    };
    let fit = mle_fit(&input, &options)?.into_converged()?;
    if let Some(p) = &a.rho_out {
        std::fs::write(p, io::format_matrix(fit.rho.matrix()) + "\n")
            .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
    }
    Ok(json!({
        "accidentals_subtracted": subtract,
        "n_norm": lin.n_norm,
        "linear": {
            "rho": matrix_json(lin.rho.matrix()),
            "eigenvalues": lin.eigenvalues,
            "physicality": lin.physicality,
        },
        "mle": {
            "rho": matrix_json(fit.rho.matrix()),
            "eigenvalues": fit.rho.eigenvalues(),
            "physicality": fit.rho.physicality(),
            "likelihood": fit.likelihood_value,
            "iterations": fit.iterations,
            "converged": fit.converged,
            "params": fit.z_opt.0,
        },
    }))
}

/// Flat document: each measure, `<name>_mean` and `<name>_std` when
/// uncertainties were computed, and trial bookkeeping.
pub fn measures_json(report: &MeasuresReport, source: &str) -> Value {
    let mut map = Map::new();
    map.insert("source".into(), json!(source));
    let values = report.values.to_array();
    let mean = report.mean.map(|m| m.to_array());
    let std = report.std_dev.map(|m| m.to_array());
    for (i, name) in Measures::NAMES.iter().enumerate() {
        map.insert((*name).into(), json!(values[i]));
        if let (Some(mean), Some(std)) = (mean, std) {
            map.insert(format!("{name}_mean"), json!(mean[i]));
            map.insert(format!("{name}_std"), json!(std[i]));
        }
    }
    if report.std_dev.is_some() {
        map.insert("trials_used".into(), json!(report.trials_used));
        map.insert("trials_dropped".into(), json!(report.trials_dropped));
    }
    Value::Object(map)
}

pub fn cmd_measures(a: &MeasuresArgs) -> Result<Value, CliError> {
    if let Some(p) = &a.rho {
        let rho: DensityMatrix = io::read_density_matrix(p)?;
        let report = MeasuresReport::without_uncertainty(compute_measures(&rho)?);
        return Ok(measures_json(&report, "rho"));
    }
    let path = a
        .input
        .as_ref()
        .ok_or_else(|| CliError::Usage("one of --input or --rho is required".into()))?;
    let input = TomographyInput::new(io::read_tomography(path)?, !a.no_subtract_accidentals)?;
    let options = MleOptions {
        max_iter: a.max_iter,
        ..MleOptions::default()
    };
    let report = if a.mc_trials == 0 {
        let fit = mle_fit(&input, &options)?.into_converged()?;
        MeasuresReport::without_uncertainty(compute_measures(&fit.rho)?)
    } else {
        report_with_uncertainty(&input, a.mc_trials, a.seed, &options)?
    };
    Ok(measures_json(&report, "mle"))
}

/// Parses `a,a',b,b'`.
pub fn parse_layout(s: &str) -> Result<ChshAngles, CliError> {
    let v: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    match v.as_deref() {
        Ok(&[a, a_prime, b, b_prime]) if [a, a_prime, b, b_prime].iter().all(|x| x.is_finite()) => {
            Ok(ChshAngles {
                a,
                a_prime,
                b,
                b_prime,
            })
        }
        _ => Err(CliError::Usage(format!(
            "layout `{s}` must be four comma-separated angles a,a',b,b'"
        ))),
    }
}

fn basis_name(records: &[BellRecord]) -> String {
    let first = records[0].theta_a;
    if angle_eq(first, 0.0) || angle_eq(first, 90.0) {
        "HV".into()
    } else if angle_eq(first, 45.0) || angle_eq(first, 135.0) {
        "DA".into()
    } else {
        format!("{first}/{}", first + 90.0)
    }
}

pub fn cmd_bell(a: &BellArgs) -> Result<Value, CliError> {
    let records = io::read_bell(&a.input)?;
    if a.visibility {
        if records.is_empty() || records.len() % 4 != 0 {
            return Err(CliError::Core(biphoton::Error::RecordCount {
                expected: 4 * records.len().div_ceil(4).max(1),
                got: records.len(),
            }));
        }
        let groups = records
            .chunks(4)
            .map(|g| {
                Ok(json!({
                    "basis": basis_name(g),
                    "visibility": visibility(g)?,
                }))
            })
            .collect::<Result<Vec<Value>, biphoton::Error>>()?;
        return Ok(json!({ "visibilities": groups }));
    }
    let angles = parse_layout(&a.layout)?;
    let result = chsh_s(&records, &angles, !a.no_subtract_accidentals)?;
    let mut v = serde_json::to_value(&result).map_err(|e| CliError::Io(e.to_string()))?;
    v["angles"] = json!(angles);
    Ok(v)
}

fn parse_powers(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|p| p.is_finite() && *p >= 0.0)
                .ok_or_else(|| CliError::Usage(format!("bad power value `{t}`")))
        })
        .collect()
}

fn pump_state(a: &SimulateArgs) -> PumpState {
    match (a.theta_p, a.phi) {
        (Some(theta_p), Some(phi)) => PumpState { theta_p, phi },
        _ => match a.state {
            NamedState::PhiPlus => PumpState::bell(),
            NamedState::PhiMinus => PumpState {
                theta_p: 45.0,
                phi: 180.0,
            },
            NamedState::Hh => PumpState {
                theta_p: 0.0,
                phi: 0.0,
            },
            NamedState::Vv => PumpState {
                theta_p: 90.0,
                phi: 0.0,
            },
        },
    }
}

/// CSV bytes in the ingestion schema of the selected table.
pub fn cmd_simulate(a: &SimulateArgs) -> Result<Vec<u8>, CliError> {
    let d = DetectorModel {
        n_flux: a.n_flux,
        window_tau: a.tau_s,
        integration_t: a.t_s,
        singles_a: a.singles_a,
        singles_b: a.singles_b,
    };
    let pump = pump_state(a);
    for (name, v) in [("theta-p", pump.theta_p), ("phi", pump.phi)] {
        if !v.is_finite() {
            return Err(CliError::Usage(format!("--{name} must be finite")));
        }
    }
    let noisy = a.noise == Noise::Poisson;
    let mut out = Vec::new();
    match a.table {
        Table::Tomo => {
            if a.model == Model::Hvt {
                return Err(CliError::Usage(
                    "the hidden-variable model only produces Bell scans".into(),
                ));
            }
            let rho = spdc_state(&pump);
            let settings = standard_settings();
            let records = if noisy {
                sample_counts(&rho, &settings, &d, a.seed)?
            } else {
                expected_records(&rho, &settings, &d)?
            };
            io::write_tomography(&records, &mut out)?;
        }
        Table::Bell => {
            let l = parse_layout(&a.layout)?;
            let model = match a.model {
                Model::Quantum => BellModel::Quantum(pump),
                Model::Hvt => BellModel::HiddenVariable,
            };
            let grid = chsh_angle_grid(l.a, l.a_prime, l.b, l.b_prime);
            let records = bell_records(&model, &grid, &d, noisy.then_some(a.seed))?;
            io::write_bell(&records, &mut out)?;
        }
        Table::Power => {
            let powers = parse_powers(&a.powers)?;
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let points: Vec<(f64, f64)> = powers
                .iter()
                .map(|&p| {
                    let mean = (a.slope * p + a.intercept).max(0.0);
                    let rate = if noisy {
                        poisson(&mut rng, mean * a.t_s) / a.t_s
                    } else {
                        mean
                    };
                    (p, rate)
                })
                .collect();
            io::write_power(&points, &mut out)?;
        }
    }
    Ok(out)
}

fn rate_at(records: &[BellRecord], ta: f64, tb: f64) -> Result<f64, CliError> {
    records
        .iter()
        .find(|r| angle_eq(r.theta_a, ta) && angle_eq(r.theta_b, tb))
        .map(|r| r.n_c)
        .ok_or(CliError::Core(biphoton::Error::MissingCombination(ta, tb)))
}

pub fn cmd_calibrate(a: &CalibrateArgs) -> Result<Value, CliError> {
    let mut report = Map::new();
    if let Some(p) = &a.pump {
        let r = io::read_bell(p)?;
        let fit = pump_params(
            rate_at(&r, 0.0, 0.0)?,
            rate_at(&r, 90.0, 90.0)?,
            rate_at(&r, 45.0, 45.0)?,
            rate_at(&r, 0.0, 90.0)?,
            rate_at(&r, 90.0, 0.0)?,
        )?;
        report.insert("pump".into(), json!(fit));
    }
    if let Some(p) = &a.power {
        let fit = power_fit(&io::read_power(p)?)?;
        report.insert("power".into(), json!(fit));
        if let (Some(length), Some(area), Some(n_pump), Some(n_spdc), Some(lambda)) = (
            a.crystal_length,
            a.mode_area,
            a.n_pump,
            a.n_spdc,
            a.pump_wavelength_nm,
        ) {
            let crystal = Crystal {
                length,
                area,
                n_pump,
                n_spdc,
                omega_pump: 2.0 * std::f64::consts::PI * 299_792_458.0 / (lambda * 1e-9),
                duty: a.duty,
            };
            report.insert(
                "chi2_effective".into(),
                json!(chi2_effective(fit.slope_alpha, &crystal)?),
            );
        }
    }
    Ok(Value::Object(report))
}
