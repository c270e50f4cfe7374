//! Experiment configuration: a TOML grammar over scenarios, sweeps, and
//! runner options, with validation that names the offending key and a stable
//! canonical serialization.

use ddl_radar_core::performance::{DetectionProtocol, SweepSpec};
use ddl_radar_core::signal_model::{ClutterComponent, Scenario, TargetDoppler};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Which experiment the runner executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    PdVsF,
    PdVsN,
    PdVsSdr,
    Thresholds,
    FitThresholds,
    LoadGain,
    FaValidate,
    RodiCompare,
}

impl ExperimentKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentKind::PdVsF => "pd_vs_f",
            ExperimentKind::PdVsN => "pd_vs_n",
            ExperimentKind::PdVsSdr => "pd_vs_sdr",
            ExperimentKind::Thresholds => "thresholds",
            ExperimentKind::FitThresholds => "fit_thresholds",
            ExperimentKind::LoadGain => "load_gain",
            ExperimentKind::FaValidate => "fa_validate",
            ExperimentKind::RodiCompare => "rodi_compare",
        }
    }

    /// Monte Carlo experiments enforce the trial floor.
    pub fn is_monte_carlo(&self) -> bool {
        matches!(
            self,
            ExperimentKind::PdVsF
                | ExperimentKind::PdVsN
                | ExperimentKind::PdVsSdr
                | ExperimentKind::FaValidate
        )
    }
}

/// Scenario block of the config file. Keys follow the conventional symbols:
/// `N` pulses, `M` range cells, `n` DDL order, `K_T`/`K` training counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(rename = "N")]
    pub pulses: usize,
    #[serde(rename = "M", default = "default_range_cells")]
    pub range_cells: usize,
    #[serde(rename = "n")]
    pub ddl_order: usize,
    /// Defaults to 5N.
    #[serde(rename = "K_T", default)]
    pub training_time: Option<usize>,
    /// Defaults to 5n.
    #[serde(rename = "K", default)]
    pub training_ddl: Option<usize>,
    #[serde(default = "default_cnr_db")]
    pub cnr_db: f64,
    pub snr_db: f64,
    #[serde(default = "default_pfa")]
    pub pfa: f64,
    #[serde(default = "default_clutter")]
    pub clutter: Vec<ClutterComponent>,
    pub target_freq: f64,
    #[serde(default = "default_true")]
    pub doppler_known: bool,
    /// Oversampling factor q, `N_fft = q N`.
    #[serde(default = "default_fft_factor")]
    pub fft_factor: usize,
    #[serde(default = "default_target_range_cell")]
    pub target_range_cell: usize,
}

fn default_range_cells() -> usize {
    24
}
fn default_cnr_db() -> f64 {
    60.0
}
fn default_pfa() -> f64 {
    1e-9
}
fn default_clutter() -> Vec<ClutterComponent> {
    vec![ClutterComponent {
        center_freq: 0.0,
        spread: 0.0025,
        power_fraction: 1.0,
    }]
}
fn default_true() -> bool {
    true
}
fn default_fft_factor() -> usize {
    4
}
fn default_target_range_cell() -> usize {
    12
}

impl ScenarioConfig {
    pub fn to_scenario(&self) -> Result<Scenario> {
        let scn = Scenario {
            pulses: self.pulses,
            range_cells: self.range_cells,
            ddl_order: self.ddl_order,
            training_time: self.training_time.unwrap_or(5 * self.pulses),
            training_ddl: self.training_ddl.unwrap_or(5 * self.ddl_order),
            cnr_db: self.cnr_db,
            snr_db: self.snr_db,
            pfa: self.pfa,
            clutter: self.clutter.clone(),
            target: if self.doppler_known {
                TargetDoppler::Known(self.target_freq)
            } else {
                TargetDoppler::Unknown(self.target_freq)
            },
            fft_factor: self.fft_factor,
            target_range_cell: self.target_range_cell,
        };
        scn.validate()?;
        Ok(scn)
    }
}

/// Sweep block: `kind` selects the abscissa, `values` enumerates it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub kind: SweepKind,
    pub values: Vec<f64>,
    /// Training scaling `K = k_factor n` for order sweeps.
    #[serde(default = "default_k_factor")]
    pub k_factor: usize,
}

fn default_k_factor() -> usize {
    5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Freq,
    Order,
    SdrDb,
}

impl SweepConfig {
    pub fn to_spec(&self) -> Result<SweepSpec> {
        if self.values.is_empty() {
            return Err(CliError::Config("sweep.values must be nonempty".into()));
        }
        Ok(match self.kind {
            SweepKind::Freq => SweepSpec::Freq(self.values.clone()),
            SweepKind::Order => SweepSpec::Order {
                values: self
                    .values
                    .iter()
                    .map(|&v| {
                        if v.fract() != 0.0 || v < 1.0 {
                            Err(CliError::Config(format!(
                                "sweep.values entry {v} is not a positive integer order"
                            )))
                        } else {
                            Ok(v as usize)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?,
                k_factor: self.k_factor,
            },
            SweepKind::SdrDb => SweepSpec::SdrDb(self.values.clone()),
        })
    }
}

/// One extra clutter setting for `fa_validate`: a mixture and an optional
/// CNR override.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaSetting {
    #[serde(default)]
    pub cnr_db: Option<f64>,
    pub clutter: Vec<ClutterComponent>,
}

/// Threshold-fit rows for the `fit_thresholds` experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitRow {
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
}

/// Full experiment configuration (one TOML document).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// Output CSV path, relative to the output directory.
    #[serde(default = "default_output")]
    pub output: String,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    /// Unknown-Doppler detection protocol: "any_entry" or "dominant_peak".
    #[serde(default = "default_protocol")]
    pub protocol: String,
    #[serde(default)]
    pub scenario: Option<ScenarioConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    /// Enables the CA-CFAR baseline curve in `pd_vs_f` runs.
    #[serde(default)]
    pub cfar: Option<crate::cfar::CaCfarConfig>,
    /// `(n, K)` rows for `fit_thresholds`; defaults to the six reference rows.
    #[serde(default)]
    pub fits: Option<Vec<FitRow>>,
    /// Extra clutter settings for `fa_validate` (the scenario's own setting
    /// always runs first).
    #[serde(default)]
    pub fa_settings: Option<Vec<FaSetting>>,
    /// Range extent and representative-cell percentage for `load_gain`.
    #[serde(default = "default_load_m")]
    pub load_range_cells: usize,
    #[serde(default = "default_load_gamma")]
    pub load_gamma_percent: f64,
}

fn default_output() -> String {
    "out.csv".into()
}
fn default_trials() -> usize {
    2000
}
fn default_protocol() -> String {
    "any_entry".into()
}
fn default_load_m() -> usize {
    8000
}
fn default_load_gamma() -> f64 {
    90.0
}

impl ExperimentConfig {
    pub fn protocol(&self) -> Result<DetectionProtocol> {
        match self.protocol.as_str() {
            "any_entry" => Ok(DetectionProtocol::AnyEntry),
            "dominant_peak" => Ok(DetectionProtocol::DominantPeak),
            other => Err(CliError::Config(format!(
                "protocol `{other}` is not one of any_entry, dominant_peak"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.protocol()?;
        if self.experiment.is_monte_carlo() && self.trials < 100 {
            return Err(CliError::Config(format!(
                "trials = {} below the Monte Carlo floor of 100",
                self.trials
            )));
        }
        match self.experiment {
            ExperimentKind::PdVsF | ExperimentKind::PdVsN | ExperimentKind::PdVsSdr => {
                let scn = self.require_scenario()?;
                scn.to_scenario()?;
                let sweep = self
                    .sweep
                    .as_ref()
                    .ok_or_else(|| CliError::Config("missing [sweep] block".into()))?;
                let spec = sweep.to_spec()?;
                let expected = match self.experiment {
                    ExperimentKind::PdVsF => SweepKind::Freq,
                    ExperimentKind::PdVsN => SweepKind::Order,
                    _ => SweepKind::SdrDb,
                };
                if sweep.kind != expected {
                    return Err(CliError::Config(format!(
                        "experiment {} needs sweep.kind = {:?}",
                        self.experiment.as_str(),
                        expected
                    )));
                }
                // every sweep point must itself be a valid scenario
                let base = scn.to_scenario()?;
                for idx in 0..spec.len() {
                    spec.scenario_at(&base, idx).validate()?;
                }
            }
            ExperimentKind::Thresholds | ExperimentKind::FaValidate | ExperimentKind::RodiCompare => {
                self.require_scenario()?.to_scenario()?;
            }
            ExperimentKind::FitThresholds => {
                for row in self.fits.clone().unwrap_or_else(default_fit_rows) {
                    if row.k <= row.n || row.n < 2 {
                        return Err(CliError::Config(format!(
                            "fit row n={} K={} needs K > n >= 2",
                            row.n, row.k
                        )));
                    }
                }
            }
            ExperimentKind::LoadGain => {
                if self.load_range_cells == 0 {
                    return Err(CliError::Config("load_range_cells must be positive".into()));
                }
                if !(self.load_gamma_percent > 0.0 && self.load_gamma_percent <= 100.0) {
                    return Err(CliError::Config(format!(
                        "load_gamma_percent {} outside (0, 100]",
                        self.load_gamma_percent
                    )));
                }
            }
        }
        if let Some(cfar) = &self.cfar {
            cfar.validate()?;
        }
        Ok(())
    }

    pub fn require_scenario(&self) -> Result<&ScenarioConfig> {
        self.scenario
            .as_ref()
            .ok_or_else(|| CliError::Config("missing [scenario] block".into()))
    }

    pub fn fit_rows(&self) -> Vec<FitRow> {
        self.fits.clone().unwrap_or_else(default_fit_rows)
    }
}

/// The six reference fit rows: n = 4 and 5 with K = 3n, 4n, 5n.
pub fn default_fit_rows() -> Vec<FitRow> {
    vec![
        FitRow { n: 4, k: 12 },
        FitRow { n: 4, k: 16 },
        FitRow { n: 4, k: 20 },
        FitRow { n: 5, k: 15 },
        FitRow { n: 5, k: 20 },
        FitRow { n: 5, k: 25 },
    ]
}

/// Parses and validates a config document.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Canonical serialization: parse-then-serialize is a fixed point.
pub fn canonical_text(cfg: &ExperimentConfig) -> Result<String> {
    toml::to_string_pretty(cfg).map_err(|e| CliError::Config(e.to_string()))
}
