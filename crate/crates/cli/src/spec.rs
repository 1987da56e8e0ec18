//! Experiment description as read from JSON.
//!
//! Angles are in degrees throughout this layer and converted to radians when
//! the core types are built. Unknown keys are rejected everywhere.

use std::path::PathBuf;

use mmsec_core::array::{
    dbm_to_watts, free_space_path_loss, thermal_noise_power, vehicular, SPEED_OF_LIGHT,
};
use mmsec_core::precoder::{SectorGain, SectorRole, DEFAULT_GRID_LEN};
use mmsec_core::sim::HybridRf;
use mmsec_core::{ArrayConfig, Complex64, EvGainModel, McConfig, Scenario, SectorSet};
use schemars::JsonSchema;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Free-form label copied into the run metadata.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub experiment: Experiment,
    pub array: ArraySpec,
    #[serde(default)]
    pub scenario: ScenarioSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sectors: Option<SectorSpec>,
    #[serde(default)]
    pub mc: McSpec,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<PlotSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Experiment {
    /// Far-field gains of the designed beams.
    Pattern {
        epsilon: f64,
        #[serde(default = "default_step")]
        step_deg: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hybrid: Option<HybridSpec>,
        #[serde(default = "default_grid_len")]
        design_grid_len: usize,
    },
    /// Distribution or moments of the analog far-field gain.
    Lemma1 {
        table: Lemma1Table,
        m: Vec<usize>,
        theta_deg: Vec<f64>,
        #[serde(default = "default_cdf_points")]
        cdf_points: usize,
    },
    SweepTheta {
        technique: Technique,
        theta_deg: AngleGrid,
    },
    /// Analog rate averaged over `theta_deg`, per subset size.
    SweepM { m: Vec<usize>, theta_deg: AngleGrid },
    SweepEps {
        theta_deg: f64,
        epsilon: AngleGrid,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hybrid: Option<HybridSpec>,
        #[serde(default = "default_grid_len")]
        design_grid_len: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c0: Option<f64>,
    },
    /// OMP residual against the number of RF chains.
    Codebook {
        target: CodebookTarget,
        n_rf: Vec<usize>,
        #[serde(default = "default_grid_len")]
        design_grid_len: usize,
    },
    Multisector {
        beams: Vec<BeamSector>,
        #[serde(default = "default_step")]
        step_deg: f64,
        #[serde(default = "default_grid_len")]
        design_grid_len: usize,
        /// Independent random patterns to draw.
        #[serde(default = "default_draws")]
        draws: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hybrid: Option<HybridSpec>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Lemma1Table {
    Cdf,
    Moments,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum CodebookTarget {
    Data,
    Noise,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Technique {
    /// Random-subset analog beamforming; also simulates `M = N_T`.
    Analog { m: usize },
    /// Matched filter plus null-space artificial noise.
    ArtificialNoise {
        epsilon: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        hybrid: Option<HybridSpec>,
        #[serde(default = "default_grid_len")]
        design_grid_len: usize,
    },
}

/// Factorize through the RF dictionary with the array's `n_rf`, `phase_bits`
/// and `group_size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct HybridSpec {
    #[serde(default = "default_true")]
    pub switching: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct BeamSector {
    pub lo_deg: f64,
    pub hi_deg: f64,
    pub alpha: f64,
    pub role: Role,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Receiver,
    Eavesdropper,
}

/// Explicit values or an inclusive `start:step:stop` range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(untagged)]
pub enum AngleGrid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl AngleGrid {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        match self {
            AngleGrid::List(v) => Ok(v.clone()),
            &AngleGrid::Range { start, stop, step } => {
                if !(step > 0.0) || !(stop >= start) {
                    return Err(CliError::config(
                        "range",
                        format!("need step > 0 and stop >= start, got {start}:{step}:{stop}"),
                    ));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                // Rounded so that 0.05 + 2 * 0.05 prints as 0.15.
                Ok((0..=n)
                    .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
                    .collect())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ArraySpec {
    pub n_antennas: usize,
    #[serde(default = "default_spacing")]
    pub spacing_ratio: f64,
    #[serde(default = "default_one")]
    pub n_rf: usize,
    #[serde(default = "default_bits")]
    pub phase_bits: u32,
    /// Defaults to a single group spanning the array.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_size: Option<usize>,
}

impl ArraySpec {
    pub fn build(&self) -> Result<ArrayConfig, CliError> {
        let cfg = ArrayConfig {
            n_antennas: self.n_antennas,
            spacing_ratio: self.spacing_ratio,
            n_rf: self.n_rf,
            phase_bits: self.phase_bits,
            group_size: self.group_size.unwrap_or(self.n_antennas),
        };
        cfg.validate().map_err(|e| CliError::field("array", e))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum EvGainSpec {
    /// `g_E ~ CN(0, 1)`.
    Rayleigh,
    /// `g_E = 1`.
    Unit,
}

/// Free-space link budget; defaults describe the vehicular reference link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioSpec {
    pub theta_rx_deg: f64,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub rx_distance_m: f64,
    pub ev_distance_m: f64,
    pub n_rx_antennas: usize,
    pub n_ev_antennas: usize,
    pub temperature_k: f64,
    pub noise_figure_db: f64,
    pub ev_gain: EvGainSpec,
}

impl Default for ScenarioSpec {
    fn default() -> Self {
        ScenarioSpec {
            theta_rx_deg: 120.0,
            carrier_hz: vehicular::CARRIER_HZ,
            bandwidth_hz: vehicular::BANDWIDTH_HZ,
            tx_power_dbm: vehicular::TX_POWER_DBM,
            rx_distance_m: vehicular::RX_DISTANCE_M,
            ev_distance_m: vehicular::EV_DISTANCE_M,
            n_rx_antennas: vehicular::N_RX_ANTENNAS,
            n_ev_antennas: vehicular::N_EV_ANTENNAS,
            temperature_k: vehicular::NOISE_TEMPERATURE_K,
            noise_figure_db: vehicular::NOISE_FIGURE_DB,
            ev_gain: EvGainSpec::Rayleigh,
        }
    }
}

impl ScenarioSpec {
    pub fn theta_rx(&self) -> f64 {
        self.theta_rx_deg.to_radians()
    }

    pub fn build(&self) -> Result<Scenario, CliError> {
        let err = |e| CliError::field("scenario", e);
        if !(self.carrier_hz > 0.0) {
            return Err(CliError::config("scenario.carrier_hz", "must be positive"));
        }
        let lambda = SPEED_OF_LIGHT / self.carrier_hz;
        let noise =
            thermal_noise_power(self.bandwidth_hz, self.temperature_k, self.noise_figure_db);
        let scn = Scenario {
            tx_power: dbm_to_watts(self.tx_power_dbm),
            path_loss_rx: free_space_path_loss(self.rx_distance_m, lambda).map_err(err)?,
            path_loss_ev: free_space_path_loss(self.ev_distance_m, lambda).map_err(err)?,
            noise_rx: noise,
            noise_ev: noise,
            n_rx_antennas: self.n_rx_antennas,
            n_ev_antennas: self.n_ev_antennas,
            theta_rx: self.theta_rx(),
            rx_gain: Complex64::new(1.0, 0.0),
            ev_gain: match self.ev_gain {
                EvGainSpec::Rayleigh => EvGainModel::CircularGaussianUnit,
                EvGainSpec::Unit => EvGainModel::Fixed(Complex64::new(1.0, 0.0)),
            },
        };
        scn.validate().map_err(err)?;
        Ok(scn)
    }
}

/// Artificial-noise sectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SectorSpec {
    /// All directions except a one-step guard band around the receiver.
    Omni {
        #[serde(default = "default_step")]
        step_deg: f64,
    },
    /// `half_width_deg` on each side of the receiver.
    AroundReceiver {
        half_width_deg: f64,
        #[serde(default = "default_step")]
        step_deg: f64,
    },
    Intervals {
        intervals_deg: Vec<[f64; 2]>,
        #[serde(default = "default_step")]
        step_deg: f64,
    },
}

impl SectorSpec {
    pub fn build(&self, theta_rx: f64) -> Result<SectorSet, CliError> {
        let err = |e| CliError::field("sectors", e);
        match self {
            SectorSpec::Omni { step_deg } => {
                SectorSet::omnidirectional(theta_rx, step_deg.to_radians()).map_err(err)
            }
            SectorSpec::AroundReceiver {
                half_width_deg,
                step_deg,
            } => SectorSet::around_receiver(
                theta_rx,
                half_width_deg.to_radians(),
                step_deg.to_radians(),
            )
            .map_err(err),
            SectorSpec::Intervals {
                intervals_deg,
                step_deg,
            } => SectorSet::new(
                intervals_deg
                    .iter()
                    .map(|[a, b]| (a.to_radians(), b.to_radians()))
                    .collect(),
                step_deg.to_radians(),
                theta_rx,
            )
            .map_err(err),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct McSpec {
    pub n_trials: usize,
    pub seed: u64,
    /// Worker threads; the machine's parallelism when absent. Results do not
    /// depend on it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lanes: Option<usize>,
    pub symbols_per_trial: usize,
}

impl Default for McSpec {
    fn default() -> Self {
        McSpec {
            n_trials: 1000,
            seed: 1,
            lanes: None,
            symbols_per_trial: 256,
        }
    }
}

impl McSpec {
    pub fn build(&self) -> Result<McConfig, CliError> {
        let mut mc = McConfig::new(self.n_trials, self.seed).with_symbols(self.symbols_per_trial);
        if let Some(l) = self.lanes {
            mc = mc.with_lanes(l);
        }
        mc.validate().map_err(|e| CliError::field("mc", e))?;
        Ok(mc)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    /// Table destination; standard output when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct PlotSpec {
    pub path: PathBuf,
    #[serde(default)]
    pub log_y: bool,
}

pub fn hybrid_rf(cfg: &ArrayConfig, spec: Option<HybridSpec>) -> Option<HybridRf> {
    spec.map(|h| HybridRf {
        n_rf: cfg.n_rf,
        switching: h.switching,
    })
}

pub fn beam_sectors(beams: &[BeamSector]) -> Vec<SectorGain> {
    beams
        .iter()
        .map(|b| SectorGain {
            lo: b.lo_deg.to_radians(),
            hi: b.hi_deg.to_radians(),
            alpha: b.alpha,
            role: match b.role {
                Role::Receiver => SectorRole::Receiver,
                Role::Eavesdropper => SectorRole::Eavesdropper,
            },
        })
        .collect()
}

/// JSON Schema of the spec format.
pub fn schema() -> serde_json::Value {
    serde_json::to_value(schemars::schema_for!(ExperimentSpec)).expect("schemas serialize")
}

/// Parses a spec, reporting the failing field path and position.
pub fn parse(text: &str) -> Result<ExperimentSpec, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError::Config {
            field: path,
            message: format!("{inner}"),
        }
    })
}

fn default_step() -> f64 {
    1.0
}
fn default_grid_len() -> usize {
    DEFAULT_GRID_LEN
}
fn default_cdf_points() -> usize {
    201
}
fn default_draws() -> usize {
    3
}
fn default_true() -> bool {
    true
}
fn default_spacing() -> f64 {
    0.5
}
fn default_one() -> usize {
    1
}
fn default_bits() -> u32 {
    8
}
