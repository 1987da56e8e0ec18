//! Uniform linear array geometry, steering vectors and the link budget.
//!
//! Angles are measured from the array axis and live in `[0, pi]`. Element
//! phases are referenced to the array centre, so entry `n` of the steering
//! vector carries the phase `((N - 1) / 2 - n) * 2 pi (d / lambda) cos(theta)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub const BOLTZMANN: f64 = 1.380649e-23;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Below this magnitude `sin(x)` is treated as zero in Dirichlet ratios.
pub const SINGULAR_TOL: f64 = 1e-12;

/// Transmit array and RF front-end description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    pub n_antennas: usize,
    /// Element spacing over wavelength, `d / lambda`.
    pub spacing_ratio: f64,
    pub n_rf: usize,
    /// Phase-shifter resolution; the analog codebook has `2^phase_bits` angles.
    pub phase_bits: u32,
    /// Antennas per on/off switching group.
    pub group_size: usize,
}

impl ArrayConfig {
    /// Half-wavelength ULA with one RF chain, 8-bit phase shifters and a single
    /// switching group.
    pub fn ula(n_antennas: usize) -> Result<Self> {
        let cfg = ArrayConfig {
            n_antennas,
            spacing_ratio: 0.5,
            n_rf: 1,
            phase_bits: 8,
            group_size: n_antennas,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_rf(mut self, n_rf: usize, phase_bits: u32, group_size: usize) -> Result<Self> {
        self.n_rf = n_rf;
        self.phase_bits = phase_bits;
        self.group_size = group_size;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_antennas < 2 {
            return bad(format!("n_antennas must be >= 2, got {}", self.n_antennas));
        }
        if !(self.spacing_ratio > 0.0 && self.spacing_ratio <= 0.5) {
            return bad(format!(
                "spacing_ratio must lie in (0, 0.5], got {}",
                self.spacing_ratio
            ));
        }
        if self.n_rf == 0 || self.n_rf > self.n_antennas {
            return bad(format!(
                "n_rf must lie in [1, n_antennas], got {}",
                self.n_rf
            ));
        }
        if self.phase_bits == 0 || self.phase_bits > 24 {
            return bad(format!(
                "phase_bits must lie in [1, 24], got {}",
                self.phase_bits
            ));
        }
        if self.group_size == 0 || !self.n_antennas.is_multiple_of(self.group_size) {
            return bad(format!(
                "group_size {} must divide n_antennas {}",
                self.group_size, self.n_antennas
            ));
        }
        Ok(())
    }

    /// Number of switching groups, `N_T / N_g`.
    pub fn n_groups(&self) -> usize {
        self.n_antennas / self.group_size
    }
}

/// Phase of element `n` for direction cosine `cos_theta`.
#[inline]
pub fn element_phase(n_antennas: usize, spacing_ratio: f64, n: usize, cos_theta: f64) -> f64 {
    ((n_antennas as f64 - 1.0) / 2.0 - n as f64) * 2.0 * PI * spacing_ratio * cos_theta
}

/// Array response for an arbitrary real angle; no range check.
///
/// The analog codebook samples angles over `[0, 2 pi)`, which is why this
/// variant exists alongside [`steering_vector`].
pub fn array_response(n_antennas: usize, spacing_ratio: f64, theta: f64) -> Vec<Complex64> {
    let c = theta.cos();
    (0..n_antennas)
        .map(|n| Complex64::from_polar(1.0, element_phase(n_antennas, spacing_ratio, n, c)))
        .collect()
}

/// Phasors `exp(j ((N-1)/2 - n) 2 pi (d/lambda) delta)` for a direction-cosine
/// difference `delta = cos(theta) - cos(theta_rx)`.
pub fn difference_phasors(n_antennas: usize, spacing_ratio: f64, delta: f64) -> Vec<Complex64> {
    (0..n_antennas)
        .map(|n| Complex64::from_polar(1.0, element_phase(n_antennas, spacing_ratio, n, delta)))
        .collect()
}

/// Array response vector `a(theta)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SteeringVector {
    pub entries: Vec<Complex64>,
    pub angle: f64,
}

impl SteeringVector {
    /// `a(theta)^H w`.
    pub fn response(&self, w: &[Complex64]) -> Complex64 {
        crate::linalg::inner(&self.entries, w)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }
}

pub fn check_angle(theta: f64) -> Result<()> {
    if (0.0..=PI).contains(&theta) {
        Ok(())
    } else {
        Err(Error::InvalidAngle(theta))
    }
}

pub fn steering_vector(cfg: &ArrayConfig, theta: f64) -> Result<SteeringVector> {
    check_angle(theta)?;
    Ok(SteeringVector {
        entries: array_response(cfg.n_antennas, cfg.spacing_ratio, theta),
        angle: theta,
    })
}

/// `sin(n x) / sin(x)`, with the removable singularity at `x = k pi` replaced
/// by its limit `n (-1)^(k (n-1))`.
pub fn dirichlet(n: usize, x: f64) -> f64 {
    let s = x.sin();
    if s.abs() < SINGULAR_TOL {
        let nf = n as f64;
        // L'Hopital: n cos(n x) / cos(x), exact at x = k pi.
        nf * (nf * x).cos() / x.cos()
    } else {
        (n as f64 * x).sin() / s
    }
}

/// Closed form of `a(theta1)^H a(theta2)`, i.e.
/// `sin(N pi (d/lambda) delta) / sin(pi (d/lambda) delta)` with
/// `delta = cos(theta2) - cos(theta1)`.
pub fn array_factor(cfg: &ArrayConfig, theta1: f64, theta2: f64) -> f64 {
    let delta = theta2.cos() - theta1.cos();
    dirichlet(cfg.n_antennas, PI * cfg.spacing_ratio * delta)
}

/// Squared array factor `u(theta)` of the conventional beam steered at `theta_rx`.
pub fn pattern_u(cfg: &ArrayConfig, theta: f64, theta_rx: f64) -> f64 {
    array_factor(cfg, theta_rx, theta).powi(2)
}

/// Direct/reflected two-ray interference over a road surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoRayGain {
    pub tx_height: f64,
    pub rx_height: f64,
    pub distance: f64,
    pub wavelength: f64,
    /// Phase between the direct and the reflected ray, `(2 pi / lambda) 2 h_t h_r / D`.
    pub phase_offset: f64,
    /// Power gain `|1 - exp(j omega)|^2 = 4 sin^2(omega / 2)`.
    pub gain_factor: f64,
}

pub fn two_ray_gain(h_t: f64, h_r: f64, distance: f64, wavelength: f64) -> Result<TwoRayGain> {
    for (name, v) in [
        ("tx_height", h_t),
        ("rx_height", h_r),
        ("distance", distance),
        ("wavelength", wavelength),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidGeometry(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    let phase_offset = 2.0 * PI / wavelength * (2.0 * h_t * h_r / distance);
    let gain_factor = 4.0 * (phase_offset / 2.0).sin().powi(2);
    Ok(TwoRayGain {
        tx_height: h_t,
        rx_height: h_r,
        distance,
        wavelength,
        phase_offset,
        gain_factor,
    })
}

/// Exponent-2 free-space loss `(lambda / (4 pi D))^2`.
pub fn free_space_path_loss(distance: f64, wavelength: f64) -> Result<f64> {
    if !(distance > 0.0) || !(wavelength > 0.0) {
        return Err(Error::InvalidGeometry(format!(
            "distance and wavelength must be positive, got {distance} and {wavelength}"
        )));
    }
    Ok((wavelength / (4.0 * PI * distance)).powi(2))
}

/// Thermal noise floor `k_B T B NF` in watts.
pub fn thermal_noise_power(bandwidth_hz: f64, temperature_k: f64, noise_figure_db: f64) -> f64 {
    BOLTZMANN * temperature_k * bandwidth_hz * db_to_linear(noise_figure_db)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

/// Small-scale gain model of the eavesdropper link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EvGainModel {
    Fixed(Complex64),
    /// `g_E ~ CN(0, 1)`.
    CircularGaussianUnit,
}

impl EvGainModel {
    /// `|g_E|^2` used by the closed-form expressions.
    pub fn analytic_power(&self) -> f64 {
        match self {
            EvGainModel::Fixed(g) => g.norm_sqr(),
            EvGainModel::CircularGaussianUnit => 1.0,
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        match self {
            EvGainModel::Fixed(g) => *g,
            EvGainModel::CircularGaussianUnit => {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
            }
        }
    }
}

/// Link budget of the receiver and eavesdropper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    /// Transmit power `P` in watts.
    pub tx_power: f64,
    pub path_loss_rx: f64,
    pub path_loss_ev: f64,
    pub noise_rx: f64,
    pub noise_ev: f64,
    pub n_rx_antennas: usize,
    pub n_ev_antennas: usize,
    pub theta_rx: f64,
    pub rx_gain: Complex64,
    pub ev_gain: EvGainModel,
}

/// Carrier and geometry of the vehicular reference link.
pub mod vehicular {
    pub const CARRIER_HZ: f64 = 60e9;
    pub const BANDWIDTH_HZ: f64 = 50e6;
    pub const TX_POWER_DBM: f64 = 37.0;
    pub const RX_DISTANCE_M: f64 = 50.0;
    pub const EV_DISTANCE_M: f64 = 10.0;
    pub const N_RX_ANTENNAS: usize = 16;
    pub const N_EV_ANTENNAS: usize = 500;
    pub const NOISE_TEMPERATURE_K: f64 = 290.0;
    pub const NOISE_FIGURE_DB: f64 = 0.0;

    pub fn wavelength() -> f64 {
        super::SPEED_OF_LIGHT / CARRIER_HZ
    }
}

impl Scenario {
    /// 60 GHz, 50 MHz, 37 dBm link with the receiver at 50 m and the
    /// eavesdropper at 10 m, free-space exponent-2 losses and a thermal noise
    /// floor at 290 K.
    pub fn vehicular(theta_rx: f64) -> Result<Self> {
        use vehicular::*;
        let lambda = wavelength();
        let noise = thermal_noise_power(BANDWIDTH_HZ, NOISE_TEMPERATURE_K, NOISE_FIGURE_DB);
        let scn = Scenario {
            tx_power: dbm_to_watts(TX_POWER_DBM),
            path_loss_rx: free_space_path_loss(RX_DISTANCE_M, lambda)?,
            path_loss_ev: free_space_path_loss(EV_DISTANCE_M, lambda)?,
            noise_rx: noise,
            noise_ev: noise,
            n_rx_antennas: N_RX_ANTENNAS,
            n_ev_antennas: N_EV_ANTENNAS,
            theta_rx,
            rx_gain: Complex64::new(1.0, 0.0),
            ev_gain: EvGainModel::CircularGaussianUnit,
        };
        scn.validate()?;
        Ok(scn)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        for (name, v) in [
            ("tx_power", self.tx_power),
            ("noise_rx", self.noise_rx),
            ("noise_ev", self.noise_ev),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        for (name, v) in [
            ("path_loss_rx", self.path_loss_rx),
            ("path_loss_ev", self.path_loss_ev),
        ] {
            if !(v > 0.0 && v <= 1.0) {
                return bad(format!("{name} must lie in (0, 1], got {v}"));
            }
        }
        if self.n_rx_antennas == 0 || self.n_ev_antennas == 0 {
            return bad("antenna counts must be positive".into());
        }
        if !(self.theta_rx > 0.0 && self.theta_rx < PI) {
            return bad(format!(
                "theta_rx must lie in (0, pi), got {}",
                self.theta_rx
            ));
        }
        Ok(())
    }

    /// Multiplies the receiver path loss by a two-ray interference gain.
    pub fn with_two_ray(mut self, gain: &TwoRayGain) -> Result<Self> {
        self.path_loss_rx *= gain.gain_factor;
        self.validate()?;
        Ok(self)
    }

    /// `P alpha N_R |g|^2`, the receive power scale before array gain.
    pub fn rx_scale(&self) -> f64 {
        self.tx_power * self.path_loss_rx * self.n_rx_antennas as f64 * self.rx_gain.norm_sqr()
    }

    /// `P alpha_E N_E`, without the small-scale gain.
    pub fn ev_scale(&self) -> f64 {
        self.tx_power * self.path_loss_ev * self.n_ev_antennas as f64
    }
}
