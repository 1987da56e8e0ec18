//! Closed-form SNRs, secrecy rates and design bounds.
//!
//! The finite-array eavesdropper SNR treats the random part of its received
//! gain as noise. Letting its antenna count grow removes the thermal term and
//! gives the pessimistic limit `gamma_E_bar`, which turns into a lower bound
//! on the secrecy rate.

use std::f64::consts::PI;

use crate::analog::{beta_stats_closed_form, check_subset_size};
pub use crate::array::pattern_u;
use crate::array::{ArrayConfig, Scenario};
use crate::error::{Error, Result};
use crate::precoder::SectorSet;

/// SNRs and rates at one eavesdropper location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecrecyPoint {
    pub snr_rx: f64,
    /// Eavesdropper SNR with the scenario's finite antenna count.
    pub snr_ev: f64,
    /// Limit of `snr_ev` for an unbounded eavesdropper array.
    pub snr_ev_asymptotic: f64,
    /// Bits per channel use with `snr_ev`.
    pub rate: f64,
    /// Bits per channel use with `snr_ev_asymptotic`.
    pub rate_lower_bound: f64,
}

/// `[log2(1 + snr_rx) - log2(1 + snr_ev)]^+`.
pub fn secrecy_rate(snr_rx: f64, snr_ev: f64) -> f64 {
    if snr_ev.is_infinite() {
        return 0.0;
    }
    ((1.0 + snr_rx).log2() - (1.0 + snr_ev).log2()).max(0.0)
}

fn ratio(num: f64, den: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

fn check_eavesdropper_angle(scn: &Scenario, theta: f64) -> Result<()> {
    if (theta.cos() - scn.theta_rx.cos()).abs() < 1e-12 {
        Err(Error::ReceiverAngle)
    } else {
        Ok(())
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if (0.0..=1.0).contains(&epsilon) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "epsilon must lie in [0, 1], got {epsilon}"
        )))
    }
}

/// `nu(theta) = u(theta) / N_T = |a(theta)^H f_s|^2`.
pub fn pattern_nu(cfg: &ArrayConfig, theta: f64, theta_rx: f64) -> f64 {
    pattern_u(cfg, theta, theta_rx) / cfg.n_antennas as f64
}

/// `rho = P alpha N_R |g|^2 / sigma^2`.
pub fn rho(scn: &Scenario) -> f64 {
    scn.rx_scale() / scn.noise_rx
}

/// Eavesdropper power scale `P alpha_E N_E |g_E|^2`, taking `|g_E|^2 = 1`
/// for the circular-Gaussian model.
fn ev_power(scn: &Scenario) -> f64 {
    scn.ev_scale() * scn.ev_gain.analytic_power()
}

/// `gamma_R = P alpha N_R |g|^2 M^2 / (N_T sigma^2)`.
pub fn analog_snr_rx(scn: &Scenario, cfg: &ArrayConfig, m: usize) -> Result<f64> {
    check_subset_size(cfg.n_antennas, m)?;
    Ok(rho(scn) * (m * m) as f64 / cfg.n_antennas as f64)
}

/// `(gamma_E, gamma_E_bar)` of the analog technique at `theta`.
pub fn analog_snr_ev(
    scn: &Scenario,
    cfg: &ArrayConfig,
    m: usize,
    theta: f64,
) -> Result<(f64, f64)> {
    check_eavesdropper_angle(scn, theta)?;
    let stats = beta_stats_closed_form(cfg, m, theta, scn.theta_rx)?;
    let c = ev_power(scn);
    let signal = stats.mean.norm_sqr();
    let finite = ratio(c * signal, c * stats.variance + scn.noise_ev);
    let asymptotic = ratio(signal, stats.variance);
    Ok((finite, asymptotic))
}

/// `gamma_E_bar = M^2 u(theta) / (N_T (N_T^2 - M^2))`, computed from the
/// pattern directly.
pub fn analog_snr_ev_limit(cfg: &ArrayConfig, m: usize, theta: f64, theta_rx: f64) -> Result<f64> {
    check_subset_size(cfg.n_antennas, m)?;
    let (n, mf) = (cfg.n_antennas as f64, m as f64);
    Ok(ratio(
        mf * mf * pattern_u(cfg, theta, theta_rx),
        n * (n * n - mf * mf),
    ))
}

pub fn analog_secrecy_bound(
    scn: &Scenario,
    cfg: &ArrayConfig,
    m: usize,
    theta: f64,
) -> Result<SecrecyPoint> {
    let snr_rx = analog_snr_rx(scn, cfg, m)?;
    let (snr_ev, snr_ev_asymptotic) = analog_snr_ev(scn, cfg, m, theta)?;
    Ok(SecrecyPoint {
        snr_rx,
        snr_ev,
        snr_ev_asymptotic,
        rate: secrecy_rate(snr_rx, snr_ev),
        rate_lower_bound: secrecy_rate(snr_rx, snr_ev_asymptotic),
    })
}

/// Largest real `M` keeping `gamma_R > gamma_E_bar`:
/// `sqrt(N_T^2 - u(theta) / rho)`, or 0 when no subset size qualifies.
pub fn analog_subset_bound(scn: &Scenario, cfg: &ArrayConfig, theta: f64) -> f64 {
    let n = cfg.n_antennas as f64;
    let inside = n * n - pattern_u(cfg, theta, scn.theta_rx) / rho(scn);
    if inside > 0.0 {
        inside.sqrt()
    } else {
        0.0
    }
}

/// `gamma_R = P alpha eps N_R N_T |g|^2 / sigma^2`.
pub fn hybrid_snr_rx(scn: &Scenario, cfg: &ArrayConfig, epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(rho(scn) * epsilon * cfg.n_antennas as f64)
}

/// `(gamma_E, gamma_E_bar)` from the data and noise pattern gains
/// `|a(theta)^H f_s|^2` and `|a(theta)^H f_n|^2`.
pub fn hybrid_snr_ev_pattern(
    scn: &Scenario,
    epsilon: f64,
    data_gain: f64,
    noise_gain: f64,
) -> Result<(f64, f64)> {
    check_epsilon(epsilon)?;
    let c = ev_power(scn);
    let signal = epsilon * data_gain;
    let jam = (1.0 - epsilon) * noise_gain;
    Ok((
        ratio(c * signal, c * jam + scn.noise_ev),
        ratio(signal, jam),
    ))
}

/// Sector model of the noise-beam gain, `pi c_0 / mu(T)`.
pub fn sector_noise_gain(sectors: &SectorSet, c0: f64) -> Result<f64> {
    if !(c0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "c0 must be positive, got {c0}"
        )));
    }
    Ok(PI * c0 / sectors.measure())
}

/// `(gamma_E, gamma_E_bar)` of the hybrid technique with the sector model
/// for the noise-beam gain. Fails with [`Error::OutsideSector`] when `theta`
/// is not covered by `sectors`; use [`hybrid_snr_ev_pattern`] with the
/// designed beam there.
pub fn hybrid_snr_ev(
    scn: &Scenario,
    cfg: &ArrayConfig,
    epsilon: f64,
    theta: f64,
    sectors: &SectorSet,
    c0: f64,
) -> Result<(f64, f64)> {
    check_eavesdropper_angle(scn, theta)?;
    if !sectors.contains(theta) {
        return Err(Error::OutsideSector(theta));
    }
    let noise_gain = sector_noise_gain(sectors, c0)?;
    hybrid_snr_ev_pattern(
        scn,
        epsilon,
        pattern_nu(cfg, theta, scn.theta_rx),
        noise_gain,
    )
}

pub fn hybrid_secrecy_bound(
    scn: &Scenario,
    cfg: &ArrayConfig,
    epsilon: f64,
    theta: f64,
    sectors: &SectorSet,
    c0: f64,
) -> Result<SecrecyPoint> {
    let snr_rx = hybrid_snr_rx(scn, cfg, epsilon)?;
    let (snr_ev, snr_ev_asymptotic) = hybrid_snr_ev(scn, cfg, epsilon, theta, sectors, c0)?;
    Ok(SecrecyPoint {
        snr_rx,
        snr_ev,
        snr_ev_asymptotic,
        rate: secrecy_rate(snr_rx, snr_ev),
        rate_lower_bound: secrecy_rate(snr_rx, snr_ev_asymptotic),
    })
}

/// Largest power fraction keeping `gamma_R > gamma_E_bar`:
/// `1 - nu(theta) mu(T) / (zeta pi c_0)` with `zeta = rho N_T`, clamped to `[0, 1]`.
pub fn hybrid_epsilon_bound(
    scn: &Scenario,
    cfg: &ArrayConfig,
    theta: f64,
    sectors: &SectorSet,
    c0: f64,
) -> Result<f64> {
    if !(c0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "c0 must be positive, got {c0}"
        )));
    }
    let zeta = rho(scn) * cfg.n_antennas as f64;
    let nu = pattern_nu(cfg, theta, scn.theta_rx);
    Ok((1.0 - nu * sectors.measure() / (zeta * PI * c0)).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analog::{draw_partition, BetaEvaluator};
    use crate::array::EvGainModel;
    use crate::precoder::{combined_precoder, matched_filter, noise_beam};
    use num_complex::Complex64;

    fn deg(x: f64) -> f64 {
        x.to_radians()
    }

    fn cfg(n: usize) -> ArrayConfig {
        ArrayConfig::ula(n).unwrap()
    }

    fn scenario() -> Scenario {
        Scenario::vehicular(deg(120.0)).unwrap()
    }

    const STEP: f64 = PI / 180.0;

    #[test]
    fn rate_clamp_and_value() {
        assert_eq!(secrecy_rate(2.0, 2.0), 0.0);
        assert_eq!(secrecy_rate(1.0, 3.0), 0.0);
        assert!((secrecy_rate(3.0, 1.0) - 1.0).abs() < 1e-15);
        assert_eq!(secrecy_rate(3.0, f64::INFINITY), 0.0);
    }

    #[test]
    fn analog_rx_scaling() {
        let s = scenario();
        let c = cfg(32);
        let full = analog_snr_rx(&s, &c, 32).unwrap();
        assert!((full - rho(&s) * 32.0).abs() / full < 1e-12);
        let a = analog_snr_rx(&s, &c, 6).unwrap();
        let b = analog_snr_rx(&s, &c, 12).unwrap();
        assert!((b / a - 4.0).abs() < 1e-12);
        assert!(analog_snr_rx(&s, &c, 13).is_err());
    }

    #[test]
    fn analog_rx_matches_received_power() {
        let s = scenario();
        let c = cfg(32);
        let ev = BetaEvaluator::new(&c, s.theta_rx, s.theta_rx);
        let mut p = 0.0;
        for k in 0..10_000 {
            let part = draw_partition(&c, 12, 1, k).unwrap();
            p += (ev.eval_odd(&part.odd_destructive) * s.rx_scale().sqrt()).norm_sqr();
        }
        let sim = p / 10_000.0 / s.noise_rx;
        let closed = analog_snr_rx(&s, &c, 12).unwrap();
        assert!((sim / closed - 1.0).abs() < 1e-9);
    }

    #[test]
    fn analog_limit_properties() {
        let c = cfg(32);
        let s = scenario();
        // Null of the 32-element pattern: N pi (d/lambda) Delta = pi.
        let cos_null = s.theta_rx.cos() + 2.0 / 32.0;
        let theta_null = cos_null.acos();
        let (_, asym) = analog_snr_ev(&s, &c, 12, theta_null).unwrap();
        assert!(asym < 1e-20);
        let mut other = s;
        other.tx_power *= 7.0;
        other.path_loss_ev *= 0.1;
        other.n_ev_antennas = 3;
        other.noise_ev *= 100.0;
        let a = analog_snr_ev(&s, &c, 12, deg(100.0)).unwrap().1;
        let b = analog_snr_ev(&other, &c, 12, deg(100.0)).unwrap().1;
        assert!((a - b).abs() < 1e-12 * a);
        let direct = analog_snr_ev_limit(&c, 12, deg(100.0), s.theta_rx).unwrap();
        assert!((a - direct).abs() < 1e-12 * a);
        assert_eq!(
            analog_snr_ev(&s, &c, 12, s.theta_rx),
            Err(Error::ReceiverAngle)
        );
    }

    #[test]
    fn analog_finite_snr_matches_monte_carlo() {
        let c = cfg(32);
        let mut s = scenario();
        // A weak eavesdropper link keeps the thermal term visible.
        s.n_ev_antennas = 1;
        s.path_loss_ev = 1e-12;
        let theta = deg(110.0);
        let ev = BetaEvaluator::new(&c, theta, s.theta_rx);
        let n = 100_000;
        let vals: Vec<Complex64> = (0..n)
            .map(|k| ev.eval_odd(&draw_partition(&c, 12, 21, k).unwrap().odd_destructive))
            .collect();
        let mean: Complex64 = vals.iter().sum::<Complex64>() / n as f64;
        let var = vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (n - 1) as f64;
        let cp = s.ev_scale();
        let sim = cp * mean.norm_sqr() / (cp * var + s.noise_ev);
        let (finite, asym) = analog_snr_ev(&s, &c, 12, theta).unwrap();
        assert!((sim / finite - 1.0).abs() < 0.05, "{sim} vs {finite}");
        assert!(finite < asym);
    }

    #[test]
    fn analog_bound_below_rate() {
        let s = scenario();
        let c = cfg(32);
        for d in (0..=180).filter(|d| *d != 120) {
            let p = analog_secrecy_bound(&s, &c, 12, deg(d as f64)).unwrap();
            assert!(p.snr_ev <= p.snr_ev_asymptotic);
            assert!(p.rate >= p.rate_lower_bound);
            assert!(p.rate_lower_bound >= 0.0);
        }
    }

    #[test]
    fn conventional_beam_leaks_at_main_lobe() {
        let s = scenario();
        let c = cfg(32);
        let p = analog_secrecy_bound(&s, &c, 32, deg(118.0)).unwrap();
        assert!(p.snr_ev_asymptotic.is_infinite());
        assert_eq!(p.rate_lower_bound, 0.0);
    }

    #[test]
    fn subset_bound_cases() {
        let c = cfg(32);
        let s = scenario();
        let theta_null = (s.theta_rx.cos() + 2.0 / 32.0).acos();
        assert!((analog_subset_bound(&s, &c, theta_null) - 32.0).abs() < 1e-9);
        let mut quiet = s;
        quiet.noise_rx *= 1e-12;
        assert!((analog_subset_bound(&quiet, &c, deg(110.0)) - 32.0).abs() < 1e-6);
        let theta = deg(110.0);
        let bound = analog_subset_bound(&s, &c, theta);
        for m in (2..=32).step_by(2) {
            let gr = analog_snr_rx(&s, &c, m).unwrap();
            let ge = analog_snr_ev(&s, &c, m, theta).unwrap().1;
            assert_eq!((m as f64) < bound, gr > ge, "M = {m}");
        }
        let mut noisy = s;
        noisy.noise_rx *= 1e9;
        assert_eq!(analog_subset_bound(&noisy, &c, deg(121.0)), 0.0);
    }

    #[test]
    fn hybrid_rx_cases() {
        let s = scenario();
        let c = cfg(32);
        assert!((hybrid_snr_rx(&s, &c, 1.0).unwrap() - rho(&s) * 32.0).abs() < 1e-6);
        assert_eq!(hybrid_snr_rx(&s, &c, 0.0).unwrap(), 0.0);
        assert!(hybrid_snr_rx(&s, &c, 1.1).is_err());
        let fs = matched_filter(&c, s.theta_rx).unwrap();
        let t = SectorSet::omnidirectional(s.theta_rx, STEP).unwrap();
        let fnb = noise_beam(&c, s.theta_rx, &t, 360).unwrap().beam;
        let mut p = 0.0;
        for k in 0..10_000 {
            let f = combined_precoder(&fs, &fnb, 0.5, k, 8).unwrap();
            p += f.gain(&c, s.theta_rx);
        }
        let sim = s.rx_scale() * p / 10_000.0 / s.noise_rx;
        let closed = hybrid_snr_rx(&s, &c, 0.5).unwrap();
        assert!((sim / closed - 1.0).abs() < 0.02);
    }

    #[test]
    fn hybrid_ev_model_properties() {
        let s = scenario();
        let c = cfg(32);
        let t = SectorSet::around_receiver(s.theta_rx, deg(30.0), STEP).unwrap();
        let theta = deg(110.0);
        assert!(hybrid_snr_ev(&s, &c, 1e-9, theta, &t, 0.5).unwrap().1 < 1e-8);
        assert!(matches!(
            hybrid_snr_ev(&s, &c, 0.5, deg(60.0), &t, 0.5),
            Err(Error::OutsideSector(_))
        ));
        // Linear in mu(T) at fixed c0.
        let narrow = SectorSet::around_receiver(s.theta_rx, deg(15.0), STEP).unwrap();
        let a = hybrid_snr_ev(&s, &c, 0.5, theta, &t, 0.5).unwrap().1;
        let b = hybrid_snr_ev(&s, &c, 0.5, theta, &narrow, 0.5).unwrap().1;
        assert!((a / b - t.measure() / narrow.measure()).abs() < 1e-12);
    }

    #[test]
    fn hybrid_model_tracks_designed_beam() {
        let s = scenario();
        let c = cfg(32);
        let t = SectorSet::around_receiver(s.theta_rx, deg(30.0), STEP).unwrap();
        let d = noise_beam(&c, s.theta_rx, &t, 360).unwrap();
        let theta = deg(110.0);
        let model = hybrid_snr_ev(&s, &c, 0.5, theta, &t, d.c0).unwrap().0;
        let fs = matched_filter(&c, s.theta_rx).unwrap();
        let actual = hybrid_snr_ev_pattern(&s, 0.5, fs.gain(&c, theta), d.beam.gain(&c, theta))
            .unwrap()
            .0;
        assert!(
            (10.0 * (model / actual).log10()).abs() <= 3.0,
            "{model} vs {actual}"
        );
    }

    #[test]
    fn hybrid_rate_shrinks_with_sector_size() {
        let s = scenario();
        let c = cfg(32);
        let theta = deg(110.0);
        let rates: Vec<f64> = [15.0, 30.0, 60.0]
            .iter()
            .map(|w| {
                let t = SectorSet::around_receiver(s.theta_rx, deg(*w), STEP).unwrap();
                hybrid_secrecy_bound(&s, &c, 0.5, theta, &t, 0.5)
                    .unwrap()
                    .rate_lower_bound
            })
            .collect();
        assert!(rates[0] > rates[1] && rates[1] > rates[2], "{rates:?}");
    }

    #[test]
    fn hybrid_rate_concave_in_epsilon() {
        let s = scenario();
        let c = cfg(32);
        let t = SectorSet::omnidirectional(s.theta_rx, STEP).unwrap();
        let rates: Vec<f64> = (1..20)
            .map(|k| {
                hybrid_secrecy_bound(&s, &c, k as f64 * 0.05, deg(110.0), &t, 0.5)
                    .unwrap()
                    .rate
            })
            .collect();
        let (imax, _) =
            rates.iter().enumerate().fold(
                (0, f64::MIN),
                |acc, (i, &r)| if r > acc.1 { (i, r) } else { acc },
            );
        assert!(imax > 0 && imax < rates.len() - 1, "{rates:?}");
        let zero = hybrid_secrecy_bound(&s, &c, 0.0, deg(110.0), &t, 0.5).unwrap();
        assert_eq!(zero.rate, 0.0);
        let one = hybrid_secrecy_bound(&s, &c, 1.0, deg(110.0), &t, 0.5).unwrap();
        assert!(one.rate <= rates[imax]);
    }

    #[test]
    fn epsilon_bound_cases() {
        let s = scenario();
        let c = cfg(32);
        let t = SectorSet::omnidirectional(s.theta_rx, STEP).unwrap();
        let theta_null = (s.theta_rx.cos() + 2.0 / 32.0).acos();
        assert!((hybrid_epsilon_bound(&s, &c, theta_null, &t, 0.5).unwrap() - 1.0).abs() < 1e-12);
        let mut quiet = s;
        quiet.noise_rx *= 1e-12;
        assert!(hybrid_epsilon_bound(&quiet, &c, deg(110.0), &t, 0.5).unwrap() > 1.0 - 1e-9);
        let mut noisy = s;
        noisy.noise_rx *= 1e6;
        let t60 = SectorSet::around_receiver(s.theta_rx, deg(30.0), STEP).unwrap();
        let bound = hybrid_epsilon_bound(&noisy, &c, deg(110.0), &t60, 0.5).unwrap();
        assert!(bound > 0.0 && bound < 1.0);
        for k in 1..100 {
            let eps = k as f64 / 100.0;
            let gr = hybrid_snr_rx(&noisy, &c, eps).unwrap();
            let ge = hybrid_snr_ev(&noisy, &c, eps, deg(110.0), &t60, 0.5)
                .unwrap()
                .1;
            if eps < bound {
                assert!(gr > ge, "eps = {eps}");
            } else {
                assert!(gr <= ge, "eps = {eps}");
            }
        }
        assert!(hybrid_epsilon_bound(&s, &c, deg(110.0), &t, 0.0).is_err());
    }

    #[test]
    fn snrs_depend_on_power_ratios_only() {
        let s = scenario();
        let c = cfg(32);
        let mut scaled = s;
        scaled.tx_power *= 13.0;
        scaled.noise_rx *= 13.0;
        scaled.noise_ev *= 13.0;
        let t = SectorSet::omnidirectional(s.theta_rx, STEP).unwrap();
        let a = analog_secrecy_bound(&s, &c, 12, deg(100.0)).unwrap();
        let b = analog_secrecy_bound(&scaled, &c, 12, deg(100.0)).unwrap();
        assert!((a.rate - b.rate).abs() < 1e-9 && (a.snr_ev - b.snr_ev).abs() < 1e-9 * a.snr_ev);
        let a = hybrid_secrecy_bound(&s, &c, 0.4, deg(100.0), &t, 0.6).unwrap();
        let b = hybrid_secrecy_bound(&scaled, &c, 0.4, deg(100.0), &t, 0.6).unwrap();
        assert!((a.rate - b.rate).abs() < 1e-9);
    }

    #[test]
    fn gaussian_gain_uses_unit_power() {
        let mut s = scenario();
        let c = cfg(32);
        let a = analog_snr_ev(&s, &c, 12, deg(100.0)).unwrap();
        s.ev_gain = EvGainModel::Fixed(Complex64::new(1.0, 0.0));
        let b = analog_snr_ev(&s, &c, 12, deg(100.0)).unwrap();
        assert_eq!(a, b);
    }
}
