//! Seeded Monte Carlo experiments.
//!
//! Trial `i` draws all of its randomness from substream `i` of the experiment
//! seed (see [`crate::rng`]). Trials run on a pool of `lanes` threads, results
//! are gathered in trial order and reduced sequentially with compensated
//! summation, so every estimate is bit-identical for any lane count.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::analog::{
    beta_stats_closed_form, check_subset_size, receiver_gain, shuffle_indices, BetaEvaluator,
    BetaStats,
};
use crate::array::{ArrayConfig, Scenario};
use crate::beam::BeamVector;
use crate::codebook::{build_dictionary, factorize_components};
use crate::error::{Error, Result};
use crate::precoder::{draw_eta, matched_filter, noise_beam, SectorSet};
use crate::rng::{stream_rng, StreamRng};
use crate::secrecy::{hybrid_secrecy_bound, secrecy_rate, SecrecyPoint};
use crate::stats::{ks_normal, sort_floats, summarize};

/// Trials below which standard errors are not reported.
pub const MIN_TRIALS_FOR_SE: usize = 100;
/// Trials below which KS distances are not reported.
pub const MIN_TRIALS_FOR_KS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub n_trials: usize,
    pub seed: u64,
    /// Worker threads. Has no effect on the results.
    pub lanes: usize,
    /// Symbols per trial in the secrecy simulations. Each trial fixes the
    /// eavesdropper's gain and estimates SNRs over this many symbols.
    pub symbols_per_trial: usize,
}

impl McConfig {
    pub fn new(n_trials: usize, seed: u64) -> Self {
        McConfig {
            n_trials,
            seed,
            lanes: default_lanes(),
            symbols_per_trial: 256,
        }
    }

    pub fn with_lanes(mut self, lanes: usize) -> Self {
        self.lanes = lanes;
        self
    }

    pub fn with_symbols(mut self, symbols_per_trial: usize) -> Self {
        self.symbols_per_trial = symbols_per_trial;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials < MIN_TRIALS_FOR_SE {
            return Err(Error::InvalidParameter(format!(
                "n_trials must be at least {MIN_TRIALS_FOR_SE} to report a standard error, got {}",
                self.n_trials
            )));
        }
        if self.lanes == 0 || self.symbols_per_trial == 0 {
            return Err(Error::InvalidParameter(
                "lanes and symbols_per_trial must be positive".into(),
            ));
        }
        Ok(())
    }
}

pub fn default_lanes() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Estimate with its standard error and provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct McResult<T> {
    pub estimate: T,
    pub std_error: f64,
    pub n_trials: usize,
    pub seed: u64,
    pub extras: BTreeMap<String, f64>,
}

impl<T> McResult<T> {
    fn new(estimate: T, std_error: f64, mc: &McConfig) -> Self {
        McResult {
            estimate,
            std_error,
            n_trials: mc.n_trials,
            seed: mc.seed,
            extras: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.extras.insert(key.to_string(), value);
        self
    }

    pub fn extra(&self, key: &str) -> Option<f64> {
        self.extras.get(key).copied()
    }
}

/// Runs `trial(i, rng_i)` for every trial index and returns the outputs in
/// trial order.
pub fn run_trials<T, F>(mc: &McConfig, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64, &mut StreamRng) -> T + Sync + Send,
{
    mc.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(mc.lanes)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        (0..mc.n_trials as u64)
            .into_par_iter()
            .map(|i| trial(i, &mut stream_rng(mc.seed, i)))
            .collect()
    }))
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

/// Draws `n_trials` partitions and returns `beta` at every angle, trial-major.
fn beta_samples(
    cfg: &ArrayConfig,
    m: usize,
    thetas: &[f64],
    theta_rx: f64,
    mc: &McConfig,
) -> Result<Vec<Vec<Complex64>>> {
    check_subset_size(cfg.n_antennas, m)?;
    let evals: Vec<BetaEvaluator> = thetas
        .iter()
        .map(|&t| BetaEvaluator::new(cfg, t, theta_rx))
        .collect();
    let n = cfg.n_antennas;
    run_trials(mc, |_, rng| {
        let mut perm = vec![0; n];
        shuffle_indices(&mut perm, rng);
        let odd = perm[m..].iter().skip(1).step_by(2);
        evals.iter().map(|e| e.eval_odd(odd.clone())).collect()
    })
}

/// Sample moments of `beta` at one angle.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaMoments {
    /// Sample mean; `std_error` is that of the real part, the imaginary part's
    /// is in `extras["se_imag"]`.
    pub mean: McResult<Complex64>,
    /// Unbiased total variance `E|beta - mean|^2`; extras hold `var_real` and
    /// `var_imag` with their standard errors.
    pub variance: McResult<f64>,
}

fn moments_from(samples: &[Complex64], mc: &McConfig) -> BetaMoments {
    let re: Vec<f64> = samples.iter().map(|z| z.re).collect();
    let im: Vec<f64> = samples.iter().map(|z| z.im).collect();
    let (sr, si) = (summarize(&re), summarize(&im));
    let n = samples.len() as f64;
    let bessel = n / (n - 1.0);
    let dr: Vec<f64> = re.iter().map(|x| (x - sr.mean).powi(2) * bessel).collect();
    let di: Vec<f64> = im.iter().map(|x| (x - si.mean).powi(2) * bessel).collect();
    let dt: Vec<f64> = dr.iter().zip(&di).map(|(a, b)| a + b).collect();
    let (vr, vi, vt) = (summarize(&dr), summarize(&di), summarize(&dt));
    BetaMoments {
        mean: McResult::new(Complex64::new(sr.mean, si.mean), sr.std_error, mc)
            .with("se_real", sr.std_error)
            .with("se_imag", si.std_error),
        variance: McResult::new(vt.mean, vt.std_error, mc)
            .with("var_real", vr.mean)
            .with("se_var_real", vr.std_error)
            .with("var_imag", vi.mean)
            .with("se_var_imag", vi.std_error),
    }
}

/// Sample mean and variance of `beta` over `n_trials` random partitions.
pub fn mc_beta_moments(
    cfg: &ArrayConfig,
    m: usize,
    theta: f64,
    theta_rx: f64,
    mc: &McConfig,
) -> Result<BetaMoments> {
    Ok(mc_beta_moments_multi(cfg, m, &[theta], theta_rx, mc)?.remove(0))
}

/// Like [`mc_beta_moments`] for several angles sharing the same partitions.
pub fn mc_beta_moments_multi(
    cfg: &ArrayConfig,
    m: usize,
    thetas: &[f64],
    theta_rx: f64,
    mc: &McConfig,
) -> Result<Vec<BetaMoments>> {
    let samples = beta_samples(cfg, m, thetas, theta_rx, mc)?;
    Ok((0..thetas.len())
        .map(|a| {
            let col: Vec<Complex64> = samples.iter().map(|s| s[a]).collect();
            moments_from(&col, mc)
        })
        .collect())
}

/// Empirical distribution of `beta` against its Gaussian approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct BetaCdf {
    /// Ascending samples of the real part.
    pub real: Vec<f64>,
    /// Ascending samples of the imaginary part.
    pub imag: Vec<f64>,
    /// Moments defining the reference normal CDFs.
    pub theory: BetaStats,
    pub ks_real: f64,
    pub ks_imag: f64,
    pub moments: BetaMoments,
}

pub fn mc_beta_cdf(
    cfg: &ArrayConfig,
    m: usize,
    theta: f64,
    theta_rx: f64,
    mc: &McConfig,
) -> Result<BetaCdf> {
    if mc.n_trials < MIN_TRIALS_FOR_KS {
        return Err(Error::InvalidParameter(format!(
            "KS distances need at least {MIN_TRIALS_FOR_KS} trials, got {}",
            mc.n_trials
        )));
    }
    let samples: Vec<Complex64> = beta_samples(cfg, m, &[theta], theta_rx, mc)?
        .into_iter()
        .map(|s| s[0])
        .collect();
    let theory = beta_stats_closed_form(cfg, m, theta, theta_rx)?;
    let moments = moments_from(&samples, mc);
    let mut real: Vec<f64> = samples.iter().map(|z| z.re).collect();
    let mut imag: Vec<f64> = samples.iter().map(|z| z.im).collect();
    sort_floats(&mut real);
    sort_floats(&mut imag);
    let ks_real = ks_normal(&real, theory.mean.re, theory.var_real.sqrt());
    let ks_imag = ks_normal(&imag, theory.mean.im, theory.var_imag.sqrt());
    Ok(BetaCdf {
        real,
        imag,
        theory,
        ks_real,
        ks_imag,
        moments,
    })
}

/// SNR seen by a matched-filter receiver that knows the mean of its
/// effective gain: signal power over the measured power of everything else.
fn block_snr(signal_power: f64, impairments: impl Iterator<Item = Complex64>, k: usize) -> f64 {
    let p: f64 = impairments.map(|z| z.norm_sqr()).sum::<f64>() / k as f64;
    if signal_power == 0.0 {
        0.0
    } else {
        signal_power / p
    }
}

fn rate_results(per_trial: &[Vec<[f64; 3]>], points: usize, mc: &McConfig) -> Vec<McResult<f64>> {
    (0..points)
        .map(|p| {
            let rates: Vec<f64> = per_trial.iter().map(|t| t[p][0]).collect();
            let g_r: Vec<f64> = per_trial.iter().map(|t| t[p][1]).collect();
            let g_e: Vec<f64> = per_trial.iter().map(|t| t[p][2]).collect();
            let s = summarize(&rates);
            let (mr, me) = (summarize(&g_r).mean, summarize(&g_e).mean);
            McResult::new(s.mean, s.std_error, mc)
                .with("snr_rx_mean", mr)
                .with("snr_ev_mean", me)
                .with("rate_of_means", secrecy_rate(mr, me))
        })
        .collect()
}

/// Simulated secrecy rate of the analog technique at each eavesdropper angle.
///
/// Each trial draws the eavesdropper gain and `symbols_per_trial` partitions.
/// Receiver and eavesdropper observe `sqrt(c) g beta_k + z_k`; each knows the
/// mean of its own gain and treats the rest, artificial noise and thermal
/// noise, as interference. The trial's rate is clamped at zero and the
/// estimate averages over trials. `extras` carry the mean SNRs and the rate
/// computed from them.
pub fn mc_secrecy_analog(
    scn: &Scenario,
    cfg: &ArrayConfig,
    m: usize,
    thetas: &[f64],
    mc: &McConfig,
) -> Result<Vec<McResult<f64>>> {
    check_subset_size(cfg.n_antennas, m)?;
    scn.validate()?;
    let n = cfg.n_antennas;
    let k = mc.symbols_per_trial;
    let evals: Vec<BetaEvaluator> = thetas
        .iter()
        .map(|&t| BetaEvaluator::new(cfg, t, scn.theta_rx))
        .collect();
    let means: Vec<Complex64> = thetas
        .iter()
        .map(|&t| beta_stats_closed_form(cfg, m, t, scn.theta_rx).map(|s| s.mean))
        .collect::<Result<_>>()?;
    let rx_eval = BetaEvaluator::new(cfg, scn.theta_rx, scn.theta_rx);
    let rx_mean = receiver_gain(cfg, m);
    let c_rx = scn.rx_scale().sqrt() * scn.rx_gain;
    let c_ev = scn.ev_scale().sqrt();
    let per_trial = run_trials(mc, |_, rng| {
        let g_e = scn.ev_gain.draw(rng) * c_ev;
        let mut perm = vec![0; n];
        let mut rx_imp = Vec::with_capacity(k);
        let mut ev_imp = vec![Vec::with_capacity(k); thetas.len()];
        for _ in 0..k {
            shuffle_indices(&mut perm, rng);
            let odd = perm[m..].iter().skip(1).step_by(2);
            let b_rx = rx_eval.eval_odd(odd.clone());
            rx_imp.push(c_rx * (b_rx - rx_mean) + complex_normal(rng, scn.noise_rx));
            for ((e, mean), imp) in evals.iter().zip(&means).zip(ev_imp.iter_mut()) {
                let b = e.eval_odd(odd.clone());
                imp.push(g_e * (b - mean) + complex_normal(rng, scn.noise_ev));
            }
        }
        let g_r = block_snr((c_rx * rx_mean).norm_sqr(), rx_imp.into_iter(), k);
        ev_imp
            .iter()
            .zip(&means)
            .map(|(imp, mean)| {
                let g_ev = block_snr((g_e * mean).norm_sqr(), imp.iter().copied(), k);
                [secrecy_rate(g_r, g_ev), g_r, g_ev]
            })
            .collect::<Vec<_>>()
    })?;
    Ok(rate_results(&per_trial, thetas.len(), mc))
}

/// RF side of a hybrid simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HybridRf {
    pub n_rf: usize,
    pub switching: bool,
}

/// Design inputs shared by every point of a hybrid sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridSetup {
    pub sectors: SectorSet,
    pub grid_len: usize,
    /// Factorize through an RF dictionary; `None` simulates the digital
    /// precoder only. Angle resolution and group size come from the array
    /// configuration.
    pub hybrid: Option<HybridRf>,
    /// Replaces the measured `c_0` in the closed-form bound.
    pub c0_override: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HybridSweep {
    Epsilon { theta: f64, values: Vec<f64> },
    Theta { epsilon: f64, values: Vec<f64> },
}

impl HybridSweep {
    fn points(&self) -> Vec<(f64, f64)> {
        match self {
            HybridSweep::Epsilon { theta, values } => values.iter().map(|&e| (e, *theta)).collect(),
            HybridSweep::Theta { epsilon, values } => {
                values.iter().map(|&t| (*epsilon, t)).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridSweepPoint {
    pub epsilon: f64,
    pub theta: f64,
    pub digital: McResult<f64>,
    pub hybrid: Option<McResult<f64>>,
    /// Closed-form point with the sector model; `None` outside the sectors
    /// or at the receiver angle.
    pub bound: Option<SecrecyPoint>,
}

/// Designed beams of a hybrid sweep.
/// `(a^H f_s, a^H f_n)` at one angle.
type ResponsePair = (Complex64, Complex64);

#[derive(Debug, Clone, PartialEq)]
pub struct HybridDesign {
    pub f_s: BeamVector,
    pub f_n: BeamVector,
    pub c0: f64,
    /// Reconstructed data and noise beams, when an RF dictionary is used.
    pub hybrid: Option<(BeamVector, BeamVector)>,
}

pub fn design_hybrid(
    cfg: &ArrayConfig,
    theta_rx: f64,
    setup: &HybridSetup,
) -> Result<HybridDesign> {
    let f_s = matched_filter(cfg, theta_rx)?;
    let nb = noise_beam(cfg, theta_rx, &setup.sectors, setup.grid_len)?;
    let hybrid = match setup.hybrid {
        Some(rf) => {
            let dict = build_dictionary(cfg, rf.switching)?;
            let comp = factorize_components(&f_s, &nb.beam, 0.5, &dict, rf.n_rf)?;
            let take = |h: Option<crate::codebook::HybridPrecoder>| {
                h.map(|h| h.reconstructed)
                    .expect("both components factorized at eps = 0.5")
            };
            Some((take(comp.data), take(comp.noise)))
        }
        None => None,
    };
    Ok(HybridDesign {
        f_s,
        f_n: nb.beam,
        c0: setup.c0_override.unwrap_or(nb.c0),
        hybrid,
    })
}

/// Simulated secrecy rates of the digital and, optionally, hybrid precoders.
///
/// Beams are designed once. Each trial draws the eavesdropper gain, then per
/// symbol the noise phase `eta` and thermal noise; SNRs are measured as in
/// [`mc_secrecy_analog`]. Digital and hybrid curves share all random draws.
pub fn mc_secrecy_hybrid(
    scn: &Scenario,
    cfg: &ArrayConfig,
    setup: &HybridSetup,
    sweep: &HybridSweep,
    mc: &McConfig,
) -> Result<Vec<HybridSweepPoint>> {
    scn.validate()?;
    let design = design_hybrid(cfg, scn.theta_rx, setup)?;
    let points = sweep.points();
    for &(eps, _) in &points {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in [0, 1], got {eps}"
            )));
        }
    }
    let mut beams = vec![(design.f_s.clone(), design.f_n.clone())];
    if let Some(h) = &design.hybrid {
        beams.push(h.clone());
    }
    // Responses (data, noise) at the receiver and at every sweep point.
    let responses: Vec<(Complex64, Complex64, Vec<ResponsePair>)> = beams
        .iter()
        .map(|(s, n)| {
            let at = |t: f64| (s.response(cfg, t), n.response(cfg, t));
            let (rs, rn) = at(scn.theta_rx);
            (rs, rn, points.iter().map(|&(_, t)| at(t)).collect())
        })
        .collect();
    let k = mc.symbols_per_trial;
    let c_rx = scn.rx_scale().sqrt() * scn.rx_gain;
    let c_ev = scn.ev_scale().sqrt();
    let n_beams = beams.len();
    let per_trial = run_trials(mc, |_, rng| {
        let g_e = scn.ev_gain.draw(rng) * c_ev;
        let mut out = vec![Vec::with_capacity(points.len()); n_beams];
        let etas: Vec<Complex64> = (0..k).map(|_| draw_eta(rng)).collect();
        let z_rx: Vec<Complex64> = (0..k).map(|_| complex_normal(rng, scn.noise_rx)).collect();
        let z_ev: Vec<Vec<Complex64>> = points
            .iter()
            .map(|_| (0..k).map(|_| complex_normal(rng, scn.noise_ev)).collect())
            .collect();
        for (b, (rs, rn, at)) in responses.iter().enumerate() {
            for (p, &(eps, _)) in points.iter().enumerate() {
                let (a, c) = (eps.sqrt(), (1.0 - eps).sqrt());
                let rx_imp = etas.iter().zip(&z_rx).map(|(e, z)| c_rx * c * e * rn + z);
                let g_r = block_snr((c_rx * a * rs).norm_sqr(), rx_imp, k);
                let (es, en) = at[p];
                let ev_imp = etas.iter().zip(&z_ev[p]).map(|(e, z)| g_e * c * e * en + z);
                let g_ev = block_snr((g_e * a * es).norm_sqr(), ev_imp, k);
                out[b].push([secrecy_rate(g_r, g_ev), g_r, g_ev]);
            }
        }
        out
    })?;
    let per_beam: Vec<Vec<McResult<f64>>> = (0..n_beams)
        .map(|b| {
            let rows: Vec<Vec<[f64; 3]>> = per_trial.iter().map(|t| t[b].clone()).collect();
            rate_results(&rows, points.len(), mc)
        })
        .collect();
    Ok(points
        .iter()
        .enumerate()
        .map(|(p, &(epsilon, theta))| HybridSweepPoint {
            epsilon,
            theta,
            digital: per_beam[0][p].clone(),
            hybrid: per_beam.get(1).map(|v| v[p].clone()),
            bound: hybrid_secrecy_bound(scn, cfg, epsilon, theta, &setup.sectors, design.c0).ok(),
        })
        .collect())
}
