//! Randomized-subset analog beamforming.
//!
//! For every symbol a uniformly random set of `M` antennas is co-phased towards
//! the receiver. The remaining `N_T - M` antennas are split in two equal
//! halves, one of which is flipped by `pi`. The two halves cancel at the
//! receiver but not elsewhere, so the far-field gain `beta` at any other angle
//! fluctuates from symbol to symbol while the receiver sees the constant gain
//! `M / sqrt(N_T)`.
//!
//! Writing `W_n = -1` on the flipped half and `+1` otherwise,
//! `beta = (1 / sqrt(N_T)) sum_n W_n exp(j ((N_T - 1)/2 - n) upsilon)` with
//! `upsilon = 2 pi (d / lambda) (cos theta - cos theta_R)`. This is the
//! conjugate of `a(theta)^H f`, which has the same magnitude.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::array::{difference_phasors, dirichlet, element_phase, ArrayConfig};
use crate::beam::{BeamKind, BeamVector};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Per-symbol split of the antenna indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetPartition {
    /// `I_M`: antennas beamforming coherently.
    pub coherent: Vec<usize>,
    /// `E_L`: even entries of the remainder, steered like `I_M`.
    pub even_destructive: Vec<usize>,
    /// `O_L`: odd entries of the remainder, steered with an extra `pi`.
    pub odd_destructive: Vec<usize>,
    pub symbol_index: u64,
}

/// Checks `1 <= m <= n` and that `n - m` is even.
pub fn check_subset_size(n: usize, m: usize) -> Result<()> {
    let reason = if m == 0 {
        "M must be at least 1"
    } else if m > n {
        "M must not exceed N_T"
    } else if !(n - m).is_multiple_of(2) {
        "N_T - M must be even"
    } else {
        return Ok(());
    };
    Err(Error::InvalidSubsetSize { n, m, reason })
}

/// Shuffles `perm` into a uniform permutation of `0..perm.len()`.
///
/// The first `m` entries form `I_M`; the remainder alternates between `E_L`
/// (positions `m, m+2, ...`) and `O_L` (positions `m+1, m+3, ...`).
pub fn shuffle_indices<R: Rng + ?Sized>(perm: &mut [usize], rng: &mut R) {
    for (i, p) in perm.iter_mut().enumerate() {
        *p = i;
    }
    perm.shuffle(rng);
}

impl SubsetPartition {
    pub fn draw<R: Rng + ?Sized>(
        cfg: &ArrayConfig,
        m: usize,
        rng: &mut R,
        symbol_index: u64,
    ) -> Result<Self> {
        let n = cfg.n_antennas;
        check_subset_size(n, m)?;
        let mut perm = vec![0; n];
        shuffle_indices(&mut perm, rng);
        let mut coherent = perm[..m].to_vec();
        let mut even: Vec<usize> = perm[m..].iter().step_by(2).copied().collect();
        let mut odd: Vec<usize> = perm[m..].iter().skip(1).step_by(2).copied().collect();
        coherent.sort_unstable();
        even.sort_unstable();
        odd.sort_unstable();
        Ok(SubsetPartition {
            coherent,
            even_destructive: even,
            odd_destructive: odd,
            symbol_index,
        })
    }

    pub fn m(&self) -> usize {
        self.coherent.len()
    }

    pub fn validate(&self, n_antennas: usize) -> Result<()> {
        let m = self.m();
        check_subset_size(n_antennas, m)?;
        let bad = |msg: &str| Err(Error::InvalidParameter(format!("invalid partition: {msg}")));
        if self.even_destructive.len() != self.odd_destructive.len() {
            return bad("destructive halves differ in size");
        }
        let mut seen = vec![false; n_antennas];
        for &i in self
            .coherent
            .iter()
            .chain(&self.even_destructive)
            .chain(&self.odd_destructive)
        {
            if i >= n_antennas || seen[i] {
                return bad("index sets are not a partition of the antennas");
            }
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return bad("index sets do not cover every antenna");
        }
        Ok(())
    }

    /// `W_n`: `-1` on `O_L`, `+1` elsewhere.
    pub fn signs(&self, n_antennas: usize) -> Vec<f64> {
        let mut w = vec![1.0; n_antennas];
        for &i in &self.odd_destructive {
            w[i] = -1.0;
        }
        w
    }
}

/// Draws the partition of symbol `symbol_index` from the stream of `seed`.
pub fn draw_partition(
    cfg: &ArrayConfig,
    m: usize,
    seed: u64,
    symbol_index: u64,
) -> Result<SubsetPartition> {
    SubsetPartition::draw(cfg, m, &mut stream_rng(seed, symbol_index), symbol_index)
}

/// Weights `f_n = (1 / sqrt(N_T)) exp(j Upsilon_n)` for one symbol.
pub fn analog_weights(
    cfg: &ArrayConfig,
    theta_rx: f64,
    part: &SubsetPartition,
) -> Result<BeamVector> {
    let n = cfg.n_antennas;
    part.validate(n)?;
    let amp = 1.0 / (n as f64).sqrt();
    let c = theta_rx.cos();
    let entries = part
        .signs(n)
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let z = Complex64::from_polar(amp, element_phase(n, cfg.spacing_ratio, i, c));
            if *w < 0.0 {
                -z
            } else {
                z
            }
        })
        .collect();
    Ok(BeamVector {
        entries,
        kind: BeamKind::Analog,
    })
}

/// Far-field gain `beta` of one partition at angle `theta`.
pub fn beta(cfg: &ArrayConfig, theta: f64, theta_rx: f64, part: &SubsetPartition) -> Complex64 {
    let n = cfg.n_antennas;
    let delta = theta.cos() - theta_rx.cos();
    let e = difference_phasors(n, cfg.spacing_ratio, delta);
    let w = part.signs(n);
    let s: Complex64 = e.iter().zip(&w).map(|(z, w)| z * *w).sum();
    s / (n as f64).sqrt()
}

/// Precomputed phasors for evaluating `beta` from the odd set alone:
/// `beta = (S - 2 sum_{O_L} e_n) / sqrt(N_T)` with `S = sum_n e_n`.
#[derive(Debug, Clone)]
pub struct BetaEvaluator {
    phasors: Vec<Complex64>,
    total: Complex64,
    scale: f64,
}

impl BetaEvaluator {
    pub fn new(cfg: &ArrayConfig, theta: f64, theta_rx: f64) -> Self {
        let n = cfg.n_antennas;
        let phasors = difference_phasors(n, cfg.spacing_ratio, theta.cos() - theta_rx.cos());
        let total = phasors.iter().sum();
        BetaEvaluator {
            phasors,
            total,
            scale: 1.0 / (n as f64).sqrt(),
        }
    }

    /// `beta` for the partition whose odd set is `odd`.
    #[inline]
    pub fn eval_odd<'a, I: IntoIterator<Item = &'a usize>>(&self, odd: I) -> Complex64 {
        let flipped: Complex64 = odd.into_iter().map(|&i| self.phasors[i]).sum();
        (self.total - flipped * 2.0) * self.scale
    }
}

/// Mean and variance of `beta` over random partitions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaStats {
    pub mean: Complex64,
    /// `E|beta - E beta|^2`.
    pub variance: f64,
    pub var_real: f64,
    pub var_imag: f64,
}

/// `(E[W_n], var[W_n]) = (M / N_T, (N_T^2 - M^2) / N_T^2)`.
pub fn bernoulli_moments(cfg: &ArrayConfig, m: usize) -> Result<(f64, f64)> {
    let n = cfg.n_antennas;
    check_subset_size(n, m)?;
    let (nf, mf) = (n as f64, m as f64);
    Ok((mf / nf, (nf * nf - mf * mf) / (nf * nf)))
}

fn upsilon(cfg: &ArrayConfig, theta: f64, theta_rx: f64) -> f64 {
    2.0 * PI * cfg.spacing_ratio * (theta.cos() - theta_rx.cos())
}

/// Large-array moments obtained by treating the `W_n` as independent.
///
/// The mean is `(M / (N_T sqrt(N_T))) D(pi (d/lambda) Delta)`, the total
/// variance `(N_T^2 - M^2) / N_T^2`, and the real/imaginary split is
/// `var / (2 N_T) * (N_T +- sin(N_T upsilon) / sin(upsilon))`.
pub fn beta_stats_closed_form(
    cfg: &ArrayConfig,
    m: usize,
    theta: f64,
    theta_rx: f64,
) -> Result<BetaStats> {
    let (_, var_w) = bernoulli_moments(cfg, m)?;
    let n = cfg.n_antennas;
    let nf = n as f64;
    let ups = upsilon(cfg, theta, theta_rx);
    let mean = m as f64 / (nf * nf.sqrt()) * dirichlet(n, ups / 2.0);
    let d2 = dirichlet(n, ups);
    Ok(BetaStats {
        mean: Complex64::new(mean, 0.0),
        variance: var_w,
        var_real: var_w / (2.0 * nf) * (nf + d2),
        var_imag: var_w / (2.0 * nf) * (nf - d2),
    })
}

/// Exact moments for partitions drawn without replacement.
///
/// A partition fixes the number of flipped antennas, so the `W_n` are
/// exchangeable with covariance `-var[W_n] / (N_T - 1)`. This shrinks the
/// variance near the receiver direction and inflates it by up to
/// `N_T / (N_T - 1)` in the sidelobes, relative to the independent model.
pub fn beta_stats_exact(
    cfg: &ArrayConfig,
    m: usize,
    theta: f64,
    theta_rx: f64,
) -> Result<BetaStats> {
    let (_, var_w) = bernoulli_moments(cfg, m)?;
    let n = cfg.n_antennas;
    let nf = n as f64;
    let ups = upsilon(cfg, theta, theta_rx);
    let s = dirichlet(n, ups / 2.0);
    let d2 = dirichlet(n, ups);
    let k = var_w / (nf * (nf - 1.0));
    let var_real = (k * (nf * (nf + d2) / 2.0 - s * s)).max(0.0);
    let var_imag = (k * nf * (nf - d2) / 2.0).max(0.0);
    Ok(BetaStats {
        mean: Complex64::new(m as f64 / (nf * nf.sqrt()) * s, 0.0),
        variance: var_real + var_imag,
        var_real,
        var_imag,
    })
}

/// Gain `M / sqrt(N_T)` seen by the receiver for every partition.
pub fn receiver_gain(cfg: &ArrayConfig, m: usize) -> f64 {
    m as f64 / (cfg.n_antennas as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array::{array_response, steering_vector};
    use crate::linalg::inner;
    use proptest::prelude::*;

    fn cfg(n: usize) -> ArrayConfig {
        ArrayConfig::ula(n).unwrap()
    }

    fn deg(x: f64) -> f64 {
        x.to_radians()
    }

    #[test]
    fn small_partition_cardinalities() {
        let p = draw_partition(&cfg(4), 2, 1, 0).unwrap();
        assert_eq!(p.coherent.len(), 2);
        assert_eq!(p.even_destructive.len(), 1);
        assert_eq!(p.odd_destructive.len(), 1);
        p.validate(4).unwrap();
    }

    #[test]
    fn full_subset_has_no_destructive_antennas() {
        let p = draw_partition(&cfg(8), 8, 3, 5).unwrap();
        assert!(p.even_destructive.is_empty() && p.odd_destructive.is_empty());
        assert_eq!(p.symbol_index, 5);
    }

    #[test]
    fn parity_and_range_are_enforced() {
        let c = cfg(8);
        for (m, reason) in [
            (3, "N_T - M must be even"),
            (0, "M must be at least 1"),
            (10, "M must not exceed N_T"),
        ] {
            match draw_partition(&c, m, 0, 0) {
                Err(Error::InvalidSubsetSize { reason: r, .. }) => assert_eq!(r, reason),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn coherent_membership_frequency() {
        let c = cfg(32);
        let (m, draws) = (12usize, 100_000u64);
        let mut rng = stream_rng(2024, 0);
        let mut hits = [0u32; 32];
        let mut w_sum = 0.0;
        for k in 0..draws {
            let p = SubsetPartition::draw(&c, m, &mut rng, k).unwrap();
            for &i in &p.coherent {
                hits[i] += 1;
            }
            w_sum += p.signs(32)[7];
        }
        let p = m as f64 / 32.0;
        let sd = (draws as f64 * p * (1.0 - p)).sqrt();
        for h in hits {
            assert!((h as f64 - draws as f64 * p).abs() <= 3.0 * sd, "count {h}");
        }
        let (mean_w, var_w) = bernoulli_moments(&c, m).unwrap();
        assert_eq!(mean_w, 0.375);
        let se = (var_w / draws as f64).sqrt();
        assert!((w_sum / draws as f64 - mean_w).abs() <= 3.0 * se);
    }

    #[test]
    fn bernoulli_moment_values() {
        assert_eq!(bernoulli_moments(&cfg(4), 2).unwrap(), (0.5, 0.75));
        assert_eq!(bernoulli_moments(&cfg(16), 16).unwrap(), (1.0, 0.0));
    }

    #[test]
    fn weights_match_elementwise_formula() {
        let c = cfg(8);
        let theta_rx = deg(100.0);
        let p = draw_partition(&c, 4, 77, 0).unwrap();
        let f = analog_weights(&c, theta_rx, &p).unwrap();
        for n in 0..8 {
            let mut ups = (3.5 - n as f64) * PI * theta_rx.cos();
            if p.odd_destructive.contains(&n) {
                ups += PI;
            }
            let expect = Complex64::new(ups.cos(), ups.sin()) / 8f64.sqrt();
            assert!((f.entries[n] - expect).norm() < 1e-12);
            assert!((f.entries[n].norm() - 1.0 / 8f64.sqrt()).abs() < 1e-15);
        }
        assert!((f.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn full_subset_is_matched_filter() {
        let c = cfg(16);
        let theta_rx = deg(70.0);
        let p = draw_partition(&c, 16, 0, 0).unwrap();
        let f = analog_weights(&c, theta_rx, &p).unwrap();
        let a = steering_vector(&c, theta_rx).unwrap();
        assert!((a.response(&f.entries) - Complex64::new(4.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn receiver_gain_is_constant() {
        let c = cfg(16);
        let theta_rx = deg(120.0);
        for k in 0..50 {
            let p = draw_partition(&c, 12, 9, k).unwrap();
            assert!((beta(&c, theta_rx, theta_rx, &p) - Complex64::new(3.0, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn beta_matches_triple_sum() {
        let c = cfg(64);
        let (theta, theta_rx) = (deg(60.0), deg(100.0));
        let p = draw_partition(&c, 48, 11, 0).unwrap();
        let ph = |n: usize| {
            let x = (31.5 - n as f64) * 2.0 * PI * 0.5 * (theta.cos() - theta_rx.cos());
            Complex64::new(x.cos(), x.sin())
        };
        let brute: Complex64 = p.coherent.iter().map(|&n| ph(n)).sum::<Complex64>()
            + p.even_destructive.iter().map(|&n| ph(n)).sum::<Complex64>()
            - p.odd_destructive.iter().map(|&n| ph(n)).sum::<Complex64>();
        let b = beta(&c, theta, theta_rx, &p);
        assert!((b - brute / 8.0).norm() < 1e-12);
        let fast = BetaEvaluator::new(&c, theta, theta_rx).eval_odd(&p.odd_destructive);
        assert!((b - fast).norm() < 1e-12);
    }

    #[test]
    fn closed_form_special_values() {
        let c = cfg(32);
        let s = beta_stats_closed_form(&c, 16, deg(60.0), deg(100.0)).unwrap();
        assert!((s.variance - 0.75).abs() < 1e-15);
        let full = beta_stats_closed_form(&c, 32, deg(60.0), deg(100.0)).unwrap();
        assert_eq!(full.variance, 0.0);
        let at_rx = beta_stats_closed_form(&cfg(16), 12, deg(120.0), deg(120.0)).unwrap();
        assert!((at_rx.mean.re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn exact_moments_by_enumeration() {
        // N_T = 6, M = 2: C(6, 2) = 15 equally likely odd sets of size 2.
        let c = cfg(6);
        let (theta, theta_rx) = (deg(50.0), deg(110.0));
        let ev = BetaEvaluator::new(&c, theta, theta_rx);
        let mut vals = Vec::new();
        for i in 0..6 {
            for j in (i + 1)..6 {
                vals.push(ev.eval_odd(&[i, j]));
            }
        }
        let mean: Complex64 = vals.iter().sum::<Complex64>() / vals.len() as f64;
        let vr = vals.iter().map(|v| (v.re - mean.re).powi(2)).sum::<f64>() / vals.len() as f64;
        let vi = vals.iter().map(|v| (v.im - mean.im).powi(2)).sum::<f64>() / vals.len() as f64;
        let ex = beta_stats_exact(&c, 2, theta, theta_rx).unwrap();
        assert!((ex.mean - mean).norm() < 1e-12);
        assert!((ex.var_real - vr).abs() < 1e-12);
        assert!((ex.var_imag - vi).abs() < 1e-12);
        let cf = beta_stats_closed_form(&c, 2, theta, theta_rx).unwrap();
        assert!((cf.mean - mean).norm() < 1e-12);
    }

    #[test]
    fn exact_variance_vanishes_at_receiver() {
        let c = cfg(32);
        let s = beta_stats_exact(&c, 12, deg(120.0), deg(120.0)).unwrap();
        assert!(s.variance < 1e-12);
    }

    proptest! {
        #[test]
        fn partitions_are_valid(half_n in 1usize..33, frac in 0.0f64..1.0, seed in any::<u64>()) {
            let n = 2 * half_n;
            let m = 2 * ((frac * half_n as f64) as usize).max(1).min(half_n);
            let c = cfg(n);
            let p = draw_partition(&c, m, seed, 0).unwrap();
            p.validate(n).unwrap();
            prop_assert_eq!(p.coherent.len(), m);
            prop_assert_eq!(p.odd_destructive.len(), (n - m) / 2);
            let f = analog_weights(&c, 1.0, &p).unwrap();
            prop_assert!((f.norm() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn beta_is_conjugate_array_response(seed in any::<u64>(), rx_deg in 1u32..180) {
            let c = cfg(16);
            let theta_rx = deg(rx_deg as f64);
            let p = draw_partition(&c, 10, seed, 0).unwrap();
            let f = analog_weights(&c, theta_rx, &p).unwrap();
            for d in 0..=180 {
                let theta = deg(d as f64);
                let a = array_response(16, 0.5, theta);
                let via_weights = inner(&a, &f.entries).conj();
                prop_assert!((beta(&c, theta, theta_rx, &p) - via_weights).norm() < 1e-10);
            }
        }

        #[test]
        fn variance_components_sum(n_half in 2usize..40, m_half in 1usize..40, t in 0.0f64..PI, r in 0.01f64..3.13) {
            let n = 2 * n_half;
            let m = 2 * m_half.min(n_half);
            let c = cfg(n);
            for s in [beta_stats_closed_form(&c, m, t, r).unwrap(), beta_stats_exact(&c, m, t, r).unwrap()] {
                prop_assert!((s.var_real + s.var_imag - s.variance).abs() < 1e-12);
                prop_assert!(s.variance <= n as f64 / (n - 1) as f64 + 1e-12);
                prop_assert!(s.var_real >= 0.0 && s.var_imag >= 0.0);
            }
        }
    }
}
