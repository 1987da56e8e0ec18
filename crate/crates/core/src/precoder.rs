//! Fully digital precoders: matched-filter data beam, null-space noise beam,
//! their power split, and the least-squares multisector beam.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::array::{array_response, check_angle, steering_vector, ArrayConfig};
use crate::beam::{BeamKind, BeamVector};
use crate::error::{Error, Result};
use crate::linalg::{self, condition_number, inner, lstsq};
use crate::rng::stream_rng;

/// Orthogonality tolerance between the data and noise beams.
pub const ORTHO_TOL: f64 = 1e-8;
/// Largest condition number accepted for the multisector Gram matrix.
pub const GRAM_COND_MAX: f64 = 1e12;
/// Default number of design-grid points (1 degree over a full turn).
pub const DEFAULT_GRID_LEN: usize = 360;

/// Angular sectors that receive artificial noise.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorSet {
    /// Sorted, disjoint `[lo, hi]` intervals in radians.
    pub intervals: Vec<(f64, f64)>,
    /// Sampling step used for membership tests and pattern averages.
    pub grid_step: f64,
}

impl SectorSet {
    pub fn new(mut intervals: Vec<(f64, f64)>, grid_step: f64, theta_rx: f64) -> Result<Self> {
        let bad = |msg: String| Err(Error::DegenerateSectors(msg));
        if !(grid_step > 0.0) {
            return bad(format!("grid_step must be positive, got {grid_step}"));
        }
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        for &(lo, hi) in &intervals {
            check_angle(lo)?;
            check_angle(hi)?;
            if !(lo < hi) {
                return bad(format!("empty interval [{lo}, {hi}]"));
            }
            if lo <= theta_rx && theta_rx <= hi {
                return bad(format!("interval [{lo}, {hi}] contains the receiver angle"));
            }
        }
        for w in intervals.windows(2) {
            if w[1].0 <= w[0].1 {
                return bad("intervals overlap".into());
            }
        }
        let set = SectorSet {
            intervals,
            grid_step,
        };
        if set.measure() <= 0.0 {
            return bad("total sector measure is zero".into());
        }
        Ok(set)
    }

    /// Every direction in `[0, pi]` except a one-step guard band around the receiver.
    pub fn omnidirectional(theta_rx: f64, grid_step: f64) -> Result<Self> {
        Self::around_receiver(theta_rx, PI, grid_step)
    }

    /// `half_width` on each side of the receiver, minus a one-step guard band.
    pub fn around_receiver(theta_rx: f64, half_width: f64, grid_step: f64) -> Result<Self> {
        let left = ((theta_rx - half_width).max(0.0), theta_rx - grid_step);
        let right = (theta_rx + grid_step, (theta_rx + half_width).min(PI));
        let intervals = [left, right]
            .into_iter()
            .filter(|(lo, hi)| lo < hi)
            .collect();
        Self::new(intervals, grid_step, theta_rx)
    }

    /// `mu(T)`, the summed interval length.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(lo, hi)| hi - lo).sum()
    }

    pub fn contains(&self, theta: f64) -> bool {
        let tol = 1e-12;
        self.intervals
            .iter()
            .any(|&(lo, hi)| theta >= lo - tol && theta <= hi + tol)
    }

    /// Grid points `lo, lo + step, ...` inside each interval.
    pub fn sample_angles(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for &(lo, hi) in &self.intervals {
            let count = ((hi - lo) / self.grid_step + 1e-9).floor() as usize + 1;
            out.extend((0..count).map(|k| lo + k as f64 * self.grid_step));
        }
        out
    }
}

/// `f_s = a(theta_R) / sqrt(N_T)`.
pub fn matched_filter(cfg: &ArrayConfig, theta_rx: f64) -> Result<BeamVector> {
    let a = steering_vector(cfg, theta_rx)?;
    let s = 1.0 / (cfg.n_antennas as f64).sqrt();
    Ok(BeamVector {
        entries: a.entries.iter().map(|z| z * s).collect(),
        kind: BeamKind::Digital,
    })
}

/// Projector `B = I - a(theta_R) a(theta_R)^H / N_T` onto the orthogonal
/// complement of the receiver's steering vector.
pub fn householder_complement(cfg: &ArrayConfig, theta_rx: f64) -> Result<DMatrix<Complex64>> {
    let a = linalg::to_dvector(&steering_vector(cfg, theta_rx)?.entries);
    let n = cfg.n_antennas;
    Ok(DMatrix::identity(n, n) - &a * a.adjoint() / Complex64::new(n as f64, 0.0))
}

/// Angles `2 pi i / len` of the noise-beam design grid.
pub fn design_grid(len: usize) -> Vec<f64> {
    (0..len).map(|i| 2.0 * PI * i as f64 / len as f64).collect()
}

/// Indicator target on the design grid. Angles beyond `pi` reuse the
/// response of their mirror image, so they take the mirrored indicator.
pub fn sector_target(grid: &[f64], sectors: &SectorSet, theta_rx: f64) -> Vec<f64> {
    grid.iter()
        .map(|&t| {
            let folded = if t > PI { 2.0 * PI - t } else { t };
            let guarded = (folded - theta_rx).abs() < sectors.grid_step;
            if !guarded && sectors.contains(folded) {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// Designed artificial-noise beam and its fit diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBeamDesign {
    pub beam: BeamVector,
    /// `‖Z x - q‖` of the least-squares fit before normalization.
    pub residual: f64,
    /// Mean `|a(theta)^H f_n|^2` over the sector samples.
    pub sector_gain: f64,
    /// `c_0 = sector_gain * mu(T) / pi`.
    pub c0: f64,
}

/// Least-squares noise beam confined to the null space of `a(theta_R)`.
///
/// Solves `min ‖A^H B x - q‖` with `q` the sector indicator on a `grid_len`
/// point grid, then normalizes `B x`. `A^H B` has rank at most `N_T - 1`, so
/// the solve goes through a truncated SVD.
pub fn noise_beam(
    cfg: &ArrayConfig,
    theta_rx: f64,
    sectors: &SectorSet,
    grid_len: usize,
) -> Result<NoiseBeamDesign> {
    let n = cfg.n_antennas;
    if grid_len <= n {
        return Err(Error::InvalidParameter(format!(
            "design grid needs more than {n} points, got {grid_len}"
        )));
    }
    let grid = design_grid(grid_len);
    let q = sector_target(&grid, sectors, theta_rx);
    if q.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateSectors(
            "no design-grid point falls inside the sectors".into(),
        ));
    }
    let b = householder_complement(cfg, theta_rx)?;
    let a_h = DMatrix::from_fn(grid_len, n, |i, j| {
        let phase = crate::array::element_phase(n, cfg.spacing_ratio, j, grid[i].cos());
        Complex64::from_polar(1.0, -phase)
    });
    let z = a_h * &b;
    let q = DVector::from_iterator(grid_len, q.iter().map(|&v| Complex64::new(v, 0.0)));
    let x = lstsq(&z, &q);
    let residual = (&z * &x - &q).norm();
    let f = &b * x;
    let beam = BeamVector::normalized(f.as_slice(), BeamKind::Digital)
        .map_err(|_| Error::DegenerateSectors("least-squares fit is identically zero".into()))?;
    let samples = sectors.sample_angles();
    if samples.is_empty() {
        return Err(Error::DegenerateSectors("sector sampling is empty".into()));
    }
    let sector_gain =
        samples.iter().map(|&t| beam.gain(cfg, t)).sum::<f64>() / samples.len() as f64;
    Ok(NoiseBeamDesign {
        beam,
        residual,
        sector_gain,
        c0: sector_gain * sectors.measure() / PI,
    })
}

/// Power split `f(k) = sqrt(eps) f_s + sqrt(1 - eps) f_n eta(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinedPrecoder {
    pub f_s: BeamVector,
    pub f_n: BeamVector,
    pub epsilon: f64,
}

impl CombinedPrecoder {
    pub fn new(f_s: BeamVector, f_n: BeamVector, epsilon: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in [0, 1], got {epsilon}"
            )));
        }
        if f_s.len() != f_n.len() {
            return Err(Error::InvalidParameter("beam lengths differ".into()));
        }
        let overlap = inner(&f_s.entries, &f_n.entries).norm();
        if overlap > ORTHO_TOL {
            return Err(Error::NonOrthogonalInputs(overlap));
        }
        Ok(CombinedPrecoder { f_s, f_n, epsilon })
    }

    /// Precoder for the unit-modulus noise symbol `eta`.
    pub fn symbol(&self, eta: Complex64) -> BeamVector {
        let (a, b) = (self.epsilon.sqrt(), (1.0 - self.epsilon).sqrt());
        let entries = self
            .f_s
            .entries
            .iter()
            .zip(&self.f_n.entries)
            .map(|(s, n)| s * a + n * eta * b)
            .collect();
        BeamVector {
            entries,
            kind: self.f_s.kind,
        }
    }
}

/// `eta = exp(j Theta)` with `Theta` uniform on `[0, 2 pi)`.
pub fn draw_eta<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.random_range(0.0..2.0 * PI))
}

/// Combined precoder of symbol `k`, with `eta(k)` taken from substream `k` of `seed`.
pub fn combined_precoder(
    f_s: &BeamVector,
    f_n: &BeamVector,
    epsilon: f64,
    k: u64,
    seed: u64,
) -> Result<BeamVector> {
    let p = CombinedPrecoder::new(f_s.clone(), f_n.clone(), epsilon)?;
    Ok(p.symbol(draw_eta(&mut stream_rng(seed, k))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectorRole {
    /// Fixed amplitude `sqrt(alpha)`.
    Receiver,
    /// Random amplitude `x sqrt(alpha)`, `x ~ N(0, 1)` per draw.
    Eavesdropper,
}

/// One sector of the multisector target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorGain {
    pub lo: f64,
    pub hi: f64,
    /// Power fraction; the fractions of all sectors sum to one.
    pub alpha: f64,
    pub role: SectorRole,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultisectorDesign {
    pub beam: BeamVector,
    /// `‖A^H x - g‖` before normalization.
    pub residual: f64,
    /// Target amplitude drawn for each sector, in input order.
    pub amplitudes: Vec<f64>,
}

/// Uniform grid of `len` angles over `[0, pi]`.
pub fn half_turn_grid(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![0.0];
    }
    (0..len).map(|k| PI * k as f64 / (len - 1) as f64).collect()
}

/// Least-squares beam `C (A A^H)^{-1} A g` for a piecewise-constant target
/// `g` on a `grid_len` point grid over `[0, pi]`.
pub fn multisector_precoder<R: Rng + ?Sized>(
    cfg: &ArrayConfig,
    sectors: &[SectorGain],
    grid_len: usize,
    rng: &mut R,
) -> Result<MultisectorDesign> {
    let n = cfg.n_antennas;
    if sectors.is_empty() {
        return Err(Error::DegenerateSectors("no sectors given".into()));
    }
    let total: f64 = sectors.iter().map(|s| s.alpha).sum();
    if sectors.iter().any(|s| s.alpha < 0.0) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "sector power fractions must be nonnegative and sum to 1, got {total}"
        )));
    }
    for s in sectors {
        check_angle(s.lo)?;
        check_angle(s.hi)?;
        if s.lo > s.hi {
            return Err(Error::DegenerateSectors(format!(
                "empty sector [{}, {}]",
                s.lo, s.hi
            )));
        }
    }
    if grid_len < n {
        return Err(Error::InvalidParameter(format!(
            "grid needs at least {n} points, got {grid_len}"
        )));
    }
    let amplitudes: Vec<f64> = sectors
        .iter()
        .map(|s| match s.role {
            SectorRole::Receiver => s.alpha.sqrt(),
            SectorRole::Eavesdropper => {
                let x: f64 = StandardNormal.sample(rng);
                x * s.alpha.sqrt()
            }
        })
        .collect();
    let grid = half_turn_grid(grid_len);
    let g = DVector::from_iterator(
        grid_len,
        grid.iter().map(|&t| {
            let amp = sectors
                .iter()
                .zip(&amplitudes)
                .find(|(s, _)| t >= s.lo - 1e-12 && t <= s.hi + 1e-12)
                .map_or(0.0, |(_, a)| *a);
            Complex64::new(amp, 0.0)
        }),
    );
    let cols: Vec<Vec<Complex64>> = grid
        .iter()
        .map(|&t| array_response(n, cfg.spacing_ratio, t))
        .collect();
    let a = linalg::columns_to_matrix(&cols);
    let gram = &a * a.adjoint();
    let cond = condition_number(&gram);
    if !(cond <= GRAM_COND_MAX) {
        return Err(Error::SingularGram(cond));
    }
    let rhs = &a * &g;
    let x = gram
        .cholesky()
        .ok_or(Error::SingularGram(cond))?
        .solve(&rhs);
    let residual = (a.adjoint() * &x - &g).norm();
    let beam = BeamVector::normalized(x.as_slice(), BeamKind::Digital)
        .map_err(|_| Error::DegenerateSectors("target has no energy on the grid".into()))?;
    Ok(MultisectorDesign {
        beam,
        residual,
        amplitudes,
    })
}
