//! Constrained RF dictionaries and greedy sparse factorization.
//!
//! An RF chain can only apply a quantized steering vector, optionally with
//! groups of antennas switched off. OMP picks `n_rf` such columns and fits an
//! unconstrained baseband vector on top.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rayon::prelude::*;

use crate::array::{array_response, ArrayConfig};
use crate::beam::{BeamKind, BeamVector};
use crate::error::{Error, Result};
use crate::linalg::{self, inner, lstsq, pinv};
use crate::precoder::ORTHO_TOL;
use crate::rng::stream_rng;

pub const DEFAULT_MAX_COLUMNS: usize = 1_000_000;

/// How antennas are assigned to switching groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupAssignment {
    /// Antennas `g N_g .. (g + 1) N_g - 1` form group `g`.
    Contiguous,
    /// Blocks of a seeded random permutation.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DictionaryOptions {
    pub switching: bool,
    pub groups: GroupAssignment,
    pub max_columns: usize,
}

impl Default for DictionaryOptions {
    fn default() -> Self {
        DictionaryOptions {
            switching: true,
            groups: GroupAssignment::Contiguous,
            max_columns: DEFAULT_MAX_COLUMNS,
        }
    }
}

/// Candidate RF beamformers, one per (quantized angle, group mask) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct RfDictionary {
    /// `N_T x K` matrix of candidate columns.
    pub columns: DMatrix<Complex64>,
    /// `L = 2^b`.
    pub n_quantized_angles: usize,
    /// Bit `g` set means group `g` is on.
    pub group_masks: Vec<u64>,
    /// Group of each antenna.
    pub antenna_group: Vec<usize>,
    column_norms: Vec<f64>,
}

impl RfDictionary {
    pub fn n_columns(&self) -> usize {
        self.columns.ncols()
    }

    /// `(angle index, mask)` of column `j`.
    pub fn column_meta(&self, j: usize) -> (usize, u64) {
        let per_angle = self.group_masks.len();
        (j / per_angle, self.group_masks[j % per_angle])
    }

    /// `theta_l = 2 pi l / L`.
    pub fn quantized_angle(&self, l: usize) -> f64 {
        2.0 * std::f64::consts::PI * l as f64 / self.n_quantized_angles as f64
    }

    pub fn column_norm(&self, j: usize) -> f64 {
        self.column_norms[j]
    }
}

fn antenna_groups(cfg: &ArrayConfig, groups: GroupAssignment) -> Vec<usize> {
    let n = cfg.n_antennas;
    let mut order: Vec<usize> = (0..n).collect();
    if let GroupAssignment::Random { seed } = groups {
        order.shuffle(&mut stream_rng(seed, 0));
    }
    let mut group = vec![0; n];
    for (pos, &ant) in order.iter().enumerate() {
        group[ant] = pos / cfg.group_size;
    }
    group
}

/// Builds the dictionary with contiguous groups and the default column cap.
pub fn build_dictionary(cfg: &ArrayConfig, switching: bool) -> Result<RfDictionary> {
    build_dictionary_with(
        cfg,
        DictionaryOptions {
            switching,
            ..Default::default()
        },
    )
}

pub fn build_dictionary_with(cfg: &ArrayConfig, opts: DictionaryOptions) -> Result<RfDictionary> {
    cfg.validate()?;
    let n = cfg.n_antennas;
    let n_groups = cfg.n_groups();
    let l = 1usize << cfg.phase_bits;
    let n_masks: u128 = if opts.switching {
        if n_groups >= 127 {
            u128::MAX
        } else {
            (1u128 << n_groups) - 1
        }
    } else {
        1
    };
    let total = n_masks.saturating_mul(l as u128);
    if total > opts.max_columns as u128 {
        return Err(Error::DictionaryOverflow {
            columns: total,
            cap: opts.max_columns,
        });
    }
    let full = if n_groups >= 64 {
        u64::MAX
    } else {
        (1u64 << n_groups) - 1
    };
    let group_masks: Vec<u64> = if opts.switching {
        (1..=full).collect()
    } else {
        vec![full]
    };
    let antenna_group = antenna_groups(cfg, opts.groups);
    let k = total as usize;
    let mut columns = DMatrix::zeros(n, k);
    let mut column_norms = Vec::with_capacity(k);
    for li in 0..l {
        let theta = 2.0 * std::f64::consts::PI * li as f64 / l as f64;
        let a = array_response(n, cfg.spacing_ratio, theta);
        for (mi, &mask) in group_masks.iter().enumerate() {
            let j = li * group_masks.len() + mi;
            let mut active = 0usize;
            for (i, z) in a.iter().enumerate() {
                if mask >> antenna_group[i] & 1 == 1 {
                    columns[(i, j)] = *z;
                    active += 1;
                }
            }
            column_norms.push((active as f64).sqrt());
        }
    }
    Ok(RfDictionary {
        columns,
        n_quantized_angles: l,
        group_masks,
        antenna_group,
        column_norms,
    })
}

/// Sparse factorization `f ~ F_RF f_BB`.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridPrecoder {
    /// `N_T x N_RF`, columns copied from the dictionary.
    pub rf_matrix: DMatrix<Complex64>,
    pub baseband: Vec<Complex64>,
    /// `F_RF f_BB`, unit norm.
    pub reconstructed: BeamVector,
    /// `‖target - F_RF f_BB‖` before the final rescaling.
    pub residual_norm: f64,
    /// Dictionary indices of the RF columns, in selection order.
    pub selected: Vec<usize>,
    /// Set when the best-scoring column was already selected and the next
    /// best distinct column was taken instead.
    pub repeat_skipped: bool,
}

fn best_column(dict: &RfDictionary, r: &[Complex64], selected: &[usize]) -> (usize, bool) {
    let n = r.len();
    let score = |j: usize| {
        let col = &dict.columns.as_slice()[j * n..(j + 1) * n];
        inner(col, r).norm() / dict.column_norms[j]
    };
    // Highest score wins; ties go to the lowest index so the result does not
    // depend on how rayon splits the scan.
    let pick = |a: (f64, usize), b: (f64, usize)| {
        if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
            b
        } else {
            a
        }
    };
    let best = (0..dict.n_columns())
        .into_par_iter()
        .filter(|j| !selected.contains(j))
        .map(|j| (score(j), j))
        .reduce(|| (f64::NEG_INFINITY, usize::MAX), pick);
    let repeat = selected.iter().any(|&j| score(j) > best.0);
    (best.1, repeat)
}

fn select_columns(dict: &RfDictionary, rf: &[usize]) -> DMatrix<Complex64> {
    DMatrix::from_fn(dict.columns.nrows(), rf.len(), |i, k| {
        dict.columns[(i, rf[k])]
    })
}

fn finish(
    dict: &RfDictionary,
    target: &DVector<Complex64>,
    selected: Vec<usize>,
    baseband: DVector<Complex64>,
    repeat_skipped: bool,
) -> Result<HybridPrecoder> {
    let rf_matrix = select_columns(dict, &selected);
    let recon = &rf_matrix * &baseband;
    let residual_norm = (target - &recon).norm();
    let scale = recon.norm();
    if !(scale > 1e-12 * target.norm()) {
        return Err(Error::InvalidParameter(
            "factorization reconstructs the zero vector".into(),
        ));
    }
    let baseband: Vec<Complex64> = baseband.iter().map(|z| z / scale).collect();
    let reconstructed = BeamVector {
        entries: recon.iter().map(|z| z / scale).collect(),
        kind: BeamKind::Hybrid,
    };
    Ok(HybridPrecoder {
        rf_matrix,
        baseband,
        reconstructed,
        residual_norm,
        selected,
        repeat_skipped,
    })
}

/// Orthogonal matching pursuit with `n_rf` iterations.
///
/// Each iteration adds the column with the largest `|d^H r| / ‖d‖`, refits
/// the baseband weights of all selected columns by least squares and updates
/// the residual `r`.
pub fn omp_factorize(
    target: &[Complex64],
    dict: &RfDictionary,
    n_rf: usize,
) -> Result<HybridPrecoder> {
    let (selected, repeat) = omp_select(target, dict, n_rf)?;
    let t = linalg::to_dvector(target);
    let x = lstsq(&select_columns(dict, &selected), &t);
    finish(dict, &t, selected, x, repeat)
}

fn omp_select(
    target: &[Complex64],
    dict: &RfDictionary,
    n_rf: usize,
) -> Result<(Vec<usize>, bool)> {
    if target.len() != dict.columns.nrows() {
        return Err(Error::InvalidParameter(format!(
            "target has {} entries, dictionary columns have {}",
            target.len(),
            dict.columns.nrows()
        )));
    }
    if n_rf == 0 || n_rf > dict.n_columns() {
        return Err(Error::InvalidParameter(format!(
            "n_rf must lie in [1, {}], got {n_rf}",
            dict.n_columns()
        )));
    }
    if linalg::norm(target) == 0.0 {
        return Err(Error::InvalidParameter(
            "cannot factorize a zero target".into(),
        ));
    }
    let t = linalg::to_dvector(target);
    let mut r = t.clone();
    let mut selected = Vec::with_capacity(n_rf);
    let mut repeat_skipped = false;
    for _ in 0..n_rf {
        let (j, repeat) = best_column(dict, r.as_slice(), &selected);
        repeat_skipped |= repeat;
        selected.push(j);
        let f = select_columns(dict, &selected);
        let x = lstsq(&f, &t);
        r = &t - f * x;
    }
    Ok((selected, repeat_skipped))
}

/// Least-squares fit of `target` by `F x` subject to `C^H F x = 0`.
fn constrained_fit(
    f: &DMatrix<Complex64>,
    target: &DVector<Complex64>,
    constraints: &[&[Complex64]],
) -> DVector<Complex64> {
    let c = linalg::columns_to_matrix(&constraints.iter().map(|c| c.to_vec()).collect::<Vec<_>>());
    let k = c.adjoint() * f;
    // Constraint rows that are already numerically satisfied are dropped.
    let floor = 1e-12 * f.norm();
    let p = DMatrix::identity(f.ncols(), f.ncols()) - pinv(&k, floor) * &k;
    let y = lstsq(&(f * &p), target);
    p * y
}

/// Separate factorizations of the data and noise beams, so the per-symbol
/// noise phase can be applied in baseband.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridComponents {
    /// Factorization of `f_s`; absent when `epsilon = 0`.
    pub data: Option<HybridPrecoder>,
    /// Factorization of `f_n`; absent when `epsilon = 1`.
    pub noise: Option<HybridPrecoder>,
    pub epsilon: f64,
}

impl HybridComponents {
    /// Per-symbol precoder `sqrt(eps) f_s_hat + sqrt(1 - eps) eta f_n_hat`,
    /// renormalized.
    pub fn symbol(&self, eta: Complex64) -> BeamVector {
        self.mix(self.epsilon, eta)
    }

    /// Same as [`symbol`](Self::symbol) with a different power split. Both
    /// components must be present unless `epsilon` is 0 or 1.
    pub fn mix(&self, epsilon: f64, eta: Complex64) -> BeamVector {
        let (a, b) = (epsilon.sqrt(), (1.0 - epsilon).sqrt());
        let n = self
            .data
            .as_ref()
            .or(self.noise.as_ref())
            .map_or(0, |h| h.reconstructed.len());
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        if a > 0.0 {
            let d = self
                .data
                .as_ref()
                .expect("data component was not factorized");
            for (o, z) in v.iter_mut().zip(&d.reconstructed.entries) {
                *o += z * a;
            }
        }
        if b > 0.0 {
            let nz = self
                .noise
                .as_ref()
                .expect("noise component was not factorized");
            for (o, z) in v.iter_mut().zip(&nz.reconstructed.entries) {
                *o += z * eta * b;
            }
        }
        let mut out = BeamVector::normalized(&v, BeamKind::Hybrid)
            .expect("orthogonal unit components give a nonzero mix");
        out.kind = BeamKind::Hybrid;
        out
    }

    /// Distinct RF columns over both components.
    pub fn rf_chains_used(&self) -> usize {
        let mut all: Vec<usize> = self
            .data
            .iter()
            .chain(self.noise.iter())
            .flat_map(|h| h.selected.iter().copied())
            .collect();
        all.sort_unstable();
        all.dedup();
        all.len()
    }
}

/// Factorizes `f_s` and `f_n` with `n_rf` columns each.
///
/// The noise baseband is refit under the constraint that the reconstructed
/// noise beam stays orthogonal to both `f_s` and its reconstruction. This
/// keeps the receiver direction free of artificial noise and makes the
/// per-symbol norm independent of `eta`.
pub fn factorize_components(
    f_s: &BeamVector,
    f_n: &BeamVector,
    epsilon: f64,
    dict: &RfDictionary,
    n_rf: usize,
) -> Result<HybridComponents> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::InvalidParameter(format!(
            "epsilon must lie in [0, 1], got {epsilon}"
        )));
    }
    let overlap = inner(&f_s.entries, &f_n.entries).norm();
    if overlap > ORTHO_TOL {
        return Err(Error::NonOrthogonalInputs(overlap));
    }
    let data = if epsilon > 0.0 {
        Some(omp_factorize(&f_s.entries, dict, n_rf)?)
    } else {
        None
    };
    let noise = if epsilon < 1.0 {
        let (selected, repeat) = omp_select(&f_n.entries, dict, n_rf)?;
        let f = select_columns(dict, &selected);
        let t = linalg::to_dvector(&f_n.entries);
        let mut constraints: Vec<&[Complex64]> = vec![&f_s.entries];
        if let Some(d) = &data {
            constraints.push(&d.reconstructed.entries);
        }
        let x = constrained_fit(&f, &t, &constraints);
        Some(finish(dict, &t, selected, x, repeat).map_err(|_| {
            Error::InvalidParameter(format!(
                "{n_rf} RF columns cannot carry a noise beam orthogonal to the data beam"
            ))
        })?)
    } else {
        None
    };
    Ok(HybridComponents {
        data,
        noise,
        epsilon,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precoder::{matched_filter, noise_beam, CombinedPrecoder, SectorSet};
    use proptest::prelude::*;
    use rand_distr::{Distribution, StandardNormal};
    use std::f64::consts::PI;

    fn cfg(n: usize, bits: u32, ng: usize) -> ArrayConfig {
        ArrayConfig::ula(n).unwrap().with_rf(1, bits, ng).unwrap()
    }

    #[test]
    fn column_counts() {
        assert_eq!(
            build_dictionary(&cfg(16, 6, 8), true).unwrap().n_columns(),
            192
        );
        assert_eq!(
            build_dictionary(&cfg(16, 6, 8), false).unwrap().n_columns(),
            64
        );
        assert_eq!(
            build_dictionary(&cfg(32, 8, 8), true).unwrap().n_columns(),
            3840
        );
    }

    #[test]
    fn overflow_is_reported() {
        let c = cfg(64, 10, 2);
        match build_dictionary(&c, true) {
            Err(Error::DictionaryOverflow { columns, cap }) => {
                assert_eq!(cap, DEFAULT_MAX_COLUMNS);
                assert!(columns > cap as u128);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn columns_are_masked_steering_vectors() {
        let c = cfg(16, 4, 4);
        let d = build_dictionary(&c, true).unwrap();
        for j in 0..d.n_columns() {
            let (l, mask) = d.column_meta(j);
            assert_ne!(mask, 0);
            let a = array_response(16, 0.5, d.quantized_angle(l));
            let mut active = 0;
            for (i, ai) in a.iter().enumerate() {
                let z = d.columns[(i, j)];
                if mask >> (i / 4) & 1 == 1 {
                    assert!((z - ai).norm() < 1e-15);
                    active += 1;
                } else {
                    assert_eq!(z, Complex64::new(0.0, 0.0));
                }
            }
            assert!(active > 0);
            assert!((d.column_norm(j) - (active as f64).sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn random_groups_are_balanced_and_seeded() {
        let c = cfg(32, 3, 8);
        let opts = |seed| DictionaryOptions {
            groups: GroupAssignment::Random { seed },
            ..Default::default()
        };
        let a = build_dictionary_with(&c, opts(4)).unwrap();
        let b = build_dictionary_with(&c, opts(4)).unwrap();
        assert_eq!(a, b);
        for g in 0..4 {
            assert_eq!(a.antenna_group.iter().filter(|&&x| x == g).count(), 8);
        }
        assert_ne!(
            a.antenna_group,
            build_dictionary(&c, true).unwrap().antenna_group
        );
    }

    #[test]
    fn single_column_is_recovered_exactly() {
        let c = cfg(16, 6, 8);
        let d = build_dictionary(&c, true).unwrap();
        let j = 77;
        let col: Vec<Complex64> = d.columns.column(j).iter().copied().collect();
        let h = omp_factorize(&col, &d, 1).unwrap();
        assert!(h.residual_norm <= 1e-10);
        assert!((h.reconstructed.norm() - 1.0).abs() < 1e-12);
        assert!(!h.repeat_skipped);
    }

    #[test]
    fn exact_components_reproduce_digital_precoder() {
        // With 2-bit phases the dictionary holds a(90 deg) and a(0), which are
        // orthogonal for even N_T, so both components factorize exactly.
        let c = cfg(16, 2, 16);
        let d = build_dictionary(&c, false).unwrap();
        let fs = matched_filter(&c, PI / 2.0).unwrap();
        let fnb = BeamVector::normalized(&array_response(16, 0.5, 0.0), BeamKind::Digital).unwrap();
        let eps = 0.4;
        let h = factorize_components(&fs, &fnb, eps, &d, 1).unwrap();
        assert!(h.data.as_ref().unwrap().residual_norm < 1e-10);
        assert!(h.noise.as_ref().unwrap().residual_norm < 1e-10);
        let digital = CombinedPrecoder::new(fs.clone(), fnb.clone(), eps).unwrap();
        for k in 0..8 {
            let eta = Complex64::from_polar(1.0, k as f64);
            let a = h.symbol(eta);
            let b = digital.symbol(eta);
            for (x, y) in a.entries.iter().zip(&b.entries) {
                assert!((x - y).norm() < 1e-10);
            }
        }
        let only_data = factorize_components(&fs, &fnb, 1.0, &d, 1).unwrap();
        assert!(only_data.noise.is_none());
        let s = only_data.symbol(Complex64::new(0.0, 1.0));
        let fh = &only_data.data.as_ref().unwrap().reconstructed;
        assert_eq!(s.entries, fh.entries);
    }

    #[test]
    fn components_keep_receiver_clean() {
        let c = ArrayConfig::ula(32).unwrap().with_rf(10, 6, 8).unwrap();
        let rx = 120f64.to_radians();
        let d = build_dictionary(&c, true).unwrap();
        let fs = matched_filter(&c, rx).unwrap();
        let t = SectorSet::omnidirectional(rx, PI / 180.0).unwrap();
        let fnb = noise_beam(&c, rx, &t, 360).unwrap().beam;
        let h = factorize_components(&fs, &fnb, 0.5, &d, 10).unwrap();
        let nz = h.noise.as_ref().unwrap();
        assert!(nz.reconstructed.response(&c, rx).norm() <= 1e-8);
        assert!(h.rf_chains_used() <= 20);
        for k in 0..16 {
            let f = h.symbol(Complex64::from_polar(1.0, k as f64 * 0.4));
            assert!((f.norm() - 1.0).abs() < 1e-10);
        }
        // The hybrid data beam tracks the digital gain at the receiver within 1 dB.
        let gh = h.data.as_ref().unwrap().reconstructed.gain(&c, rx);
        let gd = fs.gain(&c, rx);
        assert!((10.0 * (gh / gd).log10()).abs() <= 1.0);
    }

    #[test]
    fn components_stay_orthogonal_with_two_sectors() {
        // Few-column refit constraints; a wide rank-deficient pseudoinverse once leaked here.
        let c = ArrayConfig::ula(32).unwrap().with_rf(8, 8, 8).unwrap();
        let rx = PI / 2.0;
        let t =
            SectorSet::new(vec![(0.0, PI / 3.0), (2.0 * PI / 3.0, PI)], PI / 180.0, rx).unwrap();
        let fs = matched_filter(&c, rx).unwrap();
        let fnb = noise_beam(&c, rx, &t, 360).unwrap().beam;
        let d = build_dictionary(&c, true).unwrap();
        let h = factorize_components(&fs, &fnb, 0.1, &d, 8).unwrap();
        let nz = &h.noise.as_ref().unwrap().reconstructed;
        let dz = &h.data.as_ref().unwrap().reconstructed;
        assert!(nz.response(&c, rx).norm() <= 1e-10);
        assert!(linalg::inner(&dz.entries, &nz.entries).norm() <= 1e-10);
    }

    #[test]
    fn parameter_errors() {
        let c = cfg(8, 3, 8);
        let d = build_dictionary(&c, false).unwrap();
        let t = vec![Complex64::new(1.0, 0.0); 8];
        assert!(omp_factorize(&t, &d, 0).is_err());
        assert!(omp_factorize(&t, &d, 9).is_err());
        assert!(omp_factorize(&[Complex64::new(0.0, 0.0); 8], &d, 1).is_err());
        assert!(omp_factorize(&t[..4], &d, 1).is_err());
    }

    fn random_target(seed: u64, n: usize) -> Vec<Complex64> {
        let mut rng = stream_rng(seed, 0);
        let v: Vec<Complex64> = (0..n)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            })
            .collect();
        linalg::normalized(&v).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn residual_is_non_increasing(seed in any::<u64>()) {
            let c = cfg(16, 5, 4);
            let d = build_dictionary(&c, true).unwrap();
            let t = random_target(seed, 16);
            let mut prev = f64::INFINITY;
            for n_rf in 1..=16 {
                let h = omp_factorize(&t, &d, n_rf).unwrap();
                prop_assert!(h.residual_norm <= prev + 1e-12);
                prop_assert!((h.reconstructed.norm() - 1.0).abs() < 1e-10);
                prev = h.residual_norm;
            }
        }

        #[test]
        fn superset_dictionary_wins_first_pick(seed in any::<u64>()) {
            let c = cfg(16, 5, 4);
            let fixed = build_dictionary(&c, false).unwrap();
            let switched = build_dictionary(&c, true).unwrap();
            let t = random_target(seed, 16);
            let rf = omp_factorize(&t, &fixed, 1).unwrap().residual_norm;
            let rs = omp_factorize(&t, &switched, 1).unwrap().residual_norm;
            prop_assert!(rs <= rf + 1e-12);
        }
    }
}
