//! Runs each experiment kind and assembles its result table.

use mmsec_core::analog::{beta_stats_closed_form, beta_stats_exact, check_subset_size};
use mmsec_core::codebook::{build_dictionary, factorize_components, omp_factorize};
use mmsec_core::precoder::{matched_filter, multisector_precoder, noise_beam};
use mmsec_core::rng::stream_rng;
use mmsec_core::secrecy::analog_secrecy_bound;
use mmsec_core::sim::{
    design_hybrid, mc_beta_cdf, mc_beta_moments_multi, mc_secrecy_analog, mc_secrecy_hybrid,
    HybridSetup, HybridSweep, HybridSweepPoint,
};
use mmsec_core::stats::{empirical_cdf, normal_cdf};
use mmsec_core::{ArrayConfig, BeamVector, CombinedPrecoder, McConfig, Scenario, SectorSet};

use crate::error::CliError;
use crate::spec::{
    beam_sectors, hybrid_rf, CodebookTarget, Experiment, ExperimentSpec, HybridSpec, Lemma1Table,
    Technique,
};
use crate::table::Table;

/// Core objects built from a validated spec.
pub struct Resolved {
    pub cfg: ArrayConfig,
    pub scn: Scenario,
    pub sectors: Option<SectorSet>,
    pub mc: McConfig,
}

impl Resolved {
    pub fn new(spec: &ExperimentSpec) -> Result<Self, CliError> {
        let cfg = spec.array.build()?;
        let scn = spec.scenario.build()?;
        let sectors = match &spec.sectors {
            Some(s) => Some(s.build(scn.theta_rx)?),
            None => None,
        };
        Ok(Resolved {
            cfg,
            scn,
            sectors,
            mc: spec.mc.build()?,
        })
    }

    fn sectors(&self) -> Result<&SectorSet, CliError> {
        self.sectors
            .as_ref()
            .ok_or_else(|| CliError::config("sectors", "this experiment needs noise sectors"))
    }
}

/// Rejects subset sizes before any work starts, naming the offending field.
fn check_subset_sizes(field: &str, n: usize, ms: &[usize]) -> Result<(), CliError> {
    ms.iter()
        .try_for_each(|&m| check_subset_size(n, m))
        .map_err(|e| CliError::field(field, e))
}

pub fn execute(spec: &ExperimentSpec) -> Result<Table, CliError> {
    let r = Resolved::new(spec)?;
    let n = r.cfg.n_antennas;
    match &spec.experiment {
        Experiment::Lemma1 { m, .. } | Experiment::SweepM { m, .. } => {
            check_subset_sizes("experiment.m", n, m)?
        }
        Experiment::SweepTheta {
            technique: Technique::Analog { m },
            ..
        } => check_subset_sizes("experiment.technique.m", n, &[*m])?,
        _ => {}
    }
    let mut table = match &spec.experiment {
        Experiment::Pattern {
            epsilon,
            step_deg,
            hybrid,
            design_grid_len,
        } => pattern(&r, *epsilon, *step_deg, *hybrid, *design_grid_len)?,
        Experiment::Lemma1 {
            table,
            m,
            theta_deg,
            cdf_points,
        } => match table {
            Lemma1Table::Cdf => lemma1_cdf(&r, m, theta_deg, *cdf_points)?,
            Lemma1Table::Moments => lemma1_moments(&r, m, theta_deg)?,
        },
        Experiment::SweepTheta {
            technique,
            theta_deg,
        } => {
            let thetas = theta_deg.values()?;
            match technique {
                Technique::Analog { m } => sweep_theta_analog(&r, *m, &thetas)?,
                Technique::ArtificialNoise {
                    epsilon,
                    hybrid,
                    design_grid_len,
                } => sweep_theta_an(&r, *epsilon, *hybrid, *design_grid_len, &thetas)?,
            }
        }
        Experiment::SweepM { m, theta_deg } => sweep_m(&r, m, &theta_deg.values()?)?,
        Experiment::SweepEps {
            theta_deg,
            epsilon,
            hybrid,
            design_grid_len,
            c0,
        } => sweep_eps(
            &r,
            *theta_deg,
            &epsilon.values()?,
            *hybrid,
            *design_grid_len,
            *c0,
        )?,
        Experiment::Codebook {
            target,
            n_rf,
            design_grid_len,
        } => codebook(&r, *target, n_rf, *design_grid_len)?,
        Experiment::Multisector {
            beams,
            step_deg,
            design_grid_len,
            draws,
            hybrid,
        } => multisector(&r, beams, *step_deg, *design_grid_len, *draws, *hybrid)?,
    };
    table.set_meta("n_trials", r.mc.n_trials);
    table.set_meta("seed", r.mc.seed);
    Ok(table)
}

fn to_db(gain: f64) -> f64 {
    10.0 * gain.max(1e-30).log10()
}

fn angle_axis(step_deg: f64) -> Result<Vec<f64>, CliError> {
    if !(step_deg > 0.0 && step_deg <= 90.0) {
        return Err(CliError::config(
            "step_deg",
            format!("must lie in (0, 90], got {step_deg}"),
        ));
    }
    let n = (180.0 / step_deg + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| k as f64 * step_deg).collect())
}

/// Degrees to radians, dropping the receiver direction.
fn eavesdropper_angles(thetas_deg: &[f64], theta_rx: f64) -> (Vec<f64>, Vec<f64>) {
    thetas_deg
        .iter()
        .map(|d| (*d, d.to_radians()))
        .filter(|(_, t)| (t.cos() - theta_rx.cos()).abs() >= 1e-12)
        .unzip()
}

fn check_epsilon(eps: f64) -> Result<(), CliError> {
    if (0.0..=1.0).contains(&eps) {
        Ok(())
    } else {
        Err(CliError::config(
            "epsilon",
            format!("must lie in [0, 1], got {eps}"),
        ))
    }
}

fn pattern(
    r: &Resolved,
    epsilon: f64,
    step_deg: f64,
    hybrid: Option<HybridSpec>,
    grid_len: usize,
) -> Result<Table, CliError> {
    check_epsilon(epsilon)?;
    let cfg = &r.cfg;
    let theta_rx = r.scn.theta_rx;
    let sectors = r.sectors()?;
    let f_s = matched_filter(cfg, theta_rx)?;
    let nb = noise_beam(cfg, theta_rx, sectors, grid_len)?;
    CombinedPrecoder::new(f_s.clone(), nb.beam.clone(), epsilon)?;
    let mut beams: Vec<(&str, Option<BeamVector>, Option<BeamVector>)> =
        vec![("digital", Some(f_s.clone()), Some(nb.beam.clone()))];
    let mut rf_used = None;
    if let Some(h) = hybrid {
        let dict = build_dictionary(cfg, h.switching)?;
        let comp = factorize_components(&f_s, &nb.beam, epsilon, &dict, cfg.n_rf)?;
        rf_used = Some(comp.rf_chains_used());
        beams.push((
            "hybrid",
            comp.data.map(|d| d.reconstructed),
            comp.noise.map(|n| n.reconstructed),
        ));
    }
    let mut cols = vec!["theta_deg".to_string()];
    for (name, _, _) in &beams {
        for part in ["data", "noise", "mean"] {
            cols.push(format!("{name}_{part}_gain_db"));
        }
    }
    let mut t = Table::new(&cols);
    for d in angle_axis(step_deg)? {
        let th = d.to_radians();
        let mut row = vec![d];
        for (_, s, n) in &beams {
            let gs = s.as_ref().map_or(0.0, |b| b.gain(cfg, th));
            let gn = n.as_ref().map_or(0.0, |b| b.gain(cfg, th));
            row.extend([
                to_db(gs),
                to_db(gn),
                to_db(epsilon * gs + (1.0 - epsilon) * gn),
            ]);
        }
        t.push(row);
    }
    let plot: Vec<String> = beams
        .iter()
        .map(|(name, _, _)| format!("{name}_mean_gain_db"))
        .collect();
    let plot_refs: Vec<&str> = plot.iter().map(String::as_str).collect();
    let mut t = t.plot(&plot_refs);
    t.set_meta("c0", nb.c0);
    t.set_meta("sector_gain", nb.sector_gain);
    t.set_meta("design_residual", nb.residual);
    t.set_meta("sector_measure_deg", sectors.measure().to_degrees());
    t.set_meta("rx_noise_leakage", nb.beam.response(cfg, theta_rx).norm());
    if let Some((_, _, Some(n))) = beams.get(1) {
        t.set_meta("hybrid_rx_noise_leakage", n.response(cfg, theta_rx).norm());
    }
    if let Some(k) = rf_used {
        t.set_meta("rf_chains_used", k);
    }
    Ok(t)
}

fn single<T: Copy>(field: &str, v: &[T]) -> Result<T, CliError> {
    match v {
        [x] => Ok(*x),
        _ => Err(CliError::config(
            field,
            "a CDF table needs exactly one value",
        )),
    }
}

fn lemma1_cdf(
    r: &Resolved,
    m: &[usize],
    theta_deg: &[f64],
    points: usize,
) -> Result<Table, CliError> {
    let m = single("experiment.m", m)?;
    let theta = single("experiment.theta_deg", theta_deg)?.to_radians();
    if points < 2 {
        return Err(CliError::config(
            "experiment.cdf_points",
            "need at least 2 points",
        ));
    }
    let res = mc_beta_cdf(&r.cfg, m, theta, r.scn.theta_rx, &r.mc)?;
    let th = res.theory;
    let lo = res.real[0].min(res.imag[0]);
    let hi = res.real[res.real.len() - 1].max(res.imag[res.imag.len() - 1]);
    let f_re = normal_cdf(th.mean.re, th.var_real.sqrt());
    let f_im = normal_cdf(th.mean.im, th.var_imag.sqrt());
    let mut t = Table::new(&[
        "x",
        "cdf_real_emp",
        "cdf_real_theory",
        "cdf_imag_emp",
        "cdf_imag_theory",
    ]);
    for k in 0..points {
        let x = lo + (hi - lo) * k as f64 / (points - 1) as f64;
        t.push(vec![
            x,
            empirical_cdf(&res.real, x),
            f_re(x),
            empirical_cdf(&res.imag, x),
            f_im(x),
        ]);
    }
    let mo = &res.moments;
    t.set_meta("ks_real", res.ks_real);
    t.set_meta("ks_imag", res.ks_imag);
    t.set_meta("mean_real_sim", mo.mean.estimate.re);
    t.set_meta("mean_real_theory", th.mean.re);
    t.set_meta("mean_imag_sim", mo.mean.estimate.im);
    t.set_meta("mean_imag_se", mo.mean.extra("se_imag").unwrap_or(f64::NAN));
    t.set_meta(
        "var_real_sim",
        mo.variance.extra("var_real").unwrap_or(f64::NAN),
    );
    t.set_meta("var_real_theory", th.var_real);
    t.set_meta(
        "var_imag_sim",
        mo.variance.extra("var_imag").unwrap_or(f64::NAN),
    );
    t.set_meta("var_imag_theory", th.var_imag);
    Ok(t)
}

fn lemma1_moments(r: &Resolved, ms: &[usize], theta_deg: &[f64]) -> Result<Table, CliError> {
    let thetas: Vec<f64> = theta_deg.iter().map(|d| d.to_radians()).collect();
    let mut t = Table::new(&[
        "M",
        "theta_deg",
        "mean_sim",
        "mean_sim_se",
        "mean_theory",
        "var_sim",
        "var_sim_se",
        "var_theory",
        "var_exact",
        "var_real_sim",
        "var_real_theory",
        "var_imag_sim",
        "var_imag_theory",
    ])
    .plot(&["var_sim", "var_theory", "var_exact"]);
    let theta_rx = r.scn.theta_rx;
    for &m in ms {
        let res = mc_beta_moments_multi(&r.cfg, m, &thetas, theta_rx, &r.mc)?;
        for ((d, th), mo) in theta_deg.iter().zip(&thetas).zip(&res) {
            let cf = beta_stats_closed_form(&r.cfg, m, *th, theta_rx)?;
            let ex = beta_stats_exact(&r.cfg, m, *th, theta_rx)?;
            let v = &mo.variance;
            t.push(vec![
                m as f64,
                *d,
                mo.mean.estimate.re,
                mo.mean.std_error,
                cf.mean.re,
                v.estimate,
                v.std_error,
                cf.variance,
                ex.variance,
                v.extra("var_real").unwrap_or(f64::NAN),
                cf.var_real,
                v.extra("var_imag").unwrap_or(f64::NAN),
                cf.var_imag,
            ]);
        }
    }
    Ok(t)
}

fn sweep_theta_analog(r: &Resolved, m: usize, thetas_deg: &[f64]) -> Result<Table, CliError> {
    let (degs, thetas) = eavesdropper_angles(thetas_deg, r.scn.theta_rx);
    let sim = mc_secrecy_analog(&r.scn, &r.cfg, m, &thetas, &r.mc)?;
    let conv = mc_secrecy_analog(&r.scn, &r.cfg, r.cfg.n_antennas, &thetas, &r.mc)?;
    let mut t = Table::new(&[
        "theta_deg",
        "rate_sim",
        "rate_sim_se",
        "rate_bound",
        "rate_theory",
        "rate_conventional",
        "rate_conventional_se",
    ])
    .plot(&["rate_sim", "rate_bound", "rate_theory", "rate_conventional"]);
    for (k, (&d, &th)) in degs.iter().zip(&thetas).enumerate() {
        let b = analog_secrecy_bound(&r.scn, &r.cfg, m, th)?;
        t.push(vec![
            d,
            sim[k].estimate,
            sim[k].std_error,
            b.rate_lower_bound,
            b.rate,
            conv[k].estimate,
            conv[k].std_error,
        ]);
    }
    t.set_meta("skipped_receiver_angle", thetas_deg.len() - degs.len());
    Ok(t)
}

fn hybrid_table(
    x_name: &str,
    points: &[HybridSweepPoint],
    x: impl Fn(&HybridSweepPoint) -> f64,
) -> Table {
    let mut t = Table::new(&[
        x_name,
        "rate_digital",
        "rate_digital_se",
        "rate_hybrid",
        "rate_hybrid_se",
        "rate_bound",
        "rate_theory",
    ])
    .plot(&["rate_digital", "rate_hybrid", "rate_bound"]);
    for p in points {
        let (h, hse) = p
            .hybrid
            .as_ref()
            .map_or((f64::NAN, f64::NAN), |h| (h.estimate, h.std_error));
        let (lb, th) = p
            .bound
            .map_or((f64::NAN, f64::NAN), |b| (b.rate_lower_bound, b.rate));
        t.push(vec![
            x(p),
            p.digital.estimate,
            p.digital.std_error,
            h,
            hse,
            lb,
            th,
        ]);
    }
    t
}

fn hybrid_setup(
    r: &Resolved,
    hybrid: Option<HybridSpec>,
    grid_len: usize,
    c0: Option<f64>,
) -> Result<HybridSetup, CliError> {
    Ok(HybridSetup {
        sectors: r.sectors()?.clone(),
        grid_len,
        hybrid: hybrid_rf(&r.cfg, hybrid),
        c0_override: c0,
    })
}

fn design_meta(t: &mut Table, r: &Resolved, setup: &HybridSetup) -> Result<(), CliError> {
    let d = design_hybrid(&r.cfg, r.scn.theta_rx, setup)?;
    t.set_meta("c0", d.c0);
    t.set_meta("sector_measure_deg", setup.sectors.measure().to_degrees());
    if let Some((_, n)) = &d.hybrid {
        t.set_meta(
            "hybrid_rx_noise_leakage",
            n.response(&r.cfg, r.scn.theta_rx).norm(),
        );
    }
    Ok(())
}

fn sweep_theta_an(
    r: &Resolved,
    epsilon: f64,
    hybrid: Option<HybridSpec>,
    grid_len: usize,
    thetas_deg: &[f64],
) -> Result<Table, CliError> {
    check_epsilon(epsilon)?;
    let (degs, thetas) = eavesdropper_angles(thetas_deg, r.scn.theta_rx);
    let setup = hybrid_setup(r, hybrid, grid_len, None)?;
    let sweep = HybridSweep::Theta {
        epsilon,
        values: thetas,
    };
    let points = mc_secrecy_hybrid(&r.scn, &r.cfg, &setup, &sweep, &r.mc)?;
    let mut t = hybrid_table("theta_deg", &points, |_| 0.0);
    for (row, d) in t.rows.iter_mut().zip(&degs) {
        row[0] = *d;
    }
    t.set_meta("skipped_receiver_angle", thetas_deg.len() - degs.len());
    design_meta(&mut t, r, &setup)?;
    Ok(t)
}

fn sweep_m(r: &Resolved, ms: &[usize], thetas_deg: &[f64]) -> Result<Table, CliError> {
    let (_, thetas) = eavesdropper_angles(thetas_deg, r.scn.theta_rx);
    if thetas.is_empty() {
        return Err(CliError::config(
            "experiment.theta_deg",
            "no angle besides the receiver's",
        ));
    }
    let k = thetas.len() as f64;
    let n = r.cfg.n_antennas;
    let conv = mc_secrecy_analog(&r.scn, &r.cfg, n, &thetas, &r.mc)?;
    let conv_mean = conv.iter().map(|c| c.estimate).sum::<f64>() / k;
    let mut t = Table::new(&["M", "rate_sim", "rate_bound", "rate_conventional"]);
    let mut se = Vec::new();
    for &m in ms {
        let sim = mc_secrecy_analog(&r.scn, &r.cfg, m, &thetas, &r.mc)?;
        let mut bound = 0.0;
        for &th in &thetas {
            bound += analog_secrecy_bound(&r.scn, &r.cfg, m, th)?.rate_lower_bound;
        }
        t.push(vec![
            m as f64,
            sim.iter().map(|s| s.estimate).sum::<f64>() / k,
            bound / k,
            conv_mean,
        ]);
        // Angles share trials, so the mean of the standard errors bounds that
        // of the averaged rate.
        se.push(sim.iter().map(|s| s.std_error).sum::<f64>() / k);
    }
    t.set_meta("rate_sim_se_upper", se);
    Ok(t)
}

fn sweep_eps(
    r: &Resolved,
    theta_deg: f64,
    eps: &[f64],
    hybrid: Option<HybridSpec>,
    grid_len: usize,
    c0: Option<f64>,
) -> Result<Table, CliError> {
    for &e in eps {
        check_epsilon(e)?;
    }
    let setup = hybrid_setup(r, hybrid, grid_len, c0)?;
    let sweep = HybridSweep::Epsilon {
        theta: theta_deg.to_radians(),
        values: eps.to_vec(),
    };
    let points = mc_secrecy_hybrid(&r.scn, &r.cfg, &setup, &sweep, &r.mc)?;
    let mut t = hybrid_table("epsilon", &points, |p| p.epsilon);
    t.set_meta("theta_deg", theta_deg);
    design_meta(&mut t, r, &setup)?;
    Ok(t)
}

fn codebook(
    r: &Resolved,
    target: CodebookTarget,
    n_rf: &[usize],
    grid_len: usize,
) -> Result<Table, CliError> {
    let cfg = &r.cfg;
    let beam = match target {
        CodebookTarget::Data => matched_filter(cfg, r.scn.theta_rx)?,
        CodebookTarget::Noise => noise_beam(cfg, r.scn.theta_rx, r.sectors()?, grid_len)?.beam,
    };
    let fixed = build_dictionary(cfg, false)?;
    let switched = build_dictionary(cfg, true)?;
    let mut t = Table::new(&["n_rf", "residual_fixed", "residual_switched"]);
    for &k in n_rf {
        let a = omp_factorize(&beam.entries, &fixed, k)?;
        let b = omp_factorize(&beam.entries, &switched, k)?;
        t.push(vec![k as f64, a.residual_norm, b.residual_norm]);
    }
    t.set_meta("columns_fixed", fixed.n_columns());
    t.set_meta("columns_switched", switched.n_columns());
    Ok(t)
}

fn multisector(
    r: &Resolved,
    beams: &[crate::spec::BeamSector],
    step_deg: f64,
    grid_len: usize,
    draws: usize,
    hybrid: Option<HybridSpec>,
) -> Result<Table, CliError> {
    if draws == 0 {
        return Err(CliError::config("experiment.draws", "must be positive"));
    }
    let cfg = &r.cfg;
    let sectors = beam_sectors(beams);
    let dict = match hybrid {
        Some(h) => Some(build_dictionary(cfg, h.switching)?),
        None => None,
    };
    let mut designs = Vec::new();
    let mut residuals = Vec::new();
    for k in 0..draws {
        let mut rng = stream_rng(r.mc.seed, k as u64);
        let d = multisector_precoder(cfg, &sectors, grid_len, &mut rng)?;
        let h = match &dict {
            Some(dict) => {
                let h = omp_factorize(&d.beam.entries, dict, cfg.n_rf)?;
                residuals.push(h.residual_norm);
                Some(h.reconstructed)
            }
            None => None,
        };
        designs.push((d.beam, h));
    }
    let mut cols = vec!["theta_deg".to_string()];
    for k in 0..draws {
        cols.push(format!("digital_gain_db_{k}"));
        if dict.is_some() {
            cols.push(format!("hybrid_gain_db_{k}"));
        }
    }
    let mut t = Table::new(&cols);
    for d in angle_axis(step_deg)? {
        let th = d.to_radians();
        let mut row = vec![d];
        for (dig, hyb) in &designs {
            row.push(to_db(dig.gain(cfg, th)));
            if let Some(h) = hyb {
                row.push(to_db(h.gain(cfg, th)));
            }
        }
        t.push(row);
    }
    if !residuals.is_empty() {
        t.set_meta("omp_residuals", residuals);
    }
    Ok(t)
}
