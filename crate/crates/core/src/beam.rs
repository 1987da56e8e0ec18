//! Unit-norm transmit weight vectors.

use num_complex::Complex64;

use crate::array::{array_response, ArrayConfig};
use crate::error::{Error, Result};
use crate::linalg;

/// Tolerance on `|‖f‖ - 1|` accepted by [`BeamVector::new`].
pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BeamKind {
    Analog,
    Digital,
    Hybrid,
}

/// Transmit weights with unit Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamVector {
    pub entries: Vec<Complex64>,
    pub kind: BeamKind,
}

impl BeamVector {
    /// Wraps weights that are already unit norm.
    pub fn new(entries: Vec<Complex64>, kind: BeamKind) -> Result<Self> {
        let n = linalg::norm(&entries);
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "beam vector norm is {n}, expected 1"
            )));
        }
        Ok(BeamVector { entries, kind })
    }

    /// Rescales arbitrary nonzero weights to unit norm.
    pub fn normalized(entries: &[Complex64], kind: BeamKind) -> Result<Self> {
        linalg::normalized(entries)
            .map(|entries| BeamVector { entries, kind })
            .ok_or_else(|| Error::InvalidParameter("cannot normalize a zero beam".into()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        linalg::norm(&self.entries)
    }

    /// Far-field response `a(theta)^H f`. Any real angle is accepted.
    pub fn response(&self, cfg: &ArrayConfig, theta: f64) -> Complex64 {
        let a = array_response(cfg.n_antennas, cfg.spacing_ratio, theta);
        linalg::inner(&a, &self.entries)
    }

    /// Power pattern `|a(theta)^H f|^2`.
    pub fn gain(&self, cfg: &ArrayConfig, theta: f64) -> f64 {
        self.response(cfg, theta).norm_sqr()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_unit_norm() {
        let e = vec![Complex64::new(1.0, 0.0); 2];
        assert!(BeamVector::new(e.clone(), BeamKind::Digital).is_err());
        let b = BeamVector::normalized(&e, BeamKind::Digital).unwrap();
        assert!((b.norm() - 1.0).abs() < 1e-15);
        assert!(BeamVector::normalized(&[Complex64::new(0.0, 0.0)], BeamKind::Digital).is_err());
    }

    #[test]
    fn broadside_uniform_beam_has_full_gain() {
        let cfg = ArrayConfig::ula(8).unwrap();
        let b = BeamVector::normalized(&[Complex64::new(1.0, 0.0); 8], BeamKind::Digital).unwrap();
        assert!((b.gain(&cfg, std::f64::consts::FRAC_PI_2) - 8.0).abs() < 1e-12);
    }
}
