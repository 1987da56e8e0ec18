//! Keyless physical-layer security for mmWave uniform linear arrays.
//!
//! Two transmit techniques are modelled. The analog one re-draws, for every
//! symbol, which antennas beamform coherently towards the receiver and which
//! ones scramble the pattern elsewhere. The hybrid one splits power between a
//! matched-filter data beam and an artificial-noise beam confined to the null
//! space of the receiver, then factorizes both through a constrained RF
//! dictionary with orthogonal matching pursuit.
//!
//! Angles are radians, powers are linear. Conversions to degrees and dB belong
//! to the presentation layer.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analog;
pub mod array;
pub mod beam;
pub mod codebook;
pub mod error;
pub mod linalg;
pub mod precoder;
pub mod rng;
pub mod secrecy;
pub mod sim;
pub mod stats;

pub use analog::{BetaStats, SubsetPartition};
pub use array::{ArrayConfig, EvGainModel, Scenario, SteeringVector, TwoRayGain};
pub use beam::{BeamKind, BeamVector};
pub use codebook::{
    DictionaryOptions, GroupAssignment, HybridComponents, HybridPrecoder, RfDictionary,
};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use precoder::{CombinedPrecoder, MultisectorDesign, NoiseBeamDesign, SectorSet};
pub use secrecy::SecrecyPoint;
pub use sim::{McConfig, McResult};
