//! Local chaotic-light model of Bell correlations.
//!
//! A twin-beam source with exponential intensities and random phases feeds two
//! polarization analyzers. Photon counts follow from Poisson emission and
//! binomial splitting. Product moments of the port outputs reproduce
//! `−cos 2(θ1 − θ2)` once the constant multi-pair offset is removed.
//!
//! The closed-form code is generic over [`Scalar`] (`f32`/`f64`); the Monte
//! Carlo engine runs in `f64`. Aliases for the `f64` instantiations live here.

pub mod error;
pub mod inequality;
pub mod montecarlo;
pub mod oracle;
pub mod photon;
pub mod polarizer;
pub mod rng;
pub mod scalar;
pub mod source;

pub use error::{Error, Result};
pub use inequality::{bell_three_check, chsh_four_check, cross_correlation, InequalityReport, SignSequence};
pub use montecarlo::{
    bose_einstein_check, chsh_experiment, run_count_experiment, run_experiment, run_intensity_experiment,
    run_postselected_experiment, sweep_angles, ChshEstimate, CountMode, DistCheck, EstimateSet, PostselectedTally,
    SimConfig, SweepRow,
};
pub use oracle::PortPairKind;
pub use photon::{CountPair, TrialCounts};
pub use scalar::Scalar;

pub type SourceParams = source::SourceParams<f64>;
pub type SourceDraw = source::SourceDraw<f64>;
pub type AnalyzerSettings = polarizer::AnalyzerSettings<f64>;
pub type PortIntensities = polarizer::PortIntensities<f64>;
pub type OracleParams = oracle::OracleParams<f64>;

pub type SourceParams32 = source::SourceParams<f32>;
pub type SourceDraw32 = source::SourceDraw<f32>;
pub type AnalyzerSettings32 = polarizer::AnalyzerSettings<f32>;
pub type PortIntensities32 = polarizer::PortIntensities<f32>;
pub type OracleParams32 = oracle::OracleParams<f32>;
