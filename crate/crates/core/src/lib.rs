//! Hardcore (Cowan M2) lane models for motorway vehicular networks: closed-form
//! correlation and summary statistics, parameter fitting from vehicle traces,
//! shifted-gamma interference approximations and SIR outage prediction, plus
//! a Monte-Carlo simulator to check them against.

// Validity checks are written as `!(x > 0.0)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curves;
pub mod fitting;
pub mod flags;
pub mod model;
pub mod montecarlo;
pub mod outage;
pub mod quadrature;
pub mod replication;
pub mod sampling;
pub mod special;
pub mod stats;
pub mod traces;

pub use curves::{OutageCurve, Provenance, SummaryCurve, SummaryKind};
pub use fitting::{FitMethod, FitResult, GapSample};
pub use model::HardcoreLaneModel;
pub use outage::{LinkScenario, MomentTriple, ShiftedGammaApprox};
pub use sampling::{Extent, LaneSnapshot, RngSeed};

use thiserror::Error;

/// Any failure of the library, split into bad input and numerical trouble.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Curve(#[from] curves::CurveError),
    #[error(transparent)]
    Sampling(#[from] sampling::SamplingError),
    #[error(transparent)]
    Stats(#[from] stats::StatsError),
    #[error(transparent)]
    Fit(#[from] fitting::FitError),
    #[error(transparent)]
    Outage(#[from] outage::OutageError),
    #[error(transparent)]
    MonteCarlo(#[from] montecarlo::McError),
    #[error(transparent)]
    Trace(#[from] traces::TraceError),
    #[error(transparent)]
    Flag(#[from] flags::FlagError),
    #[error(transparent)]
    Domain(#[from] special::DomainError),
    #[error(transparent)]
    Quadrature(#[from] quadrature::QuadratureError),
}

impl Error {
    /// Whether the failure is numerical (non-convergence) rather than caused
    /// by invalid input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Quadrature(_)
                | Error::Outage(outage::OutageError::Quadrature(_))
                | Error::Fit(fitting::FitError::NonConvergence { .. })
        )
    }
}
