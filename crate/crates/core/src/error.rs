use thiserror::Error;

use crate::dtw::DtwError;
use crate::eval::EvalError;
use crate::feature::FeatureError;
use crate::geometry::GeometryError;
use crate::manifest::ManifestError;
use crate::mfcc::MfccError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Crate-wide error, one variant per module.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Manifest(#[from] ManifestError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Dtw(#[from] DtwError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Mfcc(#[from] MfccError),
}

impl Error {
    /// True when the error is caused by bad input data rather than by the
    /// environment (I/O failures on otherwise valid paths).
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Feature(e) => e.is_validation(),
            Error::Manifest(e) => e.is_validation(),
            Error::Geometry(_) | Error::Dtw(_) => true,
            Error::Eval(e) => e.is_validation(),
            Error::Mfcc(e) => e.is_validation(),
        }
    }
}
