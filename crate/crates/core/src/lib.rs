//! Spectral analysis of sparse stochastic block models.

pub mod acceptance;
pub mod config;
pub mod detect;
pub mod detlaw;
pub mod edge;
pub mod io;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod rng;
pub mod spectra;
pub mod verify;

use thiserror::Error;

/// Any error raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Law(#[from] detlaw::LawError),
    #[error(transparent)]
    Spectra(#[from] spectra::SpectraError),
    #[error(transparent)]
    Edge(#[from] edge::EdgeError),
    #[error(transparent)]
    Verify(#[from] verify::VerifyError),
    #[error(transparent)]
    Detect(#[from] detect::DetectError),
    #[error(transparent)]
    Io(#[from] io::IoError),
    #[error(transparent)]
    Config(#[from] config::ConfigError),
}

impl Error {
    /// True for failures of a numerical method on valid input, as opposed to
    /// invalid parameters or files.
    pub fn is_numerical(&self) -> bool {
        use detlaw::LawError as L;
        use spectra::SpectraError as S;
        fn law(e: &L) -> bool {
            matches!(e, L::RootSelectionAmbiguous { .. } | L::EdgeNotBracketed | L::SolverFailure)
        }
        fn spec(e: &S) -> bool {
            matches!(e, S::NonConvergence(_) | S::Singular)
        }
        match self {
            Error::Law(e) => law(e),
            Error::Spectra(e) => spec(e),
            Error::Edge(edge::EdgeError::Spectra(e)) => spec(e),
            Error::Verify(verify::VerifyError::Law(e)) => law(e),
            Error::Verify(verify::VerifyError::Spectra(e)) => spec(e),
            Error::Verify(verify::VerifyError::Edge(edge::EdgeError::Spectra(e))) => spec(e),
            Error::Detect(detect::DetectError::Spectra(e)) => spec(e),
            Error::Detect(detect::DetectError::DegenerateEmbedding { .. }) => true,
            _ => false,
        }
    }
}
