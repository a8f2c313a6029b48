use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("bad input: {0}")]
    Input(String),
    #[error(transparent)]
    Lattice(#[from] elex_core::lattice::LatticeError),
    #[error(transparent)]
    Sim(#[from] elex_core::zero_range::SimError),
    #[error(transparent)]
    Stefan(#[from] elex_core::stefan::StefanError),
    #[error(transparent)]
    Z(#[from] elex_core::elastic::ZError),
    #[error(transparent)]
    Transform(#[from] elex_core::elastic::TransformError),
    #[error(transparent)]
    Exclusion(#[from] elex_core::exclusion::ExclusionError),
    #[error(transparent)]
    Spectral(#[from] elex_core::spectral::SpectralError),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

pub(crate) fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv { path: path.to_path_buf(), source }
}

pub(crate) fn json_err(path: &Path) -> impl FnOnce(serde_json::Error) -> Error + '_ {
    move |source| Error::Json { path: path.to_path_buf(), source }
}
