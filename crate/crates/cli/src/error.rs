use std::path::PathBuf;

use equibif_core::berger::BergerError;
use equibif_core::clifford::CliffordError;
use equibif_core::counterexamples::CounterexampleError;
use equibif_core::equivariant::EquivariantError;
use equibif_core::rotsym::RotsymError;
use thiserror::Error;

use crate::config::Diagnostic;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n{}", render(.0))]
    Config(Vec<Diagnostic>),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("clifford: {0}")]
    Clifford(#[from] CliffordError),
    #[error("berger: {0}")]
    Berger(#[from] BergerError),
    #[error("rotsym: {0}")]
    Rotsym(#[from] RotsymError),
    #[error("sandbox: {0}")]
    Sandbox(#[from] EquivariantError),
    #[error("counterexample: {0}")]
    Counterexample(#[from] CounterexampleError),
    #[error("serialization: {0}")]
    Serialize(String),
}

fn render(d: &[Diagnostic]) -> String {
    d.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n")
}

fn equivariant_code(e: &EquivariantError) -> u8 {
    match e {
        EquivariantError::InvalidInput(_) => 2,
        _ => 3,
    }
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for anything the user can fix in the configuration, 3 when a
    /// solver or gate fails on valid input, 1 for the file system.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } | CliError::Serialize(_) => 1,
            CliError::Clifford(CliffordError::InvalidParams(_)) => 2,
            CliError::Clifford(_) => 3,
            CliError::Berger(BergerError::InvalidParams(_)) => 2,
            CliError::Berger(_) => 3,
            CliError::Rotsym(RotsymError::InvalidBoundary(_) | RotsymError::InvalidSweep(_)) => 2,
            CliError::Rotsym(_) => 3,
            CliError::Sandbox(e) => equivariant_code(e),
            CliError::Counterexample(
                CounterexampleError::OutOfDomain { .. } | CounterexampleError::GridTooSmall { .. },
            ) => 2,
            CliError::Counterexample(CounterexampleError::Equivariant(e)) => equivariant_code(e),
        }
    }
}
