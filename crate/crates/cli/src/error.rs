use std::fmt;

use circuitum::boolean::BooleanError;
use circuitum::decomposition::{DecompositionError, PartitionDefect};
use circuitum::ir::IrError;
use circuitum::order::OrderError;
use circuitum::quantum::QuantumError;
use circuitum::text::{LoadError, TextError};

/// A failed command: a machine-readable code plus the process exit status
/// (1 for domain errors, 2 for usage errors).
#[derive(Debug)]
pub struct CliError {
    pub code: String,
    pub message: String,
    pub exit: i32,
}

impl CliError {
    pub fn domain(code: impl Into<String>, message: impl Into<String>) -> Self {
        CliError { code: code.into(), message: message.into(), exit: 1 }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        CliError { code: "USAGE".into(), message: message.into(), exit: 2 }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "error[{}]: {}", self.code, self.message)
    }
}

macro_rules! domain_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::domain(e.code(), e.to_string())
            }
        }
    )*};
}

domain_from!(LoadError, BooleanError, QuantumError, DecompositionError, OrderError, IrError, TextError);

impl From<PartitionDefect> for CliError {
    fn from(e: PartitionDefect) -> Self {
        CliError::domain("NOT_COHERENT", format!("partition is not coherent: {e}"))
    }
}
