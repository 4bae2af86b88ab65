//! CLI error kinds with their exit codes: 1 config, 2 infeasible input,
//! 3 solver failure.

use homcell_core::HomError;
use std::fmt;

#[derive(Debug)]
pub enum AppError {
    Config(String),
    Infeasible(String),
    Solver(String),
}

impl AppError {
    pub fn config(msg: impl Into<String>) -> Self {
        AppError::Config(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) => 1,
            AppError::Infeasible(_) => 2,
            AppError::Solver(_) => 3,
        }
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config(m) => write!(f, "config error: {m}"),
            AppError::Infeasible(m) => write!(f, "infeasible input: {m}"),
            AppError::Solver(m) => write!(f, "solver failure: {m}"),
        }
    }
}

impl std::error::Error for AppError {}

impl From<HomError> for AppError {
    fn from(e: HomError) -> Self {
        match &e {
            HomError::InfeasibleMacroGradient { .. } | HomError::NotCompactlyContained { .. } => {
                AppError::Infeasible(e.to_string())
            }
            HomError::ProjectionDiverged { .. } | HomError::UndecidedRadialLimit { .. } => {
                AppError::Solver(e.to_string())
            }
            _ => AppError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Config(format!("io error: {e}"))
    }
}
