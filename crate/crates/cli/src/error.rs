use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}:{line}: {message}")]
    Parse { path: String, line: usize, message: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("missing series file {}", .0.display())]
    MissingSeries(PathBuf),
    #[error(transparent)]
    Numerical(#[from] tdmie::Error),
    #[error("{label}: {source}")]
    Job {
        label: String,
        #[source]
        source: tdmie::Error,
    },
}

impl CliError {
    /// 1 for usage and input problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(e) | CliError::Job { source: e, .. } => match e {
                tdmie::Error::Config(_) | tdmie::Error::Mismatch(_) => 1,
                _ => 2,
            },
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

/// Attaches a job label to core errors.
pub(crate) fn job(label: impl Into<String>) -> impl FnOnce(tdmie::Error) -> CliError {
    let label = label.into();
    move |source| CliError::Job { label, source }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;
    use tdmie::kernels::KernelKind;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 1);
        assert_eq!(CliError::MissingSeries("a".into()).exit_code(), 1);
        assert_eq!(CliError::Numerical(tdmie::Error::Config("x".into())).exit_code(), 1);
        assert_eq!(CliError::Numerical(tdmie::Error::NoConvergence { index: 3, iterations: 120 }).exit_code(), 2);
        let e = job("K2 n=3")(tdmie::Error::SingularBlock { kind: KernelKind::K2, n: 3 });
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().starts_with("K2 n=3: singular"));
    }
}
