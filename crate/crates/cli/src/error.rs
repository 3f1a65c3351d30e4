use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{file}: {}{message}", row_prefix(*row))]
    Parse {
        file: String,
        row: usize,
        message: String,
    },
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] biphoton::Error),
}

fn row_prefix(row: usize) -> String {
    if row > 0 {
        format!("row {row}: ")
    } else {
        String::new()
    }
}

impl CliError {
    /// Row 0 marks a problem with the file as a whole.
    pub fn parse(source: &str, row: usize, message: String) -> Self {
        CliError::Parse {
            file: source.to_string(),
            row,
            message,
        }
    }

    /// 2 for unreadable input, 4 for optimizer failure, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::Io(_) | CliError::Usage(_) => 2,
            CliError::Core(biphoton::Error::NoConvergence(_)) => 4,
            CliError::Core(_) => 3,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "parse",
            CliError::Io(_) => "io",
            CliError::Usage(_) => "usage",
            CliError::Core(e) => e.code(),
        }
    }
}
