use std::fmt;

/// Process exit status classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Usage = 1,
    Data = 2,
    Runtime = 3,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl fmt::Display) -> CliError {
        CliError {
            kind: Kind::Usage,
            message: message.to_string(),
        }
    }

    pub fn data(message: impl fmt::Display) -> CliError {
        CliError {
            kind: Kind::Data,
            message: message.to_string(),
        }
    }

    pub fn runtime(message: impl fmt::Display) -> CliError {
        CliError {
            kind: Kind::Runtime,
            message: message.to_string(),
        }
    }

    pub fn code(&self) -> i32 {
        self.kind as i32
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // keep diagnostics on one line
        f.write_str(&self.message.replace('\n', " "))
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Attaches an exit class to any displayable error.
pub trait Classify<T> {
    fn data_err(self) -> CliResult<T>;
    fn runtime_err(self) -> CliResult<T>;
    fn usage_err(self) -> CliResult<T>;
}

impl<T, E: fmt::Display> Classify<T> for Result<T, E> {
    fn data_err(self) -> CliResult<T> {
        self.map_err(CliError::data)
    }

    fn runtime_err(self) -> CliResult<T> {
        self.map_err(CliError::runtime)
    }

    fn usage_err(self) -> CliResult<T> {
        self.map_err(CliError::usage)
    }
}
