//! Process exit codes and the error that carries one.

use std::fmt;

pub const EXIT_PASS: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    /// A core error attributed to a command-line field.
    pub fn field(field: &str, err: concentrate::Error) -> Self {
        let mut e = CliError::from(err);
        e.message = format!("{field}: {}", e.message);
        e
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<concentrate::Error> for CliError {
    fn from(err: concentrate::Error) -> Self {
        CliError {
            code: if err.is_numeric() {
                EXIT_NUMERIC
            } else {
                EXIT_USAGE
            },
            message: err.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::usage(format!("--output-path: {err}"))
    }
}
