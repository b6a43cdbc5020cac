//! Parsing of inline lists, one-column files and curvature files.

use std::fs;
use std::path::Path;

use concentrate::predictors::{CurvaturePath, CurvatureStep};

use crate::error::CliError;

fn read(path: &Path, field: &str) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("{field}: cannot read {}: {e}", path.display())))
}

fn number<T: std::str::FromStr>(field: &str, token: &str) -> Result<T, CliError> {
    token
        .trim()
        .parse()
        .map_err(|_| CliError::usage(format!("{field}: not a number: {:?}", token.trim())))
}

/// Lines with `#` comments and surrounding whitespace removed, blanks skipped.
fn content_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
}

/// One value per line.
pub fn read_column(path: &Path, field: &str) -> Result<Vec<f64>, CliError> {
    content_lines(&read(path, field)?)
        .map(|l| number(field, l))
        .collect()
}

/// A comma-separated list, or `@path` for a one-column file. An empty
/// string is the empty list.
pub fn parse_list<T: std::str::FromStr>(field: &str, text: &str) -> Result<Vec<T>, CliError> {
    if let Some(path) = text.strip_prefix('@') {
        let body = read(Path::new(path), field)?;
        return content_lines(&body).map(|l| number(field, l)).collect();
    }
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(|t| number(field, t)).collect()
}

/// One step per line: `d k1 k2 …`, whitespace-separated.
pub fn read_curvature_file(path: &Path) -> Result<CurvaturePath, CliError> {
    let field = "--curvature-file";
    let steps = content_lines(&read(path, field)?)
        .map(|line| {
            let mut values = line
                .split_whitespace()
                .map(|t| number::<f64>(field, t))
                .collect::<Result<Vec<f64>, _>>()?
                .into_iter();
            let d = values.next().expect("non-empty line");
            Ok(CurvatureStep::new(d, values.collect()))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    CurvaturePath::new(steps).map_err(|e| CliError::usage(format!("{field}: {e}")))
}
