use std::path::Path;

use crate::{CliError, CliResult};

/// Parses `key = value` lines. Blank lines and `#` comments are ignored;
/// dashes in keys are read as underscores.
pub fn parse_config(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", i + 1)))?;
        let key = k.trim().replace('-', "_");
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

pub fn read_config(path: &Path) -> CliResult<(String, Vec<(String, String)>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let pairs = parse_config(&text)?;
    Ok((text, pairs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_skips_comments() {
        let got = parse_config("# run\nmodel = rote\n\nneg-power=0.5 # tail\n").unwrap();
        assert_eq!(
            got,
            vec![("model".into(), "rote".into()), ("neg_power".into(), "0.5".into())]
        );
    }

    #[test]
    fn rejects_lines_without_equals() {
        assert!(parse_config("dim 300").is_err());
    }
}
