use std::io::BufRead;
use std::path::Path;

use super::conllu::open_text;
use super::dataset::{triples_from_strings, TripleDataset};
use crate::error::{Error, Result};

/// Reads a `head\trelation\ttail` file. Blank lines are skipped; inverse
/// triples are added as for dependency arcs.
pub fn read_kg_tsv<P: AsRef<Path>>(path: P) -> Result<TripleDataset> {
    let path = path.as_ref();
    let mut rows: Vec<(String, String, String)> = Vec::new();
    for (i, line) in open_text(path)?.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let text = line.trim_end_matches('\r');
        if text.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
            return Err(Error::parse(
                path,
                i + 1,
                format!("expected 3 non-empty tab-separated fields, found {}", fields.len()),
            ));
        }
        rows.push((fields[0].into(), fields[1].into(), fields[2].into()));
    }
    Ok(triples_from_strings(
        rows.iter().map(|(h, r, t)| (h.as_str(), r.as_str(), t.as_str())),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn one_line_gives_two_triples() {
        let f = write("a\tlikes\tb\n");
        let ds = read_kg_tsv(f.path()).unwrap();
        assert_eq!(ds.unique_count(), 2);
        assert_eq!(ds.vocab.len(), 2);
        assert_eq!(ds.relations.len(), 2);
    }

    #[test]
    fn duplicate_lines() {
        let f = write("a\tlikes\tb\na\tlikes\tb\n");
        let ds = read_kg_tsv(f.path()).unwrap();
        assert_eq!(ds.stats().unique_base_triples, 1);
        assert_eq!(ds.stats().total_base_triples, 2);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let f = write("a\tlikes\tb\n\nc\td\n");
        match read_kg_tsv(f.path()).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other}"),
        }
    }
}
