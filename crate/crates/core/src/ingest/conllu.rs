//! CoNLL-U reader yielding one dependency arc per non-root token.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use flate2::read::MultiGzDecoder;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `governor --relation--> dependent` inside one sentence. Positions are the
/// 1-based CoNLL-U token ids, so (sentence_id, position) names a token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyArc {
    pub governor: String,
    pub relation: String,
    pub dependent: String,
    pub sentence_id: usize,
    pub governor_pos: u32,
    pub dependent_pos: u32,
}

struct Token {
    id: u32,
    form: String,
    head: u32,
    deprel: String,
    line: usize,
}

/// Opens a possibly gzip-compressed text file.
pub fn open_text(path: &Path) -> Result<Box<dyn BufRead>> {
    let mut file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut magic = [0u8; 2];
    let n = file.read(&mut magic).map_err(|e| Error::io(path, e))?;
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    if n == 2 && magic == [0x1f, 0x8b] {
        Ok(Box::new(BufReader::new(MultiGzDecoder::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

/// Streams arcs from a CoNLL-U file (plain or gzip).
pub fn read_conllu<P: AsRef<Path>>(path: P) -> Result<ConlluReader<Box<dyn BufRead>>> {
    let path = path.as_ref();
    Ok(ConlluReader::new(open_text(path)?, path))
}

/// Iterator over the arcs of a CoNLL-U stream. Errors carry the 1-based line
/// number; iteration stops after the first error.
pub struct ConlluReader<R> {
    input: R,
    path: PathBuf,
    line_no: usize,
    sentence_id: usize,
    pending: std::vec::IntoIter<DependencyArc>,
    done: bool,
}

impl<R: BufRead> ConlluReader<R> {
    pub fn new(input: R, path: impl Into<PathBuf>) -> Self {
        Self {
            input,
            path: path.into(),
            line_no: 0,
            sentence_id: 0,
            pending: Vec::new().into_iter(),
            done: false,
        }
    }

    /// Reads lines until a sentence boundary; `None` at end of input.
    fn next_sentence(&mut self) -> Result<Option<Vec<Token>>> {
        let mut tokens = Vec::new();
        let mut line = String::new();
        loop {
            line.clear();
            let n = self.input.read_line(&mut line).map_err(|e| Error::io(&self.path, e))?;
            if n == 0 {
                return Ok(if tokens.is_empty() { None } else { Some(tokens) });
            }
            self.line_no += 1;
            let text = line.trim_end_matches(['\n', '\r']);
            if text.trim().is_empty() {
                if tokens.is_empty() {
                    continue;
                }
                return Ok(Some(tokens));
            }
            if text.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = text.split('\t').collect();
            if cols.len() != 10 {
                return Err(Error::parse(
                    &self.path,
                    self.line_no,
                    format!("expected 10 tab-separated columns, found {}", cols.len()),
                ));
            }
            // Multiword ranges ("3-4") and empty nodes ("5.1") carry no arc.
            if cols[0].contains('-') || cols[0].contains('.') {
                continue;
            }
            let id: u32 = cols[0]
                .parse()
                .map_err(|_| Error::parse(&self.path, self.line_no, format!("bad token id {:?}", cols[0])))?;
            let head: u32 = cols[6]
                .parse()
                .map_err(|_| Error::parse(&self.path, self.line_no, format!("bad head {:?}", cols[6])))?;
            tokens.push(Token {
                id,
                form: cols[1].to_lowercase(),
                head,
                deprel: cols[7].to_string(),
                line: self.line_no,
            });
        }
    }

    fn sentence_arcs(&self, tokens: &[Token]) -> Result<Vec<DependencyArc>> {
        let mut arcs = Vec::with_capacity(tokens.len());
        for tok in tokens {
            if tok.head == 0 || tok.deprel.eq_ignore_ascii_case("root") {
                continue;
            }
            if tok.deprel.is_empty() || tok.deprel == "_" {
                return Err(Error::parse(&self.path, tok.line, "empty dependency label"));
            }
            let gov = tokens.iter().find(|t| t.id == tok.head).ok_or_else(|| {
                Error::parse(&self.path, tok.line, format!("head {} not found in sentence", tok.head))
            })?;
            arcs.push(DependencyArc {
                governor: gov.form.clone(),
                relation: tok.deprel.clone(),
                dependent: tok.form.clone(),
                sentence_id: self.sentence_id,
                governor_pos: gov.id,
                dependent_pos: tok.id,
            });
        }
        Ok(arcs)
    }
}

impl<R: BufRead> Iterator for ConlluReader<R> {
    type Item = Result<DependencyArc>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(arc) = self.pending.next() {
                return Some(Ok(arc));
            }
            if self.done {
                return None;
            }
            let sentence = match self.next_sentence() {
                Ok(Some(s)) => s,
                Ok(None) => {
                    self.done = true;
                    return None;
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            };
            match self.sentence_arcs(&sentence) {
                Ok(arcs) => {
                    self.sentence_id += 1;
                    self.pending = arcs.into_iter();
                }
                Err(e) => {
                    self.done = true;
                    return Some(Err(e));
                }
            }
        }
    }
}
