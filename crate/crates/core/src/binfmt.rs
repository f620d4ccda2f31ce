//! Shared container layout for checkpoints and dataset caches:
//! an 8-byte magic plus `\n`, one line of UTF-8 JSON, then raw little-endian
//! arrays in the order the header's manifest lists them.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Magic strings are `PREFIX` + 4-digit version + `\n`.
pub(crate) struct Magic {
    pub prefix: &'static str,
    pub version: &'static str,
}

impl Magic {
    fn bytes(&self) -> Vec<u8> {
        format!("{}{}\n", self.prefix, self.version).into_bytes()
    }
}

pub(crate) fn write_container<P: AsRef<Path>>(
    path: P,
    magic: &Magic,
    header: &impl serde::Serialize,
    payload: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let file = File::create(path).map_err(io)?;
    let mut w = BufWriter::new(file);
    w.write_all(&magic.bytes()).map_err(io)?;
    let line = serde_json::to_string(header).map_err(|e| Error::Header(e.to_string()))?;
    w.write_all(line.as_bytes()).map_err(io)?;
    w.write_all(b"\n").map_err(io)?;
    payload(&mut w).map_err(io)?;
    w.flush().map_err(io)?;
    Ok(())
}

/// Reads the whole file and splits it into (header JSON bytes, payload bytes).
pub(crate) fn read_container<P: AsRef<Path>>(path: P, magic: &Magic) -> Result<(Vec<u8>, Vec<u8>)> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let expected = magic.bytes();
    let prefix = magic.prefix.as_bytes();
    if bytes.len() < expected.len() || !bytes.starts_with(prefix) {
        return Err(Error::BadMagic {
            expected: String::from_utf8_lossy(&expected).trim_end().to_string(),
        });
    }
    if bytes[..expected.len()] != expected[..] {
        return Err(Error::VersionMismatch {
            found: String::from_utf8_lossy(&bytes[prefix.len()..expected.len()])
                .trim_end()
                .to_string(),
            expected: magic.version.to_string(),
        });
    }
    let rest = &bytes[expected.len()..];
    let nl = rest
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::Header("missing header terminator".into()))?;
    let header = rest[..nl].to_vec();
    let payload = rest[nl + 1..].to_vec();
    Ok((header, payload))
}

pub(crate) fn write_f32s(w: &mut dyn Write, xs: &[f32]) -> std::io::Result<()> {
    let mut buf = Vec::with_capacity(xs.len() * 4);
    for x in xs {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)
}

pub(crate) fn write_u32s(w: &mut dyn Write, xs: &[u32]) -> std::io::Result<()> {
    let mut buf = Vec::with_capacity(xs.len() * 4);
    for x in xs {
        buf.extend_from_slice(&x.to_le_bytes());
    }
    w.write_all(&buf)
}

/// Cursor over a payload of 4-byte little-endian words.
pub(crate) struct PayloadReader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> PayloadReader<'a> {
    /// Fails with `TruncatedPayload` unless `bytes` holds exactly `total_words` words.
    pub fn new(bytes: &'a [u8], total_words: usize) -> Result<Self> {
        let expected = total_words * 4;
        if bytes.len() < expected {
            return Err(Error::TruncatedPayload {
                expected,
                found: bytes.len(),
            });
        }
        if bytes.len() > expected {
            return Err(Error::Header(format!(
                "payload has {} trailing bytes beyond the manifest",
                bytes.len() - expected
            )));
        }
        Ok(Self { bytes, pos: 0 })
    }

    fn take(&mut self, n: usize) -> &'a [u8] {
        let s = &self.bytes[self.pos..self.pos + n * 4];
        self.pos += n * 4;
        s
    }

    pub fn f32s(&mut self, n: usize) -> Vec<f32> {
        self.take(n)
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect()
    }

    pub fn u32s(&mut self, n: usize) -> Vec<u32> {
        self.take(n)
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect()
    }
}
