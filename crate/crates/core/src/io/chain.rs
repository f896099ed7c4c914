//! Line-delimited JSON chain files: a header line per chain followed by one
//! line per retained sample. Several chains may be appended to one file.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{FbcError, Result};
use crate::sampler::ChainSample;

pub const CHAIN_FORMAT: &str = "fbc-chain";
pub const CHAIN_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainHeader {
    pub format: String,
    pub version: u32,
    pub chain: u64,
    pub seed: u64,
    /// `FBC` or `MFM`.
    #[serde(default)]
    pub method: String,
}

impl ChainHeader {
    pub fn new(chain: u64, seed: u64, method: &str) -> Self {
        Self {
            format: CHAIN_FORMAT.into(),
            version: CHAIN_VERSION,
            chain,
            seed,
            method: method.into(),
        }
    }
}

/// One chain read back from a file.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainRecord {
    pub header: ChainHeader,
    pub samples: Vec<ChainSample>,
}

/// Writes one chain to `w`.
pub fn write_chain<W: Write>(w: &mut W, header: &ChainHeader, samples: &[ChainSample]) -> Result<()> {
    serde_json::to_writer(&mut *w, header).map_err(std::io::Error::from)?;
    writeln!(w)?;
    for s in samples {
        serde_json::to_writer(&mut *w, s).map_err(std::io::Error::from)?;
        writeln!(w)?;
    }
    Ok(())
}

/// Writes (or with `append`, appends) one chain to `path`.
pub fn serialize_chain(path: &Path, header: &ChainHeader, samples: &[ChainSample], append: bool) -> Result<()> {
    let f = OpenOptions::new()
        .create(true)
        .write(true)
        .append(append)
        .truncate(!append)
        .open(path)?;
    let mut w = BufWriter::new(f);
    write_chain(&mut w, header, samples)?;
    w.flush()?;
    Ok(())
}

/// Parses every chain in a reader; `path` is only used in error messages.
pub fn read_chain<R: BufRead>(reader: R, path: &Path) -> Result<Vec<ChainRecord>> {
    let err = |line: usize, message: String| FbcError::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut out: Vec<ChainRecord> = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let no = k + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(&line).map_err(|e| err(no, e.to_string()))?;
        if value.get("format").is_some() {
            let header: ChainHeader = serde_json::from_value(value).map_err(|e| err(no, e.to_string()))?;
            if header.format != CHAIN_FORMAT {
                return Err(err(no, format!("unknown format '{}'", header.format)));
            }
            if header.version != CHAIN_VERSION {
                return Err(FbcError::Version {
                    found: header.version,
                    expected: CHAIN_VERSION,
                });
            }
            out.push(ChainRecord {
                header,
                samples: Vec::new(),
            });
        } else {
            let sample: ChainSample = serde_json::from_value(value).map_err(|e| err(no, e.to_string()))?;
            match out.last_mut() {
                Some(c) => c.samples.push(sample),
                None => return Err(err(no, "sample before any chain header".into())),
            }
        }
    }
    if out.is_empty() {
        return Err(err(0, "no chain header found".into()));
    }
    Ok(out)
}

pub fn load_chain(path: &Path) -> Result<Vec<ChainRecord>> {
    read_chain(BufReader::new(File::open(path)?), path)
}
