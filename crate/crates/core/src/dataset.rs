//! Binary dataset format for quadrature and calibration records.
//!
//! Both file kinds share a 32-byte header:
//!
//! ```text
//! offset  size  field
//! 0       8     magic (b"CVKQUAD\0" or b"CVKCAL\0\0")
//! 8       4     version (little-endian u32, currently 1)
//! 12      4     flags (reserved, 0)
//! 16      8     record count (little-endian u64)
//! 24      8     reserved (0)
//! ```
//!
//! followed by `count` records of little-endian IEEE-754 doubles:
//! quadrature files carry (q_tx, p_tx, q_rx, p_rx), calibration files carry
//! (q_rx, p_rx) only.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

/// Magic for paired transmitter/receiver quadrature data.
pub const QUADRATURE_MAGIC: [u8; 8] = *b"CVKQUAD\0";
/// Magic for receiver-only calibration data.
pub const CALIBRATION_MAGIC: [u8; 8] = *b"CVKCAL\0\0";
/// Current format version.
pub const FORMAT_VERSION: u32 = 1;

const HEADER_LEN: usize = 32;

/// Errors for dataset serialization; every variant names the offending file.
#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: bad magic {found:02x?} (expected {expected:02x?})")]
    BadMagic {
        path: PathBuf,
        found: [u8; 8],
        expected: [u8; 8],
    },
    #[error("{path}: unsupported format version {found}")]
    UnsupportedVersion { path: PathBuf, found: u32 },
    #[error("{path}: header truncated ({got} bytes, need {HEADER_LEN})")]
    TruncatedHeader { path: PathBuf, got: usize },
    #[error("{path}: payload length {got} bytes does not match {expected} records")]
    LengthMismatch {
        path: PathBuf,
        got: u64,
        expected: u64,
    },
    #[error("{path}: record {index} contains a non-finite value")]
    NonFinite { path: PathBuf, index: u64 },
    #[error("dataset arrays have mismatched lengths")]
    ArrayLengthMismatch,
    #[error("dataset is empty")]
    Empty,
}

type Result<T> = std::result::Result<T, DatasetError>;

fn io_err(path: &Path, source: std::io::Error) -> DatasetError {
    DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Paired transmitter/receiver quadrature samples, one complex symbol per
/// index (so `len()` symbols carry `2 len()` real values per side).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct QuadratureDataset {
    pub tx_q: Vec<f64>,
    pub tx_p: Vec<f64>,
    pub rx_q: Vec<f64>,
    pub rx_p: Vec<f64>,
}

impl QuadratureDataset {
    pub fn new(tx_q: Vec<f64>, tx_p: Vec<f64>, rx_q: Vec<f64>, rx_p: Vec<f64>) -> Result<Self> {
        if tx_q.len() != tx_p.len() || tx_q.len() != rx_q.len() || tx_q.len() != rx_p.len() {
            return Err(DatasetError::ArrayLengthMismatch);
        }
        if tx_q.is_empty() {
            return Err(DatasetError::Empty);
        }
        Ok(Self {
            tx_q,
            tx_p,
            rx_q,
            rx_p,
        })
    }

    pub fn len(&self) -> usize {
        self.tx_q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tx_q.is_empty()
    }

    /// Append all records of `other`.
    pub fn extend_from(&mut self, other: &QuadratureDataset) {
        self.tx_q.extend_from_slice(&other.tx_q);
        self.tx_p.extend_from_slice(&other.tx_p);
        self.rx_q.extend_from_slice(&other.rx_q);
        self.rx_p.extend_from_slice(&other.rx_p);
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| io_err(path, e))?;
        let mut w = BufWriter::new(file);
        write_header(&mut w, path, QUADRATURE_MAGIC, self.len() as u64)?;
        for i in 0..self.len() {
            let mut rec = [0u8; 32];
            rec[0..8].copy_from_slice(&self.tx_q[i].to_le_bytes());
            rec[8..16].copy_from_slice(&self.tx_p[i].to_le_bytes());
            rec[16..24].copy_from_slice(&self.rx_q[i].to_le_bytes());
            rec[24..32].copy_from_slice(&self.rx_p[i].to_le_bytes());
            w.write_all(&rec).map_err(|e| io_err(path, e))?;
        }
        w.flush().map_err(|e| io_err(path, e))
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        let (count, payload) = read_payload(path, QUADRATURE_MAGIC, 32)?;
        let n = count as usize;
        let mut out = Self {
            tx_q: Vec::with_capacity(n),
            tx_p: Vec::with_capacity(n),
            rx_q: Vec::with_capacity(n),
            rx_p: Vec::with_capacity(n),
        };
        for (i, rec) in payload.chunks_exact(32).enumerate() {
            let vals = [
                f64::from_le_bytes(rec[0..8].try_into().unwrap()),
                f64::from_le_bytes(rec[8..16].try_into().unwrap()),
                f64::from_le_bytes(rec[16..24].try_into().unwrap()),
                f64::from_le_bytes(rec[24..32].try_into().unwrap()),
            ];
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(DatasetError::NonFinite {
                    path: path.to_path_buf(),
                    index: i as u64,
                });
            }
            out.tx_q.push(vals[0]);
            out.tx_p.push(vals[1]);
            out.rx_q.push(vals[2]);
            out.rx_p.push(vals[3]);
        }
        Ok(out)
    }
}

/// Receiver-only calibration samples (vacuum or electronic noise runs).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CalibrationDataset {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl CalibrationDataset {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.len() != p.len() {
            return Err(DatasetError::ArrayLengthMismatch);
        }
        if q.is_empty() {
            return Err(DatasetError::Empty);
        }
        Ok(Self { q, p })
    }

    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    /// Pooled per-quadrature second moment (the calibration variance; the
    /// sources are zero-mean by construction).
    pub fn variance(&self) -> f64 {
        let sum: f64 =
            self.q.iter().map(|v| v * v).sum::<f64>() + self.p.iter().map(|v| v * v).sum::<f64>();
        sum / (2.0 * self.len() as f64)
    }

    pub fn write_to(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| io_err(path, e))?;
        let mut w = BufWriter::new(file);
        write_header(&mut w, path, CALIBRATION_MAGIC, self.len() as u64)?;
        for i in 0..self.len() {
            let mut rec = [0u8; 16];
            rec[0..8].copy_from_slice(&self.q[i].to_le_bytes());
            rec[8..16].copy_from_slice(&self.p[i].to_le_bytes());
            w.write_all(&rec).map_err(|e| io_err(path, e))?;
        }
        w.flush().map_err(|e| io_err(path, e))
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        let (count, payload) = read_payload(path, CALIBRATION_MAGIC, 16)?;
        let n = count as usize;
        let mut out = Self {
            q: Vec::with_capacity(n),
            p: Vec::with_capacity(n),
        };
        for (i, rec) in payload.chunks_exact(16).enumerate() {
            let q = f64::from_le_bytes(rec[0..8].try_into().unwrap());
            let p = f64::from_le_bytes(rec[8..16].try_into().unwrap());
            if !q.is_finite() || !p.is_finite() {
                return Err(DatasetError::NonFinite {
                    path: path.to_path_buf(),
                    index: i as u64,
                });
            }
            out.q.push(q);
            out.p.push(p);
        }
        Ok(out)
    }
}

fn write_header<W: Write>(w: &mut W, path: &Path, magic: [u8; 8], count: u64) -> Result<()> {
    let mut header = [0u8; HEADER_LEN];
    header[0..8].copy_from_slice(&magic);
    header[8..12].copy_from_slice(&FORMAT_VERSION.to_le_bytes());
    // bytes 12..16 flags, 24..32 reserved: zero
    header[16..24].copy_from_slice(&count.to_le_bytes());
    w.write_all(&header).map_err(|e| io_err(path, e))
}

fn read_payload(path: &Path, magic: [u8; 8], record_len: u64) -> Result<(u64, Vec<u8>)> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut r = BufReader::new(file);
    let mut header = [0u8; HEADER_LEN];
    let mut got = 0usize;
    while got < HEADER_LEN {
        match r.read(&mut header[got..]).map_err(|e| io_err(path, e))? {
            0 => {
                return Err(DatasetError::TruncatedHeader {
                    path: path.to_path_buf(),
                    got,
                })
            }
            k => got += k,
        }
    }
    let found: [u8; 8] = header[0..8].try_into().unwrap();
    if found != magic {
        return Err(DatasetError::BadMagic {
            path: path.to_path_buf(),
            found,
            expected: magic,
        });
    }
    let version = u32::from_le_bytes(header[8..12].try_into().unwrap());
    if version != FORMAT_VERSION {
        return Err(DatasetError::UnsupportedVersion {
            path: path.to_path_buf(),
            found: version,
        });
    }
    let count = u64::from_le_bytes(header[16..24].try_into().unwrap());
    let mut payload = Vec::new();
    r.read_to_end(&mut payload).map_err(|e| io_err(path, e))?;
    let expected = count * record_len;
    if payload.len() as u64 != expected {
        return Err(DatasetError::LengthMismatch {
            path: path.to_path_buf(),
            got: payload.len() as u64,
            expected: count,
        });
    }
    Ok((count, payload))
}
