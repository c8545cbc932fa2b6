//! Matrix containers: a little-endian binary format and CSV.
//!
//! The binary layout is the 4-byte magic, two `u64` header fields and the
//! row-major `f64` payload. Symmetric matrices use magic `SBMS` with header
//! `(N, K)`; eigenvector blocks use `SBMV` with header `(rows, N)`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::model::SymMatrix;

pub const MATRIX_MAGIC: &[u8; 4] = b"SBMS";
pub const VECTORS_MAGIC: &[u8; 4] = b"SBMV";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
}

impl IoError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    fn format(path: &Path, message: impl Into<String>) -> Self {
        IoError::Format {
            path: path.display().to_string(),
            message: message.into(),
        }
    }
}

fn write_block(path: &Path, magic: &[u8; 4], a: u64, b: u64, data: &[f64]) -> Result<(), IoError> {
    let file = File::create(path).map_err(|e| IoError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut put = |bytes: &[u8]| w.write_all(bytes).map_err(|e| IoError::io(path, e));
    put(magic)?;
    put(&a.to_le_bytes())?;
    put(&b.to_le_bytes())?;
    for x in data {
        put(&x.to_le_bytes())?;
    }
    w.flush().map_err(|e| IoError::io(path, e))
}

fn read_block(path: &Path, magic: &[u8; 4]) -> Result<(u64, u64, Vec<f64>), IoError> {
    let file = File::open(path).map_err(|e| IoError::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut head = [0u8; 20];
    r.read_exact(&mut head)
        .map_err(|_| IoError::format(path, "truncated header"))?;
    if &head[..4] != magic {
        return Err(IoError::format(
            path,
            format!("bad magic {:?}, expected {:?}", String::from_utf8_lossy(&head[..4]), String::from_utf8_lossy(magic)),
        ));
    }
    let a = u64::from_le_bytes(head[4..12].try_into().expect("8 bytes"));
    let b = u64::from_le_bytes(head[12..20].try_into().expect("8 bytes"));
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| IoError::io(path, e))?;
    if bytes.len() % 8 != 0 {
        return Err(IoError::format(path, "payload is not a whole number of f64 values"));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok((a, b, data))
}

/// Writes `m` with community count `k` in the `SBMS` container.
pub fn write_matrix(path: &Path, m: &SymMatrix, k: usize) -> Result<(), IoError> {
    write_block(path, MATRIX_MAGIC, m.order() as u64, k as u64, m.as_slice())
}

/// Reads an `SBMS` container, returning the matrix and its community count.
pub fn read_matrix(path: &Path) -> Result<(SymMatrix, usize), IoError> {
    let (n, k, data) = read_block(path, MATRIX_MAGIC)?;
    let n = n as usize;
    if data.len() != n * n {
        return Err(IoError::format(path, format!("expected {} values for N = {n}, found {}", n * n, data.len())));
    }
    let m = SymMatrix::from_row_major(n, data).map_err(|e| IoError::format(path, e.to_string()))?;
    Ok((m, k as usize))
}

/// Writes `rows` vectors of length `n` (one per row) in the `SBMV` container.
pub fn write_vectors(path: &Path, rows: usize, n: usize, data: &[f64]) -> Result<(), IoError> {
    assert_eq!(data.len(), rows * n);
    write_block(path, VECTORS_MAGIC, rows as u64, n as u64, data)
}

pub fn read_vectors(path: &Path) -> Result<(usize, usize, Vec<f64>), IoError> {
    let (rows, n, data) = read_block(path, VECTORS_MAGIC)?;
    if data.len() as u64 != rows * n {
        return Err(IoError::format(path, "payload size does not match header"));
    }
    Ok((rows as usize, n as usize, data))
}

/// Writes the matrix as `N` comma-separated rows.
pub fn write_matrix_csv(path: &Path, m: &SymMatrix) -> Result<(), IoError> {
    let file = File::create(path).map_err(|e| IoError::io(path, e))?;
    let mut w = BufWriter::new(file);
    for i in 0..m.order() {
        let line = m.row(i).iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(",");
        writeln!(w, "{line}").map_err(|e| IoError::io(path, e))?;
    }
    w.flush().map_err(|e| IoError::io(path, e))
}

pub fn read_matrix_csv(path: &Path) -> Result<SymMatrix, IoError> {
    let file = File::open(path).map_err(|e| IoError::io(path, e))?;
    let mut data = Vec::new();
    let mut rows = 0;
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| IoError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        for field in line.split(',') {
            let x: f64 = field
                .trim()
                .parse()
                .map_err(|_| IoError::format(path, format!("line {}: bad number {field:?}", lineno + 1)))?;
            data.push(x);
        }
        rows += 1;
    }
    SymMatrix::from_row_major(rows, data).map_err(|e| IoError::format(path, e.to_string()))
}
