//! Ordered sequences of covariance matrices and their file formats.
//!
//! Binary layout (little endian): magic `MSVH`, `u32` version, `u64` p,
//! `u64` T, then T row-major `p x p` blocks of `f64`.

use std::io::{Read, Write};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{is_symmetric, min_eigenvalue};
use crate::scalar::Real;

pub const DUMP_MAGIC: &[u8; 4] = b"MSVH";
pub const DUMP_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovKind {
    Smoothed,
    Forecast,
    Truth,
    Fitted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CovSequence<T> {
    pub kind: CovKind,
    /// One-based time index of each matrix.
    pub times: Vec<usize>,
    #[serde(with = "crate::serde_mat::matrices")]
    pub matrices: Vec<Array2<T>>,
}

impl<T: Real> CovSequence<T> {
    /// Sequence indexed `first, first + 1, ...`.
    pub fn new(kind: CovKind, first: usize, matrices: Vec<Array2<T>>) -> Self {
        let times = (first..first + matrices.len()).collect();
        Self { kind, times, matrices }
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.matrices.first().map_or(0, |m| m.nrows())
    }

    /// Every matrix symmetric to `tol` with a positive smallest eigenvalue.
    pub fn all_spd(&self, tol: T) -> bool {
        self.matrices.iter().all(|m| is_symmetric(m.view(), tol) && min_eigenvalue(m.view()) > T::zero())
    }

    /// Long format `t,i,j,value` with one-based asset indices.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "i", "j", "value"])?;
        for (t, m) in self.times.iter().zip(&self.matrices) {
            for ((i, j), v) in m.indexed_iter() {
                w.write_record(&[t.to_string(), (i + 1).to_string(), (j + 1).to_string(), v.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R, kind: CovKind) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut entries: Vec<(usize, usize, usize, f64)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            if rec.len() != 4 {
                return Err(Error::Format(format!("expected 4 fields, got {}", rec.len())));
            }
            let parse_idx = |k: usize| -> Result<usize> {
                rec[k].trim().parse().map_err(|_| Error::Format(format!("bad index {:?}", &rec[k])))
            };
            let v: f64 = rec[3].trim().parse().map_err(|_| Error::Format(format!("bad value {:?}", &rec[3])))?;
            entries.push((parse_idx(0)?, parse_idx(1)?, parse_idx(2)?, v));
        }
        let p = entries.iter().map(|e| e.1.max(e.2)).max().unwrap_or(0);
        let mut times: Vec<usize> = entries.iter().map(|e| e.0).collect();
        times.dedup();
        let mut matrices: Vec<Array2<T>> = vec![Array2::from_elem((p, p), T::nan()); times.len()];
        let mut slot = 0;
        for (k, e) in entries.iter().enumerate() {
            if k > 0 && e.0 != entries[k - 1].0 {
                slot += 1;
            }
            if e.1 == 0 || e.2 == 0 {
                return Err(Error::Format("asset indices are one-based".into()));
            }
            matrices[slot][[e.1 - 1, e.2 - 1]] = T::lit(e.3);
        }
        if matrices.iter().any(|m| m.iter().any(|v| v.is_nan())) {
            return Err(Error::Format("incomplete covariance blocks".into()));
        }
        Ok(Self { kind, times, matrices })
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let p = self.dim();
        w.write_all(DUMP_MAGIC)?;
        w.write_all(&DUMP_VERSION.to_le_bytes())?;
        w.write_all(&(p as u64).to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        let mut buf = Vec::with_capacity(p * p * 8);
        for m in &self.matrices {
            buf.clear();
            for v in m.iter() {
                buf.extend_from_slice(&v.as_f64().to_le_bytes());
            }
            w.write_all(&buf)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a binary dump; times start at 1.
    pub fn read_binary<R: Read>(mut r: R, kind: CovKind) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != DUMP_MAGIC {
            return Err(Error::Format("not a covariance dump (bad magic)".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != DUMP_VERSION {
            return Err(Error::Format(format!("unsupported dump version {version}")));
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let p = u64::from_le_bytes(b8) as usize;
        r.read_exact(&mut b8)?;
        let n = u64::from_le_bytes(b8) as usize;
        let mut matrices = Vec::with_capacity(n);
        let mut raw = vec![0u8; p * p * 8];
        for _ in 0..n {
            r.read_exact(&mut raw)?;
            let vals = raw
                .chunks_exact(8)
                .map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("chunk of 8"))))
                .collect();
            matrices.push(Array2::from_shape_vec((p, p), vals).expect("p*p values"));
        }
        Ok(Self::new(kind, 1, matrices))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn sample() -> CovSequence<f64> {
        CovSequence::new(
            CovKind::Forecast,
            11,
            vec![array![[1.0, 0.1], [0.1, 2.0]], array![[1.5, -0.3], [-0.3, 0.7]]],
        )
    }

    #[test]
    fn binary_round_trip() {
        let s = sample();
        let mut buf = Vec::new();
        s.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 8 + 8 + 2 * 4 * 8);
        assert_eq!(&buf[..4], b"MSVH");
        let back: CovSequence<f64> = CovSequence::read_binary(buf.as_slice(), CovKind::Forecast).unwrap();
        assert_eq!(back.matrices, s.matrices);
        buf[0] = b'X';
        assert!(CovSequence::<f64>::read_binary(buf.as_slice(), CovKind::Forecast).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let s = sample();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,i,j,value\n11,1,1,1\n"));
        let back: CovSequence<f64> = CovSequence::read_csv(buf.as_slice(), CovKind::Forecast).unwrap();
        assert_eq!(back, s);
        assert!(s.all_spd(1e-12));
    }
}
