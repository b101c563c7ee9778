use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Term,
    Author,
}

/// Symmetric zero-diagonal distance matrix stored as its strict upper
/// triangle in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct CondensedDistanceMatrix<T> {
    n: usize,
    values: Vec<T>,
    kind: MatrixKind,
    ids: Vec<String>,
}

/// Sidecar describing the little-endian float64 condensed binary format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixHeader {
    pub n: usize,
    pub kind: MatrixKind,
    pub dtype: String,
    pub layout: String,
    pub ids: Vec<String>,
}

#[inline]
pub fn condensed_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    n * i - i * (i + 1) / 2 + (j - i - 1)
}

impl<T: Scalar> CondensedDistanceMatrix<T> {
    pub fn new(n: usize, values: Vec<T>, kind: MatrixKind, ids: Vec<String>) -> Result<Self> {
        let expected = n * n.saturating_sub(1) / 2;
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                left: expected,
                right: values.len(),
            });
        }
        if ids.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: ids.len(),
            });
        }
        let m = CondensedDistanceMatrix {
            n,
            values,
            kind,
            ids,
        };
        m.validate()?;
        Ok(m)
    }

    /// Fills the upper triangle in parallel; `f(i, j)` is called with `i < j`.
    pub fn try_from_fn<F>(n: usize, kind: MatrixKind, ids: Vec<String>, f: F) -> Result<Self>
    where
        F: Fn(usize, usize) -> Result<T> + Sync,
    {
        let rows: Vec<Vec<T>> = (0..n)
            .into_par_iter()
            .map(|i| ((i + 1)..n).map(|j| f(i, j)).collect::<Result<Vec<T>>>())
            .collect::<Result<_>>()?;
        Self::new(n, rows.concat(), kind, ids)
    }

    fn validate(&self) -> Result<()> {
        let pi = T::pi();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let v = self.values[condensed_index(self.n, i, j)];
                if !v.is_finite() || v < T::zero() {
                    return Err(Error::NonFiniteDistance { i, j });
                }
                if self.kind == MatrixKind::Term && v > pi + T::lit(1e-12) {
                    return Err(Error::InvalidParameter(format!(
                        "angular distance {v} exceeds pi at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => T::zero(),
            std::cmp::Ordering::Less => self.values[condensed_index(self.n, i, j)],
            std::cmp::Ordering::Greater => self.values[condensed_index(self.n, j, i)],
        }
    }

    /// Row `i` of the square form (including the zero diagonal).
    pub fn row(&self, i: usize) -> Vec<T> {
        (0..self.n).map(|j| self.get(i, j)).collect()
    }

    pub fn to_square(&self) -> Vec<Vec<T>> {
        (0..self.n).map(|i| self.row(i)).collect()
    }

    /// Square CSV with a header row of ids.
    pub fn write_square_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec![String::new()];
        header.extend(self.ids.iter().cloned());
        out.write_record(&header)?;
        for i in 0..self.n {
            let mut rec = vec![self.ids[i].clone()];
            rec.extend(self.row(i).iter().map(|v| v.as_f64().to_string()));
            out.write_record(&rec)?;
        }
        out.flush().map_err(|e| Error::io("<distance csv>", e))?;
        Ok(())
    }

    pub fn read_square_csv<R: Read>(r: R, kind: MatrixKind) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
        let ids: Vec<String> = reader.headers()?.iter().skip(1).map(str::to_string).collect();
        let n = ids.len();
        let mut square = Vec::with_capacity(n);
        for (i, rec) in reader.records().enumerate() {
            let rec = rec?;
            let row: Vec<f64> = rec
                .iter()
                .skip(1)
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidRow {
                    row: i + 2,
                    message: e.to_string(),
                })?;
            if row.len() != n {
                return Err(Error::LengthMismatch {
                    left: n,
                    right: row.len(),
                });
            }
            square.push(row);
        }
        if square.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: square.len(),
            });
        }
        let mut values = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                values.push(T::lit(square[i][j]));
            }
        }
        Self::new(n, values, kind, ids)
    }

    pub fn header(&self) -> MatrixHeader {
        MatrixHeader {
            n: self.n,
            kind: self.kind,
            dtype: "float64-le".into(),
            layout: "condensed-upper-row-major".into(),
            ids: self.ids.clone(),
        }
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let mut buf = Vec::with_capacity(self.values.len() * 8);
        for v in &self.values {
            buf.extend_from_slice(&v.as_f64().to_le_bytes());
        }
        w.write_all(&buf).map_err(|e| Error::io("<distance binary>", e))
    }

    pub fn read_binary(header: &MatrixHeader, bytes: &[u8]) -> Result<Self> {
        if bytes.len() % 8 != 0 {
            return Err(Error::InvalidParameter("binary length not a multiple of 8".into()));
        }
        let values = bytes
            .chunks_exact(8)
            .map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("8 bytes"))))
            .collect();
        Self::new(header.n, values, header.kind, header.ids.clone())
    }

    /// Flattened upper triangle as f64.
    pub fn upper_triangle(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.as_f64()).collect()
    }
}
