//! Forward operators with exact adjoints: identity, dense matrices, and
//! zero-padded 1D convolution. All arithmetic is in f64.

use crate::error::{Error, Result};
use crate::signal::{Shape, Signal};

/// Maximum number of power iterations in [`Operator::operator_norm`].
const POWER_ITER_MAX: usize = 10_000;

#[derive(Debug, Clone)]
enum Kind {
    Identity,
    /// Row-major `rows x cols` matrix.
    Dense {
        rows: usize,
        cols: usize,
        entries: Vec<f64>,
    },
    /// Full convolution with zero padding: input length `n`, output `n + k - 1`.
    Conv1d {
        taps: Vec<f64>,
        input_len: usize,
    },
}

/// A linear map `A` between signal spaces, with its exact adjoint.
#[derive(Debug, Clone)]
pub struct Operator {
    kind: Kind,
    input_shape: Shape,
    output_shape: Shape,
}

impl Operator {
    pub fn identity(shape: Shape) -> Self {
        Operator {
            kind: Kind::Identity,
            input_shape: shape,
            output_shape: shape,
        }
    }

    /// Dense matrix given in row-major order.
    pub fn dense(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "dense operator needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "dense operator entries must be finite".into(),
            ));
        }
        Ok(Operator {
            kind: Kind::Dense {
                rows,
                cols,
                entries,
            },
            input_shape: Shape::OneD(cols),
            output_shape: Shape::OneD(rows),
        })
    }

    /// Zero-padded full convolution with the given kernel taps.
    pub fn convolution(taps: Vec<f64>, input_len: usize) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidInput("convolution kernel is empty".into()));
        }
        if taps.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "convolution taps must be finite".into(),
            ));
        }
        let output_len = input_len + taps.len() - 1;
        Ok(Operator {
            kind: Kind::Conv1d { taps, input_len },
            input_shape: Shape::OneD(input_len),
            output_shape: Shape::OneD(output_len),
        })
    }

    pub fn input_shape(&self) -> Shape {
        self.input_shape
    }

    pub fn output_shape(&self) -> Shape {
        self.output_shape
    }

    pub fn is_identity(&self) -> bool {
        matches!(self.kind, Kind::Identity)
    }

    /// Computes `A u`.
    pub fn apply(&self, u: &Signal) -> Result<Signal> {
        if u.shape() != self.input_shape {
            return Err(Error::shape_mismatch(
                self.input_shape,
                u.shape(),
                "operator input",
            ));
        }
        Ok(match &self.kind {
            Kind::Identity => u.clone(),
            Kind::Dense {
                rows,
                cols,
                entries,
            } => {
                let x = u.values();
                let mut out = vec![0.0; *rows];
                for (i, out_i) in out.iter_mut().enumerate() {
                    let row = &entries[i * cols..(i + 1) * cols];
                    *out_i = row.iter().zip(x).map(|(a, b)| a * b).sum();
                }
                Signal::from_raw(self.output_shape, out)
            }
            Kind::Conv1d { taps, .. } => {
                let x = u.values();
                let mut out = vec![0.0; self.output_shape.len()];
                for (i, &xi) in x.iter().enumerate() {
                    if xi == 0.0 {
                        continue;
                    }
                    for (j, &aj) in taps.iter().enumerate() {
                        out[i + j] += aj * xi;
                    }
                }
                Signal::from_raw(self.output_shape, out)
            }
        })
    }

    /// Computes `A* w`; satisfies `<Au, w> = <u, A*w>` exactly up to rounding.
    pub fn apply_adjoint(&self, w: &Signal) -> Result<Signal> {
        if w.shape() != self.output_shape {
            return Err(Error::shape_mismatch(
                self.output_shape,
                w.shape(),
                "operator adjoint input",
            ));
        }
        Ok(match &self.kind {
            Kind::Identity => w.clone(),
            Kind::Dense {
                rows,
                cols,
                entries,
            } => {
                let y = w.values();
                let mut out = vec![0.0; *cols];
                for i in 0..*rows {
                    let yi = y[i];
                    if yi == 0.0 {
                        continue;
                    }
                    let row = &entries[i * cols..(i + 1) * cols];
                    for (o, &a) in out.iter_mut().zip(row) {
                        *o += a * yi;
                    }
                }
                Signal::from_raw(self.input_shape, out)
            }
            Kind::Conv1d { taps, input_len } => {
                let y = w.values();
                let mut out = vec![0.0; *input_len];
                for (i, out_i) in out.iter_mut().enumerate() {
                    *out_i = taps.iter().enumerate().map(|(j, &aj)| aj * y[i + j]).sum();
                }
                Signal::from_raw(self.input_shape, out)
            }
        })
    }

    /// Spectral norm `||A||_2` via power iteration on `A*A` with a fixed
    /// deterministic start vector.
    pub fn operator_norm(&self, tol: f64) -> Result<f64> {
        if tol <= 0.0 {
            return Err(Error::InvalidInput("operator_norm needs tol > 0".into()));
        }
        if let Kind::Identity = self.kind {
            return Ok(1.0);
        }
        let n = self.input_shape.len();
        if n == 0 {
            return Ok(0.0);
        }
        // All-ones start plus a tiny index-dependent tilt so that eigenvectors
        // orthogonal to the constant vector are still reachable.
        let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 1e-3 * (i + 1) as f64 / n as f64).collect();
        let mut sigma_sq_prev = 0.0;
        for _ in 0..POWER_ITER_MAX {
            let vs = Signal::from_raw(self.input_shape, v.clone());
            let av = self.apply(&vs)?;
            let atav = self.apply_adjoint(&av)?;
            let vnorm_sq = vs.inner(&vs);
            if vnorm_sq == 0.0 {
                return Ok(0.0);
            }
            let sigma_sq = av.inner(&av) / vnorm_sq;
            let next_norm = atav.norm();
            if next_norm == 0.0 {
                return Ok(0.0);
            }
            v = atav.scaled(1.0 / next_norm).into_values();
            if (sigma_sq - sigma_sq_prev).abs() <= tol * sigma_sq.max(f64::MIN_POSITIVE) {
                return Ok(sigma_sq.sqrt());
            }
            sigma_sq_prev = sigma_sq;
        }
        Ok(sigma_sq_prev.max(0.0).sqrt())
    }

    /// Dense materialization of the operator, used by small direct solves.
    pub(crate) fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.input_shape.len();
        let mut cols = Vec::with_capacity(n);
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            let col = self
                .apply(&Signal::from_raw(self.input_shape, e))
                .expect("shape is consistent");
            cols.push(col.into_values());
        }
        let m = self.output_shape.len();
        (0..m)
            .map(|r| (0..n).map(|c| cols[c][r]).collect())
            .collect()
    }
}
