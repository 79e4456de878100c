//! Finite-dimensional signals: 1D vectors and 2D grids with the Euclidean
//! inner product.

use std::fmt;

use crate::error::{Error, Result};

/// Dimensions of a signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shape {
    OneD(usize),
    TwoD { rows: usize, cols: usize },
}

impl Shape {
    pub fn len(&self) -> usize {
        match *self {
            Shape::OneD(n) => n,
            Shape::TwoD { rows, cols } => rows * cols,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Shape::OneD(n) => write!(f, "{n}"),
            Shape::TwoD { rows, cols } => write!(f, "{rows}x{cols}"),
        }
    }
}

/// A vector or grid of finite real values. The shape is fixed at creation and
/// the inner product is the flat Euclidean one, `<u,v> = sum_i u_i v_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    shape: Shape,
    values: Vec<f64>,
}

impl Signal {
    /// Builds a 1D signal. Fails on non-finite entries.
    pub fn from_vec(values: Vec<f64>) -> Result<Self> {
        Self::new(Shape::OneD(values.len()), values)
    }

    /// Builds a signal with an explicit shape. Fails on non-finite entries or
    /// a length mismatch.
    pub fn new(shape: Shape, values: Vec<f64>) -> Result<Self> {
        if values.len() != shape.len() {
            return Err(Error::shape_mismatch(shape, values.len(), "signal length"));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "signal contains non-finite value {bad}"
            )));
        }
        Ok(Signal { shape, values })
    }

    pub fn zeros(shape: Shape) -> Self {
        Signal {
            shape,
            values: vec![0.0; shape.len()],
        }
    }

    /// Standard basis vector `e_index` of length `n`.
    pub fn unit(n: usize, index: usize) -> Self {
        let mut values = vec![0.0; n];
        values[index] = 1.0;
        Signal {
            shape: Shape::OneD(n),
            values,
        }
    }

    pub fn constant(shape: Shape, value: f64) -> Self {
        Signal {
            shape,
            values: vec![value; shape.len()],
        }
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Same values viewed under a different shape of equal length.
    pub fn reshaped(&self, shape: Shape) -> Result<Self> {
        if shape.len() != self.len() {
            return Err(Error::shape_mismatch(shape, self.shape, "reshape"));
        }
        Ok(Signal {
            shape,
            values: self.values.clone(),
        })
    }

    pub fn inner(&self, other: &Signal) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum()
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn norm_l1(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }

    pub fn scaled(&self, c: f64) -> Signal {
        Signal {
            shape: self.shape,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `self + c * other`, shapes must agree.
    pub fn axpy(&self, c: f64, other: &Signal) -> Signal {
        debug_assert_eq!(self.len(), other.len());
        Signal {
            shape: self.shape,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + c * b)
                .collect(),
        }
    }

    pub fn add(&self, other: &Signal) -> Signal {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &Signal) -> Signal {
        self.axpy(-1.0, other)
    }

    pub fn distance(&self, other: &Signal) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    pub(crate) fn from_raw(shape: Shape, values: Vec<f64>) -> Self {
        debug_assert_eq!(shape.len(), values.len());
        Signal { shape, values }
    }
}
