//! Projection onto the regularizer's null space measured in the image of the
//! forward operator: `argmin_{u in N(J)} ||A u - f||`.

use crate::error::{Error, Result};
use crate::linops::Operator;
use crate::signal::{Shape, Signal};

/// Precomputed normal equations for the null-space projection.
#[derive(Debug, Clone)]
pub struct AProjection {
    basis: Vec<Signal>,
    forward_basis: Vec<Signal>,
    /// Lower-triangular Cholesky factor of the Gram matrix `<A b_i, A b_j>`.
    chol: Vec<f64>,
    signal_shape: Shape,
    data_shape: Shape,
}

impl AProjection {
    /// Factorizes the Gram matrix of `A` restricted to the spanned subspace.
    /// A singular Gram matrix means `||A .||` is not a norm there and is
    /// reported as a configuration error.
    pub fn build(op: &Operator, basis: Vec<Signal>) -> Result<Self> {
        let mut forward_basis = Vec::with_capacity(basis.len());
        for b in &basis {
            if b.shape() != op.input_shape() {
                return Err(Error::shape_mismatch(
                    op.input_shape(),
                    b.shape(),
                    "null-space basis vector",
                ));
            }
            forward_basis.push(op.apply(b)?);
        }
        let k = basis.len();
        let mut gram = vec![0.0; k * k];
        for i in 0..k {
            for j in 0..k {
                gram[i * k + j] = forward_basis[i].inner(&forward_basis[j]);
            }
        }
        let chol = cholesky(k, &gram).ok_or_else(|| {
            Error::Configuration(
                "Gram matrix of the null-space basis is not positive definite; \
                 A restricted to the null space must be injective"
                    .into(),
            )
        })?;
        Ok(AProjection {
            basis,
            forward_basis,
            chol,
            signal_shape: op.input_shape(),
            data_shape: op.output_shape(),
        })
    }

    pub fn basis(&self) -> &[Signal] {
        &self.basis
    }

    /// Coefficients of the projection in the stored basis.
    pub fn coefficients(&self, f: &Signal) -> Result<Vec<f64>> {
        if f.shape() != self.data_shape {
            return Err(Error::shape_mismatch(
                self.data_shape,
                f.shape(),
                "projection argument",
            ));
        }
        let k = self.basis.len();
        let rhs: Vec<f64> = self.forward_basis.iter().map(|ab| ab.inner(f)).collect();
        Ok(cholesky_solve(k, &self.chol, &rhs))
    }

    /// The projection expressed in signal space.
    pub fn project(&self, f: &Signal) -> Result<Signal> {
        let coeffs = self.coefficients(f)?;
        let mut out = Signal::zeros(self.signal_shape);
        for (c, b) in coeffs.iter().zip(&self.basis) {
            out = out.axpy(*c, b);
        }
        Ok(out)
    }

    /// `A` applied to the projection, i.e. the best approximation of `f`
    /// within the image of the null space.
    pub fn project_forward(&self, f: &Signal) -> Result<Signal> {
        let coeffs = self.coefficients(f)?;
        let mut out = Signal::zeros(self.data_shape);
        for (c, ab) in coeffs.iter().zip(&self.forward_basis) {
            out = out.axpy(*c, ab);
        }
        Ok(out)
    }
}

fn cholesky(k: usize, gram: &[f64]) -> Option<Vec<f64>> {
    let mut l = vec![0.0; k * k];
    for i in 0..k {
        for j in 0..=i {
            let mut sum = gram[i * k + j];
            for p in 0..j {
                sum -= l[i * k + p] * l[j * k + p];
            }
            if i == j {
                if sum <= 0.0 {
                    return None;
                }
                l[i * k + i] = sum.sqrt();
            } else {
                l[i * k + j] = sum / l[j * k + j];
            }
        }
    }
    Some(l)
}

fn cholesky_solve(k: usize, l: &[f64], rhs: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; k];
    for i in 0..k {
        let mut sum = rhs[i];
        for p in 0..i {
            sum -= l[i * k + p] * y[p];
        }
        y[i] = sum / l[i * k + i];
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let mut sum = y[i];
        for p in (i + 1)..k {
            sum -= l[p * k + i] * x[p];
        }
        x[i] = sum / l[i * k + i];
    }
    x
}
