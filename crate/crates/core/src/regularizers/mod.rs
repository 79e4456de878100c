//! Absolutely one-homogeneous regularizers via their dual representation
//! `J(u) = sup_{q in K} <q, u>`: evaluation, projection onto `K`, proximal
//! maps, membership tests, and null-space bases.
//!
//! Five kinds are provided: the l1 and sup norms, anisotropic total variation
//! in 1D and 2D, and elliptic norms `sqrt(u' M u)`. For the TV kinds the dual
//! set is `K = {div q : ||q||_inf <= 1}` with forward differences, and
//! projection is exposed in gradient space where it is a componentwise clamp.

mod projections;
mod taut_string;

use crate::error::{Error, Result};
use crate::signal::{Shape, Signal};

pub(crate) use projections::{clamp_box, project_l1_ball};

/// Matrix argument for the elliptic norm `J(u) = sqrt(u' M u)`.
#[derive(Debug, Clone)]
pub enum QuadMatrix {
    /// Positive diagonal.
    Diagonal(Vec<f64>),
    /// Symmetric positive definite, row-major.
    Dense { n: usize, entries: Vec<f64> },
}

/// Validated elliptic form with a cached eigenbasis for the dense case.
#[derive(Debug, Clone)]
pub struct QuadForm {
    n: usize,
    evals: Vec<f64>,
    /// Columns are eigenvectors; `None` means the form is already diagonal.
    evecs: Option<Vec<f64>>,
}

impl QuadForm {
    fn new(matrix: QuadMatrix) -> Result<Self> {
        match matrix {
            QuadMatrix::Diagonal(d) => {
                if d.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                    return Err(Error::Configuration(
                        "quadratic form diagonal must be positive and finite".into(),
                    ));
                }
                Ok(QuadForm {
                    n: d.len(),
                    evals: d,
                    evecs: None,
                })
            }
            QuadMatrix::Dense { n, entries } => {
                if entries.len() != n * n {
                    return Err(Error::Configuration(format!(
                        "quadratic form matrix needs {} entries, got {}",
                        n * n,
                        entries.len()
                    )));
                }
                let scale = entries.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                for i in 0..n {
                    for j in (i + 1)..n {
                        if (entries[i * n + j] - entries[j * n + i]).abs() > 1e-12 * (1.0 + scale)
                        {
                            return Err(Error::Configuration(
                                "quadratic form matrix must be symmetric".into(),
                            ));
                        }
                    }
                }
                let (evals, evecs) = projections::jacobi_eigh(n, &entries);
                if evals.iter().any(|&l| l <= 0.0) {
                    return Err(Error::Configuration(
                        "quadratic form matrix must be positive definite".into(),
                    ));
                }
                Ok(QuadForm {
                    n,
                    evals,
                    evecs: Some(evecs),
                })
            }
        }
    }

    fn to_eigen(&self, u: &[f64]) -> Vec<f64> {
        match &self.evecs {
            None => u.to_vec(),
            Some(v) => {
                let n = self.n;
                (0..n)
                    .map(|k| (0..n).map(|i| v[i * n + k] * u[i]).sum())
                    .collect()
            }
        }
    }

    fn from_eigen(&self, w: &[f64]) -> Vec<f64> {
        match &self.evecs {
            None => w.to_vec(),
            Some(v) => {
                let n = self.n;
                (0..n)
                    .map(|i| (0..n).map(|k| v[i * n + k] * w[k]).sum())
                    .collect()
            }
        }
    }

    /// `u' M u`.
    pub fn quad_form(&self, u: &[f64]) -> f64 {
        let w = self.to_eigen(u);
        w.iter().zip(&self.evals).map(|(wi, li)| li * wi * wi).sum()
    }

    /// `q' M^{-1} q`, the membership functional of the dual ellipsoid.
    pub fn inv_quad_form(&self, q: &[f64]) -> f64 {
        let w = self.to_eigen(q);
        w.iter().zip(&self.evals).map(|(wi, li)| wi * wi / li).sum()
    }

    fn project(&self, z: &[f64]) -> Vec<f64> {
        let w = self.to_eigen(z);
        let p = projections::project_ellipsoid_diag(&w, &self.evals);
        self.from_eigen(&p)
    }
}

#[derive(Debug, Clone)]
enum Kind {
    L1,
    LInf,
    Tv1d,
    Tv2d,
    QuadraticForm(QuadForm),
}

/// Inner iteration budget for the 2D TV prox.
const TV_PROX_MAX_ITERS: usize = 2_000;
/// Duality-gap target for the 2D TV prox; tighter than the 1e-8 the rest of
/// the crate relies on so that the primal error stays near machine precision.
const TV_PROX_GAP: f64 = 1e-13;
/// Iteration budget for the dual-ball feasibility problem of the TV kinds.
const TV_MEMBERSHIP_MAX_ITERS: usize = 20_000;

/// Result of a dual-ball membership test.
#[derive(Debug, Clone, Copy)]
pub struct Membership {
    pub inside: bool,
    /// Euclidean distance from the tested point to `K` (upper bound for the
    /// TV kinds, where it comes from a feasibility solve).
    pub distance: f64,
}

/// An absolutely one-homogeneous regularizer on a fixed domain shape.
#[derive(Debug, Clone)]
pub struct Regularizer {
    kind: Kind,
    shape: Shape,
}

impl Regularizer {
    pub fn l1(shape: Shape) -> Self {
        Regularizer {
            kind: Kind::L1,
            shape,
        }
    }

    pub fn linf(shape: Shape) -> Self {
        Regularizer {
            kind: Kind::LInf,
            shape,
        }
    }

    pub fn tv1d(n: usize) -> Self {
        Regularizer {
            kind: Kind::Tv1d,
            shape: Shape::OneD(n),
        }
    }

    pub fn tv2d(rows: usize, cols: usize) -> Self {
        Regularizer {
            kind: Kind::Tv2d,
            shape: Shape::TwoD { rows, cols },
        }
    }

    pub fn quadratic_form(shape: Shape, matrix: QuadMatrix) -> Result<Self> {
        let form = QuadForm::new(matrix)?;
        if form.n != shape.len() {
            return Err(Error::Configuration(format!(
                "quadratic form size {} does not match domain {}",
                form.n, shape
            )));
        }
        Ok(Regularizer {
            kind: Kind::QuadraticForm(form),
            shape,
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    /// The elliptic form, when this regularizer is one.
    pub fn quad_form(&self) -> Option<&QuadForm> {
        match &self.kind {
            Kind::QuadraticForm(f) => Some(f),
            _ => None,
        }
    }

    pub fn is_tv(&self) -> bool {
        matches!(self.kind, Kind::Tv1d | Kind::Tv2d)
    }

    pub(crate) fn kind_name(&self) -> &'static str {
        match self.kind {
            Kind::L1 => "l1",
            Kind::LInf => "linf",
            Kind::Tv1d => "tv1d",
            Kind::Tv2d => "tv2d",
            Kind::QuadraticForm(_) => "quadratic-form",
        }
    }

    fn check_domain(&self, u: &Signal, context: &str) -> Result<()> {
        if u.shape() != self.shape {
            return Err(Error::shape_mismatch(self.shape, u.shape(), context));
        }
        Ok(())
    }

    /// `J(u)`.
    pub fn evaluate(&self, u: &Signal) -> Result<f64> {
        self.check_domain(u, "regularizer argument")?;
        let x = u.values();
        Ok(match &self.kind {
            Kind::L1 => x.iter().map(|v| v.abs()).sum(),
            Kind::LInf => x.iter().fold(0.0, |m: f64, v| m.max(v.abs())),
            Kind::Tv1d | Kind::Tv2d => self.d_apply(x).iter().map(|v| v.abs()).sum(),
            Kind::QuadraticForm(form) => form.quad_form(x).max(0.0).sqrt(),
        })
    }

    /// Shape of the dual variable accepted by [`project_dual_ball`]: the
    /// domain shape, except for the TV kinds where it is the flattened
    /// gradient space.
    ///
    /// [`project_dual_ball`]: Regularizer::project_dual_ball
    pub fn dual_shape(&self) -> Shape {
        match self.kind {
            Kind::Tv1d | Kind::Tv2d => Shape::OneD(self.dual_dim()),
            _ => self.shape,
        }
    }

    /// Nearest point of the dual ball. For TV kinds the argument lives in
    /// gradient space and the projection is the componentwise clamp.
    pub fn project_dual_ball(&self, q: &Signal) -> Result<Signal> {
        if q.shape() != self.dual_shape() {
            return Err(Error::shape_mismatch(
                self.dual_shape(),
                q.shape(),
                "dual variable",
            ));
        }
        Ok(Signal::from_raw(
            q.shape(),
            self.project_dual_scaled(q.values(), 1.0),
        ))
    }

    /// `argmin_v 0.5 ||v - x||^2 + s J(v)`; `s = 0` returns `x`.
    pub fn prox(&self, x: &Signal, s: f64) -> Result<Signal> {
        self.check_domain(x, "prox argument")?;
        if s < 0.0 {
            return Err(Error::InvalidInput("prox needs s >= 0".into()));
        }
        if s == 0.0 {
            return Ok(x.clone());
        }
        let values = x.values();
        let out = match &self.kind {
            Kind::L1 => values
                .iter()
                .map(|&v| v.signum() * (v.abs() - s).max(0.0))
                .collect(),
            Kind::LInf => {
                // Moreau: x - proj onto the l1 ball of radius s.
                let p = project_l1_ball(values, s);
                values.iter().zip(&p).map(|(a, b)| a - b).collect()
            }
            Kind::QuadraticForm(form) => {
                let scaled: Vec<f64> = values.iter().map(|v| v / s).collect();
                let p = form.project(&scaled);
                values.iter().zip(&p).map(|(a, b)| a - s * b).collect()
            }
            Kind::Tv1d => taut_string::tv1d_prox(values, s),
            Kind::Tv2d => self.tv_prox_dual(values, s).0,
        };
        Ok(Signal::from_raw(self.shape, out))
    }

    /// Distance-based test for `p in K = dJ(0)`; closed form except for the
    /// TV kinds, which solve `min_{||q||_inf <= 1} ||div q - p||`.
    pub fn dual_ball_membership(&self, p: &Signal, tol: f64) -> Result<Membership> {
        self.check_domain(p, "membership argument")?;
        let (_, distance) = self.membership_distance(p.values(), tol, None);
        Ok(Membership {
            inside: distance <= tol,
            distance,
        })
    }

    /// Orthonormal basis of the null space `{u : J(u) = 0}`.
    pub fn nullspace_basis(&self) -> Vec<Signal> {
        match self.kind {
            Kind::Tv1d | Kind::Tv2d => {
                let n = self.shape.len();
                if n == 0 {
                    return Vec::new();
                }
                vec![Signal::constant(self.shape, 1.0 / (n as f64).sqrt())]
            }
            _ => Vec::new(),
        }
    }

    // ----- gradient-space machinery shared with the saddle-point solver -----

    /// Dimension of the dual (gradient) space used by the solver.
    pub(crate) fn dual_dim(&self) -> usize {
        match self.kind {
            Kind::Tv1d => self.shape.len().saturating_sub(1),
            Kind::Tv2d => match self.shape {
                Shape::TwoD { rows, cols } => rows * (cols - 1).max(0) + (rows - 1).max(0) * cols,
                _ => unreachable!("tv2d is always built on a 2D shape"),
            },
            _ => self.shape.len(),
        }
    }

    /// Forward difference map for the TV kinds; identity otherwise.
    pub(crate) fn d_apply(&self, u: &[f64]) -> Vec<f64> {
        match self.kind {
            Kind::Tv1d => u.windows(2).map(|w| w[1] - w[0]).collect(),
            Kind::Tv2d => {
                let (rows, cols) = match self.shape {
                    Shape::TwoD { rows, cols } => (rows, cols),
                    _ => unreachable!(),
                };
                let mut out = Vec::with_capacity(self.dual_dim());
                for i in 0..rows {
                    for j in 0..cols.saturating_sub(1) {
                        out.push(u[i * cols + j + 1] - u[i * cols + j]);
                    }
                }
                for i in 0..rows.saturating_sub(1) {
                    for j in 0..cols {
                        out.push(u[(i + 1) * cols + j] - u[i * cols + j]);
                    }
                }
                out
            }
            _ => u.to_vec(),
        }
    }

    /// Adjoint of [`d_apply`]; the negative divergence for the TV kinds.
    pub(crate) fn d_transpose(&self, q: &[f64]) -> Vec<f64> {
        match self.kind {
            Kind::Tv1d => {
                let n = self.shape.len();
                let mut out = vec![0.0; n];
                for (i, &qi) in q.iter().enumerate() {
                    out[i] -= qi;
                    out[i + 1] += qi;
                }
                out
            }
            Kind::Tv2d => {
                let (rows, cols) = match self.shape {
                    Shape::TwoD { rows, cols } => (rows, cols),
                    _ => unreachable!(),
                };
                let mut out = vec![0.0; rows * cols];
                let hw = cols.saturating_sub(1);
                for i in 0..rows {
                    for j in 0..hw {
                        let qi = q[i * hw + j];
                        out[i * cols + j] -= qi;
                        out[i * cols + j + 1] += qi;
                    }
                }
                let offset = rows * hw;
                for i in 0..rows.saturating_sub(1) {
                    for j in 0..cols {
                        let qi = q[offset + i * cols + j];
                        out[i * cols + j] -= qi;
                        out[(i + 1) * cols + j] += qi;
                    }
                }
                out
            }
            _ => q.to_vec(),
        }
    }

    /// Upper bound on `||D||^2` for step-size choices.
    pub(crate) fn d_norm_sq_bound(&self) -> f64 {
        match self.kind {
            Kind::Tv1d => 4.0,
            Kind::Tv2d => 8.0,
            _ => 1.0,
        }
    }

    /// Projection of a dual-space vector onto `t * (dual ball)`.
    pub(crate) fn project_dual_scaled(&self, q: &[f64], t: f64) -> Vec<f64> {
        if t <= 0.0 {
            return vec![0.0; q.len()];
        }
        match &self.kind {
            Kind::L1 | Kind::Tv1d | Kind::Tv2d => {
                let mut out = q.to_vec();
                clamp_box(&mut out, t);
                out
            }
            Kind::LInf => project_l1_ball(q, t),
            Kind::QuadraticForm(form) => {
                let scaled: Vec<f64> = q.iter().map(|v| v / t).collect();
                form.project(&scaled).iter().map(|v| t * v).collect()
            }
        }
    }

    /// Distance from `p` (signal space) to `K`, optionally warm-starting the
    /// feasibility solve of the TV kinds. Returns the certificate in gradient
    /// space for reuse.
    pub(crate) fn membership_distance(
        &self,
        p: &[f64],
        tol: f64,
        warm: Option<&[f64]>,
    ) -> (Option<Vec<f64>>, f64) {
        match &self.kind {
            Kind::L1 => {
                let d: f64 = p
                    .iter()
                    .map(|&v| {
                        let excess = (v.abs() - 1.0).max(0.0);
                        excess * excess
                    })
                    .sum();
                (None, d.sqrt())
            }
            Kind::LInf => {
                let proj = project_l1_ball(p, 1.0);
                let d: f64 = p
                    .iter()
                    .zip(&proj)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (None, d.sqrt())
            }
            Kind::QuadraticForm(form) => {
                let proj = form.project(p);
                let d: f64 = p
                    .iter()
                    .zip(&proj)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (None, d.sqrt())
            }
            Kind::Tv1d | Kind::Tv2d => {
                let (q, dist) = self.tv_membership_distance(p, tol, warm);
                (Some(q), dist)
            }
        }
    }

    /// Euclidean projection of a signal-space point onto `K` for the TV
    /// kinds (closed form for the others). Used by Moreau consistency checks.
    pub(crate) fn project_dual_ball_signal_space(&self, p: &[f64]) -> Vec<f64> {
        match &self.kind {
            Kind::Tv1d | Kind::Tv2d => {
                let (q, _) = self.tv_membership_distance(p, 1e-12, None);
                self.d_transpose(&q)
            }
            _ => self.project_dual_scaled(p, 1.0),
        }
    }

    /// FISTA on the dual of the TV prox problem. Returns the prox point, the
    /// iterations used, and the final duality gap.
    fn tv_prox_dual(&self, x: &[f64], s: f64) -> (Vec<f64>, usize, f64) {
        let gdim = self.dual_dim();
        if gdim == 0 {
            return (x.to_vec(), 0, 0.0);
        }
        let step = 1.0 / (s * s * self.d_norm_sq_bound());
        let mut q = vec![0.0; gdim];
        let mut q_prev = q.clone();
        let mut momentum = q.clone();
        let mut theta = 1.0f64;
        let mut v: Vec<f64>;
        let mut gap = f64::INFINITY;
        let mut iters = 0;
        for it in 0..TV_PROX_MAX_ITERS {
            iters = it + 1;
            let dtw = self.d_transpose(&momentum);
            v = x.iter().zip(&dtw).map(|(a, b)| a - s * b).collect();
            let dv = self.d_apply(&v);
            for (qk, (wk, g)) in q.iter_mut().zip(momentum.iter().zip(&dv)) {
                *qk = (wk + step * s * g).clamp(-1.0, 1.0);
            }
            let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
            let accel = (theta - 1.0) / theta_next;
            for ((w, &qk), &qp) in momentum.iter_mut().zip(&q).zip(&q_prev) {
                *w = qk + accel * (qk - qp);
            }
            q_prev.copy_from_slice(&q);
            theta = theta_next;

            let dtq = self.d_transpose(&q);
            let vq: Vec<f64> = x.iter().zip(&dtq).map(|(a, b)| a - s * b).collect();
            let dvq = self.d_apply(&vq);
            let l1: f64 = dvq.iter().map(|g| g.abs()).sum();
            let pairing: f64 = dvq.iter().zip(&q).map(|(g, qk)| g * qk).sum();
            gap = s * (l1 - pairing);
            if gap.abs() <= TV_PROX_GAP {
                return (vq, iters, gap);
            }
        }
        let dtq = self.d_transpose(&q);
        let vq: Vec<f64> = x.iter().zip(&dtq).map(|(a, b)| a - s * b).collect();
        (vq, iters, gap)
    }

    /// FISTA on `min_{||q||_inf <= 1} 0.5 ||D'q - p||^2`; the attained norm is
    /// an upper bound on the distance from `p` to `K`.
    fn tv_membership_distance(&self, p: &[f64], tol: f64, warm: Option<&[f64]>) -> (Vec<f64>, f64) {
        let gdim = self.dual_dim();
        if gdim == 0 {
            let d: f64 = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            return (Vec::new(), d);
        }
        let step = 1.0 / self.d_norm_sq_bound();
        let mut q = match warm {
            Some(w) if w.len() == gdim => {
                let mut q = w.to_vec();
                clamp_box(&mut q, 1.0);
                q
            }
            _ => vec![0.0; gdim],
        };
        let mut q_prev = q.clone();
        let mut momentum = q.clone();
        let mut theta = 1.0f64;
        let mut best = f64::INFINITY;
        let early = 0.25 * tol.max(0.0);
        let move_tol = (0.01 * tol).max(1e-13);
        let mut prev_proj = self.d_transpose(&q);
        for _ in 0..TV_MEMBERSHIP_MAX_ITERS {
            let resid: Vec<f64> = self
                .d_transpose(&momentum)
                .iter()
                .zip(p)
                .map(|(a, b)| a - b)
                .collect();
            let grad = self.d_apply(&resid);
            for (qk, (wk, g)) in q.iter_mut().zip(momentum.iter().zip(&grad)) {
                *qk = (wk - step * g).clamp(-1.0, 1.0);
            }
            let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
            let accel = (theta - 1.0) / theta_next;
            for ((w, &qk), &qp) in momentum.iter_mut().zip(&q).zip(&q_prev) {
                *w = qk + accel * (qk - qp);
            }
            q_prev.copy_from_slice(&q);
            theta = theta_next;

            let proj = self.d_transpose(&q);
            let mut dist2 = 0.0;
            let mut movement2 = 0.0;
            for ((a, b), c) in proj.iter().zip(p).zip(&prev_proj) {
                dist2 += (a - b) * (a - b);
                movement2 += (a - c) * (a - c);
            }
            let dist = dist2.sqrt();
            best = best.min(dist);
            if dist <= early {
                return (q, dist);
            }
            // stop once the projection point has settled
            if movement2.sqrt() <= move_tol * (1.0 + dist) {
                return (q, dist);
            }
            prev_proj = proj;
        }
        (q, best)
    }
}

#[cfg(test)]
mod tests;
