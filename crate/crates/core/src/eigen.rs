//! Generalized singular vectors `lambda A*A u in dJ(u)`, tail-sum
//! admissibility of their linear combinations, and the closed-form solution
//! paths those combinations follow. The closed forms serve as ground truth
//! for the iterative solver.

use crate::error::{Error, Result};
use crate::linops::Operator;
use crate::regularizers::Regularizer;
use crate::signal::Signal;

/// One eigencomponent of a decomposition: vector, coefficient, and singular
/// value.
#[derive(Debug, Clone)]
pub struct EigenComponent {
    pub vector: Signal,
    pub coefficient: f64,
    pub singular_value: f64,
}

impl EigenComponent {
    /// Shrinkage breakpoint `|gamma| / lambda` of this component.
    pub fn vanish_time(&self) -> f64 {
        self.coefficient.abs() / self.singular_value
    }
}

/// Outcome of a singular-vector or tail-sum verification.
#[derive(Debug, Clone, Copy)]
pub struct VerifyReport {
    pub ok: bool,
    pub violation: f64,
}

/// Outcome of the tail-sum admissibility check.
#[derive(Debug, Clone, Copy)]
pub struct Sub0Report {
    pub ok: bool,
    /// Zero-based index of the first tail sum outside the dual ball.
    pub first_failing: Option<usize>,
    pub violation: f64,
}

/// Data composed of pairwise A-orthogonal singular vectors with strictly
/// increasing shrinkage breakpoints, together with the cached quantities the
/// closed-form path needs.
#[derive(Debug, Clone)]
pub struct Decomposition {
    op: Operator,
    reg: Regularizer,
    components: Vec<EigenComponent>,
    /// `A u_i` per component.
    forward: Vec<Signal>,
    sub0: Sub0Report,
}

impl Decomposition {
    /// Validates structure (nonzero coefficients, positive singular values,
    /// pairwise A-orthogonality, strictly increasing breakpoints; components
    /// are sorted by breakpoint) and evaluates the tail-sum condition at the
    /// given tolerance.
    pub fn new(
        op: Operator,
        reg: Regularizer,
        mut components: Vec<EigenComponent>,
        tol: f64,
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidInput("empty decomposition".into()));
        }
        for c in &components {
            if c.coefficient == 0.0 {
                return Err(Error::InvalidInput("zero coefficient in decomposition".into()));
            }
            if !(c.singular_value > 0.0) {
                return Err(Error::InvalidInput(
                    "singular values must be positive".into(),
                ));
            }
        }
        components.sort_by(|a, b| {
            a.vanish_time()
                .partial_cmp(&b.vanish_time())
                .expect("finite breakpoints")
        });
        for w in components.windows(2) {
            let (a, b) = (w[0].vanish_time(), w[1].vanish_time());
            if b - a <= 1e-12 * (1.0 + b) {
                return Err(Error::InvalidInput(format!(
                    "components share the shrinkage breakpoint {a}; merge them into one \
                     eigenvector before building the decomposition"
                )));
            }
        }
        let mut forward = Vec::with_capacity(components.len());
        for c in &components {
            forward.push(op.apply(&c.vector)?);
        }
        for i in 0..forward.len() {
            for j in (i + 1)..forward.len() {
                let inner = forward[i].inner(&forward[j]);
                if inner.abs() > 1e-10 * (1.0 + forward[i].norm() * forward[j].norm()) {
                    return Err(Error::InvalidInput(format!(
                        "components {i} and {j} are not A-orthogonal: <Au_i, Au_j> = {inner}"
                    )));
                }
            }
        }
        let mut d = Decomposition {
            op,
            reg,
            components,
            forward,
            sub0: Sub0Report {
                ok: false,
                first_failing: None,
                violation: f64::INFINITY,
            },
        };
        d.sub0 = verify_sub0(&d, tol)?;
        Ok(d)
    }

    pub fn components(&self) -> &[EigenComponent] {
        &self.components
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn regularizer(&self) -> &Regularizer {
        &self.reg
    }

    pub fn sub0(&self) -> Sub0Report {
        self.sub0
    }

    /// The datum `f = sum_i gamma_i A u_i`.
    pub fn datum(&self) -> Signal {
        let mut f = Signal::zeros(self.op.output_shape());
        for (c, af) in self.components.iter().zip(&self.forward) {
            f = f.axpy(c.coefficient, af);
        }
        f
    }

    /// Tail subgradient `p_k = sum_{i>=k} sgn(gamma_i) lambda_i A*A u_i`
    /// (zero-based `k`).
    pub fn tail_subgradient(&self, k: usize) -> Result<Signal> {
        Ok(self.op.apply_adjoint(&self.tail_forward(k))?)
    }

    /// `sum_{i>=k} sgn(gamma_i) lambda_i A u_i`.
    fn tail_forward(&self, k: usize) -> Signal {
        let mut out = Signal::zeros(self.op.output_shape());
        for (c, af) in self.components.iter().zip(&self.forward).skip(k) {
            out = out.axpy(c.coefficient.signum() * c.singular_value, af);
        }
        out
    }

    /// `sum_{i<k} gamma_i^2 ||A u_i||^2`.
    fn settled_energy(&self, k: usize) -> f64 {
        self.components
            .iter()
            .zip(&self.forward)
            .take(k)
            .map(|(c, af)| c.coefficient * c.coefficient * af.inner(af))
            .sum()
    }

    fn branch_of(&self, tau: f64) -> usize {
        // branch k covers (tau_{k-1}, tau_k]
        for (k, c) in self.components.iter().enumerate() {
            if tau <= c.vanish_time() {
                return k;
            }
        }
        self.components.len()
    }

    /// Closed-form residual and regularizer value of the quadratic-model
    /// path at `tau`.
    pub fn path_values(&self, tau: f64) -> (f64, f64) {
        let k = self.branch_of(tau);
        let r2 = self.settled_energy(k) + tau * tau * self.tail_forward(k).inner(&self.tail_forward(k));
        let j = self
            .components
            .iter()
            .zip(&self.forward)
            .skip(k)
            .map(|(c, af)| {
                c.singular_value * (c.coefficient.abs() - tau * c.singular_value) * af.inner(af)
            })
            .sum::<f64>()
            .max(0.0);
        (r2.max(0.0).sqrt(), j)
    }

    /// Extinction breakpoint of the last component.
    pub fn final_vanish_time(&self) -> f64 {
        self.components
            .last()
            .expect("decomposition is non-empty")
            .vanish_time()
    }
}

/// Checks `lambda A*A u in dJ(u)`: membership of the rescaled normal vector
/// in the dual ball plus the pairing equality.
pub fn verify_singular_vector(
    op: &Operator,
    reg: &Regularizer,
    u: &Signal,
    lambda: f64,
    tol: f64,
) -> Result<VerifyReport> {
    if u.norm() == 0.0 {
        return Err(Error::InvalidInput(
            "candidate singular vector must be nonzero".into(),
        ));
    }
    let p = op.apply_adjoint(&op.apply(u)?)?.scaled(lambda);
    let membership = reg.dual_ball_membership(&p, tol)?;
    let j = reg.evaluate(u)?;
    let align = (p.inner(u) - j).abs() / (1.0 + j);
    let violation = membership.distance.max(align);
    Ok(VerifyReport {
        ok: violation <= tol,
        violation,
    })
}

/// Singular value `1 / sum a_j^2` of a unit peak under the convolution with
/// taps `a`, with the autocorrelation condition that makes the rescaled
/// normal vector admissible for the l1 ball.
pub fn peak_singular_value(taps: &[f64]) -> Result<(f64, bool)> {
    let energy: f64 = taps.iter().map(|a| a * a).sum();
    if energy == 0.0 {
        return Err(Error::InvalidInput("zero kernel".into()));
    }
    let mut valid = true;
    for lag in 1..taps.len() {
        let corr: f64 = taps[lag..]
            .iter()
            .zip(taps)
            .map(|(a, b)| a * b)
            .sum();
        if corr.abs() > energy {
            valid = false;
        }
    }
    Ok((1.0 / energy, valid))
}

/// Tests every tail sum `p_k` for membership in the dual ball.
pub fn verify_sub0(d: &Decomposition, tol: f64) -> Result<Sub0Report> {
    let mut worst: f64 = 0.0;
    for k in 0..d.components.len() {
        let p = d.tail_subgradient(k)?;
        let membership = d.reg.dual_ball_membership(&p, tol)?;
        worst = worst.max(membership.distance);
        if !membership.inside {
            return Ok(Sub0Report {
                ok: false,
                first_failing: Some(k),
                violation: membership.distance,
            });
        }
    }
    Ok(Sub0Report {
        ok: true,
        first_failing: None,
        violation: worst,
    })
}

/// The piecewise-affine quadratic-model path: every component is shrunk by
/// `tau lambda_i` until it vanishes. Requires a verified tail-sum condition.
pub fn combination_path(d: &Decomposition, tau: f64) -> Result<Signal> {
    if !d.sub0.ok {
        return Err(Error::InvalidInput(
            "decomposition failed the tail-sum admissibility check; the closed-form \
             path is not valid"
                .into(),
        ));
    }
    if tau < 0.0 {
        return Err(Error::InvalidInput("tau must be nonnegative".into()));
    }
    let mut v = Signal::zeros(d.op.input_shape());
    for c in &d.components {
        let coeff = c.coefficient.signum()
            * (c.coefficient.abs() - tau * c.singular_value).max(0.0);
        if coeff != 0.0 {
            v = v.axpy(coeff, &c.vector);
        }
    }
    Ok(v)
}

/// Time change carrying the contrast-invariant model at `t` to the quadratic
/// model: piecewise `S(t) = t sqrt(g_k) / sqrt(1 - t^2 h_k^2)` between the
/// breakpoints `t_k = tau_k / R(tau_k)`; beyond the last breakpoint the path
/// is extinct and the final `tau` is returned.
pub fn combination_reparam_s(d: &Decomposition, t: f64) -> Result<f64> {
    if !d.sub0.ok {
        return Err(Error::InvalidInput(
            "decomposition failed the tail-sum admissibility check".into(),
        ));
    }
    if t <= 0.0 {
        return Err(Error::InvalidInput("t must be positive".into()));
    }
    let n = d.components.len();
    for k in 0..n {
        let tau_k = d.components[k].vanish_time();
        let (r_k, _) = d.path_values(tau_k);
        let t_k = tau_k / r_k;
        if t <= t_k || k == n - 1 {
            if t > t_k {
                return Ok(tau_k); // extinct
            }
            if k == 0 {
                return Ok(0.0);
            }
            let g = d.settled_energy(k);
            let h2 = d.tail_forward(k).inner(&d.tail_forward(k));
            let denom = 1.0 - t * t * h2;
            if denom <= 0.0 {
                return Err(Error::InvalidInput(format!(
                    "t = {t} is outside branch {k}: denominator {denom}"
                )));
            }
            return Ok(t * g.sqrt() / denom.sqrt());
        }
    }
    unreachable!("loop returns on the last branch")
}

/// Coefficient `c(t)` with `u_t = c(t) u` for a single singular vector:
/// an indicator of `(0, 1/(lambda ||f||))` for unit fidelity exponent, the
/// clipped power law for `alpha > 1`, and `1/(1 + t lambda^2)` for the
/// quadratic-quadratic model.
pub fn singular_path_coefficient(
    alpha: f64,
    beta: f64,
    lambda: f64,
    fnorm: f64,
    t: f64,
) -> Result<f64> {
    if !(lambda > 0.0) || !(fnorm > 0.0) || t < 0.0 {
        return Err(Error::InvalidInput(
            "need lambda > 0, ||f|| > 0, t >= 0".into(),
        ));
    }
    if beta == 1.0 && alpha == 1.0 {
        return Ok(if t > 0.0 && t < 1.0 / (lambda * fnorm) {
            1.0
        } else if t == 0.0 {
            1.0
        } else {
            0.0
        });
    }
    if beta == 1.0 && alpha > 1.0 {
        let shrink = (t * lambda).powf(1.0 / (alpha - 1.0))
            * fnorm.powf((2.0 - alpha) / (alpha - 1.0));
        return Ok((1.0 - shrink).max(0.0));
    }
    if alpha == 2.0 && beta == 2.0 {
        return Ok(1.0 / (1.0 + t * lambda * lambda));
    }
    Err(Error::NotSupported(format!(
        "no closed-form singular path for alpha = {alpha}, beta = {beta}"
    )))
}

/// Extinction time `1 / (lambda ||f||^(2-alpha))` of a singular vector for
/// one-homogeneous regularization.
pub fn singular_extinction_time(alpha: f64, lambda: f64, fnorm: f64) -> f64 {
    1.0 / (lambda * fnorm.powf(2.0 - alpha))
}
