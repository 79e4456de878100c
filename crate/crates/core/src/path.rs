//! Sampling of solution paths over time grids with warm starts, detection of
//! the exact-penalization and extinction times, closed-form extinction
//! bounds, and the reparametrizations linking the models across exponents.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::aproj::AProjection;
use crate::error::{Error, Result};
use crate::linops::Operator;
use crate::regularizers::Regularizer;
use crate::signal::Signal;
use crate::solver::{solve, SolveOptions, SolveResult};

/// Bisection iterations used when refining critical times.
const REFINE_ITERS: usize = 40;

/// One sampled point of a solution path.
#[derive(Debug, Clone)]
pub struct PathEntry {
    pub t: f64,
    pub u: Signal,
    pub residual: f64,
    pub j_value: f64,
    pub violation: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Result of re-solving a grid point from a cold start to confirm that warm
/// starts did not bias the path.
#[derive(Debug, Clone, Copy)]
pub struct ColdStartCheck {
    pub index: usize,
    /// `||A u_warm - A u_cold||`, which must vanish where minimizers are
    /// unique.
    pub forward_deviation: f64,
}

/// A sampled solution path for one `(alpha, beta)` model.
#[derive(Debug, Clone)]
pub struct PathTable {
    pub alpha: f64,
    pub beta: f64,
    pub entries: Vec<PathEntry>,
    pub cold_start_checks: Vec<ColdStartCheck>,
}

impl PathTable {
    pub fn times(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.t).collect()
    }

    /// Largest violation of residual monotonicity / regularizer antitonicity
    /// along the path.
    pub fn monotonicity_defect(&self) -> f64 {
        let mut defect = 0.0f64;
        for w in self.entries.windows(2) {
            defect = defect.max(w[0].residual - w[1].residual);
            defect = defect.max(w[1].j_value - w[0].j_value);
        }
        defect
    }

    /// CSV with header `t,R,J,violation`, one row per grid point.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,R,J,violation\n");
        for e in &self.entries {
            out.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                e.t, e.residual, e.j_value, e.violation
            ));
        }
        out
    }

    /// CSV matrix of the solutions, one row per grid point.
    pub fn solutions_csv(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let row: Vec<String> = e.u.values().iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

/// Critical times of a path: the exact-penalization boundary and the
/// extinction time, when detected.
#[derive(Debug, Clone, Copy)]
pub struct CriticalTimes {
    pub t_star: Option<f64>,
    pub t_starstar: Option<f64>,
    pub tolerance: f64,
}

/// Options for [`sample_path`].
#[derive(Debug, Clone)]
pub struct SamplePathOptions {
    pub solve: SolveOptions,
    /// Number of randomly chosen grid points re-solved from a cold start;
    /// zero disables the verification. Skipped for `alpha = beta = 1`, where
    /// minimizers need not be unique.
    pub cold_start_checks: usize,
}

impl Default for SamplePathOptions {
    fn default() -> Self {
        SamplePathOptions {
            solve: SolveOptions::default(),
            cold_start_checks: 5,
        }
    }
}

/// Geometric grid with the given number of points from `lo` to `hi`.
pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && points >= 2, "degenerate grid request");
    let ratio = (hi / lo).powf(1.0 / (points - 1) as f64);
    let mut t = lo;
    let mut grid = Vec::with_capacity(points);
    for _ in 0..points {
        grid.push(t);
        t *= ratio;
    }
    grid[points - 1] = hi;
    grid
}

/// Uniform grid with the given number of points from `lo` to `hi`.
pub fn uniform_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    assert!(hi > lo && points >= 2, "degenerate grid request");
    let dt = (hi - lo) / (points - 1) as f64;
    (0..points).map(|i| lo + i as f64 * dt).collect()
}

/// Default path grid: 100 geometrically spaced points ending at 1.5x the
/// extinction bound when one is available, otherwise at the user cap.
pub fn default_grid(
    op: &Operator,
    reg: &Regularizer,
    f: &Signal,
    alpha: f64,
    proj: &AProjection,
    cap: Option<f64>,
) -> Result<Vec<f64>> {
    let hi = match extinction_bound(op, reg, f, alpha, proj) {
        Ok(bound) if bound > 0.0 => 1.5 * bound,
        Ok(_) | Err(Error::NotSupported(_)) => cap.ok_or_else(|| {
            Error::InvalidInput(
                "no extinction bound available for this problem; a grid cap is required".into(),
            )
        })?,
        Err(e) => return Err(e),
    };
    Ok(geometric_grid(1e-3 * hi, hi, 100))
}

/// Solves along the grid in increasing order, warm-starting each solve from
/// the previous solution. Non-convergent entries are flagged and the path
/// continues.
pub fn sample_path(
    op: &Operator,
    reg: &Regularizer,
    f: &Signal,
    alpha: f64,
    beta: f64,
    grid: &[f64],
    opts: &SamplePathOptions,
) -> Result<PathTable> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty time grid".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) || grid[0] <= 0.0 {
        return Err(Error::InvalidInput(
            "time grid must be strictly increasing and positive".into(),
        ));
    }
    let mut solve_opts = opts.solve.clone();
    if solve_opts.op_norm_hint.is_none() {
        solve_opts.op_norm_hint = Some(op.operator_norm(1e-8)?);
    }

    let mut entries = Vec::with_capacity(grid.len());
    for &t in grid {
        let res = solve(op, reg, f, alpha, beta, t, &solve_opts)?;
        solve_opts.warm_start = Some(res.warm.clone());
        entries.push(entry_from(t, res));
    }

    let mut cold_start_checks = Vec::new();
    let unique_regime = alpha > 1.0 || beta > 1.0;
    if opts.cold_start_checks > 0 && unique_regime {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0b5e ^ grid.len() as u64);
        let mut indices: Vec<usize> = (0..grid.len()).collect();
        indices.shuffle(&mut rng);
        indices.truncate(opts.cold_start_checks.min(grid.len()));
        indices.sort_unstable();
        let mut cold_opts = solve_opts.clone();
        for index in indices {
            cold_opts.warm_start = None;
            let res = solve(op, reg, f, alpha, beta, grid[index], &cold_opts)?;
            let warm_forward = op.apply(&entries[index].u)?;
            let cold_forward = op.apply(&res.u)?;
            cold_start_checks.push(ColdStartCheck {
                index,
                forward_deviation: warm_forward.distance(&cold_forward),
            });
        }
    }

    Ok(PathTable {
        alpha,
        beta,
        entries,
        cold_start_checks,
    })
}

fn entry_from(t: f64, res: SolveResult) -> PathEntry {
    PathEntry {
        t,
        u: res.u,
        residual: res.residual,
        j_value: res.j_value,
        violation: res.violation,
        converged: res.converged,
        iterations: res.iterations,
    }
}

/// Smallest time at which the forward solution reaches the projection of the
/// data onto the null space, bisection-refined between grid points. `None`
/// if the path never gets there on the sampled grid.
#[allow(clippy::too_many_arguments)]
pub fn detect_extinction(
    op: &Operator,
    reg: &Regularizer,
    f: &Signal,
    table: &PathTable,
    proj: &AProjection,
    tol: f64,
    solve_opts: &SolveOptions,
) -> Result<Option<f64>> {
    if table.entries.is_empty() {
        return Err(Error::InvalidInput("empty path table".into()));
    }
    let target = proj.project_forward(f)?;
    let thresh = tol * (1.0 + f.norm());
    let extinct = |entry: &PathEntry| -> Result<bool> {
        Ok(op.apply(&entry.u)?.distance(&target) <= thresh)
    };
    let mut first = None;
    for (i, e) in table.entries.iter().enumerate() {
        if extinct(e)? {
            first = Some(i);
            break;
        }
    }
    let Some(i) = first else {
        return Ok(None);
    };
    if i == 0 {
        // already extinct at the first sample
        return Ok(Some(table.entries[0].t));
    }
    let mut lo = table.entries[i - 1].t;
    let mut hi = table.entries[i].t;
    let mut opts = solve_opts.clone();
    opts.warm_start = Some(warm_from(&table.entries[i - 1], op, reg));
    for _ in 0..REFINE_ITERS {
        let mid = 0.5 * (lo + hi);
        let res = solve(op, reg, f, table.alpha, table.beta, mid, &opts)?;
        let reached = op.apply(&res.u)?.distance(&target) <= thresh;
        opts.warm_start = Some(res.warm);
        if reached {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Largest time with vanishing residual for a unit fidelity exponent,
/// bisection-refined. `None` when the first sample already has a residual
/// above tolerance, or when `alpha > 1` (where the time is zero by
/// definition).
#[allow(clippy::too_many_arguments)]
pub fn detect_exact_penalization(
    op: &Operator,
    reg: &Regularizer,
    f: &Signal,
    table: &PathTable,
    tol: f64,
    solve_opts: &SolveOptions,
) -> Result<Option<f64>> {
    if table.entries.is_empty() {
        return Err(Error::InvalidInput("empty path table".into()));
    }
    if table.alpha > 1.0 {
        return Ok(None);
    }
    let thresh = tol * (1.0 + f.norm());
    if table.entries[0].residual > thresh {
        return Ok(None);
    }
    let mut last = 0;
    for (i, e) in table.entries.iter().enumerate() {
        if e.residual <= thresh {
            last = i;
        } else {
            break;
        }
    }
    if last + 1 == table.entries.len() {
        return Ok(Some(table.entries[last].t));
    }
    let mut lo = table.entries[last].t;
    let mut hi = table.entries[last + 1].t;
    let mut opts = solve_opts.clone();
    opts.warm_start = Some(warm_from(&table.entries[last], op, reg));
    for _ in 0..REFINE_ITERS {
        let mid = 0.5 * (lo + hi);
        let res = solve(op, reg, f, table.alpha, table.beta, mid, &opts)?;
        let feasible = res.residual <= thresh;
        opts.warm_start = Some(res.warm);
        if feasible {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

fn warm_from(entry: &PathEntry, op: &Operator, reg: &Regularizer) -> crate::solver::WarmStart {
    crate::solver::WarmStart {
        u: entry.u.clone(),
        fidelity_dual: vec![0.0; op.output_shape().len()],
        reg_dual: vec![0.0; reg.dual_dim()],
    }
}

/// Closed-form extinction bound `S(f) / ||f - A P(f)||^(2-alpha)` for the
/// supported identity-operator cases.
pub fn extinction_bound(
    op: &Operator,
    reg: &Regularizer,
    f: &Signal,
    alpha: f64,
    proj: &AProjection,
) -> Result<f64> {
    if !op.is_identity() {
        return Err(Error::NotSupported(
            "extinction bound is only available for the identity operator".into(),
        ));
    }
    let tail = proj.project_forward(f)?;
    let denom_base = f.distance(&tail);
    if denom_base == 0.0 {
        return Ok(0.0);
    }
    let s_value = match reg.kind_name() {
        "l1" => f.norm_inf(),
        "tv1d" => {
            let mean = f.values().iter().sum::<f64>() / f.len() as f64;
            let mut running = 0.0;
            let mut sup: f64 = 0.0;
            for &v in &f.values()[..f.len() - 1] {
                running += v - mean;
                sup = sup.max(running.abs());
            }
            sup
        }
        "quadratic-form" => {
            let form = reg.quad_form().expect("kind checked");
            form.inv_quad_form(f.values()).max(0.0).sqrt()
        }
        other => {
            return Err(Error::NotSupported(format!(
                "extinction bound has no closed form for the {other} regularizer"
            )))
        }
    };
    Ok(s_value / denom_base.powf(2.0 - alpha))
}

/// `T = tau R^(alpha-2) J^(1-beta)`, the time carrying a quadratic-model
/// minimizer at `tau` to the `(alpha, beta)` model.
pub fn reparam_t(r: f64, j_value: f64, tau: f64, alpha: f64, beta: f64) -> Result<f64> {
    let value = tau * r.powf(alpha - 2.0) * j_value.powf(1.0 - beta);
    if !value.is_finite() {
        return Err(Error::InvalidInput(format!(
            "reparametrization degenerates: tau={tau}, R={r}, J={j_value}, alpha={alpha}, beta={beta}"
        )));
    }
    Ok(value)
}

/// Inverse reparametrization `S = t R^(2-alpha) J^(beta-1)`.
pub fn reparam_s(r: f64, j_value: f64, t: f64, alpha: f64, beta: f64) -> Result<f64> {
    let value = t * r.powf(2.0 - alpha) * j_value.powf(beta - 1.0);
    if !value.is_finite() {
        return Err(Error::InvalidInput(format!(
            "reparametrization degenerates: t={t}, R={r}, J={j_value}, alpha={alpha}, beta={beta}"
        )));
    }
    Ok(value)
}
