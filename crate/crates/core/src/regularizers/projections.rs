//! Exact projections used by the dual representations: box, l1-ball
//! (sort-based), and ellipsoid (scalar safeguarded Newton).

/// Componentwise clamp to `[-radius, radius]`.
pub(crate) fn clamp_box(values: &mut [f64], radius: f64) {
    for v in values.iter_mut() {
        *v = v.clamp(-radius, radius);
    }
}

/// Euclidean projection onto the l1 ball of the given radius via the
/// sort-and-threshold rule.
pub(crate) fn project_l1_ball(values: &[f64], radius: f64) -> Vec<f64> {
    if radius <= 0.0 {
        return vec![0.0; values.len()];
    }
    let l1: f64 = values.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        return values.to_vec();
    }
    let mut mags: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.partial_cmp(a).expect("finite values"));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &m) in mags.iter().enumerate() {
        cumsum += m;
        let candidate = (cumsum - radius) / (k + 1) as f64;
        if candidate >= m {
            break;
        }
        theta = candidate;
    }
    values
        .iter()
        .map(|&v| v.signum() * (v.abs() - theta).max(0.0))
        .collect()
}

/// Projection onto the ellipsoid `{q : sum q_i^2 / m_i <= 1}` given in the
/// coordinates where the form is diagonal with weights `m_i > 0`.
///
/// The multiplier of the active constraint solves the monotone scalar
/// equation `g(mu) = sum z_i^2 m_i / (m_i + mu)^2 = 1`, handled by Newton
/// steps safeguarded with bisection.
pub(crate) fn project_ellipsoid_diag(z: &[f64], m: &[f64]) -> Vec<f64> {
    debug_assert_eq!(z.len(), m.len());
    let quad: f64 = z.iter().zip(m).map(|(zi, mi)| zi * zi / mi).sum();
    if quad <= 1.0 {
        return z.to_vec();
    }
    let g = |mu: f64| -> f64 {
        z.iter()
            .zip(m)
            .map(|(zi, mi)| zi * zi * mi / ((mi + mu) * (mi + mu)))
            .sum::<f64>()
    };
    let g_prime = |mu: f64| -> f64 {
        -2.0 * z
            .iter()
            .zip(m)
            .map(|(zi, mi)| zi * zi * mi / ((mi + mu) * (mi + mu) * (mi + mu)))
            .sum::<f64>()
    };
    // g is decreasing with g(0) > 1; g(mu) <= (sum z_i^2 m_i)/mu^2 gives an
    // upper bracket.
    let mut lo = 0.0;
    let mut hi = z
        .iter()
        .zip(m)
        .map(|(zi, mi)| zi * zi * mi)
        .sum::<f64>()
        .sqrt();
    while g(hi) > 1.0 {
        hi *= 2.0;
    }
    let mut mu = 0.5 * hi;
    for _ in 0..200 {
        let val = g(mu) - 1.0;
        if val.abs() <= 1e-12 {
            break;
        }
        if val > 0.0 {
            lo = mu;
        } else {
            hi = mu;
        }
        let newton = mu - val / g_prime(mu);
        mu = if newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 1e-15 * (1.0 + hi) {
            break;
        }
    }
    z.iter().zip(m).map(|(zi, mi)| zi * mi / (mi + mu)).collect()
}

/// Jacobi eigendecomposition of a small symmetric matrix (row-major).
/// Returns (eigenvalues, eigenvectors as columns, row-major).
pub(crate) fn jacobi_eigh(n: usize, a: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += m[i * n + j] * m[i * n + j];
            }
        }
        if off <= 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let evals = (0..n).map(|i| m[i * n + i]).collect();
    (evals, v)
}
