//! Exact 1D total-variation proximal step via the taut string construction
//! (direct single-pass algorithm, no inner iterations).

/// Solves `argmin_v 0.5 ||v - y||^2 + lambda * sum |v_{i+1} - v_i|` exactly.
pub(crate) fn tv1d_prox(y: &[f64], lambda: f64) -> Vec<f64> {
    let n = y.len();
    let mut x = vec![0.0; n];
    if n == 0 {
        return x;
    }
    if n == 1 || lambda <= 0.0 {
        x.copy_from_slice(y);
        return x;
    }

    // Running state: the current segment starts at k0; vmin/vmax are the
    // candidate segment values for the taut string touching the lower/upper
    // tube; umin/umax track the accumulated slack.
    let mut k = 0usize;
    let mut k0 = 0usize;
    let mut kminus = 0usize;
    let mut kplus = 0usize;
    let mut vmin = y[0] - lambda;
    let mut vmax = y[0] + lambda;
    let mut umin = lambda;
    let mut umax = -lambda;

    loop {
        if k == n - 1 {
            // Terminal segment: resolve remaining slack.
            if umin < 0.0 {
                for xi in &mut x[k0..=kminus] {
                    *xi = vmin;
                }
                k = kminus + 1;
                k0 = k;
                kminus = k;
                vmin = y[k];
                umin = lambda;
                umax = y[k] + lambda - vmax;
                continue;
            }
            if umax > 0.0 {
                for xi in &mut x[k0..=kplus] {
                    *xi = vmax;
                }
                k = kplus + 1;
                k0 = k;
                kplus = k;
                vmax = y[k];
                umax = -lambda;
                umin = y[k] - lambda - vmin;
                continue;
            }
            let value = vmin + umin / (k - k0 + 1) as f64;
            for xi in &mut x[k0..n] {
                *xi = value;
            }
            return x;
        }

        if y[k + 1] + umin < vmin - lambda {
            // The string must jump down after kminus.
            for xi in &mut x[k0..=kminus] {
                *xi = vmin;
            }
            k = kminus + 1;
            k0 = k;
            kminus = k;
            kplus = k;
            vmin = y[k];
            vmax = y[k] + 2.0 * lambda;
            umin = lambda;
            umax = -lambda;
        } else if y[k + 1] + umax > vmax + lambda {
            // The string must jump up after kplus.
            for xi in &mut x[k0..=kplus] {
                *xi = vmax;
            }
            k = kplus + 1;
            k0 = k;
            kminus = k;
            kplus = k;
            vmin = y[k] - 2.0 * lambda;
            vmax = y[k];
            umin = lambda;
            umax = -lambda;
        } else {
            // No jump: extend the segment and retighten the bounds.
            k += 1;
            umin += y[k] - vmin;
            umax += y[k] - vmax;
            if umin >= lambda {
                vmin += (umin - lambda) / (k - k0 + 1) as f64;
                umin = lambda;
                kminus = k;
            }
            if umax <= -lambda {
                vmax += (umax + lambda) / (k - k0 + 1) as f64;
                umax = -lambda;
                kplus = k;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_input_is_a_fixed_point() {
        let y = vec![0.7; 6];
        for lambda in [0.0, 0.5, 3.0] {
            let x = tv1d_prox(&y, lambda);
            for v in &x {
                assert!((v - 0.7).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn large_lambda_returns_the_mean() {
        let y = [1.0, 3.0, 2.0, -1.0];
        let mean = y.iter().sum::<f64>() / 4.0;
        let x = tv1d_prox(&y, 100.0);
        for v in &x {
            assert!((v - mean).abs() <= 1e-12);
        }
    }

    #[test]
    fn two_samples_closed_form() {
        // For n = 2 the prox shrinks the difference by 2*lambda.
        let y = [0.0, 4.0];
        let x = tv1d_prox(&y, 1.0);
        assert!((x[0] - 1.0).abs() <= 1e-12);
        assert!((x[1] - 3.0).abs() <= 1e-12);
        // difference collapses once 2*lambda exceeds it
        let x = tv1d_prox(&y, 2.5);
        assert!((x[0] - 2.0).abs() <= 1e-12);
        assert!((x[1] - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn optimality_via_subgradient_certificate() {
        // Dual certificate: q_i = sum_{j<=i} (x_j - y_j) must satisfy
        // |q_i| <= lambda with equality-signed matching at jumps.
        let y = [1.0, -0.5, 2.0, 2.0, -3.0, 0.25, 0.3];
        for lambda in [0.1, 0.45, 1.0, 2.2] {
            let x = tv1d_prox(&y, lambda);
            let mut running = 0.0;
            for i in 0..y.len() - 1 {
                running += x[i] - y[i];
                let q = running;
                assert!(q.abs() <= lambda + 1e-10, "tube violated at {i}: {q}");
                let diff = x[i + 1] - x[i];
                if diff > 1e-12 {
                    assert!((q - lambda).abs() <= 1e-10);
                } else if diff < -1e-12 {
                    assert!((q + lambda).abs() <= 1e-10);
                }
            }
            let total: f64 = x.iter().zip(&y).map(|(a, b)| a - b).sum();
            assert!(total.abs() <= 1e-10, "prox must preserve the mean");
        }
    }
}
