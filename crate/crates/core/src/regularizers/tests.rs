use super::*;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

fn sig(values: &[f64]) -> Signal {
    Signal::from_vec(values.to_vec()).unwrap()
}

fn rand_signal(rng: &mut ChaCha8Rng, shape: Shape, scale: f64) -> Signal {
    let values = (0..shape.len())
        .map(|_| rng.random_range(-scale..scale))
        .collect();
    Signal::new(shape, values).unwrap()
}

fn all_kinds_1d(n: usize) -> Vec<Regularizer> {
    let shape = Shape::OneD(n);
    let diag: Vec<f64> = (0..n).map(|i| 1.0 + (i % 3) as f64).collect();
    vec![
        Regularizer::l1(shape),
        Regularizer::linf(shape),
        Regularizer::tv1d(n),
        Regularizer::quadratic_form(shape, QuadMatrix::Diagonal(diag)).unwrap(),
    ]
}

#[test]
fn evaluate_examples() {
    assert_eq!(
        Regularizer::l1(Shape::OneD(2))
            .evaluate(&sig(&[1.0, -2.0]))
            .unwrap(),
        3.0
    );
    assert_eq!(
        Regularizer::tv1d(4)
            .evaluate(&sig(&[0.0, 1.0, 1.0, 0.0]))
            .unwrap(),
        2.0
    );
    let quad = Regularizer::quadratic_form(
        Shape::OneD(2),
        QuadMatrix::Diagonal(vec![1.0, 4.0]),
    )
    .unwrap();
    assert!((quad.evaluate(&sig(&[1.0, 1.0])).unwrap() - 5f64.sqrt()).abs() <= 1e-15);
}

#[test]
fn tv2d_evaluate_sums_both_directions() {
    let reg = Regularizer::tv2d(2, 2);
    let u = Signal::new(Shape::TwoD { rows: 2, cols: 2 }, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
    // horizontal |1-0| + |0-0|, vertical |0-0| + |0-1|
    assert_eq!(reg.evaluate(&u).unwrap(), 2.0);
}

#[test]
fn project_dual_ball_examples() {
    let l1 = Regularizer::l1(Shape::OneD(2));
    let p = l1.project_dual_ball(&sig(&[2.0, -0.5])).unwrap();
    assert_eq!(p.values(), &[1.0, -0.5]);

    let linf = Regularizer::linf(Shape::OneD(2));
    let p = linf.project_dual_ball(&sig(&[2.0, 0.0])).unwrap();
    assert!((p.values()[0] - 1.0).abs() <= 1e-12 && p.values()[1].abs() <= 1e-12);

    let quad = Regularizer::quadratic_form(
        Shape::OneD(2),
        QuadMatrix::Diagonal(vec![1.0, 4.0]),
    )
    .unwrap();
    let p = quad.project_dual_ball(&sig(&[0.0, 4.0])).unwrap();
    assert!(p.values()[0].abs() <= 1e-10 && (p.values()[1] - 2.0).abs() <= 1e-10);
    // boundary point of the ellipse
    let form = quad.quad_form().unwrap();
    assert!((form.inv_quad_form(p.values()) - 1.0).abs() <= 1e-9);
}

#[test]
fn projection_is_idempotent_and_nonexpansive() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for reg in all_kinds_1d(5) {
        let dual = reg.dual_shape();
        for _ in 0..30 {
            let q = rand_signal(&mut rng, dual, 3.0);
            let r = rand_signal(&mut rng, dual, 3.0);
            let pq = reg.project_dual_ball(&q).unwrap();
            let pr = reg.project_dual_ball(&r).unwrap();
            let ppq = reg.project_dual_ball(&pq).unwrap();
            assert!(pq.distance(&ppq) <= 1e-10, "{} not idempotent", reg.kind_name());
            assert!(pq.distance(&pr) <= q.distance(&r) + 1e-10);
        }
    }
}

#[test]
fn prox_examples() {
    let l1 = Regularizer::l1(Shape::OneD(2));
    let v = l1.prox(&sig(&[2.0, -0.5]), 1.0).unwrap();
    assert_eq!(v.values(), &[1.0, 0.0]);

    let tv = Regularizer::tv1d(5);
    let c = sig(&[0.3; 5]);
    for s in [0.0, 0.7, 10.0] {
        assert!(tv.prox(&c, s).unwrap().distance(&c) <= 1e-14);
    }

    let linf = Regularizer::linf(Shape::OneD(2));
    let v = linf.prox(&sig(&[1.0, 3.0]), 1.0).unwrap();
    assert!((v.values()[0] - 1.0).abs() <= 1e-12);
    assert!((v.values()[1] - 2.0).abs() <= 1e-12);
}

/// Shrinkage of the sup-norm prox along the diagonal eigenvector pair,
/// written out directly from the two-dimensional closed form.
fn linf_prox_2d_oracle(f: [f64; 2], tau: f64) -> [f64; 2] {
    let comps = [(f[0] + f[1], [0.5, 0.5]), (f[1] - f[0], [-0.5, 0.5])];
    let mut v = [0.0, 0.0];
    for (g, u) in comps {
        let coeff = g.signum() * (g.abs() - tau).max(0.0);
        v[0] += coeff * u[0];
        v[1] += coeff * u[1];
    }
    v
}

#[test]
fn linf_prox_matches_eigen_shrinkage_oracle() {
    let linf = Regularizer::linf(Shape::OneD(2));
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..200 {
        let f = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let tau = rng.random_range(0.0..4.0);
        let expect = linf_prox_2d_oracle(f, tau);
        let got = linf.prox(&sig(&f), tau).unwrap();
        assert!(
            (got.values()[0] - expect[0]).abs() <= 1e-10
                && (got.values()[1] - expect[1]).abs() <= 1e-10,
            "prox mismatch for f={f:?}, tau={tau}: {:?} vs {expect:?}",
            got.values()
        );
    }
}

#[test]
fn membership_examples() {
    let l1 = Regularizer::l1(Shape::OneD(2));
    let m = l1.dual_ball_membership(&sig(&[1.0, 0.5]), 1e-9).unwrap();
    assert!(m.inside && m.distance == 0.0);
    let m = l1.dual_ball_membership(&sig(&[2.0, 0.0]), 1e-9).unwrap();
    assert!(!m.inside && (m.distance - 1.0).abs() <= 1e-12);

    let quad = Regularizer::quadratic_form(
        Shape::OneD(2),
        QuadMatrix::Diagonal(vec![1.0, 4.0]),
    )
    .unwrap();
    let m = quad.dual_ball_membership(&sig(&[0.0, 2.0]), 1e-9).unwrap();
    assert!(m.inside, "boundary point must be inside");

    let tv = Regularizer::tv1d(2);
    let m = tv.dual_ball_membership(&sig(&[1.0, -1.0]), 1e-6).unwrap();
    assert!(m.inside, "p = div q with q interior, distance {}", m.distance);
    // and a point clearly outside: constants with nonzero sum cannot be
    // divergences
    let m = tv.dual_ball_membership(&sig(&[1.0, 1.0]), 1e-6).unwrap();
    assert!(!m.inside && m.distance > 0.9);
}

#[test]
fn nullspace_examples() {
    assert!(Regularizer::l1(Shape::OneD(3)).nullspace_basis().is_empty());
    let basis = Regularizer::tv1d(4).nullspace_basis();
    assert_eq!(basis.len(), 1);
    assert_eq!(basis[0].values(), &[0.5, 0.5, 0.5, 0.5]);
    let basis = Regularizer::tv2d(2, 2).nullspace_basis();
    assert_eq!(basis.len(), 1);
    assert_eq!(basis[0].values(), &[0.5, 0.5, 0.5, 0.5]);
    assert!((basis[0].norm() - 1.0).abs() <= 1e-15);
}

#[test]
fn prox_satisfies_the_subgradient_characterization() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut regs = all_kinds_1d(6);
    regs.push(Regularizer::tv2d(3, 3));
    for reg in regs {
        for _ in 0..20 {
            let x = rand_signal(&mut rng, reg.shape(), 2.0);
            let s = rng.random_range(0.5..2.0);
            let v = reg.prox(&x, s).unwrap();
            let p = x.sub(&v).scaled(1.0 / s);
            let m = reg.dual_ball_membership(&p, 1e-6).unwrap();
            assert!(
                m.inside,
                "{}: prox subgradient outside K by {}",
                reg.kind_name(),
                m.distance
            );
            let jv = reg.evaluate(&v).unwrap();
            let align = (p.inner(&v) - jv).abs();
            assert!(
                align <= 1e-6 * (1.0 + jv),
                "{}: alignment violated by {align}",
                reg.kind_name()
            );
        }
    }
}

#[test]
fn prox_is_nonexpansive() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let mut regs = all_kinds_1d(7);
    regs.push(Regularizer::tv2d(3, 2));
    for reg in regs {
        for _ in 0..20 {
            let x = rand_signal(&mut rng, reg.shape(), 2.0);
            let y = rand_signal(&mut rng, reg.shape(), 2.0);
            let s = rng.random_range(0.0..3.0);
            let px = reg.prox(&x, s).unwrap();
            let py = reg.prox(&y, s).unwrap();
            assert!(px.distance(&py) <= x.distance(&y) + 1e-10);
        }
    }
}

#[test]
fn moreau_identity_consistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let shape = Shape::OneD(6);
    let regs = vec![
        Regularizer::l1(shape),
        Regularizer::linf(shape),
        Regularizer::quadratic_form(shape, QuadMatrix::Diagonal(vec![1.0, 4.0, 2.0, 1.0, 3.0, 0.5]))
            .unwrap(),
    ];
    for reg in regs {
        for _ in 0..20 {
            let x = rand_signal(&mut rng, shape, 2.0);
            let s = rng.random_range(0.1..3.0);
            let via_prox = reg.prox(&x, s).unwrap();
            let proj = reg
                .project_dual_ball(&x.scaled(1.0 / s))
                .unwrap()
                .scaled(s);
            let via_moreau = x.sub(&proj);
            assert!(
                via_prox.distance(&via_moreau) <= 1e-8,
                "{}: Moreau mismatch {}",
                reg.kind_name(),
                via_prox.distance(&via_moreau)
            );
        }
    }
}

#[test]
fn tv2d_prox_agrees_with_signal_space_projection() {
    let reg = Regularizer::tv2d(4, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(53);
    for _ in 0..10 {
        let x = rand_signal(&mut rng, reg.shape(), 1.5);
        let s = rng.random_range(0.2..1.5);
        let via_prox = reg.prox(&x, s).unwrap();
        let scaled: Vec<f64> = x.values().iter().map(|v| v / s).collect();
        let proj = reg.project_dual_ball_signal_space(&scaled);
        let via_moreau: Vec<f64> = x
            .values()
            .iter()
            .zip(&proj)
            .map(|(a, b)| a - s * b)
            .collect();
        let d: f64 = via_prox
            .values()
            .iter()
            .zip(&via_moreau)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(d <= 1e-8, "tv2d Moreau mismatch {d}");
    }
}

#[test]
fn tv1d_taut_string_agrees_with_dual_projection() {
    let reg = Regularizer::tv1d(20);
    let mut rng = ChaCha8Rng::seed_from_u64(59);
    for _ in 0..20 {
        let x = rand_signal(&mut rng, reg.shape(), 2.0);
        let s = rng.random_range(0.05..3.0);
        let exact = reg.prox(&x, s).unwrap();
        let (iterative, _, _) = reg.tv_prox_dual(x.values(), s);
        let d: f64 = exact
            .values()
            .iter()
            .zip(&iterative)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(d <= 1e-6, "taut string vs dual projection: {d}");
    }
}

#[test]
fn absolute_homogeneity() {
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut regs = all_kinds_1d(5);
    regs.push(Regularizer::tv2d(2, 3));
    for reg in regs {
        let u = rand_signal(&mut rng, reg.shape(), 2.0);
        let ju = reg.evaluate(&u).unwrap();
        for c in [-2.0, -1.0, 0.0, 0.5, 3.0] {
            let jcu = reg.evaluate(&u.scaled(c)).unwrap();
            assert!(
                (jcu - c.abs() * ju).abs() <= 1e-14 * (1.0 + ju),
                "{}: homogeneity broken at c={c}",
                reg.kind_name()
            );
        }
    }
}

#[test]
fn null_space_translation_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(67);
    for reg in [Regularizer::tv1d(6), Regularizer::tv2d(3, 3)] {
        let u = rand_signal(&mut rng, reg.shape(), 2.0);
        let ju = reg.evaluate(&u).unwrap();
        for c in [-3.0, 0.25, 10.0] {
            let shifted = u.axpy(c, &Signal::constant(reg.shape(), 1.0));
            let js = reg.evaluate(&shifted).unwrap();
            assert!((js - ju).abs() <= 1e-12 * (1.0 + ju));
        }
    }
}

#[test]
fn evaluate_vanishes_exactly_on_the_null_space() {
    for reg in [Regularizer::tv1d(5), Regularizer::tv2d(2, 4)] {
        for b in reg.nullspace_basis() {
            assert_eq!(reg.evaluate(&b).unwrap(), 0.0);
        }
    }
}

#[test]
fn dense_quadratic_form_matches_diagonal_in_rotated_coordinates() {
    // M = R' diag(1,4) R for a rotation R must give the same norm values as
    // the diagonal form on rotated inputs.
    let (c, s) = (0.6f64, 0.8f64);
    let d = [1.0, 4.0];
    // M = R' D R with R = [[c, s], [-s, c]]
    let entries = vec![
        c * c * d[0] + s * s * d[1],
        c * s * d[0] - s * c * d[1],
        c * s * d[0] - s * c * d[1],
        s * s * d[0] + c * c * d[1],
    ];
    let dense = Regularizer::quadratic_form(
        Shape::OneD(2),
        QuadMatrix::Dense { n: 2, entries },
    )
    .unwrap();
    let diag = Regularizer::quadratic_form(
        Shape::OneD(2),
        QuadMatrix::Diagonal(vec![1.0, 4.0]),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    for _ in 0..30 {
        let u = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let rot = [c * u[0] + s * u[1], -s * u[0] + c * u[1]];
        let jd = dense.evaluate(&sig(&u)).unwrap();
        let jr = diag.evaluate(&sig(&rot)).unwrap();
        assert!((jd - jr).abs() <= 1e-12 * (1.0 + jr));
    }
    // non-symmetric and non-PD matrices are rejected
    assert!(Regularizer::quadratic_form(
        Shape::OneD(2),
        QuadMatrix::Dense {
            n: 2,
            entries: vec![1.0, 0.5, 0.0, 1.0]
        }
    )
    .is_err());
    assert!(Regularizer::quadratic_form(
        Shape::OneD(2),
        QuadMatrix::Diagonal(vec![1.0, -1.0])
    )
    .is_err());
}

#[test]
fn shape_mismatch_is_rejected() {
    let reg = Regularizer::tv2d(2, 3);
    let wrong = sig(&[1.0; 6]);
    assert!(reg.evaluate(&wrong).is_err());
    assert!(reg.prox(&wrong, 1.0).is_err());
}
