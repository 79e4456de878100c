use spectralpath::*;
use spectralpath::path::*;
use std::time::Instant;

fn main() {
    let n_grid = 80usize;
    let shape = Shape::TwoD { rows: n_grid, cols: n_grid };
    let op = Operator::identity(shape);
    let reg = Regularizer::tv2d(n_grid, n_grid);
    let proj = AProjection::build(&op, reg.nullspace_basis()).unwrap();
    let l = 16usize;
    let area = (l * l) as f64;
    let fraction = area / (n_grid * n_grid) as f64;
    let start = (n_grid - l) / 2;
    let mut values = vec![0.0; n_grid * n_grid];
    for i in start..start + l {
        for j in start..start + l {
            values[i * n_grid + j] = 1.0;
        }
    }
    let f = Signal::new(shape, values).unwrap();
    let corrected = f.axpy(-fraction, &Signal::constant(shape, 1.0));
    let perimeter = 4.0 * l as f64;
    let lambda = perimeter / corrected.inner(&corrected);

    for alpha in [2.0, 1.0] {
        let predicted = eigen::singular_extinction_time(alpha, lambda, corrected.norm());
        let t0 = Instant::now();
        let grid = geometric_grid(0.5 * predicted, 1.7 * predicted, 6);
        let opts = SamplePathOptions { solve: SolveOptions::for_images(), cold_start_checks: 0 };
        let table = sample_path(&op, &reg, &f, alpha, 1.0, &grid, &opts).unwrap();
        println!("alpha={alpha}: path sampled in {:?}", t0.elapsed());
        let t1 = Instant::now();
        let measured = detect_extinction(&op, &reg, &f, &table, &proj, 1e-4, &opts.solve).unwrap().unwrap();
        let reference = area.powf(alpha / 2.0) / perimeter;
        println!("alpha={alpha}: detect in {:?}; measured {measured} reference {reference} ratio {}", t1.elapsed(), measured/reference);
    }
}
