mod common;

use omp_lab_core::linalg::{gram_eigen_bounds, least_squares_on_support, symmetric_eigen};
use omp_lab_core::rng::Stream;
use omp_lab_core::{DenseMatrix, IndexSet};

use common::{apply, dot, norm, normal_equations};

fn random_matrix(stream: &mut Stream, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_row_major(rows, cols, &stream.normal_vector(rows * cols)).unwrap()
}

fn residual(phi: &DenseMatrix, y: &[f64], z: &[f64]) -> Vec<f64> {
    y.iter().zip(apply(phi, z)).map(|(a, b)| a - b).collect()
}

#[test]
fn residual_is_orthogonal_to_support_columns() {
    let mut stream = Stream::new(1);
    for _ in 0..100 {
        let phi = random_matrix(&mut stream, 12, 20);
        let y = stream.normal_vector(12);
        let support = IndexSet::new(stream.sample_indices(20, 5), 20).unwrap();
        let z = least_squares_on_support(&phi, &y, &support).unwrap();
        let r = residual(&phi, &y, &z);
        for &j in support.iter() {
            let col = phi.column(j);
            assert!(dot(&r, col).abs() <= 1e-9 * norm(&y) * norm(col));
        }
        let reference = normal_equations(&phi, &y, support.as_slice());
        for (a, b) in z.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-8);
        }
    }
}

#[test]
fn support_solution_minimizes_residual() {
    let mut stream = Stream::new(2);
    for _ in 0..100 {
        let phi = random_matrix(&mut stream, 10, 15);
        let y = stream.normal_vector(10);
        let support = IndexSet::new(stream.sample_indices(15, 4), 15).unwrap();
        let z = least_squares_on_support(&phi, &y, &support).unwrap();
        let best = norm(&residual(&phi, &y, &z));
        for _ in 0..100 {
            let mut other = z.clone();
            for &j in support.iter() {
                other[j] += 0.1 * stream.normal();
            }
            assert!(best <= norm(&residual(&phi, &y, &other)) + 1e-9);
        }
    }
}

#[test]
fn rayleigh_quotients_lie_between_extreme_eigenvalues() {
    let mut stream = Stream::new(3);
    for _ in 0..20 {
        let cols = 1 + stream.below(6) as usize;
        let phi_t = random_matrix(&mut stream, 8, cols);
        let (lo, hi) = gram_eigen_bounds(&phi_t);
        for _ in 0..100 {
            let u = stream.sphere_vector(cols, 1.0);
            let energy = dot(&apply(&phi_t, &u), &apply(&phi_t, &u));
            assert!(lo - 1e-9 <= energy && energy <= hi + 1e-9);
        }
    }
}

#[test]
fn extreme_eigenvalues_match_power_iteration() {
    let mut stream = Stream::new(4);
    for _ in 0..10 {
        let phi_t = random_matrix(&mut stream, 8, 3);
        let gram = phi_t.gram();
        let (lo, hi) = gram_eigen_bounds(&phi_t);
        let mul = |v: &[f64], shift: f64| -> Vec<f64> {
            (0..3)
                .map(|i| (0..3).map(|j| gram.get(i, j) * v[j]).sum::<f64>() - shift * v[i])
                .collect()
        };
        let power = |shift: f64| -> f64 {
            let mut v = vec![1.0, 0.5, -0.25];
            for _ in 0..5000 {
                let w = mul(&v, shift);
                let n = norm(&w);
                v = w.iter().map(|x| x / n).collect();
            }
            dot(&v, &mul(&v, 0.0))
        };
        assert!((power(0.0) - hi).abs() < 1e-7);
        // Shifting by λ_max makes λ_min the dominant eigenvalue in magnitude.
        assert!((power(hi) - lo).abs() < 1e-7);
        let eigen = symmetric_eigen(&gram);
        assert!((eigen.values[0] - lo).abs() < 1e-9);
    }
}
