mod common;

use omp_lab_core::linalg::symmetric_eigen;
use omp_lab_core::rng::Stream;
use omp_lab_core::{
    generate, rip_delta_exact, rip_delta_lower_bound, DenseMatrix, Ensemble, MatrixSpec,
};

use common::{apply, brute_force_delta, dot};

fn tiny(seed: u64) -> DenseMatrix {
    generate(&MatrixSpec::new(Ensemble::Gaussian, 6, 9, seed)).unwrap()
}

#[test]
fn delta_is_monotone_in_order() {
    for seed in 0..10 {
        let phi = tiny(seed);
        let deltas: Vec<f64> = (1..=6)
            .map(|k| rip_delta_exact(&phi, k).unwrap().delta)
            .collect();
        for w in deltas.windows(2) {
            assert!(w[0] <= w[1] + 1e-8, "seed {seed}: {deltas:?}");
        }
    }
}

#[test]
fn sampled_bound_never_exceeds_exact() {
    let mut stream = Stream::new(8);
    for trial in 0..50 {
        let phi = tiny(100 + trial);
        let k = 1 + stream.below(4) as usize;
        let seed = stream.next_u64();
        let exact = rip_delta_exact(&phi, k).unwrap().delta;
        let lower = rip_delta_lower_bound(&phi, k, 10, seed).unwrap().delta;
        assert!(lower <= exact + 1e-12, "trial {trial}");
    }
}

#[test]
fn maximizing_support_is_realized_by_an_eigenvector() {
    for seed in 0..10 {
        let phi = tiny(seed);
        for k in 1..=4 {
            let est = rip_delta_exact(&phi, k).unwrap();
            let sub = phi.select_columns(&est.support);
            let eigen = symmetric_eigen(&sub.gram());
            let best = (0..k)
                .map(|i| {
                    let u = &eigen.vectors[i];
                    let image = apply(&sub, u);
                    (dot(&image, &image) - 1.0).abs()
                })
                .fold(0.0, f64::max);
            assert!(best >= est.delta - 1e-6, "seed {seed}, k {k}");
        }
    }
}

#[test]
fn exact_constant_agrees_with_closed_form_enumeration() {
    for seed in 0..5 {
        let phi = tiny(seed);
        for k in 1..=3 {
            let exact = rip_delta_exact(&phi, k).unwrap().delta;
            assert!((exact - brute_force_delta(&phi, k)).abs() < 1e-9);
        }
    }
}

#[test]
fn generation_is_seed_deterministic() {
    for ensemble in [
        Ensemble::Gaussian,
        Ensemble::Bernoulli,
        Ensemble::Orthogonal,
    ] {
        let spec = MatrixSpec::new(ensemble, 9, 9, 21);
        let a = generate(&spec).unwrap().to_row_major();
        let b = generate(&spec).unwrap().to_row_major();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        let c = generate(&MatrixSpec::new(ensemble, 9, 9, 22))
            .unwrap()
            .to_row_major();
        assert_ne!(bits(&a), bits(&c));
    }
}
