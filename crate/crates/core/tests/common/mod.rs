//! Reference computations written independently of the library's numerics:
//! plain Gaussian elimination, textbook OMP, closed-form small eigenvalues.

#![allow(dead_code, clippy::needless_range_loop)]

use omp_lab_core::DenseMatrix;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `Φz` by a double loop over entries.
pub fn apply(phi: &DenseMatrix, z: &[f64]) -> Vec<f64> {
    (0..phi.rows())
        .map(|i| (0..phi.cols()).map(|j| phi.get(i, j) * z[j]).sum())
        .collect()
}

/// Solves a square system by Gaussian elimination with partial pivoting.
pub fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for c in col..n {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    x
}

/// Least squares on `support` through the normal equations.
pub fn normal_equations(phi: &DenseMatrix, y: &[f64], support: &[usize]) -> Vec<f64> {
    let cols: Vec<Vec<f64>> = support
        .iter()
        .map(|&j| (0..phi.rows()).map(|i| phi.get(i, j)).collect())
        .collect();
    let gram = cols
        .iter()
        .map(|a| cols.iter().map(|b| dot(a, b)).collect())
        .collect();
    let rhs = cols.iter().map(|a| dot(a, y)).collect();
    let coef = solve(gram, rhs);
    let mut z = vec![0.0; phi.cols()];
    for (&j, c) in support.iter().zip(coef) {
        z[j] = c;
    }
    z
}

/// Textbook OMP: correlate, pick the largest unused column, refit.
pub fn reference_omp(phi: &DenseMatrix, y: &[f64], iterations: usize) -> (Vec<f64>, Vec<usize>) {
    let mut chosen = Vec::new();
    let mut z = vec![0.0; phi.cols()];
    let mut r = y.to_vec();
    for _ in 0..iterations {
        let mut best = None;
        let mut best_val = -1.0;
        for j in 0..phi.cols() {
            if chosen.contains(&j) {
                continue;
            }
            let h: f64 = (0..phi.rows())
                .map(|i| phi.get(i, j) * r[i])
                .sum::<f64>()
                .abs();
            if h > best_val {
                best_val = h;
                best = Some(j);
            }
        }
        chosen.push(best.unwrap());
        z = normal_equations(phi, y, &chosen);
        let fit = apply(phi, &z);
        r = y.iter().zip(&fit).map(|(a, b)| a - b).collect();
    }
    (z, chosen)
}

/// Gram entry `⟨φ_i, φ_j⟩`.
pub fn gram_entry(phi: &DenseMatrix, i: usize, j: usize) -> f64 {
    (0..phi.rows()).map(|r| phi.get(r, i) * phi.get(r, j)).sum()
}

/// Eigenvalues of `[[a, b], [b, c]]`, ascending.
pub fn eig2(a: f64, b: f64, c: f64) -> (f64, f64) {
    let mean = 0.5 * (a + c);
    let radius = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (mean - radius, mean + radius)
}

/// Eigenvalues of a symmetric 3×3 matrix as the roots of its characteristic
/// polynomial `λ³ − tr λ² + c1 λ − det`, via the trigonometric cubic formula.
pub fn eig3(m: [[f64; 3]; 3]) -> [f64; 3] {
    let tr = m[0][0] + m[1][1] + m[2][2];
    let c1 = m[0][0] * m[1][1] + m[0][0] * m[2][2] + m[1][1] * m[2][2]
        - m[0][1] * m[1][0]
        - m[0][2] * m[2][0]
        - m[1][2] * m[2][1];
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    // Depressed cubic t³ + pt + q with λ = t + tr/3.
    let shift = tr / 3.0;
    let p = c1 - tr * tr / 3.0;
    let q = -2.0 * tr.powi(3) / 27.0 + tr * c1 / 3.0 - det;
    if p.abs() < 1e-300 {
        let t = (-q).cbrt();
        return [t + shift; 3];
    }
    let amp = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (p * amp)).clamp(-1.0, 1.0);
    let theta = arg.acos() / 3.0;
    let mut roots = [0.0; 3];
    for (k, root) in roots.iter_mut().enumerate() {
        *root = amp * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift;
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// `max |λ − 1|` over the eigenvalues of the Gram submatrix on `support`,
/// for supports of size 1, 2 or 3.
pub fn closed_form_deviation(phi: &DenseMatrix, support: &[usize]) -> f64 {
    let g = |a: usize, b: usize| gram_entry(phi, support[a], support[b]);
    let (lo, hi) = match support.len() {
        1 => (g(0, 0), g(0, 0)),
        2 => eig2(g(0, 0), g(0, 1), g(1, 1)),
        3 => {
            let m = [
                [g(0, 0), g(0, 1), g(0, 2)],
                [g(1, 0), g(1, 1), g(1, 2)],
                [g(2, 0), g(2, 1), g(2, 2)],
            ];
            let e = eig3(m);
            (e[0], e[2])
        }
        n => panic!("closed form only for supports up to 3, got {n}"),
    };
    (hi - 1.0).max(1.0 - lo)
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Brute-force `δ_k` from closed-form eigenvalues (k ≤ 3).
pub fn brute_force_delta(phi: &DenseMatrix, k: usize) -> f64 {
    subsets(phi.cols(), k)
        .iter()
        .map(|s| closed_form_deviation(phi, s))
        .fold(f64::NEG_INFINITY, f64::max)
}
