//! Small dense linear algebra kernels.
//!
//! Only what the decoder and the RIP estimators need: products with a matrix
//! and its transpose, least squares restricted to a column subset (pivoted
//! Householder QR with a complete orthogonal fallback for rank-deficient
//! subsets), and the spectrum of small symmetric matrices (cyclic Jacobi).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative pivot threshold below which a column subset is treated as rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// A dense real matrix with `rows x cols` finite entries.
///
/// Storage is column-major since every algorithm here walks columns.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from entries listed row by row.
    pub fn from_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::check_shape(rows, cols, entries)?;
        let mut data = vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                data[j * rows + i] = entries[i * cols + j];
            }
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from entries listed column by column.
    pub fn from_col_major(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        Self::check_shape(rows, cols, &entries)?;
        Ok(Self {
            rows,
            cols,
            data: entries,
        })
    }

    /// Builds a matrix whose `j`-th column is `columns[j]`.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let cols = columns.len();
        let rows = columns.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows * cols);
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::contract(format!(
                    "column {j} has length {} but column 0 has length {rows}",
                    c.len()
                )));
            }
            data.extend_from_slice(c);
        }
        Self::from_col_major(rows, cols, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            data,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    fn check_shape(rows: usize, cols: usize, entries: &[f64]) -> Result<()> {
        if rows == 0 || cols == 0 {
            return Err(Error::contract(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(Error::Dimension {
                expected: rows * cols,
                actual: entries.len(),
                context: "matrix entry count",
            });
        }
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::contract(format!(
                "matrix entry {pos} is not finite ({})",
                entries[pos]
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.rows + row]
    }

    #[inline]
    pub fn column(&self, col: usize) -> &[f64] {
        &self.data[col * self.rows..(col + 1) * self.rows]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.rows)
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.data.len());
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut data = vec![0.0; self.data.len()];
        for j in 0..self.cols {
            for i in 0..self.rows {
                data[i * self.cols + j] = self.get(i, j);
            }
        }
        DenseMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// `A v`.
    pub fn matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension {
                expected: self.cols,
                actual: v.len(),
                context: "matvec operand length must equal column count",
            });
        }
        let mut out = vec![0.0; self.rows];
        for (col, &vj) in self.columns().zip(v) {
            if vj != 0.0 {
                axpy(vj, col, &mut out);
            }
        }
        Ok(out)
    }

    /// `Aᵀ r`.
    pub fn transpose_matvec(&self, r: &[f64]) -> Result<Vec<f64>> {
        if r.len() != self.rows {
            return Err(Error::Dimension {
                expected: self.rows,
                actual: r.len(),
                context: "transpose_matvec operand length must equal row count",
            });
        }
        Ok(self.columns().map(|col| dot(col, r)).collect())
    }

    /// The submatrix made of the columns in `support`, in index order.
    pub fn select_columns(&self, support: &IndexSet) -> DenseMatrix {
        let mut data = Vec::with_capacity(self.rows * support.len());
        for &j in support.iter() {
            data.extend_from_slice(self.column(j));
        }
        DenseMatrix {
            rows: self.rows,
            cols: support.len(),
            data,
        }
    }

    /// `AᵀA`.
    pub fn gram(&self) -> SymmetricMatrix {
        let n = self.cols;
        let mut g = SymmetricMatrix::zeros(n);
        for i in 0..n {
            let ci = self.column(i);
            for j in i..n {
                let v = dot(ci, self.column(j));
                g.set(i, j, v);
            }
        }
        g
    }
}

/// A strictly increasing list of column indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    pub fn empty() -> Self {
        IndexSet(Vec::new())
    }

    /// Sorts `indices` and checks they are distinct and below `dim`.
    pub fn new(mut indices: Vec<usize>, dim: usize) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::contract(format!("duplicate index {}", w[0])));
        }
        if let Some(&last) = indices.last() {
            if last >= dim {
                return Err(Error::contract(format!(
                    "index {last} out of range for dimension {dim}"
                )));
            }
        }
        Ok(IndexSet(indices))
    }

    /// `{0, 1, ..., n-1}`.
    pub fn range(n: usize) -> Self {
        IndexSet((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    /// Inserts `index`, returning false if it was already present.
    pub fn insert(&mut self, index: usize) -> bool {
        match self.0.binary_search(&index) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, index);
                true
            }
        }
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.0.iter()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }
}

impl<'a> IntoIterator for &'a IndexSet {
    type Item = &'a usize;
    type IntoIter = std::slice::Iter<'a, usize>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// A dense symmetric matrix, stored in full row-major form.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.n + j] = value;
        self.data[j * self.n + i] = value;
    }

    /// The principal submatrix on `indices`.
    pub fn principal(&self, indices: &[usize]) -> SymmetricMatrix {
        let k = indices.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in indices {
            for &j in indices {
                data.push(self.get(i, j));
            }
        }
        SymmetricMatrix { n: k, data }
    }
}

/// Eigenvalues in ascending order with matching unit eigenvectors.
#[derive(Clone, Debug)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// `vectors[i]` is the eigenvector for `values[i]`.
    pub vectors: Vec<Vec<f64>>,
}

/// Full eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigen(matrix: &SymmetricMatrix) -> SymmetricEigen {
    let n = matrix.n;
    let mut a = matrix.data.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let total: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() <= f64::EPSILON * 1e-2 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|k| v[k * n + i]).collect())
        .collect();
    SymmetricEigen { values, vectors }
}

/// Eigenvalues of a symmetric matrix in ascending order, by Householder
/// tridiagonalization followed by implicit QL iterations.
pub fn symmetric_eigenvalues(matrix: &SymmetricMatrix) -> Vec<f64> {
    let n = matrix.n;
    if n == 0 {
        return Vec::new();
    }
    let mut a: Vec<Vec<f64>> = matrix.data.chunks_exact(n).map(<[f64]>::to_vec).collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];

    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = a[i][..=l].iter().map(|v| v.abs()).sum();
            if scale == 0.0 {
                e[i] = a[i][l];
            } else {
                for k in 0..=l {
                    a[i][k] /= scale;
                    h += a[i][k] * a[i][k];
                }
                let f = a[i][l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i][l] = f - g;
                let mut f = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j][k] * a[i][k];
                    }
                    for k in (j + 1)..=l {
                        g += a[k][j] * a[i][k];
                    }
                    e[j] = g / h;
                    f += e[j] * a[i][j];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a[i][j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        a[j][k] -= f * e[k] + g * a[i][k];
                    }
                }
            }
        } else {
            e[i] = a[i][l];
        }
        d[i] = h;
    }
    for i in 0..n {
        d[i] = a[i][i];
    }

    // Implicit QL on the tridiagonal (d, e).
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    d
}

/// Smallest and largest eigenvalue of a symmetric matrix.
pub fn extremal_eigenvalues(matrix: &SymmetricMatrix) -> (f64, f64) {
    match matrix.n {
        0 => (0.0, 0.0),
        1 => (matrix.data[0], matrix.data[0]),
        _ => {
            let values = symmetric_eigenvalues(matrix);
            (values[0], values[matrix.n - 1])
        }
    }
}

/// Extremal eigenvalues `(λ_min, λ_max)` of the Gram matrix `Φ_Tᵀ Φ_T`.
pub fn gram_eigen_bounds(columns: &DenseMatrix) -> (f64, f64) {
    extremal_eigenvalues(&columns.gram())
}

/// Least-squares solution with its support rank.
#[derive(Clone, Debug)]
pub struct SupportSolution {
    /// Length-`N` coefficients, exactly zero off the support.
    pub coefficients: Vec<f64>,
    /// Numerical rank of the selected columns.
    pub rank: usize,
}

/// `argmin ‖y − Φz‖₂` over `z` supported on `support`; the minimum-norm
/// minimizer when the selected columns are rank deficient.
pub fn least_squares_on_support(
    phi: &DenseMatrix,
    y: &[f64],
    support: &IndexSet,
) -> Result<Vec<f64>> {
    least_squares_with_rank(phi, y, support).map(|s| s.coefficients)
}

/// As [`least_squares_on_support`] but also reports the numerical rank.
pub fn least_squares_with_rank(
    phi: &DenseMatrix,
    y: &[f64],
    support: &IndexSet,
) -> Result<SupportSolution> {
    if support.is_empty() {
        return Err(Error::contract("least squares support must be nonempty"));
    }
    if y.len() != phi.rows() {
        return Err(Error::Dimension {
            expected: phi.rows(),
            actual: y.len(),
            context: "measurement length must equal row count",
        });
    }
    if let Some(max) = support.max() {
        if max >= phi.cols() {
            return Err(Error::contract(format!(
                "support index {max} out of range for {} columns",
                phi.cols()
            )));
        }
    }
    let columns: Vec<Vec<f64>> = support.iter().map(|&j| phi.column(j).to_vec()).collect();
    let (local, rank) = pivoted_least_squares(columns, y.to_vec());
    let mut coefficients = vec![0.0; phi.cols()];
    for (&j, c) in support.iter().zip(local) {
        coefficients[j] = c;
    }
    Ok(SupportSolution { coefficients, rank })
}

/// Householder reflector zeroing `x[1..]`: returns `(v, alpha)` with
/// `(I − 2vvᵀ/vᵀv) x = alpha·e₁`, or `None` when `x` is zero.
fn householder(x: &[f64]) -> Option<(Vec<f64>, f64)> {
    let norm = norm2(x);
    if norm == 0.0 {
        return None;
    }
    let alpha = if x[0] >= 0.0 { -norm } else { norm };
    let mut v = x.to_vec();
    v[0] -= alpha;
    Some((v, alpha))
}

/// Applies the reflector defined by `v` to `target` in place.
fn reflect(v: &[f64], target: &mut [f64]) {
    let vv = dot(v, v);
    if vv == 0.0 {
        return;
    }
    let scale = 2.0 * dot(v, target) / vv;
    axpy(-scale, v, target);
}

/// Solves `min ‖b − A w‖₂` for `A` given by columns, returning the
/// minimum-norm solution and the numerical rank.
fn pivoted_least_squares(mut cols: Vec<Vec<f64>>, mut b: Vec<f64>) -> (Vec<f64>, usize) {
    let s = cols.len();
    let m = b.len();
    let mut perm: Vec<usize> = (0..s).collect();
    let mut rank = 0;
    let mut lead = 0.0f64;

    for i in 0..s.min(m) {
        let (pivot, pivot_norm) =
            (i..s)
                .map(|j| (j, norm2(&cols[j][i..])))
                .fold(
                    (i, -1.0),
                    |best, cur| if cur.1 > best.1 { cur } else { best },
                );
        if i == 0 {
            lead = pivot_norm;
        }
        if pivot_norm <= RANK_TOLERANCE * lead || pivot_norm == 0.0 {
            break;
        }
        cols.swap(i, pivot);
        perm.swap(i, pivot);
        let (v, alpha) = householder(&cols[i][i..]).expect("pivot column is nonzero");
        for col in cols.iter_mut().skip(i + 1) {
            reflect(&v, &mut col[i..]);
        }
        reflect(&v, &mut b[i..]);
        cols[i][i] = alpha;
        for entry in cols[i][i + 1..].iter_mut() {
            *entry = 0.0;
        }
        rank += 1;
    }

    let mut w = vec![0.0; s];
    if rank == 0 {
        return (w, 0);
    }
    let r = rank;
    let rhs = &b[..r];

    if r == s {
        for i in (0..r).rev() {
            let mut acc = rhs[i];
            for j in (i + 1)..r {
                acc -= cols[j][i] * w[j];
            }
            w[i] = acc / cols[i][i];
        }
    } else {
        // Complete orthogonal decomposition: [R11 R12]ᵀ = Z [U; 0].
        let mut wt: Vec<Vec<f64>> = (0..r)
            .map(|row| (0..s).map(|j| cols[j][row]).collect())
            .collect();
        let mut reflectors = Vec::with_capacity(r);
        for i in 0..r {
            let (v, alpha) = householder(&wt[i][i..]).expect("full row rank block");
            for col in wt.iter_mut().skip(i + 1) {
                reflect(&v, &mut col[i..]);
            }
            wt[i][i] = alpha;
            reflectors.push(v);
        }
        // Uᵀ t = c, with U upper triangular (U[i][j] = wt[j][i] for i <= j).
        let mut t = vec![0.0; s];
        for j in 0..r {
            let mut acc = rhs[j];
            for i in 0..j {
                acc -= wt[j][i] * t[i];
            }
            t[j] = acc / wt[j][j];
        }
        for (i, v) in reflectors.iter().enumerate().rev() {
            reflect(v, &mut t[i..]);
        }
        w = t;
    }

    let mut out = vec![0.0; s];
    for (pos, &orig) in perm.iter().enumerate() {
        out[orig] = w[pos];
    }
    (out, rank)
}

/// Orthonormalizes the columns of a matrix with `rows >= cols` by Householder
/// QR, returning `Q` with the signs chosen so that `diag(R) > 0`.
pub fn orthonormal_factor(a: &DenseMatrix) -> Result<DenseMatrix> {
    let (m, n) = (a.rows(), a.cols());
    if m < n {
        return Err(Error::contract(format!(
            "cannot orthonormalize {n} columns in dimension {m}"
        )));
    }
    let mut cols: Vec<Vec<f64>> = a.columns().map(<[f64]>::to_vec).collect();
    let mut reflectors: Vec<Option<Vec<f64>>> = Vec::with_capacity(n);
    let mut signs = Vec::with_capacity(n);
    for i in 0..n {
        match householder(&cols[i][i..]) {
            Some((v, alpha)) => {
                for col in cols.iter_mut().skip(i + 1) {
                    reflect(&v, &mut col[i..]);
                }
                signs.push(if alpha < 0.0 { -1.0 } else { 1.0 });
                reflectors.push(Some(v));
            }
            None => {
                return Err(Error::contract("matrix is rank deficient"));
            }
        }
    }
    let mut q = Vec::with_capacity(m * n);
    for j in 0..n {
        let mut e = vec![0.0; m];
        e[j] = signs[j];
        for (i, v) in reflectors.iter().enumerate().rev() {
            if let Some(v) = v {
                reflect(v, &mut e[i..]);
            }
        }
        q.extend(e);
    }
    DenseMatrix::from_col_major(m, n, q)
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `a − b` elementwise.
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a + b` elementwise.
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}
