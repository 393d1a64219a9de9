//! Dense complex eigendecomposition helpers shared by the higher layers.
//!
//! Everything here works on raw `nalgebra` matrices; labeled wrappers live in
//! [`crate::tensor`].

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest entry magnitude (max-norm). Zero for empty matrices.
pub fn max_norm(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Max-norm distance from the identity of matching size.
pub fn max_norm_from_identity(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            worst = worst.max((m[(i, j)] - target).norm());
        }
    }
    worst
}

/// Max-norm of `m - m†`; zero exactly iff `m` is Hermitian.
pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    max_norm(&(m - m.adjoint()))
}

/// Max-norm of `m†m - 1`.
pub fn unitarity_residual(m: &CMatrix) -> f64 {
    max_norm_from_identity(&(m.adjoint() * m))
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order with matching orthonormal
/// eigenvector columns. The input is symmetrized first so callers may pass
/// matrices that are Hermitian only up to rounding.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|v| v.is_nan()) {
        // The tridiagonalization can emit NaN on special sparsity patterns;
        // a fixed generic basis change keeps the spectrum and removes the
        // pattern, and the eigenvectors rotate back exactly.
        let q = generic_unitary(sym.nrows());
        let rotated = &q * &sym * q.adjoint();
        let eig = rotated.symmetric_eigen();
        return sorted_eigen(&eig.eigenvalues, &(q.adjoint() * &eig.eigenvectors));
    }
    sorted_eigen(&eig.eigenvalues, &eig.eigenvectors)
}

fn sorted_eigen(values: &DVector<f64>, vectors: &CMatrix) -> (Vec<f64>, CMatrix) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let sorted_values: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let sorted_vectors = CMatrix::from_columns(
        &order.iter().map(|&i| vectors.column(i).into_owned()).collect::<Vec<_>>(),
    );
    (sorted_values, sorted_vectors)
}

/// Dense deterministic unitary: QR of one fixed seeded Gaussian matrix.
fn generic_unitary(n: usize) -> CMatrix {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0x6261_7369_735f_7131);
    let g = CMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        C64::new(re, im)
    });
    g.qr().q()
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    let (values, _) = hermitian_eigen(m);
    values.first().copied().unwrap_or(0.0)
}

/// Eigendecomposition of a unitary (more generally normal) matrix.
///
/// Returns eigenphases `theta` in `[0, 2pi)` in ascending order together with
/// orthonormal eigenvector columns, so column `k` satisfies
/// `m q_k = exp(i theta_k) q_k`.
///
/// A normal matrix is a commuting pair of Hermitian matrices in disguise:
/// `m = a + i b` with `a = (m + m†)/2`, `b = (m - m†)/(2i)`. We diagonalize
/// `a`, then rediagonalize `b` inside each (near-)degenerate eigenspace of
/// `a`; the refined basis diagonalizes both, hence `m`.
pub fn unitary_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let d = m.nrows();
    if d == 0 || d != m.ncols() {
        return Err(Error::NotSquare);
    }
    let a = (m + m.adjoint()).scale(0.5);
    let b = (m - m.adjoint()).scale(0.5) * C64::new(0.0, -1.0);

    let (avals, mut basis) = hermitian_eigen(&a);
    let gap_tol = 1e-8 * avals.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));

    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && (avals[end] - avals[end - 1]).abs() <= gap_tol {
            end += 1;
        }
        if end - start > 1 {
            let sub = basis.columns(start, end - start).into_owned();
            let block = sub.adjoint() * &b * &sub;
            let (_, rot) = hermitian_eigen(&block);
            let refined = sub * rot;
            basis.columns_mut(start, end - start).copy_from(&refined);
        }
        start = end;
    }

    let mut phases: Vec<(f64, usize)> = Vec::with_capacity(d);
    let mut worst = 0.0f64;
    for k in 0..d {
        let q = basis.column(k).into_owned();
        let image = m * &q;
        let lambda: C64 = q.dotc(&image);
        worst = worst.max((&image - &q * lambda).norm());
        let mut theta = lambda.arg();
        if theta < 0.0 {
            theta += std::f64::consts::TAU;
        }
        if theta >= std::f64::consts::TAU {
            theta = 0.0;
        }
        phases.push((theta, k));
    }
    if worst > 1e-6 {
        return Err(Error::NumericalInconsistency(format!(
            "eigenvector residual {worst:.3e} for a matrix that should be normal"
        )));
    }
    phases.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

    let thetas: Vec<f64> = phases.iter().map(|p| p.0).collect();
    let vectors = CMatrix::from_columns(
        &phases.iter().map(|p| basis.column(p.1).into_owned()).collect::<Vec<_>>(),
    );
    Ok((thetas, vectors))
}
