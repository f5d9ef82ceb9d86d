//! Small dense complex-matrix helpers shared by the spectral oracle, the
//! vectorization cross-checks, and tests.

use ndarray::Array2;
use num_complex::Complex64;

/// Kronecker product `a ⊗ b`; the first factor supplies the high-order index
/// bits, so an operator on qubit 0 (least significant bit) sits in the *last*
/// factor of a chained product.
pub fn kron(a: &Array2<Complex64>, b: &Array2<Complex64>) -> Array2<Complex64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Conjugate transpose.
pub fn dagger(a: &Array2<Complex64>) -> Array2<Complex64> {
    a.t().mapv(|v| v.conj())
}

/// Identity matrix of the given dimension.
pub fn identity(dim: usize) -> Array2<Complex64> {
    Array2::from_diag_elem(dim, Complex64::new(1.0, 0.0))
}

/// Frobenius norm.
pub fn frobenius(a: &Array2<Complex64>) -> f64 {
    a.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest entrywise modulus of `a − b`.
pub fn max_abs_diff(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    assert_eq!(a.dim(), b.dim(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Matrix–vector product `a · v`.
pub fn matvec(a: &Array2<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    let (r, c) = a.dim();
    assert_eq!(c, v.len(), "shape mismatch in matvec");
    let mut out = vec![Complex64::new(0.0, 0.0); r];
    for i in 0..r {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..c {
            acc += a[[i, j]] * v[j];
        }
        out[i] = acc;
    }
    out
}
