//! Exact dense spectral oracle for vectorized Liouvillians.
//!
//! General complex non-Hermitian eigensolver, self-contained: Parlett–Reinsch
//! balancing, Householder reduction to Hessenberg form, single-shift complex
//! QR iteration with Wilkinson shifts for the eigenvalues, and inverse
//! iteration with a partially pivoted LU for the right eigenvectors.
//! Eigenvalues of a Liouvillian come out sorted by descending real part, so
//! index 0 is the steady state (λ = 0) and the first entry past the zero
//! cluster determines the relaxation gap `Δ = |Re λ₁|`.
//!
//! Everything here is `O(n³)`–`O(n⁴)` dense linear algebra; the entry points
//! refuse dimensions above [`DENSE_DIM_LIMIT`] (vectorized dimension
//! `2^{2N} ≤ 256`, i.e. `N ≤ 4` spins).

use ndarray::Array2;
use num_complex::Complex64;

use crate::dense::{frobenius, matvec};
use crate::lindblad::{vectorize, LindbladModel, VectorizedLiouvillian};
use crate::state::{overlap, Statevector};
use crate::{Error, Result};

/// Largest dense dimension the spectral entry points accept.
pub const DENSE_DIM_LIMIT: usize = 256;

/// Eigenvalues within this distance of zero count as the steady-state
/// cluster, and real parts within this of each other belong to one cluster.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-8;

/// Residual bound `‖Av − λv‖ ≤ RESIDUAL_TOL · max(1, ‖A‖_F)` enforced on
/// every reported eigenpair.
const RESIDUAL_TOL: f64 = 1e-9;

/// Full spectrum of a vectorized Liouvillian.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    /// Sorted by descending real part (ties: descending imaginary part).
    pub eigenvalues: Vec<Complex64>,
    /// Right eigenvectors, column `k` paired with `eigenvalues[k]`; unit
    /// 2-norm with the largest-modulus component rotated real-positive.
    pub eigenvectors: Vec<Vec<Complex64>>,
    /// Number of eigenvalues with `|λ| ≤ tol` (steady-state degeneracy).
    pub zero_count: usize,
    /// `|Re λ|` of the slowest-decaying nonzero mode.
    pub gap: f64,
}

/// Diagonalize the vectorized generator of `model`; see [`dense_eig`] for
/// the algorithm and [`SpectralResult`] for conventions.
pub fn dense_spectrum(l: &VectorizedLiouvillian) -> Result<SpectralResult> {
    let dim = 1usize << l.qubit_count();
    if dim > DENSE_DIM_LIMIT {
        return Err(Error::DenseLimit { requested: dim, limit: DENSE_DIM_LIMIT });
    }
    let a = l.operator().to_dense()?;
    let (eigenvalues, eigenvectors) = dense_eig(&a)?;
    let zero_count = eigenvalues.iter().filter(|v| v.norm() <= DEFAULT_DEGENERACY_TOL).count();
    let gap = gap_from_eigenvalues(&eigenvalues, DEFAULT_DEGENERACY_TOL)?;
    Ok(SpectralResult { eigenvalues, eigenvectors, zero_count, gap })
}

/// Steady-state degeneracy and relaxation gap of a model:
/// `(gap, zero_count)` with the zero cluster defined by `degeneracy_tol`.
pub fn exact_gap(model: &LindbladModel, degeneracy_tol: f64) -> Result<(f64, usize)> {
    let l = vectorize(model);
    let dim = 1usize << l.qubit_count();
    if dim > DENSE_DIM_LIMIT {
        return Err(Error::DenseLimit { requested: dim, limit: DENSE_DIM_LIMIT });
    }
    let mut work = l.operator().to_dense()?;
    balance(&mut work);
    hessenberg(&mut work);
    let eigenvalues = qr_eigenvalues(&mut work)?;
    let zero_count = eigenvalues.iter().filter(|v| v.norm() <= degeneracy_tol).count();
    let gap = gap_from_eigenvalues(&eigenvalues, degeneracy_tol)?;
    Ok((gap, zero_count))
}

fn gap_from_eigenvalues(eigenvalues: &[Complex64], tol: f64) -> Result<f64> {
    eigenvalues
        .iter()
        .filter(|v| v.norm() > tol)
        .map(|v| v.re.abs())
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.min(x))))
        .ok_or_else(|| Error::Numerical("entire spectrum is within the zero tolerance; no gap".into()))
}

/// Squared overlap of `psi` with the span of the slowest-decaying nonzero
/// eigenmodes of `model` (the full degenerate or complex-conjugate cluster
/// at `Re λ₁`). Convenience wrapper over [`ExcitedProjector`].
pub fn fidelity_to_excited(psi: &Statevector, model: &LindbladModel) -> Result<f64> {
    let spec = dense_spectrum(&vectorize(model))?;
    ExcitedProjector::from_spectrum(&spec)?.fidelity(psi)
}

/// Orthonormal basis of the leading excited cluster, reusable across many
/// fidelity evaluations.
#[derive(Debug, Clone)]
pub struct ExcitedProjector {
    basis: Vec<Vec<Complex64>>,
    qubits: usize,
}

impl ExcitedProjector {
    /// Collect every eigenvector whose eigenvalue lies outside the zero
    /// cluster but within [`DEFAULT_DEGENERACY_TOL`] of the leading excited
    /// real part, then orthonormalize them.
    pub fn from_spectrum(spec: &SpectralResult) -> Result<Self> {
        let tol = DEFAULT_DEGENERACY_TOL;
        let re_first = spec
            .eigenvalues
            .iter()
            .filter(|v| v.norm() > tol)
            .map(|v| v.re)
            .fold(f64::NEG_INFINITY, f64::max);
        if re_first == f64::NEG_INFINITY {
            return Err(Error::Numerical("no nonzero eigenvalues to project onto".into()));
        }
        let mut basis: Vec<Vec<Complex64>> = Vec::new();
        for (k, v) in spec.eigenvalues.iter().enumerate() {
            if v.norm() > tol && (v.re - re_first).abs() <= tol {
                let mut vec = spec.eigenvectors[k].clone();
                // modified Gram–Schmidt against the basis so far
                for b in &basis {
                    let ip: Complex64 = b.iter().zip(&vec).map(|(x, y)| x.conj() * y).sum();
                    for (w, bb) in vec.iter_mut().zip(b) {
                        *w -= ip * bb;
                    }
                }
                let norm = vec.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                if norm > 1e-8 {
                    for w in &mut vec {
                        *w /= norm;
                    }
                    basis.push(vec);
                }
            }
        }
        let dim = spec.eigenvalues.len();
        Ok(ExcitedProjector { basis, qubits: dim.trailing_zeros() as usize })
    }

    /// `‖P ψ‖²` for the orthogonal projector `P` onto the cluster span.
    pub fn fidelity(&self, psi: &Statevector) -> Result<f64> {
        if psi.qubit_count() != self.qubits {
            return Err(Error::DimensionMismatch { left: self.qubits, right: psi.qubit_count() });
        }
        let mut acc = 0.0;
        for b in &self.basis {
            let ip: Complex64 = b.iter().zip(psi.amplitudes()).map(|(x, y)| x.conj() * y).sum();
            acc += ip.norm_sqr();
        }
        Ok(acc)
    }

    /// Dimension of the cluster span.
    pub fn rank(&self) -> usize {
        self.basis.len()
    }
}

/// Eigenvalues and right eigenvectors of a general complex matrix.
///
/// Pipeline: balancing → Householder Hessenberg → single-shift QR for
/// eigenvalues → inverse iteration on the balanced matrix per eigenvalue,
/// with re-orthogonalization inside numerically degenerate clusters. Every
/// returned pair satisfies `‖Av − λv‖ ≤ 1e-9 · max(1, ‖A‖_F)`.
pub fn dense_eig(a: &Array2<Complex64>) -> Result<(Vec<Complex64>, Vec<Vec<Complex64>>)> {
    let (rows, cols) = a.dim();
    if rows != cols {
        return Err(Error::Domain(format!("matrix must be square, got {rows}×{cols}")));
    }
    if rows == 0 {
        return Err(Error::Domain("empty matrix".into()));
    }
    if rows > DENSE_DIM_LIMIT {
        return Err(Error::DenseLimit { requested: rows, limit: DENSE_DIM_LIMIT });
    }
    let n = rows;

    let mut balanced = a.clone();
    let d = balance(&mut balanced);

    let mut h = balanced.clone();
    hessenberg(&mut h);
    let mut eigenvalues = qr_eigenvalues(&mut h)?;

    // deterministic order: descending real part, ties by descending
    // imaginary part (conjugate partners adjacent, +Im first)
    eigenvalues.sort_by(|p, q| {
        q.re.partial_cmp(&p.re)
            .unwrap()
            .then(q.im.partial_cmp(&p.im).unwrap())
    });

    let scale = frobenius(a).max(1.0);
    let cluster_tol = 1e-8 * scale;
    let mut eigenvectors: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut k = 0;
    while k < n {
        // group numerically coincident eigenvalues so their vectors can be
        // kept independent; chaining on adjacent spacing keeps a spread
        // multiple eigenvalue in one cluster
        let mut cluster_end = k + 1;
        while cluster_end < n
            && (eigenvalues[cluster_end] - eigenvalues[cluster_end - 1]).norm() <= cluster_tol
        {
            cluster_end += 1;
        }
        let mut cluster_vecs: Vec<Vec<Complex64>> = Vec::new();
        for (j, lambda) in eigenvalues[k..cluster_end].iter().enumerate() {
            let v = eigenvector_for(&balanced, a, &d, *lambda, j, &cluster_vecs, scale)?;
            cluster_vecs.push(v);
        }
        eigenvectors.extend(cluster_vecs);
        k = cluster_end;
    }
    debug_assert_eq!(eigenvectors.len(), n);
    Ok((eigenvalues, eigenvectors))
}

/// One right eigenvector by inverse iteration, retried with stronger
/// perturbations and in-cluster orthogonalization when needed.
fn eigenvector_for(
    balanced: &Array2<Complex64>,
    original: &Array2<Complex64>,
    d: &[f64],
    lambda: Complex64,
    cluster_index: usize,
    cluster_vecs: &[Vec<Complex64>],
    scale: f64,
) -> Result<Vec<Complex64>> {
    let n = balanced.nrows();
    let tol = RESIDUAL_TOL * scale;
    let mut best_residual = f64::INFINITY;
    // later cluster members get distinct shifts and orthogonalization so
    // inverse iteration cannot collapse onto an earlier vector
    for attempt in 0..6 {
        // grow the shift perturbation geometrically but keep it well inside
        // the cluster radius, rotating its direction between attempts
        let eps = (1e-12 * scale * 10f64.powi(attempt as i32)).min(1e-9 * scale);
        let dir = match attempt % 3 {
            0 => Complex64::new(1.0 + cluster_index as f64, 0.5 * cluster_index as f64),
            1 => Complex64::new(0.5 * cluster_index as f64, 1.0 + cluster_index as f64),
            _ => Complex64::new(-(1.0 + cluster_index as f64), 1.0),
        };
        let shift = lambda + dir * eps;
        let mut shifted = balanced.clone();
        for i in 0..n {
            shifted[[i, i]] -= shift;
        }
        let lu = LuFactors::new(shifted, scale);
        let mut v = start_vector(n, cluster_index, attempt);
        let orthogonalize = !cluster_vecs.is_empty();
        let mut balanced_v = v.clone();
        let mut ok = false;
        for _ in 0..14 {
            let mut w = lu.solve(&v);
            if orthogonalize {
                // keep only the component independent of earlier members
                // (compare in the balanced coordinates)
                for b in cluster_vecs {
                    let mut bb = b.clone();
                    for i in 0..n {
                        bb[i] /= d[i];
                    }
                    let nb = bb.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
                    for x in &mut bb {
                        *x /= nb;
                    }
                    let ip: Complex64 = bb.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
                    for (wi, bi) in w.iter_mut().zip(&bb) {
                        *wi -= ip * bi;
                    }
                }
            }
            let norm = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if !norm.is_finite() || norm == 0.0 {
                break;
            }
            for x in &mut w {
                *x /= norm;
            }
            balanced_v = w.clone();
            // residual in the original coordinates
            let candidate = debalance_normalize(&balanced_v, d);
            let r = residual(original, lambda, &candidate);
            best_residual = best_residual.min(r);
            v = w;
            if r <= tol {
                ok = true;
                break;
            }
        }
        if ok {
            return Ok(debalance_normalize(&balanced_v, d));
        }
    }
    Err(Error::Numerical(format!(
        "inverse iteration stalled at residual {best_residual:.2e} (target {tol:.2e}) for \
         eigenvalue {lambda} (cluster member {cluster_index})"
    )))
}

fn residual(a: &Array2<Complex64>, lambda: Complex64, v: &[Complex64]) -> f64 {
    let av = matvec(a, v);
    av.iter()
        .zip(v)
        .map(|(x, y)| (x - lambda * y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Undo balancing (`v ← D v`), normalize to unit 2-norm, and rotate the
/// largest-modulus component (lowest index on ties) real-positive.
fn debalance_normalize(v: &[Complex64], d: &[f64]) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = v.iter().zip(d).map(|(x, s)| x * s).collect();
    let norm = out.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    for x in &mut out {
        *x /= norm;
    }
    let mut imax = 0;
    let mut best = -1.0;
    for (i, x) in out.iter().enumerate() {
        let m = x.norm();
        if m > best {
            best = m;
            imax = i;
        }
    }
    let phase = out[imax] / out[imax].norm();
    let rot = phase.conj();
    for x in &mut out {
        *x *= rot;
    }
    out
}

/// Deterministic pseudo-random start vector, distinct per cluster member and
/// attempt.
fn start_vector(n: usize, member: usize, attempt: usize) -> Vec<Complex64> {
    use rand_core::{RngCore, SeedableRng};
    let seed = 0x5EED_0000u64 ^ ((member as u64) << 32) ^ attempt as u64;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| {
            let re = (rng.next_u64() >> 11) as f64 * (2.0 / (1u64 << 53) as f64) - 1.0;
            let im = (rng.next_u64() >> 11) as f64 * (2.0 / (1u64 << 53) as f64) - 1.0;
            Complex64::new(re, im)
        })
        .collect();
    let norm = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= norm;
    }
    v
}

/// Parlett–Reinsch balancing (scaling only): a diagonal similarity with
/// powers of two that roughly equalizes row and column norms. Returns the
/// scale factors `D` with `A_balanced = D⁻¹ A D`.
fn balance(a: &mut Array2<Complex64>) -> Vec<f64> {
    let n = a.nrows();
    let mut d = vec![1.0f64; n];
    let radix = 2.0f64;
    loop {
        let mut done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[[j, i]].re.abs() + a[[j, i]].im.abs();
                    r += a[[i, j]].re.abs() + a[[i, j]].im.abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            while c < r / radix {
                c *= radix;
                r /= radix;
                f *= radix;
            }
            while c >= r * radix {
                c /= radix;
                r *= radix;
                f /= radix;
            }
            if (c + r) < 0.95 * s && f != 1.0 {
                done = false;
                d[i] *= f;
                for j in 0..n {
                    a[[i, j]] /= f; // row i ÷ f
                }
                for j in 0..n {
                    a[[j, i]] *= f; // column i × f
                }
            }
        }
        if done {
            return d;
        }
    }
}

/// In-place Householder reduction to upper Hessenberg form (similarity; the
/// transform is not accumulated because eigenvectors come from inverse
/// iteration on the balanced matrix).
fn hessenberg(a: &mut Array2<Complex64>) {
    let n = a.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        // build the reflector for column k below the subdiagonal
        let mut xnorm = 0.0f64;
        for i in k + 1..n {
            xnorm += a[[i, k]].norm_sqr();
        }
        let xnorm = xnorm.sqrt();
        if xnorm <= f64::MIN_POSITIVE {
            continue;
        }
        let x0 = a[[k + 1, k]];
        let alpha = if x0.norm() == 0.0 {
            Complex64::new(-xnorm, 0.0)
        } else {
            -(x0 / x0.norm()) * xnorm
        };
        let mut u: Vec<Complex64> = (k + 1..n).map(|i| a[[i, k]]).collect();
        u[0] -= alpha;
        let unorm_sq: f64 = u.iter().map(|v| v.norm_sqr()).sum();
        if unorm_sq <= f64::MIN_POSITIVE {
            continue;
        }
        let beta = 2.0 / unorm_sq;

        // left: A ← (I − β u u†) A on rows k+1.., all columns
        for j in k..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for (off, ui) in u.iter().enumerate() {
                dot += ui.conj() * a[[k + 1 + off, j]];
            }
            let dot = dot * beta;
            for (off, ui) in u.iter().enumerate() {
                let v = a[[k + 1 + off, j]] - ui * dot;
                a[[k + 1 + off, j]] = v;
            }
        }
        // right: A ← A (I − β u u†) on columns k+1.., all rows
        for i in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for (off, ui) in u.iter().enumerate() {
                dot += a[[i, k + 1 + off]] * ui;
            }
            let dot = dot * beta;
            for (off, ui) in u.iter().enumerate() {
                let v = a[[i, k + 1 + off]] - dot * ui.conj();
                a[[i, k + 1 + off]] = v;
            }
        }
        a[[k + 1, k]] = alpha;
        for i in k + 2..n {
            a[[i, k]] = Complex64::new(0.0, 0.0);
        }
    }
}

/// Complex Givens rotation `G = [[c, s], [−s̄, c]]` (c real ≥ 0) with
/// `G·[f, g]ᵀ = [r, 0]ᵀ`.
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    let fn_ = f.norm();
    let gn = g.norm();
    if gn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if fn_ == 0.0 {
        return (0.0, g.conj() / gn);
    }
    let r = (fn_ * fn_ + gn * gn).sqrt();
    (fn_ / r, (f / fn_) * g.conj() / r)
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift implicit QR
/// with Wilkinson shifts; the matrix is destroyed. Unordered output.
fn qr_eigenvalues(h: &mut Array2<Complex64>) -> Result<Vec<Complex64>> {
    let n = h.nrows();
    let mut eigenvalues = Vec::with_capacity(n);
    if n == 1 {
        return Ok(vec![h[[0, 0]]]);
    }
    let eps = f64::EPSILON;
    let hnorm = frobenius(h).max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut stalled = 0usize;
    let mut total = 0usize;
    let max_total = 60 * n;

    'outer: loop {
        // zero negligible subdiagonals, then deflate from the bottom
        for k in 1..=hi {
            let sub = h[[k, k - 1]].norm();
            let local = h[[k - 1, k - 1]].norm() + h[[k, k]].norm();
            if sub <= eps * if local > 0.0 { local } else { hnorm } {
                h[[k, k - 1]] = Complex64::new(0.0, 0.0);
            }
        }
        while h[[hi, hi - 1]] == Complex64::new(0.0, 0.0) {
            eigenvalues.push(h[[hi, hi]]);
            stalled = 0;
            hi -= 1;
            if hi == 0 {
                eigenvalues.push(h[[0, 0]]);
                break 'outer;
            }
        }
        // active window [lo..=hi]
        let mut lo = hi;
        while lo > 0 && h[[lo, lo - 1]] != Complex64::new(0.0, 0.0) {
            lo -= 1;
        }
        if hi - lo == 1 {
            // 2×2 block: roots of λ² − (a+d)λ + (ad − bc), written as
            // mean ± √(δ² + bc) with δ = (a−d)/2 — the ((a+d)² − 4 det) form
            // cancels catastrophically for near-double roots and splits them
            // by ~√ulp·‖H‖. The smaller root comes from det/λ_big so both
            // keep full relative accuracy.
            let (a_, b_, c_, d_) =
                (h[[lo, lo]], h[[lo, hi]], h[[hi, lo]], h[[hi, hi]]);
            let mean = (a_ + d_) * 0.5;
            let delta = (a_ - d_) * 0.5;
            let disc = (delta * delta + b_ * c_).sqrt();
            let plus = mean + disc;
            let minus = mean - disc;
            let big = if plus.norm() >= minus.norm() { plus } else { minus };
            let small = if big.norm() > 0.0 { (a_ * d_ - b_ * c_) / big } else { big };
            eigenvalues.push(big);
            eigenvalues.push(small);
            stalled = 0;
            if lo == 0 {
                break 'outer;
            }
            hi = lo - 1;
            if hi == 0 {
                eigenvalues.push(h[[0, 0]]);
                break 'outer;
            }
            continue 'outer;
        }

        total += 1;
        stalled += 1;
        if total > max_total {
            return Err(Error::Numerical(format!(
                "QR iteration exceeded {max_total} sweeps without deflating"
            )));
        }

        // Wilkinson shift: the eigenvalue of the trailing 2×2 closer to the
        // corner entry; every 12 stalls, an exceptional shift breaks cycles
        let mu = if stalled % 12 == 0 {
            h[[hi, hi]] + Complex64::new(0.75 * h[[hi, hi - 1]].norm(), 0.0)
        } else {
            // root of λ² − (a+d)λ + (ad − bc) closest to the corner entry d,
            // via μ = d − bc/(δ ± √(δ² + bc)) with the larger denominator
            let a_ = h[[hi - 1, hi - 1]];
            let b_ = h[[hi - 1, hi]];
            let c_ = h[[hi, hi - 1]];
            let d_ = h[[hi, hi]];
            let delta = (a_ - d_) * 0.5;
            let bc = b_ * c_;
            let root = (delta * delta + bc).sqrt();
            let plus = delta + root;
            let minus = delta - root;
            let denom = if plus.norm() >= minus.norm() { plus } else { minus };
            if denom.norm() <= f64::MIN_POSITIVE.sqrt() {
                d_
            } else {
                d_ - bc / denom
            }
        };

        // implicit single-shift sweep: chase the bulge down the window
        let mut x = h[[lo, lo]] - mu;
        let mut y = h[[lo + 1, lo]];
        for k in lo..hi {
            let (c_, s) = givens(x, y);
            let cs = Complex64::new(c_, 0.0);
            let jlo = if k > lo { k - 1 } else { lo };
            // left rotation on rows (k, k+1)
            for j in jlo..=hi {
                let u = h[[k, j]];
                let w = h[[k + 1, j]];
                h[[k, j]] = cs * u + s * w;
                h[[k + 1, j]] = -s.conj() * u + cs * w;
            }
            // right rotation on columns (k, k+1)
            let imax = (k + 2).min(hi);
            for i in lo..=imax {
                let u = h[[i, k]];
                let w = h[[i, k + 1]];
                h[[i, k]] = cs * u + s.conj() * w;
                h[[i, k + 1]] = -s * u + cs * w;
            }
            if k > lo {
                h[[k + 1, k - 1]] = Complex64::new(0.0, 0.0);
            }
            if k + 1 < hi {
                x = h[[k + 1, k]];
                y = h[[k + 2, k]];
            }
        }
    }
    Ok(eigenvalues)
}

/// Partially pivoted LU of a (possibly nearly singular) complex matrix; tiny
/// pivots are replaced by `1e-20 · scale`, the standard inverse-iteration
/// safeguard.
struct LuFactors {
    lu: Array2<Complex64>,
    perm: Vec<usize>,
}

impl LuFactors {
    fn new(mut a: Array2<Complex64>, scale: f64) -> Self {
        let n = a.nrows();
        let mut perm: Vec<usize> = (0..n).collect();
        let tiny = Complex64::new(1e-20 * scale.max(1.0), 0.0);
        for k in 0..n {
            let mut pivot = k;
            let mut best = a[[k, k]].norm();
            for i in k + 1..n {
                let m = a[[i, k]].norm();
                if m > best {
                    best = m;
                    pivot = i;
                }
            }
            if pivot != k {
                perm.swap(k, pivot);
                for j in 0..n {
                    let tmp = a[[k, j]];
                    a[[k, j]] = a[[pivot, j]];
                    a[[pivot, j]] = tmp;
                }
            }
            if a[[k, k]].norm() < tiny.norm() {
                a[[k, k]] = tiny;
            }
            let inv = Complex64::new(1.0, 0.0) / a[[k, k]];
            for i in k + 1..n {
                let f = a[[i, k]] * inv;
                a[[i, k]] = f;
                if f != Complex64::new(0.0, 0.0) {
                    for j in k + 1..n {
                        let v = a[[i, j]] - f * a[[k, j]];
                        a[[i, j]] = v;
                    }
                }
            }
        }
        LuFactors { lu: a, perm }
    }

    fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = b.len();
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[[i, j]] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in i + 1..n {
                acc -= self.lu[[i, j]] * x[j];
            }
            x[i] = acc / self.lu[[i, i]];
        }
        x
    }
}

/// Excited-state overlap helper for tests and callers that already hold a
/// spectrum: `|⟨B|v⟩|` per eigenvector against a reference state.
pub fn overlaps_with(spec: &SpectralResult, reference: &Statevector) -> Result<Vec<f64>> {
    spec.eigenvectors
        .iter()
        .map(|v| {
            let sv = Statevector::from_amplitudes(v.clone())?;
            Ok(overlap(reference, &sv)?.norm())
        })
        .collect()
}
