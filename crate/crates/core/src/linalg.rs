//! Small dense complex matrices: products, Kronecker products, exponentials.
//!
//! Everything here operates on `Array2<C64>` of edge length <= 9, so routines
//! favor accuracy and determinism over asymptotic cleverness.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

pub const I1: C64 = C64::new(0.0, 1.0);

/// Identity matrix of dimension `n`.
pub fn eye(n: usize) -> Array2<C64> {
    Array2::from_diag_elem(n, C64::new(1.0, 0.0))
}

/// Kronecker product, row-major convention: `(a ⊗ b)[i*nb+k, j*nb+l] = a[i,j] b[k,l]`.
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (na, ma) = a.dim();
    let (nb, mb) = b.dim();
    let mut out = Array2::zeros((na * nb, ma * mb));
    for i in 0..na {
        for j in 0..ma {
            let aij = a[[i, j]];
            for k in 0..nb {
                for l in 0..mb {
                    out[[i * nb + k, j * mb + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

/// Max absolute entry of `a`.
pub fn max_abs(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Max absolute entrywise difference.
pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `max |U† U - I|`, zero for an exactly unitary matrix.
pub fn unitarity_defect(u: &Array2<C64>) -> f64 {
    let n = u.nrows();
    let prod = u.t().mapv(|z| z.conj()).dot(u);
    max_abs_diff(&prod, &eye(n))
}

/// Entrywise distance between unitaries after removing the global phase that
/// best aligns them (phase of `tr(V† U)`).
pub fn dist_up_to_phase(u: &Array2<C64>, v: &Array2<C64>) -> f64 {
    let tr: C64 = u
        .iter()
        .zip(v.iter())
        .map(|(x, y)| y.conj() * x)
        .sum();
    let phase = if tr.norm() > 1e-300 { tr / tr.norm() } else { C64::new(1.0, 0.0) };
    let aligned = v.mapv(|z| z * phase);
    max_abs_diff(u, &aligned)
}

/// Matrix exponential by scaling and squaring over a Taylor series.
///
/// Inputs here are `-i H dt` with `‖·‖` of order one at most, so the series
/// is cut at machine precision after scaling the max-row-sum norm below 1/2.
pub fn mat_exp(a: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let norm = a
        .rows()
        .into_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scale = C64::new(1.0 / f64::powi(2.0, squarings as i32), 0.0);
    let a_s = a.mapv(|z| z * scale);

    // 18 Taylor terms leave truncation error ~1e-23 at ‖a_s‖ <= 1/2
    let mut term = eye(n);
    let mut sum = eye(n);
    for k in 1..=18u32 {
        term = term.dot(&a_s).mapv(|z| z / k as f64);
        sum += &term;
    }
    let mut out = sum;
    for _ in 0..squarings {
        out = out.dot(&out);
    }
    out
}

/// `exp(-i H dt) ψ` for Hermitian `h`, without forming the matrix product chain.
pub fn evolve_step(h: &Array2<C64>, dt: f64, psi: &Array1<C64>) -> Array1<C64> {
    let a = h.mapv(|z| -I1 * z * dt);
    mat_exp(&a).dot(psi)
}

/// Average gate fidelity of `real` against the unitary `ideal`:
/// (|tr(V† P)|² + tr(P† P)) / (d(d+1)).  `real` may be a non-unitary
/// subspace block; lost norm (leakage) then lowers the fidelity.
pub fn avg_gate_fidelity(real: &Array2<C64>, ideal: &Array2<C64>) -> f64 {
    let d = ideal.nrows();
    let tr: C64 = (0..d)
        .map(|i| {
            (0..d)
                .map(|k| ideal[[k, i]].conj() * real[[k, i]])
                .sum::<C64>()
        })
        .sum();
    let pp: f64 = real.iter().map(|z| z.norm_sqr()).sum();
    (tr.norm_sqr() + pp) / (d * (d + 1)) as f64
}
