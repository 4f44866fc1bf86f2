//! Operators on a single three-level transmon.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

pub const DIM: usize = 3;

/// Lowering operator b = |0><1| + √2 |1><2|.
pub fn lowering() -> Array2<C64> {
    let mut b = Array2::zeros((DIM, DIM));
    b[[0, 1]] = C64::new(1.0, 0.0);
    b[[1, 2]] = C64::new(2f64.sqrt(), 0.0);
    b
}

/// Excitation number diag(0, 1, 2).
pub fn number() -> Array2<C64> {
    Array2::from_diag(&Array1::from(vec![
        C64::new(0.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(2.0, 0.0),
    ]))
}

/// diag(d0, d1, d2) as a complex matrix.
pub fn diag(d: [f64; 3]) -> Array2<C64> {
    Array2::from_diag(&Array1::from(
        d.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>(),
    ))
}

/// Ground state |0> of a single transmon.
pub fn ground() -> Array1<C64> {
    let mut s = Array1::zeros(DIM);
    s[0] = C64::new(1.0, 0.0);
    s
}
