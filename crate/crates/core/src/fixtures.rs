//! Reproducible test matrices and observables.

use crate::quantization::Observable;
use crate::symplectic::SymplecticMatrix;

/// `[[1,2],[2,5]]`, characteristic polynomial `x^2 - 6x + 1`.
pub fn a1() -> SymplecticMatrix {
    SymplecticMatrix::from_rows(&[vec![1, 2], vec![2, 5]]).unwrap()
}

/// `[[1,4],[2,9]]`, characteristic polynomial `x^2 - 10x + 1`.
pub fn a2() -> SymplecticMatrix {
    SymplecticMatrix::from_rows(&[vec![1, 4], vec![2, 9]]).unwrap()
}

/// The `d = 2` fixture `M^2` with `M = [[0, I], [-I, T]]`, `T = [[2,2],[2,4]]`.
/// `M` is symplectic because `T` is symmetric, and `M^2 = I mod 2` because
/// `T` is even.
pub fn d2() -> SymplecticMatrix {
    let m = SymplecticMatrix::from_rows(&[
        vec![0, 0, 1, 0],
        vec![0, 0, 0, 1],
        vec![-1, 0, 2, 2],
        vec![0, -1, 2, 4],
    ])
    .unwrap();
    m.mul(&m).unwrap()
}

/// The standard symplectic form `[[0,1],[-1,0]]`; fails parity and has
/// eigenvalues `+-i`.
pub fn j_matrix() -> SymplecticMatrix {
    SymplecticMatrix::from_rows(&[vec![0, 1], vec![-1, 0]]).unwrap()
}

/// `cos(2 pi x_1)` on the `2d`-torus.
pub fn cos_x1(d: usize) -> Observable {
    let mut u = vec![0i64; 2 * d];
    u[0] = 1;
    Observable::cosine(&u)
}

/// The constant observable `c`.
pub fn constant(d: usize, c: f64) -> Observable {
    Observable::constant(d, c)
}
