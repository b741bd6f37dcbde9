// Dense helpers on top of nalgebra: matrix exponential, Hermitian spectra and
// null vectors.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::math;

fn one_norm(m: &DMatrix<Complex64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|x| x.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(m)` by scaling and squaring with a degree-13 Padé approximant.
pub(crate) fn expm(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    const THETA_13: f64 = 5.371920351148152;

    let n = m.nrows();
    let norm = one_norm(m);
    let squarings = if norm > THETA_13 {
        math::ceil(math::ln(norm / THETA_13) / core::f64::consts::LN_2) as i32
    } else {
        0
    };
    let a = m * Complex64::new(1.0 / math::powi(2.0, squarings), 0.0);
    let id = DMatrix::<Complex64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let c = |k: usize| Complex64::new(B[k], 0.0);

    let inner_u = &a6 * c(13) + &a4 * c(11) + &a2 * c(9);
    let u = &a * (&a6 * inner_u + &a6 * c(7) + &a4 * c(5) + &a2 * c(3) + &id * c(1));
    let inner_v = &a6 * c(12) + &a4 * c(10) + &a2 * c(8);
    let v = &a6 * inner_v + &a6 * c(6) + &a4 * c(4) + &a2 * c(2) + &id * c(0);

    let numerator = &v + &u;
    let denominator = &v - &u;
    let mut r = denominator
        .lu()
        .solve(&numerator)
        .expect("Padé denominator is nonsingular after scaling");
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub(crate) fn hermitian_min_eigenvalue(m: &DMatrix<Complex64>) -> f64 {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

pub(crate) struct NullVector {
    /// Singular values in ascending order.
    pub singular_values: Vec<f64>,
    /// Right singular vector of the smallest singular value.
    pub vector: Vec<Complex64>,
}

/// Right singular vector belonging to the smallest singular value of `m`.
pub(crate) fn null_vector(m: DMatrix<Complex64>) -> NullVector {
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V^H");
    let (idx, _) =
        svd.singular_values
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |(bi, bv), (i, &s)| {
                    if s < bv {
                        (i, s)
                    } else {
                        (bi, bv)
                    }
                },
            );
    let vector = v_t.row(idx).iter().map(|x| x.conj()).collect();
    let mut singular_values: Vec<f64> = svd.singular_values.iter().copied().collect();
    singular_values.sort_by(|a, b| a.partial_cmp(b).expect("finite singular values"));
    NullVector {
        singular_values,
        vector,
    }
}

pub(crate) fn mat_vec(m: &DMatrix<Complex64>, v: &[Complex64]) -> Vec<Complex64> {
    let x = DVector::from_column_slice(v);
    let y = m * x;
    y.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zeros(n: usize) -> DMatrix<Complex64> {
        DMatrix::from_element(n, n, Complex64::new(0.0, 0.0))
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let e = expm(&zeros(5));
        assert_eq!(e, DMatrix::identity(5, 5));
    }

    #[test]
    fn expm_of_rotation_generator() {
        // exp([[0, -θ], [θ, 0]]) is a rotation by θ; large θ exercises squaring
        for theta in [0.3, 2.0, 17.0] {
            let m = DMatrix::from_row_slice(
                2,
                2,
                &[c(0.0, 0.0), c(-theta, 0.0), c(theta, 0.0), c(0.0, 0.0)],
            );
            let e = expm(&m);
            let (s, co) = (libm::sin(theta), libm::cos(theta));
            assert!((e[(0, 0)] - c(co, 0.0)).norm() < 1e-13);
            assert!((e[(0, 1)] - c(-s, 0.0)).norm() < 1e-13);
            assert!((e[(1, 0)] - c(s, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn expm_of_diagonal() {
        let mut m = zeros(3);
        m[(0, 0)] = c(-1.0, 0.5);
        m[(1, 1)] = c(2.0, 0.0);
        m[(2, 2)] = c(-30.0, 0.0);
        let e = expm(&m);
        for k in 0..3 {
            let expected = m[(k, k)].exp();
            assert!((e[(k, k)] - expected).norm() <= 1e-13 * expected.norm().max(1.0));
        }
    }

    #[test]
    fn min_eigenvalue_of_hermitian() {
        let m =
            DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 2.0), c(0.0, -2.0), c(1.0, 0.0)]);
        assert!((hermitian_min_eigenvalue(&m) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn null_vector_of_rank_deficient() {
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[c(1.0, 0.0), c(-1.0, 0.0), c(2.0, 0.0), c(-2.0, 0.0)],
        );
        let nv = null_vector(m.clone());
        assert!(nv.singular_values[0] < 1e-14);
        let r = mat_vec(&m, &nv.vector);
        assert!(r.iter().all(|x| x.norm() < 1e-14));
    }
}
