use num_complex::Complex;
use psh_spectra::numerics::{
    biorthonormalize, decompose, eig_general, invert, kron_chain, pauli, vec_norm, ComplexMatrix, NumericsError, DEFAULT_TOL,
};

type C = Complex<f64>;

fn c(re: f64, im: f64) -> C {
    Complex::new(re, im)
}

/// Quadratic-formula eigenvalues of a 2×2 matrix, sorted by `(re, im)`.
fn eig2(a: C, b: C, cc: C, d: C) -> [C; 2] {
    let tr = a + d;
    let det = a * d - b * cc;
    let disc = (tr * tr - det * 4.0).sqrt();
    let mut v = [(tr + disc) / 2.0, (tr - disc) / 2.0];
    v.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    v
}

fn sorted(mut v: Vec<C>) -> Vec<C> {
    v.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    v
}

#[test]
fn two_by_two_matches_quadratic_formula() {
    let (a, b, cc, d) = (c(1.0, 0.3), c(-0.4, 2.0), c(0.7, -0.1), c(-2.0, 0.5));
    let m = ComplexMatrix::from_rows(&[vec![a, b], vec![cc, d]]).unwrap();
    let sys = eig_general(&m, DEFAULT_TOL).unwrap();
    let got = sorted(sys.eigenvalues.clone());
    for (x, y) in got.iter().zip(eig2(a, b, cc, d)) {
        assert!((x - y).norm() < 1e-12, "{x} vs {y}");
    }
}

#[test]
fn pt_dimer_is_real_below_and_complex_above_threshold() {
    // [[iγ, 1], [1, −iγ]] has eigenvalues ±√(1 − γ²).
    for g in [0.3, 0.9, 1.2] {
        let m = ComplexMatrix::from_rows(&[vec![c(0.0, g), c(1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, -g)]]).unwrap();
        let sys = eig_general(&m, DEFAULT_TOL).unwrap();
        let expect = C::from(1.0 - g * g).sqrt();
        for l in &sys.eigenvalues {
            assert!((l - expect).norm().min((l + expect).norm()) < 1e-12);
        }
    }
}

#[test]
fn reconstruction_and_biorthogonality() {
    let m = ComplexMatrix::from_fn(6, |i, j| c(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + 2 * j) % 3) as f64 * 0.5 - 0.5));
    let sys = eig_general(&m, DEFAULT_TOL).unwrap();
    let err = sys.reconstruct().sub(&m).frobenius_norm();
    assert!(err <= 10.0 * DEFAULT_TOL * m.frobenius_norm(), "reconstruction error {err:e}");
    for n in 0..6 {
        for k in 0..6 {
            let want = if n == k { C::from(1.0) } else { C::from(0.0) };
            assert!((sys.overlap(n, k) - want).norm() < 1e-9);
        }
        assert!((vec_norm(&sys.right[n]) - 1.0).abs() < 1e-12);
    }
    assert!(sys.right_residual(&m) < 1e-10 && sys.left_residual(&m) < 1e-10);
}

#[test]
fn hermitian_input_gives_real_eigenvalues() {
    let a = ComplexMatrix::from_fn(8, |i, j| c((i + j) as f64 * 0.1, (i as f64 - j as f64) * 0.2));
    let h = a.add(&a.adjoint());
    assert!(h.is_hermitian(1e-14));
    let sys = eig_general(&h, DEFAULT_TOL).unwrap();
    assert!(sys.eigenvalues.iter().all(|l| l.im.abs() <= DEFAULT_TOL));
}

#[test]
fn degenerate_diagonal_keeps_a_full_basis() {
    let m = ComplexMatrix::diag(&[c(1.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]);
    let sys = eig_general(&m, DEFAULT_TOL).unwrap();
    assert!(sys.condition < 10.0);
    assert!(sys.reconstruct().sub(&m).frobenius_norm() < 1e-12);
}

#[test]
fn jordan_block_is_near_defective() {
    let m = ComplexMatrix::from_rows(&[vec![c(2.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(2.0, 0.0)]]).unwrap();
    match eig_general(&m, DEFAULT_TOL) {
        Err(NumericsError::NearDefective { .. }) | Err(NumericsError::Singular) => {}
        other => panic!("expected a defectiveness error, got {other:?}"),
    }
}

#[test]
fn non_finite_input_is_rejected() {
    assert!(ComplexMatrix::from_rows(&[vec![c(f64::NAN, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(2.0, 0.0)]]).is_err());
    let m = ComplexMatrix::from_fn(2, |i, j| if i == j { c(f64::INFINITY, 0.0) } else { c(1.0, 0.0) });
    assert_eq!(decompose(&m, DEFAULT_TOL).unwrap_err(), NumericsError::NonFinite);
}

#[test]
fn ragged_rows_are_rejected() {
    assert!(ComplexMatrix::<f64>::from_rows(&[vec![c(1.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]).is_err());
}

#[test]
fn kron_chain_is_associative_and_sized() {
    let (x, y, z) = (pauli::sigma_x::<f64>(), pauli::sigma_y::<f64>(), pauli::sigma_z::<f64>());
    let left = x.kron(&y).kron(&z);
    let right = x.kron(&y.kron(&z));
    assert_eq!(left, right);
    assert_eq!(kron_chain(&[x.clone(), y, z]).unwrap(), left);
    assert_eq!(left.dim(), 8);
    assert!(kron_chain::<f64>(&[]).is_err());
}

#[test]
fn pauli_algebra() {
    let (x, y, z) = (pauli::sigma_x::<f64>(), pauli::sigma_y::<f64>(), pauli::sigma_z::<f64>());
    let i2 = pauli::identity::<f64>();
    assert_eq!(x.matmul(&x), i2);
    assert_eq!(y.matmul(&y), i2);
    // σˣσʸ = iσᶻ.
    assert_eq!(x.matmul(&y), z.scale(c(0.0, 1.0)));
}

#[test]
fn invert_roundtrip_and_singular() {
    let m = ComplexMatrix::from_rows(&[vec![c(2.0, 1.0), c(0.5, 0.0)], vec![c(-1.0, 0.0), c(0.0, 3.0)]]).unwrap();
    let inv = invert(&m).unwrap();
    assert!(m.matmul(&inv).sub(&ComplexMatrix::identity(2)).frobenius_norm() < 1e-14);
    let s = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(4.0, 0.0)]]).unwrap();
    assert_eq!(invert(&s).unwrap_err(), NumericsError::Singular);
}

#[test]
fn biorthonormalize_is_idempotent() {
    let m = ComplexMatrix::from_fn(4, |i, j| c(((i * 7 + j * 3) % 5) as f64 - 2.0, ((i + 2 * j) % 3) as f64 * 0.5 - 0.5));
    let sys = eig_general(&m, DEFAULT_TOL).unwrap();
    let again = biorthonormalize(&sys, DEFAULT_TOL).unwrap();
    assert!(again.biortho_residual < 1e-10);
    for k in 0..4 {
        assert!((again.eigenvalues[k] - sys.eigenvalues[k]).norm() < 1e-14);
    }
}

#[test]
fn f32_decomposition() {
    let m = ComplexMatrix::<f32>::from_rows(&[
        vec![Complex::new(0.0, 0.4), Complex::new(1.0, 0.0)],
        vec![Complex::new(1.0, 0.0), Complex::new(0.0, -0.4)],
    ])
    .unwrap();
    let sys = eig_general(&m, 1e-5).unwrap();
    let expect = (1.0f32 - 0.16).sqrt();
    let mut re: Vec<f32> = sys.eigenvalues.iter().map(|l| l.re).collect();
    re.sort_by(f32::total_cmp);
    assert!((re[0] + expect).abs() < 1e-5 && (re[1] - expect).abs() < 1e-5);
}
