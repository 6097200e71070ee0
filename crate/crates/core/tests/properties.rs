use num_complex::Complex;
use proptest::prelude::*;
use psh_spectra::biortho::{spectrum, Z2};
use psh_spectra::cli::{fmt_f, CommandKind, Format, RunConfig};
use psh_spectra::model::{build_hamiltonian, build_parity, psh_residual, ChainSpec, NormalizedPoint};
use psh_spectra::numerics::{eig_general, ComplexMatrix, DEFAULT_TOL};

fn antisymmetric(half: Vec<f64>) -> Vec<f64> {
    let mut out = half.clone();
    out.extend(half.iter().rev().map(|g| -g));
    out
}

fn profile_strategy() -> impl Strategy<Value = (usize, Vec<f64>)> {
    prop_oneof![Just(2usize), Just(4), Just(6)]
        .prop_flat_map(|n| (Just(n), prop::collection::vec(-1.0f64..1.0, n / 2)))
        .prop_map(|(n, half)| (n, antisymmetric(half)))
}

fn matrix_strategy(dim: usize) -> impl Strategy<Value = ComplexMatrix<f64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim)
        .prop_map(move |v| ComplexMatrix::from_fn(dim, |i, j| Complex::new(v[i * dim + j].0, v[i * dim + j].1)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn antisymmetric_profiles_are_pseudo_hermitian(
        (n, profile) in profile_strategy(),
        delta in 0.05f64..2.0,
        j in -2.0f64..2.0,
    ) {
        let spec = ChainSpec::with_profile(n, delta, j, profile).unwrap();
        let h = build_hamiltonian(&spec).unwrap();
        prop_assert!(psh_residual(&h, &build_parity(n).unwrap()).unwrap() <= 1e-12);
    }

    #[test]
    fn spectrum_is_closed_under_conjugation(
        n in prop_oneof![Just(2usize), Just(4)],
        j in -0.95f64..0.95,
        g in 0.0f64..1.0,
    ) {
        let spec = ChainSpec::from_normalized(n, NormalizedPoint::new(j, g)).unwrap();
        let h = build_hamiltonian(&spec).unwrap();
        let Ok(sys) = eig_general(&h, DEFAULT_TOL) else { return Ok(()) };
        let scale = h.frobenius_norm().max(1.0);
        for l in &sys.eigenvalues {
            let best = sys.eigenvalues.iter().map(|m| (m - l.conj()).norm()).fold(f64::INFINITY, f64::min);
            // Near an EP the pair splits as the square root of the rounding error.
            prop_assert!(best <= 1e-6 * scale, "{l} unmatched, gap {best:e}");
        }
    }

    #[test]
    fn undefined_indices_come_in_pairs(
        j in -0.95f64..0.95,
        g in 0.0f64..0.8,
    ) {
        let spec = ChainSpec::from_normalized(4, NormalizedPoint::new(j, g)).unwrap();
        let h = build_hamiltonian(&spec).unwrap();
        if let Ok(s) = spectrum(&h, &build_parity(4).unwrap()) {
            let complex = s.levels.iter().filter(|l| !l.is_real()).count();
            prop_assert_eq!(complex % 2, 0);
            for l in s.levels.iter().filter(|l| !l.is_real()) {
                let p = l.conjugate_partner.expect("complex level is linked");
                prop_assert_eq!(s.levels[p].conjugate_partner, Some(l.index));
            }
        }
    }

    #[test]
    fn eigendecomposition_reconstructs(m in matrix_strategy(5)) {
        if let Ok(sys) = eig_general(&m, DEFAULT_TOL) {
            let err = sys.reconstruct().sub(&m).frobenius_norm();
            prop_assert!(err <= 1e-8 * sys.condition.max(1.0) * m.frobenius_norm(), "{err:e}");
            prop_assert!(sys.right_residual(&m) <= 1e-9);
        }
    }

    #[test]
    fn kron_is_associative(a in matrix_strategy(2), b in matrix_strategy(2), c in matrix_strategy(2)) {
        let l = a.kron(&b).kron(&c);
        let r = a.kron(&b.kron(&c));
        prop_assert!(l.sub(&r).frobenius_norm() <= 1e-14);
    }

    #[test]
    fn z2_is_a_group(a in any::<bool>(), b in any::<bool>()) {
        let z = |x: bool| if x { Z2::Plus } else { Z2::Minus };
        prop_assert_eq!(z(a) * z(b), z(a == b));
        prop_assert_eq!((z(a) * z(b)).value(), z(a).value() * z(b).value());
        prop_assert_eq!(z(a).flip().flip(), z(a));
        prop_assert_eq!(Z2::from_i32(z(a).value()), z(a));
    }

    #[test]
    fn formatted_floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        prop_assert_eq!(fmt_f(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn config_json_round_trips(
        n in prop_oneof![Just(2usize), Just(4), Just(6)],
        j in -0.99f64..0.99,
        g in 0.0f64..1.0,
        points in 2usize..2000,
        tol in 1e-14f64..1e-3,
        json in any::<bool>(),
    ) {
        let mut cfg = RunConfig {
            command: Some(CommandKind::Sweep),
            ..Default::default()
        };
        cfg.chain.n = n;
        cfg.chain.j_tilde = j;
        cfg.chain.gamma_tilde = g;
        cfg.grid.points = points;
        cfg.tolerances.insert("ep2".into(), tol);
        cfg.output.format = if json { Format::Json } else { Format::Csv };
        let back = RunConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert!(back.validate().is_ok());
        prop_assert_eq!(back.tol("ep2"), tol);
    }
}
