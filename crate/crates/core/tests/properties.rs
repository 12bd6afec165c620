use proptest::prelude::*;
use spinlab_core::analysis::polarization;
use spinlab_core::dynamics::{pump_from, pump_steady_state, PumpParams};
use spinlab_core::spectra::{eigh, odmr_lines, FrequencyGrid, OdmrOptions};
use spinlab_core::spinops::kron;
use spinlab_core::{build_hamiltonian, default_params, HyperfineTensor, Manifold, NuclearDistribution, Operator, C64};

fn op3() -> impl Strategy<Value = Operator> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9)
        .prop_map(|v| Operator::from_vec(3, v.into_iter().map(|(re, im)| C64::new(re, im)).collect()).unwrap())
}

fn hermitian(dim: usize) -> impl Strategy<Value = Operator> {
    prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), dim * dim).prop_map(move |v| {
        let m = Operator::from_vec(dim, v.into_iter().map(|(re, im)| C64::new(re, im)).collect()).unwrap();
        let mut h = m.clone();
        h.add_scaled(&m.adjoint(), 1.0);
        h
    })
}

fn weights() -> impl Strategy<Value = [f64; 7]> {
    prop::array::uniform7(0.0f64..1.0).prop_filter("nonzero", |w| w.iter().sum::<f64>() > 1e-3)
}

fn distribution() -> impl Strategy<Value = NuclearDistribution> {
    weights().prop_map(|w| NuclearDistribution::from_weights(w).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn kron_is_associative(a in op3(), b in op3(), c in op3()) {
        let left = kron(&kron(&a, &b), &c);
        let right = kron(&a, &kron(&b, &c));
        prop_assert!(left.max_abs_diff(&right) <= 1e-12);
    }

    #[test]
    fn kron_mixed_product(a in op3(), b in op3(), c in op3(), d in op3()) {
        let lhs = kron(&a, &b).matmul(&kron(&c, &d));
        let rhs = kron(&a.matmul(&c), &b.matmul(&d));
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn eigh_reconstructs(h in hermitian(12)) {
        let es = eigh(&h).unwrap();
        prop_assert!(es.reconstruction_residual(&h) <= 1e-8 * h.max_abs());
        prop_assert!(es.orthonormality_defect() <= 1e-9);
        prop_assert!(es.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn polarization_is_scale_invariant(w in weights(), s in 1e-3f64..1e3) {
        let p = polarization(&w).unwrap();
        let q = polarization(&w.map(|x| x * s)).unwrap();
        prop_assert!((p - q).abs() <= 1e-12);
        prop_assert!((-1.0..=1.0).contains(&p));
    }

    #[test]
    fn hamiltonian_is_traceless(
        d in 100.0f64..5000.0,
        b in 0.0f64..300.0,
        a_t in -100.0f64..100.0,
        a_z in -100.0f64..100.0,
        q in -5.0f64..5.0,
    ) {
        let mut p = default_params(Manifold::Ground).with_field(b);
        p.d_zfs = d;
        p.hyperfine = [HyperfineTensor::axial(a_t, a_z); 3];
        p.quadrupole = [q; 3];
        let h = build_hamiltonian(&p).unwrap();
        prop_assert!(h.trace().norm() <= 1e-6);
        prop_assert!(h.is_hermitian());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn odmr_spectrum_is_linear_in_rho(r1 in distribution(), r2 in distribution(), alpha in 0.0f64..1.0) {
        let lines = odmr_lines(&default_params(Manifold::Ground).with_field(20.0)).unwrap();
        let grid = FrequencyGrid::from_range(2700.0, 3100.0, 1.0).unwrap();
        let opts = OdmrOptions::default();
        let s1 = lines.spectrum(&r1, 10.0, grid, &opts).unwrap();
        let s2 = lines.spectrum(&r2, 10.0, grid, &opts).unwrap();
        let mix: [f64; 7] = core::array::from_fn(|k| alpha * r1.as_array()[k] + (1.0 - alpha) * r2.as_array()[k]);
        let sm = lines.spectrum(&NuclearDistribution::new(mix).unwrap(), 10.0, grid, &opts).unwrap();
        for i in 0..grid.len() {
            let want = alpha * s1.intensity[i] + (1.0 - alpha) * s2.intensity[i];
            prop_assert!((sm.intensity[i] - want).abs() <= 1e-9);
        }
    }

    #[test]
    fn pump_fixed_point_ignores_start(
        starts in prop::collection::vec(distribution(), 5),
        b in 20.0f64..110.0,
        depol in 0.01f64..0.5,
    ) {
        let p = PumpParams::new(1.0, depol, b);
        let reference = pump_steady_state(&p).unwrap();
        prop_assert!(reference.converged);
        for s in starts {
            let out = pump_from(&p, s).unwrap();
            prop_assert!(out.converged);
            prop_assert!(out.distribution.l1_distance(&reference.distribution) <= 1e-8);
            let total: f64 = out.distribution.as_array().iter().sum();
            prop_assert!((total - 1.0).abs() <= 1e-9);
            prop_assert!(out.distribution.as_array().iter().all(|&x| x >= 0.0));
        }
    }
}
