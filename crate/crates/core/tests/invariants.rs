use proptest::prelude::*;
use strain_decomp::basis::brute_force_project;
use strain_decomp::decomp::{
    decompose_antisym, decompose_full, decompose_sym, helmholtz_vector, project, project_st, SymSubspace,
};
use strain_decomp::extremal::{
    diag_component_bound_check, eigen_decompose_field, fixed_direction_value, maxmid_value, MaxMidField,
};
use strain_decomp::field::Mat;
use strain_decomp::grid::MAX_DIM;
use strain_decomp::identities::{
    check_strain_characterization, det_bound_gap, div_commutation_residual, divergence_residual, rotate_field,
    CubicRotation,
};
use strain_decomp::io::{decode, encode, FieldHeader};
use strain_decomp::ns::step_velocity;
use strain_decomp::ops::curl;
use strain_decomp::random::{random_divfree, random_field};
use strain_decomp::{AntiSymMatrix, Field, Grid, Matrix, Rep, Scalar, SymMatrix, Vector};

fn grid(d: usize, n: usize) -> Grid<f64> {
    Grid::new(d, n, 1.0).unwrap()
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=4, prop_oneof![Just(8usize), Just(12)]).prop_filter("keep d = 4 small", |&(d, n)| d < 4 || n == 8)
}

fn unit3() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(-1.0f64..1.0)
        .prop_filter("nonzero", |v| v.iter().map(|x| x * x).sum::<f64>() > 1e-2)
        .prop_map(|v| {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.map(|x| x / n)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn four_parts_are_complete_and_orthogonal((d, n) in dims(), seed in any::<u64>(), decay in 0.0f64..3.0, physical in any::<bool>()) {
        let mut m = random_field::<f64, SymMatrix>(&grid(d, n), decay, seed).unwrap();
        if physical {
            m.make_physical();
        }
        let r = decompose_sym(&m);
        prop_assert!(r.reconstruction_error < 1e-12);
        prop_assert!(r.max_cross_term() < 1e-12);
        prop_assert!(r.pythagoras_defect() < 1e-12);
        for s in SymSubspace::ALL {
            prop_assert_eq!(r.part(s).rep(), m.rep());
        }
    }

    #[test]
    fn projections_are_idempotent_linear_and_match_the_oracle((d, n) in dims(), s1 in any::<u64>(), s2 in any::<u64>(), a in -3.0f64..3.0) {
        let g = grid(d, n);
        let m = random_field::<f64, SymMatrix>(&g, 1.0, s1).unwrap();
        let q = random_field::<f64, SymMatrix>(&g, 1.0, s2).unwrap();
        let mut combo = m.scale(a);
        combo.axpy(1.0, &q).unwrap();
        for s in SymSubspace::ALL {
            let p = project(&m, s);
            prop_assert!(project(&p, s).relative_distance(&p).unwrap() < 1e-12);
            prop_assert!(brute_force_project(&m, s).relative_distance(&p).unwrap() < 1e-12);
            let mut lin = p.scale(a);
            lin.axpy(1.0, &project(&q, s)).unwrap();
            let scale = combo.norm().max(1e-300);
            prop_assert!(project(&combo, s).try_sub(&lin).unwrap().norm() / scale < 1e-12);
        }
    }

    #[test]
    fn strain_projection_lands_in_the_strain_space(seed in any::<u64>(), decay in 0.0f64..3.0) {
        let m = random_field::<f64, SymMatrix>(&grid(3, 8), decay, seed).unwrap();
        prop_assert!(check_strain_characterization(&project_st(&m)).unwrap().max() < 1e-10);
        prop_assert!(div_commutation_residual(&m).unwrap() < 1e-10);
    }

    #[test]
    fn rotations_commute_with_the_strain_projection(seed in any::<u64>(), k in 0usize..24) {
        let m = random_field::<f64, SymMatrix>(&grid(3, 8), 1.0, seed).unwrap();
        let q = CubicRotation::all()[k];
        let lhs = project_st(&rotate_field(&m, &q).unwrap());
        let rhs = rotate_field(&project_st(&m), &q).unwrap();
        prop_assert!(lhs.relative_distance(&rhs).unwrap() < 1e-10);
        prop_assert!((rotate_field(&m, &q).unwrap().norm_sq() - m.norm_sq()).abs() < 1e-12 * m.norm_sq());
    }

    #[test]
    fn antisymmetric_and_full_splits_account_for_the_input((d, n) in dims(), seed in any::<u64>()) {
        let g = grid(d, n);
        let a = random_field::<f64, AntiSymMatrix>(&g, 1.0, seed).unwrap();
        let s = decompose_antisym(&a);
        prop_assert!(s.vort.try_add(&s.divfree).unwrap().relative_distance(&a).unwrap() < 1e-12);
        prop_assert!(s.vort.inner(&s.divfree).unwrap().abs() < 1e-12 * a.norm_sq());

        let m = random_field::<f64, Matrix>(&g, 1.0, seed).unwrap();
        let parts = decompose_full(&m).parts().unwrap();
        let mut sum = Field::<f64, Matrix>::zeros(&g, m.rep());
        for p in &parts {
            sum.axpy(1.0, p).unwrap();
        }
        prop_assert!(sum.relative_distance(&m).unwrap() < 1e-12);
    }

    #[test]
    fn helmholtz_parts_are_divergence_and_curl_free(seed in any::<u64>()) {
        let u = random_field::<f64, Vector>(&grid(3, 8), 1.0, seed).unwrap();
        let h = helmholtz_vector(&u);
        prop_assert!(divergence_residual(&h.df) < 1e-12);
        prop_assert!(curl(&h.gr).unwrap().norm() < 1e-12 * u.norm() * 64.0);
    }

    #[test]
    fn fixed_direction_value_is_at_most_three_quarters(seed in any::<u64>(), decay in 0.0f64..3.0, v in unit3()) {
        let lam = random_field::<f64, Scalar>(&grid(3, 8), decay, seed).unwrap();
        let value = fixed_direction_value(&lam, &v).unwrap();
        prop_assert!((0.0..=0.75 + 1e-10).contains(&value), "{}", value);
        let mm = MaxMidField::with_constant_direction(&lam, &v).unwrap();
        prop_assert!((maxmid_value(&mm).unwrap() - value).abs() < 1e-10);
    }

    #[test]
    fn diagonal_component_ratio_is_at_most_one_half(seed in any::<u64>(), v in unit3()) {
        let s = project_st(&random_field::<f64, SymMatrix>(&grid(3, 8), 1.0, seed).unwrap());
        let r = diag_component_bound_check(&s, &v).unwrap();
        prop_assert!((0.0..=0.5 + 1e-10).contains(&r), "{}", r);
    }

    #[test]
    fn pointwise_eigenframes_reconstruct_the_field(seed in any::<u64>()) {
        let s = random_field::<f64, SymMatrix>(&grid(3, 8), 0.5, seed).unwrap();
        let e = eigen_decompose_field(&s).unwrap();
        prop_assert!(e.reconstruction_error(&s) < 1e-10);
        let (l1, l2, l3) = (e.lam1.real_component(0), e.lam2.real_component(0), e.lam3.real_component(0));
        for i in 0..l1.len() {
            prop_assert!(l1[i] <= l2[i] && l2[i] <= l3[i]);
        }
    }

    #[test]
    fn field_files_round_trip_bitwise((d, n) in dims(), seed in any::<u64>(), physical in any::<bool>()) {
        let mut m = random_field::<f64, SymMatrix>(&grid(d, n), 1.0, seed).unwrap();
        if physical {
            m.make_physical();
        }
        let header = FieldHeader::for_field(&m).with_seed(Some(seed));
        let (back, h) = decode::<f64, SymMatrix>(&encode(&m, &header).unwrap()).unwrap();
        prop_assert_eq!(h, header);
        prop_assert_eq!(back.rep(), m.rep());
        prop_assert!(back.data().iter().zip(m.data()).all(|(a, b)| a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()));
    }

    #[test]
    fn random_fields_are_real_and_reproducible((d, n) in dims(), seed in any::<u64>()) {
        let g = grid(d, n);
        let a = random_field::<f64, SymMatrix>(&g, 1.0, seed).unwrap();
        let b = random_field::<f64, SymMatrix>(&g, 1.0, seed).unwrap();
        prop_assert_eq!(a.data(), b.data());
        prop_assert!(a.to_physical().max_imag_relative() < 1e-13);
        prop_assert_eq!(a.rep(), Rep::Spectral);
    }

    #[test]
    fn navier_stokes_step_keeps_divergence_free_and_dissipates(seed in any::<u64>(), nu in 0.05f64..1.0) {
        let u = random_divfree::<f64>(&grid(3, 8), 2.0, seed).unwrap();
        let peak = u.to_physical().max_abs();
        let u = u.scale(0.5 / peak);
        let next = step_velocity(&u, nu, 1e-3).unwrap();
        prop_assert!(divergence_residual(&next) < 1e-12);
        prop_assert!(next.norm_sq() <= u.norm_sq());
    }
}

fn trace_free(entries: [f64; 5]) -> Mat<f64> {
    let mut m = [[0.0; MAX_DIM]; MAX_DIM];
    let [a, b, c, d, e] = entries;
    m[0][0] = a;
    m[1][1] = b;
    m[2][2] = -a - b;
    m[0][1] = c;
    m[1][0] = c;
    m[0][2] = d;
    m[2][0] = d;
    m[1][2] = e;
    m[2][1] = e;
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn determinant_bound_holds_pointwise(entries in prop::array::uniform5(-1e3f64..1e3)) {
        let m = trace_free(entries);
        let f = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| m[i][j] * m[i][j]).sum::<f64>().sqrt();
        prop_assume!(f > 1e-6);
        prop_assert!(det_bound_gap(&m) <= 1e-12 * f * f * f);
    }
}
