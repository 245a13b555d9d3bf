use std::sync::Arc;

use proptest::prelude::*;

use sqvar_core::certify::{
    bc_form, certify_bc_1c, certify_bc_2nc, certify_dss, certify_dss_sym, certify_nsdp,
    certify_ssv, check_eigenvalue_condition, dss_form, dss_gradient, Formulation, Order,
};
use sqvar_core::io::{to_canonical_json, Point};
use sqvar_core::lift::{construct_delta, construct_delta_sym, factor_any, lemma_t2_gap};
use sqvar_core::matcore::{
    pinv, psd_sqrt, random, smat, svec, sym_eig, sym_product, Factor, Mat, Multiplier, SymMatrix,
    Vector,
};
use sqvar_core::nucnorm::{make_nnm_bc, NnmProblem};
use sqvar_core::problems::{
    make_example_2_1, make_planted_nsdp, make_quadratic_square, BcProblem, FrobeniusDistance,
    NsdpProblem,
};
use sqvar_core::solve::{solve_dss, solve_ssv_auglag, SolveOptions, Termination};
use sqvar_core::Tolerances;

fn dims() -> impl Strategy<Value = (usize, u64)> {
    (1usize..=8, any::<u64>())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn eig_reconstructs((d, seed) in dims()) {
        let mut rng = random::rng(seed);
        let x = random::symmetric(d, &mut rng).scale(10.0);
        let eig = sym_eig(&x, 1e-12).unwrap();
        let err = (eig.reconstruct().as_mat() - x.as_mat()).norm();
        prop_assert!(err <= 1e-8 * (1.0 + x.fro_norm()));
        let orth = (eig.u.transpose() * &eig.u - Mat::identity(d, d)).norm();
        prop_assert!(orth <= 1e-10 * d as f64);
        prop_assert!(eig.sigma.as_slice().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn pinv_penrose_identities((d, seed) in (1usize..=10, any::<u64>())) {
        let mut rng = random::rng(seed);
        let r = 1 + (seed as usize) % d;
        let x = random::psd_of_rank(d, r, &mut rng);
        let s = random::symmetric(d, &mut rng);
        // rank-deficient indefinite matrix with the same range
        let v = sym_eig(&x, 1e-9).unwrap().range_basis();
        let x = SymMatrix::symmetrize(&v * (v.transpose() * s.as_mat() * &v + Mat::identity(r, r) * 3.0) * v.transpose());
        let p = pinv(&x, 1e-9).unwrap();
        let (a, b) = (x.as_mat(), p.as_mat());
        let tol = 1e-8 * (1.0 + x.fro_norm()) * (1.0 + p.fro_norm()).powi(2);
        prop_assert!((a * b * a - a).norm() <= tol);
        prop_assert!((b * a * b - b).norm() <= tol);
        prop_assert!(((a * b) - (a * b).transpose()).norm() <= tol);
        prop_assert!(((b * a) - (b * a).transpose()).norm() <= tol);
    }

    #[test]
    fn sym_product_is_symmetric_and_bilinear((d, seed) in dims(), s in -3.0f64..3.0) {
        let mut rng = random::rng(seed);
        let a = random::gaussian(d, d, &mut rng);
        let b = random::gaussian(d, d, &mut rng);
        let c = random::gaussian(d, d, &mut rng);
        let ab = sym_product(&a, &b).unwrap();
        let ba = sym_product(&b, &a).unwrap();
        prop_assert!((ab.as_mat() - ba.as_mat()).norm() <= 1e-12 * (1.0 + ab.fro_norm()));
        let lhs = sym_product(&(&a * s + &c), &b).unwrap();
        let rhs = ab.as_mat() * s + sym_product(&c, &b).unwrap().as_mat();
        prop_assert!((lhs.as_mat() - rhs).norm() <= 1e-11 * (1.0 + lhs.fro_norm()));
    }

    #[test]
    fn svec_is_an_isometry((d, seed) in dims()) {
        let mut rng = random::rng(seed);
        let a = random::symmetric(d, &mut rng);
        let b = random::symmetric(d, &mut rng);
        let back = smat(&svec(&a)).unwrap();
        prop_assert!((back.as_mat() - a.as_mat()).amax() <= 4.0 * f64::EPSILON * (1.0 + a.amax()));
        prop_assert!((svec(&a).dot(&svec(&b)) - a.inner(&b)).abs() <= 1e-12 * (1.0 + a.fro_norm() * b.fro_norm()));
    }

    /// The quadratic form at a witness, evaluated from the problem callbacks,
    /// reproduces the reported minimum eigenvalue.
    #[test]
    fn refutation_witnesses_reevaluate((d, seed) in (2usize..=5, any::<u64>())) {
        let mut rng = random::rng(seed);
        // B = −2A makes every orthogonal F stationary, and A indefinite makes
        // the curvature negative somewhere
        let spectrum: Vec<f64> = (0..d).map(|i| if i == 0 { -1.0 } else { 0.5 + i as f64 }).collect();
        let a = SymMatrix::from_diagonal(&spectrum).congruence(&random::orthogonal(d, &mut rng));
        let p = make_quadratic_square(a.clone(), a.scale(-2.0)).unwrap();
        let tols = Tolerances::default();
        let x = SymMatrix::identity(d);
        let rep = certify_bc_2nc(&p, &x, &tols).unwrap();
        prop_assert!(rep.refuted_second_order());
        let w = SymMatrix::symmetrize(rep.witness().unwrap().direction_mat().unwrap());
        let value = bc_form(&p, &x, &w, tols.rank).unwrap();
        let expected = rep.lambda_min().unwrap() * w.fro_norm().powi(2);
        prop_assert!((value - expected).abs() <= 1e-8 * (1.0 + value.abs()));

        let f = Factor::new(random::orthogonal(d, &mut rng)).unwrap();
        let rep = certify_dss(&p, &f, Order::Second, &tols).unwrap();
        prop_assert!(rep.refuted_second_order());
        let delta = rep.witness().unwrap().direction_mat().unwrap();
        let value = dss_form(&p, f.as_mat(), &delta);
        let expected = rep.lambda_min().unwrap() * delta.norm_squared();
        prop_assert!((value - expected).abs() <= 1e-8 * (1.0 + value.abs()));
    }

    #[test]
    fn factor_gradient_matches_composition((d, seed) in dims()) {
        let mut rng = random::rng(seed);
        let k = 1 + (seed as usize) % d;
        let p = make_quadratic_square(random::symmetric(d, &mut rng), random::symmetric(d, &mut rng)).unwrap();
        let f = random::gaussian(d, k, &mut rng);
        let g = dss_gradient(&p, &f);
        let dir = random::unit(d, k, &mut rng);
        let step = 1e-5;
        let at = |t: f64| {
            let m = &f + &dir * t;
            p.value(&SymMatrix::symmetrize(&m * m.transpose()))
        };
        let fd = (at(step) - at(-step)) / (2.0 * step);
        let an = g.dot(&dir);
        prop_assert!((fd - an).abs() <= 1e-5 * 1f64.max(fd.abs()).max(an.abs()));
    }

    #[test]
    fn nnm_factored_objective_identity((d1, d2, seed) in (1usize..6, 1usize..6, any::<u64>())) {
        let mut rng = random::rng(seed);
        let target = random::gaussian(d1, d2, &mut rng);
        let p = NnmProblem::new(Arc::new(FrobeniusDistance { target }), 0.7).unwrap();
        let bc = make_nnm_bc(&p).unwrap();
        let k = d1 + d2;
        let y = random::gaussian(d1, k, &mut rng);
        let z = random::gaussian(d2, k, &mut rng);
        let mut f = Mat::zeros(k, k);
        f.view_mut((0, 0), (d1, k)).copy_from(&y);
        f.view_mut((d1, 0), (d2, k)).copy_from(&z);
        let lhs = bc.factored_value(&y, &z);
        let rhs = bc.value(&Factor::new(f).unwrap().gram());
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    /// Point files written in canonical form read back bit for bit.
    #[test]
    fn canonical_json_round_trips_exactly(bits in proptest::collection::vec(any::<u64>(), 1..12)) {
        let vals: Vec<f64> = bits.iter().map(|b| f64::from_bits(*b)).filter(|v| v.is_finite()).collect();
        prop_assume!(!vals.is_empty());
        let p = Point::Dss { f: Factor::new(Mat::from_column_slice(vals.len(), 1, &vals)).unwrap() };
        let text = to_canonical_json(&p.to_raw()).unwrap();
        let Point::Dss { f } = Point::parse(&text, Formulation::Dss).unwrap() else { unreachable!() };
        for (a, b) in f.as_mat().iter().zip(&vals) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn construct_delta_reproduces_w((d, seed) in dims()) {
        let mut rng = random::rng(seed);
        let k = 1 + (seed as usize) % d;
        let r = 1 + (seed as usize / 7) % k;
        let f = Factor::new(random::gaussian(d, r, &mut rng) * random::gaussian(r, k, &mut rng)).unwrap();
        // the rank of F must be unambiguous at the default threshold
        let sv = f.as_mat().clone().svd(false, false).singular_values;
        prop_assume!(sv[r - 1] >= 1e-3 * sv[0].max(1.0));
        let d0 = random::gaussian(d, k, &mut rng);
        let fd = f.as_mat() * d0.transpose();
        let w = SymMatrix::symmetrize(&fd + fd.transpose());
        let delta = construct_delta(&f, &w, &Tolerances::default()).unwrap();
        let fd = f.as_mat() * delta.transpose();
        prop_assert!((&fd + fd.transpose() - w.as_mat()).norm() <= 1e-8 * (1.0 + w.fro_norm()) * (1.0 + f.norm()));
    }

    #[test]
    fn construct_delta_sym_is_exactly_symmetric((d, seed) in dims()) {
        let mut rng = random::rng(seed);
        let q = random::orthogonal(d, &mut rng);
        let sig: Vec<f64> = (0..d).map(|i| (i as f64 + 1.0) * if i % 2 == 0 { 1.0 } else { -0.7 }).collect();
        let f = SymMatrix::from_diagonal(&sig).congruence(&q);
        let d0 = random::symmetric(d, &mut rng);
        let fd = f.as_mat() * d0.as_mat();
        let w = SymMatrix::symmetrize(&fd + fd.transpose());
        let delta = construct_delta_sym(&f, &w, &Tolerances::default()).unwrap();
        prop_assert_eq!(delta.as_mat(), &delta.transpose());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// The objective depends on F only through FFᵀ.
    #[test]
    fn solver_is_rotation_indifferent((d, seed) in (2usize..=5, any::<u64>())) {
        let mut rng = random::rng(seed);
        let p = make_quadratic_square(random::psd_of_rank(d, d, &mut rng), random::symmetric(d, &mut rng)).unwrap();
        let f0 = random::gaussian(d, d, &mut rng);
        let q = random::orthogonal(d, &mut rng);
        let opts = SolveOptions::default().with_seed(seed);
        let (a, ta) = solve_dss(&p, &Factor::new(f0.clone()).unwrap(), &opts).unwrap();
        let (b, tb) = solve_dss(&p, &Factor::new(f0 * q).unwrap(), &opts).unwrap();
        prop_assert_eq!(ta.termination, Termination::SecondOrder);
        prop_assert_eq!(tb.termination, Termination::SecondOrder);
        let (va, vb) = (p.value(&a.gram()), p.value(&b.gram()));
        prop_assert!((va - vb).abs() <= 1e-6 * (1.0 + va.abs()), "{va} vs {vb}");
    }

    /// Square roots of second-order points of the cone problem are
    /// second-order points of the symmetric factorization; the converse holds
    /// at first order, and at second order under the eigenvalue condition.
    #[test]
    fn symmetric_root_one_way((d, seed) in (2usize..=4, any::<u64>())) {
        let mut rng = random::rng(seed);
        let p = make_quadratic_square(random::psd_of_rank(d, d, &mut rng), random::symmetric(d, &mut rng).scale(3.0)).unwrap();
        let tols = Tolerances::default();
        // complementarity of FFᵀ is only bounded by ‖∇φ‖·‖F‖, so solve tighter
        // than the certificate
        let opts = SolveOptions::default().with_seed(seed).with_grad_tol(1e-13);
        let (f, trace) = solve_dss(&p, &Factor::new(random::gaussian(d, d, &mut rng)).unwrap(), &opts).unwrap();
        prop_assume!(trace.termination == Termination::SecondOrder);
        let x = f.gram();
        prop_assert!(certify_bc_2nc(&p, &x, &tols.with_curv(1e-6)).unwrap().pass);
        let root = psd_sqrt(&x, tols.rank).unwrap();
        prop_assert!(certify_dss_sym(&p, &root, Order::Second, &tols.with_curv(1e-6)).unwrap().pass);

        // a signed root is a stationary point of the symmetric factorization too
        let eig = sym_eig(&root, tols.rank).unwrap();
        let signed = eig.map(|s| if s.abs() > 1e-6 { -s } else { s });
        let x2 = SymMatrix::symmetrize(signed.as_mat() * signed.as_mat());
        let sym = certify_dss_sym(&p, &signed, Order::Second, &tols.with_curv(1e-6)).unwrap();
        if sym.pass {
            prop_assert!(certify_bc_1c(&p, &x2, &tols.with_feas(1e-6)).unwrap().pass);
            if check_eigenvalue_condition(&signed, 1e-6).unwrap().pass {
                prop_assert!(certify_bc_2nc(&p, &x2, &tols.with_curv(1e-6).with_feas(1e-6)).unwrap().pass);
            }
        }
    }

    /// Augmented-Lagrangian output on planted instances certifies for both the
    /// slack formulation and the constrained problem.
    #[test]
    fn planted_slack_round_trip(seed in any::<u64>()) {
        let pl = make_planted_nsdp(3, 4, 1 + (seed % 3) as usize, seed).unwrap();
        let sol = solve_ssv_auglag(&pl.problem, &Vector::zeros(3), &Factor::new(Mat::identity(4, 4)).unwrap(), &SolveOptions::default()).unwrap();
        let viol = (pl.problem.c(&sol.x).as_mat() - sol.factor.gram().as_mat()).norm();
        prop_assert!(viol <= 1e-6, "dual residual {viol:e}");
        let tols = Tolerances::default().with_rank(1e-6).with_feas(1e-6);
        prop_assert!(certify_ssv(&pl.problem, &sol.x, &sol.factor, &sol.multiplier, Order::Second, &tols).unwrap().pass);
        prop_assert!(certify_nsdp(&pl.problem, &sol.x, &sol.multiplier, Order::Second, &tols).unwrap().pass);
        // x̄ is only pinned to second order on degenerate faces, so compare values
        let (fs, fp) = (pl.problem.f(&sol.x), pl.problem.f(&pl.x));
        prop_assert!((fs - fp).abs() <= 1e-6 * (1.0 + fp.abs()), "{fs} vs {fp}");
    }

    /// Gap inequality on hypothesis-satisfying triples, and its equality case
    /// for the constructed direction.
    #[test]
    fn gap_is_nonnegative((d, seed) in dims()) {
        let mut rng = random::rng(seed);
        let k = 1 + (seed as usize) % d;
        let f = Factor::new(random::gaussian(d, k, &mut rng)).unwrap();
        let v = sym_eig(&f.gram(), 1e-9).unwrap().null_basis();
        let s = random::psd_of_rank(v.ncols(), v.ncols(), &mut rng).congruence(&v);
        let delta = Factor::new(random::gaussian(d, k, &mut rng)).unwrap();
        let g = lemma_t2_gap(&s, &f, &delta, 1e-9).unwrap();
        let xp = pinv(&f.gram(), 1e-9).unwrap();
        let fd = f.as_mat() * delta.transpose();
        let scale = 1.0 + s.fro_norm() * (delta.norm_squared() + (&fd + fd.transpose()).norm_squared() * xp.fro_norm());
        prop_assert!(g.gap >= -1e-10 * scale);
    }
}

#[test]
fn factor_any_of_low_rank_solutions_certifies() {
    let mut rng = random::rng(11);
    for d in 2..=5 {
        let x = random::psd_of_rank(d, 1, &mut rng);
        let p = make_quadratic_square(SymMatrix::identity(d), x.scale(-2.0)).unwrap();
        for _ in 0..5 {
            let q = random::orthogonal(d, &mut rng);
            let f = factor_any(&x, d, Some(&q), 1e-9).unwrap();
            assert!(
                certify_dss(&p, &f, Order::Second, &Tolerances::default())
                    .unwrap()
                    .pass
            );
        }
    }
}

#[test]
fn example_2_1_residual_is_a_corner_spike() {
    for d in 3..=8 {
        for k in 1..d {
            let ex = make_example_2_1(d, k).unwrap();
            let x = ex.f_k.gram();
            let back = ex.problem.adjoint(&ex.problem.residual(&x));
            let mut expected = Mat::zeros(d, d);
            expected[(d - 1, d - 1)] = -ex.eps * ex.eps * (d - 1) as f64 / 3.0;
            assert!((back.as_mat() - expected).norm() <= 1e-10, "d={d} k={k}");
        }
    }
}

#[test]
fn planted_multiplier_pairs_are_kkt() {
    for seed in 0..5 {
        let pl = make_planted_nsdp(4, 5, 2, seed).unwrap();
        let rep = certify_nsdp(
            &pl.problem,
            &pl.x,
            &Multiplier(pl.lambda.clone()),
            Order::Second,
            &Tolerances::default(),
        )
        .unwrap();
        assert!(rep.pass, "{rep:?}");
    }
}
