use approx::assert_abs_diff_eq;
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use bergman_core::algebraic::{self, DegreeBudget, KernelFamily, DEFAULT_TOL};
use bergman_core::asymptotics::{fit_blowup_exponent, fit_fractional_powers, geometric_grid, sample_along_ray, BoundaryRay};
use bergman_core::ellipsoid::{self, AffineMap, ConvexBody, EllipsoidParams};
use bergman_core::kernel::{DiagonalPoint, EggDomain};

fn sorted_params(mut a: Vec<f64>) -> EllipsoidParams {
    a.sort_by(f64::total_cmp);
    EllipsoidParams::new(a).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn normalization_recovers_parameters(a in prop::collection::vec(0.0f64..0.49, 1..4), seed in any::<u64>(), lambda in 0.3f64..3.0) {
        let params = sorted_params(a);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inv = AffineMap::random_general(params.dim(), &mut rng).inverse().unwrap();
        let q = params.defining_poly().compose_affine(&inv.m, &inv.xi).scaled(lambda);
        let nrm = ellipsoid::normalize_ellipsoid(&q).unwrap();
        for (x, y) in nrm.params.a().iter().zip(params.a()) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-8);
        }
        prop_assert!(nrm.residual < 1e-9);
        // Negating the input only flips the sign flag.
        let neg = ellipsoid::normalize_ellipsoid(&q.negated()).unwrap();
        prop_assert!(neg.sign_flipped && !nrm.sign_flipped);
        assert_abs_diff_eq!(neg.params.a()[params.dim() - 1], params.a()[params.dim() - 1], epsilon = 1e-8);
    }

    #[test]
    fn chords_and_distance_of_normal_ellipsoid(a in prop::collection::vec(0.0f64..0.45, 1..4)) {
        let params = sorted_params(a);
        let n = params.dim();
        let an = params.a()[n - 1];
        let body = ConvexBody::ellipsoid(params.clone());
        for k in 0..n {
            let ak = params.a()[k];
            let mut u = DVector::zeros(2 * n);
            u[2 * k] = 1.0;
            assert_abs_diff_eq!(body.longest_chord(&u).unwrap(), 2.0 / (1.0 + 2.0 * ak).sqrt(), epsilon = 1e-12);
            u[2 * k] = 0.0;
            u[2 * k + 1] = 1.0;
            assert_abs_diff_eq!(body.longest_chord(&u).unwrap(), 2.0 / (1.0 - 2.0 * ak).sqrt(), epsilon = 1e-12);
        }
        // Semi-axes 1/sqrt(1 +- 2A_j); the farthest is along y_n.
        let exact = 1.0 / (1.0 - 2.0 * an).sqrt() - 1.0;
        let est = ellipsoid::hausdorff_to_ball(&body, 500, 50).unwrap();
        prop_assert!(est.epsilon <= exact + 1e-12);
        prop_assert!(exact - est.epsilon < 1e-9, "{} vs {}", est.epsilon, exact);
    }

    #[test]
    fn support_function_is_sublinear(a in prop::collection::vec(0.0f64..0.45, 2..3), seed in any::<u64>(), c in 0.1f64..5.0) {
        let params = sorted_params(a);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let map = AffineMap::random_near_identity(params.dim(), 0.2, 0.1, &mut rng);
        let body = ConvexBody::new(params, map).unwrap();
        let dirs = ellipsoid::sphere_directions(4, 40);
        for w in dirs.windows(2) {
            let (u, v) = (&w[0], &w[1]);
            prop_assert!(body.support(&(u + v)) <= body.support(u) + body.support(v) + 1e-12);
            assert_abs_diff_eq!(body.support(&(u * c)), c * body.support(u), epsilon = 1e-12);
            prop_assert!(body.contains(body.center()));
        }
    }

    #[test]
    fn series_matches_closed_form(s in 1u32..6, x in 0.0f64..1.0, frac in 0.0f64..0.85) {
        let dom = EggDomain::new(s as f64).unwrap();
        // Keep the point inside with 1 - x - y^s >= 0.15 (1 - x).
        let y = ((1.0 - x) * frac).powf(1.0 / s as f64);
        prop_assume!(1.0 - x - y.powi(s as i32) > 0.05);
        let closed = dom.kernel_closed_reduced(x, y).unwrap();
        let series = dom.kernel_series_reduced(x, y, 1e-12).unwrap();
        prop_assert!(closed > 0.0);
        prop_assert!((series.value - closed).abs() <= 1e-8 * closed, "{} vs {}", series.value, closed);
    }

    #[test]
    fn exponent_is_scale_free(s in 1u32..6, lambda in 1e-3f64..1e3) {
        let dom = EggDomain::new(s as f64).unwrap();
        let ray = BoundaryRay::new(&dom, DiagonalPoint::real(1.0, 0.0), [-1.0, 0.0, 0.0, 0.0], 1e-4, 1e-1).unwrap();
        let base = sample_along_ray(&dom, &ray, 32).unwrap();
        let mut scaled = base.clone();
        scaled.k_values.iter_mut().for_each(|k| *k *= lambda);
        let (f, g) = (fit_blowup_exponent(&base).unwrap(), fit_blowup_exponent(&scaled).unwrap());
        assert_abs_diff_eq!(f.slope, g.slope, epsilon = 1e-9);
        assert_abs_diff_eq!(g.c0_estimate / f.c0_estimate, lambda, epsilon = 1e-6 * lambda);
        prop_assert!(base.is_monotone());
    }

    #[test]
    fn fractional_power_coefficients_recovered(r in 2u32..6, coeffs in prop::collection::vec(-3.0f64..3.0, 6)) {
        let t = geometric_grid(1e-4, 1e-1, 48);
        let big_j = 5usize;
        let g: Vec<f64> = t
            .iter()
            .map(|&t| coeffs.iter().enumerate().map(|(j, c)| c * t.powf(j as f64 / r as f64)).sum())
            .collect();
        let fit = fit_fractional_powers(&t, &g, r, big_j, &[]).unwrap();
        for (a, c) in fit.powers.iter().zip(&coeffs) {
            assert_abs_diff_eq!(a, c, epsilon = 1e-4);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn detected_degree_is_scale_invariant(lambda in prop::sample::select(vec![0.5, 2.0, 10.0]), seed in 0u64..1000, s in 1u32..4) {
        let fam = KernelFamily::EggReduced { s };
        let d = algebraic::detect_family(fam, DegreeBudget::default(), DEFAULT_TOL, seed, lambda)
            .unwrap()
            .detection
            .candidate()
            .map(|c| c.d_y);
        prop_assert_eq!(d, Some(s as usize));
    }
}
