use parabound::mathcore::spd::{decompose, mat_mul, orthonormal_basis_with, rel_frobenius, spectral_norm_inv_sqrt};
use parabound::mathcore::special::{duhamel_time_integral, duhamel_time_integral_by_quadrature, gamma, time_exponent};
use parabound::sharp::{c_dir, k_dir, k_max};
use parabound::solver::{evaluate_hom, solve_hom};
use parabound::verify::suite::{random_isotropic_spec, random_spec, random_unit};
use parabound::{Exponent, KernelWorkspace, ProblemSpec, QuadratureConfig, SourceFunction, SpdMatrix};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn workspace(seed: u64, n: usize) -> KernelWorkspace {
    KernelWorkspace::new(random_spec(&mut rng(seed), n)).unwrap()
}

fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![
        (1.0f64..50.0).prop_map(|p| Exponent::new(p).unwrap()),
        Just(Exponent::INFINITY),
    ]
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spd_square_roots(n in 1usize..=8, seed: u64, log_eigs in prop::collection::vec(-3.0f64..3.0, 8)) {
        let q = orthonormal_basis_with(&random_unit(&mut rng(seed), n));
        let d: Vec<f64> = log_eigs[..n].iter().map(|v| 10f64.powf(*v)).collect();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = (0..n).map(|k| q[k * n + i] * d[k] * q[k * n + j]).sum();
            }
        }
        for i in 0..n {
            for j in 0..i {
                let m = 0.5 * (a[i * n + j] + a[j * n + i]);
                a[i * n + j] = m;
                a[j * n + i] = m;
            }
        }
        let dec = decompose(&SpdMatrix::new(n, a.clone()).unwrap()).unwrap();
        let s = dec.sqrt().entries();
        prop_assert!(rel_frobenius(&mat_mul(n, s, s), &a) < 1e-10);
        let r = dec.inv_sqrt().entries();
        let id = mat_mul(n, &mat_mul(n, r, &a), r);
        let eye: Vec<f64> = (0..n * n).map(|k| if k % (n + 1) == 0 { 1.0 } else { 0.0 }).collect();
        prop_assert!(rel_frobenius(&id, &eye) < 1e-10);
        prop_assert!((spectral_norm_inv_sqrt(&dec) * dec.lambda_min().sqrt() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_recurrence(x in 0.05f64..20.0) {
        prop_assert!(close(gamma(x + 1.0).unwrap(), x * gamma(x).unwrap(), 1e-12));
    }

    #[test]
    fn time_integral_routes_agree(t in 0.01f64..5.0, n in 1usize..=3, q in 0.0f64..1.0, c in -3.0f64..0.0) {
        // p' in [1, (n+2)/(n+1)) keeps the integral convergent
        let p_conj = 1.0 + 0.95 * q / (n as f64 + 1.0);
        let s = time_exponent(n, p_conj);
        prop_assert!(close(duhamel_time_integral(t, n, p_conj, 0.0).unwrap(), t.powf(1.0 - s) / (1.0 - s), 1e-12));
        prop_assert!(close(
            duhamel_time_integral(t, n, p_conj, c).unwrap(),
            duhamel_time_integral_by_quadrature(t, n, p_conj, c).unwrap(),
            1e-9
        ));
    }

    #[test]
    fn kernel_symmetry_and_drift_shift(n in 1usize..=3, seed: u64, t in 0.05f64..3.0, r in 0.0f64..2.0) {
        let w = workspace(seed, n);
        let b = w.spec().drift().to_vec();
        let dir = random_unit(&mut rng(seed ^ 1), n);
        let x: Vec<f64> = dir.iter().map(|d| r * d).collect();
        let g = w.eval_g(&x, t).unwrap();
        prop_assert!(g > 0.0);
        let mirrored: Vec<f64> = (0..n).map(|k| -x[k] - 2.0 * t * b[k]).collect();
        prop_assert!(close(w.eval_g(&mirrored, t).unwrap(), g, 1e-13));
        let still = w.with_drift(vec![0.0; n]).unwrap();
        let shifted: Vec<f64> = (0..n).map(|k| x[k] + t * b[k]).collect();
        prop_assert!(close(still.eval_g(&shifted, t).unwrap(), g, 1e-14));
    }

    #[test]
    fn kernel_gradient_matches_differences(n in 1usize..=3, seed: u64, t in 0.2f64..2.0) {
        let w = workspace(seed, n);
        let mut r = rng(seed ^ 2);
        // a point about one kernel width off centre, where the gradient is not small
        let xi = random_unit(&mut r, n);
        let m = w.decomposition().sqrt().mul_vec(&xi);
        let x: Vec<f64> = (0..n).map(|k| -t * w.spec().drift()[k] + 2.0 * t.sqrt() * m[k]).collect();
        let grad = w.eval_grad_g(&x, t).unwrap();
        let h = 1e-5;
        let scale = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        for k in 0..n {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            let fd = (w.eval_g(&xp, t).unwrap() - w.eval_g(&xm, t).unwrap()) / (2.0 * h);
            prop_assert!((fd - grad[k]).abs() <= 1e-7 * scale, "k={} fd={} grad={}", k, fd, grad[k]);
        }
    }

    #[test]
    fn constants_ignore_drift(n in 1usize..=3, seed: u64, p in exponent(), t in 0.05f64..5.0, b in prop::collection::vec(-5.0f64..5.0, 3)) {
        let w = workspace(seed, n);
        let v = w.with_drift(b[..n].to_vec()).unwrap();
        let l = random_unit(&mut rng(seed ^ 3), n);
        prop_assert_eq!(k_dir(&w, p, &l, t).unwrap().value.to_bits(), k_dir(&v, p, &l, t).unwrap().value.to_bits());
        if p.is_infinite() || p.value() > n as f64 + 2.0 {
            prop_assert_eq!(c_dir(&w, p, &l, t).unwrap().value.to_bits(), c_dir(&v, p, &l, t).unwrap().value.to_bits());
        }
    }

    #[test]
    fn direction_maximum_dominates(n in 1usize..=3, seed: u64, p in exponent(), t in 0.05f64..5.0) {
        let w = workspace(seed, n);
        let best = k_max(&w, p, t).unwrap();
        let arg = best.maximizing_direction.clone().unwrap();
        prop_assert!(close(k_dir(&w, p, &arg, t).unwrap().value, best.value, 1e-12));
        let mut r = rng(seed ^ 4);
        for _ in 0..20 {
            let l = random_unit(&mut r, n);
            prop_assert!(k_dir(&w, p, &l, t).unwrap().value <= best.value * (1.0 + 1e-12));
        }
    }

    #[test]
    fn sup_constant_scaling(n in 1usize..=3, seed: u64, a in 0.01f64..100.0, t in 0.05f64..2.5) {
        let spec = random_spec(&mut rng(seed), n);
        let heat = ProblemSpec::new(spec.diffusion().clone(), spec.drift().to_vec(), 0.0, spec.horizon()).unwrap();
        let scaled = ProblemSpec::new(heat.diffusion().scaled(a).unwrap(), heat.drift().to_vec(), 0.0, heat.horizon()).unwrap();
        let w = KernelWorkspace::new(heat).unwrap();
        let ws = KernelWorkspace::new(scaled).unwrap();
        let l = random_unit(&mut rng(seed ^ 5), n);
        let k = k_dir(&w, Exponent::INFINITY, &l, t).unwrap().value;
        prop_assert!(close(k_dir(&ws, Exponent::INFINITY, &l, t).unwrap().value, k / a.sqrt(), 1e-13));
        // c = 0: t^{-1/2} law
        prop_assert!(close(k_dir(&w, Exponent::INFINITY, &l, 4.0 * t).unwrap().value, 0.5 * k, 1e-13));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn maximum_principle(n in 1usize..=2, seed: u64, t in 0.05f64..2.0, width in 0.01f64..1.0, amp in -3.0f64..3.0, x in prop::collection::vec(-2.0f64..2.0, 2)) {
        let w = workspace(seed, n);
        let q = QuadratureConfig::default();
        let c = w.spec().reaction();
        let gauss = SourceFunction::gaussian(vec![0.3; n], width, amp).unwrap();
        let boxed = SourceFunction::box_indicator(vec![-0.5; n], vec![0.2; n], amp).unwrap();
        for phi in [gauss, boxed] {
            let u = solve_hom(&w, &phi, &x[..n], t, &q).unwrap();
            prop_assert!(u.abs() <= (c * t).exp() * amp.abs() * (1.0 + 1e-6));
        }
    }

    #[test]
    fn gradient_bound_holds_for_every_p(n in 1usize..=2, seed: u64, t in 0.1f64..2.0, width in 0.05f64..1.0, x in prop::collection::vec(-1.5f64..1.5, 2)) {
        let w = workspace(seed, n);
        let q = QuadratureConfig::default();
        let l = random_unit(&mut rng(seed ^ 6), n);
        let phi = SourceFunction::polynomial_gaussian(vec![0.1; n], width, l.clone(), 1.0).unwrap();
        let measured = evaluate_hom(&w, &phi, &x[..n], t, &q).unwrap().directional(&l).abs();
        for p in [2.0, 4.0, 8.0, f64::INFINITY] {
            let p = Exponent::new(p).unwrap();
            let bound = k_dir(&w, p, &l, t).unwrap().value * phi.lp_norm(p).unwrap().value;
            prop_assert!(measured <= bound * (1.0 + 1e-6), "p={} measured={} bound={}", p, measured, bound);
        }
    }

    #[test]
    fn semigroup(n in 1usize..=3, seed: u64, t in 0.1f64..2.0, frac in 0.1f64..0.9, width in 0.05f64..1.0, x in prop::collection::vec(-1.0f64..1.0, 3)) {
        let (spec, a) = random_isotropic_spec(&mut rng(seed), n);
        let w = KernelWorkspace::new(spec).unwrap();
        let q = QuadratureConfig::default();
        let b = w.spec().drift().to_vec();
        let c = w.spec().reaction();
        let center = vec![0.2; n];
        let phi = SourceFunction::gaussian(center.clone(), width, 1.0).unwrap();
        let s = frac * t;
        // u(., s) is again a Gaussian: wider, moved by -s b, rescaled
        let mid_center: Vec<f64> = (0..n).map(|k| center[k] - s * b[k]).collect();
        let mid_width = width + a * s;
        let mid_amp = (c * s).exp() * (width / mid_width).powf(n as f64 / 2.0);
        let mid = SourceFunction::gaussian(mid_center.clone(), mid_width, mid_amp).unwrap();
        let probe: Vec<f64> = (0..n).map(|k| mid_center[k] + 0.3 * x[k]).collect();
        prop_assert!(close(solve_hom(&w, &phi, &probe, s, &q).unwrap(), mid.eval(&probe, 0.0), 1e-6));
        let direct = solve_hom(&w, &phi, &x[..n], t, &q).unwrap();
        let restarted = solve_hom(&w, &mid, &x[..n], t - s, &q).unwrap();
        prop_assert!(close(direct, restarted, 1e-6), "direct={} restarted={}", direct, restarted);
    }
}
