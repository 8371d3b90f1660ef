use kac_core::energy::EnergyFunction;
use kac_core::equilibrium::solve_z0;
use kac_core::kacwalk::*;
use kac_core::math::{exp, PI, TAU};
use kac_core::numerics::{find_root_increasing, integrate, saddle_asymptotic_1d, SaddleInput};
use kac_core::planar::{planar_collide, PlanarEnergy};
use kac_core::rng::RandomStream;
use kac_core::stats::*;
use proptest::prelude::*;

fn energy(rel: bool) -> EnergyFunction {
    if rel {
        EnergyFunction::relativistic()
    } else {
        EnergyFunction::classical()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn collision_conserves_pair_energy(rel in any::<bool>(), vi in -50.0..50.0f64, vj in -50.0..50.0f64, th in 0.0..TAU) {
        let e = energy(rel);
        let h = e.phi(vi) + e.phi(vj);
        let (wi, wj) = collide(&e, vi, vj, th);
        prop_assert!((e.phi(wi) + e.phi(wj) - h).abs() <= 1e-10 * (1.0 + h));
    }

    #[test]
    fn reverse_angle_undoes_a_collision(rel in any::<bool>(), vi in -20.0..20.0f64, vj in -20.0..20.0f64, th in 0.0..TAU) {
        let e = energy(rel);
        let (wi, wj) = collide(&e, vi, vj, th);
        let (ui, uj) = collide(&e, wi, wj, -th);
        prop_assert!((ui - vi).abs() <= 1e-8 * (1.0 + vi.abs()));
        prop_assert!((uj - vj).abs() <= 1e-8 * (1.0 + vj.abs()));
    }

    #[test]
    fn accepted_moves_conserve_energy(vi in -10.0..10.0f64, vj in -10.0..10.0f64, th in 0.0..TAU, seed in any::<u64>()) {
        let e = EnergyFunction::relativistic();
        let mut rng = RandomStream::new(seed);
        let h = e.phi(vi) + e.phi(vj);
        if let Some((wi, wj)) = collide_with(&e, CollisionRule::Microcanonical, vi, vj, th, &mut rng) {
            prop_assert!((e.phi(wi) + e.phi(wj) - h).abs() <= 1e-10 * (1.0 + h));
        }
    }

    #[test]
    fn rescaling_reaches_the_target(rel in any::<bool>(), v in prop::collection::vec(-5.0..5.0f64, 2..40), target in 0.1..100.0f64) {
        prop_assume!(v.iter().any(|x| x.abs() > 1e-3));
        let e = energy(rel);
        let s = rescale_factor(&e, &v, target).unwrap();
        let h: f64 = v.iter().map(|&x| e.phi(s * x)).sum();
        prop_assert!((h - target).abs() <= 1e-9 * target);
    }

    #[test]
    fn walk_stays_on_the_manifold(rel in any::<bool>(), n in 2usize..30, seed in any::<u64>()) {
        let e = energy(rel);
        let mut rng = RandomStream::new(seed);
        let v: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        prop_assume!(v.iter().any(|x| x.abs() > 1e-3));
        let mut s = MasterVector::on_manifold(&e, v, n as f64).unwrap();
        for _ in 0..500 {
            step(&mut s, &mut rng).unwrap();
        }
        prop_assert!((s.recompute_energy() - n as f64).abs() <= 1e-9 * n as f64);
    }

    #[test]
    fn integration_is_linear(a in -3.0..3.0f64, b in -3.0..3.0f64, lo in -2.0..0.0f64, hi in 0.1..2.0f64) {
        let f = |x: f64| exp(-x * x);
        let g = |x: f64| x.sin() + x * x;
        let i = |h: &dyn Fn(f64) -> f64| integrate(h, lo, hi, 1e-13, 1e-15).unwrap().value;
        let lhs = i(&|x| a * f(x) + b * g(x));
        let rhs = a * i(&f) + b * i(&g);
        prop_assert!((lhs - rhs).abs() <= 1e-11 * (1.0 + lhs.abs()));
    }

    #[test]
    fn roots_of_shifted_cubics(c in -1e3..1e3f64) {
        let r = find_root_increasing(|x| x * x * x + x - c, (-1.0, 1.0)).unwrap();
        prop_assert!((r * r * r + r - c).abs() <= 1e-9 * (1.0 + c.abs()));
    }

    #[test]
    fn saddle_formula_is_exact_for_gaussians(lambda in 1.0..1e3f64, curv in 0.1..10.0f64, q in 0.1..5.0f64) {
        // ∫q·e^{−λ·curv·x²/2}dx is exactly the leading term
        let got = saddle_asymptotic_1d(&SaddleInput { lambda, s_at_z0: 0.0, curvature: curv, q_at_z0: q }).unwrap();
        let exact = q * (2.0 * PI / (lambda * curv)).sqrt();
        prop_assert!((exp(got.ln_abs) / exact - 1.0).abs() < 1e-12);
    }

    #[test]
    fn planar_moves_conserve_energy_and_momentum(rel in any::<bool>(), a in prop::array::uniform4(-5.0..5.0f64), seed in any::<u64>()) {
        let pe = PlanarEnergy::new(energy(rel));
        let (vi, vj) = ([a[0], a[1]], [a[2], a[3]]);
        let mut rng = RandomStream::new(seed);
        let (wi, wj, _) = planar_collide(&pe, vi, vj, &mut rng).unwrap();
        let h = pe.phi(vi) + pe.phi(vj);
        prop_assert!((pe.phi(wi) + pe.phi(wj) - h).abs() <= 1e-9 * (1.0 + h));
        for c in 0..2 {
            prop_assert!((wi[c] + wj[c] - vi[c] - vj[c]).abs() <= 1e-9 * (1.0 + h));
        }
    }

    #[test]
    fn distances_are_well_formed(a in prop::collection::vec(-5.0..5.0f64, 1..200), b in prop::collection::vec(-5.0..5.0f64, 1..200)) {
        let (a, b) = (sorted(a), sorted(b));
        let d = ks_two_sample(&a, &b).unwrap();
        prop_assert!((0.0..=1.0).contains(&d));
        let w = wasserstein1_two_sample(&a, &b).unwrap();
        prop_assert!(w >= 0.0);
        prop_assert!((w - wasserstein1_two_sample(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!(ks_two_sample(&a, &a).unwrap() < 1e-12);
    }

    #[test]
    fn shifting_a_sample_moves_w1_by_the_shift(a in prop::collection::vec(-5.0..5.0f64, 1..200), s in -3.0..3.0f64) {
        let a = sorted(a);
        let b: Vec<f64> = a.iter().map(|x| x + s).collect();
        prop_assert!((wasserstein1_two_sample(&a, &b).unwrap() - s.abs()).abs() < 1e-9);
    }

    #[test]
    fn streams_are_deterministic(seed in any::<u64>(), chain in 0u64..64) {
        let mut a = RandomStream::for_chain(seed, chain);
        let mut b = RandomStream::for_chain(seed, chain);
        for _ in 0..16 {
            prop_assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        }
    }
}

#[test]
fn scaled_quadratic_energies_share_z0() {
    // φ = a·v² gives z₀ = 1/2 regardless of a: the saddle only sees φ's law
    for a in [0.25, 1.0, 4.0] {
        let e = EnergyFunction::custom("scaled", move |v: f64| a * v * v);
        let sol = solve_z0(&e).unwrap();
        assert!((sol.z0 - 0.5).abs() < 1e-8, "a={a}: {}", sol.z0);
    }
}
