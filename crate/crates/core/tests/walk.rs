use kac_core::energy::EnergyFunction;
use kac_core::equilibrium::EquilibriumLaw;
use kac_core::kacwalk::*;
use kac_core::math::sqrt;
use kac_core::rng::RandomStream;
use kac_core::stats::*;

fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

#[test]
fn pairs_are_uniform() {
    let n = 10;
    let e = EnergyFunction::classical();
    let mut rng = RandomStream::new(1);
    let mut s = MasterVector::on_manifold(&e, (0..n).map(|i| i as f64 - 4.5).collect(), n as f64).unwrap();
    let mut counts = vec![0u64; n * n];
    let draws = 90_000;
    for _ in 0..draws {
        let ev = step(&mut s, &mut rng).unwrap();
        assert!(ev.i < ev.j && ev.j < n);
        counts[ev.i * n + ev.j] += 1;
    }
    let expect = draws as f64 / 45.0;
    let chi2: f64 = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| (counts[i * n + j] as f64 - expect).powi(2) / expect)
        .sum();
    // 44 degrees of freedom; the 0.999 quantile is about 78
    assert!(chi2 < 78.0, "chi2 = {chi2}");
}

#[test]
fn collision_count_is_poisson_in_time() {
    let n = 50;
    let t = 20.0;
    let e = EnergyFunction::relativistic();
    let mut rng = RandomStream::new(2);
    let v: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
    let mut s = MasterVector::on_manifold(&e, v, n as f64).unwrap();
    let stats = simulate(&mut s, t, &[5.0, 10.0, 15.0], &mut rng, |_, _| {}).unwrap();
    let mean = n as f64 * t;
    assert!((stats.collisions as f64 - mean).abs() < 4.0 * sqrt(mean), "{}", stats.collisions);
    assert_eq!(stats.summary.len(), 3);
    assert!(stats.summary.windows(2).all(|w| w[0].1 <= w[1].1));
    assert_eq!(s.time, t);
    assert!(stats.max_pair_residual < 1e-12);
}

#[test]
fn sampler_matches_the_equilibrium_law() {
    let law = EquilibriumLaw::solve(&EnergyFunction::relativistic()).unwrap();
    let mut rng = RandomStream::new(3);
    let x = sorted((0..1_000_000).map(|_| law.sample(&mut rng)).collect());
    let ks = ks_sorted(&x, |v| law.cdf(v)).unwrap();
    assert!(ks < 0.002, "ks = {ks}");
    // the saddle condition makes ⟨φ⟩ = 1 under the limit law
    let mean_phi = x.iter().map(|&v| law.energy().phi(v)).sum::<f64>() / x.len() as f64;
    assert!((mean_phi - 1.0).abs() < 0.01, "{mean_phi}");
}

#[test]
fn classical_sampler_is_standard_normal() {
    let law = EquilibriumLaw::solve(&EnergyFunction::classical()).unwrap();
    let mut rng = RandomStream::new(4);
    let x = sorted((0..200_000).map(|_| law.sample(&mut rng)).collect());
    assert!(ks_sorted(&x, normal_cdf).unwrap() < 0.005);
}

/// Velocities pooled over a long equilibrated walk.
fn pooled_walk(rule: CollisionRule, n: usize, samples: usize, seed: u64) -> (EquilibriumLaw, Vec<f64>) {
    let law = EquilibriumLaw::solve(&EnergyFunction::relativistic()).unwrap();
    let mut rng = RandomStream::new(seed);
    let mut s = init_microcanonical(&law, n, rule, 200 * n as u64, &mut rng).unwrap();
    let mut out = Vec::with_capacity(samples);
    while out.len() < samples {
        for _ in 0..n / 2 {
            step(&mut s, &mut rng).unwrap();
        }
        out.push(s.velocities()[rng.index(n)]);
    }
    (law, sorted(out))
}

#[test]
fn walk_is_stationary_at_the_limit_law() {
    let (law, x) = pooled_walk(CollisionRule::Microcanonical, 400, 100_000, 5);
    let ks = ks_sorted(&x, |v| law.cdf(v)).unwrap();
    assert!(ks < 0.01, "ks = {ks}");
}

#[test]
fn uniform_rotation_drifts_to_gaussian_y() {
    // Rotating uniformly in y ignores the weight of the surface measure, so
    // y = sign(v)√φ(v) equilibrates to N(0, 1) instead of the limit law.
    let (law, x) = pooled_walk(CollisionRule::Uniform, 400, 100_000, 6);
    let e = law.energy();
    let to_y = |v: f64| v.signum() * sqrt(e.phi(v));
    let ks_y = ks_sorted(&x, |v| normal_cdf(to_y(v))).unwrap();
    let ks_law = ks_sorted(&x, |v| law.cdf(v)).unwrap();
    assert!(ks_y < 0.01, "{ks_y}");
    assert!(ks_law > 0.015, "{ks_law}");
}

#[test]
fn coordinates_are_exchangeable() {
    let law = EquilibriumLaw::solve(&EnergyFunction::relativistic()).unwrap();
    let n = 20;
    let mut rng = RandomStream::new(7);
    // start far from exchangeable: all energy on particle 0
    let mut v = vec![0.0; n];
    v[0] = 1.0;
    let mut s = MasterVector::on_manifold(law.energy(), v, n as f64).unwrap();
    for _ in 0..100 * n {
        step(&mut s, &mut rng).unwrap();
    }
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for _ in 0..20_000 {
        for _ in 0..n {
            step(&mut s, &mut rng).unwrap();
        }
        a.push(s.velocities()[0]);
        b.push(s.velocities()[n - 1]);
    }
    let (d, p) = ks_two_sample_test(&sorted(a), &sorted(b)).unwrap();
    assert!(p > 1e-4, "d = {d}, p = {p}");
}

#[test]
fn acceptance_is_one_for_classical() {
    let e = EnergyFunction::classical();
    let mut rng = RandomStream::new(8);
    let v: Vec<f64> = (0..30).map(|_| rng.standard_normal()).collect();
    let mut s = MasterVector::on_manifold(&e, v, 30.0).unwrap();
    for _ in 0..10_000 {
        step(&mut s, &mut rng).unwrap();
    }
    assert_eq!(s.accepted, s.collision_count);
}

#[test]
fn relativistic_acceptance_is_high() {
    let (law, _) = pooled_walk(CollisionRule::Microcanonical, 50, 10, 9);
    let mut rng = RandomStream::new(9);
    let mut s = init_microcanonical(&law, 100, CollisionRule::Microcanonical, 0, &mut rng).unwrap();
    for _ in 0..50_000 {
        step(&mut s, &mut rng).unwrap();
    }
    let rate = s.accepted as f64 / s.collision_count as f64;
    assert!(rate > 0.8 && rate < 1.0, "{rate}");
}
