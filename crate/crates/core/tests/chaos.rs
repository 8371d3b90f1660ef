use kac_core::chaos::*;
use kac_core::energy::EnergyFunction;
use kac_core::equilibrium::EquilibriumLaw;
use kac_core::rng::{RandomStream, Sequential};

fn small_budget() -> ChaosBudget {
    ChaosBudget { samples: 20_000, chains: 4, ks_threshold: 0.03, ..ChaosBudget::default() }
}

#[test]
fn one_marginal_approaches_the_gaussian() {
    let law = EquilibriumLaw::solve(&EnergyFunction::classical()).unwrap();
    let r = chaoticity_test(&law, &[5, 20, 80], 1, &small_budget(), 11, &Sequential).unwrap();
    let ks = r.series("ks");
    assert_eq!(ks.len(), 3);
    // at N = 5 the marginal is visibly compact; it has relaxed by N = 80
    assert!(ks[0].1 > ks[2].1, "{ks:?}");
    assert!(r.pass, "{:?}", r.rows);
}

#[test]
fn pairs_decorrelate_with_n() {
    let law = EquilibriumLaw::solve(&EnergyFunction::relativistic()).unwrap();
    let r = chaoticity_test(&law, &[3, 12, 48], 2, &small_budget(), 12, &Sequential).unwrap();
    let prod = r.series("product_w1");
    assert!(prod[0].1 > prod[2].1 + 3.0 * prod[0].2, "{prod:?}");
    assert!(r.pass, "{:?}", r.rows);
}

#[test]
fn reports_are_reproducible() {
    let law = EquilibriumLaw::solve(&EnergyFunction::classical()).unwrap();
    let b = ChaosBudget { samples: 2000, chains: 2, ..ChaosBudget::default() };
    let a = chaoticity_test(&law, &[10], 1, &b, 5, &Sequential).unwrap();
    let c = chaoticity_test(&law, &[10], 1, &b, 5, &Sequential).unwrap();
    assert_eq!(a, c);
}

#[test]
fn walks_follow_the_mean_field() {
    let e = EnergyFunction::classical();
    // mean energy one, far from the limit law
    let f0 = |r: &mut RandomStream| 3f64.sqrt() * (2.0 * r.uniform() - 1.0);
    let budget = PropagationBudget {
        walk_samples: 100_000,
        mf_particles: 50_000,
        mf_runs: 2,
        w1_threshold: 0.03,
        ..PropagationBudget::default()
    };
    let r = propagation_test(&e, &f0, &[4, 16, 64], 0.5, &budget, 13, &Sequential).unwrap();
    let w1 = r.series("w1_two_sample");
    assert!(w1[0].1 > w1[2].1, "{w1:?}");
    assert!(r.pass, "{:?}", r.rows);
}

#[test]
fn rejects_bad_n_lists() {
    let law = EquilibriumLaw::solve(&EnergyFunction::classical()).unwrap();
    let b = small_budget();
    assert!(chaoticity_test(&law, &[], 1, &b, 0, &Sequential).is_err());
    assert!(chaoticity_test(&law, &[20, 10], 1, &b, 0, &Sequential).is_err());
    assert!(chaoticity_test(&law, &[10], 3, &b, 0, &Sequential).is_err());
}
