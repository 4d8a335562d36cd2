use clansim::estimators::stats::{chi_square_poisson, ks_two_sample, wilson};
use clansim::lattice::{Contour, ContourFamily, SiteBox};
use clansim::process::{
    coupled_clans, forward_dynamics, sample_eta_zero, sample_free_network_at_zero, stream_rng,
    Budget, FiniteFamily, LatticeSystem, RootSet,
};
use nalgebra::{DMatrix, DVector};

#[test]
fn free_network_marginals_are_poisson() {
    let fam = FiniteFamily::new(
        ContourFamily::explicit(vec![
            Contour::unit_square([0, 0]),
            Contour::boundary_of_sites(&[[0, 0], [1, 0]]).unwrap(),
        ]),
        0.25,
    )
    .unwrap();
    let mut rng = stream_rng(17, 0);
    let draws: Vec<Vec<u64>> = (0..100_000)
        .map(|_| sample_free_network_at_zero(&fam, &mut rng))
        .collect();
    for i in 0..fam.len() {
        let col: Vec<u64> = draws.iter().map(|d| d[i]).collect();
        let g = chi_square_poisson(&col, fam.weights()[i]).unwrap();
        assert!(g.dof >= 2 && g.p_value > 0.01, "{g:?}");
    }
}

/// Stationary law of the three-state chain {empty, {0}, {1}} of two
/// incompatible contours, from its generator.
fn three_state(m: [f64; 2]) -> [f64; 3] {
    let q = DMatrix::from_row_slice(
        3,
        3,
        &[-(m[0] + m[1]), m[0], m[1], 1.0, -1.0, 0.0, 1.0, 0.0, -1.0],
    );
    // pi Q = 0 with sum(pi) = 1: replace one balance equation.
    let mut a = q.transpose();
    for j in 0..3 {
        a[(2, j)] = 1.0;
    }
    let pi = a.lu().solve(&DVector::from_vec(vec![0.0, 0.0, 1.0])).unwrap();
    [pi[0], pi[1], pi[2]]
}

#[test]
fn incompatible_pair_matches_three_state_chain() {
    let family = ContourFamily::explicit(vec![
        Contour::unit_square([0, 0]),
        Contour::boundary_of_sites(&[[0, 0], [1, 0]]).unwrap(),
    ]);
    let beta = 0.2;
    let fam = FiniteFamily::new(family, beta).unwrap();
    let w = fam.weights();
    let pi = three_state([w[0], w[1]]);
    assert!((pi[1] - w[0] / (1.0 + w[0] + w[1])).abs() < 1e-12);

    let mut rng = stream_rng(5, 1);
    let f = forward_dynamics(&fam, &[], 40_000.0, &mut rng).unwrap();
    for i in 0..2 {
        assert!((f.time_average[i] - pi[i + 1]).abs() < 0.01, "{:?} {pi:?}", f.time_average);
    }

    let n = 100_000u64;
    let mut counts = [0u64; 3];
    for _ in 0..n {
        let s = sample_eta_zero(&fam, &RootSet::All, &mut rng, &Budget::default()).unwrap();
        counts[s.present.first().map_or(0, |&i| i + 1)] += 1;
    }
    for k in 0..3 {
        let ci = wilson(counts[k], n, 0.999).unwrap();
        assert!(ci.contains(pi[k]), "state {k}: {ci} vs {}", pi[k]);
    }
}

#[test]
fn expected_root_count_is_the_weight() {
    let fam = FiniteFamily::new(ContourFamily::explicit(vec![Contour::unit_square([0, 0])]), 0.3)
        .unwrap();
    let mut rng = stream_rng(8, 0);
    let n = 100_000;
    let total: usize = (0..n)
        .map(|_| {
            sample_eta_zero(&fam, &RootSet::All, &mut rng, &Budget::default())
                .unwrap()
                .root_count
        })
        .sum();
    let mean = total as f64 / n as f64;
    let w = fam.weights()[0];
    assert!((mean - w).abs() < 4.0 * (w / n as f64).sqrt(), "{mean} vs {w}");
}

#[test]
fn joint_clan_has_the_law_of_the_independent_one() {
    let sys = LatticeSystem::new(8, 1.6, None).unwrap();
    let a = RootSet::Window { window: SiteBox::square([0, 0], 3).unwrap(), min_len: 4 };
    let b = RootSet::Window { window: SiteBox::square([4, 0], 3).unwrap(), min_len: 4 };
    let mut joint = Vec::new();
    let mut indep = Vec::new();
    let mut flags = 0;
    for i in 0..6000u64 {
        // Independent replicas for the two samples so that the test
        // compares laws, not paired outcomes.
        let c = coupled_clans(&sys, &a, &b, stream_rng(1, i), stream_rng(2, i), &Budget::default()).unwrap();
        // `a` is grown first, so only the law of the joint `b` is at stake.
        joint.push(c.joint_b.len() as f64);
        flags += c.flag() as u32;
        let d = coupled_clans(&sys, &a, &b, stream_rng(3, i), stream_rng(4, i), &Budget::default()).unwrap();
        indep.push(d.indep_b.len() as f64);
    }
    assert!(flags > 30, "the clans must interact for the test to mean anything");
    let (_, p) = ks_two_sample(&joint, &indep).unwrap();
    assert!(p > 0.001, "KS p-value {p}");
}
