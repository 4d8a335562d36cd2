use super::*;
use crate::lattice::{alpha0_bounds, AnchorCensus, AnchorMode};
use crate::process::FiniteFamily;

fn budget() -> Budget {
    Budget::default()
}

fn single(len_sites: usize, beta: f64) -> FiniteFamily {
    let sites: Vec<[i32; 2]> = (0..len_sites as i32).map(|x| [x, 0]).collect();
    let c = Contour::boundary_of_sites(&sites).unwrap();
    FiniteFamily::new(ContourFamily::explicit(vec![c]), beta).unwrap()
}

#[test]
fn single_contour_two_state_value() {
    let fam = single(1, 0.3);
    let m = (-1.2f64).exp();
    let exact = m / (1.0 + m);
    for method in [PGammaMethod::Direct, PGammaMethod::Palm] {
        let e = estimate_p_gamma(&fam, &0, 40_000, 7, method, &budget()).unwrap();
        assert!(e.ci.contains(exact), "{method:?}: {e:?} vs {exact}");
    }
}

#[test]
fn palm_and_direct_match_exact_marginals() {
    let fam = FiniteFamily::new(families::block(), 0.4).unwrap();
    let g = exact_gibbs_small(fam.family(), 0.4).unwrap();
    for i in [0, 4, 11] {
        for method in [PGammaMethod::Direct, PGammaMethod::Palm] {
            let e = estimate_p_gamma(&fam, &i, 30_000, 11, method, &budget()).unwrap();
            assert!(e.ci.contains(g.marginals[i]), "{i} {method:?}: {e:?} vs {}", g.marginals[i]);
        }
    }
}

#[test]
fn translation_invariance_of_p_gamma() {
    let sys = LatticeSystem::new(8, 1.7, None).unwrap();
    let a = Contour::unit_square([0, 0]);
    let b = a.translated([7, -3]);
    let ea = estimate_p_gamma(&sys, &a, 50_000, 1, PGammaMethod::Palm, &budget()).unwrap();
    let eb = estimate_p_gamma(&sys, &b, 50_000, 2, PGammaMethod::Palm, &budget()).unwrap();
    assert!(ea.ci.lo <= eb.ci.hi && eb.ci.lo <= ea.ci.hi, "{ea:?} {eb:?}");
}

#[test]
fn p_gamma_inside_analytic_interval() {
    let beta = 2.0;
    let sys = LatticeSystem::new(10, beta, None).unwrap();
    let rho = AnchorCensus::new(10, AnchorMode::Vertex)
        .unwrap()
        .bounds(beta)
        .unwrap()
        .interval();
    let checks = check_p_gamma(&sys, &families::lemma_contours(), rho, 20_000, 3, &budget()).unwrap();
    assert!(checks.iter().all(|c| c.pass), "{checks:#?}");
}

#[test]
fn lambda_is_zero_beyond_l_max_and_bookkeeping_holds() {
    let sys = LatticeSystem::new(8, 2.0, None).unwrap();
    let w = SiteBox::centered(30).unwrap();
    let none = estimate_lambda(&sys, &RootSet::Window { window: w, min_len: 10 }, None, 200, 1, &budget()).unwrap();
    assert_eq!(none.lambda_hat, 0.0);
    let e = estimate_lambda(&sys, &RootSet::Window { window: w, min_len: 4 }, left_half(&w).as_ref(), 3000, 1, &budget()).unwrap();
    assert!(e.lambda_hat > 0.0);
    assert!((e.sum_of_frequencies() - e.lambda_hat).abs() < 1e-12);
    let (l, r) = e.half_means().unwrap();
    assert!((l + r - e.lambda_hat).abs() < 1e-12);
}

#[test]
fn lambda_subadditive_over_disjoint_windows() {
    let sys = LatticeSystem::new(8, 1.8, None).unwrap();
    let v1 = SiteBox::square([0, 0], 10).unwrap();
    let v2 = SiteBox::square([10, 0], 10).unwrap();
    let both = SiteBox::square([0, 0], 10).unwrap();
    let both = SiteBox::new(both.min, [19, 9]).unwrap();
    let est = |w: SiteBox, s| {
        estimate_lambda(&sys, &RootSet::Window { window: w, min_len: 4 }, None, 20_000, s, &budget()).unwrap()
    };
    let (a, b, u) = (est(v1, 1), est(v2, 2), est(both, 3));
    assert!(u.ci.lo <= a.ci.hi + b.ci.hi, "{} {} {}", u.lambda_hat, a.lambda_hat, b.lambda_hat);
}

#[test]
fn free_lambda_bounds_and_analytic_lambda() {
    let beta = 2.0;
    let sys = LatticeSystem::new(8, beta, None).unwrap();
    let w = SiteBox::centered(12).unwrap();
    let rho = alpha0_bounds(beta, 8).unwrap().interval();
    let a = analytic_lambda(&sys, 4, &w, rho).unwrap();
    let f = free_lambda(&sys, 4, &w);
    assert!(a.hi <= f * (1.0 + 1e-12) && a.lo > 0.9 * f);
    let e = estimate_lambda(&sys, &RootSet::Window { window: w, min_len: 4 }, None, 200_000, 5, &budget()).unwrap();
    assert!(e.ci.hi >= a.lo && e.ci.lo <= a.hi, "{:?} vs {a}", e.ci);
}

#[test]
fn window_sizing() {
    let sys = LatticeSystem::new(8, 2.0, None).unwrap();
    let tiny = size_window_for_lambda(&sys, 4, 1e-6, 2000, 2000, 1, &budget()).unwrap();
    assert_eq!(tiny.chosen.side, 1);
    assert_eq!(tiny.lower.side, 1);
    let one = size_window_for_lambda(&sys, 6, 0.5, 2000, 20_000, 1, &budget()).unwrap();
    let two = size_window_for_lambda(&sys, 6, 1.0, 2000, 20_000, 1, &budget()).unwrap();
    let area = |s: u32| (s as f64).powi(2);
    let ratio = area(two.chosen.side) / area(one.chosen.side);
    assert!((ratio - 2.0).abs() < 0.25, "{ratio}");
    assert!(one.lower.free_lambda < one.chosen.free_lambda);
    assert!(matches!(
        size_window_for_lambda(&sys, 6, 1e6, 100, 10, 1, &budget()),
        Err(Error::Capacity(_))
    ));
}

#[test]
fn tv_experiment_on_sparse_window_is_small() {
    let sys = LatticeSystem::new(8, 2.0, None).unwrap();
    let w = SiteBox::centered(40).unwrap();
    let r = tv_experiment(&sys, &w, 6, 20_000, 9, Reference::Empirical, None, Some(0.05), &budget()).unwrap();
    assert!(r.tv.tv < 0.05, "{:?}", r.tv);
    assert_eq!(r.verdict, Some(Verdict::Pass));
    let mass: f64 = r.histogram.iter().map(|h| h.empirical_mass).sum();
    assert!((mass - 1.0).abs() < 1e-12);
    assert!(r.tv_halves.is_some());
    let vac = tv_experiment(&sys, &w, 6, 100, 9, Reference::Empirical, None, Some(3.0), &budget()).unwrap();
    assert_eq!(vac.verdict, Some(Verdict::PassVacuous));
    assert!(tv_experiment(&sys, &w, 6, 100, 9, Reference::AnalyticMidpoint, None, None, &budget()).is_err());
}

#[test]
fn sampler_matches_exact_at_low_beta() {
    for (name, fam) in families::exactness_families() {
        let fam = FiniteFamily::new(fam, 0.6).unwrap();
        let (tv, _) = sampler_tv(&fam, 200_000, 4, &budget()).unwrap();
        assert!(tv < 0.01, "{name}: {tv}");
    }
}

#[test]
fn pair_bound_strict_on_exact_family() {
    for beta in [0.3, 1.0, 2.0] {
        let checks = check_pair_exact(&families::triple(), beta).unwrap();
        assert_eq!(checks.len(), 3);
        assert!(checks.iter().all(|c| c.pass && c.margin > 0.0), "{checks:#?}");
    }
}

#[test]
fn pair_bound_on_sampled_family() {
    let fam = FiniteFamily::new(families::rows(), 0.7).unwrap();
    let checks = check_pair_sampled(&fam, 50_000, 2, &budget()).unwrap();
    assert!(checks.iter().all(|c| c.pass));
}

#[test]
fn stationarity_at_low_beta() {
    let fam = FiniteFamily::new(families::ring(), 0.5).unwrap();
    let checks = check_stationarity(&fam, 50.0, 20_000, 3, &budget()).unwrap();
    assert!(checks.iter().all(|c| c.pass), "{checks:#?}");
}

#[test]
fn replicas_do_not_depend_on_thread_count() {
    let fam = FiniteFamily::new(families::block(), 0.8).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                estimate_lambda(&fam, &RootSet::All, None, 5000, 42, &budget())
                    .unwrap()
                    .totals
            })
    };
    assert_eq!(run(1), run(3));
}

#[test]
fn coupling_flags_vanish_far_apart() {
    let sys = LatticeSystem::new(8, 2.5, None).unwrap();
    let near = check_coupling(&sys, 2.0, Interval::new(0.0, 0.01), 2, 3, Norm::Euclidean, 5000, 1, &budget()).unwrap();
    let far = check_coupling(&sys, 2.0, Interval::new(0.0, 0.01), 2, 12, Norm::Euclidean, 5000, 1, &budget()).unwrap();
    assert!(far.estimate <= near.estimate);
    assert_eq!(far.estimate, 0.0);
}

#[test]
fn zero_replicas_rejected() {
    let fam = single(1, 1.0);
    assert!(estimate_p_gamma(&fam, &0, 0, 1, PGammaMethod::Palm, &budget()).is_err());
}
