use std::time::Instant;

use clansim::lattice::{
    compatible, contour_distance, enumerate_anchored, enumerate_window, Contour, ContourFamily,
    DistancePoints, Link, Norm, SiteBox,
};
use clansim::oracles::{anchored_counts, family_link_sets, window_family};
use proptest::prelude::*;

#[test]
fn anchored_counts_match_redelmeier_oracle() {
    let anchor = Link::crossing([0, 0], 0);
    for l_max in [4, 6, 8, 10] {
        let t = Instant::now();
        let fam = enumerate_anchored(anchor, l_max).unwrap();
        assert!(t.elapsed().as_secs() < 60);
        let oracle = anchored_counts(anchor, l_max);
        assert_eq!(fam.length_histogram()[..], oracle[..], "L_max = {l_max}");
        for c in fam.members() {
            assert!(c.is_closed() && c.is_connected() && c.contains_link(&anchor));
            assert!(c.len() % 2 == 0 && c.len() >= 4);
        }
    }
}

#[test]
fn anchor_orientation_does_not_matter() {
    let a = enumerate_anchored(Link::crossing([0, 0], 0), 8).unwrap();
    let b = enumerate_anchored(Link::crossing([3, -2], 1), 8).unwrap();
    assert_eq!(a.length_histogram(), b.length_histogram());
}

#[test]
fn window_families_match_oracle() {
    for (side, l_max) in [(1u32, 4usize), (1, 8), (2, 6), (3, 8)] {
        let w = SiteBox::square([-1, 2], side).unwrap();
        let fam = enumerate_window(&w, l_max).unwrap();
        assert_eq!(family_link_sets(&fam), window_family(&w, l_max), "side {side}, L {l_max}");
    }
}

#[test]
fn family_text_is_stable() {
    let fam = enumerate_window(&SiteBox::square([0, 0], 2).unwrap(), 6).unwrap();
    let text = fam.to_text();
    let back = ContourFamily::from_text(&text).unwrap();
    assert_eq!(back.to_text(), text);
    assert_eq!(back.members(), fam.members());
}

fn small_contour() -> impl Strategy<Value = Contour> {
    let fam = enumerate_anchored(Link::crossing([0, 0], 0), 8).unwrap();
    let members = fam.members().to_vec();
    (0..members.len(), -6i32..6, -6i32..6)
        .prop_map(move |(i, x, y)| members[i].translated([x, y]))
}

proptest! {
    #[test]
    fn compatibility_is_symmetric_and_irreflexive(a in small_contour(), b in small_contour()) {
        prop_assert_eq!(compatible(&a, &b), compatible(&b, &a));
        prop_assert!(!compatible(&a, &a));
    }

    #[test]
    fn distance_is_a_metric_on_samples(a in small_contour(), b in small_contour(), c in small_contour()) {
        for norm in [Norm::Euclidean, Norm::Sup] {
            let d = |x: &Contour, y: &Contour| contour_distance(x, y, norm, DistancePoints::LinkMidpoints);
            prop_assert_eq!(d(&a, &a), 0.0);
            prop_assert_eq!(d(&a, &b), d(&b, &a));
            // Set distances obey the triangle inequality only up to the
            // diameter of the middle set.
            let diam = c.links().len() as f64;
            prop_assert!(d(&a, &b) <= d(&a, &c) + d(&c, &b) + diam);
        }
    }

    #[test]
    fn distance_matches_brute_force(a in small_contour(), b in small_contour()) {
        let mut best = f64::INFINITY;
        for x in a.links() {
            for y in b.links() {
                let dx = (x.mid[0] - y.mid[0]) as f64 / 2.0;
                let dy = (x.mid[1] - y.mid[1]) as f64 / 2.0;
                best = best.min((dx * dx + dy * dy).sqrt());
            }
        }
        let d = contour_distance(&a, &b, Norm::Euclidean, DistancePoints::LinkMidpoints);
        prop_assert!((d - best).abs() < 1e-12);
    }
}
