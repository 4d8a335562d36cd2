//! Independent reference implementations used to cross-check the main
//! algorithms. Compiled for tests and behind the `oracles` feature.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::lattice::{Contour, ContourFamily, Link, Point, SiteBox};
use crate::process::{incompatible_cylinders, Clan, ContourSystem, Label};

fn link_neighbours(l: &Link) -> Vec<Link> {
    let mut out = Vec::with_capacity(6);
    for v in l.endpoints() {
        for d in [[1, 0], [-1, 0], [0, 1], [0, -1]] {
            let m = Link {
                mid: [v[0] + d[0], v[1] + d[1]],
            };
            if m != *l {
                out.push(m);
            }
        }
    }
    out
}

/// Redelmeier enumeration of every vertex-connected link set containing
/// `anchor` with at most `l_max` links; `visit` sees the closed ones.
pub fn redelmeier_closed_sets(anchor: Link, l_max: usize, mut visit: impl FnMut(&[Link])) {
    struct St<'a> {
        set: Vec<Link>,
        seen: HashSet<Link>,
        deg: HashMap<Point, u8>,
        odd: usize,
        l_max: usize,
        visit: &'a mut dyn FnMut(&[Link]),
    }
    fn bump(st: &mut St, l: &Link, up: bool) {
        for v in l.endpoints() {
            let d = st.deg.entry(v).or_insert(0);
            if up {
                *d += 1;
            } else {
                *d -= 1;
            }
            if *d % 2 == 1 {
                st.odd += 1;
            } else {
                st.odd -= 1;
            }
        }
    }
    fn rec(st: &mut St, mut untried: Vec<Link>) {
        while let Some(l) = untried.pop() {
            st.set.push(l);
            bump(st, &l, true);
            if st.odd == 0 {
                let mut s = st.set.clone();
                s.sort();
                (st.visit)(&s);
            }
            if st.set.len() < st.l_max {
                let mut next = untried.clone();
                let mut added = Vec::new();
                for m in link_neighbours(&l) {
                    if st.seen.insert(m) {
                        next.push(m);
                        added.push(m);
                    }
                }
                rec(st, next);
                for m in added {
                    st.seen.remove(&m);
                }
            }
            bump(st, &l, false);
            st.set.pop();
        }
    }
    let mut st = St {
        set: Vec::new(),
        seen: HashSet::from([anchor]),
        deg: HashMap::new(),
        odd: 0,
        l_max,
        visit: &mut visit,
    };
    rec(&mut st, vec![anchor]);
}

/// Closed connected link sets through `anchor`, counted by length.
pub fn anchored_counts(anchor: Link, l_max: usize) -> Vec<u64> {
    let mut counts = vec![0u64; l_max + 1];
    redelmeier_closed_sets(anchor, l_max, |s| counts[s.len()] += 1);
    counts
}

/// Contours of length at most `l_max` touching `window`, found by growing
/// connected sets from every touching link.
pub fn window_family(window: &SiteBox, l_max: usize) -> BTreeSet<Vec<Link>> {
    let mut out = BTreeSet::new();
    for o in 0..2 {
        let (lo, hi) = window.touching_base_range(o);
        for y in lo[1]..=hi[1] {
            for x in lo[0]..=hi[0] {
                redelmeier_closed_sets(Link::crossing([x, y], o), l_max, |s| {
                    out.insert(s.to_vec());
                });
            }
        }
    }
    out
}

pub fn family_link_sets(f: &ContourFamily) -> BTreeSet<Vec<Link>> {
    f.members().iter().map(|c: &Contour| c.links().to_vec()).collect()
}

/// Kept/erased labels by the level recursion: level `n` holds the cylinders
/// whose longest ancestor chain has length `n`; level 0 is kept; a cylinder
/// of level `n` is kept iff it is compatible, as a cylinder, with every kept
/// cylinder of lower levels.
pub fn classify_by_levels<S: ContourSystem>(sys: &S, clan: &Clan<S::Basis>) -> Vec<Label> {
    let n = clan.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| clan.cylinders[a].birth.total_cmp(&clan.cylinders[b].birth));
    let mut level = vec![0usize; n];
    for &c in &order {
        level[c] = clan.ancestors[c]
            .iter()
            .map(|&a| level[a] + 1)
            .max()
            .unwrap_or(0);
    }
    let top = level.iter().copied().max().unwrap_or(0);
    let mut labels = vec![Label::Erased; n];
    let mut kept: Vec<usize> = Vec::new();
    for lv in 0..=top {
        let mut now = Vec::new();
        for c in (0..n).filter(|&c| level[c] == lv) {
            let ok = kept.iter().all(|&k| {
                !incompatible_cylinders(sys, &clan.cylinders[c], &clan.cylinders[k])
            });
            if lv == 0 || ok {
                labels[c] = Label::Kept;
                now.push(c);
            }
        }
        kept.extend(now);
    }
    labels
}

/// Point-valued bound formulas rewritten in log space, for cross-checking
/// the interval implementation in [`crate::bounds`].
pub mod bound_formulas {
    #[derive(Clone, Copy, Debug)]
    pub struct Point {
        pub d: u32,
        pub beta: f64,
        pub beta_prime: f64,
        pub beta_star: f64,
        pub rho: f64,
        pub rho_prime: f64,
        pub n: f64,
        pub lambda: f64,
        pub epsilon: f64,
        pub d_neigh: f64,
    }

    fn ln_k(p: &Point) -> f64 {
        (2.0 * p.d as f64 - 1.0).ln()
    }

    pub fn delta(p: &Point) -> f64 {
        let s = p.beta + p.rho;
        let inner = ln_k(p) * (p.beta + p.rho + p.beta - p.beta_star)
            / ((p.beta - p.beta_star) * s);
        (s + s * inner + (p.beta - p.beta_prime)) / (p.beta - p.beta_prime)
    }

    pub fn k(p: &Point) -> f64 {
        (2.0 * p.beta + p.rho - p.beta_prime) / (p.beta - p.beta_prime)
    }

    pub fn q(p: &Point) -> f64 {
        let l = 4f64.ln() + 2.0 * (2.0 * p.d as f64 - 1.0).ln() + (p.beta + p.rho).ln()
            - 2.0 * (1.0 - p.rho_prime).ln()
            - 2.0 * (p.beta - p.beta_prime).ln();
        l.exp()
    }

    pub fn a(p: &Point) -> f64 {
        let s = p.beta + p.rho;
        s * (s + p.beta - p.beta_prime) * ln_k(p) / (p.beta - p.beta_prime)
    }

    pub fn m(p: &Point) -> f64 {
        let d = p.d as f64;
        let g = p.beta - p.beta_prime;
        let pre = 10f64.ln() + d * (p.beta + p.rho).ln() - (2.0 * d + 2.0) * g.ln();
        let t1 = (d * d.ln() - d * (p.beta_prime - p.beta_star).ln()).exp();
        let t2 = (2f64.ln() + 2.0 * ln_k(p).ln() - 2.0 * (1.0 - p.rho_prime).ln()).exp();
        (pre + (t1 + t2).ln()).exp()
    }

    fn log_common(p: &Point) -> f64 {
        let d = p.d as f64;
        d * ((p.d_neigh + 1.0).ln() - p.epsilon.ln())
            - (p.beta - p.beta_star - p.epsilon) * p.n
            + p.lambda.ln()
    }

    pub fn b1(p: &Point) -> f64 {
        let l = log_common(p) + 2f64.ln() + p.n.ln() + (p.beta + p.rho).ln()
            - (p.beta - p.beta_star).ln();
        l.exp()
    }

    pub fn b2(p: &Point) -> f64 {
        let d = p.d as f64;
        let inner = 2.0 * p.n * (p.beta + p.rho) / (p.beta - p.beta_star) + d.powf(d);
        (log_common(p) + inner.ln()).exp()
    }

    pub fn b3(p: &Point) -> f64 {
        let d = p.d as f64;
        let g = p.beta - p.beta_prime;
        let first = (2f64.ln() + p.lambda.ln() - g * p.n).exp();
        let second = (q(p).ln() + p.n.ln() + p.lambda.ln() + d * p.d_neigh.ln() + a(p) * p.n
            - g * p.d_neigh)
            .exp();
        first + second
    }

    pub fn b3_simplified(p: &Point) -> f64 {
        let d = p.d as f64;
        let g = p.beta - p.beta_prime;
        (4f64.ln() + p.lambda.ln() + d * (p.beta + p.rho).ln() + (d + 1.0) * p.n.ln()
            - 2.0 * (1.0 - p.rho_prime).ln()
            - (2.0 * d + 2.0) * g.ln()
            - g * p.n)
            .exp()
    }

    pub fn tv_closed(p: &Point) -> f64 {
        let d = p.d as f64;
        (m(p).ln() + (d + 1.0) * p.n.ln() + p.lambda.ln() - (p.beta - p.beta_prime) * p.n).exp()
    }
}
