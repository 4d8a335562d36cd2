//! Certified enclosures of the anchored contour sum
//! `alpha0(beta) = sum over contours through the anchor of exp(-beta |theta|)`
//! and of its unit root `beta*`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use super::enumerate::{Shape, ShapeCatalog};
use crate::error::{Error, Result};
use crate::interval::Interval;

/// What it means for a contour to "contain the origin" in the anchored sum.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorMode {
    /// The contour contains the dual vertex `(1/2, 1/2)`. Compatibility is
    /// vertex-sharing, so this is the anchor for which
    /// `sum_{theta incompatible with gamma} e^{-beta|theta|} <= |gamma| alpha0`.
    #[default]
    Vertex,
    /// The contour contains the link crossing the edge `{0, e_1}`.
    Link,
    /// The contour separates site `0` from infinity.
    SurroundsOrigin,
}

impl AnchorMode {
    /// Polynomial degree and coefficient of the counting bound used for the
    /// tail: at most `coef * n^deg * (2d-1)^n` anchored contours of length `n`.
    fn tail_counting_bound(self) -> (u32, f64) {
        match self {
            // A closed trail of n steps from the anchor has at most 3
            // continuations per step (4 for the very first step from a
            // vertex); n * 3^n dominates both.
            AnchorMode::Link | AnchorMode::Vertex => (1, 1.0),
            // A surrounding contour crosses the ray {(k + 1/2, 0) : k >= 0}
            // at some k < n/2, and contains that link.
            AnchorMode::SurroundsOrigin => (2, 0.5),
        }
    }

    fn placements(self, shape: &Shape) -> u64 {
        match self {
            AnchorMode::Link => shape.links_by_orientation[0].len() as u64,
            AnchorMode::Vertex => shape.vertices.len() as u64,
            AnchorMode::SurroundsOrigin => enclosed_sites(shape),
        }
    }
}

/// Number of sites enclosed (with odd crossing parity) by the shape, which
/// equals the number of its translates surrounding a fixed site.
fn enclosed_sites(shape: &Shape) -> u64 {
    let mut rows: HashMap<i32, Vec<i32>> = HashMap::new();
    for l in &shape.links_by_orientation[0] {
        rows.entry(l.mid[1]).or_default().push(l.mid[0]);
    }
    let mut total = 0u64;
    for xs in rows.values_mut() {
        xs.sort_unstable();
        let m = xs.len();
        for i in 1..m {
            // Between the i-th and (i+1)-th crossing, m - i crossings lie to
            // the right.
            if (m - i) % 2 == 1 {
                total += ((xs[i] - xs[i - 1]) / 2) as u64;
            }
        }
    }
    total
}

static CATALOGS: OnceLock<Mutex<HashMap<usize, Arc<ShapeCatalog>>>> = OnceLock::new();

impl ShapeCatalog {
    /// Process-wide memoized catalog.
    pub fn cached(l_max: usize) -> Result<Arc<ShapeCatalog>> {
        let map = CATALOGS.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(c) = map.lock().unwrap().get(&l_max) {
            return Ok(c.clone());
        }
        let built = Arc::new(ShapeCatalog::build(l_max)?);
        map.lock().unwrap().insert(l_max, built.clone());
        Ok(built)
    }
}

/// Number of anchored contours of each length up to `l_max`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnchorCensus {
    pub mode: AnchorMode,
    pub l_max: usize,
    /// `counts[n]` contours of length `n` contain the anchor.
    pub counts: Vec<u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Alpha0Bounds {
    pub beta: f64,
    pub lower: f64,
    pub upper: f64,
    /// Upper bound on the contribution of contours longer than `l_max`.
    pub tail: f64,
}

impl Alpha0Bounds {
    pub fn interval(&self) -> Interval {
        Interval::new(self.lower, self.upper)
    }
}

pub const LN_3: f64 = 1.098_612_288_668_109_6;

impl AnchorCensus {
    pub fn from_catalog(catalog: &ShapeCatalog, mode: AnchorMode) -> AnchorCensus {
        let mut counts = vec![0u64; catalog.l_max + 1];
        for s in catalog.shapes() {
            counts[s.len()] += mode.placements(s);
        }
        AnchorCensus {
            mode,
            l_max: catalog.l_max,
            counts,
        }
    }

    pub fn new(l_max: usize, mode: AnchorMode) -> Result<AnchorCensus> {
        Ok(AnchorCensus::from_catalog(&*ShapeCatalog::cached(l_max)?, mode))
    }

    fn head(&self, beta: f64) -> Interval {
        let b = Interval::point(beta);
        let mut sum = Interval::point(0.0);
        for (n, &c) in self.counts.iter().enumerate() {
            if c > 0 {
                sum = sum + (c as f64) * (-(b * n as f64)).exp();
            }
        }
        sum
    }

    /// Upper bound on `sum_{n > l_max} coef n^deg 3^n e^{-beta n}`.
    fn tail(&self, beta: f64) -> Result<f64> {
        if beta <= LN_3 {
            return Err(Error::DivergentTail {
                beta,
                threshold: LN_3,
            });
        }
        let (deg, coef) = self.mode.tail_counting_bound();
        let x = Interval::point(3.0) * (-Interval::point(beta)).exp();
        if x.hi >= 1.0 {
            return Err(Error::DivergentTail {
                beta,
                threshold: LN_3,
            });
        }
        let first = self.l_max + 1;
        let mut term = Interval::point(coef)
            * Interval::point(first as f64).powi(deg)
            * x.powi(first as u32);
        let ratio = |n: usize| -> Interval {
            Interval::point((n + 1) as f64 / n as f64).max_point(1.0).powi(deg)
                * Interval::point(1.0 + 1e-15)
                * x
        };
        let mut n = first;
        let mut sum = Interval::point(0.0);
        // Sum explicitly until the remainder is negligible, then close with
        // a geometric bound once the term ratio is below one.
        loop {
            let r = ratio(n);
            if r.hi < 1.0 {
                let closing = term / (Interval::point(1.0) - r);
                if closing.hi <= 1e-13 * sum.hi || n > first + 20_000 {
                    return Ok((sum + closing).hi);
                }
            }
            sum = sum + term;
            term = term * r;
            n += 1;
            if n > self.l_max + 50_000_000 {
                return Err(Error::DivergentTail {
                    beta,
                    threshold: LN_3,
                });
            }
        }
    }

    /// Certified `lower <= alpha0(beta) <= upper`.
    pub fn bounds(&self, beta: f64) -> Result<Alpha0Bounds> {
        let head = self.head(beta);
        let tail = self.tail(beta)?;
        Ok(Alpha0Bounds {
            beta,
            lower: head.lo,
            upper: (head + tail).hi,
            tail,
        })
    }

    /// Just the enumerated head, valid for any `beta >= 0`.
    pub fn lower(&self, beta: f64) -> f64 {
        self.head(beta).lo
    }
}

/// `alpha0` enclosure with the default anchor.
pub fn alpha0_bounds(beta: f64, l_max: usize) -> Result<Alpha0Bounds> {
    AnchorCensus::new(l_max, AnchorMode::default())?.bounds(beta)
}

/// Certified enclosure `[lo, hi]` of `beta*`, the root of `alpha0 = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaStarBracket {
    pub lo: f64,
    pub hi: f64,
    pub l_max: usize,
    pub mode: AnchorMode,
}

impl BetaStarBracket {
    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn interval(&self) -> Interval {
        Interval::new(self.lo, self.hi)
    }
}

/// Bisection on a decreasing predicate: returns `(a, b)` with `pred(a)` true,
/// `pred(b)` false and `b - a` at floating-point resolution.
fn bisect(mut a: f64, mut b: f64, pred: impl Fn(f64) -> bool) -> (f64, f64) {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if pred(m) {
            a = m;
        } else {
            b = m;
        }
    }
    (a, b)
}

const BETA_SEARCH_MAX: f64 = 64.0;

/// The bracket obtainable from the census, however wide it is.
///
/// `lo` satisfies `lower(lo) >= 1`, hence `alpha0(lo) >= 1` and
/// `lo <= beta*`; `hi` satisfies `upper(hi) < 1`, hence `beta* < hi`.
pub fn beta_star_bracket_loose(census: &AnchorCensus) -> Result<BetaStarBracket> {
    if census.lower(0.0) < 1.0 {
        return Err(Error::param("anchored census is empty"));
    }
    let (lo, _) = bisect(0.0, BETA_SEARCH_MAX, |b| census.lower(b) >= 1.0);
    let above = |b: f64| match census.bounds(b) {
        Ok(bd) => bd.upper >= 1.0,
        Err(_) => true,
    };
    if above(BETA_SEARCH_MAX) {
        return Err(Error::param("alpha0 upper bound never drops below 1"));
    }
    let (_, hi) = bisect(LN_3, BETA_SEARCH_MAX, above);
    Ok(BetaStarBracket {
        lo,
        hi,
        l_max: census.l_max,
        mode: census.mode,
    })
}

/// Bracket of `beta*` no wider than `tolerance`, or an error carrying the
/// best bracket available at this `l_max`.
pub fn beta_star_bracket(
    tolerance: f64,
    l_max: usize,
    mode: AnchorMode,
) -> Result<BetaStarBracket> {
    if !(tolerance > 0.0) {
        return Err(Error::param("tolerance must be positive"));
    }
    let census = AnchorCensus::new(l_max, mode)?;
    let br = beta_star_bracket_loose(&census)?;
    if br.width() > tolerance {
        return Err(Error::BracketTooWide {
            lo: br.lo,
            hi: br.hi,
            tolerance,
        });
    }
    Ok(br)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{enumerate_anchored, Contour, Link};

    fn census(l_max: usize, mode: AnchorMode) -> AnchorCensus {
        AnchorCensus::new(l_max, mode).unwrap()
    }

    #[test]
    fn link_census_matches_direct_enumeration() {
        let c = census(10, AnchorMode::Link);
        let fam = enumerate_anchored(Link::crossing([0, 0], 0), 10).unwrap();
        assert_eq!(c.counts, fam.length_histogram());
    }

    #[test]
    fn vertex_census_small_lengths() {
        // Four unit squares meet at a dual vertex; each of the two domino
        // classes has six vertices.
        let c = census(6, AnchorMode::Vertex);
        assert_eq!(c.counts[4], 4);
        assert_eq!(c.counts[6], 12);
    }

    #[test]
    fn surround_census_counts_enclosed_sites() {
        let c = census(8, AnchorMode::SurroundsOrigin);
        assert_eq!(c.counts[4], 1);
        assert_eq!(c.counts[6], 4);
        // 2x2 square (4), two straight trominoes (3 each), four L-trominoes
        // (3 each), two diagonal figure-eights (2 each).
        assert_eq!(c.counts[8], 4 + 6 + 12 + 4);
        let sq = Contour::boundary_of_sites(&[[0, 0], [1, 0], [0, 1], [1, 1]]).unwrap();
        let cat = ShapeCatalog::cached(8).unwrap();
        let (idx, _) = cat.locate(&sq).unwrap();
        assert_eq!(enclosed_sites(&cat.shapes()[idx]), 4);
    }

    #[test]
    fn l_max_four_link_sum_is_two_squares() {
        let c = census(4, AnchorMode::Link);
        for beta in [1.2, 2.0, 5.0] {
            let b = c.bounds(beta).unwrap();
            let exact = 2.0 * (-4.0 * beta).exp();
            assert!(b.lower <= exact && exact <= b.lower * (1.0 + 1e-14));
            assert!(b.upper > b.lower);
        }
    }

    #[test]
    fn tail_matches_closed_form_geometric_series() {
        // sum_{n >= m} n x^n = x^m (m / (1 - x) + x / (1 - x)^2)
        let c = census(6, AnchorMode::Link);
        let beta = 1.6f64;
        let x = 3.0 * (-beta).exp();
        let m = 7.0;
        let closed = x.powf(m) * (m / (1.0 - x) + x / (1.0 - x).powi(2));
        let t = c.tail(beta).unwrap();
        assert!(t >= closed);
        assert!(t <= closed * (1.0 + 1e-10));
    }

    #[test]
    fn divergent_tail_is_an_error() {
        let c = census(6, AnchorMode::Vertex);
        assert!(matches!(c.bounds(1.0), Err(Error::DivergentTail { .. })));
        assert!(matches!(c.bounds(LN_3), Err(Error::DivergentTail { .. })));
    }

    #[test]
    fn bounds_are_ordered_and_monotone() {
        for mode in [AnchorMode::Link, AnchorMode::Vertex, AnchorMode::SurroundsOrigin] {
            let c6 = census(6, mode);
            let c12 = census(12, mode);
            let mut prev: Option<Alpha0Bounds> = None;
            for k in 0..20 {
                let beta = 1.2 + 0.15 * k as f64;
                let a = c6.bounds(beta).unwrap();
                let b = c12.bounds(beta).unwrap();
                assert!(a.lower <= a.upper && b.lower <= b.upper);
                assert!(b.lower >= a.lower);
                assert!(b.upper <= a.upper);
                assert!(b.upper - b.lower < a.upper - a.lower);
                if let Some(p) = prev {
                    assert!(a.lower < p.lower && a.upper < p.upper);
                }
                prev = Some(a);
            }
        }
    }

    #[test]
    fn large_beta_dominated_by_smallest_contours() {
        let c = census(8, AnchorMode::Link);
        let b = c.bounds(8.0).unwrap();
        let lead = 2.0 * (-32.0f64).exp();
        assert!((b.lower / lead - 1.0).abs() < 1e-5);
        assert!((b.upper / lead - 1.0).abs() < 1e-5);
    }

    #[test]
    fn bracket_root_of_single_term() {
        let c = census(4, AnchorMode::Link);
        let br = beta_star_bracket_loose(&c).unwrap();
        let root = std::f64::consts::LN_2 / 4.0;
        assert!((br.lo - root).abs() < 1e-12);
        assert!(br.lo <= root);
    }

    #[test]
    fn bracket_upper_end_below_1_6_for_long_census() {
        let c = census(16, AnchorMode::Link);
        assert!(c.bounds(1.6).unwrap().upper < 1.0);
        let br = beta_star_bracket_loose(&c).unwrap();
        assert!(br.hi <= 1.6);
        assert!(br.lo < br.hi);
    }

    #[test]
    fn brackets_nest_as_l_max_grows() {
        let mut prev: Option<BetaStarBracket> = None;
        for l in [6, 8, 10, 12] {
            let br = beta_star_bracket_loose(&census(l, AnchorMode::Vertex)).unwrap();
            if let Some(p) = prev {
                assert!(br.lo >= p.lo && br.hi <= p.hi);
            }
            prev = Some(br);
        }
    }

    #[test]
    fn tight_tolerance_reports_wide_bracket() {
        match beta_star_bracket(1e-3, 8, AnchorMode::Vertex) {
            Err(Error::BracketTooWide { lo, hi, .. }) => assert!(hi - lo > 1e-3),
            other => panic!("expected a width report, got {other:?}"),
        }
        assert!(beta_star_bracket(10.0, 8, AnchorMode::Vertex).is_ok());
    }
}
