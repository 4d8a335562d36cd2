//! Dual-lattice links and Peierls contours on the square lattice.
//!
//! All geometry is kept in *doubled* coordinates so that half-integer points
//! are exact: a link dual to the primal edge `{x, x + e_i}` has midpoint
//! `2x + e_i`, and dual-lattice vertices have both coordinates odd.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [i32; 2];

/// A dual-lattice link, identified by its doubled midpoint.
///
/// Exactly one coordinate of `mid` is odd; that coordinate's axis is the
/// direction of the primal edge the link crosses.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Link {
    pub mid: Point,
}

impl Link {
    pub fn new(mid: Point) -> Result<Link> {
        if (mid[0] & 1) + (mid[1] & 1) != 1 {
            return Err(Error::param(format!(
                "doubled midpoint ({}, {}) must have exactly one odd coordinate",
                mid[0], mid[1]
            )));
        }
        Ok(Link { mid })
    }

    /// The link crossing the primal edge between `site` and `site + e_axis`.
    pub fn crossing(site: Point, axis: usize) -> Link {
        let mut mid = [2 * site[0], 2 * site[1]];
        mid[axis] += 1;
        Link { mid }
    }

    /// Axis of the crossed primal edge (0 or 1).
    pub fn orientation(&self) -> usize {
        if self.mid[0] & 1 == 1 {
            0
        } else {
            1
        }
    }

    /// Lower endpoint of the crossed primal edge, in site coordinates.
    pub fn base_site(&self) -> Point {
        // Flooring the odd coordinate lands on the lower endpoint.
        [self.mid[0].div_euclid(2), self.mid[1].div_euclid(2)]
    }

    /// The two dual vertices joined by this link (doubled coordinates).
    pub fn endpoints(&self) -> [Point; 2] {
        let [x, y] = self.mid;
        if self.orientation() == 0 {
            [[x, y - 1], [x, y + 1]]
        } else {
            [[x - 1, y], [x + 1, y]]
        }
    }

    pub fn translated(&self, by: Point) -> Link {
        Link {
            mid: [self.mid[0] + 2 * by[0], self.mid[1] + 2 * by[1]],
        }
    }
}

impl fmt::Debug for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.mid[0], self.mid[1])
    }
}

/// The four links incident to a dual vertex.
pub(crate) fn incident_links(v: Point) -> [Link; 4] {
    [
        Link { mid: [v[0] + 1, v[1]] },
        Link { mid: [v[0] - 1, v[1]] },
        Link { mid: [v[0], v[1] + 1] },
        Link { mid: [v[0], v[1] - 1] },
    ]
}

/// Inclusive box of primal sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteBox {
    pub min: Point,
    pub max: Point,
}

impl SiteBox {
    pub fn new(min: Point, max: Point) -> Result<SiteBox> {
        if min[0] > max[0] || min[1] > max[1] {
            return Err(Error::param("empty site box"));
        }
        Ok(SiteBox { min, max })
    }

    /// A `side x side` box with lower corner at `origin`.
    pub fn square(origin: Point, side: u32) -> Result<SiteBox> {
        if side == 0 {
            return Err(Error::param("window side must be at least 1"));
        }
        let s = side as i32 - 1;
        SiteBox::new(origin, [origin[0] + s, origin[1] + s])
    }

    /// A `side x side` box roughly centred on the origin.
    pub fn centered(side: u32) -> Result<SiteBox> {
        let lo = -(side as i32 / 2);
        SiteBox::square([lo, lo], side)
    }

    pub fn side(&self, axis: usize) -> i64 {
        (self.max[axis] - self.min[axis]) as i64 + 1
    }

    pub fn area(&self) -> i64 {
        self.side(0) * self.side(1)
    }

    pub fn contains(&self, p: Point) -> bool {
        (0..2).all(|i| self.min[i] <= p[i] && p[i] <= self.max[i])
    }

    /// Inclusive range of base sites `x` such that the link crossing
    /// `{x, x + e_o}` has an endpoint in the box.
    pub fn touching_base_range(&self, orientation: usize) -> (Point, Point) {
        let mut lo = self.min;
        lo[orientation] -= 1;
        (lo, self.max)
    }

    pub fn touching_link_count(&self, orientation: usize) -> i64 {
        let (lo, hi) = self.touching_base_range(orientation);
        ((hi[0] - lo[0]) as i64 + 1) * ((hi[1] - lo[1]) as i64 + 1)
    }

    /// A link touches the box when the primal edge it crosses has at least
    /// one endpoint inside.
    pub fn touches(&self, link: &Link) -> bool {
        let o = link.orientation();
        let (lo, hi) = self.touching_base_range(o);
        let s = link.base_site();
        (0..2).all(|i| lo[i] <= s[i] && s[i] <= hi[i])
    }

    pub fn translated(&self, by: Point) -> SiteBox {
        SiteBox {
            min: [self.min[0] + by[0], self.min[1] + by[1]],
            max: [self.max[0] + by[0], self.max[1] + by[1]],
        }
    }

    pub fn is_disjoint(&self, other: &SiteBox) -> bool {
        (0..2).any(|i| self.max[i] < other.min[i] || other.max[i] < self.min[i])
    }

    pub fn sites(&self) -> impl Iterator<Item = Point> + '_ {
        (self.min[1]..=self.max[1])
            .flat_map(move |y| (self.min[0]..=self.max[0]).map(move |x| [x, y]))
    }
}

/// Norm used for the distance between contours.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Norm {
    #[default]
    Euclidean,
    Sup,
}

/// Which points of a contour enter the distance computation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistancePoints {
    #[default]
    LinkMidpoints,
    DualVertices,
}

/// A Peierls contour: a closed, connected set of dual links in canonical
/// (sorted) order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Link>", into = "Vec<Link>")]
pub struct Contour {
    links: Vec<Link>,
}

impl TryFrom<Vec<Link>> for Contour {
    type Error = Error;
    fn try_from(links: Vec<Link>) -> Result<Contour> {
        Contour::new(links)
    }
}

impl From<Contour> for Vec<Link> {
    fn from(c: Contour) -> Vec<Link> {
        c.links
    }
}

impl fmt::Debug for Contour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.links).finish()
    }
}

impl Contour {
    /// Validates closedness and connectedness and canonicalizes the links.
    pub fn new(mut links: Vec<Link>) -> Result<Contour> {
        links.sort_unstable();
        let n = links.len();
        links.dedup();
        if links.len() != n {
            return Err(Error::param("contour repeats a link"));
        }
        if links.is_empty() {
            return Err(Error::param("contour has no links"));
        }
        let c = Contour { links };
        if !c.is_closed() {
            return Err(Error::param("link set is not closed"));
        }
        if !c.is_connected() {
            return Err(Error::param("link set is not connected"));
        }
        Ok(c)
    }

    /// Caller guarantees `links` is sorted, closed and connected.
    pub(crate) fn from_sorted_unchecked(links: Vec<Link>) -> Contour {
        debug_assert!(links.windows(2).all(|w| w[0] < w[1]));
        Contour { links }
    }

    /// The boundary of the single site `site`.
    pub fn unit_square(site: Point) -> Contour {
        let mut links = vec![
            Link::crossing(site, 0),
            Link::crossing([site[0] - 1, site[1]], 0),
            Link::crossing(site, 1),
            Link::crossing([site[0], site[1] - 1], 1),
        ];
        links.sort_unstable();
        Contour { links }
    }

    /// The outer boundary of a set of sites whose boundary is a single
    /// closed connected link set (e.g. a polyomino without holes).
    pub fn boundary_of_sites(sites: &[Point]) -> Result<Contour> {
        let set: BTreeSet<Point> = sites.iter().copied().collect();
        let mut links = Vec::new();
        for &s in &set {
            for axis in 0..2 {
                let mut up = s;
                up[axis] += 1;
                let mut down = s;
                down[axis] -= 1;
                if !set.contains(&up) {
                    links.push(Link::crossing(s, axis));
                }
                if !set.contains(&down) {
                    links.push(Link::crossing(down, axis));
                }
            }
        }
        Contour::new(links)
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    /// `|γ|`, the number of links.
    pub fn len(&self) -> usize {
        self.links.len()
    }

    pub fn is_empty(&self) -> bool {
        self.links.is_empty()
    }

    /// Sorted, deduplicated dual vertices touched by the contour.
    pub fn vertices(&self) -> Vec<Point> {
        let mut v: Vec<Point> = self.links.iter().flat_map(|l| l.endpoints()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Bounding box of the doubled link midpoints, `(min, max)`.
    pub fn bbox(&self) -> (Point, Point) {
        let mut lo = [i32::MAX; 2];
        let mut hi = [i32::MIN; 2];
        for l in &self.links {
            for i in 0..2 {
                lo[i] = lo[i].min(l.mid[i]);
                hi[i] = hi[i].max(l.mid[i]);
            }
        }
        (lo, hi)
    }

    pub fn contains_link(&self, l: &Link) -> bool {
        self.links.binary_search(l).is_ok()
    }

    pub fn contains_vertex(&self, v: Point) -> bool {
        incident_links(v).iter().any(|l| self.contains_link(l))
    }

    pub fn translated(&self, by: Point) -> Contour {
        Contour {
            links: self.links.iter().map(|l| l.translated(by)).collect(),
        }
    }

    /// Translation (in site units) that moves the contour to its
    /// normal form, where the smallest link lies in the cell `{0,1}^2`.
    pub fn normalizing_shift(&self) -> Point {
        let m = self.links[0].mid;
        [-m[0].div_euclid(2), -m[1].div_euclid(2)]
    }

    pub fn touches_window(&self, window: &SiteBox) -> bool {
        self.links.iter().any(|l| window.touches(l))
    }

    pub fn is_closed(&self) -> bool {
        let mut deg: HashMap<Point, u8> = HashMap::new();
        for l in &self.links {
            for v in l.endpoints() {
                *deg.entry(v).or_default() += 1;
            }
        }
        deg.values().all(|d| d % 2 == 0)
    }

    pub fn is_connected(&self) -> bool {
        let n = self.links.len();
        if n == 0 {
            return false;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for v in self.links[i].endpoints() {
                for nb in incident_links(v) {
                    if let Ok(j) = self.links.binary_search(&nb) {
                        if !seen[j] {
                            seen[j] = true;
                            count += 1;
                            stack.push(j);
                        }
                    }
                }
            }
        }
        count == n
    }

    /// Serializes as one line: links as `x,y` doubled midpoints separated by
    /// single spaces.
    pub fn to_line(&self) -> String {
        let parts: Vec<String> = self
            .links
            .iter()
            .map(|l| format!("{},{}", l.mid[0], l.mid[1]))
            .collect();
        parts.join(" ")
    }

    pub fn from_line(line: &str) -> Result<Contour> {
        let mut links = Vec::new();
        for tok in line.split_whitespace() {
            let (a, b) = tok
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("bad link token {tok:?}")))?;
            let x = a
                .parse::<i32>()
                .map_err(|e| Error::Parse(format!("{tok:?}: {e}")))?;
            let y = b
                .parse::<i32>()
                .map_err(|e| Error::Parse(format!("{tok:?}: {e}")))?;
            links.push(Link::new([x, y])?);
        }
        Contour::new(links)
    }
}

/// `true` iff no link of `a` shares a dual vertex with a link of `b`.
///
/// A contour is never compatible with itself.
pub fn compatible(a: &Contour, b: &Contour) -> bool {
    let (alo, ahi) = a.bbox();
    let (blo, bhi) = b.bbox();
    // Midpoints of links sharing a vertex differ by at most 2 per axis.
    if (0..2).any(|i| ahi[i] + 2 < blo[i] || bhi[i] + 2 < alo[i]) {
        return true;
    }
    let va = a.vertices();
    let vb = b.vertices();
    sorted_disjoint(&va, &vb)
}

pub(crate) fn sorted_disjoint(a: &[Point], b: &[Point]) -> bool {
    sorted_intersection_count(a, b, 1) == 0
}

/// Number of common elements of two sorted slices, stopping at `limit`.
pub(crate) fn sorted_intersection_count(a: &[Point], b: &[Point], limit: usize) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                if n >= limit {
                    return n;
                }
                i += 1;
                j += 1;
            }
        }
    }
    n
}

fn point_distance(p: Point, q: Point, norm: Norm) -> f64 {
    // Doubled coordinates: halve at the end.
    let dx = (p[0] - q[0]).abs() as f64;
    let dy = (p[1] - q[1]).abs() as f64;
    let d = match norm {
        Norm::Euclidean => dx.hypot(dy),
        Norm::Sup => dx.max(dy),
    };
    0.5 * d
}

/// `min |x - y|` over points `x` of `a` and `y` of `b`.
pub fn contour_distance(a: &Contour, b: &Contour, norm: Norm, points: DistancePoints) -> f64 {
    let pts = |c: &Contour| -> Vec<Point> {
        match points {
            DistancePoints::LinkMidpoints => c.links.iter().map(|l| l.mid).collect(),
            DistancePoints::DualVertices => c.vertices(),
        }
    };
    let pa = pts(a);
    let pb = pts(b);
    let mut best = f64::INFINITY;
    for &p in &pa {
        for &q in &pb {
            best = best.min(point_distance(p, q, norm));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn domino_h() -> Contour {
        Contour::boundary_of_sites(&[[0, 0], [1, 0]]).unwrap()
    }

    #[test]
    fn link_parity_is_checked() {
        assert!(Link::new([1, 0]).is_ok());
        assert!(Link::new([0, 0]).is_err());
        assert!(Link::new([1, 1]).is_err());
        assert_eq!(Link::crossing([0, 0], 0).mid, [1, 0]);
        assert_eq!(Link::crossing([0, 0], 1).mid, [0, 1]);
        assert_eq!(Link::crossing([-1, 3], 0).base_site(), [-1, 3]);
        assert_eq!(Link::crossing([-2, -1], 1).base_site(), [-2, -1]);
    }

    #[test]
    fn unit_square_is_a_valid_contour() {
        let sq = Contour::unit_square([0, 0]);
        assert_eq!(sq.len(), 4);
        assert_eq!(Contour::new(sq.links().to_vec()).unwrap(), sq);
        assert_eq!(sq.vertices().len(), 4);
        assert_eq!(domino_h().len(), 6);
    }

    #[test]
    fn open_or_disconnected_sets_are_rejected() {
        let sq = Contour::unit_square([0, 0]);
        let mut open = sq.links().to_vec();
        open.pop();
        assert!(Contour::new(open).is_err());
        let far = Contour::unit_square([5, 0]);
        let mut two = sq.links().to_vec();
        two.extend_from_slice(far.links());
        assert!(Contour::new(two).is_err());
    }

    #[test]
    fn figure_eight_through_a_shared_vertex_is_one_contour() {
        let mut links = Contour::unit_square([0, 0]).links().to_vec();
        links.extend_from_slice(Contour::unit_square([1, 1]).links());
        let c = Contour::new(links).unwrap();
        assert_eq!(c.len(), 8);
        assert_eq!(c.vertices().len(), 7);
    }

    #[test]
    fn compatibility_examples() {
        let sq = Contour::unit_square([0, 0]);
        assert!(!compatible(&sq, &sq));
        assert!(compatible(&sq, &sq.translated([10, 0])));
        // Diagonal neighbours share exactly one corner vertex.
        let diag = Contour::unit_square([1, 1]);
        assert_eq!(sorted_intersection_count(&sq.vertices(), &diag.vertices(), 9), 1);
        assert!(!compatible(&sq, &diag));
        // Two sites apart: no shared vertex.
        assert!(compatible(&sq, &sq.translated([2, 0])));
    }

    #[test]
    fn distance_examples() {
        let sq = Contour::unit_square([0, 0]);
        let d = |a: &Contour, b: &Contour| {
            contour_distance(a, b, Norm::Euclidean, DistancePoints::LinkMidpoints)
        };
        assert_eq!(d(&sq, &sq), 0.0);
        // Right link of one square to the left link of the other.
        assert_eq!(d(&sq, &sq.translated([7, 0])), 6.0);
        // Brute-force value for the square at the origin and its neighbour
        // one step to the right: they share the link with midpoint (1, 0).
        assert_eq!(d(&sq, &sq.translated([1, 0])), 0.0);
        // Diagonal neighbour: nearest midpoints (1,0) and (2,1)/2 -> (0.5, 0.5).
        let diag = sq.translated([1, 1]);
        let mut brute = f64::INFINITY;
        for a in sq.links() {
            for b in diag.links() {
                let dx = (a.mid[0] - b.mid[0]) as f64 / 2.0;
                let dy = (a.mid[1] - b.mid[1]) as f64 / 2.0;
                brute = brute.min((dx * dx + dy * dy).sqrt());
            }
        }
        assert_eq!(d(&sq, &diag), brute);
        assert!((brute - 0.5f64.hypot(0.5)).abs() < 1e-15);
        let sup = contour_distance(&sq, &diag, Norm::Sup, DistancePoints::LinkMidpoints);
        assert_eq!(sup, 0.5);
        let verts = contour_distance(&sq, &diag, Norm::Euclidean, DistancePoints::DualVertices);
        assert_eq!(verts, 0.0);
    }

    #[test]
    fn window_touching_rule() {
        let w = SiteBox::square([0, 0], 1).unwrap();
        assert!(w.touches(&Link::crossing([0, 0], 0)));
        assert!(w.touches(&Link::crossing([-1, 0], 0)));
        assert!(!w.touches(&Link::crossing([1, 0], 0)));
        assert!(w.touches(&Link::crossing([0, -1], 1)));
        assert_eq!(w.touching_link_count(0), 2);
        assert!(Contour::unit_square([1, 0]).touches_window(&w));
        assert!(!Contour::unit_square([1, 1]).touches_window(&w));
    }

    #[test]
    fn line_format_round_trips() {
        let c = domino_h();
        let line = c.to_line();
        assert_eq!(Contour::from_line(&line).unwrap(), c);
        assert_eq!(Contour::unit_square([0, 0]).to_line(), "-1,0 0,-1 0,1 1,0");
    }
}
