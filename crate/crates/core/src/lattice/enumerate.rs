//! Enumeration of contours through an anchor and of contours meeting a
//! window, plus the catalog of translation classes ("shapes") that the
//! lattice sampler draws from.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::contour::{incident_links, Contour, Link, Point, SiteBox};
use crate::error::{Error, Result};

/// How a family was generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilySource {
    Anchored { anchor: Link, l_max: usize },
    Window { window: SiteBox, l_max: usize },
    Explicit,
}

/// A finite, duplicate-free set of contours in canonical order
/// (by length, then by link sequence).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContourFamily {
    members: Vec<Contour>,
    pub source: FamilySource,
    pub dimension: u8,
}

impl ContourFamily {
    pub fn new(mut members: Vec<Contour>, source: FamilySource) -> ContourFamily {
        members.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        members.dedup();
        ContourFamily {
            members,
            source,
            dimension: 2,
        }
    }

    /// A hand-built family; duplicates are removed.
    pub fn explicit(members: Vec<Contour>) -> ContourFamily {
        ContourFamily::new(members, FamilySource::Explicit)
    }

    pub fn members(&self) -> &[Contour] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn get(&self, id: usize) -> &Contour {
        &self.members[id]
    }

    pub fn position(&self, c: &Contour) -> Option<usize> {
        self.members.iter().position(|m| m == c)
    }

    pub fn max_len(&self) -> usize {
        self.members.iter().map(Contour::len).max().unwrap_or(0)
    }

    /// Members with at least `n` links that touch `window`.
    pub fn filter_large_in(&self, n: usize, window: &SiteBox) -> ContourFamily {
        let members = self
            .members
            .iter()
            .filter(|c| c.len() >= n && c.touches_window(window))
            .cloned()
            .collect();
        ContourFamily::new(members, FamilySource::Explicit)
    }

    /// Number of members of each length, indexed by length.
    pub fn length_histogram(&self) -> Vec<u64> {
        let mut h = vec![0u64; self.max_len() + 1];
        for c in &self.members {
            h[c.len()] += 1;
        }
        h
    }

    /// One contour per line, lines sorted bytewise.
    pub fn to_text(&self) -> String {
        let mut lines: Vec<String> = self.members.iter().map(Contour::to_line).collect();
        lines.sort();
        let mut s = String::new();
        for l in lines {
            s.push_str(&l);
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<ContourFamily> {
        let members = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(Contour::from_line)
            .collect::<Result<Vec<_>>>()?;
        let n = members.len();
        let fam = ContourFamily::explicit(members);
        if fam.len() != n {
            return Err(Error::Parse("duplicate contour in family file".into()));
        }
        Ok(fam)
    }
}

fn check_l_max(l_max: usize) -> Result<()> {
    if l_max < 4 || l_max % 2 == 1 {
        return Err(Error::param(format!(
            "L_max must be even and at least 4 (got {l_max})"
        )));
    }
    Ok(())
}

/// Every closed connected link set with at most `l_max` links containing
/// `anchor`.
///
/// Each such set carries an Euler circuit, which can be rotated and
/// reversed so that it starts by traversing the anchor in a fixed
/// direction. We enumerate those closed trails depth-first, pruning any
/// partial trail that can no longer return to its start, and deduplicate
/// the resulting link sets.
pub fn enumerate_anchored(anchor: Link, l_max: usize) -> Result<ContourFamily> {
    check_l_max(l_max)?;
    let sets = anchored_link_sets(anchor, l_max);
    let members = sets
        .into_iter()
        .map(Contour::from_sorted_unchecked)
        .collect();
    Ok(ContourFamily::new(
        members,
        FamilySource::Anchored { anchor, l_max },
    ))
}

fn anchored_link_sets(anchor: Link, l_max: usize) -> HashSet<Vec<Link>> {
    let [start, next] = anchor.endpoints();
    let mut out = HashSet::new();
    let mut used = Vec::with_capacity(l_max);
    used.push(anchor);
    trail_dfs(next, start, l_max, &mut used, &mut out);
    out
}

fn steps_between(a: Point, b: Point) -> usize {
    (((a[0] - b[0]).abs() + (a[1] - b[1]).abs()) / 2) as usize
}

fn trail_dfs(
    at: Point,
    start: Point,
    l_max: usize,
    used: &mut Vec<Link>,
    out: &mut HashSet<Vec<Link>>,
) {
    if at == start {
        let mut set = used.clone();
        set.sort_unstable();
        out.insert(set);
    }
    if used.len() == l_max {
        return;
    }
    let budget = l_max - used.len() - 1;
    for l in incident_links(at) {
        if used.contains(&l) {
            continue;
        }
        let [a, b] = l.endpoints();
        let to = if a == at { b } else { a };
        if steps_between(to, start) > budget {
            continue;
        }
        used.push(l);
        trail_dfs(to, start, l_max, used, out);
        used.pop();
    }
}

/// A translation class of contours, stored in normal form together with the
/// data the samplers need.
#[derive(Clone, Debug)]
pub struct Shape {
    pub contour: Contour,
    /// Sorted dual vertices of the normal-form contour.
    pub vertices: Vec<Point>,
    /// Links split by orientation.
    pub links_by_orientation: [Vec<Link>; 2],
}

impl Shape {
    fn new(contour: Contour) -> Shape {
        let vertices = contour.vertices();
        let mut by = [Vec::new(), Vec::new()];
        for l in contour.links() {
            by[l.orientation()].push(*l);
        }
        Shape {
            contour,
            vertices,
            links_by_orientation: by,
        }
    }

    pub fn len(&self) -> usize {
        self.contour.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contour.is_empty()
    }
}

/// All translation classes of contours with at most `l_max` links.
#[derive(Clone, Debug)]
pub struct ShapeCatalog {
    pub l_max: usize,
    shapes: Vec<Shape>,
}

impl ShapeCatalog {
    pub fn build(l_max: usize) -> Result<ShapeCatalog> {
        check_l_max(l_max)?;
        // Every contour has links of both orientations, so the contours
        // through one fixed link of orientation 0 hit every class.
        let sets = anchored_link_sets(Link::crossing([0, 0], 0), l_max);
        let mut classes = BTreeSet::new();
        for set in sets {
            let c = Contour::from_sorted_unchecked(set);
            let shift = c.normalizing_shift();
            classes.insert((c.len(), c.translated(shift)));
        }
        let shapes = classes.into_iter().map(|(_, c)| Shape::new(c)).collect();
        Ok(ShapeCatalog { l_max, shapes })
    }

    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    /// Index of the shape of `c` and the translation placing it, if `c` is
    /// short enough to be in the catalog.
    pub fn locate(&self, c: &Contour) -> Option<(usize, Point)> {
        let shift = c.normalizing_shift();
        let normal = c.translated(shift);
        let idx = self
            .shapes
            .binary_search_by(|s| {
                s.len()
                    .cmp(&normal.len())
                    .then_with(|| s.contour.cmp(&normal))
            })
            .ok()?;
        Some((idx, [-shift[0], -shift[1]]))
    }

    /// Translations placing shape `idx` so that it touches `window`.
    pub fn placements_touching(&self, idx: usize, window: &SiteBox) -> BTreeSet<Point> {
        let mut out = BTreeSet::new();
        for o in 0..2 {
            let (lo, hi) = window.touching_base_range(o);
            for l in &self.shapes[idx].links_by_orientation[o] {
                let b = l.base_site();
                for ty in (lo[1] - b[1])..=(hi[1] - b[1]) {
                    for tx in (lo[0] - b[0])..=(hi[0] - b[0]) {
                        out.insert([tx, ty]);
                    }
                }
            }
        }
        out
    }

    /// Number of translations placing shape `idx` so that it touches
    /// `window`, without listing them (area of a union of rectangles).
    pub fn placements_touching_count(&self, idx: usize, window: &SiteBox) -> u64 {
        let mut rects: Vec<(i64, i64, i64, i64)> = Vec::new();
        for o in 0..2 {
            let (lo, hi) = window.touching_base_range(o);
            for l in &self.shapes[idx].links_by_orientation[o] {
                let b = l.base_site();
                rects.push((
                    (lo[0] - b[0]) as i64,
                    (hi[0] - b[0]) as i64 + 1,
                    (lo[1] - b[1]) as i64,
                    (hi[1] - b[1]) as i64 + 1,
                ));
            }
        }
        let mut xs: Vec<i64> = rects.iter().flat_map(|r| [r.0, r.1]).collect();
        xs.sort_unstable();
        xs.dedup();
        let mut area = 0u64;
        for w in xs.windows(2) {
            let mut ys: Vec<(i64, i64)> = rects
                .iter()
                .filter(|r| r.0 <= w[0] && w[1] <= r.1)
                .map(|r| (r.2, r.3))
                .collect();
            ys.sort_unstable();
            let mut covered = 0i64;
            let mut cur: Option<(i64, i64)> = None;
            for (a, b) in ys {
                match cur {
                    Some((ca, cb)) if a <= cb => cur = Some((ca, cb.max(b))),
                    Some((ca, cb)) => {
                        covered += cb - ca;
                        cur = Some((a, b));
                    }
                    None => cur = Some((a, b)),
                }
            }
            if let Some((ca, cb)) = cur {
                covered += cb - ca;
            }
            area += (covered * (w[1] - w[0])) as u64;
        }
        area
    }
}

/// Every contour with at most `l_max` links that touches `window`.
pub fn enumerate_window(window: &SiteBox, l_max: usize) -> Result<ContourFamily> {
    let catalog = ShapeCatalog::build(l_max)?;
    Ok(enumerate_window_with(&catalog, window))
}

pub fn enumerate_window_with(catalog: &ShapeCatalog, window: &SiteBox) -> ContourFamily {
    let mut members = Vec::new();
    for (i, s) in catalog.shapes().iter().enumerate() {
        for t in catalog.placements_touching(i, window) {
            members.push(s.contour.translated(t));
        }
    }
    ContourFamily::new(
        members,
        FamilySource::Window {
            window: *window,
            l_max: catalog.l_max,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn anchor() -> Link {
        Link::crossing([0, 0], 0)
    }

    #[test]
    fn placement_count_matches_listing() {
        let cat = ShapeCatalog::build(10).unwrap();
        for w in [
            SiteBox::square([0, 0], 1).unwrap(),
            SiteBox::square([-3, 2], 4).unwrap(),
            SiteBox::new([0, 0], [6, 1]).unwrap(),
        ] {
            for i in 0..cat.len() {
                assert_eq!(
                    cat.placements_touching_count(i, &w),
                    cat.placements_touching(i, &w).len() as u64
                );
            }
        }
    }

    #[test]
    fn l_max_is_validated() {
        assert!(enumerate_anchored(anchor(), 3).is_err());
        assert!(enumerate_anchored(anchor(), 5).is_err());
        assert!(enumerate_anchored(anchor(), 2).is_err());
    }

    #[test]
    fn two_unit_squares_contain_the_anchor() {
        let fam = enumerate_anchored(anchor(), 4).unwrap();
        assert_eq!(fam.len(), 2);
        assert!(fam.members().contains(&Contour::unit_square([0, 0])));
        assert!(fam.members().contains(&Contour::unit_square([1, 0])));
    }

    #[test]
    fn length_six_adds_the_six_dominoes_through_the_anchor() {
        let fam = enumerate_anchored(anchor(), 6).unwrap();
        assert_eq!(fam.len(), 8);
        assert_eq!(fam.length_histogram()[6], 6);
    }

    #[test]
    fn members_are_valid_and_sorted() {
        let fam = enumerate_anchored(anchor(), 10).unwrap();
        for c in fam.members() {
            assert!(c.is_closed() && c.is_connected());
            assert!(c.len() % 2 == 0 && c.len() >= 4 && c.len() <= 10);
            assert!(c.contains_link(&anchor()));
        }
        assert!(fam
            .members()
            .windows(2)
            .all(|w| (w[0].len(), &w[0]) < (w[1].len(), &w[1])));
    }

    #[test]
    fn catalog_classes_match_anchored_counts() {
        // Each class contributes one placement per orientation-0 link.
        let cat = ShapeCatalog::build(10).unwrap();
        let fam = enumerate_anchored(anchor(), 10).unwrap();
        let mut from_cat = vec![0u64; 11];
        for s in cat.shapes() {
            from_cat[s.len()] += s.links_by_orientation[0].len() as u64;
        }
        assert_eq!(from_cat, fam.length_histogram());
        // Known square-lattice polygon classes: 1, 2, 7 at perimeter 4, 6, 8
        // plus the two figure-eights of two diagonal squares at 8.
        let mut per_len = vec![0; 11];
        for s in cat.shapes() {
            per_len[s.len()] += 1;
        }
        assert_eq!(&per_len[4..=8], &[1, 0, 2, 0, 9]);
    }

    #[test]
    fn locate_finds_translated_shapes() {
        let cat = ShapeCatalog::build(8).unwrap();
        let c = Contour::boundary_of_sites(&[[3, -2], [3, -1], [4, -1]]).unwrap();
        let (idx, t) = cat.locate(&c).unwrap();
        assert_eq!(cat.shapes()[idx].contour.translated(t), c);
    }

    #[test]
    fn unit_window_sees_five_unit_squares() {
        let w = SiteBox::square([0, 0], 1).unwrap();
        let fam = enumerate_window(&w, 4).unwrap();
        assert_eq!(fam.len(), 5);
        for c in fam.members() {
            assert!(c.touches_window(&w));
        }
    }

    #[test]
    fn window_family_is_translation_covariant() {
        let w = SiteBox::square([0, 0], 2).unwrap();
        let shift = [5, -3];
        let a = enumerate_window(&w, 6).unwrap();
        let b = enumerate_window(&w.translated(shift), 6).unwrap();
        let moved: Vec<Contour> = a.members().iter().map(|c| c.translated(shift)).collect();
        assert_eq!(ContourFamily::explicit(moved).members(), b.members());
    }

    #[test]
    fn large_contour_filter_beyond_l_max_is_empty() {
        let w = SiteBox::square([0, 0], 2).unwrap();
        let fam = enumerate_window(&w, 6).unwrap();
        assert!(fam.filter_large_in(8, &w).is_empty());
        assert_eq!(fam.filter_large_in(6, &w).length_histogram()[4], 0);
    }

    #[test]
    fn text_format_round_trips() {
        let fam = enumerate_anchored(anchor(), 6).unwrap();
        let text = fam.to_text();
        let back = ContourFamily::from_text(&text).unwrap();
        assert_eq!(back.members(), fam.members());
        assert!(ContourFamily::from_text("1,0 1,0").is_err());
    }
}
