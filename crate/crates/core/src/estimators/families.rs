//! Small hand-built families used by the exactness and lemma checks.

use crate::lattice::{Contour, ContourFamily, Point};

fn boundary(sites: &[Point]) -> Contour {
    Contour::boundary_of_sites(sites).expect("simply connected polyomino")
}

/// Three unit squares: two sharing an edge and one far away.
pub fn triple() -> ContourFamily {
    ContourFamily::explicit(vec![
        Contour::unit_square([0, 0]),
        Contour::unit_square([1, 0]),
        Contour::unit_square([5, 0]),
    ])
}

/// The nine unit squares of a 3x3 block with both dominoes and the 2x2
/// square at its corner: twelve strongly interacting contours.
pub fn block() -> ContourFamily {
    let mut m: Vec<Contour> = (0..3)
        .flat_map(|y| (0..3).map(move |x| Contour::unit_square([x, y])))
        .collect();
    m.push(boundary(&[[0, 0], [1, 0]]));
    m.push(boundary(&[[0, 0], [0, 1]]));
    m.push(boundary(&[[0, 0], [1, 0], [0, 1], [1, 1]]));
    ContourFamily::explicit(m)
}

/// A row of six touching unit squares and a parallel row of six spaced
/// ones.
pub fn rows() -> ContourFamily {
    let mut m: Vec<Contour> = (0..6).map(|x| Contour::unit_square([x, 0])).collect();
    m.extend((0..6).map(|x| Contour::unit_square([2 * x, 3])));
    ContourFamily::explicit(m)
}

/// The boundary of a 3x3 block, the nine unit squares inside it and a
/// domino through the centre: nested contours of mixed lengths.
pub fn ring() -> ContourFamily {
    let block: Vec<Point> = (0..3).flat_map(|y| (0..3).map(move |x| [x, y])).collect();
    let mut m = vec![boundary(&block)];
    m.extend(block.iter().map(|&s| Contour::unit_square(s)));
    m.push(boundary(&[[1, 1], [2, 1]]));
    ContourFamily::explicit(m)
}

/// The families of at most twelve contours used for exactness checks.
pub fn exactness_families() -> Vec<(&'static str, ContourFamily)> {
    vec![("block", block()), ("rows", rows()), ("ring", ring())]
}

/// One contour of each small shape: lengths 4, 6, 6, 8 and 8.
pub fn lemma_contours() -> Vec<Contour> {
    vec![
        Contour::unit_square([0, 0]),
        boundary(&[[0, 0], [1, 0]]),
        boundary(&[[0, 0], [0, 1]]),
        boundary(&[[0, 0], [1, 0], [2, 0]]),
        boundary(&[[0, 0], [1, 0], [0, 1]]),
    ]
}
