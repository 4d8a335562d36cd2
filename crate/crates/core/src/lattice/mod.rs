//! Square-lattice Peierls contours: geometry, enumeration and the
//! anchored contour sum `alpha0(beta)`.

mod alpha;
mod contour;
mod enumerate;

pub use alpha::{
    alpha0_bounds, beta_star_bracket, beta_star_bracket_loose, Alpha0Bounds, AnchorCensus,
    AnchorMode, BetaStarBracket, LN_3,
};
pub use contour::{compatible, contour_distance, Contour, DistancePoints, Link, Norm, Point, SiteBox};
#[allow(unused_imports)]
pub(crate) use contour::{sorted_disjoint, sorted_intersection_count};
pub use enumerate::{
    enumerate_anchored, enumerate_window, enumerate_window_with, ContourFamily, FamilySource,
    Shape, ShapeCatalog,
};
