//! Perfect simulation of the low-temperature contour gas of the 2-D Ising
//! model through the clan-of-ancestors construction of its loss network,
//! together with the Chen–Stein bounds for the Poisson approximation of
//! large contours meeting a window.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod estimators;
pub mod interval;
pub mod lattice;
pub mod model;
pub mod process;

#[cfg(any(test, feature = "oracles"))]
pub mod oracles;

pub use bounds::{tv_bound, BoundParams, BoundReport};
pub use error::{Error, Result};
pub use estimators::{ExperimentSpec, LemmaReport, Target, TvReport, Verdict};
pub use interval::Interval;
pub use lattice::{
    AnchorMode, BetaStarBracket, Contour, ContourFamily, DistancePoints, Link, Norm, SiteBox,
};
pub use model::ModelParams;
pub use process::{Budget, Clan, Cylinder, FiniteFamily, Label, LatticeSystem, RootSet};
