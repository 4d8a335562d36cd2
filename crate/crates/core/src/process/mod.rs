//! The space-time cylinder process: free network, clans of ancestors,
//! perfect sampling of the loss network, forward dynamics and the clan
//! coupling.

mod clan;
mod dynamics;
mod sampler;
mod system;

pub use clan::{
    classify, classify_edges, grow_clan, incompatible_cylinders, validate_clan, Budget, Clan,
    Cylinder, Label, Store,
};
pub use dynamics::{exact_gibbs_small, forward_dynamics, ExactGibbs, ForwardSummary, EXACT_STATE_LIMIT};
pub use sampler::{
    coupled_clans, palm_kept, sample_eta_zero, sample_free_network_at_zero, stream_rng,
    CoupledClans, PerfectSample, SimRng,
};
pub use system::{poisson, ContourSystem, FiniteFamily, LatticeSystem, RootSet};
