//! Perfect samples of the stationary loss network and the related
//! constructions built on clans.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::clan::{classify, grow_clan, incompatible_cylinders, Budget, Clan, Label, Store};
use super::system::{poisson, ContourSystem, FiniteFamily, RootSet};
use crate::error::Result;

pub type SimRng = ChaCha8Rng;

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SimRng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Contours present at time 0 among the root set, plus clan statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerfectSample<B> {
    /// Sorted bases of the kept roots.
    pub present: Vec<B>,
    /// Free-network cylinders of the root set alive at time 0.
    pub root_count: usize,
    pub clan_size: usize,
    pub depth: usize,
}

/// Perfect sample of the loss network at time 0, restricted to `roots`.
pub fn sample_eta_zero<S, R>(
    sys: &S,
    roots: &RootSet<S::Basis>,
    rng: &mut R,
    budget: &Budget,
) -> Result<PerfectSample<S::Basis>>
where
    S: ContourSystem,
    R: Rng + ?Sized,
{
    let mut store = Store::new();
    let mut clan = grow_clan(sys, &mut store, roots, &[], rng, budget)?;
    classify(sys, &mut clan)?;
    let mut present: Vec<S::Basis> = clan.kept_root_bases().into_iter().cloned().collect();
    present.sort();
    Ok(PerfectSample {
        present,
        root_count: clan.roots.len(),
        clan_size: clan.len(),
        depth: clan.depth,
    })
}

/// Occupation numbers of the free network at time 0: independent
/// Poisson(`e^{-beta|gamma|}`) per member.
pub fn sample_free_network_at_zero<R: Rng + ?Sized>(fam: &FiniteFamily, rng: &mut R) -> Vec<u64> {
    fam.weights().iter().map(|&w| poisson(w, rng)).collect()
}

/// Plant a cylinder with basis `gamma`, age and residual life `Exp(1)`,
/// into the process and report whether it is kept. The presence
/// probability is `weight(gamma)` times the probability of this event.
pub fn palm_kept<S, R>(sys: &S, gamma: &S::Basis, rng: &mut R, budget: &Budget) -> Result<bool>
where
    S: ContourSystem,
    R: Rng + ?Sized,
{
    let age: f64 = rng.sample(Exp1);
    let residual: f64 = rng.sample(Exp1);
    let mut store = Store::new();
    let mut clan = grow_clan(
        sys,
        &mut store,
        &RootSet::Bases(Vec::new()),
        &[(gamma.clone(), -age, residual)],
        rng,
        budget,
    )?;
    classify(sys, &mut clan)?;
    Ok(clan.label(clan.planted[0]) == Some(Label::Kept))
}

/// The four clans of the coupling and the interaction diagnostics.
#[derive(Clone, Debug)]
pub struct CoupledClans<B> {
    /// Clans of the two regions in one realization of the process.
    pub joint_a: Clan<B>,
    pub joint_b: Clan<B>,
    /// Clans grown from independent randomness.
    pub indep_a: Clan<B>,
    pub indep_b: Clan<B>,
    /// Some cylinder of `indep_a` is incompatible with one of `indep_b`.
    pub incompatible: bool,
    /// Some cylinder of one independent clan lies in the other's root set
    /// at time 0.
    pub root_crossing: bool,
    /// The joint clans equal the independent ones.
    pub coincide: bool,
}

impl<B> CoupledClans<B> {
    /// The clans interact; when false the joint and independent clans are
    /// guaranteed to coincide.
    pub fn flag(&self) -> bool {
        self.incompatible || self.root_crossing
    }
}

fn same_cylinders<B: PartialEq>(a: &Clan<B>, b: &Clan<B>) -> bool {
    a.len() == b.len()
        && a
            .cylinders
            .iter()
            .zip(&b.cylinders)
            .all(|(x, y)| x.basis == y.basis && x.birth == y.birth && x.death == y.death)
}

/// Couple the clans of two disjoint root sets.
///
/// The independent clans use `rng_a` and `rng_b` on separate stores. The
/// joint realization grows `a` first and then replays `b` with a copy of
/// `rng_b` on top of what `a` revealed, so the joint pair has the law of
/// the clans of one process, and equals the independent pair unless the
/// independent clans interact.
pub fn coupled_clans<S: ContourSystem>(
    sys: &S,
    region_a: &RootSet<S::Basis>,
    region_b: &RootSet<S::Basis>,
    mut rng_a: SimRng,
    rng_b: SimRng,
    budget: &Budget,
) -> Result<CoupledClans<S::Basis>> {
    let mut rng_b_joint = rng_b.clone();
    let mut rng_b = rng_b;

    let mut store_a = Store::new();
    let mut indep_a = grow_clan(sys, &mut store_a, region_a, &[], &mut rng_a, budget)?;
    let mut store_b = Store::new();
    let mut indep_b = grow_clan(sys, &mut store_b, region_b, &[], &mut rng_b, budget)?;
    let mut joint_store = store_a;
    let mut joint_b = grow_clan(sys, &mut joint_store, region_b, &[], &mut rng_b_joint, budget)?;
    classify(sys, &mut indep_a)?;
    classify(sys, &mut indep_b)?;
    classify(sys, &mut joint_b)?;

    let incompatible = indep_a.cylinders.iter().any(|x| {
        indep_b
            .cylinders
            .iter()
            .any(|y| incompatible_cylinders(sys, x, y))
    });
    let crosses = |c: &Clan<S::Basis>, r: &RootSet<S::Basis>| {
        c.cylinders
            .iter()
            .any(|x| x.alive_at(0.0) && sys.in_roots(r, &x.basis))
    };
    let root_crossing = crosses(&indep_b, region_a) || crosses(&indep_a, region_b);
    let coincide = same_cylinders(&joint_b, &indep_b);
    Ok(CoupledClans {
        joint_a: indep_a.clone(),
        joint_b,
        indep_a,
        indep_b,
        incompatible,
        root_crossing,
        coincide,
    })
}
