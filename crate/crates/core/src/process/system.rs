//! Contour systems: the index set of the cylinder process together with the
//! weights `e^{-beta |gamma|}` and the Poisson samplers the backward clan
//! construction needs.

use std::collections::HashMap;
use std::fmt::Debug;
use std::hash::Hash;
use std::sync::{Arc, Mutex};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Poisson;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{
    beta_star_bracket_loose, compatible, AnchorCensus, AnchorMode, Contour, ContourFamily,
    ShapeCatalog, SiteBox,
};

/// Draw from Poisson(mean), allowing a zero mean.
pub fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
}

/// The region whose contours, alive at time 0, root a clan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootSet<B> {
    /// Exactly these bases.
    Bases(Vec<B>),
    /// Contours with at least `min_len` links touching `window`.
    Window { window: SiteBox, min_len: usize },
    /// Every basis of the system (finite systems only).
    All,
}

pub trait ContourSystem: Sync {
    type Basis: Clone + Ord + Eq + Hash + Debug + Send + Sync;

    fn weight(&self, b: &Self::Basis) -> f64;

    fn contour<'a>(&'a self, b: &'a Self::Basis) -> &'a Contour;

    fn incompatible(&self, a: &Self::Basis, b: &Self::Basis) -> bool;

    /// Poisson process of bases incompatible with `b`, intensity
    /// `weight(theta)`: the bases of the free network alive at one instant.
    fn sample_incompatible<R: Rng + ?Sized>(
        &self,
        b: &Self::Basis,
        rng: &mut R,
        out: &mut Vec<Self::Basis>,
    );

    fn in_roots(&self, roots: &RootSet<Self::Basis>, b: &Self::Basis) -> bool;

    /// Poisson process of the bases in `roots` with intensity `weight`.
    fn sample_roots<R: Rng + ?Sized>(
        &self,
        roots: &RootSet<Self::Basis>,
        rng: &mut R,
        out: &mut Vec<Self::Basis>,
    ) -> Result<()>;
}

/// A finite family; bases are member indices.
#[derive(Clone, Debug)]
pub struct FiniteFamily {
    family: ContourFamily,
    beta: f64,
    weights: Vec<f64>,
    incompat: Vec<Vec<usize>>,
    incompat_pick: Vec<Option<(f64, WeightedIndex<f64>)>>,
    all_pick: Option<(f64, WeightedIndex<f64>)>,
}

fn picker(ids: &[usize], weights: &[f64]) -> Option<(f64, WeightedIndex<f64>)> {
    let w: Vec<f64> = ids.iter().map(|&i| weights[i]).collect();
    let mass: f64 = w.iter().sum();
    if mass > 0.0 {
        Some((mass, WeightedIndex::new(w).ok()?))
    } else {
        None
    }
}

impl FiniteFamily {
    pub fn new(family: ContourFamily, beta: f64) -> Result<FiniteFamily> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::param("beta must be finite and non-negative"));
        }
        let n = family.len();
        let weights: Vec<f64> = family
            .members()
            .iter()
            .map(|c| (-beta * c.len() as f64).exp())
            .collect();
        let mut incompat = vec![Vec::new(); n];
        for i in 0..n {
            for j in i..n {
                if !compatible(family.get(i), family.get(j)) {
                    incompat[i].push(j);
                    if i != j {
                        incompat[j].push(i);
                    }
                }
            }
        }
        for l in &mut incompat {
            l.sort_unstable();
        }
        let incompat_pick = incompat.iter().map(|l| picker(l, &weights)).collect();
        let all: Vec<usize> = (0..n).collect();
        let all_pick = picker(&all, &weights);
        Ok(FiniteFamily {
            family,
            beta,
            weights,
            incompat,
            incompat_pick,
            all_pick,
        })
    }

    pub fn family(&self) -> &ContourFamily {
        &self.family
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn len(&self) -> usize {
        self.family.len()
    }

    pub fn is_empty(&self) -> bool {
        self.family.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Members incompatible with member `i` (including `i` itself).
    pub fn incompatible_with(&self, i: usize) -> &[usize] {
        &self.incompat[i]
    }

    /// Total rate of bases incompatible with member `i`.
    pub fn incompatible_mass(&self, i: usize) -> f64 {
        self.incompat_pick[i].as_ref().map_or(0.0, |p| p.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.all_pick.as_ref().map_or(0.0, |p| p.0)
    }

    /// Weighted pick of a member, used by the forward dynamics.
    pub(crate) fn pick_any<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<usize> {
        self.all_pick.as_ref().map(|(_, w)| w.sample(rng))
    }

    fn sample_from<R: Rng + ?Sized>(
        ids: &[usize],
        pick: &Option<(f64, WeightedIndex<f64>)>,
        rng: &mut R,
        out: &mut Vec<usize>,
    ) {
        if let Some((mass, w)) = pick {
            let k = poisson(*mass, rng);
            for _ in 0..k {
                out.push(ids[w.sample(rng)]);
            }
        }
    }
}

impl ContourSystem for FiniteFamily {
    type Basis = usize;

    fn weight(&self, b: &usize) -> f64 {
        self.weights[*b]
    }

    fn contour<'a>(&'a self, b: &'a usize) -> &'a Contour {
        self.family.get(*b)
    }

    fn incompatible(&self, a: &usize, b: &usize) -> bool {
        self.incompat[*a].binary_search(b).is_ok()
    }

    fn sample_incompatible<R: Rng + ?Sized>(&self, b: &usize, rng: &mut R, out: &mut Vec<usize>) {
        FiniteFamily::sample_from(&self.incompat[*b], &self.incompat_pick[*b], rng, out);
    }

    fn in_roots(&self, roots: &RootSet<usize>, b: &usize) -> bool {
        match roots {
            RootSet::Bases(v) => v.contains(b),
            RootSet::Window { window, min_len } => {
                let c = self.family.get(*b);
                c.len() >= *min_len && c.touches_window(window)
            }
            RootSet::All => true,
        }
    }

    fn sample_roots<R: Rng + ?Sized>(
        &self,
        roots: &RootSet<usize>,
        rng: &mut R,
        out: &mut Vec<usize>,
    ) -> Result<()> {
        match roots {
            RootSet::All => {
                let all: Vec<usize> = (0..self.len()).collect();
                FiniteFamily::sample_from(&all, &self.all_pick, rng, out);
            }
            _ => {
                let mut ids: Vec<usize> = match roots {
                    RootSet::Bases(v) => v.clone(),
                    _ => (0..self.len()).filter(|i| self.in_roots(roots, i)).collect(),
                };
                ids.sort_unstable();
                ids.dedup();
                for i in ids {
                    if i >= self.len() {
                        return Err(Error::param(format!("basis {i} is not in the family")));
                    }
                    for _ in 0..poisson(self.weights[i], rng) {
                        out.push(i);
                    }
                }
            }
        }
        Ok(())
    }
}

/// Per-orientation proposal tables for roots touching a window.
#[derive(Debug)]
struct RootTables {
    /// For each orientation: per-link mass `sum_s n_o(s) w_s` and the shape
    /// picker, over shapes with at least the minimum length.
    by_orientation: [Option<(f64, Vec<usize>, WeightedIndex<f64>)>; 2],
}

/// All contours of the infinite lattice with at most `l_max` links,
/// optionally restricted to those lying in a simulation box. Bases are the
/// contours themselves; nothing is materialized up front.
#[derive(Debug)]
pub struct LatticeSystem {
    catalog: Arc<ShapeCatalog>,
    beta: f64,
    shape_weights: Vec<f64>,
    vertex_mass: f64,
    vertex_pick: WeightedIndex<f64>,
    sim_box: Option<SiteBox>,
    root_tables: Mutex<HashMap<usize, Arc<RootTables>>>,
}

impl LatticeSystem {
    /// Refuses `beta` at or below the certified upper end of the `beta*`
    /// bracket, where clans need not be finite.
    pub fn new(l_max: usize, beta: f64, sim_box: Option<SiteBox>) -> Result<LatticeSystem> {
        let census = AnchorCensus::new(l_max, AnchorMode::Vertex)?;
        let bracket = beta_star_bracket_loose(&census)?;
        if !(beta > bracket.hi) {
            return Err(Error::OutOfDomain {
                quantity: "beta",
                requirement: format!(
                    "beta = {beta} must exceed the certified upper end {:.6} of the beta* bracket",
                    bracket.hi
                ),
            });
        }
        LatticeSystem::new_unchecked(l_max, beta, sim_box)
    }

    /// No percolation guard; the clan budget is the only protection.
    pub fn new_unchecked(
        l_max: usize,
        beta: f64,
        sim_box: Option<SiteBox>,
    ) -> Result<LatticeSystem> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::param("beta must be finite and positive"));
        }
        let catalog = ShapeCatalog::cached(l_max)?;
        let shape_weights: Vec<f64> = catalog
            .shapes()
            .iter()
            .map(|s| (-beta * s.len() as f64).exp())
            .collect();
        let vw: Vec<f64> = catalog
            .shapes()
            .iter()
            .zip(&shape_weights)
            .map(|(s, w)| s.vertices.len() as f64 * w)
            .collect();
        let vertex_mass = vw.iter().sum();
        let vertex_pick = WeightedIndex::new(vw).map_err(|e| Error::param(e.to_string()))?;
        Ok(LatticeSystem {
            catalog,
            beta,
            shape_weights,
            vertex_mass,
            vertex_pick,
            sim_box,
            root_tables: Mutex::new(HashMap::new()),
        })
    }

    pub fn catalog(&self) -> &ShapeCatalog {
        &self.catalog
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn l_max(&self) -> usize {
        self.catalog.l_max
    }

    pub fn sim_box(&self) -> Option<&SiteBox> {
        self.sim_box.as_ref()
    }

    /// Truncated sum of `e^{-beta|theta|}` over contours through one dual
    /// vertex.
    pub fn vertex_mass(&self) -> f64 {
        self.vertex_mass
    }

    fn admissible(&self, c: &Contour) -> bool {
        match &self.sim_box {
            Some(b) => c.links().iter().all(|l| b.touches(l)),
            None => true,
        }
    }

    fn tables(&self, min_len: usize) -> Arc<RootTables> {
        let mut map = self.root_tables.lock().unwrap();
        map.entry(min_len)
            .or_insert_with(|| {
                let mut by_orientation = [None, None];
                for (o, slot) in by_orientation.iter_mut().enumerate() {
                    let mut ids = Vec::new();
                    let mut w = Vec::new();
                    for (i, s) in self.catalog.shapes().iter().enumerate() {
                        let n = s.links_by_orientation[o].len();
                        if s.len() >= min_len && n > 0 {
                            ids.push(i);
                            w.push(n as f64 * self.shape_weights[i]);
                        }
                    }
                    let mass: f64 = w.iter().sum();
                    if mass > 0.0 {
                        *slot = Some((mass, ids, WeightedIndex::new(w).unwrap()));
                    }
                }
                Arc::new(RootTables { by_orientation })
            })
            .clone()
    }

    fn sample_window_roots<R: Rng + ?Sized>(
        &self,
        window: &SiteBox,
        min_len: usize,
        rng: &mut R,
        out: &mut Vec<Contour>,
    ) {
        let tables = self.tables(min_len);
        for o in 0..2 {
            let Some((mass, ids, pick)) = &tables.by_orientation[o] else {
                continue;
            };
            let (lo, hi) = window.touching_base_range(o);
            let links = window.touching_link_count(o) as f64;
            for _ in 0..poisson(mass * links, rng) {
                let site = [rng.random_range(lo[0]..=hi[0]), rng.random_range(lo[1]..=hi[1])];
                let s = &self.catalog.shapes()[ids[pick.sample(rng)]];
                let cand = &s.links_by_orientation[o];
                let m = cand[rng.random_range(0..cand.len())].base_site();
                let theta = s.contour.translated([site[0] - m[0], site[1] - m[1]]);
                // theta is proposed once per touching link it owns.
                let touching = theta.links().iter().filter(|l| window.touches(l)).count();
                if touching > 1 && rng.random_range(0..touching) != 0 {
                    continue;
                }
                if self.admissible(&theta) {
                    out.push(theta);
                }
            }
        }
    }
}

impl ContourSystem for LatticeSystem {
    type Basis = Contour;

    fn weight(&self, b: &Contour) -> f64 {
        (-self.beta * b.len() as f64).exp()
    }

    fn contour<'a>(&'a self, b: &'a Contour) -> &'a Contour {
        b
    }

    fn incompatible(&self, a: &Contour, b: &Contour) -> bool {
        !compatible(a, b)
    }

    fn sample_incompatible<R: Rng + ?Sized>(
        &self,
        b: &Contour,
        rng: &mut R,
        out: &mut Vec<Contour>,
    ) {
        let verts = b.vertices();
        for v in &verts {
            for _ in 0..poisson(self.vertex_mass, rng) {
                let s = &self.catalog.shapes()[self.vertex_pick.sample(rng)];
                let u = s.vertices[rng.random_range(0..s.vertices.len())];
                let theta = s.contour.translated([(v[0] - u[0]) / 2, (v[1] - u[1]) / 2]);
                // theta is proposed once per vertex it shares with b.
                let shared = crate::lattice::sorted_intersection_count(
                    &theta.vertices(),
                    &verts,
                    usize::MAX,
                );
                if shared > 1 && rng.random_range(0..shared) != 0 {
                    continue;
                }
                if self.admissible(&theta) {
                    out.push(theta);
                }
            }
        }
    }

    fn in_roots(&self, roots: &RootSet<Contour>, b: &Contour) -> bool {
        match roots {
            RootSet::Bases(v) => v.contains(b),
            RootSet::Window { window, min_len } => b.len() >= *min_len && b.touches_window(window),
            RootSet::All => true,
        }
    }

    fn sample_roots<R: Rng + ?Sized>(
        &self,
        roots: &RootSet<Contour>,
        rng: &mut R,
        out: &mut Vec<Contour>,
    ) -> Result<()> {
        match roots {
            RootSet::Bases(v) => {
                let mut v = v.clone();
                v.sort();
                v.dedup();
                for c in v {
                    if c.len() > self.l_max() || !self.admissible(&c) {
                        return Err(Error::param(format!(
                            "root contour {c:?} is not in the truncated system"
                        )));
                    }
                    for _ in 0..poisson(self.weight(&c), rng) {
                        out.push(c.clone());
                    }
                }
            }
            RootSet::Window { window, min_len } => {
                self.sample_window_roots(window, *min_len, rng, out)
            }
            RootSet::All => {
                return Err(Error::param(
                    "the lattice system is infinite; roots need a window or explicit bases",
                ))
            }
        }
        Ok(())
    }
}

