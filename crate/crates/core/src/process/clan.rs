//! Cylinders, backward clan growth and the kept/erased classification.
//!
//! A clan is grown backward in time. The cylinders alive at an instant with
//! bases in some set form, in the stationary free network, a Poisson
//! process with intensity `e^{-beta|theta|}` whose ages and residual lives
//! are independent `Exp(1)`. Every such snapshot is recorded as a revealed
//! region of cylinder space; later snapshots keep the cylinders already
//! revealed there and only draw fresh ones outside, so the clans of one
//! [`Store`] are all read off a single realization of the process.

use std::collections::{HashMap, VecDeque};

use rand::Rng;
use rand_distr::Exp1;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::system::{ContourSystem, RootSet};
use crate::error::{Error, Result};

/// A contour alive during `[birth, death)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cylinder<B> {
    pub id: usize,
    pub basis: B,
    pub birth: f64,
    pub death: f64,
}

impl<B> Cylinder<B> {
    pub fn alive_at(&self, t: f64) -> bool {
        self.birth <= t && t < self.death
    }

    pub fn lives_intersect(&self, other: &Cylinder<B>) -> bool {
        self.birth < other.death && other.birth < self.death
    }
}

/// Incompatible bases and intersecting lives.
pub fn incompatible_cylinders<S: ContourSystem>(
    sys: &S,
    a: &Cylinder<S::Basis>,
    b: &Cylinder<S::Basis>,
) -> bool {
    a.lives_intersect(b) && sys.incompatible(&a.basis, &b.basis)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Kept,
    Erased,
}

/// Limits on a single clan; exceeding them is an error, never a silent
/// truncation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    pub max_cylinders: usize,
    pub max_depth: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_cylinders: 1_000_000,
            max_depth: 10_000,
        }
    }
}

#[derive(Clone, Debug)]
enum Revealed<B> {
    /// Cylinders of the root set alive at time 0.
    Roots(RootSet<B>),
    /// Cylinders with basis incompatible with `basis` alive at `at`.
    Before { basis: B, at: f64 },
}

/// The part of one realization of the cylinder process revealed so far.
#[derive(Clone, Debug)]
pub struct Store<B> {
    cylinders: Vec<Cylinder<B>>,
    ancestors: Vec<Option<Vec<usize>>>,
    revealed: Vec<Revealed<B>>,
}

impl<B> Default for Store<B> {
    fn default() -> Self {
        Store {
            cylinders: Vec::new(),
            ancestors: Vec::new(),
            revealed: Vec::new(),
        }
    }
}

impl<B: Clone> Store<B> {
    pub fn new() -> Self {
        Store::default()
    }

    pub fn len(&self) -> usize {
        self.cylinders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cylinders.is_empty()
    }

    pub fn cylinders(&self) -> &[Cylinder<B>] {
        &self.cylinders
    }

    fn push(&mut self, basis: B, birth: f64, death: f64) -> usize {
        let id = self.cylinders.len();
        self.cylinders.push(Cylinder {
            id,
            basis,
            birth,
            death,
        });
        self.ancestors.push(None);
        id
    }

    fn is_revealed<S>(&self, sys: &S, basis: &B, birth: f64, death: f64) -> bool
    where
        S: ContourSystem<Basis = B>,
    {
        self.revealed.iter().any(|r| match r {
            Revealed::Roots(rs) => birth <= 0.0 && 0.0 < death && sys.in_roots(rs, basis),
            Revealed::Before { basis: g, at } => {
                birth < *at && *at < death && sys.incompatible(basis, g)
            }
        })
    }

    /// Draw a snapshot at `at` around `basis` and keep only the part lying
    /// outside every revealed region.
    fn fresh_around<S, R>(&mut self, sys: &S, proposals: Vec<B>, at: f64, rng: &mut R) -> Vec<usize>
    where
        S: ContourSystem<Basis = B>,
        R: Rng + ?Sized,
    {
        let mut ids = Vec::new();
        for theta in proposals {
            let age: f64 = rng.sample(Exp1);
            let residual: f64 = rng.sample(Exp1);
            let (birth, death) = (at - age, at + residual);
            if !self.is_revealed(sys, &theta, birth, death) {
                ids.push(self.push(theta, birth, death));
            }
        }
        ids
    }

    /// First-generation ancestors of cylinder `id`, revealing them if needed.
    fn explore<S, R>(&mut self, sys: &S, id: usize, rng: &mut R) -> Vec<usize>
    where
        S: ContourSystem<Basis = B>,
        R: Rng + ?Sized,
    {
        if let Some(a) = &self.ancestors[id] {
            return a.clone();
        }
        let basis = self.cylinders[id].basis.clone();
        let at = self.cylinders[id].birth;
        let mut anc: Vec<usize> = self
            .cylinders
            .iter()
            .filter(|c| c.birth < at && at < c.death && sys.incompatible(&c.basis, &basis))
            .map(|c| c.id)
            .collect();
        let mut proposals = Vec::new();
        sys.sample_incompatible(&basis, rng, &mut proposals);
        anc.extend(self.fresh_around(sys, proposals, at, rng));
        self.revealed.push(Revealed::Before { basis, at });
        self.ancestors[id] = Some(anc.clone());
        anc
    }
}

/// A finite ancestor-closed set of cylinders. Indices in `ancestors`,
/// `roots` and `planted` refer to positions in `cylinders`; cylinder ids
/// are the ids of the store the clan was grown in.
#[derive(Clone, Debug, PartialEq)]
pub struct Clan<B> {
    pub cylinders: Vec<Cylinder<B>>,
    /// First-generation ancestors of each cylinder.
    pub ancestors: Vec<Vec<usize>>,
    /// Cylinders of the root set alive at time 0.
    pub roots: Vec<usize>,
    /// Cylinders added by hand to the process (Palm sampling).
    pub planted: Vec<usize>,
    /// Longest backward distance reached from a root, in generations.
    pub depth: usize,
    pub labels: Option<Vec<Label>>,
}

impl<B> Clan<B> {
    pub fn len(&self) -> usize {
        self.cylinders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cylinders.is_empty()
    }

    pub fn label(&self, i: usize) -> Option<Label> {
        self.labels.as_ref().map(|l| l[i])
    }

    /// Bases of the kept roots, i.e. the contours present at time 0.
    pub fn kept_root_bases(&self) -> Vec<&B> {
        self.roots
            .iter()
            .filter(|&&i| self.label(i) == Some(Label::Kept))
            .map(|&i| &self.cylinders[i].basis)
            .collect()
    }
}

/// Grow the clan of the root set (and of the planted cylinders) in `store`.
pub fn grow_clan<S, R>(
    sys: &S,
    store: &mut Store<S::Basis>,
    roots: &RootSet<S::Basis>,
    planted: &[(S::Basis, f64, f64)],
    rng: &mut R,
    budget: &Budget,
) -> Result<Clan<S::Basis>>
where
    S: ContourSystem,
    R: Rng + ?Sized,
{
    let planted_ids: Vec<usize> = planted
        .iter()
        .map(|(b, birth, death)| {
            if !(birth < death) {
                return Err(Error::param("planted cylinder must have birth < death"));
            }
            Ok(store.push(b.clone(), *birth, *death))
        })
        .collect::<Result<_>>()?;

    let mut root_ids: Vec<usize> = store
        .cylinders
        .iter()
        .filter(|c| c.alive_at(0.0) && sys.in_roots(roots, &c.basis))
        .map(|c| c.id)
        .collect();
    let mut proposals = Vec::new();
    sys.sample_roots(roots, rng, &mut proposals)?;
    root_ids.extend(store.fresh_around(sys, proposals, 0.0, rng));
    store.revealed.push(Revealed::Roots(roots.clone()));

    let mut b = ClanBuilder {
        clan: Clan {
            cylinders: Vec::new(),
            ancestors: Vec::new(),
            roots: Vec::new(),
            planted: Vec::new(),
            depth: 0,
            labels: None,
        },
        local: HashMap::new(),
        depth_of: Vec::new(),
        queue: VecDeque::new(),
        budget: *budget,
    };
    for &id in &root_ids {
        let l = b.admit(id, 0, store)?;
        b.clan.roots.push(l);
    }
    for &id in &planted_ids {
        let l = b.admit(id, 0, store)?;
        b.clan.planted.push(l);
    }
    while let Some(id) = b.queue.pop_front() {
        let me = b.local[&id];
        let d = b.depth_of[me];
        let anc = store.explore(sys, id, rng);
        let mut mine = Vec::with_capacity(anc.len());
        for a in anc {
            mine.push(b.admit(a, d + 1, store)?);
        }
        b.clan.ancestors[me] = mine;
    }
    Ok(b.clan)
}

struct ClanBuilder<B> {
    clan: Clan<B>,
    local: HashMap<usize, usize>,
    depth_of: Vec<usize>,
    queue: VecDeque<usize>,
    budget: Budget,
}

impl<B: Clone> ClanBuilder<B> {
    fn admit(&mut self, id: usize, depth: usize, store: &Store<B>) -> Result<usize> {
        if let Some(&l) = self.local.get(&id) {
            return Ok(l);
        }
        let n = self.clan.cylinders.len();
        if n >= self.budget.max_cylinders || depth > self.budget.max_depth {
            return Err(Error::Budget {
                cylinders: n + 1,
                depth,
                max_cylinders: self.budget.max_cylinders,
                max_depth: self.budget.max_depth,
            });
        }
        self.local.insert(id, n);
        self.clan.cylinders.push(store.cylinders[id].clone());
        self.clan.ancestors.push(Vec::new());
        self.clan.depth = self.clan.depth.max(depth);
        self.depth_of.push(depth);
        self.queue.push_back(id);
        Ok(n)
    }
}

/// Check that every recorded ancestor edge is a genuine ancestor relation
/// and that no ancestor inside the clan is missing.
pub fn validate_clan<S: ContourSystem>(sys: &S, clan: &Clan<S::Basis>) -> Result<()> {
    let n = clan.len();
    if clan.ancestors.len() != n {
        return Err(Error::InvariantViolation(
            "ancestor table does not match the cylinder list".into(),
        ));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (&clan.cylinders[a], &clan.cylinders[b]);
        ca.birth.total_cmp(&cb.birth).then(ca.id.cmp(&cb.id))
    });
    let mut active: Vec<usize> = Vec::new();
    for &c in &order {
        let me = &clan.cylinders[c];
        let mut recorded = clan.ancestors[c].clone();
        recorded.sort_unstable();
        recorded.dedup();
        for &a in &recorded {
            let anc = clan.cylinders.get(a).ok_or_else(|| {
                Error::InvariantViolation(format!("cylinder {} has a dangling ancestor", me.id))
            })?;
            if !(anc.birth < me.birth && incompatible_cylinders(sys, anc, me)) {
                return Err(Error::InvariantViolation(format!(
                    "cylinder {} is recorded as an ancestor of {} but is not one",
                    anc.id, me.id
                )));
            }
        }
        active.retain(|&a| clan.cylinders[a].death > me.birth);
        for &a in &active {
            let anc = &clan.cylinders[a];
            if anc.birth < me.birth
                && sys.incompatible(&anc.basis, &me.basis)
                && recorded.binary_search(&a).is_err()
            {
                return Err(Error::InvariantViolation(format!(
                    "ancestor edge {} -> {} is missing",
                    me.id, anc.id
                )));
            }
        }
        active.push(c);
    }
    Ok(())
}

/// Kept/erased labels from the ancestor edges alone: in birth order, a
/// cylinder is kept iff none of its first-generation ancestors is kept.
pub fn classify_edges<B>(clan: &mut Clan<B>) -> Result<()> {
    let n = clan.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (&clan.cylinders[a], &clan.cylinders[b]);
        ca.birth.total_cmp(&cb.birth).then(ca.id.cmp(&cb.id))
    });
    let mut labels: Vec<Option<Label>> = vec![None; n];
    for &c in &order {
        let mut kept = true;
        for &a in &clan.ancestors[c] {
            match labels.get(a).copied().flatten() {
                Some(Label::Kept) => kept = false,
                Some(Label::Erased) => {}
                None => {
                    return Err(Error::InvariantViolation(format!(
                        "ancestor of cylinder {} is not born before it",
                        clan.cylinders[c].id
                    )))
                }
            }
        }
        labels[c] = Some(if kept { Label::Kept } else { Label::Erased });
    }
    clan.labels = Some(labels.into_iter().map(Option::unwrap).collect());
    Ok(())
}

/// Validate the clan, then label it.
pub fn classify<S: ContourSystem>(sys: &S, clan: &mut Clan<S::Basis>) -> Result<()> {
    validate_clan(sys, clan)?;
    classify_edges(clan)
}

#[derive(Serialize, Deserialize)]
struct ClanLine<B> {
    id: usize,
    basis: B,
    birth: f64,
    death: f64,
    ancestors: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<Label>,
    #[serde(default)]
    root: bool,
}

impl<B: Clone + Serialize + DeserializeOwned> Clan<B> {
    /// One JSON object per cylinder; ancestors are given by cylinder id.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for (i, c) in self.cylinders.iter().enumerate() {
            let line = ClanLine {
                id: c.id,
                basis: c.basis.clone(),
                birth: c.birth,
                death: c.death,
                ancestors: self.ancestors[i].iter().map(|&a| self.cylinders[a].id).collect(),
                label: self.label(i),
                root: self.roots.contains(&i),
            };
            out.push_str(&serde_json::to_string(&line)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_jsonl(text: &str) -> Result<Clan<B>> {
        let lines: Vec<ClanLine<B>> = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<std::result::Result<_, _>>()?;
        let index: HashMap<usize, usize> =
            lines.iter().enumerate().map(|(i, l)| (l.id, i)).collect();
        if index.len() != lines.len() {
            return Err(Error::Parse("duplicate cylinder id".into()));
        }
        let mut clan = Clan {
            cylinders: Vec::new(),
            ancestors: Vec::new(),
            roots: Vec::new(),
            planted: Vec::new(),
            depth: 0,
            labels: None,
        };
        let all_labelled = lines.iter().all(|l| l.label.is_some());
        let mut labels = Vec::new();
        for (i, l) in lines.into_iter().enumerate() {
            let anc = l
                .ancestors
                .iter()
                .map(|a| {
                    index
                        .get(a)
                        .copied()
                        .ok_or_else(|| Error::Parse(format!("unknown ancestor id {a}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if l.root {
                clan.roots.push(i);
            }
            if !(l.birth < l.death) {
                return Err(Error::Parse(format!("cylinder {} has birth >= death", l.id)));
            }
            labels.extend(l.label);
            clan.cylinders.push(Cylinder {
                id: l.id,
                basis: l.basis,
                birth: l.birth,
                death: l.death,
            });
            clan.ancestors.push(anc);
        }
        if all_labelled && !clan.is_empty() {
            clan.labels = Some(labels);
        }
        Ok(clan)
    }
}
