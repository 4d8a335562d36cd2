//! Forward-time loss network dynamics and exact Gibbs enumeration on small
//! finite families.

use std::collections::HashMap;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::system::FiniteFamily;
use crate::error::{Error, Result};
use crate::lattice::{compatible, ContourFamily};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForwardSummary {
    pub duration: f64,
    /// Fraction of `[0, duration]` each member was present.
    pub time_average: Vec<f64>,
    /// Members present at the end, sorted.
    pub final_state: Vec<usize>,
    pub births_accepted: u64,
    pub births_rejected: u64,
    pub deaths: u64,
}

/// Run the loss network forward: member `gamma` attempts a birth at rate
/// `e^{-beta|gamma|}`, accepted iff it is compatible with everything
/// present; each present member dies at rate 1.
pub fn forward_dynamics<R: Rng + ?Sized>(
    fam: &FiniteFamily,
    initial: &[usize],
    duration: f64,
    rng: &mut R,
) -> Result<ForwardSummary> {
    if !(duration.is_finite() && duration > 0.0) {
        return Err(Error::param("duration must be positive"));
    }
    let n = fam.len();
    let mut present = vec![false; n];
    let mut list: Vec<usize> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for &i in initial {
        if i >= n {
            return Err(Error::param(format!("initial member {i} is not in the family")));
        }
        if fam.incompatible_with(i).iter().any(|&j| present[j]) {
            return Err(Error::param("initial configuration is not pairwise compatible"));
        }
        present[i] = true;
        slot[i] = list.len();
        list.push(i);
    }
    let mut since = vec![0.0f64; n];
    let mut occupied = vec![0.0f64; n];
    let birth_rate = fam.total_mass();
    let (mut acc, mut rej, mut deaths) = (0u64, 0u64, 0u64);
    let mut t = 0.0f64;
    loop {
        let rate = birth_rate + list.len() as f64;
        if rate <= 0.0 {
            break;
        }
        let dt = rng.sample::<f64, _>(Exp1) / rate;
        if t + dt >= duration {
            break;
        }
        t += dt;
        if rng.random::<f64>() * rate < birth_rate {
            let g = fam.pick_any(rng).expect("positive birth rate");
            if fam.incompatible_with(g).iter().any(|&j| present[j]) {
                rej += 1;
            } else {
                present[g] = true;
                slot[g] = list.len();
                list.push(g);
                since[g] = t;
                acc += 1;
            }
        } else {
            let k = rng.random_range(0..list.len());
            let g = list.swap_remove(k);
            if k < list.len() {
                slot[list[k]] = k;
            }
            present[g] = false;
            occupied[g] += t - since[g];
            deaths += 1;
        }
    }
    for &g in &list {
        occupied[g] += duration - since[g];
    }
    list.sort_unstable();
    Ok(ForwardSummary {
        duration,
        time_average: occupied.iter().map(|o| o / duration).collect(),
        final_state: list,
        births_accepted: acc,
        births_rejected: rej,
        deaths,
    })
}

/// Largest number of compatible configurations `exact_gibbs_small`
/// enumerates.
pub const EXACT_STATE_LIMIT: usize = 1 << 25;

/// The Gibbs measure of a finite family, by enumeration of its compatible
/// subsets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactGibbs {
    pub beta: f64,
    /// Compatible configurations (sorted member lists) with probabilities,
    /// in lexicographic order.
    pub configurations: Vec<(Vec<usize>, f64)>,
    pub partition_function: f64,
    pub marginals: Vec<f64>,
    pub pair_marginals: Vec<Vec<f64>>,
}

impl ExactGibbs {
    pub fn probability(&self, config: &[usize]) -> f64 {
        self.configurations
            .binary_search_by(|(c, _)| c.as_slice().cmp(config))
            .map_or(0.0, |i| self.configurations[i].1)
    }

    pub fn index(&self) -> HashMap<Vec<usize>, usize> {
        self.configurations
            .iter()
            .enumerate()
            .map(|(i, (c, _))| (c.clone(), i))
            .collect()
    }
}

pub fn exact_gibbs_small(family: &ContourFamily, beta: f64) -> Result<ExactGibbs> {
    let n = family.len();
    let w: Vec<f64> = family
        .members()
        .iter()
        .map(|c| (-beta * c.len() as f64).exp())
        .collect();
    let mut conflict = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            conflict[i][j] = !compatible(family.get(i), family.get(j));
        }
    }
    // Count first so the guard trips before anything large is allocated.
    fn count(next: usize, n: usize, conflict: &[Vec<bool>], stack: &mut Vec<usize>, acc: &mut usize) {
        *acc += 1;
        if *acc > EXACT_STATE_LIMIT {
            return;
        }
        for i in next..n {
            if stack.iter().all(|&j| !conflict[i][j]) {
                stack.push(i);
                count(i + 1, n, conflict, stack, acc);
                stack.pop();
                if *acc > EXACT_STATE_LIMIT {
                    return;
                }
            }
        }
    }
    let mut states = 0usize;
    count(0, n, &conflict, &mut Vec::new(), &mut states);
    if states > EXACT_STATE_LIMIT {
        return Err(Error::StateSpace(format!(
            "more than {EXACT_STATE_LIMIT} compatible configurations"
        )));
    }
    fn rec(
        next: usize,
        n: usize,
        weight: f64,
        w: &[f64],
        conflict: &[Vec<bool>],
        stack: &mut Vec<usize>,
        out: &mut Vec<(Vec<usize>, f64)>,
    ) {
        out.push((stack.clone(), weight));
        for i in next..n {
            if stack.iter().all(|&j| !conflict[i][j]) {
                stack.push(i);
                rec(i + 1, n, weight * w[i], w, conflict, stack, out);
                stack.pop();
            }
        }
    }
    let mut configs = Vec::with_capacity(states);
    rec(0, n, 1.0, &w, &conflict, &mut Vec::new(), &mut configs);
    configs.sort_by(|a, b| a.0.cmp(&b.0));
    let z: f64 = configs.iter().map(|c| c.1).sum();
    let mut marginals = vec![0.0; n];
    let mut pair = vec![vec![0.0; n]; n];
    for (c, wt) in &mut configs {
        *wt /= z;
        for &i in c.iter() {
            marginals[i] += *wt;
            for &j in c.iter() {
                pair[i][j] += *wt;
            }
        }
    }
    Ok(ExactGibbs {
        beta,
        configurations: configs,
        partition_function: z,
        marginals,
        pair_marginals: pair,
    })
}
