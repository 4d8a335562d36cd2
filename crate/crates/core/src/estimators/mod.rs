//! Monte Carlo estimates of presence probabilities, of the mean number of
//! large contours in a window, and of the distance between their count and
//! a Poisson law, plus the empirical checks of the lemmas behind the bound.
//!
//! Every estimator is a deterministic function of its arguments and a seed.
//! Replicas are grouped in fixed blocks; block `b` of role `r` draws from
//! ChaCha stream `(r << 40) | b`, so the thread count does not affect
//! results.

pub mod families;
pub mod stats;

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{b1_bound, coupling_bound, p_gamma_interval, pair_bound, BoundParams};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::lattice::{Contour, ContourFamily, Norm, SiteBox};
use crate::model::ModelParams;
use crate::process::{
    coupled_clans, exact_gibbs_small, forward_dynamics, palm_kept, sample_eta_zero, stream_rng,
    Budget, ContourSystem, ExactGibbs, FiniteFamily, LatticeSystem, RootSet, SimRng,
};

pub use stats::{TvEstimate, CiMethod};

/// Confidence level of every reported interval.
pub const CONFIDENCE: f64 = 0.99;

const BLOCK: u64 = 1024;

mod role {
    pub const P_GAMMA: u64 = 1;
    pub const LAMBDA: u64 = 2;
    pub const PILOT: u64 = 3;
    pub const BOOTSTRAP: u64 = 4;
    pub const COUPLING_A: u64 = 5;
    pub const COUPLING_B: u64 = 6;
    pub const PAIRS: u64 = 7;
    pub const STATIONARY: u64 = 8;
    pub const CONFIGS: u64 = 9;
}

fn derive_seed(seed: u64, salt: u64) -> u64 {
    seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Run `f` for replicas `0..replicas` in fixed blocks and return the
/// results in replica order.
pub fn run_replicas<T, F>(replicas: u64, seed: u64, role: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&mut SimRng, u64) -> Result<T> + Sync,
{
    let blocks = replicas.div_ceil(BLOCK);
    let parts: Vec<Result<Vec<T>>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, (role << 40) | b);
            let end = replicas.min((b + 1) * BLOCK);
            (b * BLOCK..end).map(|i| f(&mut rng, i)).collect()
        })
        .collect();
    let mut out = Vec::with_capacity(replicas as usize);
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

fn need_replicas(replicas: u64) -> Result<()> {
    if replicas == 0 {
        return Err(Error::param("replicas must be at least 1"));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PGammaMethod {
    /// Fraction of perfect samples containing the contour.
    Direct,
    /// Weight times the probability that a planted cylinder is kept.
    #[default]
    Palm,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub ci: Interval,
    pub successes: u64,
    pub replicas: u64,
    pub method: PGammaMethod,
}

pub fn estimate_p_gamma<S: ContourSystem>(
    sys: &S,
    gamma: &S::Basis,
    replicas: u64,
    seed: u64,
    method: PGammaMethod,
    budget: &Budget,
) -> Result<Estimate> {
    need_replicas(replicas)?;
    let roots = RootSet::Bases(vec![gamma.clone()]);
    let hits = run_replicas(replicas, seed, role::P_GAMMA, |rng, _| match method {
        PGammaMethod::Direct => Ok(!sample_eta_zero(sys, &roots, rng, budget)?.present.is_empty()),
        PGammaMethod::Palm => palm_kept(sys, gamma, rng, budget),
    })?;
    let k = hits.iter().filter(|&&h| h).count() as u64;
    let w = stats::wilson(k, replicas, CONFIDENCE)?;
    let scale = match method {
        PGammaMethod::Direct => 1.0,
        PGammaMethod::Palm => sys.weight(gamma),
    };
    Ok(Estimate {
        value: scale * k as f64 / replicas as f64,
        ci: Interval::new(scale * w.lo, scale * w.hi),
        successes: k,
        replicas,
        method,
    })
}

/// Per-replica counts of large contours in a window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaEstimate<B> {
    pub lambda_hat: f64,
    pub ci: Interval,
    pub replicas: u64,
    pub totals: Vec<u64>,
    /// Counts attributed to the left half-window and to the rest.
    pub halves: Option<Vec<(u64, u64)>>,
    /// Number of replicas in which each basis was present, sorted.
    pub per_basis: Vec<(B, u64)>,
}

impl<B> LambdaEstimate<B> {
    /// Mean of each half-window count.
    pub fn half_means(&self) -> Option<(f64, f64)> {
        let h = self.halves.as_ref()?;
        let n = h.len() as f64;
        Some((
            h.iter().map(|p| p.0 as f64).sum::<f64>() / n,
            h.iter().map(|p| p.1 as f64).sum::<f64>() / n,
        ))
    }

    /// Sum of the per-basis presence frequencies; equals `lambda_hat` up to
    /// rounding.
    pub fn sum_of_frequencies(&self) -> f64 {
        self.per_basis
            .iter()
            .map(|(_, c)| *c as f64 / self.replicas as f64)
            .sum()
    }
}

/// Left half of a window, used to split counts for the 2-D projection.
pub fn left_half(window: &SiteBox) -> Option<SiteBox> {
    let side = window.side(0);
    if side < 2 {
        return None;
    }
    SiteBox::new(window.min, [window.min[0] + (side / 2) as i32 - 1, window.max[1]]).ok()
}

/// Mean number of root-set contours present at time 0.
pub fn estimate_lambda<S: ContourSystem>(
    sys: &S,
    roots: &RootSet<S::Basis>,
    split: Option<&SiteBox>,
    replicas: u64,
    seed: u64,
    budget: &Budget,
) -> Result<LambdaEstimate<S::Basis>> {
    need_replicas(replicas)?;
    let samples = run_replicas(replicas, seed, role::LAMBDA, |rng, _| {
        Ok(sample_eta_zero(sys, roots, rng, budget)?.present)
    })?;
    let mut per: HashMap<S::Basis, u64> = HashMap::new();
    let mut totals = Vec::with_capacity(samples.len());
    let mut halves = split.map(|_| Vec::with_capacity(samples.len()));
    for present in &samples {
        totals.push(present.len() as u64);
        if let (Some(h), Some(left)) = (halves.as_mut(), split) {
            let l = present
                .iter()
                .filter(|b| sys.contour(b).touches_window(left))
                .count() as u64;
            h.push((l, present.len() as u64 - l));
        }
        for b in present {
            *per.entry(b.clone()).or_insert(0) += 1;
        }
    }
    let mut per_basis: Vec<(S::Basis, u64)> = per.into_iter().collect();
    per_basis.sort();
    let (lambda_hat, ci) = stats::mean_ci(totals.iter().map(|&t| t as f64), CONFIDENCE)?;
    Ok(LambdaEstimate {
        lambda_hat,
        ci,
        replicas,
        totals,
        halves,
        per_basis,
    })
}

/// Mean number of free-network contours with at least `n` links touching
/// `window`: an upper bound for the loss-network mean.
pub fn free_lambda(sys: &LatticeSystem, n: usize, window: &SiteBox) -> f64 {
    sys.catalog()
        .shapes()
        .iter()
        .enumerate()
        .filter(|(_, s)| s.len() >= n)
        .map(|(i, s)| {
            (-sys.beta() * s.len() as f64).exp()
                * sys.catalog().placements_touching_count(i, window) as f64
        })
        .sum()
}

/// `sum p_gamma` over the large contours meeting `window`, with each
/// `p_gamma` replaced by its analytic interval.
pub fn analytic_lambda(
    sys: &LatticeSystem,
    n: usize,
    window: &SiteBox,
    rho: Interval,
) -> Result<Interval> {
    let mut acc = Interval::point(0.0);
    for (i, s) in sys.catalog().shapes().iter().enumerate() {
        if s.len() < n {
            continue;
        }
        let count = sys.catalog().placements_touching_count(i, window) as f64;
        acc = acc + count * p_gamma_interval(s.len(), sys.beta(), rho)?;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowPoint {
    pub side: u32,
    pub lambda_hat: f64,
    pub ci: Interval,
    pub free_lambda: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowSizing {
    pub target: f64,
    /// Smallest side whose estimate reaches the target.
    pub chosen: WindowPoint,
    /// The side below it (side 1 when the target is below the 1x1 value).
    pub lower: WindowPoint,
    /// Estimated ratio of the loss-network mean to the free mean.
    pub kept_fraction: f64,
    pub ci_contains_target: bool,
}

fn smallest_side(max_side: u32, pred: impl Fn(u32) -> bool) -> Option<u32> {
    if !pred(max_side) {
        return None;
    }
    let (mut lo, mut hi) = (0u32, max_side);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Square window, centred on the origin, whose mean count of contours with
/// at least `n` links is closest to `target` from above. The density per
/// unit area is calibrated by the free-network mean, computed exactly, and
/// one pilot simulation of the kept fraction.
pub fn size_window_for_lambda(
    sys: &LatticeSystem,
    n: usize,
    target: f64,
    max_side: u32,
    replicas: u64,
    seed: u64,
    budget: &Budget,
) -> Result<WindowSizing> {
    need_replicas(replicas)?;
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::param("lambda target must be positive"));
    }
    let free = |side: u32| free_lambda(sys, n, &SiteBox::centered(side).expect("side >= 1"));
    let unreachable = || {
        Error::Capacity(format!(
            "lambda = {target} is not reached by any window of side <= {max_side} \
             (free mean at that side {:.4e})",
            free(max_side.max(1))
        ))
    };
    if max_side == 0 {
        return Err(unreachable());
    }
    let side0 = smallest_side(max_side, |s| free(s) >= target).ok_or_else(unreachable)?;
    let roots = |side: u32| RootSet::Window {
        window: SiteBox::centered(side).expect("side >= 1"),
        min_len: n,
    };
    let est = |side: u32, salt: u64| -> Result<WindowPoint> {
        let e = estimate_lambda(sys, &roots(side), None, replicas, derive_seed(seed, salt), budget)?;
        Ok(WindowPoint {
            side,
            lambda_hat: e.lambda_hat,
            ci: e.ci,
            free_lambda: free(side),
        })
    };
    let pilot = est(side0, role::PILOT)?;
    let kept_fraction = if pilot.lambda_hat > 0.0 {
        (pilot.lambda_hat / pilot.free_lambda).min(1.0)
    } else {
        1.0
    };
    let side1 =
        smallest_side(max_side, |s| kept_fraction * free(s) >= target).ok_or_else(unreachable)?;
    let chosen = est(side1, 11)?;
    let lower = if side1 > 1 { est(side1 - 1, 12)? } else { chosen.clone() };
    Ok(WindowSizing {
        target,
        ci_contains_target: chosen.ci.contains(target),
        chosen,
        lower,
        kept_fraction,
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// Poisson mean = empirical mean count.
    #[default]
    Empirical,
    /// Poisson mean = sum of the midpoints of the analytic intervals.
    AnalyticMidpoint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    /// The analytic bound is at least 1 and says nothing.
    PassVacuous,
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self != Verdict::Fail
    }

    pub fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::PassVacuous => "PASS (vacuous bound)",
            Verdict::Fail => "FAIL",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub count: u64,
    pub empirical_mass: f64,
    pub poisson_mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvReport {
    pub replicas: u64,
    pub lambda_hat: f64,
    pub lambda_ci: Interval,
    pub lambda_analytic: Option<Interval>,
    pub reference: Reference,
    pub reference_lambda: f64,
    /// Total count against Poisson(`reference_lambda`).
    pub tv: TvEstimate,
    /// Total count against Poisson at the other available reference.
    pub tv_alternative: Option<f64>,
    /// Half-window counts against independent Poisson laws with the
    /// empirical half means.
    pub tv_halves: Option<f64>,
    pub half_means: Option<(f64, f64)>,
    pub histogram: Vec<HistogramRow>,
    pub bound_upper: Option<f64>,
    pub verdict: Option<Verdict>,
    /// Per-replica total counts; exported separately as CSV.
    #[serde(skip)]
    pub totals: Vec<u64>,
}

/// Empirical distance between the law of the number of contours with at
/// least `n` links meeting `window` and a Poisson law; compared with
/// `bound_upper` when given.
#[allow(clippy::too_many_arguments)]
pub fn tv_experiment<S: ContourSystem>(
    sys: &S,
    window: &SiteBox,
    n: usize,
    replicas: u64,
    seed: u64,
    reference: Reference,
    lambda_analytic: Option<Interval>,
    bound_upper: Option<f64>,
    budget: &Budget,
) -> Result<TvReport> {
    let roots = RootSet::Window {
        window: *window,
        min_len: n,
    };
    let left = left_half(window);
    let est = estimate_lambda(sys, &roots, left.as_ref(), replicas, seed, budget)?;
    let reference_lambda = match reference {
        Reference::Empirical => est.lambda_hat,
        Reference::AnalyticMidpoint => lambda_analytic
            .ok_or_else(|| Error::param("the analytic reference needs the analytic lambda"))?
            .mid(),
    };
    if !(reference_lambda > 0.0) {
        return Err(Error::param(format!(
            "reference lambda must be positive, got {reference_lambda}"
        )));
    }
    let hist = stats::histogram(est.totals.iter().copied());
    let mut rng = stream_rng(seed, role::BOOTSTRAP << 40);
    let tv = stats::tv_with_ci(&hist, reference_lambda, CONFIDENCE, 400, &mut rng);
    let tv_alternative = match (reference, lambda_analytic) {
        (Reference::Empirical, Some(a)) => Some(stats::tv_to_poisson(&hist, a.mid())),
        (Reference::AnalyticMidpoint, _) => Some(stats::tv_to_poisson(&hist, est.lambda_hat)),
        _ => None,
    };
    let half_means = est.half_means();
    let tv_halves = match (&est.halves, half_means) {
        (Some(h), Some((a, b))) => Some(stats::tv_to_poisson_2d(h, a, b)),
        _ => None,
    };
    let pmf = stats::poisson_pmf(reference_lambda, hist.len());
    let histogram = hist
        .iter()
        .zip(&pmf)
        .enumerate()
        .map(|(k, (&h, &p))| HistogramRow {
            count: k as u64,
            empirical_mass: h as f64 / replicas as f64,
            poisson_mass: p,
        })
        .collect();
    let verdict = bound_upper.map(|b| {
        if b >= 1.0 {
            Verdict::PassVacuous
        } else if tv.tv - tv.half_width() <= b {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    });
    Ok(TvReport {
        replicas,
        lambda_hat: est.lambda_hat,
        lambda_ci: est.ci,
        lambda_analytic,
        reference,
        reference_lambda,
        tv,
        tv_alternative,
        tv_halves,
        half_means,
        histogram,
        bound_upper,
        verdict,
        totals: est.totals,
    })
}

/// One line of a lemma validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaCheck {
    pub lemma: String,
    pub case: String,
    pub estimate: f64,
    pub ci: Option<Interval>,
    /// The analytic quantity the estimate is compared with.
    pub bound: Interval,
    /// Distance from the estimate to the violating side, positive when the
    /// check holds.
    pub margin: f64,
    pub pass: bool,
    pub vacuous: bool,
}

/// Palm estimates of `p_gamma` against `[e^{-(beta+rho_hi)|gamma|}, e^{-beta|gamma|}]`;
/// a check passes when the confidence interval meets the analytic one.
pub fn check_p_gamma(
    sys: &LatticeSystem,
    contours: &[Contour],
    rho: Interval,
    replicas: u64,
    seed: u64,
    budget: &Budget,
) -> Result<Vec<LemmaCheck>> {
    let mut out = Vec::new();
    for (i, c) in contours.iter().enumerate() {
        let e = estimate_p_gamma(
            sys,
            c,
            replicas,
            derive_seed(seed, i as u64),
            PGammaMethod::Palm,
            budget,
        )?;
        let iv = p_gamma_interval(c.len(), sys.beta(), rho)?;
        let pass = e.ci.hi >= iv.lo && e.ci.lo <= iv.hi;
        let margin = (e.ci.hi - iv.lo).min(iv.hi - e.ci.lo);
        out.push(LemmaCheck {
            lemma: "p_gamma".into(),
            case: format!("|gamma| = {}: {}", c.len(), c.to_line()),
            estimate: e.value,
            ci: Some(e.ci),
            bound: iv,
            margin,
            pass,
            vacuous: false,
        });
    }
    Ok(out)
}

/// Exact pair marginals against `p_g e^{-beta|t|} + p_t e^{-beta|g|}`.
pub fn check_pair_exact(family: &ContourFamily, beta: f64) -> Result<Vec<LemmaCheck>> {
    let g = exact_gibbs_small(family, beta)?;
    Ok(pair_checks_exact(family, &g))
}

fn pair_checks_exact(family: &ContourFamily, g: &ExactGibbs) -> Vec<LemmaCheck> {
    let mut out = Vec::new();
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            let (li, lj) = (family.get(i).len(), family.get(j).len());
            let b = pair_bound(li, lj, g.marginals[i], g.marginals[j], g.beta);
            let p = g.pair_marginals[i][j];
            out.push(LemmaCheck {
                lemma: "pair".into(),
                case: format!("exact ({i}, {j})"),
                estimate: p,
                ci: None,
                bound: Interval::point(b),
                margin: b - p,
                pass: p < b,
                vacuous: false,
            });
        }
    }
    out
}

/// Perfect-sample pair frequencies against the pair bound evaluated at the
/// upper confidence limits of the single marginals.
pub fn check_pair_sampled(fam: &FiniteFamily, replicas: u64, seed: u64, budget: &Budget) -> Result<Vec<LemmaCheck>> {
    need_replicas(replicas)?;
    let samples = run_replicas(replicas, seed, role::PAIRS, |rng, _| {
        Ok(sample_eta_zero(fam, &RootSet::All, rng, budget)?.present)
    })?;
    let n = fam.len();
    let mut single = vec![0u64; n];
    let mut pair = vec![vec![0u64; n]; n];
    for s in &samples {
        for (a, &i) in s.iter().enumerate() {
            single[i] += 1;
            for &j in &s[a + 1..] {
                pair[i][j] += 1;
            }
        }
    }
    let mut out = Vec::new();
    for i in 0..n {
        let ci_i = stats::wilson(single[i], replicas, CONFIDENCE)?;
        for j in i + 1..n {
            let ci_j = stats::wilson(single[j], replicas, CONFIDENCE)?;
            let (li, lj) = (fam.family().get(i).len(), fam.family().get(j).len());
            let b = pair_bound(li, lj, ci_i.hi, ci_j.hi, fam.beta());
            let ci = stats::wilson(pair[i][j], replicas, CONFIDENCE)?;
            out.push(LemmaCheck {
                lemma: "pair".into(),
                case: format!("sampled ({i}, {j})"),
                estimate: pair[i][j] as f64 / replicas as f64,
                ci: Some(ci),
                bound: Interval::point(b),
                margin: b - ci.lo,
                pass: ci.lo <= b,
                vacuous: false,
            });
        }
    }
    Ok(out)
}

/// Frequency of interacting independent clans for two `side x side`
/// windows `separation` apart, against the coupling bound over their sites.
#[allow(clippy::too_many_arguments)]
pub fn check_coupling(
    sys: &LatticeSystem,
    beta_prime: f64,
    rho_prime: Interval,
    side: u32,
    separation: i32,
    norm: Norm,
    trials: u64,
    seed: u64,
    budget: &Budget,
) -> Result<LemmaCheck> {
    need_replicas(trials)?;
    let a = SiteBox::square([0, 0], side)?;
    let b = a.translated([separation, 0]);
    let ra = RootSet::Window { window: a, min_len: 4 };
    let rb = RootSet::Window { window: b, min_len: 4 };
    let flags = run_replicas(trials, seed, role::COUPLING_A, |_, i| {
        let rng_a = stream_rng(seed, (role::COUPLING_A << 40) | i);
        let rng_b = stream_rng(seed, (role::COUPLING_B << 40) | i);
        Ok(coupled_clans(sys, &ra, &rb, rng_a, rng_b, budget)?.flag())
    })?;
    let k = flags.iter().filter(|&&f| f).count() as u64;
    let ci = stats::wilson(k, trials, CONFIDENCE)?;
    let pa: Vec<_> = a.sites().collect();
    let pb: Vec<_> = b.sites().collect();
    let bound = coupling_bound(sys.beta(), beta_prime, rho_prime, &pa, &pb, norm)?;
    let est = k as f64 / trials as f64;
    Ok(LemmaCheck {
        lemma: "coupling".into(),
        case: format!("{side}x{side} windows at separation {separation}"),
        estimate: est,
        ci: Some(ci),
        bound,
        margin: bound.lo - est,
        pass: est <= bound.hi,
        vacuous: bound.lo >= 1.0,
    })
}

/// An upper estimate of `b1` from the free weights, against the analytic
/// `b1` bound. Every `theta` within `D` of a contour of length at most
/// `L_max` touches the box of side `L_max/2 + 2(D + 1)` around it.
pub fn check_b1(sys: &LatticeSystem, params: &BoundParams, lambda_hat: f64) -> Result<LemmaCheck> {
    let r = params.resolve()?;
    let reach = r.d_neigh.hi.ceil() as u32 + 1;
    let side = (sys.l_max() / 2) as u32 + 2 * reach;
    let nbhd = SiteBox::centered(side)?;
    let inner = free_lambda(sys, params.n as usize, &nbhd);
    let est = lambda_hat * inner;
    let bound = b1_bound(&r);
    Ok(LemmaCheck {
        lemma: "b1".into(),
        case: format!("D = {:.3}", r.d_neigh.hi),
        estimate: est,
        ci: None,
        bound,
        margin: bound.lo - est,
        pass: est <= bound.hi,
        vacuous: bound.lo >= 1.0,
    })
}

/// Marginal drift of the forward dynamics started from perfect samples:
/// each member's presence frequency at `duration` must be within twice the
/// width of its confidence interval from the frequency at time 0.
pub fn check_stationarity(
    fam: &FiniteFamily,
    duration: f64,
    replicas: u64,
    seed: u64,
    budget: &Budget,
) -> Result<Vec<LemmaCheck>> {
    need_replicas(replicas)?;
    let runs = run_replicas(replicas, seed, role::STATIONARY, |rng, _| {
        let start = sample_eta_zero(fam, &RootSet::All, rng, budget)?.present;
        let end = forward_dynamics(fam, &start, duration, rng)?.final_state;
        Ok((start, end))
    })?;
    let n = fam.len();
    let mut c0 = vec![0u64; n];
    let mut c1 = vec![0u64; n];
    for (s, e) in &runs {
        for &i in s {
            c0[i] += 1;
        }
        for &i in e {
            c1[i] += 1;
        }
    }
    let mut out = Vec::new();
    for i in 0..n {
        let ci0 = stats::wilson(c0[i], replicas, CONFIDENCE)?;
        let ci1 = stats::wilson(c1[i], replicas, CONFIDENCE)?;
        let drift = (c1[i] as f64 - c0[i] as f64).abs() / replicas as f64;
        let allowed = 2.0 * ci0.width().max(ci1.width());
        out.push(LemmaCheck {
            lemma: "stationarity".into(),
            case: format!("member {i}"),
            estimate: drift,
            ci: Some(ci1),
            bound: Interval::point(allowed),
            margin: allowed - drift,
            pass: drift < allowed,
            vacuous: false,
        });
    }
    Ok(out)
}

/// Empirical distribution of perfect samples of a finite family over its
/// configurations, with the total variation to the exact Gibbs measure.
pub fn sampler_tv(fam: &FiniteFamily, replicas: u64, seed: u64, budget: &Budget) -> Result<(f64, ExactGibbs)> {
    need_replicas(replicas)?;
    let exact = exact_gibbs_small(fam.family(), fam.beta())?;
    let samples = run_replicas(replicas, seed, role::CONFIGS, |rng, _| {
        Ok(sample_eta_zero(fam, &RootSet::All, rng, budget)?.present)
    })?;
    let mut counts: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
    for s in samples {
        *counts.entry(s).or_insert(0) += 1;
    }
    let mut l1 = 0.0;
    for (config, p) in &exact.configurations {
        let f = counts.get(config).copied().unwrap_or(0) as f64 / replicas as f64;
        l1 += (f - p).abs();
    }
    for (config, c) in &counts {
        if exact.probability(config) == 0.0 {
            l1 += *c as f64 / replicas as f64;
        }
    }
    Ok((0.5 * l1, exact))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub checks: Vec<LemmaCheck>,
    pub all_pass: bool,
}

impl LemmaReport {
    pub fn new(checks: Vec<LemmaCheck>) -> LemmaReport {
        let all_pass = checks.iter().all(|c| c.pass);
        LemmaReport { checks, all_pass }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Target {
    EstimateLambda,
    SizeWindow,
    TvExperiment,
    ValidateLemmas,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub params: ModelParams,
    pub replicas: u64,
    pub seed: u64,
    pub target: Target,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        need_replicas(self.replicas)?;
        self.params.validate()
    }
}

/// The standard battery of lemma checks at the model's parameters.
pub fn validate_lemmas(spec: &ExperimentSpec, budget: &Budget) -> Result<LemmaReport> {
    spec.validate()?;
    let p = &spec.params;
    let bp = p.bound_params()?;
    let sys = p.system()?;
    let seed = spec.seed;
    let mut checks = check_p_gamma(
        &sys,
        &families::lemma_contours(),
        bp.rho,
        spec.replicas,
        derive_seed(seed, 1),
        budget,
    )?;
    checks.extend(check_pair_exact(&families::triple(), p.beta)?);
    let block = FiniteFamily::new(families::block(), p.beta)?;
    checks.extend(check_pair_sampled(&block, spec.replicas, derive_seed(seed, 2), budget)?);
    for sep in [6, 8, 10] {
        checks.push(check_coupling(
            &sys,
            p.beta_prime,
            bp.rho_prime,
            2,
            sep,
            p.norm,
            spec.replicas,
            derive_seed(seed, 3 + sep as u64),
            budget,
        )?);
    }
    checks.push(check_b1(&sys, &bp, p.lambda)?);
    checks.extend(check_stationarity(&block, 50.0, spec.replicas, derive_seed(seed, 20), budget)?);
    Ok(LemmaReport::new(checks))
}

#[cfg(test)]
mod tests;
