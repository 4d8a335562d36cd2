//! Confidence intervals and goodness-of-fit statistics.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Normal, Poisson};

use crate::error::{Error, Result};
use crate::interval::Interval;

/// Two-sided standard normal quantile for `confidence`.
pub fn z_value(confidence: f64) -> f64 {
    Normal::standard().inverse_cdf(0.5 + 0.5 * confidence)
}

/// Wilson score interval for a binomial proportion.
pub fn wilson(successes: u64, trials: u64, confidence: f64) -> Result<Interval> {
    if trials == 0 {
        return Err(Error::param("a proportion needs at least one trial"));
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = z_value(confidence);
    let z2 = z * z;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (centre + half).min(1.0) };
    Ok(Interval::new(lo, hi))
}

/// Mean with a normal-approximation interval.
pub fn mean_ci(values: impl IntoIterator<Item = f64>, confidence: f64) -> Result<(f64, Interval)> {
    let mut n = 0u64;
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for x in values {
        n += 1;
        let d = x - mean;
        mean += d / n as f64;
        m2 += d * (x - mean);
    }
    if n == 0 {
        return Err(Error::param("a mean needs at least one sample"));
    }
    let var = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
    let half = z_value(confidence) * (var / n as f64).sqrt();
    Ok((mean, Interval::new(mean - half, mean + half)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GofMethod {
    ChiSquare,
    /// Pooling left a single bin: exact two-sided test on the sample sum,
    /// which is Poisson(`n * mean`) under the null.
    ExactSum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub method: GofMethod,
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// `(first value, observed, expected)` per pooled bin; the last bin is
    /// open to the right.
    pub bins: Vec<(u64, u64, f64)>,
}

/// Chi-square goodness of fit of `samples` against Poisson(`mean`), with
/// adjacent bins pooled until each expects at least 5 observations.
pub fn chi_square_poisson(samples: &[u64], mean: f64) -> Result<ChiSquare> {
    if samples.is_empty() {
        return Err(Error::param("no samples"));
    }
    let pois = Poisson::new(mean).map_err(|e| Error::param(e.to_string()))?;
    let n = samples.len() as f64;
    let max = *samples.iter().max().unwrap();
    let mut hist = vec![0u64; max as usize + 1];
    for &s in samples {
        hist[s as usize] += 1;
    }
    let mut bins: Vec<(u64, u64, f64)> = Vec::new();
    let mut cur = (0u64, 0u64, 0.0f64);
    let mut cum = 0.0;
    let mut k = 0u64;
    loop {
        let pk = pois.pmf(k);
        cum += pk;
        cur.1 += hist.get(k as usize).copied().unwrap_or(0);
        cur.2 += n * pk;
        let rest = (1.0 - cum).max(0.0) * n;
        if cur.2 >= 5.0 && rest >= 5.0 {
            bins.push(cur);
            cur = (k + 1, 0, 0.0);
        } else if rest < 5.0 {
            // Close with the open tail bin.
            let tail_obs: u64 = hist.iter().skip(k as usize + 1).sum();
            cur.1 += tail_obs;
            cur.2 += rest;
            bins.push(cur);
            break;
        }
        k += 1;
    }
    if bins.len() > 1 && bins.last().unwrap().2 < 5.0 {
        let last = bins.pop().unwrap();
        let prev = bins.last_mut().unwrap();
        prev.1 += last.1;
        prev.2 += last.2;
    }
    let statistic: f64 = bins
        .iter()
        .map(|&(_, o, e)| (o as f64 - e).powi(2) / e)
        .sum();
    let dof = bins.len().saturating_sub(1);
    if dof == 0 {
        let sum: u64 = samples.iter().sum();
        let total = Poisson::new(n * mean).map_err(|e| Error::param(e.to_string()))?;
        let lower = total.cdf(sum);
        let upper = if sum == 0 { 1.0 } else { total.sf(sum - 1) };
        return Ok(ChiSquare {
            method: GofMethod::ExactSum,
            statistic: sum as f64,
            dof,
            p_value: (2.0 * lower.min(upper)).min(1.0),
            bins,
        });
    }
    let p_value = ChiSquared::new(dof as f64)
        .map_err(|e| Error::param(e.to_string()))?
        .sf(statistic);
    Ok(ChiSquare {
        method: GofMethod::ChiSquare,
        statistic,
        dof,
        p_value,
        bins,
    })
}

/// Poisson probabilities `0..len` computed by recursion.
pub fn poisson_pmf(lambda: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut p = (-lambda).exp();
    for k in 0..len {
        out.push(p);
        p *= lambda / (k + 1) as f64;
    }
    out
}

/// Total variation between the empirical law of a count histogram and
/// Poisson(`lambda`), including the Poisson mass beyond the histogram.
pub fn tv_to_poisson(hist: &[u64], lambda: f64) -> f64 {
    let n: u64 = hist.iter().sum();
    if n == 0 {
        return 1.0;
    }
    let pmf = poisson_pmf(lambda, hist.len());
    let mut l1 = 0.0;
    let mut covered = 0.0;
    for (h, p) in hist.iter().zip(&pmf) {
        l1 += (*h as f64 / n as f64 - p).abs();
        covered += p;
    }
    l1 += (1.0 - covered).max(0.0);
    0.5 * l1
}

/// Histogram of counts.
pub fn histogram(values: impl IntoIterator<Item = u64>) -> Vec<u64> {
    let mut hist = Vec::new();
    for v in values {
        let v = v as usize;
        if hist.len() <= v {
            hist.resize(v + 1, 0);
        }
        hist[v] += 1;
    }
    hist
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    Normal,
    BootstrapPercentile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvEstimate {
    pub tv: f64,
    pub std_error: f64,
    pub ci: Interval,
    pub method: CiMethod,
}

impl TvEstimate {
    pub fn half_width(&self) -> f64 {
        0.5 * self.ci.width()
    }
}

/// Multinomial resample of a histogram.
fn resample<R: Rng + ?Sized>(hist: &[u64], rng: &mut R) -> Vec<u64> {
    let mut left: u64 = hist.iter().sum();
    let mut mass = 1.0;
    let total = left as f64;
    let mut out = vec![0; hist.len()];
    for (i, &h) in hist.iter().enumerate() {
        if left == 0 {
            break;
        }
        let p = h as f64 / total;
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 1.0 };
        let draw = Binomial::new(left, q).expect("probability in range").sample(rng);
        out[i] = draw;
        left -= draw;
        mass -= p;
    }
    out
}

/// TV of a count histogram against Poisson(`lambda`) with a bootstrap
/// interval. The normal interval around the point estimate is used unless
/// the bootstrap distribution is visibly skewed or touches zero, in which
/// case the percentile interval is reported.
pub fn tv_with_ci<R: Rng + ?Sized>(
    hist: &[u64],
    lambda: f64,
    confidence: f64,
    resamples: usize,
    rng: &mut R,
) -> TvEstimate {
    let tv = tv_to_poisson(hist, lambda);
    let mut boot: Vec<f64> = (0..resamples.max(2))
        .map(|_| tv_to_poisson(&resample(hist, rng), lambda))
        .collect();
    boot.sort_by(f64::total_cmp);
    let m = boot.iter().sum::<f64>() / boot.len() as f64;
    let se = (boot.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (boot.len() - 1) as f64).sqrt();
    let z = z_value(confidence);
    let q = |f: f64| boot[((f * (boot.len() - 1) as f64).round() as usize).min(boot.len() - 1)];
    let lo_p = q(0.5 - 0.5 * confidence);
    let hi_p = q(0.5 + 0.5 * confidence);
    let normal = Interval::new(tv - z * se, tv + z * se);
    if normal.lo < 0.0 || (m - tv).abs() > se {
        TvEstimate {
            tv,
            std_error: se,
            ci: Interval::new(lo_p.min(tv), hi_p.max(tv)),
            method: CiMethod::BootstrapPercentile,
        }
    } else {
        TvEstimate {
            tv,
            std_error: se,
            ci: normal,
            method: CiMethod::Normal,
        }
    }
}

/// TV of a 2-D count histogram against independent Poisson marginals.
pub fn tv_to_poisson_2d(pairs: &[(u64, u64)], la: f64, lb: f64) -> f64 {
    let n = pairs.len() as f64;
    if pairs.is_empty() {
        return 1.0;
    }
    let mut counts = std::collections::BTreeMap::new();
    let (mut ma, mut mb) = (0, 0);
    for &(a, b) in pairs {
        *counts.entry((a, b)).or_insert(0u64) += 1;
        ma = ma.max(a);
        mb = mb.max(b);
    }
    let pa = poisson_pmf(la, ma as usize + 1);
    let pb = poisson_pmf(lb, mb as usize + 1);
    let mut l1 = 0.0;
    let mut covered = 0.0;
    for a in 0..=ma as usize {
        for b in 0..=mb as usize {
            let p = pa[a] * pb[b];
            let f = counts.get(&(a as u64, b as u64)).copied().unwrap_or(0) as f64 / n;
            l1 += (f - p).abs();
            covered += p;
        }
    }
    l1 += (1.0 - covered).max(0.0);
    0.5 * l1
}

/// Two-sample Kolmogorov–Smirnov statistic and its asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::param("both samples must be nonempty"));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < n && j < m {
        let v = x[i].min(y[j]);
        while i < n && x[i] <= v {
            i += 1;
        }
        while j < m && y[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let lam = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    if lam < 0.2 {
        return Ok((d, 1.0));
    }
    let mut p = 0.0;
    for k in 1..=100 {
        let t = 2.0 * (-1f64).powi(k - 1) * (-2.0 * (k as f64 * lam).powi(2)).exp();
        p += t;
        if t.abs() < 1e-12 {
            break;
        }
    }
    Ok((d, p.clamp(0.0, 1.0)))
}
