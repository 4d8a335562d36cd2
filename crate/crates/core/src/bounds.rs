//! The analytic side of the Poisson approximation: the constants `K`,
//! `delta`, `Q`, `A`, `M`, the Chen–Stein terms `b1`, `b2`, `b3` and the
//! total-variation bound, all evaluated in interval arithmetic so that the
//! uncertainty in `rho = alpha0(beta)`, `rho' = alpha0(beta')` and `beta*`
//! is carried through.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::lattice::{beta_star_bracket_loose, AnchorCensus, AnchorMode, Norm, Point};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub d: u32,
    pub beta: f64,
    pub beta_prime: f64,
    pub n: u32,
    pub lambda: f64,
    /// Neighbourhood radius `D`; `delta * N` when absent.
    pub d_neigh: Option<f64>,
    /// `beta' - beta*_hi` when absent.
    pub epsilon: Option<f64>,
    pub beta_star: Interval,
    pub rho: Interval,
    pub rho_prime: Interval,
}

impl BoundParams {
    /// Parameters for the square lattice with `beta*`, `rho` and `rho'`
    /// certified from the contour census up to `l_max`.
    pub fn certified(
        beta: f64,
        beta_prime: f64,
        n: u32,
        lambda: f64,
        l_max: usize,
        mode: AnchorMode,
    ) -> Result<BoundParams> {
        let census = AnchorCensus::new(l_max, mode)?;
        let br = beta_star_bracket_loose(&census)?;
        if !(beta_prime > br.hi) {
            return Err(Error::OutOfDomain {
                quantity: "beta_prime",
                requirement: format!(
                    "beta' = {beta_prime} must exceed the certified beta* upper end {:.6}",
                    br.hi
                ),
            });
        }
        let rho = census.bounds(beta)?.interval();
        let rho_prime = census.bounds(beta_prime)?.interval();
        Ok(BoundParams {
            d: 2,
            beta,
            beta_prime,
            n,
            lambda,
            d_neigh: None,
            epsilon: None,
            beta_star: br.interval(),
            rho,
            rho_prime,
        })
    }

    fn domain(quantity: &'static str, requirement: impl Into<String>) -> Error {
        Error::OutOfDomain {
            quantity,
            requirement: requirement.into(),
        }
    }

    /// Check the standing assumptions and resolve the defaults.
    pub fn resolve(&self) -> Result<Resolved> {
        if self.d < 2 {
            return Err(Self::domain("d", "dimension must be at least 2"));
        }
        if self.n < 4 {
            return Err(Self::domain("N", "N must be at least 4"));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Self::domain("lambda", "lambda must be positive"));
        }
        if !(self.beta.is_finite() && self.beta_prime.is_finite()) {
            return Err(Self::domain("beta", "beta and beta' must be finite"));
        }
        if !(self.beta_star.hi < self.beta_prime && self.beta_prime < self.beta) {
            return Err(Self::domain(
                "beta_prime",
                format!(
                    "need beta*_hi = {} < beta' = {} < beta = {}",
                    self.beta_star.hi, self.beta_prime, self.beta
                ),
            ));
        }
        if !(self.rho.lo >= 0.0 && self.rho_prime.lo >= 0.0) {
            return Err(Self::domain("rho", "rho and rho' must be non-negative"));
        }
        if !(self.rho_prime.hi < 1.0) {
            return Err(Self::domain(
                "rho_prime",
                format!("alpha0(beta') must be below 1, got upper end {}", self.rho_prime.hi),
            ));
        }
        let epsilon = self
            .epsilon
            .unwrap_or(self.beta_prime - self.beta_star.hi);
        let d = self.d as f64;
        if !(epsilon > 0.0 && epsilon <= d * (self.beta + self.rho.lo)) {
            return Err(Self::domain(
                "epsilon",
                format!("need 0 < epsilon <= d (beta + rho), got {epsilon}"),
            ));
        }
        let mut warnings = Vec::new();
        if !(epsilon * d < self.beta - self.beta_prime) {
            warnings.push(format!(
                "epsilon d = {} is not below beta - beta' = {}; the b1 and b2 bounds are used \
                 outside the range where their derivation converges",
                epsilon * d,
                self.beta - self.beta_prime
            ));
        }
        let delta = delta_choice(self);
        let d_neigh = match self.d_neigh {
            Some(x) if x > 0.0 && x.is_finite() => Interval::point(x),
            Some(_) => return Err(Self::domain("D", "D must be positive")),
            None => delta * self.n as f64,
        };
        Ok(Resolved {
            params: self.clone(),
            epsilon,
            d_neigh,
            delta,
            warnings,
        })
    }
}

/// Parameters with `epsilon` and `D` fixed.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub params: BoundParams,
    pub epsilon: f64,
    pub d_neigh: Interval,
    pub delta: Interval,
    pub warnings: Vec<String>,
}

struct Common {
    d: u32,
    b: Interval,
    bp: Interval,
    bs: Interval,
    rho: Interval,
    rhop: Interval,
    gap: Interval,
    ln_k: Interval,
    n: Interval,
    lambda: Interval,
}

fn common(p: &BoundParams) -> Common {
    let b = Interval::point(p.beta);
    let bp = Interval::point(p.beta_prime);
    Common {
        d: p.d,
        b,
        bp,
        bs: p.beta_star,
        rho: p.rho,
        rhop: p.rho_prime,
        gap: b - bp,
        ln_k: Interval::point((2 * p.d - 1) as f64).ln(),
        n: Interval::point(p.n as f64),
        lambda: Interval::point(p.lambda),
    }
}

/// `K = (beta + rho)/(beta - beta') + 1`.
pub fn k_constant(p: &BoundParams) -> Interval {
    let c = common(p);
    (c.b + c.rho) / c.gap + 1.0
}

pub fn delta_choice(p: &BoundParams) -> Interval {
    let c = common(p);
    let br = c.b + c.rho;
    (br / c.gap) * (c.ln_k * ((c.b - c.bs).recip() + br.recip()) + 1.0) + 1.0
}

pub fn q_constant(p: &BoundParams) -> Interval {
    let c = common(p);
    let k = Interval::point((2 * c.d - 1) as f64);
    4.0 * (1.0 - c.rhop).powi(2).recip() * c.gap.powi(2).recip() * k.powi(2) * (c.b + c.rho)
}

/// `A = ((beta+rho)/(beta-beta') + 1)(beta+rho) ln(2d-1)`, as displayed.
pub fn a_constant(p: &BoundParams) -> Interval {
    let c = common(p);
    let br = c.b + c.rho;
    (br / c.gap + 1.0) * br * c.ln_k
}

pub fn m_constant(p: &BoundParams) -> Interval {
    let c = common(p);
    let d = c.d;
    let dd = Interval::point((d as f64).powi(d as i32));
    let first = dd / (c.bp - c.bs).powi(d);
    let second = 2.0 * c.ln_k.powi(2) / (1.0 - c.rhop).powi(2);
    10.0 * (c.b + c.rho).powi(d) / c.gap.powi(2 * d + 2) * (first + second)
}

fn decay(c: &Common, eps: f64) -> Interval {
    (-((c.b - c.bs - eps) * c.n)).exp()
}

pub fn b1_bound(r: &Resolved) -> Interval {
    let c = common(&r.params);
    let ratio = (c.b + c.rho) / (c.b - c.bs);
    let vol = ((r.d_neigh + 1.0) / r.epsilon).powi(c.d);
    2.0 * c.lambda * c.n * ratio * vol * decay(&c, r.epsilon)
}

pub fn b2_bound(r: &Resolved) -> Interval {
    let c = common(&r.params);
    let ratio = (c.b + c.rho) / (c.b - c.bs);
    let vol = ((r.d_neigh + 1.0) / r.epsilon).powi(c.d);
    let dd = (c.d as f64).powi(c.d as i32);
    c.lambda * vol * (2.0 * c.n * ratio + dd) * decay(&c, r.epsilon)
}

/// The general `b3` bound at radius `D`.
pub fn b3_bound(r: &Resolved) -> Interval {
    let p = &r.params;
    let c = common(p);
    let first = 2.0 * c.lambda * (-(c.gap * c.n)).exp();
    let second = q_constant(p)
        * c.n
        * c.lambda
        * r.d_neigh.powi(c.d)
        * (a_constant(p) * c.n - c.gap * r.d_neigh).exp();
    first + second
}

/// The simplified `b3` bound stated for `D = delta N`.
pub fn b3_simplified(p: &BoundParams) -> Interval {
    let c = common(p);
    let d = c.d;
    4.0 * c.lambda * (c.b + c.rho).powi(d) * c.n.powi(d + 1)
        / ((1.0 - c.rhop).powi(2) * c.gap.powi(2 * d + 2))
        * (-(c.gap * c.n)).exp()
}

/// `[e^{-(beta + rho_hi) len}, e^{-beta len}]`, valid for `len >= N`.
pub fn p_gamma_bounds(length: usize, p: &BoundParams) -> Result<Interval> {
    if length < p.n as usize {
        return Err(Error::OutOfDomain {
            quantity: "length",
            requirement: format!("the p_gamma bounds need |gamma| >= N = {}", p.n),
        });
    }
    p_gamma_interval(length, p.beta, p.rho)
}

/// The same interval without the `|gamma| >= N` hypothesis check.
pub fn p_gamma_interval(length: usize, beta: f64, rho: Interval) -> Result<Interval> {
    let l = Interval::point(length as f64);
    let lo = (-((Interval::point(beta) + rho.hi) * l)).exp().lo;
    let hi = (-(Interval::point(beta) * l)).exp().hi;
    Ok(Interval::new(lo, hi))
}

/// `p1 e^{-beta len2} + p2 e^{-beta len1}`.
pub fn pair_bound(len1: usize, len2: usize, p1_up: f64, p2_up: f64, beta: f64) -> f64 {
    let b = Interval::point(beta);
    let v = Interval::point(p1_up) * (-(b * len2 as f64)).exp()
        + Interval::point(p2_up) * (-(b * len1 as f64)).exp();
    v.hi
}

/// `2 (1 - rho')^{-2} sum_{x in a} sum_{y in b} |x - y| e^{-(beta - beta')|x - y|}`.
pub fn coupling_bound(
    beta: f64,
    beta_prime: f64,
    rho_prime: Interval,
    a: &[Point],
    b: &[Point],
    norm: Norm,
) -> Result<Interval> {
    if !(rho_prime.hi < 1.0) {
        return Err(Error::OutOfDomain {
            quantity: "rho_prime",
            requirement: "alpha0(beta') must be below 1".into(),
        });
    }
    let gap = Interval::point(beta) - Interval::point(beta_prime);
    let mut sum = Interval::point(0.0);
    for x in a {
        for y in b {
            let dx = (x[0] - y[0]) as f64;
            let dy = (x[1] - y[1]) as f64;
            let r = match norm {
                Norm::Euclidean => {
                    let s = Interval::point(dx * dx + dy * dy);
                    Interval::new(s.lo.sqrt().next_down(), s.hi.sqrt().next_up())
                }
                Norm::Sup => Interval::point(dx.abs().max(dy.abs())),
            };
            sum = sum + r * (-(gap * r)).exp();
        }
    }
    Ok(2.0 * (1.0 - rho_prime).powi(2).recip() * sum)
}

/// `|V| <= lambda N e^{(beta + rho) N}`.
pub fn window_volume_bound(lambda: f64, n: u32, beta: f64, rho: Interval) -> Interval {
    let nn = Interval::point(n as f64);
    Interval::point(lambda) * nn * ((Interval::point(beta) + rho) * nn).exp()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub params: BoundParams,
    pub epsilon: f64,
    pub d_neigh: Interval,
    pub k: Interval,
    pub delta: Interval,
    pub q: Interval,
    pub a: Interval,
    pub m: Interval,
    pub b1: Interval,
    pub b2: Interval,
    /// General `b3` bound at the chosen `D`.
    pub b3: Interval,
    /// Simplified `b3` bound (stated for `D = delta N`).
    pub b3_simplified: Interval,
    /// `2(2 b1 + 2 b2 + b3)` with the simplified `b3`.
    pub tv_assembled: Interval,
    /// `2(2 b1 + 2 b2 + b3)` with the general `b3`.
    pub tv_assembled_general: Interval,
    /// `M N^{d+1} lambda e^{-(beta - beta') N}`.
    pub tv_closed_form: Interval,
    /// Upper end of the closed form is at least the assembled upper end.
    pub closed_form_dominates: bool,
    pub warnings: Vec<String>,
}

impl BoundReport {
    /// The bound used for verdicts: the closed form.
    pub fn tv_bound(&self) -> Interval {
        self.tv_closed_form
    }

    pub const CSV_HEADER: &'static [&'static str] = &[
        "d", "beta", "beta_prime", "N", "lambda", "beta_star_lo", "beta_star_hi", "rho_lo",
        "rho_hi", "rho_prime_lo", "rho_prime_hi", "epsilon", "D_lo", "D_hi", "K_lo", "K_hi",
        "delta_lo", "delta_hi", "Q_lo", "Q_hi", "A_lo", "A_hi", "M_lo", "M_hi", "b1_lo", "b1_hi",
        "b2_lo", "b2_hi", "b3_lo", "b3_hi", "b3_simplified_lo", "b3_simplified_hi",
        "tv_assembled_lo", "tv_assembled_hi", "tv_assembled_general_lo",
        "tv_assembled_general_hi", "tv_bound_lo", "tv_bound_hi", "closed_form_dominates",
    ];

    pub fn csv_row(&self) -> Vec<String> {
        let p = &self.params;
        let mut row = vec![
            p.d.to_string(),
            p.beta.to_string(),
            p.beta_prime.to_string(),
            p.n.to_string(),
            p.lambda.to_string(),
        ];
        for iv in [p.beta_star, p.rho, p.rho_prime] {
            row.push(iv.lo.to_string());
            row.push(iv.hi.to_string());
        }
        row.push(self.epsilon.to_string());
        for iv in [
            self.d_neigh,
            self.k,
            self.delta,
            self.q,
            self.a,
            self.m,
            self.b1,
            self.b2,
            self.b3,
            self.b3_simplified,
            self.tv_assembled,
            self.tv_assembled_general,
            self.tv_closed_form,
        ] {
            row.push(iv.lo.to_string());
            row.push(iv.hi.to_string());
        }
        row.push(self.closed_form_dominates.to_string());
        row
    }
}

/// Every bound at the given parameters.
pub fn tv_bound(p: &BoundParams) -> Result<BoundReport> {
    let r = p.resolve()?;
    let c = common(p);
    let b1 = b1_bound(&r);
    let b2 = b2_bound(&r);
    let b3 = b3_bound(&r);
    let b3s = b3_simplified(p);
    let tv_assembled = 2.0 * (2.0 * b1 + 2.0 * b2 + b3s);
    let tv_assembled_general = 2.0 * (2.0 * b1 + 2.0 * b2 + b3);
    let m = m_constant(p);
    let tv_closed = m * c.n.powi(c.d + 1) * c.lambda * (-(c.gap * c.n)).exp();
    Ok(BoundReport {
        params: p.clone(),
        epsilon: r.epsilon,
        d_neigh: r.d_neigh,
        k: k_constant(p),
        delta: r.delta,
        q: q_constant(p),
        a: a_constant(p),
        m,
        b1,
        b2,
        b3,
        b3_simplified: b3s,
        tv_assembled,
        tv_assembled_general,
        tv_closed_form: tv_closed,
        closed_form_dominates: tv_closed.hi >= tv_assembled.hi,
        warnings: r.warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(beta: f64, beta_prime: f64, n: u32) -> BoundParams {
        BoundParams {
            d: 2,
            beta,
            beta_prime,
            n,
            lambda: 1.0,
            d_neigh: None,
            epsilon: None,
            beta_star: Interval::new(1.30, 1.36),
            rho: Interval::new(0.0010, 0.0012),
            rho_prime: Interval::new(0.003, 0.004),
        }
    }

    #[test]
    fn p_gamma_interval_limits() {
        let p = params(2.0, 1.8, 4);
        let iv = p_gamma_bounds(6, &p).unwrap();
        assert!(iv.lo <= (-(2.0012f64) * 6.0).exp() && (-12f64).exp() <= iv.hi);
        assert!(p_gamma_bounds(3, &p).is_err());
        let mut q = p.clone();
        q.beta = 200.0;
        assert!(p_gamma_bounds(6, &q).unwrap().hi < 1e-300);
        let z = p_gamma_interval(8, 2.0, Interval::point(0.0)).unwrap();
        assert!((z.hi - z.lo) / z.hi < 1e-14);
    }

    #[test]
    fn pair_bound_symmetric() {
        assert_eq!(pair_bound(4, 6, 0.1, 0.2, 2.0), pair_bound(6, 4, 0.2, 0.1, 2.0));
    }

    #[test]
    fn b1_decreases_in_n_and_scales_with_lambda() {
        let mut last = f64::INFINITY;
        for n in [6, 8, 10, 12] {
            let mut p = params(2.0, 1.8, n);
            p.d_neigh = Some(20.0);
            let r = p.resolve().unwrap();
            let b = b1_bound(&r).hi;
            assert!(b < last);
            last = b;
            p.lambda = 3.0;
            let r3 = p.resolve().unwrap();
            assert!((b1_bound(&r3).mid() / b1_bound(&r).mid() - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn b2_minus_b1_and_monotone_in_d() {
        let mut p = params(2.2, 1.7, 8);
        p.beta_star = Interval::point(1.36);
        p.d_neigh = Some(15.0);
        let r = p.resolve().unwrap();
        let diff = b2_bound(&r).mid() - b1_bound(&r).mid();
        let c = ((15.0f64 + 1.0) / r.epsilon).powi(2) * 4.0 * (-(2.2 - 1.36 - r.epsilon) * 8.0f64).exp();
        assert!((diff / c - 1.0).abs() < 1e-9, "{diff} vs {c}");
        p.d_neigh = Some(30.0);
        let r2 = p.resolve().unwrap();
        assert!(b2_bound(&r2).lo > b2_bound(&r).hi);
    }

    #[test]
    fn b3_tends_to_first_term() {
        let mut p = params(2.0, 1.8, 8);
        p.d_neigh = Some(1e5);
        let r = p.resolve().unwrap();
        let first = 2.0 * (-0.2f64 * 8.0).exp();
        assert!((b3_bound(&r).mid() / first - 1.0).abs() < 1e-9);
    }

    #[test]
    fn delta_exceeds_one_and_decreases_in_gap() {
        let mut last = f64::INFINITY;
        for bp in [1.9, 1.8, 1.6, 1.4] {
            let d = delta_choice(&params(2.0, bp, 8));
            assert!(d.lo > 1.0);
            assert!(d.hi < last);
            last = d.lo;
        }
    }

    #[test]
    fn m_blows_up_at_both_ends() {
        let at = |bp: f64| {
            let mut p = params(2.0, bp, 8);
            p.beta_star = Interval::point(1.36);
            m_constant(&p)
        };
        let mid = at(1.7).hi;
        assert!(at(1.999).lo > 1e6 * mid);
        assert!(at(1.3601).lo > 1e3 * mid);
    }

    #[test]
    fn a_increases_with_dimension() {
        let p = params(2.5, 2.0, 8);
        let mut q = p.clone();
        q.d = 3;
        assert!(a_constant(&p).hi < a_constant(&q).lo);
        assert!(a_constant(&p).lo > 0.0);
    }

    #[test]
    fn tv_report_linear_and_vanishing() {
        let p = params(2.0, 1.8, 8);
        let r1 = tv_bound(&p).unwrap();
        let mut p2 = p.clone();
        p2.lambda = 2.0;
        let r2 = tv_bound(&p2).unwrap();
        assert!((r2.tv_closed_form.mid() / r1.tv_closed_form.mid() - 2.0).abs() < 1e-12);
        assert!((r2.tv_assembled.mid() / r1.tv_assembled.mid() - 2.0).abs() < 1e-12);
        let far = tv_bound(&params(2.0, 1.8, 2000)).unwrap();
        assert!(far.tv_closed_form.hi < 1e-100);
        assert_eq!(r1.csv_row().len(), BoundReport::CSV_HEADER.len());
    }

    #[test]
    fn domain_errors() {
        assert!(params(2.0, 1.2, 8).resolve().is_err());
        assert!(params(2.0, 2.1, 8).resolve().is_err());
        assert!(params(2.0, 1.8, 3).resolve().is_err());
        let mut p = params(2.0, 1.8, 8);
        p.rho_prime = Interval::new(0.5, 1.0);
        assert!(p.resolve().is_err());
        p = params(2.0, 1.8, 8);
        p.epsilon = Some(5.0);
        assert!(p.resolve().is_err());
        p.epsilon = Some(0.3);
        assert_eq!(p.resolve().unwrap().warnings.len(), 1);
    }

    #[test]
    fn certified_params_from_census() {
        let p = BoundParams::certified(2.0, 1.8, 8, 1.0, 12, AnchorMode::Vertex).unwrap();
        assert!(p.beta_star.hi < 1.8 && p.rho.lo > 0.0 && p.rho.hi < p.rho_prime.lo);
        assert!(BoundParams::certified(2.0, 1.0, 8, 1.0, 12, AnchorMode::Vertex).is_err());
    }
}
