//! The pipelines behind each subcommand.

use std::path::PathBuf;

use clansim::bounds::tv_bound;
use clansim::estimators::{
    analytic_lambda, estimate_lambda, free_lambda, size_window_for_lambda, tv_experiment,
    validate_lemmas, ExperimentSpec, Target, Verdict, WindowSizing,
};
use clansim::lattice::{
    beta_star_bracket_loose, enumerate_anchored, enumerate_window, AnchorCensus, LN_3,
};
use clansim::process::{sample_eta_zero, stream_rng};
use clansim::{BoundReport, Budget, Error, Interval, Link, RootSet, SiteBox};
use serde::Serialize;

use crate::config::{Format, RunConfig};
use crate::output::{self, Artifact};
use crate::Command;

/// An error with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn param(message: String) -> Failure {
        Failure { code: 2, message }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Budget { .. } | Error::Capacity(_) => 3,
        Error::BracketTooWide { .. } => 1,
        _ => 2,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

type Outcome = Result<(Vec<Artifact>, bool), Failure>;

fn default_replicas(cmd: Command) -> u64 {
    match cmd {
        Command::Sample => 1,
        _ => 10_000,
    }
}

pub fn run(cmd: Command, cfg: &RunConfig) -> Result<u8, Failure> {
    let echo = cfg.echo(default_replicas(cmd));
    let ctx = Ctx {
        cfg,
        echo: &echo,
        replicas: cfg.replicas(default_replicas(cmd)),
        name: cmd.name(),
    };
    if ctx.replicas == 0 {
        return Err(Failure::param("replicas must be at least 1".into()));
    }
    eprintln!("clansim {}: seed {}", cmd.name(), cfg.seed());
    let (artifacts, failed) = match cmd {
        Command::Enumerate => enumerate(&ctx),
        Command::Alpha0 => alpha0(&ctx),
        Command::BetaStar => beta_star(&ctx),
        Command::Bounds => bounds(&ctx),
        Command::Sample => sample(&ctx),
        Command::Estimate => estimate(&ctx),
        Command::TvCheck => tv_check(&ctx),
        Command::Validate => validate(&ctx),
        Command::Sweep => sweep(&ctx),
    }?;
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    for p in output::write_all(&dir, &artifacts, cfg.force.unwrap_or(false))? {
        eprintln!("wrote {}", p.display());
    }
    Ok(if failed { 1 } else { 0 })
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    echo: &'a RunConfig,
    replicas: u64,
    name: &'static str,
}

impl Ctx<'_> {
    fn csv_mode(&self) -> bool {
        self.cfg.format() == Format::Csv
    }

    fn report<T: Serialize>(&self, result: &T) -> Artifact {
        output::json(self.name, self.echo, result)
    }

    fn table(&self, suffix: &str, header: &[&str], rows: &[Vec<String>]) -> Artifact {
        output::csv(format!("{}{suffix}.csv", self.name), self.echo, header, rows)
    }
}

#[derive(Serialize)]
struct EnumerateResult {
    source: String,
    total: usize,
    counts_by_length: Vec<(usize, u64)>,
    contours: Vec<String>,
}

fn enumerate(ctx: &Ctx) -> Outcome {
    let m = ctx.cfg.model();
    let (source, fam) = match m.window {
        Some(side) => {
            let w = SiteBox::centered(side)?;
            (format!("window {side}x{side}"), enumerate_window(&w, m.l_max)?)
        }
        None => ("anchor link {(0,0),(1,0)}".to_string(), enumerate_anchored(Link::crossing([0, 0], 0), m.l_max)?),
    };
    let counts: Vec<(usize, u64)> = fam
        .length_histogram()
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .collect();
    if ctx.csv_mode() {
        let rows: Vec<Vec<String>> = counts
            .iter()
            .map(|(l, c)| vec![l.to_string(), c.to_string()])
            .collect();
        return Ok((vec![ctx.table("", &["length", "count"], &rows)], false));
    }
    let r = EnumerateResult {
        source,
        total: fam.len(),
        counts_by_length: counts,
        contours: fam.members().iter().map(|c| c.to_line()).collect(),
    };
    Ok((vec![ctx.report(&r)], false))
}

#[derive(Serialize)]
struct Alpha0Result {
    census: AnchorCensus,
    at_beta: clansim::lattice::Alpha0Bounds,
    at_beta_prime: Option<clansim::lattice::Alpha0Bounds>,
}

fn alpha0(ctx: &Ctx) -> Outcome {
    let m = ctx.cfg.model();
    let census = AnchorCensus::new(m.l_max, m.anchor)?;
    let at_beta = census.bounds(m.beta)?;
    let at_beta_prime = if m.beta_prime > LN_3 {
        Some(census.bounds(m.beta_prime)?)
    } else {
        None
    };
    if ctx.csv_mode() {
        let rows: Vec<Vec<String>> = std::iter::once(at_beta)
            .chain(at_beta_prime)
            .map(|b| vec![b.beta.to_string(), b.lower.to_string(), b.upper.to_string(), b.tail.to_string()])
            .collect();
        return Ok((vec![ctx.table("", &["beta", "lower", "upper", "tail"], &rows)], false));
    }
    let r = Alpha0Result {
        census,
        at_beta,
        at_beta_prime,
    };
    Ok((vec![ctx.report(&r)], false))
}

#[derive(Serialize)]
struct BetaStarResult {
    bracket: clansim::BetaStarBracket,
    tolerance: f64,
    certified: bool,
}

fn beta_star(ctx: &Ctx) -> Outcome {
    let m = ctx.cfg.model();
    let tolerance = ctx.cfg.tolerance.unwrap_or(1.0);
    if !(tolerance > 0.0) {
        return Err(Failure::param("tolerance must be positive".into()));
    }
    let census = AnchorCensus::new(m.l_max, m.anchor)?;
    let bracket = beta_star_bracket_loose(&census)?;
    let certified = bracket.width() <= tolerance;
    if !certified {
        eprintln!(
            "bracket [{}, {}] is wider than {tolerance}; increase L-max",
            bracket.lo, bracket.hi
        );
    }
    let r = BetaStarResult {
        bracket,
        tolerance,
        certified,
    };
    let art = if ctx.csv_mode() {
        ctx.table(
            "",
            &["lo", "hi", "width", "tolerance", "certified"],
            &[vec![
                bracket.lo.to_string(),
                bracket.hi.to_string(),
                bracket.width().to_string(),
                tolerance.to_string(),
                certified.to_string(),
            ]],
        )
    } else {
        ctx.report(&r)
    };
    Ok((vec![art], !certified))
}

fn bound_report(ctx: &Ctx) -> Result<BoundReport, Failure> {
    let report = tv_bound(&ctx.cfg.model().bound_params()?)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(report)
}

fn bounds(ctx: &Ctx) -> Outcome {
    let report = bound_report(ctx)?;
    let art = if ctx.csv_mode() {
        ctx.table("", BoundReport::CSV_HEADER, &[report.csv_row()])
    } else {
        ctx.report(&report)
    };
    Ok((vec![art], false))
}

#[derive(Serialize)]
struct SampleRecord {
    present: Vec<String>,
    root_count: usize,
    clan_size: usize,
    depth: usize,
}

fn sample(ctx: &Ctx) -> Outcome {
    let m = ctx.cfg.model();
    m.validate()?;
    let side = m.window.unwrap_or(16);
    let window = m.window_box(side)?;
    m.check_margin(&window, m.d_neigh.unwrap_or(0.0))?;
    let sys = m.system()?;
    let roots = RootSet::Window {
        window,
        min_len: m.n as usize,
    };
    let budget = Budget::default();
    let mut rng = stream_rng(ctx.cfg.seed(), 0);
    let mut records = Vec::new();
    for _ in 0..ctx.replicas {
        let s = sample_eta_zero(&sys, &roots, &mut rng, &budget)?;
        records.push(SampleRecord {
            present: s.present.iter().map(|c| c.to_line()).collect(),
            root_count: s.root_count,
            clan_size: s.clan_size,
            depth: s.depth,
        });
    }
    if ctx.csv_mode() {
        let rows: Vec<Vec<String>> = records
            .iter()
            .enumerate()
            .map(|(i, r)| {
                vec![
                    i.to_string(),
                    r.present.len().to_string(),
                    r.root_count.to_string(),
                    r.clan_size.to_string(),
                    r.depth.to_string(),
                ]
            })
            .collect();
        return Ok((
            vec![ctx.table("", &["replica", "present", "root_count", "clan_size", "depth"], &rows)],
            false,
        ));
    }
    Ok((vec![ctx.report(&records)], false))
}

/// Neighbourhood radius for the margin rule: `D` if given, else `delta N`
/// when the bound parameters are admissible.
fn margin_radius(ctx: &Ctx) -> f64 {
    let m = ctx.cfg.model();
    m.d_neigh.unwrap_or_else(|| {
        m.bound_params()
            .and_then(|p| p.resolve())
            .map_or(0.0, |r| r.d_neigh.hi)
    })
}

/// The window and, when it was sized from lambda, the sizing record.
fn window_for(ctx: &Ctx, sys: &clansim::LatticeSystem, margin: f64) -> Result<(SiteBox, Option<WindowSizing>), Failure> {
    let m = ctx.cfg.model();
    let window = match m.window {
        Some(side) => (m.window_box(side)?, None),
        None => {
            let max_side = m.max_window_side(margin).unwrap_or(1 << 16);
            eprintln!("sizing the window for lambda = {}", m.lambda);
            let s = size_window_for_lambda(
                sys,
                m.n as usize,
                m.lambda,
                max_side,
                ctx.replicas,
                ctx.cfg.seed(),
                &Budget::default(),
            )?;
            (m.window_box(s.chosen.side)?, Some(s))
        }
    };
    m.check_margin(&window.0, margin)?;
    Ok(window)
}

#[derive(Serialize)]
struct EstimateResult {
    window_side: i64,
    lambda_hat: f64,
    ci: Interval,
    free_lambda: f64,
    sizing: Option<WindowSizing>,
}

fn estimate(ctx: &Ctx) -> Outcome {
    let m = ctx.cfg.model();
    m.validate()?;
    let sys = m.system()?;
    let (window, sizing) = window_for(ctx, &sys, margin_radius(ctx))?;
    let e = estimate_lambda(
        &sys,
        &RootSet::Window {
            window,
            min_len: m.n as usize,
        },
        None,
        ctx.replicas,
        ctx.cfg.seed(),
        &Budget::default(),
    )?;
    let r = EstimateResult {
        window_side: window.side(0),
        lambda_hat: e.lambda_hat,
        ci: e.ci,
        free_lambda: free_lambda(&sys, m.n as usize, &window),
        sizing,
    };
    if ctx.csv_mode() {
        let rows: Vec<Vec<String>> = e
            .totals
            .iter()
            .enumerate()
            .map(|(i, t)| vec![i.to_string(), t.to_string()])
            .collect();
        return Ok((vec![ctx.table("", &["replica", "total"], &rows)], false));
    }
    Ok((vec![ctx.report(&r)], false))
}

#[derive(Serialize)]
struct TvCheckResult {
    bounds: BoundReport,
    window_side: i64,
    sizing: Option<WindowSizing>,
    experiment: clansim::TvReport,
    verdict: String,
}

fn tv_pipeline(ctx: &Ctx) -> Result<TvCheckResult, Failure> {
    let m = ctx.cfg.model();
    m.validate()?;
    let bp = m.bound_params()?;
    let bounds = tv_bound(&bp)?;
    for w in &bounds.warnings {
        eprintln!("warning: {w}");
    }
    let sys = m.system()?;
    let (window, sizing) = window_for(ctx, &sys, bounds.d_neigh.hi)?;
    let lam = analytic_lambda(&sys, m.n as usize, &window, bp.rho)?;
    eprintln!("running {} replicas on a {}x{} window", ctx.replicas, window.side(0), window.side(1));
    let experiment = tv_experiment(
        &sys,
        &window,
        m.n as usize,
        ctx.replicas,
        ctx.cfg.seed(),
        ctx.cfg.reference(),
        Some(lam),
        Some(bounds.tv_bound().hi),
        &Budget::default(),
    )?;
    let verdict = experiment.verdict.unwrap_or(Verdict::Fail);
    eprintln!(
        "empirical TV {:.5} (CI {}), analytic bound {:.4e}: {}",
        experiment.tv.tv,
        experiment.tv.ci,
        bounds.tv_bound().hi,
        verdict.label()
    );
    Ok(TvCheckResult {
        window_side: window.side(0),
        bounds,
        sizing,
        verdict: verdict.label().to_string(),
        experiment,
    })
}

fn tv_check(ctx: &Ctx) -> Outcome {
    let r = tv_pipeline(ctx)?;
    let failed = r.verdict == Verdict::Fail.label();
    let hist: Vec<Vec<String>> = r
        .experiment
        .histogram
        .iter()
        .map(|h| vec![h.count.to_string(), h.empirical_mass.to_string(), h.poisson_mass.to_string()])
        .collect();
    let totals: Vec<Vec<String>> = r
        .experiment
        .totals
        .iter()
        .enumerate()
        .map(|(i, t)| vec![i.to_string(), t.to_string()])
        .collect();
    let mut arts = vec![
        ctx.table("-histogram", &["count", "empirical_mass", "poisson_mass"], &hist),
        ctx.table("-totals", &["replica", "total"], &totals),
    ];
    if ctx.csv_mode() {
        arts.push(ctx.table(
            "",
            &["window_side", "lambda_hat", "tv", "tv_ci_lo", "tv_ci_hi", "tv_bound_hi", "verdict"],
            &[vec![
                r.window_side.to_string(),
                r.experiment.lambda_hat.to_string(),
                r.experiment.tv.tv.to_string(),
                r.experiment.tv.ci.lo.to_string(),
                r.experiment.tv.ci.hi.to_string(),
                r.bounds.tv_bound().hi.to_string(),
                r.verdict.clone(),
            ]],
        ));
    } else {
        arts.push(ctx.report(&r));
    }
    Ok((arts, failed))
}

fn validate(ctx: &Ctx) -> Outcome {
    let spec = ExperimentSpec {
        params: ctx.cfg.model(),
        replicas: ctx.replicas,
        seed: ctx.cfg.seed(),
        target: Target::ValidateLemmas,
    };
    let report = validate_lemmas(&spec, &Budget::default())?;
    for c in &report.checks {
        if !c.pass {
            eprintln!("FAIL {} {}: {} vs {}", c.lemma, c.case, c.estimate, c.bound);
        }
    }
    let art = if ctx.csv_mode() {
        let rows: Vec<Vec<String>> = report
            .checks
            .iter()
            .map(|c| {
                vec![
                    c.lemma.clone(),
                    c.case.clone(),
                    c.estimate.to_string(),
                    c.bound.lo.to_string(),
                    c.bound.hi.to_string(),
                    c.margin.to_string(),
                    c.pass.to_string(),
                    c.vacuous.to_string(),
                ]
            })
            .collect();
        ctx.table(
            "",
            &["lemma", "case", "estimate", "bound_lo", "bound_hi", "margin", "pass", "vacuous"],
            &rows,
        )
    } else {
        ctx.report(&report)
    };
    Ok((vec![art], !report.all_pass))
}

const SWEEP_KEYS: &[&str] = &["beta", "beta-prime", "N", "D", "lambda", "L-max", "window", "epsilon", "box"];

fn parse_axis(spec: &str) -> Result<(String, Vec<String>), Failure> {
    let (key, values) = spec
        .split_once('=')
        .ok_or_else(|| Failure::param(format!("grid axis `{spec}` is not KEY=v1,v2,...")))?;
    let key = key.trim().to_string();
    if !SWEEP_KEYS.contains(&key.as_str()) {
        return Err(Failure::param(format!(
            "unknown grid key `{key}`; expected one of {}",
            SWEEP_KEYS.join(", ")
        )));
    }
    let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
    if values.is_empty() {
        return Err(Failure::param(format!("grid axis `{key}` has no values")));
    }
    Ok((key, values))
}

fn apply(cfg: &RunConfig, key: &str, value: &str) -> Result<RunConfig, Failure> {
    fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, Failure> {
        value
            .parse()
            .map_err(|_| Failure::param(format!("bad value `{value}` for {key}")))
    }
    let mut c = cfg.clone();
    match key {
        "beta" => c.beta = Some(num(key, value)?),
        "beta-prime" => c.beta_prime = Some(num(key, value)?),
        "N" => c.n = Some(num(key, value)?),
        "D" => c.d_neigh = Some(num(key, value)?),
        "lambda" => c.lambda = Some(num(key, value)?),
        "L-max" => c.l_max = Some(num(key, value)?),
        "window" => c.window = Some(num(key, value)?),
        "box" => c.sim_box = Some(num(key, value)?),
        "epsilon" => c.epsilon = Some(num(key, value)?),
        _ => unreachable!("keys are checked when parsed"),
    }
    Ok(c)
}

#[derive(Serialize)]
struct SweepRow {
    point: Vec<(String, String)>,
    status: u8,
    message: String,
    bounds: Option<BoundReport>,
    empirical_tv: Option<f64>,
    verdict: Option<String>,
}

fn sweep(ctx: &Ctx) -> Outcome {
    let axes = ctx
        .cfg
        .grid
        .as_ref()
        .filter(|g| !g.is_empty())
        .ok_or_else(|| Failure::param("sweep needs at least one --grid KEY=v1,v2,...".into()))?
        .iter()
        .map(|s| parse_axis(s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut points: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (k, vs) in &axes {
        points = points
            .into_iter()
            .flat_map(|p| {
                vs.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push((k.clone(), v.clone()));
                    q
                })
            })
            .collect();
    }
    let simulate = ctx.cfg.simulate.unwrap_or(false);
    let mut rows = Vec::new();
    for point in points {
        let mut cfg = ctx.cfg.clone();
        let mut row = SweepRow {
            point: point.clone(),
            status: 0,
            message: String::new(),
            bounds: None,
            empirical_tv: None,
            verdict: None,
        };
        let res: Result<(), Failure> = (|| {
            for (k, v) in &point {
                cfg = apply(&cfg, k, v)?;
            }
            let sub = Ctx {
                cfg: &cfg,
                echo: ctx.echo,
                replicas: ctx.replicas,
                name: ctx.name,
            };
            if simulate {
                let r = tv_pipeline(&sub)?;
                row.empirical_tv = Some(r.experiment.tv.tv);
                row.verdict = Some(r.verdict.clone());
                if r.verdict == Verdict::Fail.label() {
                    row.status = 1;
                }
                row.bounds = Some(r.bounds);
            } else {
                row.bounds = Some(bound_report(&sub)?);
            }
            Ok(())
        })();
        if let Err(f) = res {
            eprintln!("grid point {point:?}: {}", f.message);
            row.status = f.code;
            row.message = f.message;
        }
        rows.push(row);
    }
    let any_fail = rows.iter().any(|r| r.status == 1);
    if ctx.csv_mode() {
        let mut header: Vec<&str> = axes.iter().map(|(k, _)| k.as_str()).collect();
        header.extend(["status", "message"]);
        header.extend(BoundReport::CSV_HEADER);
        header.extend(["empirical_tv", "verdict"]);
        let table: Vec<Vec<String>> = rows
            .iter()
            .map(|r| {
                let mut out: Vec<String> = r.point.iter().map(|(_, v)| v.clone()).collect();
                out.push(r.status.to_string());
                out.push(r.message.clone());
                match &r.bounds {
                    Some(b) => out.extend(b.csv_row()),
                    None => out.extend(std::iter::repeat_n(String::new(), BoundReport::CSV_HEADER.len())),
                }
                out.push(r.empirical_tv.map(|t| t.to_string()).unwrap_or_default());
                out.push(r.verdict.clone().unwrap_or_default());
                out
            })
            .collect();
        return Ok((vec![ctx.table("", &header, &table)], any_fail));
    }
    Ok((vec![ctx.report(&rows)], any_fail))
}
