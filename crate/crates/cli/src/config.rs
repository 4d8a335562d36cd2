//! Flat JSON configuration mirrored 1:1 by command-line flags.

use std::path::{Path, PathBuf};

use clansim::estimators::Reference;
use clansim::{AnchorMode, ModelParams, Norm};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

// Every key is optional; flags override the file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Flat JSON file with any of these keys.
    #[arg(long, value_name = "PATH", global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long = "beta-prime", global = true)]
    #[serde(rename = "beta-prime")]
    pub beta_prime: Option<f64>,
    /// Minimum contour length counted in the window.
    #[arg(long = "N", global = true)]
    #[serde(rename = "N")]
    pub n: Option<u32>,
    /// Dependence radius; defaults to delta * N.
    #[arg(long = "D", global = true)]
    #[serde(rename = "D")]
    pub d_neigh: Option<f64>,
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    #[arg(long = "L-max", global = true)]
    #[serde(rename = "L-max")]
    pub l_max: Option<usize>,
    /// Side of the square simulation box (whole lattice when absent).
    #[arg(long = "box", value_name = "SIDE", global = true)]
    #[serde(rename = "box")]
    pub sim_box: Option<u32>,
    /// Side of the square window (sized from lambda when absent).
    #[arg(long, value_name = "SIDE", global = true)]
    pub window: Option<u32>,
    #[arg(long, global = true)]
    pub replicas: Option<u64>,
    #[arg(long, global = true)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum, global = true)]
    pub anchor: Option<AnchorArg>,
    #[arg(long, value_enum, global = true)]
    pub norm: Option<NormArg>,
    /// Largest acceptable width of the beta* bracket.
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Poisson reference mean for the TV check.
    #[arg(long, value_enum, global = true)]
    pub reference: Option<ReferenceArg>,
    /// Sweep axis, `KEY=v1,v2,...`; repeat for a product grid.
    #[arg(long, global = true)]
    pub grid: Option<Vec<String>>,
    /// Run the TV experiment at each sweep point.
    #[arg(long, global = true)]
    pub simulate: Option<bool>,

    #[arg(long, value_name = "DIR", global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,
    /// Overwrite existing reports.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", global = true)]
    pub force: Option<bool>,
}

macro_rules! value_enum_mirror {
    ($arg:ident, $target:ty, { $($v:ident => $t:expr),* $(,)? }) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
        #[serde(rename_all = "kebab-case")]
        pub enum $arg { $($v),* }

        impl From<$arg> for $target {
            fn from(a: $arg) -> $target {
                match a { $($arg::$v => $t),* }
            }
        }
    };
}

value_enum_mirror!(AnchorArg, AnchorMode, {
    Vertex => AnchorMode::Vertex,
    Link => AnchorMode::Link,
    SurroundsOrigin => AnchorMode::SurroundsOrigin,
});
value_enum_mirror!(NormArg, Norm, { Euclidean => Norm::Euclidean, Sup => Norm::Sup });
value_enum_mirror!(ReferenceArg, Reference, {
    Empirical => Reference::Empirical,
    AnalyticMidpoint => Reference::AnalyticMidpoint,
});

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
    }

    /// `self` with every key set in `over` replaced.
    pub fn overridden_by(self, over: RunConfig) -> RunConfig {
        macro_rules! pick {
            ($($f:ident),*) => { RunConfig { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            config, seed, beta, beta_prime, n, d_neigh, lambda, l_max, sim_box, window, replicas,
            epsilon, anchor, norm, tolerance, reference, grid, simulate, out, format, force
        )
    }

    pub fn model(&self) -> ModelParams {
        let d = ModelParams::default();
        ModelParams {
            d: 2,
            beta: self.beta.unwrap_or(d.beta),
            beta_prime: self.beta_prime.unwrap_or(d.beta_prime),
            n: self.n.unwrap_or(d.n),
            d_neigh: self.d_neigh,
            epsilon: self.epsilon,
            lambda: self.lambda.unwrap_or(d.lambda),
            window: self.window,
            l_max: self.l_max.unwrap_or(d.l_max),
            sim_box: self.sim_box,
            anchor: self.anchor.map_or(d.anchor, Into::into),
            norm: self.norm.map_or(d.norm, Into::into),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn replicas(&self, default: u64) -> u64 {
        self.replicas.unwrap_or(default)
    }

    pub fn reference(&self) -> Reference {
        self.reference.map_or(Reference::default(), Into::into)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }

    /// The configuration with defaults filled in, as echoed in reports.
    /// Output location and overwrite policy are left out: they do not
    /// affect results.
    pub fn echo(&self, replicas_default: u64) -> RunConfig {
        let m = self.model();
        RunConfig {
            config: None,
            seed: Some(self.seed()),
            beta: Some(m.beta),
            beta_prime: Some(m.beta_prime),
            n: Some(m.n),
            d_neigh: m.d_neigh,
            lambda: Some(m.lambda),
            l_max: Some(m.l_max),
            sim_box: m.sim_box,
            window: m.window,
            replicas: Some(self.replicas(replicas_default)),
            epsilon: m.epsilon,
            anchor: Some(self.anchor.unwrap_or(AnchorArg::Vertex)),
            norm: Some(self.norm.unwrap_or(NormArg::Euclidean)),
            tolerance: self.tolerance,
            reference: Some(self.reference.unwrap_or(ReferenceArg::Empirical)),
            grid: self.grid.clone(),
            simulate: self.simulate,
            out: None,
            format: Some(self.format()),
            force: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let file: RunConfig =
            serde_json::from_str(r#"{"beta": 2.5, "N": 6, "L-max": 12, "seed": 4}"#).unwrap();
        let flags = RunConfig {
            beta: Some(3.0),
            ..RunConfig::default()
        };
        let c = file.overridden_by(flags);
        assert_eq!(c.beta, Some(3.0));
        assert_eq!(c.n, Some(6));
        assert_eq!(c.model().l_max, 12);
        assert_eq!(c.seed(), 4);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"betta": 2}"#).is_err());
    }

    #[test]
    fn echo_round_trips() {
        let c = RunConfig {
            anchor: Some(AnchorArg::SurroundsOrigin),
            ..RunConfig::default()
        };
        let e = c.echo(10);
        let text = serde_json::to_string(&e).unwrap();
        assert!(text.contains("\"anchor\":\"surrounds-origin\""));
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), e);
    }
}
