use clap::Args;
use lrp_core::multiscale::LogBase;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Everything a run needs. Loaded from an optional JSON file, then
/// overridden by `LRP_*` environment variables, then by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub beta: Vec<f64>,
    pub n_min: u32,
    pub n_max: u32,
    pub alpha: f64,
    pub big_m: f64,
    pub big_l: f64,
    pub log_base: LogBase,
    pub replicas: usize,
    pub seed: u64,
    pub truncation_eps: f64,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub options: CommandOptions,
}

/// Settings read by only some subcommands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CommandOptions {
    /// Scale for `sample`, `resist` and `dominance`.
    pub n: u32,
    /// Statistic for `resist`: point, box, hat or tilde.
    pub stat: String,
    pub r_min: usize,
    pub r_max: usize,
    pub first_scale: u32,
    pub scale_gap: u32,
    /// Quantile table written by `quantiles`, read by `recursion`.
    pub quantiles: Option<PathBuf>,
    /// CSV read by `fit` and `plot`.
    pub input: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            beta: vec![0.5, 1.0, 2.0, 4.0],
            n_min: 6,
            n_max: 13,
            alpha: 0.5,
            big_m: 2.05,
            big_l: 2.05,
            log_base: LogBase::Natural,
            replicas: 500,
            seed: 1,
            truncation_eps: 1e-12,
            out: PathBuf::from("lrp-out"),
            threads: None,
            options: CommandOptions::default(),
        }
    }
}

impl Default for CommandOptions {
    fn default() -> Self {
        CommandOptions {
            n: 10,
            stat: "point".into(),
            r_min: 2,
            r_max: 8,
            first_scale: 5,
            scale_gap: 1,
            quantiles: None,
            input: None,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON configuration file; environment and flags override it.
    #[arg(long, global = true, env = "LRP_CONFIG")]
    pub config: Option<PathBuf>,
    /// Comma-separated β values.
    #[arg(long, global = true, env = "LRP_BETA", value_delimiter = ',')]
    pub beta: Option<Vec<f64>>,
    #[arg(long, global = true, env = "LRP_N_MIN")]
    pub n_min: Option<u32>,
    #[arg(long, global = true, env = "LRP_N_MAX")]
    pub n_max: Option<u32>,
    #[arg(long, global = true, env = "LRP_ALPHA")]
    pub alpha: Option<f64>,
    #[arg(long, global = true, env = "LRP_BIG_M")]
    pub big_m: Option<f64>,
    #[arg(long, global = true, env = "LRP_BIG_L")]
    pub big_l: Option<f64>,
    /// natural or two.
    #[arg(long, global = true, env = "LRP_LOG_BASE")]
    pub log_base: Option<String>,
    #[arg(long, global = true, env = "LRP_REPLICAS")]
    pub replicas: Option<usize>,
    #[arg(long, global = true, env = "LRP_SEED")]
    pub seed: Option<u64>,
    #[arg(long, global = true, env = "LRP_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true, env = "LRP_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "LRP_EPS")]
    pub eps: Option<f64>,
    #[arg(long, global = true, env = "LRP_N")]
    pub n: Option<u32>,
    #[arg(long, global = true, env = "LRP_STAT")]
    pub stat: Option<String>,
    #[arg(long, global = true, env = "LRP_R_MIN")]
    pub r_min: Option<usize>,
    #[arg(long, global = true, env = "LRP_R_MAX")]
    pub r_max: Option<usize>,
    #[arg(long, global = true, env = "LRP_FIRST_SCALE")]
    pub first_scale: Option<u32>,
    #[arg(long, global = true, env = "LRP_SCALE_GAP")]
    pub scale_gap: Option<u32>,
    #[arg(long, global = true, env = "LRP_QUANTILES")]
    pub quantiles: Option<PathBuf>,
    #[arg(long, global = true, env = "LRP_INPUT")]
    pub input: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))
    }

    pub fn resolve(o: &Overrides) -> Result<Self, String> {
        let mut c = match &o.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        macro_rules! set {
            ($($field:ident).+ = $v:expr) => {
                if let Some(v) = $v.clone() {
                    c.$($field).+ = v;
                }
            };
        }
        set!(beta = o.beta);
        set!(n_min = o.n_min);
        set!(n_max = o.n_max);
        set!(alpha = o.alpha);
        set!(big_m = o.big_m);
        set!(big_l = o.big_l);
        set!(replicas = o.replicas);
        set!(seed = o.seed);
        set!(out = o.out);
        set!(truncation_eps = o.eps);
        set!(options.n = o.n);
        set!(options.stat = o.stat);
        set!(options.r_min = o.r_min);
        set!(options.r_max = o.r_max);
        set!(options.first_scale = o.first_scale);
        set!(options.scale_gap = o.scale_gap);
        if let Some(b) = &o.log_base {
            c.log_base = b.parse().map_err(|e: lrp_core::LrpError| e.to_string())?;
        }
        if o.threads.is_some() {
            c.threads = o.threads;
        }
        if o.quantiles.is_some() {
            c.options.quantiles = o.quantiles.clone();
        }
        if o.input.is_some() {
            c.options.input = o.input.clone();
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.beta.is_empty() || self.beta.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(format!("beta values must be positive and finite, got {:?}", self.beta));
        }
        if self.n_min == 0 || self.n_min > self.n_max || self.n_max > 24 {
            return Err(format!("need 1 <= n_min <= n_max <= 24, got [{}, {}]", self.n_min, self.n_max));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.big_m > 2.0 && self.big_l > 2.0 && self.big_m.is_finite() && self.big_l.is_finite()) {
            return Err(format!("M and L must exceed 2, got {} and {}", self.big_m, self.big_l));
        }
        if self.replicas == 0 {
            return Err("replicas must be positive".into());
        }
        if !(self.truncation_eps > 0.0 && self.truncation_eps <= 1e-6) {
            return Err(format!("truncation_eps must lie in (0, 1e-6], got {}", self.truncation_eps));
        }
        if self.threads == Some(0) {
            return Err("threads must be positive".into());
        }
        let o = &self.options;
        if o.n == 0 || o.n > 24 {
            return Err(format!("n must lie in [1, 24], got {}", o.n));
        }
        if !["point", "box", "hat", "tilde"].contains(&o.stat.as_str()) {
            return Err(format!("unknown statistic {:?}", o.stat));
        }
        if o.r_min == 0 || o.r_min > o.r_max || o.first_scale == 0 || o.scale_gap == 0 {
            return Err("need 1 <= r_min <= r_max and positive first_scale and scale_gap".into());
        }
        if o.first_scale as u64 + o.scale_gap as u64 * o.r_max as u64 > 55 {
            return Err("firework scales must stay at or below 55".into());
        }
        Ok(())
    }

    pub fn n_range(&self) -> std::ops::RangeInclusive<u32> {
        self.n_min..=self.n_max
    }
}
