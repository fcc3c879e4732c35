use crate::artifacts::Run;
use crate::config::ExperimentConfig;
use crate::plot;
use clap::Subcommand;
use lrp_core::experiments::{self as exp, fmt, QuantileTable, ScanResult};
use lrp_core::firework::{decay_campaign, m_r_histogram, scale_set, DecayReport, MAX_EXACT_R};
use lrp_core::model::{sample_window, LrpParams, LrpWindow};
use lrp_core::multiscale::good_pair_frequency;
use lrp_core::network::{hat_resistance, Statistic};
use lrp_core::LrpError;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Sample environments on [-2^n, 2^n] and write them as JSON lines.
    Sample,
    /// Sample environments and measure one resistance statistic.
    Resist,
    /// R(0, [-N,N]^c) over the scale range with fitted exponents.
    ScanPoint,
    /// R([-N,N], [-2N,2N]^c) conditioned on no edge from [-N,N] past ±2N.
    ScanBox,
    /// Empirical quantile tables of the restricted resistance.
    Quantiles,
    /// Good-pair frequencies against the exact product formula.
    Goodpairs,
    /// Spreading process: histogram of M_r and decay of P[M_r <= 1].
    Firework,
    /// Ratio of each quantile to the multi-scale recursion sum.
    Recursion,
    /// Stochastic ordering of the restricted resistances.
    Dominance,
    /// Cut-bond counts and the cut bound on the point resistance.
    Baseline,
    /// Refit growth exponents from a replica CSV.
    Fit,
    /// SVG chart of ln median against n from a summary CSV.
    Plot,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Resist => "resist",
            Command::ScanPoint => "scan-point",
            Command::ScanBox => "scan-box",
            Command::Quantiles => "quantiles",
            Command::Goodpairs => "goodpairs",
            Command::Firework => "firework",
            Command::Recursion => "recursion",
            Command::Dominance => "dominance",
            Command::Baseline => "baseline",
            Command::Fit => "fit",
            Command::Plot => "plot",
        }
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments; exit status 2.
    Usage(String),
    /// Failure while running; exit status 1.
    Runtime { kind: &'static str, message: String },
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime { .. } => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            CliError::Usage(m) => json!({"error": "usage", "message": m}),
            CliError::Runtime { kind, message } => json!({"error": kind, "message": message}),
        }
    }
}

impl From<LrpError> for CliError {
    fn from(e: LrpError) -> Self {
        let kind = match &e {
            LrpError::InvalidArgument(_) => return CliError::Usage(e.to_string()),
            LrpError::DivergentIntegral(_) => "divergent_integral",
            LrpError::SolverFailure { .. } => "solver_failure",
            LrpError::InvalidFlow(_) => "invalid_flow",
            LrpError::Dependency(_) => "dependency",
            LrpError::InsufficientData(_) => "insufficient_data",
        };
        CliError::Runtime { kind, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime { kind: "io", message: e.to_string() }
    }
}

type Out = Result<Value, CliError>;

/// Runs `cmd` and returns the manifest path.
pub fn run(cmd: Command, config: &ExperimentConfig) -> Result<PathBuf, CliError> {
    config.validate().map_err(CliError::Usage)?;
    let mut run = Run::new(cmd.name(), config)?;
    let summary = match cmd {
        Command::Sample => sample(&mut run),
        Command::Resist => resist(&mut run),
        Command::ScanPoint => scan(&mut run, false),
        Command::ScanBox => scan(&mut run, true),
        Command::Quantiles => quantiles(&mut run),
        Command::Goodpairs => goodpairs(&mut run),
        Command::Firework => firework(&mut run),
        Command::Recursion => recursion(&mut run),
        Command::Dominance => dominance(&mut run),
        Command::Baseline => baseline(&mut run),
        Command::Fit => fit(&mut run),
        Command::Plot => plot_cmd(&mut run),
    }?;
    Ok(run.finish(summary)?)
}

fn params(c: &ExperimentConfig, beta: f64) -> Result<LrpParams, CliError> {
    Ok(LrpParams::with_eps(beta, c.seed, c.truncation_eps)?)
}

fn sample(run: &mut Run) -> Out {
    let c = run.config.clone();
    let size = 1i64 << c.options.n;
    let mut lines = String::new();
    for &beta in &c.beta {
        let p = params(&c, beta)?;
        let windows: Result<Vec<LrpWindow>, LrpError> =
            (0..c.replicas as u64).into_par_iter().map(|rep| sample_window(&p, -size, size, &[], rep)).collect();
        for w in windows? {
            lines.push_str(&w.to_json().to_string());
            lines.push('\n');
        }
    }
    let path = run.write_text("windows.jsonl", &lines)?;
    Ok(json!({"windows": c.replicas * c.beta.len(), "file": path}))
}

fn statistic(stat: &str, size: i64) -> (Statistic, i64, i64, Vec<lrp_core::model::PairRect>) {
    match stat {
        "box" => (Statistic::Box { size }, -2 * size, 2 * size, exp::box_exclusion(size)),
        "hat" => (Statistic::HatN { size }, 1, size, vec![]),
        "tilde" => (Statistic::Tilde { size }, -size, size, vec![]),
        _ => (Statistic::Point { size }, -size, size, vec![]),
    }
}

fn resist(run: &mut Run) -> Out {
    let c = run.config.clone();
    let n = c.options.n;
    let (stat, lo, hi, excluded) = statistic(&c.options.stat, 1i64 << n);
    let mut csv = String::from(ScanResult::REPLICA_HEADER);
    csv.push('\n');
    let mut medians = Vec::new();
    for &beta in &c.beta {
        let p = params(&c, beta)?;
        let values: Result<Vec<f64>, LrpError> = (0..c.replicas as u64)
            .into_par_iter()
            .map(|rep| Ok(hat_resistance(&sample_window(&p, lo, hi, &excluded, rep)?, &stat)?.value.as_f64()))
            .collect();
        let values = values?;
        for (i, x) in values.iter().enumerate() {
            csv.push_str(&format!("{beta},{n},{},{},{},{i}\n", c.options.stat, fmt(*x), c.seed));
        }
        medians.push(json!({"beta": beta, "median": fmt(exp::empirical_quantile(&values, 0.5)?)}));
    }
    run.write_text("replicas.csv", &csv)?;
    Ok(json!({"statistic": c.options.stat, "n": n, "medians": medians}))
}

fn scan(run: &mut Run, boxed: bool) -> Out {
    let c = run.config.clone();
    let mut replicas = String::from(ScanResult::REPLICA_HEADER);
    replicas.push('\n');
    let mut summary = String::from(ScanResult::SUMMARY_HEADER);
    summary.push('\n');
    let mut fits = Vec::new();
    for &beta in &c.beta {
        let r = if boxed {
            exp::box_scan(beta, c.n_range(), c.replicas, c.seed, c.truncation_eps)?
        } else {
            exp::point_scan(beta, c.n_range(), c.replicas, c.seed, c.truncation_eps)?
        };
        replicas.extend(r.replica_csv().lines().skip(1).map(|l| format!("{l}\n")));
        summary.extend(r.summary_csv().lines().skip(1).map(|l| format!("{l}\n")));
        fits.push(json!({
            "beta": beta,
            "kind": r.kind.as_str(),
            "fit": r.fit,
            "fit_error": r.fit_error,
            "medians_nondecreasing": r.medians_nondecreasing(),
        }));
    }
    run.write_text("replicas.csv", &replicas)?;
    run.write_text("summary.csv", &summary)?;
    let title = if boxed { "R([-N,N], [-2N,2N]^c)" } else { "R(0, [-N,N]^c)" };
    run.write_text("plot.svg", &plot::render_svg(&plot::read_summary(&summary).map_err(CliError::Usage)?, title))?;
    let fits = Value::Array(fits);
    run.write_json("fits.json", &fits)?;
    Ok(fits)
}

fn quantile_tables(
    c: &ExperimentConfig,
    n_range: std::ops::RangeInclusive<u32>,
) -> Result<Vec<QuantileTable>, CliError> {
    c.beta
        .iter()
        .map(|&beta| {
            Ok(exp::estimate_quantiles(beta, c.alpha, n_range.clone(), c.replicas, c.seed, c.truncation_eps)?
                .with_provenance(c.big_m, c.big_l))
        })
        .collect()
}

fn quantiles(run: &mut Run) -> Out {
    let c = run.config.clone();
    let tables = quantile_tables(&c, c.n_range())?;
    let mut csv = String::from("beta,alpha,n,estimate,lower,upper,replicas\n");
    for t in &tables {
        for (n, e) in &t.entries {
            csv.push_str(&format!(
                "{},{},{n},{},{},{},{}\n",
                t.beta,
                t.alpha,
                fmt(e.estimate.as_f64()),
                fmt(e.lower.as_f64()),
                fmt(e.upper.as_f64()),
                e.replicas
            ));
        }
    }
    run.write_text("quantiles.csv", &csv)?;
    let path = run.write_json("quantiles.json", &tables)?;
    Ok(json!({"tables": tables.len(), "file": path}))
}

fn goodpairs(run: &mut Run) -> Out {
    let c = run.config.clone();
    let mut csv = String::from("beta,i,replicas,hits,frequency,exact,sigma,z\n");
    let mut worst: f64 = 0.0;
    for &beta in &c.beta {
        for i in c.n_range() {
            let r = good_pair_frequency(beta, i, c.replicas, c.seed, c.truncation_eps)?;
            worst = worst.max(r.z_score().abs());
            csv.push_str(&format!(
                "{beta},{i},{},{},{},{},{},{}\n",
                r.replicas,
                r.hits,
                r.frequency,
                r.exact,
                r.sigma,
                r.z_score()
            ));
        }
    }
    run.write_text("goodpairs.csv", &csv)?;
    Ok(json!({"max_abs_z": worst}))
}

fn firework(run: &mut Run) -> Out {
    let c = run.config.clone();
    let o = &c.options;
    let mut csv = String::from(DecayReport::CSV_HEADER);
    csv.push('\n');
    let mut out = Vec::new();
    for &beta in &c.beta {
        let d = decay_campaign(beta, o.r_min..=o.r_max, o.first_scale, o.scale_gap, c.replicas, c.seed)?;
        csv.extend(d.csv().lines().skip(1).map(|l| format!("{l}\n")));
        let r = o.r_max.min(3).min(MAX_EXACT_R);
        let h = m_r_histogram(beta, &scale_set(r, o.first_scale, o.scale_gap), c.replicas, c.seed)?;
        out.push(json!({
            "beta": beta,
            "kappa": d.kappa().map(|k| k.0),
            "kappa_ci": d.kappa().map(|k| k.1),
            "containment_violations": d.rows.iter().map(|r| r.containment_violations).sum::<usize>(),
            "histogram": h,
        }));
    }
    run.write_text("decay.csv", &csv)?;
    let out = Value::Array(out);
    run.write_json("firework.json", &out)?;
    Ok(out)
}

fn load_tables(path: &PathBuf) -> Result<Vec<QuantileTable>, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str::<Vec<QuantileTable>>(&text)
        .or_else(|_| serde_json::from_str::<QuantileTable>(&text).map(|t| vec![t]))
        .map_err(|e| CliError::Usage(format!("bad quantile file {}: {e}", path.display())))
}

fn recursion(run: &mut Run) -> Out {
    let c = run.config.clone();
    let tables = match &c.options.quantiles {
        Some(p) => load_tables(p)?,
        None => quantile_tables(&c, 1..=c.n_max)?,
    };
    let n: Vec<u32> = c.n_range().collect();
    let mut csv = String::from("beta,M,L,n,K_n,S_n,a_n,ratio\n");
    let mut out = Vec::new();
    for &beta in &c.beta {
        let t = tables.iter().find(|t| t.beta == beta).ok_or_else(|| CliError::Runtime {
            kind: "dependency",
            message: format!("no quantile table for beta = {beta}"),
        })?;
        let r = exp::recursion_check(t, c.big_m, c.big_l, c.log_base, &n)?;
        for row in &r.rows {
            csv.push_str(&format!(
                "{beta},{},{},{},{},{},{},{}\n",
                c.big_m,
                c.big_l,
                row.n,
                row.k_n,
                fmt(row.s_n),
                fmt(row.a_n),
                row.ratio.map_or("vacuous".into(), fmt)
            ));
        }
        out.push(json!({"beta": beta, "report": r, "passes": r.passes()}));
    }
    run.write_text("recursion.csv", &csv)?;
    let out = Value::Array(out);
    run.write_json("recursion.json", &out)?;
    Ok(out)
}

fn dominance(run: &mut Run) -> Out {
    let c = run.config.clone();
    let reports = c
        .beta
        .iter()
        .map(|&beta| {
            let r = exp::dominance_check(beta, c.options.n, c.replicas, c.seed, c.truncation_eps)?;
            Ok(json!({"report": r, "passes": r.passes()}))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let out = Value::Array(reports);
    run.write_json("dominance.json", &out)?;
    Ok(out)
}

fn baseline(run: &mut Run) -> Out {
    let c = run.config.clone();
    let mut csv = String::from(exp::CutEdgeReport::CSV_HEADER);
    csv.push('\n');
    let mut out = Vec::new();
    for &beta in &c.beta {
        let r = exp::cutedge_baseline(beta, c.n_range(), c.replicas, c.seed, c.truncation_eps)?;
        csv.extend(r.csv().lines().skip(1).map(|l| format!("{l}\n")));
        out.push(json!({"beta": beta, "slope": r.slope}));
    }
    run.write_text("cutedge.csv", &csv)?;
    Ok(Value::Array(out))
}

fn input(run: &Run) -> Result<String, CliError> {
    let p = run.config.options.input.as_ref().ok_or_else(|| CliError::Usage("--input is required".into()))?;
    std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))
}

/// Groups a replica CSV by `(beta, kind)`.
pub fn read_replicas(text: &str) -> Result<BTreeMap<(String, String), BTreeMap<u32, Vec<f64>>>, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or("empty replica file")?;
    if header != ScanResult::REPLICA_HEADER {
        return Err(format!("expected header {:?}", ScanResult::REPLICA_HEADER));
    }
    let mut groups: BTreeMap<(String, String), BTreeMap<u32, Vec<f64>>> = BTreeMap::new();
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(format!("line {}: expected 6 fields", i + 2));
        }
        let n: u32 = f[1].parse().map_err(|_| format!("line {}: bad scale", i + 2))?;
        let x: f64 = f[3].parse().map_err(|_| format!("line {}: bad value", i + 2))?;
        groups.entry((f[0].into(), f[2].into())).or_default().entry(n).or_default().push(x);
    }
    Ok(groups)
}

fn fit(run: &mut Run) -> Out {
    let c = run.config.clone();
    let groups = read_replicas(&input(run)?).map_err(CliError::Usage)?;
    let mut out = Vec::new();
    for ((beta, kind), values) in &groups {
        let f = exp::fit_exponent_replicas(values, c.alpha, kind == "point", exp::FIT_RESAMPLES, c.seed)?;
        out.push(json!({"beta": beta.parse::<f64>().unwrap_or(f64::NAN), "kind": kind, "fit": f}));
    }
    let out = Value::Array(out);
    run.write_json("fits.json", &out)?;
    Ok(out)
}

fn plot_cmd(run: &mut Run) -> Out {
    let series = plot::read_summary(&input(run)?).map_err(CliError::Usage)?;
    let path = run.write_text("plot.svg", &plot::render_svg(&series, "median resistance"))?;
    Ok(json!({"series": series.len(), "file": path}))
}
