//! Acceptance run: one PASS/FAIL line per criterion.

mod oracle;

use lrp_core::experiments::*;
use lrp_core::firework::*;
use lrp_core::model::{edge_probability, sample_window, LrpParams};
use lrp_core::multiscale::{good_pair_frequency, LogBase};
use lrp_core::network::*;
use lrp_core::rng;
use rand::Rng as _;
use std::collections::HashMap;
use std::time::Instant;

const EPS: f64 = 1e-12;
const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn solve(nodes: usize, edges: &[(usize, usize, f64)]) -> (CondensedNetwork, f64) {
    let net = CondensedNetwork::from_edges(nodes, edges).unwrap();
    let r = effective_resistance(&net).unwrap().value.as_f64();
    (net, r)
}

fn edge_law() -> Outcome {
    let mut worst: f64 = 0.0;
    for beta in [0.25, 1.0, 4.0] {
        let params = LrpParams::new(beta, 0).unwrap();
        for d in [2i64, 3, 10, 100, 1_000_000] {
            let p = edge_probability(&params, d).unwrap();
            worst = worst.max((p - oracle::edge_probability(beta, d as f64)).abs());
        }
    }
    outcome(worst <= 1e-10, format!("max abs error {worst:.2e}"))
}

fn solver() -> Outcome {
    let exact = [
        (solve(3, &[(0, 2, 1.0), (2, 1, 0.5)]).1, 3.0),
        (solve(2, &[(0, 1, 2.0), (0, 1, 3.0)]).1, 0.2),
        (solve(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).1, 2.0 / 3.0),
        (solve(4, &[(0, 2, 1.0), (2, 3, 1.0), (3, 1, 1.0), (0, 3, 1.0), (2, 1, 1.0)]).1, 1.0),
    ];
    let exact_ok = exact.iter().all(|(a, b)| (a - b).abs() <= 1e-9);
    let mut g = rng::stream(SEED, 200, 0);
    let mut worst: f64 = 0.0;
    let mut mismatched_infinite = 0;
    for case in 0..10_000 {
        let nodes = g.random_range(2..=40);
        let extra = g.random_range(0..3 * nodes);
        let edges = oracle::random_network(&mut g, nodes, extra, case % 10 != 0);
        let (net, r) = solve(nodes, &edges);
        let b = brute_force_resistance(&net).unwrap().as_f64();
        if b.is_infinite() || r.is_infinite() {
            mismatched_infinite += (b.is_infinite() != r.is_infinite()) as usize;
        } else {
            worst = worst.max((r - b).abs() / b);
        }
    }
    outcome(
        exact_ok && worst <= 1e-8 && mismatched_infinite == 0,
        format!("10000 networks, max rel error {worst:.2e}; closed forms exact: {exact_ok}"),
    )
}

fn rayleigh() -> Outcome {
    let mut g = rng::stream(SEED, 201, 0);
    let mut violations = 0;
    for _ in 0..10_000 {
        let nodes = g.random_range(3..=30);
        let connected = g.random_bool(0.8);
        let edges = oracle::random_network(&mut g, nodes, 2 * nodes, connected);
        let base = solve(nodes, &edges).1;
        let changed = if g.random_bool(0.5) || edges.is_empty() {
            let u = g.random_range(0..nodes);
            let v = (u + g.random_range(1..nodes)) % nodes;
            let mut e = edges.clone();
            e.push((u, v, 10f64.powf(g.random_range(-1.0..1.0))));
            let r = solve(nodes, &e).1;
            r > base * (1.0 + 1e-9) && !(r.is_infinite() && base.is_infinite())
        } else {
            let mut e = edges.clone();
            e.remove(g.random_range(0..edges.len()));
            let r = solve(nodes, &e).1;
            r < base * (1.0 - 1e-9)
        };
        violations += changed as usize;
    }
    outcome(violations == 0, format!("{violations} violations in 10000 single-edge changes"))
}

fn flows() -> Outcome {
    let params = LrpParams::with_eps(1.0, SEED, EPS).unwrap();
    let mut worst: f64 = 0.0;
    let mut sign_errors = 0;
    let mut count = 0;
    for rep in 0..1000 {
        let w = sample_window(&params, 1, 64, &[], rep).unwrap();
        let net = statistic_network(&w, &Statistic::HatN { size: 64 }).unwrap();
        let Some(flow) = effective_resistance(&net).unwrap().flow else { continue };
        let entries: Vec<usize> = (2..net.node_count()).filter(|&v| net.conductance(0, v) > 0.0).collect();
        let comps = flow_decompose(&flow, &entries).unwrap();
        let total: f64 = comps.iter().map(|c| c.amount()).sum();
        worst = worst.max((total - 1.0).abs());
        // agreement with the parent on every edge gives pairwise agreement
        let parent: HashMap<(usize, usize), f64> = flow.edges.iter().map(|&(u, v, x)| ((u, v), x)).collect();
        let signed = |u: usize, v: usize| parent.get(&(u, v)).copied().or_else(|| parent.get(&(v, u)).map(|x| -x));
        for c in &comps {
            for &(u, v, x) in &c.flow.edges {
                if x != 0.0 && signed(u, v).is_none_or(|p| x * p < 0.0) {
                    sign_errors += 1;
                }
            }
        }
        count += 1;
    }
    outcome(
        count == 1000 && worst <= 1e-8 && sign_errors == 0,
        format!("{count} flows, max |sum - 1| {worst:.2e}, sign disagreements {sign_errors}"),
    )
}

fn good_pairs() -> Outcome {
    let mut worst: f64 = 0.0;
    for beta in [0.5, 1.0, 2.0] {
        for i in [2, 4, 6] {
            let row = good_pair_frequency(beta, i, 10_000, SEED, EPS).unwrap();
            worst = worst.max(row.z_score().abs());
        }
    }
    outcome(worst <= 3.0, format!("max |z| {worst:.2} over 9 cells of 10000 replicas"))
}

fn firework() -> Outcome {
    let h = m_r_histogram(1.0, &scale_set(3, 5, 1), 100_000, SEED).unwrap();
    let d = decay_campaign(1.0, 2..=8, 5, 1, 20_000, SEED).unwrap();
    let violations: usize = d.rows.iter().map(|r| r.containment_violations).sum();
    let literal: Vec<String> = d.rows.iter().map(|r| format!("{:.3}", r.p_literal)).collect();
    match d.kappa() {
        Some((k, (lo, hi))) => outcome(
            h.max_abs_z() <= 3.0 && k < 1.0 && hi < 1.0 && violations == 0,
            format!(
                "histogram max |z| {:.2}; P[M_r<=1] decay kappa {k:.4} CI ({lo:.4}, {hi:.4}); \
                 containment violations {violations}; P[M_r>=r] by r: {}",
                h.max_abs_z(),
                literal.join(" ")
            ),
        ),
        None => outcome(false, "decay fit failed".into()),
    }
}

fn tail_bound() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut ok = true;
    for beta in [0.5, 1.0, 2.0] {
        let rows = reach_tail_check(beta, &scale_set(8, 5, 1), 6, 20_000, SEED).unwrap();
        ok &= rows.iter().all(|r| r.within(3.0));
        for r in &rows {
            if r.sigma > 0.0 {
                worst = worst.max((r.empirical - r.bound) / r.sigma);
            }
        }
    }
    outcome(ok, format!("largest excess over the bound {worst:.2} sigma"))
}

fn scan_line(r: &ScanResult) -> (bool, String) {
    let mono = r.medians_nondecreasing();
    match r.fit {
        Some(f) => (
            mono && f.delta > 0.0 && f.ci.0 > 0.0,
            format!("beta {}: delta {:.4} CI ({:.4}, {:.4}) monotone {mono}", r.beta, f.delta, f.ci.0, f.ci.1),
        ),
        None => (false, format!("beta {}: no fit ({})", r.beta, r.fit_error.clone().unwrap_or_default())),
    }
}

fn point_trend() -> (Outcome, String) {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut csv = String::new();
    for beta in [0.5, 1.0, 2.0, 4.0] {
        let r = point_scan(beta, 6..=13, 500, SEED, EPS).unwrap();
        let (ok, line) = scan_line(&r);
        pass &= ok;
        parts.push(line);
        csv.push_str(&r.replica_csv());
        csv.push_str(&r.summary_csv());
    }
    (outcome(pass, parts.join("; ")), csv)
}

fn box_trend() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for beta in [1.0, 2.0] {
        let r = box_scan(beta, 6..=12, 500, SEED, EPS).unwrap();
        let (ok, line) = scan_line(&r);
        pass &= ok;
        parts.push(line);
    }
    outcome(pass, parts.join("; "))
}

fn dominance() -> Outcome {
    let r = dominance_check(1.0, 10, 1000, SEED, EPS).unwrap();
    outcome(
        r.tilde_vs_hat.p_value >= 0.01 && r.coupling_violations == 0 && r.pathwise_violations == 0,
        format!(
            "KS p-values tilde/hat {:.3}, tilde/mid {:.3}, mid/hat {:.3}; coupling violations {}; \
             pathwise violations {}; tilde infinite in {}",
            r.tilde_vs_hat.p_value,
            r.tilde_vs_mid.p_value,
            r.mid_vs_hat.p_value,
            r.coupling_violations,
            r.pathwise_violations,
            r.tilde_infinite
        ),
    )
}

fn recursion() -> Outcome {
    let table = estimate_quantiles(1.0, 0.5, 1..=13, 500, SEED, EPS).unwrap();
    let n: Vec<u32> = (8..=13).collect();
    let r = recursion_check(&table, 2.05, 2.05, LogBase::Natural, &n).unwrap();
    let ratios: Vec<String> = r.rows.iter().map(|x| x.ratio.map_or("vacuous".into(), |v| format!("{v:.2}"))).collect();
    let slope =
        r.slope.map_or("none".into(), |f| format!("{:.3} CI ({:.3}, {:.3})", f.slope, f.slope_ci.0, f.slope_ci.1));
    outcome(r.passes(), format!("M = L = 2.05, ratios {}; slope {slope}", ratios.join(" ")))
}

fn cut_edges() -> Outcome {
    let r = cutedge_baseline(0.5, 6..=13, 300, SEED, EPS).unwrap();
    let violations: usize = r.rows.iter().map(|x| x.bound_violations).sum();
    let below: usize = r.rows.iter().map(|x| x.below_count).sum();
    let total: usize = r.rows.iter().map(|x| x.replicas).sum();
    match r.slope {
        Some(f) => outcome(
            (f.slope - 0.5).abs() <= 0.1 && violations == 0,
            format!(
                "slope {:.3} CI ({:.3}, {:.3}); series-parallel cut bound violated in {violations}/{total}; \
                 plain count exceeds R in {below}/{total}",
                f.slope, f.slope_ci.0, f.slope_ci.1
            ),
        ),
        None => outcome(false, "no slope".into()),
    }
}

fn main() {
    let mut failed = 0;
    let mut report = |id: u32, name: &str, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        println!("{} {id:>2} {name}: {} [{secs:.1}s]", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += (!o.pass) as usize;
    };
    report(1, "edge law vs quadrature", &mut edge_law);
    report(2, "solver vs dense oracle", &mut solver);
    report(3, "Rayleigh monotonicity", &mut rayleigh);
    report(4, "flow decomposition", &mut flows);
    report(5, "good-pair frequency", &mut good_pairs);
    report(6, "firework histogram and decay", &mut firework);
    report(7, "reach tail bound", &mut tail_bound);
    let mut first_csv = String::new();
    report(8, "point trend", &mut || {
        let (o, csv) = point_trend();
        first_csv = csv;
        o
    });
    report(9, "box trend", &mut box_trend);
    report(10, "dominance", &mut dominance);
    report(11, "quantile recursion", &mut recursion);
    report(12, "cut-edge baseline", &mut cut_edges);
    report(13, "determinism", &mut || {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let (_, second) = pool.install(point_trend);
        outcome(
            !first_csv.is_empty() && first_csv == second,
            format!("{} bytes, identical: {}", second.len(), first_csv == second),
        )
    });
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
