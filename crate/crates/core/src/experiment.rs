//! Repeated seeded games with win-rate statistics.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::pcp::PcpInstance;
use crate::protocol::{run_game, FailureSite, GameConfig, Verdict};
use crate::strategies::PlayerStrategy;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub seed: u64,
    pub verdict: Verdict,
    pub failure_site: Option<FailureSite>,
    /// Only present when timing was requested.
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub confidence: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Probability of never losing over `r` consecutive rounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NeverLose {
    pub rounds: usize,
    /// `win_rate^r`.
    pub model: f64,
    /// Fraction of length-`r` windows of consecutive runs that are all wins.
    pub empirical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub strategy: String,
    pub instance: PcpInstance,
    pub config: GameConfig,
    pub base_seed: u64,
    /// Run `i` uses seed `base_seed + i`.
    pub seed_policy: String,
    pub runs: usize,
    pub wins: usize,
    pub win_rate: f64,
    pub win_rate_ci: Interval,
    pub failure_sites: BTreeMap<String, usize>,
    pub never_lose: Vec<NeverLose>,
    pub per_run: Vec<RunSummary>,
}

/// Exact (Clopper–Pearson) two-sided interval for `k` successes in `n` trials.
pub fn clopper_pearson(k: usize, n: usize, confidence: f64) -> Interval {
    let alpha = 1.0 - confidence;
    let (kf, nf) = (k as f64, n as f64);
    let lower = if k == 0 { 0.0 } else { Beta::new(kf, nf - kf + 1.0).expect("valid beta").inverse_cdf(alpha / 2.0) };
    let upper =
        if k == n { 1.0 } else { Beta::new(kf + 1.0, nf - kf).expect("valid beta").inverse_cdf(1.0 - alpha / 2.0) };
    Interval { confidence, lower, upper }
}

/// Model and empirical never-lose curves for `r = 1..=runs`.
pub fn never_lose_curve(wins: &[bool]) -> Vec<NeverLose> {
    let n = wins.len();
    let rate = wins.iter().filter(|&&w| w).count() as f64 / n as f64;
    (1..=n)
        .map(|r| {
            let windows = n - r + 1;
            let clean = wins.windows(r).filter(|w| w.iter().all(|&x| x)).count();
            NeverLose { rounds: r, model: rate.powi(r as i32), empirical: clean as f64 / windows as f64 }
        })
        .collect()
}

/// Plays `runs` games with seeds `base_seed, base_seed + 1, …` in parallel.
pub fn run_experiment(
    instance: &PcpInstance,
    strategy: &dyn PlayerStrategy,
    runs: usize,
    base_seed: u64,
    config: &GameConfig,
    timing: bool,
) -> Result<ExperimentReport> {
    if runs == 0 {
        return Err(Error::Config("runs must be at least 1".into()));
    }
    config.validate()?;
    let mut per_run: Vec<RunSummary> = (0..runs as u64)
        .into_par_iter()
        .map(|i| {
            let seed = base_seed.wrapping_add(i);
            let cfg = GameConfig { seed, ..config.clone() };
            let start = Instant::now();
            let tx = run_game(instance, strategy, &cfg)?;
            let wall_ms = timing.then(|| start.elapsed().as_secs_f64() * 1e3);
            Ok(RunSummary { seed, verdict: tx.verdict, failure_site: tx.failure_site, wall_ms })
        })
        .collect::<Result<_>>()?;
    per_run.sort_by_key(|r| r.seed.wrapping_sub(base_seed));

    let outcomes: Vec<bool> = per_run.iter().map(|r| r.verdict == Verdict::Win).collect();
    let wins = outcomes.iter().filter(|&&w| w).count();
    let mut failure_sites = BTreeMap::new();
    for r in &per_run {
        if let Some(site) = r.failure_site {
            *failure_sites.entry(site.to_string()).or_insert(0) += 1;
        }
    }
    Ok(ExperimentReport {
        strategy: strategy.name().to_string(),
        instance: instance.clone(),
        config: config.clone(),
        base_seed,
        seed_policy: "sequential".into(),
        runs,
        wins,
        win_rate: wins as f64 / runs as f64,
        win_rate_ci: clopper_pearson(wins, runs, 0.95),
        failure_sites,
        never_lose: never_lose_curve(&outcomes),
        per_run,
    })
}
