//! `ppcg`: generate instances, solve them, play single games, run seeded
//! experiments and print the logic tables.
//!
//! Exit status: 0 on success or a won game, 1 on a lost game or an unsolved
//! instance, 2 on bad input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use ppcg::experiment::run_experiment;
use ppcg::logic::{
    classical_theory, fragment_indices, logic_report, proxy_corpus, quantum_theory, theories_from_games, IndexMap,
    Theory, INTERFERENCE,
};
use ppcg::pcp::{parse_instance, random_instance, search, serialize_instance, GeneratorParams, MatchSearch, SearchBudget};
use ppcg::protocol::{run_game, Budgets, GameConfig, Mode, Tolerances};
use ppcg::scalar::parse_decimal;
use ppcg::strategies::strategy_by_name;
use ppcg::PcpInstance;

#[derive(Parser)]
#[command(name = "ppcg", version, about = "Physical Post correspondence game simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random instance in the `numerator/denominator` line format.
    Gen {
        #[arg(long, default_value_t = 3)]
        dominoes: usize,
        #[arg(long, default_value_t = 3)]
        max_len: usize,
        /// Allow dominoes whose two strings are equal.
        #[arg(long)]
        allow_trivial: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bounded breadth-first search for a match.
    Solve {
        instance: PathBuf,
        #[arg(long, default_value = "100000:32", value_parser = parse_budget)]
        budget_solver: SearchBudget,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Play one game and print its transcript.
    Play {
        instance: PathBuf,
        #[arg(long)]
        strategy: String,
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Play `runs` games with seeds `seed, seed + 1, …` and report win rates.
    Experiment {
        instance: PathBuf,
        #[arg(long)]
        strategy: String,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        /// Record wall-clock time per run (makes the report non-reproducible).
        #[arg(long)]
        timing: bool,
        #[command(flatten)]
        game: GameArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Truth tables and family evaluations for the interference statement.
    Logic {
        /// Valuation of the statement in the classical theory.
        #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
        q_classical: bool,
        /// Valuation of the statement in the quantum theory.
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        q_quantum: bool,
        /// Take both valuations from games played on this instance instead.
        #[arg(long, conflicts_with_all = ["q_classical", "q_quantum"])]
        from_games: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        corpus_size: usize,
        /// `cyclic` or `constant:<index>`.
        #[arg(long, default_value = "cyclic")]
        f: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "10000:16", value_parser = parse_budget)]
        budget_solver: SearchBudget,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Args)]
struct GameArgs {
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `expansions` or `expansions:max_length`.
    #[arg(long, default_value = "100000:32", value_parser = parse_budget)]
    budget_solver: SearchBudget,
    #[arg(long, default_value = "1000000:64", value_parser = parse_budget)]
    budget_referee: SearchBudget,
    #[arg(long, default_value_t = 1e-6)]
    tol_step1: f64,
    #[arg(long, default_value_t = 0.01)]
    tol_step3: f64,
    #[arg(long, default_value_t = 0.01)]
    tol_step4: f64,
    /// Constant `c` in the box budget, as a decimal or `a/b`.
    #[arg(long, default_value = "1")]
    n_constant: String,
    #[arg(long, default_value_t = 2)]
    step1_rounds: u32,
    /// Digits the referee reads past the longest string length.
    #[arg(long, default_value_t = 0)]
    extra_digits: usize,
}

impl GameArgs {
    fn config(&self) -> Result<GameConfig> {
        let n_constant = parse_decimal(&self.n_constant)
            .or_else(|| self.n_constant.parse().ok())
            .ok_or_else(|| anyhow!("--n-constant: not a number: {}", self.n_constant))?;
        let config = GameConfig {
            mode: match self.mode {
                ModeArg::Exact => Mode::Exact,
                ModeArg::Sampled => Mode::Sampled,
            },
            n_constant,
            tolerances: Tolerances { step1_alpha: self.tol_step1, step3_eps: self.tol_step3, step4_eps: self.tol_step4 },
            budgets: Budgets { solver: self.budget_solver, referee: self.budget_referee },
            seed: self.seed,
            step1_rounds: self.step1_rounds,
            decode_extra_digits: self.extra_digits,
        };
        config.validate()?;
        Ok(config)
    }
}

fn parse_budget(text: &str) -> std::result::Result<SearchBudget, String> {
    let (e, l) = text.split_once(':').unwrap_or((text, "64"));
    let e: usize = e.trim().parse().map_err(|_| format!("bad expansion count: {e}"))?;
    let l: usize = l.trim().parse().map_err(|_| format!("bad length: {l}"))?;
    if e == 0 || l == 0 {
        return Err("budget must be positive".into());
    }
    Ok(SearchBudget::new(e, l))
}

fn read_instance(path: &Path) -> Result<PcpInstance> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// Runs the command; `Ok(code)` is the exit status, `Err` means bad input.
fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Gen { dominoes, max_len, allow_trivial, seed, out } => {
            let params = GeneratorParams { num_dominoes: dominoes, max_string_len: max_len, ensure_nontrivial: !allow_trivial };
            let instance = random_instance(params, seed)?;
            emit(out.as_deref(), &serialize_instance(&instance))?;
            Ok(0)
        }
        Command::Solve { instance, budget_solver, out } => {
            let instance = read_instance(&instance)?;
            let report = search(&instance, budget_solver);
            emit(out.as_deref(), &json(&report)?)?;
            Ok(match report.outcome {
                MatchSearch::Found(_) => 0,
                MatchSearch::NoneWithinBudget => 1,
            })
        }
        Command::Play { instance, strategy, game, out } => {
            let instance = read_instance(&instance)?;
            let config = game.config()?;
            let strategy = strategy_by_name(&strategy, config.budgets.solver)?;
            let tx = run_game(&instance, strategy.as_ref(), &config)?;
            emit(out.as_deref(), &json(&tx)?)?;
            Ok(if tx.is_win() { 0 } else { 1 })
        }
        Command::Experiment { instance, strategy, runs, timing, game, out } => {
            let instance = read_instance(&instance)?;
            let config = game.config()?;
            let strategy = strategy_by_name(&strategy, config.budgets.solver)?;
            let report = run_experiment(&instance, strategy.as_ref(), runs, config.seed, &config, timing)?;
            emit(out.as_deref(), &json(&report)?)?;
            Ok(0)
        }
        Command::Logic { q_classical, q_quantum, from_games, corpus_size, f, seed, budget_solver, out } => {
            let theories: Vec<Theory> = match from_games {
                Some(path) => {
                    let instance = read_instance(&path)?;
                    let (c, q) = theories_from_games(&instance, &GameConfig::exact(seed))?;
                    vec![c, q]
                }
                None => vec![
                    classical_theory().with(INTERFERENCE, q_classical),
                    quantum_theory().with(INTERFERENCE, q_quantum),
                ],
            };
            if corpus_size == 0 {
                bail!("--corpus-size must be positive");
            }
            let corpus = proxy_corpus(corpus_size, seed)?;
            let f = match f.as_str() {
                "cyclic" => IndexMap::cyclic(corpus_size, &fragment_indices(&corpus))?,
                other => {
                    let j = other
                        .strip_prefix("constant:")
                        .and_then(|j| j.parse().ok())
                        .ok_or_else(|| anyhow!("--f must be `cyclic` or `constant:<index>`, got {other}"))?;
                    IndexMap::constant(corpus_size, j)?
                }
            };
            let report = logic_report(INTERFERENCE, &theories, corpus, budget_solver, &f)?;
            emit(out.as_deref(), &json(&report)?)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

