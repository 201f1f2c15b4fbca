use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use regretplan::arena::Arena;
use regretplan::bench::{generate, run_benchmark, sample_env, write_csv, BenchConfig, GenParams};
use regretplan::exec::{regret_of, run};
use regretplan::formula::{compile, parse, Dfa};
use regretplan::grid::grid_compile;
use regretplan::model::knowledge::Knowledge;
use regretplan::model::{cost_number, ModelJson, Pkwts, StateId, Wts};
use regretplan::oracle::brute_force_optimal_regret;
use regretplan::solver::{best_case_strategy, solve_regret, solve_worst_case, BrMode, RegretGame, SolveOptions};
use regretplan::strategy::{Objective, Strategy, StrategyJson};
use regretplan::{Error, ExtCost};

/// Regret-minimizing planning for co-safe LTL tasks in partially known
/// weighted transition systems.
///
/// Models, environments, automata and strategies are JSON files. Set
/// REGRETPLAN_LOG (for example to `info` or `debug`) for progress messages on
/// stderr. Exit status is 0 on success, 1 when the input is rejected or the
/// task cannot be solved, and 2 on a usage error; failures print a JSON
/// object with `error` and `message` on stderr.
#[derive(Parser)]
#[command(name = "regretplan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate a co-safe LTL formula into a DFA.
    Compile {
        formula: String,
        /// Comma-separated atomic propositions; the formula's own atoms are
        /// always included.
        #[arg(long, value_delimiter = ',')]
        atoms: Vec<String>,
        #[command(flatten)]
        out: Out,
    },
    /// Convert an ASCII map into a model.
    Grid {
        map: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Generate a random benchmark model.
    Generate {
        #[arg(long, default_value_t = 15)]
        n_states: usize,
        #[command(flatten)]
        gen: GenArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Draw a concrete environment of a model.
    Sample {
        model: PathBuf,
        /// Probability that each possible transition is blocked.
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: Out,
    },
    /// Synthesize a strategy and print its value.
    Solve {
        model: PathBuf,
        #[command(flatten)]
        task: TaskArg,
        #[arg(long, default_value_t = Objective::Regret)]
        objective: Objective,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        out: Out,
    },
    /// Run a strategy in a concrete environment.
    Exec {
        strategy: PathBuf,
        model: PathBuf,
        env: PathBuf,
        #[command(flatten)]
        out: Out,
    },
    /// Print a strategy's largest regret over all environments.
    Regret {
        strategy: PathBuf,
        model: PathBuf,
        /// Task to measure against; defaults to the strategy's own task.
        #[arg(long)]
        task: Option<String>,
    },
    /// Optimal regret by exhaustive search over positional strategies.
    Oracle {
        model: PathBuf,
        #[command(flatten)]
        task: TaskArg,
        #[command(flatten)]
        out: Out,
    },
    /// Dump the game arena.
    Arena {
        model: PathBuf,
        #[command(flatten)]
        task: TaskArg,
        #[command(flatten)]
        out: Out,
    },
    /// Compare the regret, worst-case and best-case strategies on random
    /// models and write a CSV summary.
    Bench {
        /// Comma-separated model sizes.
        #[arg(long, value_delimiter = ',', default_value = "15")]
        states: Vec<usize>,
        /// Obstacle probabilities as `start:end:step` or a comma-separated list.
        #[arg(long, default_value = "0:1:0.1")]
        p: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        gen: GenArgs,
        #[command(flatten)]
        out: Out,
    },
}

#[derive(Args)]
struct Out {
    /// Output file; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TaskArg {
    /// Co-safe LTL formula over the model's labels.
    #[arg(long)]
    task: String,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = BrMode::Exact)]
    br_mode: BrMode,
    #[arg(long, default_value_t = RegretGame::default())]
    regret_game: RegretGame,
}

#[derive(Args)]
struct GenArgs {
    /// Unknown states per model, each with one possible transition.
    #[arg(long, default_value_t = 2)]
    possible_transitions: usize,
    #[arg(long, default_value_t = 1)]
    min_successors: usize,
    #[arg(long, default_value_t = 2)]
    max_successors: usize,
    #[arg(long, default_value_t = 1)]
    min_cost: u64,
    #[arg(long, default_value_t = 100)]
    max_cost: u64,
    #[arg(long, default_value_t = 1)]
    targets: usize,
}

impl GenArgs {
    fn params(&self, n_states: usize, seed: u64) -> GenParams {
        GenParams {
            n_states,
            n_possible_transitions: self.possible_transitions,
            min_successors: self.min_successors,
            max_successors: self.max_successors,
            min_cost: self.min_cost,
            max_cost: self.max_cost,
            n_targets: self.targets,
            seed,
        }
    }
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

type CliResult<T> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Domain(Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    Ok(serde_json::from_str(&read(path)?).map_err(Error::from)?)
}

fn load_model(path: &Path) -> CliResult<Pkwts> {
    Ok(Pkwts::from_json(&read_json::<ModelJson>(path)?)?)
}

fn emit_bytes(out: &Out, bytes: &[u8]) -> CliResult<()> {
    let written = match &out.output {
        Some(p) => fs::write(p, bytes),
        None => io::stdout().write_all(bytes),
    };
    match written {
        // A closed pipe means the reader has what it wanted.
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other.map_err(Error::from)?),
    }
}

fn emit<T: Serialize>(out: &Out, value: &T) -> CliResult<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(Error::from)?;
    s.push('\n');
    emit_bytes(out, s.as_bytes())
}

/// Automaton for `task` over the model's labels and the formula's atoms.
fn task_dfa(m: &Pkwts, task: &str) -> CliResult<Dfa> {
    let f = parse(task)?;
    let mut atoms = m.atoms();
    atoms.extend(f.atoms());
    Ok(compile(&f, &atoms.into_iter().collect::<Vec<_>>())?)
}

fn cost_json(c: ExtCost, denominator: u64) -> Option<serde_json::Number> {
    c.finite().map(|v| cost_number(v, denominator))
}

fn cost_text(c: ExtCost, denominator: u64) -> String {
    match c {
        ExtCost::Finite(v) => cost_number(v, denominator).to_string(),
        ExtCost::Infinite => "inf".to_string(),
    }
}

/// Parses `start:end:step` or a comma-separated list.
fn parse_ps(s: &str) -> CliResult<Vec<f64>> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("`{t}` is not a number")));
    let parts: Vec<&str> = s.split(':').collect();
    let ps = match parts[..] {
        [start, end, step] => {
            let (start, end, step) = (num(start)?, num(end)?, num(step)?);
            if !(step > 0.0) || end < start {
                return Err(Failure::Usage(format!("bad range `{s}`")));
            }
            // Integer stepping keeps the grid free of accumulated rounding.
            let count = ((end - start) / step + 1e-9).floor() as usize;
            (0..=count).map(|i| start + i as f64 * step).collect()
        }
        [_] => s.split(',').map(num).collect::<CliResult<Vec<_>>>()?,
        _ => return Err(Failure::Usage(format!("bad probability list `{s}`"))),
    };
    if let Some(p) = ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Failure::Usage(format!("probability {p} is outside [0, 1]")));
    }
    Ok(ps)
}

#[derive(Serialize)]
struct RunJson {
    path: Vec<StateId>,
    history: Vec<Knowledge>,
    cost: serde_json::Number,
    satisfied: bool,
}

#[derive(Serialize)]
struct OracleJson {
    value: Option<serde_json::Number>,
    strategy: Option<StrategyJson>,
    checked: u64,
}

fn solve(m: &Pkwts, task: &str, objective: Objective, args: &SolverArgs) -> CliResult<Strategy> {
    let a = task_dfa(m, task)?;
    let opts = SolveOptions { br_mode: args.br_mode, regret_game: args.regret_game, ..Default::default() };
    let s = match objective {
        Objective::Regret => {
            let sol = solve_regret(m, &a, opts)?;
            if sol.br_fallbacks > 0 {
                log::warn!("{} hindsight costs used the skeleton approximation", sol.br_fallbacks);
            }
            sol.strategy(&a, objective, task)
        }
        Objective::Worst => solve_worst_case(m, &a, opts)?.strategy(&a, objective, task),
        Objective::Best => best_case_strategy(m, &a, task)?,
    };
    Ok(s)
}

fn load_strategy(path: &Path, m: &Pkwts) -> CliResult<(Strategy, Dfa)> {
    let s = Strategy::from_json(&read_json::<StrategyJson>(path)?, m)?;
    let a = compile(&parse(&s.task)?, &s.atoms)?;
    Ok((s, a))
}

fn dispatch(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Compile { formula, atoms, out } => {
            let f = parse(&formula)?;
            let mut all: std::collections::BTreeSet<String> = atoms.into_iter().filter(|a| !a.is_empty()).collect();
            all.extend(f.atoms());
            let dfa = compile(&f, &all.into_iter().collect::<Vec<_>>())?;
            emit(&out, &dfa.to_json())
        }
        Command::Grid { map, out } => emit(&out, &grid_compile(&read(&map)?)?.model.to_json()),
        Command::Generate { n_states, gen, seed, out } => emit(&out, &generate(&gen.params(n_states, seed))?.to_json()),
        Command::Sample { model, p, seed, out } => {
            if !(0.0..=1.0).contains(&p) {
                return Err(Failure::Usage(format!("probability {p} is outside [0, 1]")));
            }
            emit(&out, &sample_env(&load_model(&model)?, p, seed).to_json())
        }
        Command::Solve { model, task, objective, solver, out } => {
            let m = load_model(&model)?;
            let s = solve(&m, &task.task, objective, &solver)?;
            let value = cost_text(s.value, m.denominator());
            log::info!("{objective} value {value}");
            emit(&out, &s.to_json(&m))?;
            if out.output.is_some() {
                println!("{value}");
            }
            Ok(())
        }
        Command::Exec { strategy, model, env, out } => {
            let m = load_model(&model)?;
            let (s, a) = load_strategy(&strategy, &m)?;
            let t = Wts::from_json(&read_json::<ModelJson>(&env)?)?;
            let rec = run(&s, &m, &a, &t)?;
            emit(
                &out,
                &RunJson {
                    path: rec.path,
                    history: rec.history,
                    cost: cost_number(rec.cost, m.denominator()),
                    satisfied: rec.satisfied,
                },
            )
        }
        Command::Regret { strategy, model, task } => {
            let m = load_model(&model)?;
            let (mut s, own) = load_strategy(&strategy, &m)?;
            let a = match task {
                Some(t) => task_dfa(&m, &t)?,
                None => own,
            };
            println!("{}", cost_text(regret_of(&mut s, &m, &a)?, m.denominator()));
            Ok(())
        }
        Command::Oracle { model, task, out } => {
            let m = load_model(&model)?;
            let a = task_dfa(&m, &task.task)?;
            let r = brute_force_optimal_regret(&m, &a)?;
            let strategy = r.strategy.map(|mut s| {
                s.task = task.task.clone();
                s.to_json(&m)
            });
            emit(&out, &OracleJson { value: cost_json(r.value, m.denominator()), strategy, checked: r.evaluated })
        }
        Command::Arena { model, task, out } => {
            let m = load_model(&model)?;
            let a = task_dfa(&m, &task.task)?;
            let arena = Arena::build(&m, &a)?;
            log::info!("arena has {} vertices", arena.num_vertices());
            emit(&out, &arena.to_json(&m))
        }
        Command::Bench { states, p, trials, seed, gen, out } => {
            let cfg = BenchConfig { states, ps: parse_ps(&p)?, trials, seed, gen: gen.params(0, seed) };
            let rows = run_benchmark(&cfg)?;
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            emit_bytes(&out, &buf)
        }
    }
}

fn fail(code: u8, kind: &str, message: &str) -> ExitCode {
    let payload = serde_json::json!({ "error": kind, "message": message });
    eprintln!("{payload}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("REGRETPLAN_LOG")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // Help and version output.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(2, "Usage", e.to_string().trim_end()),
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => fail(2, "Usage", &msg),
        Err(Failure::Domain(e)) => fail(1, e.kind(), &e.to_string()),
    }
}
