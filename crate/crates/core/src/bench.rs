//! Random instances, random environments and the three-strategy comparison.
//!
//! All randomness comes from ChaCha8 generators seeded through
//! [`derive_seed`], so results are reproducible across platforms.

use std::collections::BTreeSet;
use std::io::Write;

use log::warn;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{execute, run};
use crate::formula::{compile, parse, Dfa};
use crate::model::{Pkwts, StateId, Wts};
use crate::solver::{solve_regret, solve_worst_case, BestCasePolicy, SolveOptions};
use crate::strategy::{Objective, Strategy};

pub const TARGET_ATOM: &str = "target";
pub const MAX_GENERATION_ATTEMPTS: usize = 10_000;

/// Automaton for reaching a `target` state.
pub fn target_task() -> Dfa {
    compile(&parse("F target").expect("valid formula"), &[TARGET_ATOM]).expect("valid task")
}

/// Mixes a base seed with a sequence of indices (SplitMix64 steps).
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut z = base;
    for &p in parts {
        z = z.wrapping_add(p).wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
    }
    z
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenParams {
    pub n_states: usize,
    /// Number of unknown states, each with one possible transition.
    pub n_possible_transitions: usize,
    pub min_successors: usize,
    pub max_successors: usize,
    pub min_cost: u64,
    pub max_cost: u64,
    pub n_targets: usize,
    pub seed: u64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            n_states: 15,
            n_possible_transitions: 2,
            min_successors: 1,
            max_successors: 2,
            min_cost: 1,
            max_cost: 100,
            n_targets: 1,
            seed: 0,
        }
    }
}

impl GenParams {
    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidModel(format!("generator parameters: {msg}")));
        if self.min_successors == 0 || self.min_successors > self.max_successors {
            return bad("successor range must satisfy 1 <= min <= max");
        }
        if self.min_cost == 0 || self.min_cost > self.max_cost {
            return bad("cost range must satisfy 1 <= min <= max");
        }
        if self.n_states < self.max_successors + 2 {
            return bad("need at least max_successors + 2 states");
        }
        if self.n_targets == 0 || self.n_targets >= self.n_states {
            return bad("need between 1 and n_states - 1 targets");
        }
        if self.n_possible_transitions >= self.n_states {
            return bad("the initial state cannot be unknown");
        }
        Ok(())
    }
}

/// Random model with a spanning tree from state 0, extra random edges up to
/// the successor range, and unknown states whose possible transition is
/// either present (pattern 0) or absent (pattern 1). Candidates are drawn
/// until the worst-case objective is finite.
pub fn generate(params: &GenParams) -> Result<Pkwts> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let a = target_task();
    for _ in 0..MAX_GENERATION_ATTEMPTS {
        let Some(m) = candidate(params, &mut rng)? else { continue };
        match solve_worst_case(&m, &a, SolveOptions::default()) {
            Ok(_) => return Ok(m),
            Err(Error::UnrealizableTask) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::GenerationFailed { attempts: MAX_GENERATION_ATTEMPTS })
}

fn candidate(p: &GenParams, rng: &mut ChaCha8Rng) -> Result<Option<Pkwts>> {
    let n = p.n_states;
    let mut succ: Vec<BTreeSet<StateId>> = vec![BTreeSet::new(); n];
    let mut order: Vec<StateId> = (1..n).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    let mut placed = vec![0];
    for &v in &order {
        let open: Vec<StateId> = placed.iter().copied().filter(|&u| succ[u].len() < p.max_successors).collect();
        let u = open[rng.gen_range(0..open.len())];
        succ[u].insert(v);
        placed.push(v);
    }
    for (u, s) in succ.iter_mut().enumerate() {
        let d = rng.gen_range(p.min_successors..=p.max_successors);
        while s.len() < d {
            let y = rng.gen_range(0..n);
            if y != u {
                s.insert(y);
            }
        }
    }
    let targets: BTreeSet<StateId> = sample(rng, n - 1, p.n_targets).into_iter().map(|i| i + 1).collect();
    let unknown: Vec<StateId> = {
        let mut u: Vec<StateId> = sample(rng, n - 1, p.n_possible_transitions).into_iter().map(|i| i + 1).collect();
        u.sort_unstable();
        u
    };
    let mut extra: Vec<Option<StateId>> = vec![None; n];
    for &x in &unknown {
        let options: Vec<StateId> =
            (0..n).filter(|&y| y != x && !succ[x].contains(&y) && extra[y] != Some(x)).collect();
        if options.is_empty() {
            return Ok(None);
        }
        extra[x] = Some(options[rng.gen_range(0..options.len())]);
    }
    let mut weights = Vec::new();
    let mut patterns = Vec::with_capacity(n);
    let mut labels = vec![Vec::new(); n];
    for x in 0..n {
        let mut base = succ[x].clone();
        if targets.contains(&x) {
            base.insert(x);
            labels[x].push(TARGET_ATOM.to_string());
            weights.push(((x, x), 0));
        }
        for &y in succ[x].iter().chain(extra[x].iter()) {
            weights.push(((x, y), rng.gen_range(p.min_cost..=p.max_cost)));
        }
        patterns.push(match extra[x] {
            Some(y) => {
                let mut open = base.clone();
                open.insert(y);
                vec![open.into_iter().collect(), base.into_iter().collect()]
            }
            None => vec![base.into_iter().collect()],
        });
    }
    Pkwts::new(0, patterns, weights, labels, 1).map(Some)
}

/// Small unstructured instance: random nonempty successor sets of up to
/// three states, `n_unknown` unknown states with two distinct patterns each,
/// costs 1..=9 and one target. The target may be unreachable in some
/// environments.
pub fn generate_small(n_states: usize, n_unknown: usize, seed: u64) -> Result<Pkwts> {
    if n_states < 3 || n_unknown >= n_states {
        return Err(Error::InvalidModel("need at least 3 states and a known initial state".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_states;
    let target = rng.gen_range(1..n);
    let unknown: BTreeSet<StateId> = sample(&mut rng, n - 1, n_unknown).into_iter().map(|i| i + 1).collect();
    let random_set = |rng: &mut ChaCha8Rng, x: StateId| -> BTreeSet<StateId> {
        let k = rng.gen_range(1..=3.min(n - 1));
        sample(rng, n - 1, k).into_iter().map(|i| if i >= x { i + 1 } else { i }).collect()
    };
    let mut patterns = Vec::with_capacity(n);
    let mut weights = Vec::new();
    let mut labels = vec![Vec::new(); n];
    labels[target].push(TARGET_ATOM.to_string());
    for x in 0..n {
        let count = if unknown.contains(&x) { 2 } else { 1 };
        let mut pats: Vec<BTreeSet<StateId>> = Vec::new();
        while pats.len() < count {
            let s = random_set(&mut rng, x);
            if !pats.contains(&s) {
                pats.push(s);
            }
        }
        let all: BTreeSet<StateId> = pats.iter().flatten().copied().collect();
        for y in all {
            weights.push(((x, y), rng.gen_range(1..=9)));
        }
        if x == target {
            for p in &mut pats {
                p.insert(x);
            }
            weights.push(((x, x), 0));
        }
        patterns.push(pats.into_iter().map(|p| p.into_iter().collect()).collect());
    }
    Pkwts::new(0, patterns, weights, labels, 1)
}

/// Draws a concrete environment where each possible transition is absent
/// with probability `p_obstacle`.
///
/// A state whose patterns are exactly its fixed successors plus every
/// subset of its optional ones (as for generated models and grid cells) is
/// decided edge by edge, with one coin per unordered pair of states, so a
/// possible wall is shared by both cells beside it. Any other unknown state
/// takes one coin: pattern 0 when it comes up present, otherwise a uniform
/// choice among the remaining patterns. Coins are drawn in a fixed order and
/// always in the same number, so environments for different `p_obstacle`
/// and one seed are coupled.
pub fn sample_env(m: &Pkwts, p_obstacle: f64, seed: u64) -> Wts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unknown = m.unknown_states();
    let mut edge_shaped = Vec::new();
    let mut pairs = BTreeSet::new();
    for &x in &unknown {
        let pats = m.patterns(x);
        let fixed: BTreeSet<StateId> =
            pats.iter().skip(1).fold(pats[0].iter().copied().collect(), |acc, p| &acc & &p.iter().copied().collect());
        let optional: Vec<StateId> = m.skeleton_successors(x).into_iter().filter(|y| !fixed.contains(y)).collect();
        let shaped = optional.len() < 16 && pats.len() == 1 << optional.len();
        if shaped {
            pairs.extend(optional.iter().map(|&y| (x.min(y), x.max(y))));
        }
        edge_shaped.push((x, shaped, fixed));
    }
    let present: BTreeSet<(StateId, StateId)> = pairs.into_iter().filter(|_| rng.gen::<f64>() >= p_obstacle).collect();
    let mut choice = vec![0usize; m.num_states()];
    for (x, shaped, fixed) in &edge_shaped {
        let x = *x;
        if *shaped {
            let want: Vec<StateId> = m
                .skeleton_successors(x)
                .into_iter()
                .filter(|&y| fixed.contains(&y) || present.contains(&(x.min(y), x.max(y))))
                .collect();
            choice[x] = m.pattern_index(x, &want).expect("edge-shaped pattern family");
        } else {
            let coin: f64 = rng.gen();
            let pick = rng.gen_range(1..m.patterns(x).len());
            choice[x] = if coin >= p_obstacle { 0 } else { pick };
        }
    }
    m.env(&choice)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub states: Vec<usize>,
    pub ps: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Template for all generator parameters except `n_states` and `seed`.
    pub gen: GenParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub states: usize,
    pub p: f64,
    pub trial_count: usize,
    pub strategy: Objective,
    pub mean_cost: f64,
    pub stderr: f64,
    pub skips: usize,
}

#[derive(Debug, Clone, Default)]
struct Tally {
    n: u128,
    sum: u128,
    sum_sq: u128,
    skips: usize,
}

impl Tally {
    fn add(&mut self, c: Option<u64>) {
        match c {
            Some(c) => {
                self.n += 1;
                self.sum += c as u128;
                self.sum_sq += (c as u128) * (c as u128);
            }
            None => self.skips += 1,
        }
    }

    fn mean(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            self.sum as f64 / self.n as f64
        }
    }

    fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let ss = self.n * self.sum_sq - self.sum * self.sum;
        (ss as f64 / (self.n * (self.n - 1)) as f64 / self.n as f64).sqrt()
    }
}

const STRATEGIES: [Objective; 3] = [Objective::Regret, Objective::Worst, Objective::Best];

/// Realized costs of the three strategies on one generated model, one entry
/// per probability in `ps` (`None` for a skipped run).
fn trial(cfg: &BenchConfig, n: usize, t: usize) -> Vec<[Option<u64>; 3]> {
    let skipped = vec![[None; 3]; cfg.ps.len()];
    let params = GenParams { n_states: n, seed: derive_seed(cfg.seed, &[n as u64, t as u64, 0]), ..cfg.gen };
    let m = match generate(&params) {
        Ok(m) => m,
        Err(e) => {
            warn!("states {n} trial {t}: generation failed: {e}");
            return skipped;
        }
    };
    let a = target_task();
    let solved = |objective| -> Result<Strategy> {
        let sol = match objective {
            Objective::Regret => solve_regret(&m, &a, SolveOptions::default())?,
            _ => solve_worst_case(&m, &a, SolveOptions::default())?,
        };
        Ok(sol.strategy(&a, objective, "F target"))
    };
    let strategies = [solved(Objective::Regret), solved(Objective::Worst)];
    let mut best = BestCasePolicy::new(&m, &a);
    let env_seed = derive_seed(cfg.seed, &[n as u64, t as u64, 1]);
    cfg.ps
        .iter()
        .map(|&p| {
            let env = sample_env(&m, p, env_seed);
            let mut out = [None; 3];
            for (i, s) in strategies.iter().enumerate() {
                let r = match s {
                    Ok(s) => run(s, &m, &a, &env),
                    Err(e) => Err(Error::Invariant(e.to_string())),
                };
                out[i] = match r {
                    Ok(r) => Some(r.cost),
                    Err(e) => {
                        warn!("states {n} trial {t} p {p}: {} run skipped: {e}", STRATEGIES[i]);
                        None
                    }
                };
            }
            let best_run = match &mut best {
                Ok(b) => execute(b, &m, &a, &env),
                Err(e) => Err(Error::Invariant(e.to_string())),
            };
            out[2] = match best_run {
                Ok(r) => Some(r.cost),
                Err(e) => {
                    warn!("states {n} trial {t} p {p}: best-case run skipped: {e}");
                    None
                }
            };
            out
        })
        .collect()
}

/// Mean and standard error of each strategy's realized cost for every
/// `(states, p)` pair. Trials run in parallel; the result does not depend on
/// scheduling.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if let Some(p) = cfg.ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidModel(format!("probability {p} is outside [0, 1]")));
    }
    let mut rows = Vec::new();
    for &n in &cfg.states {
        GenParams { n_states: n, ..cfg.gen }.validate()?;
        let results: Vec<Vec<[Option<u64>; 3]>> = (0..cfg.trials).into_par_iter().map(|t| trial(cfg, n, t)).collect();
        for (pi, &p) in cfg.ps.iter().enumerate() {
            for (si, &strategy) in STRATEGIES.iter().enumerate() {
                let mut tally = Tally::default();
                for r in &results {
                    tally.add(r[pi][si]);
                }
                rows.push(BenchRow {
                    states: n,
                    p,
                    trial_count: tally.n as usize,
                    strategy,
                    mean_cost: tally.mean(),
                    stderr: tally.stderr(),
                    skips: tally.skips,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[BenchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["states", "p", "trial_count", "strategy", "mean_cost", "stderr", "skips"])?;
    for r in rows {
        w.write_record([
            r.states.to_string(),
            format!("{:.2}", r.p),
            r.trial_count.to_string(),
            r.strategy.to_string(),
            format!("{:.6}", r.mean_cost),
            format!("{:.6}", r.stderr),
            r.skips.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::grid::grid_compile;

    #[test]
    fn generation_is_deterministic_and_valid() {
        let p = GenParams { seed: 5, ..GenParams::default() };
        let m = generate(&p).unwrap();
        assert_eq!(m, generate(&p).unwrap());
        assert_eq!(m.num_states(), 15);
        assert_eq!(m.unknown_states().len(), 2);
        for x in m.unknown_states() {
            let pats = m.patterns(x);
            assert_eq!(pats.len(), 2);
            assert_eq!(pats[0].len(), pats[1].len() + 1);
            assert!(pats[1].iter().all(|y| pats[0].contains(y)));
        }
        let known = generate(&GenParams { n_possible_transitions: 0, ..p }).unwrap();
        assert!(known.unknown_states().is_empty());
    }

    #[test]
    fn bad_parameters() {
        let p = GenParams::default();
        assert!(generate(&GenParams { min_cost: 0, ..p }).is_err());
        assert!(generate(&GenParams { min_successors: 3, ..p }).is_err());
        assert!(generate(&GenParams { n_states: 3, ..p }).is_err());
    }

    #[test]
    fn t3_sampling() {
        let m = fixtures::t3();
        assert_eq!(m.choice_of(&sample_env(&m, 0.0, 1)).unwrap()[1], 0);
        assert_eq!(m.choice_of(&sample_env(&m, 1.0, 1)).unwrap()[1], 1);
        let seen: BTreeSet<usize> = (0..40).map(|s| m.choice_of(&sample_env(&m, 0.5, s)).unwrap()[1]).collect();
        assert_eq!(seen.len(), 2);
        assert_eq!(sample_env(&m, 0.5, 9), sample_env(&m, 0.5, 9));
    }

    #[test]
    fn grid_walls_are_one_coin() {
        let g = grid_compile("map\nI . .\n\n. .:.").unwrap();
        let (a, b) = g.possible_walls[0];
        for s in 0..40 {
            let c = g.model.choice_of(&sample_env(&g.model, 0.5, s)).unwrap();
            assert_eq!(c[a], c[b]);
        }
    }

    #[test]
    fn coupled_across_probabilities() {
        let m = generate(&GenParams { seed: 2, n_possible_transitions: 4, ..GenParams::default() }).unwrap();
        for s in 0..20 {
            let open = |p| {
                let c = m.choice_of(&sample_env(&m, p, s)).unwrap();
                m.unknown_states().into_iter().filter(|&x| c[x] == 0).collect::<BTreeSet<_>>()
            };
            assert!(open(0.7).is_subset(&open(0.3)));
        }
    }

    #[test]
    fn small_benchmark_is_reproducible() {
        let cfg = BenchConfig { states: vec![8], ps: vec![0.0, 1.0], trials: 6, seed: 3, gen: GenParams::default() };
        let r = run_benchmark(&cfg).unwrap();
        assert_eq!(r.len(), 6);
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_csv(&r, &mut a).unwrap();
        write_csv(&run_benchmark(&cfg).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
        assert!(String::from_utf8(a).unwrap().starts_with("states,p,trial_count,strategy,mean_cost,stderr,skips\n8,0.00,"));
    }

    #[test]
    fn tally_statistics() {
        let mut t = Tally::default();
        for c in [2, 4, 4, 4, 5, 5, 7, 9] {
            t.add(Some(c));
        }
        t.add(None);
        assert_eq!(t.mean(), 5.0);
        assert!((t.stderr() - (32.0f64 / 7.0).sqrt() / 8f64.sqrt()).abs() < 1e-12);
        assert_eq!(t.skips, 1);
    }
}
