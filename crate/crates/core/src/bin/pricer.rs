//! Command-line harness: reproducible experiments over the simulator,
//! analytic solver, SA optimizer, DP oracle, baselines, and FSDA training.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use pricer::analytic::{check_optimality, enumerate_optimum};
use pricer::baselines::{self, PolicyKind, PolicyParams};
use pricer::config::{self, ExperimentConfig, PolicySpec};
use pricer::demand::{fit_demand_model, read_pairs_csv, FitKind, FitResult};
use pricer::dp::{self, naive_cost};
use pricer::fsda::{self, AgentBundle, Env};
use pricer::market::{self, Action, ScenarioConfig};
use pricer::neural::save_params;
use pricer::rng;
use pricer::sa;
use pricer::{Error, Result};

#[derive(Parser)]
#[command(name = "pricer", version, about = "Joint dynamic pricing and replenishment toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment file (.toml or .json).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named preset: appendix-c, scenario-a..d, tiny-dp.
    #[arg(long)]
    preset: Option<String>,
    /// Override the root seed of every configured component.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Roll configured policies over the scenario, one episode per seed.
    Simulate(CommonArgs),
    /// Two-timescale SA runs across seeds with an optimality report.
    SaDemo(CommonArgs),
    /// Four-scenario comparison of searched baselines, FSDA, and random.
    Benchmark(CommonArgs),
    /// Exact backward induction with a single-period cross-check.
    DpOracle(CommonArgs),
    /// Train the fast-slow dual-agent learner on the configured scenario.
    TrainFsda(CommonArgs),
    /// Fit demand curves to a `price,demand` CSV.
    FitDemand {
        /// Input CSV with header `price,demand`.
        #[arg(long)]
        input: PathBuf,
        /// linear, exponential, iso-elasticity, logit, or all.
        #[arg(long, default_value = "all")]
        kind: String,
        /// Optional JSON output file (stdout otherwise).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid-search baseline policy parameters on the configured scenario.
    SearchBaseline(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::FAILURE
        }
    }
}

fn error_json(e: &Error) -> String {
    let kind = match e {
        Error::Config(_) => "config",
        Error::Domain(_) => "domain",
        Error::Singular(_) => "singular",
        Error::Shape(_) => "shape",
        Error::Size(_) => "size",
        Error::Numeric(_) => "numeric",
        Error::Parse { .. } => "parse",
        Error::Io(_) => "io",
    };
    serde_json::json!({ "error": kind, "message": e.to_string() }).to_string()
}

fn load_config(args: &CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => config::load(path)?,
        (None, Some(name)) => config::preset(name)?,
        (None, None) => {
            return Err(Error::Config("pass --config <file> or --preset <name>".into()))
        }
    };
    if let Some(seed) = args.seed {
        cfg.reseed(seed);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn json_pretty<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Config(format!("serialize: {e}")))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// One episode of a declarative policy; `random` draws from its own
/// named stream so adding policies never perturbs the market draws.
fn rollout_policy(
    spec: &PolicySpec,
    scenario: &ScenarioConfig,
    seed: u64,
) -> Result<market::Trajectory> {
    let mut env_rng = rng::stream(seed, "baseline-eval");
    match spec {
        PolicySpec::Random => {
            let mut policy_rng = rng::stream(seed, "random-policy");
            let (pg, qg) = (scenario.price_grid.clone(), scenario.quantity_grid.clone());
            market::run_episode(
                scenario,
                move |_s| {
                    use rand::Rng;
                    let pi = policy_rng.gen_range(0..pg.n);
                    let qi = policy_rng.gen_range(0..qg.n);
                    Action { price: pg.value(pi), quantity: qg.value(qi).round() as u64 }
                },
                &mut env_rng,
            )
        }
        PolicySpec::Fixed { price, quantity } => {
            let p = scenario.price_grid.value(scenario.price_grid.nearest(*price));
            let q = *quantity;
            market::run_episode(scenario, move |_s| Action { price: p, quantity: q }, &mut env_rng)
        }
        PolicySpec::Bslp(p) => {
            let params = PolicyParams::Bslp(p.clone());
            market::run_episode(scenario, |s| baselines::act(&params, scenario, s), &mut env_rng)
        }
        PolicySpec::Ssp(p) => {
            let params = PolicyParams::Ssp(p.clone());
            market::run_episode(scenario, |s| baselines::act(&params, scenario, s), &mut env_rng)
        }
        PolicySpec::Myopic(p) => {
            let params = PolicyParams::Myopic(p.clone());
            market::run_episode(scenario, |s| baselines::act(&params, scenario, s), &mut env_rng)
        }
    }
}

fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    if cfg.policies.is_empty() {
        return Err(Error::Config("simulate needs at least one policy".into()));
    }
    let mut summary = String::from("policy,mean_reward,std_reward,n_seeds\n");
    for spec in &cfg.policies {
        let name = spec.name();
        let mut rewards = Vec::new();
        for &seed in &cfg.seeds {
            let traj = rollout_policy(spec, &cfg.scenario, seed)?;
            write_file(out, &format!("sim-{name}-seed{seed}.csv"), &market::trajectory_to_csv(&traj))?;
            rewards.push(traj.total_reward);
        }
        let (mean, std) = mean_std(&rewards);
        summary.push_str(&format!("{name},{mean},{std},{}\n", rewards.len()));
    }
    write_file(out, "summary.csv", &summary)?;
    println!("simulate: {} policies x {} seeds -> {}", cfg.policies.len(), cfg.seeds.len(), out.display());
    Ok(())
}

#[derive(Serialize)]
struct SaDemoReport {
    median_seed: u64,
    p: f64,
    x: f64,
    x_rounded: i64,
    price_target_met: bool,
    stock_target_met: bool,
    grad_p: f64,
    slope_below: f64,
    slope_above: f64,
    optimality_satisfied: bool,
}

fn cmd_sa_demo(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let params = cfg
        .single_period
        .as_ref()
        .ok_or_else(|| Error::Config("sa-demo needs [single_period] in the config".into()))?;
    let base = cfg
        .sa
        .as_ref()
        .ok_or_else(|| Error::Config("sa-demo needs [sa] in the config".into()))?;
    let mut finals: Vec<(u64, sa::SAResult)> = Vec::new();
    for &seed in &cfg.seeds {
        let sa_cfg = sa::SAConfig { seed, ..base.clone() };
        let result = sa::run_two_timescale(params, &sa_cfg)?;
        write_file(out, &format!("sa-trace-seed{seed}.csv"), &result.trace.to_csv())?;
        finals.push((seed, result));
    }
    finals.sort_by(|a, b| a.1.p.partial_cmp(&b.1.p).unwrap());
    let (median_seed, median) = &finals[finals.len() / 2];
    // Gradient tolerance scaled by the profit magnitude at the iterate.
    let scale = pricer::analytic::profit(params, median.p, median.x_rounded as f64).abs().max(1.0);
    let opt = check_optimality(params, median.p, median.x_rounded, 1e-3 * scale);
    let report = SaDemoReport {
        median_seed: *median_seed,
        p: median.p,
        x: median.x,
        x_rounded: median.x_rounded,
        price_target_met: (median.p - 55.0).abs() <= 3.0,
        stock_target_met: median.x_rounded == 5,
        grad_p: opt.g_value,
        slope_below: opt.slope_below,
        slope_above: opt.slope_above,
        optimality_satisfied: opt.satisfied,
    };
    write_file(out, "sa-report.json", &json_pretty(&report)?)?;
    println!(
        "sa-demo: median p={:.3} x={:.3} (rounds to {}) price_ok={} stock_ok={}",
        median.p, median.x, median.x_rounded, report.price_target_met, report.stock_target_met
    );
    if !(report.price_target_met && report.stock_target_met) {
        return Err(Error::Numeric(format!(
            "median iterate (p={:.3}, x={:.3}) missed the (55, 5) target",
            median.p, median.x
        )));
    }
    Ok(())
}

/// Greedy FSDA rollouts on the evaluation stream of each seed.
fn fsda_returns(bundle: &AgentBundle, scenario: &ScenarioConfig, seeds: &[u64]) -> Result<Vec<f64>> {
    let env = Env::single(scenario);
    let mut out = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let mut rng = rng::stream(seed, "baseline-eval");
        let eps = fsda::collect_trajectories(&env, bundle, 1, &mut rng, true)?;
        out.push(eps[0].total_reward);
    }
    Ok(out)
}

fn cmd_benchmark(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let fsda_cfg = cfg
        .fsda
        .clone()
        .ok_or_else(|| Error::Config("benchmark needs [fsda] in the config".into()))?;
    let search_cfg = cfg
        .search
        .clone()
        .ok_or_else(|| Error::Config("benchmark needs [search] in the config".into()))?;
    let held_out = cfg.held_out_seeds();
    let scenario_names = ["scenario-a", "scenario-b", "scenario-c", "scenario-d"];
    let mut table = String::from("scenario,policy,mean_reward,std_reward,n_seeds\n");
    let policy_names = ["random", "bslp", "ssp", "myopic", "fsda"];
    // means[scenario][policy]
    let mut means = vec![vec![0.0f64; policy_names.len()]; scenario_names.len()];
    for (si, name) in scenario_names.iter().enumerate() {
        let scenario = config::preset(name)?.scenario;
        let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
        let random_returns: Result<Vec<f64>> = held_out
            .iter()
            .map(|&s| Ok(rollout_policy(&PolicySpec::Random, &scenario, s)?.total_reward))
            .collect();
        rows.push(("random".into(), random_returns?));
        for kind in [PolicyKind::Bslp, PolicyKind::Ssp, PolicyKind::Myopic] {
            let outcome = baselines::search_parameters(kind, &scenario, &search_cfg)?;
            let returns: Result<Vec<f64>> = held_out
                .iter()
                .map(|&s| {
                    let mut rng = rng::stream(s, "baseline-eval");
                    Ok(market::run_episode(&scenario, |st| baselines::act(&outcome.best, &scenario, st), &mut rng)?
                        .total_reward)
                })
                .collect();
            let label = match kind {
                PolicyKind::Bslp => "bslp",
                PolicyKind::Ssp => "ssp",
                PolicyKind::Myopic => "myopic",
            };
            rows.push((label.into(), returns?));
        }
        let report = fsda::train(&fsda_cfg, &scenario)?;
        rows.push(("fsda".into(), fsda_returns(&report.bundle, &scenario, &held_out)?));
        for (pi, (label, returns)) in rows.iter().enumerate() {
            let (mean, std) = mean_std(returns);
            means[si][pi] = mean;
            table.push_str(&format!("{name},{label},{mean},{std},{}\n", returns.len()));
        }
        println!("benchmark: finished {name}");
    }
    write_file(out, "benchmark.csv", &table)?;
    // Win/loss matrix: entry (i, j) counts scenarios where policy i's mean
    // beats policy j's.
    let mut matrix = String::from("policy");
    for p in policy_names {
        matrix.push(',');
        matrix.push_str(p);
    }
    matrix.push('\n');
    for (i, p) in policy_names.iter().enumerate() {
        matrix.push_str(p);
        for j in 0..policy_names.len() {
            let wins = (0..scenario_names.len()).filter(|&s| means[s][i] > means[s][j]).count();
            matrix.push_str(&format!(",{wins}"));
        }
        matrix.push('\n');
    }
    write_file(out, "winloss.csv", &matrix)?;
    println!("benchmark: wrote {} and winloss.csv", out.join("benchmark.csv").display());
    Ok(())
}

fn cmd_dp_oracle(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let inst = cfg
        .dp
        .clone()
        .ok_or_else(|| Error::Config("dp-oracle needs [dp] in the config".into()))?;
    if let Err(e @ Error::Size(_)) = inst.validate() {
        let d = inst.demand_pmfs().iter().map(|p| p.len()).max().unwrap_or(0);
        println!(
            "dp-oracle: naive recursion cost estimate sum_t (P*Q*D)^t = {:.6e} (P={}, Q={}, D={})",
            naive_cost(inst.price_grid.len(), inst.quantity_grid.len(), d, inst.horizon),
            inst.price_grid.len(),
            inst.quantity_grid.len(),
            d
        );
        return Err(e);
    }
    let solution = dp::backward_induction(&inst)?;
    write_file(out, "dp-value.csv", &dp::value_table_csv(&inst, &solution))?;
    write_file(out, "dp-policy.csv", &dp::policy_table_csv(&inst, &solution))?;
    let mut status = format!(
        "dp-oracle: value at start state = {:.6} ({} updates)",
        solution.start_value(&inst),
        solution.updates
    );
    if inst.horizon == 1 && inst.costs.z == 0 && inst.costs.f == 0.0 {
        let q_max = *inst.quantity_grid.iter().max().unwrap() as f64;
        let params = pricer::analytic::SinglePeriodParams {
            costs: inst.costs.clone(),
            x0: inst.x0,
            demand: inst.demand.clone(),
            price_domain: (inst.price_grid[0], *inst.price_grid.last().unwrap()),
            stock_domain: (inst.x0 as f64, inst.x0 as f64 + q_max),
            price_grid_n: inst.price_grid.len(),
        };
        let (p_star, x_star, f_star) = enumerate_optimum(&params);
        let (pi, qi) = solution.policy[0][0];
        let matched = (inst.price_grid[pi] - p_star).abs() < 1e-9
            && inst.x0 + inst.quantity_grid[qi] as i64 == x_star
            && (solution.start_value(&inst) - f_star).abs() < 1e-6;
        status.push_str(&format!(
            "; single-period cross-check: {}",
            if matched { "match" } else { "MISMATCH" }
        ));
        if !matched {
            println!("{status}");
            return Err(Error::Numeric(format!(
                "DP ({}, {}) = {:.6} disagrees with enumeration ({p_star}, {x_star}) = {f_star:.6}",
                inst.price_grid[pi],
                inst.quantity_grid[qi],
                solution.start_value(&inst)
            )));
        }
    }
    println!("{status}");
    Ok(())
}

fn cmd_train_fsda(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let fsda_cfg = cfg
        .fsda
        .clone()
        .ok_or_else(|| Error::Config("train-fsda needs [fsda] in the config".into()))?;
    let report = fsda::train(&fsda_cfg, &cfg.scenario)?;
    write_file(out, "fsda-curve.csv", &fsda::curve_to_csv(&report.curve))?;
    std::fs::create_dir_all(out)?;
    for (i, actor) in report.bundle.actors.iter().enumerate() {
        save_params(actor, &out.join(format!("actor{i}.bin")))?;
    }
    save_params(&report.bundle.critic, &out.join("critic.bin"))?;
    let final_eval = fsda_returns(&report.bundle, &cfg.scenario, &cfg.held_out_seeds())?;
    let (mean, std) = mean_std(&final_eval);
    println!(
        "train-fsda: {} episodes, held-out return {:.3} +/- {:.3} over {} seeds",
        fsda_cfg.episodes,
        mean,
        std,
        final_eval.len()
    );
    Ok(())
}

fn cmd_fit_demand(input: &Path, kind: &str, out: Option<&Path>) -> Result<()> {
    let text = std::fs::read_to_string(input)?;
    let pairs = read_pairs_csv(&text)?;
    let kinds: Vec<FitKind> = match kind {
        "all" => FitKind::ALL.to_vec(),
        "linear" => vec![FitKind::Linear],
        "exponential" => vec![FitKind::Exponential],
        "iso-elasticity" => vec![FitKind::IsoElasticity],
        "logit" => vec![FitKind::Logit],
        other => {
            return Err(Error::Config(format!(
                "unknown kind '{other}' (linear, exponential, iso-elasticity, logit, all)"
            )))
        }
    };
    let fits: Result<Vec<FitResult>> =
        kinds.into_iter().map(|k| fit_demand_model(k, &pairs)).collect();
    let json = json_pretty(&fits?)?;
    match out {
        Some(path) => {
            if let Some(dir) = path.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)?;
                }
            }
            std::fs::write(path, &json)?;
        }
        None => println!("{json}"),
    }
    Ok(())
}

fn cmd_search_baseline(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let search_cfg = cfg
        .search
        .clone()
        .ok_or_else(|| Error::Config("search-baseline needs [search] in the config".into()))?;
    let mut results = Vec::new();
    for kind in [PolicyKind::Bslp, PolicyKind::Ssp, PolicyKind::Myopic] {
        let outcome = baselines::search_parameters(kind, &cfg.scenario, &search_cfg)?;
        println!(
            "search-baseline: {:?} mean_return={:.3} after {} evaluations",
            kind, outcome.mean_return, outcome.evaluations
        );
        results.push(outcome);
    }
    write_file(out, "search-results.json", &json_pretty(&results)?)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(args) => cmd_simulate(&load_config(args)?, &args.out),
        Command::SaDemo(args) => cmd_sa_demo(&load_config(args)?, &args.out),
        Command::Benchmark(args) => cmd_benchmark(&load_config(args)?, &args.out),
        Command::DpOracle(args) => cmd_dp_oracle(&load_config(args)?, &args.out),
        Command::TrainFsda(args) => cmd_train_fsda(&load_config(args)?, &args.out),
        Command::FitDemand { input, kind, out } => cmd_fit_demand(input, kind, out.as_deref()),
        Command::SearchBaseline(args) => cmd_search_baseline(&load_config(args)?, &args.out),
    }
}
