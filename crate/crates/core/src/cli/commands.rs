use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};

use crate::agent::{
    evaluate_policy, train_d3qn, train_rees, EpisodeLog, EpisodeResult, EvalReport, Policy,
    TrainConfig, TrainStatus,
};
use crate::cli::options::{
    merge, ConfigFile, EvalArgs, EvalMode, GenArgs, GreedyArgs, MinActuatorsArgs, TrainArgs,
    TrainMode,
};
use crate::cli::output::{joined, num, partial_path, write_atomic, write_partial, Table};
use crate::cli::{Cli, Command};
use crate::env::EpisodeConfig;
use crate::gen::{generate_dataset, load_dataset, save_dataset, Dataset, GenSpec};
use crate::model::{rms_gap, Instance};
use crate::nn::{Checkpoint, NetworkParams, OptimizerKind};
use crate::oracle::{binomial, exhaustive_select, greedy_select, EXHAUSTIVE_LIMIT};
use crate::seed;
use crate::stats::{mean, quartiles};

const DEFAULT_BUDGET: usize = 6;
const DEFAULT_EPISODES: usize = 2000;

struct RunContext {
    seed: u64,
    out_dir: PathBuf,
}

impl RunContext {
    fn out(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let ctx = RunContext {
        seed: cli.seed.or(file.seed).unwrap_or(0),
        out_dir: cli.out_dir.or(file.out_dir).unwrap_or_else(|| PathBuf::from(".")),
    };
    match &cli.command {
        Command::Gen(a) => cmd_gen(&merge(a, &file.gen, "gen")?, &ctx),
        Command::Greedy(a) => cmd_greedy(&merge(a, &file.greedy, "greedy")?, &ctx),
        Command::Train(a) => cmd_train(&merge(a, &file.train, "train")?, &ctx),
        Command::Eval(a) => cmd_eval(&merge(a, &file.eval, "eval")?, &ctx),
        Command::MinActuators(a) => {
            cmd_min_actuators(&merge(a, &file.min_actuators, "min_actuators")?, &ctx)
        }
    }
}

fn ensure_out_dir(ctx: &RunContext) -> Result<()> {
    std::fs::create_dir_all(&ctx.out_dir)
        .with_context(|| format!("creating output directory {}", ctx.out_dir.display()))
}

fn load(path: Option<&PathBuf>) -> Result<Vec<Instance>> {
    let path = path.context("--data is required")?;
    let ds = load_dataset(path).with_context(|| format!("loading dataset {}", path.display()))?;
    ensure!(!ds.instances.is_empty(), "dataset {} has no instances", path.display());
    let (n, m) = (ds.instances[0].n(), ds.instances[0].m());
    if let Some(i) = ds.instances.iter().position(|x| (x.n(), x.m()) != (n, m)) {
        bail!("instance {i} of {} is not {n}x{m} like the first", path.display());
    }
    Ok(ds.instances)
}

fn check_budget(budget: usize, m: usize) -> Result<usize> {
    ensure!(budget >= 1 && budget <= m, "budget must lie in 1..={m}, got {budget}");
    Ok(budget)
}

fn cmd_gen(args: &GenArgs, ctx: &RunContext) -> Result<()> {
    let d = GenSpec::default();
    let spec = GenSpec {
        n: args.n.unwrap_or(d.n),
        m: args.m.unwrap_or(d.m),
        force_bound: args.force_bound.unwrap_or(d.force_bound),
        smoothness: args.smoothness.unwrap_or(d.smoothness),
        noise_level: args.noise.unwrap_or(d.noise_level),
        deviation_scale: args.deviation_scale.unwrap_or(d.deviation_scale),
        seed: seed::derive(ctx.seed, "gen"),
    };
    spec.validate()?;
    let name = args.name.as_deref().unwrap_or("dataset");
    ensure_out_dir(ctx)?;
    let mut peaks = Vec::new();
    for (label, count) in [("train", args.train.unwrap_or(20)), ("test", args.test.unwrap_or(10))] {
        let instances = generate_dataset(&spec, label, count)?;
        peaks.extend(instances.iter().map(|i| i.psi().amax()));
        let path = ctx.out(&format!("{name}.{label}"));
        let ds = Dataset {
            gen_spec: Some(spec.clone()),
            instances,
        };
        let tmp = partial_path(&path);
        save_dataset(&tmp, &ds)?;
        std::fs::rename(&tmp, &path)?;
        println!("wrote {count} {label} instances to {}", path.display());
    }
    println!(
        "instances: {}  n = {}  m = {}  mean max|psi| = {}",
        peaks.len(),
        spec.n,
        spec.m,
        num(mean(&peaks))
    );
    Ok(())
}

fn cmd_greedy(args: &GreedyArgs, ctx: &RunContext) -> Result<()> {
    let instances = load(args.data.as_ref())?;
    let m = instances[0].m();
    let budget = check_budget(args.budget.unwrap_or(DEFAULT_BUDGET.min(m)), m)?;
    let exhaustive = !args.no_exhaustive && binomial(m, budget) <= EXHAUSTIVE_LIMIT;
    ensure_out_dir(ctx)?;
    let mut table = Table::new(&[
        "instance_id",
        "selected_sequence",
        "mg",
        "rmsg",
        "exhaustive_mg",
        "runtime_ms",
    ]);
    let (mut mgs, mut rmsgs, mut exh, mut times) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut worst: f64 = 1.0;
    for (i, inst) in instances.iter().enumerate() {
        let start = Instant::now();
        let g = greedy_select(inst, budget)?;
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        let rmsg = rms_gap(&g.solution.delta)?;
        let e = if exhaustive {
            let best = exhaustive_select(inst, budget)?.value();
            if best > 1e-12 {
                worst = worst.max(g.value() / best);
            }
            exh.push(best);
            num(best)
        } else {
            String::new()
        };
        mgs.push(g.value());
        rmsgs.push(rmsg);
        times.push(elapsed);
        table.row([
            i.to_string(),
            joined(&g.selected),
            num(g.value()),
            num(rmsg),
            e,
            if args.timing { format!("{elapsed:.3}") } else { String::new() },
        ]);
    }
    table.row([
        "#agg".into(),
        String::new(),
        num(mean(&mgs)),
        num(mean(&rmsgs)),
        if exhaustive { num(mean(&exh)) } else { String::new() },
        if args.timing { format!("{:.3}", mean(&times)) } else { String::new() },
    ]);
    let path = ctx.out("greedy.csv");
    write_atomic(&path, &table.into_string())?;
    println!("greedy M = {budget}: mean MG {}  mean RMSG {}", num(mean(&mgs)), num(mean(&rmsgs)));
    if exhaustive {
        println!("exhaustive mean MG {}  worst greedy/optimal {}", num(mean(&exh)), num(worst));
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn train_config(args: &TrainArgs, ctx: &RunContext, m: usize) -> Result<TrainConfig> {
    let d = TrainConfig::default();
    let budget = check_budget(args.budget.unwrap_or(d.budget.min(m)), m)?;
    let total_steps = match (args.steps, args.episodes) {
        (Some(s), _) => s,
        (None, Some(e)) => e * budget,
        (None, None) => DEFAULT_EPISODES * budget,
    };
    let config = TrainConfig {
        epsilon: args.epsilon.unwrap_or(d.epsilon),
        gamma: args.gamma.unwrap_or(d.gamma),
        replay_capacity: args.replay_capacity.unwrap_or(d.replay_capacity),
        batch_size: args.batch_size.unwrap_or(d.batch_size),
        target_sync_period: args.target_sync.unwrap_or(d.target_sync_period),
        warmup: args.warmup.unwrap_or(d.warmup),
        total_steps,
        budget,
        seed: seed::derive(ctx.seed, "train"),
        shift_augmentation: !args.no_augment,
        optimizer: args.lr.map_or(d.optimizer, OptimizerKind::adam),
        encoder_widths: args.encoder_widths.clone().unwrap_or(d.encoder_widths),
        head_widths: args.head_widths.clone().unwrap_or(d.head_widths),
        reward_widths: args.reward_widths.clone().unwrap_or(d.reward_widths),
    };
    config.validate(m)?;
    Ok(config)
}

fn log_table(log: &[EpisodeLog]) -> String {
    let mut t = Table::new(&["episode", "steps", "terminal_mg", "terminal_rmsg", "mean_loss", "epsilon"]);
    for e in log {
        t.row([
            e.episode.to_string(),
            e.steps.to_string(),
            num(e.terminal_mg),
            num(e.terminal_rmsg),
            e.mean_loss.map(num).unwrap_or_default(),
            num(e.epsilon),
        ]);
    }
    t.into_string()
}

fn cmd_train(args: &TrainArgs, ctx: &RunContext) -> Result<()> {
    let mode = args.mode.context("--mode is required (d3qn or rees)")?;
    let instances = load(args.data.as_ref())?;
    let config = train_config(args, ctx, instances[0].m())?;
    ensure_out_dir(ctx)?;
    let (network, log, status) = match mode {
        TrainMode::D3qn => {
            let out = train_d3qn(&instances, &config)?;
            (NetworkParams::D3qnDueling(out.params), out.log, out.status)
        }
        TrainMode::Rees => {
            let out = train_rees(&instances, &config)?;
            (NetworkParams::ReesReward(out.params), out.log, out.status)
        }
    };
    let ckpt_path = ctx.out(&format!("{}.checkpoint.json", mode.name()));
    let log_path = ctx.out(&format!("{}.train_log.csv", mode.name()));
    let checkpoint = Checkpoint::new(network);
    if let TrainStatus::Diverged { step, reason } = status {
        let kept = write_partial(&ckpt_path, &checkpoint.to_json()?)?;
        write_partial(&log_path, &log_table(&log))?;
        bail!(
            "training diverged at step {step}: {reason}; last finite parameters kept in {}",
            kept.display()
        );
    }
    write_atomic(&ckpt_path, &checkpoint.to_json()?)?;
    write_atomic(&log_path, &log_table(&log))?;
    let report = evaluate_policy(
        &policy_for(&checkpoint.network),
        &instances,
        EpisodeConfig::Budget { budget: config.budget },
    )?;
    println!(
        "trained {} for {} steps ({} episodes)",
        mode.name(),
        config.total_steps,
        log.len()
    );
    println!(
        "train set, M = {}: mean MG {}  mean RMSG {}",
        config.budget,
        num(report.mean_mg),
        num(report.mean_rmsg)
    );
    println!("wrote {} and {}", ckpt_path.display(), log_path.display());
    Ok(())
}

fn policy_for(network: &NetworkParams) -> Policy<'_> {
    match network {
        NetworkParams::D3qnDueling(q) => Policy::Scorer(q),
        NetworkParams::ReesReward(r) => Policy::Scorer(r),
    }
}

/// Loads and checks the checkpoint a learned mode needs; `None` for the oracle baselines.
fn load_network(
    mode: EvalMode,
    checkpoint: Option<&PathBuf>,
    ctx: &RunContext,
    instances: &[Instance],
) -> Result<Option<NetworkParams>> {
    let expected = match mode {
        EvalMode::D3qn => "d3qn_dueling",
        EvalMode::Rees => "rees_reward",
        EvalMode::GreedyOracle | EvalMode::Random => return Ok(None),
    };
    let path = checkpoint
        .cloned()
        .unwrap_or_else(|| ctx.out(&format!("{}.checkpoint.json", mode.name())));
    let ckpt = Checkpoint::load(&path).with_context(|| format!("loading checkpoint {}", path.display()))?;
    ensure!(
        ckpt.network.architecture() == expected,
        "checkpoint {} holds a {} network, but mode {} needs {expected}",
        path.display(),
        ckpt.network.architecture(),
        mode.name()
    );
    let dims = (instances[0].n(), instances[0].m());
    if ckpt.network.dims() != dims {
        return Err(crate::Error::Validation {
            field: "checkpoint".into(),
            message: format!(
                "network was built for n = {}, m = {} but the dataset has n = {}, m = {}",
                ckpt.network.dims().0,
                ckpt.network.dims().1,
                dims.0,
                dims.1
            ),
        }
        .into());
    }
    Ok(Some(ckpt.network))
}

fn make_policy<'a>(mode: EvalMode, network: Option<&'a NetworkParams>, ctx: &RunContext) -> Policy<'a> {
    match (mode, network) {
        (EvalMode::GreedyOracle, _) => Policy::GreedyOracle,
        (EvalMode::Random, _) => Policy::Random {
            seed: seed::derive(ctx.seed, "eval/random"),
        },
        (_, Some(net)) => policy_for(net),
        (_, None) => unreachable!("learned modes load a network"),
    }
}

fn check_limits(limits: &[f64]) -> Result<()> {
    ensure!(!limits.is_empty(), "at least one limit is required");
    for &l in limits {
        ensure!(l > 0.0 && l.is_finite(), "limits must be positive, got {l}");
    }
    Ok(())
}

fn episode_table(report: &EvalReport) -> String {
    let mut t = Table::new(&["instance_id", "selected_sequence", "forces", "count", "mg", "rmsg"]);
    for (i, e) in report.episodes.iter().enumerate() {
        t.row([
            i.to_string(),
            joined(&e.selected),
            joined(e.forces.values.iter().map(|&f| num(f))),
            e.count().to_string(),
            num(e.mg),
            num(e.rmsg),
        ]);
    }
    t.row([
        "#agg".into(),
        String::new(),
        String::new(),
        num(report.mean_count),
        num(report.mean_mg),
        num(report.mean_rmsg),
    ]);
    t.into_string()
}

/// Spec-limit sweep. Returns the per-instance table, the per-limit summary table and the number
/// of instances whose count increased with a larger limit.
fn limit_sweep(policy: &Policy<'_>, instances: &[Instance], limits: &[f64]) -> Result<(String, String, usize)> {
    let mut sorted = limits.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let mut rows = Table::new(&["limit", "instance_id", "count", "mg", "rmsg"]);
    let mut summary = Table::new(&["limit", "min", "q1", "median", "q3", "max", "mean_count", "mean_mg"]);
    let mut previous: Option<Vec<usize>> = None;
    let mut violations = 0;
    for &limit in &sorted {
        let report = evaluate_policy(policy, instances, EpisodeConfig::SpecLimit { limit_mg: limit })?;
        let counts: Vec<usize> = report.episodes.iter().map(EpisodeResult::count).collect();
        for (i, e) in report.episodes.iter().enumerate() {
            rows.row([num(limit), i.to_string(), e.count().to_string(), num(e.mg), num(e.rmsg)]);
        }
        let q = quartiles(&counts.iter().map(|&c| c as f64).collect::<Vec<_>>()).expect("non-empty");
        summary.row([
            num(limit),
            num(q.min),
            num(q.q1),
            num(q.median),
            num(q.q3),
            num(q.max),
            num(report.mean_count),
            num(report.mean_mg),
        ]);
        if let Some(prev) = &previous {
            violations += prev.iter().zip(&counts).filter(|(a, b)| b > a).count();
        }
        previous = Some(counts);
    }
    Ok((rows.into_string(), summary.into_string(), violations))
}

fn write_sweep(ctx: &RunContext, stem: &str, policy: &Policy<'_>, instances: &[Instance], limits: &[f64]) -> Result<()> {
    check_limits(limits)?;
    let (rows, summary, violations) = limit_sweep(policy, instances, limits)?;
    let rows_path = ctx.out(&format!("{stem}.csv"));
    let summary_path = ctx.out(&format!("{stem}_summary.csv"));
    write_atomic(&rows_path, &rows)?;
    write_atomic(&summary_path, &summary)?;
    print!("{summary}");
    println!("count increases with a larger limit: {violations}");
    println!("wrote {} and {}", rows_path.display(), summary_path.display());
    Ok(())
}

fn cmd_eval(args: &EvalArgs, ctx: &RunContext) -> Result<()> {
    let mode = args.mode.context("--mode is required")?;
    let instances = load(args.data.as_ref())?;
    let given = [args.budget.is_some(), args.limit.is_some(), args.limits.is_some()];
    ensure!(
        given.iter().filter(|&&g| g).count() <= 1,
        "--budget, --limit and --limits are mutually exclusive"
    );
    let network = load_network(mode, args.checkpoint.as_ref(), ctx, &instances)?;
    let policy = make_policy(mode, network.as_ref(), ctx);
    ensure_out_dir(ctx)?;
    if let Some(limits) = &args.limits {
        return write_sweep(ctx, &format!("eval_{}_limits", mode.name()), &policy, &instances, limits);
    }
    let m = instances[0].m();
    let config = match args.limit {
        Some(limit) => {
            check_limits(&[limit])?;
            EpisodeConfig::SpecLimit { limit_mg: limit }
        }
        None => EpisodeConfig::Budget {
            budget: check_budget(args.budget.unwrap_or(DEFAULT_BUDGET.min(m)), m)?,
        },
    };
    let report = evaluate_policy(&policy, &instances, config)?;
    let path = ctx.out(&format!("eval_{}.csv", mode.name()));
    write_atomic(&path, &episode_table(&report))?;
    println!(
        "{}: mean MG {}  mean RMSG {}  mean count {}",
        mode.name(),
        num(report.mean_mg),
        num(report.mean_rmsg),
        num(report.mean_count)
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_min_actuators(args: &MinActuatorsArgs, ctx: &RunContext) -> Result<()> {
    let mode = args.mode.context("--mode is required")?;
    let limits: Vec<f64> = match (&args.limits, args.limit) {
        (Some(_), Some(_)) => bail!("--limit and --limits are mutually exclusive"),
        (Some(l), None) => l.clone(),
        (None, Some(l)) => vec![l],
        (None, None) => bail!("--limit or --limits is required"),
    };
    let instances = load(args.data.as_ref())?;
    let network = load_network(mode, args.checkpoint.as_ref(), ctx, &instances)?;
    let policy = make_policy(mode, network.as_ref(), ctx);
    ensure_out_dir(ctx)?;
    write_sweep(ctx, &format!("min_actuators_{}", mode.name()), &policy, &instances, &limits)
}
