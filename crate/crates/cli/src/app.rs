//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use diffusion_auction::fixtures::{seven_buyer_tree, seven_buyer_tree_integer, SevenBuyer};
use diffusion_auction::multidemand::{MudanM, MudarM, MultiInstance, MultiMechanism, MultiProfile};
use diffusion_auction::oracle::{run_multi_suite, run_suite, IcCheck, InstanceParams, SuiteConfig, SuiteReport};
use diffusion_auction::{AuctionInstance, PriorityStrategy};
use serde_json::json;

use crate::config::{ExperimentConfig, SEED_ENV};
use crate::graph::{read_edge_list, SellerView};
use crate::mech::{run_truthful, Demand, MechanismKind, RunResult};
use crate::profiles::{align, read_profiles};
use crate::reduce::write_reduction;
use crate::sweep::{summarize, sweep, write_csv};

#[derive(Debug, Parser)]
#[command(name = "diffauc", version, about = "Multi-unit diffusion auctions on social networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one mechanism on one instance and print the outcome.
    Run(RunArgs),
    /// Check incentive and welfare properties on random small instances.
    Check(CheckArgs),
    /// Repeated runs over random sellers and valuations, as CSV.
    Sweep(SweepArgs),
    /// Write the single-demand chain reduction of a multi-demand instance.
    Reduce(ReduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fixture {
    /// The seven-buyer tree with values a=3 b=1 c=1 d=4 e=3.5 f=7 g=3.5.
    SevenBuyer,
    /// The same tree with d=6 e=4 g=5.
    SevenBuyerInteger,
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// Built-in instance instead of files.
    #[arg(long, conflicts_with_all = ["graph", "profiles", "seller"])]
    pub fixture: Option<Fixture>,
    /// Edge list, one `u v` pair per line.
    #[arg(long, requires_all = ["profiles", "seller", "items"])]
    pub graph: Option<PathBuf>,
    /// Add the reverse of every edge.
    #[arg(long)]
    pub undirected: bool,
    /// Valuations, `agent_id,v1[,v2,...]` per line.
    #[arg(long)]
    pub profiles: Option<PathBuf>,
    /// Label of the seller node; its out-neighbors hear about the sale.
    #[arg(long)]
    pub seller: Option<u64>,
    /// Number of items (defaults to 4 for fixtures).
    #[arg(short = 'm', long)]
    pub items: Option<usize>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, default_value = "mudan")]
    pub mechanism: MechanismKind,
    #[arg(long, default_value = "degree")]
    pub strategy: PriorityStrategy,
    #[arg(long, default_value = "single")]
    pub demand: Demand,
    /// Print the exploration steps.
    #[arg(long)]
    pub trace: bool,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IcArg {
    /// Every misreport.
    Full,
    /// Only reports below the true value or at least the m-th highest value.
    Mu,
    /// As `mu`, with reports equal to the bound excluded.
    MuOpen,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, default_value = "mudan")]
    pub mechanism: MechanismKind,
    #[arg(long, default_value = "degree")]
    pub strategy: PriorityStrategy,
    #[arg(long, default_value = "single")]
    pub demand: Demand,
    #[arg(long, default_value_t = 1000)]
    pub instances: usize,
    /// Defaults to $DIFFAUC_SEED, then 0.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Defaults to `mu` for mudar and `full` otherwise.
    #[arg(long)]
    pub ic: Option<IcArg>,
    #[arg(long, default_value_t = 7)]
    pub n_max: usize,
    #[arg(long, default_value_t = 3)]
    pub m_max: usize,
    /// Values are integers in 0..=ceiling.
    #[arg(long, default_value_t = 9)]
    pub ceiling: u32,
    #[arg(long, default_value_t = 0.3)]
    pub edge_prob: f64,
    /// Extra searches against randomly misreporting opponents, per instance.
    #[arg(long, default_value_t = 10)]
    pub spot_checks: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// `key = value` config file; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Extra `key=value` settings, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// `file:PATH`, `tree:N`, `pa:N:K` or `er:N:P`.
    #[arg(long)]
    pub graph: Option<String>,
    /// Comma-separated list.
    #[arg(long)]
    pub mechanism: Option<String>,
    /// Comma-separated list.
    #[arg(long)]
    pub strategy: Option<String>,
    /// `uniform`, `top_anchored` or `degroot` (or 1, 2, 3).
    #[arg(long)]
    pub model: Option<String>,
    #[arg(short = 'm', long)]
    pub items: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Add a runtime column. Output is then no longer reproducible.
    #[arg(long)]
    pub timing: bool,
    /// Print per-mechanism means to stderr.
    #[arg(long)]
    pub summary: bool,
    /// Print the resolved config and exit.
    #[arg(long)]
    pub print_config: bool,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub undirected: bool,
    #[arg(long)]
    pub profiles: PathBuf,
    #[arg(long)]
    pub seller: u64,
    #[arg(short = 'm', long)]
    pub items: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

/// Parses `args` and runs the command. Exit codes: 0 success, 1 property
/// violation found by `check`, 2 usage, input or runtime error.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run(a) => run_cmd(a).map(|_| ExitCode::SUCCESS),
        Command::Check(a) => check_cmd(a),
        Command::Sweep(a) => sweep_cmd(a).map(|_| ExitCode::SUCCESS),
        Command::Reduce(a) => reduce_cmd(a).map(|_| ExitCode::SUCCESS),
    }
}

fn env_seed() -> Result<u64> {
    Ok(ExperimentConfig::from_env()?.seed)
}

fn single_to_multi(inst: &AuctionInstance) -> MultiInstance {
    let profiles = inst
        .profiles()
        .iter()
        .map(|p| MultiProfile::new(vec![p.valuation], p.neighbors.iter().copied()))
        .collect();
    MultiInstance::new(inst.m(), inst.seller_neighbors().iter().copied(), profiles).expect("fixture is valid")
}

/// The instance and a display name per buyer.
pub fn load_instance(a: &InstanceArgs, demand: Demand) -> Result<(MultiInstance, Vec<String>)> {
    if let Some(f) = a.fixture {
        let m = a.items.unwrap_or(4);
        if m == 0 {
            bail!("m must be at least 1");
        }
        let inst = match f {
            Fixture::SevenBuyer => seven_buyer_tree(m),
            Fixture::SevenBuyerInteger => seven_buyer_tree_integer(m),
        };
        let names = SevenBuyer::ALL.iter().map(|b| b.name().to_string()).collect();
        return Ok((single_to_multi(&inst), names));
    }
    let (Some(graph), Some(profiles), Some(seller), Some(m)) = (&a.graph, &a.profiles, a.seller, a.items) else {
        bail!("give either --fixture or --graph, --profiles, --seller and -m");
    };
    let g = read_edge_list(graph, a.undirected)?;
    let node = g.node_of(seller).with_context(|| format!("seller {seller} is not in the graph"))?;
    let view = SellerView::new(&g, node);
    if view.n() == 0 {
        bail!("seller {seller} reaches no buyer");
    }
    let rows = read_profiles(profiles, demand == Demand::Multi)?;
    let wanted: Vec<u64> = view.buyers.iter().map(|&b| g.label(b)).collect();
    let values = align(&rows, g.labels(), &wanted)?;
    let inst = view.instance(m, values)?;
    Ok((inst, wanted.iter().map(u64::to_string).collect()))
}

fn slot_name(names: &[String], (i, j): (usize, usize), demand: Demand) -> String {
    match demand {
        Demand::Single => names[i].clone(),
        Demand::Multi => format!("{}.{}", names[i], j + 1),
    }
}

fn run_cmd(a: RunArgs) -> Result<()> {
    let (inst, names) = load_instance(&a.instance, a.demand)?;
    let r: RunResult = run_truthful(a.mechanism, a.strategy, a.demand, &inst)?;
    let out = io::stdout();
    let mut w = out.lock();
    if a.json {
        let buyers: Vec<_> = names
            .iter()
            .enumerate()
            .map(|(i, n)| json!({"buyer": n, "items": r.items[i], "payment": r.payments[i]}))
            .collect();
        let mut doc = json!({
            "mechanism": a.mechanism,
            "strategy": a.strategy.to_string(),
            "demand": a.demand,
            "m": inst.m(),
            "buyers": buyers,
            "winners": r.winners.iter().map(|&i| &names[i]).collect::<Vec<_>>(),
            "sw": r.social_welfare,
            "rv": r.revenue,
            "sw_opt": r.sw_opt,
        });
        if a.trace {
            let steps: Vec<_> = r
                .iterations
                .iter()
                .map(|s| {
                    json!({
                        "explored": s.explored.iter().map(|&x| slot_name(&names, x, a.demand)).collect::<Vec<_>>(),
                        "winner": slot_name(&names, s.winner, a.demand),
                        "price": s.price,
                    })
                })
                .collect();
            doc["trace"] = json!(steps);
        }
        serde_json::to_writer_pretty(&mut w, &doc)?;
        writeln!(w)?;
        return Ok(());
    }
    writeln!(
        w,
        "{} ({}), {} demand, m={}, {} buyers",
        a.mechanism,
        a.strategy,
        a.demand,
        inst.m(),
        inst.n()
    )?;
    if a.trace {
        for (k, s) in r.iterations.iter().enumerate() {
            let explored: Vec<String> = s.explored.iter().map(|&x| slot_name(&names, x, a.demand)).collect();
            writeln!(
                w,
                "  step {}: explored {{{}}} winner {} price {}",
                k + 1,
                explored.join(","),
                slot_name(&names, s.winner, a.demand),
                s.price
            )?;
        }
    }
    writeln!(w, "buyer\titems\tpayment")?;
    for (i, n) in names.iter().enumerate() {
        if r.items[i] > 0 || r.payments[i] != 0.0 {
            writeln!(w, "{n}\t{}\t{}", r.items[i], r.payments[i])?;
        }
    }
    writeln!(w, "SW {}  RV {}  SW_opt {}", r.social_welfare, r.revenue, r.sw_opt)?;
    Ok(())
}

fn check_cmd(a: CheckArgs) -> Result<ExitCode> {
    let ic = match a.ic.unwrap_or(if a.mechanism == MechanismKind::Mudar { IcArg::Mu } else { IcArg::Full }) {
        IcArg::Full => IcCheck::Full,
        IcArg::Mu => IcCheck::MuBounded,
        IcArg::MuOpen => IcCheck::MuBoundedOpen,
    };
    let cfg = SuiteConfig {
        instances: a.instances,
        params: InstanceParams {
            n_max: a.n_max,
            m_max: a.m_max,
            value_ceiling: a.ceiling,
            edge_prob: a.edge_prob,
        },
        seed: match a.seed {
            Some(s) => s,
            None => env_seed()?,
        },
        spot_checks: a.spot_checks,
        ic,
        ..Default::default()
    };
    if !(0.0..=1.0).contains(&cfg.params.edge_prob) || cfg.params.n_max == 0 || cfg.params.m_max == 0 {
        bail!("need n_max >= 1, m_max >= 1 and edge_prob in [0, 1]");
    }
    let report: SuiteReport = match a.demand {
        Demand::Single => run_suite(a.mechanism.single(a.strategy).as_ref(), &cfg)?,
        Demand::Multi => {
            let mech: Box<dyn MultiMechanism> = match a.mechanism {
                MechanismKind::Mudan => Box::new(MudanM { strategy: a.strategy }),
                MechanismKind::Mudar => Box::new(MudarM { strategy: a.strategy }),
                MechanismKind::Dnamu => bail!("dnamu is single-demand only"),
            };
            run_multi_suite(mech.as_ref(), &cfg)?
        }
    };
    let claimed = a.mechanism.claimed();
    let failed: Vec<_> = claimed.iter().filter(|&&p| report.count(p) > 0).collect();
    let out = io::stdout();
    let mut w = out.lock();
    if a.json {
        let doc = json!({
            "mechanism": a.mechanism,
            "strategy": a.strategy.to_string(),
            "demand": a.demand,
            "config": cfg,
            "claimed": claimed,
            "pass": failed.is_empty(),
            "report": report,
        });
        serde_json::to_writer_pretty(&mut w, &doc)?;
        writeln!(w)?;
    } else {
        writeln!(
            w,
            "{} ({}), {} demand: {} instances, {} deviations tried, seed {}",
            a.mechanism, a.strategy, a.demand, report.instances, report.deviations, cfg.seed
        )?;
        for &p in claimed {
            writeln!(w, "  {p}: {} failing instances", report.count(p))?;
        }
        for f in report.findings.iter().filter(|f| claimed.contains(&f.property)) {
            writeln!(w, "  [{}] instance {}: {}", f.property, f.instance, f.detail)?;
        }
        if let Some(r) = report.min_scaled_weak_ratio {
            writeln!(w, "  min m*SW/sw_wopt: {r}")?;
        }
    }
    Ok(if failed.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// Env default, then the config file, then `--set`, then the named flags.
pub fn resolve_config(a: &SweepArgs) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_env()?;
    if let Some(p) = &a.config {
        let text = std::fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display()))?;
        cfg.apply_text(&text).with_context(|| format!("in {}", p.display()))?;
    }
    for kv in &a.set {
        cfg.assign(kv)?;
    }
    let named = [
        ("graph", a.graph.clone()),
        ("mechanism", a.mechanism.clone()),
        ("strategy", a.strategy.clone()),
        ("model", a.model.clone()),
        ("m", a.items.map(|v| v.to_string())),
        ("trials", a.trials.map(|v| v.to_string())),
        ("seed", a.seed.map(|v| v.to_string())),
    ];
    for (k, v) in named {
        if let Some(v) = v {
            cfg.set(k, &v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sweep_cmd(a: SweepArgs) -> Result<()> {
    let cfg = resolve_config(&a)?;
    if a.print_config {
        print!("{}", cfg.to_kv());
        return Ok(());
    }
    log::info!("sweep: {} trials, seed {} ({SEED_ENV} sets the default)", cfg.trials, cfg.seed);
    let rows = sweep(&cfg, a.timing)?;
    match &a.out {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            write_csv(&cfg, &rows, a.timing, BufWriter::new(f))?;
        }
        None => write_csv(&cfg, &rows, a.timing, io::stdout().lock())?,
    }
    if a.summary {
        for s in summarize(&rows) {
            eprintln!(
                "{} {}: {} trials, mean SW {:.3} ({:.3} per item), mean RV {:.3}, mean SW_opt {:.3}",
                s.mechanism, s.strategy, s.trials, s.mean_sw, s.mean_sw_per_item, s.mean_rv, s.mean_sw_opt
            );
        }
    }
    Ok(())
}

fn reduce_cmd(a: ReduceArgs) -> Result<()> {
    let args = InstanceArgs {
        fixture: None,
        graph: Some(a.graph),
        undirected: a.undirected,
        profiles: Some(a.profiles),
        seller: Some(a.seller),
        items: Some(a.items),
    };
    let (inst, names) = load_instance(&args, Demand::Multi)?;
    let labels: Vec<u64> = names.iter().map(|n| n.parse().expect("file labels are numeric")).collect();
    let seller = write_reduction(&inst, &labels, &a.out_dir)?;
    println!(
        "{} buyers x {} items -> {} nodes in {}; seller label {seller}",
        inst.n(),
        inst.m(),
        inst.n() * inst.m(),
        a.out_dir.display()
    );
    Ok(())
}
