use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use multiunit::bayesian::{self, ValuationDistribution};
use multiunit::generators::{random_market, trial_rng};
use multiunit::instances::{self, InstanceId, InstanceParams};
use multiunit::market::{optimal_welfare, Market};
use multiunit::pricing::{self, SchemeId};
use multiunit::rational::{format_rational, parse_rational, Rational};
use multiunit::simulator::{self, best_response, PriceVector, PricesFile, SearchLimits, TieMode};
use multiunit::suites::{self, Suite, SuiteConfig};
use multiunit::valuations::ValuationClass;

#[derive(Parser)]
#[command(name = "multiunit", version, about = "Posted prices for multi-unit markets, computed and checked exactly")]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,
    #[command(flatten)]
    limits: LimitArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Args)]
struct LimitArgs {
    /// Cap on distinct agent valuations in adversarial search
    #[arg(long, global = true, default_value_t = SearchLimits::default().max_classes)]
    max_classes: usize,
    /// Cap on memoized search states
    #[arg(long, global = true, default_value_t = SearchLimits::default().max_states)]
    max_states: usize,
    /// Cap on enumerated arrival orders
    #[arg(long, global = true, default_value_t = SearchLimits::default().max_orders)]
    max_orders: usize,
}

impl LimitArgs {
    fn limits(&self) -> SearchLimits {
        SearchLimits { max_classes: self.max_classes, max_states: self.max_states, max_orders: self.max_orders }
    }
}

#[derive(Args)]
struct PriceArgs {
    /// Prices file: {"prices": [...]} or {"uniform": "p"}
    #[arg(short, long, conflicts_with = "uniform")]
    prices: Option<PathBuf>,
    /// Uniform price for every item
    #[arg(long)]
    uniform: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal welfare and a witness allocation
    Opt {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Valuation class of every agent and the marginal profile
    Classify {
        #[arg(short, long)]
        input: PathBuf,
    },
    /// Worst-case welfare over arrival orders and ties, with a witness
    Worst {
        #[arg(short, long)]
        input: PathBuf,
        #[command(flatten)]
        prices: PriceArgs,
        /// Fix the arrival order, e.g. 1,0,2
        #[arg(long)]
        order: Option<String>,
        /// Also run plain enumeration and compare
        #[arg(long)]
        naive: bool,
    },
    /// Replay one arrival order
    Simulate {
        #[arg(short, long)]
        input: PathBuf,
        #[command(flatten)]
        prices: PriceArgs,
        /// Arrival order, identity if absent
        #[arg(long)]
        order: Option<String>,
        /// adversarial, canonical, or explicit quantities like 2,1
        #[arg(long, default_value = "canonical")]
        ties: String,
    },
    /// Build and evaluate a pricing scheme
    Scheme {
        #[arg(long)]
        scheme: String,
        #[arg(short, long)]
        input: PathBuf,
        /// Arrival order for known-order
        #[arg(long)]
        order: Option<String>,
    },
    /// Run seeded verification suites
    Verify {
        /// Suite group, a scheme id, or `all`
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        trials: Option<usize>,
        /// Largest number of agents
        #[arg(long, visible_alias = "max-n")]
        n: Option<usize>,
        /// Largest number of items
        #[arg(long, visible_alias = "max-m")]
        m: Option<usize>,
        #[arg(long, default_value_t = SuiteConfig::default().seed)]
        seed: u64,
    },
    /// Named example and lower-bound instances
    Instances {
        #[command(subcommand)]
        command: InstancesCommand,
    },
    /// Random market of one valuation class
    Generate {
        #[arg(long, value_parser = parse_class)]
        class: ValuationClass,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Bayesian uniform price from a finite-support distribution
    Bayes {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        /// Closeness to XOS; omitted means the distribution must be XOS
        #[arg(long)]
        c: Option<String>,
        /// Enumerate the support instead of sampling
        #[arg(long)]
        exact: bool,
    },
}

#[derive(Args, Clone)]
struct InstanceArgs {
    id: String,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    eps: Option<String>,
}

#[derive(Subcommand)]
enum InstancesCommand {
    /// List instance ids
    List,
    /// Write the market (or distribution) JSON
    Emit {
        #[command(flatten)]
        args: InstanceArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check the instance's bound on its price grid (`all` for every instance)
    Verify {
        #[command(flatten)]
        args: InstanceArgs,
    },
}

type CliResult<T> = Result<T, String>;

fn parse_class(s: &str) -> Result<ValuationClass, String> {
    ValuationClass::ALL
        .into_iter()
        .find(|c| c.name() == s)
        .ok_or_else(|| format!("unknown class `{s}`"))
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_market(path: &Path) -> CliResult<Market> {
    Market::from_json(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_prices(args: &PriceArgs, m: usize) -> CliResult<PriceVector> {
    let file = match (&args.prices, &args.uniform) {
        (Some(path), _) => serde_json::from_str::<PricesFile>(&read(path)?).map_err(|e| format!("{}: {e}", path.display()))?,
        (None, Some(p)) => PricesFile::Uniform { uniform: parse_rational(p).map_err(|e| e.to_string())? },
        (None, None) => return Err("either --prices or --uniform is required".into()),
    };
    file.resolve(m).map_err(|e| e.to_string())
}

fn parse_list(text: &str) -> CliResult<Vec<usize>> {
    text.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.trim().parse::<usize>().map_err(|e| format!("`{s}`: {e}")))
        .collect()
}

fn emit<T: Serialize>(format: Format, value: &T, table: impl FnOnce() -> String) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(value).expect("serializable")),
        Format::Table => print!("{}", table()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(false)` means a check failed.
fn run(cli: &Cli) -> CliResult<bool> {
    let limits = cli.limits.limits();
    let format = cli.format;
    match &cli.command {
        Command::Opt { input } => {
            let market = load_market(input)?;
            let (opt, allocation) = optimal_welfare(&market);
            #[derive(Serialize)]
            struct Out<'a> {
                opt: String,
                allocation: &'a [usize],
            }
            emit(format, &Out { opt: format_rational(&opt), allocation: &allocation.quantities }, || {
                format!("{}\nallocation {:?}\n", format_rational(&opt), allocation.quantities)
            });
            Ok(true)
        }
        Command::Classify { input } => {
            let market = load_market(input)?;
            let classes: Vec<ValuationClass> = market.agents().iter().map(|v| v.classify()).collect();
            let profile = market.marginal_profile().ok();
            #[derive(Serialize)]
            struct Out<'a> {
                market: ValuationClass,
                agents: &'a [ValuationClass],
                profile: Option<&'a multiunit::market::MarginalProfile>,
            }
            emit(format, &Out { market: market.class(), agents: &classes, profile: profile.as_ref() }, || {
                let mut s = format!("market {}\n", market.class());
                for (i, c) in classes.iter().enumerate() {
                    s += &format!("agent {i} {c}\n");
                }
                if let Some(p) = &profile {
                    s += &format!(
                        "V {}\ndelta {} epsilon {} b {} m' {}\n",
                        p.values.iter().map(format_rational).collect::<Vec<_>>().join(" "),
                        format_rational(&p.delta),
                        format_rational(&p.epsilon),
                        format_rational(&p.b),
                        p.m_prime
                    );
                }
                s
            });
            Ok(true)
        }
        Command::Worst { input, prices, order, naive } => {
            let market = load_market(input)?;
            let prices = load_prices(prices, market.m())?;
            let result = match order {
                Some(order) => simulator::worst_case_fixed_order(&market, &prices, &parse_list(order)?),
                None => simulator::worst_case_welfare_with(&market, &prices, limits),
            }
            .map_err(|e| e.to_string())?;
            let naive_value = if *naive {
                Some(simulator::worst_case_naive(&market, &prices).map_err(|e| e.to_string())?)
            } else {
                None
            };
            let agree = naive_value.as_ref().is_none_or(|v| *v == result.welfare);
            #[derive(Serialize)]
            struct Out<'a> {
                #[serde(flatten)]
                result: &'a simulator::WorstCaseResult,
                naive: Option<String>,
                agree: bool,
            }
            emit(format, &Out { result: &result, naive: naive_value.as_ref().map(format_rational), agree }, || {
                let mut s = format!(
                    "{}\norder {:?}\nties {:?}\nstates {}\n",
                    format_rational(&result.welfare),
                    result.order,
                    result.ties,
                    result.states
                );
                if let Some(v) = &naive_value {
                    s += &format!("naive {} ({})\n", format_rational(v), if agree { "agree" } else { "MISMATCH" });
                }
                s
            });
            Ok(agree)
        }
        Command::Simulate { input, prices, order, ties } => {
            let market = load_market(input)?;
            let prices = load_prices(prices, market.m())?;
            let order = match order {
                Some(o) => parse_list(o)?,
                None => (0..market.n()).collect(),
            };
            let ties = match ties.as_str() {
                "adversarial" => simulator::worst_case_fixed_order(&market, &prices, &order).map_err(|e| e.to_string())?.ties,
                "canonical" => canonical_ties(&market, &prices, &order),
                list => parse_list(list)?,
            };
            let outcome = simulator::simulate(&market, &prices, &order, &ties).map_err(|e| e.to_string())?;
            emit(format, &outcome, || {
                let mut s = format!("welfare {}\nrevenue {}\n", format_rational(&outcome.welfare), format_rational(&outcome.revenue));
                for p in &outcome.purchases {
                    s += &format!("agent {} buys {} for {}\n", p.agent, p.quantity, format_rational(&p.paid));
                }
                s
            });
            Ok(true)
        }
        Command::Scheme { scheme, input, order } => {
            let scheme: SchemeId = scheme.parse().map_err(|e: pricing::PricingError| e.to_string())?;
            let market = load_market(input)?;
            let order = order.as_deref().map(parse_list).transpose()?;
            let result = pricing::run_scheme(scheme, &market, order.as_deref(), limits).map_err(|e| e.to_string())?;
            let ok = result.meets_guarantee();
            emit(format, &result, || {
                let mut s = format!(
                    "scheme {}\nOPT {}\nguarantee {}\n",
                    result.scheme,
                    format_rational(&result.opt),
                    format_rational(&result.guarantee)
                );
                for (i, c) in result.candidates.iter().enumerate() {
                    s += &format!(
                        "{} {:<36} {:<24} welfare {}\n",
                        if i == result.chosen { "*" } else { " " },
                        c.label,
                        c.prices.to_string(),
                        format_rational(&c.result.welfare)
                    );
                }
                s += &format!("welfare {} ({})\n", format_rational(result.welfare()), if ok { "meets guarantee" } else { "BELOW GUARANTEE" });
                s
            });
            Ok(ok)
        }
        Command::Verify { suite, trials, n, m, seed } => {
            let config = SuiteConfig { seed: *seed, trials: *trials, max_n: *n, max_m: *m, limits };
            let reports: Vec<suites::SuiteReport> = if suite == "all" {
                Suite::ALL.iter().map(|s| suites::run_suite(*s, &config)).collect()
            } else if let Ok(s) = suite.parse::<Suite>() {
                vec![suites::run_suite(s, &config)]
            } else {
                let scheme: SchemeId = suite.parse().map_err(|_| format!("unknown suite `{suite}`"))?;
                vec![suites::run_scheme_suite(scheme, &config)]
            };
            let ok = reports.iter().all(|r| r.pass());
            emit(format, &reports, || {
                let mut s = format!("seed {seed} trials {trials:?} n {n:?} m {m:?}\n");
                for r in &reports {
                    s += &format!("{:<16} {:>4}/{:<4} {}\n", r.suite.to_string(), r.passed(), r.total(), if r.pass() { "pass" } else { "FAIL" });
                    for c in r.checks.iter().filter(|c| !c.pass) {
                        s += &format!("  {}: {}\n", c.label, c.detail);
                    }
                }
                s
            });
            Ok(ok)
        }
        Command::Instances { command } => instances_command(command, format, limits),
        Command::Generate { class, n, m, seed } => {
            let market = random_market(&mut trial_rng(*seed, 0), *class, *n, *m);
            println!("{}", market.to_json());
            Ok(true)
        }
        Command::Bayes { input, samples, seed, c, exact } => {
            let text = read(input)?;
            let dist: ValuationDistribution = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", input.display()))?;
            let c = c.as_deref().map(parse_rational).transpose().map_err(|e| e.to_string())?;
            #[derive(Serialize)]
            struct Exact {
                prices: PriceVector,
                expected_opt: String,
                expected_welfare: String,
            }
            if *exact {
                let (prices, opt, welfare) = match &c {
                    Some(c) => bayesian::exact_c_close(&dist, c, 1 << 16, limits),
                    None => bayesian::exact_uniform_xos(&dist, 1 << 16, limits),
                }
                .map_err(|e| e.to_string())?;
                let out = Exact { prices, expected_opt: format_rational(&opt), expected_welfare: format_rational(&welfare) };
                emit(format, &out, || {
                    format!("price {}\nE[OPT] {}\nE[welfare] {}\n", out.prices, out.expected_opt, out.expected_welfare)
                });
                return Ok(true);
            }
            let (prices, estimate) = match &c {
                Some(c) => bayesian::bayes_prices_c_close(&dist, c, *samples, *seed, limits),
                None => bayesian::bayes_uniform_xos(&dist, *samples, *seed, limits),
            }
            .map_err(|e| e.to_string())?;
            #[derive(Serialize)]
            struct Out<'a> {
                prices: &'a PriceVector,
                estimate: &'a bayesian::BayesEstimate,
            }
            emit(format, &Out { prices: &prices, estimate: &estimate }, || {
                format!(
                    "seed {} samples {}\nprice {}\nE[OPT] ~ {} (se {:.4})\nE[welfare] ~ {} (se {:.4})\n",
                    estimate.seed,
                    estimate.samples,
                    prices,
                    format_rational(&estimate.expected_opt),
                    estimate.opt_stderr,
                    format_rational(&estimate.expected_welfare),
                    estimate.welfare_stderr
                )
            });
            Ok(true)
        }
    }
}

/// Each agent takes the largest utility-maximizing quantity.
fn canonical_ties(market: &Market, prices: &PriceVector, order: &[usize]) -> Vec<usize> {
    let mut remaining: Vec<Rational> = prices.prices().to_vec();
    let mut ties = Vec::with_capacity(order.len());
    for &agent in order {
        if agent >= market.n() {
            break;
        }
        let k = best_response(market.agent(agent), &remaining, TieMode::Canonical)[0];
        remaining.drain(..k);
        ties.push(k);
    }
    ties
}

fn instance_params(args: &InstanceArgs) -> CliResult<InstanceParams> {
    Ok(InstanceParams {
        m: args.m,
        n: args.n,
        l: args.l,
        epsilon: args.eps.as_deref().map(parse_rational).transpose().map_err(|e| e.to_string())?,
    })
}

fn instances_command(command: &InstancesCommand, format: Format, limits: SearchLimits) -> CliResult<bool> {
    match command {
        InstancesCommand::List => {
            #[derive(Serialize)]
            struct Row {
                id: &'static str,
                summary: &'static str,
            }
            let rows: Vec<Row> = InstanceId::ALL.iter().map(|id| Row { id: id.as_str(), summary: id.summary() }).collect();
            emit(format, &rows, || rows.iter().map(|r| format!("{:<24} {}\n", r.id, r.summary)).collect());
            Ok(true)
        }
        InstancesCommand::Emit { args, output } => {
            let id: InstanceId = args.id.parse().map_err(|e: instances::InstanceError| e.to_string())?;
            let inst = instances::generate(id, &instance_params(args)?).map_err(|e| e.to_string())?;
            let json = inst.to_json();
            match output {
                Some(path) => fs::write(path, json + "\n").map_err(|e| format!("{}: {e}", path.display()))?,
                None => println!("{json}"),
            }
            Ok(true)
        }
        InstancesCommand::Verify { args } => {
            let ids: Vec<InstanceId> = if args.id == "all" {
                InstanceId::ALL.to_vec()
            } else {
                vec![args.id.parse().map_err(|e: instances::InstanceError| e.to_string())?]
            };
            let params = instance_params(args)?;
            let mut reports = Vec::new();
            for id in ids {
                let inst = instances::generate(id, &params).map_err(|e| e.to_string())?;
                reports.push(instances::verify_bound(&inst, limits).map_err(|e| e.to_string())?);
            }
            let ok = reports.iter().all(|r| r.pass);
            emit(format, &reports, || {
                let mut s = String::new();
                for r in &reports {
                    s += &format!(
                        "{:<24} {:<14} OPT {:<10} bound {:.6} regions {:>4} max ratio {:.6} {}\n",
                        r.id.as_str(),
                        r.kind.to_string(),
                        short(&r.opt),
                        multiunit::rational::to_f64(&r.bound),
                        r.regions.len(),
                        r.max_ratio,
                        if r.pass { "pass" } else { "FAIL" }
                    );
                    for f in r.failures() {
                        s += &format!("  {f}\n");
                    }
                }
                s
            });
            Ok(ok)
        }
    }
}

fn short(x: &Rational) -> String {
    let s = format_rational(x);
    if s.len() > 10 {
        format!("{:.4}", multiunit::rational::to_f64(x))
    } else {
        s
    }
}
