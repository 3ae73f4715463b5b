//! Seeded randomized verification suites; each check compares a scheme or
//! search result against its exact claim.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Zero;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bayesian::{self, AgentDistribution, SupportPoint, ValuationDistribution};
use crate::generators::{random_identical_pair, random_market, random_order, random_prices, random_valuation, trial_rng};
use crate::instances::{self, InstanceId, InstanceParams};
use crate::market::{optimal_welfare, Market};
use crate::pricing::{self, SchemeId};
use crate::rational::{format_rational, from_usize, int, rat, Rational};
use crate::simulator::{self, best_response, PriceVector, SearchLimits, TieMode};
use crate::valuations::{closeness_factor, SymmetricValuation, ValuationClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Oracle,
    #[serde(rename = "submod23")]
    Submod23,
    #[serde(rename = "submod57")]
    Submod57,
    Uniform,
    Optimal,
    #[serde(rename = "subadd-2iden")]
    Subadd2Iden,
    General,
    Counterexamples,
    Envelopes,
    Bayesian,
    Examples,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Oracle,
        Suite::Submod23,
        Suite::Submod57,
        Suite::Uniform,
        Suite::Optimal,
        Suite::Subadd2Iden,
        Suite::General,
        Suite::Counterexamples,
        Suite::Envelopes,
        Suite::Bayesian,
        Suite::Examples,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Oracle => "oracle",
            Suite::Submod23 => "submod23",
            Suite::Submod57 => "submod57",
            Suite::Uniform => "uniform",
            Suite::Optimal => "optimal",
            Suite::Subadd2Iden => "subadd-2iden",
            Suite::General => "general",
            Suite::Counterexamples => "counterexamples",
            Suite::Envelopes => "envelopes",
            Suite::Bayesian => "bayesian",
            Suite::Examples => "examples",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown suite `{0}`")]
pub struct UnknownSuite(pub String);

impl FromStr for Suite {
    type Err = UnknownSuite;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| UnknownSuite(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub label: String,
    pub pass: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(label: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        CheckResult { label: label.into(), pass, detail: detail.into() }
    }

    fn error(label: impl Into<String>, err: impl fmt::Display) -> Self {
        CheckResult::new(label, false, format!("error: {err}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.pass).count()
    }

    pub fn total(&self) -> usize {
        self.checks.len()
    }

    pub fn pass(&self) -> bool {
        self.passed() == self.total()
    }
}

/// Trial counts and sizes; `None` keeps each sub-check's default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: Option<usize>,
    pub max_n: Option<usize>,
    pub max_m: Option<usize>,
    pub limits: SearchLimits,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 2024, trials: None, max_n: None, max_m: None, limits: SearchLimits::default() }
    }
}

impl SuiteConfig {
    fn trials(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    fn n(&self, default: usize) -> usize {
        self.max_n.unwrap_or(default).max(1)
    }

    fn m(&self, default: usize) -> usize {
        self.max_m.unwrap_or(default).max(1)
    }
}

pub fn run_suite(suite: Suite, config: &SuiteConfig) -> SuiteReport {
    let schemes: &[SchemeId] = match suite {
        Suite::Submod23 => &[SchemeId::Submod23],
        Suite::Submod57 => &[SchemeId::Submod57],
        Suite::Uniform => &[SchemeId::UniformHalf, SchemeId::Subadd13],
        Suite::Optimal => &[SchemeId::KnownOrder, SchemeId::DynamicSubmod],
        Suite::Subadd2Iden => &[SchemeId::Subadd2Iden],
        Suite::General => &[SchemeId::General1m, SchemeId::GeneralBestOrder],
        _ => &[],
    };
    let checks = match suite {
        Suite::Oracle => oracle(config),
        Suite::Counterexamples => counterexamples(config),
        Suite::Envelopes => envelopes(config),
        Suite::Bayesian => bayes(config),
        Suite::Examples => examples(),
        _ => schemes.iter().flat_map(|&s| scheme_checks(s, config)).collect(),
    };
    SuiteReport { suite, seed: config.seed, checks }
}

/// The group a scheme's trials belong to.
pub fn suite_of(scheme: SchemeId) -> Suite {
    match scheme {
        SchemeId::Submod23 => Suite::Submod23,
        SchemeId::Submod57 => Suite::Submod57,
        SchemeId::UniformHalf | SchemeId::Subadd13 => Suite::Uniform,
        SchemeId::KnownOrder | SchemeId::DynamicSubmod => Suite::Optimal,
        SchemeId::Subadd2Iden => Suite::Subadd2Iden,
        SchemeId::General1m | SchemeId::GeneralBestOrder => Suite::General,
    }
}

/// Randomized trials of a single scheme, reported under its group.
pub fn run_scheme_suite(scheme: SchemeId, config: &SuiteConfig) -> SuiteReport {
    SuiteReport { suite: suite_of(scheme), seed: config.seed, checks: scheme_checks(scheme, config) }
}

fn scheme_checks(scheme: SchemeId, config: &SuiteConfig) -> Vec<CheckResult> {
    use ValuationClass::*;
    match scheme {
        SchemeId::Submod23 => scheme_trials(config, scheme, Submodular, 200, 6, 1..=config.m(10)),
        SchemeId::Submod57 => scheme_trials(config, scheme, Submodular, 200, 6, 7..=config.m(10).max(7)),
        SchemeId::UniformHalf => scheme_trials(config, scheme, Submodular, 200, 6, 1..=config.m(10)),
        SchemeId::Subadd13 => scheme_trials(config, scheme, Subadditive, 200, 4, 1..=config.m(8)),
        SchemeId::KnownOrder => scheme_trials(config, scheme, Submodular, 100, 6, 1..=config.m(10)),
        SchemeId::DynamicSubmod => scheme_trials(config, scheme, Submodular, 100, 5, 1..=config.m(10)),
        SchemeId::Subadd2Iden => scheme_trials(config, scheme, Subadditive, 200, 2, 1..=config.m(10)),
        SchemeId::General1m => scheme_trials(config, scheme, General, 200, 6, 1..=config.m(10)),
        SchemeId::GeneralBestOrder => scheme_trials(config, scheme, General, 200, 4, 1..=config.m(6)),
    }
}

/// Memoized worst case against plain enumeration of orders and ties.
fn oracle(config: &SuiteConfig) -> Vec<CheckResult> {
    let (max_n, max_m) = (config.n(5), config.m(6));
    (0..config.trials(100) as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(config.seed, t);
            let class = ValuationClass::ALL[t as usize % ValuationClass::ALL.len()];
            let (n, m) = (rng.random_range(1..=max_n), rng.random_range(1..=max_m));
            let market = random_market(&mut rng, class, n, m);
            let prices = random_prices(&mut rng, m);
            let label = format!("oracle trial {t} ({class}, n={n}, m={m})");
            let fast = simulator::worst_case_welfare_with(&market, &prices, config.limits);
            let slow = simulator::worst_case_naive(&market, &prices);
            match (fast, slow) {
                (Ok(fast), Ok(slow)) => CheckResult::new(
                    label,
                    fast.welfare == slow,
                    format!("memoized {} vs naive {}", format_rational(&fast.welfare), format_rational(&slow)),
                ),
                (Err(e), _) | (_, Err(e)) => CheckResult::error(label, e),
            }
        })
        .collect()
}

fn scheme_trials(
    config: &SuiteConfig,
    scheme: SchemeId,
    class: ValuationClass,
    default_trials: usize,
    default_n: usize,
    m_range: std::ops::RangeInclusive<usize>,
) -> Vec<CheckResult> {
    let max_n = if scheme == SchemeId::Subadd2Iden { 2 } else { config.n(default_n) };
    (0..config.trials(default_trials) as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(config.seed ^ scheme_salt(scheme), t);
            let m = rng.random_range(m_range.clone());
            let market = if scheme == SchemeId::Subadd2Iden {
                random_identical_pair(&mut rng, m)
            } else {
                let n = rng.random_range(1..=max_n);
                random_market(&mut rng, class, n, m)
            };
            let order = random_order(&mut rng, market.n());
            let label = format!("{scheme} trial {t} (n={}, m={m})", market.n());
            match pricing::run_scheme(scheme, &market, Some(&order), config.limits) {
                Ok(result) => {
                    let exact = matches!(scheme, SchemeId::KnownOrder | SchemeId::DynamicSubmod);
                    let pass = if exact { *result.welfare() == result.opt } else { result.meets_guarantee() };
                    CheckResult::new(
                        label,
                        pass,
                        format!(
                            "welfare {} {} {} * OPT {}",
                            format_rational(result.welfare()),
                            if exact { "==" } else { ">=" },
                            format_rational(&result.guarantee),
                            format_rational(&result.opt)
                        ),
                    )
                }
                Err(e) => CheckResult::error(label, e),
            }
        })
        .collect()
}

fn scheme_salt(scheme: SchemeId) -> u64 {
    SchemeId::ALL.iter().position(|&s| s == scheme).expect("listed") as u64 * 0x9E37_79B9
}

fn counterexamples(config: &SuiteConfig) -> Vec<CheckResult> {
    InstanceId::ALL
        .into_iter()
        .map(|id| {
            let label = format!("instance {id}");
            match instances::generate(id, &InstanceParams::default()).and_then(|i| instances::verify_bound(&i, config.limits)) {
                Ok(report) => {
                    let failures: Vec<String> = report.failures().collect();
                    CheckResult::new(
                        label,
                        report.pass,
                        if failures.is_empty() {
                            format!("{} regions, max ratio {:.4}", report.regions.len(), report.max_ratio)
                        } else {
                            failures.join("; ")
                        },
                    )
                }
                Err(e) => CheckResult::error(label, e),
            }
        })
        .collect()
}

/// Checks one valuation's envelopes: class, dominance, idempotence, the
/// factor-2 closeness, and minimality against scaled random class members.
pub fn envelope_checks<R: Rng + ?Sized>(rng: &mut R, v: &SymmetricValuation) -> Result<(), String> {
    let pairs = [
        (v.minimal_xos_envelope(), ValuationClass::Xos),
        (v.minimal_submodular_envelope(), ValuationClass::Submodular),
    ];
    for (env, class) in pairs {
        if !env.is_in_class(class) {
            return Err(format!("{class} envelope outside its class"));
        }
        if !env.dominates(v) {
            return Err(format!("{class} envelope below v"));
        }
        let again = match class {
            ValuationClass::Xos => env.minimal_xos_envelope(),
            _ => env.minimal_submodular_envelope(),
        };
        if again != env {
            return Err(format!("{class} envelope not idempotent"));
        }
        if v.is_subadditive() {
            let factor = closeness_factor(v, &env).map_err(|e| e.to_string())?;
            if factor > int(2) {
                return Err(format!("{class} closeness {} above 2", format_rational(&factor)));
            }
        }
        for _ in 0..8 {
            let w = random_valuation(rng, class, v.m());
            let Some(scale) = (1..=v.m())
                .filter(|&i| v.value(i) > &int(0))
                .map(|i| (!w.value(i).is_zero()).then(|| v.value(i) / w.value(i)))
                .collect::<Option<Vec<_>>>()
                .and_then(|r| r.into_iter().max())
            else {
                continue;
            };
            let upper = w.scaled(&scale);
            if upper.dominates(v) && !upper.dominates(&env) {
                return Err(format!("{class} envelope not minimal"));
            }
        }
    }
    Ok(())
}

fn envelopes(config: &SuiteConfig) -> Vec<CheckResult> {
    let max_m = config.m(10);
    let mut checks: Vec<CheckResult> = (0..config.trials(200) as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(config.seed ^ 0xE1, t);
            let class = if t % 2 == 0 { ValuationClass::Subadditive } else { ValuationClass::Xos };
            let m = rng.random_range(1..=max_m);
            let v = random_valuation(&mut rng, class, m);
            let label = format!("envelope trial {t} ({class}, m={m})");
            let result = envelope_checks(&mut rng, &v);
            match result {
                Ok(()) => CheckResult::new(label, true, "ok"),
                Err(e) => CheckResult::new(label, false, e),
            }
        })
        .collect();
    for id in [InstanceId::EnvelopeTightXos, InstanceId::EnvelopeTightSubadd] {
        let label = format!("tightness {id}");
        checks.push(
            match instances::generate(id, &InstanceParams::default()).and_then(|i| instances::verify_bound(&i, config.limits)) {
                Ok(r) => CheckResult::new(label, r.pass, r.checks.iter().map(|c| c.detail.clone()).collect::<Vec<_>>().join("; ")),
                Err(e) => CheckResult::error(label, e),
            },
        );
    }
    checks
}

/// A random product distribution with at most four profiles.
pub fn small_distribution<R: Rng + ?Sized>(rng: &mut R, class: ValuationClass, m: usize) -> ValuationDistribution {
    let sizes: &[usize] = match rng.random_range(0..4) {
        0 => &[4],
        1 => &[2, 2],
        2 => &[2, 1],
        _ => &[1, 2, 2],
    };
    let agents = sizes
        .iter()
        .map(|&k| {
            let weights: Vec<i64> = (0..k).map(|_| rng.random_range(1..=3)).collect();
            let total: i64 = weights.iter().sum();
            AgentDistribution {
                support: weights
                    .iter()
                    .map(|&w| SupportPoint { prob: rat(w, total), valuation: random_valuation(rng, class, m) })
                    .collect(),
            }
        })
        .collect();
    ValuationDistribution::new(agents).expect("probabilities sum to one")
}

fn bayes(config: &SuiteConfig) -> Vec<CheckResult> {
    let max_m = config.m(6);
    let limits = config.limits;
    let trials = config.trials(200);
    let mut checks: Vec<CheckResult> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(config.seed ^ 0xBA, t);
            let m = rng.random_range(1..=max_m);
            let dist = small_distribution(&mut rng, ValuationClass::Xos, m);
            let label = format!("xos distribution {t} (n={}, m={m})", dist.n());
            match bayesian::exact_uniform_xos(&dist, 16, limits) {
                Ok((_, opt, welfare)) => CheckResult::new(
                    label,
                    int(2) * &welfare >= opt,
                    format!("E[welfare] {} >= E[OPT]/2 with E[OPT] {}", format_rational(&welfare), format_rational(&opt)),
                ),
                Err(e) => CheckResult::error(label, e),
            }
        })
        .collect();
    checks.extend((0..(trials / 4).max(1) as u64).into_par_iter().map(|t| {
        let mut rng = trial_rng(config.seed ^ 0x5A, t);
        let (n, m) = (rng.random_range(1..=3), rng.random_range(1..=max_m));
        let market = random_market(&mut rng, ValuationClass::Subadditive, n, m);
        let dist = ValuationDistribution::point_mass(&market);
        let label = format!("subadditive point mass {t} (n={n}, m={m})");
        match bayesian::exact_c_close(&dist, &int(2), 1, limits) {
            Ok((_, opt, welfare)) => CheckResult::new(
                label,
                int(4) * &welfare >= opt,
                format!("welfare {} >= OPT/4 with OPT {}", format_rational(&welfare), format_rational(&opt)),
            ),
            Err(e) => CheckResult::error(label, e),
        }
    }).collect::<Vec<_>>());
    checks.extend((0..(trials / 20).max(1) as u64).map(|t| {
        let mut rng = trial_rng(config.seed ^ 0x3C, t);
        let m = rng.random_range(1..=max_m.min(4));
        let dist = small_distribution(&mut rng, ValuationClass::Xos, m);
        let label = format!("monte carlo reproduces enumeration {t}");
        match monte_carlo_matches(&dist, 256, config.seed.wrapping_add(t), limits) {
            Ok(detail) => CheckResult::new(label, true, detail),
            Err(detail) => CheckResult::new(label, false, detail),
        }
    }));
    checks
}

/// Reproducibility across runs and thread counts, exact agreement for point
/// masses, and sample means equal to the enumerated per-profile values
/// weighted by empirical frequencies.
pub fn monte_carlo_matches(
    dist: &ValuationDistribution,
    samples: usize,
    seed: u64,
    limits: SearchLimits,
) -> Result<String, String> {
    let err = |e: bayesian::BayesError| e.to_string();
    let first = bayesian::bayes_uniform_xos(dist, samples, seed, limits).map_err(err)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    let single = pool.install(|| bayesian::bayes_uniform_xos(dist, samples, seed, limits)).map_err(err)?;
    if first != single {
        return Err("estimates differ between thread counts".into());
    }
    let (prices, estimate) = first;
    let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
    for i in 0..samples as u64 {
        *counts.entry(dist.sample_indices(seed, i)).or_default() += 1;
    }
    if counts.len() as u128 != dist.profile_count() {
        return Err(format!("only {} of {} profiles sampled", counts.len(), dist.profile_count()));
    }
    let total = from_usize(samples);
    let mut reweighted = Rational::zero();
    for (indices, count) in &counts {
        reweighted += from_usize(*count) * optimal_welfare(&dist.market_from_indices(indices)).0 / &total;
    }
    if reweighted != estimate.expected_opt {
        return Err("sample mean of OPT differs from reweighted enumeration".into());
    }
    let mut fresh: HashMap<Vec<usize>, usize> = HashMap::new();
    for i in samples as u64..2 * samples as u64 {
        *fresh.entry(dist.sample_indices(seed, i)).or_default() += 1;
    }
    let mut welfare = Rational::zero();
    for (indices, count) in &fresh {
        let market = dist.market_from_indices(indices);
        let w = simulator::worst_case_welfare_with(&market, &prices, limits).map_err(|e| e.to_string())?.welfare;
        welfare += from_usize(*count) * w / &total;
    }
    if welfare != estimate.expected_welfare {
        return Err("sample mean of welfare differs from reweighted enumeration".into());
    }
    Ok(format!(
        "E[OPT] {} and E[welfare] {} over {samples} draws",
        format_rational(&estimate.expected_opt),
        format_rational(&estimate.expected_welfare)
    ))
}

fn examples() -> Vec<CheckResult> {
    let mut checks = Vec::new();
    let v = SymmetricValuation::from_ints(&[0, 5, 9, 11]);
    let set = best_response(&v, &[int(4), int(4), int(4)], TieMode::All);
    checks.push(CheckResult::new("uniform price 4: first agent buys 1 or 2", set == vec![1, 2], format!("{set:?}")));
    let market = Market::new(3, vec![v.clone(), SymmetricValuation::from_ints(&[0, 2, 4, 5])]).expect("valid");
    let intro = Market::new(3, vec![v.clone(), v]).expect("valid");
    match simulator::simulate(&intro, &PriceVector::uniform(3, int(4)), &[0, 1], &[2, 1]) {
        Ok(outcome) => checks.push(CheckResult::new(
            "after 2 items the second agent takes the last one",
            outcome.purchases[1].quantity == 1,
            format!("{:?}", outcome.purchases.iter().map(|p| p.quantity).collect::<Vec<_>>()),
        )),
        Err(e) => checks.push(CheckResult::error("intro simulation", e)),
    }
    match market.marginal_profile() {
        Ok(p) => {
            let expected: Vec<Rational> = [5, 4, 2, 2, 2, 1].iter().map(|&x| int(x)).collect();
            checks.push(CheckResult::new("V", p.values == expected, format!("{:?}", p.values.iter().map(format_rational).collect::<Vec<_>>())));
            checks.push(CheckResult::new("delta", p.delta == int(1), format_rational(&p.delta)));
            checks.push(CheckResult::new("epsilon", p.epsilon == rat(1, 2), format_rational(&p.epsilon)));
            checks.push(CheckResult::new("b", p.b == int(2), format_rational(&p.b)));
            checks.push(CheckResult::new("G(b), E(b)", p.g_of_b == 2 && p.e_of_b == 3, format!("{} {}", p.g_of_b, p.e_of_b)));
            checks.push(CheckResult::new("m'", p.m_prime == 2, p.m_prime.to_string()));
        }
        Err(e) => checks.push(CheckResult::error("profile", e)),
    }
    let (opt, _) = optimal_welfare(&market);
    checks.push(CheckResult::new("OPT", opt == int(11), format_rational(&opt)));
    checks
}
